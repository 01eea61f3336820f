#include "npcflow/oracles.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace npcflow {

double laplacian_eigenvalue(const Grid& grid, int k0, int k1)
{
  const double N = grid.nodes_per_axis();
  const double h2 = grid.h() * grid.h();
  double lam = (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k0 / N)) / h2;
  if (grid.dim() == 2) lam += (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k1 / N)) / h2;
  return lam;
}

OracleResult fourier_heat_oracle(const Grid& grid, std::span<const double> f0, double tau, int steps, double t)
{
  if (f0.size() != grid.size()) throw DomainError("Fourier oracle: data size does not match the grid");
  if (tau < 0.0 || steps < 0 || t < 0.0) throw DomainError("Fourier oracle: negative time parameters");
  const int N = grid.nodes_per_axis();
  const int K1 = grid.dim() == 2 ? N : 1;
  const std::size_t m = grid.size();
  const double two_pi = 2.0 * std::numbers::pi;

  // Naive DFT: O(m^2), fine at oracle sizes.
  std::vector<std::complex<double>> hat(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto kc = grid.coords(k);
    std::complex<double> acc = 0.0;
    for (std::size_t x = 0; x < m; ++x) {
      const auto c = grid.coords(x);
      const double phase = -two_pi * (static_cast<double>(kc[0]) * c[0] + static_cast<double>(kc[1]) * c[1]) / N;
      acc += f0[x] * std::polar(1.0, phase);
    }
    const double lam = laplacian_eigenvalue(grid, kc[0], grid.dim() == 2 ? kc[1] : 0);
    const double damp = tau > 0.0 ? std::pow(1.0 + tau * lam, -steps) : std::exp(-lam * t);
    hat[k] = acc * damp;
  }
  OracleResult out;
  out.id = "fourier_heat";
  out.values.resize(m);
  for (std::size_t x = 0; x < m; ++x) {
    const auto c = grid.coords(x);
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const auto kc = grid.coords(k);
      const double phase = two_pi * (static_cast<double>(kc[0]) * c[0] + static_cast<double>(kc[1]) * c[1]) / N;
      acc += hat[k] * std::polar(1.0, phase);
    }
    out.values[x] = acc.real() / static_cast<double>(m);
  }
  out.method = tau > 0.0 ? "DFT, implicit Euler damping per mode" : "DFT, exponential damping per mode";
  out.resolution = "N=" + std::to_string(N) + (K1 > 1 ? "^2" : "");
  return out;
}

} // namespace npcflow
