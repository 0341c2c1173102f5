#include "su11/visibility.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "su11/error.hpp"
#include "su11/io.hpp"
#include "su11/units.hpp"

namespace su11 {

using constants::c;
using constants::two_pi;

namespace {

std::pair<std::size_t, std::size_t> band_range(const FrequencyGrid& grid, std::optional<std::pair<double, double>> band) {
  if (!band) return {0, grid.size()};
  if (!(band->second > band->first)) throw ValidationError("visibility.band: max must exceed min");
  std::size_t lo = grid.size(), hi = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] >= band->first && grid[j] <= band->second) {
      lo = std::min(lo, j);
      hi = j + 1;
    }
  }
  if (hi < lo + 2) throw ValidationError("visibility.band: fewer than two grid points inside the band");
  return {lo, hi};
}

// products entering nu, without the path-difference phase
std::vector<cplx> nu_integrand(const FrequencyGrid& grid, const TransferPair& p1, const TransferPair& p2) {
  std::vector<cplx> w(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j)
    w[j] = p2.u_s[j] * p1.v_s[j] * p1.u_i[grid.mirror(j)] * std::conj(p2.v_s[j]);
  return w;
}

cplx nu_at(const FrequencyGrid& grid, std::span<const cplx> w, double delta_z, std::size_t lo, std::size_t hi) {
  cplx acc = 0.0;
  const double h = grid.spacing();
  for (std::size_t j = lo; j < hi; ++j) {
    const double weight = (j == lo || j + 1 == hi) ? 0.5 : 1.0;
    acc += weight * w[j] * std::polar(1.0, grid[j] * delta_z / c);
  }
  return acc * h;
}

// full width at half maximum of |V_s|^2 in detuning, from the grid samples
double grid_fwhm(const FrequencyGrid& grid, const TransferPair& p) {
  std::size_t top = 0;
  double peak = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double v = std::norm(p.v_s[j]);
    if (v > peak) {
      peak = v;
      top = j;
    }
  }
  if (!(peak > 0.0)) throw DomainError("visibility: no parametric gain, the spectrum vanishes");
  const double half = 0.5 * peak;
  std::size_t a = top;
  while (a > 0 && std::norm(p.v_s[a]) > half) --a;
  std::size_t b = top;
  while (b + 1 < grid.size() && std::norm(p.v_s[b]) > half) ++b;
  if (std::norm(p.v_s[a]) > half || std::norm(p.v_s[b]) > half)
    throw ConvergenceError("visibility: |V_s|^2 does not fall to half maximum inside the grid");
  auto cross = [&](std::size_t i0, std::size_t i1) {
    const double y0 = std::norm(p.v_s[i0]);
    const double y1 = std::norm(p.v_s[i1]);
    return grid[i0] + (half - y0) / (y1 - y0) * (grid[i1] - grid[i0]);
  };
  return cross(b - 1, b) - cross(a + 1, a);
}

} // namespace

VisibilityResult visibility_integrals(const FrequencyGrid& grid, const TransferPair& p1, const TransferPair& p2,
                                      double delta_z, double r_s, double r_i_abs,
                                      std::optional<std::pair<double, double>> band) {
  if (!(r_s >= 0.0 && r_s <= 1.0)) throw ValidationError("visibility: r_s must be in [0,1]");
  if (!(r_i_abs >= 0.0 && r_i_abs <= 1.0)) throw ValidationError("visibility: |r_i| must be in [0,1]");
  const auto [lo, hi] = band_range(grid, band);
  const auto w = nu_integrand(grid, p1, p2);
  VisibilityResult r;
  r.delta_z = delta_z;
  r.nu = nu_at(grid, w, delta_z, lo, hi);
  const double h = grid.spacing();
  for (std::size_t j = lo; j < hi; ++j) {
    const double weight = ((j == lo || j + 1 == hi) ? 0.5 : 1.0) * h;
    const double v2 = std::norm(p2.v_s[j]);
    r.alpha += weight * v2;
    r.beta += weight * std::norm(p1.u_i[grid.mirror(j)]) * v2;
    r.gamma += weight * std::norm(p2.u_s[j]) * std::norm(p1.v_s[j]);
  }
  const double den = (1.0 - r_i_abs * r_i_abs) * r.alpha + r_i_abs * r_i_abs * r.beta + r_s * r_s * r.gamma;
  if (!(den > 0.0)) throw DomainError("visibility: no signal flux (both gains zero)");
  r.v = 2.0 * r_s * r_i_abs * std::abs(r.nu) / den;
  return r;
}

VisibilityResult visibility_multimode(const GainParams& g1, const GainParams& g2, const ArmGeometry& geom, cplx r_i,
                                      const FrequencyGrid& grid, const OpticsConfig& config,
                                      const VisibilityOptions& opts) {
  geom.validate();
  const double r_abs = std::abs(r_i);
  if (r_abs > 1.0 + 1e-12) throw PassivityError("visibility: |r_i| exceeds 1");
  FrequencyGrid g = grid;
  auto p1 = transfer_functions(g, g1, config);
  auto p2 = transfer_functions(g, g2, config);
  const double fwhm = std::max(grid_fwhm(g, p1), grid_fwhm(g, p2));
  if (2.0 * g.span() < 5.0 * fwhm)
    throw ConvergenceError(fmt::format("visibility: grid width {:.3e} rad/s is below 5 x FWHM ({:.3e} rad/s)",
                                       2.0 * g.span(), 5.0 * fwhm));
  auto current = visibility_integrals(g, p1, p2, geom.delta_z(), geom.r_s, std::min(r_abs, 1.0), opts.band);
  for (int k = 0; k < opts.max_refinements; ++k) {
    g = g.refined();
    p1 = transfer_functions(g, g1, config);
    p2 = transfer_functions(g, g2, config);
    auto next = visibility_integrals(g, p1, p2, geom.delta_z(), geom.r_s, std::min(r_abs, 1.0), opts.band);
    const double change = std::abs(next.v - current.v);
    if (change <= opts.rel_tol * std::abs(next.v) || change < 1e-14) return next;
    current = next;
  }
  throw ConvergenceError(fmt::format("visibility: still changing after {} refinements (last V = {:.6f})",
                                     opts.max_refinements, current.v));
}

double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (std::abs(b - a) > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

double balanced_delta_z(const GainParams& g1, const GainParams& g2, const FrequencyGrid& grid,
                        const OpticsConfig& config) {
  const auto p1 = transfer_functions(grid, g1, config);
  const auto p2 = transfer_functions(grid, g2, config);
  const auto w = nu_integrand(grid, p1, p2);
  const double fwhm = grid_fwhm(grid, p1);
  const double l = two_pi * c / fwhm;
  // the crystal shifts the balanced point by about c D L; search well past it
  const double reach = 2.0 * std::abs(config.group_delay_offset()) + 4.0 * l;
  const double step = l / 40.0;
  const int n = static_cast<int>(std::ceil(reach / step));
  auto mag = [&](double dz) { return std::abs(nu_at(grid, w, dz, 0, grid.size())); };
  double best = 0.0, best_val = -1.0;
  for (int k = -n; k <= n; ++k) {
    const double dz = k * step;
    const double m = mag(dz);
    if (m > best_val) {
      best_val = m;
      best = dz;
    }
  }
  return golden_section_max(mag, best - step, best + step, 1e-10);
}

VisibilityResult visibility_optimal(const GainParams& g1, const GainParams& g2, double r_s, cplx r_i,
                                    const FrequencyGrid& grid, const OpticsConfig& config,
                                    const VisibilityOptions& opts) {
  ArmGeometry geom;
  geom.r_s = r_s;
  geom.z_i = 0.05;
  geom.z_s = geom.z_i + balanced_delta_z(g1, g2, grid, config);
  return visibility_multimode(g1, g2, geom, r_i, grid, config, opts);
}

double visibility_lowgain(double r_s, double r_i) {
  if (!(r_s >= 0.0 && r_s <= 1.0) || !(r_i >= 0.0 && r_i <= 1.0))
    throw ValidationError("visibility_lowgain: reflectivities must be in [0,1]");
  return 2.0 * r_s * r_i / (1.0 + r_s * r_s);
}

double visibility_highgain(double r_s, double r_i) {
  if (!(r_s >= 0.0 && r_s <= 1.0) || !(r_i >= 0.0 && r_i <= 1.0))
    throw ValidationError("visibility_highgain: reflectivities must be in [0,1]");
  if (r_s == 0.0 && r_i == 0.0) throw DomainError("visibility_highgain: undefined for r_s = r_i = 0");
  return 2.0 * r_s * r_i / (r_i * r_i + r_s * r_s);
}

double visibility_singlemode(double G1, double G2, double r_s, double r_i) {
  if (!(G1 >= 0.0) || !(G2 >= 0.0)) throw ValidationError("visibility_singlemode: gains must be >= 0");
  if (!(r_s >= 0.0 && r_s <= 1.0) || !(r_i >= 0.0 && r_i <= 1.0))
    throw ValidationError("visibility_singlemode: reflectivities must be in [0,1]");
  if (G1 == 0.0 && G2 == 0.0) throw DomainError("visibility_singlemode: no field for G1 = G2 = 0");
  auto sh2 = [](double x) {
    const double s = std::sinh(x);
    return s * s;
  };
  const double s1 = sh2(G1);
  const double s2 = sh2(G2);
  const double num = 0.5 * r_s * r_i * (sh2(G1 + G2) - sh2(G1 - G2));
  const double den = s2 + r_s * r_s * s1 + (r_s * r_s + r_i * r_i) * s1 * s2;
  return num / den;
}

double visibility_scan_oracle(const GainParams& g1, const GainParams& g2, const ArmGeometry& geom,
                              std::span<const cplx> r_i, const FrequencyGrid& grid, const OpticsConfig& config,
                              std::size_t n_theta) {
  if (n_theta < 256) throw ValidationError(fmt::format("visibility_scan_oracle: need >= 256 phases (got {})", n_theta));
  const auto p1 = transfer_functions(grid, g1, config);
  const auto p2 = transfer_functions(grid, g2, config);
  std::vector<double> thetas(n_theta);
  for (std::size_t k = 0; k < n_theta; ++k) thetas[k] = two_pi * static_cast<double>(k) / static_cast<double>(n_theta);
  const auto scan = phase_scan(grid, p1, p2, geom, r_i, config, thetas);
  double lo = scan.front().rate, hi = lo;
  for (const auto& p : scan) {
    lo = std::min(lo, p.rate);
    hi = std::max(hi, p.rate);
  }
  if (!(hi + lo > 0.0)) throw DomainError("visibility_scan_oracle: no signal flux");
  return (hi - lo) / (hi + lo);
}

double coherence_length(double lambda, double delta_lambda) {
  if (!(lambda > 0.0) || !(delta_lambda > 0.0))
    throw ValidationError("coherence_length: wavelength and bandwidth must be positive");
  return lambda * lambda / delta_lambda;
}

std::string visibility_csv(std::span<const VisibilityRow> rows) {
  std::string out = "G,r_s,r_i,delta_z_m,visibility,nu_abs,alpha,beta,gamma\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", format_number(r.G), format_number(r.r_s), format_number(r.r_i),
                       format_number(r.result.delta_z), format_number(r.result.v), format_number(std::abs(r.result.nu)),
                       format_number(r.result.alpha), format_number(r.result.beta), format_number(r.result.gamma));
  return out;
}

} // namespace su11
