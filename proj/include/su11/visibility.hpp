#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "su11/gain.hpp"
#include "su11/interferometer.hpp"
#include "su11/optics.hpp"

namespace su11 {

/// Fringe visibility with the four spectral integrals it is built from.
/// nu = int U2_s V1_s U1_i(-W) conj(V2_s) exp(i W dz / c), alpha = int |V2_s|^2,
/// beta = int |U1_i(-W)|^2 |V2_s|^2, gamma = int |U2_s|^2 |V1_s|^2.
struct VisibilityResult {
  double v = 0.0;
  cplx nu;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta_z = 0.0; // geometric z_s - z_i
};

struct VisibilityOptions {
  /// Restrict the integrals to detunings inside [lo, hi]; full grid otherwise.
  std::optional<std::pair<double, double>> band;
  double rel_tol = 1e-3;
  int max_refinements = 4;
};

/// Visibility from precomputed transfer functions, no convergence control.
VisibilityResult visibility_integrals(const FrequencyGrid& grid, const TransferPair& pass1, const TransferPair& pass2,
                                      double delta_z, double r_s, double r_i_abs,
                                      std::optional<std::pair<double, double>> band = {});

/// Quadrature refined 2x until the visibility moves by less than rel_tol.
/// Throws ConvergenceError when the grid is narrower than 5 FWHM of |V_s|^2 or refinement stalls.
VisibilityResult visibility_multimode(const GainParams& g1, const GainParams& g2, const ArmGeometry& geom, cplx r_i,
                                      const FrequencyGrid& grid, const OpticsConfig& config,
                                      const VisibilityOptions& opts = {});

/// Path difference z_s - z_i that maximises |nu|, i.e. the visibility. Coarse scan, then golden section.
double balanced_delta_z(const GainParams& g1, const GainParams& g2, const FrequencyGrid& grid,
                        const OpticsConfig& config);

/// Visibility at the balanced path difference.
VisibilityResult visibility_optimal(const GainParams& g1, const GainParams& g2, double r_s, cplx r_i,
                                    const FrequencyGrid& grid, const OpticsConfig& config,
                                    const VisibilityOptions& opts = {});

double visibility_lowgain(double r_s, double r_i);
double visibility_highgain(double r_s, double r_i);
double visibility_singlemode(double G1, double G2, double r_s, double r_i);

/// Brute force: flux over a theta scan of n_theta points, (max - min) / (max + min).
double visibility_scan_oracle(const GainParams& g1, const GainParams& g2, const ArmGeometry& geom,
                              std::span<const cplx> r_i, const FrequencyGrid& grid, const OpticsConfig& config,
                              std::size_t n_theta = 256);

/// lambda^2 / delta_lambda.
double coherence_length(double lambda, double delta_lambda);

/// argmax of f on [a, b] for unimodal f.
double golden_section_max(const std::function<double(double)>& f, double a, double b, double tol);

struct VisibilityRow {
  double G;
  double r_s;
  double r_i;
  VisibilityResult result;
};

/// Header G,r_s,r_i,delta_z_m,visibility,nu_abs,alpha,beta,gamma.
std::string visibility_csv(std::span<const VisibilityRow> rows);

} // namespace su11
