#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "su11/gain.hpp"
#include "su11/optics.hpp"

namespace su11 {

/// Frequency-flat reflector (ND filter in front of a mirror). |r| <= 1.
class UniformReflector {
public:
  explicit UniformReflector(cplx r);
  cplx r() const noexcept { return r_; }

private:
  cplx r_;
};

/// Two reflecting surfaces a distance d apart, first-order echoes only.
/// t is the signed distance from the front surface to the zero-path plane.
class TwoLayerSlab {
public:
  TwoLayerSlab(double r1, double r2, double d, double n_0, double n_g, double t);

  double r1() const noexcept { return r1_; }
  double r2() const noexcept { return r2_; }
  double d() const noexcept { return d_; }
  double n_0() const noexcept { return n_0_; }
  double n_g() const noexcept { return n_g_; }
  double t() const noexcept { return t_; }
  /// Group-delay path between the two echoes, 2 n_g d.
  double echo_spacing() const noexcept { return 2.0 * n_g_ * d_; }
  TwoLayerSlab with_t(double t) const { return {r1_, r2_, d_, n_0_, n_g_, t}; }

private:
  double r1_, r2_, d_, n_0_, n_g_, t_;
};

using Sample = std::variant<UniformReflector, TwoLayerSlab>;

/// r_i at every grid point, the grid value read as idler detuning.
std::vector<cplx> reflectivity(const Sample& sample, const FrequencyGrid& grid, const OpticsConfig& config);

/// Slab positions where echo peaks coincide.
enum class SlabAlignment {
  front_balanced, // 2t + offset = 0: front echo under DC
  symmetric,      // echoes at +-n_g d
  back_balanced,  // back echo under DC
};

SlabAlignment slab_alignment_from_string(std::string_view name);
/// t that realises `alignment` given the crystal offset (c D L by default).
double slab_t_for(SlabAlignment alignment, double n_g, double d, double offset);

/// Closed-form signal spectrum at low gain, valid for G <= 0.2. Detuning axis.
/// r_s = 1 reproduces the usual two-beam form 2|V|^2 {1 + r1 cos(..) + r2 cos(..)}.
Spectrum lowgain_two_layer_spectrum(const TwoLayerSlab& slab, const FrequencyGrid& grid, const GainParams& gain,
                                    const OpticsConfig& config, double z_s, double z_i, double r_s = 1.0,
                                    double theta = 0.0);

struct PredictedPeak {
  double position;
  int multiplicity;
};

/// {0, +-(2t + offset + dz), +-(2t + offset + dz - 2 n_g d)} with coincident entries merged.
/// offset defaults to c D L; dz is the geometric z_s - z_i.
std::vector<PredictedPeak> predicted_peak_positions(const TwoLayerSlab& slab, const OpticsConfig& config,
                                                    std::optional<double> offset = {}, double delta_z = 0.0);

/// {"kind":"uniform","r":0.5} or {"kind":"two_layer",...}. `offset` resolves "alignment".
Sample sample_from_json(const nlohmann::json& doc, std::optional<double> offset = {});
nlohmann::json sample_to_json(const Sample& sample);

} // namespace su11
