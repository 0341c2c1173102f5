#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace su11 {

/// Fixed constants of the experiment. SI units throughout.
struct OpticsParams {
  double lambda_p = 532e-9;
  double lambda_s = 810e-9;
  /// Derived from energy conservation when absent.
  std::optional<double> lambda_i;
  double n_p = 2.234; // extraordinary indices of congruent LiNbO3
  double n_s = 2.175;
  double n_i = 2.138;
  /// Inverse group velocities (s/m). No default: set them or calibrate the mismatch.
  std::optional<double> D_s;
  std::optional<double> D_i;
  double L = 1e-3;
  double delta_lambda_res = 1.2e-9;
  std::pair<double, double> spectrometer_range{770e-9, 850e-9};
  /// Signal bandwidth (FWHM) used by the path-difference window and DC exclusion.
  double signal_fwhm = 8e-9;
};

class OpticsConfig {
public:
  OpticsConfig();
  /// Validates: positive lengths, lambda_s < lambda_i, and
  /// 1/lambda_p = 1/lambda_s + 1/lambda_i to 1e-6 relative.
  explicit OpticsConfig(OpticsParams params);

  const OpticsParams& params() const noexcept { return params_; }

  double lambda_p() const noexcept { return params_.lambda_p; }
  double lambda_s() const noexcept { return params_.lambda_s; }
  double lambda_i() const noexcept { return *params_.lambda_i; }
  double omega_p() const noexcept;
  double omega_s() const noexcept;
  double omega_i() const noexcept;
  double k_p() const noexcept;
  double k_s() const noexcept;
  double k_i() const noexcept;
  double crystal_length() const noexcept { return params_.L; }

  bool has_dispersion() const noexcept { return params_.D_s && params_.D_i; }
  double D_s() const;
  double D_i() const;
  /// D_i - D_s. Throws ValidationError when either is unset.
  double dispersion_mismatch() const;
  /// c (D_s - D_i) L: the crystal's contribution to the signal-idler delay.
  double group_delay_offset() const;

  OpticsConfig with_dispersion(double D_s, double D_i) const;

private:
  OpticsParams params_;
};

/// Strict parse: unknown keys are rejected; lengths accept unit suffixes.
OpticsConfig optics_from_json(const nlohmann::json& doc);
nlohmann::json optics_to_json(const OpticsConfig& config);

/// Odd-length detuning grid symmetric about zero, so Omega <-> -Omega is index reflection.
class FrequencyGrid {
public:
  FrequencyGrid(double omega_s0, double span, std::size_t count);

  double omega_s0() const noexcept { return omega_s0_; }
  double span() const noexcept { return span_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return detunings_.size(); }
  std::span<const double> detunings() const noexcept { return detunings_; }
  double operator[](std::size_t j) const noexcept { return detunings_[j]; }
  /// Index of -Omega_j.
  std::size_t mirror(std::size_t j) const noexcept { return detunings_.size() - 1 - j; }
  /// Same span, (count - 1) * 2 + 1 points.
  FrequencyGrid refined() const;

  bool operator==(const FrequencyGrid&) const = default;

private:
  double omega_s0_;
  double span_;
  double spacing_;
  std::vector<double> detunings_;
};

FrequencyGrid make_grid(const OpticsConfig& config, double span, std::size_t count);

enum class AxisKind { wavelength, detuning, wavenumber };

std::string_view to_string(AxisKind kind);
AxisKind axis_kind_from_string(std::string_view name);

/// Nonnegative spectral density over a strictly monotone axis.
/// Detuning spectra carry the carrier angular frequency they are measured from.
class Spectrum {
public:
  Spectrum(AxisKind kind, std::vector<double> axis, std::vector<double> values, double carrier = 0.0);

  AxisKind kind() const noexcept { return kind_; }
  std::span<const double> axis() const noexcept { return axis_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return axis_.size(); }
  double carrier() const noexcept { return carrier_; }

  /// Trapezoidal integral over the axis (orientation-independent).
  double integral() const;

private:
  AxisKind kind_;
  std::vector<double> axis_;
  std::vector<double> values_;
  double carrier_;
};

/// Change of variable with Jacobian so the integral over the axis is preserved.
/// Sample order is kept (a wavelength-ascending input gives a wavenumber-descending output).
/// `carrier` is needed when converting into the detuning axis from another axis.
Spectrum convert_axis(const Spectrum& s, AxisKind target, std::optional<double> carrier = {});

double trapezoid(std::span<const double> x, std::span<const double> y);

} // namespace su11
