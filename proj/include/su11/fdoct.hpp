#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "su11/optics.hpp"

namespace su11 {

/// |FT| of a spectrum over wavenumber, on a symmetric path-difference axis.
struct DepthProfile {
  std::vector<double> depths;     // m, uniform, symmetric about 0
  std::vector<double> magnitudes; // >= 0
  double bin_width = 0.0;
};

struct Peak {
  double position; // m, parabolic refinement
  double height;
  double fwhm; // m
};

enum class Window { none, hann };
Window window_from_string(std::string_view name);

/// Undo the spectrometer blur on the depth axis: divide by exp(-z^2 dk^2 / (16 ln 2)),
/// dk = 2 pi resolution / lambda_c^2, with the boost capped at max_gain.
struct RolloffCompensation {
  double resolution;        // m of wavelength
  double center_wavelength; // m
  double max_gain = 20.0;
};

struct DepthOptions {
  Window window = Window::none;
  int zero_pad = 8;
  bool keep_mean = true;
  std::optional<RolloffCompensation> rolloff;
};

/// Jacobian to wavenumber, then natural cubic spline onto a uniform ascending k grid
/// with the same number of points. Negative interpolation overshoot is clipped.
Spectrum resample_uniform_k(const Spectrum& s);

/// Magnitude of dk * sum_k S(k) exp(i k z). Zero padding to an odd length >= zero_pad * N.
DepthProfile depth_profile(const Spectrum& uniform_k, const DepthOptions& opts = {});

/// Local maxima outside |z| <= exclude_dc_radius, kept if above min_height_frac of the
/// strongest of them and above 1e-3 of the profile maximum. Both signs of z are reported, ordered by position.
/// A flank that meets a higher neighbour before half height is mirrored from the other one.
std::vector<Peak> find_peaks(const DepthProfile& p, double min_height_frac = 0.1, double exclude_dc_radius = 0.0);

/// FWHM of `peak`. Throws ResolutionError when another entry of `peaks` lies within 3 FWHM.
double axial_resolution(std::span<const Peak> peaks, const Peak& peak);

/// (2 ln 2 / pi) lambda^2 / delta_lambda.
double transform_limit_resolution(double lambda, double delta_lambda);

/// DC exclusion used when none is given: the |FT| width of a Gaussian spectrum of the
/// configured signal bandwidth on the path-difference axis, (4 ln 2 / pi) lambda^2 / delta_lambda.
double default_dc_exclusion(const OpticsConfig& config);

struct EstimateOptions {
  DepthOptions depth;
  double min_height_frac = 0.1;
  double exclude_dc_radius = 0.0;
};

/// Position of the strongest peak at z > 0.
double estimate_delta_z(const Spectrum& measured, const EstimateOptions& opts);

struct DeltaZWindow {
  double lower; // lambda_s^2 / signal bandwidth
  double upper; // lambda_s^2 / resolution; infinity when the resolution is 0
  bool unbounded;
  bool degenerate; // lower >= upper
};

DeltaZWindow delta_z_window(const OpticsConfig& config);

/// "wavelength_m,value" rows; '#' starts a comment; a non-numeric first row is a header.
Spectrum read_spectrum_csv(const std::string& text);
std::string depth_profile_csv(const DepthProfile& p);
std::string peaks_csv(std::span<const Peak> peaks);
std::string depth_profile_svg(const DepthProfile& p, double z_max, std::string_view title);

} // namespace su11
