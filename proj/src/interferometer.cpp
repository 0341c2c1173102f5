#include "su11/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "spline.hpp"
#include "su11/error.hpp"
#include "su11/io.hpp"
#include "su11/units.hpp"

namespace su11 {

using constants::c;
using constants::two_pi;

void ArmGeometry::validate() const {
  if (!(z_s >= 0.0) || !std::isfinite(z_s)) throw ValidationError(fmt::format("geometry.z_s: must be >= 0 (got {})", z_s));
  if (!(z_i >= 0.0) || !std::isfinite(z_i)) throw ValidationError(fmt::format("geometry.z_i: must be >= 0 (got {})", z_i));
  if (!(r_s >= 0.0 && r_s <= 1.0)) throw ValidationError(fmt::format("geometry.r_s: must be in [0,1] (got {})", r_s));
  if (!std::isfinite(phase_offset)) throw ValidationError("geometry.phase_offset: not finite");
}

SpectrometerModel SpectrometerModel::uniform(double lo, double hi, std::size_t pixels, double resolution) {
  if (pixels < 2) throw ValidationError("detector.pixels: need >= 2");
  if (!(hi > lo) || !(lo > 0.0)) throw ValidationError("detector.range: need 0 < min < max");
  SpectrometerModel m;
  m.resolution_fwhm = resolution;
  m.grid.resize(pixels);
  const double step = (hi - lo) / static_cast<double>(pixels - 1);
  for (std::size_t j = 0; j < pixels; ++j) m.grid[j] = lo + step * static_cast<double>(j);
  m.grid.back() = hi;
  m.validate();
  return m;
}

void SpectrometerModel::validate() const {
  if (!(resolution_fwhm >= 0.0)) throw ValidationError("detector.resolution: must be >= 0");
  if (grid.size() < 2) throw ValidationError("detector.pixels: need >= 2");
  for (std::size_t j = 1; j < grid.size(); ++j)
    if (!(grid[j] > grid[j - 1])) throw ValidationError("detector.grid: must be strictly ascending");
  if (noise && !(photon_scale > 0.0)) throw ValidationError("detector.photon_scale: must be positive");
}

namespace {

void check_inputs(const FrequencyGrid& grid, const TransferPair& pass1, const TransferPair& pass2,
                  std::span<const cplx> r_i) {
  if (pass1.size() != grid.size() || pass2.size() != grid.size())
    throw ValidationError(fmt::format("output_spectrum: transfer functions have {} and {} points, grid has {}",
                                      pass1.size(), pass2.size(), grid.size()));
  if (r_i.size() != grid.size())
    throw ValidationError(fmt::format("output_spectrum: reflectivity has {} points, grid has {}", r_i.size(), grid.size()));
  for (const cplx& r : r_i)
    if (std::abs(r) > 1.0 + 1e-12) throw PassivityError(fmt::format("output_spectrum: |r_i| = {} exceeds 1", std::abs(r)));
}

} // namespace

ModeExpansion mode_expansion(const FrequencyGrid& grid, const TransferPair& pass1, const TransferPair& pass2,
                             const ArmGeometry& geom, std::span<const cplx> r_i, const OpticsConfig& config) {
  geom.validate();
  check_inputs(grid, pass1, pass2, r_i);
  const std::size_t n = grid.size();
  const double w_s = config.omega_s();
  const double w_i = config.omega_i();
  const double t_s = std::sqrt(std::max(0.0, 1.0 - geom.r_s * geom.r_s));
  ModeExpansion m;
  m.c_as.resize(n);
  m.c_ai.resize(n);
  m.c_fs.resize(n);
  m.c_fi.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = grid.mirror(j);
    const double w = grid[j];
    const cplx arm_s = geom.r_s * std::polar(1.0, (w_s + w) * geom.z_s / c + geom.phase_offset);
    // idler at -Omega returning from the sample, conjugated as it enters a^dag
    const cplx arm_i = std::conj(r_i[k]) * std::polar(1.0, -(w_i - w) * geom.z_i / c);
    const cplx u2 = pass2.u_s[j];
    const cplx v2 = pass2.v_s[j];
    m.c_as[j] = u2 * arm_s * pass1.u_s[j] + v2 * arm_i * std::conj(pass1.v_i[k]);
    m.c_ai[j] = u2 * arm_s * pass1.v_s[j] + v2 * arm_i * std::conj(pass1.u_i[k]);
    m.c_fs[j] = u2 * t_s;
    m.c_fi[j] = v2 * std::sqrt(std::max(0.0, 1.0 - std::norm(r_i[k])));
  }
  return m;
}

Spectrum output_spectrum(const FrequencyGrid& grid, const TransferPair& pass1, const TransferPair& pass2,
                         const ArmGeometry& geom, std::span<const cplx> r_i, const OpticsConfig& config) {
  const ModeExpansion m = mode_expansion(grid, pass1, pass2, geom, r_i, config);
  std::vector<double> values(grid.size());
  double peak = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    values[j] = std::norm(m.c_ai[j]) + std::norm(m.c_fi[j]);
    peak = std::max(peak, values[j]);
  }
  for (double v : values)
    if (!(v >= -1e-12 * peak) || !std::isfinite(v)) throw NumericError("output_spectrum: negative or non-finite density");
  std::vector<double> axis(grid.detunings().begin(), grid.detunings().end());
  return Spectrum(AxisKind::detuning, std::move(axis), std::move(values), grid.omega_s0());
}

Spectrum output_spectrum(const FrequencyGrid& grid, const TransferPair& pass1, const TransferPair& pass2,
                         const ArmGeometry& geom, const Sample& sample, const OpticsConfig& config) {
  const auto r = reflectivity(sample, grid, config);
  return output_spectrum(grid, pass1, pass2, geom, r, config);
}

double flux_rate(const Spectrum& s) {
  if (s.kind() != AxisKind::detuning)
    throw ValidationError(fmt::format("flux_rate: needs a detuning-axis spectrum (got {})", to_string(s.kind())));
  return s.integral() / two_pi;
}

std::vector<ScanPoint> phase_scan(const FrequencyGrid& grid, const TransferPair& pass1, const TransferPair& pass2,
                                  const ArmGeometry& geom, std::span<const cplx> r_i, const OpticsConfig& config,
                                  std::span<const double> thetas) {
  if (thetas.size() < 8) throw ValidationError(fmt::format("phase_scan: need >= 8 phases (got {})", thetas.size()));
  const auto [lo, hi] = std::minmax_element(thetas.begin(), thetas.end());
  // the scan samples one period when the last step would wrap back onto the first point
  const double span = *hi - *lo + (*hi - *lo) / static_cast<double>(thetas.size() - 1);
  if (span < two_pi * (1.0 - 1e-12))
    throw ValidationError(
        fmt::format("phase_scan: phases cover {:.4f} rad, less than a period; visibility would be underestimated", span));
  std::vector<ScanPoint> out;
  out.reserve(thetas.size());
  for (double th : thetas) {
    ArmGeometry g = geom;
    g.phase_offset = geom.phase_offset + th;
    out.push_back({th, flux_rate(output_spectrum(grid, pass1, pass2, g, r_i, config))});
  }
  return out;
}

double gaussian_mtf(double period, double resolution) {
  if (!(period > 0.0)) throw ValidationError("gaussian_mtf: period must be positive");
  const double q = two_pi / period;
  return std::exp(-q * q * resolution * resolution / (16.0 * std::log(2.0)));
}

Spectrum detect(const Spectrum& s, const SpectrometerModel& model, const OpticsConfig& config, std::mt19937_64* rng) {
  model.validate();
  (void)config;
  Spectrum in_lambda = s.kind() == AxisKind::wavelength ? s : convert_axis(s, AxisKind::wavelength);
  std::vector<std::size_t> order(in_lambda.size());
  std::iota(order.begin(), order.end(), 0);
  const auto ax = in_lambda.axis();
  const auto va = in_lambda.values();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ax[a] < ax[b]; });
  std::vector<double> lam(order.size()), val(order.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    lam[j] = ax[order[j]];
    val[j] = va[order[j]];
  }
  if (model.grid.front() < lam.front() || model.grid.back() > lam.back())
    throw ValidationError(fmt::format("detector.range: [{:.6e}, {:.6e}] m lies outside the spectrum support "
                                      "[{:.6e}, {:.6e}] m",
                                      model.grid.front(), model.grid.back(), lam.front(), lam.back()));

  std::vector<double> out(model.grid.size());
  const detail::CubicSpline spline(lam, val);
  if (model.resolution_fwhm == 0.0) {
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = spline(model.grid[p]);
  } else {
    // Gaussian blur of the spline interpolant; the sub-grid resolves both the kernel and the source
    // spacing, so resolutions below one source sample stay accurate.
    const double sigma = model.resolution_fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double reach = 8.0 * sigma;
    const double spacing = (lam.back() - lam.front()) / static_cast<double>(lam.size() - 1);
    const auto half_steps = static_cast<long>(std::ceil(reach / std::min(sigma / 4.0, spacing)));
    const double h = reach / static_cast<double>(half_steps);
    std::vector<double> kernel(static_cast<std::size_t>(2 * half_steps + 1));
    for (long j = -half_steps; j <= half_steps; ++j) {
      const double u = static_cast<double>(j) * h / sigma;
      kernel[static_cast<std::size_t>(j + half_steps)] = std::exp(-0.5 * u * u) * h / (sigma * std::sqrt(two_pi));
    }
    for (std::size_t p = 0; p < out.size(); ++p) {
      double acc = 0.0;
      for (long j = -half_steps; j <= half_steps; ++j) {
        const double x = model.grid[p] + static_cast<double>(j) * h;
        if (x < lam.front() || x > lam.back()) continue;
        acc += spline(x) * kernel[static_cast<std::size_t>(j + half_steps)];
      }
      out[p] = acc;
    }
  }
  for (double& v : out) v = std::max(v, 0.0);
  if (model.noise) {
    if (!rng) throw ValidationError("detect: shot noise requested without a random generator");
    // counts are relative to the brightest pixel, so the scale does not depend on axis units
    const double peak = *std::max_element(out.begin(), out.end());
    if (peak > 0.0) {
      const double per_count = peak / model.photon_scale;
      for (double& v : out) {
        std::poisson_distribution<long long> dist(v / per_count);
        v = static_cast<double>(dist(*rng)) * per_count;
      }
    }
  }
  return Spectrum(AxisKind::wavelength, model.grid, std::move(out));
}

std::string spectrum_to_csv(const Spectrum& s) {
  std::string out = "axis_kind,axis_value,value\n";
  const auto kind = to_string(s.kind());
  for (std::size_t j = 0; j < s.size(); ++j)
    out += fmt::format("{},{},{}\n", kind, format_number(s.axis()[j]), format_number(s.values()[j]));
  return out;
}

nlohmann::json spectrum_to_json(const Spectrum& s) {
  nlohmann::json j{{"axis_kind", std::string(to_string(s.kind()))},
                   {"axis", std::vector<double>(s.axis().begin(), s.axis().end())},
                   {"values", std::vector<double>(s.values().begin(), s.values().end())}};
  if (s.kind() == AxisKind::detuning) j["carrier"] = s.carrier();
  return j;
}

Spectrum spectrum_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("axis_kind") || !doc.contains("axis") || !doc.contains("values"))
    throw ValidationError("spectrum: needs axis_kind, axis and values");
  const auto kind = axis_kind_from_string(doc["axis_kind"].get<std::string>());
  const double carrier = doc.contains("carrier") ? doc["carrier"].get<double>() : 0.0;
  return Spectrum(kind, doc["axis"].get<std::vector<double>>(), doc["values"].get<std::vector<double>>(), carrier);
}

nlohmann::json spectrometer_to_json(const SpectrometerModel& model) {
  return {{"resolution_fwhm", model.resolution_fwhm},
          {"pixels", model.grid.size()},
          {"range", {model.grid.front(), model.grid.back()}},
          {"noise", model.noise},
          {"photon_scale", model.photon_scale}};
}

} // namespace su11
