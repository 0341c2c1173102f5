#include "su11/fdoct.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <sstream>

#include <fftw3.h>
#include <fmt/format.h>

#include "spline.hpp"
#include "su11/error.hpp"
#include "su11/io.hpp"
#include "su11/units.hpp"

namespace su11 {

using constants::pi;
using constants::two_pi;

namespace {

// the FFTW planner is not reentrant
std::mutex planner_mutex;

std::size_t odd_at_least(double n) {
  auto m = static_cast<std::size_t>(std::ceil(n));
  return m % 2 == 1 ? m : m + 1;
}

} // namespace

Window window_from_string(std::string_view name) {
  if (name == "none") return Window::none;
  if (name == "hann") return Window::hann;
  throw ValidationError(fmt::format("reconstruction.window: unknown window '{}' (none, hann)", name));
}

Spectrum resample_uniform_k(const Spectrum& s) {
  if (s.size() < 16) throw ValidationError(fmt::format("resample_uniform_k: need >= 16 samples (got {})", s.size()));
  const Spectrum k = s.kind() == AxisKind::wavenumber ? s : convert_axis(s, AxisKind::wavenumber);
  std::vector<double> x(k.axis().begin(), k.axis().end());
  std::vector<double> y(k.values().begin(), k.values().end());
  if (x.front() > x.back()) {
    std::reverse(x.begin(), x.end());
    std::reverse(y.begin(), y.end());
  }
  const detail::CubicSpline spline(x, y);
  const std::size_t n = x.size();
  std::vector<double> ku(n), su(n);
  const double lo = x.front();
  const double hi = x.back();
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) ku[j] = lo + h * static_cast<double>(j);
  ku.back() = hi;
  for (std::size_t j = 0; j < n; ++j) su[j] = std::max(0.0, spline(ku[j]));
  su.front() = y.front();
  su.back() = y.back();
  return Spectrum(AxisKind::wavenumber, std::move(ku), std::move(su));
}

DepthProfile depth_profile(const Spectrum& s, const DepthOptions& opts) {
  if (s.kind() != AxisKind::wavenumber)
    throw ValidationError(fmt::format("depth_profile: needs a wavenumber axis (got {})", to_string(s.kind())));
  if (opts.zero_pad < 1) throw ValidationError("reconstruction.zero_pad: must be >= 1");
  const std::size_t n = s.size();
  const auto k = s.axis();
  const double dk = (k.back() - k.front()) / static_cast<double>(n - 1);
  for (std::size_t j = 1; j < n; ++j)
    if (std::abs((k[j] - k[j - 1]) - dk) > 1e-8 * std::abs(dk))
      throw ValidationError("depth_profile: wavenumber grid is not uniform (resample first)");
  const double step = std::abs(dk);

  std::vector<double> v(s.values().begin(), s.values().end());
  if (!opts.keep_mean) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    for (double& x : v) x -= mean;
  }
  if (opts.window == Window::hann)
    for (std::size_t j = 0; j < n; ++j) v[j] *= 0.5 * (1.0 - std::cos(two_pi * static_cast<double>(j) / static_cast<double>(n - 1)));

  const std::size_t N = odd_at_least(static_cast<double>(opts.zero_pad) * static_cast<double>(n));
  std::vector<std::complex<double>> buf(N, 0.0);
  for (std::size_t j = 0; j < n; ++j) buf[j] = v[j];
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_dft_1d(static_cast<int>(N), reinterpret_cast<fftw_complex*>(buf.data()),
                            reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (!plan) throw NumericError("depth_profile: FFT plan failed");
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
  }

  DepthProfile p;
  p.bin_width = two_pi / (static_cast<double>(N) * step);
  p.depths.resize(N);
  p.magnitudes.resize(N);
  const auto half = static_cast<std::ptrdiff_t>((N - 1) / 2);
  for (std::size_t j = 0; j < N; ++j) {
    const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(j) - half;
    const std::size_t src = static_cast<std::size_t>((m + static_cast<std::ptrdiff_t>(N)) % static_cast<std::ptrdiff_t>(N));
    p.depths[j] = static_cast<double>(m) * p.bin_width;
    p.magnitudes[j] = step * std::abs(buf[src]);
  }
  if (opts.rolloff) {
    const auto& r = *opts.rolloff;
    if (!(r.resolution >= 0.0) || !(r.center_wavelength > 0.0) || !(r.max_gain >= 1.0))
      throw ValidationError("reconstruction.rolloff: bad parameters");
    const double dkr = two_pi * r.resolution / (r.center_wavelength * r.center_wavelength);
    for (std::size_t j = 0; j < N; ++j) {
      const double z = p.depths[j];
      const double mtf = std::exp(-z * z * dkr * dkr / (16.0 * std::log(2.0)));
      p.magnitudes[j] /= std::max(mtf, 1.0 / r.max_gain);
    }
  }
  return p;
}

std::vector<Peak> find_peaks(const DepthProfile& p, double min_height_frac, double exclude_dc_radius) {
  if (p.magnitudes.size() < 3) throw ValidationError("find_peaks: profile too short");
  if (!(min_height_frac >= 0.0 && min_height_frac <= 1.0))
    throw ValidationError("find_peaks: min_height_frac must be in [0,1]");
  const auto& y = p.magnitudes;
  const auto& z = p.depths;
  const double overall = *std::max_element(y.begin(), y.end());
  // window-edge ripple in the far tails sits near 1e-4 of the DC peak, more after roll-off boost
  const double floor = 1e-3 * overall;
  std::vector<std::size_t> cand;
  for (std::size_t j = 1; j + 1 < y.size(); ++j)
    if (std::abs(z[j]) > exclude_dc_radius && y[j] > y[j - 1] && y[j] >= y[j + 1] && y[j] > floor) cand.push_back(j);
  double ref = 0.0;
  for (std::size_t j : cand) ref = std::max(ref, y[j]);
  std::vector<Peak> out;
  for (std::size_t j : cand) {
    if (y[j] < min_height_frac * ref) continue;
    const double a = y[j - 1], b = y[j], c = y[j + 1];
    const double den = a - 2.0 * b + c;
    const double delta = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
    const double height = b - 0.25 * (a - c) * delta;
    const double half = 0.5 * height;
    // walk down each flank; a valley above half height means a neighbour blocks that side
    std::size_t l = j;
    while (l > 0 && y[l] > half && y[l - 1] <= y[l]) --l;
    std::size_t r = j;
    while (r + 1 < y.size() && y[r] > half && y[r + 1] <= y[r]) ++r;
    auto cross = [&](std::size_t i0, std::size_t i1) {
      if (y[i0] == y[i1]) return z[i0];
      return z[i0] + (half - y[i0]) / (y[i1] - y[i0]) * (z[i1] - z[i0]);
    };
    const double centre = z[j] + delta * p.bin_width;
    const bool left_ok = y[l] <= half, right_ok = y[r] <= half;
    double zl = left_ok ? cross(l, l + 1) : z[l];
    double zr = right_ok ? cross(r - 1, r) : z[r];
    if (left_ok && !right_ok) zr = centre + (centre - zl);
    if (right_ok && !left_ok) zl = centre - (zr - centre);
    out.push_back({centre, height, std::max(zr - zl, p.bin_width)});
  }
  return out;
}

double axial_resolution(std::span<const Peak> peaks, const Peak& peak) {
  for (const auto& q : peaks) {
    if (q.position == peak.position) continue;
    if (std::abs(q.position - peak.position) < 3.0 * peak.fwhm)
      throw ResolutionError(fmt::format("axial_resolution: neighbour at {:.1f} um is within 3 FWHM ({:.1f} um) of "
                                        "the peak at {:.1f} um",
                                        q.position * 1e6, 3.0 * peak.fwhm * 1e6, peak.position * 1e6));
  }
  return peak.fwhm;
}

double transform_limit_resolution(double lambda, double delta_lambda) {
  if (!(lambda > 0.0) || !(delta_lambda > 0.0))
    throw ValidationError("transform_limit_resolution: wavelength and bandwidth must be positive");
  return 2.0 * std::log(2.0) / pi * lambda * lambda / delta_lambda;
}

double default_dc_exclusion(const OpticsConfig& config) {
  return 2.0 * transform_limit_resolution(config.lambda_s(), config.params().signal_fwhm);
}

double estimate_delta_z(const Spectrum& measured, const EstimateOptions& opts) {
  const auto profile = depth_profile(resample_uniform_k(measured), opts.depth);
  const auto peaks = find_peaks(profile, opts.min_height_frac, opts.exclude_dc_radius);
  const Peak* best = nullptr;
  for (const auto& p : peaks)
    if (p.position > 0.0 && (!best || p.height > best->height)) best = &p;
  if (!best)
    throw EstimationError(fmt::format("estimate_delta_z: no fringe peak beyond the DC exclusion of {:.1f} um",
                                      opts.exclude_dc_radius * 1e6));
  return best->position;
}

DeltaZWindow delta_z_window(const OpticsConfig& config) {
  const double ls = config.lambda_s();
  const double bw = config.params().signal_fwhm;
  const double res = config.params().delta_lambda_res;
  if (!(bw > 0.0)) throw ValidationError("delta_z_window: signal bandwidth must be positive");
  DeltaZWindow w{};
  w.lower = ls * ls / bw;
  w.unbounded = !(res > 0.0);
  w.upper = w.unbounded ? std::numeric_limits<double>::infinity() : ls * ls / res;
  w.degenerate = !w.unbounded && w.lower >= w.upper * (1.0 - 1e-12);
  return w;
}

namespace {

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

} // namespace

Spectrum read_spectrum_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<double> x, y;
  std::size_t lineno = 0;
  bool seen_row = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ValidationError(fmt::format("spectrum csv line {}: expected wavelength_m,value", lineno));
    double a = 0.0, b = 0.0;
    const bool ok = parse_double(std::string_view(line).substr(0, comma), a) &&
                    parse_double(std::string_view(line).substr(comma + 1), b);
    if (!ok) {
      if (!seen_row) {
        seen_row = true; // header
        continue;
      }
      throw ValidationError(fmt::format("spectrum csv line {}: not a number pair", lineno));
    }
    seen_row = true;
    x.push_back(a);
    y.push_back(b);
  }
  if (x.size() < 2) throw ValidationError("spectrum csv: fewer than two samples");
  for (double v : x)
    if (!(v > 0.0)) throw ValidationError("spectrum csv: wavelengths must be positive");
  return Spectrum(AxisKind::wavelength, std::move(x), std::move(y));
}

std::string depth_profile_csv(const DepthProfile& p) {
  std::string out = "z_m,magnitude\n";
  for (std::size_t j = 0; j < p.depths.size(); ++j)
    out += fmt::format("{},{}\n", format_number(p.depths[j]), format_number(p.magnitudes[j]));
  return out;
}

std::string peaks_csv(std::span<const Peak> peaks) {
  std::string out = "position_m,height,fwhm_m\n";
  for (const auto& p : peaks)
    out += fmt::format("{},{},{}\n", format_number(p.position), format_number(p.height), format_number(p.fwhm));
  return out;
}

std::string depth_profile_svg(const DepthProfile& p, double z_max, std::string_view title) {
  PlotSeries s;
  for (std::size_t j = 0; j < p.depths.size(); ++j) {
    if (std::abs(p.depths[j]) > z_max) continue;
    s.x.push_back(p.depths[j] * 1e6);
    s.y.push_back(p.magnitudes[j]);
  }
  return svg_plot(std::span(&s, 1), title, "path difference (um)", "|FT|");
}

} // namespace su11
