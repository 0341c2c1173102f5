#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "su11/error.hpp"
#include "su11/fdoct.hpp"
#include "su11/interferometer.hpp"
#include "su11/visibility.hpp"

using namespace su11;

namespace {

constexpr double kLo = 770e-9, kHi = 850e-9;

double gauss(double x, double centre, double fwhm) {
  const double s = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  return std::exp(-0.5 * std::pow((x - centre) / s, 2));
}

// Pixel-uniform wavelength spectrum: Gaussian envelope times the given fringe in k.
template <class F>
Spectrum lambda_spectrum(F fringe, double fwhm = 8e-9, std::size_t n = 2048) {
  std::vector<double> x(n), y(n);
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = kLo + (kHi - kLo) * static_cast<double>(j) / static_cast<double>(n - 1);
    y[j] = gauss(x[j], 810e-9, fwhm) * fringe(2.0 * oracle::pi / x[j]);
  }
  return {AxisKind::wavelength, x, y};
}

template <class F>
Spectrum k_spectrum(F f, std::size_t n) {
  const double k0 = 2.0 * oracle::pi / kHi, k1 = 2.0 * oracle::pi / kLo;
  std::vector<double> k(n), y(n);
  for (std::size_t j = 0; j < n; ++j) {
    k[j] = k0 + (k1 - k0) * static_cast<double>(j) / static_cast<double>(n - 1);
    y[j] = f(k[j]);
  }
  return {AxisKind::wavenumber, k, y};
}

std::vector<Peak> positive(const std::vector<Peak>& peaks) {
  std::vector<Peak> out;
  for (const auto& p : peaks)
    if (p.position > 0.0) out.push_back(p);
  return out;
}

// FWHM of the central lobe by linear half-height crossings.
double central_fwhm(const DepthProfile& p) {
  const std::size_t mid = p.depths.size() / 2;
  const double half = 0.5 * p.magnitudes[mid];
  std::size_t r = mid;
  while (p.magnitudes[r] > half) ++r;
  const double zr = p.depths[r - 1] + (half - p.magnitudes[r - 1]) / (p.magnitudes[r] - p.magnitudes[r - 1]) *
                                          (p.depths[r] - p.depths[r - 1]);
  return 2.0 * zr;
}

double single_peak_fwhm(double bandwidth) {
  auto s = lambda_spectrum([](double) { return 1.0; }, bandwidth, 8192);
  return central_fwhm(depth_profile(resample_uniform_k(s)));
}

} // namespace

TEST_CASE("uniform-k input passes through resampling") {
  const std::size_t n = 512;
  const double k0 = 7.3e6, k1 = 8.2e6;
  std::vector<double> lam(n), val(n);
  for (std::size_t j = 0; j < n; ++j) {
    // descending k as wavelength ascends
    const double k = k1 - (k1 - k0) * static_cast<double>(j) / static_cast<double>(n - 1);
    lam[j] = 2.0 * oracle::pi / k;
    val[j] = (1.0 + 0.3 * std::sin(k * 1e-5)) * k * k / (2.0 * oracle::pi);
  }
  auto out = resample_uniform_k(Spectrum(AxisKind::wavelength, lam, val));
  REQUIRE(out.size() == n);
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double k = out.axis()[j];
    worst = std::max(worst, std::abs(out.values()[j] - (1.0 + 0.3 * std::sin(k * 1e-5))));
  }
  CHECK(worst < 1e-10);
  CHECK(out.axis().front() == doctest::Approx(k0).epsilon(1e-14));
  CHECK(out.axis().back() == doctest::Approx(k1).epsilon(1e-14));
}

TEST_CASE("flat wavelength spectrum acquires the Jacobian") {
  std::vector<double> lam(400), val(400, 2.0);
  for (std::size_t j = 0; j < lam.size(); ++j) lam[j] = 800e-9 + 20e-9 * static_cast<double>(j) / 399.0;
  auto out = resample_uniform_k(Spectrum(AxisKind::wavelength, lam, val));
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double k = out.axis()[j];
    CHECK(out.values()[j] == doctest::Approx(2.0 * 2.0 * oracle::pi / (k * k)).epsilon(1e-9));
  }
}

TEST_CASE("resampling straightens a chirped fringe") {
  const double dz = 300e-6;
  auto s = lambda_spectrum([&](double k) { return 1.0 + std::cos(k * dz); }, 1.0, 4096);
  // subtract the slowly varying mean: an unnormalised Gaussian of width 1 m is flat here
  std::vector<double> xl(s.axis().begin(), s.axis().end()), yl(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) yl[j] = s.values()[j] - 1.0;
  auto zl = oracle::zero_crossings(xl, yl);

  auto k = resample_uniform_k(s);
  std::vector<double> xk(k.axis().begin(), k.axis().end()), yk(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) yk[j] = k.values()[j] * xk[j] * xk[j] / (2.0 * oracle::pi) - 1.0;
  auto zk = oracle::zero_crossings(xk, yk);

  auto spacing_cv2 = [](const std::vector<double>& z) {
    std::vector<double> d;
    for (std::size_t j = 1; j < z.size(); ++j) d.push_back(std::abs(z[j] - z[j - 1]));
    double m = 0.0;
    for (double v : d) m += v / static_cast<double>(d.size());
    return oracle::variance(d) / (m * m);
  };
  REQUIRE(zl.size() > 20);
  REQUIRE(zk.size() > 20);
  CHECK(spacing_cv2(zk) * 100.0 < spacing_cv2(zl));
}

TEST_CASE("resampling preconditions") {
  std::vector<double> x(8), y(8, 1.0);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = 800e-9 + 1e-9 * static_cast<double>(j);
  CHECK_THROWS_AS(resample_uniform_k(Spectrum(AxisKind::wavelength, x, y)), ValidationError);
}

TEST_CASE("single tone depth profile") {
  const double z0 = 300e-6;
  auto s = k_spectrum([&](double k) { return 1.0 + std::cos(k * z0); }, 2048);
  auto p = depth_profile(s);
  auto peaks = find_peaks(p, 0.0, 10e-6);
  auto nearest = [&](double z) {
    double best = 1.0;
    for (auto& q : peaks)
      if (std::abs(q.position - z) < std::abs(best - z)) best = q.position;
    return best;
  };
  CHECK(std::abs(nearest(z0) - z0) <= p.bin_width);
  CHECK(std::abs(nearest(-z0) + z0) <= p.bin_width);
  const std::size_t mid = p.depths.size() / 2;
  CHECK(p.depths[mid] == 0.0);
  for (double m : p.magnitudes) CHECK(m <= p.magnitudes[mid] + 1e-12);
}

TEST_CASE("Parseval without padding") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> amp(5), pos(5);
  for (int j = 0; j < 5; ++j) {
    amp[j] = 0.5 * u(rng);
    pos[j] = 400e-6 * u(rng);
  }
  auto s = k_spectrum(
      [&](double k) {
        double v = 2.0;
        for (int j = 0; j < 5; ++j) v += amp[j] * std::cos(k * pos[j]);
        return v;
      },
      2049);
  DepthOptions opts;
  opts.zero_pad = 1;
  auto p = depth_profile(s, opts);
  REQUIRE(p.depths.size() == 2049);
  const double dk = s.axis()[1] - s.axis()[0];
  double lhs = 0.0, rhs = 0.0;
  for (double v : s.values()) lhs += v * v * dk;
  for (double m : p.magnitudes) rhs += m * m * p.bin_width / (2.0 * oracle::pi);
  CHECK(rhs == doctest::Approx(lhs).epsilon(1e-9));
}

TEST_CASE("depth profile matches a direct sum and is symmetric") {
  auto s = k_spectrum([](double k) { return 1.0 + 0.5 * std::cos(k * 210e-6) + std::exp(-1e-12 * k * k); }, 301);
  auto p = depth_profile(s);
  std::vector<double> k(s.axis().begin(), s.axis().end()), v(s.values().begin(), s.values().end());
  for (std::size_t j : {std::size_t{0}, p.depths.size() / 3, p.depths.size() / 2, p.depths.size() - 7}) {
    CHECK(p.magnitudes[j] == doctest::Approx(oracle::naive_dft(k, v, p.depths[j])).epsilon(1e-9));
  }
  const std::size_t n = p.depths.size();
  double mx = 0.0;
  for (double m : p.magnitudes) mx = std::max(mx, m);
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(p.depths[j] == doctest::Approx(-p.depths[n - 1 - j]));
    CHECK(std::abs(p.magnitudes[j] - p.magnitudes[n - 1 - j]) <= 1e-9 * mx);
  }
}

TEST_CASE("depth profile needs a uniform wavenumber axis") {
  std::vector<double> k(32), y(32, 1.0);
  for (std::size_t j = 0; j < k.size(); ++j) k[j] = 7e6 + 1e3 * static_cast<double>(j * j);
  CHECK_THROWS_AS(depth_profile(Spectrum(AxisKind::wavenumber, k, y)), ValidationError);
  auto s = lambda_spectrum([](double) { return 1.0; });
  CHECK_THROWS_AS(depth_profile(s), ValidationError);
}

TEST_CASE("peak finding on synthetic tones") {
  const double excl = 2.0 * transform_limit_resolution(810e-9, 8e-9);
  {
    auto p = depth_profile(resample_uniform_k(lambda_spectrum([](double k) { return 1.0 + std::cos(k * 300e-6); })));
    auto pos = positive(find_peaks(p, 0.1, excl));
    REQUIRE(pos.size() == 1);
    CHECK(std::abs(pos[0].position - 300e-6) <= 1e-6);
  }
  {
    auto p = depth_profile(resample_uniform_k(
        lambda_spectrum([](double k) { return 1.0 + 0.5 * std::cos(k * 150e-6) + 0.5 * std::cos(k * 450e-6); })));
    auto pos = positive(find_peaks(p, 0.1, excl));
    REQUIRE(pos.size() == 2);
    CHECK(std::abs((pos[1].position - pos[0].position) - 300e-6) <= 2e-6);
  }
  {
    auto p = depth_profile(resample_uniform_k(lambda_spectrum([](double k) { return 1.0 + std::cos(k * 20e-6); })));
    CHECK(find_peaks(p, 0.1, 60e-6).empty());
  }
}

TEST_CASE("Gaussian spectrum peak width") {
  const double tl = transform_limit_resolution(810e-9, 8e-9);
  CHECK(tl == doctest::Approx(36e-6).epsilon(0.1));
  CHECK(tl == doctest::Approx(2.0 * std::log(2.0) / oracle::pi * 810e-9 * 810e-9 / 8e-9).epsilon(1e-12));
  // |FT| of a Gaussian of FWHM dk in k has FWHM 8 ln2 / dk on this axis
  const double dk = 2.0 * oracle::pi * 8e-9 / (810e-9 * 810e-9);
  const double w8 = single_peak_fwhm(8e-9);
  CHECK(w8 == doctest::Approx(8.0 * std::log(2.0) / dk).epsilon(0.02));
  CHECK(default_dc_exclusion(OpticsConfig{}) == doctest::Approx(2.0 * tl));
}

TEST_CASE("peak width scales inversely with bandwidth") {
  const double w4 = single_peak_fwhm(4e-9), w8 = single_peak_fwhm(8e-9), w16 = single_peak_fwhm(16e-9);
  CHECK(w4 / w8 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(w8 / w16 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(w4 * 4e-9 == doctest::Approx(w16 * 16e-9).epsilon(0.1));
}

TEST_CASE("axial resolution guards overlapping peaks") {
  std::vector<Peak> peaks{{100e-6, 1.0, 50e-6}, {200e-6, 1.0, 50e-6}, {600e-6, 1.0, 50e-6}};
  CHECK_THROWS_AS(axial_resolution(peaks, peaks[0]), ResolutionError);
  CHECK(axial_resolution(peaks, peaks[2]) == 50e-6);
}

TEST_CASE("delta z estimate round trip") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(120e-6, 450e-6);
  EstimateOptions opts;
  opts.exclude_dc_radius = default_dc_exclusion(OpticsConfig{});
  for (int trial = 0; trial < 12; ++trial) {
    const double dz = u(rng);
    auto s = lambda_spectrum([&](double k) { return 1.0 + 0.8 * std::cos(k * dz); });
    const double est = estimate_delta_z(s, opts);
    auto p = depth_profile(resample_uniform_k(s), opts.depth);
    CAPTURE(dz);
    CHECK(std::abs(est - dz) <= std::max(p.bin_width, 0.01 * dz));
  }
  auto flat = lambda_spectrum([](double) { return 1.0; });
  CHECK_THROWS_AS(estimate_delta_z(flat, opts), EstimationError);
}

TEST_CASE("simulated mirror path differences") {
  OpticsConfig base;
  auto g = GainParams::from_gain(1.7, 1e-3);
  const double m = calibrate_dispersion(8e-9, g, base);
  auto cfg = base.with_dispersion(base.params().n_s / oracle::c, base.params().n_s / oracle::c + m);
  auto grid = make_grid(cfg, 1.4e14, 8001);
  auto t = transfer_functions(grid, g, cfg);
  const double bal = balanced_delta_z(g, g, grid, cfg);
  auto det = SpectrometerModel::uniform(kLo, kHi, 2048, 1.2e-9);
  EstimateOptions opts;
  opts.exclude_dc_radius = default_dc_exclusion(cfg);
  opts.depth.rolloff = RolloffCompensation{1.2e-9, 810e-9};
  std::vector<cplx> r(grid.size(), 0.99);
  auto estimate = [&](double dz) {
    ArmGeometry geom;
    geom.r_s = 0.6;
    geom.z_s = geom.z_i + bal + dz;
    return estimate_delta_z(detect(output_spectrum(grid, t, t, geom, r, cfg), det, cfg), opts);
  };
  const double a = estimate(300e-6), b = estimate(220e-6);
  CHECK(std::abs(a - 300e-6) <= 3e-6);
  CHECK(std::abs(b - 220e-6) <= 3e-6);
  CHECK(std::abs((a - b) - 80e-6) <= 5e-6);
  CHECK_THROWS_AS(estimate(0.0), EstimationError);
}

TEST_CASE("operating window") {
  auto w = delta_z_window(OpticsConfig{});
  CHECK(w.lower == doctest::Approx(82.0125e-6).epsilon(1e-6));
  CHECK(w.upper == doctest::Approx(546.75e-6).epsilon(1e-6));
  CHECK_FALSE(w.unbounded);
  CHECK_FALSE(w.degenerate);
  OpticsParams p;
  p.delta_lambda_res = 0.0;
  auto open = delta_z_window(OpticsConfig(p));
  CHECK(open.unbounded);
  CHECK(std::isinf(open.upper));
  OpticsParams q;
  q.delta_lambda_res = q.signal_fwhm;
  CHECK(delta_z_window(OpticsConfig(q)).degenerate);
}

TEST_CASE("spectrum csv input") {
  auto s = read_spectrum_csv("# measured\nwavelength_m,value\n8.0e-7,1\n8.1e-7,2\n\n8.2e-7,3 # tail\n");
  REQUIRE(s.size() == 3);
  CHECK(s.values()[2] == 3.0);
  CHECK_THROWS_AS(read_spectrum_csv("8.0e-7,1\n8.1e-7\n"), ValidationError);
  CHECK_THROWS_AS(read_spectrum_csv("8.0e-7,1\nabc,2\n"), ValidationError);
  CHECK_THROWS_AS(read_spectrum_csv("8.0e-7,1\n"), ValidationError);
}

TEST_CASE("profile and peak tables") {
  DepthProfile p{{-1e-6, 0.0, 1e-6}, {0.5, 1.0, 0.5}, 1e-6};
  CHECK(depth_profile_csv(p).rfind("z_m,magnitude\n", 0) == 0);
  std::vector<Peak> peaks{{1e-4, 2.0, 5e-5}};
  CHECK(peaks_csv(peaks).rfind("position_m,height,fwhm_m\n", 0) == 0);
  CHECK(depth_profile_svg(p, 1e-6, "x").find("<svg") != std::string::npos);
  CHECK(window_from_string("hann") == Window::hann);
  CHECK_THROWS_AS(window_from_string("kaiser"), ValidationError);
}
