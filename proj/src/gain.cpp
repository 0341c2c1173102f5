#include "su11/gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "su11/error.hpp"
#include "su11/units.hpp"

namespace su11 {

using constants::c;

GainParams::GainParams(double sigma, double length) : sigma_(sigma), length_(length) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw ValidationError(fmt::format("gain.sigma: must be >= 0 (got {})", sigma));
  if (!(length > 0.0)) throw ValidationError(fmt::format("gain.L: must be positive (got {})", length));
}

GainParams GainParams::from_gain(double G, double length) {
  if (!(length > 0.0)) throw ValidationError("gain.L: must be positive");
  return GainParams(G / length, length);
}

double PumpSpec::energy() const {
  validate();
  if (energy_per_pulse) return *energy_per_pulse;
  return *mean_power / *rep_rate;
}

void PumpSpec::validate() const {
  auto positive = [](std::optional<double> v, const char* name) {
    if (v && !(*v > 0.0)) throw ValidationError(fmt::format("pump.{}: must be positive", name));
  };
  positive(energy_per_pulse, "energy_per_pulse");
  positive(mean_power, "mean_power");
  positive(rep_rate, "rep_rate");
  if (!(pulse_duration > 0.0)) throw ValidationError("pump.pulse_duration: must be positive");
  if (!(effective_area > 0.0)) throw ValidationError("pump.effective_area: must be positive");
  if (!(chi2 > 0.0)) throw ValidationError("pump.chi2: must be positive");
  if (!energy_per_pulse && !(mean_power && rep_rate))
    throw ValidationError("pump.energy_per_pulse: missing (give it or mean_power and rep_rate)");
  if (energy_per_pulse && mean_power && rep_rate) {
    const double derived = *mean_power / *rep_rate;
    if (std::abs(derived - *energy_per_pulse) > 1e-6 * *energy_per_pulse)
      throw ValidationError(fmt::format("pump.energy_per_pulse: {} J disagrees with mean_power/rep_rate = {} J",
                                        *energy_per_pulse, derived));
  }
}

cplx sinh_over(cplx gamma, double length) {
  const cplx x = gamma * length;
  if (std::abs(x) < 1e-8) return length * (1.0 + x * x / 6.0);
  return std::sinh(x) / gamma;
}

TransferPair transfer_functions(const FrequencyGrid& grid, const GainParams& gain, const OpticsConfig& config) {
  const double L = gain.length();
  const double sigma = gain.sigma();
  const double mismatch = config.dispersion_mismatch();
  const double D_s = config.D_s();
  const double D_i = config.D_i();
  const double k_p = config.k_p();
  const double k_s = config.k_s();
  const double k_i = config.k_i();
  const cplx I(0.0, 1.0);

  TransferPair t;
  const std::size_t n = grid.size();
  t.u_s.resize(n);
  t.v_s.resize(n);
  t.u_i.resize(n);
  t.v_i.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = grid[j];
    const double delta_s = mismatch * w;
    const double delta_i = -delta_s;
    // Gamma depends on Delta^2 only, identical for both beams
    const cplx gamma = std::sqrt(cplx(sigma * sigma - 0.25 * delta_s * delta_s, 0.0));
    const cplx ch = std::cosh(gamma * L);
    const cplx sh = sinh_over(gamma, L);

    // k(Omega) = k0 + D Omega
    const double phase_s = 0.5 * L * (k_p + (k_s + D_s * w) - (k_i - D_i * w));
    const double phase_i = 0.5 * L * (k_p + (k_i + D_i * w) - (k_s - D_s * w));
    const cplx carrier_s = std::polar(1.0, phase_s);
    const cplx carrier_i = std::polar(1.0, phase_i);

    t.u_s[j] = (ch - I * (0.5 * delta_s) * sh) * carrier_s;
    t.v_s[j] = -I * sigma * sh * carrier_s;
    t.u_i[j] = (ch - I * (0.5 * delta_i) * sh) * carrier_i;
    t.v_i[j] = -I * sigma * sh * carrier_i;
  }
  return t;
}

GainParams sigma_from_pump(const PumpSpec& pump, const OpticsConfig& config) {
  const double energy = pump.energy();
  const double hbar = constants::hbar;
  const double photon_flux = energy / (hbar * config.omega_p()) / pump.pulse_duration;
  const auto& p = config.params();
  const double num = hbar * config.omega_p() * config.omega_s() * config.omega_i() * pump.chi2 * pump.chi2 * photon_flux;
  const double den = 8.0 * constants::epsilon0 * c * c * c * pump.effective_area * p.n_p * p.n_s * p.n_i;
  return GainParams(std::sqrt(num / den), p.L);
}

double pump_energy_for_gain(double G, const PumpSpec& pump, const OpticsConfig& config) {
  if (!(G > 0.0)) throw ValidationError("pump_energy_for_gain: G must be positive");
  // sigma^2 is linear in E_p: scale a unit-energy evaluation
  PumpSpec unit = pump;
  unit.energy_per_pulse = 1.0;
  unit.mean_power.reset();
  unit.rep_rate.reset();
  const double sigma_unit = sigma_from_pump(unit, config).sigma();
  const double sigma = G / config.crystal_length();
  return (sigma / sigma_unit) * (sigma / sigma_unit);
}

PowerFit gain_from_power_fit(std::span<const PowerSample> samples, double reference_power) {
  if (samples.size() < 3) throw FitError(fmt::format("power fit: need >= 3 samples (got {})", samples.size()));
  if (!(reference_power > 0.0)) throw FitError("power fit: reference power must be positive");
  double p_min = std::numeric_limits<double>::infinity();
  double p_max = 0.0;
  for (const auto& s : samples) {
    if (!(s.power > 0.0) || !std::isfinite(s.intensity))
      throw FitError("power fit: powers must be positive and intensities finite");
    p_min = std::min(p_min, s.power);
    p_max = std::max(p_max, s.power);
  }
  if (!(p_max > p_min * (1.0 + 1e-12))) throw FitError("power fit: all samples at the same power");

  // for fixed b the amplitude is linear least squares
  auto solve = [&](double b) {
    double sy = 0.0;
    double ss = 0.0;
    for (const auto& s : samples) {
      const double v = std::sinh(b * std::sqrt(s.power));
      sy += s.intensity * v * v;
      ss += v * v * v * v;
    }
    const double a = sy / ss;
    double r = 0.0;
    for (const auto& s : samples) {
      const double v = std::sinh(b * std::sqrt(s.power));
      const double e = s.intensity - a * v * v;
      r += e * e;
    }
    return std::pair{a, r};
  };

  const double root_max = std::sqrt(p_max);
  const double b_lo = 1e-3 / root_max;
  const double b_hi = 8.0 / root_max;
  constexpr int coarse = 400;
  double best_b = b_lo;
  double best_r = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= coarse; ++m) {
    const double b = b_lo * std::pow(b_hi / b_lo, static_cast<double>(m) / coarse);
    const double r = solve(b).second;
    if (r < best_r) {
      best_r = r;
      best_b = b;
    }
  }
  const double step = std::pow(b_hi / b_lo, 1.0 / coarse);
  const double lo = std::max(b_lo, best_b / step);
  const double hi = std::min(b_hi, best_b * step);
  const auto [b, r] = boost::math::tools::brent_find_minima([&](double x) { return solve(x).second; }, lo, hi,
                                                            std::numeric_limits<double>::digits);
  (void)r;
  const auto [a, resid] = solve(b);
  double mean_i = 0.0;
  for (const auto& s : samples) mean_i += s.intensity;
  mean_i /= static_cast<double>(samples.size());
  return PowerFit{b * std::sqrt(reference_power), a, b,
                  std::sqrt(resid / static_cast<double>(samples.size())) / std::abs(mean_i)};
}

namespace {

// |V_s|^2 as a function of the phase mismatch alone
double v_power(double sigma, double length, double delta) {
  const cplx gamma = std::sqrt(cplx(sigma * sigma - 0.25 * delta * delta, 0.0));
  return sigma * sigma * std::norm(sinh_over(gamma, length));
}

} // namespace

double signal_fwhm_wavelength(const GainParams& gain, double mismatch, const OpticsConfig& config) {
  const double dd = std::abs(mismatch);
  if (!(dd > 0.0)) throw DomainError("signal_fwhm_wavelength: zero dispersion mismatch gives unbounded bandwidth");
  if (!(gain.sigma() > 0.0)) throw DomainError("signal_fwhm_wavelength: no gain, no spectrum");
  const double sigma = gain.sigma();
  const double L = gain.length();
  const double half = 0.5 * v_power(sigma, L, 0.0);

  // half maximum in terms of delta; |V|^2 falls monotonically up to the first null
  double hi = 1.0 / L;
  while (v_power(sigma, L, hi) > half) hi *= 2.0;
  boost::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      [&](double d) { return v_power(sigma, L, d) - half; }, 0.0, hi,
      boost::math::tools::eps_tolerance<double>(50), iters);
  const double delta_half = 0.5 * (a + b);
  const double w = delta_half / dd;
  const double w0 = config.omega_s();
  if (w >= w0) throw DomainError("signal_fwhm_wavelength: bandwidth exceeds the carrier frequency");
  return constants::two_pi * c * (1.0 / (w0 - w) - 1.0 / (w0 + w));
}

double calibrate_dispersion(double target_fwhm, const GainParams& gain, const OpticsConfig& config) {
  if (!(target_fwhm > 0.0)) throw ValidationError("calibrate_dispersion: target FWHM must be positive");
  if (!(gain.sigma() > 0.0)) throw ValidationError("calibrate_dispersion: gain must be positive");
  // FWHM falls monotonically with |D_i - D_s|; search in log space. Below some mismatch the
  // half-maximum detuning passes the carrier itself, so the lower end starts where FWHM is defined.
  double lo = 1e-14;
  constexpr double hi = 1e-6;
  auto f = [&](double log_dd) { return std::log(signal_fwhm_wavelength(gain, std::exp(log_dd), config) / target_fwhm); };
  double f_lo = 0.0;
  for (;; lo *= 10.0) {
    if (lo >= hi) throw CalibrationError("calibrate_dispersion: FWHM undefined over the whole bracket");
    try {
      f_lo = f(std::log(lo));
      break;
    } catch (const DomainError&) {
    }
  }
  const double f_hi = f(std::log(hi));
  if (!(f_lo > 0.0) || !(f_hi < 0.0))
    throw CalibrationError(fmt::format(
        "calibrate_dispersion: target {:.4g} m unreachable in bracket |D_i - D_s| in [{:g}, {:g}] s/m "
        "(FWHM from {:.4g} m to {:.4g} m)",
        target_fwhm, lo, hi, target_fwhm * std::exp(f_lo), target_fwhm * std::exp(f_hi)));
  boost::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, std::log(lo), std::log(hi), f_lo, f_hi,
                                                        boost::math::tools::eps_tolerance<double>(45), iters);
  return -std::exp(0.5 * (a + b));
}

double photons_per_mode(double G) {
  const double s = std::sinh(G);
  return s * s;
}

double mode_count(double photons, double G) {
  if (!(G > 0.0)) throw DomainError("mode_count: G must be positive");
  return photons / photons_per_mode(G);
}

PumpSpec pump_from_json(const nlohmann::json& doc, std::string_view field) {
  if (!doc.is_object()) throw ValidationError(fmt::format("{}: expected an object", field));
  static const std::set<std::string> known{"energy_per_pulse", "pulse_duration", "effective_area",
                                           "chi2",             "mean_power",     "rep_rate"};
  for (const auto& [key, _] : doc.items())
    if (!known.contains(key)) throw ValidationError(fmt::format("{}.{}: unknown key", field, key));
  PumpSpec p;
  auto q = [&](const char* key, Dimension dim) {
    return quantity_from_json(doc[key], dim, fmt::format("{}.{}", field, key));
  };
  if (doc.contains("energy_per_pulse")) p.energy_per_pulse = q("energy_per_pulse", Dimension::energy);
  if (doc.contains("mean_power")) p.mean_power = q("mean_power", Dimension::power);
  if (doc.contains("rep_rate")) p.rep_rate = q("rep_rate", Dimension::frequency);
  if (doc.contains("pulse_duration")) p.pulse_duration = q("pulse_duration", Dimension::time);
  if (!doc.contains("effective_area")) throw ValidationError(fmt::format("{}.effective_area: missing", field));
  if (!doc.contains("chi2")) throw ValidationError(fmt::format("{}.chi2: missing", field));
  p.effective_area = q("effective_area", Dimension::area);
  p.chi2 = q("chi2", Dimension::susceptibility);
  p.validate();
  return p;
}

GainParams gain_from_json(const nlohmann::json& doc, const OpticsConfig& config, std::string_view field) {
  if (!doc.is_object()) throw ValidationError(fmt::format("{}: expected an object", field));
  if (doc.size() != 1)
    throw ValidationError(fmt::format("{}: give exactly one of G, sigma, pump, power_fit", field));
  const double L = config.crystal_length();
  if (doc.contains("G")) {
    if (!doc["G"].is_number()) throw ValidationError(fmt::format("{}.G: expected a number", field));
    const double G = doc["G"].get<double>();
    if (!(G >= 0.0)) throw ValidationError(fmt::format("{}.G: must be >= 0", field));
    return GainParams::from_gain(G, L);
  }
  if (doc.contains("sigma")) {
    if (!doc["sigma"].is_number()) throw ValidationError(fmt::format("{}.sigma: expected a number", field));
    return GainParams(doc["sigma"].get<double>(), L);
  }
  if (doc.contains("pump")) return sigma_from_pump(pump_from_json(doc["pump"], fmt::format("{}.pump", field)), config);
  if (doc.contains("power_fit")) {
    const auto& f = doc["power_fit"];
    const std::string path = fmt::format("{}.power_fit", field);
    if (!f.is_object() || !f.contains("samples") || !f.contains("reference_power"))
      throw ValidationError(fmt::format("{}: needs samples and reference_power", path));
    for (const auto& [key, _] : f.items())
      if (key != "samples" && key != "reference_power")
        throw ValidationError(fmt::format("{}.{}: unknown key", path, key));
    std::vector<PowerSample> samples;
    for (const auto& row : f["samples"]) {
      if (!row.is_array() || row.size() != 2)
        throw ValidationError(fmt::format("{}.samples: expected [power, intensity] pairs", path));
      samples.push_back({quantity_from_json(row[0], Dimension::power, path + ".samples"), row[1].get<double>()});
    }
    const double p_ref = quantity_from_json(f["reference_power"], Dimension::power, path + ".reference_power");
    return GainParams::from_gain(gain_from_power_fit(samples, p_ref).gain_at_reference, L);
  }
  throw ValidationError(fmt::format("{}: give exactly one of G, sigma, pump, power_fit", field));
}

} // namespace su11
