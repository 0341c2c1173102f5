#pragma once

#include <complex>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "su11/optics.hpp"

namespace su11 {

using cplx = std::complex<double>;

/// Nonlinear coupling of one crystal pass. G = sigma * L.
class GainParams {
public:
  GainParams(double sigma, double length);
  static GainParams from_gain(double G, double length);

  double sigma() const noexcept { return sigma_; }
  double length() const noexcept { return length_; }
  double G() const noexcept { return sigma_ * length_; }

private:
  double sigma_;
  double length_;
};

/// Pump pulse description. Either energy_per_pulse or (mean_power, rep_rate) must be
/// present; when all three are, they must agree to 1e-6 relative.
struct PumpSpec {
  std::optional<double> energy_per_pulse; // J
  double pulse_duration = 18e-12;         // s
  double effective_area = 0.0;            // m^2
  double chi2 = 0.0;                      // m/V
  std::optional<double> mean_power;       // W
  std::optional<double> rep_rate;         // Hz

  /// Energy per pulse after validation.
  double energy() const;
  void validate() const;
};

/// Single-pass Bogoliubov amplitudes per grid point. u_i/v_i are indexed by the
/// idler detuning, so U_i(-Omega_j) lives at grid.mirror(j).
struct TransferPair {
  std::vector<cplx> u_s, v_s, u_i, v_i;
  std::size_t size() const noexcept { return u_s.size(); }
};

/// sinh(Gamma L)/Gamma for complex Gamma, with the series limit near Gamma L = 0.
cplx sinh_over(cplx gamma, double length);

TransferPair transfer_functions(const FrequencyGrid& grid, const GainParams& gain, const OpticsConfig& config);

/// sigma from pump flux, interaction area and chi2. R_p = E_p / (hbar omega_p) / T_0.
GainParams sigma_from_pump(const PumpSpec& pump, const OpticsConfig& config);

/// Pulse energy that yields gain G with the rest of `pump` held fixed.
double pump_energy_for_gain(double G, const PumpSpec& pump, const OpticsConfig& config);

struct PowerSample {
  double power;     // mean pump power, W
  double intensity; // arbitrary units
};

struct PowerFit {
  double gain_at_reference; // b sqrt(P_ref)
  double amplitude;         // a
  double slope;             // b, 1/sqrt(W)
  double residual;          // rms residual / mean intensity
};

/// Least squares of I = a sinh^2(b sqrt(P)).
PowerFit gain_from_power_fit(std::span<const PowerSample> samples, double reference_power);

/// FWHM of |V_s(Omega)|^2 with the half-maximum detunings mapped to wavelength.
/// `mismatch` is D_i - D_s; only its magnitude matters.
double signal_fwhm_wavelength(const GainParams& gain, double mismatch, const OpticsConfig& config);

/// D_i - D_s (negative: normal dispersion, signal slower than idler) reproducing
/// `target_fwhm` of the signal spectrum at this gain.
double calibrate_dispersion(double target_fwhm, const GainParams& gain, const OpticsConfig& config);

/// Mean photons per mode of a single pass, sinh^2 G.
double photons_per_mode(double G);

/// Number of modes that carry `photons` at gain G.
double mode_count(double photons, double G);

GainParams gain_from_json(const nlohmann::json& doc, const OpticsConfig& config, std::string_view field);
PumpSpec pump_from_json(const nlohmann::json& doc, std::string_view field);

} // namespace su11
