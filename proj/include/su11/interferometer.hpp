#pragma once

#include <random>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "su11/gain.hpp"
#include "su11/optics.hpp"
#include "su11/samples.hpp"

namespace su11 {

/// Arm lengths and the reference mirror. Delta z = z_s - z_i.
struct ArmGeometry {
  double z_s = 0.05;
  double z_i = 0.05;
  double r_s = 1.0;
  double phase_offset = 0.0; // pump phase scan, added to the signal arm phase

  double delta_z() const noexcept { return z_s - z_i; }
  void validate() const;
};

struct SpectrometerModel {
  double resolution_fwhm = 0.0;   // m of wavelength
  std::vector<double> grid;       // detection wavelengths, monotone
  bool noise = false;
  double photon_scale = 1.0;      // mean counts at the brightest pixel

  /// Evenly spaced pixels across [lo, hi].
  static SpectrometerModel uniform(double lo, double hi, std::size_t pixels, double resolution);
  void validate() const;
};

/// Output signal mode after both passes, written in the vacuum input modes:
/// a_out(Omega) = c_as a_s + c_ai a_i^dag(-Omega) + c_fs f_s + c_fi f_i^dag(-Omega).
/// f_s, f_i are the loss modes of the two arms.
struct ModeExpansion {
  std::vector<cplx> c_as, c_ai, c_fs, c_fi;
};

ModeExpansion mode_expansion(const FrequencyGrid& grid, const TransferPair& pass1, const TransferPair& pass2,
                             const ArmGeometry& geom, std::span<const cplx> r_i, const OpticsConfig& config);

/// Signal photon density S(Omega) on the detuning axis.
/// `r_i` is indexed by idler detuning (the same grid), so r_i(-Omega_j) = r_i[grid.mirror(j)].
Spectrum output_spectrum(const FrequencyGrid& grid, const TransferPair& pass1, const TransferPair& pass2,
                         const ArmGeometry& geom, std::span<const cplx> r_i, const OpticsConfig& config);
Spectrum output_spectrum(const FrequencyGrid& grid, const TransferPair& pass1, const TransferPair& pass2,
                         const ArmGeometry& geom, const Sample& sample, const OpticsConfig& config);

/// (1/2 pi) integral of S over detuning.
double flux_rate(const Spectrum& s);

struct ScanPoint {
  double theta;
  double rate;
};

/// Flux rate for each scan phase. Needs >= 8 points covering a full period.
std::vector<ScanPoint> phase_scan(const FrequencyGrid& grid, const TransferPair& pass1, const TransferPair& pass2,
                                  const ArmGeometry& geom, std::span<const cplx> r_i, const OpticsConfig& config,
                                  std::span<const double> thetas);

/// Spectrometer: Gaussian blur of FWHM resolution in wavelength, sampled at the pixel grid,
/// Poisson counts when model.noise is set (rng required then).
Spectrum detect(const Spectrum& s, const SpectrometerModel& model, const OpticsConfig& config,
                std::mt19937_64* rng = nullptr);

/// Fringe contrast left after a Gaussian blur of FWHM `resolution`, for a fringe of
/// period `period` in the same units.
double gaussian_mtf(double period, double resolution);

std::string spectrum_to_csv(const Spectrum& s);
nlohmann::json spectrum_to_json(const Spectrum& s);
Spectrum spectrum_from_json(const nlohmann::json& doc);
nlohmann::json spectrometer_to_json(const SpectrometerModel& model);

} // namespace su11
