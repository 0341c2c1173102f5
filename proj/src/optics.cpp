#include "su11/optics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <fmt/format.h>

#include "su11/error.hpp"
#include "su11/units.hpp"

namespace su11 {

using constants::c;
using constants::two_pi;

namespace {

void require_positive(double v, std::string_view name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(fmt::format("optics.{}: must be positive and finite (got {})", name, v));
}

} // namespace

OpticsConfig::OpticsConfig() : OpticsConfig(OpticsParams{}) {}

OpticsConfig::OpticsConfig(OpticsParams p) : params_(std::move(p)) {
  require_positive(params_.lambda_p, "lambda_p");
  require_positive(params_.lambda_s, "lambda_s");
  if (!params_.lambda_i) {
    const double inv = 1.0 / params_.lambda_p - 1.0 / params_.lambda_s;
    if (!(inv > 0.0))
      throw ValidationError("optics.lambda_i: cannot derive from energy conservation (lambda_p >= lambda_s)");
    params_.lambda_i = 1.0 / inv;
  }
  require_positive(*params_.lambda_i, "lambda_i");
  require_positive(params_.n_p, "n_p");
  require_positive(params_.n_s, "n_s");
  require_positive(params_.n_i, "n_i");
  require_positive(params_.L, "L");
  require_positive(params_.signal_fwhm, "signal_fwhm");
  if (!(params_.delta_lambda_res >= 0.0))
    throw ValidationError("optics.delta_lambda_res: must be >= 0");
  if (params_.lambda_s >= *params_.lambda_i)
    throw ValidationError("optics.lambda_s: signal must be the shorter wavelength (lambda_s < lambda_i)");

  const double lhs = 1.0 / params_.lambda_p;
  const double rhs = 1.0 / params_.lambda_s + 1.0 / *params_.lambda_i;
  if (std::abs(lhs - rhs) > 1e-6 * lhs)
    throw ValidationError(fmt::format(
        "optics.lambda_p: energy conservation violated, 1/lambda_p - 1/lambda_s - 1/lambda_i = {:.3e} relative",
        (lhs - rhs) / lhs));

  auto [lo, hi] = params_.spectrometer_range;
  require_positive(lo, "spectrometer_range[0]");
  if (!(hi > lo)) throw ValidationError("optics.spectrometer_range: max must exceed min");
  if (params_.D_s && !std::isfinite(*params_.D_s)) throw ValidationError("optics.D_s: not finite");
  if (params_.D_i && !std::isfinite(*params_.D_i)) throw ValidationError("optics.D_i: not finite");
}

double OpticsConfig::omega_p() const noexcept { return two_pi * c / params_.lambda_p; }
double OpticsConfig::omega_s() const noexcept { return two_pi * c / params_.lambda_s; }
double OpticsConfig::omega_i() const noexcept { return two_pi * c / *params_.lambda_i; }
double OpticsConfig::k_p() const noexcept { return params_.n_p * omega_p() / c; }
double OpticsConfig::k_s() const noexcept { return params_.n_s * omega_s() / c; }
double OpticsConfig::k_i() const noexcept { return params_.n_i * omega_i() / c; }

double OpticsConfig::D_s() const {
  if (!params_.D_s) throw ValidationError("optics.D_s: not set (give it or calibrate the dispersion)");
  return *params_.D_s;
}

double OpticsConfig::D_i() const {
  if (!params_.D_i) throw ValidationError("optics.D_i: not set (give it or calibrate the dispersion)");
  return *params_.D_i;
}

double OpticsConfig::dispersion_mismatch() const { return D_i() - D_s(); }

double OpticsConfig::group_delay_offset() const { return -c * dispersion_mismatch() * params_.L; }

OpticsConfig OpticsConfig::with_dispersion(double D_s, double D_i) const {
  OpticsParams p = params_;
  p.D_s = D_s;
  p.D_i = D_i;
  return OpticsConfig(std::move(p));
}

OpticsConfig optics_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("optics: expected an object");
  static const std::set<std::string> known{
      "lambda_p", "lambda_s", "lambda_i", "n_p", "n_s", "n_i", "D_s", "D_i",
      "L", "delta_lambda_res", "spectrometer_range", "signal_fwhm"};
  for (const auto& [key, _] : doc.items())
    if (!known.contains(key)) throw ValidationError(fmt::format("optics.{}: unknown key", key));

  OpticsParams p;
  auto length = [&](const char* key, double& out) {
    if (doc.contains(key)) out = quantity_from_json(doc[key], Dimension::length, fmt::format("optics.{}", key));
  };
  auto plain = [&](const char* key, double& out) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number()) throw ValidationError(fmt::format("optics.{}: expected a number", key));
    out = doc[key].get<double>();
  };
  length("lambda_p", p.lambda_p);
  length("lambda_s", p.lambda_s);
  if (doc.contains("lambda_i"))
    p.lambda_i = quantity_from_json(doc["lambda_i"], Dimension::length, "optics.lambda_i");
  plain("n_p", p.n_p);
  plain("n_s", p.n_s);
  plain("n_i", p.n_i);
  if (doc.contains("D_s")) {
    double v = 0;
    plain("D_s", v);
    p.D_s = v;
  }
  if (doc.contains("D_i")) {
    double v = 0;
    plain("D_i", v);
    p.D_i = v;
  }
  length("L", p.L);
  length("delta_lambda_res", p.delta_lambda_res);
  length("signal_fwhm", p.signal_fwhm);
  if (doc.contains("spectrometer_range")) {
    const auto& r = doc["spectrometer_range"];
    if (!r.is_array() || r.size() != 2)
      throw ValidationError("optics.spectrometer_range: expected [min, max]");
    p.spectrometer_range = {quantity_from_json(r[0], Dimension::length, "optics.spectrometer_range[0]"),
                            quantity_from_json(r[1], Dimension::length, "optics.spectrometer_range[1]")};
  }
  return OpticsConfig(std::move(p));
}

nlohmann::json optics_to_json(const OpticsConfig& config) {
  const auto& p = config.params();
  nlohmann::json j{
      {"lambda_p", p.lambda_p},
      {"lambda_s", p.lambda_s},
      {"lambda_i", *p.lambda_i},
      {"n_p", p.n_p},
      {"n_s", p.n_s},
      {"n_i", p.n_i},
      {"L", p.L},
      {"delta_lambda_res", p.delta_lambda_res},
      {"spectrometer_range", {p.spectrometer_range.first, p.spectrometer_range.second}},
      {"signal_fwhm", p.signal_fwhm},
  };
  if (p.D_s) j["D_s"] = *p.D_s;
  if (p.D_i) j["D_i"] = *p.D_i;
  return j;
}

FrequencyGrid::FrequencyGrid(double omega_s0, double span, std::size_t count)
    : omega_s0_(omega_s0), span_(span), spacing_(0.0) {
  if (count < 3 || count % 2 == 0)
    throw ValidationError(fmt::format("grid.count: must be odd and >= 3 (got {})", count));
  if (!(span > 0.0) || !std::isfinite(span))
    throw ValidationError(fmt::format("grid.span: must be positive (got {})", span));
  const std::size_t half = count / 2;
  spacing_ = span / static_cast<double>(half);
  detunings_.resize(count);
  // built from the centre outwards so that -Omega is bit-exactly the negation of Omega
  detunings_[half] = 0.0;
  for (std::size_t m = 1; m <= half; ++m) {
    const double w = span * static_cast<double>(m) / static_cast<double>(half);
    detunings_[half + m] = w;
    detunings_[half - m] = -w;
  }
}

FrequencyGrid FrequencyGrid::refined() const { return FrequencyGrid(omega_s0_, span_, 2 * (size() - 1) + 1); }

FrequencyGrid make_grid(const OpticsConfig& config, double span, std::size_t count) {
  return FrequencyGrid(config.omega_s(), span, count);
}

std::string_view to_string(AxisKind kind) {
  switch (kind) {
  case AxisKind::wavelength: return "wavelength";
  case AxisKind::detuning: return "detuning";
  case AxisKind::wavenumber: return "wavenumber";
  }
  return "?";
}

AxisKind axis_kind_from_string(std::string_view name) {
  if (name == "wavelength") return AxisKind::wavelength;
  if (name == "detuning") return AxisKind::detuning;
  if (name == "wavenumber") return AxisKind::wavenumber;
  throw ValidationError(fmt::format("axis_kind: unknown '{}'", name));
}

Spectrum::Spectrum(AxisKind kind, std::vector<double> axis, std::vector<double> values, double carrier)
    : kind_(kind), axis_(std::move(axis)), values_(std::move(values)), carrier_(carrier) {
  if (axis_.size() != values_.size())
    throw ValidationError(fmt::format("spectrum: axis has {} points, values {}", axis_.size(), values_.size()));
  if (axis_.size() < 2) throw ValidationError("spectrum: need at least two samples");
  const bool ascending = axis_[1] > axis_[0];
  for (std::size_t j = 1; j < axis_.size(); ++j) {
    const bool ok = ascending ? axis_[j] > axis_[j - 1] : axis_[j] < axis_[j - 1];
    if (!ok) throw ValidationError(fmt::format("spectrum: axis not strictly monotone at index {}", j));
  }
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!std::isfinite(values_[j]) || values_[j] < 0.0 || !std::isfinite(axis_[j]))
      throw ValidationError(fmt::format("spectrum: value at index {} is negative or not finite", j));
  }
  if (kind_ == AxisKind::detuning && !(carrier_ > 0.0))
    throw ValidationError("spectrum: detuning axis needs a positive carrier frequency");
}

double Spectrum::integral() const { return trapezoid(axis_, values_); }

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t j = 1; j < x.size(); ++j) sum += 0.5 * (y[j] + y[j - 1]) * std::abs(x[j] - x[j - 1]);
  return sum;
}

Spectrum convert_axis(const Spectrum& s, AxisKind target, std::optional<double> carrier) {
  if (s.kind() == target)
    throw ValidationError(fmt::format("convert_axis: spectrum is already on the {} axis", to_string(target)));
  const double omega0 = s.kind() == AxisKind::detuning ? s.carrier() : carrier.value_or(0.0);
  if (target == AxisKind::detuning && !(omega0 > 0.0))
    throw ValidationError("convert_axis: conversion to detuning needs a carrier frequency");

  const std::size_t n = s.size();
  std::vector<double> k(n), sk(n);
  // into wavenumber
  for (std::size_t j = 0; j < n; ++j) {
    const double x = s.axis()[j];
    const double v = s.values()[j];
    switch (s.kind()) {
    case AxisKind::wavelength:
      if (!(x > 0.0)) throw DomainError(fmt::format("convert_axis: non-positive wavelength {} at index {}", x, j));
      k[j] = two_pi / x;
      sk[j] = v * two_pi / (k[j] * k[j]);
      break;
    case AxisKind::detuning:
      k[j] = (x + omega0) / c;
      sk[j] = v * c;
      break;
    case AxisKind::wavenumber:
      k[j] = x;
      sk[j] = v;
      break;
    }
  }
  if (target == AxisKind::wavenumber) return Spectrum(AxisKind::wavenumber, std::move(k), std::move(sk));

  std::vector<double> axis(n), values(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(k[j] > 0.0)) throw DomainError(fmt::format("convert_axis: non-positive wavenumber at index {}", j));
    if (target == AxisKind::wavelength) {
      axis[j] = two_pi / k[j];
      values[j] = sk[j] * two_pi / (axis[j] * axis[j]);
    } else {
      axis[j] = c * k[j] - omega0;
      values[j] = sk[j] / c;
    }
  }
  return Spectrum(target, std::move(axis), std::move(values), target == AxisKind::detuning ? omega0 : 0.0);
}

} // namespace su11
