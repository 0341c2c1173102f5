#include "su11/samples.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include <fmt/format.h>

#include "su11/error.hpp"
#include "su11/units.hpp"

namespace su11 {

using constants::c;

namespace {

constexpr double passivity_slack = 1e-12;

} // namespace

UniformReflector::UniformReflector(cplx r) : r_(r) {
  if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
    throw ValidationError("sample.r: not finite");
  if (std::abs(r) > 1.0 + passivity_slack)
    throw PassivityError(fmt::format("sample.r: |r| = {} exceeds 1", std::abs(r)));
}

TwoLayerSlab::TwoLayerSlab(double r1, double r2, double d, double n_0, double n_g, double t)
    : r1_(r1), r2_(r2), d_(d), n_0_(n_0), n_g_(n_g), t_(t) {
  if (!(r1 >= 0.0 && r1 <= 1.0)) throw ValidationError(fmt::format("sample.r1: must be in [0,1] (got {})", r1));
  if (!(r2 >= 0.0 && r2 <= 1.0)) throw ValidationError(fmt::format("sample.r2: must be in [0,1] (got {})", r2));
  if (r1 * r1 + r2 * r2 > 1.0 + passivity_slack)
    throw PassivityError(fmt::format("sample: r1^2 + r2^2 = {} exceeds 1", r1 * r1 + r2 * r2));
  // the echoes can add in phase, so the modulus bound needs r1 + r2 <= 1
  if (r1 + r2 > 1.0 + passivity_slack)
    throw PassivityError(fmt::format("sample: r1 + r2 = {} exceeds 1, echoes in phase would exceed unit modulus",
                                     r1 + r2));
  if (!(d > 0.0)) throw ValidationError(fmt::format("sample.d: must be positive (got {})", d));
  if (!(n_0 >= 1.0)) throw ValidationError(fmt::format("sample.n0: must be >= 1 (got {})", n_0));
  if (!(n_g >= 1.0)) throw ValidationError(fmt::format("sample.ng: must be >= 1 (got {})", n_g));
  if (!std::isfinite(t)) throw ValidationError("sample.t: not finite");
}

std::vector<cplx> reflectivity(const Sample& sample, const FrequencyGrid& grid, const OpticsConfig& config) {
  std::vector<cplx> r(grid.size());
  if (const auto* u = std::get_if<UniformReflector>(&sample)) {
    std::fill(r.begin(), r.end(), u->r());
    return r;
  }
  const auto& s = std::get<TwoLayerSlab>(sample);
  const double w_i = config.omega_i();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double w = grid[j];
    // round trip from the zero-path plane to the front surface
    const cplx front = std::polar(1.0, -(w_i + w) * 2.0 * s.t() / c);
    // extra carrier phase through the glass uses n_0, the envelope delay n_g
    const cplx back = front * std::polar(1.0, (2.0 * w_i * s.n_0() * s.d() + 2.0 * w * s.n_g() * s.d()) / c);
    r[j] = s.r1() * front + s.r2() * back;
    if (std::abs(r[j]) > 1.0 + passivity_slack)
      throw PassivityError(fmt::format("sample: |r_i| = {} exceeds 1 at detuning {:.4e} rad/s", std::abs(r[j]), w));
  }
  return r;
}

SlabAlignment slab_alignment_from_string(std::string_view name) {
  if (name == "front_balanced") return SlabAlignment::front_balanced;
  if (name == "symmetric") return SlabAlignment::symmetric;
  if (name == "back_balanced") return SlabAlignment::back_balanced;
  throw ValidationError(
      fmt::format("sample.alignment: unknown value '{}' (front_balanced, symmetric, back_balanced)", name));
}

double slab_t_for(SlabAlignment alignment, double n_g, double d, double offset) {
  switch (alignment) {
  case SlabAlignment::front_balanced: return -0.5 * offset;
  case SlabAlignment::symmetric: return 0.5 * (n_g * d - offset);
  case SlabAlignment::back_balanced: return n_g * d - 0.5 * offset;
  }
  return 0.0;
}

Spectrum lowgain_two_layer_spectrum(const TwoLayerSlab& slab, const FrequencyGrid& grid, const GainParams& gain,
                                    const OpticsConfig& config, double z_s, double z_i, double r_s, double theta) {
  if (gain.G() > 0.2)
    throw DomainError(fmt::format("lowgain_two_layer_spectrum: G = {} is above the low-gain limit 0.2; "
                                  "use output_spectrum instead",
                                  gain.G()));
  if (!(r_s >= 0.0 && r_s <= 1.0)) throw ValidationError("lowgain_two_layer_spectrum: r_s must be in [0,1]");
  const double offset = config.group_delay_offset();
  const double phi1 = config.k_p() * config.crystal_length() +
                      (config.omega_s() * z_s + config.omega_i() * z_i) / c - 2.0 * config.omega_i() * slab.t() / c +
                      theta;
  const double phi2 = phi1 + 2.0 * config.omega_i() * slab.n_0() * slab.d() / c;
  const double dz = z_s - z_i;
  const double p1 = offset + dz + 2.0 * slab.t();
  const double p2 = p1 - slab.echo_spacing();

  const TransferPair tp = transfer_functions(grid, gain, config);
  std::vector<double> axis(grid.detunings().begin(), grid.detunings().end());
  std::vector<double> values(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double k = grid[j] / c;
    const double fringe = slab.r1() * std::cos(phi1 + k * p1) + slab.r2() * std::cos(phi2 + k * p2);
    values[j] = std::norm(tp.v_s[j]) * (1.0 + r_s * r_s + 2.0 * r_s * fringe);
    values[j] = std::max(values[j], 0.0);
  }
  return Spectrum(AxisKind::detuning, std::move(axis), std::move(values), grid.omega_s0());
}

std::vector<PredictedPeak> predicted_peak_positions(const TwoLayerSlab& slab, const OpticsConfig& config,
                                                    std::optional<double> offset, double delta_z) {
  const double off = offset ? *offset : config.group_delay_offset();
  const double a = 2.0 * slab.t() + off + delta_z;
  const double b = a - slab.echo_spacing();
  constexpr double merge_tol = 1e-9;
  // an echo term at zero path is one contribution, not a +- pair
  std::vector<double> raw{0.0};
  for (double x : {a, b}) {
    if (std::abs(x) <= merge_tol) {
      raw.push_back(0.0);
    } else {
      raw.push_back(x);
      raw.push_back(-x);
    }
  }
  std::sort(raw.begin(), raw.end());
  std::vector<PredictedPeak> out;
  for (double z : raw) {
    if (!out.empty() && std::abs(z - out.back().position) <= merge_tol) {
      ++out.back().multiplicity;
    } else {
      out.push_back({z, 1});
    }
  }
  // report exact zero for anything merged into the DC slot
  for (auto& p : out)
    if (std::abs(p.position) <= merge_tol) p.position = 0.0;
  return out;
}

namespace {

cplx complex_from_json(const nlohmann::json& v, std::string_view field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_object() && v.contains("re") && v.contains("im") && v.size() == 2 && v["re"].is_number() &&
      v["im"].is_number())
    return {v["re"].get<double>(), v["im"].get<double>()};
  if (v.is_object() && v.contains("abs") && v.contains("phase") && v.size() == 2 && v["abs"].is_number() &&
      v["phase"].is_number())
    return std::polar(v["abs"].get<double>(), v["phase"].get<double>());
  throw ValidationError(fmt::format("{}: expected a number, {{re, im}} or {{abs, phase}}", field));
}

double number(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key)) throw ValidationError(fmt::format("sample.{}: missing", key));
  if (!doc[key].is_number()) throw ValidationError(fmt::format("sample.{}: expected a number", key));
  return doc[key].get<double>();
}

} // namespace

Sample sample_from_json(const nlohmann::json& doc, std::optional<double> offset) {
  if (!doc.is_object()) throw ValidationError("sample: expected an object");
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw ValidationError("sample.kind: missing");
  const std::string kind = doc["kind"].get<std::string>();
  if (kind == "uniform") {
    for (const auto& [key, _] : doc.items())
      if (key != "kind" && key != "r") throw ValidationError(fmt::format("sample.{}: unknown key", key));
    if (!doc.contains("r")) throw ValidationError("sample.r: missing");
    return UniformReflector(complex_from_json(doc["r"], "sample.r"));
  }
  if (kind == "two_layer") {
    static const std::set<std::string> known{"kind", "r1", "r2", "d", "n0", "ng", "t", "alignment"};
    for (const auto& [key, _] : doc.items())
      if (!known.contains(key)) throw ValidationError(fmt::format("sample.{}: unknown key", key));
    const double r1 = number(doc, "r1");
    const double r2 = number(doc, "r2");
    if (!doc.contains("d")) throw ValidationError("sample.d: missing");
    const double d = quantity_from_json(doc["d"], Dimension::length, "sample.d");
    const double n0 = number(doc, "n0");
    const double ng = number(doc, "ng");
    double t = 0.0;
    if (doc.contains("t") == doc.contains("alignment"))
      throw ValidationError("sample.t: give exactly one of t or alignment");
    if (doc.contains("t")) {
      t = quantity_from_json(doc["t"], Dimension::length, "sample.t");
    } else {
      if (!doc["alignment"].is_string()) throw ValidationError("sample.alignment: expected a string");
      if (!offset) throw ValidationError("sample.alignment: needs the crystal dispersion to be known");
      t = slab_t_for(slab_alignment_from_string(doc["alignment"].get<std::string>()), ng, d, *offset);
    }
    return TwoLayerSlab(r1, r2, d, n0, ng, t);
  }
  throw ValidationError(fmt::format("sample.kind: unknown kind '{}' (uniform, two_layer)", kind));
}

nlohmann::json sample_to_json(const Sample& sample) {
  if (const auto* u = std::get_if<UniformReflector>(&sample)) {
    if (u->r().imag() == 0.0) return {{"kind", "uniform"}, {"r", u->r().real()}};
    return {{"kind", "uniform"}, {"r", {{"re", u->r().real()}, {"im", u->r().imag()}}}};
  }
  const auto& s = std::get<TwoLayerSlab>(sample);
  return {{"kind", "two_layer"}, {"r1", s.r1()}, {"r2", s.r2()}, {"d", s.d()},
          {"n0", s.n_0()},       {"ng", s.n_g()}, {"t", s.t()}};
}

} // namespace su11
