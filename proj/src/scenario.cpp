#include "su11/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "su11/error.hpp"
#include "su11/io.hpp"
#include "su11/units.hpp"
#include "su11/visibility.hpp"

namespace su11 {

using constants::c;

namespace {

using json = nlohmann::json;

const std::set<std::string> known_outputs{"spectrum", "detected", "depth_profile", "peaks", "visibility",
                                          "window_check"};

void reject_unknown(const json& obj, const std::set<std::string>& known, std::string_view section) {
  for (const auto& [key, _] : obj.items())
    if (!known.contains(key)) throw ValidationError(fmt::format("{}.{}: unknown key", section, key));
}

const json& object_or_empty(const json& doc, const char* key) {
  static const json empty = json::object();
  if (!doc.contains(key)) return empty;
  if (!doc[key].is_object()) throw ValidationError(fmt::format("{}: expected an object", key));
  return doc[key];
}

double number_in(const json& obj, const char* key, std::string_view section, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ValidationError(fmt::format("{}.{}: expected a number", section, key));
  return obj[key].get<double>();
}

json::json_pointer pointer_for(const std::string& field) {
  if (field.empty()) throw ValidationError("sweep.field: empty path");
  std::string ptr;
  std::size_t start = 0;
  while (start <= field.size()) {
    const auto dot = field.find('.', start);
    const std::string part = field.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError(fmt::format("sweep.field: malformed path '{}'", field));
    ptr += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return json::json_pointer(ptr);
}

void check_sweepable(const json& doc, const std::string& field) {
  const auto ptr = pointer_for(field);
  if (!doc.contains(ptr)) throw ValidationError(fmt::format("sweep.field: '{}' does not exist in the scenario", field));
  const auto& leaf = doc.at(ptr);
  if (!leaf.is_number() && !leaf.is_string())
    throw ValidationError(fmt::format("sweep.field: '{}' is not a numeric leaf", field));
}

std::vector<double> r_i_values(const json& v) {
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number()) throw ValidationError("visibility.r_i: expected numbers");
      out.push_back(x.get<double>());
    }
  } else if (v.is_object()) {
    reject_unknown(v, {"from", "to", "count"}, "visibility.r_i");
    const double from = number_in(v, "from", "visibility.r_i", 0.0);
    const double to = number_in(v, "to", "visibility.r_i", 1.0);
    const double count = number_in(v, "count", "visibility.r_i", 21);
    if (count < 2 || count != std::floor(count)) throw ValidationError("visibility.r_i.count: integer >= 2");
    const auto n = static_cast<std::size_t>(count);
    for (std::size_t k = 0; k < n; ++k) out.push_back(from + (to - from) * static_cast<double>(k) / static_cast<double>(n - 1));
  } else {
    throw ValidationError("visibility.r_i: expected a list or {from, to, count}");
  }
  for (double r : out)
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError(fmt::format("visibility.r_i: {} outside [0,1]", r));
  return out;
}

} // namespace

std::string config_hash(const json& doc) { return hex64(fnv1a(doc.dump())); }

json read_scenario_file(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: invalid JSON ({})", path.string(), e.what()));
  }
}

Scenario load_scenario(const json& doc) {
  if (!doc.is_object()) throw ValidationError("scenario: expected a JSON object");
  reject_unknown(doc,
                 {"name", "optics", "calibration", "gain", "gain2", "grid", "geometry", "sample", "detector",
                  "reconstruction", "visibility", "sweep", "outputs"},
                 "scenario");
  Scenario s;
  s.doc = doc;
  if (!doc.contains("name") || !doc["name"].is_string() || doc["name"].get<std::string>().empty())
    throw ValidationError("name: missing");
  s.name = doc["name"].get<std::string>();

  OpticsConfig cfg = optics_from_json(object_or_empty(doc, "optics"));
  if (!doc.contains("gain")) throw ValidationError("gain: missing");
  s.gain1 = gain_from_json(doc["gain"], cfg, "gain");
  s.gain2 = doc.contains("gain2") ? gain_from_json(doc["gain2"], cfg, "gain2") : s.gain1;

  if (doc.contains("calibration")) {
    const json& cal = object_or_empty(doc, "calibration");
    reject_unknown(cal, {"signal_fwhm", "G"}, "calibration");
    const double target = cal.contains("signal_fwhm")
                              ? quantity_from_json(cal["signal_fwhm"], Dimension::length, "calibration.signal_fwhm")
                              : cfg.params().signal_fwhm;
    const double G = number_in(cal, "G", "calibration", s.gain1.G());
    if (!(G > 0.0)) throw ValidationError("calibration.G: must be positive");
    const double mismatch = calibrate_dispersion(target, GainParams::from_gain(G, cfg.crystal_length()), cfg);
    const double D_s = cfg.params().D_s ? *cfg.params().D_s : cfg.params().n_s / c;
    cfg = cfg.with_dispersion(D_s, D_s + mismatch);
  } else if (!cfg.has_dispersion()) {
    throw ValidationError("optics.D_s: missing; give D_s and D_i or add a calibration section");
  }
  s.optics = cfg;

  const json& grid = object_or_empty(doc, "grid");
  reject_unknown(grid, {"span", "count"}, "grid");
  const double span = number_in(grid, "span", "grid", 1.4e14);
  const double count = number_in(grid, "count", "grid", 8001);
  if (count != std::floor(count) || count < 3) throw ValidationError("grid.count: must be an odd integer >= 3");
  s.grid = make_grid(cfg, span, static_cast<std::size_t>(count));

  const json& geo = object_or_empty(doc, "geometry");
  reject_unknown(geo, {"z_s", "z_i", "delta_z", "reference", "r_s", "phase_offset"}, "geometry");
  s.geometry.z_i = geo.contains("z_i") ? quantity_from_json(geo["z_i"], Dimension::length, "geometry.z_i") : 0.05;
  s.geometry.r_s = number_in(geo, "r_s", "geometry", 1.0);
  s.geometry.phase_offset = number_in(geo, "phase_offset", "geometry", 0.0);
  std::string reference = "balanced";
  if (geo.contains("reference")) {
    if (!geo["reference"].is_string()) throw ValidationError("geometry.reference: expected a string");
    reference = geo["reference"].get<std::string>();
    if (reference != "balanced" && reference != "geometric")
      throw ValidationError("geometry.reference: must be 'balanced' or 'geometric'");
  }
  if (geo.contains("z_s") && geo.contains("delta_z")) throw ValidationError("geometry.z_s: give z_s or delta_z, not both");
  s.delta_z = geo.contains("delta_z") ? quantity_from_json(geo["delta_z"], Dimension::length, "geometry.delta_z") : 0.0;
  if (geo.contains("z_s")) {
    s.geometry.z_s = quantity_from_json(geo["z_s"], Dimension::length, "geometry.z_s");
    s.delta_z = s.geometry.delta_z();
    reference = "geometric";
  } else if (reference == "balanced") {
    s.balanced_delta_z = balanced_delta_z(s.gain1, s.gain2, s.grid, cfg);
    s.geometry.z_s = s.geometry.z_i + s.balanced_delta_z + s.delta_z;
  } else {
    s.geometry.z_s = s.geometry.z_i + s.delta_z;
  }
  if (reference == "geometric") s.balanced_delta_z = 0.0;
  s.geometric_reference = reference == "geometric";
  s.geometry.validate();

  if (doc.contains("sample")) s.sample = sample_from_json(doc["sample"], cfg.group_delay_offset());

  if (doc.contains("detector")) {
    const json& det = object_or_empty(doc, "detector");
    reject_unknown(det, {"resolution", "pixels", "range", "noise", "photon_scale", "rolloff_compensation"}, "detector");
    const double res = det.contains("resolution")
                           ? quantity_from_json(det["resolution"], Dimension::length, "detector.resolution")
                           : cfg.params().delta_lambda_res;
    auto range = cfg.params().spectrometer_range;
    if (det.contains("range")) {
      if (!det["range"].is_array() || det["range"].size() != 2) throw ValidationError("detector.range: expected [min, max]");
      range = {quantity_from_json(det["range"][0], Dimension::length, "detector.range[0]"),
               quantity_from_json(det["range"][1], Dimension::length, "detector.range[1]")};
    }
    const double pixels = number_in(det, "pixels", "detector", 2048);
    if (pixels != std::floor(pixels) || pixels < 16) throw ValidationError("detector.pixels: integer >= 16");
    auto model = SpectrometerModel::uniform(range.first, range.second, static_cast<std::size_t>(pixels), res);
    if (det.contains("noise")) {
      if (!det["noise"].is_boolean()) throw ValidationError("detector.noise: expected true or false");
      model.noise = det["noise"].get<bool>();
    }
    model.photon_scale = number_in(det, "photon_scale", "detector", 1.0);
    model.validate();
    if (det.contains("rolloff_compensation")) {
      if (!det["rolloff_compensation"].is_boolean())
        throw ValidationError("detector.rolloff_compensation: expected true or false");
      s.rolloff_compensation = det["rolloff_compensation"].get<bool>();
    }
    s.detector = std::move(model);
  }

  const json& rec = object_or_empty(doc, "reconstruction");
  reject_unknown(rec, {"window", "zero_pad", "keep_mean", "exclude_dc_radius", "min_height_frac"}, "reconstruction");
  if (rec.contains("window")) {
    if (!rec["window"].is_string()) throw ValidationError("reconstruction.window: expected a string");
    s.reconstruction.depth.window = window_from_string(rec["window"].get<std::string>());
  }
  const double pad = number_in(rec, "zero_pad", "reconstruction", 8);
  if (pad != std::floor(pad) || pad < 1) throw ValidationError("reconstruction.zero_pad: integer >= 1");
  s.reconstruction.depth.zero_pad = static_cast<int>(pad);
  if (rec.contains("keep_mean")) {
    if (!rec["keep_mean"].is_boolean()) throw ValidationError("reconstruction.keep_mean: expected true or false");
    s.reconstruction.depth.keep_mean = rec["keep_mean"].get<bool>();
  }
  s.reconstruction.exclude_dc_radius =
      rec.contains("exclude_dc_radius")
          ? quantity_from_json(rec["exclude_dc_radius"], Dimension::length, "reconstruction.exclude_dc_radius")
          : default_dc_exclusion(cfg);
  s.reconstruction.min_height_frac = number_in(rec, "min_height_frac", "reconstruction", 0.1);
  if (!(s.reconstruction.min_height_frac >= 0.0 && s.reconstruction.min_height_frac <= 1.0))
    throw ValidationError("reconstruction.min_height_frac: must be in [0,1]");
  if (s.rolloff_compensation && s.detector)
    s.reconstruction.depth.rolloff = RolloffCompensation{s.detector->resolution_fwhm, cfg.lambda_s()};

  const json& vis = object_or_empty(doc, "visibility");
  reject_unknown(vis, {"r_i", "gains", "band"}, "visibility");
  if (vis.contains("r_i")) s.visibility.r_i = r_i_values(vis["r_i"]);
  if (vis.contains("gains")) {
    if (!vis["gains"].is_array() || vis["gains"].empty()) throw ValidationError("visibility.gains: expected a non-empty list");
    for (const auto& g : vis["gains"]) {
      if (!g.is_number() || !(g.get<double>() > 0.0)) throw ValidationError("visibility.gains: positive numbers expected");
      s.visibility.gains.push_back(g.get<double>());
    }
  }
  if (vis.contains("band")) {
    if (!vis["band"].is_array() || vis["band"].size() != 2 || !vis["band"][0].is_number() || !vis["band"][1].is_number())
      throw ValidationError("visibility.band: expected [min, max] detuning in rad/s");
    s.visibility.band = std::pair{vis["band"][0].get<double>(), vis["band"][1].get<double>()};
  }

  if (!doc.contains("outputs") || !doc["outputs"].is_array() || doc["outputs"].empty())
    throw ValidationError("outputs: expected a non-empty list");
  for (const auto& o : doc["outputs"]) {
    if (!o.is_string() || !known_outputs.contains(o.get<std::string>()))
      throw ValidationError(fmt::format("outputs: unknown output {} (spectrum, detected, depth_profile, peaks, "
                                        "visibility, window_check)",
                                        o.dump()));
    s.outputs.push_back(o.get<std::string>());
  }
  auto wants = [&](std::string_view o) { return std::find(s.outputs.begin(), s.outputs.end(), o) != s.outputs.end(); };
  for (const char* o : {"spectrum", "detected", "depth_profile", "peaks"})
    if (wants(o) && !s.sample) throw ValidationError(fmt::format("sample: missing (required by output {})", o));
  for (const char* o : {"detected", "depth_profile", "peaks"})
    if (wants(o) && !s.detector) throw ValidationError(fmt::format("detector: missing (required by output {})", o));
  if (wants("visibility") && s.visibility.r_i.empty() &&
      !(s.sample && std::holds_alternative<UniformReflector>(*s.sample)))
    throw ValidationError("visibility.r_i: missing (or give a uniform sample) for output visibility");

  if (doc.contains("sweep")) {
    const json& sw = object_or_empty(doc, "sweep");
    reject_unknown(sw, {"field", "values"}, "sweep");
    if (!sw.contains("field") || !sw["field"].is_string()) throw ValidationError("sweep.field: missing");
    if (!sw.contains("values") || !sw["values"].is_array() || sw["values"].empty())
      throw ValidationError("sweep.values: expected a non-empty list");
    json probe = doc;
    probe.erase("sweep");
    check_sweepable(probe, sw["field"].get<std::string>());
  }
  return s;
}

namespace {

struct Stage {
  const Scenario& s;
  const RunOptions& opts;
  RunReport& report;

  void emit(const std::string& key, const std::string& file, std::string_view content) {
    write_atomic(opts.out_dir / file, content);
    report.files[key] = file;
  }
};

json window_json(const DeltaZWindow& w) {
  return {{"lower_m", w.lower},
          {"upper_m", w.unbounded ? json(nullptr) : json(w.upper)},
          {"unbounded", w.unbounded},
          {"degenerate", w.degenerate}};
}

void run_visibility(Stage& st, json& summary) {
  const Scenario& s = st.s;
  const OpticsConfig& cfg = s.optics;
  const VisibilityOptions vopts{s.visibility.band};
  if (s.sample && std::holds_alternative<UniformReflector>(*s.sample)) {
    const cplx r = std::get<UniformReflector>(*s.sample).r();
    const auto v = visibility_multimode(s.gain1, s.gain2, s.geometry, r, s.grid, cfg, vopts);
    summary["visibility"] = v.v;
  }
  if (s.visibility.r_i.empty()) return;

  std::vector<double> gains = s.visibility.gains;
  if (gains.empty()) gains.push_back(s.gain1.G());
  std::vector<VisibilityRow> rows;
  std::vector<PlotSeries> series;
  json curves = json::object();
  for (double G : gains) {
    const auto g = GainParams::from_gain(G, cfg.crystal_length());
    ArmGeometry geom = s.geometry;
    const double dz = s.geometric_reference
                          ? s.geometry.delta_z()
                          : balanced_delta_z(g, g, s.grid, cfg) + s.delta_z;
    geom.z_s = geom.z_i + dz;
    PlotSeries ps{fmt::format("G = {}", G), {}, {}};
    for (double r : s.visibility.r_i) {
      const auto v = visibility_multimode(g, g, geom, r, s.grid, cfg, vopts);
      rows.push_back({G, geom.r_s, r, v});
      ps.x.push_back(r);
      ps.y.push_back(v.v);
    }
    curves[fmt::format("{}", G)] = ps.y;
    series.push_back(std::move(ps));
  }
  st.emit("visibility", "visibility.csv", visibility_csv(rows));

  // closed-form comparison curves
  const double r_s = s.geometry.r_s;
  std::string lim = "r_i,lowgain,highgain";
  for (double G : gains) lim += fmt::format(",singlemode_G{}", G);
  lim += "\n";
  PlotSeries low{"low-gain line", {}, {}};
  for (double r : s.visibility.r_i) {
    lim += fmt::format("{},{},{}", format_number(r), format_number(visibility_lowgain(r_s, r)),
                       (r_s == 0.0 && r == 0.0) ? std::string("") : format_number(visibility_highgain(r_s, r)));
    for (double G : gains) lim += "," + format_number(visibility_singlemode(G, G, r_s, r));
    lim += "\n";
    low.x.push_back(r);
    low.y.push_back(visibility_lowgain(r_s, r));
  }
  series.push_back(std::move(low));
  st.emit("visibility_limits", "visibility_limits.csv", lim);
  st.emit("visibility_plot", "visibility.svg", svg_plot(series, fmt::format("visibility, r_s = {}", r_s), "|r_i|", "V"));
  summary["visibility_curves"] = curves;
}

} // namespace

RunReport run_scenario(const Scenario& s, const RunOptions& opts) {
  RunReport report;
  report.name = s.name;
  report.config_hash = config_hash(s.doc);
  Stage st{s, opts, report};
  const OpticsConfig& cfg = s.optics;
  auto wants = [&](std::string_view o) { return std::find(s.outputs.begin(), s.outputs.end(), o) != s.outputs.end(); };

  json summary;
  summary["G1"] = s.gain1.G();
  summary["G2"] = s.gain2.G();
  summary["dispersion_mismatch_s_per_m"] = cfg.dispersion_mismatch();
  summary["crystal_offset_m"] = cfg.group_delay_offset();
  summary["balanced_delta_z_m"] = s.balanced_delta_z;
  summary["delta_z_m"] = s.delta_z;

  try {
    std::optional<Spectrum> spectrum;
    if (s.sample) {
      const auto p1 = transfer_functions(s.grid, s.gain1, cfg);
      const auto p2 = transfer_functions(s.grid, s.gain2, cfg);
      spectrum = output_spectrum(s.grid, p1, p2, s.geometry, *s.sample, cfg);
      summary["flux_rate"] = flux_rate(*spectrum);
      if (wants("spectrum")) {
        st.emit("spectrum", "spectrum.csv", spectrum_to_csv(*spectrum));
        PlotSeries ps{"", {}, {}};
        for (std::size_t j = 0; j < spectrum->size(); ++j) {
          ps.x.push_back(constants::two_pi * c / (s.grid.omega_s0() + spectrum->axis()[j]) * 1e9);
          ps.y.push_back(spectrum->values()[j]);
        }
        st.emit("spectrum_plot", "spectrum.svg", svg_plot(std::span(&ps, 1), s.name, "wavelength (nm)", "S"));
      }
      if (const auto* slab = std::get_if<TwoLayerSlab>(&*s.sample)) {
        json pred = json::array();
        const double geometric = s.geometry.delta_z();
        for (const auto& p : predicted_peak_positions(*slab, cfg, {}, geometric))
          pred.push_back({{"position_m", p.position}, {"multiplicity", p.multiplicity}});
        summary["predicted_peaks"] = pred;
        summary["slab_t_m"] = slab->t();
      }
    }

    if (s.detector && spectrum && (wants("detected") || wants("depth_profile") || wants("peaks"))) {
      std::mt19937_64 rng(opts.seed);
      const Spectrum detected = detect(*spectrum, *s.detector, cfg, s.detector->noise ? &rng : nullptr);
      if (wants("detected")) {
        st.emit("detected", "detected.csv", spectrum_to_csv(detected));
        json dj = spectrum_to_json(detected);
        dj["spectrometer"] = spectrometer_to_json(*s.detector);
        st.emit("detected_json", "detected.json", dj.dump(1));
      }
      if (wants("depth_profile") || wants("peaks")) {
        const auto profile = depth_profile(resample_uniform_k(detected), s.reconstruction.depth);
        const auto peaks = find_peaks(profile, s.reconstruction.min_height_frac, s.reconstruction.exclude_dc_radius);
        if (wants("depth_profile")) {
          st.emit("depth_profile", "depth_profile.csv", depth_profile_csv(profile));
          st.emit("depth_profile_plot", "depth_profile.svg", depth_profile_svg(profile, 1e-3, s.name));
        }
        if (wants("peaks")) st.emit("peaks", "peaks.csv", peaks_csv(peaks));
        json pj = json::array();
        const Peak* best = nullptr;
        for (const auto& p : peaks) {
          pj.push_back(p.position);
          if (p.position > 0.0 && (!best || p.height > best->height)) best = &p;
        }
        summary["peaks_m"] = pj;
        summary["peak_count"] = peaks.size();
        summary["transform_limit_m"] = transform_limit_resolution(cfg.lambda_s(), cfg.params().signal_fwhm);
        if (best) {
          summary["delta_z_estimate_m"] = best->position;
          summary["dominant_peak_fwhm_m"] = best->fwhm;
          try {
            summary["axial_resolution_m"] = axial_resolution(peaks, *best);
          } catch (const ResolutionError& e) {
            summary["axial_resolution_m"] = nullptr;
            summary["axial_resolution_note"] = e.what();
          }
        } else {
          summary["delta_z_estimate_m"] = nullptr;
        }
      }
    }

    if (wants("visibility")) run_visibility(st, summary);

    if (wants("window_check")) {
      const auto w = delta_z_window(cfg);
      json wj = window_json(w);
      // where a mirror echo would put its fringe on the path-difference axis
      const double fringe =
          std::abs(s.geometric_reference ? s.geometry.delta_z() + cfg.group_delay_offset() : s.delta_z);
      wj["fringe_position_m"] = fringe;
      wj["inside"] = !w.degenerate && fringe > w.lower && (w.unbounded || fringe < w.upper);
      summary["window"] = wj;
    }
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("scenario '{}': {}", s.name, e.what()));
  } catch (const NumericError& e) {
    throw NumericError(fmt::format("scenario '{}': {}", s.name, e.what()));
  }

  report.summary = summary;
  write_atomic(opts.out_dir / "report.json", report_to_json(report).dump(2) + "\n");
  return report;
}

json report_to_json(const RunReport& r) {
  return {{"name", r.name}, {"config_hash", r.config_hash}, {"files", r.files}, {"summary", r.summary}};
}

std::vector<json> parse_value_list(const std::string& csv) {
  std::vector<json> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    std::string tok = csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok.empty()) throw ValidationError("sweep.values: empty entry in value list");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec == std::errc() && ptr == tok.data() + tok.size())
      out.emplace_back(v);
    else
      out.emplace_back(tok);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (csv.find_first_not_of(" \t") == std::string::npos) throw ValidationError("sweep.values: empty value list");
  return out;
}

std::vector<RunReport> sweep(const json& doc, const std::string& field, const std::vector<json>& values,
                             const RunOptions& opts) {
  if (values.empty()) throw ValidationError("sweep.values: empty value list");
  json base = doc;
  base.erase("sweep");
  check_sweepable(base, field);
  const auto ptr = pointer_for(field);
  for (const auto& v : values)
    if (!v.is_number() && !v.is_string()) throw ValidationError("sweep.values: entries must be numbers or quantities");

  // validate every point before spending time on any of them
  std::vector<Scenario> scenarios;
  scenarios.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    json d = base;
    d[ptr] = values[k];
    try {
      scenarios.push_back(load_scenario(d));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("sweep point {} ({} = {}): {}", k, field, values[k].dump(), e.what()));
    }
  }

  std::vector<std::optional<RunReport>> reports(values.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= values.size()) return;
      try {
        RunOptions o = opts;
        o.out_dir = opts.out_dir / fmt::format("{:03d}", k);
        o.seed = opts.seed + k;
        reports[k] = run_scenario(scenarios[k], o);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(values.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  auto cell = [](const json& summary, const char* key) -> std::string {
    if (!summary.contains(key) || summary[key].is_null()) return "";
    if (summary[key].is_number_float()) return format_number(summary[key].get<double>());
    return summary[key].dump();
  };
  std::string csv = "value,visibility,delta_z_estimate_m,axial_resolution_m,peak_count,peaks_m\n";
  std::vector<RunReport> out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto& sm = reports[k]->summary;
    std::string peaks;
    if (sm.contains("peaks_m"))
      for (const auto& p : sm["peaks_m"]) peaks += (peaks.empty() ? "" : ";") + format_number(p.get<double>());
    const std::string value = values[k].is_string() ? values[k].get<std::string>() : format_number(values[k].get<double>());
    csv += fmt::format("{},{},{},{},{},{}\n", value, cell(sm, "visibility"), cell(sm, "delta_z_estimate_m"),
                       cell(sm, "axial_resolution_m"), cell(sm, "peak_count"), peaks);
    out.push_back(std::move(*reports[k]));
  }
  write_atomic(opts.out_dir / "sweep.csv", csv);
  return out;
}

} // namespace su11
