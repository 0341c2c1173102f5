// su11-oct: scenario runner and FD-OCT reconstruction front end.
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "su11/error.hpp"
#include "su11/fdoct.hpp"
#include "su11/io.hpp"
#include "su11/scenario.hpp"
#include "su11/units.hpp"

namespace {

using json = nlohmann::json;
using namespace su11;

constexpr int exit_validation = 2;
constexpr int exit_numeric = 3;

std::uint64_t seed_from_env() {
  const char* env = std::getenv("SU11_OCT_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(fmt::format("SU11_OCT_SEED: not an unsigned integer ('{}')", env));
  }
}

OpticsConfig optics_from_file(const std::string& path) {
  const json doc = read_scenario_file(path);
  // a whole scenario works too
  if (doc.is_object() && doc.contains("optics") && doc["optics"].is_object()) return optics_from_json(doc["optics"]);
  return optics_from_json(doc);
}

json window_report(const OpticsConfig& cfg) {
  const auto w = delta_z_window(cfg);
  return {{"lower_m", w.lower},
          {"upper_m", w.unbounded ? json(nullptr) : json(w.upper)},
          {"unbounded", w.unbounded},
          {"degenerate", w.degenerate}};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"SU(1,1) interferometer simulator and FD-OCT reconstruction"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", field, values, config_path, spectrum_path, window = "none";
  unsigned jobs = 1;
  int zero_pad = 8;
  double min_height = 0.1;
  std::string exclude_dc;
  bool rolloff = false;

  auto* run = app.add_subcommand("run", "run a scenario (its sweep section too, if present)");
  run->add_option("scenario", scenario_path, "scenario JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "concurrent sweep points")->check(CLI::PositiveNumber);

  auto* sw = app.add_subcommand("sweep", "run a scenario once per value of one field");
  sw->add_option("scenario", scenario_path, "scenario JSON")->required();
  sw->add_option("--field", field, "dotted path of a numeric leaf, e.g. geometry.delta_z")->required();
  sw->add_option("--values", values, "comma-separated values, units allowed (150um,200um)")->required();
  sw->add_option("--out", out_dir, "output directory");
  sw->add_option("--jobs", jobs, "concurrent sweep points")->check(CLI::PositiveNumber);

  auto* win = app.add_subcommand("window", "path-difference operating window");
  win->add_option("--config", config_path, "optics JSON")->required();

  auto* rec = app.add_subcommand("reconstruct", "depth profile of a measured spectrum");
  rec->add_option("spectrum", spectrum_path, "CSV with wavelength_m,value")->required();
  rec->add_option("--config", config_path, "optics JSON")->required();
  rec->add_option("--out", out_dir, "write depth_profile.csv, peaks.csv and an SVG here");
  rec->add_option("--window", window, "none or hann");
  rec->add_option("--zero-pad", zero_pad, "zero padding factor")->check(CLI::PositiveNumber);
  rec->add_option("--min-height", min_height, "peak threshold relative to the strongest non-DC peak");
  rec->add_option("--exclude-dc", exclude_dc, "DC exclusion radius, e.g. 70um");
  rec->add_flag("--rolloff", rolloff, "undo the spectrometer roll-off using the configured resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_validation;
  }

  try {
    if (*run || *sw) {
      RunOptions opts;
      opts.out_dir = out_dir;
      opts.jobs = jobs;
      opts.seed = seed_from_env();
      const json doc = read_scenario_file(scenario_path);
      if (*sw || (doc.is_object() && doc.contains("sweep"))) {
        load_scenario(doc); // field-level validation before any work
        const std::string f = *sw ? field : doc["sweep"]["field"].get<std::string>();
        std::vector<json> vals;
        if (*sw)
          vals = parse_value_list(values);
        else
          vals = doc["sweep"]["values"].get<std::vector<json>>();
        const auto reports = sweep(doc, f, vals, opts);
        json all = json::array();
        for (const auto& r : reports) all.push_back(report_to_json(r));
        std::cout << json{{"sweep_csv", (opts.out_dir / "sweep.csv").string()}, {"points", all}}.dump(2) << "\n";
      } else {
        const auto report = run_scenario(load_scenario(doc), opts);
        std::cout << report_to_json(report).dump(2) << "\n";
      }
    } else if (*win) {
      std::cout << window_report(optics_from_file(config_path)).dump(2) << "\n";
    } else if (*rec) {
      const OpticsConfig cfg = optics_from_file(config_path);
      const Spectrum measured = read_spectrum_csv(read_text(spectrum_path));
      EstimateOptions eo;
      eo.depth.window = window_from_string(window);
      eo.depth.zero_pad = zero_pad;
      eo.min_height_frac = min_height;
      eo.exclude_dc_radius = exclude_dc.empty() ? default_dc_exclusion(cfg)
                                                : parse_quantity(exclude_dc, Dimension::length, "--exclude-dc");
      if (rolloff) eo.depth.rolloff = RolloffCompensation{cfg.params().delta_lambda_res, cfg.lambda_s()};
      const auto profile = depth_profile(resample_uniform_k(measured), eo.depth);
      const auto peaks = find_peaks(profile, eo.min_height_frac, eo.exclude_dc_radius);
      json pj = json::array();
      for (const auto& p : peaks) pj.push_back({{"position_m", p.position}, {"height", p.height}, {"fwhm_m", p.fwhm}});
      json out{{"peaks", pj}, {"window", window_report(cfg)}};
      try {
        out["delta_z_estimate_m"] = estimate_delta_z(measured, eo);
      } catch (const EstimationError& e) {
        out["delta_z_estimate_m"] = nullptr;
        out["note"] = e.what();
      }
      if (rec->count("--out")) {
        const std::filesystem::path dir = out_dir;
        write_atomic(dir / "depth_profile.csv", depth_profile_csv(profile));
        write_atomic(dir / "peaks.csv", peaks_csv(peaks));
        write_atomic(dir / "depth_profile.svg", depth_profile_svg(profile, 1e-3, spectrum_path));
      }
      std::cout << out.dump(2) << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return exit_validation;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return exit_numeric;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return exit_validation;
  }
  return 0;
}
