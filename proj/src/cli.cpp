// SPDX-License-Identifier: Apache-2.0
#include "ils/cli.hpp"

#include "ils/hash.hpp"
#include "ils/parallel.hpp"
#include "ils/patchify.hpp"
#include "ils/perception.hpp"
#include "ils/report.hpp"
#include "ils/scene_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace ils {

namespace {

using nlohmann::json;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string_view command_name(Command c) {
  switch (c) {
    case Command::patchify: return "patchify";
    case Command::solve: return "solve";
    case Command::simulate: return "simulate";
    case Command::optimize: return "optimize";
    case Command::evaluate: return "evaluate";
    case Command::export_map: return "export-map";
  }
  return "?";
}

void require_path(const std::filesystem::path& p, std::string_view flag, Command c) {
  if (p.empty()) {
    throw UsageError(std::string(command_name(c)) + " requires " + std::string(flag));
  }
}

void validate_knobs(const RunConfig& cfg) {
  if (!(cfg.patch_size > 0.0 && cfg.patch_size <= 10.0)) throw UsageError("--patch-size must be in (0, 10] m");
  if (cfg.ff_samples < 1 || cfg.ff_samples > 4096) throw UsageError("--ff-samples must be in [1, 4096]");
  if (cfg.n_rays < 1 || cfg.n_rays > 100'000'000) throw UsageError("--rays must be in [1, 1e8]");
  if (!(cfg.delta_max >= 0.0)) throw UsageError("--delta-max must be >= 0");
  if (!(cfg.body_radius >= 0.0 && cfg.body_radius < 2.0)) throw UsageError("--body-radius must be in [0, 2) m");
  if (!(cfg.hours > 0.0)) throw UsageError("--hours must be > 0");
  if (!(cfg.overhead_watts >= 0.0)) throw UsageError("--overhead must be >= 0");
  if (cfg.output_dir.empty()) throw UsageError("--out must not be empty");
  if (!cfg.detections_path.empty() && (cfg.depth_path.empty() || cfg.intrinsics_path.empty())) {
    throw UsageError("--detections needs --depth and --intrinsics to place heads in 3-D");
  }
}

/// Everything one run loads from disk, plus the content hash of it.
struct Inputs {
  Scene scene;
  std::string input_hash;
  std::optional<DepthImage> depth;
  std::optional<DepthSidecar> sidecar;
  std::map<int, double> ground_truth;
};

void hash_knobs(Fnv1a& h, const RunConfig& cfg) {
  std::ostringstream os;
  os << command_name(cfg.command) << '|' << format_exact(cfg.patch_size) << '|' << cfg.ff_samples << '|'
     << cfg.ff_occlusion << '|' << cfg.n_rays << '|' << format_exact(cfg.delta_max) << '|' << mode_name(cfg.mode)
     << '|' << cfg.format << '|'
     << format_exact(cfg.body_radius) << '|' << (cfg.frame ? std::to_string(*cfg.frame) : "-") << '|'
     << format_exact(cfg.overhead_watts) << '|' << format_exact(cfg.hours) << '|'
     << (cfg.spatial_floor ? format_exact(*cfg.spatial_floor) : "-") << '|';
  for (double d : cfg.dims) os << format_exact(d) << ',';
  h.update(os.str());
}

void hash_file(Fnv1a& h, const std::filesystem::path& p, std::string_view tag) {
  h.update(tag);
  if (p.empty()) return;
  h.update(read_text_file(p));
}

Inputs load_inputs(const RunConfig& cfg) {
  Inputs in;
  Fnv1a h;
  hash_knobs(h, cfg);

  if (!cfg.depth_path.empty()) {
    require_path(cfg.intrinsics_path, "--intrinsics", cfg.command);
    in.sidecar = parse_depth_sidecar(read_text_file(cfg.intrinsics_path));
    in.depth = read_depth_pgm(cfg.depth_path, in.sidecar->depth_scale_m);
  }
  hash_file(h, cfg.depth_path, "depth");
  hash_file(h, cfg.intrinsics_path, "intrinsics");

  if (!cfg.scene_path.empty()) {
    in.scene = load_scene_file(cfg.scene_path);
  }
  if (in.sidecar) in.scene.camera = in.sidecar->camera;

  if (!cfg.detections_path.empty()) {
    const auto text = read_text_file(cfg.detections_path);
    h.update("detections");
    h.update(text);
    const auto records = ingest_detections(text, std::pair{in.depth->width, in.depth->height});
    if (records.empty()) throw ParseError("'" + cfg.detections_path.string() + "' holds no detections");
    const int frame = cfg.frame.value_or(records.front().frame_id);
    const auto lsc = in.scene.occupants.empty() ? LuxmeterSensitivityCurve::cosine()
                                                : in.scene.occupants.front().lsc;
    in.scene.occupants =
        occupants_from_detections(records, frame, *in.depth, in.scene.camera, in.scene.world_up, lsc);
    if (in.scene.occupants.empty()) {
      throw ParseError("no detections for frame " + std::to_string(frame) + " in '" +
                       cfg.detections_path.string() + "'");
    }
  }

  if (!cfg.ground_truth_path.empty()) {
    const auto text = read_text_file(cfg.ground_truth_path);
    h.update("ground-truth");
    h.update(text);
    in.ground_truth = parse_ground_truth_csv(text);
  }

  if (!cfg.dims.empty()) {
    if (cfg.dims.size() != in.scene.luminaires.size()) {
      throw UsageError("--dims has " + std::to_string(cfg.dims.size()) + " entries but the scene has " +
                       std::to_string(in.scene.luminaires.size()) + " luminaires");
    }
    for (std::size_t l = 0; l < cfg.dims.size(); ++l) {
      if (!(cfg.dims[l] >= 0.0 && cfg.dims[l] <= 1.0)) throw UsageError("--dims entries must lie in [0, 1]");
      in.scene.luminaires[l].dim = cfg.dims[l];
    }
  }

  if (cfg.command != Command::patchify && cfg.body_radius > 0.0 && !in.scene.occupants.empty()) {
    BodyOptions body;
    body.radius = cfg.body_radius;
    in.scene = with_occupant_bodies(in.scene, body);
  }
  in.scene.validate();

  h.update("scene");
  h.update(save_scene(in.scene));
  in.input_hash = h.hex();
  return in;
}

/// Scene geometry, acceleration structure and superposition basis.
struct Model {
  AccelIndex accel;
  RadiosityModel radiosity;
};

Model build_model(const Scene& scene, const RunConfig& cfg, std::ostream& out) {
  if (scene.patches.empty()) throw InvariantError("scene has no patches");
  Model m{build_accel(scene.patches), {}};
  BasisOptions opts;
  opts.n_samples = cfg.ff_samples;
  opts.occlusion = cfg.ff_occlusion;
  if (!cfg.ff_cache.empty()) opts.ff_cache = cfg.ff_cache;
  m.radiosity = build_radiosity(scene, m.accel, opts);
  if (!cfg.ff_cache.empty()) {
    out << "form-factor cache " << (m.radiosity.cache_hit ? "hit" : "miss") << ": " << cfg.ff_cache.string() << '\n';
  }
  return m;
}

IlsConfig ils_config(const RunConfig& cfg) {
  IlsConfig c;
  c.delta_max_lux = cfg.delta_max;
  c.mode = cfg.mode;
  c.overhead_watts = cfg.overhead_watts;
  c.spatial_floor_lux = cfg.spatial_floor;
  return c;
}

json summary_head(const RunConfig& cfg, const ArtifactStamp& stamp) {
  json j;
  j["tool"] = "ilsctl";
  j["version"] = kToolVersion;
  j["inputs_hash"] = stamp.input_hash;
  j["command"] = command_name(cfg.command);
  return j;
}

json energy_json(const EnergyReport& e) {
  return {{"baseline_wh", e.baseline_wh},
          {"ils_wh", e.ils_wh},
          {"delta_watt", e.delta_watt},
          {"saving_fraction", e.saving_fraction},
          {"hours", e.hours}};
}

json int_map_json(const std::map<int, double>& m) {
  json j = json::object();
  for (const auto& [id, v] : m) j[std::to_string(id)] = v;
  return j;
}

void write_summary(const RunConfig& cfg, const json& j) {
  write_atomic(cfg.output_dir / "summary.json", j.dump(2) + "\n");
}

void cmd_patchify(const RunConfig& cfg, Inputs& in, const ArtifactStamp& stamp, std::ostream& out) {
  require_path(cfg.depth_path, "--depth", cfg.command);
  PatchifyOptions opts;
  opts.patch_size = cfg.patch_size;
  std::vector<Patch> kept;
  for (const auto& p : in.scene.patches) kept.push_back(p);
  opts.first_id = next_patch_id(kept);
  auto patches = patchify_depth(*in.depth, in.scene.camera, opts);
  const std::size_t added = patches.size();
  in.scene.patches.insert(in.scene.patches.end(), patches.begin(), patches.end());
  in.scene.validate();

  json doc = json::parse(save_scene(in.scene));
  doc["generator"] = stamp.line("").substr(1);
  write_atomic(cfg.output_dir / "scene.json", doc.dump(2) + "\n");

  json s = summary_head(cfg, stamp);
  s["patches_added"] = added;
  s["patches_total"] = in.scene.patches.size();
  write_summary(cfg, s);
  out << "patchify: " << added << " patches from depth, " << in.scene.patches.size() << " total\n";
}

void cmd_solve(const RunConfig& cfg, const Inputs& in, const ArtifactStamp& stamp, std::ostream& out) {
  const Model m = build_model(in.scene, cfg, out);
  const auto dims = in.scene.dims();
  const Eigen::VectorXd exitance = m.radiosity.basis.combine_exitance(dims);
  const Eigen::VectorXd incident = m.radiosity.incident(dims);
  const auto map = illumination_map(in.scene, exitance, incident);
  write_atomic(cfg.output_dir / "illumination_map.csv", export_map(map, in.scene, MapFormat::csv, stamp));

  std::ostringstream log;
  log << stamp.line("#") << '\n';
  log << "patches " << in.scene.patches.size() << '\n';
  log << "luminaire_id,residual\n";
  double worst = 0.0;
  for (std::size_t l = 0; l < m.radiosity.basis.luminaire_ids.size(); ++l) {
    log << m.radiosity.basis.luminaire_ids[l] << ',' << format_exact(m.radiosity.basis.residuals[l]) << '\n';
    worst = std::max(worst, m.radiosity.basis.residuals[l]);
  }
  log << "max_residual " << format_exact(worst) << '\n';
  write_atomic(cfg.output_dir / "residuals.log", log.str());

  json s = summary_head(cfg, stamp);
  s["patches"] = in.scene.patches.size();
  s["dims"] = dims;
  s["max_residual"] = worst;
  double total_flux = 0.0;
  for (const auto& r : map) total_flux += r.exitance * r.area;
  s["total_exitance_flux_lm"] = total_flux;
  write_summary(cfg, s);
  out << "solve: " << in.scene.patches.size() << " patches, max residual " << worst << '\n';
}

void cmd_simulate(const RunConfig& cfg, const Inputs& in, const ArtifactStamp& stamp, std::ostream& out) {
  const Model m = build_model(in.scene, cfg, out);
  const auto dims = in.scene.dims();
  const Eigen::VectorXd field = m.radiosity.basis.combine_exitance(dims);

  struct Row {
    std::string kind;
    int id;
    PerceivedLux lux;
  };
  std::vector<Row> rows(in.scene.sensors.size() + in.scene.occupants.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    if (i < in.scene.sensors.size()) {
      const auto& s = in.scene.sensors[i];
      const LuxmeterProbe probe(in.scene, m.accel, {s.position, s.facing}, s.lsc, cfg.n_rays);
      rows[i] = {s.role == SensorRole::spatial ? "spatial" : "gaze", s.id, probe.read(field, dims)};
    } else {
      const auto& o = in.scene.occupants[i - in.scene.sensors.size()];
      const LuxmeterProbe probe(in.scene, m.accel, {o.head_position, o.gaze}, o.lsc, cfg.n_rays);
      rows[i] = {"occupant", o.id, probe.read(field, dims)};
    }
  });

  std::ostringstream csv;
  csv << stamp.line("#") << '\n' << "kind,id,lux,patch_term,direct_term\n";
  json readings = json::array();
  for (const auto& r : rows) {
    csv << r.kind << ',' << r.id << ',' << format_fixed(r.lux.total, 6) << ',' << format_fixed(r.lux.patch_term, 6)
        << ',' << format_fixed(r.lux.direct_term, 6) << '\n';
    readings.push_back({{"kind", r.kind}, {"id", r.id}, {"lux", r.lux.total}});
  }
  write_atomic(cfg.output_dir / "readings.csv", csv.str());

  json s = summary_head(cfg, stamp);
  s["dims"] = dims;
  s["rays"] = cfg.n_rays;
  s["readings"] = readings;
  write_summary(cfg, s);
  out << "simulate: " << rows.size() << " readings\n";
}

void cmd_optimize(const RunConfig& cfg, const Inputs& in, const ArtifactStamp& stamp, std::ostream& out) {
  if (in.scene.occupants.empty()) throw InvariantError("optimize needs at least one occupant");
  const Model m = build_model(in.scene, cfg, out);
  const IlsConfig ils = ils_config(cfg);
  const auto occ = contribution_matrix(in.scene, m.radiosity.basis, m.accel, cfg.n_rays);

  OptimizeContext ctx;
  for (const auto& l : in.scene.luminaires) ctx.luminaire_ids.push_back(l.id);
  if (ils.mode == IlsMode::vfoa_gated) ctx.in_vfoa = vfoa_mask(in.scene, m.accel);
  std::optional<ContributionMatrix> spatial;
  if (ils.spatial_floor_lux) {
    spatial = sensor_contribution_matrix(in.scene, m.radiosity.basis, m.accel, cfg.n_rays, SensorRole::spatial);
    ctx.spatial = &*spatial;
  }
  const auto powers = in.scene.powers();
  const Optimum best = optimize(occ, powers, ils, ctx);

  const std::vector<double> ones(in.scene.luminaires.size(), 1.0);
  std::vector<NamedScenario> rows;
  rows.push_back({"full-lit", evaluate_scenario(in.scene, m.radiosity.basis, ones, in.ground_truth, m.accel,
                                                cfg.n_rays, ils)});
  rows.push_back({"ils", evaluate_scenario(in.scene, m.radiosity.basis, best.dims, in.ground_truth, m.accel,
                                           cfg.n_rays, ils)});
  for (auto& r : rows) r.result.energy = energy_report(r.result.dims, powers, cfg.hours, ils);
  write_atomic(cfg.output_dir / "scenarios.csv", scenario_table_csv(in.scene, rows, stamp));
  write_atomic(cfg.output_dir / "scenarios.txt", scenario_table_text(in.scene, rows, stamp));

  const auto& chosen = rows.back().result;
  json s = summary_head(cfg, stamp);
  s["mode"] = mode_name(ils.mode);
  s["delta_max_lux"] = ils.delta_max_lux;
  s["dims"] = best.dims;
  s["power_watts"] = best.power_watts;
  s["delta_lux"] = int_map_json(chosen.delta_lux);
  s["energy"] = energy_json(chosen.energy);
  write_summary(cfg, s);
  out << "optimize: dims " << dims_to_string(best.dims) << ", saving " << format_fixed(chosen.delta_watt, 1)
      << " W\n";
}

void cmd_evaluate(const RunConfig& cfg, const Inputs& in, const ArtifactStamp& stamp, std::ostream& out) {
  require_path(cfg.ground_truth_path, "--ground-truth", cfg.command);
  const Model m = build_model(in.scene, cfg, out);
  IlsConfig ils = ils_config(cfg);
  const auto dims = in.scene.dims();
  ScenarioResult r = evaluate_scenario(in.scene, m.radiosity.basis, dims, in.ground_truth, m.accel, cfg.n_rays, ils);
  r.energy = energy_report(dims, in.scene.powers(), cfg.hours, ils);
  write_atomic(cfg.output_dir / "sensors.csv", sensor_table_csv(in.scene, r, in.ground_truth, stamp));
  write_atomic(cfg.output_dir / "sensors.txt", sensor_table_text(in.scene, r, stamp));
  const std::vector<NamedScenario> rows{{"evaluated", r}};
  write_atomic(cfg.output_dir / "scenarios.csv", scenario_table_csv(in.scene, rows, stamp));
  write_atomic(cfg.output_dir / "scenarios.txt", scenario_table_text(in.scene, rows, stamp));

  json s = summary_head(cfg, stamp);
  s["dims"] = dims;
  s["sensor_lux"] = int_map_json(r.sensor_lux);
  s["epsilon_est"] = int_map_json(r.epsilon_est);
  double mean = 0.0;
  for (const auto& [id, e] : r.epsilon_est) mean += e;
  s["epsilon_est_mean"] = r.epsilon_est.empty() ? 0.0 : mean / static_cast<double>(r.epsilon_est.size());
  s["delta_lux"] = int_map_json(r.delta_lux);
  s["energy"] = energy_json(r.energy);
  write_summary(cfg, s);
  out << "evaluate: " << r.epsilon_est.size() << " sensors compared\n";
}

void cmd_export_map(const RunConfig& cfg, const Inputs& in, const ArtifactStamp& stamp, std::ostream& out) {
  const MapFormat format = parse_map_format(cfg.format);
  const Model m = build_model(in.scene, cfg, out);
  const auto dims = in.scene.dims();
  const auto map = illumination_map(in.scene, m.radiosity.basis.combine_exitance(dims), m.radiosity.incident(dims));
  const auto name = format == MapFormat::csv ? "illumination_map.csv" : "illumination_map.ply";
  write_atomic(cfg.output_dir / name, export_map(map, in.scene, format, stamp));
  out << "export-map: " << map.size() << " patches -> " << (cfg.output_dir / name).string() << '\n';
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate_knobs(cfg);
    if (cfg.command != Command::patchify) require_path(cfg.scene_path, "--scene", cfg.command);
    if (cfg.command == Command::evaluate) require_path(cfg.ground_truth_path, "--ground-truth", cfg.command);
    if (cfg.command == Command::patchify) {
      require_path(cfg.depth_path, "--depth", cfg.command);
      require_path(cfg.intrinsics_path, "--intrinsics", cfg.command);
    }
    if (cfg.command == Command::export_map) parse_map_format(cfg.format);

    const unsigned previous = thread_count();
    set_thread_count(cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads);
    struct Restore {
      unsigned n;
      ~Restore() { set_thread_count(n); }
    } restore{previous};

    Inputs in = load_inputs(cfg);
    const ArtifactStamp stamp{in.input_hash};
    switch (cfg.command) {
      case Command::patchify: cmd_patchify(cfg, in, stamp, out); break;
      case Command::solve: cmd_solve(cfg, in, stamp, out); break;
      case Command::simulate: cmd_simulate(cfg, in, stamp, out); break;
      case Command::optimize: cmd_optimize(cfg, in, stamp, out); break;
      case Command::evaluate: cmd_evaluate(cfg, in, stamp, out); break;
      case Command::export_map: cmd_export_map(cfg, in, stamp, out); break;
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const InvariantError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitParse;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Photometric scene engine: radiosity, virtual luxmeters and lighting optimization", "ilsctl"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.set_config("--config", "", "Run-config file (TOML/INI keys named like the long flags)");
  app.require_subcommand(1, 1);

  RunConfig cfg;
  std::string scene, detections, ground_truth, depth, intrinsics, out_dir = cfg.output_dir.string(), ff_cache;
  std::string mode = "binary", dims;
  std::optional<int> frame;
  std::optional<double> floor;

  app.add_option("--scene", scene, "Scene document (JSON)");
  app.add_option("--detections", detections, "Detection records (JSON lines)");
  app.add_option("--ground-truth", ground_truth, "Ground-truth lux per sensor (CSV sensor_id,lux)");
  app.add_option("--depth", depth, "Depth image (16-bit PGM)");
  app.add_option("--intrinsics", intrinsics, "Camera intrinsics sidecar (JSON)");
  app.add_option("--out", out_dir, "Output directory")->envname("ILS_OUTPUT_DIR")->capture_default_str();
  app.add_option("--ff-cache", ff_cache, "Form-factor cache file");
  app.add_option("--patch-size", cfg.patch_size, "Patch edge length in meters")->capture_default_str();
  app.add_option("--ff-samples", cfg.ff_samples, "Form-factor samples per patch")->capture_default_str();
  bool no_occlusion = false;
  app.add_flag("--no-ff-occlusion", no_occlusion, "Let light pass other patches between two patches");
  app.add_option("--rays", cfg.n_rays, "Rays per virtual luxmeter")->capture_default_str();
  app.add_option("--delta-max", cfg.delta_max, "Perceived lux drop budget per occupant")->capture_default_str();
  app.add_option("--mode", mode, "Optimizer mode")
      ->check(CLI::IsMember({"binary", "continuous", "vfoa"}))
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker thread cap (0: all cores)")->capture_default_str();
  app.add_option("--format", cfg.format, "Map format for export-map")
      ->check(CLI::IsMember({"csv", "mesh"}))
      ->capture_default_str();
  app.add_option("--body-radius", cfg.body_radius, "Occupant body half-width in meters (0: no bodies)")
      ->capture_default_str();
  app.add_option("--frame", frame, "Detection frame to use (default: first)");
  app.add_option("--dims", dims, "Comma-separated dim vector overriding the scene");
  app.add_option("--spatial-floor", floor, "Minimum lux on spatial sensors (optimize)");
  app.add_option("--overhead", cfg.overhead_watts, "System overhead in watts")->capture_default_str();
  app.add_option("--hours", cfg.hours, "Hours per day for energy figures")->capture_default_str();

  const std::pair<Command, const char*> commands[] = {
      {Command::patchify, "Turn a depth image into scene patches"},
      {Command::solve, "Solve radiosity and write the illumination map"},
      {Command::simulate, "Read every sensor and occupant luxmeter"},
      {Command::optimize, "Choose the minimum-power dim vector"},
      {Command::evaluate, "Compare sensor estimates with ground truth"},
      {Command::export_map, "Export the illumination map as csv or mesh"},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [c, help] : commands) {
    auto* sub = app.add_subcommand(std::string(command_name(c)), help);
    sub->fallthrough();
    subs.emplace_back(sub, c);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  for (const auto& [sub, c] : subs) {
    if (sub->parsed()) cfg.command = c;
  }
  cfg.scene_path = scene;
  cfg.detections_path = detections;
  cfg.ground_truth_path = ground_truth;
  cfg.depth_path = depth;
  cfg.intrinsics_path = intrinsics;
  cfg.output_dir = out_dir;
  cfg.ff_cache = ff_cache;
  cfg.mode = parse_mode(mode);
  cfg.frame = frame;
  cfg.ff_occlusion = !no_occlusion;
  cfg.spatial_floor = floor;
  if (!dims.empty()) {
    std::stringstream ss(dims);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        cfg.dims.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        err << "usage error: --dims entry '" << item << "' is not a number\n";
        return kExitUsage;
      }
    }
  }
  return run(cfg, out, err);
}

}  // namespace ils
