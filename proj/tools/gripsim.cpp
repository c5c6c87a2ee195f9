// Command-line front end: collect -> train -> eval -> simulate -> sweep -> report.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gripsim/classifier.hpp"
#include "gripsim/config.hpp"
#include "gripsim/datagen.hpp"
#include "gripsim/harness.hpp"
#include "gripsim/report.hpp"

namespace fs = std::filesystem;
using namespace gripsim;

namespace {

RunConfig resolve_config(const std::string& path) {
  if (path.empty()) return default_config();
  if (!fs::exists(path)) throw ValidationError("config file " + path + " does not exist");
  return load_config(path);
}

void require_dir(const std::string& dir, const char* what) {
  if (!fs::is_directory(dir)) throw ValidationError(std::string(what) + " " + dir + " is not a directory");
}

void require_file(const std::string& file, const char* what) {
  if (!fs::is_regular_file(file)) throw ValidationError(std::string(what) + " " + file + " does not exist");
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_collect(const RunConfig& cfg, const std::string& out) {
  const auto rows = collect_campaign(cfg, out);
  std::size_t trials = 0;
  int last = -1;
  for (const auto& r : rows)
    if (r.trial_id != last) {
      ++trials;
      last = r.trial_id;
    }
  std::cout << "collected " << trials << " trials, " << rows.size() << " finger-trials into " << out
            << "\n";
  return 0;
}

int cmd_train(RunConfig cfg, const std::string& data, const std::string& out, int tau_f) {
  require_dir(data, "data directory");
  cfg.classifier.tau_f = tau_f;
  validate(cfg);
  auto split = split_campaign(load_campaign(data), cfg.classifier.holdout_fraction, cfg.seed);
  const auto examples = build_training_set(split.train, cfg.classifier.features, tau_f);
  TrainParams p = cfg.classifier.train;
  p.seed = cfg.seed;
  const SlipModel model = train(examples, p, tau_f);
  save_model(out, model);
  std::cout << "trained on " << examples.size() << " windows from " << split.train.size()
            << " finger-trials, final loss " << model.final_loss << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& model_path, const std::string& data,
             const std::string& out, bool all) {
  require_file(model_path, "model file");
  require_dir(data, "data directory");
  const SlipModel model = load_model(model_path);
  auto streams = load_campaign(data);
  if (!all) streams = split_campaign(std::move(streams), cfg.classifier.holdout_fraction, model.seed).test;
  if (streams.empty()) throw ValidationError("evaluation split is empty");
  FeatureParams fp = cfg.classifier.features;
  fp.tau_h = model.tau_h;
  const auto examples = build_training_set(streams, fp, model.tau_f);
  const Evaluation e = evaluate(model, examples);
  write_evaluation_csv(out, e);
  std::cout << "accuracy " << e.accuracy << " on " << e.total << " windows, slip recall "
            << e.recall[index_of(Label::Slip)] << "\n";
  return 0;
}

DisturbanceSchedule disturbance_from(const std::string& s, const RunConfig& cfg) {
  if (s == "default") return default_disturbances(cfg.dt);
  if (s == "none") return {};
  if (s == "config") return cfg.disturbances;
  require_file(s, "disturbance file");
  return parse_disturbances(read_text(s), cfg.dt);
}

int cmd_simulate(RunConfig cfg, const std::string& model_path, const std::string& object,
                 int fingers, const std::string& disturbance, const std::string& out) {
  if (fingers < 1 || fingers > 5)
    throw ValidationError("--fingers must be in 1..5 (got " + std::to_string(fingers) + ")");
  require_file(model_path, "model file");
  const SlipModel model = load_model(model_path);
  cfg.object = parse_object(object);
  cfg.finger_count = fingers;
  cfg.sensor_variant = hand_variant(fingers);
  cfg.classifier.tau_f = model.tau_f;
  RunReport rep;
  if (disturbance.rfind("partner", 0) == 0) {
    if (fingers != 1)
      throw ValidationError("--disturbance " + disturbance + " runs a single robot finger (--fingers 1)");
    if (disturbance == "partner-ramp")
      cfg.disturbances = partner_ramp_schedule(cfg.dt, cfg.harness.duration);
    else if (disturbance == "partner-release")
      cfg.disturbances = partner_release_schedule(cfg.dt);
    else if (disturbance != "partner")
      throw ValidationError("unknown partner scenario '" + disturbance + "'");
    else
      cfg.disturbances = default_partner_schedule(cfg.dt, cfg.harness.duration);
    rep = run_partner_stabilization(cfg, model);
  } else {
    rep = run_stabilization(cfg, model, cfg.object, fingers, disturbance_from(disturbance, cfg));
  }
  write_report(out, rep);
  std::cout << rep.object << " with " << fingers << " finger(s): " << (rep.success ? "stable" : "dropped")
            << ", max displacement " << rep.max_displacement * 1000 << " mm, force/F* "
            << rep.settled_force_ratio << "\n";
  return 0;
}

// Grid file: {"objects": [...], "fingers": [...], "tau_f": [...], "seeds": [...],
//             "models": ["model_a.json", ...]}. Model paths are relative to the grid file.
int cmd_sweep(const RunConfig& cfg, const std::string& grid_path, const std::string& out) {
  require_file(grid_path, "grid file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(grid_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(grid_path + ": " + e.what());
  }
  SweepGrid grid;
  std::vector<SlipModel> models;
  try {
    for (const auto& key : j.items())
      if (key.key() != "objects" && key.key() != "fingers" && key.key() != "tau_f" &&
          key.key() != "seeds" && key.key() != "models")
        throw ValidationError("unknown grid key '" + key.key() + "'");
    for (const auto& o : j.at("objects")) grid.objects.push_back(parse_object(o.get<std::string>()));
    grid.finger_counts = j.at("fingers").get<std::vector<int>>();
    grid.tau_fs = j.at("tau_f").get<std::vector<int>>();
    grid.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    const fs::path base = fs::path(grid_path).parent_path();
    for (const auto& m : j.at("models")) {
      const fs::path p = base / m.get<std::string>();
      require_file(p.string(), "model file");
      models.push_back(load_model(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(grid_path + ": grid needs objects, fingers, tau_f, seeds and models (" +
                          e.what() + ")");
  }
  const ModelLookup lookup = [&](SensorKind v, int tau_f) -> const SlipModel& {
    for (const auto& m : models)
      if (m.variant == v && m.tau_f == tau_f) return m;
    throw ValidationError("grid lists no " + std::string(to_string(v)) + " model with tau_f " +
                          std::to_string(tau_f));
  };
  const auto rows = sweep(cfg, grid, lookup);
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << sweep_csv(rows);
  int ok = 0;
  for (const auto& r : rows) ok += r.success;
  std::cout << ok << "/" << rows.size() << " runs stable\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tactile grip stabilization simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file")->envname("GRIPSIM_CONFIG");

  std::string out, data, model, object = "ball", disturbance = "default", grid, in;
  int tau_f = 3, fingers = 2;
  bool all = false;

  auto* collect = app.add_subcommand("collect", "run the data collection campaign");
  collect->add_option("--out", out, "output directory")->required();
  auto* train_cmd = app.add_subcommand("train", "train the slip classifier");
  train_cmd->add_option("--data", data, "campaign directory")->required();
  train_cmd->add_option("--out", out, "model file")->required();
  train_cmd->add_option("--tau-f", tau_f, "prediction horizon in frames");
  auto* eval = app.add_subcommand("eval", "evaluate a model on the held-out split");
  eval->add_option("--model", model, "model file")->required();
  eval->add_option("--data", data, "campaign directory")->required();
  eval->add_option("--out", out, "metrics CSV")->required();
  eval->add_flag("--all", all, "evaluate on every finger-trial instead of the held-out split");
  auto* simulate = app.add_subcommand("simulate", "closed-loop stabilization run");
  simulate->add_option("--model", model, "model file")->required();
  simulate->add_option("--object", object, "ball, box, tuna_can or plastic_cup");
  simulate->add_option("--fingers", fingers, "finger count, 1..5");
  simulate->add_option("--disturbance", disturbance,
                       "default, none, config, partner, partner-ramp, partner-release, or a disturbance JSON file");
  simulate->add_option("--out", out, "output directory")->required();
  auto* sweep_cmd = app.add_subcommand("sweep", "grid of stabilization runs");
  sweep_cmd->add_option("--grid", grid, "grid JSON file")->required();
  sweep_cmd->add_option("--out", out, "metrics CSV")->required();
  auto* report = app.add_subcommand("report", "markdown report from produced files");
  report->add_option("--in", in, "directory of outputs")->required();
  report->add_option("--out", out, "markdown file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << " (see --help)\n";
    return 1;
  }

  try {
    const RunConfig cfg = resolve_config(config_path);
    if (*collect) return cmd_collect(cfg, out);
    if (*train_cmd) return cmd_train(cfg, data, out, tau_f);
    if (*eval) return cmd_eval(cfg, model, data, out, all);
    if (*simulate) return cmd_simulate(cfg, model, object, fingers, disturbance, out);
    if (*sweep_cmd) return cmd_sweep(cfg, grid, out);
    if (*report) {
      const int n = write_markdown_report(in, out);
      std::cout << "rendered " << n << " artifacts into " << out << "\n";
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const VersionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
