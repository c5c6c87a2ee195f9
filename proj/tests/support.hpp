#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "gripsim/classifier.hpp"
#include "gripsim/config.hpp"
#include "gripsim/datagen.hpp"
#include "gripsim/types.hpp"

namespace test {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    std::string templ = (fs::temp_directory_path() / "gripsim-test-XXXXXX").string();
    path = ::mkdtemp(templ.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

inline gripsim::SensorFrame frame(gripsim::SensorKind variant, std::int64_t t, int finger,
                                  double p_dc) {
  const auto& info = gripsim::variant_info(variant);
  gripsim::SensorFrame f;
  f.t = t;
  f.finger = finger;
  f.variant = variant;
  f.p_dc = p_dc;
  f.p_ac.assign(info.p_ac_batch_size, 0.0);
  f.electrodes.assign(info.electrode_count, 0.0);
  return f;
}

// Small campaign: one trial per pressure, shortened trials.
inline gripsim::RunConfig quick_config(gripsim::SensorKind variant) {
  gripsim::RunConfig c = gripsim::default_config();
  c.sensor_variant = variant;
  c.datagen.trials_per_pressure = 1;
  c.datagen.trial_duration = variant == gripsim::SensorKind::BioTac ? 12.0 : 5.0;
  return c;
}

inline std::vector<gripsim::FingerStream> quick_streams(gripsim::SensorKind variant) {
  const auto cfg = quick_config(variant);
  const auto env = gripsim::trial_environment(cfg);
  std::vector<gripsim::FingerStream> out;
  for (const auto& spec : gripsim::campaign_specs(cfg))
    for (auto& s : gripsim::run_trial(spec, env).streams) out.push_back(std::move(s));
  return out;
}

// Trained once per process and shared by the tests that need a model.
inline const gripsim::SlipModel& quick_model(gripsim::SensorKind variant) {
  static std::map<gripsim::SensorKind, gripsim::SlipModel> cache;
  auto it = cache.find(variant);
  if (it == cache.end()) {
    const auto cfg = quick_config(variant);
    const auto examples =
        gripsim::build_training_set(quick_streams(variant), cfg.classifier.features, 3);
    gripsim::TrainParams p = cfg.classifier.train;
    p.seed = cfg.seed;
    it = cache.emplace(variant, gripsim::train(examples, p, 3)).first;
  }
  return it->second;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

inline CommandResult run(const std::string& command) {
  CommandResult r;
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen((command + " 2>&1").c_str(), "r"), ::pclose);
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe.get())) r.output += buf;
  const int status = ::pclose(pipe.release());
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace test
