#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gripsim/classifier.hpp"
#include "gripsim/controller.hpp"
#include "gripsim/datagen.hpp"
#include "gripsim/features.hpp"
#include "gripsim/harness.hpp"
#include "gripsim/physics.hpp"
#include "gripsim/sensor.hpp"

namespace gripsim {

struct ClassifierConfig {
  FeatureParams features;
  int tau_f = 3;
  TrainParams train;
  double holdout_fraction = 0.2;
};

// Everything a run needs. Every section of the JSON config is optional and
// falls back to these defaults; unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 7;
  double dt = 0.001;  // physics step, s
  SensorKind sensor_variant = SensorKind::BioTac;
  int finger_count = 2;
  ObjectId object = ObjectId::Ball;
  ControllerParams controller;
  ClassifierConfig classifier;
  DisturbanceSchedule disturbances;
  PhysicsParams physics;
  SensorParams sensor;
  DatagenParams datagen;
  LabelingRule labeling;
  HarnessParams harness;
};

RunConfig default_config();
void validate(const RunConfig& config);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

// Parses a standalone disturbance file: {"disturbances": [...]} or the bare array.
DisturbanceSchedule parse_disturbances(const std::string& text, double dt);

}  // namespace gripsim
