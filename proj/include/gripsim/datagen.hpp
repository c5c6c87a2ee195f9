#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gripsim/classifier.hpp"
#include "gripsim/controller.hpp"
#include "gripsim/dataset.hpp"
#include "gripsim/features.hpp"
#include "gripsim/physics.hpp"
#include "gripsim/sensor.hpp"

namespace gripsim {

struct RunConfig;

// Automatic slip labeling from pressure and fingertip travel. The travel is
// measured across a window centred on the labeled frame.
struct LabelingRule {
  double t_contact = 10.0;  // grounded p_dc units
  double delta_x = 1.0e-4;  // m
  double window_s = 0.1;    // s

  int window_frames(SensorKind variant) const;
};

void validate(const LabelingRule& rule);

// no_contact if p_dc <= T_contact; slip if also the trajectory spans more than
// delta_x; contact otherwise.
Label auto_label(double grounded_p_dc, std::span<const Vec2> trajectory, const LabelingRule& rule);

// Piecewise-constant tangential surveying: each segment holds still with
// `hold_probability`, otherwise moves with uniform speed and random sign.
struct SurveyMotion {
  double speed_min = 0.001;  // m/s
  double speed_max = 0.005;  // m/s
  double hold_probability = 0.4;
  double segment_duration = 0.5;  // s
};

void validate(const SurveyMotion& motion);

struct DatagenParams {
  std::vector<ObjectId> objects{ObjectId::Ball, ObjectId::Box};
  std::vector<double> target_pressures{20.0, 50.0, 80.0};
  int trials_per_pressure = 3;
  double trial_duration = 30.0;  // s
  double approach_speed = 0.004;  // m/s
  double contact_timeout = 3.0;   // s
  double settle_time = 2.0;       // s of pressure regulation before surveying
  PidGains pid;
  SurveyMotion survey;
};

void validate(const DatagenParams& params);

struct TrialSpec {
  int trial_id = 0;
  ObjectId object = ObjectId::Ball;
  double target_pressure = 50.0;
  std::array<int, 3> fingers{0, 1, 2};
  SurveyMotion survey;
  double duration = 30.0;
  std::uint64_t seed = 0;
  SensorKind variant = SensorKind::BioTac;
};

void validate(const TrialSpec& spec, int min_frames);

struct TrialEnvironment {
  double dt = 0.001;
  PhysicsParams physics;
  SensorParams sensor;
  DatagenParams datagen;
  LabelingRule labeling;
};

TrialEnvironment trial_environment(const RunConfig& config);

enum class TrialPhase : int { Approach = 1, Regulate = 2, Survey = 3 };

struct FingerStream {
  int trial_id = 0;
  int finger = 0;
  std::vector<DatasetRecord> records;
  std::vector<TrialPhase> phases;  // empty when loaded from disk
};

struct Trial {
  TrialSpec spec;
  std::vector<FingerStream> streams;  // one per active finger
};

// Contact, PID pressure targeting, then surveying on a fixed object. Throws
// std::runtime_error if a finger never reaches contact.
Trial run_trial(const TrialSpec& spec, const TrialEnvironment& env);

// objects x pressures x trials_per_pressure specs with seeds forked from the config seed.
std::vector<TrialSpec> campaign_specs(const RunConfig& config);

// Grounding baseline of a stream: its first contactless frame.
Grounding stream_grounding(const FingerStream& stream);

// Pairs the window ending at t with the auto label at t + tau_f, per finger.
std::vector<LabeledExample> build_training_set(std::span<const FingerStream> streams,
                                               const FeatureParams& features, int tau_f);

std::size_t example_count(std::size_t stream_length, int tau_h, int tau_f);

// Fraction of frames whose auto label equals the ground-truth label.
double auto_label_agreement(std::span<const FingerStream> streams);

struct ManifestRow {
  int trial_id = 0;
  int finger = 0;
  ObjectId object = ObjectId::Ball;
  double target_pressure = 0.0;
  std::uint64_t seed = 0;
  std::size_t frames = 0;
  std::array<std::size_t, kNumClasses> counts{};  // auto-label counts in class order
};

ManifestRow manifest_row(const Trial& trial, const FingerStream& stream);
void write_manifest(const std::filesystem::path& path, std::span<const ManifestRow> rows);
std::vector<ManifestRow> read_manifest(const std::filesystem::path& path);

std::string trial_file_name(int trial_id);

// Runs the whole campaign into `dir`: one JSONL file per trial plus manifest.csv
// and the effective config. Returns the manifest rows.
std::vector<ManifestRow> collect_campaign(const RunConfig& config, const std::filesystem::path& dir);

// Loads every finger stream listed in `dir`/manifest.csv.
std::vector<FingerStream> load_campaign(const std::filesystem::path& dir);

// Deterministic finger-trial split; returns indices of held-out streams.
std::vector<std::size_t> holdout_indices(std::size_t stream_count, double fraction,
                                         std::uint64_t seed);

struct CampaignSplit {
  std::vector<FingerStream> train;
  std::vector<FingerStream> test;
};

CampaignSplit split_campaign(std::vector<FingerStream> streams, double fraction, std::uint64_t seed);

}  // namespace gripsim
