#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gripsim/classifier.hpp"
#include "gripsim/controller.hpp"
#include "gripsim/physics.hpp"

namespace gripsim {

struct RunConfig;

struct HarnessParams {
  double duration = 30.0;               // s
  double settle_time = 10.0;            // s, steady-state metrics start here
  double drop_threshold = 0.03;         // m of object displacement
  double initial_force_ratio = 1.5;     // grip handed over at this multiple of F*
  double deformation_displacement = 0.005;  // m of compliant indentation
  NormalEstimator normal_estimator = NormalEstimator::Geometric;
};

void validate(const HarnessParams& params);

// Four-finger hands carry BioTac sensors; the five-finger hand carries BioTac SP.
SensorKind hand_variant(int finger_count);

struct FingerTrace {
  std::vector<double> time;          // s, one entry per controller tick
  std::vector<double> normal_force;  // N
  std::vector<double> statistic;     // l
  std::vector<double> command;       // m/s
  std::vector<int> label;            // predicted class index, -1 before the window fills
};

struct IndependenceAudit {
  // reads(i, j): frames tagged with finger j consumed by controller i.
  std::vector<std::vector<std::int64_t>> reads;
  std::int64_t cross_finger_reads() const;
};

struct RunReport {
  std::string object;
  int finger_count = 0;
  SensorKind variant = SensorKind::BioTac;
  int tau_f = 0;
  std::uint64_t seed = 0;
  double f_star = 0.0;                // N, from the gravity load
  double deformation_budget = 0.0;    // N
  double max_displacement = 0.0;      // m
  bool dropped = false;
  double drop_time = -1.0;            // s
  double settled_mean_force = 0.0;    // N, mean per finger after settle_time
  double settled_force_ratio = 0.0;   // settled_mean_force / f_star
  double slip_fraction = 0.0;         // physics ticks sliding after settle_time
  double peak_force = 0.0;            // N, any finger, any time
  bool success = false;
  std::vector<FingerTrace> traces;
  std::vector<double> displacement_trace;  // m, per controller tick
  IndependenceAudit audit;
};

struct RunOptions {
  std::optional<std::vector<int>> tick_order;  // permutation of finger indices
};

// N independent finger controllers on one object; fingers only interact
// through the physics step. Throws ValidationError on a model/variant mismatch.
RunReport run_stabilization(const RunConfig& config, const SlipModel& model, ObjectId object,
                            int finger_count, const DisturbanceSchedule& disturbances,
                            const RunOptions& options = {});

// Single robot finger against a scripted partner contact. Uses the config's
// schedule when it has a partner entry, otherwise a constant 3 N partner push.
RunReport run_partner_stabilization(const RunConfig& config, const SlipModel& model);
DisturbanceSchedule default_partner_schedule(double dt, double duration);
// Partner push ramping 0 -> 6 N over ramp_time from start, then held.
DisturbanceSchedule partner_ramp_schedule(double dt, double duration, double start = 15.0,
                                          double ramp_time = 10.0);
// Constant 3 N partner push that lets go at `release`.
DisturbanceSchedule partner_release_schedule(double dt, double release = 15.0);

std::string report_to_json(const RunReport& report);
void write_report(const std::filesystem::path& dir, const RunReport& report);

struct SweepGrid {
  std::vector<ObjectId> objects;
  std::vector<int> finger_counts;
  std::vector<int> tau_fs;
  std::vector<std::uint64_t> seeds;
};

void validate(const SweepGrid& grid);

struct SweepRow {
  ObjectId object = ObjectId::Ball;
  int fingers = 0;
  SensorKind variant = SensorKind::BioTac;
  int tau_f = 0;
  std::uint64_t seed = 0;
  bool train_object = false;
  bool success = false;
  double max_displacement = 0.0;
  double settled_force_ratio = 0.0;
  double slip_fraction = 0.0;
  double peak_force = 0.0;
  double deformation_budget = 0.0;
};

using ModelLookup = std::function<const SlipModel&(SensorKind variant, int tau_f)>;

std::vector<SweepRow> sweep(const RunConfig& base, const SweepGrid& grid,
                            const ModelLookup& models);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace gripsim
