#include "gripsim/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gripsim/config.hpp"

namespace gripsim {

int LabelingRule::window_frames(SensorKind variant) const {
  return std::max(1, static_cast<int>(std::lround(window_s * variant_info(variant).frame_rate)));
}

void validate(const LabelingRule& r) {
  if (!(r.t_contact > 0)) throw ValidationError("labeling.t_contact must be > 0");
  if (!(r.delta_x > 0)) throw ValidationError("labeling.delta_x must be > 0");
  if (!(r.window_s > 0)) throw ValidationError("labeling.window_s must be > 0");
}

Label auto_label(double grounded_p_dc, std::span<const Vec2> trajectory, const LabelingRule& rule) {
  if (grounded_p_dc <= rule.t_contact) return Label::NoContact;
  if (trajectory.size() >= 2 && (trajectory.back() - trajectory.front()).norm() > rule.delta_x)
    return Label::Slip;
  return Label::Contact;
}

void validate(const SurveyMotion& m) {
  if (!(m.speed_min >= 0 && m.speed_max >= m.speed_min))
    throw ValidationError("survey speeds must satisfy 0 <= speed_min <= speed_max");
  if (!(m.hold_probability >= 0 && m.hold_probability <= 1))
    throw ValidationError("survey.hold_probability must be in [0, 1]");
  if (!(m.segment_duration > 0)) throw ValidationError("survey.segment_duration must be > 0");
}

namespace {

bool allowed_pressure(double p) { return p == 20.0 || p == 50.0 || p == 80.0; }

}  // namespace

void validate(const DatagenParams& d) {
  if (d.objects.empty()) throw ValidationError("datagen.objects must not be empty");
  if (d.target_pressures.empty()) throw ValidationError("datagen.target_pressures must not be empty");
  for (double p : d.target_pressures)
    if (!allowed_pressure(p)) throw ValidationError("target pressures must be drawn from {20, 50, 80}");
  if (d.trials_per_pressure < 1) throw ValidationError("datagen.trials_per_pressure must be >= 1");
  if (!(d.trial_duration > 0)) throw ValidationError("datagen.trial_duration must be > 0");
  if (!(d.approach_speed > 0)) throw ValidationError("datagen.approach_speed must be > 0");
  if (!(d.contact_timeout > 0)) throw ValidationError("datagen.contact_timeout must be > 0");
  if (!(d.settle_time >= 0)) throw ValidationError("datagen.settle_time must be >= 0");
  validate(d.pid);
  validate(d.survey);
}

void validate(const TrialSpec& s, int min_frames) {
  if (!allowed_pressure(s.target_pressure))
    throw ValidationError("target pressure must be one of 20, 50, 80");
  validate(s.survey);
  const double frames = s.duration * variant_info(s.variant).frame_rate;
  if (!(frames > min_frames))
    throw ValidationError("trial duration must exceed " + std::to_string(min_frames) + " frames");
}

TrialEnvironment trial_environment(const RunConfig& c) {
  return {c.dt, c.physics, c.sensor, c.datagen, c.labeling};
}

namespace {

// Piecewise-constant survey velocity for one finger.
class SurveyDriver {
 public:
  SurveyDriver(const SurveyMotion& m, Rng rng) : m_(m), rng_(std::move(rng)) {}

  double speed_at(double t_survey) {
    const auto seg = static_cast<std::int64_t>(std::floor(t_survey / m_.segment_duration));
    while (segment_ < seg) {
      ++segment_;
      const bool hold = rng_.uniform() < m_.hold_probability;
      const double mag = rng_.uniform(m_.speed_min, m_.speed_max);
      const double sign = rng_.coin() ? 1.0 : -1.0;
      speed_ = hold ? 0.0 : sign * mag;
    }
    return speed_;
  }

 private:
  SurveyMotion m_;
  Rng rng_;
  std::int64_t segment_ = -1;
  double speed_ = 0.0;
};

struct FingerRun {
  FingerRun(int id, SensorUnit unit, Rng noise, PidGains gains, SurveyDriver survey)
      : id(id), unit(std::move(unit)), noise(std::move(noise)), pid(gains), survey(std::move(survey)) {}

  int id;
  SensorUnit unit;
  Rng noise;
  PressurePid pid;
  SurveyDriver survey;
  TrialPhase phase = TrialPhase::Approach;
  double contact_time = 0.0;
  double grounded_baseline = 0.0;
  bool have_baseline = false;
  bool was_in_contact = false;
  FingerStream stream;
  std::vector<Vec2> positions;  // along the surface only
};

}  // namespace

Trial run_trial(const TrialSpec& spec, const TrialEnvironment& env) {
  validate(spec, 1);
  validate(env.physics);
  validate(env.sensor);
  validate(env.datagen);
  validate(env.labeling);
  if (!(env.dt > 0)) throw ValidationError("dt must be > 0");

  const auto& info = variant_info(spec.variant);
  const auto ticks_per_frame =
      std::max<std::int64_t>(1, std::llround(info.frame_period() / env.dt));
  const double frame_dt = ticks_per_frame * env.dt;
  const auto frames = static_cast<std::int64_t>(std::llround(spec.duration * info.frame_rate));

  const auto layout = grip_layout(static_cast<int>(spec.fingers.size()));
  World world = make_world(object_spec(spec.object), layout, env.physics, true);
  const Rng root(spec.seed);

  std::vector<FingerRun> runs;
  for (std::size_t i = 0; i < spec.fingers.size(); ++i) {
    const int id = spec.fingers[i];
    Rng unit_rng = root.fork("sensor/unit", id);
    FingerRun r(id, make_sensor_unit(spec.variant, id, env.sensor, unit_rng),
                root.fork("sensor/noise", id), env.datagen.pid,
                SurveyDriver(spec.survey, root.fork("survey", id)));
    r.stream.trial_id = spec.trial_id;
    r.stream.finger = id;
    runs.push_back(std::move(r));
  }

  std::vector<ContactState> contacts = evaluate_contacts(world, Vec2::Zero());
  std::vector<double> slip_sum(runs.size(), 0.0), incipient_sum(runs.size(), 0.0);
  std::vector<FingerCommand> commands(runs.size());

  for (std::int64_t k = 0; k < frames; ++k) {
    const double t = k * frame_dt;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      auto& r = runs[i];
      // Slip speed averaged over the frame period that just ended.
      ContactState c = contacts[i];
      c.finger_id = r.id;
      if (k > 0 && c.in_contact) {
        c.slip_speed = slip_sum[i] / ticks_per_frame;
        c.incipient = incipient_sum[i] / ticks_per_frame;
      }
      const SensorFrame frame = synth_frame(c, r.was_in_contact, r.unit, env.sensor, r.noise, k);
      r.was_in_contact = c.in_contact;
      if (!r.have_baseline) {
        r.grounded_baseline = frame.p_dc;
        r.have_baseline = true;
      }
      const double p = frame.p_dc - r.grounded_baseline;

      auto& cmd = commands[i];
      cmd = {};
      switch (r.phase) {
        case TrialPhase::Approach:
          if (p > env.labeling.t_contact) {
            r.phase = TrialPhase::Regulate;
            r.contact_time = t;
          } else if (t > env.datagen.contact_timeout) {
            throw std::runtime_error("finger " + std::to_string(r.id) + " of trial " +
                                     std::to_string(spec.trial_id) + " never reached contact within " +
                                     std::to_string(env.datagen.contact_timeout) + " s");
          }
          break;
        case TrialPhase::Regulate:
          if (t - r.contact_time >= env.datagen.settle_time) r.phase = TrialPhase::Survey;
          break;
        case TrialPhase::Survey: break;
      }
      if (r.phase == TrialPhase::Approach) {
        cmd.normal_speed = env.datagen.approach_speed;
      } else {
        cmd.normal_speed = r.pid.update(p, spec.target_pressure, frame_dt);
        if (r.phase == TrialPhase::Survey)
          cmd.tangential_speed = r.survey.speed_at(t - r.contact_time - env.datagen.settle_time);
      }

      DatasetRecord rec = make_record(frame, c, Label::NoContact);
      r.stream.records.push_back(std::move(rec));
      r.stream.phases.push_back(r.phase);
      // Travel along the normal comes from pressure regulation, not from
      // motion over the surface, so it is left out of the slip rule.
      const Vec2 n = world.fingers[i].normal;
      r.positions.push_back(c.fingertip_pos - c.fingertip_pos.dot(n) * n);
    }

    std::fill(slip_sum.begin(), slip_sum.end(), 0.0);
    std::fill(incipient_sum.begin(), incipient_sum.end(), 0.0);
    for (std::int64_t j = 0; j < ticks_per_frame; ++j) {
      auto out = step(world, commands, Vec2::Zero(), env.dt);
      world = std::move(out.world);
      contacts = std::move(out.contacts);
      for (std::size_t i = 0; i < runs.size(); ++i) {
        slip_sum[i] += contacts[i].slip_speed;
        incipient_sum[i] += contacts[i].incipient;
      }
    }
  }

  // Auto labels need the trajectory on both sides of each frame.
  const int w = env.labeling.window_frames(spec.variant);
  Trial trial;
  trial.spec = spec;
  for (auto& r : runs) {
    const auto n = static_cast<std::int64_t>(r.stream.records.size());
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t lo = std::max<std::int64_t>(0, i - w / 2);
      const std::int64_t hi = std::min<std::int64_t>(n - 1, i + w / 2);
      const std::span<const Vec2> traj(r.positions.data() + lo, static_cast<std::size_t>(hi - lo + 1));
      auto& rec = r.stream.records[i];
      rec.auto_label = auto_label(rec.frame.p_dc - r.grounded_baseline, traj, env.labeling);
    }
    trial.streams.push_back(std::move(r.stream));
  }
  return trial;
}

std::vector<TrialSpec> campaign_specs(const RunConfig& config) {
  const auto& d = config.datagen;
  const Rng root(config.seed);
  std::vector<TrialSpec> specs;
  int id = 0;
  for (auto object : d.objects) {
    for (double p : d.target_pressures) {
      for (int rep = 0; rep < d.trials_per_pressure; ++rep) {
        TrialSpec s;
        s.trial_id = id;
        s.object = object;
        s.target_pressure = p;
        s.survey = d.survey;
        s.duration = d.trial_duration;
        s.seed = root.fork("trial", static_cast<std::uint64_t>(id)).seed();
        s.variant = config.sensor_variant;
        specs.push_back(s);
        ++id;
      }
    }
  }
  return specs;
}

Grounding stream_grounding(const FingerStream& stream) {
  for (const auto& r : stream.records)
    if (!r.gt_contact) return grounding_from(r.frame);
  throw ValidationError("stream of finger " + std::to_string(stream.finger) + " in trial " +
                        std::to_string(stream.trial_id) + " has no contactless frame to ground on");
}

std::size_t example_count(std::size_t length, int tau_h, int tau_f) {
  const auto need = static_cast<std::size_t>(tau_h + tau_f);
  return length < need ? 0 : length - need + 1;
}

std::vector<LabeledExample> build_training_set(std::span<const FingerStream> streams,
                                               const FeatureParams& features, int tau_f) {
  validate(features);
  if (tau_f < 1) throw ValidationError("tau_f must be >= 1");
  std::vector<LabeledExample> out;
  for (const auto& s : streams) {
    const std::size_t n = s.records.size();
    if (n < static_cast<std::size_t>(features.tau_h + tau_f))
      throw ValidationError("stream of finger " + std::to_string(s.finger) + " in trial " +
                            std::to_string(s.trial_id) + " is shorter than tau_h + tau_f");
    const Grounding g = stream_grounding(s);
    std::vector<SensorFrame> grounded;
    grounded.reserve(n);
    for (const auto& r : s.records) grounded.push_back(ground(r.frame, g));
    const std::size_t count = example_count(n, features.tau_h, tau_f);
    for (std::size_t start = 0; start < count; ++start) {
      const std::size_t end = start + features.tau_h - 1;
      LabeledExample ex;
      ex.features = extract(std::span(grounded).subspan(start, features.tau_h), features);
      ex.label = s.records[end + tau_f].auto_label;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

double auto_label_agreement(std::span<const FingerStream> streams) {
  std::size_t agree = 0, total = 0;
  for (const auto& s : streams) {
    for (const auto& r : s.records) {
      agree += r.auto_label == ground_truth_label(r) ? 1 : 0;
      ++total;
    }
  }
  return total ? static_cast<double>(agree) / total : 0.0;
}

ManifestRow manifest_row(const Trial& trial, const FingerStream& stream) {
  ManifestRow row;
  row.trial_id = trial.spec.trial_id;
  row.finger = stream.finger;
  row.object = trial.spec.object;
  row.target_pressure = trial.spec.target_pressure;
  row.seed = trial.spec.seed;
  row.frames = stream.records.size();
  for (const auto& r : stream.records) ++row.counts[index_of(r.auto_label)];
  return row;
}

void write_manifest(const std::filesystem::path& path, std::span<const ManifestRow> rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "trial_id,finger,object,target_pressure,seed,frames,slip,contact,no_contact\n";
  for (const auto& r : rows) {
    out << r.trial_id << ',' << r.finger << ',' << to_string(r.object) << ',' << r.target_pressure
        << ',' << r.seed << ',' << r.frames << ',' << r.counts[0] << ',' << r.counts[1] << ','
        << r.counts[2] << '\n';
  }
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("trial_id,finger,object", 0) != 0)
    throw ParseError(path.string() + ": unexpected manifest header");
  std::vector<ManifestRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 9 columns");
    try {
      ManifestRow r;
      r.trial_id = std::stoi(cells[0]);
      r.finger = std::stoi(cells[1]);
      r.object = parse_object(cells[2]);
      r.target_pressure = std::stod(cells[3]);
      r.seed = std::stoull(cells[4]);
      r.frames = std::stoull(cells[5]);
      for (int c = 0; c < kNumClasses; ++c) r.counts[c] = std::stoull(cells[6 + c]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": malformed manifest row");
    }
  }
  return rows;
}

std::string trial_file_name(int trial_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial_%03d.jsonl", trial_id);
  return buf;
}

std::vector<ManifestRow> collect_campaign(const RunConfig& config, const std::filesystem::path& dir) {
  validate(config);
  std::filesystem::create_directories(dir);
  const auto env = trial_environment(config);
  const int min_frames = config.classifier.features.tau_h + config.classifier.tau_f;
  std::vector<ManifestRow> rows;
  for (const auto& spec : campaign_specs(config)) {
    validate(spec, min_frames);
    const Trial trial = run_trial(spec, env);
    // Frames interleaved by time, then finger.
    std::vector<DatasetRecord> records;
    const std::size_t n = trial.streams.front().records.size();
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& s : trial.streams) records.push_back(s.records[i]);
    write_jsonl(dir / trial_file_name(spec.trial_id), records);
    for (const auto& s : trial.streams) rows.push_back(manifest_row(trial, s));
  }
  write_manifest(dir / "manifest.csv", rows);
  std::ofstream cfg(dir / "config.json");
  cfg << config_to_json(config);
  return rows;
}

std::vector<FingerStream> load_campaign(const std::filesystem::path& dir) {
  const auto rows = read_manifest(dir / "manifest.csv");
  std::map<int, std::vector<DatasetRecord>> files;
  std::vector<FingerStream> streams;
  for (const auto& row : rows) {
    auto it = files.find(row.trial_id);
    if (it == files.end())
      it = files.emplace(row.trial_id, read_jsonl(dir / trial_file_name(row.trial_id))).first;
    FingerStream s;
    s.trial_id = row.trial_id;
    s.finger = row.finger;
    for (const auto& r : it->second)
      if (r.frame.finger == row.finger) s.records.push_back(r);
    if (s.records.size() != row.frames)
      throw ParseError(trial_file_name(row.trial_id) + ": finger " + std::to_string(row.finger) +
                       " has " + std::to_string(s.records.size()) + " frames, manifest says " +
                       std::to_string(row.frames));
    streams.push_back(std::move(s));
  }
  return streams;
}

std::vector<std::size_t> holdout_indices(std::size_t count, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0 && fraction < 1)) throw ValidationError("holdout fraction must be in [0, 1)");
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  Rng rng = Rng(seed).fork("holdout");
  for (std::size_t i = count; i > 1; --i) std::swap(idx[i - 1], idx[rng.next() % i]);
  idx.resize(static_cast<std::size_t>(std::llround(fraction * count)));
  std::sort(idx.begin(), idx.end());
  return idx;
}

CampaignSplit split_campaign(std::vector<FingerStream> streams, double fraction, std::uint64_t seed) {
  const auto held = holdout_indices(streams.size(), fraction, seed);
  CampaignSplit out;
  std::size_t h = 0;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (h < held.size() && held[h] == i) {
      out.test.push_back(std::move(streams[i]));
      ++h;
    } else {
      out.train.push_back(std::move(streams[i]));
    }
  }
  return out;
}

}  // namespace gripsim
