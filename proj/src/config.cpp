#include "gripsim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gripsim {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(where(key) + " has the wrong type");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& child(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ValidationError("unknown config key " + where(it.key().c_str()));
  }

  std::string where(const char* key = nullptr) const {
    std::string p = path_.empty() ? "" : path_;
    if (key) p += (p.empty() ? "" : ".") + std::string(key);
    return "'" + (p.empty() ? std::string("<root>") : p) + "'";
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Vec2 read_vec2(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(what + " must be a [x, y] pair of numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::int64_t to_tick(double seconds, double dt) {
  return static_cast<std::int64_t>(std::llround(seconds / dt));
}

DisturbanceSchedule read_disturbances(const json& j, double dt) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "default") return default_disturbances(dt);
    if (name == "none") return {};
    throw ValidationError("disturbances must be \"default\", \"none\", or a list");
  }
  DisturbanceSchedule s;
  const json* entries = &j;
  if (j.is_object()) {
    Section sec(j, "disturbances");
    sec.read("partner_clamp", s.partner_clamp);
    entries = &sec.child("entries");
    sec.finish();
  }
  if (!entries->is_array()) throw ValidationError("disturbances.entries must be a list");
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const std::string path = "disturbances[" + std::to_string(i) + "]";
    Section e((*entries)[i], path);
    double start_s = 0, end_s = 0;
    std::string kind = "push";
    e.read("start_s", start_s);
    e.read("end_s", end_s);
    e.read("kind", kind);
    if (!e.has("force")) throw ValidationError(path + " needs a force");
    DisturbanceEntry d;
    d.start_tick = to_tick(start_s, dt);
    d.end_tick = to_tick(end_s, dt);
    d.force = read_vec2(e.child("force"), path + ".force");
    d.force_end = e.has("force_end") ? read_vec2(e.child("force_end"), path + ".force_end") : d.force;
    if (kind != "push" && kind != "partner")
      throw ValidationError(path + ".kind must be push or partner");
    d.partner = kind == "partner";
    e.finish();
    s.entries.push_back(d);
  }
  return s;
}

json disturbances_to_json(const DisturbanceSchedule& s, double dt) {
  json entries = json::array();
  for (const auto& e : s.entries) {
    entries.push_back({{"start_s", e.start_tick * dt},
                       {"end_s", e.end_tick * dt},
                       {"force", {e.force.x(), e.force.y()}},
                       {"force_end", {e.force_end.x(), e.force_end.y()}},
                       {"kind", e.partner ? "partner" : "push"}});
  }
  return {{"partner_clamp", s.partner_clamp}, {"entries", entries}};
}

std::string estimator_name(NormalEstimator e) {
  return e == NormalEstimator::Geometric ? "geometric" : "electrode_centroid";
}

NormalEstimator parse_estimator(const std::string& s) {
  if (s == "geometric") return NormalEstimator::Geometric;
  if (s == "electrode_centroid") return NormalEstimator::ElectrodeCentroid;
  throw ValidationError("harness.normal_estimator must be geometric or electrode_centroid");
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  c.disturbances = default_disturbances(c.dt);
  return c;
}

void validate(const RunConfig& c) {
  if (!(c.dt > 0)) throw ValidationError("dt must be > 0");
  if (c.finger_count < 1 || c.finger_count > 5)
    throw ValidationError("finger_count must be in 1..5 (got " + std::to_string(c.finger_count) + ")");
  if (c.classifier.features.tau_h < 1) throw ValidationError("classifier.tau_h must be >= 1");
  if (c.classifier.tau_f < 1) throw ValidationError("classifier.tau_f must be >= 1");
  if (!(c.classifier.holdout_fraction >= 0 && c.classifier.holdout_fraction < 1))
    throw ValidationError("classifier.holdout_fraction must be in [0, 1)");
  validate(c.classifier.features);
  validate(c.classifier.train);
  validate(c.controller);
  validate(c.physics);
  validate(c.sensor);
  validate(c.datagen);
  validate(c.labeling);
  validate(c.harness);
  validate(c.disturbances, to_tick(c.harness.duration, c.dt));
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c = default_config();
  Section root(j, "");
  root.read("seed", c.seed);
  root.read("dt", c.dt);
  std::string variant(to_string(c.sensor_variant));
  root.read("sensor_variant", variant);
  c.sensor_variant = parse_variant(variant);
  root.read("finger_count", c.finger_count);
  std::string object(to_string(c.object));
  root.read("object", object);
  c.object = parse_object(object);

  if (root.has("controller")) {
    Section s(root.child("controller"), "controller");
    s.read("s_slip", c.controller.s_slip);
    s.read("s_not_slip", c.controller.s_not_slip);
    s.read("alpha", c.controller.alpha);
    s.read("beta", c.controller.beta);
    s.read("l_min", c.controller.l_min);
    s.read("l_max", c.controller.l_max);
    s.finish();
  }
  if (root.has("classifier")) {
    Section s(root.child("classifier"), "classifier");
    s.read("tau_h", c.classifier.features.tau_h);
    s.read("tau_f", c.classifier.tau_f);
    s.read("contact_threshold", c.classifier.features.contact_threshold);
    s.read("spatial_floor", c.classifier.features.spatial_floor);
    s.read("learning_rate", c.classifier.train.learning_rate);
    s.read("epochs", c.classifier.train.epochs);
    s.read("l2", c.classifier.train.l2);
    s.read("class_weighting", c.classifier.train.class_weighting);
    s.read("holdout_fraction", c.classifier.holdout_fraction);
    s.finish();
  }
  if (root.has("physics")) {
    Section s(root.child("physics"), "physics");
    s.read("gravity", c.physics.gravity);
    s.read("k_slide", c.physics.k_slide);
    s.read("relaxation_time", c.physics.relaxation_time);
    s.read("skin_stiffness", c.physics.skin_stiffness);
    s.read("skin_relaxation", c.physics.skin_relaxation);
    s.read("standoff", c.physics.standoff);
    s.read("incipient_onset", c.physics.incipient_onset);
    s.finish();
  }
  if (root.has("sensor")) {
    Section s(root.child("sensor"), "sensor");
    auto& p = c.sensor;
    s.read("gain_dc", p.gain_dc);
    s.read("dc_baseline", p.dc_baseline);
    s.read("dc_baseline_spread", p.dc_baseline_spread);
    s.read("noise_dc", p.noise_dc);
    s.read("pac_floor", p.pac_floor);
    s.read("pac_slip_gain", p.pac_slip_gain);
    s.read("pac_incipient_gain", p.pac_incipient_gain);
    s.read("pac_transient", p.pac_transient);
    s.read("electrode_gain", p.electrode_gain);
    s.read("electrode_shear_gain", p.electrode_shear_gain);
    s.read("electrode_noise", p.electrode_noise);
    s.read("electrode_baseline", p.electrode_baseline);
    s.read("electrode_baseline_spread", p.electrode_baseline_spread);
    s.read("t_dc", p.t_dc);
    s.read("t_ac", p.t_ac);
    s.read("temperature_noise", p.temperature_noise);
    s.finish();
  }
  if (root.has("datagen")) {
    Section s(root.child("datagen"), "datagen");
    auto& d = c.datagen;
    if (s.has("objects")) {
      std::vector<std::string> names;
      s.read("objects", names);
      d.objects.clear();
      for (const auto& n : names) d.objects.push_back(parse_object(n));
    }
    s.read("target_pressures", d.target_pressures);
    s.read("trials_per_pressure", d.trials_per_pressure);
    s.read("trial_duration", d.trial_duration);
    s.read("approach_speed", d.approach_speed);
    s.read("contact_timeout", d.contact_timeout);
    s.read("settle_time", d.settle_time);
    if (s.has("pid")) {
      Section p(s.child("pid"), "datagen.pid");
      p.read("kp", d.pid.kp);
      p.read("ki", d.pid.ki);
      p.read("kd", d.pid.kd);
      p.read("integral_limit", d.pid.integral_limit);
      p.read("output_limit", d.pid.output_limit);
      p.finish();
    }
    if (s.has("survey")) {
      Section p(s.child("survey"), "datagen.survey");
      p.read("speed_min", d.survey.speed_min);
      p.read("speed_max", d.survey.speed_max);
      p.read("hold_probability", d.survey.hold_probability);
      p.read("segment_duration", d.survey.segment_duration);
      p.finish();
    }
    s.finish();
  }
  if (root.has("labeling")) {
    Section s(root.child("labeling"), "labeling");
    s.read("t_contact", c.labeling.t_contact);
    s.read("delta_x", c.labeling.delta_x);
    s.read("window_s", c.labeling.window_s);
    s.finish();
  }
  if (root.has("harness")) {
    Section s(root.child("harness"), "harness");
    auto& h = c.harness;
    s.read("duration", h.duration);
    s.read("settle_time", h.settle_time);
    s.read("drop_threshold", h.drop_threshold);
    s.read("initial_force_ratio", h.initial_force_ratio);
    s.read("deformation_displacement", h.deformation_displacement);
    std::string est = estimator_name(h.normal_estimator);
    s.read("normal_estimator", est);
    h.normal_estimator = parse_estimator(est);
    s.finish();
  }
  // Ticks depend on dt, so the schedule is read last.
  c.disturbances = root.has("disturbances") ? read_disturbances(root.child("disturbances"), c.dt)
                                            : default_disturbances(c.dt);
  root.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

DisturbanceSchedule parse_disturbances(const std::string& text, double dt) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("disturbance file is not valid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("disturbances")) return read_disturbances(j.at("disturbances"), dt);
  return read_disturbances(j, dt);
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["dt"] = c.dt;
  j["sensor_variant"] = std::string(to_string(c.sensor_variant));
  j["finger_count"] = c.finger_count;
  j["object"] = std::string(to_string(c.object));
  j["controller"] = {{"s_slip", c.controller.s_slip},   {"s_not_slip", c.controller.s_not_slip},
                     {"alpha", c.controller.alpha},     {"beta", c.controller.beta},
                     {"l_min", c.controller.l_min},     {"l_max", c.controller.l_max}};
  j["classifier"] = {{"tau_h", c.classifier.features.tau_h},
                     {"tau_f", c.classifier.tau_f},
                     {"contact_threshold", c.classifier.features.contact_threshold},
                     {"spatial_floor", c.classifier.features.spatial_floor},
                     {"learning_rate", c.classifier.train.learning_rate},
                     {"epochs", c.classifier.train.epochs},
                     {"l2", c.classifier.train.l2},
                     {"class_weighting", c.classifier.train.class_weighting},
                     {"holdout_fraction", c.classifier.holdout_fraction}};
  j["physics"] = {{"gravity", c.physics.gravity},
                  {"k_slide", c.physics.k_slide},
                  {"relaxation_time", c.physics.relaxation_time},
                  {"skin_stiffness", c.physics.skin_stiffness},
                  {"skin_relaxation", c.physics.skin_relaxation},
                  {"standoff", c.physics.standoff},
                  {"incipient_onset", c.physics.incipient_onset}};
  const auto& p = c.sensor;
  j["sensor"] = {{"gain_dc", p.gain_dc},
                 {"dc_baseline", p.dc_baseline},
                 {"dc_baseline_spread", p.dc_baseline_spread},
                 {"noise_dc", p.noise_dc},
                 {"pac_floor", p.pac_floor},
                 {"pac_slip_gain", p.pac_slip_gain},
                 {"pac_incipient_gain", p.pac_incipient_gain},
                 {"pac_transient", p.pac_transient},
                 {"electrode_gain", p.electrode_gain},
                 {"electrode_shear_gain", p.electrode_shear_gain},
                 {"electrode_noise", p.electrode_noise},
                 {"electrode_baseline", p.electrode_baseline},
                 {"electrode_baseline_spread", p.electrode_baseline_spread},
                 {"t_dc", p.t_dc},
                 {"t_ac", p.t_ac},
                 {"temperature_noise", p.temperature_noise}};
  const auto& d = c.datagen;
  json objects = json::array();
  for (auto o : d.objects) objects.push_back(std::string(to_string(o)));
  j["datagen"] = {{"objects", objects},
                  {"target_pressures", d.target_pressures},
                  {"trials_per_pressure", d.trials_per_pressure},
                  {"trial_duration", d.trial_duration},
                  {"approach_speed", d.approach_speed},
                  {"contact_timeout", d.contact_timeout},
                  {"settle_time", d.settle_time},
                  {"pid",
                   {{"kp", d.pid.kp},
                    {"ki", d.pid.ki},
                    {"kd", d.pid.kd},
                    {"integral_limit", d.pid.integral_limit},
                    {"output_limit", d.pid.output_limit}}},
                  {"survey",
                   {{"speed_min", d.survey.speed_min},
                    {"speed_max", d.survey.speed_max},
                    {"hold_probability", d.survey.hold_probability},
                    {"segment_duration", d.survey.segment_duration}}}};
  j["labeling"] = {{"t_contact", c.labeling.t_contact},
                   {"delta_x", c.labeling.delta_x},
                   {"window_s", c.labeling.window_s}};
  const auto& h = c.harness;
  j["harness"] = {{"duration", h.duration},
                  {"settle_time", h.settle_time},
                  {"drop_threshold", h.drop_threshold},
                  {"initial_force_ratio", h.initial_force_ratio},
                  {"deformation_displacement", h.deformation_displacement},
                  {"normal_estimator", estimator_name(h.normal_estimator)}};
  j["disturbances"] = disturbances_to_json(c.disturbances, c.dt);
  return j.dump(2) + "\n";
}

}  // namespace gripsim
