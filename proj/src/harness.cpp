#include "gripsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gripsim/config.hpp"
#include "gripsim/sensor.hpp"

namespace gripsim {

void validate(const HarnessParams& h) {
  if (!(h.duration > 0)) throw ValidationError("harness.duration must be > 0");
  if (!(h.settle_time >= 0 && h.settle_time < h.duration))
    throw ValidationError("harness.settle_time must lie in [0, duration)");
  if (!(h.drop_threshold > 0)) throw ValidationError("harness.drop_threshold must be > 0");
  if (!(h.initial_force_ratio > 0)) throw ValidationError("harness.initial_force_ratio must be > 0");
  if (!(h.deformation_displacement > 0))
    throw ValidationError("harness.deformation_displacement must be > 0");
}

SensorKind hand_variant(int finger_count) {
  if (finger_count < 1 || finger_count > 5)
    throw ValidationError("finger count must be in 1..5 (got " + std::to_string(finger_count) + ")");
  return finger_count <= 4 ? SensorKind::BioTac : SensorKind::BioTacSP;
}

std::int64_t IndependenceAudit::cross_finger_reads() const {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < reads.size(); ++i)
    for (std::size_t j = 0; j < reads[i].size(); ++j)
      if (i != j) n += reads[i][j];
  return n;
}

namespace {

RunReport run_loop(const RunConfig& config, const SlipModel& model, ObjectId object,
                   int finger_count, const DisturbanceSchedule& disturbances,
                   const RunOptions& options) {
  validate(config);
  if (finger_count < 1 || finger_count > 5)
    throw ValidationError("finger count must be in 1..5 (got " + std::to_string(finger_count) + ")");
  if (model.variant != config.sensor_variant)
    throw ValidationError("model was trained for " + std::string(to_string(model.variant)) +
                          " but the run uses " + std::string(to_string(config.sensor_variant)));
  if (model.tau_h != config.classifier.features.tau_h)
    throw ValidationError("model tau_h " + std::to_string(model.tau_h) +
                          " does not match the configured tau_h " +
                          std::to_string(config.classifier.features.tau_h));

  const auto& h = config.harness;
  const auto& info = variant_info(config.sensor_variant);
  const double dt = config.dt;
  const auto total_ticks = static_cast<std::int64_t>(std::llround(h.duration / dt));
  validate(disturbances, total_ticks);
  const auto ticks_per_frame =
      std::max<std::int64_t>(1, std::llround(info.frame_period() / dt));

  std::vector<int> order(finger_count);
  std::iota(order.begin(), order.end(), 0);
  if (options.tick_order) {
    auto sorted = *options.tick_order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != order) throw ValidationError("tick_order must be a permutation of the finger indices");
    order = *options.tick_order;
  }

  const ObjectSpec& spec = object_spec(object);
  const auto layout = grip_layout(finger_count);
  World world = make_world(spec, layout, config.physics, false);

  RunReport rep;
  rep.object = std::string(spec.name);
  rep.finger_count = finger_count;
  rep.variant = config.sensor_variant;
  rep.tau_f = model.tau_f;
  rep.seed = config.seed;
  rep.f_star = min_stabilizing_force(spec, finger_count, config.physics.gravity);
  rep.deformation_budget = spec.stiffness * h.deformation_displacement;
  rep.traces.resize(finger_count);
  rep.audit.reads.assign(finger_count, std::vector<std::int64_t>(finger_count, 0));

  const double f_start =
      h.initial_force_ratio *
      min_stabilizing_force(spec, finger_count, config.physics.gravity);
  for (int i = 0; i < finger_count; ++i) set_normal_force(world, i, f_start);

  // Sensors are grounded on a synthetic frame taken before the fingers touch.
  const Rng root(config.seed);
  std::vector<SensorUnit> units;
  std::vector<Rng> noise;
  std::vector<FingerController> controllers;
  std::vector<Grounding> groundings;
  for (int i = 0; i < finger_count; ++i) {
    Rng unit_rng = root.fork("harness/unit", i);
    units.push_back(make_sensor_unit(config.sensor_variant, i, config.sensor, unit_rng));
    noise.push_back(root.fork("harness/noise", i));
    ContactState free;
    free.finger_id = i;
    const SensorFrame g = synth_frame(free, false, units[i], config.sensor, noise[i], -1);
    groundings.push_back(grounding_from(g));
    controllers.emplace_back(i, rate_scaled(config.controller, config.sensor_variant), config.classifier.features, groundings.back());
  }
  std::vector<ContactState> contacts =
      evaluate_contacts(world, disturbances.force_at(0, world.object_pos));
  std::vector<bool> was_in_contact(finger_count, true);
  std::vector<double> slip_sum(finger_count, 0.0), incipient_sum(finger_count, 0.0);
  std::vector<FingerCommand> commands(finger_count);

  // Per finger so the total does not depend on tick order.
  std::vector<double> settled_sum(finger_count, 0.0);
  std::int64_t settled_n = 0, settled_ticks = 0, sliding_ticks = 0;
  const auto settle_tick = static_cast<std::int64_t>(std::llround(h.settle_time / dt));

  std::int64_t frame = 0;
  for (std::int64_t tick = 0; tick < total_ticks && !rep.dropped; tick += ticks_per_frame, ++frame) {
    const double t = tick * dt;
    for (int i : order) {
      ContactState c = contacts[i];
      if (frame > 0 && c.in_contact) {
        c.slip_speed = slip_sum[i] / ticks_per_frame;
        c.incipient = incipient_sum[i] / ticks_per_frame;
      }
      const SensorFrame f = synth_frame(c, was_in_contact[i], units[i], config.sensor, noise[i], frame);
      was_in_contact[i] = c.in_contact;

      auto& ctl = controllers[i];
      ++rep.audit.reads[i][f.finger];
      ctl.observe(f);
      const auto label = ctl.update(model);

      const SensorFrame grounded = ground(f, groundings[i]);
      NormalContext ctx;
      ctx.geometric_normal = world.fingers[i].normal;
      ctx.approach_direction = world.fingers[i].normal;
      ctx.grounded_frame = &grounded;
      const Vec2 n = estimate_contact_normal(ctx, h.normal_estimator);
      const double speed = ctl.command_speed(n);
      // The actuator only moves along its own axis.
      commands[i].normal_speed = speed * n.dot(world.fingers[i].normal);

      auto& tr = rep.traces[i];
      tr.time.push_back(t);
      tr.normal_force.push_back(c.normal_force);
      tr.statistic.push_back(ctl.state().l);
      tr.command.push_back(speed);
      tr.label.push_back(label ? index_of(*label) : -1);
      if (tick >= settle_tick) {
        settled_sum[i] += c.normal_force;
        ++settled_n;
      }
    }
    rep.displacement_trace.push_back(world.object_pos.norm());

    std::fill(slip_sum.begin(), slip_sum.end(), 0.0);
    std::fill(incipient_sum.begin(), incipient_sum.end(), 0.0);
    for (std::int64_t j = 0; j < ticks_per_frame && tick + j < total_ticks; ++j) {
      const std::int64_t k = tick + j;
      auto out = step(world, commands, disturbances.force_at(k, world.object_pos), dt);
      world = std::move(out.world);
      contacts = std::move(out.contacts);
      for (int i = 0; i < finger_count; ++i) {
        slip_sum[i] += contacts[i].slip_speed;
        incipient_sum[i] += contacts[i].incipient;
        rep.peak_force = std::max(rep.peak_force, contacts[i].normal_force);
      }
      const double d = world.object_pos.norm();
      rep.max_displacement = std::max(rep.max_displacement, d);
      if (k >= settle_tick) {
        ++settled_ticks;
        if (out.slide_speed > 0) ++sliding_ticks;
      }
      if (d > h.drop_threshold) {
        rep.dropped = true;
        rep.drop_time = (k + 1) * dt;
        break;
      }
    }
  }

  const double settled_total = std::accumulate(settled_sum.begin(), settled_sum.end(), 0.0);
  rep.settled_mean_force = settled_n ? settled_total / settled_n : 0.0;
  rep.settled_force_ratio = rep.f_star > 0 ? rep.settled_mean_force / rep.f_star : 0.0;
  rep.slip_fraction = settled_ticks ? static_cast<double>(sliding_ticks) / settled_ticks : 0.0;
  rep.success = !rep.dropped && rep.max_displacement < h.drop_threshold;
  return rep;
}

}  // namespace

RunReport run_stabilization(const RunConfig& config, const SlipModel& model, ObjectId object,
                            int finger_count, const DisturbanceSchedule& disturbances,
                            const RunOptions& options) {
  return run_loop(config, model, object, finger_count, disturbances, options);
}

DisturbanceSchedule default_partner_schedule(double dt, double duration) {
  DisturbanceSchedule s;
  const auto end = static_cast<std::int64_t>(std::llround(duration / dt));
  s.entries.push_back({0, end, Vec2(3.0, 0.0), Vec2(3.0, 0.0), true});
  return s;
}

DisturbanceSchedule partner_ramp_schedule(double dt, double duration, double start, double ramp_time) {
  auto tick = [dt](double seconds) { return static_cast<std::int64_t>(std::llround(seconds / dt)); };
  if (!(start >= 0 && ramp_time > 0 && start + ramp_time <= duration))
    throw ValidationError("partner ramp must fit inside the run");
  DisturbanceSchedule s;
  s.entries.push_back({tick(start), tick(start + ramp_time), Vec2::Zero(), Vec2(6.0, 0.0), true});
  s.entries.push_back({tick(start + ramp_time), tick(duration), Vec2(6.0, 0.0), Vec2(6.0, 0.0), true});
  return s;
}

DisturbanceSchedule partner_release_schedule(double dt, double release) {
  if (!(release > 0)) throw ValidationError("partner release time must be > 0");
  DisturbanceSchedule s;
  s.entries.push_back({0, static_cast<std::int64_t>(std::llround(release / dt)), Vec2(3.0, 0.0),
                       Vec2(3.0, 0.0), true});
  return s;
}

RunReport run_partner_stabilization(const RunConfig& config, const SlipModel& model) {
  const auto schedule = config.disturbances.has_partner()
                            ? config.disturbances
                            : default_partner_schedule(config.dt, config.harness.duration);
  return run_loop(config, model, config.object, 1, schedule, {});
}

std::string report_to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["object"] = r.object;
  j["finger_count"] = r.finger_count;
  j["variant"] = std::string(to_string(r.variant));
  j["tau_f"] = r.tau_f;
  j["seed"] = r.seed;
  j["f_star"] = r.f_star;
  j["deformation_budget"] = r.deformation_budget;
  j["max_displacement"] = r.max_displacement;
  j["dropped"] = r.dropped;
  j["drop_time"] = r.drop_time;
  j["settled_mean_force"] = r.settled_mean_force;
  j["settled_force_ratio"] = r.settled_force_ratio;
  j["slip_fraction"] = r.slip_fraction;
  j["peak_force"] = r.peak_force;
  j["success"] = r.success;
  j["cross_finger_reads"] = r.audit.cross_finger_reads();
  nlohmann::ordered_json frames = nlohmann::ordered_json::array();
  for (const auto& row : r.audit.reads) frames.push_back(row);
  j["frames_read"] = frames;
  return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& dir, const RunReport& r) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
    out << report_to_json(r);
  }
  std::ofstream tr(dir / "traces.csv");
  if (!tr) throw std::runtime_error("cannot write " + (dir / "traces.csv").string());
  tr << "time,finger,normal_force,statistic,command,label\n";
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    const auto& t = r.traces[i];
    for (std::size_t k = 0; k < t.time.size(); ++k) {
      tr << format_number(t.time[k]) << ',' << i << ',' << format_number(t.normal_force[k]) << ','
         << format_number(t.statistic[k]) << ',' << format_number(t.command[k]) << ','
         << (t.label[k] < 0 ? std::string() : std::string(to_string(label_at(t.label[k])))) << '\n';
    }
  }
  std::ofstream disp(dir / "displacement.csv");
  disp << "time,displacement\n";
  const auto& times = r.traces.empty() ? std::vector<double>{} : r.traces.front().time;
  for (std::size_t k = 0; k < r.displacement_trace.size() && k < times.size(); ++k)
    disp << format_number(times[k]) << ',' << format_number(r.displacement_trace[k]) << '\n';
}

void validate(const SweepGrid& g) {
  if (g.objects.empty() || g.finger_counts.empty() || g.tau_fs.empty() || g.seeds.empty())
    throw ValidationError("sweep grid needs at least one object, finger count, tau_f and seed");
  for (int n : g.finger_counts)
    if (n < 1 || n > 5)
      throw ValidationError("sweep finger counts must be in 1..5 (got " + std::to_string(n) + ")");
  for (int k : g.tau_fs)
    if (k < 1) throw ValidationError("sweep tau_f values must be >= 1");
}

std::vector<SweepRow> sweep(const RunConfig& base, const SweepGrid& grid, const ModelLookup& models) {
  validate(grid);
  std::vector<SweepRow> rows;
  for (int n : grid.finger_counts) {
    for (auto object : grid.objects) {
      for (int tau_f : grid.tau_fs) {
        for (auto seed : grid.seeds) {
          RunConfig cfg = base;
          cfg.seed = seed;
          cfg.sensor_variant = hand_variant(n);
          cfg.classifier.tau_f = tau_f;
          const SlipModel& model = models(cfg.sensor_variant, tau_f);
          const auto rep = run_stabilization(cfg, model, object, n, base.disturbances);
          SweepRow row;
          row.object = object;
          row.fingers = n;
          row.variant = cfg.sensor_variant;
          row.tau_f = tau_f;
          row.seed = seed;
          row.train_object = is_training_object(object);
          row.success = rep.success;
          row.max_displacement = rep.max_displacement;
          row.settled_force_ratio = rep.settled_force_ratio;
          row.slip_fraction = rep.slip_fraction;
          row.peak_force = rep.peak_force;
          row.deformation_budget = rep.deformation_budget;
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "object,fingers,variant,tau_f,seed,train_object,success,max_displacement,"
         "settled_force_ratio,slip_fraction,peak_force,deformation_budget\n";
  for (const auto& r : rows) {
    out << to_string(r.object) << ',' << r.fingers << ',' << to_string(r.variant) << ',' << r.tau_f
        << ',' << r.seed << ',' << (r.train_object ? 1 : 0) << ',' << (r.success ? 1 : 0) << ','
        << format_number(r.max_displacement) << ',' << format_number(r.settled_force_ratio) << ','
        << format_number(r.slip_fraction) << ',' << format_number(r.peak_force) << ','
        << format_number(r.deformation_budget) << '\n';
  }
  return out.str();
}

}  // namespace gripsim
