#include "gripsim/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gripsim {

namespace {

const std::vector<ObjectSpec>& catalog() {
  // Ball and box are the training objects; the tuna can is the heaviest and
  // the plastic cup the most compliant.
  static const std::vector<ObjectSpec> specs{
      {ObjectId::Ball, "ball", 0.5, 0.5, 2000.0, 0.035, 5},
      {ObjectId::Box, "box", 0.3, 0.6, 3000.0, 0.040, 5},
      {ObjectId::TunaCan, "tuna_can", 0.7, 0.5, 5000.0, 0.042, 5},
      {ObjectId::PlasticCup, "plastic_cup", 0.3, 0.45, 600.0, 0.040, 5},
  };
  return specs;
}

Vec2 normal_from_site_angle(double degrees) {
  const double a = degrees * std::numbers::pi / 180.0;
  return {-std::cos(a), -std::sin(a)};
}

}  // namespace

const ObjectSpec& object_spec(ObjectId id) {
  for (const auto& s : catalog())
    if (s.id == id) return s;
  throw ValidationError("unknown object id");
}

ObjectId parse_object(std::string_view name) {
  for (const auto& s : catalog())
    if (s.name == name) return s.id;
  throw ValidationError("unknown object '" + std::string(name) +
                        "' (expected ball, box, tuna_can or plastic_cup)");
}

std::string_view to_string(ObjectId id) { return object_spec(id).name; }

const std::vector<ObjectId>& all_objects() {
  static const std::vector<ObjectId> ids{ObjectId::Ball, ObjectId::Box, ObjectId::TunaCan,
                                         ObjectId::PlasticCup};
  return ids;
}

bool is_training_object(ObjectId id) { return id == ObjectId::Ball || id == ObjectId::Box; }

void validate(const ObjectSpec& spec) {
  if (!(spec.mass > 0)) throw ValidationError("object mass must be > 0");
  if (!(spec.friction_mu > 0 && spec.friction_mu <= 2))
    throw ValidationError("object friction_mu must be in (0, 2]");
  if (!(spec.stiffness > 0)) throw ValidationError("object stiffness must be > 0");
  if (!(spec.radius > 0)) throw ValidationError("object radius must be > 0");
}

void validate(const PhysicsParams& p) {
  if (!(p.gravity >= 0)) throw ValidationError("physics.gravity must be >= 0");
  if (!(p.k_slide > 0)) throw ValidationError("physics.k_slide must be > 0");
  if (!(p.relaxation_time > 0)) throw ValidationError("physics.relaxation_time must be > 0");
  if (!(p.skin_stiffness > 0)) throw ValidationError("physics.skin_stiffness must be > 0");
  if (!(p.skin_relaxation > 0)) throw ValidationError("physics.skin_relaxation must be > 0");
  if (!(p.standoff >= 0)) throw ValidationError("physics.standoff must be >= 0");
  if (!(p.incipient_onset >= 0 && p.incipient_onset < 1))
    throw ValidationError("physics.incipient_onset must be in [0, 1)");
}

std::vector<Vec2> grip_layout(int finger_count) {
  std::vector<double> angles;
  switch (finger_count) {
    case 1: angles = {180}; break;
    case 2: angles = {180, 0}; break;
    case 3: angles = {180, 60, -60}; break;
    case 4: angles = {0, 150, 180, 210}; break;
    case 5: angles = {135, 165, 195, 225, 300}; break;
    default:
      throw ValidationError("finger count " + std::to_string(finger_count) +
                            " outside 1..5");
  }
  std::vector<Vec2> normals;
  normals.reserve(angles.size());
  for (double a : angles) normals.push_back(normal_from_site_angle(a));
  return normals;
}

World make_world(const ObjectSpec& object, std::span<const Vec2> normals,
                 const PhysicsParams& params, bool object_fixed) {
  validate(object);
  validate(params);
  if (static_cast<int>(normals.size()) > object.max_fingers)
    throw ValidationError("object '" + object.name + "' has only " +
                          std::to_string(object.max_fingers) + " finger sites");
  World w;
  w.object = object;
  w.params = params;
  w.object_fixed = object_fixed;
  for (const auto& n : normals) {
    Finger f;
    f.normal = n.normalized();
    f.site = -object.radius * f.normal;
    f.depth = -params.standoff;
    w.fingers.push_back(f);
  }
  return w;
}

void set_normal_force(World& world, int index, double force) {
  auto& f = world.fingers.at(index);
  f.depth = f.creep + std::max(0.0, force) / world.object.stiffness;
  if (force <= 0) f.depth = f.creep - world.params.standoff;
}

Vec2 gravity_load(const World& world) {
  return {0.0, -world.object.mass * world.params.gravity};
}

namespace {

double normal_force_of(const World& w, const Finger& f) {
  return w.object.stiffness * std::max(0.0, f.penetration());
}

ContactState base_contact(const World& w, int i) {
  const auto& f = w.fingers[i];
  ContactState c;
  c.finger_id = i;
  c.normal_force = normal_force_of(w, f);
  c.in_contact = c.normal_force > 0;
  c.fingertip_pos = f.fingertip_pos();
  c.contact_normal = f.normal;
  return c;
}

struct LoadBalance {
  double load = 0;
  double capacity = 0;
  double total_normal = 0;
  Vec2 direction = Vec2::Zero();
};

LoadBalance balance(const World& w, const std::vector<ContactState>& contacts,
                    const Vec2& external) {
  LoadBalance b;
  const Vec2 total = gravity_load(w) + external;
  b.load = total.norm();
  if (b.load > 0) b.direction = total / b.load;
  for (const auto& c : contacts) b.total_normal += c.normal_force;
  b.capacity = w.object.friction_mu * b.total_normal;
  return b;
}

void share_load(const World& w, const LoadBalance& b, double slide_speed,
                std::vector<ContactState>& contacts) {
  for (auto& c : contacts) {
    if (!c.in_contact) continue;
    c.tangential_load = b.load * c.normal_force / b.total_normal;
    c.friction_load = std::min(c.tangential_load, w.object.friction_mu * c.normal_force);
    c.slip_speed = slide_speed;
  }
}

}  // namespace

std::vector<ContactState> evaluate_contacts(const World& w, const Vec2& external_force) {
  std::vector<ContactState> contacts;
  for (int i = 0; i < static_cast<int>(w.fingers.size()); ++i)
    contacts.push_back(base_contact(w, i));
  if (w.object_fixed) {
    for (auto& c : contacts) {
      if (!c.in_contact) continue;
      const auto& f = w.fingers[c.finger_id];
      c.tangential_load = w.params.skin_stiffness * std::abs(f.skin_deflection);
      c.friction_load = c.tangential_load;
    }
    return contacts;
  }
  const auto b = balance(w, contacts, external_force);
  const double slide = b.load > b.capacity ? w.params.k_slide * (b.load - b.capacity) : 0.0;
  share_load(w, b, slide, contacts);
  return contacts;
}

StepOutput step(const World& world, std::span<const FingerCommand> commands,
                const Vec2& external_force, double dt) {
  if (commands.size() != world.fingers.size())
    throw ValidationError("step needs one command per finger");
  if (!(dt > 0)) throw ValidationError("step dt must be > 0");

  StepOutput out{world, {}, world.object_pos, 0.0};
  World& w = out.world;
  const double tau = w.params.relaxation_time;

  for (std::size_t i = 0; i < w.fingers.size(); ++i) {
    auto& f = w.fingers[i];
    f.depth += commands[i].normal_speed * dt;
    f.survey += commands[i].tangential_speed * dt;
  }

  auto& contacts = out.contacts;
  for (int i = 0; i < static_cast<int>(w.fingers.size()); ++i)
    contacts.push_back(base_contact(w, i));

  if (w.object_fixed) {
    const double ks = w.params.skin_stiffness;
    for (auto& c : contacts) {
      auto& f = w.fingers[c.finger_id];
      if (!c.in_contact) {
        f.skin_deflection = 0.0;
        continue;
      }
      const double demanded = f.skin_deflection * (1.0 - dt / w.params.skin_relaxation) +
                              commands[c.finger_id].tangential_speed * dt;
      const double cap = w.object.friction_mu * c.normal_force / ks;
      c.tangential_load = ks * std::abs(demanded);
      if (std::abs(demanded) > cap) {
        c.slip_speed = (std::abs(demanded) - cap) / dt;
        f.skin_deflection = std::copysign(cap, demanded);
        c.friction_load = w.object.friction_mu * c.normal_force;
      } else {
        f.skin_deflection = demanded;
        c.friction_load = c.tangential_load;
      }
    }
  } else {
    const auto b = balance(w, contacts, external_force);
    if (b.load > b.capacity) {
      out.slide_speed = w.params.k_slide * (b.load - b.capacity);
      w.object_pos += out.slide_speed * dt * b.direction;
    }
    share_load(w, b, out.slide_speed, contacts);
  }

  // Micro-slip at the contact rim while the friction utilization climbs.
  const double onset = w.params.incipient_onset;
  for (auto& c : contacts) {
    auto& f = w.fingers[c.finger_id];
    const double rho =
        c.in_contact ? std::min(1.0, c.friction_load / (w.object.friction_mu * c.normal_force)) : 0.0;
    if (rho > f.utilization + 1e-9 && rho > onset) c.incipient = (rho - onset) / (1.0 - onset);
    f.utilization = rho;
  }

  // Viscous creep relaxes loaded contacts and recovers unloaded ones.
  for (auto& f : w.fingers) {
    const double pen = f.penetration();
    if (pen > 0)
      f.creep += pen * dt / tau;
    else
      f.creep = std::max(0.0, f.creep - f.creep * dt / tau);
  }

  out.displacement = w.object_pos;
  return out;
}

Vec2 DisturbanceSchedule::force_at(std::int64_t tick, const Vec2& object_pos) const {
  Vec2 total = Vec2::Zero();
  for (const auto& e : entries) {
    if (tick < e.start_tick || tick >= e.end_tick) continue;
    if (e.partner && object_pos.norm() > partner_clamp) continue;
    const double span = static_cast<double>(e.end_tick - e.start_tick);
    const double a = span > 0 ? (tick - e.start_tick) / span : 0.0;
    total += (1.0 - a) * e.force + a * e.force_end;
  }
  return total;
}

bool DisturbanceSchedule::has_partner() const {
  for (const auto& e : entries)
    if (e.partner) return true;
  return false;
}

void validate(const DisturbanceSchedule& s, std::int64_t run_ticks) {
  for (const auto& e : s.entries) {
    if (e.start_tick < 0 || e.end_tick < e.start_tick || e.end_tick > run_ticks)
      throw ValidationError("disturbance interval [" + std::to_string(e.start_tick) + ", " +
                            std::to_string(e.end_tick) + ") lies outside the run (" +
                            std::to_string(run_ticks) + " ticks)");
    if (!e.force.allFinite() || !e.force_end.allFinite())
      throw ValidationError("disturbance forces must be finite");
  }
  if (!(s.partner_clamp > 0)) throw ValidationError("partner_clamp must be > 0");
}

DisturbanceSchedule default_disturbances(double dt) {
  auto tick = [dt](double seconds) { return static_cast<std::int64_t>(std::llround(seconds / dt)); };
  DisturbanceSchedule s;
  s.entries.push_back({tick(10.0), tick(12.0), Vec2(0.0, -0.5), Vec2(0.0, -0.5), false});
  s.entries.push_back({tick(16.0), tick(18.0), Vec2(0.4, 0.0), Vec2(0.4, 0.0), false});
  return s;
}

double min_stabilizing_force(double friction_mu, int finger_count, double load) {
  if (!(friction_mu > 0)) throw ValidationError("no normal force suffices when mu = 0");
  if (finger_count < 1) throw ValidationError("finger count must be >= 1");
  return std::abs(load) / (finger_count * friction_mu);
}

double min_stabilizing_force(const ObjectSpec& object, int finger_count, double gravity,
                             const Vec2& extra_load) {
  const Vec2 load = Vec2(0.0, -object.mass * gravity) + extra_load;
  return min_stabilizing_force(object.friction_mu, finger_count, load.norm());
}

}  // namespace gripsim
