#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gripsim/types.hpp"

namespace gripsim {

enum class ObjectId { Ball, Box, TunaCan, PlasticCup };

struct ObjectSpec {
  ObjectId id = ObjectId::Ball;
  std::string name;
  double mass = 0.5;         // kg
  double friction_mu = 0.5;
  double stiffness = 2000;   // N/m, contact compliance
  double radius = 0.035;     // m, places finger sites in the grip plane
  int max_fingers = 5;
};

const ObjectSpec& object_spec(ObjectId id);
ObjectId parse_object(std::string_view name);
std::string_view to_string(ObjectId id);
const std::vector<ObjectId>& all_objects();
bool is_training_object(ObjectId id);
void validate(const ObjectSpec& spec);

// Contact normals (fingertip into object) for a grip with `finger_count`
// fingers. Four fingers mimic a thumb opposing three fingers; five fingers use a
// layout where the thumb only weakly opposes the others.
std::vector<Vec2> grip_layout(int finger_count);

struct PhysicsParams {
  double gravity = 9.81;           // m/s^2
  double k_slide = 0.05;           // m/s per N of friction deficit
  double relaxation_time = 20.0;   // s, viscous creep of the compliant contact
  double skin_stiffness = 1.0e5;   // N/m, tangential fingertip skin stiffness
  double skin_relaxation = 0.2;    // s, stuck skin deflection relaxes toward zero
  double standoff = 0.004;         // m, initial fingertip gap
  double incipient_onset = 0.8;    // friction utilization where micro-slip starts
};

void validate(const PhysicsParams& params);

struct Finger {
  Vec2 normal = Vec2::UnitX();
  Vec2 site = Vec2::Zero();      // surface point in the grip plane
  double depth = 0.0;            // fingertip travel along the normal past the surface
  double creep = 0.0;            // relaxed indentation
  double survey = 0.0;           // fingertip travel along the surface tangent
  double skin_deflection = 0.0;  // stuck tangential skin deflection (fixed object)
  double utilization = 0.0;      // friction_load / (mu * normal_force) after the last step

  Vec2 tangent() const { return {-normal.y(), normal.x()}; }
  double penetration() const { return depth - creep; }
  Vec2 fingertip_pos() const { return site + depth * normal + survey * tangent(); }
};

// Planar quasi-static world: one object, N point-contact fingertips. External
// loads (gravity, disturbances) act tangentially at every contact and the object
// slides as a unit when the friction budget is exceeded. A fixed object is held
// by its support; tangential load then only comes from fingertip surveying.
struct World {
  ObjectSpec object;
  PhysicsParams params;
  bool object_fixed = false;
  Vec2 object_pos = Vec2::Zero();  // cumulative slide, (lateral, vertical)
  std::vector<Finger> fingers;
};

World make_world(const ObjectSpec& object, std::span<const Vec2> normals,
                 const PhysicsParams& params, bool object_fixed);

// Place finger `index` so that it presses with `force` newtons.
void set_normal_force(World& world, int index, double force);

struct FingerCommand {
  double normal_speed = 0.0;      // m/s along the contact normal
  double tangential_speed = 0.0;  // m/s along the surface tangent
};

struct StepOutput {
  World world;
  std::vector<ContactState> contacts;
  Vec2 displacement = Vec2::Zero();
  double slide_speed = 0.0;
};

Vec2 gravity_load(const World& world);

StepOutput step(const World& world, std::span<const FingerCommand> commands,
                const Vec2& external_force, double dt);

// Contact states of the current configuration without advancing time.
std::vector<ContactState> evaluate_contacts(const World& world, const Vec2& external_force);

// Scripted external loads. A push applies its force over [start_tick, end_tick),
// ramping linearly from `force` to `force_end`. A partner entry models a
// position-clamped opposing fingertip: it only loads the object while the
// object stays within `partner_clamp` of its start pose.
struct DisturbanceEntry {
  std::int64_t start_tick = 0;
  std::int64_t end_tick = 0;
  Vec2 force = Vec2::Zero();
  Vec2 force_end = Vec2::Zero();
  bool partner = false;
};

struct DisturbanceSchedule {
  std::vector<DisturbanceEntry> entries;
  double partner_clamp = 0.03;  // m

  Vec2 force_at(std::int64_t tick, const Vec2& object_pos) const;
  bool has_partner() const;
};

void validate(const DisturbanceSchedule& schedule, std::int64_t run_ticks);

// Downward 0.5 N push over [10 s, 12 s) and a lateral 0.4 N push over [16 s, 18 s).
DisturbanceSchedule default_disturbances(double dt);

// Smallest uniform normal force with fingers * mu * F >= load.
double min_stabilizing_force(double friction_mu, int finger_count, double load);
double min_stabilizing_force(const ObjectSpec& object, int finger_count, double gravity,
                             const Vec2& extra_load = Vec2::Zero());

}  // namespace gripsim
