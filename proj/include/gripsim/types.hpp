#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace gripsim {

using Vec2 = Eigen::Vector2d;

// Bad input: violated invariant, out-of-range parameter, unknown name.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file contents.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A persisted artifact was produced for a different feature layout or variant.
class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SensorKind { BioTac, BioTacSP };

struct SensorVariant {
  SensorKind kind;
  std::string_view name;
  int electrode_count;
  double frame_rate;     // Hz, electrode and p_dc rate
  int p_ac_batch_size;   // p_ac samples delivered with every frame
  double p_ac_rate;      // Hz, analog p_ac rate

  double frame_period() const { return 1.0 / frame_rate; }
};

const SensorVariant& variant_info(SensorKind kind);
SensorKind parse_variant(std::string_view name);
std::string_view to_string(SensorKind kind);

// Class order doubles as the argmax tie-break order.
enum class Label : int { Slip = 0, Contact = 1, NoContact = 2 };
inline constexpr int kNumClasses = 3;

std::string_view to_string(Label label);
Label parse_label(std::string_view name);
inline int index_of(Label label) { return static_cast<int>(label); }
inline Label label_at(int index) { return static_cast<Label>(index); }

// One multi-channel tactile sample x_t.
struct SensorFrame {
  std::int64_t t = 0;
  int finger = 0;
  SensorKind variant = SensorKind::BioTac;
  double p_dc = 0.0;
  std::vector<double> p_ac;
  std::vector<double> electrodes;
  double t_dc = 0.0;
  double t_ac = 0.0;

  bool operator==(const SensorFrame&) const = default;
};

// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

// Throws ValidationError when batch or electrode sizes disagree with the variant.
void check_frame_shape(const SensorFrame& frame);

// Ground-truth contact physics for one finger after a step.
struct ContactState {
  int finger_id = 0;
  bool in_contact = false;
  double normal_force = 0.0;     // N
  double tangential_load = 0.0;  // N, load demanded from this contact
  double friction_load = 0.0;    // N, load actually transmitted, <= mu * normal_force
  double slip_speed = 0.0;       // m/s
  double incipient = 0.0;        // micro-slip activity in [0, 1] while loading toward the limit
  Vec2 fingertip_pos = Vec2::Zero();
  Vec2 contact_normal = Vec2::UnitX();

  bool operator==(const ContactState&) const = default;
};

}  // namespace gripsim
