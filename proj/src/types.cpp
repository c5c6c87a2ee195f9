#include "gripsim/types.hpp"

#include <charconv>

namespace gripsim {

namespace {

// p_ac batch size for the SP is 4.545 kHz / 1 kHz rounded up to a fixed 5.
constexpr SensorVariant kBioTac{SensorKind::BioTac, "BioTac", 19, 100.0, 22, 2200.0};
constexpr SensorVariant kBioTacSP{SensorKind::BioTacSP, "BioTacSP", 22, 1000.0, 5, 4545.0};

}  // namespace

const SensorVariant& variant_info(SensorKind kind) {
  return kind == SensorKind::BioTac ? kBioTac : kBioTacSP;
}

SensorKind parse_variant(std::string_view name) {
  if (name == "BioTac") return SensorKind::BioTac;
  if (name == "BioTacSP") return SensorKind::BioTacSP;
  throw ValidationError("unknown sensor variant '" + std::string(name) +
                        "' (expected BioTac or BioTacSP)");
}

std::string_view to_string(SensorKind kind) { return variant_info(kind).name; }

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Slip: return "slip";
    case Label::Contact: return "contact";
    case Label::NoContact: return "no_contact";
  }
  return "no_contact";
}

Label parse_label(std::string_view name) {
  if (name == "slip") return Label::Slip;
  if (name == "contact") return Label::Contact;
  if (name == "no_contact") return Label::NoContact;
  throw ParseError("unknown label '" + std::string(name) + "'");
}

void check_frame_shape(const SensorFrame& frame) {
  const auto& info = variant_info(frame.variant);
  if (static_cast<int>(frame.p_ac.size()) != info.p_ac_batch_size)
    throw ValidationError("p_ac batch has " + std::to_string(frame.p_ac.size()) +
                          " samples, " + std::string(info.name) + " requires " +
                          std::to_string(info.p_ac_batch_size));
  if (static_cast<int>(frame.electrodes.size()) != info.electrode_count)
    throw ValidationError("electrode array has " + std::to_string(frame.electrodes.size()) +
                          " values, " + std::string(info.name) + " requires " +
                          std::to_string(info.electrode_count));
}

std::string format_number(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace gripsim
