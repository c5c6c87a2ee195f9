#include "gripsim/dataset.hpp"

#include <fstream>

#include <json.hpp>

namespace gripsim {

using ojson = nlohmann::ordered_json;

DatasetRecord make_record(const SensorFrame& frame, const ContactState& contact, Label auto_label) {
  DatasetRecord r;
  r.frame = frame;
  r.gt_contact = contact.in_contact;
  r.gt_slip = contact.in_contact && contact.slip_speed > 0;
  r.auto_label = auto_label;
  r.pos = contact.fingertip_pos;
  return r;
}

Label ground_truth_label(const DatasetRecord& r) {
  if (!r.gt_contact) return Label::NoContact;
  return r.gt_slip ? Label::Slip : Label::Contact;
}

Label ground_truth_label(const ContactState& c) {
  if (!c.in_contact) return Label::NoContact;
  return c.slip_speed > 0 ? Label::Slip : Label::Contact;
}

std::string write_jsonl_frame(const DatasetRecord& r) {
  ojson j;
  j["t"] = r.frame.t;
  j["finger"] = r.frame.finger;
  j["variant"] = std::string(to_string(r.frame.variant));
  j["p_dc"] = r.frame.p_dc;
  j["p_ac"] = r.frame.p_ac;
  j["electrodes"] = r.frame.electrodes;
  j["t_dc"] = r.frame.t_dc;
  j["t_ac"] = r.frame.t_ac;
  j["gt_contact"] = r.gt_contact;
  j["gt_slip"] = r.gt_slip;
  j["auto_label"] = std::string(to_string(r.auto_label));
  j["pos"] = {r.pos.x(), r.pos.y()};
  return j.dump();
}

DatasetRecord read_jsonl_frame(std::string_view line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const ojson::exception& e) {
    throw ParseError(std::string("malformed dataset line: ") + e.what());
  }
  try {
    DatasetRecord r;
    r.frame.t = j.at("t").get<std::int64_t>();
    r.frame.finger = j.at("finger").get<int>();
    r.frame.variant = parse_variant(j.at("variant").get<std::string>());
    r.frame.p_dc = j.at("p_dc").get<double>();
    r.frame.p_ac = j.at("p_ac").get<std::vector<double>>();
    r.frame.electrodes = j.at("electrodes").get<std::vector<double>>();
    r.frame.t_dc = j.at("t_dc").get<double>();
    r.frame.t_ac = j.at("t_ac").get<double>();
    r.gt_contact = j.at("gt_contact").get<bool>();
    r.gt_slip = j.at("gt_slip").get<bool>();
    r.auto_label = parse_label(j.at("auto_label").get<std::string>());
    const auto pos = j.at("pos").get<std::vector<double>>();
    if (pos.size() != 2) throw ParseError("dataset field 'pos' must hold two numbers");
    r.pos = Vec2(pos[0], pos[1]);
    check_frame_shape(r.frame);
    return r;
  } catch (const ojson::exception& e) {
    throw ParseError(std::string("dataset line does not match the schema: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(std::string("dataset line does not match the schema: ") + e.what());
  }
}

void write_jsonl(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << write_jsonl_frame(r) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<DatasetRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file " + path.string());
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(read_jsonl_frame(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace gripsim
