#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gripsim/types.hpp"

namespace gripsim {

// One line of the JSON Lines dataset.
struct DatasetRecord {
  SensorFrame frame;
  bool gt_contact = false;
  bool gt_slip = false;
  Label auto_label = Label::NoContact;
  Vec2 pos = Vec2::Zero();  // fingertip position, m

  bool operator==(const DatasetRecord&) const = default;
};

DatasetRecord make_record(const SensorFrame& frame, const ContactState& contact, Label auto_label);

// Ground-truth label implied by the physics flags.
Label ground_truth_label(const DatasetRecord& record);
Label ground_truth_label(const ContactState& contact);

std::string write_jsonl_frame(const DatasetRecord& record);  // no trailing newline
DatasetRecord read_jsonl_frame(std::string_view line);

void write_jsonl(const std::filesystem::path& path, std::span<const DatasetRecord> records);
std::vector<DatasetRecord> read_jsonl(const std::filesystem::path& path);

}  // namespace gripsim
