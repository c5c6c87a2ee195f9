#pragma once

#include <filesystem>

namespace gripsim {

// Renders a markdown summary of every artifact found under `in_dir` (campaign
// manifests, evaluation CSVs, sweep CSVs, simulate outputs) and writes
// plot-ready CSVs next to `out_md` in a `<stem>_data` directory. Only reads
// files; nothing is recomputed. Returns the number of artifacts rendered.
int write_markdown_report(const std::filesystem::path& in_dir, const std::filesystem::path& out_md);

}  // namespace gripsim
