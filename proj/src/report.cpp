#include "gripsim/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gripsim/classifier.hpp"
#include "gripsim/types.hpp"

namespace gripsim {

namespace fs = std::filesystem;

namespace {

using Table = std::vector<std::vector<std::string>>;

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  Table rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(split(line));
  return rows;
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

void markdown_table(std::ostream& md, const std::vector<std::string>& header, const Table& rows) {
  md << '|';
  for (const auto& h : header) md << ' ' << h << " |";
  md << "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) md << "---|";
  md << '\n';
  for (const auto& r : rows) {
    md << '|';
    for (const auto& c : r) md << ' ' << c << " |";
    md << '\n';
  }
  md << '\n';
}

std::string slug(const fs::path& rel) {
  std::string s = rel.generic_string();
  for (auto& c : s)
    if (c == '/' || c == '.') c = '_';
  return s.empty() ? "root" : s;
}

void render_manifest(std::ostream& md, const fs::path& path, const fs::path& rel) {
  const auto rows = read_csv(path);
  std::map<std::string, std::array<long long, 4>> per_object;  // finger-trials, slip, contact, none
  std::map<std::string, bool> trials;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 9) continue;
    trials[r[0]] = true;
    auto& acc = per_object[r[2]];
    ++acc[0];
    for (int c = 0; c < 3; ++c) acc[c + 1] += std::stoll(r[6 + c]);
  }
  md << "## Campaign `" << rel.generic_string() << "`\n\n";
  md << "Trials: " << trials.size() << ", finger-trials: " << rows.size() - 1 << "\n\n";
  Table t;
  for (const auto& [obj, a] : per_object)
    t.push_back({obj, std::to_string(a[0]), std::to_string(a[1]), std::to_string(a[2]),
                 std::to_string(a[3])});
  markdown_table(md, {"object", "finger-trials", "slip frames", "contact frames", "no_contact frames"},
                 t);
}

void render_evaluation(std::ostream& md, const fs::path& path, const fs::path& rel) {
  const Evaluation e = read_evaluation_csv(path);
  md << "## Classifier `" << rel.generic_string() << "`\n\n";
  md << "Accuracy: " << fixed(e.accuracy) << " over " << e.total << " windows\n\n";
  Table t;
  for (int c = 0; c < kNumClasses; ++c)
    t.push_back({std::string(to_string(label_at(c))), fixed(e.precision[c]), fixed(e.recall[c]),
                 std::to_string(e.support[c])});
  markdown_table(md, {"class", "precision", "recall", "support"}, t);
}

void render_sweep(std::ostream& md, const fs::path& path, const fs::path& rel,
                  const fs::path& data_dir) {
  const auto rows = read_csv(path);
  const auto& h = rows.front();
  auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
  };
  const auto c_obj = col("object"), c_n = col("fingers"), c_ok = col("success"),
             c_ratio = col("settled_force_ratio"), c_disp = col("max_displacement"),
             c_peak = col("peak_force"), c_budget = col("deformation_budget"),
             c_train = col("train_object");
  struct Cell {
    int runs = 0, ok = 0;
    double ratio = 0, disp = 0, peak = 0, budget = 0;
  };
  std::map<std::pair<int, std::string>, Cell> cells;
  int seen = 0, seen_ok = 0, train = 0, train_ok = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != h.size()) continue;
    auto& c = cells[{std::stoi(r[c_n]), r[c_obj]}];
    const bool ok = r[c_ok] == "1";
    ++c.runs;
    c.ok += ok;
    c.ratio += std::stod(r[c_ratio]);
    c.disp = std::max(c.disp, std::stod(r[c_disp]));
    c.peak = std::max(c.peak, std::stod(r[c_peak]));
    c.budget = std::stod(r[c_budget]);
    if (r[c_train] == "1") {
      ++train;
      train_ok += ok;
    } else {
      ++seen;
      seen_ok += ok;
    }
  }
  md << "## Sweep `" << rel.generic_string() << "`\n\n";
  md << "Training objects: " << train_ok << "/" << train << " runs stable. Unseen objects: "
     << seen_ok << "/" << seen << " runs stable.\n\n";
  Table t;
  const fs::path csv = data_dir / (slug(rel) + "_cells.csv");
  std::ofstream out(csv);
  out << "fingers,object,runs,success_rate,mean_force_ratio,max_displacement_mm,peak_force,"
         "deformation_budget\n";
  for (const auto& [key, c] : cells) {
    const double rate = static_cast<double>(c.ok) / c.runs;
    t.push_back({std::to_string(key.first), key.second, std::to_string(c.ok) + "/" + std::to_string(c.runs),
                 fixed(c.ratio / c.runs), fixed(c.disp * 1000, 2), fixed(c.peak), fixed(c.budget)});
    out << key.first << ',' << key.second << ',' << c.runs << ',' << format_number(rate) << ','
        << format_number(c.ratio / c.runs) << ',' << format_number(c.disp * 1000) << ','
        << format_number(c.peak) << ',' << format_number(c.budget) << '\n';
  }
  markdown_table(md, {"fingers", "object", "stable", "force / F*", "max disp (mm)", "peak force (N)",
                      "deformation budget (N)"},
                 t);
  md << "Plot data: `" << csv.filename().generic_string() << "`\n\n";
}

void render_run(std::ostream& md, const fs::path& dir, const fs::path& rel, const fs::path& data_dir) {
  std::ifstream in(dir / "summary.json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError((dir / "summary.json").string() + ": " + e.what());
  }
  md << "## Run `" << rel.generic_string() << "`\n\n";
  Table t{{j.value("object", ""), std::to_string(j.value("finger_count", 0)),
           j.value("variant", ""), fixed(j.value("f_star", 0.0)),
           fixed(j.value("settled_force_ratio", 0.0)), fixed(j.value("slip_fraction", 0.0), 4),
           fixed(j.value("max_displacement", 0.0) * 1000, 2), fixed(j.value("peak_force", 0.0)),
           j.value("success", false) ? "yes" : "no"}};
  markdown_table(md, {"object", "fingers", "sensor", "F* (N)", "force / F*", "slip fraction",
                      "max disp (mm)", "peak force (N)", "stable"},
                 t);

  // Wide per-finger force table for plotting.
  const fs::path traces = dir / "traces.csv";
  if (!fs::exists(traces)) return;
  const auto rows = read_csv(traces);
  std::map<std::string, std::map<int, std::pair<std::string, std::string>>> by_time;
  std::vector<std::string> times;
  int fingers = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() < 5) continue;
    const int f = std::stoi(r[1]);
    fingers = std::max(fingers, f + 1);
    if (!by_time.count(r[0])) times.push_back(r[0]);
    by_time[r[0]][f] = {r[2], r[3]};
  }
  const fs::path csv = data_dir / (slug(rel) + "_forces.csv");
  std::ofstream out(csv);
  out << "time";
  for (int f = 0; f < fingers; ++f) out << ",force_" << f;
  for (int f = 0; f < fingers; ++f) out << ",l_" << f;
  out << '\n';
  for (const auto& t : times) {
    out << t;
    const auto& m = by_time[t];
    for (int f = 0; f < fingers; ++f) out << ',' << (m.count(f) ? m.at(f).first : "");
    for (int f = 0; f < fingers; ++f) out << ',' << (m.count(f) ? m.at(f).second : "");
    out << '\n';
  }
  md << "Plot data: `" << csv.filename().generic_string() << "`\n\n";
}

}  // namespace

int write_markdown_report(const fs::path& in_dir, const fs::path& out_md) {
  if (!fs::is_directory(in_dir)) throw ValidationError("report input " + in_dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(in_dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  const fs::path data_dir = out_md.parent_path() / (out_md.stem().string() + "_data");
  fs::create_directories(data_dir);

  std::ostringstream md;
  md << "# Grip stabilization report\n\n";
  int rendered = 0;
  for (const auto& f : files) {
    const fs::path rel = fs::relative(f, in_dir);
    const std::string name = f.filename().string();
    if (name == "manifest.csv") {
      render_manifest(md, f, rel);
    } else if (name == "summary.json") {
      render_run(md, f.parent_path(), fs::relative(f.parent_path(), in_dir), data_dir);
    } else if (f.extension() == ".csv") {
      const auto head = first_line(f);
      if (head == "class,precision,recall,support")
        render_evaluation(md, f, rel);
      else if (head.rfind("object,fingers,variant,tau_f,seed", 0) == 0)
        render_sweep(md, f, rel, data_dir);
      else
        continue;
    } else {
      continue;
    }
    ++rendered;
  }
  if (rendered == 0)
    throw ValidationError("no campaign, evaluation, sweep or simulate outputs found under " +
                          in_dir.string());
  std::ofstream out(out_md);
  if (!out) throw std::runtime_error("cannot write " + out_md.string());
  out << md.str();
  return rendered;
}

}  // namespace gripsim
