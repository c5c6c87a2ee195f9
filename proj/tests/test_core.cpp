#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "gripsim/config.hpp"
#include "gripsim/dataset.hpp"
#include "gripsim/rng.hpp"
#include "support.hpp"

using namespace gripsim;
namespace fs = std::filesystem;

TEST_CASE("sensor variants carry the fixed channel shapes") {
  const auto& bt = variant_info(SensorKind::BioTac);
  CHECK(bt.electrode_count == 19);
  CHECK(bt.frame_rate == 100.0);
  CHECK(bt.p_ac_batch_size == 22);
  const auto& sp = variant_info(SensorKind::BioTacSP);
  CHECK(sp.electrode_count == 22);
  CHECK(sp.frame_rate == 1000.0);
  CHECK(sp.p_ac_batch_size == 5);
  CHECK(parse_variant("BioTacSP") == SensorKind::BioTacSP);
  CHECK_THROWS_AS(parse_variant("biotac-xl"), ValidationError);
}

TEST_CASE("labels have three names that round-trip") {
  for (int c = 0; c < kNumClasses; ++c) CHECK(parse_label(to_string(label_at(c))) == label_at(c));
  CHECK(to_string(Label::NoContact) == "no_contact");
  CHECK_THROWS_AS(parse_label("sliding"), ParseError);
}

TEST_CASE("frame shape is checked against the variant") {
  SensorFrame f = test::frame(SensorKind::BioTac, 0, 0, 1.0);
  CHECK_NOTHROW(check_frame_shape(f));
  f.p_ac.pop_back();
  CHECK_THROWS_AS(check_frame_shape(f), ValidationError);
  f = test::frame(SensorKind::BioTacSP, 0, 0, 1.0);
  f.electrodes.resize(19);
  CHECK_THROWS_AS(check_frame_shape(f), ValidationError);
}

TEST_CASE("format_number is shortest round-trip") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal(0, 1) * std::pow(10.0, rng.uniform(-12, 12));
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(3.0) == "3");
}

TEST_CASE("rng forks depend on seed and label only") {
  Rng a(42), b(42);
  a.uniform();
  a.normal();
  CHECK(a.fork("sensor").next() == b.fork("sensor").next());
  CHECK(a.fork("sensor", 1).next() != a.fork("sensor", 2).next());
  CHECK(a.fork("sensor").next() != a.fork("physics").next());
  CHECK(Rng(1).next() != Rng(2).next());
  Rng c(5), d(5);
  for (int i = 0; i < 100; ++i) CHECK(c.normal() == d.normal());
}

TEST_CASE("load_config") {
  test::TempDir dir;
  SUBCASE("five BioTacSP fingers are valid") {
    const auto p = dir.write("c.json", R"({"finger_count": 5, "sensor_variant": "BioTacSP"})");
    const RunConfig c = load_config(p);
    CHECK(c.finger_count == 5);
    CHECK(c.sensor_variant == SensorKind::BioTacSP);
  }
  SUBCASE("finger_count 0 is rejected") {
    const auto p = dir.write("c.json", R"({"finger_count": 0})");
    CHECK_THROWS_WITH_AS(load_config(p), doctest::Contains("finger_count"), ValidationError);
  }
  SUBCASE("tau_f 0 is rejected") {
    const auto p = dir.write("c.json", R"({"classifier": {"tau_f": 0}})");
    CHECK_THROWS_WITH_AS(load_config(p), doctest::Contains("tau_f"), ValidationError);
  }
  SUBCASE("other invariants") {
    CHECK_THROWS_AS(parse_config(R"({"dt": 0})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"dt": -0.001})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"finger_count": 6})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"classifier": {"tau_h": 0}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"controller": {"beta": 0}})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"object": "teapot"})"), ValidationError);
  }
  SUBCASE("malformed text is a parse error") {
    const auto p = dir.write("c.json", "{\"seed\": 3,");
    CHECK_THROWS_AS(load_config(p), ParseError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), ValidationError);
  }
  SUBCASE("unknown keys are named") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"controller": {"gamma": 1}})"),
                         doctest::Contains("controller.gamma"), ValidationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_config(dir.path / "absent.json"), ValidationError);
  }
  SUBCASE("type mismatch") {
    CHECK_THROWS_AS(parse_config(R"({"seed": "seven"})"), ValidationError);
  }
}

TEST_CASE("config serialization round-trips") {
  RunConfig c = parse_config(R"({
    "seed": 99, "finger_count": 3, "object": "tuna_can",
    "controller": {"s_slip": 0.3, "beta": 0.001},
    "classifier": {"tau_h": 8, "tau_f": 5},
    "disturbances": [{"start_s": 1, "end_s": 2, "force": [0.5, -1]}]
  })");
  const std::string text = config_to_json(c);
  const RunConfig back = parse_config(text);
  CHECK(config_to_json(back) == text);
  CHECK(back.seed == 99);
  CHECK(back.object == ObjectId::TunaCan);
  CHECK(back.classifier.features.tau_h == 8);
  REQUIRE(back.disturbances.entries.size() == 1);
  CHECK(back.disturbances.entries[0].start_tick == 1000);
  CHECK(back.disturbances.entries[0].force == Vec2(0.5, -1));
}

TEST_CASE("disturbances outside the run are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"disturbances": [{"start_s": 20, "end_s": 40, "force": [0, 1]}]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"disturbances": [{"start_s": 5, "end_s": 2, "force": [0, 1]}]})"),
                  ValidationError);
  CHECK(parse_config(R"({"disturbances": "none"})").disturbances.entries.empty());
}

namespace {

DatasetRecord random_record(Rng& rng, std::int64_t t) {
  DatasetRecord r;
  r.frame = test::frame(rng.coin() ? SensorKind::BioTac : SensorKind::BioTacSP, t,
                        static_cast<int>(rng.uniform(0, 5)), 0.0);
  r.frame.p_dc = rng.normal(40, 30);
  for (auto& s : r.frame.p_ac) s = rng.normal(0, 1);
  for (auto& e : r.frame.electrodes) e = rng.normal(3000, 40);
  r.frame.t_dc = rng.normal(2500, 1);
  r.frame.t_ac = rng.normal(0, 1) * 1e-7;
  r.gt_contact = rng.coin();
  r.gt_slip = r.gt_contact && rng.coin();
  r.auto_label = label_at(static_cast<int>(rng.uniform(0, 3)));
  r.pos = Vec2(rng.normal(0, 0.01), rng.normal(0, 0.01));
  return r;
}

}  // namespace

TEST_CASE("write_jsonl_frame") {
  DatasetRecord r;
  r.frame = test::frame(SensorKind::BioTac, 3, 1, 50.0);
  const std::string line = write_jsonl_frame(r);
  CHECK(line.find("\"p_dc\":50.0") != std::string::npos);
  CHECK(line.find('\n') == std::string::npos);
  for (const char* key : {"\"t\":", "\"finger\":", "\"variant\":", "\"p_ac\":", "\"electrodes\":",
                          "\"t_dc\":", "\"t_ac\":", "\"gt_contact\":", "\"gt_slip\":",
                          "\"auto_label\":", "\"pos\":"})
    CHECK(line.find(key) != std::string::npos);
}

TEST_CASE("jsonl round-trip is exact") {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const DatasetRecord r = random_record(rng, i);
    CHECK(read_jsonl_frame(write_jsonl_frame(r)) == r);
  }
}

TEST_CASE("a 1000-frame batch keeps its order") {
  test::TempDir dir;
  Rng rng(4);
  std::vector<DatasetRecord> records;
  for (int i = 0; i < 1000; ++i) records.push_back(random_record(rng, i));
  write_jsonl(dir.path / "s.jsonl", records);
  std::ifstream in(dir.path / "s.jsonl");
  int lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 1000);
  CHECK(read_jsonl(dir.path / "s.jsonl") == records);
}

TEST_CASE("corrupt dataset lines are parse errors") {
  CHECK_THROWS_AS(read_jsonl_frame("{\"t\": 1"), ParseError);
  CHECK_THROWS_AS(read_jsonl_frame(R"({"t": 1})"), ParseError);
  DatasetRecord r;
  r.frame = test::frame(SensorKind::BioTac, 0, 0, 1.0);
  std::string line = write_jsonl_frame(r);
  line.replace(line.find("\"no_contact\""), 12, "\"wobble\"");
  CHECK_THROWS(read_jsonl_frame(line));
}
