#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gripsim/controller.hpp"
#include "gripsim/physics.hpp"
#include "gripsim/rng.hpp"
#include "support.hpp"

using namespace gripsim;

namespace {

FingerControllerState at(double l, ControllerParams p = {}) {
  FingerControllerState s;
  s.params = p;
  s.l = l;
  return s;
}

}  // namespace

TEST_CASE("slip statistic update") {
  CHECK(update_statistic(at(0.0), Label::Slip).l == doctest::Approx(0.2));
  CHECK(update_statistic(at(0.0), Label::NoContact).l == 0.0);
  CHECK(update_statistic(at(1.3), Label::NoContact).l == 1.3);
  CHECK(update_statistic(at(0.0), Label::Contact).l == doctest::Approx(-0.02));
  CHECK(update_statistic(at(1.0), Label::Contact).l == doctest::Approx(0.98));
  CHECK(update_statistic(at(5.0), Label::Slip).l == 5.0);
  CHECK(update_statistic(at(4.9), Label::Slip).l == 5.0);
  CHECK(update_statistic(at(-5.0), Label::Contact).l == -5.0);
  ControllerParams custom;
  custom.l_min = -1;
  custom.l_max = 0.5;
  CHECK(update_statistic(at(0.4, custom), Label::Slip).l == 0.5);
  CHECK(update_statistic(at(-0.99, custom), Label::Contact).l == -1.0);
}

TEST_CASE("statistic stays inside the clamp on random label streams") {
  Rng rng(2);
  FingerControllerState s = at(0.0);
  for (int i = 0; i < 5000; ++i) {
    s = update_statistic(s, label_at(static_cast<int>(rng.uniform(0, 3))));
    CHECK(s.l >= s.params.l_min);
    CHECK(s.l <= s.params.l_max);
  }
}

TEST_CASE("command velocity") {
  ControllerParams p;
  p.beta = 0.001;
  const Vec2 n(0.6, -0.8);
  SUBCASE("l = 0 gives exactly beta") {
    const Vec2 v = command_velocity(at(0.0, p), n);
    CHECK(v.norm() == doctest::Approx(0.001).epsilon(1e-15));
    CHECK(v == 0.001 * n);
    CHECK(command_velocity(at(0.0), Vec2(1, 0)).norm() == ControllerParams{}.beta);
  }
  SUBCASE("l = l_min is tiny") {
    const double expected = p.beta * std::exp(p.alpha * p.l_min);
    CHECK(command_velocity(at(p.l_min, p), n).norm() == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected < 0.01 * p.beta);
  }
  SUBCASE("alpha 2, l 0.5 gives beta * e") {
    ControllerParams q = p;
    q.alpha = 2.0;
    CHECK(command_velocity(at(0.5, q), n).norm() ==
          doctest::Approx(std::numbers::e * q.beta).epsilon(1e-14));
  }
  SUBCASE("l_max does not overflow") {
    const Vec2 v = command_velocity(at(p.l_max, p), n);
    CHECK(v.allFinite());
    CHECK(v.norm() == doctest::Approx(p.beta * std::exp(5.0)));
  }
  SUBCASE("magnitude grows with l") {
    double previous = 0;
    for (double l = -5; l <= 5; l += 0.01) {
      const double speed = command_velocity(at(l, p), n).norm();
      CHECK(speed > previous);
      previous = speed;
    }
  }
  SUBCASE("non-unit normals are rejected") {
    CHECK_THROWS_AS(command_velocity(at(0.0, p), Vec2(1.0, 0.01)), ValidationError);
    CHECK_THROWS_AS(command_velocity(at(0.0, p), Vec2::Zero()), ValidationError);
    CHECK_NOTHROW(command_velocity(at(0.0, p), Vec2(1.0 + 1e-7, 0.0)));
  }
}

TEST_CASE("speed is monotone under uniform predictions") {
  const Vec2 n(1, 0);
  FingerControllerState s = at(-3.0);
  double previous = command_velocity(s, n).norm();
  for (int i = 0; i < 100; ++i) {
    s = update_statistic(s, Label::Slip);
    const double speed = command_velocity(s, n).norm();
    CHECK(speed >= previous);
    previous = speed;
  }
  for (int i = 0; i < 1000; ++i) {
    s = update_statistic(s, Label::Contact);
    const double speed = command_velocity(s, n).norm();
    CHECK(speed <= previous);
    previous = speed;
  }
}

TEST_CASE("controller parameter validation") {
  ControllerParams p;
  CHECK_NOTHROW(validate(p));
  p.s_slip = 0;
  CHECK_THROWS_AS(validate(p), ValidationError);
  p = {};
  p.alpha = -1;
  CHECK_THROWS_AS(validate(p), ValidationError);
  p = {};
  p.l_min = 0.5;
  CHECK_THROWS_AS(validate(p), ValidationError);
}

TEST_CASE("statistic steps scale with the frame rate") {
  const ControllerParams base;
  const auto bt = rate_scaled(base, SensorKind::BioTac);
  CHECK(bt.s_slip == base.s_slip);
  CHECK(bt.s_not_slip == base.s_not_slip);
  const auto sp = rate_scaled(base, SensorKind::BioTacSP);
  CHECK(sp.s_slip == doctest::Approx(base.s_slip / 10));
  CHECK(sp.s_not_slip == doctest::Approx(base.s_not_slip / 10));
  CHECK(sp.beta == base.beta);
}

TEST_CASE("contact normal estimation") {
  NormalContext ctx;
  SUBCASE("geometric passthrough") {
    ctx.geometric_normal = Vec2(-1, 0);
    CHECK(estimate_contact_normal(ctx) == Vec2(-1, 0));
  }
  SUBCASE("never contacted falls back to the approach direction") {
    ctx.approach_direction = Vec2(0, 2);
    CHECK(estimate_contact_normal(ctx) == Vec2(0, 1));
    CHECK(estimate_contact_normal(ctx, NormalEstimator::ElectrodeCentroid) == Vec2(0, 1));
  }
  SUBCASE("always unit length") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const double a = rng.uniform(0, 2 * std::numbers::pi);
      ctx.geometric_normal = rng.uniform(0.1, 3) * Vec2(std::cos(a), std::sin(a));
      CHECK(std::abs(estimate_contact_normal(ctx).norm() - 1.0) < 1e-9);
      auto f = test::frame(SensorKind::BioTac, 0, 0, 20.0);
      for (auto& e : f.electrodes) e = rng.uniform(0, 5);
      NormalContext ec;
      ec.approach_direction = Vec2(std::cos(a), std::sin(a));
      ec.grounded_frame = &f;
      CHECK(std::abs(estimate_contact_normal(ec, NormalEstimator::ElectrodeCentroid).norm() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("pressure PID") {
  SUBCASE("zero error leaves only the integral term") {
    PressurePid pid;
    pid.update(40.0, 50.0, 0.01);
    const double integral = pid.integral_term();
    CHECK(integral != 0.0);
    PressurePid copy = pid;
    copy.update(50.0, 50.0, 0.01);
    const double out = pid_pressure_regulate(pid, 50.0, 50.0, 0.01);
    CHECK(out == doctest::Approx(pid.integral_term()));
    CHECK(pid.integral_term() == doctest::Approx(integral));
  }
  SUBCASE("low pressure pushes toward contact") {
    PressurePid pid;
    CHECK(pid_pressure_regulate(pid, 20.0, 50.0, 0.01) > 0.0);
    PressurePid other;
    CHECK(pid_pressure_regulate(other, 80.0, 50.0, 0.01) < 0.0);
  }
  SUBCASE("integral is bounded") {
    PidGains g;
    g.kp = 0;
    PressurePid pid(g);
    for (int i = 0; i < 100000; ++i) pid.update(0.0, 80.0, 0.01);
    CHECK(pid.integral_term() == doctest::Approx(g.ki * g.integral_limit));
    CHECK(std::abs(pid.update(0.0, 80.0, 0.01)) <= g.output_limit);
  }
  SUBCASE("bad input") {
    PressurePid pid;
    CHECK_THROWS_AS(pid.update(10.0, 0.0, 0.01), ValidationError);
    PidGains g;
    g.kp = -1;
    CHECK_THROWS_AS(PressurePid{g}, ValidationError);
  }
}

TEST_CASE("PID step response on the simulated finger settles to 50 within 2 s") {
  PhysicsParams pp;
  SensorParams sp;
  const auto layout = grip_layout(1);
  World w = make_world(object_spec(ObjectId::Ball), layout, pp, true);
  set_normal_force(w, 0, 0.05);
  Rng unit_rng(5), noise(6);
  const SensorUnit unit = make_sensor_unit(SensorKind::BioTac, 0, sp, unit_rng);
  ContactState free;
  const Grounding g = grounding_from(synth_frame(free, false, unit, sp, noise, -1));
  PressurePid pid;
  const double dt = 0.001, frame = 0.01;
  const int ticks_per_frame = static_cast<int>(frame / dt);
  std::vector<ContactState> contacts = evaluate_contacts(w, Vec2::Zero());
  std::vector<double> late;
  for (int k = 0; k < 200; ++k) {
    const SensorFrame f = ground(synth_frame(contacts[0], true, unit, sp, noise, k), g);
    if (k >= 180) late.push_back(f.p_dc);
    const std::vector<FingerCommand> cmd{{pid.update(f.p_dc, 50.0, frame), 0.0}};
    for (int s = 0; s < ticks_per_frame; ++s) {
      auto out = step(w, cmd, Vec2::Zero(), dt);
      w = out.world;
      contacts = out.contacts;
    }
  }
  double mean = 0;
  for (double x : late) mean += x / late.size();
  CHECK(mean == doctest::Approx(50.0).epsilon(2.0 / 50));
}

TEST_CASE("a finger controller only accepts its own frames") {
  FeatureParams fp;
  Grounding g{0.0, std::vector<double>(19, 0.0)};
  FingerController c(1, ControllerParams{}, fp, g);
  CHECK(c.finger_id() == 1);
  CHECK_THROWS_AS(c.observe(test::frame(SensorKind::BioTac, 0, 0, 20.0)), ValidationError);
  CHECK(c.frames_consumed() == 0);

  const SlipModel& model = test::quick_model(SensorKind::BioTac);
  for (int i = 0; i < fp.tau_h - 1; ++i) {
    c.observe(test::frame(SensorKind::BioTac, i, 1, 30.0));
    CHECK_FALSE(c.update(model).has_value());
    CHECK(c.state().l == 0.0);
  }
  c.observe(test::frame(SensorKind::BioTac, fp.tau_h - 1, 1, 30.0));
  const auto label = c.update(model);
  REQUIRE(label.has_value());
  CHECK(c.last_label() == label);
  CHECK(c.frames_consumed() == fp.tau_h);
  CHECK(c.command_speed(Vec2(1, 0)) == doctest::Approx(0.002 * std::exp(c.state().l)));
}
