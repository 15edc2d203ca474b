#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mutinv/plant.hpp"

using namespace mutinv;

namespace {

PlantConfig single_tank(double inflow = 2.0, double drain = 0.0) {
  PlantConfig cfg;
  cfg.dt_s = 0.25;
  TankSpec t;
  t.id = "T1";
  t.capacity_mm = 1000.0;
  t.inflow_rate_mm_per_s = inflow;
  t.drain_rate_mm_per_s = drain;
  t.initial_level_mm = 500.0;
  t.level_sensor = "L1";
  t.inlet_pump = "P1";
  t.drain_valve = "D1";
  cfg.tanks.push_back(t);
  return cfg;
}

PlantConfig default_plant() {
  return PlantConfig::load_file(std::string(MUTINV_CONFIG_DIR) +
                                "/default_plant.json");
}

}  // namespace

TEST_CASE("make_plant initializes levels and clock") {
  const PlantConfig cfg = default_plant();
  const PlantState s = make_plant(cfg);
  REQUIRE(s.levels_mm.size() == 5);
  for (double level : s.levels_mm) CHECK(level == 500.0);
  CHECK(s.clock_s == 0.0);
}

TEST_CASE("make_plant rejects cyclic topology") {
  PlantConfig cfg = default_plant();
  cfg.links.push_back({"T2", "T1", 1.0, "VX"});
  CHECK_THROWS_WITH_AS(make_plant(cfg), "cyclic topology",
                       std::invalid_argument);
}

TEST_CASE("make_plant rejects non-positive timestep") {
  PlantConfig cfg = single_tank();
  cfg.dt_s = 0.0;
  CHECK_THROWS_WITH_AS(make_plant(cfg), "non-positive timestep",
                       std::invalid_argument);
}

TEST_CASE("make_plant rejects negative rates and bad initial levels") {
  PlantConfig cfg = single_tank();
  cfg.tanks[0].drain_rate_mm_per_s = -1.0;
  CHECK_THROWS_AS(make_plant(cfg), std::invalid_argument);
  cfg = single_tank();
  cfg.tanks[0].initial_level_mm = 1500.0;
  CHECK_THROWS_AS(make_plant(cfg), std::invalid_argument);
}

TEST_CASE("step: hand Euler update with pump on") {
  const PlantConfig cfg = single_tank(2.0);
  PlantState s = make_plant(cfg);
  ActuatorState act;
  act.on["P1"] = true;
  s = step(s, act, cfg);
  CHECK(s.levels_mm[0] == doctest::Approx(500.5).epsilon(1e-12));
  CHECK(s.clock_s == 0.25);
}

TEST_CASE("step: all actuators off leaves levels unchanged") {
  const PlantConfig cfg = default_plant();
  PlantState s = make_plant(cfg);
  const PlantState next = step(s, ActuatorState{}, cfg);
  CHECK(next.levels_mm == s.levels_mm);
  CHECK(next.clock_s == 0.25);
}

TEST_CASE("step: clamps at capacity") {
  const PlantConfig cfg = single_tank(2.0);
  PlantState s = make_plant(cfg);
  s.levels_mm[0] = 999.9;  // 999.9 + 0.5 would exceed 1000
  ActuatorState act;
  act.on["P1"] = true;
  s = step(s, act, cfg);
  CHECK(s.levels_mm[0] == 1000.0);
}

TEST_CASE("step: a link transfers only what the source holds") {
  PlantConfig cfg;
  cfg.dt_s = 1.0;
  for (int i = 1; i <= 2; ++i) {
    TankSpec t;
    t.id = "T" + std::to_string(i);
    t.capacity_mm = 1000.0;
    t.initial_level_mm = i == 1 ? 3.0 : 0.0;
    t.level_sensor = "L" + std::to_string(i);
    cfg.tanks.push_back(t);
  }
  cfg.links.push_back({"T1", "T2", 10.0, "V12"});
  PlantState s = make_plant(cfg);
  ActuatorState act;
  act.on["V12"] = true;
  s = step(s, act, cfg);
  CHECK(s.levels_mm[0] == doctest::Approx(0.0));
  CHECK(s.levels_mm[1] == doctest::Approx(3.0));  // received only what existed
}

TEST_CASE("read_sensors: zero noise is exact and deterministic") {
  const PlantConfig cfg = default_plant();
  const PlantState s = make_plant(cfg);
  SeededRng r1(7), r2(7);
  const SensorFrame f1 = read_sensors(s, cfg, r1);
  const SensorFrame f2 = read_sensors(s, cfg, r2);
  CHECK(f1.levels_mm == s.levels_mm);
  CHECK(f1.levels_mm == f2.levels_mm);
}

TEST_CASE("read_sensors: noisy mean converges to the true level") {
  PlantConfig cfg = single_tank();
  cfg.noise_std_mm = 1.0;
  const PlantState s = make_plant(cfg);
  SeededRng rng(42);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += read_sensors(s, cfg, rng).levels_mm[0];
  CHECK(std::fabs(sum / n - 500.0) < 0.05);
}

TEST_CASE("mass conservation on random non-saturating steps") {
  const PlantConfig cfg = default_plant();
  SeededRng rng(99);
  const auto actuators = cfg.actuator_names();
  for (int trial = 0; trial < 10000; ++trial) {
    PlantState s = make_plant(cfg);
    for (auto& level : s.levels_mm) level = 100.0 + 1000.0 * rng.uniform();
    ActuatorState act;
    for (const auto& a : actuators) act.on[a] = rng.next_u64() & 1;

    double external = 0.0;  // net external mm/s while this actuation holds
    for (const auto& t : cfg.tanks) {
      if (!t.inlet_pump.empty() && act.is_on(t.inlet_pump))
        external += t.inflow_rate_mm_per_s;
      if (!t.drain_valve.empty() && act.is_on(t.drain_valve))
        external -= t.drain_rate_mm_per_s;
    }
    const PlantState next = step(s, act, cfg);
    // Levels in [100, 1100] with capacity 1200 and rates <= 8 mm/s over
    // 0.25 s never clamp or empty.
    const double before =
        std::accumulate(s.levels_mm.begin(), s.levels_mm.end(), 0.0);
    const double after =
        std::accumulate(next.levels_mm.begin(), next.levels_mm.end(), 0.0);
    REQUIRE(std::fabs((after - before) - cfg.dt_s * external) < 1e-9);
  }
}

TEST_CASE("boundedness after arbitrary step sequences") {
  const PlantConfig cfg = default_plant();
  SeededRng rng(123);
  const auto actuators = cfg.actuator_names();
  PlantState s = make_plant(cfg);
  for (int tick = 0; tick < 5000; ++tick) {
    ActuatorState act;
    for (const auto& a : actuators) act.on[a] = rng.next_u64() & 1;
    s = step(s, act, cfg);
    for (std::size_t i = 0; i < s.levels_mm.size(); ++i) {
      REQUIRE(s.levels_mm[i] >= 0.0);
      REQUIRE(s.levels_mm[i] <= cfg.tanks[i].capacity_mm);
    }
  }
}

TEST_CASE("single-step affinity: midpoint superposition") {
  const PlantConfig cfg = default_plant();
  SeededRng rng(7);
  const auto actuators = cfg.actuator_names();
  for (int trial = 0; trial < 200; ++trial) {
    PlantState a = make_plant(cfg), b = make_plant(cfg), mid = make_plant(cfg);
    for (std::size_t i = 0; i < a.levels_mm.size(); ++i) {
      a.levels_mm[i] = 200.0 + 800.0 * rng.uniform();
      b.levels_mm[i] = 200.0 + 800.0 * rng.uniform();
      mid.levels_mm[i] = 0.5 * (a.levels_mm[i] + b.levels_mm[i]);
    }
    ActuatorState act;
    for (const auto& name : actuators) act.on[name] = rng.next_u64() & 1;
    const PlantState fa = step(a, act, cfg);
    const PlantState fb = step(b, act, cfg);
    const PlantState fm = step(mid, act, cfg);
    for (std::size_t i = 0; i < fa.levels_mm.size(); ++i)
      REQUIRE(fm.levels_mm[i] ==
              doctest::Approx(0.5 * (fa.levels_mm[i] + fb.levels_mm[i]))
                  .epsilon(1e-12));
  }
}
