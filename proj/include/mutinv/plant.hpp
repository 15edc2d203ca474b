#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mutinv/rng.hpp"

namespace mutinv {

struct TankSpec {
  std::string id;
  double capacity_mm = 0.0;
  double inflow_rate_mm_per_s = 0.0;  // applied while the inlet pump is on
  double drain_rate_mm_per_s = 0.0;   // applied while the drain is open
  double initial_level_mm = 0.0;
  std::string level_sensor;  // e.g. "L1"
  std::string inlet_pump;    // actuator name, empty if the tank has no pump
  std::string drain_valve;   // actuator name, empty if the tank has no drain
};

struct LinkSpec {
  std::string from;
  std::string to;
  double transfer_rate_mm_per_s = 0.0;
  std::string valve;  // actuator name gating the link
};

struct PlantConfig {
  std::vector<TankSpec> tanks;
  std::vector<LinkSpec> links;
  double dt_s = 0.25;
  double noise_std_mm = 0.0;

  int tank_index(const std::string& id) const;

  // Throws std::invalid_argument on any invariant violation (cyclic
  // topology, non-positive timestep, negative rates, bad initial levels).
  void check() const;

  std::vector<std::string> sensor_names() const;
  std::vector<std::string> actuator_names() const;

  static PlantConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static PlantConfig load_file(const std::string& path);
};

struct PlantState {
  std::vector<double> levels_mm;
  double clock_s = 0.0;
};

// Actuator name -> on/off. Names absent from the map are treated as off.
struct ActuatorState {
  std::map<std::string, bool> on;

  bool is_on(const std::string& name) const {
    auto it = on.find(name);
    return it != on.end() && it->second;
  }
};

struct SensorFrame {
  double timestamp_s = 0.0;
  std::vector<double> levels_mm;
};

PlantState make_plant(const PlantConfig& config);

// One explicit-Euler mass-balance step. A tank never sends more volume than
// it holds, and levels are clamped to [0, capacity] after the update.
PlantState step(const PlantState& state, const ActuatorState& act,
                const PlantConfig& config);

SensorFrame read_sensors(const PlantState& state, const PlantConfig& config,
                         SeededRng& rng);

}  // namespace mutinv
