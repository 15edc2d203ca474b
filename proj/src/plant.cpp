#include "mutinv/plant.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mutinv {

int PlantConfig::tank_index(const std::string& id) const {
  for (std::size_t i = 0; i < tanks.size(); ++i)
    if (tanks[i].id == id) return static_cast<int>(i);
  return -1;
}

void PlantConfig::check() const {
  if (dt_s <= 0.0) throw std::invalid_argument("non-positive timestep");
  if (noise_std_mm < 0.0) throw std::invalid_argument("negative noise std");
  if (tanks.empty()) throw std::invalid_argument("no tanks configured");

  std::set<std::string> ids;
  for (const auto& t : tanks) {
    if (t.id.empty()) throw std::invalid_argument("tank with empty id");
    if (!ids.insert(t.id).second)
      throw std::invalid_argument("duplicate tank id: " + t.id);
    if (t.capacity_mm <= 0.0)
      throw std::invalid_argument("non-positive capacity for tank " + t.id);
    if (t.inflow_rate_mm_per_s < 0.0 || t.drain_rate_mm_per_s < 0.0)
      throw std::invalid_argument("negative rate for tank " + t.id);
    if (t.initial_level_mm < 0.0 || t.initial_level_mm > t.capacity_mm)
      throw std::invalid_argument("initial level outside [0, capacity] for tank " +
                                  t.id);
    if (t.level_sensor.empty())
      throw std::invalid_argument("tank " + t.id + " has no level sensor name");
  }

  std::vector<int> indegree(tanks.size(), 0);
  std::vector<std::vector<int>> adj(tanks.size());
  for (const auto& l : links) {
    const int a = tank_index(l.from);
    const int b = tank_index(l.to);
    if (a < 0 || b < 0)
      throw std::invalid_argument("link references unknown tank: " + l.from +
                                  "->" + l.to);
    if (l.transfer_rate_mm_per_s < 0.0)
      throw std::invalid_argument("negative transfer rate on link " + l.from +
                                  "->" + l.to);
    adj[a].push_back(b);
    ++indegree[b];
  }
  // Kahn's algorithm; leftover nodes mean a cycle.
  std::queue<int> q;
  for (std::size_t i = 0; i < tanks.size(); ++i)
    if (indegree[i] == 0) q.push(static_cast<int>(i));
  std::size_t seen = 0;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    ++seen;
    for (int w : adj[v])
      if (--indegree[w] == 0) q.push(w);
  }
  if (seen != tanks.size()) throw std::invalid_argument("cyclic topology");
}

std::vector<std::string> PlantConfig::sensor_names() const {
  std::vector<std::string> out;
  for (const auto& t : tanks) out.push_back(t.level_sensor);
  return out;
}

std::vector<std::string> PlantConfig::actuator_names() const {
  std::vector<std::string> out;
  for (const auto& t : tanks) {
    if (!t.inlet_pump.empty()) out.push_back(t.inlet_pump);
    if (!t.drain_valve.empty()) out.push_back(t.drain_valve);
  }
  for (const auto& l : links)
    if (!l.valve.empty()) out.push_back(l.valve);
  return out;
}

PlantConfig PlantConfig::from_json(const nlohmann::json& j) {
  PlantConfig cfg;
  cfg.dt_s = j.at("dt_s").get<double>();
  cfg.noise_std_mm = j.value("noise_std_mm", 0.0);
  for (const auto& jt : j.at("tanks")) {
    TankSpec t;
    t.id = jt.at("id").get<std::string>();
    t.capacity_mm = jt.at("capacity_mm").get<double>();
    t.inflow_rate_mm_per_s = jt.value("inflow_rate_mm_per_s", 0.0);
    t.drain_rate_mm_per_s = jt.value("drain_rate_mm_per_s", 0.0);
    t.initial_level_mm = jt.at("initial_level_mm").get<double>();
    t.level_sensor = jt.at("level_sensor").get<std::string>();
    t.inlet_pump = jt.value("inlet_pump", std::string());
    t.drain_valve = jt.value("drain_valve", std::string());
    cfg.tanks.push_back(std::move(t));
  }
  if (j.contains("links")) {
    for (const auto& jl : j.at("links")) {
      LinkSpec l;
      l.from = jl.at("from").get<std::string>();
      l.to = jl.at("to").get<std::string>();
      l.transfer_rate_mm_per_s = jl.at("transfer_rate_mm_per_s").get<double>();
      l.valve = jl.value("valve", std::string());
      cfg.links.push_back(std::move(l));
    }
  }
  cfg.check();
  return cfg;
}

nlohmann::json PlantConfig::to_json() const {
  nlohmann::json j;
  j["dt_s"] = dt_s;
  j["noise_std_mm"] = noise_std_mm;
  j["tanks"] = nlohmann::json::array();
  for (const auto& t : tanks) {
    nlohmann::json jt;
    jt["id"] = t.id;
    jt["capacity_mm"] = t.capacity_mm;
    jt["inflow_rate_mm_per_s"] = t.inflow_rate_mm_per_s;
    jt["drain_rate_mm_per_s"] = t.drain_rate_mm_per_s;
    jt["initial_level_mm"] = t.initial_level_mm;
    jt["level_sensor"] = t.level_sensor;
    if (!t.inlet_pump.empty()) jt["inlet_pump"] = t.inlet_pump;
    if (!t.drain_valve.empty()) jt["drain_valve"] = t.drain_valve;
    j["tanks"].push_back(std::move(jt));
  }
  j["links"] = nlohmann::json::array();
  for (const auto& l : links) {
    nlohmann::json jl;
    jl["from"] = l.from;
    jl["to"] = l.to;
    jl["transfer_rate_mm_per_s"] = l.transfer_rate_mm_per_s;
    if (!l.valve.empty()) jl["valve"] = l.valve;
    j["links"].push_back(std::move(jl));
  }
  return j;
}

PlantConfig PlantConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open plant config: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

PlantState make_plant(const PlantConfig& config) {
  config.check();
  PlantState s;
  s.clock_s = 0.0;
  for (const auto& t : config.tanks) s.levels_mm.push_back(t.initial_level_mm);
  return s;
}

PlantState step(const PlantState& state, const ActuatorState& act,
                const PlantConfig& config) {
  const std::size_t n = config.tanks.size();
  if (state.levels_mm.size() != n)
    throw std::invalid_argument("state/config tank count mismatch");
  const double dt = config.dt_s;

  // Requested outflow per tank (links with open valves plus open drain),
  // then a per-tank scale so no tank sends more than it holds.
  std::vector<double> out_req(n, 0.0);
  for (const auto& l : config.links) {
    if (!l.valve.empty() && !act.is_on(l.valve)) continue;
    if (l.valve.empty()) continue;  // unvalved links are not modeled as open
    out_req[config.tank_index(l.from)] += l.transfer_rate_mm_per_s;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = config.tanks[i];
    if (!t.drain_valve.empty() && act.is_on(t.drain_valve))
      out_req[i] += t.drain_rate_mm_per_s;
  }
  std::vector<double> scale(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double vol = out_req[i] * dt;
    if (vol > state.levels_mm[i])
      scale[i] = vol > 0.0 ? state.levels_mm[i] / vol : 1.0;
  }

  std::vector<double> delta(n, 0.0);  // mm/s net rate per tank
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = config.tanks[i];
    if (!t.inlet_pump.empty() && act.is_on(t.inlet_pump))
      delta[i] += t.inflow_rate_mm_per_s;
    if (!t.drain_valve.empty() && act.is_on(t.drain_valve))
      delta[i] -= t.drain_rate_mm_per_s * scale[i];
  }
  for (const auto& l : config.links) {
    if (l.valve.empty() || !act.is_on(l.valve)) continue;
    const int a = config.tank_index(l.from);
    const int b = config.tank_index(l.to);
    const double flow = l.transfer_rate_mm_per_s * scale[a];
    delta[a] -= flow;
    delta[b] += flow;
  }

  PlantState next;
  next.clock_s = state.clock_s + dt;
  next.levels_mm.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = state.levels_mm[i] + dt * delta[i];
    next.levels_mm[i] = std::clamp(raw, 0.0, config.tanks[i].capacity_mm);
  }
  return next;
}

SensorFrame read_sensors(const PlantState& state, const PlantConfig& config,
                         SeededRng& rng) {
  SensorFrame f;
  f.timestamp_s = state.clock_s;
  f.levels_mm.reserve(state.levels_mm.size());
  for (double level : state.levels_mm) {
    double reading = level;
    if (config.noise_std_mm > 0.0)
      reading += rng.gaussian(0.0, config.noise_std_mm);
    f.levels_mm.push_back(reading);
  }
  return f;
}

}  // namespace mutinv
