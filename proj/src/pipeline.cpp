#include "mutinv/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mutinv {

namespace {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Unexercised: return "unexercised";
    case Verdict::Equivalent: return "equivalent";
    case Verdict::Distinct: return "distinct";
  }
  return "?";
}

Trace run_closed_loop(const Program& controller, const PlantConfig& cfg,
                      const PlantState& init, double duration_s,
                      std::uint64_t seed, const std::string& label,
                      int initial_state_id) {
  const double dt = cfg.dt_s;
  const double ticks_real = duration_s / dt;
  const long ticks = std::lround(ticks_real);
  if (duration_s <= 0.0 || std::fabs(ticks_real - ticks) > 1e-9)
    throw std::invalid_argument(
        "duration must be a positive multiple of the timestep");

  Trace t;
  t.label = label;
  t.initial_state_id = initial_state_id;
  t.duration_s = duration_s;
  t.seed = seed;
  t.frames.reserve(static_cast<std::size_t>(ticks) + 1);

  SeededRng rng(seed);
  PlantState state = init;
  ActuatorState act;  // everything off until the controller says otherwise

  const auto sensor_names = cfg.sensor_names();
  const auto actuator_names = cfg.actuator_names();

  SensorFrame frame = read_sensors(state, cfg, rng);
  t.frames.push_back(frame);

  for (long tick = 0; tick < ticks; ++tick) {
    std::map<std::string, double> sensors;
    for (std::size_t i = 0; i < sensor_names.size(); ++i)
      sensors[sensor_names[i]] = frame.levels_mm[i];
    std::map<std::string, double> act_env;
    for (const auto& name : actuator_names)
      act_env[name] = act.is_on(name) ? 1.0 : 0.0;

    EvalResult cycle;
    try {
      cycle = evaluate(controller, sensors, act_env);
    } catch (const EvalError& e) {
      throw EvalError(e.node_id, std::string(e.what()) + " (at tick " +
                                     std::to_string(tick) + ")");
    }
    t.coverage.insert(cycle.coverage.begin(), cycle.coverage.end());
    for (const auto& name : actuator_names)
      act.on[name] = cycle.values.at(name) != 0.0;

    state = step(state, act, cfg);
    frame = read_sensors(state, cfg, rng);
    t.frames.push_back(frame);
  }
  return t;
}

double max_deviation(const Trace& a, const Trace& b) {
  if (a.frames.size() != b.frames.size())
    throw std::invalid_argument("traces are not frame-aligned");
  double dev = 0.0;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    const auto& fa = a.frames[i].levels_mm;
    const auto& fb = b.frames[i].levels_mm;
    for (std::size_t k = 0; k < fa.size(); ++k)
      dev = std::max(dev, std::fabs(fa[k] - fb[k]));
  }
  return dev;
}

ScreenVerdict screen(const Mutant& mutant,
                     const std::vector<Trace>& mutant_traces,
                     const std::vector<Trace>& positive_traces,
                     double epsilon_mm) {
  ScreenVerdict v;
  v.mutant_id = mutant.id;

  for (const Trace& mt : mutant_traces)
    if (mt.coverage.count(mutant.node_id)) v.coverage_hit = true;

  for (const Trace& mt : mutant_traces) {
    const Trace* paired = nullptr;
    for (const Trace& pt : positive_traces)
      if (pt.initial_state_id == mt.initial_state_id) paired = &pt;
    if (!paired)
      throw std::invalid_argument("unpaired initial state " +
                                  std::to_string(mt.initial_state_id));
    v.max_deviation_mm = std::max(v.max_deviation_mm, max_deviation(mt, *paired));
  }

  if (!v.coverage_hit)
    v.verdict = Verdict::Unexercised;
  else if (v.max_deviation_mm <= epsilon_mm)
    v.verdict = Verdict::Equivalent;
  else
    v.verdict = Verdict::Distinct;
  return v;
}

std::vector<FeatureVector> extract_features(const Trace& t, int stride_ticks) {
  if (t.frames.size() < 2)
    throw std::invalid_argument("trace needs at least 2 frames");
  if (stride_ticks < 1) throw std::invalid_argument("stride must be >= 1");

  const int label = t.label == "positive" ? +1 : -1;
  std::vector<FeatureVector> out;
  for (std::size_t i = 0; i + 1 < t.frames.size();
       i += static_cast<std::size_t>(stride_ticks)) {
    FeatureVector fv;
    fv.label = label;
    const auto& now = t.frames[i].levels_mm;
    const auto& next = t.frames[i + 1].levels_mm;  // exactly one tick later
    fv.x.insert(fv.x.end(), now.begin(), now.end());
    fv.x.insert(fv.x.end(), next.begin(), next.end());
    out.push_back(std::move(fv));
  }
  return out;
}

void write_trace_csv(const Trace& t, const PlantConfig& cfg,
                     const std::string& path, const std::string& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "t";
  for (const auto& s : cfg.sensor_names()) out << "," << s;
  out << "\n";
  for (const auto& f : t.frames) {
    out << format_double(f.timestamp_s);
    for (double v : f.levels_mm) out << "," << format_double(v);
    out << "\n";
  }

  nlohmann::json side;
  side["label"] = t.label;
  side["initial_state_id"] = t.initial_state_id;
  side["duration_s"] = t.duration_s;
  side["seed"] = t.seed;
  side["coverage"] = std::vector<int>(t.coverage.begin(), t.coverage.end());
  side["config_hash"] = config_hash;
  std::ofstream sout(path + ".json", std::ios::binary);
  sout << side.dump(2) << "\n";
}

Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  Trace t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    SensorFrame f;
    std::istringstream row(line);
    std::string cell;
    bool first = true;
    while (std::getline(row, cell, ',')) {
      const double v = std::strtod(cell.c_str(), nullptr);
      if (first) {
        f.timestamp_s = v;
        first = false;
      } else {
        f.levels_mm.push_back(v);
      }
    }
    t.frames.push_back(std::move(f));
  }

  std::ifstream sin(path + ".json");
  if (sin) {
    nlohmann::json side;
    sin >> side;
    t.label = side.value("label", std::string("positive"));
    t.initial_state_id = side.value("initial_state_id", 0);
    t.duration_s = side.value("duration_s", 0.0);
    t.seed = side.value("seed", std::uint64_t{0});
    for (int id : side.value("coverage", std::vector<int>{}))
      t.coverage.insert(id);
  }
  return t;
}

std::string trace_sidecar_config_hash(const std::string& path) {
  std::ifstream sin(path + ".json");
  if (!sin) throw std::runtime_error("missing trace sidecar: " + path + ".json");
  nlohmann::json side;
  sin >> side;
  return side.value("config_hash", std::string());
}

void write_feature_csv(const std::vector<FeatureVector>& rows,
                       const std::vector<std::string>& names,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write feature file: " + path);
  for (const auto& n : names) out << n << ",";
  out << "label\n";
  for (const auto& r : rows) {
    for (double v : r.x) out << format_double(v) << ",";
    out << r.label << "\n";
  }
}

}  // namespace mutinv
