#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mutinv/dsl.hpp"
#include "mutinv/mutation.hpp"
#include "mutinv/plant.hpp"

namespace mutinv {

struct Trace {
  std::string label;  // "positive" or a mutant id
  int initial_state_id = 0;
  std::vector<SensorFrame> frames;  // one per tick, dt apart
  CoverageSet coverage;             // union over all scan cycles
  double duration_s = 0.0;
  std::uint64_t seed = 0;
};

// Closed loop: sensors -> one scan cycle -> plant step, repeated.
// frames.size() == duration_s/dt + 1.  A DSL runtime error aborts the run;
// the rethrown error message names the offending tick.
Trace run_closed_loop(const Program& controller, const PlantConfig& cfg,
                      const PlantState& init, double duration_s,
                      std::uint64_t seed, const std::string& label,
                      int initial_state_id);

enum class Verdict { Unexercised, Equivalent, Distinct };
const char* verdict_name(Verdict v);

struct ScreenVerdict {
  std::string mutant_id;
  Verdict verdict{};
  double max_deviation_mm = 0.0;
  bool coverage_hit = false;
};

// Pairs traces by initial-state id. Unexercised: the mutated node is absent
// from every run's coverage. Equivalent: covered but every paired deviation
// stays within epsilon_mm. Distinct otherwise.
ScreenVerdict screen(const Mutant& mutant,
                     const std::vector<Trace>& mutant_traces,
                     const std::vector<Trace>& positive_traces,
                     double epsilon_mm);

// Max over ticks and tanks of |a - b|; traces must be frame-aligned.
double max_deviation(const Trace& a, const Trace& b);

struct FeatureVector {
  std::vector<double> x;  // v1..v5 at t, then the same levels one tick later
  int label = 0;          // +1 positive, -1 mutant
};

std::vector<FeatureVector> extract_features(const Trace& t, int stride_ticks);

// CSV with header "t,L1,...,L5" plus a JSON sidecar (label, seed, coverage,
// config hash) at path + ".json".
void write_trace_csv(const Trace& t, const PlantConfig& cfg,
                     const std::string& path, const std::string& config_hash);
Trace read_trace_csv(const std::string& path);
std::string trace_sidecar_config_hash(const std::string& path);

void write_feature_csv(const std::vector<FeatureVector>& rows,
                       const std::vector<std::string>& names,
                       const std::string& path);

}  // namespace mutinv
