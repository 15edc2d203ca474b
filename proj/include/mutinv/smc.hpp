#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mutinv/learner.hpp"
#include "mutinv/pipeline.hpp"

namespace mutinv {

struct SatisfactionSample {
  std::string run_id;
  std::vector<bool> satisfied;  // one per feature vector, tick order
  double rate = 0.0;
};

SatisfactionSample check_invariant(const LinearInvariant& inv, const Trace& t);

struct SprtConfig {
  double theta = 0.98;  // claimed satisfaction probability
  double delta = 0.01;  // indifference half-width
  double alpha = 0.05;  // false-accept bound
  double beta = 0.05;   // false-reject bound
  std::uint64_t budget = 1000000;

  void check() const;  // throws on invalid parameters
};

enum class SprtDecision { AcceptH0, AcceptH1, Undecided };
const char* sprt_decision_name(SprtDecision d);

struct SprtVerdict {
  SprtDecision decision = SprtDecision::Undecided;
  std::uint64_t samples = 0;
  double log_ratio = 0.0;
};

// A source yields booleans on demand; nullopt means exhausted.
using SampleSource = std::function<std::optional<bool>()>;

// Wald's SPRT of H0: p >= theta+delta against H1: p <= theta-delta.
// Stops at the first boundary crossing; Undecided if the budget (or the
// source) runs out first.
SprtVerdict sprt(const SampleSource& source, const SprtConfig& cfg);

// n = ceil(ln(2/delta) / (2 epsilon^2)) per the Chernoff-Hoeffding bound.
std::uint64_t chernoff_sample_size(double epsilon, double delta);

struct ChernoffEstimate {
  double p_hat = 0.0;
  std::uint64_t n = 0;
};

ChernoffEstimate chernoff_estimate(const SampleSource& source, double epsilon,
                                   double delta);

// Fixed-order sample stream (run id, then tick) over per-vector booleans.
SampleSource make_vector_source(const std::vector<SatisfactionSample>& samples);
// Run-level stream: one boolean per run, true iff every vector satisfied.
SampleSource make_run_source(const std::vector<SatisfactionSample>& samples);

}  // namespace mutinv
