#include "mutinv/smc.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace mutinv {

SatisfactionSample check_invariant(const LinearInvariant& inv, const Trace& t) {
  SatisfactionSample s;
  s.run_id = t.label + "/" + std::to_string(t.initial_state_id);
  const auto vectors = extract_features(t, 1);
  s.satisfied.reserve(vectors.size());
  std::size_t hits = 0;
  for (const auto& fv : vectors) {
    const bool ok = inv.satisfied(fv.x);
    s.satisfied.push_back(ok);
    if (ok) ++hits;
  }
  s.rate = static_cast<double>(hits) / static_cast<double>(vectors.size());
  return s;
}

void SprtConfig::check() const {
  if (!(theta - delta > 0.0) || !(theta + delta < 1.0) || !(delta > 0.0))
    throw std::invalid_argument("need 0 < theta-delta < theta+delta < 1");
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("alpha and beta must be in (0,1)");
}

const char* sprt_decision_name(SprtDecision d) {
  switch (d) {
    case SprtDecision::AcceptH0: return "accept_h0";
    case SprtDecision::AcceptH1: return "accept_h1";
    case SprtDecision::Undecided: return "undecided";
  }
  return "?";
}

SprtVerdict sprt(const SampleSource& source, const SprtConfig& cfg) {
  cfg.check();
  const double p1 = cfg.theta + cfg.delta;  // H0
  const double p0 = cfg.theta - cfg.delta;  // H1
  const double upper = std::log((1.0 - cfg.beta) / cfg.alpha);
  const double lower = std::log(cfg.beta / (1.0 - cfg.alpha));
  const double inc_true = std::log(p1 / p0);
  const double inc_false = std::log((1.0 - p1) / (1.0 - p0));

  SprtVerdict v;
  while (v.samples < cfg.budget) {
    const auto sample = source();
    if (!sample.has_value()) break;
    ++v.samples;
    v.log_ratio += *sample ? inc_true : inc_false;
    if (v.log_ratio >= upper) {
      v.decision = SprtDecision::AcceptH0;
      return v;
    }
    if (v.log_ratio <= lower) {
      v.decision = SprtDecision::AcceptH1;
      return v;
    }
  }
  v.decision = SprtDecision::Undecided;
  return v;
}

std::uint64_t chernoff_sample_size(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("epsilon and delta must be in (0,1)");
  return static_cast<std::uint64_t>(
      std::ceil(std::log(2.0 / delta) / (2.0 * epsilon * epsilon)));
}

ChernoffEstimate chernoff_estimate(const SampleSource& source, double epsilon,
                                   double delta) {
  ChernoffEstimate e;
  e.n = chernoff_sample_size(epsilon, delta);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < e.n; ++i) {
    const auto sample = source();
    if (!sample.has_value())
      throw std::runtime_error("sample source exhausted after " +
                               std::to_string(i) + " of " +
                               std::to_string(e.n) + " samples");
    if (*sample) ++hits;
  }
  e.p_hat = static_cast<double>(hits) / static_cast<double>(e.n);
  return e;
}

SampleSource make_vector_source(
    const std::vector<SatisfactionSample>& samples) {
  auto run = std::make_shared<std::size_t>(0);
  auto tick = std::make_shared<std::size_t>(0);
  return [samples, run, tick]() -> std::optional<bool> {
    while (*run < samples.size()) {
      if (*tick < samples[*run].satisfied.size())
        return samples[*run].satisfied[(*tick)++];
      ++*run;
      *tick = 0;
    }
    return std::nullopt;
  };
}

SampleSource make_run_source(const std::vector<SatisfactionSample>& samples) {
  auto run = std::make_shared<std::size_t>(0);
  return [samples, run]() -> std::optional<bool> {
    if (*run >= samples.size()) return std::nullopt;
    return samples[(*run)++].rate == 1.0;
  };
}

}  // namespace mutinv
