#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "mutinv/orchestrator.hpp"

using namespace mutinv;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

ExperimentConfig load_config(const GlobalOpts& g) {
  ExperimentConfig cfg = ExperimentConfig::load(g.config_path);
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  if (g.seed_set) cfg.seed = g.seed;
  return cfg;
}

int dispatch(const std::string& cmd, const GlobalOpts& g,
             const std::string& model_path, double duration_override,
             bool individual) {
  ExperimentConfig cfg = load_config(g);
  if (duration_override > 0.0) cfg.duration_s = duration_override;
  if (individual) cfg.individual_models = true;

  if (cmd == "simulate") {
    const SimulateResult r = run_simulate(cfg);
    for (const auto& f : r.trace_files) std::cout << "wrote " << f << "\n";
    return kExitOk;
  }
  if (cmd == "mutate") {
    const MutateResult r = run_mutate(cfg);
    std::cout << "mutants: " << r.total << " (unexercised " << r.unexercised
              << ", equivalent " << r.equivalent << ", distinct " << r.distinct
              << ")\n";
    std::cout << "selected for training:";
    for (const auto& id : r.selected) std::cout << " " << id;
    std::cout << "\n";
    if (r.universe_exhausted)
      std::cerr << "warning: requested more mutants than the universe holds\n";
    if (r.selected.empty()) {
      std::cerr << "warning: zero distinct mutants survived screening\n";
      return kExitNoMutants;
    }
    return kExitOk;
  }
  if (cmd == "train") {
    const TrainResult r = run_train(cfg);
    std::cout << "dataset: " << r.positive_vectors << " positive / "
              << r.negative_vectors << " negative vectors\n";
    std::cout << "cv mean accuracy (k=" << cfg.k_folds
              << "): " << r.report.mean_accuracy << "\n";
    std::cout << "invariant: " << r.invariant_text << "\n";
    std::cout << "model written to " << r.model_file << "\n";
    return kExitOk;
  }
  if (cmd == "validate") {
    const std::string path =
        model_path.empty() ? cfg.out_dir + "/model.json" : model_path;
    const ValidateResult r = run_validate(cfg, path);
    std::cout << "sprt: " << sprt_decision_name(r.verdict.decision) << " after "
              << r.verdict.samples << " samples\n";
    std::cout << "chernoff estimate: p_hat = " << r.estimate.p_hat << " (n = "
              << r.estimate.n << ")\n";
    if (r.verdict.decision == SprtDecision::Undecided) return kExitUndecided;
    return kExitOk;
  }
  if (cmd == "report") {
    std::cout << run_report(cfg);
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "learn and validate physical invariants of a simulated water plant "
      "from mutated control programs"};
  app.require_subcommand(1);

  GlobalOpts g;
  std::string model_path;
  double duration_override = 0.0;
  bool individual = false;

  app.add_option("--config", g.config_path, "experiment config (JSON)")
      ->required();
  app.add_option("--out", g.out_dir, "output directory override");
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed override");

  auto* sim =
      app.add_subcommand("simulate", "run positive closed-loop traces");
  sim->add_option("--duration", duration_override, "trace duration (s)");
  auto* mut = app.add_subcommand(
      "mutate", "generate mutants, collect their traces, screen them");
  auto* train = app.add_subcommand(
      "train", "train the classifier and export the invariant");
  train->add_flag("--individual", individual, "one model per mutant");
  auto* val = app.add_subcommand(
      "validate", "statistical model checking of the invariant");
  val->add_option("--model", model_path, "model file (default: out/model.json)");
  auto* rep = app.add_subcommand(
      "report", "print a human-readable experiment summary");
  // Let the shared --config/--out/--seed options appear after the
  // subcommand as well.
  for (CLI::App* sub : {sim, mut, train, val, rep}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return dispatch(cmd, g, model_path, duration_override, individual);
  } catch (const mutinv::EvalError& e) {
    std::cerr << "controller runtime error: " << e.what() << "\n";
    return kExitDslRuntime;
  } catch (const mutinv::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
