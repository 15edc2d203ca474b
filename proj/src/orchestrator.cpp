#include "mutinv/orchestrator.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace mutinv {

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("file not found: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

std::string positive_trace_path(const ExperimentConfig& cfg, int state_id) {
  return cfg.out_dir + "/positive/state" + std::to_string(state_id) + ".csv";
}

std::string mutant_trace_path(const ExperimentConfig& cfg,
                              const std::string& mutant_id, int state_id) {
  return cfg.out_dir + "/mutants/" + mutant_id + "/state" +
         std::to_string(state_id) + ".csv";
}

std::uint64_t state_seed(const ExperimentConfig& cfg, int state_id) {
  return SeededRng::derive(cfg.seed, 0x51A7E000ULL + state_id);
}

void snapshot_config(const ExperimentConfig& cfg) {
  nlohmann::json j = cfg.to_json();
  j["config_hash"] = cfg.config_hash();
  write_json(cfg.out_dir + "/config_snapshot.json", j);
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  const nlohmann::json j = read_json(path);
  ExperimentConfig cfg;
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    return fs::path(p).is_absolute() ? p : (base / p).string();
  };

  cfg.plant_config_path = resolve(j.at("plant_config").get<std::string>());
  cfg.controller_path = resolve(j.at("controller").get<std::string>());
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("initial_levels_mm"))
    cfg.initial_levels_mm = j.at("initial_levels_mm").get<std::vector<double>>();
  cfg.duration_s = j.value("duration_s", cfg.duration_s);
  cfg.seed = j.value("seed", cfg.seed);

  if (j.contains("mutation")) {
    const auto& m = j.at("mutation");
    if (m.contains("operators")) {
      cfg.mutation_ops.clear();
      for (const auto& name : m.at("operators"))
        cfg.mutation_ops.push_back(
            mutation_operator_from_name(name.get<std::string>()));
    }
    cfg.mutation_limit = m.value("limit", cfg.mutation_limit);
  }
  if (j.contains("screening")) {
    const auto& s = j.at("screening");
    cfg.screen_epsilon_mm = s.value("epsilon_mm", cfg.screen_epsilon_mm);
    cfg.duplicate_epsilon_mm =
        s.value("duplicate_epsilon_mm", cfg.duplicate_epsilon_mm);
  }
  if (j.contains("features"))
    cfg.stride_ticks = j.at("features").value("stride_ticks", cfg.stride_ticks);
  if (j.contains("learner")) {
    const auto& l = j.at("learner");
    cfg.hp.lambda = l.value("lambda", cfg.hp.lambda);
    cfg.hp.epochs = l.value("epochs", cfg.hp.epochs);
    cfg.k_folds = l.value("k_folds", cfg.k_folds);
    cfg.individual_models = l.value("individual", cfg.individual_models);
  }
  if (j.contains("smc")) {
    const auto& s = j.at("smc");
    cfg.sprt_cfg.theta = s.value("theta", cfg.sprt_cfg.theta);
    cfg.sprt_cfg.delta = s.value("delta", cfg.sprt_cfg.delta);
    cfg.sprt_cfg.alpha = s.value("alpha", cfg.sprt_cfg.alpha);
    cfg.sprt_cfg.beta = s.value("beta", cfg.sprt_cfg.beta);
    cfg.sprt_cfg.budget = s.value("budget", cfg.sprt_cfg.budget);
    cfg.chernoff_epsilon = s.value("epsilon", cfg.chernoff_epsilon);
    cfg.chernoff_delta = s.value("delta_estimate", cfg.chernoff_delta);
    cfg.validation_runs = s.value("runs", cfg.validation_runs);
    cfg.smc_mode = s.value("mode", cfg.smc_mode);
  }
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["plant_config"] = plant_config_path;
  j["controller"] = controller_path;
  j["out_dir"] = out_dir;
  j["initial_levels_mm"] = initial_levels_mm;
  j["duration_s"] = duration_s;
  j["seed"] = seed;
  nlohmann::json ops = nlohmann::json::array();
  for (auto op : mutation_ops) ops.push_back(mutation_operator_name(op));
  j["mutation"] = {{"operators", ops}, {"limit", mutation_limit}};
  j["screening"] = {{"epsilon_mm", screen_epsilon_mm},
                    {"duplicate_epsilon_mm", duplicate_epsilon_mm}};
  j["features"] = {{"stride_ticks", stride_ticks}};
  j["learner"] = {{"lambda", hp.lambda},
                  {"epochs", hp.epochs},
                  {"k_folds", k_folds},
                  {"individual", individual_models}};
  j["smc"] = {{"theta", sprt_cfg.theta},
              {"delta", sprt_cfg.delta},
              {"alpha", sprt_cfg.alpha},
              {"beta", sprt_cfg.beta},
              {"budget", sprt_cfg.budget},
              {"epsilon", chernoff_epsilon},
              {"delta_estimate", chernoff_delta},
              {"runs", validation_runs},
              {"mode", smc_mode}};
  return j;
}

std::string ExperimentConfig::config_hash() const {
  nlohmann::json j = to_json();
  // Output location must not affect the hash.
  j.erase("out_dir");
  j["plant_config"] = nlohmann::json::parse(slurp(plant_config_path));
  j["controller"] = slurp(controller_path);
  return fnv1a_hex(j.dump());
}

PlantConfig ExperimentConfig::plant() const {
  return PlantConfig::load_file(plant_config_path);
}

Program ExperimentConfig::controller() const {
  const std::string src = slurp(controller_path);
  Program p;
  try {
    p = parse(src);
  } catch (const ParseError& e) {
    throw std::runtime_error(controller_path + ":" + std::to_string(e.line) +
                             ":" + std::to_string(e.col) + ": " + e.what());
  }
  const PlantConfig pc = plant();
  DeclaredNames decl;
  for (const auto& s : pc.sensor_names()) decl.sensors.insert(s);
  for (const auto& a : pc.actuator_names()) decl.actuators.insert(a);
  const auto diags = validate(p, decl);
  if (!diags.empty()) {
    std::string msg;
    for (const auto& d : diags)
      msg += controller_path + ":" + std::to_string(d.line) + ":" +
             std::to_string(d.col) + ": " + d.message + "\n";
    throw std::runtime_error(msg);
  }
  return p;
}

PlantState ExperimentConfig::initial_state(const PlantConfig& cfg,
                                           int state_id) const {
  PlantState s = make_plant(cfg);
  const double level = initial_levels_mm.at(state_id);
  for (std::size_t i = 0; i < s.levels_mm.size(); ++i)
    s.levels_mm[i] = std::min(level, cfg.tanks[i].capacity_mm);
  return s;
}

SimulateResult run_simulate(const ExperimentConfig& cfg) {
  const PlantConfig pc = cfg.plant();
  const Program controller = cfg.controller();
  const std::string hash = cfg.config_hash();
  snapshot_config(cfg);

  SimulateResult res;
  for (int sid = 0; sid < static_cast<int>(cfg.initial_levels_mm.size());
       ++sid) {
    const Trace t =
        run_closed_loop(controller, pc, cfg.initial_state(pc, sid),
                        cfg.duration_s, state_seed(cfg, sid), "positive", sid);
    const std::string path = positive_trace_path(cfg, sid);
    fs::create_directories(fs::path(path).parent_path());
    write_trace_csv(t, pc, path, hash);
    res.trace_files.push_back(path);
  }
  return res;
}

MutateResult run_mutate(const ExperimentConfig& cfg) {
  const PlantConfig pc = cfg.plant();
  const Program base = cfg.controller();
  const std::string hash = cfg.config_hash();
  snapshot_config(cfg);

  std::vector<Trace> positives;
  for (int sid = 0; sid < static_cast<int>(cfg.initial_levels_mm.size());
       ++sid) {
    const std::string path = positive_trace_path(cfg, sid);
    if (trace_sidecar_config_hash(path) != hash)
      throw std::runtime_error("positive trace " + path +
                               " was produced under a different config");
    positives.push_back(read_trace_csv(path));
  }

  const MutantBatch batch =
      generate_mutants(base, cfg.mutation_ops, cfg.mutation_limit,
                       SeededRng::derive(cfg.seed, 0xA11CE));

  nlohmann::json manifest = nlohmann::json::array();
  nlohmann::json report = nlohmann::json::array();
  MutateResult res;
  res.total = static_cast<int>(batch.mutants.size());
  res.universe_exhausted = batch.exhausted;

  struct DistinctEntry {
    std::string id;
    std::vector<Trace> traces;
  };
  std::vector<DistinctEntry> distinct;

  for (const Mutant& m : batch.mutants) {
    manifest.push_back(mutant_manifest_entry(m, base));
    std::vector<Trace> traces;
    for (int sid = 0; sid < static_cast<int>(cfg.initial_levels_mm.size());
         ++sid) {
      Trace t = run_closed_loop(m.program, pc, cfg.initial_state(pc, sid),
                                cfg.duration_s, state_seed(cfg, sid), m.id, sid);
      const std::string path = mutant_trace_path(cfg, m.id, sid);
      fs::create_directories(fs::path(path).parent_path());
      write_trace_csv(t, pc, path, hash);
      traces.push_back(std::move(t));
    }
    const ScreenVerdict v = screen(m, traces, positives, cfg.screen_epsilon_mm);
    switch (v.verdict) {
      case Verdict::Unexercised: ++res.unexercised; break;
      case Verdict::Equivalent: ++res.equivalent; break;
      case Verdict::Distinct:
        ++res.distinct;
        distinct.push_back({m.id, std::move(traces)});
        break;
    }
    report.push_back({{"mutant", v.mutant_id},
                      {"verdict", verdict_name(v.verdict)},
                      {"max_deviation_mm", v.max_deviation_mm},
                      {"coverage_hit", v.coverage_hit}});
  }

  // Drop distinct mutants whose traces are too similar to an earlier one.
  std::vector<bool> dropped(distinct.size(), false);
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    if (dropped[i]) continue;
    for (std::size_t j = i + 1; j < distinct.size(); ++j) {
      if (dropped[j]) continue;
      double dev = 0.0;
      for (std::size_t s = 0; s < distinct[i].traces.size(); ++s)
        dev = std::max(dev, max_deviation(distinct[i].traces[s],
                                          distinct[j].traces[s]));
      if (dev <= cfg.duplicate_epsilon_mm) dropped[j] = true;
    }
  }
  for (std::size_t i = 0; i < distinct.size(); ++i)
    if (!dropped[i]) res.selected.push_back(distinct[i].id);

  write_json(cfg.out_dir + "/mutants/manifest.json", manifest);
  write_json(cfg.out_dir + "/screen_report.json",
             {{"config_hash", hash},
              {"universe_exhausted", batch.exhausted},
              {"verdicts", report},
              {"selected", res.selected}});
  return res;
}

namespace {

Dataset load_dataset(const ExperimentConfig& cfg,
                     const std::vector<std::string>& mutant_ids,
                     const std::string& hash, long* pos_count,
                     long* neg_count) {
  const PlantConfig pc = cfg.plant();
  Dataset d;
  d.names = default_feature_names(pc.tanks.size());
  auto add_trace = [&](const std::string& path) {
    if (trace_sidecar_config_hash(path) != hash)
      throw std::runtime_error("trace " + path +
                               " was produced under a different config");
    const Trace t = read_trace_csv(path);
    for (auto& fv : extract_features(t, cfg.stride_ticks)) {
      if (fv.label > 0)
        ++*pos_count;
      else
        ++*neg_count;
      d.rows.push_back(std::move(fv));
    }
  };
  for (int sid = 0; sid < static_cast<int>(cfg.initial_levels_mm.size()); ++sid)
    add_trace(positive_trace_path(cfg, sid));
  for (const auto& id : mutant_ids)
    for (int sid = 0; sid < static_cast<int>(cfg.initial_levels_mm.size());
         ++sid)
      add_trace(mutant_trace_path(cfg, id, sid));
  return d;
}

std::string dataset_hash(const Dataset& d) {
  std::ostringstream ss;
  for (const auto& r : d.rows) {
    for (double v : r.x) ss << v << ",";
    ss << r.label << "\n";
  }
  return fnv1a_hex(ss.str());
}

void train_one(const ExperimentConfig& cfg, const Dataset& d,
               const std::string& suffix, TrainResult& res) {
  res.report = cross_validate(d, cfg.k_folds, cfg.hp,
                              SeededRng::derive(cfg.seed, 0xCF));
  const Scaler scaler = fit_scaler(d);
  const Dataset d_std = apply_scaler(d, scaler);
  const LinearModel model =
      train_svm(d_std, cfg.hp, SeededRng::derive(cfg.seed, 0x7A1));
  const LinearInvariant inv = extract_invariant(model, scaler, d.names);

  nlohmann::json mj = model_to_json(model, scaler, inv, dataset_hash(d));
  mj["config_hash"] = cfg.config_hash();
  res.model_file = cfg.out_dir + "/model" + suffix + ".json";
  write_json(res.model_file, mj);
  res.invariant_text = inv.render();
  write_text(cfg.out_dir + "/invariant" + suffix + ".txt",
             res.invariant_text + "\n");

  nlohmann::json cv;
  cv["k"] = res.report.k;
  cv["fold_accuracy"] = res.report.fold_accuracy;
  cv["mean_accuracy"] = res.report.mean_accuracy;
  cv["confusion"] = {{"tp", res.report.tp},
                     {"tn", res.report.tn},
                     {"fp", res.report.fp},
                     {"fn", res.report.fn}};
  cv["class_counts"] = {{"positive", res.positive_vectors},
                        {"negative", res.negative_vectors}};
  write_json(cfg.out_dir + "/cv_report" + suffix + ".json", cv);
}

}  // namespace

TrainResult run_train(const ExperimentConfig& cfg) {
  const std::string hash = cfg.config_hash();
  const nlohmann::json screen_report =
      read_json(cfg.out_dir + "/screen_report.json");
  const auto selected =
      screen_report.at("selected").get<std::vector<std::string>>();
  if (selected.empty())
    throw std::runtime_error("no distinct mutants available for training");

  TrainResult res;
  if (cfg.individual_models) {
    // One model per surviving mutant; the reported accuracy is their mean.
    double acc = 0.0;
    for (const auto& id : selected) {
      TrainResult one;
      Dataset d = load_dataset(cfg, {id}, hash, &one.positive_vectors,
                               &one.negative_vectors);
      train_one(cfg, d, "_" + id, one);
      acc += one.report.mean_accuracy;
      res = one;
    }
    res.report.mean_accuracy = acc / static_cast<double>(selected.size());
    return res;
  }

  Dataset d = load_dataset(cfg, selected, hash, &res.positive_vectors,
                           &res.negative_vectors);
  write_feature_csv(d.rows, d.names, cfg.out_dir + "/features.csv");
  train_one(cfg, d, "", res);
  return res;
}

ValidateResult run_validate(const ExperimentConfig& cfg,
                            const std::string& model_path) {
  const nlohmann::json mj = read_json(model_path);
  const LinearInvariant inv = LinearInvariant::from_json(mj.at("invariant"));

  const PlantConfig pc = cfg.plant();
  const Program controller = cfg.controller();

  std::vector<SatisfactionSample> samples;
  ValidateResult res;
  for (int run = 0; run < cfg.validation_runs; ++run) {
    const int sid = run % static_cast<int>(cfg.initial_levels_mm.size());
    const Trace t = run_closed_loop(
        controller, pc, cfg.initial_state(pc, sid), cfg.duration_s,
        SeededRng::derive(cfg.seed, 0x5A1D0000ULL + run), "positive", sid);
    SatisfactionSample s = check_invariant(inv, t);
    s.run_id = "run" + std::to_string(run);
    res.run_rates.push_back(s.rate);
    samples.push_back(std::move(s));
  }

  auto make_source = [&]() {
    return cfg.smc_mode == "per_run" ? make_run_source(samples)
                                     : make_vector_source(samples);
  };
  res.verdict = sprt(make_source(), cfg.sprt_cfg);
  res.estimate =
      chernoff_estimate(make_source(), cfg.chernoff_epsilon, cfg.chernoff_delta);

  nlohmann::json j;
  j["verdict"] = sprt_decision_name(res.verdict.decision);
  j["samples_consumed"] = res.verdict.samples;
  j["log_likelihood_ratio"] = res.verdict.log_ratio;
  j["p_hat"] = res.estimate.p_hat;
  j["chernoff_n"] = res.estimate.n;
  j["run_rates"] = res.run_rates;
  j["smc_config"] = {{"theta", cfg.sprt_cfg.theta},
                     {"delta", cfg.sprt_cfg.delta},
                     {"alpha", cfg.sprt_cfg.alpha},
                     {"beta", cfg.sprt_cfg.beta},
                     {"budget", cfg.sprt_cfg.budget},
                     {"mode", cfg.smc_mode}};
  j["invariant_hash"] = fnv1a_hex(inv.render());
  j["config_hash"] = cfg.config_hash();
  write_json(cfg.out_dir + "/validation_report.json", j);
  return res;
}

std::string run_report(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "experiment summary (" << cfg.out_dir << ")\n";
  const std::string snap = cfg.out_dir + "/config_snapshot.json";
  if (fs::exists(snap))
    out << "  config hash: " << read_json(snap).value("config_hash", "?")
        << "\n";
  const std::string screen = cfg.out_dir + "/screen_report.json";
  if (fs::exists(screen)) {
    const nlohmann::json r = read_json(screen);
    std::map<std::string, int> counts;
    for (const auto& v : r.at("verdicts"))
      ++counts[v.at("verdict").get<std::string>()];
    out << "  mutants: " << r.at("verdicts").size()
        << " (unexercised " << counts["unexercised"] << ", equivalent "
        << counts["equivalent"] << ", distinct " << counts["distinct"]
        << "), selected for training: " << r.at("selected").size() << "\n";
  }
  const std::string cv = cfg.out_dir + "/cv_report.json";
  if (fs::exists(cv)) {
    const nlohmann::json r = read_json(cv);
    out << "  cross-validation: k=" << r.at("k")
        << ", mean accuracy = " << r.at("mean_accuracy").get<double>() << "\n";
  }
  const std::string invf = cfg.out_dir + "/invariant.txt";
  if (fs::exists(invf)) out << "  invariant: " << slurp(invf);
  const std::string val = cfg.out_dir + "/validation_report.json";
  if (fs::exists(val)) {
    const nlohmann::json r = read_json(val);
    out << "  smc: " << r.at("verdict").get<std::string>() << " after "
        << r.at("samples_consumed") << " samples, p_hat = "
        << r.at("p_hat").get<double>() << "\n";
  }
  const std::string text = out.str();
  write_text(cfg.out_dir + "/report.txt", text);
  return text;
}

}  // namespace mutinv
