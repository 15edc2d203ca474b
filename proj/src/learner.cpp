#include "mutinv/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "mutinv/rng.hpp"

namespace mutinv {

std::vector<std::string> default_feature_names(std::size_t tanks) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= tanks; ++i)
    names.push_back("v" + std::to_string(i));
  for (std::size_t i = 1; i <= tanks; ++i)
    names.push_back("v" + std::to_string(i) + "'");
  return names;
}

Scaler fit_scaler(const Dataset& d) {
  if (d.rows.empty()) throw std::invalid_argument("empty dataset");
  const std::size_t dim = d.rows[0].x.size();
  Scaler s;
  s.mean.assign(dim, 0.0);
  s.stddev.assign(dim, 0.0);
  const double n = static_cast<double>(d.rows.size());
  for (const auto& r : d.rows)
    for (std::size_t j = 0; j < dim; ++j) s.mean[j] += r.x[j];
  for (std::size_t j = 0; j < dim; ++j) s.mean[j] /= n;
  for (const auto& r : d.rows)
    for (std::size_t j = 0; j < dim; ++j) {
      const double dlt = r.x[j] - s.mean[j];
      s.stddev[j] += dlt * dlt;
    }
  for (std::size_t j = 0; j < dim; ++j) {
    s.stddev[j] = std::sqrt(s.stddev[j] / n);
    if (s.stddev[j] <= 0.0)
      throw std::invalid_argument("zero-variance feature at column " +
                                  std::to_string(j));
  }
  return s;
}

Dataset apply_scaler(const Dataset& d, const Scaler& s) {
  Dataset out;
  out.names = d.names;
  out.rows.reserve(d.rows.size());
  for (const auto& r : d.rows) {
    FeatureVector fv;
    fv.label = r.label;
    fv.x.resize(r.x.size());
    for (std::size_t j = 0; j < r.x.size(); ++j)
      fv.x[j] = (r.x[j] - s.mean[j]) / s.stddev[j];
    out.rows.push_back(std::move(fv));
  }
  return out;
}

double svm_objective(const Dataset& d, const std::vector<double>& w, double b,
                     double lambda) {
  double norm2 = 0.0;
  for (double wi : w) norm2 += wi * wi;
  double hinge = 0.0;
  for (const auto& r : d.rows) {
    double dot = b;
    for (std::size_t j = 0; j < w.size(); ++j) dot += w[j] * r.x[j];
    hinge += std::max(0.0, 1.0 - r.label * dot);
  }
  return 0.5 * lambda * norm2 + hinge / static_cast<double>(d.rows.size());
}

LinearModel train_svm(const Dataset& d, const Hyperparams& hp,
                      std::uint64_t seed) {
  if (d.rows.empty()) throw std::invalid_argument("empty dataset");
  bool pos = false, neg = false;
  for (const auto& r : d.rows) (r.label > 0 ? pos : neg) = true;
  if (!pos || !neg)
    throw std::invalid_argument("training requires both classes");

  const std::size_t dim = d.rows[0].x.size();
  const double lambda = hp.lambda;

  LinearModel m;
  m.hp = hp;
  m.seed = seed;
  std::vector<double> w(dim, 0.0);
  double b = 0.0;

  // Best iterate by objective, checked at epoch boundaries; the zero vector
  // is the initial candidate, so the objective never ends above 1.0.
  m.w = w;
  m.b = 0.0;
  double best = svm_objective(d, w, b, lambda);

  SeededRng rng(seed);
  std::vector<std::size_t> order(d.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::uint64_t t = 0;
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto& r = d.rows[i];
      double dot = b;
      for (std::size_t j = 0; j < dim; ++j) dot += w[j] * r.x[j];
      const double scale = 1.0 - eta * lambda;  // = 1 - 1/t
      for (std::size_t j = 0; j < dim; ++j) w[j] *= scale;
      if (r.label * dot < 1.0) {
        for (std::size_t j = 0; j < dim; ++j) w[j] += eta * r.label * r.x[j];
        // The unregularized bias takes a 1/t step: the weight-space rate
        // 1/(lambda t) is far too large for a coordinate that never decays.
        b += r.label / static_cast<double>(t);
      }
    }
    const double obj = svm_objective(d, w, b, lambda);
    if (obj < best) {
      best = obj;
      m.w = w;
      m.b = b;
    }
  }
  return m;
}

int classify(const LinearModel& m, const std::vector<double>& x_std) {
  if (x_std.size() != m.w.size())
    throw std::invalid_argument("feature dimension mismatch");
  double dot = m.b;
  for (std::size_t j = 0; j < m.w.size(); ++j) dot += m.w[j] * x_std[j];
  return dot >= 0.0 ? +1 : -1;
}

CvReport cross_validate(const Dataset& d, int k, const Hyperparams& hp,
                        std::uint64_t seed) {
  const std::size_t n = d.rows.size();
  if (k < 2) throw std::invalid_argument("k must be >= 2");
  if (static_cast<std::size_t>(k) > n)
    throw std::invalid_argument("k exceeds dataset size");

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  SeededRng rng(SeededRng::derive(seed, 0xCF01));
  rng.shuffle(idx);

  CvReport rep;
  rep.k = k;
  std::size_t start = 0;
  for (int fold = 0; fold < k; ++fold) {
    const std::size_t size = n / k + (static_cast<std::size_t>(fold) < n % k);
    const std::size_t end = start + size;

    Dataset train, test;
    train.names = test.names = d.names;
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= start && i < end)
        test.rows.push_back(d.rows[idx[i]]);
      else
        train.rows.push_back(d.rows[idx[i]]);
    }
    start = end;

    const Scaler scaler = fit_scaler(train);
    const Dataset train_std = apply_scaler(train, scaler);
    const LinearModel model =
        train_svm(train_std, hp, SeededRng::derive(seed, 0xF000 + fold));

    const Dataset test_std = apply_scaler(test, scaler);
    std::size_t correct = 0;
    for (const auto& r : test_std.rows) {
      const int y = classify(model, r.x);
      if (y == r.label) ++correct;
      if (y > 0 && r.label > 0) ++rep.tp;
      if (y > 0 && r.label < 0) ++rep.fp;
      if (y < 0 && r.label < 0) ++rep.tn;
      if (y < 0 && r.label > 0) ++rep.fn;
    }
    rep.fold_accuracy.push_back(static_cast<double>(correct) /
                                static_cast<double>(test.rows.size()));
  }
  for (double a : rep.fold_accuracy) rep.mean_accuracy += a;
  rep.mean_accuracy /= static_cast<double>(k);
  return rep;
}

bool LinearInvariant::satisfied(const std::vector<double>& x_raw) const {
  double dot = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * x_raw[j];
  return dot <= c;  // tie goes to the positive class
}

std::string LinearInvariant::render() const {
  std::string out;
  char buf[64];
  for (std::size_t j = 0; j < a.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.3f", std::fabs(a[j]));
    const bool negative = std::signbit(a[j]) && a[j] != 0.0;
    if (j > 0)
      out += negative ? " - " : " + ";
    else if (negative)
      out += "-";
    out += buf;
    out += "*";
    out += names.size() == a.size() ? names[j] : "x" + std::to_string(j + 1);
  }
  std::snprintf(buf, sizeof buf, "%.3f", c);
  out += " < ";
  out += buf;
  return out;
}

LinearInvariant extract_invariant(const LinearModel& m, const Scaler& s,
                                  const std::vector<std::string>& names) {
  if (m.w.size() != s.mean.size())
    throw std::invalid_argument("model/scaler dimension mismatch");
  LinearInvariant inv;
  inv.names = names;
  inv.a.resize(m.w.size());
  // classify(+1)  <=>  w.(x-mean)/std + b >= 0  <=>  sum(-w_j/std_j x_j) <= c
  double c = m.b;
  for (std::size_t j = 0; j < m.w.size(); ++j) {
    inv.a[j] = -m.w[j] / s.stddev[j];
    c -= m.w[j] * s.mean[j] / s.stddev[j];
  }
  inv.c = c;
  return inv;
}

nlohmann::json LinearInvariant::to_json() const {
  nlohmann::json j;
  j["coefficients"] = a;
  j["threshold"] = c;
  j["feature_names"] = names;
  j["direction"] = "<";
  return j;
}

LinearInvariant LinearInvariant::from_json(const nlohmann::json& j) {
  LinearInvariant inv;
  inv.a = j.at("coefficients").get<std::vector<double>>();
  inv.c = j.at("threshold").get<double>();
  inv.names = j.at("feature_names").get<std::vector<std::string>>();
  return inv;
}

nlohmann::json model_to_json(const LinearModel& m, const Scaler& s,
                             const LinearInvariant& inv,
                             const std::string& dataset_hash) {
  nlohmann::json j;
  j["invariant"] = inv.to_json();
  j["weights_std_space"] = m.w;
  j["bias"] = m.b;
  j["scaler"] = {{"mean", s.mean}, {"stddev", s.stddev}};
  j["hyperparameters"] = {{"lambda", m.hp.lambda},
                          {"epochs", m.hp.epochs},
                          {"seed", m.seed}};
  j["dataset_hash"] = dataset_hash;
  return j;
}

}  // namespace mutinv
