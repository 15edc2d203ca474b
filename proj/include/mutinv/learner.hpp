#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mutinv/pipeline.hpp"

namespace mutinv {

struct Dataset {
  std::vector<FeatureVector> rows;
  std::vector<std::string> names;  // one per feature dimension

  std::size_t dim() const { return names.size(); }
};

std::vector<std::string> default_feature_names(std::size_t tanks);

struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;  // population std, strictly positive
};

// Throws on a zero-variance feature column.
Scaler fit_scaler(const Dataset& d);
Dataset apply_scaler(const Dataset& d, const Scaler& s);

struct Hyperparams {
  double lambda = 1e-4;
  int epochs = 50;
};

struct LinearModel {
  std::vector<double> w;  // weights in standardized space
  double b = 0.0;         // unregularized bias
  Hyperparams hp;
  std::uint64_t seed = 0;
};

// Pegasos-style seeded stochastic subgradient descent on the soft-margin
// hinge objective; the returned iterate never has a worse objective than
// the zero vector. Throws if only one class is present.
LinearModel train_svm(const Dataset& standardized, const Hyperparams& hp,
                      std::uint64_t seed);

double svm_objective(const Dataset& standardized, const std::vector<double>& w,
                     double b, double lambda);

// sign(w.x + b); zero maps to +1.
int classify(const LinearModel& m, const std::vector<double>& x_std);

struct CvReport {
  int k = 0;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  long tp = 0, tn = 0, fp = 0, fn = 0;
};

CvReport cross_validate(const Dataset& d, int k, const Hyperparams& hp,
                        std::uint64_t seed);

// Raw-space rendering of the hyperplane: the positive class satisfies
// sum(a_i * x_i) < c (ties count as satisfied).
struct LinearInvariant {
  std::vector<double> a;
  double c = 0.0;
  std::vector<std::string> names;

  bool satisfied(const std::vector<double>& x_raw) const;
  // Coefficients to 3 decimals, e.g. "-0.349*v1 + 9.789*v2 ... < -786.416".
  std::string render() const;

  nlohmann::json to_json() const;
  static LinearInvariant from_json(const nlohmann::json& j);
};

LinearInvariant extract_invariant(const LinearModel& m, const Scaler& s,
                                  const std::vector<std::string>& names);

nlohmann::json model_to_json(const LinearModel& m, const Scaler& s,
                             const LinearInvariant& inv,
                             const std::string& dataset_hash);

}  // namespace mutinv
