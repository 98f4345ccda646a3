#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "textcat/corpus.hpp"
#include "textcat/matrix.hpp"

namespace textcat {

// Sorted sparse feature vector over the vocabulary index space.
struct SparseVector {
  std::vector<std::pair<int, double>> items;  // strictly increasing indices, non-zero values
  int dim = 0;
};

struct SvmConfig {
  double c = 1.0;  // hinge-loss trade-off in (1/2)||w||^2 + c * sum hinge
  int epochs = 20;
  std::uint64_t seed = 1;
  bool count_features = false;  // occurrence counts instead of binary presence

  void validate() const;
};

struct SvmModel {
  SvmConfig config;
  Vocabulary vocab;
  std::vector<std::string> class_names;
  Matrix weights;  // K x V
  std::vector<double> bias;
};

struct SvmTrainReport {
  // objective[k][e] = class k's regularized hinge objective after epoch e+1.
  std::vector<std::vector<double>> objective;
};

// Binary occurrence features over distinct in-vocab tokens; out-of-vocabulary
// tokens are dropped (they are not folded into the UNK slot). With
// count_features the value is the occurrence count instead of 1.
SparseVector featurize(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                       bool count_features = false);

double sparse_dot(const double* w, const SparseVector& x);

// Full one-vs-rest objective for class k on a featurized dataset:
// (1/2)||w_k||^2 + c * sum_i max(0, 1 - y_i (w_k . x_i + b_k)).
double svm_binary_objective(const double* w, int dim, double b,
                            const std::vector<SparseVector>& xs, const std::vector<int>& ys,
                            double c);

// Pegasos-style per-example objective (lambda/2)||w||^2 + hinge and its
// subgradient; y is +1 or -1.
double svm_point_objective(const std::vector<double>& w, double b, const SparseVector& x, int y,
                           double lambda);
void svm_point_subgradient(const std::vector<double>& w, double b, const SparseVector& x, int y,
                           double lambda, std::vector<double>& gw, double& gb);

// K independent binary problems, class vs rest, each a deterministic
// epoch-wise Pegasos run (step 1/(lambda t), lambda = 1/(c n), unregularized
// bias) with its own per-class seed stream. Throws when some class has no
// training example.
std::pair<SvmModel, SvmTrainReport> train_svm(const std::vector<Headline>& train,
                                              const Vocabulary& vocab,
                                              const std::vector<std::string>& class_names,
                                              const SvmConfig& config);

// (argmax label, raw decision scores w_k . x + b_k). Ties break toward the
// smallest class index.
std::pair<int, std::vector<double>> predict_svm(const SvmModel& model, const SparseVector& x);

// Logistic squash used when scores are exported as [0,1] confidences.
std::vector<double> squash_scores(const std::vector<double>& scores);

void save_svm(const SvmModel& model, const std::string& path);
SvmModel load_svm(const std::string& path);

}  // namespace textcat
