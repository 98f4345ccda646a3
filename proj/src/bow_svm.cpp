#include "textcat/bow_svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "textcat/io.hpp"
#include "textcat/rng.hpp"

namespace textcat {

void SvmConfig::validate() const {
  if (c <= 0.0) throw std::invalid_argument("c must be > 0");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
}

SparseVector featurize(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                       bool count_features) {
  std::map<int, double> acc;
  for (const auto& tok : tokens) {
    int id = vocab.id(tok);
    if (id < 0) continue;
    if (count_features)
      acc[id] += 1.0;
    else
      acc[id] = 1.0;
  }
  SparseVector out;
  out.dim = vocab.size();
  out.items.assign(acc.begin(), acc.end());
  return out;
}

double sparse_dot(const double* w, const SparseVector& x) {
  double s = 0.0;
  for (const auto& [i, v] : x.items) s += w[i] * v;
  return s;
}

double svm_binary_objective(const double* w, int dim, double b,
                            const std::vector<SparseVector>& xs, const std::vector<int>& ys,
                            double c) {
  double obj = 0.5 * dot(w, w, dim);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double margin = ys[i] * (sparse_dot(w, xs[i]) + b);
    if (margin < 1.0) obj += c * (1.0 - margin);
  }
  return obj;
}

double svm_point_objective(const std::vector<double>& w, double b, const SparseVector& x, int y,
                           double lambda) {
  double obj = 0.5 * lambda * dot(w.data(), w.data(), static_cast<int>(w.size()));
  double margin = y * (sparse_dot(w.data(), x) + b);
  if (margin < 1.0) obj += 1.0 - margin;
  return obj;
}

void svm_point_subgradient(const std::vector<double>& w, double b, const SparseVector& x, int y,
                           double lambda, std::vector<double>& gw, double& gb) {
  gw.assign(w.size(), 0.0);
  axpy(lambda, w.data(), gw.data(), static_cast<int>(w.size()));
  gb = 0.0;
  double margin = y * (sparse_dot(w.data(), x) + b);
  if (margin < 1.0) {
    for (const auto& [i, v] : x.items) gw[i] -= y * v;
    gb = -static_cast<double>(y);
  }
}

std::pair<SvmModel, SvmTrainReport> train_svm(const std::vector<Headline>& train,
                                              const Vocabulary& vocab,
                                              const std::vector<std::string>& class_names,
                                              const SvmConfig& config) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("empty training set");
  int k_count = static_cast<int>(class_names.size());
  if (k_count < 2) throw std::invalid_argument("need at least 2 classes");
  int n = static_cast<int>(train.size());
  int v = vocab.size();

  std::vector<SparseVector> xs;
  xs.reserve(n);
  std::vector<int> labels;
  labels.reserve(n);
  std::vector<int> per_class(k_count, 0);
  for (const Headline& h : train) {
    if (h.label < 0 || h.label >= k_count)
      throw std::out_of_range("label " + std::to_string(h.label) + " outside class range");
    xs.push_back(featurize(h.tokens, vocab, config.count_features));
    labels.push_back(h.label);
    ++per_class[h.label];
  }
  for (int k = 0; k < k_count; ++k)
    if (per_class[k] == 0)
      throw std::runtime_error("class '" + class_names[k] + "' has zero training examples");

  SvmModel model;
  model.config = config;
  model.vocab = vocab;
  model.class_names = class_names;
  model.weights = Matrix(k_count, v);
  model.bias.assign(k_count, 0.0);
  SvmTrainReport report;
  report.objective.resize(k_count);

  double lambda = 1.0 / (config.c * n);
  std::vector<int> order(n);
  std::vector<int> ys(n);

  for (int k = 0; k < k_count; ++k) {
    double* w = model.weights.row(k);
    double b = 0.0;
    for (int i = 0; i < n; ++i) ys[i] = labels[i] == k ? 1 : -1;
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(k)));
    for (int i = 0; i < n; ++i) order[i] = i;
    long long t = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      rng.shuffle(order);
      for (int idx : order) {
        ++t;
        double eta = 1.0 / (lambda * static_cast<double>(t));
        double margin = ys[idx] * (sparse_dot(w, xs[idx]) + b);
        double shrink = 1.0 - eta * lambda;  // = (t-1)/t
        for (int j = 0; j < v; ++j) w[j] *= shrink;
        if (margin < 1.0) {
          for (const auto& [j, val] : xs[idx].items) w[j] += eta * ys[idx] * val;
          b += eta * ys[idx];
        }
      }
      report.objective[k].push_back(svm_binary_objective(w, v, b, xs, ys, config.c));
    }
    model.bias[k] = b;
  }
  return {std::move(model), std::move(report)};
}

std::pair<int, std::vector<double>> predict_svm(const SvmModel& model, const SparseVector& x) {
  if (x.dim != model.vocab.size())
    throw std::invalid_argument("feature dimensionality " + std::to_string(x.dim) +
                                " does not match vocabulary size " +
                                std::to_string(model.vocab.size()));
  int k_count = model.weights.rows;
  std::vector<double> scores(k_count);
  for (int k = 0; k < k_count; ++k)
    scores[k] = sparse_dot(model.weights.row(k), x) + model.bias[k];
  int best = 0;
  for (int k = 1; k < k_count; ++k)
    if (scores[k] > scores[best]) best = k;
  return {best, std::move(scores)};
}

std::vector<double> squash_scores(const std::vector<double>& scores) {
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = sigmoid(scores[i]);
  return out;
}

void save_svm(const SvmModel& model, const std::string& path) {
  OutFile out(path);
  std::ostream& os = out.stream();
  os << "textcat-svm\n";
  os << "c " << fmt_g6(model.config.c) << '\n';
  os << "epochs " << model.config.epochs << '\n';
  os << "seed " << model.config.seed << '\n';
  os << "counts " << (model.config.count_features ? 1 : 0) << '\n';
  os << "classes " << model.class_names.size() << '\n';
  for (const auto& name : model.class_names) os << name << '\n';
  os << "vocab " << model.vocab.size() << '\n';
  for (int i = 0; i < model.vocab.size(); ++i)
    os << model.vocab.token(i) << ' ' << model.vocab.count(i) << '\n';
  os << "weights " << model.weights.rows << ' ' << model.weights.cols << '\n';
  for (int r = 0; r < model.weights.rows; ++r) {
    const double* row = model.weights.row(r);
    for (int c = 0; c < model.weights.cols; ++c) {
      if (c) os << ' ';
      os << fmt_g6(row[c]);
    }
    os << '\n';
  }
  os << "bias " << model.bias.size() << '\n';
  for (std::size_t k = 0; k < model.bias.size(); ++k) {
    if (k) os << ' ';
    os << fmt_g6(model.bias[k]);
  }
  os << "\nend\n";
  out.commit();
}

namespace {

std::string need_line(std::istream& is, const std::string& path, long long& lineno) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error(path + ":" + std::to_string(lineno + 1) + ": unexpected end of file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string need_keyed(std::istream& is, const std::string& path, long long& lineno,
                       const std::string& key) {
  std::string line = need_line(is, path, lineno);
  std::string prefix = key + " ";
  if (line.rfind(prefix, 0) != 0)
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected '" + key + " ...'");
  return line.substr(prefix.size());
}

}  // namespace

SvmModel load_svm(const std::string& path) {
  std::ifstream is = open_input(path);
  long long lineno = 0;
  auto where = [&]() { return path + ":" + std::to_string(lineno); };

  if (need_line(is, path, lineno) != "textcat-svm")
    throw std::runtime_error(path + ":1: not an svm model file");
  SvmModel model;
  model.config.c = parse_double(need_keyed(is, path, lineno, "c"), where());
  model.config.epochs = static_cast<int>(parse_int(need_keyed(is, path, lineno, "epochs"), where()));
  model.config.seed =
      static_cast<std::uint64_t>(parse_int(need_keyed(is, path, lineno, "seed"), where()));
  model.config.count_features = parse_int(need_keyed(is, path, lineno, "counts"), where()) != 0;

  long long k = parse_int(need_keyed(is, path, lineno, "classes"), where());
  for (long long i = 0; i < k; ++i) model.class_names.push_back(need_line(is, path, lineno));

  long long v = parse_int(need_keyed(is, path, lineno, "vocab"), where());
  std::vector<std::pair<std::string, long long>> rows;
  for (long long i = 0; i < v; ++i) {
    std::vector<std::string> parts = split_ws(need_line(is, path, lineno));
    if (parts.size() != 2) throw std::runtime_error(where() + ": expected 'token count'");
    rows.emplace_back(parts[0], parse_int(parts[1], where()));
  }
  model.vocab = vocab_from_rows(rows);

  std::vector<std::string> wh = split_ws(need_line(is, path, lineno));
  if (wh.size() != 3 || wh[0] != "weights")
    throw std::runtime_error(where() + ": expected 'weights K V'");
  int wr = static_cast<int>(parse_int(wh[1], where()));
  int wc = static_cast<int>(parse_int(wh[2], where()));
  if (wr != k || wc != v) throw std::runtime_error(where() + ": weight shape mismatch");
  model.weights = Matrix(wr, wc);
  for (int r = 0; r < wr; ++r) {
    std::vector<std::string> vals = split_ws(need_line(is, path, lineno));
    if (static_cast<int>(vals.size()) != wc)
      throw std::runtime_error(where() + ": expected " + std::to_string(wc) + " values");
    double* dst = model.weights.row(r);
    for (int c = 0; c < wc; ++c) dst[c] = parse_double(vals[c], where());
  }

  std::vector<std::string> bh = split_ws(need_line(is, path, lineno));
  if (bh.size() != 2 || bh[0] != "bias") throw std::runtime_error(where() + ": expected 'bias K'");
  if (parse_int(bh[1], where()) != k) throw std::runtime_error(where() + ": bias arity mismatch");
  std::vector<std::string> bvals = split_ws(need_line(is, path, lineno));
  if (static_cast<long long>(bvals.size()) != k)
    throw std::runtime_error(where() + ": expected " + std::to_string(k) + " bias values");
  for (const auto& s : bvals) model.bias.push_back(parse_double(s, where()));

  if (need_line(is, path, lineno) != "end")
    throw std::runtime_error(where() + ": expected trailing 'end'");
  return model;
}

}  // namespace textcat
