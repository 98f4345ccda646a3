#include "textcat/eval.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "textcat/io.hpp"

namespace textcat {

long long ConfusionMatrix::row_sum(int gold) const {
  long long s = 0;
  for (int p = 0; p < k; ++p) s += at(gold, p);
  return s;
}

long long ConfusionMatrix::col_sum(int pred) const {
  long long s = 0;
  for (int g = 0; g < k; ++g) s += at(g, pred);
  return s;
}

ConfusionMatrix confusion(const std::vector<int>& golds, const std::vector<int>& preds, int k) {
  if (golds.size() != preds.size())
    throw std::invalid_argument("gold and prediction counts differ: " +
                                std::to_string(golds.size()) + " vs " +
                                std::to_string(preds.size()));
  if (k < 1) throw std::invalid_argument("need at least one class");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (golds[i] < 0 || golds[i] >= k || preds[i] < 0 || preds[i] >= k)
      throw std::out_of_range("label outside [0, " + std::to_string(k) + ") at row " +
                              std::to_string(i + 1));
    ++cm.at(golds[i], preds[i]);
    ++cm.total;
  }
  return cm;
}

namespace {

double ratio(long long num, long long den) { return den == 0 ? 0.0 : static_cast<double>(num) / den; }

double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

Metrics compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total < 1) throw std::invalid_argument("empty confusion matrix");
  Metrics m;
  long long trace = 0;
  for (int c = 0; c < cm.k; ++c) trace += cm.at(c, c);
  m.accuracy = static_cast<double>(trace) / cm.total;
  for (int c = 0; c < cm.k; ++c) {
    double p = ratio(cm.at(c, c), cm.col_sum(c));
    double r = ratio(cm.at(c, c), cm.row_sum(c));
    m.precision.push_back(p);
    m.recall.push_back(r);
    m.f1.push_back(f1_of(p, r));
  }
  for (int c = 0; c < cm.k; ++c) {
    m.macro_p += m.precision[c];
    m.macro_r += m.recall[c];
    m.macro_f1 += m.f1[c];
  }
  m.macro_p /= cm.k;
  m.macro_r /= cm.k;
  m.macro_f1 /= cm.k;
  m.macro_f1_harmonic = f1_of(m.macro_p, m.macro_r);
  return m;
}

void write_metrics_report(const Metrics& metrics, const std::vector<std::string>& class_names,
                          const std::string& path, bool harmonic_macro) {
  if (class_names.size() != metrics.f1.size())
    throw std::invalid_argument("class name count does not match metrics");
  OutFile out(path);
  std::ostream& os = out.stream();
  os << "accuracy\t" << fmt_g6(metrics.accuracy) << '\n';
  os << "macro_p\t" << fmt_g6(metrics.macro_p) << '\n';
  os << "macro_r\t" << fmt_g6(metrics.macro_r) << '\n';
  os << "macro_f1\t" << fmt_g6(harmonic_macro ? metrics.macro_f1_harmonic : metrics.macro_f1)
     << '\n';
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    os << "p_" << class_names[c] << '\t' << fmt_g6(metrics.precision[c]) << '\n';
    os << "r_" << class_names[c] << '\t' << fmt_g6(metrics.recall[c]) << '\n';
    os << "f1_" << class_names[c] << '\t' << fmt_g6(metrics.f1[c]) << '\n';
  }
  out.commit();
}

void write_metrics_json(const Metrics& metrics, const std::vector<std::string>& class_names,
                        const std::string& path, bool harmonic_macro) {
  if (class_names.size() != metrics.f1.size())
    throw std::invalid_argument("class name count does not match metrics");
  nlohmann::ordered_json j;
  j["accuracy"] = metrics.accuracy;
  j["macro_p"] = metrics.macro_p;
  j["macro_r"] = metrics.macro_r;
  j["macro_f1"] = harmonic_macro ? metrics.macro_f1_harmonic : metrics.macro_f1;
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    j["p_" + class_names[c]] = metrics.precision[c];
    j["r_" + class_names[c]] = metrics.recall[c];
    j["f1_" + class_names[c]] = metrics.f1[c];
  }
  OutFile out(path);
  out.stream() << j.dump(2) << '\n';
  out.commit();
}

}  // namespace textcat
