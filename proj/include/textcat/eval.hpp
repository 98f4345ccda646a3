#pragma once

#include <string>
#include <vector>

namespace textcat {

// K x K counts, rows = gold, columns = predicted.
struct ConfusionMatrix {
  int k = 0;
  std::vector<long long> cells;
  long long total = 0;

  explicit ConfusionMatrix(int k_ = 0) : k(k_), cells(static_cast<std::size_t>(k_) * k_, 0) {}
  long long& at(int gold, int pred) { return cells[static_cast<std::size_t>(gold) * k + pred]; }
  long long at(int gold, int pred) const {
    return cells[static_cast<std::size_t>(gold) * k + pred];
  }
  long long row_sum(int gold) const;
  long long col_sum(int pred) const;
};

ConfusionMatrix confusion(const std::vector<int>& golds, const std::vector<int>& preds, int k);

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> precision, recall, f1;
  double macro_p = 0.0;
  double macro_r = 0.0;
  double macro_f1 = 0.0;           // unweighted mean of per-class F1
  double macro_f1_harmonic = 0.0;  // 2 * macro_p * macro_r / (macro_p + macro_r)
};

// Per class: P = diag/colsum, R = diag/rowsum, F1 = 2PR/(P+R); every 0/0
// collapses to 0. Macro averages are unweighted means over all K classes,
// absent classes included.
Metrics compute_metrics(const ConfusionMatrix& cm);

// Flat `key<TAB>value` lines: accuracy, macro_p, macro_r, macro_f1, then
// p_<class>, r_<class>, f1_<class> per class in order. With harmonic_macro
// the macro_f1 value is the harmonic aggregation instead of the F1 mean.
void write_metrics_report(const Metrics& metrics, const std::vector<std::string>& class_names,
                          const std::string& path, bool harmonic_macro = false);
void write_metrics_json(const Metrics& metrics, const std::vector<std::string>& class_names,
                        const std::string& path, bool harmonic_macro = false);

}  // namespace textcat
