#include "textcat/nets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "textcat/io.hpp"
#include "textcat/rng.hpp"

namespace textcat {

std::string arch_name(Arch arch) {
  switch (arch) {
    case Arch::kNbow: return "nbow";
    case Arch::kCnn: return "cnn";
    case Arch::kLstm: return "lstm";
  }
  throw std::logic_error("bad arch");
}

Arch arch_from_name(const std::string& name) {
  if (name == "nbow") return Arch::kNbow;
  if (name == "cnn") return Arch::kCnn;
  if (name == "lstm") return Arch::kLstm;
  throw std::invalid_argument("unknown architecture '" + name + "'");
}

std::string init_mode_name(InitMode mode) {
  switch (mode) {
    case InitMode::kPretrained: return "pretrained";
    case InitMode::kRandomWord: return "random-word";
    case InitMode::kRandomChar: return "random-char";
  }
  throw std::logic_error("bad init mode");
}

InitMode init_mode_from_name(const std::string& name) {
  if (name == "pretrained") return InitMode::kPretrained;
  if (name == "random-word") return InitMode::kRandomWord;
  if (name == "random-char") return InitMode::kRandomChar;
  throw std::invalid_argument("unknown init mode '" + name + "'");
}

void NetConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  if (lr <= 0.0) throw std::invalid_argument("lr must be > 0");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (arch == Arch::kCnn) {
    if (filter_width < 1) throw std::invalid_argument("filter_width must be >= 1");
    if (max_len < filter_width) throw std::invalid_argument("max_len must be >= filter_width");
    if (num_filters < 1) throw std::invalid_argument("num_filters must be >= 1");
  }
  if (arch == Arch::kLstm && hidden < 1) throw std::invalid_argument("hidden must be >= 1");
  if (init == InitMode::kRandomChar && !char_tokens)
    throw std::invalid_argument("random-char init requires character tokens");
}

int ClassifierModel::encoder_width() const {
  switch (config.arch) {
    case Arch::kNbow: return config.dim;
    case Arch::kCnn: return config.num_filters;
    case Arch::kLstm: return config.hidden;
  }
  throw std::logic_error("bad arch");
}

std::vector<Matrix*> ClassifierModel::parameters() {
  std::vector<Matrix*> out{&embedding};
  if (config.arch == Arch::kCnn) {
    out.push_back(&conv_w);
    out.push_back(&conv_b);
  } else if (config.arch == Arch::kLstm) {
    out.push_back(&lstm_wx);
    out.push_back(&lstm_wh);
    out.push_back(&lstm_b);
  }
  out.push_back(&out_w);
  out.push_back(&out_b);
  return out;
}

std::vector<const Matrix*> ClassifierModel::parameters() const {
  auto mut = const_cast<ClassifierModel*>(this)->parameters();
  return std::vector<const Matrix*>(mut.begin(), mut.end());
}

std::vector<std::string> ClassifierModel::parameter_names() const {
  std::vector<std::string> out{"embedding"};
  if (config.arch == Arch::kCnn) {
    out.push_back("conv_w");
    out.push_back("conv_b");
  } else if (config.arch == Arch::kLstm) {
    out.push_back("lstm_wx");
    out.push_back("lstm_wh");
    out.push_back("lstm_b");
  }
  out.push_back("out_w");
  out.push_back("out_b");
  return out;
}

namespace {

void fill_uniform(Matrix& m, Rng& rng, double bound) {
  for (double& v : m.a) v = rng.uniform(-bound, bound);
}

std::vector<int> truncated(const std::vector<int>& ids, int max_len) {
  if (static_cast<int>(ids.size()) <= max_len) return ids;
  return std::vector<int>(ids.begin(), ids.begin() + max_len);
}

void check_ids(const ClassifierModel& model, const std::vector<int>& ids) {
  if (ids.empty()) throw std::invalid_argument("empty token sequence");
  for (int id : ids)
    if (id < 0 || id >= model.vocab.size())
      throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary");
}

}  // namespace

ClassifierModel init_model(const NetConfig& config, const Vocabulary& vocab,
                           const std::vector<std::string>& class_names,
                           const EmbeddingSet* pretrained) {
  config.validate();
  if ((pretrained != nullptr) != (config.init == InitMode::kPretrained))
    throw std::invalid_argument("pretrained embeddings must be given exactly for pretrained init");
  if (pretrained && pretrained->dim() != config.dim)
    throw std::invalid_argument("embedding dim " + std::to_string(pretrained->dim()) +
                                " does not match model dim " + std::to_string(config.dim));
  if (static_cast<int>(class_names.size()) != config.num_classes)
    throw std::invalid_argument("class name count does not match num_classes");

  ClassifierModel model;
  model.config = config;
  model.vocab = vocab;
  model.class_names = class_names;
  int v = vocab.size();
  int dim = config.dim;
  Rng rng(config.seed);

  model.embedding = Matrix(v + 1, dim);  // last row = pad, stays zero
  if (pretrained) {
    for (int i = 0; i < v; ++i) {
      std::vector<double> row = compose_word_vector(vocab.token(i), *pretrained);
      std::copy(row.begin(), row.end(), model.embedding.row(i));
    }
  } else {
    for (int i = 0; i < v; ++i) {
      double* row = model.embedding.row(i);
      for (int d = 0; d < dim; ++d) row[d] = rng.uniform(-0.05, 0.05);
    }
  }

  if (config.arch == Arch::kCnn) {
    model.conv_w = Matrix(config.num_filters, config.filter_width * dim);
    model.conv_b = Matrix(config.num_filters, 1);
    fill_uniform(model.conv_w, rng, 0.05);
    fill_uniform(model.conv_b, rng, 0.05);
  } else if (config.arch == Arch::kLstm) {
    int h = config.hidden;
    model.lstm_wx = Matrix(4 * h, dim);
    model.lstm_wh = Matrix(4 * h, h);
    model.lstm_b = Matrix(4 * h, 1);
    fill_uniform(model.lstm_wx, rng, 0.05);
    fill_uniform(model.lstm_wh, rng, 0.05);
    fill_uniform(model.lstm_b, rng, 0.05);
    // Forget-gate bias starts at 1 so early training does not flush memory.
    for (int r = h; r < 2 * h; ++r) model.lstm_b.at(r, 0) = 1.0;
  }
  model.out_w = Matrix(config.num_classes, model.encoder_width());
  model.out_b = Matrix(config.num_classes, 1);
  fill_uniform(model.out_w, rng, 0.05);
  fill_uniform(model.out_b, rng, 0.05);
  return model;
}

namespace {

// Everything backward needs from one forward pass.
struct ForwardCache {
  std::vector<int> ids;     // truncated
  std::vector<int> padded;  // CNN only: ids right-padded to >= filter_width
  std::vector<double> enc;
  std::vector<double> probs;
  // CNN: per filter, the pooled position and its preactivation.
  std::vector<int> pool_pos;
  std::vector<double> pool_pre;
  // LSTM traces, one row per time step.
  Matrix gi, gf, go, gg, cell, tanh_c, hidden;
};

std::vector<double> encode_cached(const ClassifierModel& model, const std::vector<int>& raw_ids,
                                  ForwardCache* cache) {
  std::vector<int> ids = truncated(raw_ids, model.config.max_len);
  check_ids(model, ids);
  int dim = model.config.dim;
  const Arch arch = model.config.arch;
  std::vector<double> enc;

  if (arch == Arch::kNbow) {
    enc.assign(dim, 0.0);
    for (int id : ids) axpy(1.0, model.embedding.row(id), enc.data(), dim);
    double inv = 1.0 / static_cast<double>(ids.size());
    for (double& v : enc) v *= inv;
  } else if (arch == Arch::kCnn) {
    int fw = model.config.filter_width;
    int f_count = model.config.num_filters;
    std::vector<int> padded = ids;
    while (static_cast<int>(padded.size()) < fw) padded.push_back(model.pad_index());
    int positions = static_cast<int>(padded.size()) - fw + 1;
    enc.assign(f_count, 0.0);
    std::vector<int> pool_pos(f_count, 0);
    std::vector<double> pool_pre(f_count, 0.0);
    std::vector<double> window(static_cast<std::size_t>(fw) * dim);
    std::vector<double> best_h(f_count, -1.0);
    for (int p = 0; p < positions; ++p) {
      for (int k = 0; k < fw; ++k) {
        const double* e = model.embedding.row(padded[p + k]);
        std::copy(e, e + dim, window.begin() + static_cast<std::size_t>(k) * dim);
      }
      for (int f = 0; f < f_count; ++f) {
        double a = model.conv_b.at(f, 0) + dot(model.conv_w.row(f), window.data(), fw * dim);
        double h = a > 0.0 ? a : 0.0;
        if (h > best_h[f]) {  // strict: ties keep the earliest position
          best_h[f] = h;
          pool_pos[f] = p;
          pool_pre[f] = a;
        }
      }
    }
    for (int f = 0; f < f_count; ++f) enc[f] = best_h[f];
    if (cache) {
      cache->padded = std::move(padded);
      cache->pool_pos = std::move(pool_pos);
      cache->pool_pre = std::move(pool_pre);
    }
  } else {  // LSTM
    int h_dim = model.config.hidden;
    int n = static_cast<int>(ids.size());
    Matrix gi(n, h_dim), gf(n, h_dim), go(n, h_dim), gg(n, h_dim);
    Matrix cell(n, h_dim), tanh_c(n, h_dim), hidden_m(n, h_dim);
    std::vector<double> z(4 * h_dim);
    std::vector<double> h_prev(h_dim, 0.0), c_prev(h_dim, 0.0);
    for (int t = 0; t < n; ++t) {
      const double* x = model.embedding.row(ids[t]);
      for (int r = 0; r < 4 * h_dim; ++r)
        z[r] = model.lstm_b.at(r, 0) + dot(model.lstm_wx.row(r), x, dim) +
               dot(model.lstm_wh.row(r), h_prev.data(), h_dim);
      for (int j = 0; j < h_dim; ++j) {
        double iv = sigmoid(z[j]);
        double fv = sigmoid(z[h_dim + j]);
        double ov = sigmoid(z[2 * h_dim + j]);
        double gv = std::tanh(z[3 * h_dim + j]);
        double cv = fv * c_prev[j] + iv * gv;
        double tcv = std::tanh(cv);
        gi.at(t, j) = iv;
        gf.at(t, j) = fv;
        go.at(t, j) = ov;
        gg.at(t, j) = gv;
        cell.at(t, j) = cv;
        tanh_c.at(t, j) = tcv;
        hidden_m.at(t, j) = ov * tcv;
      }
      h_prev.assign(hidden_m.row(t), hidden_m.row(t) + h_dim);
      c_prev.assign(cell.row(t), cell.row(t) + h_dim);
    }
    enc = h_prev;
    if (cache) {
      cache->gi = std::move(gi);
      cache->gf = std::move(gf);
      cache->go = std::move(go);
      cache->gg = std::move(gg);
      cache->cell = std::move(cell);
      cache->tanh_c = std::move(tanh_c);
      cache->hidden = std::move(hidden_m);
    }
  }
  if (cache) {
    cache->ids = std::move(ids);
    cache->enc = enc;
  }
  return enc;
}

}  // namespace

std::vector<double> encode(const ClassifierModel& model, const std::vector<int>& ids) {
  return encode_cached(model, ids, nullptr);
}

std::vector<double> forward_logits(const ClassifierModel& model, const std::vector<int>& ids) {
  std::vector<double> enc = encode_cached(model, ids, nullptr);
  int k = model.config.num_classes;
  std::vector<double> logits(k);
  for (int c = 0; c < k; ++c)
    logits[c] = model.out_b.at(c, 0) + dot(model.out_w.row(c), enc.data(), model.encoder_width());
  return logits;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
  double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

int argmax_index(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

namespace {

struct GradView {
  Matrix* embedding = nullptr;
  Matrix* conv_w = nullptr;
  Matrix* conv_b = nullptr;
  Matrix* lstm_wx = nullptr;
  Matrix* lstm_wh = nullptr;
  Matrix* lstm_b = nullptr;
  Matrix* out_w = nullptr;
  Matrix* out_b = nullptr;
};

GradView grad_view(const ClassifierModel& model, std::vector<Matrix>& grads) {
  GradView gv;
  std::size_t i = 0;
  gv.embedding = &grads[i++];
  if (model.config.arch == Arch::kCnn) {
    gv.conv_w = &grads[i++];
    gv.conv_b = &grads[i++];
  } else if (model.config.arch == Arch::kLstm) {
    gv.lstm_wx = &grads[i++];
    gv.lstm_wh = &grads[i++];
    gv.lstm_b = &grads[i++];
  }
  gv.out_w = &grads[i++];
  gv.out_b = &grads[i++];
  return gv;
}

// Adds d(example loss)/d(params), scaled by `weight`, into the grad view.
double example_backward(const ClassifierModel& model, const Example& ex, double weight,
                        GradView& gv) {
  ForwardCache cache;
  encode_cached(model, ex.ids, &cache);
  int k = model.config.num_classes;
  int width = model.encoder_width();
  int dim = model.config.dim;
  bool tune = model.config.fine_tune_embeddings;

  std::vector<double> logits(k);
  for (int c = 0; c < k; ++c)
    logits[c] = model.out_b.at(c, 0) + dot(model.out_w.row(c), cache.enc.data(), width);
  std::vector<double> probs = softmax(logits);
  if (ex.label < 0 || ex.label >= k) throw std::out_of_range("label outside class range");
  double loss = -std::log(std::max(probs[ex.label], 1e-300));

  std::vector<double> dlogits = probs;
  dlogits[ex.label] -= 1.0;
  std::vector<double> denc(width, 0.0);
  for (int c = 0; c < k; ++c) {
    axpy(weight * dlogits[c], cache.enc.data(), gv.out_w->row(c), width);
    gv.out_b->at(c, 0) += weight * dlogits[c];
    axpy(dlogits[c], model.out_w.row(c), denc.data(), width);
  }

  const Arch arch = model.config.arch;
  if (arch == Arch::kNbow) {
    if (tune) {
      double inv = weight / static_cast<double>(cache.ids.size());
      for (int id : cache.ids) axpy(inv, denc.data(), gv.embedding->row(id), dim);
    }
  } else if (arch == Arch::kCnn) {
    int fw = model.config.filter_width;
    for (int f = 0; f < model.config.num_filters; ++f) {
      if (cache.pool_pre[f] <= 0.0) continue;  // ReLU blocked
      double da = denc[f];
      int p = cache.pool_pos[f];
      gv.conv_b->at(f, 0) += weight * da;
      for (int kk = 0; kk < fw; ++kk) {
        int id = cache.padded[p + kk];
        const double* e = model.embedding.row(id);
        double* wrow = gv.conv_w->row(f) + static_cast<std::size_t>(kk) * dim;
        axpy(weight * da, e, wrow, dim);
        if (tune && id != model.pad_index()) {
          const double* w = model.conv_w.row(f) + static_cast<std::size_t>(kk) * dim;
          axpy(weight * da, w, gv.embedding->row(id), dim);
        }
      }
    }
  } else {  // LSTM
    int h_dim = model.config.hidden;
    int n = static_cast<int>(cache.ids.size());
    std::vector<double> dh = denc;  // gradient w.r.t. h_t, seeded at the last step
    std::vector<double> dc(h_dim, 0.0);
    std::vector<double> dz(4 * h_dim);
    std::vector<double> dh_prev(h_dim);
    for (int t = n - 1; t >= 0; --t) {
      const double* iv = cache.gi.row(t);
      const double* fv = cache.gf.row(t);
      const double* ov = cache.go.row(t);
      const double* gvv = cache.gg.row(t);
      const double* tc = cache.tanh_c.row(t);
      const double* c_prev = t > 0 ? cache.cell.row(t - 1) : nullptr;
      for (int j = 0; j < h_dim; ++j) {
        double d_o = dh[j] * tc[j];
        double dcj = dc[j] + dh[j] * ov[j] * (1.0 - tc[j] * tc[j]);
        double d_i = dcj * gvv[j];
        double d_f = dcj * (t > 0 ? c_prev[j] : 0.0);
        double d_g = dcj * iv[j];
        dz[j] = d_i * iv[j] * (1.0 - iv[j]);
        dz[h_dim + j] = d_f * fv[j] * (1.0 - fv[j]);
        dz[2 * h_dim + j] = d_o * ov[j] * (1.0 - ov[j]);
        dz[3 * h_dim + j] = d_g * (1.0 - gvv[j] * gvv[j]);
        dc[j] = dcj * fv[j];  // becomes dc_{t-1}
      }
      const double* x = model.embedding.row(cache.ids[t]);
      const double* h_before = t > 0 ? cache.hidden.row(t - 1) : nullptr;
      std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
      for (int r = 0; r < 4 * h_dim; ++r) {
        gv.lstm_b->at(r, 0) += weight * dz[r];
        axpy(weight * dz[r], x, gv.lstm_wx->row(r), dim);
        if (t > 0) {
          axpy(weight * dz[r], h_before, gv.lstm_wh->row(r), h_dim);
          axpy(dz[r], model.lstm_wh.row(r), dh_prev.data(), h_dim);
        }
        if (tune) axpy(weight * dz[r], model.lstm_wx.row(r), gv.embedding->row(cache.ids[t]), dim);
      }
      dh = dh_prev;
    }
  }
  return loss;
}

}  // namespace

double loss_and_grad(const ClassifierModel& model, const std::vector<Example>& batch,
                     std::vector<Matrix>& grads) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  auto params = model.parameters();
  grads.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].rows != params[i]->rows || grads[i].cols != params[i]->cols)
      grads[i] = Matrix(params[i]->rows, params[i]->cols);
    else
      grads[i].zero();
  }
  GradView gv = grad_view(model, grads);
  double weight = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Example& ex : batch) loss += weight * example_backward(model, ex, weight, gv);
  return loss;
}

std::pair<ClassifierModel, TrainReport> train_classifier(ClassifierModel model,
                                                         const std::vector<Example>& train_set,
                                                         const std::vector<Example>& dev_set) {
  if (train_set.empty() || dev_set.empty())
    throw std::invalid_argument("train and dev sets must be non-empty");
  const NetConfig& cfg = model.config;
  TrainReport report;
  if (cfg.epochs == 0) return {std::move(model), report};

  auto params = model.parameters();
  std::vector<Matrix> m_state(params.size()), v_state(params.size()), grads;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_state[i] = Matrix(params[i]->rows, params[i]->cols);
    v_state[i] = Matrix(params[i]->rows, params[i]->cols);
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long step = 0;

  Rng rng(mix_seed(cfg.seed, 1));
  std::vector<int> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  ClassifierModel best_model = model;
  double best_acc = -1.0;
  int n = static_cast<int>(train_set.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      int stop = std::min(n, start + cfg.batch_size);
      std::vector<Example> batch;
      batch.reserve(stop - start);
      for (int i = start; i < stop; ++i) batch.push_back(train_set[order[i]]);
      double batch_loss = loss_and_grad(model, batch, grads);
      loss_sum += batch_loss * static_cast<double>(batch.size());
      ++step;
      double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t pi = 0; pi < params.size(); ++pi) {
        double* theta = params[pi]->a.data();
        double* g = grads[pi].a.data();
        double* m = m_state[pi].a.data();
        double* v = v_state[pi].a.data();
        std::size_t count = params[pi]->a.size();
        for (std::size_t j = 0; j < count; ++j) {
          m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
          v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
          theta[j] -= cfg.lr * (m[j] / corr1) / (std::sqrt(v[j] / corr2) + eps);
        }
      }
    }
    double epoch_loss = loss_sum / static_cast<double>(n);
    double acc = dataset_accuracy(model, dev_set);
    report.train_loss.push_back(epoch_loss);
    report.dev_accuracy.push_back(acc);
    if (acc > best_acc) {
      best_acc = acc;
      report.best_epoch = epoch;
      best_model = model;
    }
  }
  report.best_dev_accuracy = best_acc;
  return {std::move(best_model), report};
}

std::pair<int, std::vector<double>> predict(const ClassifierModel& model,
                                            const std::vector<int>& ids) {
  std::vector<double> probs = softmax(forward_logits(model, ids));
  return {argmax_index(probs), std::move(probs)};
}

double dataset_accuracy(const ClassifierModel& model, const std::vector<Example>& set) {
  if (set.empty()) throw std::invalid_argument("empty evaluation set");
  int correct = 0;
  for (const Example& ex : set)
    if (predict(model, ex.ids).first == ex.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

void save_model(const ClassifierModel& model, const std::string& path) {
  OutFile out(path);
  std::ostream& os = out.stream();
  const NetConfig& c = model.config;
  os << "textcat-model\n";
  os << "arch " << arch_name(c.arch) << '\n';
  os << "init " << init_mode_name(c.init) << '\n';
  os << "granularity " << (c.char_tokens ? "char" : "word") << '\n';
  os << "dim " << c.dim << '\n';
  os << "num_classes " << c.num_classes << '\n';
  os << "filter_width " << c.filter_width << '\n';
  os << "num_filters " << c.num_filters << '\n';
  os << "hidden " << c.hidden << '\n';
  os << "max_len " << c.max_len << '\n';
  os << "lr " << fmt_g6(c.lr) << '\n';
  os << "epochs " << c.epochs << '\n';
  os << "batch_size " << c.batch_size << '\n';
  os << "seed " << c.seed << '\n';
  os << "fine_tune " << (c.fine_tune_embeddings ? 1 : 0) << '\n';
  os << "classes " << model.class_names.size() << '\n';
  for (const auto& name : model.class_names) os << name << '\n';
  os << "vocab " << model.vocab.size() << '\n';
  for (int i = 0; i < model.vocab.size(); ++i)
    os << model.vocab.token(i) << ' ' << model.vocab.count(i) << '\n';
  auto params = model.parameters();
  auto names = model.parameter_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    os << "tensor " << names[i] << ' ' << params[i]->rows << ' ' << params[i]->cols << '\n';
    for (int r = 0; r < params[i]->rows; ++r) {
      const double* row = params[i]->row(r);
      for (int cc = 0; cc < params[i]->cols; ++cc) {
        if (cc) os << ' ';
        os << fmt_g6(row[cc]);
      }
      os << '\n';
    }
  }
  os << "end\n";
  out.commit();
}

namespace {

std::string expect_line(std::istream& is, const std::string& path, long long& lineno) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error(path + ":" + std::to_string(lineno + 1) + ": unexpected end of file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string keyed_value(std::istream& is, const std::string& path, long long& lineno,
                        const std::string& key) {
  std::string line = expect_line(is, path, lineno);
  std::string prefix = key + " ";
  if (line.rfind(prefix, 0) != 0)
    throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected '" + key + " ...'");
  return line.substr(prefix.size());
}

}  // namespace

ClassifierModel load_model(const std::string& path) {
  std::ifstream is = open_input(path);
  long long lineno = 0;
  auto where = [&]() { return path + ":" + std::to_string(lineno); };

  if (expect_line(is, path, lineno) != "textcat-model")
    throw std::runtime_error(path + ":1: not a classifier model file");
  ClassifierModel model;
  NetConfig c;
  c.arch = arch_from_name(keyed_value(is, path, lineno, "arch"));
  c.init = init_mode_from_name(keyed_value(is, path, lineno, "init"));
  {
    std::string gran = keyed_value(is, path, lineno, "granularity");
    if (gran != "word" && gran != "char")
      throw std::runtime_error(where() + ": granularity must be 'word' or 'char'");
    c.char_tokens = gran == "char";
  }
  c.dim = static_cast<int>(parse_int(keyed_value(is, path, lineno, "dim"), where()));
  c.num_classes = static_cast<int>(parse_int(keyed_value(is, path, lineno, "num_classes"), where()));
  c.filter_width =
      static_cast<int>(parse_int(keyed_value(is, path, lineno, "filter_width"), where()));
  c.num_filters =
      static_cast<int>(parse_int(keyed_value(is, path, lineno, "num_filters"), where()));
  c.hidden = static_cast<int>(parse_int(keyed_value(is, path, lineno, "hidden"), where()));
  c.max_len = static_cast<int>(parse_int(keyed_value(is, path, lineno, "max_len"), where()));
  c.lr = parse_double(keyed_value(is, path, lineno, "lr"), where());
  c.epochs = static_cast<int>(parse_int(keyed_value(is, path, lineno, "epochs"), where()));
  c.batch_size = static_cast<int>(parse_int(keyed_value(is, path, lineno, "batch_size"), where()));
  c.seed = static_cast<std::uint64_t>(parse_int(keyed_value(is, path, lineno, "seed"), where()));
  c.fine_tune_embeddings = parse_int(keyed_value(is, path, lineno, "fine_tune"), where()) != 0;
  model.config = c;

  long long k = parse_int(keyed_value(is, path, lineno, "classes"), where());
  if (k != c.num_classes) throw std::runtime_error(where() + ": class count mismatch");
  for (long long i = 0; i < k; ++i) model.class_names.push_back(expect_line(is, path, lineno));

  long long v = parse_int(keyed_value(is, path, lineno, "vocab"), where());
  std::vector<std::pair<std::string, long long>> rows;
  for (long long i = 0; i < v; ++i) {
    std::vector<std::string> parts = split_ws(expect_line(is, path, lineno));
    if (parts.size() != 2) throw std::runtime_error(where() + ": expected 'token count'");
    rows.emplace_back(parts[0], parse_int(parts[1], where()));
  }
  model.vocab = vocab_from_rows(rows);

  auto names = model.parameter_names();
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<std::string> head = split_ws(expect_line(is, path, lineno));
    if (head.size() != 4 || head[0] != "tensor" || head[1] != names[i])
      throw std::runtime_error(where() + ": expected tensor '" + names[i] + "'");
    int r = static_cast<int>(parse_int(head[2], where()));
    int cc = static_cast<int>(parse_int(head[3], where()));
    *params[i] = Matrix(r, cc);
    for (int rr = 0; rr < r; ++rr) {
      std::vector<std::string> vals = split_ws(expect_line(is, path, lineno));
      if (static_cast<int>(vals.size()) != cc)
        throw std::runtime_error(where() + ": expected " + std::to_string(cc) + " values");
      double* dst = params[i]->row(rr);
      for (int j = 0; j < cc; ++j) dst[j] = parse_double(vals[j], where());
    }
  }
  if (expect_line(is, path, lineno) != "end")
    throw std::runtime_error(where() + ": expected trailing 'end'");
  if (model.embedding.rows != model.vocab.size() + 1 || model.embedding.cols != c.dim)
    throw std::runtime_error(path + ": embedding shape inconsistent with vocab/dim");
  return model;
}

}  // namespace textcat
