#include "textcat/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

#include "textcat/io.hpp"
#include "textcat/utf8.hpp"

namespace textcat {

std::string variant_name(EmbeddingVariant v) {
  switch (v) {
    case EmbeddingVariant::kSgns: return "sgns";
    case EmbeddingVariant::kCweP: return "cwe-p";
    case EmbeddingVariant::kCweL: return "cwe-l";
    case EmbeddingVariant::kFastText: return "fasttext";
  }
  throw std::logic_error("bad variant");
}

EmbeddingVariant variant_from_name(const std::string& name) {
  if (name == "sgns") return EmbeddingVariant::kSgns;
  if (name == "cwe-p") return EmbeddingVariant::kCweP;
  if (name == "cwe-l") return EmbeddingVariant::kCweL;
  if (name == "fasttext") return EmbeddingVariant::kFastText;
  throw std::invalid_argument("unknown embedding variant '" + name + "'");
}

void EmbeddingTrainConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (negatives < 1) throw std::invalid_argument("negatives must be >= 1");
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  if (lr0 <= 0.0) throw std::invalid_argument("lr0 must be > 0");
  if (clusters < 1) throw std::invalid_argument("clusters must be >= 1");
  if (min_n < 1 || min_n > max_n) throw std::invalid_argument("need 1 <= min_n <= max_n");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

int EmbeddingSet::char_slots() const {
  switch (variant) {
    case EmbeddingVariant::kCweP: return 3;
    case EmbeddingVariant::kCweL: return config.clusters;
    default: return 0;
  }
}

NegativeSamplingTable build_sampling_table(const Vocabulary& vocab) {
  if (vocab.size() == 0) throw std::invalid_argument("empty vocabulary");
  NegativeSamplingTable table;
  table.cumulative.resize(vocab.size());
  double total = 0.0;
  for (int i = 0; i < vocab.size(); ++i) total += std::pow(static_cast<double>(vocab.count(i)), 0.75);
  if (total <= 0.0) throw std::runtime_error("sampling table: all counts are zero");
  double acc = 0.0;
  for (int i = 0; i < vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab.count(i)), 0.75) / total;
    table.cumulative[i] = acc;
  }
  table.cumulative.back() = 1.0;
  return table;
}

int NegativeSamplingTable::sample(Rng& rng) const {
  double u = rng.uniform();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<int>(it - cumulative.begin());
}

double NegativeSamplingTable::probability(int id) const {
  double lo = id == 0 ? 0.0 : cumulative[id - 1];
  return cumulative[id] - lo;
}

std::vector<std::string> extract_ngrams(const std::string& word, int min_n, int max_n) {
  if (word.empty()) throw std::invalid_argument("extract_ngrams: empty word");
  if (min_n < 1 || min_n > max_n) throw std::invalid_argument("need 1 <= min_n <= max_n");
  std::vector<char32_t> wrapped;
  wrapped.push_back(U'<');
  for (char32_t cp : utf8_decode(word)) wrapped.push_back(cp);
  wrapped.push_back(U'>');
  int n = static_cast<int>(wrapped.size());
  std::vector<std::string> out;
  for (int start = 0; start < n; ++start) {
    for (int len = min_n; len <= max_n && start + len <= n; ++len) {
      if (start == 0 && len == n) continue;  // the full wrapped form is the word itself
      std::string g;
      for (int k = 0; k < len; ++k) utf8_append(g, wrapped[start + k]);
      out.push_back(std::move(g));
    }
  }
  return out;
}

int assign_cluster(char32_t ch, const double* context_mean, const EmbeddingSet& set) {
  if (set.variant != EmbeddingVariant::kCweL)
    throw std::logic_error("assign_cluster requires a cwe-l embedding set");
  auto it = set.char_index.find(ch);
  if (it == set.char_index.end())
    throw std::runtime_error("unknown character '" + utf8_encode(ch) + "'");
  int slots = set.char_slots();
  if (context_mean == nullptr) return 0;
  int dim = set.dim();
  if (norm2(context_mean, dim) == 0.0) return 0;
  int best = 0;
  double best_cos = cosine(context_mean, set.char_row(it->second, 0), dim);
  for (int s = 1; s < slots; ++s) {
    double c = cosine(context_mean, set.char_row(it->second, s), dim);
    if (c > best_cos) {
      best_cos = c;
      best = s;
    }
  }
  return best;
}

namespace {

// Per-character position slot for cwe-p: first char begin, last char end,
// middle otherwise; single-character words use the begin slot.
int position_slot(int index, int n) {
  if (index == 0) return kPosBegin;
  if (index == n - 1) return kPosEnd;
  return kPosMiddle;
}

double softplus(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

}  // namespace

std::vector<double> compose_word_vector(const std::string& word, const EmbeddingSet& set,
                                        const double* context_mean) {
  int dim = set.dim();
  int id = set.vocab.id(word);
  if (id >= 0) {
    const double* w = set.input.row(id);
    if (set.rows_precomposed || set.variant == EmbeddingVariant::kSgns ||
        id == set.vocab.unk_index())
      return std::vector<double>(w, w + dim);
    if (set.variant == EmbeddingVariant::kCweP || set.variant == EmbeddingVariant::kCweL) {
      std::vector<char32_t> cps = chars_of(word);
      int n = static_cast<int>(cps.size());
      std::vector<double> x(dim, 0.0);
      for (int k = 0; k < n; ++k) {
        auto it = set.char_index.find(cps[k]);
        if (it == set.char_index.end())
          throw std::runtime_error("unknown character '" + utf8_encode(cps[k]) + "'");
        int slot = set.variant == EmbeddingVariant::kCweP
                       ? position_slot(k, n)
                       : assign_cluster(cps[k], context_mean, set);
        axpy(1.0 / n, set.char_row(it->second, slot), x.data(), dim);
      }
      for (int d = 0; d < dim; ++d) x[d] = 0.5 * (w[d] + x[d]);
      return x;
    }
    // fasttext, in vocab: (w + sum of n-gram vectors) / (1 + G)
    std::vector<std::string> grams = extract_ngrams(word, set.config.min_n, set.config.max_n);
    std::vector<double> x(w, w + dim);
    for (const auto& g : grams) {
      auto it = set.ngram_index.find(g);
      if (it != set.ngram_index.end()) axpy(1.0, set.ngram_vectors.row(it->second), x.data(), dim);
    }
    double scale = 1.0 / (1.0 + static_cast<double>(grams.size()));
    for (int d = 0; d < dim; ++d) x[d] *= scale;
    return x;
  }
  // OOV: only fasttext can compose, from the known n-gram vectors.
  if (set.variant != EmbeddingVariant::kFastText)
    throw std::runtime_error("'" + word + "' is out of vocabulary for " + variant_name(set.variant));
  std::vector<std::string> grams = extract_ngrams(word, set.config.min_n, set.config.max_n);
  std::vector<double> x(dim, 0.0);
  int known = 0;
  for (const auto& g : grams) {
    auto it = set.ngram_index.find(g);
    if (it != set.ngram_index.end()) {
      axpy(1.0, set.ngram_vectors.row(it->second), x.data(), dim);
      ++known;
    }
  }
  if (known > 0)
    for (int d = 0; d < dim; ++d) x[d] /= known;
  return x;
}

EmbeddingSet init_embedding_set(const Vocabulary& vocab, const EmbeddingTrainConfig& config) {
  config.validate();
  EmbeddingSet set;
  set.vocab = vocab;
  set.variant = config.variant;
  set.config = config;
  int dim = config.dim;
  int v = vocab.size();

  // Side-table keys come from the real tokens only; the UNK row never
  // decomposes.
  if (config.variant == EmbeddingVariant::kCweP || config.variant == EmbeddingVariant::kCweL) {
    std::set<char32_t> chars;
    for (int i = 0; i < v; ++i) {
      if (i == vocab.unk_index()) continue;
      for (char32_t cp : chars_of(vocab.token(i))) chars.insert(cp);
    }
    set.chars.assign(chars.begin(), chars.end());
    for (std::size_t i = 0; i < set.chars.size(); ++i)
      set.char_index.emplace(set.chars[i], static_cast<int>(i));
  } else if (config.variant == EmbeddingVariant::kFastText) {
    std::set<std::string> grams;
    for (int i = 0; i < v; ++i) {
      if (i == vocab.unk_index()) continue;
      for (auto& g : extract_ngrams(vocab.token(i), config.min_n, config.max_n))
        grams.insert(std::move(g));
    }
    set.ngrams.assign(grams.begin(), grams.end());
    for (std::size_t i = 0; i < set.ngrams.size(); ++i)
      set.ngram_index.emplace(set.ngrams[i], static_cast<int>(i));
  }

  Rng rng(config.seed);
  double bound = 0.5 / dim;
  set.input = Matrix(v, dim);
  for (int i = 0; i < v; ++i) {
    double* row = set.input.row(i);
    for (int d = 0; d < dim; ++d) row[d] = rng.uniform(-bound, bound);
  }
  set.output = Matrix(v, dim);

  if (config.variant == EmbeddingVariant::kCweP) {
    set.char_vectors = Matrix(static_cast<int>(set.chars.size()) * 3, dim);
    for (int r = 0; r < set.char_vectors.rows; ++r) {
      double* row = set.char_vectors.row(r);
      for (int d = 0; d < dim; ++d) row[d] = rng.uniform(-bound, bound);
    }
  } else if (config.variant == EmbeddingVariant::kCweL) {
    // Each cluster starts as a small perturbation of the character's base
    // draw so the clusters can drift apart during training.
    set.char_vectors = Matrix(static_cast<int>(set.chars.size()) * config.clusters, dim);
    std::vector<double> base(dim);
    for (std::size_t c = 0; c < set.chars.size(); ++c) {
      for (int d = 0; d < dim; ++d) base[d] = rng.uniform(-bound, bound);
      for (int s = 0; s < config.clusters; ++s) {
        double* row = set.char_vectors.row(static_cast<int>(c) * config.clusters + s);
        for (int d = 0; d < dim; ++d) row[d] = base[d] + rng.uniform(-0.1 * bound, 0.1 * bound);
      }
    }
  } else if (config.variant == EmbeddingVariant::kFastText) {
    set.ngram_vectors = Matrix(static_cast<int>(set.ngrams.size()), dim);
    for (int r = 0; r < set.ngram_vectors.rows; ++r) {
      double* row = set.ngram_vectors.row(r);
      for (int d = 0; d < dim; ++d) row[d] = rng.uniform(-bound, bound);
    }
  }
  return set;
}

double sgns_pair_loss(const double* x, const Matrix& output, int pos_index,
                      const std::vector<int>& neg_indices) {
  int dim = output.cols;
  double loss = -softplus(-dot(output.row(pos_index), x, dim));
  for (int n : neg_indices) loss += -softplus(dot(output.row(n), x, dim));
  return loss;
}

std::vector<double> sgns_pair_apply(Matrix& output, const double* x, int pos_index,
                                    const std::vector<int>& neg_indices, double lr) {
  int dim = output.cols;
  std::vector<double> grad(dim, 0.0);
  // Positive pair: dL/df = 1 - sigma(f).
  {
    double* u = output.row(pos_index);
    double coef = 1.0 - sigmoid(dot(u, x, dim));
    axpy(coef, u, grad.data(), dim);
    axpy(lr * coef, x, u, dim);
  }
  // Negatives: dL/df = -sigma(f).
  for (int n : neg_indices) {
    double* u = output.row(n);
    double coef = -sigmoid(dot(u, x, dim));
    axpy(coef, u, grad.data(), dim);
    axpy(lr * coef, x, u, dim);
  }
  return grad;
}

std::vector<int> sample_negatives(const NegativeSamplingTable& table, int pos_index, int count,
                                  Rng& rng) {
  std::vector<int> negs;
  negs.reserve(count);
  for (int i = 0; i < count; ++i) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      int s = table.sample(rng);
      if (s != pos_index) {
        negs.push_back(s);
        break;
      }
    }
  }
  return negs;
}

std::vector<double> sgns_pair_update(Matrix& output, const double* x, int context_index,
                                     const NegativeSamplingTable& table, Rng& rng, double lr,
                                     int negatives) {
  if (lr < 0.0) throw std::invalid_argument("lr must be >= 0");
  std::vector<int> negs = sample_negatives(table, context_index, negatives, rng);
  return sgns_pair_apply(output, x, context_index, negs, lr);
}

namespace {

// Precomputed decomposition of each vocabulary word, so the training loop
// avoids re-decoding UTF-8 per center position.
struct WordPieces {
  std::vector<int> char_indices;  // cwe variants
  std::vector<int> gram_rows;     // fasttext
};

std::vector<WordPieces> precompute_pieces(const EmbeddingSet& set) {
  std::vector<WordPieces> pieces(set.vocab.size());
  for (int i = 0; i < set.vocab.size(); ++i) {
    if (i == set.vocab.unk_index()) continue;
    const std::string& tok = set.vocab.token(i);
    if (set.variant == EmbeddingVariant::kCweP || set.variant == EmbeddingVariant::kCweL) {
      for (char32_t cp : chars_of(tok)) pieces[i].char_indices.push_back(set.char_index.at(cp));
    } else if (set.variant == EmbeddingVariant::kFastText) {
      for (const auto& g : extract_ngrams(tok, set.config.min_n, set.config.max_n))
        pieces[i].gram_rows.push_back(set.ngram_index.at(g));
    }
  }
  return pieces;
}

struct TrainerShared {
  EmbeddingSet* set;
  const std::vector<std::vector<int>>* sentences;
  const NegativeSamplingTable* table;
  const std::vector<WordPieces>* pieces;
  std::atomic<long long> processed{0};
  long long total_updates = 0;
};

void train_worker(TrainerShared& sh, int worker_id, int workers) {
  EmbeddingSet& set = *sh.set;
  const EmbeddingTrainConfig& cfg = set.config;
  int dim = cfg.dim;
  Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(worker_id)));
  double lr_floor_ratio = 1e-4;

  std::vector<double> x(dim);
  std::vector<double> ctx_mean(dim);
  std::vector<double> grad(dim);
  std::vector<int> chosen_slots;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t si = worker_id; si < sh.sentences->size(); si += workers) {
      const std::vector<int>& ids = (*sh.sentences)[si];
      int n = static_cast<int>(ids.size());
      for (int t = 0; t < n; ++t) {
        long long done = sh.processed.fetch_add(1, std::memory_order_relaxed);
        double frac = static_cast<double>(done) / static_cast<double>(sh.total_updates);
        double lr = cfg.lr0 * (1.0 - (1.0 - lr_floor_ratio) * std::min(frac, 1.0));

        int b = 1 + static_cast<int>(rng.below(cfg.window));
        int lo = std::max(0, t - b);
        int hi = std::min(n - 1, t + b);
        if (hi - lo < 1) continue;  // no context words

        int center = ids[t];
        const WordPieces& wp = (*sh.pieces)[center];
        const double* w = set.input.row(center);
        bool plain = set.variant == EmbeddingVariant::kSgns || center == set.vocab.unk_index();

        chosen_slots.clear();
        if (plain) {
          std::copy(w, w + dim, x.begin());
        } else if (set.variant == EmbeddingVariant::kCweP ||
                   set.variant == EmbeddingVariant::kCweL) {
          if (set.variant == EmbeddingVariant::kCweL) {
            std::fill(ctx_mean.begin(), ctx_mean.end(), 0.0);
            int cn = 0;
            for (int j = lo; j <= hi; ++j) {
              if (j == t) continue;
              axpy(1.0, set.input.row(ids[j]), ctx_mean.data(), dim);
              ++cn;
            }
            for (int d = 0; d < dim; ++d) ctx_mean[d] /= cn;
          }
          int nch = static_cast<int>(wp.char_indices.size());
          std::fill(x.begin(), x.end(), 0.0);
          bool have_ctx = set.variant == EmbeddingVariant::kCweL &&
                          norm2(ctx_mean.data(), dim) != 0.0;
          for (int k = 0; k < nch; ++k) {
            int slot;
            if (set.variant == EmbeddingVariant::kCweP) {
              slot = position_slot(k, nch);
            } else {
              slot = 0;
              if (have_ctx) {
                int ci = wp.char_indices[k];
                double best_cos = cosine(ctx_mean.data(), set.char_row(ci, 0), dim);
                for (int s = 1; s < set.char_slots(); ++s) {
                  double c = cosine(ctx_mean.data(), set.char_row(ci, s), dim);
                  if (c > best_cos) {
                    best_cos = c;
                    slot = s;
                  }
                }
              }
            }
            chosen_slots.push_back(slot);
            axpy(1.0 / nch, set.char_row(wp.char_indices[k], slot), x.data(), dim);
          }
          for (int d = 0; d < dim; ++d) x[d] = 0.5 * (w[d] + x[d]);
        } else {  // fasttext
          std::copy(w, w + dim, x.begin());
          for (int gr : wp.gram_rows) axpy(1.0, set.ngram_vectors.row(gr), x.data(), dim);
          double scale = 1.0 / (1.0 + static_cast<double>(wp.gram_rows.size()));
          for (int d = 0; d < dim; ++d) x[d] *= scale;
        }

        for (int j = lo; j <= hi; ++j) {
          if (j == t) continue;
          std::vector<double> g =
              sgns_pair_update(set.output, x.data(), ids[j], *sh.table, rng, lr, cfg.negatives);
          // Distribute the input gradient with the composition weights.
          if (plain) {
            axpy(lr, g.data(), set.input.row(center), dim);
          } else if (set.variant == EmbeddingVariant::kCweP ||
                     set.variant == EmbeddingVariant::kCweL) {
            int nch = static_cast<int>(wp.char_indices.size());
            axpy(0.5 * lr, g.data(), set.input.row(center), dim);
            for (int k = 0; k < nch; ++k)
              axpy(0.5 * lr / nch, g.data(), set.char_row(wp.char_indices[k], chosen_slots[k]),
                   dim);
          } else {
            double scale = 1.0 / (1.0 + static_cast<double>(wp.gram_rows.size()));
            axpy(scale * lr, g.data(), set.input.row(center), dim);
            for (int gr : wp.gram_rows) axpy(scale * lr, g.data(), set.ngram_vectors.row(gr), dim);
          }
        }
      }
    }
  }
}

}  // namespace

EmbeddingSet train_embeddings(const std::vector<std::vector<std::string>>& sentences,
                              const EmbeddingTrainConfig& config) {
  config.validate();
  if (sentences.empty()) throw std::runtime_error("empty corpus");
  Vocabulary vocab = build_vocab(sentences, config.min_count);
  EmbeddingSet set = init_embedding_set(vocab, config);
  NegativeSamplingTable table = build_sampling_table(vocab);
  std::vector<WordPieces> pieces = precompute_pieces(set);

  std::vector<std::vector<int>> id_sentences;
  id_sentences.reserve(sentences.size());
  long long total_tokens = 0;
  for (const auto& sent : sentences) {
    id_sentences.push_back(tokens_to_ids(sent, vocab));
    total_tokens += static_cast<long long>(sent.size());
  }

  TrainerShared sh;
  sh.set = &set;
  sh.sentences = &id_sentences;
  sh.table = &table;
  sh.pieces = &pieces;
  sh.total_updates = std::max<long long>(1, static_cast<long long>(config.epochs) * total_tokens);

  if (config.epochs == 0) return set;
  if (config.workers == 1) {
    train_worker(sh, 0, 1);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < config.workers; ++w)
      threads.emplace_back(train_worker, std::ref(sh), w, config.workers);
    for (auto& th : threads) th.join();
  }
  return set;
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingSet& set, const std::string& token, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::vector<double> q = compose_word_vector(token, set);
  int dim = set.dim();
  if (norm2(q.data(), dim) == 0.0)
    throw std::runtime_error("query vector for '" + token + "' has zero norm");
  int self = set.vocab.id(token);
  std::vector<Neighbor> all;
  all.reserve(set.vocab.size());
  for (int i = 0; i < set.vocab.size(); ++i) {
    if (i == self) continue;
    std::vector<double> cand = compose_word_vector(set.vocab.token(i), set);
    all.push_back({set.vocab.token(i), cosine(q.data(), cand.data(), dim)});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.token < b.token;
  });
  if (static_cast<int>(all.size()) > k) all.resize(k);
  return all;
}

int single_char_audit(const std::vector<Neighbor>& neighbors) {
  int count = 0;
  for (const auto& nb : neighbors)
    if (utf8_length(nb.token) == 1) ++count;
  return count;
}

void save_embeddings(const EmbeddingSet& set, const std::string& path) {
  OutFile out(path);
  std::ostream& os = out.stream();
  int dim = set.dim();
  os << set.vocab.size() << ' ' << dim << '\n';
  for (int i = 0; i < set.vocab.size(); ++i) {
    std::vector<double> vec = compose_word_vector(set.vocab.token(i), set);
    os << set.vocab.token(i);
    for (int d = 0; d < dim; ++d) os << ' ' << fmt_g6(vec[d]);
    os << '\n';
  }
  bool want_sidecar =
      set.variant == EmbeddingVariant::kFastText && set.ngram_vectors.rows > 0;
  if (want_sidecar) {
    OutFile sub(path + ".sub");
    std::ostream& ss = sub.stream();
    ss << variant_name(set.variant) << ' ' << set.ngram_vectors.rows << ' ' << dim << ' '
       << set.config.min_n << ' ' << set.config.max_n << '\n';
    for (int r = 0; r < set.ngram_vectors.rows; ++r) {
      ss << set.ngrams[r];
      const double* row = set.ngram_vectors.row(r);
      for (int d = 0; d < dim; ++d) ss << ' ' << fmt_g6(row[d]);
      ss << '\n';
    }
    sub.commit();
    out.commit();
  } else {
    out.commit();
  }
}

namespace {

std::vector<std::string> next_row(std::istream& is, const std::string& path, long long& lineno) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error(path + ":" + std::to_string(lineno + 1) + ": unexpected end of file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return split_ws(line);
}

}  // namespace

EmbeddingSet load_embeddings(const std::string& path) {
  std::ifstream is = open_input(path);
  long long lineno = 0;
  auto where = [&](long long ln) { return path + ":" + std::to_string(ln); };

  std::vector<std::string> header = next_row(is, path, lineno);
  if (header.size() != 2) throw std::runtime_error(where(lineno) + ": header must be 'V dim'");
  long long v = parse_int(header[0], where(lineno));
  long long dim = parse_int(header[1], where(lineno));
  if (v < 1 || dim < 1) throw std::runtime_error(where(lineno) + ": bad header values");

  EmbeddingSet set;
  set.rows_precomposed = true;
  set.config.dim = static_cast<int>(dim);
  set.input = Matrix(static_cast<int>(v), static_cast<int>(dim));
  std::vector<std::pair<std::string, long long>> rows;
  for (long long i = 0; i < v; ++i) {
    std::vector<std::string> parts = next_row(is, path, lineno);
    if (static_cast<long long>(parts.size()) != dim + 1)
      throw std::runtime_error(where(lineno) + ": expected token + " + std::to_string(dim) +
                               " values, got " + std::to_string(parts.size()));
    rows.emplace_back(parts[0], 1);
    double* dst = set.input.row(static_cast<int>(i));
    for (long long d = 0; d < dim; ++d)
      dst[d] = parse_double(parts[static_cast<std::size_t>(d) + 1], where(lineno));
  }
  std::string extra;
  while (std::getline(is, extra)) {
    if (!extra.empty() && extra != "\r")
      throw std::runtime_error(where(lineno + 1) + ": trailing content after " +
                               std::to_string(v) + " rows");
    ++lineno;
  }

  // Foreign files may lack the UNK slot; append a zero row so downstream
  // consumers always have one.
  bool has_unk = false;
  for (auto& [tok, cnt] : rows)
    if (tok == Vocabulary::kUnkToken) has_unk = true;
  if (!has_unk) {
    rows.emplace_back(Vocabulary::kUnkToken, 0);
    Matrix grown(set.input.rows + 1, set.input.cols);
    std::copy(set.input.a.begin(), set.input.a.end(), grown.a.begin());
    set.input = std::move(grown);
  }
  set.vocab = vocab_from_rows(rows);
  set.output = Matrix(set.input.rows, set.input.cols);

  std::string sub_path = path + ".sub";
  if (std::ifstream probe(sub_path, std::ios::binary); probe.good()) {
    long long sln = 0;
    std::vector<std::string> sh = next_row(probe, sub_path, sln);
    if (sh.size() != 5)
      throw std::runtime_error(sub_path + ":1: header must be 'variant rows dim min_n max_n'");
    set.variant = variant_from_name(sh[0]);
    long long rows_n = parse_int(sh[1], sub_path + ":1");
    long long sdim = parse_int(sh[2], sub_path + ":1");
    if (sdim != dim) throw std::runtime_error(sub_path + ":1: dim mismatch with " + path);
    set.config.min_n = static_cast<int>(parse_int(sh[3], sub_path + ":1"));
    set.config.max_n = static_cast<int>(parse_int(sh[4], sub_path + ":1"));
    set.ngram_vectors = Matrix(static_cast<int>(rows_n), static_cast<int>(dim));
    for (long long r = 0; r < rows_n; ++r) {
      std::vector<std::string> parts = next_row(probe, sub_path, sln);
      if (static_cast<long long>(parts.size()) != dim + 1)
        throw std::runtime_error(sub_path + ":" + std::to_string(sln) + ": bad row arity");
      set.ngrams.push_back(parts[0]);
      set.ngram_index.emplace(parts[0], static_cast<int>(r));
      double* dst = set.ngram_vectors.row(static_cast<int>(r));
      for (long long d = 0; d < dim; ++d)
        dst[d] = parse_double(parts[static_cast<std::size_t>(d) + 1],
                              sub_path + ":" + std::to_string(sln));
    }
  }
  set.config.variant = set.variant;
  return set;
}

}  // namespace textcat
