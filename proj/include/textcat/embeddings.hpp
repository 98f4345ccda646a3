#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "textcat/corpus.hpp"
#include "textcat/matrix.hpp"
#include "textcat/rng.hpp"

namespace textcat {

// The four embedding flavors the classifiers consume. All share the same
// skip-gram negative-sampling objective; they differ in how the input-side
// vector of a center word is composed.
enum class EmbeddingVariant { kSgns, kCweP, kCweL, kFastText };

std::string variant_name(EmbeddingVariant v);
EmbeddingVariant variant_from_name(const std::string& name);

struct EmbeddingTrainConfig {
  int dim = 300;
  int window = 5;
  int epochs = 5;
  int negatives = 5;
  int min_count = 5;
  double lr0 = 0.025;
  EmbeddingVariant variant = EmbeddingVariant::kSgns;
  int clusters = 3;  // per-character cluster vectors (kCweL)
  int min_n = 1;     // character n-gram range (kFastText)
  int max_n = 3;
  int workers = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

// Position slots for the per-character vectors of kCweP.
enum CharPosition { kPosBegin = 0, kPosMiddle = 1, kPosEnd = 2 };

// Word vectors plus the variant-specific side tables. `input` holds the word
// vectors w, `output` the context vectors u. Character rows live in
// `char_vectors` (3 rows per character for kCweP, `clusters` rows for kCweL);
// n-gram rows live in `ngram_vectors`. The UNK row trains like any other word
// row but never decomposes into characters or n-grams.
struct EmbeddingSet {
  Vocabulary vocab;
  EmbeddingVariant variant = EmbeddingVariant::kSgns;
  EmbeddingTrainConfig config;
  Matrix input;   // V x dim
  Matrix output;  // V x dim
  // Loaded sets hold already-composed word vectors in `input`; composing an
  // in-vocab word then just returns its row.
  bool rows_precomposed = false;

  std::vector<char32_t> chars;  // sorted by codepoint
  std::unordered_map<char32_t, int> char_index;
  Matrix char_vectors;  // (#chars * slots) x dim, row = char_index * slots + slot

  std::vector<std::string> ngrams;  // sorted
  std::unordered_map<std::string, int> ngram_index;
  Matrix ngram_vectors;

  int dim() const { return input.cols; }
  int char_slots() const;  // rows per character (3, clusters, or 0)
  const double* char_row(int char_idx, int slot) const {
    return char_vectors.row(char_idx * char_slots() + slot);
  }
  double* char_row(int char_idx, int slot) {
    return char_vectors.row(char_idx * char_slots() + slot);
  }
};

// Cumulative count^0.75 distribution over vocabulary indices.
struct NegativeSamplingTable {
  std::vector<double> cumulative;

  int sample(Rng& rng) const;
  double probability(int id) const;
  int size() const { return static_cast<int>(cumulative.size()); }
};

NegativeSamplingTable build_sampling_table(const Vocabulary& vocab);

// Boundary-marked character n-grams of `word`: every contiguous substring of
// "<word>" whose character length falls in [min_n, max_n], as a multiset in
// enumeration order, excluding the full wrapped form (that one is the word's
// own vector). Lengths count Unicode scalar values.
std::vector<std::string> extract_ngrams(const std::string& word, int min_n, int max_n);

// Cluster pick for a kCweL character: argmax_s cosine(context_mean, c^{(s)}),
// smallest index on ties; a null/zero context selects cluster 0.
int assign_cluster(char32_t ch, const double* context_mean, const EmbeddingSet& set);

// Input-side vector of `word` under the set's variant. `context_mean` only
// matters for kCweL (cluster selection). Non-FastText variants reject OOV
// words; FastText composes OOV words from their known n-gram vectors.
std::vector<double> compose_word_vector(const std::string& word, const EmbeddingSet& set,
                                        const double* context_mean = nullptr);

// Fresh parameter state for a training run: word input rows uniform in
// (-0.5/dim, +0.5/dim), output rows zero, side tables per variant. Consumes
// rng draws in a fixed order so runs are reproducible.
EmbeddingSet init_embedding_set(const Vocabulary& vocab, const EmbeddingTrainConfig& config);

// Negative-sampling pair loss log s(u_o.x) + sum log s(-u_n.x), to be
// maximized. Exposed for gradient checks.
double sgns_pair_loss(const double* x, const Matrix& output, int pos_index,
                      const std::vector<int>& neg_indices);

// One positive + negatives update with an explicit negative list: applies
// lr-scaled ascent steps to the output rows and returns the (unscaled) ascent
// gradient with respect to x for the caller to distribute to constituents.
std::vector<double> sgns_pair_apply(Matrix& output, const double* x, int pos_index,
                                    const std::vector<int>& neg_indices, double lr);

// Draws `count` negatives from the table, resampling any draw equal to
// `pos_index` (up to 100 attempts each, then that negative is skipped).
std::vector<int> sample_negatives(const NegativeSamplingTable& table, int pos_index, int count,
                                  Rng& rng);

// Sampling form of the pair update used by the trainer.
std::vector<double> sgns_pair_update(Matrix& output, const double* x, int context_index,
                                     const NegativeSamplingTable& table, Rng& rng, double lr,
                                     int negatives);

// Full SGNS run over in-memory sentences. Single-worker runs are bit-exact
// reproducible under a fixed seed; with workers > 1 parameter updates race
// (standard hogwild) and results vary.
EmbeddingSet train_embeddings(const std::vector<std::vector<std::string>>& sentences,
                              const EmbeddingTrainConfig& config);

struct Neighbor {
  std::string token;
  double cosine;
};

// Top-k vocabulary tokens by cosine to the query's composed vector, query
// excluded, descending similarity with lexicographic tie-break.
std::vector<Neighbor> nearest_neighbors(const EmbeddingSet& set, const std::string& token, int k);

int single_char_audit(const std::vector<Neighbor>& neighbors);

// Text persistence: header `V dim`, then `token v1 ... v_dim` rows at 6
// significant digits. FastText sets also write `<path>.sub` with the n-gram
// rows so OOV composition keeps working after a reload.
void save_embeddings(const EmbeddingSet& set, const std::string& path);
EmbeddingSet load_embeddings(const std::string& path);

}  // namespace textcat
