#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "textcat/corpus.hpp"
#include "textcat/embeddings.hpp"
#include "textcat/matrix.hpp"

namespace textcat {

enum class Arch { kNbow, kCnn, kLstm };

std::string arch_name(Arch arch);
Arch arch_from_name(const std::string& name);

enum class InitMode { kPretrained, kRandomWord, kRandomChar };

std::string init_mode_name(InitMode mode);
InitMode init_mode_from_name(const std::string& name);

struct NetConfig {
  Arch arch = Arch::kNbow;
  int dim = 300;
  int num_classes = 2;
  int filter_width = 3;
  int num_filters = 128;
  int hidden = 128;
  int max_len = 30;
  double lr = 1e-3;
  int epochs = 10;
  int batch_size = 64;
  std::uint64_t seed = 1;
  bool fine_tune_embeddings = true;
  InitMode init = InitMode::kRandomWord;
  bool char_tokens = false;  // consume characters instead of words

  void validate() const;
};

// Embedding lookup -> encoder -> softmax. The embedding matrix has V+1 rows;
// the extra last row is the padding slot used to right-pad sequences shorter
// than the convolution width. It stays zero and receives no gradient.
struct ClassifierModel {
  NetConfig config;
  Vocabulary vocab;
  std::vector<std::string> class_names;
  Matrix embedding;          // (V+1) x dim
  Matrix conv_w;             // F x (filter_width*dim)
  Matrix conv_b;             // F x 1
  Matrix lstm_wx;            // 4H x dim, gate rows packed i,f,o,g
  Matrix lstm_wh;            // 4H x H
  Matrix lstm_b;             // 4H x 1
  Matrix out_w;              // K x encoder_width
  Matrix out_b;              // K x 1

  int pad_index() const { return vocab.size(); }
  int encoder_width() const;
  bool char_granularity() const { return config.char_tokens; }
  // Trainable tensors in a fixed order (only those the arch uses):
  // embedding, conv_w, conv_b, lstm_wx, lstm_wh, lstm_b, out_w, out_b.
  std::vector<Matrix*> parameters();
  std::vector<const Matrix*> parameters() const;
  std::vector<std::string> parameter_names() const;
};

struct TrainReport {
  std::vector<double> train_loss;    // one entry per epoch
  std::vector<double> dev_accuracy;  // one entry per epoch
  int best_epoch = 0;                // 1-based; 0 when no epochs ran
  double best_dev_accuracy = 0.0;
};

struct Example {
  std::vector<int> ids;
  int label = 0;
};

ClassifierModel init_model(const NetConfig& config, const Vocabulary& vocab,
                           const std::vector<std::string>& class_names,
                           const EmbeddingSet* pretrained = nullptr);

// Encoder output before the softmax layer: mean row (NBoW), max-over-time
// pooled convolution features (CNN), or the final hidden state (LSTM).
// Truncates to config.max_len first; throws on an empty sequence.
std::vector<double> encode(const ClassifierModel& model, const std::vector<int>& ids);

std::vector<double> forward_logits(const ClassifierModel& model, const std::vector<int>& ids);

std::vector<double> softmax(const std::vector<double>& logits);

// Smallest index among the maxima.
int argmax_index(const std::vector<double>& values);

// Mean cross-entropy over the batch. `grads` is resized to match
// parameters() and filled with the batch-mean gradient; when
// fine_tune_embeddings is off the embedding gradient is left at zero.
double loss_and_grad(const ClassifierModel& model, const std::vector<Example>& batch,
                     std::vector<Matrix>& grads);

// Mini-batch Adam for config.epochs epochs, reshuffling per epoch; returns
// the parameter snapshot from the epoch with the highest dev accuracy
// (earliest on ties) plus the per-epoch trace.
std::pair<ClassifierModel, TrainReport> train_classifier(ClassifierModel model,
                                                         const std::vector<Example>& train_set,
                                                         const std::vector<Example>& dev_set);

std::pair<int, std::vector<double>> predict(const ClassifierModel& model,
                                            const std::vector<int>& ids);

double dataset_accuracy(const ClassifierModel& model, const std::vector<Example>& set);

void save_model(const ClassifierModel& model, const std::string& path);
ClassifierModel load_model(const std::string& path);

}  // namespace textcat
