#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "textcat/bow_svm.hpp"
#include "textcat/corpus.hpp"
#include "textcat/embeddings.hpp"
#include "textcat/ensemble.hpp"
#include "textcat/eval.hpp"
#include "textcat/io.hpp"
#include "textcat/nets.hpp"

using namespace textcat;

namespace {

constexpr const char* kFastTextW11Warning =
    "warning: fasttext embeddings trained with window 11 have repeatedly failed the "
    "single-character neighbor audit (top-10 lists dominated by single-character tokens); "
    "run the `nn` subcommand on a few frequent words before trusting this set";

std::string first_line(const std::string& path) {
  std::ifstream is = open_input(path);
  std::string line;
  std::getline(is, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<Example> to_examples(const std::vector<Headline>& rows, const Vocabulary& vocab,
                                 bool char_tokens) {
  std::vector<Example> out;
  out.reserve(rows.size());
  for (const Headline& h : rows) {
    std::vector<std::string> toks = char_tokens ? to_char_tokens(h.tokens) : h.tokens;
    out.push_back({tokens_to_ids(toks, vocab), h.label});
  }
  return out;
}

std::vector<std::vector<std::string>> headline_tokens(const std::vector<Headline>& rows,
                                                      bool char_tokens) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (const Headline& h : rows)
    out.push_back(char_tokens ? to_char_tokens(h.tokens) : h.tokens);
  return out;
}

void write_net_report(const TrainReport& rep, const std::string& path) {
  OutFile out(path);
  std::ostream& os = out.stream();
  os << "epoch\ttrain_loss\tdev_accuracy\n";
  for (std::size_t e = 0; e < rep.train_loss.size(); ++e)
    os << (e + 1) << '\t' << fmt_g6(rep.train_loss[e]) << '\t' << fmt_g6(rep.dev_accuracy[e])
       << '\n';
  os << "best_epoch\t" << rep.best_epoch << '\n';
  os << "best_dev_accuracy\t" << fmt_g6(rep.best_dev_accuracy) << '\n';
  out.commit();
}

void write_svm_report(const SvmTrainReport& rep, const std::vector<std::string>& class_names,
                      const std::string& path) {
  OutFile out(path);
  std::ostream& os = out.stream();
  os << "class\tepoch\tobjective\n";
  for (std::size_t k = 0; k < rep.objective.size(); ++k)
    for (std::size_t e = 0; e < rep.objective[k].size(); ++e)
      os << class_names[k] << '\t' << (e + 1) << '\t' << fmt_g6(rep.objective[k][e]) << '\n';
  out.commit();
}

void predict_net_to_file(const ClassifierModel& model,
                         const std::vector<std::vector<std::string>>& token_rows,
                         const std::string& out_path) {
  DatasetSpec spec(model.class_names);
  std::vector<int> labels;
  std::vector<std::vector<double>> probs;
  for (const auto& raw : token_rows) {
    std::vector<std::string> toks = model.char_granularity() ? to_char_tokens(raw) : raw;
    auto [label, p] = predict(model, tokens_to_ids(toks, model.vocab));
    labels.push_back(label);
    probs.push_back(std::move(p));
  }
  write_predictions(out_path, labels, probs, spec);
}

void predict_svm_to_file(const SvmModel& model,
                         const std::vector<std::vector<std::string>>& token_rows,
                         const std::string& out_path) {
  DatasetSpec spec(model.class_names);
  std::vector<int> labels;
  std::vector<std::vector<double>> probs;
  for (const auto& raw : token_rows) {
    auto [label, scores] = predict_svm(model, featurize(raw, model.vocab, model.config.count_features));
    labels.push_back(label);
    probs.push_back(squash_scores(scores));
  }
  write_predictions(out_path, labels, probs, spec);
}

struct EmbedOpts {
  std::string corpus, output, variant = "sgns";
  EmbeddingTrainConfig cfg;
};

void run_embed(const EmbedOpts& o) {
  EmbeddingTrainConfig cfg = o.cfg;
  cfg.variant = variant_from_name(o.variant);
  if (cfg.variant == EmbeddingVariant::kFastText && cfg.window == 11)
    std::cerr << kFastTextW11Warning << '\n';
  std::vector<std::vector<std::string>> sentences = read_token_lines(o.corpus);
  EmbeddingSet set = train_embeddings(sentences, cfg);
  save_embeddings(set, o.output);
  std::cout << "wrote " << o.output << " (" << set.vocab.size() << " tokens, dim " << set.dim()
            << ")\n";
}

struct TrainOpts {
  std::string train, dev, classes, model, report, embeddings;
  std::string arch = "nbow", granularity = "word";
  int dim = 300, filter_width = 3, filters = 128, hidden = 128, max_len = 30, batch = 64;
  int min_count = 1, epochs = -1;
  double lr = 1e-3, c = 1.0;
  std::uint64_t seed = 1;
  bool no_fine_tune = false, count_features = false;
  bool dim_given = false;
};

void run_train(const TrainOpts& o) {
  DatasetSpec spec = DatasetSpec::from_file(o.classes);
  std::vector<Headline> train_rows = load_dataset(o.train, spec);
  std::vector<Headline> dev_rows = load_dataset(o.dev, spec);
  bool chars = o.granularity == "char";

  if (o.arch == "svm") {
    if (chars) throw std::runtime_error("the bag-of-words svm consumes word tokens only");
    if (!o.embeddings.empty())
      throw std::runtime_error("the bag-of-words svm does not take pretrained embeddings");
    SvmConfig cfg;
    cfg.c = o.c;
    cfg.epochs = o.epochs < 0 ? 20 : o.epochs;
    cfg.seed = o.seed;
    cfg.count_features = o.count_features;
    Vocabulary vocab = build_vocab(headline_tokens(train_rows, false), o.min_count);
    auto [model, report] = train_svm(train_rows, vocab, spec.class_names(), cfg);
    save_svm(model, o.model);
    if (!o.report.empty()) write_svm_report(report, spec.class_names(), o.report);
    int correct = 0;
    for (const Headline& h : dev_rows)
      if (predict_svm(model, featurize(h.tokens, vocab, cfg.count_features)).first == h.label)
        ++correct;
    std::cout << "wrote " << o.model << "; dev accuracy "
              << fmt_g6(static_cast<double>(correct) / dev_rows.size()) << '\n';
    return;
  }

  NetConfig cfg;
  cfg.arch = arch_from_name(o.arch);
  cfg.num_classes = spec.num_classes();
  cfg.filter_width = o.filter_width;
  cfg.num_filters = o.filters;
  cfg.hidden = o.hidden;
  cfg.max_len = o.max_len;
  cfg.lr = o.lr;
  cfg.epochs = o.epochs < 0 ? 10 : o.epochs;
  cfg.batch_size = o.batch;
  cfg.seed = o.seed;
  cfg.fine_tune_embeddings = !o.no_fine_tune;
  cfg.char_tokens = chars;

  EmbeddingSet pretrained;
  Vocabulary vocab;
  if (!o.embeddings.empty()) {
    pretrained = load_embeddings(o.embeddings);
    cfg.init = InitMode::kPretrained;
    cfg.dim = pretrained.dim();
    if (o.dim_given && o.dim != cfg.dim)
      throw std::runtime_error("embedding dim " + std::to_string(cfg.dim) +
                               " does not match requested --dim " + std::to_string(o.dim));
    vocab = pretrained.vocab;
  } else {
    cfg.init = chars ? InitMode::kRandomChar : InitMode::kRandomWord;
    cfg.dim = o.dim;
    vocab = build_vocab(headline_tokens(train_rows, chars), o.min_count);
  }

  ClassifierModel model = init_model(cfg, vocab, spec.class_names(),
                                     o.embeddings.empty() ? nullptr : &pretrained);
  auto [trained, report] =
      train_classifier(std::move(model), to_examples(train_rows, vocab, chars),
                       to_examples(dev_rows, vocab, chars));
  save_model(trained, o.model);
  if (!o.report.empty()) write_net_report(report, o.report);
  std::cout << "wrote " << o.model << "; best dev accuracy " << fmt_g6(report.best_dev_accuracy)
            << " at epoch " << report.best_epoch << '\n';
}

struct PredictOpts {
  std::string model, input, output;
  bool raw = false;
};

void run_predict(const PredictOpts& o) {
  std::vector<std::vector<std::string>> token_rows;
  std::string magic = first_line(o.model);
  if (magic == "textcat-model") {
    ClassifierModel model = load_model(o.model);
    if (o.raw) {
      token_rows = read_token_lines(o.input);
    } else {
      DatasetSpec spec(model.class_names);
      token_rows = headline_tokens(load_dataset(o.input, spec), false);
    }
    predict_net_to_file(model, token_rows, o.output);
  } else if (magic == "textcat-svm") {
    SvmModel model = load_svm(o.model);
    if (o.raw) {
      token_rows = read_token_lines(o.input);
    } else {
      DatasetSpec spec(model.class_names);
      token_rows = headline_tokens(load_dataset(o.input, spec), false);
    }
    predict_svm_to_file(model, token_rows, o.output);
  } else {
    throw std::runtime_error(o.model + ": unknown model magic '" + magic + "'");
  }
  std::cout << "wrote " << o.output << " (" << token_rows.size() << " predictions)\n";
}

struct TopologyOpts {
  std::vector<std::string> nbow, cnn, lstm, flat;
  std::string bow, output;
};

void run_topology(const TopologyOpts& o) {
  VoteNode tree;
  if (!o.flat.empty()) {
    if (!o.nbow.empty() || !o.cnn.empty() || !o.lstm.empty() || !o.bow.empty())
      throw std::runtime_error("--flat cannot be combined with the two-level group flags");
    tree = build_flat_topology(o.flat);
  } else {
    if (o.bow.empty()) throw std::runtime_error("two-level topology needs --bow");
    tree = build_two_level_topology(o.nbow, o.cnn, o.lstm, o.bow);
  }
  save_tree(tree, o.output);
  std::cout << "wrote " << o.output << " (" << leaf_count(tree) << " leaves)\n";
}

struct VoteOpts {
  std::string tree, classes, output;
  std::vector<std::string> sources;
  bool soft = false;
};

void run_vote(const VoteOpts& o) {
  VoteNode tree = load_tree(o.tree);
  DatasetSpec spec = DatasetSpec::from_file(o.classes);
  std::vector<std::string> leaves = collect_leaves(tree);

  std::map<std::string, PredictionFile> sources;
  for (const std::string& src : o.sources) {
    std::size_t eq = src.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == src.size())
      throw std::runtime_error("prediction source '" + src + "' is not of the form system=path");
    std::string system = src.substr(0, eq);
    std::string path = src.substr(eq + 1);
    if (sources.count(system))
      throw std::runtime_error("duplicate prediction source for system '" + system + "'");
    bool known = false;
    for (const std::string& leaf : leaves) known = known || leaf == system;
    if (!known)
      throw std::runtime_error("system '" + system + "' is not a leaf of the ensemble tree");
    sources.emplace(system, read_predictions(path, spec));
  }

  long long rows = -1;
  for (const auto& [system, pf] : sources) {
    if (rows < 0) rows = static_cast<long long>(pf.labels.size());
    if (static_cast<long long>(pf.labels.size()) != rows)
      throw std::runtime_error("prediction files disagree on row count (system '" + system +
                               "' has " + std::to_string(pf.labels.size()) + ", expected " +
                               std::to_string(rows) + ")");
  }
  if (rows < 0) throw std::runtime_error("no prediction sources given");

  std::vector<int> voted_labels;
  std::vector<std::vector<double>> voted_probs;
  for (long long i = 0; i < rows; ++i) {
    std::map<std::string, Prediction> at_row;
    for (const auto& [system, pf] : sources) {
      int label = pf.labels[i];
      at_row.emplace(system, Prediction{label, pf.probs[i][label]});
    }
    Prediction voted = eval_tree(tree, at_row, o.soft);
    std::vector<double> row(spec.num_classes(), 0.0);
    row[voted.label] = voted.confidence;
    voted_labels.push_back(voted.label);
    voted_probs.push_back(std::move(row));
  }
  write_predictions(o.output, voted_labels, voted_probs, spec);
  std::cout << "wrote " << o.output << " (" << rows << " voted predictions)\n";
}

struct EvaluateOpts {
  std::string gold, pred, classes, output, json;
  bool harmonic = false;
};

void run_evaluate(const EvaluateOpts& o) {
  DatasetSpec spec = DatasetSpec::from_file(o.classes);
  std::vector<Headline> gold_rows = load_dataset(o.gold, spec);
  PredictionFile preds = read_predictions(o.pred, spec);
  if (gold_rows.size() != preds.labels.size())
    throw std::runtime_error("gold has " + std::to_string(gold_rows.size()) +
                             " rows but predictions have " + std::to_string(preds.labels.size()));
  std::vector<int> golds;
  golds.reserve(gold_rows.size());
  for (const Headline& h : gold_rows) golds.push_back(h.label);
  ConfusionMatrix cm = confusion(golds, preds.labels, spec.num_classes());
  Metrics metrics = compute_metrics(cm);
  write_metrics_report(metrics, spec.class_names(), o.output, o.harmonic);
  if (!o.json.empty()) write_metrics_json(metrics, spec.class_names(), o.json, o.harmonic);
  std::cout << read_file(o.output);
}

struct NnOpts {
  std::string embeddings, token;
  int k = 10;
};

void run_nn(const NnOpts& o) {
  EmbeddingSet set = load_embeddings(o.embeddings);
  std::vector<Neighbor> neighbors = nearest_neighbors(set, o.token, o.k);
  for (const Neighbor& nb : neighbors)
    std::cout << nb.token << '\t' << fmt_g6(nb.cosine) << '\n';
  std::cout << "single_char_in_top" << o.k << "=" << single_char_audit(neighbors) << '\n';
}

struct RunAllOpts {
  std::string train, dev, test, classes, outdir, embed_corpus;
  int dim = 300, embed_epochs = 5, net_epochs = 10, svm_epochs = 20;
  int filters = 128, hidden = 128, max_len = 30, batch = 64, min_count = 5, workers = 1;
  std::uint64_t seed = 1;
  bool soft = false, flat = false;
};

// The full sixteen-system pipeline: five embedding sets (cwe-l/cwe-p/fasttext
// at window 5, cwe-l/cwe-p at window 11; the fasttext window-11 set is left
// out after its audit failures), three architectures per set, one
// bag-of-words svm, then the two-level vote over everything.
void run_all(const RunAllOpts& o) {
  namespace fs = std::filesystem;
  fs::create_directories(o.outdir);
  auto path_in = [&](const std::string& name) { return (fs::path(o.outdir) / name).string(); };

  DatasetSpec spec = DatasetSpec::from_file(o.classes);
  std::vector<Headline> train_rows = load_dataset(o.train, spec);
  std::vector<Headline> dev_rows = load_dataset(o.dev, spec);
  std::vector<Headline> test_rows = load_dataset(o.test, spec);
  std::vector<std::vector<std::string>> test_tokens = headline_tokens(test_rows, false);
  std::vector<int> test_golds;
  for (const Headline& h : test_rows) test_golds.push_back(h.label);

  std::vector<std::vector<std::string>> embed_sentences =
      o.embed_corpus.empty() ? headline_tokens(train_rows, false)
                             : read_token_lines(o.embed_corpus);

  struct EmbSpec {
    EmbeddingVariant variant;
    int window;
  };
  const std::vector<EmbSpec> emb_specs = {
      {EmbeddingVariant::kCweL, 5},  {EmbeddingVariant::kCweP, 5}, {EmbeddingVariant::kFastText, 5},
      {EmbeddingVariant::kCweL, 11}, {EmbeddingVariant::kCweP, 11},
  };
  const std::vector<Arch> archs = {Arch::kNbow, Arch::kCnn, Arch::kLstm};

  std::map<std::string, PredictionFile> sources;
  std::vector<std::string> nbow_ids, cnn_ids, lstm_ids;
  std::vector<std::pair<std::string, Metrics>> summary;

  auto score_file = [&](const std::string& system, const std::string& pred_path) {
    PredictionFile pf = read_predictions(pred_path, spec);
    sources.emplace(system, pf);
    Metrics m = compute_metrics(confusion(test_golds, pf.labels, spec.num_classes()));
    write_metrics_report(m, spec.class_names(), path_in("metrics-" + system + ".txt"));
    summary.emplace_back(system, m);
  };

  for (const EmbSpec& es : emb_specs) {
    std::string emb_tag = variant_name(es.variant) + "-w" + std::to_string(es.window);
    EmbeddingTrainConfig ecfg;
    ecfg.variant = es.variant;
    ecfg.window = es.window;
    ecfg.dim = o.dim;
    ecfg.epochs = o.embed_epochs;
    ecfg.min_count = o.min_count;
    ecfg.workers = o.workers;
    ecfg.seed = o.seed;
    EmbeddingSet set = train_embeddings(embed_sentences, ecfg);
    std::string emb_path = path_in("emb-" + emb_tag + ".vec");
    save_embeddings(set, emb_path);
    std::cout << "wrote " << emb_path << '\n';

    for (Arch arch : archs) {
      std::string system = arch_name(arch) + "-" + emb_tag;
      NetConfig ncfg;
      ncfg.arch = arch;
      ncfg.dim = set.dim();
      ncfg.num_classes = spec.num_classes();
      ncfg.num_filters = o.filters;
      ncfg.hidden = o.hidden;
      ncfg.max_len = o.max_len;
      ncfg.epochs = o.net_epochs;
      ncfg.batch_size = o.batch;
      ncfg.seed = o.seed;
      ncfg.init = InitMode::kPretrained;
      ClassifierModel model = init_model(ncfg, set.vocab, spec.class_names(), &set);
      auto [trained, report] =
          train_classifier(std::move(model), to_examples(train_rows, set.vocab, false),
                           to_examples(dev_rows, set.vocab, false));
      save_model(trained, path_in("model-" + system + ".txt"));
      write_net_report(report, path_in("report-" + system + ".txt"));
      std::string pred_path = path_in("pred-" + system + ".txt");
      predict_net_to_file(trained, test_tokens, pred_path);
      score_file(system, pred_path);
      std::cout << "trained " << system << " (best dev " << fmt_g6(report.best_dev_accuracy)
                << ")\n";
      if (arch == Arch::kNbow) nbow_ids.push_back(system);
      if (arch == Arch::kCnn) cnn_ids.push_back(system);
      if (arch == Arch::kLstm) lstm_ids.push_back(system);
    }
  }

  {
    SvmConfig scfg;
    scfg.epochs = o.svm_epochs;
    scfg.seed = o.seed;
    Vocabulary svm_vocab = build_vocab(headline_tokens(train_rows, false), 1);
    auto [svm_model, svm_report] = train_svm(train_rows, svm_vocab, spec.class_names(), scfg);
    save_svm(svm_model, path_in("model-bow.txt"));
    write_svm_report(svm_report, spec.class_names(), path_in("report-bow.txt"));
    std::string pred_path = path_in("pred-bow.txt");
    predict_svm_to_file(svm_model, test_tokens, pred_path);
    score_file("bow", pred_path);
    std::cout << "trained bow\n";
  }

  std::vector<std::string> all_ids;
  all_ids.insert(all_ids.end(), nbow_ids.begin(), nbow_ids.end());
  all_ids.insert(all_ids.end(), cnn_ids.begin(), cnn_ids.end());
  all_ids.insert(all_ids.end(), lstm_ids.begin(), lstm_ids.end());
  all_ids.push_back("bow");
  VoteNode tree = o.flat ? build_flat_topology(all_ids)
                         : build_two_level_topology(nbow_ids, cnn_ids, lstm_ids, "bow");
  save_tree(tree, path_in("ensemble.tree"));

  std::vector<int> voted_labels;
  std::vector<std::vector<double>> voted_probs;
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    std::map<std::string, Prediction> at_row;
    for (const auto& [system, pf] : sources) {
      int label = pf.labels[i];
      at_row.emplace(system, Prediction{label, pf.probs[i][label]});
    }
    Prediction voted = eval_tree(tree, at_row, o.soft);
    std::vector<double> row(spec.num_classes(), 0.0);
    row[voted.label] = voted.confidence;
    voted_labels.push_back(voted.label);
    voted_probs.push_back(std::move(row));
  }
  std::string voted_path = path_in("pred-vote.txt");
  write_predictions(voted_path, voted_labels, voted_probs, spec);
  Metrics voted_metrics =
      compute_metrics(confusion(test_golds, voted_labels, spec.num_classes()));
  write_metrics_report(voted_metrics, spec.class_names(), path_in("metrics-vote.txt"));
  summary.emplace_back("vote", voted_metrics);

  std::cout << "\nsystem\taccuracy\tmacro_f1\n";
  for (const auto& [system, m] : summary)
    std::cout << system << '\t' << fmt_g6(m.accuracy) << '\t' << fmt_g6(m.macro_f1) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Headline classification toolkit: embedding training, neural and SVM "
               "classifiers, vote ensembles, and macro-averaged metrics"};
  app.require_subcommand(1);

  EmbedOpts eo;
  auto* embed = app.add_subcommand("embed", "Train word embeddings on a token-line corpus");
  embed->add_option("--corpus", eo.corpus, "Corpus file, one whitespace-tokenized sentence per line")
      ->required()
      ->check(CLI::ExistingFile);
  embed->add_option("--output", eo.output, "Output embedding file")->required();
  embed->add_option("--variant", eo.variant, "Embedding variant")
      ->check(CLI::IsMember({"sgns", "cwe-p", "cwe-l", "fasttext"}))
      ->capture_default_str();
  embed->add_option("--dim", eo.cfg.dim, "Vector dimensionality")->capture_default_str();
  embed->add_option("--window", eo.cfg.window, "Maximum context window")->capture_default_str();
  embed->add_option("--epochs", eo.cfg.epochs, "Training epochs")->capture_default_str();
  embed->add_option("--negatives", eo.cfg.negatives, "Negative samples per pair")
      ->capture_default_str();
  embed->add_option("--min-count", eo.cfg.min_count, "Minimum token frequency")
      ->capture_default_str();
  embed->add_option("--lr", eo.cfg.lr0, "Initial learning rate")->capture_default_str();
  embed->add_option("--clusters", eo.cfg.clusters, "Cluster vectors per character (cwe-l)")
      ->capture_default_str();
  embed->add_option("--min-n", eo.cfg.min_n, "Shortest character n-gram (fasttext)")
      ->capture_default_str();
  embed->add_option("--max-n", eo.cfg.max_n, "Longest character n-gram (fasttext)")
      ->capture_default_str();
  embed->add_option("--workers", eo.cfg.workers, "Worker threads (1 = deterministic)")
      ->capture_default_str();
  embed->add_option("--seed", eo.cfg.seed, "Random seed")->capture_default_str();
  embed->callback([&eo] { run_embed(eo); });

  TrainOpts to;
  auto* train = app.add_subcommand("train", "Train a classifier on a label<TAB>text dataset");
  train->add_option("--train", to.train, "Training set TSV")->required()->check(CLI::ExistingFile);
  train->add_option("--dev", to.dev, "Development set TSV")->required()->check(CLI::ExistingFile);
  train->add_option("--classes", to.classes, "Class list file, one name per line")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--model", to.model, "Output model file")->required();
  train->add_option("--report", to.report, "Optional training report file");
  train->add_option("--arch", to.arch, "Classifier architecture")
      ->check(CLI::IsMember({"nbow", "cnn", "lstm", "svm"}))
      ->capture_default_str();
  train->add_option("--embeddings", to.embeddings, "Pretrained embedding file (nets only)")
      ->check(CLI::ExistingFile);
  train->add_option("--granularity", to.granularity, "Token granularity")
      ->check(CLI::IsMember({"word", "char"}))
      ->capture_default_str();
  auto* dim_opt =
      train->add_option("--dim", to.dim, "Embedding width for random init")->capture_default_str();
  train->add_option("--filter-width", to.filter_width, "CNN convolution width")
      ->capture_default_str();
  train->add_option("--filters", to.filters, "CNN filter count")->capture_default_str();
  train->add_option("--hidden", to.hidden, "LSTM hidden width")->capture_default_str();
  train->add_option("--max-len", to.max_len, "Token truncation length")->capture_default_str();
  train->add_option("--lr", to.lr, "Learning rate (nets)")->capture_default_str();
  train->add_option("--epochs", to.epochs, "Training epochs (default: 10 nets, 20 svm)");
  train->add_option("--batch-size", to.batch, "Mini-batch size (nets)")->capture_default_str();
  train->add_option("--min-count", to.min_count, "Vocabulary cutoff for random init / svm")
      ->capture_default_str();
  train->add_option("--c", to.c, "SVM hinge trade-off")->capture_default_str();
  train->add_flag("--count-features", to.count_features,
                  "SVM: occurrence counts instead of binary presence");
  train->add_flag("--no-fine-tune", to.no_fine_tune, "Freeze the embedding layer (nets)");
  train->add_option("--seed", to.seed, "Random seed")->capture_default_str();
  train->callback([&to, dim_opt] {
    to.dim_given = dim_opt->count() > 0;
    run_train(to);
  });

  PredictOpts po;
  auto* pred = app.add_subcommand("predict", "Write per-line predictions for a dataset");
  pred->add_option("--model", po.model, "Model file (classifier or svm)")
      ->required()
      ->check(CLI::ExistingFile);
  pred->add_option("--input", po.input, "Input TSV (label column ignored)")
      ->required()
      ->check(CLI::ExistingFile);
  pred->add_option("--output", po.output, "Output prediction file")->required();
  pred->add_flag("--raw", po.raw, "Input is plain token lines without labels");
  pred->callback([&po] { run_predict(po); });

  TopologyOpts oo;
  auto* topo = app.add_subcommand("topology", "Write an ensemble vote-tree file");
  topo->add_option("--nbow", oo.nbow, "Five nbow system identifiers")->delimiter(',');
  topo->add_option("--cnn", oo.cnn, "Five cnn system identifiers")->delimiter(',');
  topo->add_option("--lstm", oo.lstm, "Five lstm system identifiers")->delimiter(',');
  topo->add_option("--bow", oo.bow, "Bag-of-words svm system identifier");
  topo->add_option("--flat", oo.flat, "Flat vote over these systems instead")->delimiter(',');
  topo->add_option("--output", oo.output, "Output tree file")->required();
  topo->callback([&oo] { run_topology(oo); });

  VoteOpts vo;
  auto* vote = app.add_subcommand("vote", "Combine prediction files through a vote tree");
  vote->add_option("--tree", vo.tree, "Ensemble tree file")->required()->check(CLI::ExistingFile);
  vote->add_option("--classes", vo.classes, "Class list file")->required()->check(CLI::ExistingFile);
  vote->add_option("--output", vo.output, "Output voted prediction file")->required();
  vote->add_option("sources", vo.sources, "Prediction sources as system=path")->required();
  vote->add_flag("--soft", vo.soft, "Confidence-sum voting instead of hard plurality");
  vote->callback([&vo] { run_vote(vo); });

  EvaluateOpts xo;
  auto* eval = app.add_subcommand("evaluate", "Score predictions against gold labels");
  eval->add_option("--gold", xo.gold, "Gold TSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--pred", xo.pred, "Prediction file")->required()->check(CLI::ExistingFile);
  eval->add_option("--classes", xo.classes, "Class list file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--output", xo.output, "Output metrics report")->required();
  eval->add_option("--json", xo.json, "Optional JSON metrics file");
  eval->add_flag("--harmonic-macro-f1", xo.harmonic,
                 "Report 2PR/(P+R) of the macro averages instead of the mean per-class F1");
  eval->callback([&xo] { run_evaluate(xo); });

  NnOpts no;
  auto* nn = app.add_subcommand("nn", "Print a token's nearest neighbors and the single-character audit");
  nn->add_option("--embeddings", no.embeddings, "Embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  nn->add_option("--token", no.token, "Query token")->required();
  nn->add_option("-k,--k", no.k, "Neighbor count")->capture_default_str();
  nn->callback([&no] { run_nn(no); });

  RunAllOpts ro;
  auto* runall = app.add_subcommand(
      "run-all", "Chain the full sixteen-system pipeline: five embedding sets x three "
                 "architectures + svm, then the two-level vote");
  runall->add_option("--train", ro.train, "Training set TSV")->required()->check(CLI::ExistingFile);
  runall->add_option("--dev", ro.dev, "Development set TSV")->required()->check(CLI::ExistingFile);
  runall->add_option("--test", ro.test, "Test set TSV")->required()->check(CLI::ExistingFile);
  runall->add_option("--classes", ro.classes, "Class list file")
      ->required()
      ->check(CLI::ExistingFile);
  runall->add_option("--outdir", ro.outdir, "Output directory")->required();
  runall->add_option("--embed-corpus", ro.embed_corpus,
                     "Separate embedding corpus (default: training set text)")
      ->check(CLI::ExistingFile);
  runall->add_option("--dim", ro.dim, "Embedding dimensionality")->capture_default_str();
  runall->add_option("--embed-epochs", ro.embed_epochs, "Embedding epochs")->capture_default_str();
  runall->add_option("--net-epochs", ro.net_epochs, "Classifier epochs")->capture_default_str();
  runall->add_option("--svm-epochs", ro.svm_epochs, "SVM epochs")->capture_default_str();
  runall->add_option("--filters", ro.filters, "CNN filter count")->capture_default_str();
  runall->add_option("--hidden", ro.hidden, "LSTM hidden width")->capture_default_str();
  runall->add_option("--max-len", ro.max_len, "Token truncation length")->capture_default_str();
  runall->add_option("--batch-size", ro.batch, "Mini-batch size")->capture_default_str();
  runall->add_option("--min-count", ro.min_count, "Embedding vocabulary cutoff")
      ->capture_default_str();
  runall->add_option("--workers", ro.workers, "Embedding worker threads")->capture_default_str();
  runall->add_option("--seed", ro.seed, "Random seed")->capture_default_str();
  runall->add_flag("--soft", ro.soft, "Confidence-sum voting");
  runall->add_flag("--flat", ro.flat, "Flat sixteen-way vote instead of the two-level tree");
  runall->callback([&ro] { run_all(ro); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
