#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "textcat/embeddings.hpp"
#include "textcat/ensemble.hpp"
#include "textcat/io.hpp"
#include "textcat/rng.hpp"

using namespace textcat;

namespace {

const std::string kDir = "tmp_cli";

std::string at(const std::string& name) { return kDir + "/" + name; }

void write_text(const std::string& path, const std::string& content) {
  OutFile f(path);
  f.stream() << content;
  f.commit();
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  std::string out_path = at("cap_out_" + std::to_string(counter) + ".txt");
  std::string err_path = at("cap_err_" + std::to_string(counter) + ".txt");
  ++counter;
  std::string cmd = std::string(TEXTCAT_BIN) + " " + args + " >" + out_path + " 2>" + err_path;
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

// Three-class keyword task in Chinese, plus a token-line corpus for
// embedding training. Written once; every case reuses the same files.
void ensure_fixtures() {
  static bool done = false;
  if (done) return;
  done = true;
  std::filesystem::create_directories(kDir);

  const std::vector<std::string> classes{"sport", "tech", "world"};
  const std::vector<std::vector<std::string>> keywords{
      {"足球", "篮球", "比赛"}, {"手机", "芯片", "软件"}, {"战争", "外交", "政府"}};
  const std::vector<std::string> shared{"的", "了"};

  write_text(at("classes.txt"), "sport\ntech\nworld\n");

  Rng rng(1);
  auto make_rows = [&](int per_class) {
    std::string text;
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < per_class; ++i) {
        text += classes[k];
        text += '\t';
        int len = 3 + static_cast<int>(rng.below(3));
        for (int t = 0; t < len; ++t) {
          if (t) text += ' ';
          text += rng.below(4) == 0 ? shared[rng.below(2)] : keywords[k][rng.below(3)];
        }
        text += '\n';
      }
    return text;
  };
  write_text(at("train.tsv"), make_rows(20));
  write_text(at("dev.tsv"), make_rows(5));
  write_text(at("test.tsv"), make_rows(5));

  std::string corpus;
  for (int line = 0; line < 40; ++line) {
    int k = static_cast<int>(rng.below(3));
    int len = 4 + static_cast<int>(rng.below(4));
    for (int t = 0; t < len; ++t) {
      if (t) corpus += ' ';
      corpus += rng.below(4) == 0 ? shared[rng.below(2)] : keywords[k][rng.below(3)];
    }
    corpus += '\n';
  }
  write_text(at("corpus.txt"), corpus);
}

}  // namespace

TEST_CASE("top-level help lists every subcommand") {
  ensure_fixtures();
  RunResult r = run_cli("--help");
  CHECK(r.code == 0);
  for (const char* sub : {"embed", "train", "predict", "topology", "vote", "evaluate", "nn",
                          "run-all"})
    CHECK(contains(r.out, sub));
  RunResult train_help = run_cli("train --help");
  CHECK(train_help.code == 0);
  CHECK(contains(train_help.out, "--arch"));
  CHECK(contains(train_help.out, "128"));   // documented width defaults
  CHECK(contains(train_help.out, "nbow"));
  RunResult none = run_cli("");
  CHECK(none.code != 0);
}

TEST_CASE("embed trains and saves every variant") {
  ensure_fixtures();
  for (const std::string variant : {"sgns", "cwe-p", "cwe-l", "fasttext"}) {
    RunResult r = run_cli("embed --corpus " + at("corpus.txt") + " --output " +
                          at("emb-" + variant + ".vec") + " --variant " + variant +
                          " --dim 6 --epochs 1 --window 3 --min-count 1 --seed 7");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "wrote"));
    EmbeddingSet set = load_embeddings(at("emb-" + variant + ".vec"));
    CHECK(set.dim() == 6);
    CHECK(set.vocab.size() > 3);
    if (variant == "fasttext") {
      CHECK(std::filesystem::exists(at("emb-fasttext.vec.sub")));
      CHECK(set.variant == EmbeddingVariant::kFastText);
    }
  }
}

TEST_CASE("embed rejects unknown variants") {
  ensure_fixtures();
  RunResult r = run_cli("embed --corpus " + at("corpus.txt") + " --output " + at("x.vec") +
                        " --variant glove");
  CHECK(r.code != 0);
}

TEST_CASE("fasttext at window 11 warns about the single-character audit") {
  ensure_fixtures();
  RunResult warn = run_cli("embed --corpus " + at("corpus.txt") + " --output " + at("w11.vec") +
                           " --variant fasttext --window 11 --dim 4 --epochs 1 --min-count 1");
  CHECK(warn.code == 0);
  CHECK(contains(warn.err, "single-character"));
  CHECK(contains(warn.err, "nn"));
  RunResult quiet = run_cli("embed --corpus " + at("corpus.txt") + " --output " + at("w5.vec") +
                            " --variant fasttext --window 5 --dim 4 --epochs 1 --min-count 1");
  CHECK(quiet.err.empty());
  RunResult sgns11 = run_cli("embed --corpus " + at("corpus.txt") + " --output " + at("s11.vec") +
                             " --variant sgns --window 11 --dim 4 --epochs 1 --min-count 1");
  CHECK(sgns11.err.empty());
}

TEST_CASE("embed output is reproducible byte for byte") {
  ensure_fixtures();
  std::string args = "embed --corpus " + at("corpus.txt") + " --variant cwe-p --dim 5 --epochs 2 "
                     "--min-count 1 --seed 11 --output ";
  CHECK(run_cli(args + at("rep-a.vec")).code == 0);
  CHECK(run_cli(args + at("rep-b.vec")).code == 0);
  CHECK(read_file(at("rep-a.vec")) == read_file(at("rep-b.vec")));
}

TEST_CASE("train writes a model and an epoch-by-epoch report") {
  ensure_fixtures();
  RunResult r = run_cli("train --arch nbow --train " + at("train.tsv") + " --dev " + at("dev.tsv") +
                        " --classes " + at("classes.txt") + " --model " + at("nbow.model") +
                        " --report " + at("nbow.report") + " --dim 8 --epochs 3 --batch-size 8");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "best dev accuracy"));
  std::ifstream model(at("nbow.model"));
  std::string magic;
  std::getline(model, magic);
  CHECK(magic == "textcat-model");
  std::vector<std::string> report = lines_of(read_file(at("nbow.report")));
  REQUIRE(report.size() == 6);  // header + 3 epochs + best_epoch + best_dev_accuracy
  CHECK(report[0] == "epoch\ttrain_loss\tdev_accuracy");
  CHECK(report[1].substr(0, 2) == "1\t");
  CHECK(report[3].substr(0, 2) == "3\t");
  CHECK(contains(report[4], "best_epoch\t"));
  CHECK(contains(report[5], "best_dev_accuracy\t"));
}

TEST_CASE("train accepts pretrained embeddings and rejects a conflicting --dim") {
  ensure_fixtures();
  run_cli("embed --corpus " + at("corpus.txt") + " --output " + at("pre.vec") +
          " --variant sgns --dim 6 --epochs 1 --min-count 1");
  RunResult ok = run_cli("train --arch cnn --train " + at("train.tsv") + " --dev " + at("dev.tsv") +
                         " --classes " + at("classes.txt") + " --model " + at("cnn.model") +
                         " --embeddings " + at("pre.vec") +
                         " --epochs 1 --batch-size 8 --filters 4");
  CHECK(ok.code == 0);
  RunResult clash = run_cli("train --arch cnn --train " + at("train.tsv") + " --dev " +
                            at("dev.tsv") + " --classes " + at("classes.txt") + " --model " +
                            at("clash.model") + " --embeddings " + at("pre.vec") +
                            " --dim 12 --epochs 1");
  CHECK(clash.code != 0);
  CHECK(contains(clash.err, "does not match"));
  CHECK_FALSE(std::filesystem::exists(at("clash.model")));
}

TEST_CASE("train fails fast when the dev file is missing") {
  ensure_fixtures();
  RunResult r = run_cli("train --arch nbow --train " + at("train.tsv") + " --dev " +
                        at("no_such_dev.tsv") + " --classes " + at("classes.txt") + " --model " +
                        at("never.model") + " --epochs 1");
  CHECK(r.code != 0);
  CHECK_FALSE(std::filesystem::exists(at("never.model")));
}

TEST_CASE("training is reproducible byte for byte per seed") {
  ensure_fixtures();
  std::string base = "train --arch lstm --train " + at("train.tsv") + " --dev " + at("dev.tsv") +
                     " --classes " + at("classes.txt") +
                     " --dim 6 --hidden 5 --epochs 2 --batch-size 8 --model ";
  CHECK(run_cli(base + at("det-a.model") + " --seed 3").code == 0);
  CHECK(run_cli(base + at("det-b.model") + " --seed 3").code == 0);
  CHECK(read_file(at("det-a.model")) == read_file(at("det-b.model")));
  CHECK(run_cli(base + at("det-c.model") + " --seed 4").code == 0);
  CHECK(read_file(at("det-a.model")) != read_file(at("det-c.model")));
}

TEST_CASE("predict writes one prediction line per input row") {
  ensure_fixtures();
  run_cli("train --arch nbow --train " + at("train.tsv") + " --dev " + at("dev.tsv") +
          " --classes " + at("classes.txt") + " --model " + at("p.model") +
          " --dim 8 --epochs 3 --batch-size 8");
  RunResult r = run_cli("predict --model " + at("p.model") + " --input " + at("test.tsv") +
                        " --output " + at("p.pred"));
  CHECK(r.code == 0);
  std::vector<std::string> in_rows = lines_of(read_file(at("test.tsv")));
  std::vector<std::string> out_rows = lines_of(read_file(at("p.pred")));
  REQUIRE(out_rows.size() == in_rows.size());
  for (const std::string& line : out_rows) {
    std::size_t tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    std::string label = line.substr(0, tab);
    CHECK((label == "sport" || label == "tech" || label == "world"));
    CHECK(split_ws(line.substr(tab + 1)).size() == 3);
  }

  // Raw token lines (no label column) work through --raw.
  write_text(at("raw.txt"), "足球 比赛\n手机 芯片 软件\n");
  RunResult raw = run_cli("predict --model " + at("p.model") + " --input " + at("raw.txt") +
                          " --output " + at("raw.pred") + " --raw");
  CHECK(raw.code == 0);
  CHECK(lines_of(read_file(at("raw.pred"))).size() == 2);
}

TEST_CASE("predict rejects unknown model files") {
  ensure_fixtures();
  write_text(at("garbage.model"), "who-knows 1 2 3\n");
  RunResult r = run_cli("predict --model " + at("garbage.model") + " --input " + at("test.tsv") +
                        " --output " + at("garbage.pred"));
  CHECK(r.code != 0);
  CHECK(contains(r.err, "unknown model magic"));
}

TEST_CASE("svm training, reporting and prediction run end to end") {
  ensure_fixtures();
  RunResult r = run_cli("train --arch svm --train " + at("train.tsv") + " --dev " + at("dev.tsv") +
                        " --classes " + at("classes.txt") + " --model " + at("svm.model") +
                        " --report " + at("svm.report") + " --epochs 5");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "dev accuracy"));
  std::ifstream model(at("svm.model"));
  std::string magic;
  std::getline(model, magic);
  CHECK(magic == "textcat-svm");
  std::vector<std::string> report = lines_of(read_file(at("svm.report")));
  CHECK(report[0] == "class\tepoch\tobjective");
  CHECK(report.size() == 1 + 3 * 5);  // three one-vs-rest problems, five epochs each

  RunResult pred = run_cli("predict --model " + at("svm.model") + " --input " + at("test.tsv") +
                           " --output " + at("svm.pred"));
  CHECK(pred.code == 0);
  CHECK(lines_of(read_file(at("svm.pred"))).size() == lines_of(read_file(at("test.tsv"))).size());

  RunResult chars = run_cli("train --arch svm --granularity char --train " + at("train.tsv") +
                            " --dev " + at("dev.tsv") + " --classes " + at("classes.txt") +
                            " --model " + at("svmc.model"));
  CHECK(chars.code != 0);
  RunResult emb = run_cli("train --arch svm --embeddings " + at("pre.vec") + " --train " +
                          at("train.tsv") + " --dev " + at("dev.tsv") + " --classes " +
                          at("classes.txt") + " --model " + at("svme.model"));
  CHECK(emb.code != 0);
}

TEST_CASE("character granularity trains from split tokens") {
  ensure_fixtures();
  RunResult r = run_cli("train --arch nbow --granularity char --train " + at("train.tsv") +
                        " --dev " + at("dev.tsv") + " --classes " + at("classes.txt") +
                        " --model " + at("char.model") + " --dim 6 --epochs 2 --batch-size 8");
  CHECK(r.code == 0);
  RunResult pred = run_cli("predict --model " + at("char.model") + " --input " + at("test.tsv") +
                           " --output " + at("char.pred"));
  CHECK(pred.code == 0);
  CHECK(lines_of(read_file(at("char.pred"))).size() == lines_of(read_file(at("test.tsv"))).size());
}

TEST_CASE("topology writes two-level and flat trees") {
  ensure_fixtures();
  RunResult r = run_cli("topology --nbow n1,n2,n3,n4,n5 --cnn c1,c2,c3,c4,c5 "
                        "--lstm l1,l2,l3,l4,l5 --bow bow --output " + at("two.tree"));
  CHECK(r.code == 0);
  CHECK(contains(r.out, "16 leaves"));
  std::string text = read_file(at("two.tree"));
  CHECK(text.substr(0, 17) == "vote\n  vote\n    n");
  VoteNode tree = load_tree(at("two.tree"));
  CHECK(leaf_count(tree) == 16);

  RunResult flat = run_cli("topology --flat a,b,c --output " + at("flat.tree"));
  CHECK(flat.code == 0);
  CHECK(read_file(at("flat.tree")) == "vote\n  a\n  b\n  c\n");

  RunResult bad = run_cli("topology --nbow n1,n2 --cnn c1,c2,c3,c4,c5 --lstm l1,l2,l3,l4,l5 "
                          "--bow bow --output " + at("bad.tree"));
  CHECK(bad.code != 0);
  CHECK(contains(bad.err, "expected exactly 5 nbow systems, got 2"));
  RunResult mixed = run_cli("topology --flat a,b --bow x --output " + at("mixed.tree"));
  CHECK(mixed.code != 0);
}

TEST_CASE("vote passes a single-leaf tree through unchanged") {
  ensure_fixtures();
  write_text(at("leaf.tree"), "m1\n");
  write_text(at("leaf_in.pred"), "sport\t0.7 0.2 0.1\nworld\t0.1 0.2 0.7\ntech\t0.25 0.5 0.25\n");
  RunResult r = run_cli("vote --tree " + at("leaf.tree") + " --classes " + at("classes.txt") +
                        " --output " + at("leaf_out.pred") + " m1=" + at("leaf_in.pred"));
  CHECK(r.code == 0);
  std::vector<std::string> out_rows = lines_of(read_file(at("leaf_out.pred")));
  REQUIRE(out_rows.size() == 3);
  CHECK(out_rows[0] == "sport\t0.7 0 0");
  CHECK(out_rows[1] == "world\t0 0 0.7");
  CHECK(out_rows[2] == "tech\t0 0.5 0");
}

TEST_CASE("vote combines three systems by plurality") {
  ensure_fixtures();
  write_text(at("v3.tree"), "vote\n  a\n  b\n  c\n");
  // Row 1: two sport votes beat one tech. Row 2: all three classes tie on
  // count; the highest confidence wins. Row 3: unanimity.
  write_text(at("va.pred"), "sport\t0.9 0.05 0.05\nsport\t0.5 0.3 0.2\nworld\t0.1 0.1 0.8\n");
  write_text(at("vb.pred"), "sport\t0.8 0.1 0.1\ntech\t0.2 0.6 0.2\nworld\t0.2 0.2 0.6\n");
  write_text(at("vc.pred"), "tech\t0.1 0.8 0.1\nworld\t0.1 0.2 0.7\nworld\t0.0 0.3 0.7\n");
  RunResult r = run_cli("vote --tree " + at("v3.tree") + " --classes " + at("classes.txt") +
                        " --output " + at("v3.out") + " a=" + at("va.pred") + " b=" +
                        at("vb.pred") + " c=" + at("vc.pred"));
  CHECK(r.code == 0);
  std::vector<std::string> rows = lines_of(read_file(at("v3.out")));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].substr(0, rows[0].find('\t')) == "sport");
  CHECK(rows[1].substr(0, rows[1].find('\t')) == "world");  // 0.7 beats 0.6 and 0.5
  CHECK(rows[2].substr(0, rows[2].find('\t')) == "world");
}

TEST_CASE("vote errors name the offending leaf or source") {
  ensure_fixtures();
  write_text(at("pair.tree"), "vote\n  a\n  b\n");
  write_text(at("only_a.pred"), "sport\t1 0 0\n");
  RunResult missing = run_cli("vote --tree " + at("pair.tree") + " --classes " + at("classes.txt") +
                              " --output " + at("x.out") + " a=" + at("only_a.pred"));
  CHECK(missing.code != 0);
  CHECK(contains(missing.err, "no prediction source for system 'b'"));

  RunResult not_leaf = run_cli("vote --tree " + at("pair.tree") + " --classes " + at("classes.txt") +
                               " --output " + at("x.out") + " a=" + at("only_a.pred") + " z=" +
                               at("only_a.pred"));
  CHECK(not_leaf.code != 0);
  CHECK(contains(not_leaf.err, "'z' is not a leaf"));

  RunResult dup = run_cli("vote --tree " + at("pair.tree") + " --classes " + at("classes.txt") +
                          " --output " + at("x.out") + " a=" + at("only_a.pred") + " a=" +
                          at("only_a.pred"));
  CHECK(dup.code != 0);
  CHECK(contains(dup.err, "duplicate prediction source"));

  write_text(at("two_rows.pred"), "sport\t1 0 0\ntech\t0 1 0\n");
  RunResult rows = run_cli("vote --tree " + at("pair.tree") + " --classes " + at("classes.txt") +
                           " --output " + at("x.out") + " a=" + at("only_a.pred") + " b=" +
                           at("two_rows.pred"));
  CHECK(rows.code != 0);
  CHECK(contains(rows.err, "disagree on row count"));

  RunResult form = run_cli("vote --tree " + at("pair.tree") + " --classes " + at("classes.txt") +
                           " --output " + at("x.out") + " nopath");
  CHECK(form.code != 0);
  CHECK(contains(form.err, "system=path"));
}

TEST_CASE("evaluate scores a prediction file against gold labels") {
  ensure_fixtures();
  // A perfect prediction file built straight from the gold labels.
  std::vector<std::string> gold_rows = lines_of(read_file(at("test.tsv")));
  std::string perfect;
  for (const std::string& row : gold_rows) {
    std::string label = row.substr(0, row.find('\t'));
    std::string probs = label == "sport" ? "1 0 0" : label == "tech" ? "0 1 0" : "0 0 1";
    perfect += label + "\t" + probs + "\n";
  }
  write_text(at("perfect.pred"), perfect);
  RunResult r = run_cli("evaluate --gold " + at("test.tsv") + " --pred " + at("perfect.pred") +
                        " --classes " + at("classes.txt") + " --output " + at("perfect.metrics") +
                        " --json " + at("perfect.json"));
  CHECK(r.code == 0);
  CHECK(contains(r.out, "accuracy\t1"));
  std::vector<std::string> keys;
  for (const std::string& line : lines_of(read_file(at("perfect.metrics"))))
    keys.push_back(line.substr(0, line.find('\t')));
  std::vector<std::string> want{"accuracy", "macro_p",  "macro_r",  "macro_f1", "p_sport",
                                "r_sport",  "f1_sport", "p_tech",   "r_tech",   "f1_tech",
                                "p_world",  "r_world",  "f1_world"};
  CHECK(keys == want);
  nlohmann::json j = nlohmann::json::parse(read_file(at("perfect.json")));
  CHECK(j["accuracy"].get<double>() == doctest::Approx(1.0));
  CHECK(j["macro_f1"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("evaluate rejects row-count mismatches and supports the harmonic flag") {
  ensure_fixtures();
  write_text(at("short.pred"), "sport\t1 0 0\n");
  RunResult bad = run_cli("evaluate --gold " + at("test.tsv") + " --pred " + at("short.pred") +
                          " --classes " + at("classes.txt") + " --output " + at("short.metrics"));
  CHECK(bad.code != 0);
  CHECK(contains(bad.err, "rows"));

  // Asymmetric errors make the mean-F1 and harmonic aggregations differ.
  // Gold is 5 sport, 5 tech, 5 world in order; flip two sport rows to tech
  // and one world row to sport.
  std::vector<std::string> gold_rows = lines_of(read_file(at("test.tsv")));
  REQUIRE(gold_rows.size() == 15);
  std::string skewed;
  for (std::size_t i = 0; i < gold_rows.size(); ++i) {
    std::string label = gold_rows[i].substr(0, gold_rows[i].find('\t'));
    if (i == 3 || i == 4) label = "tech";
    if (i == 10) label = "sport";
    std::string probs = label == "sport" ? "1 0 0" : label == "tech" ? "0 1 0" : "0 0 1";
    skewed += label + "\t" + probs + "\n";
  }
  write_text(at("skewed.pred"), skewed);
  RunResult mean = run_cli("evaluate --gold " + at("test.tsv") + " --pred " + at("skewed.pred") +
                           " --classes " + at("classes.txt") + " --output " + at("mean.metrics"));
  RunResult harm = run_cli("evaluate --gold " + at("test.tsv") + " --pred " + at("skewed.pred") +
                           " --classes " + at("classes.txt") + " --output " + at("harm.metrics") +
                           " --harmonic-macro-f1");
  CHECK(mean.code == 0);
  CHECK(harm.code == 0);
  auto value_of = [](const std::string& path, const std::string& key) {
    for (const std::string& line : lines_of(read_file(path)))
      if (line.substr(0, line.find('\t')) == key) return std::stod(line.substr(line.find('\t') + 1));
    return -1.0;
  };
  double mean_f1 = value_of(at("mean.metrics"), "macro_f1");
  double harm_f1 = value_of(at("harm.metrics"), "macro_f1");
  // P = (3/4, 5/7, 1), R = (3/5, 1, 4/5): the per-class F1 mean is 43/54,
  // the harmonic of the macro averages is 184/227.
  CHECK(mean_f1 == doctest::Approx(43.0 / 54.0).epsilon(1e-4));
  CHECK(harm_f1 == doctest::Approx(184.0 / 227.0).epsilon(1e-4));
  CHECK(mean_f1 != harm_f1);
  CHECK(value_of(at("mean.metrics"), "accuracy") == value_of(at("harm.metrics"), "accuracy"));
}

TEST_CASE("nn prints ranked neighbors and the single-character audit") {
  ensure_fixtures();
  write_text(at("audit.vec"),
             "6 2\nqq 1 0\n好 0.999 0.01\n大 0.99 0.02\n天 0.98 0.05\ncc 0.5 0.5\ndd -1 0\n");
  RunResult r = run_cli("nn --embeddings " + at("audit.vec") + " --token qq -k 10");
  CHECK(r.code == 0);
  std::vector<std::string> rows = lines_of(r.out);
  REQUIRE(rows.size() == 7);  // six candidates (unk included) + audit line
  CHECK(rows[0].substr(0, rows[0].find('\t')) == "好");
  CHECK(rows[1].substr(0, rows[1].find('\t')) == "大");
  CHECK(rows[2].substr(0, rows[2].find('\t')) == "天");
  CHECK(rows.back() == "single_char_in_top10=3");

  RunResult k2 = run_cli("nn --embeddings " + at("audit.vec") + " --token qq -k 2");
  std::vector<std::string> k2_rows = lines_of(k2.out);
  REQUIRE(k2_rows.size() == 3);
  CHECK(k2_rows.back() == "single_char_in_top2=2");

  RunResult oov = run_cli("nn --embeddings " + at("audit.vec") + " --token zz");
  CHECK(oov.code != 0);
}

TEST_CASE("run-all chains the full sixteen-system pipeline") {
  ensure_fixtures();
  std::string outdir = at("pipeline");
  RunResult r = run_cli("run-all --train " + at("train.tsv") + " --dev " + at("dev.tsv") +
                        " --test " + at("test.tsv") + " --classes " + at("classes.txt") +
                        " --outdir " + outdir +
                        " --dim 4 --embed-epochs 1 --net-epochs 1 --svm-epochs 2 --min-count 1 "
                        "--filters 3 --hidden 4 --batch-size 8");
  CHECK(r.code == 0);

  for (const std::string tag :
       {"cwe-l-w5", "cwe-p-w5", "fasttext-w5", "cwe-l-w11", "cwe-p-w11"})
    CHECK(std::filesystem::exists(outdir + "/emb-" + tag + ".vec"));
  int models = 0, preds = 0, metrics = 0;
  for (const auto& entry : std::filesystem::directory_iterator(outdir)) {
    std::string name = entry.path().filename().string();
    models += name.rfind("model-", 0) == 0;
    preds += name.rfind("pred-", 0) == 0;
    metrics += name.rfind("metrics-", 0) == 0;
  }
  CHECK(models == 16);
  CHECK(preds == 17);    // sixteen systems + the vote
  CHECK(metrics == 17);

  VoteNode tree = load_tree(outdir + "/ensemble.tree");
  CHECK(leaf_count(tree) == 16);
  std::size_t test_rows = lines_of(read_file(at("test.tsv"))).size();
  CHECK(lines_of(read_file(outdir + "/pred-vote.txt")).size() == test_rows);
  CHECK(contains(read_file(outdir + "/metrics-vote.txt"), "accuracy\t"));
  CHECK(contains(r.out, "system\taccuracy\tmacro_f1"));
  CHECK(contains(r.out, "vote\t"));
}
