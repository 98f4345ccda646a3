#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace textcat {

// One labeled example: a class index plus the pre-tokenized title.
// Segmentation happens upstream; the toolkit only splits on whitespace.
struct Headline {
  int label = 0;
  std::vector<std::string> tokens;

  bool operator==(const Headline& o) const { return label == o.label && tokens == o.tokens; }
};

// The label set plus split-size metadata for a classification task.
class DatasetSpec {
 public:
  DatasetSpec() = default;
  explicit DatasetSpec(std::vector<std::string> class_names, long long train_count = 0,
                       long long dev_count = 0, long long test_count = 0);

  // Reads one class name per line.
  static DatasetSpec from_file(const std::string& path);

  int num_classes() const { return static_cast<int>(class_names_.size()); }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::string& class_name(int label) const { return class_names_.at(label); }
  // -1 when the name is unknown.
  int label_index(const std::string& name) const;

  long long train_count() const { return train_count_; }
  long long dev_count() const { return dev_count_; }
  long long test_count() const { return test_count_; }

 private:
  std::vector<std::string> class_names_;
  std::unordered_map<std::string, int> name_to_index_;
  long long train_count_ = 0;
  long long dev_count_ = 0;
  long long test_count_ = 0;
};

using TokenCounts = std::unordered_map<std::string, long long>;

// Token <-> dense index map with counts. Indices are assigned by descending
// count, ties broken lexicographically; a single UNK slot follows all real
// tokens and absorbs the total count of everything dropped by min_count.
class Vocabulary {
 public:
  static constexpr const char* kUnkToken = "<unk>";

  Vocabulary() = default;

  int size() const { return static_cast<int>(tokens_.size()); }
  int unk_index() const { return unk_index_; }
  int min_count() const { return min_count_; }

  const std::string& token(int id) const { return tokens_.at(id); }
  long long count(int id) const { return counts_.at(id); }
  // -1 when the token is absent.
  int id(const std::string& token) const;
  int id_or_unk(const std::string& token) const;
  bool contains(const std::string& token) const { return id(token) >= 0; }

  const std::vector<std::string>& tokens() const { return tokens_; }

  friend Vocabulary build_vocab(const TokenCounts& counts, int min_count);
  friend Vocabulary vocab_from_rows(const std::vector<std::pair<std::string, long long>>& rows);

 private:
  std::vector<std::string> tokens_;
  std::vector<long long> counts_;
  std::unordered_map<std::string, int> token_to_id_;
  int unk_index_ = -1;
  int min_count_ = 1;
};

Vocabulary build_vocab(const TokenCounts& counts, int min_count);
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sentences, int min_count);

// Rebuilds a vocabulary from persisted (token, count) rows, in file order.
// Used by model/embedding loaders; rows must already contain the UNK slot.
Vocabulary vocab_from_rows(const std::vector<std::pair<std::string, long long>>& rows);

TokenCounts count_tokens(const std::vector<std::vector<std::string>>& sentences);

// Parses `label<TAB>token( token)*` lines; malformed lines are rejected with
// their line number.
std::vector<Headline> load_dataset(const std::string& path, const DatasetSpec& spec);
std::string serialize_headline(const Headline& h, const DatasetSpec& spec);

// One whitespace-tokenized sentence per line; blank lines are skipped.
std::vector<std::vector<std::string>> read_token_lines(const std::string& path);

std::vector<int> tokens_to_ids(const std::vector<std::string>& tokens, const Vocabulary& vocab);

// Unicode scalar values of a token, in order. Throws on an empty token.
std::vector<char32_t> chars_of(const std::string& token);

// Splits every token into its single-character tokens (for character-level
// classifier runs).
std::vector<std::string> to_char_tokens(const std::vector<std::string>& tokens);

}  // namespace textcat
