#include "textcat/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "textcat/io.hpp"
#include "textcat/utf8.hpp"

namespace textcat {

DatasetSpec::DatasetSpec(std::vector<std::string> class_names, long long train_count,
                         long long dev_count, long long test_count)
    : class_names_(std::move(class_names)),
      train_count_(train_count),
      dev_count_(dev_count),
      test_count_(test_count) {
  if (class_names_.size() < 2) throw std::invalid_argument("DatasetSpec needs at least 2 classes");
  for (std::size_t i = 0; i < class_names_.size(); ++i) {
    if (class_names_[i].empty()) throw std::invalid_argument("empty class name");
    auto [it, inserted] = name_to_index_.emplace(class_names_[i], static_cast<int>(i));
    (void)it;
    if (!inserted) throw std::invalid_argument("duplicate class name '" + class_names_[i] + "'");
  }
}

DatasetSpec DatasetSpec::from_file(const std::string& path) {
  std::ifstream is = open_input(path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return DatasetSpec(std::move(names));
}

int DatasetSpec::label_index(const std::string& name) const {
  auto it = name_to_index_.find(name);
  return it == name_to_index_.end() ? -1 : it->second;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? -1 : it->second;
}

int Vocabulary::id_or_unk(const std::string& token) const {
  int i = id(token);
  return i >= 0 ? i : unk_index_;
}

TokenCounts count_tokens(const std::vector<std::vector<std::string>>& sentences) {
  TokenCounts counts;
  for (const auto& sent : sentences)
    for (const auto& tok : sent) ++counts[tok];
  return counts;
}

Vocabulary build_vocab(const TokenCounts& counts, int min_count) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  std::vector<std::pair<std::string, long long>> kept;
  long long dropped_total = 0;
  for (const auto& [tok, cnt] : counts) {
    if (cnt >= min_count)
      kept.emplace_back(tok, cnt);
    else
      dropped_total += cnt;
  }
  if (kept.empty()) throw std::runtime_error("vocabulary is empty after min_count filtering");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary v;
  v.min_count_ = min_count;
  for (const auto& [tok, cnt] : kept) {
    v.token_to_id_.emplace(tok, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(tok);
    v.counts_.push_back(cnt);
  }
  // The literal UNK token, if it survived filtering, doubles as the slot.
  int unk = v.id(Vocabulary::kUnkToken);
  if (unk >= 0) {
    v.counts_[unk] += dropped_total;
    v.unk_index_ = unk;
  } else {
    v.unk_index_ = static_cast<int>(v.tokens_.size());
    v.token_to_id_.emplace(Vocabulary::kUnkToken, v.unk_index_);
    v.tokens_.push_back(Vocabulary::kUnkToken);
    v.counts_.push_back(dropped_total);
  }
  return v;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sentences, int min_count) {
  return build_vocab(count_tokens(sentences), min_count);
}

Vocabulary vocab_from_rows(const std::vector<std::pair<std::string, long long>>& rows) {
  Vocabulary v;
  v.min_count_ = 1;
  for (const auto& [tok, cnt] : rows) {
    auto [it, inserted] = v.token_to_id_.emplace(tok, static_cast<int>(v.tokens_.size()));
    (void)it;
    if (!inserted) throw std::runtime_error("duplicate token '" + tok + "' in vocabulary rows");
    v.tokens_.push_back(tok);
    v.counts_.push_back(cnt);
  }
  v.unk_index_ = v.id(Vocabulary::kUnkToken);
  if (v.unk_index_ < 0) throw std::runtime_error("vocabulary rows lack the UNK slot");
  return v;
}

std::vector<Headline> load_dataset(const std::string& path, const DatasetSpec& spec) {
  std::ifstream is = open_input(path);
  std::vector<Headline> out;
  std::string line;
  long long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && is.peek() == std::char_traits<char>::eof()) break;
    std::string where = path + ":" + std::to_string(lineno);
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error(where + ": missing tab separator");
    std::string label = line.substr(0, tab);
    int idx = spec.label_index(label);
    if (idx < 0) throw std::runtime_error(where + ": unknown label '" + label + "'");
    Headline h;
    h.label = idx;
    std::size_t i = tab + 1;
    while (i < line.size()) {
      while (i < line.size() && line[i] == ' ') ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ') ++j;
      if (j > i) h.tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (h.tokens.empty()) throw std::runtime_error(where + ": no tokens");
    out.push_back(std::move(h));
  }
  return out;
}

std::string serialize_headline(const Headline& h, const DatasetSpec& spec) {
  std::string out = spec.class_name(h.label);
  out.push_back('\t');
  for (std::size_t i = 0; i < h.tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += h.tokens[i];
  }
  return out;
}

std::vector<std::vector<std::string>> read_token_lines(const std::string& path) {
  std::ifstream is = open_input(path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = split_ws(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

std::vector<int> tokens_to_ids(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& tok : tokens) ids.push_back(vocab.id_or_unk(tok));
  return ids;
}

std::vector<char32_t> chars_of(const std::string& token) {
  if (token.empty()) throw std::invalid_argument("chars_of: empty token");
  return utf8_decode(token);
}

std::vector<std::string> to_char_tokens(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  for (const auto& tok : tokens)
    for (char32_t cp : chars_of(tok)) out.push_back(utf8_encode(cp));
  return out;
}

}  // namespace textcat
