#include "textcat/ensemble.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include "textcat/io.hpp"

namespace textcat {

namespace {

void check_identifier(const std::string& id) {
  if (id.empty()) throw std::invalid_argument("empty system identifier");
  if (id == "vote") throw std::invalid_argument("'vote' is reserved for internal nodes");
  for (char c : id)
    if (std::isspace(static_cast<unsigned char>(c)))
      throw std::invalid_argument("system identifier '" + id + "' contains whitespace");
}

}  // namespace

VoteNode VoteNode::leaf(std::string id) {
  check_identifier(id);
  VoteNode n;
  n.is_leaf = true;
  n.system = std::move(id);
  return n;
}

VoteNode VoteNode::vote(std::vector<VoteNode> children) {
  if (children.empty()) throw std::invalid_argument("vote node needs at least one child");
  VoteNode n;
  n.children = std::move(children);
  return n;
}

int leaf_count(const VoteNode& node) {
  if (node.is_leaf) return 1;
  int total = 0;
  for (const VoteNode& c : node.children) total += leaf_count(c);
  return total;
}

std::vector<std::string> collect_leaves(const VoteNode& node) {
  std::vector<std::string> out;
  if (node.is_leaf) {
    out.push_back(node.system);
    return out;
  }
  for (const VoteNode& c : node.children) {
    std::vector<std::string> sub = collect_leaves(c);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

Prediction plurality_vote(const std::vector<Prediction>& votes) {
  if (votes.empty()) throw std::invalid_argument("plurality_vote over no votes");
  std::map<int, std::pair<int, double>> tally;  // label -> (count, confidence sum)
  for (const Prediction& v : votes) {
    auto& [count, conf] = tally[v.label];
    ++count;
    conf += v.confidence;
  }
  int best_label = -1;
  int best_count = -1;
  double best_mean = 0.0;
  // Ascending label order plus strict comparisons = smallest index on full ties.
  for (const auto& [label, cs] : tally) {
    double mean = cs.second / cs.first;
    if (cs.first > best_count || (cs.first == best_count && mean > best_mean)) {
      best_label = label;
      best_count = cs.first;
      best_mean = mean;
    }
  }
  return {best_label, best_mean};
}

Prediction soft_vote(const std::vector<Prediction>& votes) {
  if (votes.empty()) throw std::invalid_argument("soft_vote over no votes");
  std::map<int, double> sums;
  for (const Prediction& v : votes) sums[v.label] += v.confidence;
  int best_label = -1;
  double best_sum = -1.0;
  for (const auto& [label, sum] : sums) {
    if (sum > best_sum) {
      best_label = label;
      best_sum = sum;
    }
  }
  return {best_label, best_sum / static_cast<double>(votes.size())};
}

Prediction eval_tree(const VoteNode& tree, const std::map<std::string, Prediction>& leaves,
                     bool soft) {
  if (tree.is_leaf) {
    auto it = leaves.find(tree.system);
    if (it == leaves.end())
      throw std::runtime_error("no prediction source for system '" + tree.system + "'");
    return it->second;
  }
  std::vector<Prediction> votes;
  votes.reserve(tree.children.size());
  for (const VoteNode& c : tree.children) votes.push_back(eval_tree(c, leaves, soft));
  return soft ? soft_vote(votes) : plurality_vote(votes);
}

namespace {

VoteNode arch_group(const std::vector<std::string>& systems, const char* arch) {
  if (systems.size() != 5)
    throw std::invalid_argument("expected exactly 5 " + std::string(arch) + " systems, got " +
                                std::to_string(systems.size()));
  std::vector<VoteNode> children;
  for (const auto& id : systems) children.push_back(VoteNode::leaf(id));
  return VoteNode::vote(std::move(children));
}

}  // namespace

VoteNode build_two_level_topology(const std::vector<std::string>& nbow_systems,
                                  const std::vector<std::string>& cnn_systems,
                                  const std::vector<std::string>& lstm_systems,
                                  const std::string& bow_system) {
  std::vector<VoteNode> top;
  top.push_back(arch_group(nbow_systems, "nbow"));
  top.push_back(arch_group(cnn_systems, "cnn"));
  top.push_back(arch_group(lstm_systems, "lstm"));
  top.push_back(VoteNode::leaf(bow_system));
  return VoteNode::vote(std::move(top));
}

VoteNode build_flat_topology(const std::vector<std::string>& systems) {
  std::vector<VoteNode> children;
  for (const auto& id : systems) children.push_back(VoteNode::leaf(id));
  return VoteNode::vote(std::move(children));
}

namespace {

void serialize_node(const VoteNode& node, int depth, std::string& out) {
  out.append(static_cast<std::size_t>(2) * depth, ' ');
  if (node.is_leaf) {
    out += node.system;
    out += '\n';
    return;
  }
  out += "vote\n";
  for (const VoteNode& c : node.children) serialize_node(c, depth + 1, out);
}

void validate_parsed(const VoteNode& node) {
  if (node.is_leaf) return;
  if (node.children.empty()) throw std::runtime_error("vote node with no children");
  for (const VoteNode& c : node.children) validate_parsed(c);
}

}  // namespace

std::string serialize_tree(const VoteNode& tree) {
  std::string out;
  serialize_node(tree, 0, out);
  return out;
}

VoteNode parse_tree(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) lines.push_back(cur);

  VoteNode root;
  bool have_root = false;
  std::vector<VoteNode*> stack;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string line = lines[ln];
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fail = [&](const std::string& msg) {
      throw std::runtime_error("line " + std::to_string(ln + 1) + ": " + msg);
    };
    std::size_t spaces = 0;
    while (spaces < line.size() && line[spaces] == ' ') ++spaces;
    std::string rest = line.substr(spaces);
    if (rest.empty()) fail("blank line in ensemble tree");
    if (spaces % 2 != 0) fail("indentation must be two spaces per level");
    int depth = static_cast<int>(spaces / 2);
    if (depth > static_cast<int>(stack.size())) fail("indentation skips a level");

    VoteNode node;
    if (rest == "vote") {
      node.is_leaf = false;
    } else {
      try {
        node = VoteNode::leaf(rest);
      } catch (const std::exception& e) {
        fail(e.what());
      }
    }

    stack.resize(depth);
    if (depth == 0) {
      if (have_root) fail("multiple root nodes");
      root = std::move(node);
      have_root = true;
      stack.push_back(&root);
    } else {
      VoteNode* parent = stack[depth - 1];
      if (parent->is_leaf) fail("leaf '" + parent->system + "' cannot have children");
      parent->children.push_back(std::move(node));
      stack.push_back(&parent->children.back());
    }
  }
  if (!have_root) throw std::runtime_error("empty ensemble tree");
  validate_parsed(root);
  return root;
}

VoteNode load_tree(const std::string& path) {
  try {
    return parse_tree(read_file(path));
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_tree(const VoteNode& tree, const std::string& path) {
  OutFile out(path);
  out.stream() << serialize_tree(tree);
  out.commit();
}

PredictionFile read_predictions(const std::string& path, const DatasetSpec& spec) {
  std::ifstream is = open_input(path);
  PredictionFile out;
  std::string line;
  long long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && is.eof()) break;
    auto where = path + ":" + std::to_string(lineno);
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error(where + ": missing tab separator");
    std::string name = line.substr(0, tab);
    int label = spec.label_index(name);
    if (label < 0) throw std::runtime_error(where + ": unknown class '" + name + "'");
    std::vector<std::string> parts = split_ws(line.substr(tab + 1));
    if (static_cast<int>(parts.size()) != spec.num_classes())
      throw std::runtime_error(where + ": expected " + std::to_string(spec.num_classes()) +
                               " probabilities, got " + std::to_string(parts.size()));
    std::vector<double> probs(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) probs[i] = parse_double(parts[i], where);
    out.labels.push_back(label);
    out.probs.push_back(std::move(probs));
  }
  return out;
}

void write_predictions(const std::string& path, const std::vector<int>& labels,
                       const std::vector<std::vector<double>>& probs, const DatasetSpec& spec) {
  if (labels.size() != probs.size())
    throw std::invalid_argument("labels and probability rows differ in length");
  OutFile out(path);
  std::ostream& os = out.stream();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    os << spec.class_name(labels[i]) << '\t';
    for (std::size_t j = 0; j < probs[i].size(); ++j) {
      if (j) os << ' ';
      os << fmt_g6(probs[i][j]);
    }
    os << '\n';
  }
  out.commit();
}

}  // namespace textcat
