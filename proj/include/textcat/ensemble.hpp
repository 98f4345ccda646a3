#pragma once

#include <map>
#include <string>
#include <vector>

#include "textcat/corpus.hpp"

namespace textcat {

struct Prediction {
  int label = 0;
  double confidence = 0.0;  // in [0,1]
};

// LEAF(system identifier) or VOTE(children).
struct VoteNode {
  bool is_leaf = false;
  std::string system;            // leaf only
  std::vector<VoteNode> children;  // vote only

  static VoteNode leaf(std::string id);
  static VoteNode vote(std::vector<VoteNode> children);
};

int leaf_count(const VoteNode& node);
std::vector<std::string> collect_leaves(const VoteNode& node);

// Hard plurality: highest vote count wins; tied labels compare mean
// confidence, then the smallest class index. Output confidence is the mean
// confidence of the winner's votes.
Prediction plurality_vote(const std::vector<Prediction>& votes);

// Confidence-sum alternative: the label with the largest summed confidence
// wins (ties toward the smallest index); output confidence is that sum
// divided by the number of votes.
Prediction soft_vote(const std::vector<Prediction>& votes);

// Bottom-up evaluation; throws naming the system when a leaf has no entry.
Prediction eval_tree(const VoteNode& tree, const std::map<std::string, Prediction>& leaves,
                     bool soft = false);

// VOTE( VOTE(nbow x5), VOTE(cnn x5), VOTE(lstm x5), LEAF(bow) ).
// Each architecture group must contain exactly five system identifiers.
VoteNode build_two_level_topology(const std::vector<std::string>& nbow_systems,
                                  const std::vector<std::string>& cnn_systems,
                                  const std::vector<std::string>& lstm_systems,
                                  const std::string& bow_system);

// Single VOTE node over all the given systems.
VoteNode build_flat_topology(const std::vector<std::string>& systems);

// Indented text form: "vote" lines open internal nodes, any other line is a
// leaf identifier, nesting depth = two spaces per level.
std::string serialize_tree(const VoteNode& tree);
VoteNode parse_tree(const std::string& text);
VoteNode load_tree(const std::string& path);
void save_tree(const VoteNode& tree, const std::string& path);

// Prediction files: one `class_name<TAB>p_0 p_1 ... p_{K-1}` line per input.
struct PredictionFile {
  std::vector<int> labels;
  std::vector<std::vector<double>> probs;
};

PredictionFile read_predictions(const std::string& path, const DatasetSpec& spec);
void write_predictions(const std::string& path, const std::vector<int>& labels,
                       const std::vector<std::vector<double>>& probs, const DatasetSpec& spec);

}  // namespace textcat
