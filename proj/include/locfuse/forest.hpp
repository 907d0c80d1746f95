#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "locfuse/rng.hpp"
#include "locfuse/types.hpp"

namespace locfuse {

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;           // 0 = unlimited
  std::size_t min_samples_leaf = 2;
  std::size_t features_per_split = 0;  // 0 = rule: ceil(sqrt(p)) classify, ceil(p/3) regress
  bool bootstrap = true;               // with-replacement resample to training-set size
  std::uint64_t seed = 0;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

// Internal nodes route x[feature] < threshold to the left child. Leaves carry
// the majority label (classifier) or the mean 2D position of their training
// samples (regressor, z = 0).
struct TreeNode {
  int feature = -1;  // -1 = leaf
  double threshold = 0.0;
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;
  std::string label;
  Position mean;

  TreeNode() = default;
  TreeNode(TreeNode&&) = default;
  TreeNode& operator=(TreeNode&&) = default;
  TreeNode(const TreeNode& other)
      : feature(other.feature),
        threshold(other.threshold),
        left(other.left ? std::make_unique<TreeNode>(*other.left) : nullptr),
        right(other.right ? std::make_unique<TreeNode>(*other.right) : nullptr),
        label(other.label),
        mean(other.mean) {}
  TreeNode& operator=(const TreeNode& other) {
    if (this != &other) *this = TreeNode(other);
    return *this;
  }

  bool is_leaf() const { return feature < 0; }
};

enum class ForestKind { Classifier, Regressor2D };

struct Forest {
  ForestKind kind = ForestKind::Classifier;
  std::vector<TreeNode> trees;
  std::vector<std::string> columns;  // binds feature indices to ap_ids
  std::vector<std::string> labels;   // classifier only; sorted distinct
};

// Gini impurity 1 - sum_c p_c^2 of a label multiset. Throws on empty input.
double gini(const std::vector<std::string>& labels);

// Var(x) + Var(y), population variance (divisor N). Throws on empty input.
double variance_impurity(const std::vector<Position>& targets);

// Greedy CART fit: at each node draw features_per_split distinct features,
// evaluate midpoint thresholds between consecutive sorted distinct values,
// keep the impurity-minimizing (feature, threshold); exact ties resolve to
// the lowest feature index, then the lowest threshold.
TreeNode fit_tree(const std::vector<std::vector<double>>& rows,
                  const std::vector<std::string>& labels, const ForestParams& params, Rng& rng);
TreeNode fit_tree(const std::vector<std::vector<double>>& rows,
                  const std::vector<Position>& targets, const ForestParams& params, Rng& rng);

// Bagged ensemble; tree t draws its randomness from derive_seed(params.seed, t)
// so the result is independent of training schedule.
Forest fit_forest(const FeatureMatrix& X, const std::vector<std::string>& labels,
                  const ForestParams& params);
Forest fit_forest(const FeatureMatrix& X, const std::vector<Position>& targets,
                  const ForestParams& params);

std::string predict_tree_class(const TreeNode& root, std::span<const double> x);
Position predict_tree_position(const TreeNode& root, std::span<const double> x);

// Majority vote over trees; ties go to the lexicographically smallest label.
std::string predict_class(const Forest& forest, std::span<const double> x);

// Unweighted mean over trees of leaf mean positions (z = 0).
Position predict_position(const Forest& forest, std::span<const double> x);

// Versioned flat text format; round-trips exactly.
std::string write_forest(const Forest& forest);
Forest parse_forest(const std::string& text);
void save_forest(const Forest& forest, const std::string& path);
Forest load_forest(const std::string& path);

}  // namespace locfuse
