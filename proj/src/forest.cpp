#include "locfuse/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "locfuse/error.hpp"

namespace locfuse {

double gini(const std::vector<std::string>& labels) {
  if (labels.empty()) throw Error("empty-input", "gini of an empty multiset");
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  const double m = static_cast<double>(labels.size());
  double sum_sq = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / m;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double variance_impurity(const std::vector<Position>& targets) {
  if (targets.empty()) throw Error("empty-input", "variance of an empty target set");
  const double n = static_cast<double>(targets.size());
  double mx = 0.0, my = 0.0;
  for (const Position& p : targets) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double var = 0.0;
  for (const Position& p : targets) {
    var += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
  }
  return var / n;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double weighted = kInf;  // weighted child impurity
};

std::size_t resolve_features_per_split(const ForestParams& params, std::size_t p,
                                       ForestKind kind) {
  std::size_t k = params.features_per_split;
  if (k == 0) {
    k = kind == ForestKind::Classifier
            ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))))
            : static_cast<std::size_t>(std::ceil(static_cast<double>(p) / 3.0));
  }
  if (k < 1 || k > p) throw Error("bad-params", "features_per_split must be in [1, p]");
  return k;
}

void check_matrix(const std::vector<std::vector<double>>& rows, std::size_t y_size) {
  if (rows.empty()) throw Error("empty-training-set", "training set is empty");
  const std::size_t width = rows.front().size();
  if (width == 0) throw Error("bad-argument", "feature width must be >= 1");
  for (const auto& r : rows) {
    if (r.size() != width) throw Error("width-mismatch", "feature rows are not rectangular");
  }
  if (y_size != rows.size()) throw Error("width-mismatch", "|y| must equal |X|");
}

void check_params(const ForestParams& params) {
  if (params.n_trees < 1) throw Error("bad-params", "n_trees must be >= 1");
  if (params.min_samples_leaf < 1) throw Error("bad-params", "min_samples_leaf must be >= 1");
}

// Draws k distinct feature indices, returned ascending so candidate ties
// resolve to the lowest feature index.
void draw_features(Rng& rng, std::size_t p, std::size_t k, std::vector<std::size_t>& out) {
  out.resize(p);
  std::iota(out.begin(), out.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(p - i));
    std::swap(out[i], out[j]);
  }
  out.resize(k);
  std::sort(out.begin(), out.end());
}

// Midpoint between two consecutive distinct values, bumped upward if rounding
// collapsed it onto the lower value; with the x < threshold routing rule this
// keeps the trained partition exact.
double midpoint_threshold(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid > lo ? mid : hi;
}

class ClassifierTreeBuilder {
 public:
  ClassifierTreeBuilder(const std::vector<std::vector<double>>& rows, const std::vector<int>& y,
                        std::size_t n_labels, const std::vector<std::string>& label_names,
                        const ForestParams& params, std::size_t k, Rng& rng)
      : rows_(rows), y_(y), n_labels_(n_labels), label_names_(label_names), params_(params),
        k_(k), rng_(rng), counts_left_(n_labels), counts_right_(n_labels) {}

  TreeNode build(std::vector<std::size_t>& idx, std::size_t depth) {
    const std::size_t m = idx.size();
    bool pure = true;
    for (std::size_t i = 1; i < m && pure; ++i) pure = y_[idx[i]] == y_[idx[0]];
    const bool depth_stop = params_.max_depth != 0 && depth >= params_.max_depth;
    if (pure || depth_stop || m < 2 * params_.min_samples_leaf) return make_leaf(idx);

    const SplitChoice best = choose_split(idx);
    if (!best.found || !(best.weighted < node_impurity(idx))) return make_leaf(idx);

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      (rows_[i][static_cast<std::size_t>(best.feature)] < best.threshold ? left_idx : right_idx)
          .push_back(i);
    }
    TreeNode node;
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = std::make_unique<TreeNode>(build(left_idx, depth + 1));
    node.right = std::make_unique<TreeNode>(build(right_idx, depth + 1));
    return node;
  }

 private:
  TreeNode make_leaf(const std::vector<std::size_t>& idx) {
    std::fill(counts_left_.begin(), counts_left_.end(), 0);
    for (std::size_t i : idx) ++counts_left_[static_cast<std::size_t>(y_[i])];
    std::size_t best = 0;
    for (std::size_t c = 1; c < n_labels_; ++c) {
      if (counts_left_[c] > counts_left_[best]) best = c;  // ties keep the lowest id
    }
    TreeNode leaf;
    leaf.label = label_names_[best];
    return leaf;
  }

  double node_impurity(const std::vector<std::size_t>& idx) {
    std::fill(counts_left_.begin(), counts_left_.end(), 0);
    for (std::size_t i : idx) ++counts_left_[static_cast<std::size_t>(y_[i])];
    const double m = static_cast<double>(idx.size());
    double sum_sq = 0.0;
    for (std::size_t c = 0; c < n_labels_; ++c) {
      const double cnt = static_cast<double>(counts_left_[c]);
      sum_sq += cnt * cnt;
    }
    return 1.0 - sum_sq / (m * m);
  }

  SplitChoice choose_split(const std::vector<std::size_t>& idx) {
    const std::size_t m = idx.size();
    const std::size_t min_leaf = params_.min_samples_leaf;
    draw_features(rng_, rows_.front().size(), k_, features_);
    SplitChoice best;
    order_ = idx;
    for (std::size_t f : features_) {
      std::sort(order_.begin(), order_.end(),
                [&](std::size_t a, std::size_t b) { return rows_[a][f] < rows_[b][f]; });
      if (rows_[order_.front()][f] == rows_[order_.back()][f]) continue;

      std::fill(counts_left_.begin(), counts_left_.end(), 0);
      std::fill(counts_right_.begin(), counts_right_.end(), 0);
      for (std::size_t i : order_) ++counts_right_[static_cast<std::size_t>(y_[i])];
      std::int64_t ss_left = 0;
      std::int64_t ss_right = 0;
      for (std::size_t c = 0; c < n_labels_; ++c) ss_right += counts_right_[c] * counts_right_[c];

      for (std::size_t i = 1; i < m; ++i) {
        const std::size_t c = static_cast<std::size_t>(y_[order_[i - 1]]);
        ss_left += 2 * counts_left_[c] + 1;
        ss_right -= 2 * counts_right_[c] - 1;
        ++counts_left_[c];
        --counts_right_[c];
        const double lo = rows_[order_[i - 1]][f];
        const double hi = rows_[order_[i]][f];
        if (lo == hi || i < min_leaf || m - i < min_leaf) continue;
        const double ml = static_cast<double>(i);
        const double mr = static_cast<double>(m - i);
        const double gini_l = 1.0 - static_cast<double>(ss_left) / (ml * ml);
        const double gini_r = 1.0 - static_cast<double>(ss_right) / (mr * mr);
        const double weighted = (ml * gini_l + mr * gini_r) / static_cast<double>(m);
        if (weighted < best.weighted) {
          best = {true, static_cast<int>(f), midpoint_threshold(lo, hi), weighted};
        }
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& rows_;
  const std::vector<int>& y_;
  std::size_t n_labels_;
  const std::vector<std::string>& label_names_;
  const ForestParams& params_;
  std::size_t k_;
  Rng& rng_;
  std::vector<std::int64_t> counts_left_, counts_right_;
  std::vector<std::size_t> features_, order_;
};

class RegressorTreeBuilder {
 public:
  RegressorTreeBuilder(const std::vector<std::vector<double>>& rows,
                       const std::vector<Position>& y, const ForestParams& params, std::size_t k,
                       Rng& rng)
      : rows_(rows), y_(y), params_(params), k_(k), rng_(rng) {}

  TreeNode build(std::vector<std::size_t>& idx, std::size_t depth) {
    const std::size_t m = idx.size();
    bool pure = true;
    for (std::size_t i = 1; i < m && pure; ++i) {
      pure = y_[idx[i]].x == y_[idx[0]].x && y_[idx[i]].y == y_[idx[0]].y;
    }
    const bool depth_stop = params_.max_depth != 0 && depth >= params_.max_depth;
    if (pure || depth_stop || m < 2 * params_.min_samples_leaf) return make_leaf(idx);

    const SplitChoice best = choose_split(idx);
    if (!best.found || !(best.weighted < node_impurity(idx))) return make_leaf(idx);

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      (rows_[i][static_cast<std::size_t>(best.feature)] < best.threshold ? left_idx : right_idx)
          .push_back(i);
    }
    TreeNode node;
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = std::make_unique<TreeNode>(build(left_idx, depth + 1));
    node.right = std::make_unique<TreeNode>(build(right_idx, depth + 1));
    return node;
  }

 private:
  TreeNode make_leaf(const std::vector<std::size_t>& idx) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i : idx) {
      sx += y_[i].x;
      sy += y_[i].y;
    }
    const double m = static_cast<double>(idx.size());
    TreeNode leaf;
    leaf.mean = {sx / m, sy / m, 0.0};
    return leaf;
  }

  double node_impurity(const std::vector<std::size_t>& idx) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i : idx) {
      sx += y_[i].x;
      sy += y_[i].y;
      sxx += y_[i].x * y_[i].x;
      syy += y_[i].y * y_[i].y;
    }
    const double m = static_cast<double>(idx.size());
    return std::max(0.0, (sxx - sx * sx / m + syy - sy * sy / m) / m);
  }

  SplitChoice choose_split(const std::vector<std::size_t>& idx) {
    const std::size_t m = idx.size();
    const std::size_t min_leaf = params_.min_samples_leaf;
    draw_features(rng_, rows_.front().size(), k_, features_);
    SplitChoice best;
    order_ = idx;
    for (std::size_t f : features_) {
      std::sort(order_.begin(), order_.end(),
                [&](std::size_t a, std::size_t b) { return rows_[a][f] < rows_[b][f]; });
      if (rows_[order_.front()][f] == rows_[order_.back()][f]) continue;

      double sx_r = 0.0, sy_r = 0.0, sxx_r = 0.0, syy_r = 0.0;
      for (std::size_t i : order_) {
        sx_r += y_[i].x;
        sy_r += y_[i].y;
        sxx_r += y_[i].x * y_[i].x;
        syy_r += y_[i].y * y_[i].y;
      }
      double sx_l = 0.0, sy_l = 0.0, sxx_l = 0.0, syy_l = 0.0;

      for (std::size_t i = 1; i < m; ++i) {
        const Position& t = y_[order_[i - 1]];
        sx_l += t.x;
        sy_l += t.y;
        sxx_l += t.x * t.x;
        syy_l += t.y * t.y;
        sx_r -= t.x;
        sy_r -= t.y;
        sxx_r -= t.x * t.x;
        syy_r -= t.y * t.y;
        const double lo = rows_[order_[i - 1]][f];
        const double hi = rows_[order_[i]][f];
        if (lo == hi || i < min_leaf || m - i < min_leaf) continue;
        const double ml = static_cast<double>(i);
        const double mr = static_cast<double>(m - i);
        const double sse_l = std::max(0.0, sxx_l - sx_l * sx_l / ml + syy_l - sy_l * sy_l / ml);
        const double sse_r = std::max(0.0, sxx_r - sx_r * sx_r / mr + syy_r - sy_r * sy_r / mr);
        const double weighted = (sse_l + sse_r) / static_cast<double>(m);
        if (weighted < best.weighted) {
          best = {true, static_cast<int>(f), midpoint_threshold(lo, hi), weighted};
        }
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& rows_;
  const std::vector<Position>& y_;
  const ForestParams& params_;
  std::size_t k_;
  Rng& rng_;
  std::vector<std::size_t> features_, order_;
};

std::vector<std::size_t> bootstrap_indices(std::size_t n, bool bootstrap, Rng& rng) {
  std::vector<std::size_t> idx(n);
  if (bootstrap) {
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::size_t>(rng.below(n));
  } else {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  }
  return idx;
}

}  // namespace

TreeNode fit_tree(const std::vector<std::vector<double>>& rows,
                  const std::vector<std::string>& labels, const ForestParams& params, Rng& rng) {
  check_matrix(rows, labels.size());
  check_params(params);
  std::vector<std::string> names(labels);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = static_cast<int>(
        std::lower_bound(names.begin(), names.end(), labels[i]) - names.begin());
  }
  const std::size_t k =
      resolve_features_per_split(params, rows.front().size(), ForestKind::Classifier);
  ClassifierTreeBuilder builder(rows, y, names.size(), names, params, k, rng);
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return builder.build(idx, 0);
}

TreeNode fit_tree(const std::vector<std::vector<double>>& rows,
                  const std::vector<Position>& targets, const ForestParams& params, Rng& rng) {
  check_matrix(rows, targets.size());
  check_params(params);
  const std::size_t k =
      resolve_features_per_split(params, rows.front().size(), ForestKind::Regressor2D);
  RegressorTreeBuilder builder(rows, targets, params, k, rng);
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return builder.build(idx, 0);
}

Forest fit_forest(const FeatureMatrix& X, const std::vector<std::string>& labels,
                  const ForestParams& params) {
  check_matrix(X.rows, labels.size());
  check_params(params);
  Forest forest;
  forest.kind = ForestKind::Classifier;
  forest.columns = X.columns;
  forest.labels = labels;
  std::sort(forest.labels.begin(), forest.labels.end());
  forest.labels.erase(std::unique(forest.labels.begin(), forest.labels.end()),
                      forest.labels.end());
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = static_cast<int>(
        std::lower_bound(forest.labels.begin(), forest.labels.end(), labels[i]) -
        forest.labels.begin());
  }
  const std::size_t k =
      resolve_features_per_split(params, X.columns.size(), ForestKind::Classifier);
  forest.trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(params.seed, t));
    auto idx = bootstrap_indices(X.rows.size(), params.bootstrap, rng);
    ClassifierTreeBuilder builder(X.rows, y, forest.labels.size(), forest.labels, params, k, rng);
    forest.trees.push_back(builder.build(idx, 0));
  }
  return forest;
}

Forest fit_forest(const FeatureMatrix& X, const std::vector<Position>& targets,
                  const ForestParams& params) {
  check_matrix(X.rows, targets.size());
  check_params(params);
  Forest forest;
  forest.kind = ForestKind::Regressor2D;
  forest.columns = X.columns;
  const std::size_t k =
      resolve_features_per_split(params, X.columns.size(), ForestKind::Regressor2D);
  forest.trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(params.seed, t));
    auto idx = bootstrap_indices(X.rows.size(), params.bootstrap, rng);
    RegressorTreeBuilder builder(X.rows, targets, params, k, rng);
    forest.trees.push_back(builder.build(idx, 0));
  }
  return forest;
}

namespace {

const TreeNode& descend(const TreeNode& root, std::span<const double> x) {
  const TreeNode* node = &root;
  while (!node->is_leaf()) {
    node = x[static_cast<std::size_t>(node->feature)] < node->threshold ? node->left.get()
                                                                        : node->right.get();
  }
  return *node;
}

void check_width(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.columns.size()) {
    throw Error("width-mismatch", "feature vector width " + std::to_string(x.size()) +
                                      " != forest width " +
                                      std::to_string(forest.columns.size()));
  }
}

}  // namespace

std::string predict_tree_class(const TreeNode& root, std::span<const double> x) {
  return descend(root, x).label;
}

Position predict_tree_position(const TreeNode& root, std::span<const double> x) {
  return descend(root, x).mean;
}

std::string predict_class(const Forest& forest, std::span<const double> x) {
  if (forest.kind != ForestKind::Classifier) throw Error("wrong-kind", "not a classifier forest");
  if (forest.trees.empty()) throw Error("empty-forest", "forest holds no trees");
  check_width(forest, x);
  std::map<std::string, std::size_t> votes;  // ordered: ties fall to the smallest label
  for (const TreeNode& tree : forest.trees) ++votes[descend(tree, x).label];
  const std::string* best = nullptr;
  std::size_t best_votes = 0;
  for (const auto& [label, n] : votes) {
    if (n > best_votes) {
      best = &label;
      best_votes = n;
    }
  }
  return *best;
}

Position predict_position(const Forest& forest, std::span<const double> x) {
  if (forest.kind != ForestKind::Regressor2D) throw Error("wrong-kind", "not a regressor forest");
  if (forest.trees.empty()) throw Error("empty-forest", "forest holds no trees");
  check_width(forest, x);
  double sx = 0.0, sy = 0.0;
  for (const TreeNode& tree : forest.trees) {
    const Position p = descend(tree, x).mean;
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(forest.trees.size());
  return {sx / n, sy / n, 0.0};
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_node(const TreeNode& node, std::string& out, ForestKind kind) {
  if (node.is_leaf()) {
    out += "L ";
    if (kind == ForestKind::Classifier) {
      out += node.label;
    } else {
      out += fmt_double(node.mean.x);
      out += ' ';
      out += fmt_double(node.mean.y);
    }
    out += '\n';
    return;
  }
  out += "I ";
  out += std::to_string(node.feature);
  out += ' ';
  out += fmt_double(node.threshold);
  out += '\n';
  write_node(*node.left, out, kind);
  write_node(*node.right, out, kind);
}

TreeNode read_node(std::istream& in, ForestKind kind, std::size_t width) {
  std::string line;
  if (!std::getline(in, line)) throw Error("model-parse", "unexpected end of forest file");
  std::istringstream ls(line);
  std::string tag;
  ls >> tag;
  TreeNode node;
  if (tag == "I") {
    long feature = -1;
    ls >> feature >> node.threshold;
    if (ls.fail() || feature < 0 || static_cast<std::size_t>(feature) >= width) {
      throw Error("model-parse", "bad internal node line: " + line);
    }
    node.feature = static_cast<int>(feature);
    node.left = std::make_unique<TreeNode>(read_node(in, kind, width));
    node.right = std::make_unique<TreeNode>(read_node(in, kind, width));
  } else if (tag == "L") {
    if (kind == ForestKind::Classifier) {
      ls >> node.label;
      if (ls.fail() || node.label.empty()) throw Error("model-parse", "bad leaf line: " + line);
    } else {
      ls >> node.mean.x >> node.mean.y;
      if (ls.fail()) throw Error("model-parse", "bad leaf line: " + line);
    }
  } else {
    throw Error("model-parse", "unknown node tag in line: " + line);
  }
  return node;
}

void collect_labels(const TreeNode& node, std::vector<std::string>& labels) {
  if (node.is_leaf()) {
    labels.push_back(node.label);
    return;
  }
  collect_labels(*node.left, labels);
  collect_labels(*node.right, labels);
}

}  // namespace

std::string write_forest(const Forest& forest) {
  std::string out = "locfuse-forest v1 ";
  out += forest.kind == ForestKind::Classifier ? "classifier" : "regressor2d";
  out += ' ';
  out += std::to_string(forest.trees.size());
  for (const std::string& c : forest.columns) {
    out += ' ';
    out += c;
  }
  out += '\n';
  for (const TreeNode& tree : forest.trees) write_node(tree, out, forest.kind);
  return out;
}

Forest parse_forest(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) throw Error("model-parse", "empty forest file");
  std::istringstream hs(header);
  std::string magic, version, kind_token;
  std::size_t n_trees = 0;
  hs >> magic >> version >> kind_token >> n_trees;
  if (magic != "locfuse-forest" || version != "v1") {
    throw Error("model-parse", "not a locfuse-forest v1 file");
  }
  Forest forest;
  if (kind_token == "classifier") {
    forest.kind = ForestKind::Classifier;
  } else if (kind_token == "regressor2d") {
    forest.kind = ForestKind::Regressor2D;
  } else {
    throw Error("model-parse", "unknown forest kind '" + kind_token + "'");
  }
  if (n_trees < 1) throw Error("model-parse", "forest must hold at least one tree");
  std::string column;
  while (hs >> column) forest.columns.push_back(column);
  if (forest.columns.empty()) throw Error("model-parse", "forest header lists no columns");

  forest.trees.reserve(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    forest.trees.push_back(read_node(in, forest.kind, forest.columns.size()));
  }
  if (forest.kind == ForestKind::Classifier) {
    for (const TreeNode& tree : forest.trees) collect_labels(tree, forest.labels);
    std::sort(forest.labels.begin(), forest.labels.end());
    forest.labels.erase(std::unique(forest.labels.begin(), forest.labels.end()),
                        forest.labels.end());
  }
  return forest;
}

void save_forest(const Forest& forest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write '" + path + "'");
  out << write_forest(forest);
  if (!out.flush()) throw Error("io", "failed writing '" + path + "'");
}

Forest load_forest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_forest(buf.str());
}

}  // namespace locfuse
