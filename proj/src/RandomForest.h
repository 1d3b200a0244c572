#ifndef MDIMPUTE_RANDOM_FOREST_H
#define MDIMPUTE_RANDOM_FOREST_H

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace mdi {

enum class FeatureKind { Numeric, Categorical };

struct FeatureInfo {
    FeatureKind kind = FeatureKind::Numeric;
    // Categorical features take integer values 0..categoryCount-1 (stored as
    // doubles); at most 64 categories so membership masks fit one word.
    int categoryCount = 0;
};

// Column-major feature storage; split search scans one feature at a time.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(int rows, std::vector<FeatureInfo> features);

    int rowCount() const { return rows_; }
    int featureCount() const { return static_cast<int>(features_.size()); }
    const FeatureInfo& info(int f) const { return features_[static_cast<size_t>(f)]; }
    const std::vector<FeatureInfo>& features() const { return features_; }

    double at(int row, int feature) const {
        return columns_[static_cast<size_t>(feature)][static_cast<size_t>(row)];
    }
    void set(int row, int feature, double value) {
        columns_[static_cast<size_t>(feature)][static_cast<size_t>(row)] = value;
    }
    std::span<const double> column(int f) const { return columns_[static_cast<size_t>(f)]; }

    std::vector<double> rowValues(int row) const;

private:
    int rows_ = 0;
    std::vector<FeatureInfo> features_;
    std::vector<std::vector<double>> columns_;
};

enum class ForestTask { Regression, Classification };

struct ForestParams {
    int treeCount = 70;
    int minNodeSize = 7;
    int featuresPerSplit = 3;
    // Test hook: with bootstrap off every tree sees the full sample and the
    // features-per-split cap may equal the feature count.
    bool bootstrap = true;
};

nlohmann::json forestParamsToJson(const ForestParams& params);
ForestParams forestParamsFromJson(const nlohmann::json& doc);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    bool membership = false;
    double threshold = 0.0;
    uint64_t leftMask = 0;
    int left = -1;
    int right = -1;
    double value = 0.0;                // regression leaf mean
    std::vector<int64_t> classCounts;  // classification leaf
};

class DecisionTree {
public:
    DecisionTree() = default;
    DecisionTree(ForestTask task, std::vector<TreeNode> nodes)
        : task_(task), nodes_(std::move(nodes)) {}

    ForestTask task() const { return task_; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    int leafIndex(std::span<const double> x) const;
    double predictValue(std::span<const double> x) const;
    // Argmax of leaf class counts; ties take the smallest class.
    int predictClass(std::span<const double> x) const;

private:
    ForestTask task_ = ForestTask::Regression;
    std::vector<TreeNode> nodes_;
};

// Grows one unpruned CART tree on the given rows (bootstrap multiplicity
// included). At each node `featuresPerSplit` candidate features are drawn
// without replacement and scanned in ascending index order; splits are chosen
// by variance reduction (regression) or Gini decrease (classification) and
// only strictly better gains replace the incumbent.
DecisionTree growTree(const FeatureMatrix& data, std::span<const double> regressionTargets,
                      std::span<const int> classTargets, int classCount,
                      std::span<const int> rows, int featuresPerSplit, int minNodeSize,
                      uint64_t seed);

class RandomForest {
public:
    ForestTask task() const { return task_; }
    const ForestParams& params() const { return params_; }
    uint64_t seed() const { return seed_; }
    int classCount() const { return classCount_; }
    int featureCount() const { return static_cast<int>(features_.size()); }
    const std::vector<FeatureInfo>& features() const { return features_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }
    // Sorted row indices each tree's bootstrap excluded.
    const std::vector<std::vector<int>>& oobRows() const { return oobRows_; }

    double predict(std::span<const double> x) const;
    int predictClass(std::span<const double> x) const;

    nlohmann::json toJson() const;
    static RandomForest fromJson(const nlohmann::json& doc);

private:
    friend RandomForest fitForestImpl(const FeatureMatrix&, std::span<const double>,
                                      std::span<const int>, int, ForestTask,
                                      const ForestParams&, uint64_t);

    ForestTask task_ = ForestTask::Regression;
    ForestParams params_;
    uint64_t seed_ = 0;
    int classCount_ = 0;
    std::vector<FeatureInfo> features_;
    std::vector<DecisionTree> trees_;
    std::vector<std::vector<int>> oobRows_;
};

RandomForest fitRegressionForest(const FeatureMatrix& data, std::span<const double> targets,
                                 const ForestParams& params, uint64_t seed);
RandomForest fitClassificationForest(const FeatureMatrix& data, std::span<const int> targets,
                                     int classCount, const ForestParams& params, uint64_t seed);

struct OobError {
    double error = 0.0;  // MSE (regression) or misclassification rate
    int rowsEvaluated = 0;
    int rowsSkipped = 0;
};

OobError oobError(const RandomForest& forest, const FeatureMatrix& data,
                  std::span<const double> regressionTargets, std::span<const int> classTargets);

struct ImportanceReport {
    // Mean per-tree increase of out-of-bag error when the feature is permuted
    // within the tree's oob rows. Raw values may be negative; the clipped
    // view floors them at zero for reporting.
    std::vector<double> importance;
    std::vector<double> clippedImportance;
    // 1-based, rank 1 = largest importance; ties take the smaller feature.
    std::vector<int> rank;
};

ImportanceReport variableImportance(const RandomForest& forest, const FeatureMatrix& data,
                                    std::span<const double> regressionTargets,
                                    std::span<const int> classTargets, uint64_t seed);

class ProximityMatrix {
public:
    ProximityMatrix() = default;
    ProximityMatrix(int n, int treeCount)
        : n_(n), treeCount_(treeCount),
          counts_(static_cast<size_t>(n) * static_cast<size_t>(n), 0) {}

    int size() const { return n_; }
    int treeCount() const { return treeCount_; }
    int32_t count(int i, int j) const {
        return counts_[static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j)];
    }
    void add(int i, int j, int32_t amount) {
        counts_[static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j)] += amount;
    }
    double normalized(int i, int j) const {
        return static_cast<double>(count(i, j)) / static_cast<double>(treeCount_);
    }

private:
    int n_ = 0;
    int treeCount_ = 0;
    std::vector<int32_t> counts_;
};

ProximityMatrix proximity(const RandomForest& forest, const FeatureMatrix& data);

}  // namespace mdi

#endif
