#include "RandomForest.h"

#include <algorithm>
#include <cmath>

#include "Exceptions.h"
#include "Parallel.h"
#include "Rng.h"

namespace mdi {

namespace {

constexpr int kSerializationVersion = 1;

struct SplitChoice {
    bool valid = false;
    double gain = 0.0;
    int feature = -1;
    bool membership = false;
    double threshold = 0.0;
    uint64_t leftMask = 0;
};

// Weighted Gini as n - sum(c^2)/n; differences of these across a split give
// the impurity decrease without a separate parent term.
double weightedGini(int64_t n, const std::vector<int64_t>& counts) {
    int64_t sumSquares = 0;
    for (int64_t c : counts) sumSquares += c * c;
    return static_cast<double>(n) - static_cast<double>(sumSquares) / static_cast<double>(n);
}

double sse(double sum, double sumSq, int n) {
    return sumSq - sum * sum / static_cast<double>(n);
}

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& data, std::span<const double> regressionTargets,
                std::span<const int> classTargets, int classCount, int featuresPerSplit,
                int minNodeSize, Rng& rng)
        : data_(data), regression_(regressionTargets), classes_(classTargets),
          classCount_(classCount), featuresPerSplit_(featuresPerSplit),
          minNodeSize_(minNodeSize), rng_(rng) {}

    std::vector<TreeNode> build(std::span<const int> rootRows) {
        nodes_.clear();
        nodes_.emplace_back();
        std::vector<std::pair<int, std::vector<int>>> stack;
        stack.push_back({0, std::vector<int>(rootRows.begin(), rootRows.end())});
        while (!stack.empty()) {
            auto [nodeIndex, rows] = std::move(stack.back());
            stack.pop_back();
            if (static_cast<int>(rows.size()) < minNodeSize_ || isPure(rows)) {
                makeLeaf(nodeIndex, rows);
                continue;
            }
            SplitChoice split = bestSplit(rows);
            if (!split.valid) {
                makeLeaf(nodeIndex, rows);
                continue;
            }
            std::vector<int> leftRows;
            std::vector<int> rightRows;
            for (int r : rows) {
                (goesLeft(split, data_.at(r, split.feature)) ? leftRows : rightRows).push_back(r);
            }
            TreeNode& node = nodes_[static_cast<size_t>(nodeIndex)];
            node.feature = split.feature;
            node.membership = split.membership;
            node.threshold = split.threshold;
            node.leftMask = split.leftMask;
            node.left = static_cast<int>(nodes_.size());
            node.right = node.left + 1;
            nodes_.emplace_back();
            nodes_.emplace_back();
            int leftIndex = nodes_[static_cast<size_t>(nodeIndex)].left;
            int rightIndex = nodes_[static_cast<size_t>(nodeIndex)].right;
            stack.push_back({rightIndex, std::move(rightRows)});
            stack.push_back({leftIndex, std::move(leftRows)});
        }
        return std::move(nodes_);
    }

private:
    bool regressionTask() const { return classes_.empty(); }

    static bool goesLeft(const SplitChoice& split, double value) {
        if (split.membership) {
            long long c = std::llround(value);
            return c >= 0 && c < 64 && ((split.leftMask >> c) & 1ULL) != 0;
        }
        return value <= split.threshold;
    }

    bool isPure(const std::vector<int>& rows) const {
        if (regressionTask()) {
            double first = regression_[static_cast<size_t>(rows[0])];
            for (int r : rows)
                if (regression_[static_cast<size_t>(r)] != first) return false;
            return true;
        }
        int first = classes_[static_cast<size_t>(rows[0])];
        for (int r : rows)
            if (classes_[static_cast<size_t>(r)] != first) return false;
        return true;
    }

    void makeLeaf(int nodeIndex, const std::vector<int>& rows) {
        TreeNode& node = nodes_[static_cast<size_t>(nodeIndex)];
        node.feature = -1;
        if (regressionTask()) {
            double sum = 0.0;
            for (int r : rows) sum += regression_[static_cast<size_t>(r)];
            node.value = sum / static_cast<double>(rows.size());
        } else {
            node.classCounts.assign(static_cast<size_t>(classCount_), 0);
            for (int r : rows) node.classCounts[static_cast<size_t>(classes_[static_cast<size_t>(r)])] += 1;
        }
    }

    SplitChoice bestSplit(const std::vector<int>& rows) {
        std::vector<int> candidates =
            rng_.sampleWithoutReplacement(data_.featureCount(), featuresPerSplit_);
        std::sort(candidates.begin(), candidates.end());
        SplitChoice best;
        for (int f : candidates) {
            if (data_.info(f).kind == FeatureKind::Categorical) {
                scanCategorical(rows, f, best);
            } else {
                scanNumeric(rows, f, best);
            }
        }
        return best;
    }

    void scanNumeric(const std::vector<int>& rows, int feature, SplitChoice& best) {
        std::vector<std::pair<double, int>> order;
        order.reserve(rows.size());
        for (int r : rows) order.push_back({data_.at(r, feature), r});
        std::stable_sort(order.begin(), order.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        int n = static_cast<int>(order.size());
        if (regressionTask()) {
            double totalSum = 0.0;
            double totalSumSq = 0.0;
            for (const auto& [v, r] : order) {
                double y = regression_[static_cast<size_t>(r)];
                totalSum += y;
                totalSumSq += y * y;
            }
            double parent = sse(totalSum, totalSumSq, n);
            double leftSum = 0.0;
            double leftSumSq = 0.0;
            for (int i = 0; i < n - 1; ++i) {
                double y = regression_[static_cast<size_t>(order[static_cast<size_t>(i)].second)];
                leftSum += y;
                leftSumSq += y * y;
                if (order[static_cast<size_t>(i)].first == order[static_cast<size_t>(i + 1)].first)
                    continue;
                int leftN = i + 1;
                double gain = parent - sse(leftSum, leftSumSq, leftN) -
                              sse(totalSum - leftSum, totalSumSq - leftSumSq, n - leftN);
                if (gain > best.gain) {
                    best = {true, gain, feature, false,
                            (order[static_cast<size_t>(i)].first +
                             order[static_cast<size_t>(i + 1)].first) / 2.0,
                            0};
                }
            }
        } else {
            std::vector<int64_t> totalCounts(static_cast<size_t>(classCount_), 0);
            for (const auto& [v, r] : order)
                totalCounts[static_cast<size_t>(classes_[static_cast<size_t>(r)])] += 1;
            double parent = weightedGini(n, totalCounts);
            std::vector<int64_t> leftCounts(static_cast<size_t>(classCount_), 0);
            std::vector<int64_t> rightCounts = totalCounts;
            for (int i = 0; i < n - 1; ++i) {
                size_t cls = static_cast<size_t>(
                    classes_[static_cast<size_t>(order[static_cast<size_t>(i)].second)]);
                leftCounts[cls] += 1;
                rightCounts[cls] -= 1;
                if (order[static_cast<size_t>(i)].first == order[static_cast<size_t>(i + 1)].first)
                    continue;
                int leftN = i + 1;
                double gain = parent - weightedGini(leftN, leftCounts) -
                              weightedGini(n - leftN, rightCounts);
                if (gain > best.gain) {
                    best = {true, gain, feature, false,
                            (order[static_cast<size_t>(i)].first +
                             order[static_cast<size_t>(i + 1)].first) / 2.0,
                            0};
                }
            }
        }
    }

    // Candidate subsets come from a prefix scan over categories ordered by
    // target mean (regression) or class-0 proportion (classification); exact
    // for binary targets, avoids the 2^c subset enumeration.
    void scanCategorical(const std::vector<int>& rows, int feature, SplitChoice& best) {
        int categories = data_.info(feature).categoryCount;
        std::vector<int64_t> counts(static_cast<size_t>(categories), 0);
        std::vector<double> sums(static_cast<size_t>(categories), 0.0);
        std::vector<double> sumSqs(static_cast<size_t>(categories), 0.0);
        std::vector<std::vector<int64_t>> classCounts;
        if (!regressionTask())
            classCounts.assign(static_cast<size_t>(categories),
                               std::vector<int64_t>(static_cast<size_t>(classCount_), 0));
        for (int r : rows) {
            auto c = static_cast<size_t>(std::llround(data_.at(r, feature)));
            counts[c] += 1;
            if (regressionTask()) {
                double y = regression_[static_cast<size_t>(r)];
                sums[c] += y;
                sumSqs[c] += y * y;
            } else {
                classCounts[c][static_cast<size_t>(classes_[static_cast<size_t>(r)])] += 1;
            }
        }
        std::vector<std::pair<double, int>> order;  // (sort key, category)
        for (int c = 0; c < categories; ++c) {
            if (counts[static_cast<size_t>(c)] == 0) continue;
            double key;
            if (regressionTask()) {
                key = sums[static_cast<size_t>(c)] /
                      static_cast<double>(counts[static_cast<size_t>(c)]);
            } else {
                key = static_cast<double>(classCounts[static_cast<size_t>(c)][0]) /
                      static_cast<double>(counts[static_cast<size_t>(c)]);
            }
            order.push_back({key, c});
        }
        if (order.size() < 2) return;
        std::sort(order.begin(), order.end());
        int n = static_cast<int>(rows.size());

        if (regressionTask()) {
            double totalSum = 0.0;
            double totalSumSq = 0.0;
            for (const auto& [key, c] : order) {
                totalSum += sums[static_cast<size_t>(c)];
                totalSumSq += sumSqs[static_cast<size_t>(c)];
            }
            double parent = sse(totalSum, totalSumSq, n);
            double leftSum = 0.0;
            double leftSumSq = 0.0;
            int64_t leftN = 0;
            uint64_t mask = 0;
            for (size_t i = 0; i + 1 < order.size(); ++i) {
                int c = order[i].second;
                leftSum += sums[static_cast<size_t>(c)];
                leftSumSq += sumSqs[static_cast<size_t>(c)];
                leftN += counts[static_cast<size_t>(c)];
                mask |= 1ULL << c;
                double gain = parent - sse(leftSum, leftSumSq, static_cast<int>(leftN)) -
                              sse(totalSum - leftSum, totalSumSq - leftSumSq,
                                  n - static_cast<int>(leftN));
                if (gain > best.gain) best = {true, gain, feature, true, 0.0, mask};
            }
        } else {
            std::vector<int64_t> totalCounts(static_cast<size_t>(classCount_), 0);
            for (const auto& [key, c] : order)
                for (int k = 0; k < classCount_; ++k)
                    totalCounts[static_cast<size_t>(k)] +=
                        classCounts[static_cast<size_t>(c)][static_cast<size_t>(k)];
            double parent = weightedGini(n, totalCounts);
            std::vector<int64_t> leftCounts(static_cast<size_t>(classCount_), 0);
            std::vector<int64_t> rightCounts = totalCounts;
            int64_t leftN = 0;
            uint64_t mask = 0;
            for (size_t i = 0; i + 1 < order.size(); ++i) {
                int c = order[i].second;
                for (int k = 0; k < classCount_; ++k) {
                    int64_t cnt = classCounts[static_cast<size_t>(c)][static_cast<size_t>(k)];
                    leftCounts[static_cast<size_t>(k)] += cnt;
                    rightCounts[static_cast<size_t>(k)] -= cnt;
                }
                leftN += counts[static_cast<size_t>(c)];
                mask |= 1ULL << c;
                double gain = parent - weightedGini(leftN, leftCounts) -
                              weightedGini(n - leftN, rightCounts);
                if (gain > best.gain) best = {true, gain, feature, true, 0.0, mask};
            }
        }
    }

    const FeatureMatrix& data_;
    std::span<const double> regression_;
    std::span<const int> classes_;
    int classCount_;
    int featuresPerSplit_;
    int minNodeSize_;
    Rng& rng_;
    std::vector<TreeNode> nodes_;
};

void checkArity(int featureCount, size_t xSize) {
    if (xSize != static_cast<size_t>(featureCount))
        throw DataError("feature vector arity does not match the forest");
}

}  // namespace

FeatureMatrix::FeatureMatrix(int rows, std::vector<FeatureInfo> features)
    : rows_(rows), features_(std::move(features)) {
    if (rows < 0) throw ConfigError("feature matrix row count must be non-negative");
    for (const FeatureInfo& info : features_) {
        if (info.kind == FeatureKind::Categorical) {
            if (info.categoryCount < 1 || info.categoryCount > 64)
                throw ConfigError("categorical features support 1..64 categories");
        } else if (info.categoryCount != 0) {
            throw ConfigError("numeric features must not declare categories");
        }
    }
    columns_.assign(features_.size(), std::vector<double>(static_cast<size_t>(rows), 0.0));
}

std::vector<double> FeatureMatrix::rowValues(int row) const {
    std::vector<double> out(features_.size());
    for (size_t f = 0; f < features_.size(); ++f) out[f] = columns_[f][static_cast<size_t>(row)];
    return out;
}

int DecisionTree::leafIndex(std::span<const double> x) const {
    int i = 0;
    while (nodes_[static_cast<size_t>(i)].feature >= 0) {
        const TreeNode& node = nodes_[static_cast<size_t>(i)];
        double v = x[static_cast<size_t>(node.feature)];
        bool left;
        if (node.membership) {
            long long c = std::llround(v);
            left = c >= 0 && c < 64 && ((node.leftMask >> c) & 1ULL) != 0;
        } else {
            left = v <= node.threshold;
        }
        i = left ? node.left : node.right;
    }
    return i;
}

double DecisionTree::predictValue(std::span<const double> x) const {
    if (task_ != ForestTask::Regression) throw DataError("value prediction on a classification tree");
    return nodes_[static_cast<size_t>(leafIndex(x))].value;
}

int DecisionTree::predictClass(std::span<const double> x) const {
    if (task_ != ForestTask::Classification) throw DataError("class prediction on a regression tree");
    const std::vector<int64_t>& counts = nodes_[static_cast<size_t>(leafIndex(x))].classCounts;
    int best = 0;
    for (int c = 1; c < static_cast<int>(counts.size()); ++c)
        if (counts[static_cast<size_t>(c)] > counts[static_cast<size_t>(best)]) best = c;
    return best;
}

DecisionTree growTree(const FeatureMatrix& data, std::span<const double> regressionTargets,
                      std::span<const int> classTargets, int classCount,
                      std::span<const int> rows, int featuresPerSplit, int minNodeSize,
                      uint64_t seed) {
    if (rows.empty()) throw DataError("cannot grow a tree on an empty sample");
    if (featuresPerSplit < 1 || featuresPerSplit > data.featureCount())
        throw ConfigError("features per split must lie in [1, feature count]");
    if (minNodeSize < 1) throw ConfigError("minimum node size must be at least 1");
    bool classification = !classTargets.empty();
    if (classification && classCount < 2)
        throw ConfigError("classification needs at least two classes");
    Rng rng(seed);
    TreeBuilder builder(data, regressionTargets, classTargets, classCount, featuresPerSplit,
                        minNodeSize, rng);
    return DecisionTree(classification ? ForestTask::Classification : ForestTask::Regression,
                        builder.build(rows));
}

RandomForest fitForestImpl(const FeatureMatrix& data, std::span<const double> regressionTargets,
                           std::span<const int> classTargets, int classCount, ForestTask task,
                           const ForestParams& params, uint64_t seed) {
    int n = data.rowCount();
    if (n < 1) throw DataError("cannot fit a forest on an empty sample");
    size_t targetCount =
        task == ForestTask::Regression ? regressionTargets.size() : classTargets.size();
    if (targetCount != static_cast<size_t>(n)) throw DataError("target count does not match rows");
    if (params.treeCount < 1) throw ConfigError("forest needs at least one tree");
    if (params.minNodeSize < 1) throw ConfigError("minimum node size must be at least 1");
    int m = params.featuresPerSplit;
    if (m < 1) throw ConfigError("features per split must be positive");
    if (params.bootstrap && m >= data.featureCount())
        throw ConfigError("features per split must be below the feature count");
    if (!params.bootstrap && m > data.featureCount())
        throw ConfigError("features per split exceeds the feature count");
    if (task == ForestTask::Classification) {
        if (classCount < 2) throw ConfigError("classification needs at least two classes");
        for (int label : classTargets)
            if (label < 0 || label >= classCount) throw DataError("class label out of range");
    }

    RandomForest forest;
    forest.task_ = task;
    forest.params_ = params;
    forest.seed_ = seed;
    forest.classCount_ = task == ForestTask::Classification ? classCount : 0;
    forest.features_ = data.features();
    forest.trees_.resize(static_cast<size_t>(params.treeCount));
    forest.oobRows_.resize(static_cast<size_t>(params.treeCount));

    parallelFor(static_cast<size_t>(params.treeCount), [&](size_t k) {
        std::vector<int> rows;
        std::vector<int> oob;
        if (params.bootstrap) {
            Rng rng(deriveSeed(seed, "bootstrap", k));
            std::vector<uint8_t> drawn(static_cast<size_t>(n), 0);
            rows.reserve(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) {
                int r = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
                rows.push_back(r);
                drawn[static_cast<size_t>(r)] = 1;
            }
            for (int r = 0; r < n; ++r)
                if (!drawn[static_cast<size_t>(r)]) oob.push_back(r);
        } else {
            rows.resize(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) rows[static_cast<size_t>(i)] = i;
        }
        forest.trees_[k] = growTree(data, regressionTargets, classTargets, classCount, rows,
                                    params.featuresPerSplit, params.minNodeSize,
                                    deriveSeed(seed, "grow", k));
        forest.oobRows_[k] = std::move(oob);
    });
    return forest;
}

RandomForest fitRegressionForest(const FeatureMatrix& data, std::span<const double> targets,
                                 const ForestParams& params, uint64_t seed) {
    return fitForestImpl(data, targets, {}, 0, ForestTask::Regression, params, seed);
}

RandomForest fitClassificationForest(const FeatureMatrix& data, std::span<const int> targets,
                                     int classCount, const ForestParams& params, uint64_t seed) {
    return fitForestImpl(data, {}, targets, classCount, ForestTask::Classification, params, seed);
}

double RandomForest::predict(std::span<const double> x) const {
    checkArity(featureCount(), x.size());
    if (task_ != ForestTask::Regression) throw DataError("value prediction on a classification forest");
    double sum = 0.0;
    for (const DecisionTree& tree : trees_) sum += tree.predictValue(x);
    return sum / static_cast<double>(trees_.size());
}

int RandomForest::predictClass(std::span<const double> x) const {
    checkArity(featureCount(), x.size());
    if (task_ != ForestTask::Classification) throw DataError("class prediction on a regression forest");
    std::vector<int> votes(static_cast<size_t>(classCount_), 0);
    for (const DecisionTree& tree : trees_) votes[static_cast<size_t>(tree.predictClass(x))] += 1;
    int best = 0;
    for (int c = 1; c < classCount_; ++c)
        if (votes[static_cast<size_t>(c)] > votes[static_cast<size_t>(best)]) best = c;
    return best;
}

OobError oobError(const RandomForest& forest, const FeatureMatrix& data,
                  std::span<const double> regressionTargets, std::span<const int> classTargets) {
    int n = data.rowCount();
    bool regression = forest.task() == ForestTask::Regression;
    size_t targetCount = regression ? regressionTargets.size() : classTargets.size();
    if (targetCount != static_cast<size_t>(n)) throw DataError("target count does not match rows");

    std::vector<double> sums(static_cast<size_t>(n), 0.0);
    std::vector<int> hits(static_cast<size_t>(n), 0);
    std::vector<std::vector<int>> votes;
    if (!regression)
        votes.assign(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(forest.classCount()), 0));

    const auto& trees = forest.trees();
    const auto& oobRows = forest.oobRows();
    for (size_t t = 0; t < trees.size(); ++t) {
        for (int r : oobRows[t]) {
            std::vector<double> x = data.rowValues(r);
            if (regression) {
                sums[static_cast<size_t>(r)] += trees[t].predictValue(x);
            } else {
                votes[static_cast<size_t>(r)][static_cast<size_t>(trees[t].predictClass(x))] += 1;
            }
            hits[static_cast<size_t>(r)] += 1;
        }
    }

    OobError result;
    double errorSum = 0.0;
    for (int r = 0; r < n; ++r) {
        if (hits[static_cast<size_t>(r)] == 0) {
            result.rowsSkipped += 1;
            continue;
        }
        result.rowsEvaluated += 1;
        if (regression) {
            double prediction = sums[static_cast<size_t>(r)] / static_cast<double>(hits[static_cast<size_t>(r)]);
            double d = prediction - regressionTargets[static_cast<size_t>(r)];
            errorSum += d * d;
        } else {
            const std::vector<int>& rowVotes = votes[static_cast<size_t>(r)];
            int best = 0;
            for (int c = 1; c < forest.classCount(); ++c)
                if (rowVotes[static_cast<size_t>(c)] > rowVotes[static_cast<size_t>(best)]) best = c;
            if (best != classTargets[static_cast<size_t>(r)]) errorSum += 1.0;
        }
    }
    if (result.rowsEvaluated == 0) throw DataError("no row has an out-of-bag tree");
    result.error = errorSum / static_cast<double>(result.rowsEvaluated);
    return result;
}

ImportanceReport variableImportance(const RandomForest& forest, const FeatureMatrix& data,
                                    std::span<const double> regressionTargets,
                                    std::span<const int> classTargets, uint64_t seed) {
    bool regression = forest.task() == ForestTask::Regression;
    size_t targetCount = regression ? regressionTargets.size() : classTargets.size();
    if (targetCount != static_cast<size_t>(data.rowCount()))
        throw DataError("target count does not match rows");
    int featureCount = forest.featureCount();
    size_t treeCount = forest.trees().size();

    // err(tree, rows with feature f read through permutation); permutation ==
    // identity gives the baseline.
    auto treeError = [&](const DecisionTree& tree, const std::vector<int>& rows, int feature,
                         const std::vector<int>& permuted) {
        double errorSum = 0.0;
        std::vector<double> x;
        for (size_t i = 0; i < rows.size(); ++i) {
            x = data.rowValues(rows[i]);
            if (feature >= 0) x[static_cast<size_t>(feature)] = data.at(permuted[i], feature);
            if (regression) {
                double d = tree.predictValue(x) - regressionTargets[static_cast<size_t>(rows[i])];
                errorSum += d * d;
            } else if (tree.predictClass(x) != classTargets[static_cast<size_t>(rows[i])]) {
                errorSum += 1.0;
            }
        }
        return errorSum / static_cast<double>(rows.size());
    };

    std::vector<std::vector<double>> perTree(treeCount);
    std::vector<uint8_t> used(treeCount, 0);
    parallelFor(treeCount, [&](size_t t) {
        const std::vector<int>& oob = forest.oobRows()[t];
        if (oob.empty()) return;
        used[t] = 1;
        double base = treeError(forest.trees()[t], oob, -1, oob);
        perTree[t].assign(static_cast<size_t>(featureCount), 0.0);
        for (int f = 0; f < featureCount; ++f) {
            Rng rng(deriveSeed(seed, "permute", t * static_cast<size_t>(featureCount) +
                                                    static_cast<size_t>(f)));
            std::vector<int> permuted = oob;
            rng.shuffle(permuted);
            perTree[t][static_cast<size_t>(f)] =
                treeError(forest.trees()[t], oob, f, permuted) - base;
        }
    });

    ImportanceReport report;
    report.importance.assign(static_cast<size_t>(featureCount), 0.0);
    int treesUsed = 0;
    for (size_t t = 0; t < treeCount; ++t) {
        if (!used[t]) continue;
        ++treesUsed;
        for (int f = 0; f < featureCount; ++f)
            report.importance[static_cast<size_t>(f)] += perTree[t][static_cast<size_t>(f)];
    }
    for (double& v : report.importance) v /= static_cast<double>(std::max(1, treesUsed));
    report.clippedImportance = report.importance;
    for (double& v : report.clippedImportance) v = std::max(0.0, v);

    std::vector<int> order(static_cast<size_t>(featureCount));
    for (int f = 0; f < featureCount; ++f) order[static_cast<size_t>(f)] = f;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double ia = report.importance[static_cast<size_t>(a)];
        double ib = report.importance[static_cast<size_t>(b)];
        if (ia != ib) return ia > ib;
        return a < b;
    });
    report.rank.assign(static_cast<size_t>(featureCount), 0);
    for (int position = 0; position < featureCount; ++position)
        report.rank[static_cast<size_t>(order[static_cast<size_t>(position)])] = position + 1;
    return report;
}

ProximityMatrix proximity(const RandomForest& forest, const FeatureMatrix& data) {
    int n = data.rowCount();
    ProximityMatrix matrix(n, static_cast<int>(forest.trees().size()));
    std::vector<int> leaves(static_cast<size_t>(n));
    for (const DecisionTree& tree : forest.trees()) {
        parallelFor(static_cast<size_t>(n), [&](size_t r) {
            leaves[r] = tree.leafIndex(data.rowValues(static_cast<int>(r)));
        });
        std::vector<std::pair<int, int>> byLeaf;  // (leaf, row)
        byLeaf.reserve(static_cast<size_t>(n));
        for (int r = 0; r < n; ++r) byLeaf.push_back({leaves[static_cast<size_t>(r)], r});
        std::sort(byLeaf.begin(), byLeaf.end());
        size_t i = 0;
        while (i < byLeaf.size()) {
            size_t j = i;
            while (j < byLeaf.size() && byLeaf[j].first == byLeaf[i].first) ++j;
            for (size_t a = i; a < j; ++a)
                for (size_t b = a + 1; b < j; ++b) {
                    matrix.add(byLeaf[a].second, byLeaf[b].second, 1);
                    matrix.add(byLeaf[b].second, byLeaf[a].second, 1);
                }
            i = j;
        }
    }
    for (int r = 0; r < n; ++r)
        matrix.add(r, r, static_cast<int32_t>(forest.trees().size()));
    return matrix;
}

nlohmann::json forestParamsToJson(const ForestParams& params) {
    return nlohmann::json{{"tree_count", params.treeCount},
                          {"min_node_size", params.minNodeSize},
                          {"features_per_split", params.featuresPerSplit},
                          {"bootstrap", params.bootstrap}};
}

ForestParams forestParamsFromJson(const nlohmann::json& doc) {
    try {
        if (!doc.is_object())
            throw ConfigError("forest parameters must be a JSON object");
        ForestParams params;
        for (const auto& [key, value] : doc.items()) {
            if (key == "tree_count") {
                params.treeCount = value.get<int>();
            } else if (key == "min_node_size") {
                params.minNodeSize = value.get<int>();
            } else if (key == "features_per_split") {
                params.featuresPerSplit = value.get<int>();
            } else if (key == "bootstrap") {
                params.bootstrap = value.get<bool>();
            } else {
                throw ConfigError("unknown forest parameter: " + key);
            }
        }
        return params;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad forest parameters: ") + e.what());
    }
}

nlohmann::json RandomForest::toJson() const {
    nlohmann::json features = nlohmann::json::array();
    for (const FeatureInfo& info : features_) {
        if (info.kind == FeatureKind::Categorical) {
            features.push_back({{"kind", "categorical"}, {"categories", info.categoryCount}});
        } else {
            features.push_back({{"kind", "numeric"}});
        }
    }
    nlohmann::json trees = nlohmann::json::array();
    for (const DecisionTree& tree : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const TreeNode& node : tree.nodes()) {
            nlohmann::json j;
            if (node.feature < 0) {
                if (task_ == ForestTask::Regression) {
                    j["v"] = node.value;
                } else {
                    j["c"] = node.classCounts;
                }
            } else {
                j["f"] = node.feature;
                j["l"] = node.left;
                j["r"] = node.right;
                if (node.membership) {
                    j["m"] = node.leftMask;
                } else {
                    j["t"] = node.threshold;
                }
            }
            nodes.push_back(std::move(j));
        }
        trees.push_back(std::move(nodes));
    }
    return nlohmann::json{{"version", kSerializationVersion},
                          {"kind", "random-forest"},
                          {"task", task_ == ForestTask::Regression ? "regression" : "classification"},
                          {"seed", seed_},
                          {"class_count", classCount_},
                          {"params", forestParamsToJson(params_)},
                          {"features", features},
                          {"oob", oobRows_},
                          {"trees", trees}};
}

RandomForest RandomForest::fromJson(const nlohmann::json& doc) {
    try {
        if (!doc.is_object() || doc.value("kind", "") != "random-forest")
            throw ConfigError("not a serialized forest");
        if (doc.at("version").get<int>() != kSerializationVersion)
            throw ConfigError("unsupported forest version");
        RandomForest forest;
        std::string task = doc.at("task").get<std::string>();
        if (task == "regression") {
            forest.task_ = ForestTask::Regression;
        } else if (task == "classification") {
            forest.task_ = ForestTask::Classification;
        } else {
            throw ConfigError("unknown forest task: " + task);
        }
        forest.seed_ = doc.at("seed").get<uint64_t>();
        forest.classCount_ = doc.at("class_count").get<int>();
        forest.params_ = forestParamsFromJson(doc.at("params"));
        for (const nlohmann::json& f : doc.at("features")) {
            FeatureInfo info;
            if (f.at("kind").get<std::string>() == "categorical") {
                info.kind = FeatureKind::Categorical;
                info.categoryCount = f.at("categories").get<int>();
            }
            forest.features_.push_back(info);
        }
        forest.oobRows_ = doc.at("oob").get<std::vector<std::vector<int>>>();
        for (const nlohmann::json& nodesJson : doc.at("trees")) {
            std::vector<TreeNode> nodes;
            nodes.reserve(nodesJson.size());
            for (const nlohmann::json& j : nodesJson) {
                TreeNode node;
                if (j.contains("f")) {
                    node.feature = j.at("f").get<int>();
                    node.left = j.at("l").get<int>();
                    node.right = j.at("r").get<int>();
                    if (j.contains("m")) {
                        node.membership = true;
                        node.leftMask = j.at("m").get<uint64_t>();
                    } else {
                        node.threshold = j.at("t").get<double>();
                    }
                    if (node.left < 0 || node.right < 0 ||
                        node.left >= static_cast<int>(nodesJson.size()) ||
                        node.right >= static_cast<int>(nodesJson.size()))
                        throw ConfigError("forest node index out of range");
                } else if (j.contains("v")) {
                    node.value = j.at("v").get<double>();
                } else {
                    node.classCounts = j.at("c").get<std::vector<int64_t>>();
                }
                nodes.push_back(std::move(node));
            }
            forest.trees_.push_back(DecisionTree(forest.task_, std::move(nodes)));
        }
        return forest;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed forest document: ") + e.what());
    }
}

}  // namespace mdi
