#ifndef MDIMPUTE_STATISTICS_H
#define MDIMPUTE_STATISTICS_H

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "Matrix.h"

namespace mdi {

double mean(std::span<const double> values);
// Sample variance (n-1 denominator); 0 for fewer than two values.
double variance(std::span<const double> values);
double standardDeviation(std::span<const double> values);

// Linear interpolation between order statistics at h = (n-1)p; quartiles of
// 1..100 come out as 25.75 / 50.5 / 75.25.
double quantile(std::span<const double> values, double p);

double meanSquaredError(std::span<const double> targets, std::span<const double> predictions);

// Empty when either side has zero variance.
std::optional<double> pearsonCorrelation(std::span<const double> a, std::span<const double> b);

// Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b| over the pooled
// support.
double ksStatistic(std::span<const double> a, std::span<const double> b);

// k matched quantiles at probabilities (i-0.5)/k, i = 1..k.
std::vector<std::pair<double, double>> qqPoints(std::span<const double> a,
                                                std::span<const double> b, int k);

// Mean over records of |comparison_i - target_i| / sd(target). Empty when the
// target column is constant.
std::optional<double> pairedMahalanobis(std::span<const double> target,
                                        std::span<const double> comparison);
// Full-covariance form: mean of sqrt(d_i' Sigma_T^-1 d_i) over paired row
// differences d_i. Empty when the target covariance is singular.
std::optional<double> pairedMahalanobis(const Matrix& target, const Matrix& comparison);

struct ConfusionMatrix {
    int64_t tn = 0;
    int64_t fp = 0;
    int64_t fn = 0;
    int64_t tp = 0;

    int64_t total() const { return tn + fp + fn + tp; }
    // Fraction of actual negatives / positives that were misclassified.
    double actualNegativeErrorRate() const;
    double actualPositiveErrorRate() const;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual);

struct ClassificationMetrics {
    double accuracy = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double precision = 0.0;
    double fMeasure = 0.0;
};

ClassificationMetrics metricsOf(const ConfusionMatrix& cm);

// Descriptive statistics of the comparison column plus its deviation from the
// target column. Undefined measures stay empty rather than being fabricated.
struct StatImpactReport {
    double mean = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double standardDeviation = 0.0;
    double variance = 0.0;
    double mse = 0.0;
    std::optional<double> mahalanobis;
    std::optional<double> correlationPercent;
    double maxPercentageDeviation = 0.0;
    // True when the max-deviation denominator fell back to 1 (target < 1).
    bool maxDeviationGuard = false;
};

StatImpactReport statImpact(std::span<const double> target, std::span<const double> comparison);

}  // namespace mdi

#endif
