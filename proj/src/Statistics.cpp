#include "Statistics.h"

#include <algorithm>
#include <cmath>

#include "Exceptions.h"

namespace mdi {

namespace {

std::vector<double> sorted(std::span<const double> values) {
    std::vector<double> out(values.begin(), values.end());
    std::sort(out.begin(), out.end());
    return out;
}

double quantileOfSorted(const std::vector<double>& x, double p) {
    size_t n = x.size();
    if (n == 1) return x[0];
    double h = static_cast<double>(n - 1) * p;
    size_t lo = static_cast<size_t>(std::floor(h));
    if (lo + 1 >= n) return x[n - 1];
    double frac = h - static_cast<double>(lo);
    return x[lo] + frac * (x[lo + 1] - x[lo]);
}

}  // namespace

double mean(std::span<const double> values) {
    if (values.empty()) throw DataError("mean of empty sample");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
    if (values.empty()) throw DataError("variance of empty sample");
    size_t n = values.size();
    if (n < 2) return 0.0;
    double m = mean(values);
    double sum = 0.0;
    for (double v : values) sum += (v - m) * (v - m);
    return sum / static_cast<double>(n - 1);
}

double standardDeviation(std::span<const double> values) { return std::sqrt(variance(values)); }

double quantile(std::span<const double> values, double p) {
    if (values.empty()) throw DataError("quantile of empty sample");
    if (p < 0.0 || p > 1.0) throw ConfigError("quantile probability must lie in [0,1]");
    return quantileOfSorted(sorted(values), p);
}

double meanSquaredError(std::span<const double> targets, std::span<const double> predictions) {
    if (targets.size() != predictions.size()) throw DataError("MSE inputs differ in length");
    if (targets.empty()) throw DataError("MSE of empty sample");
    double sum = 0.0;
    for (size_t i = 0; i < targets.size(); ++i) {
        double d = targets[i] - predictions[i];
        sum += d * d;
    }
    return sum / static_cast<double>(targets.size());
}

std::optional<double> pearsonCorrelation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("correlation inputs differ in length");
    if (a.empty()) throw DataError("correlation of empty sample");
    double meanA = mean(a);
    double meanB = mean(b);
    double cov = 0.0;
    double varA = 0.0;
    double varB = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - meanA;
        double db = b[i] - meanB;
        cov += da * db;
        varA += da * da;
        varB += db * db;
    }
    if (varA <= 0.0 || varB <= 0.0) return std::nullopt;
    return cov / std::sqrt(varA * varB);
}

double ksStatistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DataError("KS statistic of empty sample");
    std::vector<double> sa = sorted(a);
    std::vector<double> sb = sorted(b);
    size_t i = 0;
    size_t j = 0;
    double d = 0.0;
    while (i < sa.size() || j < sb.size()) {
        double x;
        if (i < sa.size() && (j >= sb.size() || sa[i] <= sb[j])) {
            x = sa[i];
        } else {
            x = sb[j];
        }
        while (i < sa.size() && sa[i] == x) ++i;
        while (j < sb.size() && sb[j] == x) ++j;
        double fa = static_cast<double>(i) / static_cast<double>(sa.size());
        double fb = static_cast<double>(j) / static_cast<double>(sb.size());
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

std::vector<std::pair<double, double>> qqPoints(std::span<const double> a,
                                                std::span<const double> b, int k) {
    if (k < 2) throw ConfigError("QQ grid needs k >= 2");
    if (a.empty() || b.empty()) throw DataError("QQ points of empty sample");
    std::vector<double> sa = sorted(a);
    std::vector<double> sb = sorted(b);
    std::vector<std::pair<double, double>> points;
    points.reserve(static_cast<size_t>(k));
    for (int i = 1; i <= k; ++i) {
        double p = (static_cast<double>(i) - 0.5) / static_cast<double>(k);
        points.push_back({quantileOfSorted(sa, p), quantileOfSorted(sb, p)});
    }
    return points;
}

std::optional<double> pairedMahalanobis(std::span<const double> target,
                                        std::span<const double> comparison) {
    if (target.size() != comparison.size()) throw DataError("Mahalanobis inputs differ in length");
    if (target.empty()) throw DataError("Mahalanobis of empty sample");
    double sd = standardDeviation(target);
    if (sd <= 0.0) return std::nullopt;
    double sum = 0.0;
    for (size_t i = 0; i < target.size(); ++i) sum += std::abs(comparison[i] - target[i]) / sd;
    return sum / static_cast<double>(target.size());
}

std::optional<double> pairedMahalanobis(const Matrix& target, const Matrix& comparison) {
    if (target.rows() != comparison.rows() || target.cols() != comparison.cols())
        throw DataError("Mahalanobis inputs differ in shape");
    if (target.rows() == 0) throw DataError("Mahalanobis of empty sample");
    int n = target.rows();
    int d = target.cols();
    std::vector<double> mu(static_cast<size_t>(d), 0.0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) mu[static_cast<size_t>(c)] += target.at(r, c);
    for (double& v : mu) v /= static_cast<double>(n);
    if (n < 2) return std::nullopt;
    Matrix sigma(d, d);
    for (int r = 0; r < n; ++r) {
        for (int i = 0; i < d; ++i) {
            double di = target.at(r, i) - mu[static_cast<size_t>(i)];
            for (int j = i; j < d; ++j)
                sigma.at(i, j) += di * (target.at(r, j) - mu[static_cast<size_t>(j)]);
        }
    }
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            sigma.at(i, j) /= static_cast<double>(n - 1);
            sigma.at(j, i) = sigma.at(i, j);
        }
    double sum = 0.0;
    std::vector<double> diff(static_cast<size_t>(d));
    std::vector<double> solved;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < d; ++c)
            diff[static_cast<size_t>(c)] = comparison.at(r, c) - target.at(r, c);
        if (!choleskySolve(sigma, diff, solved)) return std::nullopt;
        double quad = 0.0;
        for (int c = 0; c < d; ++c) quad += diff[static_cast<size_t>(c)] * solved[static_cast<size_t>(c)];
        sum += std::sqrt(std::max(0.0, quad));
    }
    return sum / static_cast<double>(n);
}

double ConfusionMatrix::actualNegativeErrorRate() const {
    int64_t negatives = tn + fp;
    return negatives == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(negatives);
}

double ConfusionMatrix::actualPositiveErrorRate() const {
    int64_t positives = tp + fn;
    return positives == 0 ? 0.0 : static_cast<double>(fn) / static_cast<double>(positives);
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.size() != actual.size()) throw DataError("confusion inputs differ in length");
    ConfusionMatrix cm;
    for (size_t i = 0; i < predicted.size(); ++i) {
        int p = predicted[i];
        int a = actual[i];
        if ((p != 0 && p != 1) || (a != 0 && a != 1))
            throw DataError("confusion labels must be 0 or 1");
        if (a == 0) {
            (p == 0 ? cm.tn : cm.fp) += 1;
        } else {
            (p == 1 ? cm.tp : cm.fn) += 1;
        }
    }
    return cm;
}

ClassificationMetrics metricsOf(const ConfusionMatrix& cm) {
    if (cm.total() <= 0) throw DataError("metrics of empty confusion matrix");
    auto ratio = [](int64_t num, int64_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    ClassificationMetrics m;
    m.accuracy = ratio(cm.tn + cm.tp, cm.total());
    m.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
    m.specificity = ratio(cm.tn, cm.tn + cm.fp);
    m.precision = ratio(cm.tp, cm.tp + cm.fp);
    m.fMeasure = (m.precision + m.sensitivity) > 0.0
                     ? 2.0 * m.precision * m.sensitivity / (m.precision + m.sensitivity)
                     : 0.0;
    return m;
}

StatImpactReport statImpact(std::span<const double> target, std::span<const double> comparison) {
    if (target.size() != comparison.size()) throw DataError("stat impact inputs differ in length");
    if (target.empty()) throw DataError("stat impact of empty sample");
    StatImpactReport report;
    report.mean = mean(comparison);
    std::vector<double> sortedComparison = sorted(comparison);
    report.q1 = quantileOfSorted(sortedComparison, 0.25);
    report.median = quantileOfSorted(sortedComparison, 0.5);
    report.q3 = quantileOfSorted(sortedComparison, 0.75);
    report.variance = variance(comparison);
    report.standardDeviation = std::sqrt(report.variance);
    report.mse = meanSquaredError(target, comparison);
    report.mahalanobis = pairedMahalanobis(target, comparison);
    std::optional<double> r = pearsonCorrelation(target, comparison);
    if (r.has_value()) report.correlationPercent = 100.0 * *r;
    double maxDeviation = 0.0;
    bool guard = false;
    for (size_t i = 0; i < target.size(); ++i) {
        double denominator = std::max(target[i], 1.0);
        double deviation = 100.0 * std::abs(comparison[i] - target[i]) / denominator;
        if (deviation > maxDeviation) {
            maxDeviation = deviation;
            guard = target[i] < 1.0;
        }
    }
    report.maxPercentageDeviation = maxDeviation;
    report.maxDeviationGuard = guard;
    return report;
}

}  // namespace mdi
