#ifndef MDIMPUTE_LOGISTIC_REGRESSION_H
#define MDIMPUTE_LOGISTIC_REGRESSION_H

#include <span>
#include <vector>

#include "Matrix.h"
#include "json.hpp"

namespace mdi {

struct LrConfig {
    int maxIterations = 100;
    double gradientTolerance = 1e-8;
    // Coefficients beyond this magnitude indicate separation; the fit stops
    // with clamped values and a warning instead of diverging.
    double coefficientCap = 30.0;
};

nlohmann::json lrConfigToJson(const LrConfig& config);
LrConfig lrConfigFromJson(const nlohmann::json& doc);

struct LrModel {
    // Intercept first, then one weight per feature column.
    std::vector<double> coefficients;
    bool converged = false;
    bool separationWarning = false;
    int iterations = 0;
    double finalGradientNorm = 0.0;
};

// Maximum-likelihood fit by Newton / iteratively reweighted least squares.
// `features` has no intercept column; labels are 0/1.
LrModel fitLogistic(const Matrix& features, std::span<const int> labels,
                    const LrConfig& config = {});

double lrPredictProbability(const LrModel& model, std::span<const double> x);

// Log-likelihood and its analytic gradient at an arbitrary coefficient
// vector (intercept first). Gradient length = 1 + feature count.
double lrLogLikelihood(std::span<const double> coefficients, const Matrix& features,
                       std::span<const int> labels);
std::vector<double> lrGradient(std::span<const double> coefficients, const Matrix& features,
                               std::span<const int> labels);

}  // namespace mdi

#endif
