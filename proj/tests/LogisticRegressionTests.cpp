// Newton-fitted logistic regression: analytic gradients, recovery of known
// coefficients, separation handling, and configuration serialization.

#include <cmath>
#include <vector>

#include "../src/Exceptions.h"
#include "../src/LogisticRegression.h"
#include "../src/Matrix.h"
#include "../src/Rng.h"
#include "doctest.h"

using namespace mdi;

namespace {

// Central finite difference of the log-likelihood in every coordinate.
std::vector<double> numericalGradient(std::span<const double> coefficients,
                                      const Matrix& features, std::span<const int> labels) {
    const double h = 1e-6;
    std::vector<double> grad(coefficients.size());
    std::vector<double> point(coefficients.begin(), coefficients.end());
    for (size_t j = 0; j < point.size(); ++j) {
        double saved = point[j];
        point[j] = saved + h;
        double up = lrLogLikelihood(point, features, labels);
        point[j] = saved - h;
        double down = lrLogLikelihood(point, features, labels);
        point[j] = saved;
        grad[j] = (up - down) / (2.0 * h);
    }
    return grad;
}

double relativeError(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0;
    double den = 0.0;
    for (size_t j = 0; j < a.size(); ++j) {
        num += (a[j] - b[j]) * (a[j] - b[j]);
        den += a[j] * a[j] + b[j] * b[j];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

}  // namespace

TEST_CASE("an intercept-only fit recovers the log-odds of the label mean") {
    Matrix features(20, 0);
    std::vector<int> labels(20, 0);
    for (int i = 0; i < 6; ++i) labels[static_cast<size_t>(i)] = 1;  // 30% positive

    LrModel model = fitLogistic(features, labels);
    REQUIRE(model.coefficients.size() == 1);
    CHECK(model.converged);
    CHECK_FALSE(model.separationWarning);
    CHECK(model.coefficients[0] == doctest::Approx(std::log(0.3 / 0.7)).epsilon(1e-8));

    std::vector<double> emptyRow;
    CHECK(lrPredictProbability(model, emptyRow) == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("analytic gradients agree with central finite differences") {
    for (uint64_t instance = 0; instance < 5; ++instance) {
        Rng rng(100 + instance);
        int n = 40;
        int p = 3;
        Matrix features(n, p);
        std::vector<int> labels(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < p; ++j) features.at(i, j) = rng.normal();
            labels[static_cast<size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
        }
        std::vector<double> point(static_cast<size_t>(p) + 1);
        for (double& c : point) c = rng.normal() * 0.5;

        std::vector<double> analytic = lrGradient(point, features, labels);
        std::vector<double> numeric = numericalGradient(point, features, labels);
        REQUIRE(analytic.size() == static_cast<size_t>(p) + 1);
        CHECK(relativeError(analytic, numeric) < 1e-5);
    }
}

TEST_CASE("the fit recovers planted coefficients on a large sample") {
    Rng rng(55);
    int n = 20000;
    std::vector<double> truth{-0.5, 1.2, -0.8};
    Matrix features(n, 2);
    std::vector<int> labels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double eta = truth[0];
        for (int j = 0; j < 2; ++j) {
            features.at(i, j) = rng.normal();
            eta += truth[static_cast<size_t>(j) + 1] * features.at(i, j);
        }
        double probability = 1.0 / (1.0 + std::exp(-eta));
        labels[static_cast<size_t>(i)] = rng.bernoulli(probability) ? 1 : 0;
    }

    LrModel model = fitLogistic(features, labels);
    CHECK(model.converged);
    REQUIRE(model.coefficients.size() == 3);
    for (size_t j = 0; j < 3; ++j)
        CHECK(model.coefficients[j] == doctest::Approx(truth[j]).epsilon(0.10));

    // The gradient at the optimum vanishes.
    std::vector<double> grad = lrGradient(model.coefficients, features, labels);
    for (double g : grad) CHECK(std::abs(g) < 1e-6);
    CHECK(model.finalGradientNorm < 1e-6);
}

TEST_CASE("perfect separation is reported instead of diverging") {
    Matrix features(8, 1);
    std::vector<int> labels(8);
    for (int i = 0; i < 8; ++i) {
        features.at(i, 0) = static_cast<double>(i);
        labels[static_cast<size_t>(i)] = i < 4 ? 0 : 1;
    }
    LrModel model = fitLogistic(features, labels);
    CHECK(model.separationWarning);
    for (double c : model.coefficients) CHECK(std::abs(c) <= 30.0 + 1e-9);
}

TEST_CASE("probability prediction applies the logistic link") {
    LrModel model;
    model.coefficients = {0.0, 0.0};
    std::vector<double> x{3.0};
    CHECK(lrPredictProbability(model, x) == doctest::Approx(0.5));

    model.coefficients = {std::log(3.0), 0.0};
    CHECK(lrPredictProbability(model, x) == doctest::Approx(0.75).epsilon(1e-12));

    model.coefficients = {0.0, 1.0};
    x[0] = std::log(4.0);
    CHECK(lrPredictProbability(model, x) == doctest::Approx(0.8).epsilon(1e-12));

    std::vector<double> wide{1.0, 2.0};
    CHECK_THROWS_WITH_AS(lrPredictProbability(model, wide),
                         "feature arity does not match the model", DataError);
}

TEST_CASE("likelihood helpers validate their inputs") {
    Matrix features(3, 2);
    std::vector<int> labels{0, 1, 0};
    std::vector<double> shortCoef{0.0, 1.0};  // needs 3 entries
    CHECK_THROWS_WITH_AS(lrLogLikelihood(shortCoef, features, labels),
                         "coefficient arity mismatch", DataError);
    CHECK_THROWS_WITH_AS(lrGradient(shortCoef, features, labels), "coefficient arity mismatch",
                         DataError);

    std::vector<double> coef{0.0, 1.0, -1.0};
    std::vector<int> fewLabels{0, 1};
    CHECK_THROWS_AS(lrLogLikelihood(coef, features, fewLabels), DataError);

    std::vector<int> badLabels{0, 2, 0};
    CHECK_THROWS_AS(lrGradient(coef, features, badLabels), DataError);

    // The fit itself wants more rows than coefficients.
    CHECK_THROWS_WITH_AS(fitLogistic(features, labels),
                         "need more rows than coefficients for a logistic fit", DataError);
}

TEST_CASE("logistic configuration round-trips through JSON") {
    LrConfig config;
    config.maxIterations = 50;
    config.gradientTolerance = 1e-6;
    config.coefficientCap = 12.0;
    nlohmann::json doc = lrConfigToJson(config);
    CHECK(doc["max_iterations"] == 50);
    CHECK(doc["gradient_tolerance"] == doctest::Approx(1e-6));
    CHECK(doc["coefficient_cap"] == doctest::Approx(12.0));

    LrConfig back = lrConfigFromJson(doc);
    CHECK(back.maxIterations == 50);
    CHECK(back.gradientTolerance == doctest::Approx(1e-6));
    CHECK(back.coefficientCap == doctest::Approx(12.0));

    LrConfig partial = lrConfigFromJson(nlohmann::json{{"max_iterations", 7}});
    CHECK(partial.maxIterations == 7);
    CHECK(partial.coefficientCap == doctest::Approx(LrConfig{}.coefficientCap));

    CHECK_THROWS_WITH_AS(lrConfigFromJson(nlohmann::json{{"iterations", 7}}),
                         "unknown logistic regression option: iterations", ConfigError);
}
