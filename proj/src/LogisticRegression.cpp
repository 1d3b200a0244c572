#include "LogisticRegression.h"

#include <algorithm>
#include <cmath>

#include "Exceptions.h"

namespace mdi {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

void checkInputs(const Matrix& features, std::span<const int> labels) {
    if (features.rows() != static_cast<int>(labels.size()))
        throw DataError("feature rows and label count differ");
    for (int label : labels)
        if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
}

double score(std::span<const double> coefficients, const Matrix& features, int row) {
    double s = coefficients[0];
    for (int c = 0; c < features.cols(); ++c)
        s += coefficients[static_cast<size_t>(c + 1)] * features.at(row, c);
    return s;
}

}  // namespace

nlohmann::json lrConfigToJson(const LrConfig& config) {
    return nlohmann::json{{"max_iterations", config.maxIterations},
                          {"gradient_tolerance", config.gradientTolerance},
                          {"coefficient_cap", config.coefficientCap}};
}

LrConfig lrConfigFromJson(const nlohmann::json& doc) {
    try {
        if (!doc.is_object())
            throw ConfigError("logistic regression config must be a JSON object");
        LrConfig config;
        for (const auto& [key, value] : doc.items()) {
            if (key == "max_iterations") {
                config.maxIterations = value.get<int>();
            } else if (key == "gradient_tolerance") {
                config.gradientTolerance = value.get<double>();
            } else if (key == "coefficient_cap") {
                config.coefficientCap = value.get<double>();
            } else {
                throw ConfigError("unknown logistic regression option: " + key);
            }
        }
        if (config.maxIterations < 1)
            throw ConfigError("max_iterations must be at least 1");
        if (config.gradientTolerance <= 0.0)
            throw ConfigError("gradient_tolerance must be positive");
        if (config.coefficientCap <= 0.0)
            throw ConfigError("coefficient_cap must be positive");
        return config;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad logistic regression config: ") + e.what());
    }
}

double lrLogLikelihood(std::span<const double> coefficients, const Matrix& features,
                       std::span<const int> labels) {
    checkInputs(features, labels);
    if (coefficients.size() != static_cast<size_t>(features.cols() + 1))
        throw DataError("coefficient arity mismatch");
    double ll = 0.0;
    for (int r = 0; r < features.rows(); ++r) {
        double s = score(coefficients, features, r);
        // log p = -log(1+e^-s) for y=1, log(1-p) = -log(1+e^s) for y=0.
        double y = static_cast<double>(labels[static_cast<size_t>(r)]);
        ll += y * s - (s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)));
    }
    return ll;
}

std::vector<double> lrGradient(std::span<const double> coefficients, const Matrix& features,
                               std::span<const int> labels) {
    checkInputs(features, labels);
    if (coefficients.size() != static_cast<size_t>(features.cols() + 1))
        throw DataError("coefficient arity mismatch");
    std::vector<double> gradient(coefficients.size(), 0.0);
    for (int r = 0; r < features.rows(); ++r) {
        double residual = static_cast<double>(labels[static_cast<size_t>(r)]) -
                          sigmoid(score(coefficients, features, r));
        gradient[0] += residual;
        for (int c = 0; c < features.cols(); ++c)
            gradient[static_cast<size_t>(c + 1)] += residual * features.at(r, c);
    }
    return gradient;
}

LrModel fitLogistic(const Matrix& features, std::span<const int> labels, const LrConfig& config) {
    checkInputs(features, labels);
    int p = features.cols() + 1;
    if (features.rows() <= p)
        throw DataError("need more rows than coefficients for a logistic fit");
    if (config.maxIterations < 1) throw ConfigError("logistic fit needs at least one iteration");

    LrModel model;
    model.coefficients.assign(static_cast<size_t>(p), 0.0);
    std::vector<double> probabilities(static_cast<size_t>(features.rows()));
    Matrix hessian(p, p);
    std::vector<double> gradient;
    std::vector<double> step;

    for (int iteration = 0; iteration < config.maxIterations; ++iteration) {
        gradient = lrGradient(model.coefficients, features, labels);
        double norm = 0.0;
        for (double g : gradient) norm += g * g;
        norm = std::sqrt(norm);
        model.finalGradientNorm = norm;
        model.iterations = iteration;
        if (norm < config.gradientTolerance) {
            model.converged = true;
            return model;
        }

        for (int r = 0; r < features.rows(); ++r)
            probabilities[static_cast<size_t>(r)] = sigmoid(score(model.coefficients, features, r));
        // H = X'WX over the intercept-augmented design, W = diag(p(1-p)).
        std::fill(hessian.data().begin(), hessian.data().end(), 0.0);
        for (int r = 0; r < features.rows(); ++r) {
            double w = probabilities[static_cast<size_t>(r)] *
                       (1.0 - probabilities[static_cast<size_t>(r)]);
            for (int i = 0; i < p; ++i) {
                double xi = i == 0 ? 1.0 : features.at(r, i - 1);
                for (int j = i; j < p; ++j) {
                    double xj = j == 0 ? 1.0 : features.at(r, j - 1);
                    hessian.at(i, j) += w * xi * xj;
                }
            }
        }
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < i; ++j) hessian.at(i, j) = hessian.at(j, i);

        if (!choleskySolve(hessian, gradient, step)) {
            // Weights collapsed; treat as separation.
            model.separationWarning = true;
            break;
        }
        for (int i = 0; i < p; ++i) model.coefficients[static_cast<size_t>(i)] += step[static_cast<size_t>(i)];

        bool capped = false;
        for (double& c : model.coefficients) {
            if (std::abs(c) > config.coefficientCap) {
                c = std::clamp(c, -config.coefficientCap, config.coefficientCap);
                capped = true;
            }
        }
        if (capped) {
            model.separationWarning = true;
            model.iterations = iteration + 1;
            break;
        }
    }
    gradient = lrGradient(model.coefficients, features, labels);
    double norm = 0.0;
    for (double g : gradient) norm += g * g;
    model.finalGradientNorm = std::sqrt(norm);
    model.converged = model.finalGradientNorm < config.gradientTolerance;
    return model;
}

double lrPredictProbability(const LrModel& model, std::span<const double> x) {
    if (x.size() + 1 != model.coefficients.size())
        throw DataError("feature arity does not match the model");
    double s = model.coefficients[0];
    for (size_t i = 0; i < x.size(); ++i) s += model.coefficients[i + 1] * x[i];
    return sigmoid(s);
}

}  // namespace mdi
