#include "Autoencoder.h"

#include <cmath>
#include <limits>
#include <string>

#include "Exceptions.h"
#include "Rng.h"

namespace mdi {

namespace {

double activate(Activation a, double z) { return a == Activation::Tanh ? std::tanh(z) : z; }

// Derivative expressed through the activated value (tanh' = 1 - y^2).
double activateDerivative(Activation a, double activated) {
    return a == Activation::Tanh ? 1.0 - activated * activated : 1.0;
}

}  // namespace

std::string activationName(Activation a) { return a == Activation::Tanh ? "tanh" : "linear"; }

Activation activationFromName(const std::string& name) {
    if (name == "linear") return Activation::Linear;
    if (name == "tanh") return Activation::Tanh;
    throw ConfigError("unknown activation: " + name);
}

nlohmann::json trainConfigToJson(const TrainConfig& config) {
    return nlohmann::json{{"max_cycles", config.maxCycles},
                          {"patience", config.patience},
                          {"learning_rate", config.learningRate},
                          {"beta1", config.beta1},
                          {"beta2", config.beta2},
                          {"epsilon", config.epsilon}};
}

TrainConfig trainConfigFromJson(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("training config must be a JSON object");
    TrainConfig config;
    nlohmann::json defaults = trainConfigToJson(config);
    for (const auto& [key, value] : doc.items()) {
        if (!defaults.contains(key)) throw ConfigError("unknown training parameter: " + key);
        defaults[key] = value;
    }
    try {
        config.maxCycles = defaults.at("max_cycles").get<int>();
        config.patience = defaults.at("patience").get<int>();
        config.learningRate = defaults.at("learning_rate").get<double>();
        config.beta1 = defaults.at("beta1").get<double>();
        config.beta2 = defaults.at("beta2").get<double>();
        config.epsilon = defaults.at("epsilon").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("training config: ") + e.what());
    }
    if (config.maxCycles < 1) throw ConfigError("training needs at least one cycle");
    if (config.patience < 0) throw ConfigError("patience must be non-negative");
    if (!(config.learningRate > 0.0)) throw ConfigError("learning rate must be positive");
    return config;
}

void Autoencoder::setWeight(int layer, int out, int in, double value) {
    (layer == 0 ? w1_ : w2_).at(out, in) = value;
}

void Autoencoder::setBias(int layer, int out, double value) {
    (layer == 0 ? b1_ : b2_)[static_cast<size_t>(out)] = value;
}

std::vector<double> Autoencoder::forward(std::span<const double> x) const {
    if (x.size() != static_cast<size_t>(inputSize_))
        throw DataError("input arity does not match the network");
    std::vector<double> hidden(static_cast<size_t>(hiddenSize_));
    for (int h = 0; h < hiddenSize_; ++h) {
        double z = b1_[static_cast<size_t>(h)];
        for (int i = 0; i < inputSize_; ++i) z += w1_.at(h, i) * x[static_cast<size_t>(i)];
        hidden[static_cast<size_t>(h)] = activate(hiddenActivation_, z);
    }
    std::vector<double> out(static_cast<size_t>(inputSize_));
    for (int o = 0; o < inputSize_; ++o) {
        double z = b2_[static_cast<size_t>(o)];
        for (int h = 0; h < hiddenSize_; ++h) z += w2_.at(o, h) * hidden[static_cast<size_t>(h)];
        out[static_cast<size_t>(o)] = activate(outputActivation_, z);
    }
    return out;
}

double Autoencoder::batchLoss(const Matrix& batch) const {
    if (batch.rows() == 0) throw DataError("loss of an empty batch");
    if (batch.cols() != inputSize_) throw DataError("batch arity does not match the network");
    double sum = 0.0;
    for (int r = 0; r < batch.rows(); ++r) {
        std::vector<double> y = forward(batch.row(r));
        for (int c = 0; c < inputSize_; ++c) {
            double d = y[static_cast<size_t>(c)] - batch.at(r, c);
            sum += d * d;
        }
    }
    return sum / (static_cast<double>(batch.rows()) * static_cast<double>(inputSize_));
}

Autoencoder::Gradients Autoencoder::gradient(const Matrix& batch) const {
    if (batch.rows() == 0) throw DataError("gradient of an empty batch");
    if (batch.cols() != inputSize_) throw DataError("batch arity does not match the network");
    Gradients g;
    g.w1 = Matrix(hiddenSize_, inputSize_);
    g.b1.assign(static_cast<size_t>(hiddenSize_), 0.0);
    g.w2 = Matrix(inputSize_, hiddenSize_);
    g.b2.assign(static_cast<size_t>(inputSize_), 0.0);

    const double scale = 2.0 / (static_cast<double>(batch.rows()) * static_cast<double>(inputSize_));
    std::vector<double> hidden(static_cast<size_t>(hiddenSize_));
    std::vector<double> output(static_cast<size_t>(inputSize_));
    std::vector<double> deltaOut(static_cast<size_t>(inputSize_));
    std::vector<double> deltaHidden(static_cast<size_t>(hiddenSize_));
    for (int r = 0; r < batch.rows(); ++r) {
        std::span<const double> x = batch.row(r);
        for (int h = 0; h < hiddenSize_; ++h) {
            double z = b1_[static_cast<size_t>(h)];
            for (int i = 0; i < inputSize_; ++i) z += w1_.at(h, i) * x[static_cast<size_t>(i)];
            hidden[static_cast<size_t>(h)] = activate(hiddenActivation_, z);
        }
        for (int o = 0; o < inputSize_; ++o) {
            double z = b2_[static_cast<size_t>(o)];
            for (int h = 0; h < hiddenSize_; ++h) z += w2_.at(o, h) * hidden[static_cast<size_t>(h)];
            output[static_cast<size_t>(o)] = activate(outputActivation_, z);
        }
        for (int o = 0; o < inputSize_; ++o) {
            double err = output[static_cast<size_t>(o)] - x[static_cast<size_t>(o)];
            deltaOut[static_cast<size_t>(o)] =
                scale * err * activateDerivative(outputActivation_, output[static_cast<size_t>(o)]);
        }
        for (int h = 0; h < hiddenSize_; ++h) {
            double back = 0.0;
            for (int o = 0; o < inputSize_; ++o) back += w2_.at(o, h) * deltaOut[static_cast<size_t>(o)];
            deltaHidden[static_cast<size_t>(h)] =
                back * activateDerivative(hiddenActivation_, hidden[static_cast<size_t>(h)]);
        }
        for (int o = 0; o < inputSize_; ++o) {
            g.b2[static_cast<size_t>(o)] += deltaOut[static_cast<size_t>(o)];
            for (int h = 0; h < hiddenSize_; ++h)
                g.w2.at(o, h) += deltaOut[static_cast<size_t>(o)] * hidden[static_cast<size_t>(h)];
        }
        for (int h = 0; h < hiddenSize_; ++h) {
            g.b1[static_cast<size_t>(h)] += deltaHidden[static_cast<size_t>(h)];
            for (int i = 0; i < inputSize_; ++i)
                g.w1.at(h, i) += deltaHidden[static_cast<size_t>(h)] * x[static_cast<size_t>(i)];
        }
    }
    return g;
}

Autoencoder initNetwork(const std::vector<int>& sizes, const std::vector<Activation>& activations,
                        uint64_t seed) {
    if (sizes.size() != 3) throw ConfigError("network sizes must be (input, hidden, output)");
    if (activations.size() != 2) throw ConfigError("need one activation per layer");
    int input = sizes[0];
    int hidden = sizes[1];
    int output = sizes[2];
    if (input < 1 || hidden < 1) throw ConfigError("layer sizes must be positive");
    if (output != input) throw ConfigError("autoassociative network needs output size = input size");
    if (hidden >= input) throw ConfigError("hidden layer must be a bottleneck (hidden < input)");

    Autoencoder net;
    net.inputSize_ = input;
    net.hiddenSize_ = hidden;
    net.hiddenActivation_ = activations[0];
    net.outputActivation_ = activations[1];
    net.w1_ = Matrix(hidden, input);
    net.b1_.assign(static_cast<size_t>(hidden), 0.0);
    net.w2_ = Matrix(input, hidden);
    net.b2_.assign(static_cast<size_t>(input), 0.0);

    Rng rng(seed);
    double scale1 = 1.0 / std::sqrt(static_cast<double>(input));
    for (int h = 0; h < hidden; ++h)
        for (int i = 0; i < input; ++i) net.w1_.at(h, i) = rng.uniform(-scale1, scale1);
    double scale2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (int o = 0; o < output; ++o)
        for (int h = 0; h < hidden; ++h) net.w2_.at(o, h) = rng.uniform(-scale2, scale2);
    return net;
}

double reconstructionError(const Autoencoder& network, std::span<const double> known,
                           std::span<const double> candidate, std::span<const uint8_t> mask) {
    if (known.size() != static_cast<size_t>(network.inputSize()) || mask.size() != known.size())
        throw DataError("record arity does not match the network");
    size_t unknown = 0;
    for (uint8_t m : mask) unknown += m != 0 ? 1 : 0;
    if (candidate.size() != unknown) throw DataError("candidate length does not match the mask");

    std::vector<double> x(known.begin(), known.end());
    size_t gene = 0;
    for (size_t i = 0; i < mask.size(); ++i)
        if (mask[i] != 0) x[i] = candidate[gene++];
    std::vector<double> y = network.forward(x);
    double e = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        e += d * d;
    }
    return e;
}

TrainTrace train(Autoencoder& network, const Matrix& trainSet, const Matrix& validationSet,
                 const TrainConfig& config) {
    if (trainSet.rows() == 0 || validationSet.rows() == 0)
        throw DataError("training needs nonempty train and validation sets");
    if (config.maxCycles < 1) throw ConfigError("training needs at least one cycle");
    if (config.learningRate <= 0.0) throw ConfigError("learning rate must be positive");

    struct AdamState {
        std::vector<double> m;
        std::vector<double> v;
    };
    auto makeState = [](size_t n) { return AdamState{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}; };
    AdamState sw1 = makeState(network.w1_.data().size());
    AdamState sb1 = makeState(network.b1_.size());
    AdamState sw2 = makeState(network.w2_.data().size());
    AdamState sb2 = makeState(network.b2_.size());

    TrainTrace trace;
    double bestValidation = std::numeric_limits<double>::infinity();
    Autoencoder best = network;
    int sinceBest = 0;
    double beta1Power = 1.0;
    double beta2Power = 1.0;

    auto step = [&](std::vector<double>& params, const std::vector<double>& grads, AdamState& state) {
        for (size_t i = 0; i < params.size(); ++i) {
            state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
            state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
            double mHat = state.m[i] / (1.0 - beta1Power);
            double vHat = state.v[i] / (1.0 - beta2Power);
            params[i] -= config.learningRate * mHat / (std::sqrt(vHat) + config.epsilon);
        }
    };

    for (int cycle = 0; cycle < config.maxCycles; ++cycle) {
        double trainLoss = network.batchLoss(trainSet);
        double validationLoss = network.batchLoss(validationSet);
        if (!std::isfinite(trainLoss) || !std::isfinite(validationLoss))
            throw NumericError("training diverged at cycle " + std::to_string(cycle));
        trace.trainLoss.push_back(trainLoss);
        trace.validationLoss.push_back(validationLoss);
        if (validationLoss < bestValidation) {
            bestValidation = validationLoss;
            best = network;
            trace.selectedCycle = cycle;
            sinceBest = 0;
        } else {
            ++sinceBest;
            if (config.patience > 0 && sinceBest >= config.patience) break;
        }

        Autoencoder::Gradients g = network.gradient(trainSet);
        beta1Power *= config.beta1;
        beta2Power *= config.beta2;
        step(network.w1_.data(), g.w1.data(), sw1);
        step(network.b1_, g.b1, sb1);
        step(network.w2_.data(), g.w2.data(), sw2);
        step(network.b2_, g.b2, sb2);
    }
    network = best;
    return trace;
}

nlohmann::json Autoencoder::toJson() const {
    auto matrixToJson = [](const Matrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    return nlohmann::json{{"version", 1},
                          {"kind", "autoencoder"},
                          {"sizes", {inputSize_, hiddenSize_, inputSize_}},
                          {"activations",
                           {activationName(hiddenActivation_), activationName(outputActivation_)}},
                          {"w1", matrixToJson(w1_)},
                          {"b1", b1_},
                          {"w2", matrixToJson(w2_)},
                          {"b2", b2_}};
}

Autoencoder Autoencoder::fromJson(const nlohmann::json& doc) {
    try {
        if (!doc.is_object() || doc.value("kind", "") != "autoencoder")
            throw ConfigError("not a serialized autoencoder");
        if (doc.at("version").get<int>() != 1) throw ConfigError("unsupported autoencoder version");
        std::vector<int> sizes = doc.at("sizes").get<std::vector<int>>();
        std::vector<std::string> names = doc.at("activations").get<std::vector<std::string>>();
        if (sizes.size() != 3 || names.size() != 2) throw ConfigError("malformed autoencoder document");
        Autoencoder net = initNetwork(sizes, {activationFromName(names[0]), activationFromName(names[1])}, 0);
        auto matrixFromJson = [](const nlohmann::json& rows, Matrix& m) {
            if (static_cast<int>(rows.size()) != m.rows()) throw ConfigError("weight shape mismatch");
            for (int r = 0; r < m.rows(); ++r) {
                const nlohmann::json& row = rows[static_cast<size_t>(r)];
                if (static_cast<int>(row.size()) != m.cols()) throw ConfigError("weight shape mismatch");
                for (int c = 0; c < m.cols(); ++c) m.at(r, c) = row[static_cast<size_t>(c)].get<double>();
            }
        };
        matrixFromJson(doc.at("w1"), net.w1_);
        matrixFromJson(doc.at("w2"), net.w2_);
        net.b1_ = doc.at("b1").get<std::vector<double>>();
        net.b2_ = doc.at("b2").get<std::vector<double>>();
        if (net.b1_.size() != static_cast<size_t>(net.hiddenSize_) ||
            net.b2_.size() != static_cast<size_t>(net.inputSize_))
            throw ConfigError("bias shape mismatch");
        return net;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed autoencoder document: ") + e.what());
    }
}

}  // namespace mdi
