#ifndef MDIMPUTE_AUTOENCODER_H
#define MDIMPUTE_AUTOENCODER_H

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "Matrix.h"
#include "json.hpp"

namespace mdi {

enum class Activation { Linear, Tanh };

std::string activationName(Activation activation);
Activation activationFromName(const std::string& name);

struct TrainConfig {
    int maxCycles = 400;
    // 0 disables early exit; the best-validation weights are returned either
    // way.
    int patience = 0;
    double learningRate = 0.05;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    uint64_t seed = 0;
};

// Seed is deliberately not serialized; it flows in from the pipeline.
nlohmann::json trainConfigToJson(const TrainConfig& config);
TrainConfig trainConfigFromJson(const nlohmann::json& doc);

struct TrainTrace {
    std::vector<double> trainLoss;
    std::vector<double> validationLoss;
    // Index into the loss vectors; the returned weights are the ones observed
    // at this cycle (minimal validation loss).
    int selectedCycle = 0;
};

// Two-layer autoassociative network: input -> bottleneck hidden -> output of
// the input width.
class Autoencoder {
public:
    Autoencoder() = default;

    int inputSize() const { return inputSize_; }
    int hiddenSize() const { return hiddenSize_; }
    Activation hiddenActivation() const { return hiddenActivation_; }
    Activation outputActivation() const { return outputActivation_; }

    const Matrix& weights(int layer) const { return layer == 0 ? w1_ : w2_; }
    const std::vector<double>& biases(int layer) const { return layer == 0 ? b1_ : b2_; }
    void setWeight(int layer, int out, int in, double value);
    void setBias(int layer, int out, double value);

    std::vector<double> forward(std::span<const double> x) const;

    // Mean over rows and components of the squared reconstruction gap.
    double batchLoss(const Matrix& batch) const;

    struct Gradients {
        Matrix w1;
        std::vector<double> b1;
        Matrix w2;
        std::vector<double> b2;
    };
    Gradients gradient(const Matrix& batch) const;

    nlohmann::json toJson() const;
    static Autoencoder fromJson(const nlohmann::json& doc);

    friend Autoencoder initNetwork(const std::vector<int>& sizes,
                                   const std::vector<Activation>& activations, uint64_t seed);
    friend TrainTrace train(Autoencoder& network, const Matrix& trainSet,
                            const Matrix& validationSet, const TrainConfig& config);

private:
    int inputSize_ = 0;
    int hiddenSize_ = 0;
    Activation hiddenActivation_ = Activation::Linear;
    Activation outputActivation_ = Activation::Linear;
    Matrix w1_;                // hidden x input
    std::vector<double> b1_;
    Matrix w2_;                // input x hidden
    std::vector<double> b2_;
};

// sizes = (input, hidden, output) with output == input and hidden < input;
// activations = (hidden, output). Weights start uniform in +-1/sqrt(fan-in).
Autoencoder initNetwork(const std::vector<int>& sizes, const std::vector<Activation>& activations,
                        uint64_t seed);

// Sum over ALL components of the squared input-output gap after filling the
// masked (unknown) positions of `known` with `candidate` values, in mask
// order. candidate length must equal the number of masked positions.
double reconstructionError(const Autoencoder& network, std::span<const double> known,
                           std::span<const double> candidate, std::span<const uint8_t> mask);

// Full-batch adaptive gradient descent; returns the weights from the
// validation-loss minimum and the per-cycle trace.
TrainTrace train(Autoencoder& network, const Matrix& trainSet, const Matrix& validationSet,
                 const TrainConfig& config);

}  // namespace mdi

#endif
