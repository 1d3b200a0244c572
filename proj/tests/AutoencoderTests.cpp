// Autoassociative network: initialization, forward pass, analytic gradients,
// best-cycle training, masked reconstruction error, serialization.

#include <cmath>
#include <limits>
#include <vector>

#include "../src/Autoencoder.h"
#include "../src/Exceptions.h"
#include "../src/Matrix.h"
#include "../src/Rng.h"
#include "doctest.h"

using namespace mdi;

namespace {

Matrix rowsToMatrix(const std::vector<std::vector<double>>& rows) {
    Matrix out(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int i = 0; i < out.rows(); ++i)
        for (int j = 0; j < out.cols(); ++j)
            out.at(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return out;
}

Matrix randomBatch(int rows, int cols, uint64_t seed) {
    Rng rng(seed);
    Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out.at(i, j) = rng.uniform();
    return out;
}

// Loss change under a single-parameter nudge, for finite-difference checks.
double lossWithNudgedWeight(Autoencoder network, int layer, int out, int in, double delta,
                            const Matrix& batch) {
    network.setWeight(layer, out, in, network.weights(layer).at(out, in) + delta);
    return network.batchLoss(batch);
}

double lossWithNudgedBias(Autoencoder network, int layer, int out, double delta,
                          const Matrix& batch) {
    network.setBias(layer, out, network.biases(layer)[static_cast<size_t>(out)] + delta);
    return network.batchLoss(batch);
}

}  // namespace

TEST_CASE("network initialization respects shapes and fan-in bounds") {
    Autoencoder network = initNetwork({14, 11, 14}, {Activation::Tanh, Activation::Linear}, 4);
    CHECK(network.inputSize() == 14);
    CHECK(network.hiddenSize() == 11);
    CHECK(network.hiddenActivation() == Activation::Tanh);
    CHECK(network.outputActivation() == Activation::Linear);
    CHECK(network.weights(0).rows() == 11);
    CHECK(network.weights(0).cols() == 14);
    CHECK(network.weights(1).rows() == 14);
    CHECK(network.weights(1).cols() == 11);

    double bound0 = 1.0 / std::sqrt(14.0);
    double bound1 = 1.0 / std::sqrt(11.0);
    bool anyNonZero = false;
    for (int i = 0; i < 11; ++i) {
        CHECK(network.biases(0)[static_cast<size_t>(i)] == 0.0);
        for (int j = 0; j < 14; ++j) {
            CHECK(std::abs(network.weights(0).at(i, j)) <= bound0);
            anyNonZero = anyNonZero || network.weights(0).at(i, j) != 0.0;
        }
    }
    for (int i = 0; i < 14; ++i) {
        CHECK(network.biases(1)[static_cast<size_t>(i)] == 0.0);
        for (int j = 0; j < 11; ++j) CHECK(std::abs(network.weights(1).at(i, j)) <= bound1);
    }
    CHECK(anyNonZero);

    // Exactly (input, hidden, output) with a genuine bottleneck.
    CHECK_THROWS_AS(initNetwork({14, 11}, {Activation::Tanh, Activation::Linear}, 1),
                    ConfigError);
    CHECK_THROWS_AS(initNetwork({14, 11, 13}, {Activation::Tanh, Activation::Linear}, 1),
                    ConfigError);
    CHECK_THROWS_AS(initNetwork({14, 14, 14}, {Activation::Tanh, Activation::Linear}, 1),
                    ConfigError);

    Autoencoder again = initNetwork({14, 11, 14}, {Activation::Tanh, Activation::Linear}, 4);
    CHECK(again.weights(0).at(3, 5) == network.weights(0).at(3, 5));
    Autoencoder other = initNetwork({14, 11, 14}, {Activation::Tanh, Activation::Linear}, 5);
    CHECK(other.weights(0).at(3, 5) != network.weights(0).at(3, 5));
}

TEST_CASE("a hand-wired 2-1-2 network reproduces the forward arithmetic") {
    Autoencoder network = initNetwork({2, 1, 2}, {Activation::Tanh, Activation::Linear}, 9);
    network.setWeight(0, 0, 0, 0.5);
    network.setWeight(0, 0, 1, -0.25);
    network.setBias(0, 0, 0.1);
    network.setWeight(1, 0, 0, 1.5);
    network.setWeight(1, 1, 0, -2.0);
    network.setBias(1, 0, 0.2);
    network.setBias(1, 1, -0.3);

    std::vector<double> x{0.8, 0.4};
    double h = std::tanh(0.5 * 0.8 - 0.25 * 0.4 + 0.1);
    std::vector<double> y = network.forward(x);
    REQUIRE(y.size() == 2);
    CHECK(y[0] == doctest::Approx(1.5 * h + 0.2).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(-2.0 * h - 0.3).epsilon(1e-12));

    // batchLoss averages the squared gap over rows times components.
    Matrix batch = rowsToMatrix({{0.8, 0.4}});
    double expected = ((y[0] - 0.8) * (y[0] - 0.8) + (y[1] - 0.4) * (y[1] - 0.4)) / 2.0;
    CHECK(network.batchLoss(batch) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("analytic gradients agree with central finite differences") {
    const double h = 1e-6;
    for (uint64_t instance = 0; instance < 5; ++instance) {
        Autoencoder network =
            initNetwork({5, 3, 5}, {Activation::Tanh, Activation::Linear}, 200 + instance);
        Matrix batch = randomBatch(7, 5, 300 + instance);
        Autoencoder::Gradients grads = network.gradient(batch);

        double worst = 0.0;
        auto record = [&](double analytic, double up, double down) {
            double numeric = (up - down) / (2.0 * h);
            double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            worst = std::max(worst, std::abs(analytic - numeric) / scale);
        };

        for (int layer = 0; layer < 2; ++layer) {
            const Matrix& w = layer == 0 ? grads.w1 : grads.w2;
            for (int i = 0; i < w.rows(); ++i) {
                for (int j = 0; j < w.cols(); ++j)
                    record(w.at(i, j), lossWithNudgedWeight(network, layer, i, j, h, batch),
                           lossWithNudgedWeight(network, layer, i, j, -h, batch));
                const std::vector<double>& b = layer == 0 ? grads.b1 : grads.b2;
                record(b[static_cast<size_t>(i)], lossWithNudgedBias(network, layer, i, h, batch),
                       lossWithNudgedBias(network, layer, i, -h, batch));
            }
        }
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("training returns the weights of the best validation cycle") {
    Matrix trainSet = randomBatch(40, 6, 71);
    Matrix validationSet = randomBatch(12, 6, 72);
    Autoencoder network = initNetwork({6, 4, 6}, {Activation::Tanh, Activation::Linear}, 73);
    double initialLoss = network.batchLoss(trainSet);

    TrainConfig config;
    config.maxCycles = 150;
    TrainTrace trace = train(network, trainSet, validationSet, config);

    REQUIRE_FALSE(trace.trainLoss.empty());
    CHECK(trace.trainLoss.size() == trace.validationLoss.size());
    CHECK(trace.trainLoss.size() <= 150);

    // selectedCycle is the first argmin of the validation curve.
    int argmin = 0;
    for (size_t c = 0; c < trace.validationLoss.size(); ++c)
        if (trace.validationLoss[c] < trace.validationLoss[static_cast<size_t>(argmin)])
            argmin = static_cast<int>(c);
    CHECK(trace.selectedCycle == argmin);

    // The returned network is the snapshot from that cycle, bit for bit.
    CHECK(network.batchLoss(validationSet) ==
          trace.validationLoss[static_cast<size_t>(trace.selectedCycle)]);
    CHECK(network.batchLoss(trainSet) < initialLoss);

    // Determinism: the same configuration reproduces the same trace.
    Autoencoder retrained = initNetwork({6, 4, 6}, {Activation::Tanh, Activation::Linear}, 73);
    TrainTrace replay = train(retrained, trainSet, validationSet, config);
    CHECK(replay.trainLoss == trace.trainLoss);
    CHECK(replay.selectedCycle == trace.selectedCycle);
}

TEST_CASE("patience cuts training short once validation stops improving") {
    Matrix trainSet = randomBatch(30, 5, 81);
    Matrix validationSet = randomBatch(10, 5, 82);
    Autoencoder network = initNetwork({5, 3, 5}, {Activation::Tanh, Activation::Linear}, 83);

    TrainConfig config;
    config.maxCycles = 400;
    config.patience = 10;
    TrainTrace trace = train(network, trainSet, validationSet, config);
    CHECK(trace.trainLoss.size() < 400);
    CHECK(trace.selectedCycle >= 0);
    CHECK(static_cast<size_t>(trace.selectedCycle) < trace.validationLoss.size());
    CHECK(network.batchLoss(validationSet) ==
          trace.validationLoss[static_cast<size_t>(trace.selectedCycle)]);
}

TEST_CASE("non-finite inputs surface as numeric errors during training") {
    Matrix trainSet = randomBatch(10, 4, 91);
    trainSet.at(3, 2) = std::numeric_limits<double>::quiet_NaN();
    Matrix validationSet = randomBatch(4, 4, 92);
    Autoencoder network = initNetwork({4, 2, 4}, {Activation::Tanh, Activation::Linear}, 93);
    CHECK_THROWS_AS(train(network, trainSet, validationSet, TrainConfig{}), NumericError);
}

TEST_CASE("masked reconstruction error fills unknown positions in order") {
    Autoencoder network = initNetwork({3, 2, 3}, {Activation::Linear, Activation::Linear}, 11);

    std::vector<double> known{0.2, 0.0, 0.9};
    std::vector<uint8_t> mask{0, 1, 0};
    std::vector<double> candidate{0.5};

    std::vector<double> filled{0.2, 0.5, 0.9};
    std::vector<double> y = network.forward(filled);
    double expected = 0.0;
    for (size_t j = 0; j < 3; ++j) expected += (y[j] - filled[j]) * (y[j] - filled[j]);
    CHECK(reconstructionError(network, known, candidate, mask) ==
          doctest::Approx(expected).epsilon(1e-12));

    std::vector<double> tooMany{0.5, 0.6};
    CHECK_THROWS_AS(reconstructionError(network, known, tooMany, mask), DataError);
}

TEST_CASE("networks serialize to JSON and back exactly") {
    Autoencoder network = initNetwork({6, 4, 6}, {Activation::Tanh, Activation::Linear}, 17);
    Matrix trainSet = randomBatch(20, 6, 18);
    Matrix validationSet = randomBatch(8, 6, 19);
    TrainConfig config;
    config.maxCycles = 30;
    train(network, trainSet, validationSet, config);

    nlohmann::json doc = network.toJson();
    Autoencoder back = Autoencoder::fromJson(doc);
    CHECK(back.inputSize() == 6);
    CHECK(back.hiddenSize() == 4);
    CHECK(back.hiddenActivation() == Activation::Tanh);
    Rng rng(20);
    for (int probe = 0; probe < 10; ++probe) {
        std::vector<double> x(6);
        for (double& v : x) v = rng.uniform();
        std::vector<double> a = network.forward(x);
        std::vector<double> b = back.forward(x);
        for (size_t j = 0; j < 6; ++j) CHECK(a[j] == b[j]);
    }

    CHECK_THROWS_AS(Autoencoder::fromJson(nlohmann::json{{"kind", "nonsense"}}), ConfigError);
}

TEST_CASE("activation names round-trip") {
    CHECK(activationName(Activation::Linear) == "linear");
    CHECK(activationName(Activation::Tanh) == "tanh");
    CHECK(activationFromName("linear") == Activation::Linear);
    CHECK(activationFromName("tanh") == Activation::Tanh);
    CHECK_THROWS_AS(activationFromName("relu"), ConfigError);
}

TEST_CASE("training configuration serializes without its seed") {
    TrainConfig config;
    config.maxCycles = 99;
    config.patience = 5;
    config.learningRate = 0.01;
    config.seed = 123;
    nlohmann::json doc = trainConfigToJson(config);
    CHECK(doc["max_cycles"] == 99);
    CHECK(doc["patience"] == 5);
    CHECK(doc["learning_rate"] == doctest::Approx(0.01));
    CHECK(doc["beta1"] == doctest::Approx(0.9));
    CHECK(doc["beta2"] == doctest::Approx(0.999));
    CHECK(doc["epsilon"] == doctest::Approx(1e-8));
    CHECK_FALSE(doc.contains("seed"));

    TrainConfig back = trainConfigFromJson(doc);
    CHECK(back.maxCycles == 99);
    CHECK(back.patience == 5);
    CHECK(back.learningRate == doctest::Approx(0.01));
    CHECK(back.seed == 0);  // seed comes from the caller, not the document

    CHECK_THROWS_AS(trainConfigFromJson(nlohmann::json{{"cycles", 9}}), ConfigError);
}
