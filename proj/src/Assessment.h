#ifndef MDIMPUTE_ASSESSMENT_H
#define MDIMPUTE_ASSESSMENT_H

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "Dataset.h"
#include "Imputation.h"
#include "LogisticRegression.h"
#include "RandomForest.h"
#include "Statistics.h"
#include "json.hpp"

namespace mdi {

// Deviation of one completed column from its reference column.
struct StatVariableAssessment {
    std::string variable;
    StatImpactReport target;   // reference column described against itself
    StatImpactReport imputed;  // completed column against the reference
    double imputedCellsMse = 0.0;
    int imputedCellCount = 0;
};

struct StatAssessment {
    std::string label;
    std::string strategy;
    std::vector<StatVariableAssessment> variables;
    // Pattern columns pooled: once over every row, once over only the cells
    // that were actually filled.
    double combinedWholeMse = 0.0;
    double combinedImputedMse = 0.0;
    int combinedImputedCells = 0;
    // Full-covariance paired distance over the pattern columns jointly.
    std::optional<double> multivariateMahalanobis;
};

StatAssessment assessStats(const Dataset& target, const ImputedSet& imputed);

// Random-forest classifier for one binary schema variable; every other
// encoded column serves as input.
struct BinaryClassifier {
    Schema schema;
    std::string target;
    RandomForest forest;

    nlohmann::json toJson() const;
    static BinaryClassifier fromJson(const nlohmann::json& doc);
};

BinaryClassifier fitBinaryClassifier(const Dataset& train, const std::string& targetVariable,
                                     const ForestParams& params, uint64_t seed);

std::vector<int> classifyAll(const BinaryClassifier& model, const Dataset& data);

struct ClassificationAssessment {
    std::string label;
    ConfusionMatrix confusion;
    ClassificationMetrics metrics;
};

ClassificationAssessment assessClassification(const BinaryClassifier& model, const Dataset& data,
                                              const std::string& label);

// Logistic model over the encoded columns of every variable but the target.
struct LrClassifier {
    Schema schema;
    std::string target;
    LrModel model;

    nlohmann::json toJson() const;
    static LrClassifier fromJson(const nlohmann::json& doc);
};

LrClassifier fitLrClassifier(const Dataset& train, const std::string& targetVariable,
                             const LrConfig& config = {});

std::vector<double> lrProbabilities(const LrClassifier& model, const Dataset& data);

// Distribution of a completed set's predicted probabilities (percent scale)
// and their agreement with the reference set's probabilities.
struct LrImpactReport {
    std::string label;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    std::optional<double> correlationPercent;
    double ks = 0.0;
    double mse = 0.0;
};

LrImpactReport lrImpact(const LrClassifier& model, const Dataset& target,
                        const Dataset& comparison, const std::string& label);

nlohmann::json statImpactToJson(const StatImpactReport& report);
nlohmann::json statAssessmentToJson(const StatAssessment& assessment);
nlohmann::json classificationAssessmentToJson(const ClassificationAssessment& assessment);
nlohmann::json lrImpactToJson(const LrImpactReport& report);
nlohmann::json rangeAccuracyToJson(const RangeAccuracyReport& report);

// Aligned-text tables, one column per assessed set.
std::string statTable(const std::vector<StatAssessment>& sets);
std::string classificationTable(const std::vector<ClassificationAssessment>& sets);
std::string lrImpactTable(const std::vector<LrImpactReport>& sets);
std::string rangeAccuracyTable(
    const std::vector<std::pair<std::string, RangeAccuracyReport>>& sets);

// Matched quantile pairs as a two-column CSV for external plotting.
void writeQqCsv(std::span<const double> a, std::span<const double> b, int points,
                const std::string& path);

}  // namespace mdi

#endif
