#ifndef MDIMPUTE_DATASET_H
#define MDIMPUTE_DATASET_H

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace mdi {

enum class VariableKind { Ordinal, Categorical, Binary };

struct VariableSpec {
    std::string name;
    VariableKind kind = VariableKind::Ordinal;
    int lower = 0;
    int upper = 0;
    // Bit columns used for categorical variables; 0 for ordinal/binary.
    int codeWidth = 0;

    int categoryCount() const { return upper - lower + 1; }
    int encodedWidth() const { return kind == VariableKind::Categorical ? codeWidth : 1; }
};

class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<VariableSpec> variables);

    // The nine-variable antenatal survey layout: Province, Age, Edu, Gra,
    // Par, FathAge, HIV, RPR, Race. Encodes to 14 columns.
    static Schema survey();

    const std::vector<VariableSpec>& variables() const { return variables_; }
    const VariableSpec& variable(int v) const { return variables_[static_cast<size_t>(v)]; }
    int variableCount() const { return static_cast<int>(variables_.size()); }

    int indexOf(const std::string& name) const;  // -1 if absent
    int require(const std::string& name) const;  // throws ConfigError if absent

    int encodedWidth() const { return encodedWidth_; }
    int encodedOffset(int v) const { return offsets_[static_cast<size_t>(v)]; }
    // Variable owning a given encoded column.
    int variableOfColumn(int col) const { return columnVariable_[static_cast<size_t>(col)]; }

    bool operator==(const Schema& other) const;

private:
    std::vector<VariableSpec> variables_;
    std::vector<int> offsets_;
    std::vector<int> columnVariable_;
    int encodedWidth_ = 0;
};

// Integer survey table with a per-cell missingness mask. Immutable in normal
// use; the mutating accessors exist for construction.
class Dataset {
public:
    Dataset() = default;
    Dataset(Schema schema, int rows);

    const Schema& schema() const { return schema_; }
    int rowCount() const { return rows_; }
    int variableCount() const { return schema_.variableCount(); }

    bool missing(int row, int var) const { return missing_[index(row, var)] != 0; }
    int value(int row, int var) const { return values_[index(row, var)]; }

    void set(int row, int var, int value);
    void setMissing(int row, int var);

    int64_t missingCellCount() const;
    // Rows in which no cell is missing.
    std::vector<int> completeRows() const;
    bool isComplete() const;
    Dataset selectRows(std::span<const int> rowIndices) const;

private:
    size_t index(int row, int var) const {
        return static_cast<size_t>(row) * static_cast<size_t>(schema_.variableCount()) +
               static_cast<size_t>(var);
    }

    Schema schema_;
    int rows_ = 0;
    std::vector<int> values_;
    std::vector<uint8_t> missing_;
};

struct RuleViolation {
    std::string rule;
    std::vector<int> variables;  // cells that participate in the violation
};

// Checks one record against the survey consistency rules. Missing cells do
// not fire rules. `observed[v]` marks which cells carry values.
std::vector<RuleViolation> validateRecord(std::span<const int> record,
                                          std::span<const uint8_t> observed,
                                          const Schema& schema);
std::vector<RuleViolation> validateRecord(const Dataset& dataset, int row);

// Re-flags every cell participating in a rule violation as missing. Row count
// is preserved and the result is a fixpoint of the operation.
Dataset cleanDataset(const Dataset& dataset);

struct CleaningSummary {
    int64_t cellsFlagged = 0;
    int64_t rowsAffected = 0;
};
Dataset cleanDataset(const Dataset& dataset, CleaningSummary& summary);

// Min-max / binary-coded view of a dataset: ordinal and binary variables map
// to one column scaled into [0,1] by the schema bounds, categorical variables
// to codeWidth bit columns. Missing cells propagate to all their columns.
struct EncodedMatrix {
    Schema schema;
    int rows = 0;
    int width = 0;
    std::vector<double> values;
    std::vector<uint8_t> missing;

    double at(int row, int col) const {
        return values[static_cast<size_t>(row) * static_cast<size_t>(width) +
                      static_cast<size_t>(col)];
    }
    double& at(int row, int col) {
        return values[static_cast<size_t>(row) * static_cast<size_t>(width) +
                      static_cast<size_t>(col)];
    }
    bool missingAt(int row, int col) const {
        return missing[static_cast<size_t>(row) * static_cast<size_t>(width) +
                       static_cast<size_t>(col)] != 0;
    }
    std::span<const double> row(int r) const {
        return {values.data() + static_cast<size_t>(r) * static_cast<size_t>(width),
                static_cast<size_t>(width)};
    }
    std::span<double> row(int r) {
        return {values.data() + static_cast<size_t>(r) * static_cast<size_t>(width),
                static_cast<size_t>(width)};
    }
};

EncodedMatrix encodeDataset(const Dataset& dataset);
Dataset decodeMatrix(const EncodedMatrix& encoded);

// Encodes a single raw value into the columns of variable `var`, writing into
// `out` at the variable's offset. Decoding counterpart below.
void encodeValue(const Schema& schema, int var, int value, std::span<double> encodedRow);
int decodeValue(const Schema& schema, int var, std::span<const double> encodedRow);

enum class MissingnessMechanism { MCAR, MAR };

struct MissingnessPlan {
    MissingnessMechanism mechanism = MissingnessMechanism::MCAR;
    std::vector<std::string> targetVariables;
    double rate = 0.1;
    std::string marDriver;  // MAR only
};

// Removes observed cells of the target variables. MCAR removes each cell
// independently with probability `rate`; MAR scales the rate by the
// normalized rank of the driver variable's value in its column.
Dataset injectMissing(const Dataset& dataset, const MissingnessPlan& plan, uint64_t seed,
                      int64_t* removedCount = nullptr);

nlohmann::json missingnessPlanToJson(const MissingnessPlan& plan);
MissingnessPlan missingnessPlanFromJson(const nlohmann::json& doc);

struct SplitFractions {
    double train = 0.25;
    double validation = 0.25;
    double test = 0.25;
    double experiment = 0.25;
};

struct FourWaySplit {
    Dataset train;
    Dataset validation;
    Dataset test;
    Dataset experiment;
};

// Seeded shuffle followed by a largest-remainder partition into the four sets
// (ties resolved in train, validation, test, experiment order).
FourWaySplit splitDataset(const Dataset& dataset, const SplitFractions& fractions, uint64_t seed);

// CSV with a header row of schema variable names; missing cells are NA.
Dataset readCsv(const std::string& path, const Schema& schema);
void writeCsv(const Dataset& dataset, const std::string& path);

nlohmann::json schemaToJson(const Schema& schema);
Schema schemaFromJson(const nlohmann::json& doc);

}  // namespace mdi

#endif
