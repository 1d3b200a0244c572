// Schema, encoding, cleaning, missingness injection, splitting, and CSV I/O.

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "../src/Dataset.h"
#include "../src/Exceptions.h"
#include "TestHelpers.h"
#include "doctest.h"

using namespace mdi;
using testutil::kMissingCell;
using testutil::surveyFromRows;
using testutil::validRecord;

namespace {

bool sameContents(const Dataset& a, const Dataset& b) {
    if (!(a.schema() == b.schema()) || a.rowCount() != b.rowCount()) return false;
    for (int r = 0; r < a.rowCount(); ++r) {
        for (int v = 0; v < a.variableCount(); ++v) {
            if (a.missing(r, v) != b.missing(r, v)) return false;
            if (!a.missing(r, v) && a.value(r, v) != b.value(r, v)) return false;
        }
    }
    return true;
}

std::vector<std::string> ruleNames(const std::vector<RuleViolation>& violations) {
    std::vector<std::string> names;
    for (const RuleViolation& v : violations) names.push_back(v.rule);
    std::sort(names.begin(), names.end());
    return names;
}

std::vector<RuleViolation> validateOne(std::array<int, 9> record) {
    std::vector<std::array<int, 9>> rows{record};
    Dataset data = surveyFromRows(rows);
    return validateRecord(data, 0);
}

// Multiset fingerprint of the rows for partition checks; missing cells are
// folded in as a sentinel.
std::vector<std::vector<int>> rowMultiset(const Dataset& data) {
    std::vector<std::vector<int>> rows;
    for (int r = 0; r < data.rowCount(); ++r) {
        std::vector<int> row;
        for (int v = 0; v < data.variableCount(); ++v)
            row.push_back(data.missing(r, v) ? kMissingCell : data.value(r, v));
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace

TEST_CASE("survey schema exposes the nine-variable layout") {
    Schema schema = Schema::survey();
    REQUIRE(schema.variableCount() == 9);
    const std::vector<std::string> names{"Province", "Age", "Edu",     "Gra", "Par",
                                         "FathAge",  "HIV", "RPR",     "Race"};
    for (int v = 0; v < 9; ++v) CHECK(schema.variable(v).name == names[static_cast<size_t>(v)]);

    CHECK(schema.variable(0).kind == VariableKind::Categorical);
    CHECK(schema.variable(0).lower == 1);
    CHECK(schema.variable(0).upper == 9);
    CHECK(schema.variable(0).codeWidth == 4);
    CHECK(schema.variable(1).kind == VariableKind::Ordinal);
    CHECK(schema.variable(1).lower == 12);
    CHECK(schema.variable(1).upper == 50);
    CHECK(schema.variable(2).upper == 13);
    CHECK(schema.variable(3).lower == 1);
    CHECK(schema.variable(5).upper == 90);
    CHECK(schema.variable(6).kind == VariableKind::Binary);
    CHECK(schema.variable(7).kind == VariableKind::Binary);
    CHECK(schema.variable(8).kind == VariableKind::Categorical);
    CHECK(schema.variable(8).codeWidth == 3);

    CHECK(schema.encodedWidth() == 14);
    const std::array<int, 9> offsets{0, 4, 5, 6, 7, 8, 9, 10, 11};
    for (int v = 0; v < 9; ++v) CHECK(schema.encodedOffset(v) == offsets[static_cast<size_t>(v)]);

    // Every encoded column maps back to the variable that owns it.
    for (int col = 0; col < 4; ++col) CHECK(schema.variableOfColumn(col) == 0);
    for (int col = 4; col < 11; ++col) CHECK(schema.variableOfColumn(col) == col - 3);
    for (int col = 11; col < 14; ++col) CHECK(schema.variableOfColumn(col) == 8);

    CHECK(schema.indexOf("Gra") == 3);
    CHECK(schema.indexOf("Weight") == -1);
    CHECK(schema.require("Race") == 8);
    CHECK_THROWS_WITH_AS(schema.require("Weight"), "unknown variable: Weight", ConfigError);
}

TEST_CASE("schema constructor rejects malformed layouts") {
    CHECK_THROWS_AS(Schema(std::vector<VariableSpec>{}), ConfigError);
    CHECK_THROWS_AS(Schema({{"A", VariableKind::Ordinal, 0, 5, 0},
                            {"A", VariableKind::Ordinal, 0, 5, 0}}),
                    ConfigError);
    CHECK_THROWS_AS(Schema({{"A", VariableKind::Ordinal, 7, 2, 0}}), ConfigError);
    CHECK_THROWS_AS(Schema({{"A", VariableKind::Binary, 0, 2, 0}}), ConfigError);
    // Two bits cannot address five categories.
    CHECK_THROWS_AS(Schema({{"A", VariableKind::Categorical, 0, 4, 2}}), ConfigError);
}

TEST_CASE("dataset cell accessors and row selection") {
    Dataset data = surveyFromRows({validRecord(), validRecord(), validRecord()});
    CHECK(data.rowCount() == 3);
    CHECK(data.isComplete());
    CHECK(data.missingCellCount() == 0);

    data.setMissing(1, 4);
    data.setMissing(1, 7);
    data.setMissing(2, 0);
    CHECK_FALSE(data.isComplete());
    CHECK(data.missingCellCount() == 3);
    CHECK(data.completeRows() == std::vector<int>{0});

    std::vector<int> picks{2, 0, 2};
    Dataset chosen = data.selectRows(picks);
    REQUIRE(chosen.rowCount() == 3);
    CHECK(chosen.missing(0, 0));
    CHECK_FALSE(chosen.missing(1, 0));
    CHECK(chosen.missing(2, 0));
    CHECK(chosen.value(1, 1) == validRecord()[1]);
}

TEST_CASE("ordinal encoding is min-max scaling with midpoint at the range centre") {
    Schema schema = Schema::survey();
    std::vector<double> row(static_cast<size_t>(schema.encodedWidth()), 0.0);
    int age = schema.require("Age");
    encodeValue(schema, age, 12, row);
    CHECK(row[4] == doctest::Approx(0.0));
    encodeValue(schema, age, 50, row);
    CHECK(row[4] == doctest::Approx(1.0));
    encodeValue(schema, age, 31, row);
    CHECK(row[4] == doctest::Approx(0.5).epsilon(1e-12));

    // Decoding rounds to the nearest admissible value and clamps.
    row[4] = 0.5;
    CHECK(decodeValue(schema, age, row) == 31);
    row[4] = 1.3;
    CHECK(decodeValue(schema, age, row) == 50);
    row[4] = -0.2;
    CHECK(decodeValue(schema, age, row) == 12);
    row[4] = 0.513;  // 12 + 0.513 * 38 = 31.494, rounds down
    CHECK(decodeValue(schema, age, row) == 31);
}

TEST_CASE("ordinal encoding round-trips every admissible value") {
    Schema schema = Schema::survey();
    std::vector<double> row(static_cast<size_t>(schema.encodedWidth()), 0.0);
    for (int v = 0; v < schema.variableCount(); ++v) {
        const VariableSpec& spec = schema.variable(v);
        if (spec.kind == VariableKind::Categorical) continue;
        for (int value = spec.lower; value <= spec.upper; ++value) {
            encodeValue(schema, v, value, row);
            CHECK(decodeValue(schema, v, row) == value);
        }
    }
}

TEST_CASE("categorical encoding writes the code bits most significant first") {
    Schema schema = Schema::survey();
    std::vector<double> row(static_cast<size_t>(schema.encodedWidth()), 0.0);
    int province = schema.require("Province");
    encodeValue(schema, province, 3, row);  // code 2 -> 0010
    CHECK(row[0] == 0.0);
    CHECK(row[1] == 0.0);
    CHECK(row[2] == 1.0);
    CHECK(row[3] == 0.0);
    encodeValue(schema, province, 9, row);  // code 8 -> 1000
    CHECK(row[0] == 1.0);
    CHECK(row[1] == 0.0);
    CHECK(row[2] == 0.0);
    CHECK(row[3] == 0.0);

    int race = schema.require("Race");
    encodeValue(schema, race, 5, row);  // code 5 -> 101
    CHECK(row[11] == 1.0);
    CHECK(row[12] == 0.0);
    CHECK(row[13] == 1.0);

    for (int value = 1; value <= 9; ++value) {
        encodeValue(schema, province, value, row);
        CHECK(decodeValue(schema, province, row) == value);
    }
    for (int value = 0; value <= 5; ++value) {
        encodeValue(schema, race, value, row);
        CHECK(decodeValue(schema, race, row) == value);
    }
}

TEST_CASE("categorical decoding snaps to the nearest declared code") {
    Schema schema = Schema::survey();
    std::vector<double> row(static_cast<size_t>(schema.encodedWidth()), 0.0);
    int province = schema.require("Province");

    // All-zero bits are exactly code 0.
    CHECK(decodeValue(schema, province, row) == 1);

    // A noisy pattern near code 2 still lands on province 3.
    row[0] = 0.1;
    row[1] = 0.2;
    row[2] = 0.8;
    row[3] = 0.3;
    CHECK(decodeValue(schema, province, row) == 3);

    // Equidistant between codes 0 and 1 (last bit exactly half): the tie goes
    // to the smaller category.
    row[0] = row[1] = row[2] = 0.0;
    row[3] = 0.5;
    CHECK(decodeValue(schema, province, row) == 1);

    // Codes 9..15 are undeclared: the all-ones pattern maps to the nearest
    // admissible code, not to a phantom tenth province.
    row[0] = row[1] = row[2] = row[3] = 1.0;
    int decoded = decodeValue(schema, province, row);
    CHECK(decoded >= 1);
    CHECK(decoded <= 9);
}

TEST_CASE("encodeDataset propagates missingness and decodeMatrix restores the table") {
    Dataset data = surveyFromRows({validRecord(), validRecord()});
    data.setMissing(0, 0);  // Province: four encoded columns
    data.setMissing(1, 5);  // FathAge: one column

    EncodedMatrix encoded = encodeDataset(data);
    CHECK(encoded.rows == 2);
    CHECK(encoded.width == 14);
    for (int col = 0; col < 4; ++col) CHECK(encoded.missingAt(0, col));
    for (int col = 4; col < 14; ++col) CHECK_FALSE(encoded.missingAt(0, col));
    CHECK(encoded.missingAt(1, 8));
    CHECK_FALSE(encoded.missingAt(1, 9));

    Dataset back = decodeMatrix(encoded);
    CHECK(sameContents(back, data));
}

TEST_CASE("encodeDataset rejects values outside the declared range") {
    Dataset data = surveyFromRows({validRecord()});
    data.set(0, 1, 51);
    CHECK_THROWS_WITH_AS(encodeDataset(data),
                         "row 0: Age=51 outside declared range [12,50]", DataError);
}

TEST_CASE("record validation names the most specific rule per cell") {
    // validRecord() is {Province 3, Age 25, Edu 8, Gra 2, Par 1, FathAge 30,
    // HIV 0, RPR 0, Race 2} and passes clean.
    CHECK(validateOne(validRecord()).empty());

    auto withCell = [](int var, int value) {
        std::array<int, 9> record = validRecord();
        record[static_cast<size_t>(var)] = value;
        return record;
    };

    auto negative = validateOne(withCell(2, -1));
    REQUIRE(negative.size() == 1);
    CHECK(negative[0].rule == "negative");
    CHECK(negative[0].variables == std::vector<int>{2});

    auto educationMax = validateOne(withCell(2, 14));
    REQUIRE(educationMax.size() == 1);
    CHECK(educationMax[0].rule == "education-max");

    CHECK(validateOne(withCell(1, 51))[0].rule == "age-range");
    CHECK(validateOne(withCell(1, 10))[0].rule == "age-range");
    CHECK(validateOne(withCell(5, 12))[0].rule == "father-age");
    CHECK(validateOne(withCell(5, 5))[0].rule == "father-age");
    CHECK(validateOne(withCell(0, 0))[0].rule == "range");
    CHECK(validateOne(withCell(8, 6))[0].rule == "range");

    // Gravidity below parity implicates both cells.
    std::array<int, 9> swapped = validRecord();
    swapped[3] = 1;
    swapped[4] = 4;
    auto gravidity = validateOne(swapped);
    REQUIRE(gravidity.size() == 1);
    CHECK(gravidity[0].rule == "gravidity-parity");
    CHECK(gravidity[0].variables == std::vector<int>{3, 4});
}

TEST_CASE("rules never fire on missing cells") {
    Dataset data = surveyFromRows({validRecord()});
    data.setMissing(0, 1);
    data.setMissing(0, 3);  // gravidity unknown: the parity comparison is moot
    CHECK(validateRecord(data, 0).empty());
}

TEST_CASE("cleaning flags violating cells as missing and counts distinct cells") {
    std::array<int, 9> badEdu = validRecord();
    badEdu[2] = -1;
    std::array<int, 9> badPair = validRecord();
    badPair[3] = 1;
    badPair[4] = 3;
    // Gravidity out of range *and* below parity: two violations, two distinct
    // cells, one row.
    std::array<int, 9> overlap = validRecord();
    overlap[3] = 0;
    overlap[4] = 2;

    Dataset data = surveyFromRows({validRecord(), badEdu, badPair, overlap});
    CleaningSummary summary;
    Dataset cleaned = cleanDataset(data, summary);

    CHECK(summary.rowsAffected == 3);
    CHECK(summary.cellsFlagged == 1 + 2 + 2);
    CHECK(cleaned.rowCount() == 4);

    CHECK(cleaned.missing(1, 2));
    CHECK_FALSE(cleaned.missing(1, 1));
    CHECK(cleaned.value(1, 1) == validRecord()[1]);

    CHECK(cleaned.missing(2, 3));
    CHECK(cleaned.missing(2, 4));
    CHECK(cleaned.missing(3, 3));
    CHECK(cleaned.missing(3, 4));

    for (int v = 0; v < 9; ++v) CHECK_FALSE(cleaned.missing(0, v));

    // Cleaning is a fixpoint: a second pass changes nothing.
    CleaningSummary again;
    Dataset twice = cleanDataset(cleaned, again);
    CHECK(again.cellsFlagged == 0);
    CHECK(again.rowsAffected == 0);
    CHECK(sameContents(twice, cleaned));
}

TEST_CASE("rule name constants cover all six rules") {
    std::array<int, 9> mess = validRecord();
    mess[1] = 51;   // age out of range
    mess[2] = 14;   // education above maximum
    mess[5] = -2;   // negative father's age
    mess[8] = 9;    // race code out of range
    auto names = ruleNames(validateOne(mess));
    CHECK(names == std::vector<std::string>{"age-range", "education-max", "negative",
                                            "range"});
}

TEST_CASE("MCAR injection removes roughly the requested fraction of target cells") {
    std::vector<std::array<int, 9>> rows(400, validRecord());
    Dataset data = surveyFromRows(rows);

    MissingnessPlan plan;
    plan.mechanism = MissingnessMechanism::MCAR;
    plan.targetVariables = {"Age"};
    plan.rate = 0.3;

    int64_t removed = -1;
    Dataset injected = injectMissing(data, plan, 17, &removed);
    CHECK(removed == injected.missingCellCount());
    // 400 Bernoulli(0.3) draws: [80, 160] is > 7 sigma around the mean of 120.
    CHECK(removed >= 80);
    CHECK(removed <= 160);

    int ageVar = data.schema().require("Age");
    for (int r = 0; r < injected.rowCount(); ++r)
        for (int v = 0; v < injected.variableCount(); ++v)
            if (injected.missing(r, v)) CHECK(v == ageVar);

    // Determinism in the seed.
    int64_t removedAgain = -1;
    Dataset repeat = injectMissing(data, plan, 17, &removedAgain);
    CHECK(removedAgain == removed);
    CHECK(sameContents(repeat, injected));
}

TEST_CASE("injection skips cells that are already missing") {
    std::vector<std::array<int, 9>> rows(100, validRecord());
    Dataset data = surveyFromRows(rows);
    for (int r = 0; r < 50; ++r) data.setMissing(r, 1);

    MissingnessPlan plan;
    plan.targetVariables = {"Age"};
    plan.rate = 0.4;
    int64_t removed = 0;
    Dataset injected = injectMissing(data, plan, 3, &removed);
    CHECK(removed <= 50);  // only the observed half is eligible
    CHECK(injected.missingCellCount() == 50 + removed);
}

TEST_CASE("MAR injection concentrates missingness where the driver is large") {
    std::vector<std::array<int, 9>> rows;
    for (int i = 0; i < 2000; ++i) {
        std::array<int, 9> record = validRecord();
        record[2] = i % 14;  // education sweeps its full range
        rows.push_back(record);
    }
    Dataset data = surveyFromRows(rows);

    MissingnessPlan plan;
    plan.mechanism = MissingnessMechanism::MAR;
    plan.targetVariables = {"Age"};
    plan.rate = 0.3;
    plan.marDriver = "Edu";

    Dataset injected = injectMissing(data, plan, 11);
    int ageVar = data.schema().require("Age");
    int lowMissing = 0;
    int highMissing = 0;
    for (int r = 0; r < injected.rowCount(); ++r) {
        if (!injected.missing(r, ageVar)) continue;
        if (data.value(r, 2) <= 6) ++lowMissing;
        else ++highMissing;
    }
    CHECK(highMissing > lowMissing);
    CHECK(lowMissing + highMissing > 0);
}

TEST_CASE("injection plans are validated before any cell is touched") {
    Dataset data = surveyFromRows({validRecord(), validRecord()});
    MissingnessPlan plan;
    plan.targetVariables = {"Age"};

    plan.rate = 0.0;
    CHECK_THROWS_WITH_AS(injectMissing(data, plan, 1),
                         "missingness rate must lie strictly between 0 and 1", ConfigError);
    plan.rate = 1.0;
    CHECK_THROWS_AS(injectMissing(data, plan, 1), ConfigError);

    plan.rate = 0.2;
    plan.targetVariables = {};
    CHECK_THROWS_WITH_AS(injectMissing(data, plan, 1), "missingness plan needs target variables",
                         ConfigError);

    plan.targetVariables = {"Age"};
    plan.mechanism = MissingnessMechanism::MAR;
    plan.marDriver = "";
    CHECK_THROWS_WITH_AS(injectMissing(data, plan, 1), "MAR plan needs a driver variable",
                         ConfigError);

    plan.marDriver = "Age";
    CHECK_THROWS_WITH_AS(injectMissing(data, plan, 1), "MAR driver cannot be a target variable",
                         ConfigError);

    plan.mechanism = MissingnessMechanism::MCAR;
    plan.targetVariables = {"Weight"};
    CHECK_THROWS_AS(injectMissing(data, plan, 1), ConfigError);
}

TEST_CASE("splitting 103 rows into quarters follows the largest-remainder rule") {
    std::vector<std::array<int, 9>> rows;
    for (int i = 0; i < 103; ++i) {
        std::array<int, 9> record = validRecord();
        record[1] = 12 + i % 39;  // make rows distinguishable
        record[5] = 13 + i % 60;
        rows.push_back(record);
    }
    Dataset data = surveyFromRows(rows);

    FourWaySplit split = splitDataset(data, SplitFractions{}, 29);
    CHECK(split.train.rowCount() == 26);
    CHECK(split.validation.rowCount() == 26);
    CHECK(split.test.rowCount() == 26);
    CHECK(split.experiment.rowCount() == 25);

    // The four parts form a partition of the input rows.
    std::vector<std::vector<int>> combined;
    for (const Dataset* part : {&split.train, &split.validation, &split.test, &split.experiment})
        for (const auto& row : rowMultiset(*part)) combined.push_back(row);
    std::sort(combined.begin(), combined.end());
    CHECK(combined == rowMultiset(data));

    FourWaySplit again = splitDataset(data, SplitFractions{}, 29);
    CHECK(sameContents(again.train, split.train));
    CHECK(sameContents(again.experiment, split.experiment));

    FourWaySplit other = splitDataset(data, SplitFractions{}, 30);
    CHECK_FALSE(sameContents(other.train, split.train));
}

TEST_CASE("split fractions are validated and zero fractions give empty parts") {
    Dataset data = surveyFromRows({validRecord(), validRecord(), validRecord()});

    SplitFractions negative{-0.25, 0.5, 0.5, 0.25};
    CHECK_THROWS_WITH_AS(splitDataset(data, negative, 1), "split fractions must be non-negative",
                         ConfigError);

    SplitFractions lopsided{0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_WITH_AS(splitDataset(data, lopsided, 1), "split fractions must sum to 1",
                         ConfigError);

    // Four positive fractions need at least four rows.
    CHECK_THROWS_WITH_AS(splitDataset(data, SplitFractions{}, 1),
                         "fewer rows than requested partitions", DataError);

    SplitFractions halves{0.5, 0.5, 0.0, 0.0};
    FourWaySplit split = splitDataset(data, halves, 1);
    CHECK(split.train.rowCount() == 2);
    CHECK(split.validation.rowCount() == 1);
    CHECK(split.test.rowCount() == 0);
    CHECK(split.experiment.rowCount() == 0);
}

TEST_CASE("CSV round trip preserves values and NA cells") {
    testutil::TempDir dir;
    std::array<int, 9> second = validRecord();
    second[1] = 44;
    Dataset data = surveyFromRows({validRecord(), second});
    data.setMissing(0, 2);
    data.setMissing(1, 0);

    std::string path = dir.path("table.csv");
    writeCsv(data, path);
    Dataset back = readCsv(path, data.schema());
    CHECK(sameContents(back, data));

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "Province,Age,Edu,Gra,Par,FathAge,HIV,RPR,Race");
    std::string firstRow;
    std::getline(in, firstRow);
    CHECK(firstRow == "3,25,NA,2,1,30,0,0,2");
}

TEST_CASE("CSV reader reports malformed input with the offending location") {
    testutil::TempDir dir;
    Schema schema = Schema::survey();

    CHECK_THROWS_AS(readCsv(dir.path("absent.csv"), schema), IoError);

    std::string empty = dir.path("empty.csv");
    std::ofstream(empty).close();
    CHECK_THROWS_WITH_AS(readCsv(empty, schema),
                         doctest::Contains("empty file, header expected"), DataError);

    std::string wrongHeader = dir.path("wrong.csv");
    std::ofstream(wrongHeader) << "Province,Age\n1,20\n";
    CHECK_THROWS_WITH_AS(readCsv(wrongHeader, schema),
                         doctest::Contains("header does not match schema"), DataError);

    std::string badInt = dir.path("badint.csv");
    std::ofstream(badInt) << "Province,Age,Edu,Gra,Par,FathAge,HIV,RPR,Race\n"
                          << "3,twenty,8,2,1,30,0,0,2\n";
    CHECK_THROWS_WITH_AS(readCsv(badInt, schema),
                         doctest::Contains("line 2: cannot parse 'twenty' as integer"), DataError);

    std::string shortRow = dir.path("short.csv");
    std::ofstream(shortRow) << "Province,Age,Edu,Gra,Par,FathAge,HIV,RPR,Race\n"
                            << "3,25,8,2,1,30,0,0\n";
    CHECK_THROWS_WITH_AS(readCsv(shortRow, schema),
                         doctest::Contains("expected 9 fields, got 8"), DataError);
}

TEST_CASE("CSV reader skips blank lines") {
    testutil::TempDir dir;
    std::string path = dir.path("blanks.csv");
    std::ofstream(path) << "Province,Age,Edu,Gra,Par,FathAge,HIV,RPR,Race\n"
                        << "3,25,8,2,1,30,0,0,2\n"
                        << "\n"
                        << "4,NA,9,3,2,31,1,0,1\n";
    Dataset data = readCsv(path, Schema::survey());
    REQUIRE(data.rowCount() == 2);
    CHECK(data.value(0, 0) == 3);
    CHECK(data.missing(1, 1));
    CHECK(data.value(1, 6) == 1);
}

TEST_CASE("schema serialization round-trips and keeps code widths") {
    Schema schema = Schema::survey();
    nlohmann::json doc = schemaToJson(schema);
    Schema back = schemaFromJson(doc);
    CHECK(back == schema);

    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 9);
    const nlohmann::json& province = doc[0];
    CHECK(province["name"] == "Province");
    CHECK(province["kind"] == "categorical");
    CHECK(province["code_width"] == 4);
    const nlohmann::json& age = doc[1];
    CHECK(age["kind"] == "ordinal");
    CHECK_FALSE(age.contains("code_width"));
}

TEST_CASE("missingness plan serialization round-trips both mechanisms") {
    MissingnessPlan mcar;
    mcar.targetVariables = {"Age", "Edu"};
    mcar.rate = 0.25;
    nlohmann::json doc = missingnessPlanToJson(mcar);
    CHECK(doc["mechanism"] == "mcar");
    CHECK(doc["variables"] == nlohmann::json::array({"Age", "Edu"}));
    CHECK(doc["rate"] == doctest::Approx(0.25));
    CHECK_FALSE(doc.contains("driver"));
    MissingnessPlan backMcar = missingnessPlanFromJson(doc);
    CHECK(backMcar.mechanism == MissingnessMechanism::MCAR);
    CHECK(backMcar.targetVariables == mcar.targetVariables);
    CHECK(backMcar.rate == doctest::Approx(0.25));

    MissingnessPlan mar;
    mar.mechanism = MissingnessMechanism::MAR;
    mar.targetVariables = {"Age"};
    mar.rate = 0.1;
    mar.marDriver = "Edu";
    nlohmann::json marDoc = missingnessPlanToJson(mar);
    CHECK(marDoc["mechanism"] == "mar");
    CHECK(marDoc["driver"] == "Edu");
    MissingnessPlan backMar = missingnessPlanFromJson(marDoc);
    CHECK(backMar.mechanism == MissingnessMechanism::MAR);
    CHECK(backMar.marDriver == "Edu");

    nlohmann::json bogus{{"mechanism", "mnar"}, {"variables", {"Age"}}, {"rate", 0.1}};
    CHECK_THROWS_WITH_AS(missingnessPlanFromJson(bogus),
                         "unknown missingness mechanism: mnar", ConfigError);

    nlohmann::json driverless{{"mechanism", "mar"}, {"variables", {"Age"}}, {"rate", 0.1}};
    CHECK_THROWS_WITH_AS(missingnessPlanFromJson(driverless), "a MAR plan needs a driver variable",
                         ConfigError);
}
