#ifndef MDIMPUTE_TESTS_TESTHELPERS_H
#define MDIMPUTE_TESTS_TESTHELPERS_H

#include <array>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "Dataset.h"

namespace testutil {

// Scratch directory unique to this process and call, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        auto tick = std::chrono::steady_clock::now().time_since_epoch().count();
        base_ = std::filesystem::temp_directory_path() /
                ("mdimpute-test-" + std::to_string(tick) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(base_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(base_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string path(const std::string& name) const { return (base_ / name).string(); }
    const std::filesystem::path& root() const { return base_; }

private:
    std::filesystem::path base_;
};

// Values in survey schema order: Province, Age, Edu, Gra, Par, FathAge, HIV,
// RPR, Race. A value of -9999 marks the cell missing.
constexpr int kMissingCell = -9999;

inline mdi::Dataset surveyFromRows(const std::vector<std::array<int, 9>>& rows) {
    mdi::Dataset data(mdi::Schema::survey(), static_cast<int>(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        for (int v = 0; v < 9; ++v) {
            int value = rows[r][static_cast<size_t>(v)];
            if (value == kMissingCell) {
                data.setMissing(static_cast<int>(r), v);
            } else {
                data.set(static_cast<int>(r), v, value);
            }
        }
    }
    return data;
}

// One rule-abiding record to copy and perturb.
inline std::array<int, 9> validRecord() { return {3, 25, 8, 2, 1, 30, 0, 0, 2}; }

}  // namespace testutil

#endif
