#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace bsynth {

/// Columns of the Los Angeles basin ozone data (330 daily records, 1976).
inline constexpr std::array<std::string_view, 10> kOzoneColumns = {
    "upo3", "vdht", "wdsp", "hmdt", "sbtp", "ibht", "dgpg", "ibtp", "vsty", "day"};

struct OzoneRecord {
    int upo3 = 0;   // max 1-hour average upland ozone, integer units
    double vdht = 0;  // Vandenberg 500 mb height (m)
    double wdsp = 0;  // wind speed (mph)
    double hmdt = 0;  // humidity
    double sbtp = 0;  // Sandburg air base temperature
    double ibht = 0;  // inversion base height (ft)
    double dgpg = 0;  // Daggett pressure gradient (mmHg)
    double ibtp = 0;  // inversion base temperature (F)
    double vsty = 0;  // visibility (miles)
    int day = 0;      // calendar day, 1..366
};

/// Rectangular numeric table with named columns. Immutable once built.
class Dataset {
public:
    Dataset(std::vector<std::string> columns, Eigen::MatrixXd values);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t cols() const noexcept { return columns_.size(); }
    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }

    std::optional<std::size_t> find_column(std::string_view name) const;
    /// Throws SchemaError naming the column when absent.
    std::size_t column_index(std::string_view name) const;

    double operator()(std::size_t row, std::size_t col) const { return values_(row, col); }
    double at(std::size_t row, std::string_view column) const;

    Eigen::VectorXd column(std::string_view name) const;
    Dataset subset(std::span<const std::size_t> rows) const;

private:
    std::vector<std::string> columns_;
    Eigen::MatrixXd values_;
};

OzoneRecord ozone_record(const Dataset& data, std::size_t row);

/// Parse and validate the ozone CSV. Columns are matched by header name
/// (case-sensitive, any order); extra columns are dropped. The result has
/// the columns in kOzoneColumns order.
Dataset parse_ozone_csv(std::istream& in);
Dataset load_ozone_csv(const std::filesystem::path& path);

/// Generic numeric CSV: every column is kept and must be numeric.
Dataset parse_numeric_csv(std::istream& in);
Dataset load_numeric_csv(const std::filesystem::path& path);

void write_csv(const Dataset& data, std::ostream& out);

/// Synthetic data with the ozone schema, for exercising the pipeline when
/// the real file is unavailable. Not a substitute for the real data.
Dataset synthetic_ozone(std::size_t n, std::uint64_t seed);

struct SplitAssignment {
    std::size_t k = 0;
    std::size_t n_rows = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::size_t>> parts;  // each sorted ascending

    /// Disjointness, coverage and k >= 2.
    void validate() const;
};

SplitAssignment split_random(std::size_t n_rows, std::size_t k, std::uint64_t seed);
SplitAssignment split_random(const Dataset& data, std::size_t k, std::uint64_t seed);

/// Within every level of `stratum` the parts receive counts differing by at
/// most one; overall part sizes also differ by at most one.
SplitAssignment split_stratified(const Dataset& data, std::size_t k, std::uint64_t seed,
                                 std::string_view stratum);

struct BatchSchedule {
    std::size_t batch_size = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::size_t>> batches;

    std::vector<std::size_t> flattened() const;
};

/// Random order of `part`, cut into consecutive batches of `batch_size`; the
/// last batch holds the remainder.
BatchSchedule batch_partition(std::span<const std::size_t> part, std::size_t batch_size,
                              std::uint64_t seed);

void to_json(nlohmann::json& j, const SplitAssignment& s);
void from_json(const nlohmann::json& j, SplitAssignment& s);
void to_json(nlohmann::json& j, const BatchSchedule& b);
void from_json(const nlohmann::json& j, BatchSchedule& b);

}  // namespace bsynth
