#include <bsynth/data.hpp>

#include <bsynth/error.hpp>
#include <bsynth/rng.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bsynth {

Dataset::Dataset(std::vector<std::string> columns, Eigen::MatrixXd values)
    : columns_(std::move(columns)), values_(std::move(values)) {
    if (values_.rows() == 0) throw DataError("no data rows");
    if (static_cast<std::size_t>(values_.cols()) != columns_.size()) {
        throw DataError("dataset arity mismatch: " + std::to_string(values_.cols()) +
                        " value columns for " + std::to_string(columns_.size()) + " names");
    }
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
    const auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns_.begin());
}

std::size_t Dataset::column_index(std::string_view name) const {
    if (auto idx = find_column(name)) return *idx;
    throw SchemaError("missing column '" + std::string(name) + "'");
}

double Dataset::at(std::size_t row, std::string_view column) const {
    return values_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(column_index(column)));
}

Eigen::VectorXd Dataset::column(std::string_view name) const {
    return values_.col(static_cast<Eigen::Index>(column_index(name)));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values_.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= this->rows()) throw ConfigError("subset: row index out of range");
        out.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(rows[i]));
    }
    return Dataset(columns_, std::move(out));
}

OzoneRecord ozone_record(const Dataset& data, std::size_t row) {
    OzoneRecord r;
    r.upo3 = static_cast<int>(data.at(row, "upo3"));
    r.vdht = data.at(row, "vdht");
    r.wdsp = data.at(row, "wdsp");
    r.hmdt = data.at(row, "hmdt");
    r.sbtp = data.at(row, "sbtp");
    r.ibht = data.at(row, "ibht");
    r.dgpg = data.at(row, "dgpg");
    r.ibtp = data.at(row, "ibtp");
    r.vsty = data.at(row, "vsty");
    r.day = static_cast<int>(data.at(row, "day"));
    return r;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::string_view unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

RawTable read_raw(std::istream& in) {
    RawTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        std::string_view view = trim(line);
        if (!have_header) {
            // Tolerate a UTF-8 byte-order mark.
            if (view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
            if (view.empty()) continue;
            for (auto f : split_fields(view)) t.header.emplace_back(unquote(f));
            have_header = true;
            continue;
        }
        if (view.empty()) continue;
        std::vector<std::string> fields;
        for (auto f : split_fields(view)) fields.emplace_back(unquote(f));
        t.rows.push_back(std::move(fields));
    }
    if (!have_header) throw DataError("empty file: no header row");
    if (t.rows.empty()) throw DataError("no data rows");
    return t;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    if (cell.empty() || cell == "NA") {
        throw ValidationError(row, "missing value in column '" + column + "'");
    }
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ValidationError(row, "non-numeric value '" + cell + "' in column '" + column + "'");
    }
    return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file '" + path.string() + "'");
    return in;
}

}  // namespace

Dataset parse_ozone_csv(std::istream& in) {
    const RawTable raw = read_raw(in);
    std::array<std::size_t, kOzoneColumns.size()> source{};
    for (std::size_t c = 0; c < kOzoneColumns.size(); ++c) {
        const auto it = std::find(raw.header.begin(), raw.header.end(), kOzoneColumns[c]);
        if (it == raw.header.end()) {
            throw SchemaError("missing column '" + std::string(kOzoneColumns[c]) + "'");
        }
        source[c] = static_cast<std::size_t>(it - raw.header.begin());
    }

    Eigen::MatrixXd values(static_cast<Eigen::Index>(raw.rows.size()),
                           static_cast<Eigen::Index>(kOzoneColumns.size()));
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        const std::size_t row_no = r + 1;
        const auto& fields = raw.rows[r];
        if (fields.size() != raw.header.size()) {
            throw ValidationError(row_no, "expected " + std::to_string(raw.header.size()) +
                                              " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < kOzoneColumns.size(); ++c) {
            const std::string column(kOzoneColumns[c]);
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_cell(fields[source[c]], row_no, column);
        }
        const double upo3 = values(static_cast<Eigen::Index>(r), 0);
        if (upo3 != std::floor(upo3) || upo3 < 1.0) {
            throw ValidationError(row_no, "upo3 must be a positive integer, got " + fields[source[0]]);
        }
        const double day = values(static_cast<Eigen::Index>(r), 9);
        if (day != std::floor(day) || day < 1.0 || day > 366.0) {
            throw ValidationError(row_no, "day must be an integer in [1, 366], got " + fields[source[9]]);
        }
    }
    return Dataset(std::vector<std::string>(kOzoneColumns.begin(), kOzoneColumns.end()),
                   std::move(values));
}

Dataset load_ozone_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_ozone_csv(in);
}

Dataset parse_numeric_csv(std::istream& in) {
    const RawTable raw = read_raw(in);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(raw.rows.size()),
                           static_cast<Eigen::Index>(raw.header.size()));
    for (std::size_t r = 0; r < raw.rows.size(); ++r) {
        if (raw.rows[r].size() != raw.header.size()) {
            throw ValidationError(r + 1, "expected " + std::to_string(raw.header.size()) +
                                             " fields, found " + std::to_string(raw.rows[r].size()));
        }
        for (std::size_t c = 0; c < raw.header.size(); ++c) {
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_cell(raw.rows[r][c], r + 1, raw.header[c]);
        }
    }
    return Dataset(raw.header, std::move(values));
}

Dataset load_numeric_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_numeric_csv(in);
}

void write_csv(const Dataset& data, std::ostream& out) {
    const auto& cols = data.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    std::ostringstream cell;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            cell.str("");
            cell << std::setprecision(17) << data(r, c);
            out << (c ? "," : "") << cell.str();
        }
        out << '\n';
    }
}

Dataset synthetic_ozone(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ConfigError("synthetic_ozone: n must be positive");
    Rng rng(derive_seed(seed, "synthetic-ozone"));
    Eigen::MatrixXd v(static_cast<Eigen::Index>(n), 10);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double day = 1.0 + std::floor(static_cast<double>(i) * 366.0 / static_cast<double>(n));
        const double summer = std::cos(two_pi * (day - 200.0) / 366.0);
        const double sbtp = std::round(60.0 + 18.0 * summer + 6.0 * rng.normal());
        const double vdht = std::round(5750.0 + 60.0 * summer + 2.0 * (sbtp - 60.0) + 40.0 * rng.normal());
        const double wdsp = std::max(0.0, std::round(5.0 + 2.0 * rng.normal()));
        const double hmdt = std::clamp(std::round(50.0 + 15.0 * summer + 15.0 * rng.normal()), 10.0, 95.0);
        double ibht = std::exp(std::log(2000.0) - 0.5 * summer + 0.6 * rng.normal());
        ibht = std::clamp(std::round(ibht), 111.0, 5000.0);
        const double dgpg = std::round(20.0 + 30.0 * rng.normal());
        const double ibtp = std::round(35.0 + 0.8 * sbtp + 8.0 * rng.normal());
        const double vsty = std::clamp(std::round(150.0 - 40.0 * summer + 70.0 * rng.normal()), 0.0, 350.0);
        const double log_ozone = 2.2 + 0.045 * (sbtp - 60.0) - 0.00015 * (ibht - 2000.0) -
                                 0.002 * (vsty - 150.0) + 0.004 * (hmdt - 50.0) +
                                 0.15 * std::sin(two_pi * (day - 100.0) / 366.0) +
                                 (ibht == 5000.0 ? 0.1 : 0.0) + 0.33 * rng.normal();
        const double upo3 = std::max(1.0, std::round(std::exp(log_ozone)));
        v.row(r) << upo3, vdht, wdsp, hmdt, sbtp, ibht, dgpg, ibtp, vsty, day;
    }
    return Dataset(std::vector<std::string>(kOzoneColumns.begin(), kOzoneColumns.end()), std::move(v));
}

void SplitAssignment::validate() const {
    if (k < 2) throw ConfigError("split: k must be at least 2");
    if (parts.size() != k) throw ConfigError("split: expected " + std::to_string(k) + " parts");
    std::vector<char> seen(n_rows, 0);
    std::size_t total = 0;
    for (const auto& part : parts) {
        for (auto idx : part) {
            if (idx >= n_rows) throw ConfigError("split: row index out of range");
            if (seen[idx]) throw ConfigError("split: row " + std::to_string(idx) + " assigned twice");
            seen[idx] = 1;
            ++total;
        }
    }
    if (total != n_rows) throw ConfigError("split: parts do not cover all rows");
}

SplitAssignment split_random(std::size_t n_rows, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("split: k must be at least 2");
    if (k > n_rows) {
        throw ConfigError("split: k = " + std::to_string(k) + " exceeds row count " + std::to_string(n_rows));
    }
    std::vector<std::size_t> order(n_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span(order));

    SplitAssignment s;
    s.k = k;
    s.n_rows = n_rows;
    s.seed = seed;
    s.parts.resize(k);
    const std::size_t base = n_rows / k;
    const std::size_t extra = n_rows % k;
    std::size_t cursor = 0;
    for (std::size_t p = 0; p < k; ++p) {
        const std::size_t size = base + (p < extra ? 1 : 0);
        s.parts[p].assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                          order.begin() + static_cast<std::ptrdiff_t>(cursor + size));
        std::sort(s.parts[p].begin(), s.parts[p].end());
        cursor += size;
    }
    return s;
}

SplitAssignment split_random(const Dataset& data, std::size_t k, std::uint64_t seed) {
    return split_random(data.rows(), k, seed);
}

SplitAssignment split_stratified(const Dataset& data, std::size_t k, std::uint64_t seed,
                                 std::string_view stratum) {
    if (k < 2) throw ConfigError("split: k must be at least 2");
    const std::size_t col = data.column_index(stratum);

    std::map<double, std::vector<std::size_t>> levels;
    for (std::size_t r = 0; r < data.rows(); ++r) levels[data(r, col)].push_back(r);

    SplitAssignment s;
    s.k = k;
    s.n_rows = data.rows();
    s.seed = seed;
    s.parts.resize(k);
    Rng rng(seed);
    // Deal each shuffled level round-robin; the cursor carries across levels so
    // that remainders land on different parts and total sizes stay balanced.
    std::size_t cursor = 0;
    for (auto& [level, rows] : levels) {
        rng.shuffle(std::span(rows));
        for (auto r : rows) {
            s.parts[cursor].push_back(r);
            cursor = (cursor + 1) % k;
        }
    }
    for (auto& part : s.parts) std::sort(part.begin(), part.end());
    return s;
}

std::vector<std::size_t> BatchSchedule::flattened() const {
    std::vector<std::size_t> out;
    for (const auto& b : batches) out.insert(out.end(), b.begin(), b.end());
    return out;
}

BatchSchedule batch_partition(std::span<const std::size_t> part, std::size_t batch_size,
                              std::uint64_t seed) {
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (batch_size > part.size()) {
        throw ConfigError("batch size " + std::to_string(batch_size) + " exceeds part size " +
                          std::to_string(part.size()));
    }
    std::vector<std::size_t> order(part.begin(), part.end());
    Rng rng(seed);
    rng.shuffle(std::span(order));

    BatchSchedule b;
    b.batch_size = batch_size;
    b.seed = seed;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        b.batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                               order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return b;
}

void to_json(nlohmann::json& j, const SplitAssignment& s) {
    j = nlohmann::json{{"k", s.k}, {"n_rows", s.n_rows}, {"seed", s.seed}, {"parts", s.parts}};
}

void from_json(const nlohmann::json& j, SplitAssignment& s) {
    j.at("k").get_to(s.k);
    j.at("n_rows").get_to(s.n_rows);
    j.at("seed").get_to(s.seed);
    j.at("parts").get_to(s.parts);
    s.validate();
}

void to_json(nlohmann::json& j, const BatchSchedule& b) {
    j = nlohmann::json{{"batch_size", b.batch_size}, {"seed", b.seed}, {"batches", b.batches}};
}

void from_json(const nlohmann::json& j, BatchSchedule& b) {
    j.at("batch_size").get_to(b.batch_size);
    j.at("seed").get_to(b.seed);
    j.at("batches").get_to(b.batches);
}

}  // namespace bsynth
