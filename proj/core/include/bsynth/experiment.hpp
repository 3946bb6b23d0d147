#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include <bsynth/analysts.hpp>
#include <bsynth/data.hpp>
#include <bsynth/methods.hpp>
#include <bsynth/synthesis.hpp>

namespace bsynth {

enum class Protocol { once, ten_by_ten };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& name);

inline const std::string kMeanHuman = "mean_human";
inline const std::string kBayesSynthesis = "bayesian_synthesis";
inline const std::string kConvexSynthesis = "convex_synthesis";

struct ExperimentPlan {
    SplitAssignment split;
    /// 0-based test split indices; empty means every split.
    std::vector<std::size_t> test_splits;
    std::vector<Protocol> protocols{Protocol::once, Protocol::ten_by_ten};
    std::vector<SynthesisMode> synthesis_modes{SynthesisMode::bayesian, SynthesisMode::convex};
    std::size_t batch_size = 10;
    std::uint64_t seed = 0;
    bool baselines = true;
    /// Forward-selection candidates; empty means identity terms for every
    /// column except the response.
    std::vector<FeatureTransform> baseline_candidates;
    ResponseSpec response;
    /// Convex weights for the eligible analysts; default uniform.
    std::optional<std::vector<double>> convex_weights;

    /// Analyst program i is trained on split i.
    void validate(const Dataset& data, std::size_t n_programs) const;
    std::vector<std::size_t> selected_test_splits() const;
    std::vector<std::size_t> training_rows(std::size_t test) const;
    BatchSchedule schedule(std::size_t test) const;
};

/// Seeds derived from `seed`: the split uses derive_seed(seed, "split").
ExperimentPlan make_plan(const Dataset& data, std::size_t k, std::uint64_t seed);

/// The program as run inside an experiment: its seed mixed with the master.
AnalystProgram seeded_program(const AnalystProgram& program, std::uint64_t master_seed);

struct MetricRecord {
    std::string method;
    std::size_t split = 0;  // 1-based test split
    std::string protocol;
    std::string metric;
    double value = 0.0;

    friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

struct MethodResult {
    std::string method;
    bool bayesian = false;
    std::vector<std::size_t> rows;  // in prediction order
    std::vector<Forecast> forecasts;
    std::optional<WeightTrajectory> trajectory;
};

struct CellResult {
    std::size_t test_split = 0;  // 0-based
    Protocol protocol = Protocol::once;
    std::vector<MethodResult> methods;

    const MethodResult* find(const std::string& method) const;
};

struct TrajectoryRecord {
    std::string method;
    std::size_t split = 0;  // 1-based
    WeightTrajectory trajectory;
};

struct MetricsReport {
    std::vector<std::string> method_order;
    std::vector<std::size_t> splits;  // 1-based, all splits of the plan
    std::vector<MetricRecord> records;
    std::vector<TrajectoryRecord> trajectories;

    std::optional<double> value(const std::string& method, std::size_t split, const std::string& protocol,
                                const std::string& metric) const;
    void merge(const MetricsReport& other);
};

void to_json(nlohmann::json& j, const MetricRecord& r);
void from_json(const nlohmann::json& j, MetricRecord& r);
void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);
void to_json(nlohmann::json& j, const CellResult& c);

/// Forecast every test row with every method. Once: rows in ascending
/// order, nothing absorbed. Ten by ten: each batch of `schedule` is
/// forecast by every method, then absorbed by every method. Throws
/// ProvenanceError if a method has seen a row it is asked to forecast.
CellResult evaluate_cell(std::vector<std::unique_ptr<Method>>& methods, const Dataset& data,
                         std::span<const std::size_t> test_rows, Protocol protocol, const BatchSchedule* schedule,
                         std::size_t test_split);

/// Metric records for one method's forecasts.
std::vector<MetricRecord> method_metrics(const MethodResult& result, const Dataset& data, const ResponseSpec& response,
                                         std::size_t split_1based, Protocol protocol);

/// Per-metric arithmetic mean over the analysts' record sets, named mean_human.
std::vector<MetricRecord> mean_human_prediction_error(const std::vector<std::vector<MetricRecord>>& analyst_records);

struct ExperimentResult {
    MetricsReport report;
    std::vector<CellResult> cells;
};

/// Train each needed analyst on its split, then for every selected test
/// split and protocol evaluate the eligible analysts (brought up to the
/// common training data), the syntheses, and the baselines.
ExperimentResult run_experiment(const ExperimentPlan& plan, const std::vector<AnalystProgram>& programs,
                                const Dataset& data);

MetricsReport run_once(ExperimentPlan plan, const std::vector<AnalystProgram>& programs, const Dataset& data);
MetricsReport run_ten_by_ten(ExperimentPlan plan, const std::vector<AnalystProgram>& programs, const Dataset& data);

}  // namespace bsynth
