#include <doctest.h>

#include <bsynth/report.hpp>

#include <sstream>
#include <string>
#include <vector>

using namespace bsynth;

namespace {

MetricsReport sample() {
    MetricsReport r;
    r.method_order = {"analyst_1", "analyst_2", kMeanHuman, kBayesSynthesis, kConvexSynthesis, "aic"};
    r.splits = {1, 2};
    const auto add = [&](const std::string& m, std::size_t s, const std::string& p, const std::string& k, double v) {
        r.records.push_back({m, s, p, k, v});
    };
    for (const char* p : {"once", "ten_by_ten"}) {
        add("analyst_1", 2, p, "sse_log", 12.0);
        add("analyst_2", 1, p, "sse_log", 16.0);
        add("analyst_2", 2, p, "sse_log", 10.5);
        add(kMeanHuman, 1, p, "sse_log", 16.0);
        add(kMeanHuman, 2, p, "sse_log", 11.25);
        add(kBayesSynthesis, 1, p, "classification_errors", 3);
        add(kBayesSynthesis, 2, p, "classification_errors", 4);
        add(kMeanHuman, 1, p, "classification_errors", 2.5);
        add(kMeanHuman, 2, p, "classification_errors", 3);
        add("analyst_1", 2, p, "classification_errors", 6);
        add("aic", 1, p, "sse_log", 9.876);
    }
    for (std::size_t s : {1, 2}) {
        add(kBayesSynthesis, s, "once", "avg_pred_var", 0.1 * s);
        add(kBayesSynthesis, s, "once", "mse_log_per_case", 0.09 * s);
        add(kBayesSynthesis, s, "once", "coverage_pct", 90.0);
        add(kConvexSynthesis, s, "once", "avg_pred_var", 0.1 * s);
        add(kConvexSynthesis, s, "once", "mse_log_per_case", 0.09 * s);
        add(kConvexSynthesis, s, "once", "coverage_pct", 90.0);
    }
    return r;
}

std::string line_starting(const std::string& text, const std::string& prefix) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) == 0) return line;
    }
    return {};
}

std::vector<std::string> fields(const std::string& line, std::size_t skip_words) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    REQUIRE(out.size() >= skip_words);
    out.erase(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(skip_words));
    return out;
}

}  // namespace

TEST_CASE("display names") {
    CHECK(display_name("analyst_1") == "ANALYST 1");
    CHECK(display_name("analyst2") == "ANALYST 2");
    CHECK(display_name(kMeanHuman) == "MN. HMN. PR. ERR.");
    CHECK(display_name(kBayesSynthesis) == "BAYES SYNTH.");
    CHECK(display_name("aic") == "AIC");
}

TEST_CASE("sse table lays out splits by protocol") {
    const std::string t = render_sse_table(sample());
    CHECK(t.find("Data set 1") != std::string::npos);
    CHECK(t.find("10/10") != std::string::npos);
    CHECK(fields(line_starting(t, "ANALYST 1"), 2) == std::vector<std::string>{"--", "--", "12.00", "12.00"});
    CHECK(fields(line_starting(t, "MN. HMN. PR. ERR."), 4) == std::vector<std::string>{"16.00", "16.00", "11.25", "11.25"});
    CHECK(fields(line_starting(t, "AIC"), 1) == std::vector<std::string>{"9.88", "9.88", "--", "--"});
}

TEST_CASE("classification table totals over splits") {
    const std::string t = render_classification_table(sample());
    CHECK(fields(line_starting(t, "BAYES SYNTH."), 2) == std::vector<std::string>{"3", "3", "4", "4", "7", "7"});
    CHECK(fields(line_starting(t, "MN. HMN. PR. ERR."), 4) ==
          std::vector<std::string>{"2.5", "2.5", "3", "3", "5.5", "5.5"});
    // A method missing a split has no total.
    CHECK(fields(line_starting(t, "ANALYST 1"), 2) == std::vector<std::string>{"--", "--", "6", "6", "--", "--"});
    // Methods without the metric get no row, and no stray spacer is left behind.
    CHECK(line_starting(t, "ANALYST 2").empty());
    CHECK(line_starting(t, "AIC").empty());
    CHECK(t.find("\n\n=") == std::string::npos);
    CHECK(t.find("-----\n\n") == std::string::npos);
}

TEST_CASE("calibration table collapses the syntheses and averages splits") {
    const std::string t = render_calibration_table(sample());
    CHECK(t.find("BAYES SYNTH.") == std::string::npos);
    CHECK(t.find("CONVEX SYNTH.") == std::string::npos);
    CHECK(fields(line_starting(t, "SYNTHESES"), 1) ==
          std::vector<std::string>{"0.100", "0.090", "90.00", "0.200", "0.180", "90.00"});
    const auto avg = t.substr(t.find("Averaged over data sets"));
    CHECK(fields(line_starting(avg, "SYNTHESES"), 1) == std::vector<std::string>{"0.150", "0.135", "90.00", "0.900"});
}

TEST_CASE("rendering is a pure function of the report") {
    const MetricsReport r = sample();
    const std::string all = render_tables(r);
    CHECK(all == render_tables(r));
    CHECK(all.find(render_sse_table(r)) == 0);
    CHECK(all.find(render_calibration_table(r)) != std::string::npos);
}
