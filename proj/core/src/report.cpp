#include <bsynth/report.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <vector>

namespace bsynth {

namespace {

const std::vector<std::string> kProtocols{"once", "ten_by_ten"};

std::string protocol_header(const std::string& p) { return p == "once" ? "Once" : "10/10"; }

std::string fmt(std::optional<double> v, int decimals) {
    if (!v || !std::isfinite(*v)) return "--";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
    return buf;
}

// Integer counts print without decimals; averaged counts keep one.
std::string fmt_count(std::optional<double> v) {
    if (!v || !std::isfinite(*v)) return "--";
    if (std::abs(*v - std::round(*v)) < 1e-9) return fmt(v, 0);
    return fmt(v, 1);
}

struct Table {
    std::string title;
    std::vector<std::vector<std::string>> header;  // each row has the same column count
    std::vector<std::vector<std::string>> body;    // empty row = spacer

    std::string render() const {
        std::size_t cols = 0;
        for (const auto& r : header) cols = std::max(cols, r.size());
        for (const auto& r : body) cols = std::max(cols, r.size());
        std::vector<std::size_t> width(cols, 0);
        for (const auto* rows : {&header, &body}) {
            for (const auto& r : *rows) {
                for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
            }
        }
        std::size_t total = 0;
        for (auto w : width) total += w + 2;
        std::ostringstream out;
        out << title << '\n' << std::string(total, '=') << '\n';
        const auto line = [&](const std::vector<std::string>& r) {
            std::string s;
            for (std::size_t c = 0; c < cols; ++c) {
                const std::string cell = c < r.size() ? r[c] : "";
                const std::size_t pad = width[c] - cell.size();
                s += c == 0 ? cell + std::string(pad, ' ') : std::string(pad, ' ') + cell;
                s += "  ";
            }
            while (!s.empty() && s.back() == ' ') s.pop_back();
            out << s << '\n';
        };
        for (const auto& r : header) line(r);
        out << std::string(total, '-') << '\n';
        // Spacers only separate printed groups.
        bool pending_gap = false, printed = false;
        for (const auto& r : body) {
            if (r.empty()) {
                pending_gap = printed;
                continue;
            }
            if (pending_gap) out << '\n';
            pending_gap = false;
            printed = true;
            line(r);
        }
        out << std::string(total, '=') << '\n';
        return out.str();
    }
};

bool is_synthesis(const std::string& m) { return m == kBayesSynthesis || m == kConvexSynthesis; }
bool is_baseline(const std::string& m) { return m == "aic" || m == "bic"; }

// Methods grouped as analysts / summaries / baselines, with spacer rows.
std::vector<std::optional<std::string>> grouped(const MetricsReport& r) {
    std::vector<std::optional<std::string>> out;
    int last_group = -1;
    for (const auto& m : r.method_order) {
        const int group = is_baseline(m) ? 2 : (m == kMeanHuman || is_synthesis(m)) ? 1 : 0;
        if (last_group != -1 && group != last_group) out.push_back(std::nullopt);
        out.push_back(m);
        last_group = group;
    }
    return out;
}

bool has_any(const MetricsReport& r, const std::string& method, const std::string& metric) {
    return std::any_of(r.records.begin(), r.records.end(),
                       [&](const MetricRecord& x) { return x.method == method && x.metric == metric; });
}

std::string split_table(const MetricsReport& r, const std::string& title, const std::string& metric, int decimals,
                        bool totals) {
    Table t;
    t.title = title;
    std::vector<std::string> h1{""}, h2{"Method"};
    for (auto s : r.splits) {
        for (const auto& p : kProtocols) {
            h1.push_back(p == "once" ? "Data set " + std::to_string(s) : "");
            h2.push_back(protocol_header(p));
        }
    }
    if (totals) {
        for (const auto& p : kProtocols) {
            h1.push_back(p == "once" ? "Total" : "");
            h2.push_back(protocol_header(p));
        }
    }
    t.header = {h1, h2};
    for (const auto& m : grouped(r)) {
        if (!m) {
            t.body.emplace_back();
            continue;
        }
        if (!has_any(r, *m, metric)) continue;
        std::vector<std::string> row{display_name(*m)};
        for (auto s : r.splits) {
            for (const auto& p : kProtocols) {
                const auto v = r.value(*m, s, p, metric);
                row.push_back(decimals < 0 ? fmt_count(v) : fmt(v, decimals));
            }
        }
        if (totals) {
            for (const auto& p : kProtocols) {
                std::optional<double> sum = 0.0;
                for (auto s : r.splits) {
                    const auto v = r.value(*m, s, p, metric);
                    if (!v) {
                        sum.reset();
                        break;
                    }
                    *sum += *v;
                }
                row.push_back(fmt_count(sum));
            }
        }
        t.body.push_back(std::move(row));
    }
    while (!t.body.empty() && t.body.back().empty()) t.body.pop_back();
    return t.render();
}

}  // namespace

std::string display_name(const std::string& method) {
    if (method == kMeanHuman) return "MN. HMN. PR. ERR.";
    if (method == kBayesSynthesis) return "BAYES SYNTH.";
    if (method == kConvexSynthesis) return "CONVEX SYNTH.";
    std::string out;
    for (std::size_t i = 0; i < method.size(); ++i) {
        const char c = method[i];
        if (c == '_' || c == '-') {
            out += ' ';
        } else {
            // "analyst1" reads as "ANALYST 1"
            if (std::isdigit(static_cast<unsigned char>(c)) && i > 0 &&
                std::isalpha(static_cast<unsigned char>(method[i - 1]))) {
                out += ' ';
            }
            out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
    }
    return out;
}

std::string render_sse_table(const MetricsReport& report) {
    return split_table(report, "Sum of squared errors for log ozone", "sse_log", 2, false);
}

std::string render_mse_table(const MetricsReport& report) {
    return split_table(report, "Mean squared errors for ozone (original scale)", "mse_ozone", 2, false);
}

std::string render_classification_table(const MetricsReport& report) {
    return split_table(report, "Classification errors for exceedance of 8 units (false positive + false negative)",
                       "classification_errors", -1, true);
}

std::string render_calibration_table(const MetricsReport& report) {
    // Bayesian and convex synthesis coincide under the once protocol.
    std::vector<std::pair<std::string, std::string>> rows;  // (label, method)
    std::optional<std::string> synth;
    for (const auto& m : report.method_order) {
        if (is_baseline(m)) continue;
        if (!has_any(report, m, "avg_pred_var")) continue;
        if (is_synthesis(m)) {
            if (!synth) {
                synth = m;
                rows.emplace_back("SYNTHESES", m);
            }
            continue;
        }
        rows.emplace_back(display_name(m), m);
    }

    Table top;
    top.title = "Calibration of the predictive distribution for log ozone (once)";
    std::vector<std::string> h1{""}, h2{"Method"};
    for (auto s : report.splits) {
        h1.insert(h1.end(), {"Data set " + std::to_string(s), "", ""});
        h2.insert(h2.end(), {"Var", "MSE", "% cvg"});
    }
    top.header = {h1, h2};
    Table bottom;
    bottom.title = "Averaged over data sets";
    bottom.header = {{"Method", "Var", "MSE", "% cvg", "MSE/Var"}};

    for (const auto& [label, m] : rows) {
        std::vector<std::string> row{label};
        double var = 0.0, mse = 0.0, cvg = 0.0;
        std::size_t count = 0;
        for (auto s : report.splits) {
            const auto v = report.value(m, s, "once", "avg_pred_var");
            const auto e = report.value(m, s, "once", "mse_log_per_case");
            const auto c = report.value(m, s, "once", "coverage_pct");
            row.insert(row.end(), {fmt(v, 3), fmt(e, 3), fmt(c, 2)});
            if (v && e && c) {
                var += *v;
                mse += *e;
                cvg += *c;
                ++count;
            }
        }
        top.body.push_back(std::move(row));
        if (count > 0) {
            const double n = static_cast<double>(count);
            bottom.body.push_back({label, fmt(var / n, 3), fmt(mse / n, 3), fmt(cvg / n, 2), fmt(mse / var, 3)});
        }
    }
    return top.render() + "\n" + bottom.render();
}

std::string render_tables(const MetricsReport& report) {
    return render_sse_table(report) + "\n" + render_mse_table(report) + "\n" + render_classification_table(report) +
           "\n" + render_calibration_table(report);
}

}  // namespace bsynth
