#include <bsynth/design.hpp>

#include <bsynth/error.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace bsynth {

FeatureTransform FeatureTransform::identity(std::string column) {
    FeatureTransform t;
    t.column = std::move(column);
    return t;
}

FeatureTransform FeatureTransform::log(std::string column) {
    FeatureTransform t;
    t.kind = TransformKind::log;
    t.column = std::move(column);
    return t;
}

FeatureTransform FeatureTransform::quadratic(std::string column) {
    FeatureTransform t;
    t.kind = TransformKind::quadratic;
    t.column = std::move(column);
    return t;
}

FeatureTransform FeatureTransform::sine(std::string column, double period, double phase) {
    FeatureTransform t;
    t.kind = TransformKind::periodic_sine;
    t.column = std::move(column);
    t.period = period;
    t.phase = phase;
    return t;
}

FeatureTransform FeatureTransform::indicator(std::string column, double value) {
    FeatureTransform t;
    t.kind = TransformKind::indicator;
    t.column = std::move(column);
    t.value = value;
    return t;
}

FeatureTransform FeatureTransform::hinge(std::string column, double knot) {
    FeatureTransform t;
    t.kind = TransformKind::piecewise_linear;
    t.column = std::move(column);
    t.knot = knot;
    return t;
}

FeatureTransform FeatureTransform::interaction(std::string a, std::string b) {
    FeatureTransform t;
    t.kind = TransformKind::interaction;
    t.column = std::move(a);
    t.column2 = std::move(b);
    return t;
}

FeatureTransform FeatureTransform::lagged(std::string column, int lag) {
    FeatureTransform t;
    t.kind = TransformKind::lagged;
    t.column = std::move(column);
    t.lag = lag;
    return t;
}

namespace {

std::string fmt_num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::string FeatureTransform::label() const {
    switch (kind) {
        case TransformKind::identity: return column;
        case TransformKind::log: return "log(" + column + ")";
        case TransformKind::quadratic: return column + "^2";
        case TransformKind::periodic_sine:
            return "sin(" + column + ";" + fmt_num(period) + "," + fmt_num(phase) + ")";
        case TransformKind::indicator: return "1[" + column + "=" + fmt_num(value) + "]";
        case TransformKind::piecewise_linear: return "(" + column + "-" + fmt_num(knot) + ")+";
        case TransformKind::interaction: return column + "*" + column2;
        case TransformKind::lagged: return "lag" + std::to_string(lag) + "(" + column + ")";
    }
    return column;
}

double FeatureTransform::evaluate(const Dataset& data, std::size_t row) const {
    const double x = data.at(row, column);
    switch (kind) {
        case TransformKind::identity: return x;
        case TransformKind::log:
            if (!(x > 0.0)) throw NumericError("log transform of non-positive " + column);
            return std::log(x);
        case TransformKind::quadratic: return x * x;
        case TransformKind::periodic_sine:
            return std::sin(2.0 * std::numbers::pi * (x - phase) / period);
        case TransformKind::indicator: return x == value ? 1.0 : 0.0;
        case TransformKind::piecewise_linear: return std::max(0.0, x - knot);
        case TransformKind::interaction: return x * data.at(row, column2);
        case TransformKind::lagged: {
            const std::size_t shift = static_cast<std::size_t>(lag);
            return data.at(row >= shift ? row - shift : 0, column);
        }
    }
    return x;
}

std::vector<std::string> DesignSpec::labels() const {
    std::vector<std::string> out;
    if (intercept) out.emplace_back("(intercept)");
    for (const auto& f : features) out.push_back(f.label());
    return out;
}

void DesignSpec::validate() const {
    if (dimension() == 0) throw ConfigError("design: no intercept and no features");
    if (!scaling.empty() && scaling.size() != features.size()) {
        throw ConfigError("design: scaling has " + std::to_string(scaling.size()) + " entries for " +
                          std::to_string(features.size()) + " features");
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& f = features[i];
        if (f.column.empty()) throw ConfigError("design: transform without source column");
        for (std::size_t j = 0; j < i; ++j) {
            if (features[j] == f) throw ConfigError("design: duplicate transform " + f.label());
        }
        if (f.kind == TransformKind::periodic_sine && !(f.period > 0.0)) {
            throw ConfigError("design: periodic transform needs period > 0 (" + f.label() + ")");
        }
        if (f.kind == TransformKind::lagged && f.lag < 1) {
            throw ConfigError("design: lag must be >= 1 (" + f.label() + ")");
        }
        if (f.kind == TransformKind::interaction) {
            if (f.column2.empty()) throw ConfigError("design: interaction needs two columns");
            for (const auto& parent : {f.column, f.column2}) {
                const bool present = std::any_of(features.begin(), features.end(), [&](const auto& g) {
                    return g.kind == TransformKind::identity && g.column == parent;
                });
                if (!present) {
                    throw ConfigError("design: interaction " + f.label() + " requires main effect " + parent);
                }
            }
        }
    }
    for (const auto& s : scaling) {
        if (!(s.scale > 0.0) || !std::isfinite(s.center)) throw ConfigError("design: invalid scaling");
    }
}

void DesignSpec::validate(const Dataset& data) const {
    validate();
    data.column_index(response.column);
    for (const auto& f : features) {
        data.column_index(f.column);
        if (f.kind == TransformKind::interaction) data.column_index(f.column2);
    }
}

DesignSpec standardized(DesignSpec spec, const Dataset& data, std::span<const std::size_t> rows) {
    spec.scaling.clear();
    spec.validate(data);
    if (rows.empty()) throw ConfigError("standardized: no rows");
    const double n = static_cast<double>(rows.size());
    for (const auto& f : spec.features) {
        double mean = 0.0;
        for (auto r : rows) mean += f.evaluate(data, r);
        mean /= n;
        double ss = 0.0;
        for (auto r : rows) {
            const double d = f.evaluate(data, r) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / n);
        spec.scaling.push_back(sd > 1e-12 * std::max(1.0, std::abs(mean)) ? ColumnScaling{mean, sd}
                                                                           : ColumnScaling{mean, 1.0});
    }
    return spec;
}

double response_value(const Dataset& data, const ResponseSpec& response, std::size_t row) {
    const double v = data.at(row, response.column);
    if (!response.log) return v;
    if (!(v > 0.0)) throw NumericError("log response requires positive " + response.column);
    return std::log(v);
}

Eigen::VectorXd feature_vector(const Dataset& data, const DesignSpec& spec, std::size_t row) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(spec.dimension()));
    Eigen::Index c = 0;
    if (spec.intercept) x(c++) = 1.0;
    for (std::size_t i = 0; i < spec.features.size(); ++i) {
        double v = spec.features[i].evaluate(data, row);
        if (!spec.scaling.empty()) v = (v - spec.scaling[i].center) / spec.scaling[i].scale;
        x(c++) = v;
    }
    return x;
}

Design build_design(const Dataset& data, const DesignSpec& spec, std::span<const std::size_t> rows) {
    spec.validate(data);
    Design d;
    d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(spec.dimension()));
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        d.x.row(r) = feature_vector(data, spec, rows[i]).transpose();
        d.y(r) = response_value(data, spec.response, rows[i]);
    }
    return d;
}

Design build_design(const Dataset& data, const DesignSpec& spec) {
    std::vector<std::size_t> rows(data.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return build_design(data, spec, rows);
}

namespace {

const std::vector<std::pair<TransformKind, std::string>>& kind_names() {
    static const std::vector<std::pair<TransformKind, std::string>> names = {
        {TransformKind::identity, "identity"},
        {TransformKind::log, "log"},
        {TransformKind::quadratic, "quadratic"},
        {TransformKind::periodic_sine, "periodic_sine"},
        {TransformKind::indicator, "indicator"},
        {TransformKind::piecewise_linear, "piecewise_linear"},
        {TransformKind::interaction, "interaction"},
        {TransformKind::lagged, "lagged"},
    };
    return names;
}

}  // namespace

void to_json(nlohmann::json& j, const FeatureTransform& t) {
    const auto& names = kind_names();
    const auto it = std::find_if(names.begin(), names.end(), [&](const auto& p) { return p.first == t.kind; });
    j = nlohmann::json{{"kind", it->second}, {"column", t.column}};
    switch (t.kind) {
        case TransformKind::periodic_sine:
            j["period"] = t.period;
            j["phase"] = t.phase;
            break;
        case TransformKind::indicator: j["value"] = t.value; break;
        case TransformKind::piecewise_linear: j["knot"] = t.knot; break;
        case TransformKind::interaction: j["column2"] = t.column2; break;
        case TransformKind::lagged: j["lag"] = t.lag; break;
        default: break;
    }
}

void from_json(const nlohmann::json& j, FeatureTransform& t) {
    t = FeatureTransform{};
    if (j.is_string()) {
        t.column = j.get<std::string>();
        return;
    }
    if (!j.is_object()) throw ConfigError("feature transform must be a string or an object");
    const auto kind = j.value("kind", std::string("identity"));
    const auto& names = kind_names();
    const auto it = std::find_if(names.begin(), names.end(), [&](const auto& p) { return p.second == kind; });
    if (it == names.end()) throw ConfigError("unknown transform kind '" + kind + "'");
    t.kind = it->first;
    if (!j.contains("column")) throw ConfigError("transform '" + kind + "' needs a column");
    j.at("column").get_to(t.column);
    t.column2 = j.value("column2", std::string());
    t.period = j.value("period", 0.0);
    t.phase = j.value("phase", 0.0);
    t.value = j.value("value", 0.0);
    t.knot = j.value("knot", 0.0);
    t.lag = j.value("lag", 0);
    if (t.kind == TransformKind::periodic_sine && !j.contains("period")) {
        throw ConfigError("periodic_sine transform needs a period");
    }
}

void to_json(nlohmann::json& j, const DesignSpec& s) {
    j = nlohmann::json{{"intercept", s.intercept},
                       {"response", {{"column", s.response.column}, {"log", s.response.log}}},
                       {"features", s.features}};
    if (!s.scaling.empty()) {
        auto& arr = j["scaling"] = nlohmann::json::array();
        for (const auto& c : s.scaling) arr.push_back({{"center", c.center}, {"scale", c.scale}});
    }
}

void from_json(const nlohmann::json& j, DesignSpec& s) {
    s = DesignSpec{};
    s.intercept = j.value("intercept", true);
    if (j.contains("response")) {
        const auto& r = j.at("response");
        s.response.column = r.value("column", std::string("upo3"));
        s.response.log = r.value("log", true);
    }
    if (j.contains("features")) j.at("features").get_to(s.features);
    if (j.contains("scaling")) {
        for (const auto& c : j.at("scaling")) {
            s.scaling.push_back({c.at("center").get<double>(), c.at("scale").get<double>()});
        }
    }
    s.validate();
}

}  // namespace bsynth
