#include <bsynth/predictive.hpp>

#include <bsynth/error.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/roots.hpp>

namespace bsynth {

namespace {

bool is_normal(const StudentT& t) { return std::isinf(t.dof); }

// Double precision throughout: the default promotion to long double costs 4x
// in the discretization loop for a relative difference near 1e-14.
using Fast = boost::math::policies::policy<boost::math::policies::promote_double<false>>;
using TDist = boost::math::students_t_distribution<double, Fast>;
using NDist = boost::math::normal_distribution<double, Fast>;

double std_cdf(double z, double dof) {
    if (std::isinf(dof)) return 0.5 * std::erfc(-z / std::numbers::sqrt2);
    return boost::math::cdf(TDist(dof), z);
}

double std_survival(double z, double dof) {
    if (std::isinf(dof)) return 0.5 * std::erfc(z / std::numbers::sqrt2);
    return boost::math::cdf(boost::math::complement(TDist(dof), z));
}

}  // namespace

double StudentT::cdf(double x) const { return std_cdf((x - location) / scale, dof); }

double StudentT::survival(double x) const { return std_survival((x - location) / scale, dof); }

double StudentT::log_pdf(double x) const {
    const double z = (x - location) / scale;
    if (is_normal(*this)) {
        return -0.5 * z * z - std::log(scale) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) - 0.5 * std::log(dof * std::numbers::pi) -
           std::log(scale) - 0.5 * (dof + 1.0) * std::log1p(z * z / dof);
}

double StudentT::quantile(double p) const {
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    if (is_normal(*this)) {
        return location + scale * boost::math::quantile(NDist(), p);
    }
    return location + scale * boost::math::quantile(TDist(dof), p);
}

double StudentT::upper_quantile(double q) const {
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    if (q >= 1.0) return -std::numeric_limits<double>::infinity();
    double z = 0.0;
    if (is_normal(*this)) {
        z = boost::math::quantile(boost::math::complement(NDist(), q));
    } else {
        z = boost::math::quantile(boost::math::complement(TDist(dof), q));
    }
    return location + scale * z;
}

double StudentT::mean() const { return dof > 1.0 ? location : std::numeric_limits<double>::quiet_NaN(); }

double StudentT::variance() const {
    if (is_normal(*this)) return scale * scale;
    return dof > 2.0 ? scale * scale * dof / (dof - 2.0) : std::numeric_limits<double>::infinity();
}

PredictiveDistribution PredictiveDistribution::combine(const std::vector<PredictiveDistribution>& parts,
                                                       const std::vector<double>& weights) {
    if (parts.size() != weights.size()) throw ConfigError("combine: weight count mismatch");
    PredictiveDistribution out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        for (const auto& c : parts[i].components) {
            if (c.weight <= 0.0) continue;
            out.components.push_back({weights[i] * c.weight, c.dist});
        }
    }
    return out;
}

void PredictiveDistribution::validate() const {
    if (components.empty()) throw ConfigError("predictive: empty mixture");
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) throw ConfigError("predictive: negative weight");
        if (!(c.dist.scale > 0.0) || !std::isfinite(c.dist.scale)) throw ConfigError("predictive: scale must be > 0");
        if (!(c.dist.dof > 0.0)) throw ConfigError("predictive: dof must be > 0");
        if (!std::isfinite(c.dist.location)) throw ConfigError("predictive: non-finite location");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("predictive: weights sum to " + std::to_string(total));
}

double PredictiveDistribution::mean() const {
    double m = 0.0;
    for (const auto& c : components) {
        if (c.weight > 0.0) m += c.weight * c.dist.mean();
    }
    return m;
}

double PredictiveDistribution::variance() const {
    const double m = mean();
    double second = 0.0;
    for (const auto& c : components) {
        if (c.weight <= 0.0) continue;
        const double d = c.dist.location - m;
        second += c.weight * (c.dist.variance() + d * d);
    }
    return second;
}

double PredictiveDistribution::cdf(double x) const {
    double p = 0.0;
    for (const auto& c : components) {
        if (c.weight > 0.0) p += c.weight * c.dist.cdf(x);
    }
    return p;
}

double PredictiveDistribution::survival(double x) const {
    double p = 0.0;
    for (const auto& c : components) {
        if (c.weight > 0.0) p += c.weight * c.dist.survival(x);
    }
    return p;
}

double PredictiveDistribution::log_pdf(double x) const {
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(components.size());
    for (const auto& c : components) {
        if (c.weight <= 0.0) continue;
        terms.push_back(std::log(c.weight) + c.dist.log_pdf(x));
        peak = std::max(peak, terms.back());
    }
    if (!std::isfinite(peak)) return peak;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - peak);
    return peak + std::log(s);
}

double PredictiveDistribution::quantile(double p) const {
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t active = 0;
    for (const auto& c : components) {
        if (c.weight <= 0.0) continue;
        const double q = c.dist.quantile(p);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
        ++active;
    }
    if (active == 1 || hi - lo <= 0.0) return lo;
    // F(lo) <= p <= F(hi): each component's quantile brackets the mixture's.
    const auto f = [&](double x) { return p <= 0.5 ? cdf(x) - p : (1.0 - p) - survival(x); };
    // Rounding can leave an endpoint a hair past the root.
    const double f_lo = f(lo), f_hi = f(hi);
    if (f_lo >= 0.0) return lo;
    if (f_hi <= 0.0) return hi;
    std::uintmax_t iterations = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(50), iterations);
    return 0.5 * (a + b);
}

double IntegerPredictive::mean() const {
    double m = 0.0;
    for (std::size_t j = 1; j < mass.size(); ++j) m += static_cast<double>(j) * mass[j];
    return m;
}

double IntegerPredictive::variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t j = 0; j < mass.size(); ++j) {
        const double d = static_cast<double>(j) - m;
        v += d * d * mass[j];
    }
    return v;
}

double IntegerPredictive::cdf(std::size_t j) const {
    if (j + 1 >= mass.size()) return 1.0;
    return std::accumulate(mass.begin(), mass.begin() + static_cast<std::ptrdiff_t>(j + 1), 0.0);
}

double IntegerPredictive::prob_exceeds(std::size_t threshold) const {
    if (threshold + 1 >= mass.size()) return 0.0;
    return std::accumulate(mass.begin() + static_cast<std::ptrdiff_t>(threshold + 1), mass.end(), 0.0);
}

IntegerPredictive discretize(const PredictiveDistribution& pred, double tail_tolerance, std::size_t max_support) {
    pred.validate();
    if (!(tail_tolerance > 0.0)) throw ConfigError("discretize: tail tolerance must be positive");

    double upper = -std::numeric_limits<double>::infinity();
    for (const auto& c : pred.components) {
        if (c.weight > 0.0) upper = std::max(upper, c.dist.upper_quantile(tail_tolerance));
    }
    // The mixture's upper quantile is bounded by the largest component's.
    std::size_t last = max_support;
    if (upper < std::log(static_cast<double>(max_support))) {
        last = static_cast<std::size_t>(std::max(1.0, std::ceil(std::exp(upper) - 0.5)));
    }

    // One special-function call per component and edge: evaluate the smaller
    // tail and take the other as its complement. A component whose own upper
    // tail has fallen below `negligible` is frozen there; what it still holds
    // is counted as truncated.
    const double negligible = tail_tolerance * 1e-6;
    std::vector<double> frozen(pred.components.size(), -1.0);
    const auto tails = [&](double x) {
        double c = 0.0, s = 0.0;
        for (std::size_t i = 0; i < pred.components.size(); ++i) {
            const auto& comp = pred.components[i];
            if (comp.weight <= 0.0) continue;
            double hi = frozen[i];
            if (hi >= 0.0) {
                // frozen
            } else if (x <= comp.dist.location) {
                const double lo = comp.dist.cdf(x);
                c += comp.weight * lo;
                s += comp.weight * (1.0 - lo);
                continue;
            } else {
                hi = comp.dist.survival(x);
                if (hi < negligible) frozen[i] = hi;
            }
            c += comp.weight * (1.0 - hi);
            s += comp.weight * hi;
        }
        return std::pair{c, s};
    };

    IntegerPredictive out;
    out.mass.resize(last + 1);
    auto [prev_cdf, prev_sf] = tails(std::log(0.5));
    out.mass[0] = prev_cdf;
    for (std::size_t j = 1; j <= last; ++j) {
        const double edge = std::log(static_cast<double>(j) + 0.5);
        const auto [c, s] = tails(edge);
        // Difference the smaller-magnitude tail to keep relative precision.
        out.mass[j] = std::max(0.0, prev_cdf < 0.5 ? c - prev_cdf : prev_sf - s);
        prev_cdf = c;
        prev_sf = s;
    }
    out.truncated_tail = prev_sf;
    const double total = std::accumulate(out.mass.begin(), out.mass.end(), 0.0);
    if (!(total > 0.0)) throw NumericError("discretize: no probability mass inside the support");
    for (auto& m : out.mass) m /= total;
    return out;
}

double predictive_mean_ozone(const PredictiveDistribution& pred) {
    for (const auto& c : pred.components) {
        if (c.weight > 0.0 && c.dist.dof <= 1.0) {
            throw NumericError("predictive mean of exp(Y) diverges: component with dof <= 1");
        }
    }
    return discretize(pred).mean();
}

}  // namespace bsynth
