#include <bsynth/selection.hpp>

#include <bsynth/diagnostics.hpp>
#include <bsynth/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace bsynth {

double GaussianFit::log_likelihood() const {
    const double nn = static_cast<double>(n);
    return -0.5 * nn * (std::log(2.0 * std::numbers::pi * rss / nn) + 1.0);
}

double GaussianFit::aic() const { return -2.0 * log_likelihood() + 2.0 * static_cast<double>(p + 1); }

double GaussianFit::bic() const {
    return -2.0 * log_likelihood() + std::log(static_cast<double>(n)) * static_cast<double>(p + 1);
}

double GaussianFit::mse_hat() const { return rss / static_cast<double>(n - p); }

GaussianFit fit_gaussian_ml(const Design& design) {
    const auto n = static_cast<std::size_t>(design.x.rows());
    const auto p = static_cast<std::size_t>(design.x.cols());
    if (n <= p) {
        throw NumericError("least squares: " + std::to_string(n) + " rows for " + std::to_string(p) + " coefficients");
    }
    // Unit-norm columns so the rank threshold is scale-free (raw squares of
    // large-valued columns would otherwise look collinear with the intercept).
    Eigen::VectorXd norms = design.x.colwise().norm().transpose();
    if ((norms.array() <= 0.0).any()) throw NumericError("least squares: zero column in design");
    const Eigen::MatrixXd scaled = design.x * norms.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(p)) throw NumericError("least squares: rank-deficient design");
    GaussianFit fit;
    fit.coef = qr.solve(design.y).cwiseQuotient(norms);
    fit.rss = (design.y - design.x * fit.coef).squaredNorm();
    fit.n = n;
    fit.p = p;
    if (!(fit.rss > 0.0)) throw NumericError("least squares: zero residual sum of squares");
    return fit;
}

double information_criterion(const GaussianFit& fit, Criterion criterion) {
    return criterion == Criterion::aic ? fit.aic() : fit.bic();
}

double IcModel::predict(const Dataset& data, std::size_t row) const {
    return feature_vector(data, spec, row).dot(fit.coef);
}

namespace {

bool has_identity(const DesignSpec& spec, const std::string& column) {
    return std::any_of(spec.features.begin(), spec.features.end(), [&](const FeatureTransform& f) {
        return f.kind == TransformKind::identity && f.column == column;
    });
}

bool parents_present(const DesignSpec& spec, const FeatureTransform& t) {
    if (t.kind != TransformKind::interaction) return true;
    return has_identity(spec, t.column) && has_identity(spec, t.column2);
}

}  // namespace

IcModel forward_selection_ic(const Dataset& data, std::span<const std::size_t> rows,
                             const std::vector<FeatureTransform>& candidates, Criterion criterion,
                             const ResponseSpec& response) {
    if (candidates.empty()) throw ConfigError("forward selection: no candidates");
    IcModel model;
    model.criterion = criterion;
    model.spec.response = response;
    model.spec.intercept = true;
    model.spec.validate(data);
    for (const auto& c : candidates) {
        DesignSpec probe;
        probe.features = {c};
        probe.response = response;
        if (c.kind != TransformKind::interaction) probe.validate(data);
    }
    model.fit = fit_gaussian_ml(build_design(data, model.spec, rows));
    double current = information_criterion(model.fit, criterion);
    model.path.push_back(current);

    std::vector<bool> used(candidates.size(), false);
    for (;;) {
        std::size_t best = candidates.size();
        double best_value = current;
        GaussianFit best_fit;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (used[i] || !parents_present(model.spec, candidates[i])) continue;
            DesignSpec trial = model.spec;
            trial.features.push_back(candidates[i]);
            try {
                GaussianFit f = fit_gaussian_ml(build_design(data, trial, rows));
                const double v = information_criterion(f, criterion);
                if (v < best_value) {
                    best = i;
                    best_value = v;
                    best_fit = std::move(f);
                }
            } catch (const NumericError&) {
                // rank-deficient extension; never selected
            }
        }
        if (best == candidates.size()) break;
        used[best] = true;
        model.spec.features.push_back(candidates[best]);
        model.fit = std::move(best_fit);
        current = best_value;
        model.path.push_back(current);
    }
    return model;
}

namespace {

struct LarsTerm {
    FeatureTransform transform;
    std::vector<std::size_t> parents;  // indices of main effects
    Eigen::VectorXd z;                 // centered, unit norm
};

// Centered unit-norm column, or empty when the column is constant.
Eigen::VectorXd normalized(Eigen::VectorXd v) {
    v.array() -= v.mean();
    const double norm = v.norm();
    if (!(norm > 1e-10 * std::max(1.0, std::sqrt(static_cast<double>(v.size()))))) return {};
    return v / norm;
}

}  // namespace

LarsOrder modified_lars_order(const Dataset& data, std::span<const std::size_t> rows, const ResponseSpec& response,
                              const std::vector<std::string>& main_effects, const std::vector<std::string>& forced_in,
                              const LarsOptions& options) {
    if (main_effects.empty()) throw ConfigError("LARS: no candidate main effects");
    if (rows.size() < 2) throw ConfigError("LARS: need at least two rows");
    for (std::size_t i = 0; i < main_effects.size(); ++i) {
        data.column_index(main_effects[i]);
        for (std::size_t j = 0; j < i; ++j) {
            if (main_effects[i] == main_effects[j]) throw ConfigError("LARS: duplicate candidate " + main_effects[i]);
        }
    }
    for (const auto& f : forced_in) {
        if (std::find(main_effects.begin(), main_effects.end(), f) == main_effects.end()) {
            throw ConfigError("LARS: forced variable '" + f + "' is not a candidate");
        }
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) y(r) = response_value(data, response, rows[static_cast<std::size_t>(r)]);
    y.array() -= y.mean();

    const auto raw_column = [&](const FeatureTransform& t) {
        Eigen::VectorXd v(n);
        for (Eigen::Index r = 0; r < n; ++r) v(r) = t.evaluate(data, rows[static_cast<std::size_t>(r)]);
        return v;
    };

    LarsOrder result;
    std::vector<LarsTerm> terms;
    std::vector<bool> usable_main(main_effects.size(), false);
    std::vector<std::size_t> main_term(main_effects.size(), 0);
    for (std::size_t i = 0; i < main_effects.size(); ++i) {
        LarsTerm t{FeatureTransform::identity(main_effects[i]), {i}, normalized(raw_column(FeatureTransform::identity(main_effects[i])))};
        if (t.z.size() == 0) {
            result.excluded.push_back(main_effects[i] + ": constant column");
            warn("LARS: constant column '" + main_effects[i] + "' excluded");
            continue;
        }
        usable_main[i] = true;
        main_term[i] = terms.size();
        terms.push_back(std::move(t));
    }
    for (const auto& f : forced_in) {
        const auto i = static_cast<std::size_t>(std::find(main_effects.begin(), main_effects.end(), f) - main_effects.begin());
        if (!usable_main[i]) throw ConfigError("LARS: forced variable '" + f + "' is constant");
    }

    // Derived terms are appended lazily as their parents activate (or all at
    // once without hierarchy) so candidate index reflects eligibility order.
    std::vector<bool> derived_made(main_effects.size() * main_effects.size(), false);
    std::vector<bool> active_main(main_effects.size(), false);
    const auto add_derived = [&](std::size_t i, std::size_t j) {
        const std::size_t key = i * main_effects.size() + j;
        if (derived_made[key]) return;
        derived_made[key] = true;
        FeatureTransform t = i == j ? FeatureTransform::quadratic(main_effects[i])
                                    : FeatureTransform::interaction(main_effects[i], main_effects[j]);
        Eigen::VectorXd z = normalized(raw_column(t));
        if (z.size() == 0) {
            result.excluded.push_back(t.label() + ": constant column");
            warn("LARS: constant term '" + t.label() + "' excluded");
            return;
        }
        terms.push_back({std::move(t), i == j ? std::vector<std::size_t>{i} : std::vector<std::size_t>{i, j}, std::move(z)});
    };
    const auto refresh_derived = [&] {
        for (std::size_t i = 0; i < main_effects.size(); ++i) {
            if (!usable_main[i]) continue;
            for (std::size_t j = i; j < main_effects.size(); ++j) {
                if (!usable_main[j]) continue;
                if (i == j && !options.squares) continue;
                if (i != j && !options.interactions) continue;
                if (options.hierarchy && !(active_main[i] && active_main[j])) continue;
                add_derived(i, j);
            }
        }
    };
    refresh_derived();

    std::vector<std::size_t> active;  // term indices, entry order
    std::vector<bool> is_active;
    std::vector<bool> dropped;
    const std::size_t rank_cap = static_cast<std::size_t>(n - 1);
    const std::size_t step_cap = options.max_steps == 0 ? std::numeric_limits<std::size_t>::max() : options.max_steps;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);

    // Returns false (and drops the term) when it is collinear with the active set.
    const auto activate = [&](std::size_t t) {
        Eigen::MatrixXd za(n, static_cast<Eigen::Index>(active.size() + 1));
        for (std::size_t a = 0; a < active.size(); ++a) za.col(static_cast<Eigen::Index>(a)) = terms[active[a]].z;
        za.col(static_cast<Eigen::Index>(active.size())) = terms[t].z;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(za);
        qr.setThreshold(1e-9);
        if (qr.rank() < za.cols()) {
            dropped[t] = true;
            result.excluded.push_back(terms[t].transform.label() + ": collinear with active set");
            warn("LARS: term '" + terms[t].transform.label() + "' is collinear with the active set and was excluded");
            return false;
        }
        active.push_back(t);
        is_active[t] = true;
        result.order.push_back(terms[t].transform);
        if (terms[t].parents.size() == 1 && terms[t].transform.kind == TransformKind::identity) {
            active_main[terms[t].parents[0]] = true;
            refresh_derived();
        }
        return true;
    };
    const auto sync_flags = [&] {
        is_active.resize(terms.size(), false);
        dropped.resize(terms.size(), false);
    };
    sync_flags();

    for (const auto& f : forced_in) {
        if (result.order.size() >= step_cap || active.size() >= rank_cap) break;
        const auto i = static_cast<std::size_t>(std::find(main_effects.begin(), main_effects.end(), f) - main_effects.begin());
        if (is_active[main_term[i]]) continue;
        activate(main_term[i]);
        sync_flags();
    }

    // Bring the fit up to the least-squares fit on the forced set so free
    // variables compete on the residual after forcing.
    const auto ls_fit = [&] {
        if (active.empty()) return Eigen::VectorXd(Eigen::VectorXd::Zero(n));
        Eigen::MatrixXd za(n, static_cast<Eigen::Index>(active.size()));
        for (std::size_t a = 0; a < active.size(); ++a) za.col(static_cast<Eigen::Index>(a)) = terms[active[a]].z;
        return Eigen::VectorXd(za * za.colPivHouseholderQr().solve(y));
    };
    if (!forced_in.empty()) mu = ls_fit();

    constexpr double tie = 1e-12;
    const double zero_corr = tie * std::max(1.0, y.norm());
    while (result.order.size() < step_cap && active.size() < rank_cap) {
        sync_flags();
        const Eigen::VectorXd resid = y - mu;
        std::vector<double> corr(terms.size());
        for (std::size_t t = 0; t < terms.size(); ++t) corr[t] = terms[t].z.dot(resid);
        double c_max = 0.0;
        for (std::size_t t : active) c_max = std::max(c_max, std::abs(corr[t]));

        // A term already at the active correlation enters now: the first
        // step, a child made eligible by its parents, or any term once the
        // active fit has reached least squares (c_max = 0).
        std::size_t enter = terms.size();
        double enter_corr = 0.0;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            if (is_active[t] || dropped[t]) continue;
            const double c = std::abs(corr[t]);
            if (c > zero_corr && c >= c_max * (1.0 - tie) && c > enter_corr * (1.0 + tie)) {
                enter = t;
                enter_corr = c;
            }
        }
        if (enter < terms.size()) {
            activate(enter);
            continue;
        }
        if (active.empty() || c_max <= zero_corr) break;

        Eigen::MatrixXd za(n, static_cast<Eigen::Index>(active.size()));
        Eigen::VectorXd ca(static_cast<Eigen::Index>(active.size()));
        for (std::size_t a = 0; a < active.size(); ++a) {
            za.col(static_cast<Eigen::Index>(a)) = terms[active[a]].z;
            ca(static_cast<Eigen::Index>(a)) = corr[active[a]];
        }
        // Along mu + g u the active correlations are (1 - g) c_A.
        const Eigen::VectorXd u = za * (za.transpose() * za).ldlt().solve(ca);

        double gamma = std::numeric_limits<double>::infinity();
        std::size_t next = terms.size();
        for (std::size_t t = 0; t < terms.size(); ++t) {
            if (is_active[t] || dropped[t]) continue;
            const double a = terms[t].z.dot(u);
            const double c = corr[t];
            double g_t = std::numeric_limits<double>::infinity();
            for (const double g : {(c_max - c) / (c_max - a), (c_max + c) / (c_max + a)}) {
                if (g > tie && std::isfinite(g)) g_t = std::min(g_t, g);
            }
            if (next == terms.size() ? std::isfinite(g_t) : g_t < gamma - tie * std::max(1.0, gamma)) {
                gamma = g_t;
                next = t;
            }
        }
        if (next == terms.size() || gamma >= 1.0) {
            mu += u;  // least-squares fit on the active set
            continue;
        }
        mu += gamma * u;
        activate(next);
    }
    return result;
}

}  // namespace bsynth
