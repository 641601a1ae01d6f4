/*
 * Copyright 2026 The mixlaw Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <mixlaw/core.hpp>
#include <mixlaw/evaluate.hpp>
#include <mixlaw/law.hpp>
#include <mixlaw/lsq.hpp>
#include <mixlaw/parallel.hpp>
#include <mixlaw/random.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace mixlaw {

struct FitConfig {
    double log_scale_lower = -30.0;  // bounds on log P and log Q
    double log_scale_upper = 30.0;
    double exponent_lower = 0.0;  // bounds on alpha and beta
    double exponent_upper = 5.0;
    int max_iterations = 2000;
    double relative_tolerance = 1e-12;
    double gradient_tolerance = 1e-10;
    int restarts = 0;
    std::uint64_t seed = 0;

    LsqOptions solver_options() const { return {max_iterations, relative_tolerance, gradient_tolerance}; }

    friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

struct DomainFitInfo {
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;  // sum of squared log residuals
    std::string stop_reason;
};

struct FitResult {
    CoefficientSet coefficients;  // canonical (A = 1)
    FitReport report;             // in-sample
    std::map<DomainId, DomainFitInfo> info;
    std::int64_t min_step = 0;
    std::int64_t max_step = 0;

    std::vector<DomainId> non_converged() const {
        std::vector<DomainId> out;
        for (const auto& [d, i] : info) {
            if (!i.converged) out.push_back(d);
        }
        return out;
    }
};

namespace detail {

struct DomainSample {
    double log_r;
    double log_s;
    double log_loss;
};

struct OlsLine {
    double intercept;
    double slope;
};

inline std::optional<OlsLine> ols(const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : xy) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(xy.size());
    my /= static_cast<double>(xy.size());
    double sxx = 0.0, sxy = 0.0;
    for (auto [x, y] : xy) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    const double slope = sxy / sxx;
    return OlsLine{my - slope * mx, slope};
}

/// log L = c - alpha log r - beta log s over every point.
inline std::tuple<double, double, double> ols_power_law(const std::vector<DomainSample>& data) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(data.size()), 3);
    Eigen::VectorXd y(static_cast<Eigen::Index>(data.size()));
    for (std::size_t j = 0; j < data.size(); ++j) {
        const auto row = static_cast<Eigen::Index>(j);
        X(row, 0) = 1.0;
        X(row, 1) = -data[j].log_r;
        X(row, 2) = -data[j].log_s;
        y[row] = data[j].log_loss;
    }
    const Eigen::Vector3d b = X.colPivHouseholderQr().solve(y);
    return {b[0], b[1], b[2]};
}

/// Deterministic start: beta and the log intercept from a power law in s at
/// the largest proportion, alpha from a power law in r at the largest step,
/// Q just under the smallest loss once the r^-alpha factor is removed.
inline LawParameters initial_parameters(const std::vector<DomainSample>& data, const FitConfig& cfg) {
    double max_log_r = -std::numeric_limits<double>::infinity();
    double max_log_s = -std::numeric_limits<double>::infinity();
    for (const auto& d : data) {
        max_log_r = std::max(max_log_r, d.log_r);
        max_log_s = std::max(max_log_s, d.log_s);
    }
    std::vector<std::pair<double, double>> along_s, along_r;
    for (const auto& d : data) {
        if (d.log_r == max_log_r) along_s.emplace_back(d.log_s, d.log_loss);
        if (d.log_s == max_log_s) along_r.emplace_back(d.log_r, d.log_loss);
    }
    const auto [c_all, alpha_all, beta_all] = ols_power_law(data);

    double beta0 = beta_all;
    double intercept = c_all - alpha_all * max_log_r;  // log L at r_max, s = 1
    if (auto line = ols(along_s)) {
        beta0 = -line->slope;
        intercept = line->intercept;
    }
    double alpha0 = alpha_all;
    if (auto line = ols(along_r)) alpha0 = -line->slope;
    if (!std::isfinite(alpha0)) alpha0 = 0.0;
    if (!std::isfinite(beta0)) beta0 = 0.0;
    alpha0 = std::clamp(alpha0, cfg.exponent_lower, cfg.exponent_upper);
    beta0 = std::clamp(beta0, cfg.exponent_lower, cfg.exponent_upper);

    double min_scaled = std::numeric_limits<double>::infinity();
    for (const auto& d : data) min_scaled = std::min(min_scaled, d.log_loss + alpha0 * d.log_r);
    const double log_q0 = std::log(0.9) + min_scaled;
    const double log_p0 = intercept + alpha0 * max_log_r;

    LawParameters p{log_p0, log_q0, alpha0, beta0};
    for (int i = 0; i < 2; ++i) p[i] = std::clamp(std::isfinite(p[i]) ? p[i] : 0.0, cfg.log_scale_lower, cfg.log_scale_upper);
    return p;
}

struct LogResidualModel {
    const std::vector<DomainSample>* data;

    bool operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) const {
        const auto n = static_cast<Eigen::Index>(data->size());
        const LawParameters p = x;
        r.resize(n);
        if (J) J->resize(n, 4);
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& d = (*data)[static_cast<std::size_t>(j)];
            r[j] = log_predicted_loss(p, d.log_r, d.log_s) - d.log_loss;
            if (J) J->row(j) = log_loss_gradient(p, d.log_r, d.log_s).transpose();
        }
        return r.allFinite();
    }
};

struct DomainFit {
    BiMixCoefficients coefficients;
    DomainFitInfo info;
};

inline DomainFit fit_domain(const DomainId& domain, const std::vector<DomainSample>& data, const FitConfig& cfg) {
    const Eigen::Vector4d lower{cfg.log_scale_lower, cfg.log_scale_lower, cfg.exponent_lower, cfg.exponent_lower};
    const Eigen::Vector4d upper{cfg.log_scale_upper, cfg.log_scale_upper, cfg.exponent_upper, cfg.exponent_upper};
    const LogResidualModel model{&data};

    std::vector<Eigen::VectorXd> starts{initial_parameters(data, cfg)};
    if (cfg.restarts > 0) {
        Rng rng(fnv1a(domain.str(), cfg.seed ^ 0x9e3779b97f4a7c15ULL));
        const double exponent_hi = std::min(cfg.exponent_upper, cfg.exponent_lower + 2.0);
        for (int k = 0; k < cfg.restarts; ++k) {
            Eigen::VectorXd s = starts.front();
            s[0] += 2.0 * rng.normal();
            s[1] += 2.0 * rng.normal();
            s[2] = rng.uniform(cfg.exponent_lower, exponent_hi);
            s[3] = rng.uniform(cfg.exponent_lower, exponent_hi);
            starts.push_back(s.cwiseMax(lower).cwiseMin(upper));
        }
    }

    LsqResult best;
    bool have_best = false;
    for (const auto& start : starts) {
        LsqResult res = minimize_bounded(model, start, lower, upper, cfg.solver_options());
        if (!have_best || res.cost < best.cost) {
            best = std::move(res);
            have_best = true;
        }
    }
    return {from_parameters(best.x), {best.converged, best.iterations, 2.0 * best.cost, best.stop_reason}};
}

}  // namespace detail

/// Fits the law independently for every domain by bounded least squares on
/// log losses. Observation order does not affect the result.
///
/// Throws InvariantViolation when validate_observations reports problems and
/// InsufficientData when a domain has fewer than 4 observations, fewer than 2
/// distinct proportions or fewer than 2 distinct steps. A domain whose solver
/// hits the iteration cap is returned with its best iterate and flagged in
/// `info` and in the report.
inline FitResult fit_bimix(const ObservationSet& set, const FitConfig& config = {}) {
    if (const auto violations = validate_observations(set); !violations.empty()) {
        fail(ErrorCode::InvariantViolation, "observation #" + std::to_string(violations.front().index) + " " +
                                                to_string(violations.front().kind) + ": " + violations.front().detail);
    }
    if (set.observations.empty()) fail(ErrorCode::InsufficientData, "no observations");

    std::map<DomainId, std::vector<const Observation*>> by_domain;
    for (const auto& o : set.observations) by_domain[o.domain].push_back(&o);

    std::vector<DomainId> domains;
    std::vector<std::vector<detail::DomainSample>> samples;
    for (auto& [domain, obs] : by_domain) {
        std::set<double> proportions;
        std::set<std::int64_t> steps;
        for (const auto* o : obs) {
            proportions.insert(o->proportion);
            steps.insert(o->step);
        }
        if (obs.size() < 4 || proportions.size() < 2 || steps.size() < 2) {
            fail(ErrorCode::InsufficientData,
                 "domain '" + domain.str() + "' needs >= 4 observations over >= 2 proportions and >= 2 steps (has " +
                     std::to_string(obs.size()) + " observations, " + std::to_string(proportions.size()) +
                     " proportions, " + std::to_string(steps.size()) + " steps)");
        }
        std::sort(obs.begin(), obs.end(), [](const Observation* a, const Observation* b) {
            return std::tie(a->mixture_id, a->step) < std::tie(b->mixture_id, b->step);
        });
        std::vector<detail::DomainSample> data;
        data.reserve(obs.size());
        for (const auto* o : obs) {
            data.push_back({std::log(o->proportion), std::log(static_cast<double>(o->step)), std::log(o->loss)});
        }
        domains.push_back(domain);
        samples.push_back(std::move(data));
    }

    std::vector<detail::DomainFit> fits(domains.size());
    parallel_for(domains.size(), [&](std::size_t i) { fits[i] = detail::fit_domain(domains[i], samples[i], config); });

    FitResult result;
    for (std::size_t i = 0; i < domains.size(); ++i) {
        result.coefficients.emplace(domains[i], fits[i].coefficients);
        result.info.emplace(domains[i], fits[i].info);
    }

    std::vector<ScoredPoint> points;
    points.reserve(set.observations.size());
    result.min_step = std::numeric_limits<std::int64_t>::max();
    result.max_step = 0;
    for (const auto& o : set.observations) {
        points.push_back({o.mixture_id, o.domain, o.step, o.loss,
                          predict_loss(result.coefficients.at(o.domain), o.proportion, static_cast<double>(o.step))});
        result.min_step = std::min(result.min_step, o.step);
        result.max_step = std::max(result.max_step, o.step);
    }
    // Sorting makes the report independent of the input order.
    std::sort(points.begin(), points.end(), [](const ScoredPoint& a, const ScoredPoint& b) {
        return std::tie(a.domain, a.mixture_id, a.step) < std::tie(b.domain, b.mixture_id, b.step);
    });
    result.report = detail::build_report(points, detail::RSquaredMode::PooledPerDomain);
    for (auto& [domain, rec] : result.report.per_domain) rec.converged = result.info.at(domain).converged;
    bool all_converged = true;
    for (const auto& [d, i] : result.info) all_converged = all_converged && i.converged;
    result.report.aggregate.converged = all_converged;
    return result;
}

}  // namespace mixlaw
