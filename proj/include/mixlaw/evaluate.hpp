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
#include <mixlaw/law.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mixlaw {

/// |actual - predicted| / actual. Not symmetric in its arguments.
inline double relative_error(double actual, double predicted) {
    if (!(actual > 0.0)) fail(ErrorCode::NonPositiveActual, "actual loss must be positive");
    return std::abs(actual - predicted) / actual;
}

/// Coefficient of determination on log values: 1 - SS_res / SS_tot with
/// y = log(actual), y' = log(predicted). A predictor that always returns the
/// geometric mean of `actual` scores exactly 0.
inline double r_squared_log(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) fail(ErrorCode::LengthMismatch, "actual and predicted differ in length");
    if (actual.empty()) fail(ErrorCode::LengthMismatch, "no values");
    std::vector<double> y(actual.size());
    double mean = 0.0;
    for (std::size_t j = 0; j < actual.size(); ++j) {
        if (!(actual[j] > 0.0)) fail(ErrorCode::NonPositiveActual, "actual values must be positive");
        if (!(predicted[j] > 0.0)) fail(ErrorCode::InvalidArgument, "predicted values must be positive");
        y[j] = std::log(actual[j]);
        mean += y[j];
    }
    if (std::all_of(actual.begin(), actual.end(), [&](double a) { return a == actual.front(); })) {
        fail(ErrorCode::DegenerateVariance, "all actual values are identical");
    }
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double e = y[j] - std::log(predicted[j]);
        ss_res += e * e;
        ss_tot += (y[j] - mean) * (y[j] - mean);
    }
    return 1.0 - ss_res / ss_tot;
}

/// Per (mixture, domain): the observation with the largest step.
struct LastStep {};

/// Every observation of the listed mixtures (all mixtures when empty).
struct FullSeries {
    std::set<std::string> mixtures;
};

using HoldoutRule = std::variant<LastStep, FullSeries>;

/// A prediction paired with the observation it targets.
struct ScoredPoint {
    std::string mixture_id;
    DomainId domain;
    std::int64_t step;
    double actual;
    double predicted;
};

namespace detail {

struct ErrorAccumulator {
    double sum = 0.0;
    double worst = 0.0;
    double best = std::numeric_limits<double>::infinity();
    double squared_log = 0.0;
    std::size_t n = 0;

    void add(double actual, double predicted) {
        const double e = relative_error(actual, predicted);
        sum += e;
        worst = std::max(worst, e);
        best = std::min(best, e);
        const double d = std::log(actual) - std::log(predicted);
        squared_log += d * d;
        ++n;
    }

    ReportRecord record() const {
        ReportRecord out;
        out.points = n;
        if (n == 0) return out;
        out.mean_rel_error = sum / static_cast<double>(n);
        out.worst_rel_error = worst;
        out.best_rel_error = best;
        // Rounding in the mean can push it a hair outside [best, worst].
        out.mean_rel_error = std::clamp(out.mean_rel_error, best, worst);
        out.residual_norm = std::sqrt(squared_log);
        return out;
    }
};

inline void attach_r_squared(ReportRecord& rec, const std::vector<double>& values) {
    if (values.empty()) return;
    double sum = 0.0;
    for (double v : values) sum += v;
    rec.r_squared = sum / static_cast<double>(values.size());
    rec.r_squared_worst = *std::min_element(values.begin(), values.end());
    rec.r_squared_best = *std::max_element(values.begin(), values.end());
}

enum class RSquaredMode { None, PerSeries, PooledPerDomain };

/// Groups scored points into per-domain, per-mixture and aggregate records.
/// The aggregate averages per-domain means and extremizes worst/best, so for
/// a single mixture it is exactly the mean/worst/best across domains.
inline FitReport build_report(const std::vector<ScoredPoint>& points, RSquaredMode mode) {
    std::map<DomainId, ErrorAccumulator> by_domain;
    std::map<std::string, ErrorAccumulator> by_mixture;
    std::map<std::pair<std::string, DomainId>, std::pair<std::vector<double>, std::vector<double>>> series;
    std::map<DomainId, std::pair<std::vector<double>, std::vector<double>>> pooled;
    for (const auto& p : points) {
        by_domain[p.domain].add(p.actual, p.predicted);
        by_mixture[p.mixture_id].add(p.actual, p.predicted);
        if (mode == RSquaredMode::PerSeries) {
            auto& s = series[{p.mixture_id, p.domain}];
            s.first.push_back(p.actual);
            s.second.push_back(p.predicted);
        } else if (mode == RSquaredMode::PooledPerDomain) {
            auto& s = pooled[p.domain];
            s.first.push_back(p.actual);
            s.second.push_back(p.predicted);
        }
    }

    std::map<DomainId, std::vector<double>> r2_by_domain;
    std::map<std::string, std::vector<double>> r2_by_mixture;
    for (const auto& [key, values] : series) {
        if (values.first.size() < 3) {
            fail(ErrorCode::InsufficientData, "series (" + key.first + ", " + key.second.str() +
                                                  ") has fewer than 3 points for R^2");
        }
        const double r2 = r_squared_log(values.first, values.second);
        r2_by_domain[key.second].push_back(r2);
        r2_by_mixture[key.first].push_back(r2);
    }
    for (const auto& [domain, values] : pooled) {
        const bool varied = std::any_of(values.first.begin(), values.first.end(),
                                        [&](double a) { return a != values.first.front(); });
        if (values.first.size() >= 3 && varied) r2_by_domain[domain].push_back(r_squared_log(values.first, values.second));
    }

    FitReport report;
    std::vector<double> domain_r2;
    ReportRecord& agg = report.aggregate;
    agg.best_rel_error = std::numeric_limits<double>::infinity();
    double mean_sum = 0.0;
    double norm_sum = 0.0;
    for (const auto& [domain, acc] : by_domain) {
        ReportRecord rec = acc.record();
        if (auto it = r2_by_domain.find(domain); it != r2_by_domain.end()) {
            attach_r_squared(rec, it->second);
            domain_r2.push_back(*rec.r_squared);
        }
        mean_sum += rec.mean_rel_error;
        norm_sum += rec.residual_norm;
        agg.worst_rel_error = std::max(agg.worst_rel_error, rec.worst_rel_error);
        agg.best_rel_error = std::min(agg.best_rel_error, rec.best_rel_error);
        agg.points += rec.points;
        report.per_domain.emplace(domain, rec);
    }
    if (report.per_domain.empty()) {
        agg.best_rel_error = 0.0;
    } else {
        const auto m = static_cast<double>(report.per_domain.size());
        agg.mean_rel_error = std::clamp(mean_sum / m, agg.best_rel_error, agg.worst_rel_error);
        agg.residual_norm = norm_sum / m;
    }
    attach_r_squared(agg, domain_r2);

    for (const auto& [mixture, acc] : by_mixture) {
        ReportRecord rec = acc.record();
        if (auto it = r2_by_mixture.find(mixture); it != r2_by_mixture.end()) attach_r_squared(rec, it->second);
        report.per_mixture.emplace(mixture, rec);
    }
    return report;
}

inline std::vector<const Observation*> select_holdout(const ObservationSet& set, const HoldoutRule& rule) {
    std::vector<const Observation*> out;
    if (std::holds_alternative<LastStep>(rule)) {
        std::map<std::pair<std::string, DomainId>, const Observation*> last;
        for (const auto& o : set.observations) {
            auto [it, fresh] = last.try_emplace({o.mixture_id, o.domain}, &o);
            if (!fresh && o.step > it->second->step) it->second = &o;
        }
        for (const auto& [key, o] : last) out.push_back(o);
    } else {
        const auto& wanted = std::get<FullSeries>(rule).mixtures;
        for (const auto& o : set.observations) {
            if (wanted.empty() || wanted.contains(o.mixture_id)) out.push_back(&o);
        }
    }
    return out;
}

}  // namespace detail

/// Scores `coeffs` against held-out observations.
///
/// LastStep reports the relative error of the final observation of every
/// (mixture, domain) series. FullSeries additionally computes a log-space R^2
/// for each (mixture, domain) series (at least 3 points each) and averages
/// those per domain.
inline FitReport evaluate_holdout(const ObservationSet& set, const CoefficientSet& coeffs, const HoldoutRule& rule) {
    for (const auto& d : set.domains()) {
        if (!coeffs.contains(d)) fail(ErrorCode::MissingDomain, "no coefficients for domain '" + d.str() + "'");
    }
    const auto selected = detail::select_holdout(set, rule);
    if (selected.empty()) fail(ErrorCode::EmptyHoldout, "holdout rule selects no observations");
    std::vector<ScoredPoint> points;
    points.reserve(selected.size());
    for (const Observation* o : selected) {
        const double predicted = predict_loss(coeffs.at(o->domain), o->proportion, static_cast<double>(o->step));
        points.push_back({o->mixture_id, o->domain, o->step, o->loss, predicted});
    }
    const auto mode = std::holds_alternative<FullSeries>(rule) ? detail::RSquaredMode::PerSeries
                                                                : detail::RSquaredMode::None;
    return detail::build_report(points, mode);
}

/// Removes the final observation of every (mixture, domain) series: the
/// complement of the LastStep holdout.
inline ObservationSet drop_last_step(const ObservationSet& set) {
    const auto last = detail::select_holdout(set, LastStep{});
    std::set<const Observation*> held(last.begin(), last.end());
    ObservationSet out{{}, set.dataset, set.tokens_per_step};
    for (const auto& o : set.observations) {
        if (!held.contains(&o)) out.observations.push_back(o);
    }
    return out;
}

}  // namespace mixlaw
