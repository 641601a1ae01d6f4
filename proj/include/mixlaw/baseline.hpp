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

// Composite exponential mixing law L = c + k exp(sum_j t_j r_j), kept as a
// comparison baseline for the bivariate law.

#include <mixlaw/core.hpp>
#include <mixlaw/fitting.hpp>
#include <mixlaw/lsq.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mixlaw {

struct ExponentialLawCoefficients {
    double c = 0.0;
    double k = 1.0;
    std::vector<double> t;
    // t[j] weighs the proportion of domains[j]. Empty: the recipe's own
    // (sorted) domain order.
    std::vector<DomainId> domains;
};

inline double predict_exponential(const ExponentialLawCoefficients& coeffs, const MixtureRecipe& recipe) {
    if (recipe.size() != coeffs.t.size()) {
        fail(ErrorCode::DimensionMismatch, "recipe has " + std::to_string(recipe.size()) + " domains but t has " +
                                               std::to_string(coeffs.t.size()) + " weights");
    }
    double z = 0.0;
    if (coeffs.domains.empty()) {
        std::size_t j = 0;
        for (const auto& [d, r] : recipe.proportions()) z += coeffs.t[j++] * r;
    } else {
        if (coeffs.domains.size() != coeffs.t.size()) fail(ErrorCode::DimensionMismatch, "domains and t differ in length");
        for (std::size_t j = 0; j < coeffs.t.size(); ++j) z += coeffs.t[j] * recipe.at(coeffs.domains[j]);
    }
    return coeffs.c + coeffs.k * std::exp(z);
}

enum class MixingLaw { BiMix, Exponential };

/// Number of fitted coefficients for m domains and n step targets.
/// Exponential: m^2 n + 2 m n. Bivariate: 2m for a single target (proportion
/// only), 5m when the coefficients are shared across n >= 2 targets.
inline std::uint64_t count_coefficients(MixingLaw law, std::uint64_t m, std::uint64_t n) {
    if (m < 1 || n < 1) fail(ErrorCode::InvalidArgument, "m and n must be >= 1");
    if (law == MixingLaw::Exponential) return m * m * n + 2 * m * n;
    return n == 1 ? 2 * m : 5 * m;
}

/// Mixture recipes implied by an observation set: every mixture's recipe is
/// the proportions its observations carry. Throws MissingRecipe when the
/// proportions of a mixture do not cover the unit simplex.
inline std::map<std::string, MixtureRecipe> recipes_from_observations(const ObservationSet& set) {
    std::map<std::string, MixtureRecipe::Map> raw;
    for (const auto& o : set.observations) raw[o.mixture_id].insert_or_assign(o.domain, o.proportion);
    std::map<std::string, MixtureRecipe> out;
    for (const auto& [id, props] : raw) {
        double total = 0.0;
        for (const auto& [d, v] : props) total += v;
        if (std::abs(total - 1.0) > kRecipeInputTolerance) {
            fail(ErrorCode::MissingRecipe, "observed proportions of mixture '" + id + "' sum to " + std::to_string(total) +
                                               "; the full recipe is not available");
        }
        out.emplace(id, MixtureRecipe::exact(props));
    }
    return out;
}

struct ExponentialFit {
    ExponentialLawCoefficients coefficients;
    DomainFitInfo info;
};

/// Least squares on log loss for one target domain. Every observation of the
/// target must come from the same step, and each mixture needs a recipe.
inline ExponentialFit fit_exponential(const ObservationSet& set, const DomainId& target,
                                      const std::map<std::string, MixtureRecipe>& recipes, const FitConfig& config = {}) {
    std::vector<const Observation*> obs;
    std::set<std::int64_t> steps;
    for (const auto& o : set.observations) {
        if (o.domain == target) {
            obs.push_back(&o);
            steps.insert(o.step);
        }
    }
    if (steps.size() > 1) fail(ErrorCode::MixedSteps, "observations of '" + target.str() + "' span several steps");
    std::sort(obs.begin(), obs.end(), [](const Observation* a, const Observation* b) { return a->mixture_id < b->mixture_id; });

    std::vector<DomainId> domains;
    std::vector<std::vector<double>> rows;
    std::vector<double> log_loss;
    for (const auto* o : obs) {
        auto it = recipes.find(o->mixture_id);
        if (it == recipes.end()) fail(ErrorCode::MissingRecipe, "no recipe for mixture '" + o->mixture_id + "'");
        if (domains.empty()) domains = it->second.domains();
        if (it->second.domains() != domains) {
            fail(ErrorCode::DimensionMismatch, "mixture '" + o->mixture_id + "' covers a different domain set");
        }
        std::vector<double> row;
        for (const auto& d : domains) row.push_back(it->second.at(d));
        rows.push_back(std::move(row));
        log_loss.push_back(std::log(o->loss));
    }
    const std::size_t m = domains.size();
    if (obs.empty() || obs.size() < m + 2) {
        fail(ErrorCode::InsufficientData, "domain '" + target.str() + "' has " + std::to_string(obs.size()) +
                                              " observations; the exponential law needs at least m + 2 = " +
                                              std::to_string(m + 2));
    }

    const auto n_params = static_cast<Eigen::Index>(m + 2);
    Eigen::VectorXd lower = Eigen::VectorXd::Constant(n_params, -50.0);
    Eigen::VectorXd upper = Eigen::VectorXd::Constant(n_params, 50.0);
    lower[0] = -30.0;
    upper[0] = 30.0;
    lower[1] = 1e-12;
    upper[1] = 1e6;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto* o : obs) {
        lo = std::min(lo, o->loss);
        hi = std::max(hi, o->loss);
    }
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n_params);
    x0[0] = lo;
    x0[1] = hi - lo;

    auto model = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
        const auto rows_n = static_cast<Eigen::Index>(rows.size());
        r.resize(rows_n);
        if (J) J->resize(rows_n, n_params);
        for (Eigen::Index i = 0; i < rows_n; ++i) {
            const auto& row = rows[static_cast<std::size_t>(i)];
            double z = 0.0;
            for (std::size_t j = 0; j < m; ++j) z += x[static_cast<Eigen::Index>(j) + 2] * row[j];
            const double e = std::exp(z);
            const double pred = x[0] + x[1] * e;
            if (!(pred > 0.0) || !std::isfinite(pred)) return false;
            r[i] = std::log(pred) - log_loss[static_cast<std::size_t>(i)];
            if (J) {
                (*J)(i, 0) = 1.0 / pred;
                (*J)(i, 1) = e / pred;
                for (std::size_t j = 0; j < m; ++j) (*J)(i, static_cast<Eigen::Index>(j) + 2) = x[1] * e * row[j] / pred;
            }
        }
        return true;
    };
    const LsqResult res = minimize_bounded(model, x0, lower, upper, config.solver_options());

    ExponentialFit out;
    out.coefficients.c = res.x[0];
    out.coefficients.k = res.x[1];
    for (std::size_t j = 0; j < m; ++j) out.coefficients.t.push_back(res.x[static_cast<Eigen::Index>(j) + 2]);
    out.coefficients.domains = domains;
    out.info = {res.converged, res.iterations, 2.0 * res.cost, res.stop_reason};
    return out;
}

/// Same as above with recipes recovered from the observations themselves.
inline ExponentialFit fit_exponential(const ObservationSet& set, const DomainId& target, const FitConfig& config = {}) {
    return fit_exponential(set, target, recipes_from_observations(set), config);
}

}  // namespace mixlaw
