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
#include <mixlaw/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

namespace mixlaw {

struct OptimizeConfig {
    std::int64_t step_budget = 1;
    double min_proportion = 1e-4;  // floor applied to every domain
    double lambda_tolerance = 1e-12;
    int max_bisection_iters = 200;
};

/// Sum of per-domain predicted losses. The recipe must cover exactly the
/// domains of `coeffs`.
inline double objective(const CoefficientSet& coeffs, const MixtureRecipe& recipe, double s) {
    if (recipe.size() != coeffs.size()) fail(ErrorCode::DomainMismatch, "recipe and coefficients cover different domains");
    double total = 0.0;
    for (const auto& [domain, c] : coeffs) {
        if (!recipe.contains(domain)) fail(ErrorCode::DomainMismatch, "recipe lacks domain '" + domain.str() + "'");
        total += predict_loss(c, recipe.at(domain), s);
    }
    return total;
}

/// Spread of the marginal losses alpha A g r^-(1+alpha), g = B s^-beta + C,
/// over domains that are not held at the floor: (max - min) / mean. Zero at
/// an exact interior stationary point.
inline double kkt_residual(const CoefficientSet& coeffs, const MixtureRecipe& recipe, double s, double floor) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double sum = 0.0;
    int n = 0;
    for (const auto& [domain, c] : coeffs) {
        const double r = recipe.at(domain);
        if (c.alpha <= 0.0 || r <= floor * (1.0 + 1e-9)) continue;
        const double g = c.B * std::pow(s, -c.beta) + c.C;
        const double marginal = c.alpha * c.A * g * std::pow(r, -(1.0 + c.alpha));
        lo = std::min(lo, marginal);
        hi = std::max(hi, marginal);
        sum += marginal;
        ++n;
    }
    if (n < 2) return 0.0;
    return (hi - lo) / (sum / n);
}

struct OptimizeResult {
    MixtureRecipe recipe;
    double objective = 0.0;
    double lambda = 0.0;
    std::set<DomainId> floored;
    double kkt_residual = 0.0;
};

/// Minimizes the summed predicted loss over the simplex with every
/// proportion at least `min_proportion`.
///
/// Stationarity of the Lagrangian gives r_i(lambda) = (alpha_i A_i g_i /
/// lambda)^(1 / (1 + alpha_i)); the sum of these is strictly decreasing in
/// lambda, so the multiplier is found by bisection in log lambda. Domains
/// with alpha = 0 gain nothing from extra mass and sit at the floor, as do
/// domains whose stationary share falls below it (active-set loop).
inline OptimizeResult optimize_mixture(const CoefficientSet& coeffs, const OptimizeConfig& config) {
    if (coeffs.empty()) fail(ErrorCode::EmptyInput, "no coefficients");
    const double eps = config.min_proportion;
    const auto m = static_cast<double>(coeffs.size());
    if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "min_proportion must be positive");
    if (m * eps >= 1.0) fail(ErrorCode::InfeasibleFloor, "floor times domain count leaves no feasible mass");
    if (config.step_budget < 1) fail(ErrorCode::OutOfDomain, "step budget must be >= 1");
    const double s = static_cast<double>(config.step_budget);

    struct Term {
        DomainId domain;
        double alpha;
        double weight;  // alpha A g
        bool pinned;
    };
    std::vector<Term> terms;
    bool any_alpha = false;
    for (const auto& [domain, c] : coeffs) {
        if (const auto problem = c.invariant_problem(); !problem.empty()) {
            fail(ErrorCode::InvariantViolation, "domain '" + domain.str() + "': " + problem);
        }
        const double g = c.B * std::pow(s, -c.beta) + c.C;
        terms.push_back({domain, c.alpha, c.alpha * c.A * g, c.alpha <= 0.0});
        any_alpha = any_alpha || c.alpha > 0.0;
    }
    if (!any_alpha) fail(ErrorCode::AllAlphaZero, "every domain has alpha = 0; the objective does not depend on the mixture");

    auto share = [](const Term& t, double log_lambda) {
        return std::exp((std::log(t.weight) - log_lambda) / (1.0 + t.alpha));
    };

    double log_lambda = 0.0;
    for (std::size_t round = 0; round <= terms.size(); ++round) {
        double mass = 1.0;
        std::size_t free_count = 0;
        double log_lo = std::numeric_limits<double>::infinity();
        double log_hi = -std::numeric_limits<double>::infinity();
        for (const auto& t : terms) {
            if (t.pinned) {
                mass -= eps;
                continue;
            }
            ++free_count;
        }
        for (const auto& t : terms) {
            if (t.pinned) continue;
            // r_i(lambda) == mass at the first bound, == mass / free_count at the second.
            log_lo = std::min(log_lo, std::log(t.weight) - (1.0 + t.alpha) * std::log(mass));
            log_hi = std::max(log_hi, std::log(t.weight) - (1.0 + t.alpha) * std::log(mass / static_cast<double>(free_count)));
        }
        auto total = [&](double ll) {
            double sum = 0.0;
            for (const auto& t : terms) {
                if (!t.pinned) sum += share(t, ll);
            }
            return sum;
        };
        for (int it = 0; it < config.max_bisection_iters && log_hi - log_lo > config.lambda_tolerance; ++it) {
            const double mid = 0.5 * (log_lo + log_hi);
            if (total(mid) > mass) {
                log_lo = mid;
            } else {
                log_hi = mid;
            }
        }
        log_lambda = 0.5 * (log_lo + log_hi);

        bool pinned_more = false;
        for (auto& t : terms) {
            if (!t.pinned && share(t, log_lambda) < eps) {
                t.pinned = true;
                pinned_more = true;
            }
        }
        if (!pinned_more) break;
    }

    double mass = 1.0;
    double free_sum = 0.0;
    for (const auto& t : terms) {
        if (t.pinned) {
            mass -= eps;
        } else {
            free_sum += share(t, log_lambda);
        }
    }
    // Absorb the residual bisection error into the free shares so the
    // recipe lands on the simplex and floored entries stay exactly at eps.
    const double scale = mass / free_sum;
    MixtureRecipe::Map proportions;
    std::set<DomainId> floored;
    for (const auto& t : terms) {
        if (t.pinned) {
            proportions.emplace(t.domain, eps);
            floored.insert(t.domain);
        } else {
            proportions.emplace(t.domain, std::max(eps, share(t, log_lambda) * scale));
        }
    }
    auto recipe = MixtureRecipe::exact(std::move(proportions));
    const double value = objective(coeffs, recipe, s);
    const double residual = kkt_residual(coeffs, recipe, s, eps);
    return {std::move(recipe), value, std::exp(log_lambda), std::move(floored), residual};
}

struct OracleResult {
    MixtureRecipe recipe;
    double objective;
};

/// Exhaustive search over the simplex grid with spacing `resolution`, every
/// entry at least one grid step. For verification only: the grid grows
/// combinatorially, so at most 4 domains are accepted.
inline OracleResult brute_force_oracle(const CoefficientSet& coeffs, std::int64_t s, double resolution) {
    const std::size_t m = coeffs.size();
    if (m == 0) fail(ErrorCode::EmptyInput, "no coefficients");
    if (m > 4) fail(ErrorCode::TooManyDomains, "grid search supports at most 4 domains");
    if (!(resolution > 0.0) || resolution > 1.0) fail(ErrorCode::InvalidArgument, "resolution must lie in (0, 1]");
    const auto units = static_cast<int>(std::llround(1.0 / resolution));
    if (std::abs(units * resolution - 1.0) > 1e-9) fail(ErrorCode::InvalidArgument, "resolution must divide 1");
    if (units < static_cast<int>(m)) fail(ErrorCode::InvalidArgument, "grid too coarse for the domain count");

    std::vector<DomainId> domains;
    std::vector<BiMixCoefficients> laws;
    for (const auto& [d, c] : coeffs) {
        domains.push_back(d);
        laws.push_back(c);
    }
    const double steps = static_cast<double>(s);
    const double n = static_cast<double>(units);

    struct Best {
        double value = std::numeric_limits<double>::infinity();
        std::vector<int> counts;
    };
    // One chunk per count of the first domain; chunks reduce in order, so
    // ties resolve to the lexicographically smallest grid point.
    const auto first_max = static_cast<std::size_t>(units - static_cast<int>(m) + 1);
    std::vector<Best> chunks(first_max);
    parallel_for(first_max, [&](std::size_t chunk) {
        std::vector<int> counts(m, 1);
        counts[0] = static_cast<int>(chunk) + 1;
        Best& best = chunks[chunk];
        auto visit = [&](auto&& self, std::size_t pos, int remaining) -> void {
            if (pos == m - 1) {
                counts[pos] = remaining;
                double v = 0.0;
                for (std::size_t i = 0; i < m; ++i) v += predict_loss(laws[i], counts[i] / n, steps);
                if (v < best.value) {
                    best.value = v;
                    best.counts = counts;
                }
                return;
            }
            for (int c = 1; c <= remaining - static_cast<int>(m - 1 - pos); ++c) {
                counts[pos] = c;
                self(self, pos + 1, remaining - c);
            }
        };
        if (m == 1) {
            if (counts[0] == units) {
                best.value = predict_loss(laws[0], 1.0, steps);
                best.counts = counts;
            }
            return;
        }
        visit(visit, 1, units - counts[0]);
    });

    Best best;
    for (auto& b : chunks) {
        if (b.value < best.value) best = std::move(b);
    }
    MixtureRecipe::Map raw;
    for (std::size_t i = 0; i < m; ++i) raw.emplace(domains[i], best.counts[i] / n);
    return {make_recipe(raw), best.value};
}

}  // namespace mixlaw
