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

#include <mixlaw/error.hpp>

#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace mixlaw {

/// Name of a data source within a multi-source corpus. Never empty.
class DomainId {
public:
    explicit DomainId(std::string name) : name_(std::move(name)) {
        if (name_.empty()) fail(ErrorCode::InvalidArgument, "domain name must be non-empty");
    }

    const std::string& str() const noexcept { return name_; }

    friend auto operator<=>(const DomainId&, const DomainId&) = default;
    friend bool operator==(const DomainId&, const DomainId&) = default;

private:
    std::string name_;
};

inline constexpr double kRecipeInputTolerance = 1e-6;
inline constexpr double kRecipeStoredTolerance = 1e-12;

class MixtureRecipe;
inline MixtureRecipe make_recipe(const std::map<DomainId, double>& raw);

/// Domain proportions on the unit simplex. Every stored proportion is
/// strictly positive and the total is 1 up to kRecipeStoredTolerance.
class MixtureRecipe {
public:
    using Map = std::map<DomainId, double>;

    /// Accepts proportions that already sum to 1 within kRecipeInputTolerance.
    /// Values are stored untouched when their sum is within the stored
    /// tolerance and rescaled otherwise.
    static MixtureRecipe exact(Map proportions);

    const Map& proportions() const noexcept { return proportions_; }
    std::size_t size() const noexcept { return proportions_.size(); }
    bool contains(const DomainId& d) const { return proportions_.contains(d); }
    double at(const DomainId& d) const;
    double sum() const noexcept;

    std::vector<DomainId> domains() const;

    friend bool operator==(const MixtureRecipe&, const MixtureRecipe&) = default;

private:
    explicit MixtureRecipe(Map p) : proportions_(std::move(p)) {}
    friend MixtureRecipe make_recipe(const Map& raw);

    Map proportions_;
};

inline double MixtureRecipe::at(const DomainId& d) const {
    auto it = proportions_.find(d);
    if (it == proportions_.end()) fail(ErrorCode::UnknownDomain, "recipe has no domain '" + d.str() + "'");
    return it->second;
}

inline double MixtureRecipe::sum() const noexcept {
    double s = 0.0;
    for (const auto& [d, v] : proportions_) s += v;
    return s;
}

inline std::vector<DomainId> MixtureRecipe::domains() const {
    std::vector<DomainId> out;
    out.reserve(proportions_.size());
    for (const auto& [d, v] : proportions_) out.push_back(d);
    return out;
}

namespace detail {

inline void check_recipe_entries(const MixtureRecipe::Map& raw) {
    if (raw.empty()) fail(ErrorCode::EmptyRecipe, "recipe has no entries");
    for (const auto& [d, v] : raw) {
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "proportion of '" + d.str() + "' is not finite");
        if (v < 0.0) fail(ErrorCode::InvalidArgument, "proportion of '" + d.str() + "' is negative");
    }
}

inline MixtureRecipe::Map normalized(const MixtureRecipe::Map& raw, double total) {
    MixtureRecipe::Map out;
    for (const auto& [d, v] : raw) out.emplace(d, v / total);
    return out;
}

}  // namespace detail

/// Normalizes non-negative weights onto the simplex. Zero entries are
/// rejected: the loss law diverges at a zero proportion, so callers must
/// apply a floor first.
inline MixtureRecipe make_recipe(const MixtureRecipe::Map& raw) {
    detail::check_recipe_entries(raw);
    double total = 0.0;
    for (const auto& [d, v] : raw) total += v;
    if (total == 0.0) fail(ErrorCode::ZeroMass, "recipe weights sum to zero");
    for (const auto& [d, v] : raw) {
        if (v == 0.0) fail(ErrorCode::ZeroDomain, "domain '" + d.str() + "' has zero weight; apply a floor first");
    }
    return MixtureRecipe(detail::normalized(raw, total));
}

inline MixtureRecipe MixtureRecipe::exact(Map proportions) {
    detail::check_recipe_entries(proportions);
    double total = 0.0;
    for (const auto& [d, v] : proportions) total += v;
    if (std::abs(total - 1.0) > kRecipeInputTolerance) {
        fail(ErrorCode::InvalidArgument,
             "proportions sum to " + std::to_string(total) + ", expected 1 within 1e-6");
    }
    for (const auto& [d, v] : proportions) {
        if (v == 0.0) fail(ErrorCode::ZeroDomain, "domain '" + d.str() + "' has zero proportion");
    }
    if (std::abs(total - 1.0) <= kRecipeStoredTolerance) return MixtureRecipe(std::move(proportions));
    return make_recipe(proportions);
}

/// One validation-loss measurement: loss on `domain` after `step` updates of
/// training on mixture `mixture_id`, where the domain had `proportion`.
struct Observation {
    std::string mixture_id;
    DomainId domain;
    double proportion;
    std::int64_t step;
    double loss;  // nats per token

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct ObservationSet {
    std::vector<Observation> observations;
    std::optional<std::string> dataset;
    std::optional<std::int64_t> tokens_per_step;

    std::set<DomainId> domains() const {
        std::set<DomainId> out;
        for (const auto& o : observations) out.insert(o.domain);
        return out;
    }

    std::set<std::string> mixture_ids() const {
        std::set<std::string> out;
        for (const auto& o : observations) out.insert(o.mixture_id);
        return out;
    }

    friend bool operator==(const ObservationSet&, const ObservationSet&) = default;
};

enum class ViolationKind {
    InvalidMixtureId,
    InvalidProportion,
    InvalidStep,
    InvalidLoss,
    DuplicateStep,
    InconsistentProportion,
    InvalidTokensPerStep,
};

constexpr const char* to_string(ViolationKind k) noexcept {
    switch (k) {
    case ViolationKind::InvalidMixtureId: return "InvalidMixtureId";
    case ViolationKind::InvalidProportion: return "InvalidProportion";
    case ViolationKind::InvalidStep: return "InvalidStep";
    case ViolationKind::InvalidLoss: return "InvalidLoss";
    case ViolationKind::DuplicateStep: return "DuplicateStep";
    case ViolationKind::InconsistentProportion: return "InconsistentProportion";
    case ViolationKind::InvalidTokensPerStep: return "InvalidTokensPerStep";
    }
    return "Unknown";
}

struct Violation {
    ViolationKind kind;
    std::size_t index;  // position of the offending observation in the set
    std::string detail;
};

/// Checks every ObservationSet invariant. Returns one Violation per broken
/// rule; an empty result means the set is usable.
///
/// Steps within a (mixture, domain) series are treated as a set: the series
/// is ordered by step, so only a repeated step can break strict increase.
inline std::vector<Violation> validate_observations(const ObservationSet& set) {
    std::vector<Violation> out;
    if (set.tokens_per_step && *set.tokens_per_step < 1) {
        out.push_back({ViolationKind::InvalidTokensPerStep, 0, "tokens_per_step must be positive"});
    }
    using Key = std::pair<std::string, DomainId>;
    std::map<Key, std::pair<double, std::size_t>> proportion_of;
    std::map<std::tuple<std::string, DomainId, std::int64_t>, std::size_t> seen_step;
    for (std::size_t i = 0; i < set.observations.size(); ++i) {
        const auto& o = set.observations[i];
        const std::string where = "(" + o.mixture_id + ", " + o.domain.str() + ", step " + std::to_string(o.step) + ")";
        if (o.mixture_id.empty()) out.push_back({ViolationKind::InvalidMixtureId, i, "empty mixture id"});
        if (!(o.proportion > 0.0 && o.proportion <= 1.0)) {
            out.push_back({ViolationKind::InvalidProportion, i, where + ": proportion must lie in (0, 1]"});
        }
        if (o.step < 1) out.push_back({ViolationKind::InvalidStep, i, where + ": step must be >= 1"});
        if (!(o.loss > 0.0) || !std::isfinite(o.loss)) {
            out.push_back({ViolationKind::InvalidLoss, i, where + ": loss must be positive and finite"});
        }
        auto [pit, fresh] = proportion_of.try_emplace(Key{o.mixture_id, o.domain}, o.proportion, i);
        if (!fresh && pit->second.first != o.proportion) {
            out.push_back({ViolationKind::InconsistentProportion, i,
                           where + ": proportion differs from observation #" + std::to_string(pit->second.second)});
        }
        auto [sit, fresh_step] = seen_step.try_emplace({o.mixture_id, o.domain, o.step}, i);
        if (!fresh_step) {
            out.push_back({ViolationKind::DuplicateStep, i,
                           where + ": step repeats observation #" + std::to_string(sit->second)});
        }
    }
    return out;
}

/// Coefficients of the per-domain law L(r, s) = A r^-alpha (B s^-beta + C).
struct BiMixCoefficients {
    double A = 1.0;
    double B = 1.0;
    double C = 0.0;
    double alpha = 0.0;
    double beta = 0.0;

    static constexpr double kMaxExponent = 5.0;

    /// Empty string when every invariant holds, otherwise the first problem.
    std::string invariant_problem() const {
        if (!(std::isfinite(A) && std::isfinite(B) && std::isfinite(C) && std::isfinite(alpha) &&
              std::isfinite(beta)))
            return "coefficients must be finite";
        if (!(A > 0.0)) return "A must be positive";
        if (!(B > 0.0)) return "B must be positive";
        if (C < 0.0) return "C must be non-negative";
        if (alpha < 0.0 || alpha > kMaxExponent) return "alpha must lie in [0, 5]";
        if (beta < 0.0 || beta > kMaxExponent) return "beta must lie in [0, 5]";
        return {};
    }

    /// Folds A into B and C. The law is unchanged.
    BiMixCoefficients canonical() const { return {1.0, A * B, A * C, alpha, beta}; }

    friend bool operator==(const BiMixCoefficients&, const BiMixCoefficients&) = default;
};

using CoefficientSet = std::map<DomainId, BiMixCoefficients>;

struct EntropyRecord {
    std::optional<double> se;
    std::optional<double> je;
    std::optional<double> ce;
    std::optional<double> vne;

    friend bool operator==(const EntropyRecord&, const EntropyRecord&) = default;
};

struct EntropyProfile {
    std::map<DomainId, EntropyRecord> per_domain;

    friend bool operator==(const EntropyProfile&, const EntropyProfile&) = default;
};

/// Error statistics over some group of predictions. Relative errors are
/// |actual - predicted| / actual; R^2 is computed on log losses.
struct ReportRecord {
    double mean_rel_error = 0.0;
    double worst_rel_error = 0.0;
    double best_rel_error = 0.0;
    double residual_norm = 0.0;
    std::optional<double> r_squared;
    std::optional<double> r_squared_worst;
    std::optional<double> r_squared_best;
    std::size_t points = 0;
    std::optional<bool> converged;

    friend bool operator==(const ReportRecord&, const ReportRecord&) = default;
};

struct FitReport {
    std::map<DomainId, ReportRecord> per_domain;
    std::map<std::string, ReportRecord> per_mixture;
    ReportRecord aggregate;

    friend bool operator==(const FitReport&, const FitReport&) = default;
};

}  // namespace mixlaw
