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

#include <Eigen/Core>

#include <cmath>
#include <map>

namespace mixlaw {

/// L(r, s) = A r^-alpha (B s^-beta + C), for r in (0, 1] and s >= 1.
inline double predict_loss(const BiMixCoefficients& c, double r, double s) {
    if (!(r > 0.0 && r <= 1.0)) fail(ErrorCode::OutOfDomain, "proportion must lie in (0, 1], got " + std::to_string(r));
    if (!(s >= 1.0)) fail(ErrorCode::OutOfDomain, "step must be >= 1, got " + std::to_string(s));
    return c.A * std::pow(r, -c.alpha) * (c.B * std::pow(s, -c.beta) + c.C);
}

/// Per-domain losses for every domain of `recipe` after `s` steps.
inline std::map<DomainId, double> predict_mixture(const CoefficientSet& coeffs, const MixtureRecipe& recipe, double s) {
    std::map<DomainId, double> out;
    for (const auto& [domain, r] : recipe.proportions()) {
        auto it = coeffs.find(domain);
        if (it == coeffs.end()) fail(ErrorCode::UnknownDomain, "no coefficients for domain '" + domain.str() + "'");
        out.emplace(domain, predict_loss(it->second, r, s));
    }
    return out;
}

/// The fitting parameterization (log P, log Q, alpha, beta) of the law
///   L = P r^-alpha s^-beta + Q r^-alpha,   P = A B,  Q = A C.
/// It drops the redundant scale between A and (B, C).
using LawParameters = Eigen::Vector4d;

inline LawParameters to_parameters(const BiMixCoefficients& c) {
    return {std::log(c.A * c.B), std::log(c.A * c.C), c.alpha, c.beta};
}

inline BiMixCoefficients from_parameters(const LawParameters& p) {
    // + 0.0 turns a -0.0 exponent left by the bound projection into +0.0.
    return {1.0, std::exp(p[0]), std::exp(p[1]), p[2] + 0.0, p[3] + 0.0};
}

namespace detail {

inline double log_add_exp(double a, double b) {
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

// Share of the s-dependent term in B s^-beta + C, computed in log space.
inline double decaying_share(const LawParameters& p, double log_s) {
    const double t = p[0] - p[3] * log_s - p[1];
    return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

}  // namespace detail

/// log L at (r, s) from log r and log s.
inline double log_predicted_loss(const LawParameters& p, double log_r, double log_s) {
    return -p[2] * log_r + detail::log_add_exp(p[0] - p[3] * log_s, p[1]);
}

/// Gradient of log L with respect to (log P, log Q, alpha, beta).
inline Eigen::Vector4d log_loss_gradient(const LawParameters& p, double log_r, double log_s) {
    const double w = detail::decaying_share(p, log_s);
    return {w, 1.0 - w, -log_r, -log_s * w};
}

}  // namespace mixlaw
