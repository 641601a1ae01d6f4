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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace mixlaw {

struct LsqOptions {
    int max_iterations = 2000;
    double relative_tolerance = 1e-12;  // on the objective decrease of an accepted step
    double gradient_tolerance = 1e-10;  // on the projected gradient, infinity norm
};

struct LsqResult {
    Eigen::VectorXd x;
    double cost = 0.0;  // 0.5 * ||r||^2
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    std::string stop_reason;
};

/// Box-constrained Levenberg-Marquardt.
///
/// `model(x, residuals, jacobian)` fills the residual vector and, when the
/// pointer is non-null, the Jacobian. It returns false when x cannot be
/// evaluated (e.g. a prediction leaves the domain of the log); the solver
/// treats that as a rejected step.
///
/// Bounds are handled by an active set: a variable sitting on a bound whose
/// gradient points outward is frozen for the iteration, the damped normal
/// equations are solved over the rest, and the trial point is projected back
/// into the box. Damping follows Nielsen's gain-ratio update with Marquardt
/// diagonal scaling.
template <typename Model>
LsqResult minimize_bounded(Model&& model, Eigen::VectorXd x, const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper, const LsqOptions& options = {}) {
    const Eigen::Index n = x.size();
    x = x.cwiseMax(lower).cwiseMin(upper);

    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    if (!model(x, r, &J)) fail(ErrorCode::NumericalFailure, "least-squares start point cannot be evaluated");
    double cost = 0.5 * r.squaredNorm();

    LsqResult result;
    double mu = -1.0;
    double nu = 2.0;
    Eigen::VectorXd r_trial;
    Eigen::MatrixXd J_trial;

    for (int iter = 0;; ++iter) {
        const Eigen::VectorXd g = J.transpose() * r;
        std::vector<Eigen::Index> free;
        double pg_norm = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool blocked = (x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0);
            if (!blocked) {
                free.push_back(i);
                pg_norm = std::max(pg_norm, std::abs(g[i]));
            }
        }
        result.iterations = iter;
        result.gradient_norm = pg_norm;
        if (cost == 0.0 || pg_norm < options.gradient_tolerance) {
            result.converged = true;
            result.stop_reason = "gradient";
            break;
        }
        if (iter >= options.max_iterations) {
            result.stop_reason = "max_iterations";
            break;
        }

        const Eigen::MatrixXd H = J.transpose() * J;
        const double max_diag = std::max(H.diagonal().maxCoeff(), std::numeric_limits<double>::min());
        if (mu < 0.0) mu = 1e-3 * max_diag;

        const auto k = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd Hf(k, k);
        Eigen::VectorXd gf(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            gf[a] = g[free[a]];
            for (Eigen::Index b = 0; b < k; ++b) Hf(a, b) = H(free[a], free[b]);
        }

        bool accepted = false;
        bool stalled = false;
        bool small_decrease = false;
        while (!accepted) {
            Eigen::MatrixXd M = Hf;
            for (Eigen::Index a = 0; a < k; ++a) M(a, a) += mu * std::max(Hf(a, a), 1e-12 * max_diag);
            const Eigen::VectorXd df = M.ldlt().solve(-gf);
            Eigen::VectorXd trial = x;
            for (Eigen::Index a = 0; a < k; ++a) trial[free[a]] += df[a];
            trial = trial.cwiseMax(lower).cwiseMin(upper);
            const Eigen::VectorXd step = trial - x;
            if (!step.allFinite() || step.norm() <= 1e-15 * (x.norm() + 1e-15)) {
                stalled = true;
                break;
            }
            if (model(trial, r_trial, &J_trial)) {
                const double trial_cost = 0.5 * r_trial.squaredNorm();
                if (std::isfinite(trial_cost) && trial_cost < cost) {
                    const double predicted = -(g.dot(step) + 0.5 * step.dot(H * step));
                    const double actual = cost - trial_cost;
                    const double rho = predicted > 0.0 ? actual / predicted : 0.0;
                    mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
                    nu = 2.0;
                    small_decrease = actual < options.relative_tolerance * cost && rho > 0.25;
                    x = trial;
                    r.swap(r_trial);
                    J.swap(J_trial);
                    cost = trial_cost;
                    accepted = true;
                    continue;
                }
            }
            mu *= nu;
            nu *= 2.0;
            if (!std::isfinite(mu) || mu > 1e100) {
                stalled = true;
                break;
            }
        }
        if (stalled) {
            result.iterations = iter + 1;
            result.converged = true;
            result.stop_reason = "step";
            break;
        }
        if (small_decrease) {
            result.iterations = iter + 1;
            result.converged = true;
            result.stop_reason = "objective";
            break;
        }
    }
    result.x = x;
    result.cost = cost;
    return result;
}

}  // namespace mixlaw
