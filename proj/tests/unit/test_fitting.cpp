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

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

namespace mixlaw {
namespace {

ObservationSet grid(const BiMixCoefficients& c, std::vector<double> rs, std::vector<std::int64_t> steps,
                    const std::string& domain = "a") {
    ObservationSet set;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        for (auto s : steps) {
            set.observations.push_back({"m" + std::to_string(i), DomainId(domain), rs[i], s, predict_loss(c, rs[i], s)});
        }
    }
    return set;
}

TEST(Lsq, ProjectsOntoActiveBound) {
    auto model = [](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
        r.resize(1);
        r[0] = x[0] - 3.0;
        if (J) *J = Eigen::MatrixXd::Ones(1, 1);
        return true;
    };
    const auto res = minimize_bounded(model, Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 0.0),
                                      Eigen::VectorXd::Constant(1, 2.0), {});
    EXPECT_TRUE(res.converged);
    EXPECT_EQ(res.x[0], 2.0);
}

TEST(Lsq, SolvesRosenbrock) {
    auto model = [](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
        r.resize(2);
        r << 10 * (x[1] - x[0] * x[0]), 1 - x[0];
        if (J) {
            J->resize(2, 2);
            *J << -20 * x[0], 10, -1, 0;
        }
        return true;
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1;
    const auto res = minimize_bounded(model, x0, Eigen::VectorXd::Constant(2, -5), Eigen::VectorXd::Constant(2, 5), {});
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.x[0], 1.0, 1e-8);
    EXPECT_NEAR(res.x[1], 1.0, 1e-8);
}

TEST(Lsq, UnevaluableStartThrows) {
    auto model = [](const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd*) { return false; };
    EXPECT_MIXLAW_ERROR(minimize_bounded(model, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, -1),
                                         Eigen::VectorXd::Constant(1, 1), {}),
                        ErrorCode::NumericalFailure);
}

TEST(FitBimix, RecoversNoiselessGenerator) {
    const BiMixCoefficients truth{1, 50, 2, 0.5, 0.5};
    const auto set = grid(truth, {0.1, 0.2, 0.4}, {1000, 2000, 5000, 10000});
    const auto fit = fit_bimix(set);
    const auto& c = fit.coefficients.at(DomainId("a"));
    EXPECT_EQ(c.A, 1.0);
    EXPECT_TRUE(fit.info.at(DomainId("a")).converged);
    for (double r : {0.1, 0.15, 0.2, 0.3, 0.4}) {
        for (double s : {1000.0, 3000.0, 10000.0}) {
            EXPECT_LT(relative_error(predict_loss(truth, r, s), predict_loss(c, r, s)), 1e-6);
        }
    }
    EXPECT_EQ(fit.min_step, 1000);
    EXPECT_EQ(fit.max_step, 10000);
}

TEST(FitBimix, ConstantLossSurface) {
    ObservationSet set;
    for (double r : {0.1, 0.3, 0.6}) {
        for (std::int64_t s : {100, 1000, 10000}) set.observations.push_back({"m" + std::to_string(r), DomainId("a"), r, s, 3.0});
    }
    const auto fit = fit_bimix(set);
    const auto& c = fit.coefficients.at(DomainId("a"));
    for (double r : {0.1, 0.2, 0.6}) {
        for (double s : {100.0, 5000.0, 10000.0}) EXPECT_NEAR(predict_loss(c, r, s), 3.0, 1e-6);
    }
    EXPECT_NEAR(c.alpha, 0.0, 1e-6);
}

TEST(FitBimix, MinimalExactSystem) {
    const auto set = grid({1, 20, 1.5, 0.8, 0.4}, {0.1, 0.4}, {100, 10000});
    ASSERT_EQ(set.observations.size(), 4u);
    const auto fit = fit_bimix(set);
    EXPECT_LT(fit.report.per_domain.at(DomainId("a")).residual_norm, 1e-8);
}

TEST(FitBimix, InsufficientDataNamesDomain) {
    auto set = grid({1, 20, 1.5, 0.8, 0.4}, {0.1, 0.4}, {100, 1000});
    auto single = grid({1, 10, 1, 0.3, 0.2}, {0.1, 0.4, 0.5, 0.7}, {100}, "Books");
    set.observations.insert(set.observations.end(), single.observations.begin(), single.observations.end());
    try {
        fit_bimix(set);
        FAIL() << "expected InsufficientData";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
        EXPECT_NE(std::string(e.what()).find("Books"), std::string::npos);
    }
    EXPECT_MIXLAW_ERROR(fit_bimix(grid({1, 20, 1.5, 0.8, 0.4}, {0.1, 0.4}, {100})), ErrorCode::InsufficientData);
    EXPECT_MIXLAW_ERROR(fit_bimix(grid({1, 20, 1.5, 0.8, 0.4}, {0.3}, {100, 200, 300, 400})), ErrorCode::InsufficientData);
}

TEST(FitBimix, RejectsInvalidObservations) {
    auto set = grid({1, 20, 1.5, 0.8, 0.4}, {0.1, 0.4}, {100, 1000, 2000});
    set.observations.push_back(set.observations.front());
    EXPECT_MIXLAW_ERROR(fit_bimix(set), ErrorCode::InvariantViolation);
}

TEST(FitBimix, InvariantToObservationOrder) {
    Rng rng(8);
    auto set = grid({1, 30, 1.2, 0.3, 0.6}, {0.05, 0.2, 0.5}, {200, 500, 1000, 4000, 9000});
    auto other = grid({1, 12, 2.2, 0.1, 0.3}, {0.05, 0.2, 0.5}, {200, 500, 1000, 4000, 9000}, "b");
    set.observations.insert(set.observations.end(), other.observations.begin(), other.observations.end());
    for (auto& o : set.observations) o.loss *= std::exp(0.01 * rng.normal());
    const auto reference = fit_bimix(set);
    std::mt19937 shuffle_rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(set.observations.begin(), set.observations.end(), shuffle_rng);
        const auto fit = fit_bimix(set);
        EXPECT_EQ(fit.coefficients, reference.coefficients);
        EXPECT_EQ(fit.report, reference.report);
    }
}

TEST(FitBimix, IndependentOfWorkerCount) {
    auto set = grid({1, 30, 1.2, 0.3, 0.6}, {0.05, 0.2, 0.5}, {200, 500, 1000, 4000});
    for (const char* d : {"b", "c", "d"}) {
        auto more = grid({1, 12, 2.2, 0.1, 0.3}, {0.05, 0.2, 0.5}, {200, 500, 1000, 4000}, d);
        set.observations.insert(set.observations.end(), more.observations.begin(), more.observations.end());
    }
    ::setenv("MIXLAW_THREADS", "1", 1);
    const auto serial = fit_bimix(set);
    ::setenv("MIXLAW_THREADS", "4", 1);
    const auto threaded = fit_bimix(set);
    ::unsetenv("MIXLAW_THREADS");
    EXPECT_EQ(serial.coefficients, threaded.coefficients);
}

TEST(FitBimix, RefitReproducesFittedModel) {
    Rng rng(9);
    auto set = grid({1, 40, 1.6, 0.2, 0.5}, {0.1, 0.3, 0.6}, {500, 1000, 2000, 4000, 8000});
    for (auto& o : set.observations) o.loss *= std::exp(0.02 * rng.normal());
    const auto first = fit_bimix(set).coefficients.at(DomainId("a"));
    for (auto& o : set.observations) o.loss = predict_loss(first, o.proportion, static_cast<double>(o.step));
    const auto second = fit_bimix(set).coefficients.at(DomainId("a"));
    for (double r : {0.1, 0.3, 0.6}) {
        for (double s : {500.0, 2000.0, 8000.0}) {
            EXPECT_LT(relative_error(predict_loss(first, r, s), predict_loss(second, r, s)), 1e-6);
        }
    }
}

TEST(FitBimix, RestartsAreDeterministicAndNoWorse) {
    Rng rng(10);
    auto set = grid({1, 40, 1.6, 0.2, 0.5}, {0.1, 0.3, 0.6}, {500, 1000, 2000, 4000, 8000});
    for (auto& o : set.observations) o.loss *= std::exp(0.02 * rng.normal());
    FitConfig cfg;
    const auto plain = fit_bimix(set, cfg);
    cfg.restarts = 4;
    cfg.seed = 17;
    const auto a = fit_bimix(set, cfg);
    const auto b = fit_bimix(set, cfg);
    EXPECT_EQ(a.coefficients, b.coefficients);
    EXPECT_LE(a.info.at(DomainId("a")).objective, plain.info.at(DomainId("a")).objective * (1 + 1e-12));
}

TEST(FitBimix, IterationLimitIsReportedNotThrown) {
    Rng rng(11);
    auto set = grid({1, 40, 1.6, 0.2, 0.5}, {0.1, 0.3, 0.6}, {500, 1000, 2000, 4000, 8000});
    for (auto& o : set.observations) o.loss *= std::exp(0.02 * rng.normal());
    FitConfig cfg;
    cfg.max_iterations = 1;
    const auto fit = fit_bimix(set, cfg);
    EXPECT_FALSE(fit.info.at(DomainId("a")).converged);
    EXPECT_EQ(fit.non_converged(), std::vector<DomainId>{DomainId("a")});
    EXPECT_EQ(fit.report.per_domain.at(DomainId("a")).converged, false);
}

TEST(FitBimix, ReportOrderingInvariant) {
    Rng rng(12);
    auto set = grid({1, 40, 1.6, 0.2, 0.5}, {0.1, 0.3, 0.6}, {500, 1000, 2000, 4000, 8000});
    for (auto& o : set.observations) o.loss *= std::exp(0.05 * rng.normal());
    const auto fit = fit_bimix(set);
    for (const auto& [d, r] : fit.report.per_domain) {
        EXPECT_GE(r.worst_rel_error, r.mean_rel_error);
        EXPECT_GE(r.mean_rel_error, r.best_rel_error);
        ASSERT_TRUE(r.r_squared.has_value());
        EXPECT_LE(*r.r_squared, 1.0);
    }
}

}  // namespace
}  // namespace mixlaw
