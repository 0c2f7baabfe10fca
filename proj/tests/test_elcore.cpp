#include "nel/elcore.hpp"

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "nel/rng.hpp"

using namespace nel;

TEST_CASE("log_star branches and the known values") {
    const LogStar plain = log_star(1.0, 0.01);
    CHECK(plain.value == 0.0);
    CHECK(plain.d1 == 1.0);
    CHECK(plain.d2 == -1.0);

    const LogStar below = log_star(0.0, 0.01);
    CHECK(below.value == doctest::Approx(std::log(0.01) - 1.5).epsilon(1e-12));
    CHECK(below.value == doctest::Approx(-6.10517).epsilon(1e-5));

    // defined on the whole line
    CHECK(std::isfinite(log_star(-50.0, 0.01).value));
}

TEST_CASE("log_star is C2 at the switch point") {
    for (double eps : {1e-1, 1e-3, 1e-5, 2e-4}) {
        const double quad_value = std::log(eps) - 1.5 + 2.0 - 0.5;  // quadratic branch at z = eps
        const double quad_d1 = 2.0 / eps - 1.0 / eps;
        const double quad_d2 = -1.0 / (eps * eps);
        const LogStar log_branch = log_star(eps, eps);
        CHECK(std::abs(log_branch.value - quad_value) <= 1e-12 * std::abs(quad_value));
        CHECK(std::abs(log_branch.d1 - quad_d1) <= 1e-12 * std::abs(quad_d1));
        CHECK(std::abs(log_branch.d2 - quad_d2) <= 1e-12 * std::abs(quad_d2));
    }
}

TEST_CASE("local objective at lambda = 0") {
    Rng rng(5);
    Eigen::MatrixXd scores(30, 3);
    for (int j = 0; j < 30; ++j) scores.row(j) = nel::testing::random_vector(rng, 3).transpose();
    const LocalObjective lo = local_objective(scores, Eigen::VectorXd::Zero(3), 0.01);
    CHECK(lo.value == 0.0);
    CHECK((lo.grad + 2.0 * scores.colwise().sum().transpose()).norm() < 1e-12);
    const Eigen::MatrixXd expected_hess = 2.0 * scores.transpose() * scores;
    CHECK((lo.hess - expected_hess).norm() < 1e-10);
}

TEST_CASE("local objective on a single sample") {
    Eigen::MatrixXd scores(1, 1);
    scores << 1.0;
    const Eigen::VectorXd lambda = Eigen::VectorXd::Constant(1, 0.5);
    CHECK(local_objective(scores, lambda, 0.01).value ==
          doctest::Approx(-2.0 * std::log(1.5)).epsilon(1e-12));
}

TEST_CASE("gradient and hessian match finite differences across families") {
    Rng rng(23);
    for (const char* name : {"quantile", "linear", "logistic", "mean", "repeated"}) {
        const FamilySpec fam = make_family(name, 0);
        const int r = fam.ef.eq_dim;
        Eigen::MatrixXd data(50, fam.ef.obs_dim);
        for (int j = 0; j < 50; ++j) data.row(j) = fam.sample(rng).transpose();
        const Eigen::MatrixXd scores = score_matrix(data, fam.ef, fam.theta0);

        const double eps = 0.02;
        const Eigen::VectorXd lambda = 0.05 * nel::testing::random_vector(rng, r);
        const LocalObjective lo = local_objective(scores, lambda, eps);
        for (int c = 0; c < r; ++c) {
            const double h = 1e-6;
            Eigen::VectorXd lp = lambda, lm = lambda;
            lp(c) += h;
            lm(c) -= h;
            const double fd_grad = (local_objective_value(scores, lp, eps) -
                                    local_objective_value(scores, lm, eps)) /
                                   (2.0 * h);
            CHECK(std::abs(fd_grad - lo.grad(c)) / std::max(1.0, std::abs(lo.grad(c))) < 1e-6);
            const Eigen::VectorXd fd_hess_col =
                (local_objective(scores, lp, eps).grad - local_objective(scores, lm, eps).grad) /
                (2.0 * h);
            CHECK((fd_hess_col - lo.hess.col(c)).norm() / std::max(1.0, lo.hess.col(c).norm()) <
                  1e-5);
        }
    }
}

TEST_CASE("objective is convex along random segments") {
    Rng rng(31);
    const FamilySpec fam = make_family("mean", 2);
    Eigen::MatrixXd data(60, 2);
    for (int j = 0; j < 60; ++j) data.row(j) = fam.sample(rng).transpose();
    const Eigen::MatrixXd scores = score_matrix(data, fam.ef, fam.theta0);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd base = 0.3 * nel::testing::random_vector(rng, 2);
        const Eigen::VectorXd dir = nel::testing::random_vector(rng, 2);
        const double h = 1e-3;
        const double f0 = local_objective_value(scores, base - h * dir, 0.01);
        const double f1 = local_objective_value(scores, base, 0.01);
        const double f2 = local_objective_value(scores, base + h * dir, 0.01);
        CHECK(f0 - 2.0 * f1 + f2 >= -1e-10);
    }
}

TEST_CASE("reference solver: mean family at the sample mean gives zero multiplier") {
    Rng rng(7);
    const FamilySpec fam = make_family("mean", 3);
    Eigen::MatrixXd data(200, 3);
    for (int j = 0; j < 200; ++j) data.row(j) = fam.sample(rng).transpose();
    const Eigen::VectorXd theta = data.colwise().mean().transpose();
    const std::vector<Eigen::MatrixXd> scores = {score_matrix(data, fam.ef, theta)};
    NewtonReport report;
    const Eigen::VectorXd lambda = solve_reference(scores, 1.0 / 200, &report);
    CHECK(report.converged);
    CHECK(lambda.norm() < 1e-12);
    CHECK(local_objective_value(scores[0], lambda, 1.0 / 200) == 0.0);
}

TEST_CASE("reference solver on the two-point toy problem") {
    // samples {-1, 2} with g = x: the root of sum g/(1+lambda g) is 1/4
    Eigen::MatrixXd data(2, 1);
    data << -1.0, 2.0;
    const FamilySpec fam = make_family("mean", 1);
    const std::vector<Eigen::MatrixXd> scores = {
        score_matrix(data, fam.ef, Eigen::VectorXd::Zero(1))};
    const Eigen::VectorXd lambda = solve_reference(scores, 0.5);
    CHECK(lambda(0) == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("hull violations surface as large statistics, not domain errors") {
    // every score strictly positive: zero is outside the convex hull
    Eigen::MatrixXd data = Eigen::MatrixXd::Ones(50, 1) +
                           0.1 * Eigen::MatrixXd::Random(50, 1).cwiseAbs();
    const FamilySpec fam = make_family("mean", 1);
    const std::vector<Eigen::MatrixXd> scores = {
        score_matrix(data, fam.ef, Eigen::VectorXd::Zero(1))};
    const Eigen::VectorXd lambda = solve_reference(scores, 0.02);
    const std::vector<Eigen::VectorXd> consensus(1, lambda);
    CHECK(el_statistic(consensus, scores, 0.02) > 100.0);
}

TEST_CASE("statistic of the zero state is zero and consensus matches the pooled value") {
    Rng rng(11);
    const FamilySpec fam = make_family("linear", 5);
    std::vector<Eigen::MatrixXd> scores;
    for (int i = 0; i < 4; ++i) {
        Eigen::MatrixXd data(100, 6);
        for (int j = 0; j < 100; ++j) data.row(j) = fam.sample(rng).transpose();
        scores.push_back(score_matrix(data, fam.ef, fam.theta0));
    }
    const double eps = 1.0 / 400;
    std::vector<Eigen::VectorXd> zeros(4, Eigen::VectorXd::Zero(5));
    CHECK(el_statistic(zeros, scores, eps) == 0.0);

    const Eigen::VectorXd lambda_star = solve_reference(scores, eps);
    const std::vector<Eigen::VectorXd> consensus(4, lambda_star);
    Eigen::MatrixXd pooled(400, 5);
    for (int i = 0; i < 4; ++i) pooled.middleRows(100 * i, 100) = scores[static_cast<std::size_t>(i)];
    const double pooled_value = -local_objective_value(pooled, lambda_star, eps);
    const double distributed = el_statistic(consensus, scores, eps);
    CHECK(std::abs(distributed - pooled_value) <= 1e-10 * (1.0 + std::abs(pooled_value)));
}
