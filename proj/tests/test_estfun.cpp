#include "nel/estfun.hpp"

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "nel/rng.hpp"

using namespace nel;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    int k = 0;
    for (double x : xs) v(k++) = x;
    return v;
}

}  // namespace

TEST_CASE("quantile score") {
    const EstimatingFunction ef = quantile_ef(0.05);
    CHECK(ef(vec({10.0}), vec({20.0}))(0) == -1.0);
    CHECK(ef(vec({30.0}), vec({20.0}))(0) == doctest::Approx(0.05 / 0.95).epsilon(1e-9));
    CHECK(ef(vec({20.0}), vec({20.0}))(0) == -1.0);  // boundary belongs to the lower branch
    CHECK_THROWS_AS(quantile_ef(0.0), std::invalid_argument);
    CHECK_THROWS_AS(quantile_ef(1.0), std::invalid_argument);
}

TEST_CASE("linear score") {
    const EstimatingFunction ef = linear_ef(2);
    CHECK(ef(vec({2.0, 1.0, 0.0}), vec({2.0, 5.0})) == vec({0.0, 0.0}));
    CHECK(ef(vec({0.0, 1.0, 1.0}), vec({1.0, 1.0})) == vec({-2.0, -2.0}));
    CHECK_THROWS_AS(ef(vec({1.0, 2.0}), vec({1.0, 1.0})), std::invalid_argument);

    // exact noiseless fit at the generator's coefficients
    const FamilySpec fam = make_family("linear", 5);
    const EstimatingFunction ef5 = linear_ef(5);
    Rng rng(9);
    for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd x = nel::testing::random_vector(rng, 5);
        Eigen::VectorXd obs(6);
        obs(0) = x.dot(fam.theta0);
        obs.tail(5) = x;
        CHECK(ef5(obs, fam.theta0).norm() == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("logistic score") {
    const EstimatingFunction ef = logistic_ef(2);
    const Eigen::VectorXd g = ef(vec({1.0, 3.0, -1.0}), vec({1.0, 3.0}));  // x'beta = 0
    CHECK(g == 0.5 * vec({3.0, -1.0}));
    // saturation without overflow
    const Eigen::VectorXd gsat = ef(vec({1.0, 1e5, 0.0}), vec({1.0, 0.0}));
    CHECK(std::abs(gsat(0)) < 1e-30);
    CHECK(std::isfinite(ef(vec({0.0, -1e5, 0.0}), vec({1.0, 0.0}))(0)));
    CHECK_THROWS_AS(ef(vec({2.0, 1.0, 1.0}), vec({0.0, 0.0})), std::invalid_argument);
}

TEST_CASE("mean score") {
    const EstimatingFunction ef = mean_ef(2);
    CHECK(ef(vec({3.0, 4.0}), vec({3.0, 4.0})) == vec({0.0, 0.0}));
    CHECK(ef(vec({1.0, 2.0}), vec({0.0, 0.0})) == vec({1.0, 2.0}));

    const FamilySpec fam = make_family("mean", 3);
    Eigen::MatrixXd pooled(4, 3);
    pooled << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
    CHECK(fam.point_estimate(pooled) == pooled.colwise().mean().transpose());
}

TEST_CASE("repeated-measures score") {
    const EstimatingFunction ef = repeated_ef();
    CHECK(ef.obs_dim == 9);
    CHECK(ef.param_dim == 2);
    CHECK(ef.eq_dim == 4);  // twice the parameter dimension

    const Eigen::VectorXd beta = vec({1.0, 5.0});
    Rng rng(3);
    for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd obs(9);
        Eigen::Matrix<double, 2, 3> xmat;
        for (int t = 0; t < 3; ++t) {
            const Eigen::VectorXd xt = nel::testing::random_vector(rng, 2);
            xmat.col(t) = xt;
            obs.segment(3 + 2 * t, 2) = xt;
            obs(t) = xt.dot(beta);  // noiseless
        }
        CHECK(ef(obs, beta).norm() == doctest::Approx(0.0).epsilon(1e-12));

        // with noise, the first block reduces to the stacked linear score
        Eigen::VectorXd noisy = obs;
        const Eigen::Vector3d eps(0.3, -0.7, 1.1);
        noisy.head(3) += eps;
        Eigen::Vector2d expected = Eigen::Vector2d::Zero();
        for (int t = 0; t < 3; ++t)
            expected += xmat.col(t) * (noisy(t) - xmat.col(t).dot(beta));
        CHECK((ef(noisy, beta).head(2) - expected).norm() < 1e-12);
    }
    CHECK_THROWS_AS(ef(Eigen::VectorXd::Zero(8), beta), std::invalid_argument);
}

TEST_CASE("analytic jacobians match finite differences of the mean score") {
    Rng rng(17);
    for (const char* name : {"quantile", "linear", "logistic", "mean", "repeated"}) {
        const FamilySpec fam = make_family(name, 0);
        const int p = fam.ef.param_dim;
        const int r = fam.ef.eq_dim;
        REQUIRE(static_cast<bool>(fam.ef.jacobian));

        const int samples = 40;
        Eigen::MatrixXd data(samples, fam.ef.obs_dim);
        for (int j = 0; j < samples; ++j) data.row(j) = fam.sample(rng).transpose();

        Eigen::VectorXd theta = fam.theta0 + 0.1 * nel::testing::random_vector(rng, p);
        Eigen::MatrixXd analytic = Eigen::MatrixXd::Zero(r, p);
        Eigen::MatrixXd one(r, p);
        for (int j = 0; j < samples; ++j) {
            fam.ef.jacobian(data.row(j).transpose(), theta, one);
            analytic += one;
        }
        analytic /= samples;

        for (int c = 0; c < p; ++c) {
            const double h = 1e-6 * (1.0 + std::abs(theta(c)));
            Eigen::VectorXd tp = theta, tm = theta;
            tp(c) += h;
            tm(c) -= h;
            Eigen::VectorXd gp = Eigen::VectorXd::Zero(r), gm = Eigen::VectorXd::Zero(r);
            for (int j = 0; j < samples; ++j) {
                gp += fam.ef(data.row(j).transpose(), tp);
                gm += fam.ef(data.row(j).transpose(), tm);
            }
            const Eigen::VectorXd fd = (gp - gm) / (2.0 * h * samples);
            const double scale = std::max(1.0, analytic.col(c).norm());
            CHECK((fd - analytic.col(c)).norm() / scale < 1e-5);
        }
    }
}

TEST_CASE("samplers are unbiased at the true parameter") {
    const int m = 100000;
    for (const char* name : {"quantile", "linear", "logistic", "mean", "repeated"}) {
        const FamilySpec fam = make_family(name, 0);
        Rng rng(101);
        const int r = fam.ef.eq_dim;
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(r);
        Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(r);
        for (int j = 0; j < m; ++j) {
            const Eigen::VectorXd g = fam.ef(fam.sample(rng), fam.theta0);
            sum += g;
            sumsq += g.cwiseProduct(g);
        }
        const Eigen::VectorXd mean = sum / m;
        for (int k = 0; k < r; ++k) {
            const double sd = std::sqrt((sumsq(k) / m - mean(k) * mean(k)) / m);
            INFO(name, " component ", k);
            CHECK(std::abs(mean(k)) < 4.0 * sd + 1e-12);
        }
    }
}

TEST_CASE("ar1 covariance entries") {
    const Eigen::MatrixXd chol = ar1_cholesky(5);
    const Eigen::MatrixXd sigma = chol * chol.transpose();
    CHECK(sigma(0, 2) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sigma(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sigma(0, 4) == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("family lookup") {
    CHECK(make_family("quantile").ef.eq_dim == 1);
    CHECK(make_family("linear").ef.eq_dim == 5);
    CHECK(make_family("logistic").ef.eq_dim == 5);
    CHECK(make_family("mean").ef.eq_dim == 3);
    CHECK(make_family("mean", 7).ef.eq_dim == 7);
    CHECK(make_family("repeated").ef.eq_dim == 4);
    CHECK_THROWS_AS(make_family("unknown"), std::invalid_argument);
}
