#include "nel/estfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nel {

namespace {

void require_dims(const Eigen::VectorXd& x, const Eigen::VectorXd& theta, int d, int p) {
    if (x.size() != d) throw std::invalid_argument("estimating function: observation dimension mismatch");
    if (theta.size() != p) throw std::invalid_argument("estimating function: parameter dimension mismatch");
}

double stable_sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

Eigen::VectorXd cycled(std::initializer_list<double> pattern, int d) {
    Eigen::VectorXd out(d);
    const std::vector<double> base(pattern);
    for (int k = 0; k < d; ++k) out(k) = base[static_cast<std::size_t>(k) % base.size()];
    return out;
}

Eigen::MatrixXd compound_symmetry(int d) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(d, d, 0.5);
    s.diagonal().setOnes();
    return s;
}

}  // namespace

Eigen::MatrixXd ar1_cholesky(int d) {
    Eigen::MatrixXd sigma(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) sigma(a, b) = std::pow(0.5, std::abs(a - b));
    return Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
}

Eigen::MatrixXd compound_symmetry_cholesky(int d) {
    return Eigen::LLT<Eigen::MatrixXd>(compound_symmetry(d)).matrixL();
}

EstimatingFunction quantile_ef(double tau) {
    if (!(tau > 0.0) || !(tau < 1.0)) throw std::invalid_argument("quantile_ef: tau must lie in (0, 1)");
    const double upper = tau / (1.0 - tau);
    EstimatingFunction ef;
    ef.obs_dim = 1;
    ef.param_dim = 1;
    ef.eq_dim = 1;
    ef.eval = [upper](const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                      Eigen::Ref<Eigen::VectorXd> out) {
        require_dims(x, theta, 1, 1);
        out(0) = (x(0) - theta(0) <= 0.0) ? -1.0 : upper;
    };
    // piecewise constant in theta, so the derivative vanishes off the jump
    ef.jacobian = [](const Eigen::VectorXd& x, const Eigen::VectorXd& theta,
                     Eigen::Ref<Eigen::MatrixXd> out) {
        require_dims(x, theta, 1, 1);
        out(0, 0) = 0.0;
    };
    return ef;
}

EstimatingFunction linear_ef(int d) {
    if (d < 1) throw std::invalid_argument("linear_ef: d must be at least 1");
    EstimatingFunction ef;
    ef.obs_dim = d + 1;  // (Y, X)
    ef.param_dim = d;
    ef.eq_dim = d;
    ef.eval = [d](const Eigen::VectorXd& z, const Eigen::VectorXd& beta,
                  Eigen::Ref<Eigen::VectorXd> out) {
        require_dims(z, beta, d + 1, d);
        const double y = z(0);
        const auto x = z.tail(d);
        out = x * (y - x.dot(beta));
    };
    ef.jacobian = [d](const Eigen::VectorXd& z, const Eigen::VectorXd& beta,
                      Eigen::Ref<Eigen::MatrixXd> out) {
        require_dims(z, beta, d + 1, d);
        const auto x = z.tail(d);
        out = -(x * x.transpose());
    };
    return ef;
}

EstimatingFunction logistic_ef(int d) {
    if (d < 1) throw std::invalid_argument("logistic_ef: d must be at least 1");
    EstimatingFunction ef;
    ef.obs_dim = d + 1;
    ef.param_dim = d;
    ef.eq_dim = d;
    ef.eval = [d](const Eigen::VectorXd& z, const Eigen::VectorXd& beta,
                  Eigen::Ref<Eigen::VectorXd> out) {
        require_dims(z, beta, d + 1, d);
        const double y = z(0);
        if (y != 0.0 && y != 1.0) throw std::invalid_argument("logistic_ef: response must be 0 or 1");
        const auto x = z.tail(d);
        out = x * (y - stable_sigmoid(x.dot(beta)));
    };
    ef.jacobian = [d](const Eigen::VectorXd& z, const Eigen::VectorXd& beta,
                      Eigen::Ref<Eigen::MatrixXd> out) {
        require_dims(z, beta, d + 1, d);
        const auto x = z.tail(d);
        const double s = stable_sigmoid(x.dot(beta));
        out = -(s * (1.0 - s)) * (x * x.transpose());
    };
    return ef;
}

EstimatingFunction mean_ef(int d) {
    if (d < 1) throw std::invalid_argument("mean_ef: d must be at least 1");
    EstimatingFunction ef;
    ef.obs_dim = d;
    ef.param_dim = d;
    ef.eq_dim = d;
    ef.eval = [d](const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                  Eigen::Ref<Eigen::VectorXd> out) {
        require_dims(x, mu, d, d);
        out = x - mu;
    };
    ef.jacobian = [d](const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                      Eigen::Ref<Eigen::MatrixXd> out) {
        require_dims(x, mu, d, d);
        out = -Eigen::MatrixXd::Identity(d, d);
    };
    return ef;
}

EstimatingFunction repeated_ef() {
    // Observation layout: (Y1, Y2, Y3, X1, X2, X3) with X_t in R^2.
    constexpr int kTimes = 3;
    constexpr int kCov = 2;
    EstimatingFunction ef;
    ef.obs_dim = kTimes + kTimes * kCov;
    ef.param_dim = kCov;
    ef.eq_dim = 2 * kCov;
    const Eigen::MatrixXd m2 = compound_symmetry(kTimes);
    ef.eval = [m2](const Eigen::VectorXd& z, const Eigen::VectorXd& beta,
                   Eigen::Ref<Eigen::VectorXd> out) {
        require_dims(z, beta, kTimes + kTimes * kCov, kCov);
        Eigen::Matrix<double, kCov, kTimes> xmat;
        Eigen::Vector3d resid;
        for (int t = 0; t < kTimes; ++t) {
            const auto xt = z.segment(kTimes + t * kCov, kCov);
            xmat.col(t) = xt;
            resid(t) = z(t) - xt.dot(beta);
        }
        out.head(kCov) = xmat * resid;
        out.tail(kCov) = xmat * (m2 * resid);
    };
    ef.jacobian = [m2](const Eigen::VectorXd& z, const Eigen::VectorXd& beta,
                       Eigen::Ref<Eigen::MatrixXd> out) {
        require_dims(z, beta, kTimes + kTimes * kCov, kCov);
        Eigen::Matrix<double, kCov, kTimes> xmat;
        Eigen::Matrix<double, kTimes, kCov> xstack;
        for (int t = 0; t < kTimes; ++t) {
            const auto xt = z.segment(kTimes + t * kCov, kCov);
            xmat.col(t) = xt;
            xstack.row(t) = xt.transpose();
        }
        out.topRows(kCov) = -(xmat * xstack);
        out.bottomRows(kCov) = -(xmat * m2 * xstack);
    };
    return ef;
}

namespace {

Eigen::VectorXd logistic_point_estimate(const Eigen::MatrixXd& pooled, int d) {
    const Eigen::Index n = pooled.rows();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    for (int iter = 0; iter < 100; ++iter) {
        Eigen::VectorXd score = Eigen::VectorXd::Zero(d);
        Eigen::MatrixXd info = Eigen::MatrixXd::Zero(d, d);
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto x = pooled.row(j).tail(d).transpose();
            const double mu = stable_sigmoid(x.dot(beta));
            score += x * (pooled(j, 0) - mu);
            info += (mu * (1.0 - mu)) * (x * x.transpose());
        }
        if (score.norm() <= 1e-10 * static_cast<double>(n)) break;
        beta += info.ldlt().solve(score);
    }
    return beta;
}

}  // namespace

FamilySpec make_family(const std::string& name, int d) {
    FamilySpec fam;
    fam.name = name;
    if (name == "quantile") {
        const double tau = 0.05;
        fam.ef = quantile_ef(tau);
        fam.theta0 = Eigen::VectorXd::Constant(1, 200.0 * std::pow(-std::log(1.0 - tau), 1.0 / 1.5));
        fam.sample = [](Rng& rng) {
            return Eigen::VectorXd::Constant(1, rng.weibull(1.5, 200.0)).eval();
        };
        fam.point_estimate = [tau](const Eigen::MatrixXd& pooled) {
            std::vector<double> xs(pooled.col(0).data(), pooled.col(0).data() + pooled.rows());
            std::sort(xs.begin(), xs.end());
            const auto rank = static_cast<std::size_t>(
                std::max<long>(0, static_cast<long>(std::ceil(tau * static_cast<double>(xs.size()))) - 1));
            return Eigen::VectorXd::Constant(1, xs[rank]).eval();
        };
        return fam;
    }
    if (name == "linear" || name == "logistic") {
        const int dim = d > 0 ? d : 5;
        const bool logit = name == "logistic";
        fam.ef = logit ? logistic_ef(dim) : linear_ef(dim);
        fam.theta0 = logit ? cycled({1.0, -2.0, 4.0, 2.0, -0.5}, dim)
                           : cycled({2.0, 0.5, 4.0, std::sqrt(6.0), -3.0}, dim);
        const Eigen::MatrixXd chol = ar1_cholesky(dim);
        const Eigen::VectorXd beta0 = fam.theta0;
        fam.sample = [chol, beta0, dim, logit](Rng& rng) {
            Eigen::VectorXd z(dim);
            for (int k = 0; k < dim; ++k) z(k) = rng.normal();
            const Eigen::VectorXd x = chol * z;
            Eigen::VectorXd obs(dim + 1);
            if (logit) {
                obs(0) = rng.bernoulli(stable_sigmoid(x.dot(beta0))) ? 1.0 : 0.0;
            } else {
                obs(0) = x.dot(beta0) + rng.normal();
            }
            obs.tail(dim) = x;
            return obs;
        };
        if (logit) {
            fam.point_estimate = [dim](const Eigen::MatrixXd& pooled) {
                return logistic_point_estimate(pooled, dim);
            };
        } else {
            fam.point_estimate = [dim](const Eigen::MatrixXd& pooled) {
                const auto x = pooled.rightCols(dim);
                const auto y = pooled.col(0);
                return Eigen::VectorXd(
                    (x.transpose() * x).ldlt().solve(x.transpose() * y));
            };
        }
        return fam;
    }
    if (name == "mean") {
        const int dim = d > 0 ? d : 3;
        fam.ef = mean_ef(dim);
        fam.theta0 = Eigen::VectorXd::Ones(dim);
        const Eigen::MatrixXd chol = compound_symmetry_cholesky(dim);
        const Eigen::VectorXd mu0 = fam.theta0;
        fam.sample = [chol, mu0, dim](Rng& rng) {
            Eigen::VectorXd z(dim);
            for (int k = 0; k < dim; ++k) z(k) = rng.normal();
            return Eigen::VectorXd(mu0 + chol * z);
        };
        fam.point_estimate = [](const Eigen::MatrixXd& pooled) {
            return Eigen::VectorXd(pooled.colwise().mean().transpose());
        };
        return fam;
    }
    if (name == "repeated") {
        fam.ef = repeated_ef();
        fam.theta0 = (Eigen::VectorXd(2) << 1.0, 5.0).finished();
        const Eigen::MatrixXd chol_x = ar1_cholesky(2);
        const Eigen::MatrixXd chol_e = compound_symmetry_cholesky(3);
        const Eigen::VectorXd beta0 = fam.theta0;
        fam.sample = [chol_x, chol_e, beta0](Rng& rng) {
            Eigen::VectorXd obs(9);
            Eigen::Matrix<double, 2, 3> xmat;
            for (int t = 0; t < 3; ++t) {
                Eigen::Vector2d z(rng.normal(), rng.normal());
                xmat.col(t) = chol_x * z;
            }
            Eigen::Vector3d ze(rng.normal(), rng.normal(), rng.normal());
            const Eigen::Vector3d eps = chol_e * ze;
            for (int t = 0; t < 3; ++t) {
                obs(t) = xmat.col(t).dot(beta0) + eps(t);
                obs.segment(3 + 2 * t, 2) = xmat.col(t);
            }
            return obs;
        };
        fam.point_estimate = [](const Eigen::MatrixXd& pooled) {
            Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
            Eigen::Vector2d b = Eigen::Vector2d::Zero();
            for (Eigen::Index j = 0; j < pooled.rows(); ++j) {
                for (int t = 0; t < 3; ++t) {
                    const Eigen::Vector2d xt = pooled.row(j).segment(3 + 2 * t, 2).transpose();
                    a += xt * xt.transpose();
                    b += xt * pooled(j, t);
                }
            }
            return Eigen::VectorXd(a.ldlt().solve(b));
        };
        return fam;
    }
    throw std::invalid_argument("unknown family: " + name);
}

}  // namespace nel
