#include "nel/elcore.hpp"

#include <cmath>
#include <stdexcept>

namespace nel {

LogStar log_star(double z, double eps) {
    if (z >= eps) {
        const double inv = 1.0 / z;
        return {std::log(z), inv, -inv * inv};
    }
    const double inv = 1.0 / eps;
    return {std::log(eps) - 1.5 + 2.0 * z * inv - 0.5 * z * z * inv * inv,
            2.0 * inv - z * inv * inv, -inv * inv};
}

Eigen::MatrixXd score_matrix(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                             const Eigen::VectorXd& theta) {
    if (data.cols() != ef.obs_dim)
        throw std::invalid_argument("score_matrix: data columns do not match observation dimension");
    Eigen::MatrixXd scores(data.rows(), ef.eq_dim);
    Eigen::VectorXd row(ef.eq_dim);
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
        ef.eval(data.row(j).transpose(), theta, row);
        scores.row(j) = row.transpose();
    }
    return scores;
}

std::vector<Eigen::MatrixXd> score_matrices(const std::vector<Eigen::MatrixXd>& node_data,
                                            const EstimatingFunction& ef,
                                            const Eigen::VectorXd& theta) {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(node_data.size());
    for (const auto& block : node_data) out.push_back(score_matrix(block, ef, theta));
    return out;
}

LocalObjective local_objective(const Eigen::MatrixXd& scores, const Eigen::VectorXd& lambda,
                               double eps) {
    const Eigen::Index n = scores.rows();
    const Eigen::Index r = scores.cols();
    LocalObjective out;
    out.grad = Eigen::VectorXd::Zero(r);
    out.hess = Eigen::MatrixXd::Zero(r, r);
    out.value = 0.0;
    if (n == 0) return out;

    Eigen::VectorXd z = Eigen::VectorXd::Ones(n) + scores * lambda;
    Eigen::VectorXd d1(n), d2(n);
    double value = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const LogStar ls = log_star(z(j), eps);
        value += ls.value;
        d1(j) = ls.d1;
        d2(j) = ls.d2;
    }
    out.value = -2.0 * value;
    out.grad.noalias() = -2.0 * (scores.transpose() * d1);
    out.hess.noalias() = -2.0 * (scores.transpose() * d2.asDiagonal() * scores);
    if (!std::isfinite(out.value))
        throw std::runtime_error("local_objective: non-finite accumulation");
    return out;
}

LocalObjective local_objective(const Eigen::MatrixXd& data, const EstimatingFunction& ef,
                               const Eigen::VectorXd& theta, const Eigen::VectorXd& lambda,
                               double eps) {
    return local_objective(score_matrix(data, ef, theta), lambda, eps);
}

double local_objective_value(const Eigen::MatrixXd& scores, const Eigen::VectorXd& lambda,
                             double eps) {
    const Eigen::Index n = scores.rows();
    if (n == 0) return 0.0;
    Eigen::VectorXd z = Eigen::VectorXd::Ones(n) + scores * lambda;
    double value = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) value += log_star(z(j), eps).value;
    return -2.0 * value;
}

Eigen::VectorXd solve_reference(const std::vector<Eigen::MatrixXd>& node_scores, double eps,
                                NewtonReport* report) {
    long total = 0;
    Eigen::Index r = 0;
    for (const auto& g : node_scores) {
        total += g.rows();
        r = g.cols();
    }
    if (total == 0) throw std::invalid_argument("solve_reference: no samples");

    Eigen::MatrixXd pooled(total, r);
    Eigen::Index at = 0;
    for (const auto& g : node_scores) {
        pooled.middleRows(at, g.rows()) = g;
        at += g.rows();
    }

    const double tol = 1e-10 * static_cast<double>(total);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(r);
    LocalObjective cur = local_objective(pooled, lambda, eps);
    constexpr int kMaxIter = 200;
    for (int iter = 0; iter < kMaxIter; ++iter) {
        if (cur.grad.norm() <= tol) {
            if (report) *report = {iter, true, cur.grad.norm()};
            return lambda;
        }
        Eigen::LDLT<Eigen::MatrixXd> fac(cur.hess);
        Eigen::VectorXd step = fac.solve(-cur.grad);
        if (!step.allFinite())
            throw std::runtime_error("solve_reference: singular Hessian (degenerate second moments)");
        double scale = 1.0;
        Eigen::VectorXd candidate;
        double value = cur.value;
        for (int halving = 0; halving < 60; ++halving) {
            candidate = lambda + scale * step;
            value = local_objective_value(pooled, candidate, eps);
            if (value < cur.value) break;
            scale *= 0.5;
        }
        if (!(value < cur.value)) {
            // the value has hit machine precision; fall back to gradient descent progress
            candidate = lambda + step;
            const LocalObjective probe = local_objective(pooled, candidate, eps);
            if (probe.grad.norm() < cur.grad.norm()) {
                lambda = candidate;
                cur = probe;
                continue;
            }
            if (cur.grad.norm() <= tol * 100.0) {
                if (report) *report = {iter, true, cur.grad.norm()};
                return lambda;
            }
            throw std::runtime_error("solve_reference: line search stalled");
        }
        lambda = candidate;
        cur = local_objective(pooled, lambda, eps);
    }
    if (cur.grad.norm() <= tol) {
        if (report) *report = {kMaxIter, true, cur.grad.norm()};
        return lambda;
    }
    throw std::runtime_error("solve_reference: Newton did not converge in 200 iterations");
}

Eigen::VectorXd solve_reference(const std::vector<Eigen::MatrixXd>& node_data,
                                const EstimatingFunction& ef, const Eigen::VectorXd& theta,
                                double eps, NewtonReport* report) {
    return solve_reference(score_matrices(node_data, ef, theta), eps, report);
}

double el_statistic(const std::vector<Eigen::VectorXd>& lambdas,
                    const std::vector<Eigen::MatrixXd>& node_scores, double eps) {
    if (lambdas.size() != node_scores.size())
        throw std::invalid_argument("el_statistic: block count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        total -= local_objective_value(node_scores[i], lambdas[i], eps);
    return total;
}

}  // namespace nel
