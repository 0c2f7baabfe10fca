#include "nel/maom.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "doctest.h"
#include "helpers.hpp"
#include "nel/datagen.hpp"
#include "nel/rng.hpp"

using namespace nel;
using nel::testing::group_prox_oracle;
using nel::testing::random_vector;

namespace {

SolverConfig small_config(int K, int n) {
    SolverConfig cfg = default_config(K, n);
    cfg.max_iter = 20000;
    return cfg;
}

}  // namespace

TEST_CASE("soft threshold on the known example") {
    const Eigen::VectorXd h = Eigen::Vector2d(3.0, 4.0);
    CHECK((soft_threshold(h, 2.5) - Eigen::Vector2d(1.5, 2.0)).norm() < 1e-12);
    CHECK(soft_threshold(h, 5.0).norm() == 0.0);
    CHECK(soft_threshold(h, 7.0).norm() == 0.0);
    CHECK(soft_threshold(Eigen::VectorXd::Zero(3), 1.0).norm() == 0.0);
}

TEST_CASE("soft threshold matches the prox oracle") {
    Rng rng(41);
    for (int trial = 0; trial < 1000; ++trial) {
        const int r = 1 + static_cast<int>(rng.below(5));
        const Eigen::VectorXd h = random_vector(rng, r);
        const double rho = 0.5 + 5.0 * rng.uniform01();
        const double eta = rho * h.norm() * (0.05 + 1.5 * rng.uniform01());
        const Eigen::VectorXd z = soft_threshold(h, eta / rho);
        const Eigen::VectorXd oracle = group_prox_oracle(h, rho, eta);
        CHECK((z - oracle).norm() <= 1e-8);

        // local optimality on the original objective
        const auto objective = [&](const Eigen::VectorXd& c) {
            return eta * c.norm() + 0.5 * rho * (h - c).squaredNorm();
        };
        const double at_solution = objective(z);
        for (int probe = 0; probe < 8; ++probe)
            CHECK(objective(z + 1e-5 * random_vector(rng, r)) >= at_solution - 1e-12);
    }
}

TEST_CASE("z update thresholds the shifted difference") {
    Rng rng(42);
    const Eigen::VectorXd lam = random_vector(rng, 3);
    CHECK(maom_z_update(lam, lam, Eigen::VectorXd::Zero(3), 2.0, 5.0).norm() == 0.0);
    // dominant fusion weight keeps z at zero
    const Eigen::VectorXd other = lam + Eigen::VectorXd::Constant(3, 0.1);
    CHECK(maom_z_update(lam, other, Eigen::VectorXd::Zero(3), 2.0, 1e8).norm() == 0.0);
}

TEST_CASE("node update is a fixed point when already stationary") {
    const Eigen::MatrixXd no_scores(0, 2);
    const LocalObjective lo = local_objective(no_scores, Eigen::VectorXd::Zero(2), 0.01);
    Rng rng(43);
    const Eigen::VectorXd lam = random_vector(rng, 2);
    const double rho = 7.0;
    const int degree = 3;
    const Eigen::VectorXd nbr_sum = 3.0 * lam;  // all neighbors equal
    const Eigen::VectorXd next = maom_node_update(lo.hess, lo.grad, lam, rho, degree, nbr_sum,
                                                  Eigen::VectorXd::Zero(2));
    CHECK((next - lam).norm() < 1e-12);
}

TEST_CASE("stacked node updates equal the dense global formula") {
    Rng rng(44);
    const FamilySpec fam = make_family("mean", 2);
    const int K = 5, n = 60, r = 2;
    Rng data_rng = Rng::substream(60, 0);
    const auto data = generate_node_data(fam, K, n, data_rng);
    const Graph g = gen_erdos_renyi(K, 0.6, 3);
    const int M = g.edge_count();
    const auto scores = score_matrices(data, fam.ef, fam.theta0);
    const double rho = 40.0, eta = 1e4, eps = 1e-3;

    // a generic interior state
    std::vector<Eigen::VectorXd> lambda, z, t;
    for (int i = 0; i < K; ++i) lambda.push_back(0.05 * random_vector(rng, r));
    for (int l = 0; l < M; ++l) {
        z.push_back(0.01 * random_vector(rng, r));
        t.push_back(random_vector(rng, r));
    }

    // per-node updates
    std::vector<Eigen::VectorXd> next(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
        std::vector<const Eigen::VectorXd*> nbr, zs, ts;
        std::vector<double> signs;
        for (const Graph::IncidentEdge& ie : g.incident(i)) {
            nbr.push_back(&lambda[static_cast<std::size_t>(ie.other)]);
            zs.push_back(&z[static_cast<std::size_t>(ie.edge)]);
            ts.push_back(&t[static_cast<std::size_t>(ie.edge)]);
            signs.push_back(ie.is_lo ? 1.0 : -1.0);
        }
        const LocalObjective lo =
            local_objective(scores[static_cast<std::size_t>(i)], lambda[static_cast<std::size_t>(i)], eps);
        next[static_cast<std::size_t>(i)] =
            maom_node_update(lo.hess, lo.grad, lambda[static_cast<std::size_t>(i)], rho,
                             g.degree(i), maom_neighbor_sum(nbr, r),
                             maom_signed_edge_sum(zs, ts, signs, rho, r));
    }

    // dense global route
    const IncidenceView view = incidence(g);
    const Eigen::MatrixXd a_stack =
        Eigen::kroneckerProduct(view.A, Eigen::MatrixXd::Identity(r, r));
    Eigen::MatrixXd hess_blocks = Eigen::MatrixXd::Zero(K * r, K * r);
    Eigen::VectorXd grad_stack(K * r), lambda_stack(K * r), z_stack(M * r), t_stack(M * r);
    Eigen::MatrixXd dtilde = Eigen::MatrixXd::Zero(K * r, K * r);
    for (int i = 0; i < K; ++i) {
        const LocalObjective lo =
            local_objective(scores[static_cast<std::size_t>(i)], lambda[static_cast<std::size_t>(i)], eps);
        hess_blocks.block(i * r, i * r, r, r) = lo.hess;
        grad_stack.segment(i * r, r) = lo.grad;
        lambda_stack.segment(i * r, r) = lambda[static_cast<std::size_t>(i)];
        dtilde.block(i * r, i * r, r, r) =
            (2.0 * rho * g.degree(i) + 1.0) * Eigen::MatrixXd::Identity(r, r);
    }
    for (int l = 0; l < M; ++l) {
        z_stack.segment(l * r, r) = z[static_cast<std::size_t>(l)];
        t_stack.segment(l * r, r) = t[static_cast<std::size_t>(l)];
    }
    const Eigen::MatrixXd lhs = hess_blocks + dtilde;
    const Eigen::VectorXd rhs =
        (hess_blocks + dtilde - rho * a_stack.transpose() * a_stack) * lambda_stack +
        a_stack.transpose() * (rho * z_stack - t_stack) - grad_stack;
    const Eigen::VectorXd dense_next = lhs.ldlt().solve(rhs);

    for (int i = 0; i < K; ++i)
        CHECK((next[static_cast<std::size_t>(i)] - dense_next.segment(i * r, r)).norm() < 1e-9);

    // plug-back: the quadratic model's stationarity at the new point
    const Eigen::MatrixXd q_tilde = dtilde - rho * a_stack.transpose() * a_stack;
    const Eigen::VectorXd grad_model =
        grad_stack + (hess_blocks + q_tilde) * (dense_next - lambda_stack) +
        a_stack.transpose() * t_stack +
        rho * a_stack.transpose() * (a_stack * dense_next - z_stack);
    CHECK(grad_model.norm() < 1e-9);
}

TEST_CASE("proximal matrix is positive definite for the chosen diagonal") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const int K = 4 + static_cast<int>(seed % 27);
        const Graph g = gen_erdos_renyi(K, 0.35, seed);
        const IncidenceView view = incidence(g);
        for (double rho : {1.0, 500.0}) {
            Eigen::MatrixXd q = -rho * view.L;
            for (int i = 0; i < K; ++i) q(i, i) += 2.0 * rho * g.degree(i) + 1.0;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(q);
            CHECK(eig.eigenvalues().minCoeff() > 0.0);
        }
    }
}

TEST_CASE("mean family at the pooled mean sends all multipliers to zero") {
    const FamilySpec fam = make_family("mean", 3);
    Rng data_rng = Rng::substream(61, 0);
    auto data = generate_node_data(fam, 4, 100, data_rng);
    Eigen::MatrixXd pooled(400, 3);
    for (int i = 0; i < 4; ++i) pooled.middleRows(100 * i, 100) = data[static_cast<std::size_t>(i)];
    const Eigen::VectorXd theta = pooled.colwise().mean().transpose();
    const Graph g = gen_erdos_renyi(4, 0.9, 2);
    const auto [state, report] = run_maom(g, data, fam.ef, theta, small_config(4, 100));
    CHECK(report.converged);
    for (const auto& lam : state.lambda) CHECK(lam.norm() < 1e-5);
}

TEST_CASE("run matches the reference solver and the pooled statistic") {
    const FamilySpec fam = make_family("linear", 5);
    Rng data_rng = Rng::substream(62, 0);
    const auto data = generate_node_data(fam, 8, 300, data_rng);
    const Graph g = gen_erdos_renyi(8, 0.4, 5);
    const SolverConfig cfg = small_config(8, 300);
    const auto scores = score_matrices(data, fam.ef, fam.theta0);
    const auto [state, report] = run_maom(g, scores, cfg);
    CHECK(report.converged);
    const Eigen::VectorXd lambda_star = solve_reference(scores, cfg.pseudo_log_eps);
    for (const auto& lam : state.lambda)
        CHECK((lam - lambda_star).cwiseAbs().maxCoeff() < 1e-5);
    const std::vector<Eigen::VectorXd> consensus(scores.size(), lambda_star);
    const double pooled_stat = el_statistic(consensus, scores, cfg.pseudo_log_eps);
    CHECK(std::abs(report.final_statistic - pooled_stat) <= 1e-6 * (1.0 + std::abs(pooled_stat)));

    const MaomResidualInfo info =
        maom_residual_info(g, state.lambda, state.lambda, state.z, state.t, state.t, cfg);
    CHECK(info.r_norm == state.r2_norm);  // recomputable from state
}

TEST_CASE("duals satisfy the stationarity condition at convergence") {
    const FamilySpec fam = make_family("mean", 2);
    Rng data_rng = Rng::substream(63, 0);
    const auto data = generate_node_data(fam, 5, 150, data_rng);
    const Graph g = gen_erdos_renyi(5, 0.6, 11);
    SolverConfig cfg = small_config(5, 150);
    cfg.eps_abs = 1e-12;
    cfg.eps_rel = 1e-11;
    const auto scores = score_matrices(data, fam.ef, fam.theta0);
    const auto [state, report] = run_maom(g, scores, cfg);
    REQUIRE(report.converged);
    double grad_scale = 0.0, residual = 0.0;
    for (int i = 0; i < 5; ++i) {
        Eigen::VectorXd kkt =
            local_objective(scores[static_cast<std::size_t>(i)], state.lambda[static_cast<std::size_t>(i)],
                            cfg.pseudo_log_eps)
                .grad;
        grad_scale = std::max(grad_scale, kkt.norm());
        for (const Graph::IncidentEdge& ie : g.incident(i))
            kkt += (ie.is_lo ? 1.0 : -1.0) * state.t[static_cast<std::size_t>(ie.edge)];
        residual = std::max(residual, kkt.norm());
    }
    CHECK(residual <= 1e-6 * std::max(1.0, grad_scale));
}

TEST_CASE("dual update arithmetic after the first iteration") {
    const FamilySpec fam = make_family("mean", 1);
    Rng data_rng = Rng::substream(64, 0);
    const auto data = generate_node_data(fam, 2, 50, data_rng);
    const Graph g(2, {{0, 1}});
    SolverConfig cfg = small_config(2, 50);
    cfg.max_iter = 1;
    const auto [state, report] = run_maom(g, data, fam.ef, fam.theta0, cfg);
    // from zero starts, t = rho (lambda_lo - lambda_hi - z) after one iteration
    CHECK((state.t[0] - cfg.rho * (state.lambda[0] - state.lambda[1] - state.z[0])).norm() == 0.0);
}

TEST_CASE("spanning-tree flag runs on the tree and needs fewer iterations") {
    const FamilySpec fam = make_family("mean", 3);
    Rng data_rng = Rng::substream(65, 0);
    const auto data = generate_node_data(fam, 12, 400, data_rng);
    const Graph g = gen_erdos_renyi(12, 1.0, 1);  // complete
    const SolverConfig cfg = small_config(12, 400);
    const auto scores = score_matrices(data, fam.ef, fam.theta0);
    const auto [tree_state, tree_report] = run_maom(g, scores, cfg, true);
    const auto [full_state, full_report] = run_maom(g, scores, cfg, false);
    CHECK(tree_report.converged);
    CHECK(full_report.converged);
    CHECK(static_cast<int>(tree_state.z.size()) == 11);
    CHECK(tree_report.iterations < full_report.iterations);

    // the flag is equivalent to running on the extracted tree
    const auto [direct_state, direct_report] = run_maom(spanning_tree(g), scores, cfg, false);
    CHECK(direct_report.iterations == tree_report.iterations);
    for (std::size_t i = 0; i < direct_state.lambda.size(); ++i)
        CHECK((direct_state.lambda[i] - tree_state.lambda[i]).norm() == 0.0);
}

TEST_CASE("oracle equivalence across the rho grid") {
    const FamilySpec fam = make_family("repeated");
    Rng data_rng = Rng::substream(66, 0);
    const auto data = generate_node_data(fam, 6, 200, data_rng);
    const Graph g = gen_erdos_renyi(6, 0.5, 17);
    const auto scores = score_matrices(data, fam.ef, fam.theta0);
    const Eigen::VectorXd lambda_star = solve_reference(scores, 1.0 / 1200);
    for (double mult : {0.1, 1.0, 10.0}) {
        SolverConfig cfg = small_config(6, 200);
        cfg.rho = mult * 200.0;
        const auto [state, report] = run_maom(g, scores, cfg);
        INFO("rho multiplier ", mult);
        CHECK(report.converged);
        for (const auto& lam : state.lambda)
            CHECK((lam - lambda_star).cwiseAbs().maxCoeff() < 1e-5);
    }
}
