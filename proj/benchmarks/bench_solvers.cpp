#include <benchmark/benchmark.h>

#include "nel/datagen.hpp"
#include "nel/elcore.hpp"
#include "nel/maom.hpp"
#include "nel/pcm.hpp"

namespace {

using namespace nel;

struct Setup {
    Graph g;
    std::vector<Eigen::MatrixXd> scores;
    SolverConfig cfg;
};

Setup make_setup(int K, int n, int d) {
    const FamilySpec fam = make_family("mean", d);
    Rng rng = Rng::substream(99, 0);
    const auto data = generate_node_data(fam, K, n, rng);
    Setup s{gen_erdos_renyi(K, 0.3, 12), score_matrices(data, fam.ef, fam.theta0),
            default_config(K, n)};
    return s;
}

void BM_log_star(benchmark::State& state) {
    double z = 0.0;
    for (auto _ : state) {
        double acc = 0.0;
        for (int k = 0; k < 1000; ++k) {
            z = 0.5 + 0.001 * k;
            const LogStar ls = log_star(z, 1e-3);
            acc += ls.value + ls.d1 + ls.d2;
        }
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_log_star);

void BM_local_objective(benchmark::State& state) {
    const Setup s = make_setup(4, static_cast<int>(state.range(0)), 5);
    const Eigen::VectorXd lambda = Eigen::VectorXd::Constant(5, 0.01);
    for (auto _ : state) {
        const LocalObjective lo = local_objective(s.scores[0], lambda, s.cfg.pseudo_log_eps);
        benchmark::DoNotOptimize(lo.value);
    }
}
BENCHMARK(BM_local_objective)->Arg(200)->Arg(1000)->Arg(5000);

void BM_pcm_node_update(benchmark::State& state) {
    const Setup s = make_setup(4, 1000, 5);
    const Eigen::VectorXd warm = Eigen::VectorXd::Zero(5);
    const Eigen::VectorXd term = Eigen::VectorXd::Constant(5, 0.1);
    for (auto _ : state) {
        const Eigen::VectorXd next = pcm_node_update(s.scores[0], warm, term, s.cfg.rho, 3,
                                                     s.cfg.pseudo_log_eps, 1e-10, 50);
        benchmark::DoNotOptimize(next);
    }
}
BENCHMARK(BM_pcm_node_update);

void BM_maom_node_update(benchmark::State& state) {
    const Setup s = make_setup(4, 1000, 5);
    const Eigen::VectorXd lambda = Eigen::VectorXd::Zero(5);
    const Eigen::VectorXd nbr = Eigen::VectorXd::Constant(5, 0.01);
    const Eigen::VectorXd edge = Eigen::VectorXd::Constant(5, 0.1);
    for (auto _ : state) {
        const LocalObjective lo = local_objective(s.scores[0], lambda, s.cfg.pseudo_log_eps);
        const Eigen::VectorXd next =
            maom_node_update(lo.hess, lo.grad, lambda, s.cfg.rho, 3, nbr, edge);
        benchmark::DoNotOptimize(next);
    }
}
BENCHMARK(BM_maom_node_update);

void BM_pcm_full_run(benchmark::State& state) {
    const Setup s = make_setup(20, 1000, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const auto [st, report] = run_pcm(s.g, s.scores, s.cfg);
        benchmark::DoNotOptimize(report.iterations);
    }
}
BENCHMARK(BM_pcm_full_run)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_maom_full_run(benchmark::State& state) {
    const Setup s = make_setup(20, 1000, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        const auto [st, report] = run_maom(s.g, s.scores, s.cfg);
        benchmark::DoNotOptimize(report.iterations);
    }
}
BENCHMARK(BM_maom_full_run)->Arg(3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
