#include "nel/profile.hpp"

#include <cmath>

#include "doctest.h"
#include "nel/chisq.hpp"
#include "nel/datagen.hpp"
#include "nel/elcore.hpp"

using namespace nel;

TEST_CASE("crossing search on a quadratic profile") {
    // statistic (x - 2)^2 crossing 4 gives the interval (0, 4)
    const auto stat = [](double x) { return (x - 2.0) * (x - 2.0); };
    const ProfileInterval pi = profile_interval(stat, 2.0, 4.0);
    CHECK(pi.bracketed());
    CHECK(pi.lo == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(pi.hi == doctest::Approx(4.0).epsilon(1e-5));
    CHECK(pi.statistic_at_center == 0.0);
}

TEST_CASE("unbracketable profiles are reported, not thrown") {
    const auto flat = [](double) { return 0.0; };
    const ProfileInterval pi = profile_interval(flat, 1.0, 3.84);
    CHECK_FALSE(pi.lo_bracketed);
    CHECK_FALSE(pi.hi_bracketed);
}

TEST_CASE("statistic at the point estimate sits below the threshold") {
    const FamilySpec fam = make_family("quantile");
    Rng rng = Rng::substream(900, 0);
    const auto data = generate_node_data(fam, 5, 200, rng);
    const Graph g = gen_erdos_renyi(5, 0.6, 31);
    SolverConfig cfg = default_config(5, 200);
    cfg.max_iter = 20000;

    Eigen::MatrixXd pooled(1000, 1);
    for (int i = 0; i < 5; ++i) pooled.middleRows(200 * i, 200) = data[static_cast<std::size_t>(i)];
    const Eigen::VectorXd center = fam.point_estimate(pooled);

    const ProfileInterval pi =
        profile_interval(g, data, fam.ef, center, 0, 0.95, SolverKind::reference, cfg);
    CHECK(pi.statistic_at_center <= pi.threshold);
    CHECK(pi.bracketed());
    CHECK(pi.lo < center(0));
    CHECK(pi.hi > center(0));
    CHECK(pi.threshold == doctest::Approx(chisq_quantile(1, 0.95)).epsilon(1e-12));
}

TEST_CASE("reference and maom endpoints agree on a seeded quantile instance") {
    const FamilySpec fam = make_family("quantile");
    Rng rng = Rng::substream(901, 0);
    const auto data = generate_node_data(fam, 5, 200, rng);
    const Graph g = gen_erdos_renyi(5, 0.6, 32);
    SolverConfig cfg = default_config(5, 200);
    cfg.max_iter = 20000;

    Eigen::MatrixXd pooled(1000, 1);
    for (int i = 0; i < 5; ++i) pooled.middleRows(200 * i, 200) = data[static_cast<std::size_t>(i)];
    const Eigen::VectorXd center = fam.point_estimate(pooled);

    const ProfileInterval ref =
        profile_interval(g, data, fam.ef, center, 0, 0.95, SolverKind::reference, cfg);
    const ProfileInterval maom =
        profile_interval(g, data, fam.ef, center, 0, 0.95, SolverKind::maom, cfg);
    const ProfileInterval pcm =
        profile_interval(g, data, fam.ef, center, 0, 0.95, SolverKind::pcm, cfg);
    REQUIRE(ref.bracketed());
    REQUIRE(maom.bracketed());
    REQUIRE(pcm.bracketed());
    CHECK(std::abs(ref.lo - maom.lo) <= 1e-3);
    CHECK(std::abs(ref.hi - maom.hi) <= 1e-3);
    CHECK(std::abs(ref.lo - pcm.lo) <= 1e-3);
    CHECK(std::abs(ref.hi - pcm.hi) <= 1e-3);
}

TEST_CASE("component index is validated") {
    const FamilySpec fam = make_family("mean", 2);
    Rng rng = Rng::substream(902, 0);
    const auto data = generate_node_data(fam, 3, 50, rng);
    const Graph g(3, {{0, 1}, {1, 2}});
    const SolverConfig cfg = default_config(3, 50);
    CHECK_THROWS_AS(
        profile_interval(g, data, fam.ef, fam.theta0, 5, 0.95, SolverKind::reference, cfg),
        std::invalid_argument);
}
