#include "nel/csv.hpp"

#include <cmath>

#include "doctest.h"
#include "nel/datagen.hpp"
#include "nel/elcore.hpp"
#include "nel/estfun.hpp"
#include "nel/profile.hpp"

using namespace nel;

TEST_CASE("csv parsing") {
    const CsvTable table = parse_csv("a,b,c\n1,2,3\n4.5, 6 ,7\n");
    CHECK(table.header == std::vector<std::string>{"a", "b", "c"});
    CHECK(table.values.rows() == 2);
    CHECK(table.values(1, 0) == 4.5);
    CHECK(table.column("b") == 1);
    CHECK_THROWS_AS(table.column("nope"), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv("a,b\n1,x\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv(""), std::invalid_argument);
}

TEST_CASE("regression observations: standardized covariates behind an intercept") {
    const CsvTable table = parse_csv("y,age,hours\n1,20,35\n0,30,40\n1,40,45\n0,50,60\n");
    const Eigen::MatrixXd obs = build_regression_observations(table, "y", {"age", "hours"});
    CHECK(obs.cols() == 4);
    CHECK(obs.col(0) == table.values.col(0));
    CHECK(obs.col(1) == Eigen::VectorXd::Ones(4));
    for (int c = 2; c < 4; ++c) {
        CHECK(obs.col(c).mean() == doctest::Approx(0.0).epsilon(1e-12));
        const double sd = std::sqrt(obs.col(c).squaredNorm() / 3.0);
        CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("row splitting drops the remainder and keeps every row once") {
    Eigen::MatrixXd pooled(11, 2);
    for (int j = 0; j < 11; ++j) pooled.row(j) << j, -j;
    Rng rng(3);
    const auto blocks = split_rows(pooled, 3, rng);
    REQUIRE(blocks.size() == 3);
    for (const auto& b : blocks) CHECK(b.rows() == 3);
    std::vector<int> seen;
    for (const auto& b : blocks)
        for (int j = 0; j < 3; ++j) seen.push_back(static_cast<int>(b(j, 0)));
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());  // all distinct
    CHECK_THROWS_AS(split_rows(pooled, 20, rng), std::invalid_argument);
}

TEST_CASE("ingested logistic data yields near-identical intervals across solvers") {
    // synthetic csv in the regression layout: binary response and two covariates
    const FamilySpec gen = make_family("logistic", 3);
    Rng rng = Rng::substream(77, 0);
    std::string csv = "y,x1,x2\n";
    for (int j = 0; j < 1500; ++j) {
        const Eigen::VectorXd obs = gen.sample(rng);
        csv += format_double(obs(0)) + "," + format_double(10.0 + 2.0 * obs(1)) + "," +
               format_double(-3.0 + 0.5 * obs(2)) + "\n";
    }
    const CsvTable table = parse_csv(csv);
    const Eigen::MatrixXd pooled = build_regression_observations(table, "y", {"x1", "x2"});

    Rng split_rng = Rng::substream(77, 1);
    const auto node_data = split_rows(pooled, 5, split_rng);
    const Graph g = gen_erdos_renyi(5, 0.6, 21);
    const int d = 3;  // intercept + 2 covariates
    const EstimatingFunction ef = logistic_ef(d);
    SolverConfig cfg = default_config(5, static_cast<int>(node_data[0].rows()));
    cfg.max_iter = 20000;

    const FamilySpec fam = make_family("logistic", d);
    const Eigen::VectorXd fit = fam.point_estimate(pooled);

    const ProfileInterval el =
        profile_interval(g, node_data, ef, fit, 1, 0.95, SolverKind::reference, cfg);
    const ProfileInterval pcm =
        profile_interval(g, node_data, ef, fit, 1, 0.95, SolverKind::pcm, cfg);
    const ProfileInterval maom =
        profile_interval(g, node_data, ef, fit, 1, 0.95, SolverKind::maom, cfg);
    REQUIRE(el.bracketed());
    CHECK(std::abs(el.lo - pcm.lo) < 2e-3);
    CHECK(std::abs(el.hi - pcm.hi) < 2e-3);
    CHECK(std::abs(el.lo - maom.lo) < 2e-3);
    CHECK(std::abs(el.hi - maom.hi) < 2e-3);
}
