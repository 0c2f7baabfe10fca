// Command-line front end: synthetic solves, coverage / iteration / rho
// experiments, graph utilities, profile intervals, and CSV ingestion.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nel/chisq.hpp"
#include "nel/csv.hpp"
#include "nel/datagen.hpp"
#include "nel/elcore.hpp"
#include "nel/experiment.hpp"
#include "nel/graph.hpp"
#include "nel/maom.hpp"
#include "nel/netsim.hpp"
#include "nel/pcm.hpp"
#include "nel/profile.hpp"

namespace {

namespace fs = std::filesystem;

Eigen::VectorXd parse_vector(const std::string& text) {
    Eigen::VectorXd out;
    if (text.empty()) return out;
    std::vector<double> values;
    std::stringstream in(text);
    std::string field;
    while (std::getline(in, field, ',')) values.push_back(std::stod(field));
    out.resize(static_cast<Eigen::Index>(values.size()));
    for (std::size_t k = 0; k < values.size(); ++k) out(static_cast<Eigen::Index>(k)) = values[k];
    return out;
}

std::vector<std::string> parse_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string field;
    while (std::getline(in, field, ',')) out.push_back(field);
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    std::printf("wrote %s\n", path.string().c_str());
}

struct CommonOptions {
    std::string family = "mean";
    int d = 0;
    int K = 20;
    int n = 200;
    std::string graph_model = "er";
    double p_g = 0.3;
    std::string rho_rule = "n";
    std::string eta_rule = "n2";
    std::uint64_t seed = 1;
    std::string out_dir;
    int max_iter = 5000;

    void attach(CLI::App* cmd, bool with_family = true) {
        if (with_family)
            cmd->add_option("--family", family,
                            "quantile | linear | logistic | mean | repeated");
        cmd->add_option("--d", d, "covariate dimension (0 = family default)");
        cmd->add_option("--K", K, "number of nodes");
        cmd->add_option("--n", n, "samples per node");
        cmd->add_option("--graph", graph_model, "er | tree");
        cmd->add_option("--p-g", p_g, "edge probability for er graphs");
        cmd->add_option("--rho", rho_rule, "rho rule, e.g. n, 0.1n, 500");
        cmd->add_option("--eta", eta_rule, "eta rule: n2, relaxed, or a number");
        cmd->add_option("--seed", seed, "random seed");
        cmd->add_option("--out", out_dir, "output directory for CSV files");
        cmd->add_option("--max-iter", max_iter, "solver iteration cap");
    }

    nel::ExperimentSpec spec() const {
        nel::ExperimentSpec s;
        s.family = family;
        s.d = d;
        s.K = K;
        s.n = n;
        s.graph_model = graph_model;
        s.p_g = p_g;
        s.rho_rule = rho_rule;
        s.eta_rule = eta_rule;
        s.seed = seed;
        s.max_iter = max_iter;
        return s;
    }
};

int run_solve(const CommonOptions& opt, const std::string& algo, const std::string& theta_text,
              double level, bool trace, bool netsim) {
    const nel::FamilySpec family = nel::make_family(opt.family, opt.d);
    nel::Rng data_rng = nel::Rng::substream(opt.seed, 0);
    const auto data = nel::generate_node_data(family, opt.K, opt.n, data_rng);
    const nel::Graph g =
        nel::make_graph(opt.graph_model, opt.K, opt.p_g, nel::Rng::mix(opt.seed, 1));
    Eigen::VectorXd theta = parse_vector(theta_text);
    if (theta.size() == 0) theta = family.theta0;
    if (theta.size() != family.ef.param_dim)
        throw std::runtime_error("theta must have " + std::to_string(family.ef.param_dim) +
                                 " components");
    const auto scores = nel::score_matrices(data, family.ef, theta);

    nel::SolverConfig cfg = nel::config_for(opt.spec());
    cfg.trace_statistic = trace;

    double statistic = 0.0;
    nel::RunReport report;
    if (algo == "el" || algo == "reference") {
        const Eigen::VectorXd lambda = nel::solve_reference(scores, cfg.pseudo_log_eps);
        const std::vector<Eigen::VectorXd> consensus(scores.size(), lambda);
        statistic = nel::el_statistic(consensus, scores, cfg.pseudo_log_eps);
    } else if (algo == "pcm" || algo == "maom") {
        const nel::Algorithm a = algo == "pcm" ? nel::Algorithm::pcm : nel::Algorithm::maom;
        if (netsim) {
            const nel::DecentralizedResult dec = nel::run_decentralized(a, g, scores, cfg);
            report = dec.report;
            statistic = report.final_statistic;
            if (!opt.out_dir.empty())
                write_file(fs::path(opt.out_dir) / "locality.csv", dec.certificate.csv());
            std::printf("locality: %s (%ld messages, %ld blocks)\n",
                        dec.certificate.clean() ? "clean" : "VIOLATED",
                        dec.certificate.total_messages, dec.certificate.total_blocks);
        } else if (a == nel::Algorithm::pcm) {
            report = nel::run_pcm(g, scores, cfg).second;
            statistic = report.final_statistic;
        } else {
            report = nel::run_maom(g, scores, cfg).second;
            statistic = report.final_statistic;
        }
        std::printf("iterations=%d converged=%s consensus_gap=%.3e\n", report.iterations,
                    report.converged ? "yes" : "no", report.final_consensus_gap);
        if (!opt.out_dir.empty() && !report.trace.empty())
            write_file(fs::path(opt.out_dir) / "trace.csv", report.csv());
    } else {
        throw std::runtime_error("unknown algorithm: " + algo);
    }

    const double p_value = 1.0 - nel::chisq_cdf(family.ef.eq_dim, statistic);
    const double threshold = nel::chisq_quantile(family.ef.eq_dim, level);
    std::printf("statistic=%.6f p_value=%.6f threshold(%.0f%%)=%.6f decision=%s\n", statistic,
                p_value, level * 100.0, threshold, statistic <= threshold ? "accept" : "reject");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized empirical likelihood toolkit"};
    app.set_config("--config", "", "read options from an INI file (key = value sections)");
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "solve one synthetic instance and test theta");
    CommonOptions solve_opt;
    solve_opt.attach(solve);
    std::string algo = "maom", theta_text;
    double level = 0.95;
    bool trace = false, netsim = false;
    solve->add_option("--algo", algo, "pcm | maom | el");
    solve->add_option("--theta", theta_text, "comma-separated parameter to test");
    solve->add_option("--level", level, "confidence level");
    solve->add_flag("--trace", trace, "record the per-iteration statistic");
    solve->add_flag("--netsim", netsim, "run through the virtual network simulator");

    // coverage
    auto* coverage = app.add_subcommand("coverage", "empirical coverage across replications");
    CommonOptions cov_opt;
    cov_opt.attach(coverage);
    int reps = 300, threads = 0;
    std::string levels_text = "0.90,0.95";
    bool no_intervals = false;
    coverage->add_option("--reps", reps, "replications");
    coverage->add_option("--levels", levels_text, "comma-separated confidence levels");
    coverage->add_option("--threads", threads, "worker threads (0 = all)");
    coverage->add_flag("--no-intervals", no_intervals, "skip interval-length profiling");

    // iterations
    auto* iterations = app.add_subcommand("iterations", "iteration/time sweep over topologies");
    CommonOptions iter_opt;
    iter_opt.K = 50;
    iter_opt.n = 1000;
    iter_opt.attach(iterations, false);
    std::string topologies_text = "tree,er0.1,er0.3,er0.5,er0.7,er1.0";
    std::string d_list = "3,5", n_list = "1000";
    int iter_reps = 5;
    iterations->add_option("--topologies", topologies_text, "comma list: tree, er<p>");
    iterations->add_option("--d-list", d_list, "comma list of dimensions");
    iterations->add_option("--n-list", n_list, "comma list of per-node sizes");
    iterations->add_option("--reps", iter_reps, "replications per cell");
    iterations->add_option("--threads", threads, "worker threads");

    // rho sweep
    auto* rho_sweep = app.add_subcommand("rho-sweep", "iterations as a function of rho");
    CommonOptions rho_opt;
    rho_opt.family = "mean";
    rho_opt.d = 3;
    rho_opt.K = 20;
    rho_opt.n = 1000;
    rho_opt.p_g = 0.2;
    rho_opt.attach(rho_sweep);
    std::string multipliers_text = "0.01,0.1,1,10,100";
    int rho_reps = 5;
    rho_sweep->add_option("--multipliers", multipliers_text, "rho = multiplier * n grid");
    rho_sweep->add_option("--reps", rho_reps, "replications");
    rho_sweep->add_option("--threads", threads, "worker threads");

    // graph utilities
    auto* graph_cmd = app.add_subcommand("graph", "graph generation and spanning trees");
    graph_cmd->require_subcommand(1);
    auto* graph_gen = graph_cmd->add_subcommand("gen", "draw a connected Erdos-Renyi graph");
    int gK = 20;
    double gp = 0.3;
    std::uint64_t gseed = 1;
    std::string gout = "graph.txt", gin;
    graph_gen->add_option("--K", gK, "nodes");
    graph_gen->add_option("--p", gp, "edge probability");
    graph_gen->add_option("--seed", gseed, "seed");
    graph_gen->add_option("--out", gout, "edge-list file to write");
    auto* graph_tree = graph_cmd->add_subcommand("tree", "breadth-first spanning tree of a graph");
    std::string tout = "tree.txt";
    graph_tree->add_option("--in", gin, "edge-list file to read")->required();
    graph_tree->add_option("--out", tout, "edge-list file to write");

    // interval
    auto* interval = app.add_subcommand("interval", "profile confidence interval");
    CommonOptions int_opt;
    int_opt.family = "quantile";
    int_opt.attach(interval);
    std::string solver_name = "maom";
    int component = 0;
    double int_level = 0.95;
    interval->add_option("--solver", solver_name, "reference | pcm | maom");
    interval->add_option("--component", component, "parameter component to profile");
    interval->add_option("--level", int_level, "confidence level");

    // csv ingestion
    auto* ingest = app.add_subcommand("ingest-csv", "regression intervals from a CSV file");
    std::string csv_path, response, covariates_text, ingest_family = "logistic";
    int iK = 20;
    double ip = 0.3, ilevel = 0.95;
    std::uint64_t iseed = 1;
    std::string iout;
    int imax_iter = 5000;
    ingest->add_option("--csv", csv_path, "input file")->required();
    ingest->add_option("--response", response, "response column name")->required();
    ingest->add_option("--covariates", covariates_text, "comma list of covariate columns")
        ->required();
    ingest->add_option("--family", ingest_family, "logistic | linear");
    ingest->add_option("--K", iK, "nodes");
    ingest->add_option("--p-g", ip, "edge probability");
    ingest->add_option("--level", ilevel, "confidence level");
    ingest->add_option("--seed", iseed, "seed");
    ingest->add_option("--out", iout, "output directory");
    ingest->add_option("--max-iter", imax_iter, "solver iteration cap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return run_solve(solve_opt, algo, theta_text, level, trace, netsim);

        if (coverage->parsed()) {
            nel::ExperimentSpec spec = cov_opt.spec();
            spec.replications = reps;
            spec.threads = threads;
            spec.intervals = !no_intervals;
            spec.levels.clear();
            for (const std::string& s : parse_list(levels_text)) spec.levels.push_back(std::stod(s));
            const nel::CoverageTable table = nel::experiment_coverage(spec);
            if (table.failures > 0)
                std::fprintf(stderr, "%d replication(s) failed and were skipped\n", table.failures);
            std::printf("%s", table.csv().c_str());
            if (!cov_opt.out_dir.empty())
                write_file(fs::path(cov_opt.out_dir) / "coverage.csv", table.csv());
            return 0;
        }

        if (iterations->parsed()) {
            nel::ExperimentSpec spec = iter_opt.spec();
            spec.replications = iter_reps;
            spec.threads = threads;
            std::vector<std::pair<int, int>> grid;
            for (const std::string& ds : parse_list(d_list))
                for (const std::string& ns : parse_list(n_list))
                    grid.emplace_back(std::stoi(ds), std::stoi(ns));
            const nel::IterationsTable table =
                nel::experiment_iterations(spec, parse_list(topologies_text), grid);
            std::printf("%s", table.csv().c_str());
            if (!iter_opt.out_dir.empty())
                write_file(fs::path(iter_opt.out_dir) / "iterations.csv", table.csv());
            return 0;
        }

        if (rho_sweep->parsed()) {
            nel::ExperimentSpec spec = rho_opt.spec();
            spec.replications = rho_reps;
            spec.threads = threads;
            std::vector<double> multipliers;
            for (const std::string& s : parse_list(multipliers_text))
                multipliers.push_back(std::stod(s));
            const nel::RhoCurve curve = nel::experiment_rho_sweep(spec, multipliers);
            std::printf("%s", curve.csv().c_str());
            if (!rho_opt.out_dir.empty())
                write_file(fs::path(rho_opt.out_dir) / "rho.csv", curve.csv());
            return 0;
        }

        if (graph_gen->parsed()) {
            const nel::Graph g = nel::gen_erdos_renyi(gK, gp, gseed);
            nel::save_edge_list_file(g, gout);
            std::printf("wrote %s: %d nodes, %d edges\n", gout.c_str(), g.node_count(),
                        g.edge_count());
            return 0;
        }
        if (graph_tree->parsed()) {
            const nel::Graph g = nel::load_edge_list_file(gin);
            const nel::Graph tree = nel::spanning_tree(g);
            nel::save_edge_list_file(tree, tout);
            std::printf("wrote %s: %d nodes, %d edges\n", tout.c_str(), tree.node_count(),
                        tree.edge_count());
            return 0;
        }

        if (interval->parsed()) {
            const nel::FamilySpec family = nel::make_family(int_opt.family, int_opt.d);
            nel::Rng data_rng = nel::Rng::substream(int_opt.seed, 0);
            const auto data = nel::generate_node_data(family, int_opt.K, int_opt.n, data_rng);
            const nel::Graph g = nel::make_graph(int_opt.graph_model, int_opt.K, int_opt.p_g,
                                                 nel::Rng::mix(int_opt.seed, 1));
            Eigen::Index total = 0;
            for (const auto& b : data) total += b.rows();
            Eigen::MatrixXd pooled(total, family.ef.obs_dim);
            Eigen::Index at = 0;
            for (const auto& b : data) {
                pooled.middleRows(at, b.rows()) = b;
                at += b.rows();
            }
            const Eigen::VectorXd center = family.point_estimate(pooled);
            nel::SolverKind kind = nel::SolverKind::maom;
            if (solver_name == "reference" || solver_name == "el")
                kind = nel::SolverKind::reference;
            else if (solver_name == "pcm")
                kind = nel::SolverKind::pcm;
            else if (solver_name != "maom")
                throw std::runtime_error("unknown solver: " + solver_name);
            const nel::SolverConfig cfg = nel::config_for(int_opt.spec());
            const nel::ProfileInterval pi = nel::profile_interval(
                g, data, family.ef, center, component, int_level, kind, cfg);
            std::printf("component=%d center=%.6f interval=(%.6f, %.6f) bracketed=%s\n", component,
                        center(component), pi.lo, pi.hi, pi.bracketed() ? "yes" : "no");
            return 0;
        }

        if (ingest->parsed()) {
            const nel::CsvTable table = nel::read_csv_file(csv_path);
            const Eigen::MatrixXd pooled =
                nel::build_regression_observations(table, response, parse_list(covariates_text));
            const int d = static_cast<int>(pooled.cols()) - 1;
            nel::Rng split_rng = nel::Rng::substream(iseed, 0);
            const auto node_data = nel::split_rows(pooled, iK, split_rng);
            const int n_per = static_cast<int>(node_data.front().rows());
            const nel::Graph g = nel::gen_erdos_renyi(iK, ip, nel::Rng::mix(iseed, 1));
            const nel::EstimatingFunction ef = ingest_family == "logistic"
                                                   ? nel::logistic_ef(d)
                                                   : nel::linear_ef(d);
            const nel::FamilySpec fitter = nel::make_family(ingest_family, d);
            const Eigen::VectorXd fit = fitter.point_estimate(pooled);

            nel::SolverConfig cfg;
            cfg.rho = n_per;
            cfg.eta = nel::eta_default(iK, n_per);
            cfg.pseudo_log_eps = 1.0 / (static_cast<double>(iK) * n_per);
            cfg.max_iter = imax_iter;

            std::ostringstream out;
            out << "component,method,lo,hi\n";
            const char* names[3] = {"pcm", "maom", "el"};
            const nel::SolverKind kinds[3] = {nel::SolverKind::pcm, nel::SolverKind::maom,
                                              nel::SolverKind::reference};
            for (int c = 0; c < d; ++c) {
                for (int m = 0; m < 3; ++m) {
                    const nel::ProfileInterval pi = nel::profile_interval(
                        g, node_data, ef, fit, c, ilevel, kinds[m], cfg);
                    out << c << ',' << names[m] << ',' << nel::format_double(pi.lo) << ','
                        << nel::format_double(pi.hi) << '\n';
                }
                std::printf("beta_%d fit=%.4f\n", c, fit(c));
            }
            std::printf("%s", out.str().c_str());
            if (!iout.empty()) write_file(fs::path(iout) / "intervals.csv", out.str());
            return 0;
        }
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}
