#include "nel/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "nel/rng.hpp"

namespace nel {

bool edges_connected(int node_count, const std::vector<Edge>& edges) {
    if (node_count <= 0) return false;
    if (node_count == 1) return true;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count));
    for (const Edge& e : edges) {
        adj[static_cast<std::size_t>(e.lo)].push_back(e.hi);
        adj[static_cast<std::size_t>(e.hi)].push_back(e.lo);
    }
    std::vector<char> seen(static_cast<std::size_t>(node_count), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    return reached == node_count;
}

Graph::Graph(int node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
    if (node_count_ < 2) throw std::invalid_argument("graph needs at least 2 nodes");
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : edges_) {
        if (e.lo < 0 || e.hi >= node_count_) throw std::invalid_argument("edge endpoint out of range");
        if (e.lo >= e.hi) throw std::invalid_argument("edge endpoints must satisfy lo < hi");
        if (!seen.insert({e.lo, e.hi}).second) throw std::invalid_argument("duplicate edge");
    }
    if (static_cast<int>(edges_.size()) < node_count_ - 1)
        throw std::invalid_argument("too few edges for a connected graph");
    if (!edges_connected(node_count_, edges_)) throw std::invalid_argument("graph is not connected");

    adjacency_.resize(static_cast<std::size_t>(node_count_));
    incident_.resize(static_cast<std::size_t>(node_count_));
    for (int l = 0; l < static_cast<int>(edges_.size()); ++l) {
        const Edge& e = edges_[static_cast<std::size_t>(l)];
        adjacency_[static_cast<std::size_t>(e.lo)].push_back(e.hi);
        adjacency_[static_cast<std::size_t>(e.hi)].push_back(e.lo);
        incident_[static_cast<std::size_t>(e.lo)].push_back({l, e.hi, true});
        incident_[static_cast<std::size_t>(e.hi)].push_back({l, e.lo, false});
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
    // incident_ lists are already in ascending edge-index order by construction
}

bool Graph::has_edge(int a, int b) const {
    const auto& nbrs = adjacency_[static_cast<std::size_t>(a)];
    return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

IncidenceView incidence(const Graph& g) {
    const int K = g.node_count();
    const int M = g.edge_count();
    IncidenceView view;
    view.A = Eigen::MatrixXd::Zero(M, K);
    view.A_L = Eigen::MatrixXd::Zero(M, K);
    view.A_R = Eigen::MatrixXd::Zero(M, K);
    for (int l = 0; l < M; ++l) {
        const Edge& e = g.edge(l);
        view.A(l, e.lo) = 1.0;
        view.A(l, e.hi) = -1.0;
        view.A_L(l, e.lo) = 1.0;
        view.A_R(l, e.hi) = 1.0;
    }
    view.L = view.A.transpose() * view.A;
    view.degrees.resize(K);
    for (int i = 0; i < K; ++i) view.degrees(i) = g.degree(i);
    return view;
}

Graph gen_erdos_renyi(int node_count, double p_g, std::uint64_t seed, int max_retries) {
    if (node_count < 2) throw std::invalid_argument("node_count must be at least 2");
    if (!(p_g > 0.0) || p_g > 1.0) throw std::invalid_argument("p_g must lie in (0, 1]");
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(attempt));
        std::vector<Edge> edges;
        for (int i = 0; i < node_count; ++i)
            for (int j = i + 1; j < node_count; ++j)
                if (rng.uniform01() < p_g) edges.push_back({i, j});
        if (static_cast<int>(edges.size()) >= node_count - 1 && edges_connected(node_count, edges))
            return Graph(node_count, std::move(edges));
    }
    throw std::runtime_error("gen_erdos_renyi: retry budget exhausted; p_g is too small for connectivity");
}

Graph spanning_tree(const Graph& g) {
    const int K = g.node_count();
    std::vector<char> seen(static_cast<std::size_t>(K), 0);
    std::vector<Edge> tree_edges;
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : g.neighbors(u)) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                tree_edges.push_back({std::min(u, v), std::max(u, v)});
                frontier.push(v);
            }
        }
    }
    std::sort(tree_edges.begin(), tree_edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.lo, a.hi) < std::tie(b.lo, b.hi); });
    return Graph(K, std::move(tree_edges));
}

std::string save_edge_list(const Graph& g) {
    std::ostringstream out;
    for (const Edge& e : g.edges()) out << (e.lo + 1) << ' ' << (e.hi + 1) << '\n';
    return out.str();
}

Graph load_edge_list(const std::string& text) {
    std::istringstream in(text);
    std::vector<Edge> edges;
    int max_label = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        int a = 0, b = 0;
        if (!(row >> a >> b)) throw std::invalid_argument("edge list: malformed line: " + line);
        if (a < 1 || b < 1) throw std::invalid_argument("edge list: labels are 1-based");
        edges.push_back({a - 1, b - 1});
        max_label = std::max({max_label, a, b});
    }
    return Graph(max_label, std::move(edges));
}

Graph load_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_edge_list(buffer.str());
}

void save_edge_list_file(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write graph file: " + path);
    out << save_edge_list(g);
}

}  // namespace nel
