#ifndef NEL_GRAPH_HPP
#define NEL_GRAPH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace nel {

/// One undirected edge with 0-based endpoints, lo < hi.
struct Edge {
    int lo = 0;
    int hi = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected connected graph with an ordered edge list.
/// Nodes are 0-based internally; the text format uses 1-based labels.
class Graph {
  public:
    // Validates: labels in range, lo < hi, no duplicates, connected,
    // at least node_count - 1 edges. Throws std::invalid_argument.
    Graph(int node_count, std::vector<Edge> edges);

    int node_count() const { return node_count_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int l) const { return edges_[static_cast<std::size_t>(l)]; }

    int degree(int node) const { return static_cast<int>(adjacency_[static_cast<std::size_t>(node)].size()); }
    /// Neighbors in ascending label order.
    const std::vector<int>& neighbors(int node) const { return adjacency_[static_cast<std::size_t>(node)]; }

    struct IncidentEdge {
        int edge;     // index into edges()
        int other;    // the co-endpoint
        bool is_lo;   // true when this node is the lower endpoint
    };
    /// Incident edges in ascending edge-index order.
    const std::vector<IncidentEdge>& incident(int node) const {
        return incident_[static_cast<std::size_t>(node)];
    }

    bool has_edge(int a, int b) const;

  private:
    int node_count_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<std::vector<IncidentEdge>> incident_;
};

/// Oriented incidence matrix and derived views.
/// Row l of A is e_lo - e_hi for edge l; A = A_L - A_R; L = A^T A.
struct IncidenceView {
    Eigen::MatrixXd A;    // M x K
    Eigen::MatrixXd A_L;  // M x K, rows e_lo
    Eigen::MatrixXd A_R;  // M x K, rows e_hi
    Eigen::MatrixXd L;    // K x K Laplacian
    Eigen::VectorXi degrees;
};

IncidenceView incidence(const Graph& g);

/// Erdos-Renyi draw conditioned on connectivity: each potential edge is
/// included independently with probability p_g; disconnected draws are
/// redrawn from the next seed substream, up to `max_retries` attempts.
Graph gen_erdos_renyi(int node_count, double p_g, std::uint64_t seed, int max_retries = 1000);

/// Breadth-first spanning tree rooted at node 0, neighbors visited in
/// ascending label order. Output edges are sorted lexicographically.
Graph spanning_tree(const Graph& g);

bool edges_connected(int node_count, const std::vector<Edge>& edges);

/// Text round trip: one "i i'" pair per line, 1-based labels.
std::string save_edge_list(const Graph& g);
Graph load_edge_list(const std::string& text);
Graph load_edge_list_file(const std::string& path);
void save_edge_list_file(const Graph& g, const std::string& path);

}  // namespace nel

#endif
