#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errors.hpp"
#include "random.hpp"

namespace cliquedecomp {

using Matrix = Eigen::MatrixXd;
using VertexSet = std::vector<int>; // sorted, 0-based

/// Undirected simple graph held as a dense symmetric 0/1 adjacency matrix.
///
/// Construction validates symmetry and the 0/1 alphabet; the matrix is
/// immutable afterwards so a Graph can be shared read-only across workers.
class Graph {
public:
    explicit Graph(Matrix adjacency) : adjacency_(std::move(adjacency)) {
        if (adjacency_.rows() == 0 || adjacency_.rows() != adjacency_.cols())
            throw ArgumentError("adjacency matrix must be square and non-empty");
        const Eigen::Index n = adjacency_.rows();
        has_self_loops_ = true;
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double v = adjacency_(i, j);
                if (v != 0.0 && v != 1.0)
                    throw ArgumentError("adjacency entries must be 0 or 1");
                if (v != adjacency_(j, i))
                    throw ArgumentError("adjacency matrix must be symmetric");
            }
            if (adjacency_(j, j) != 1.0) has_self_loops_ = false;
        }
    }

    /// Build from 0-based undirected edges; the diagonal is set to 1.
    static Graph from_edges(int n_vertices,
                            const std::vector<std::pair<int, int>>& edges) {
        if (n_vertices <= 0) throw ArgumentError("graph needs at least one vertex");
        Matrix a = Matrix::Identity(n_vertices, n_vertices);
        for (auto [i, j] : edges) {
            if (i < 0 || j < 0 || i >= n_vertices || j >= n_vertices)
                throw ArgumentError("edge endpoint out of range");
            a(i, j) = 1.0;
            a(j, i) = 1.0;
        }
        return Graph(std::move(a));
    }

    int n_vertices() const noexcept { return static_cast<int>(adjacency_.rows()); }
    const Matrix& adjacency() const noexcept { return adjacency_; }
    bool has_self_loops() const noexcept { return has_self_loops_; }
    bool adjacent(int i, int j) const { return adjacency_(i, j) != 0.0; }

    /// Number of undirected edges, diagonal excluded.
    std::int64_t edge_count() const {
        std::int64_t count = 0;
        for (Eigen::Index j = 0; j < adjacency_.cols(); ++j)
            for (Eigen::Index i = 0; i < j; ++i)
                if (adjacency_(i, j) != 0.0) ++count;
        return count;
    }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i < n_vertices(); ++i)
            for (int j = i + 1; j < n_vertices(); ++j)
                if (adjacent(i, j)) out.emplace_back(i, j);
        return out;
    }

    /// True when every pair of distinct vertices in `vertices` is adjacent.
    /// The diagonal is ignored, so the empty set and singletons are cliques.
    bool is_clique(const VertexSet& vertices) const {
        for (std::size_t a = 0; a < vertices.size(); ++a)
            for (std::size_t b = a + 1; b < vertices.size(); ++b)
                if (!adjacent(vertices[a], vertices[b])) return false;
        return true;
    }

    Graph with_unit_diagonal() const {
        Matrix a = adjacency_;
        a.diagonal().setOnes();
        return Graph(std::move(a));
    }

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.adjacency_ == b.adjacency_;
    }

private:
    Matrix adjacency_;
    bool has_self_loops_ = false;
};

/// Low-rank/sparse ground truth M = L* + S* for a known clique.
struct GroundTruthPair {
    Matrix l_star;
    Matrix s_star;
    VertexSet clique;

    int n_vertices() const { return static_cast<int>(l_star.rows()); }
    int clique_size() const { return static_cast<int>(clique.size()); }

    /// Unit-norm clique indicator: the single column of U with L* = n U Uᵀ.
    Eigen::VectorXd u() const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(l_star.rows());
        if (clique.empty()) return v;
        const double h = 1.0 / std::sqrt(static_cast<double>(clique.size()));
        for (int i : clique) v(i) = h;
        return v;
    }

    /// Support of S* (the set Ω of the sparse component).
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> support() const {
        return s_star.array() != 0.0;
    }
};

inline GroundTruthPair make_ground_truth(const Graph& graph, VertexSet clique) {
    std::sort(clique.begin(), clique.end());
    clique.erase(std::unique(clique.begin(), clique.end()), clique.end());
    const int n = graph.n_vertices();
    for (int v : clique)
        if (v < 0 || v >= n) throw ArgumentError("clique vertex out of range");
    if (!graph.has_self_loops())
        throw ArgumentError("ground truth requires a unit diagonal");
    if (!graph.is_clique(clique))
        throw ArgumentError("ground-truth vertex set is not a clique");
    Matrix l = Matrix::Zero(n, n);
    for (int i : clique)
        for (int j : clique) l(i, j) = 1.0;
    Matrix s = graph.adjacency() - l;
    return {std::move(l), std::move(s), std::move(clique)};
}

struct PlantedInstance {
    Graph graph;
    VertexSet clique_vertices;
    double edge_probability;
    std::uint64_t seed;

    GroundTruthPair ground_truth() const {
        return make_ground_truth(graph, clique_vertices);
    }
};

namespace detail {

inline void check_probability(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw ArgumentError("edge probability must lie in (0, 1)");
}

} // namespace detail

/// Planted clique on `clique_size` vertices inside G(N, p).
///
/// The clique occupies {0, ..., n-1} unless `shuffle_labels` is set, in
/// which case a seeded Fisher-Yates permutation picks its vertices. Every
/// pair outside V*×V* is drawn independently with probability p, in
/// row-major upper-triangle order; the diagonal is 1.
inline PlantedInstance generate_planted(int n_vertices, int clique_size,
                                        double p, std::uint64_t seed,
                                        bool shuffle_labels = false) {
    if (n_vertices < 1) throw ArgumentError("N must be positive");
    if (clique_size < 1 || clique_size > n_vertices)
        throw ArgumentError("clique size must satisfy 1 <= n <= N");
    detail::check_probability(p);

    Xoshiro256 rng(seed);
    std::vector<int> labels(n_vertices);
    std::iota(labels.begin(), labels.end(), 0);
    if (shuffle_labels) {
        for (int i = n_vertices - 1; i > 0; --i) {
            const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
            std::swap(labels[i], labels[j]);
        }
    }
    std::vector<char> in_clique(n_vertices, 0);
    VertexSet clique(labels.begin(), labels.begin() + clique_size);
    std::sort(clique.begin(), clique.end());
    for (int v : clique) in_clique[v] = 1;

    Matrix a = Matrix::Identity(n_vertices, n_vertices);
    for (int i = 0; i < n_vertices; ++i) {
        for (int j = i + 1; j < n_vertices; ++j) {
            const bool edge = (in_clique[i] && in_clique[j]) || rng.bernoulli(p);
            if (edge) {
                a(i, j) = 1.0;
                a(j, i) = 1.0;
            }
        }
    }
    return {Graph(std::move(a)), std::move(clique), p, seed};
}

/// G(N, p) with unit diagonal: strict upper triangle i.i.d. Bernoulli(p),
/// mirrored below.
inline Graph generate_bernoulli_symmetric(int n_vertices, double p,
                                          std::uint64_t seed) {
    if (n_vertices < 1) throw ArgumentError("N must be positive");
    detail::check_probability(p);
    Xoshiro256 rng(seed);
    Matrix a = Matrix::Identity(n_vertices, n_vertices);
    for (int i = 0; i < n_vertices; ++i) {
        for (int j = i + 1; j < n_vertices; ++j) {
            if (rng.bernoulli(p)) {
                a(i, j) = 1.0;
                a(j, i) = 1.0;
            }
        }
    }
    return Graph(std::move(a));
}

// ---------------------------------------------------------------------------
// DIMACS clique format

/// Parse an ASCII DIMACS clique file (`c` comments, one `p edge N M` line,
/// `e i j` lines with 1-based indices). The diagonal is forced to 1.
/// `n` lines and trailing edge weights are ignored with a warning.
inline Graph parse_dimacs(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    int n = 0;
    long long declared_edges = -1;
    bool warned_nodes = false;
    bool warned_weights = false;
    std::vector<std::pair<int, int>> edges;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream tokens(line);
        std::string tag;
        if (!(tokens >> tag)) continue;
        if (tag == "c") continue;
        if (tag == "p") {
            if (n > 0) throw ParseError(line_no, "duplicate problem line");
            std::string format;
            long long nv = 0, ne = 0;
            if (!(tokens >> format >> nv >> ne))
                throw ParseError(line_no, "malformed problem line, expected 'p edge N M'");
            if (nv <= 0 || nv > 1'000'000 || ne < 0)
                throw ParseError(line_no, "invalid vertex or edge count in problem line");
            n = static_cast<int>(nv);
            declared_edges = ne;
        } else if (tag == "e") {
            if (n == 0) throw ParseError(line_no, "edge line before problem line");
            long long i = 0, j = 0;
            if (!(tokens >> i >> j))
                throw ParseError(line_no, "malformed edge line, expected 'e i j'");
            if (i < 1 || j < 1 || i > n || j > n)
                throw ParseError(line_no, "vertex index out of range");
            std::string extra;
            if (tokens >> extra && !warned_weights) {
                warn("DIMACS edge weights ignored (line " + std::to_string(line_no) + ")");
                warned_weights = true;
            }
            edges.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
        } else if (tag == "n") {
            if (!warned_nodes) {
                warn("DIMACS 'n' lines ignored (line " + std::to_string(line_no) + ")");
                warned_nodes = true;
            }
        } else {
            throw ParseError(line_no, "unrecognised line tag '" + tag + "'");
        }
    }
    if (n == 0) throw ParseError(0, "missing problem line");
    Graph g = Graph::from_edges(n, edges);
    if (declared_edges >= 0 && g.edge_count() != declared_edges)
        warn("DIMACS header declares " + std::to_string(declared_edges) +
             " edges, file contains " + std::to_string(g.edge_count()) +
             " distinct undirected edges");
    return g;
}

inline Graph parse_dimacs(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_dimacs(in);
}

inline Graph read_dimacs_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open " + path.string());
    return parse_dimacs(in);
}

inline void write_dimacs(const Graph& g, std::ostream& out) {
    const auto edges = g.edges();
    out << "p edge " << g.n_vertices() << ' ' << edges.size() << '\n';
    for (auto [i, j] : edges) out << "e " << i + 1 << ' ' << j + 1 << '\n';
}

// ---------------------------------------------------------------------------
// JSON: {"n": N, "edges": [[i, j], ...]} with 0-based indices, i < j.

inline nlohmann::json graph_to_json(const Graph& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (auto [i, j] : g.edges()) edges.push_back({i, j});
    return {{"n", g.n_vertices()}, {"edges", std::move(edges)}};
}

inline Graph graph_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("edges"))
        throw ArgumentError("graph JSON needs 'n' and 'edges'");
    const int n = doc.at("n").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : doc.at("edges")) {
        if (!e.is_array() || e.size() != 2)
            throw ArgumentError("each edge must be a pair [i, j]");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return Graph::from_edges(n, edges);
}

/// Load a graph by extension: `.json` is the JSON edge list, anything else
/// is read as DIMACS.
inline Graph load_graph(const std::filesystem::path& path) {
    if (path.extension() == ".json") {
        std::ifstream in(path);
        if (!in) throw ArgumentError("cannot open " + path.string());
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(0, e.what());
        }
        return graph_from_json(doc);
    }
    return read_dimacs_file(path);
}

} // namespace cliquedecomp
