#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "errors.hpp"
#include "graph.hpp"
#include "prox.hpp"

namespace cliquedecomp {

/// Threshold on err_l below which a planted clique counts as recovered.
inline constexpr double kRecoveryThreshold = 1e-8;

/// ||L - L*||_F / ||L*||_F.
inline double relative_error(const Matrix& l, const Matrix& l_star) {
    if (l.rows() != l_star.rows() || l.cols() != l_star.cols())
        throw ArgumentError("relative_error: shape mismatch");
    const double denom = l_star.norm();
    if (!(denom > 0.0)) throw ArgumentError("relative_error: ground truth is zero");
    return (l - l_star).norm() / denom;
}

/// sqrt(sum_ij L_ij), the node count read off a near 0/1 rank-one L.
inline double observed_clique_size(const Matrix& l) {
    const double total = l.sum();
    if (total < 0.0) throw NumericalError("observed_clique_size: entries sum to a negative value");
    return std::sqrt(total);
}

/// | sqrt(sum_ij L_ij) - ||L|| | with ||L|| the spectral norm.
inline double clique_size_error(const Matrix& l) {
    if (l.size() > 0 && l.minCoeff() < -1e-6)
        warn("clique_size_error: L has entries below -1e-6");
    return std::abs(observed_clique_size(l) - spectral_norm(l));
}

struct ExtractedClique {
    VertexSet vertices;
    bool valid = true;
};

/// Vertices whose diagonal entry of L is at least 0.5, and whether they
/// induce a complete subgraph of M.
inline ExtractedClique extract_clique(const Matrix& l, const Graph& m) {
    if (l.rows() != m.n_vertices() || l.cols() != m.n_vertices())
        throw ArgumentError("extract_clique: shape mismatch");
    ExtractedClique out;
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        if (l(i, i) >= 0.5) out.vertices.push_back(static_cast<int>(i));
    out.valid = m.is_clique(out.vertices);
    return out;
}

/// Largest complete subset found by repeatedly dropping the vertex with the
/// most non-neighbours inside the set (ties: highest index).
inline VertexSet prune_to_clique(const Graph& m, VertexSet vertices) {
    for (;;) {
        int worst = -1;
        int worst_missing = 0;
        for (std::size_t a = 0; a < vertices.size(); ++a) {
            int missing = 0;
            for (std::size_t b = 0; b < vertices.size(); ++b)
                if (a != b && !m.adjacent(vertices[a], vertices[b])) ++missing;
            if (missing > 0 && missing >= worst_missing) {
                worst_missing = missing;
                worst = static_cast<int>(a);
            }
        }
        if (worst < 0) return vertices;
        vertices.erase(vertices.begin() + worst);
    }
}

struct IncoherenceResult {
    bool mu0_bound_ok = false;
    bool joint_bound_ok = false;
    double lhs = 0.0;   // 1/n, equal to max_i ||Uᵀe_i||² and to ||UUᵀ||_inf
    double bound = 0.0; // mu0 r / N
};

/// Incoherence of the clique indicator: 1/n <= mu0 r / N for both the
/// row-space and the joint condition (identical for a rank-one indicator).
inline IncoherenceResult incoherence_check(const GroundTruthPair& truth, double mu0) {
    if (truth.clique_size() == 0) throw ArgumentError("incoherence_check: L* must have rank one");
    const int n_vertices = truth.n_vertices();
    const int r = 1;
    if (!(mu0 >= 1.0 && mu0 <= static_cast<double>(n_vertices) / r))
        throw ArgumentError("incoherence_check: mu0 must lie in [1, N/r]");
    const Eigen::VectorXd u = truth.u();
    IncoherenceResult out;
    const double row_coherence = u.cwiseAbs2().maxCoeff();
    const double joint = (u * u.transpose()).cwiseAbs().maxCoeff();
    out.lhs = row_coherence;
    out.bound = mu0 * r / n_vertices;
    // Compare with a relative slack so the equality case 1/N <= 1/N holds.
    const double slack = 1e-12 * out.bound;
    out.mu0_bound_ok = row_coherence <= out.bound + slack;
    out.joint_bound_ok = joint <= out.bound + slack;
    return out;
}

/// max over column pairs of |Var(S_:i) - Var(S_:j)| with population variance.
inline double variance_spread(const Matrix& s) {
    if (s.cols() == 0) return 0.0;
    if (s.size() > 0 && (s.minCoeff() < -1e-9 || s.maxCoeff() > 1.0 + 1e-9))
        warn("variance_spread: S has entries outside [0, 1]");
    const Eigen::RowVectorXd mean = s.colwise().mean();
    const Eigen::RowVectorXd var =
        (s.rowwise() - mean).cwiseAbs2().colwise().sum() / static_cast<double>(s.rows());
    return var.maxCoeff() - var.minCoeff();
}

struct RecoveryReport {
    std::optional<double> err_l; // absent without ground truth
    double clique_size_error = 0.0;
    double observed_size = 0.0;
    double spectral_norm = 0.0;
    VertexSet clique;
    bool clique_valid = true;
    std::size_t strict_size = 0; // size after pruning to a complete subgraph
    std::optional<IncoherenceResult> incoherence;
    double variance_spread = 0.0;

    bool recovered() const { return err_l && *err_l < kRecoveryThreshold; }
};

inline RecoveryReport make_report(const Matrix& l, const Matrix& s, const Graph& m,
                                  const GroundTruthPair* truth = nullptr,
                                  std::optional<double> mu0 = std::nullopt) {
    RecoveryReport r;
    r.observed_size = observed_clique_size(l.cwiseMax(0.0));
    r.spectral_norm = cliquedecomp::spectral_norm(l);
    r.clique_size_error = std::abs(std::sqrt(std::max(l.sum(), 0.0)) - r.spectral_norm);
    auto ex = extract_clique(l, m);
    r.clique = ex.vertices;
    r.clique_valid = ex.valid;
    r.strict_size = ex.valid ? ex.vertices.size() : prune_to_clique(m, ex.vertices).size();
    r.variance_spread = variance_spread(s);
    if (truth) {
        r.err_l = relative_error(l, truth->l_star);
        if (mu0 && truth->clique_size() > 0) r.incoherence = incoherence_check(*truth, *mu0);
    }
    return r;
}

inline nlohmann::json to_json(const IncoherenceResult& r) {
    return {{"mu0_bound_ok", r.mu0_bound_ok},
            {"joint_bound_ok", r.joint_bound_ok},
            {"coherence", r.lhs},
            {"bound", r.bound}};
}

inline nlohmann::json to_json(const RecoveryReport& r) {
    nlohmann::json j;
    j["err_l"] = r.err_l ? nlohmann::json(*r.err_l) : nlohmann::json(nullptr);
    j["recovered"] = r.recovered();
    j["clique_size_error"] = r.clique_size_error;
    j["observed_size"] = r.observed_size;
    j["spectral_norm"] = r.spectral_norm;
    j["clique"] = r.clique;
    j["clique_valid"] = r.clique_valid;
    j["strict_size"] = r.strict_size;
    j["incoherence"] = r.incoherence ? to_json(*r.incoherence) : nlohmann::json(nullptr);
    j["variance_spread"] = r.variance_spread;
    return j;
}

} // namespace cliquedecomp
