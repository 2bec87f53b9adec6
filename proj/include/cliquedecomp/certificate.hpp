#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "admm.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "prox.hpp"
#include "random.hpp"

namespace cliquedecomp {

struct CertificateConfig {
    std::optional<int> K;              // default 20 * ceil(ln N)
    std::optional<double> q;           // default solved from (1 - q)^K = p
    std::optional<int> neumann_terms;  // default K
    double gamma = 0.1;
    std::uint64_t seed = 0;
    int pq_trials = 3;
    int power_iterations = 300;
};

inline int default_golfing_rounds(int n_vertices) {
    if (n_vertices < 1) throw ArgumentError("golfing rounds: N must be positive");
    return 20 * static_cast<int>(std::ceil(std::log(static_cast<double>(n_vertices))));
}

/// q with (1 - q)^K = p. p = 0 (no sparse entries) gives q = 1.
inline double resolve_q(double p, int K) {
    if (K < 1) throw ArgumentError("resolve_q: K must be positive");
    if (!(p >= 0.0 && p < 1.0)) throw ArgumentError("resolve_q: p must lie in [0, 1)");
    if (p == 0.0) return 1.0;
    return -std::expm1(std::log(p) / K);
}

/// Fraction of entries of S* that are nonzero.
inline double sparsity_probability(const GroundTruthPair& truth) {
    const double total = static_cast<double>(truth.s_star.size());
    return static_cast<double>((truth.s_star.array() != 0.0).count()) / total;
}

namespace detail {

inline Matrix clique_projector(const GroundTruthPair& truth) {
    const Eigen::VectorXd u = truth.u();
    return u * u.transpose();
}

inline Matrix sign_matrix(const Matrix& x) { return x.unaryExpr([](double v) { return sign(v); }); }

/// Symmetric Bernoulli(q) subset of `allowed`: upper triangle with the
/// diagonal drawn in row-major order, then mirrored.
inline Mask sample_symmetric_subset(const Mask& allowed, double q, Xoshiro256& rng) {
    const Eigen::Index n = allowed.rows();
    Mask out = Mask::Constant(n, n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            if (!allowed(i, j)) continue;
            if (q >= 1.0 || rng.bernoulli(q)) {
                out(i, j) = true;
                out(j, i) = true;
            }
        }
    }
    return out;
}

} // namespace detail

struct GolfingResult {
    Matrix w_l;
    std::vector<double> residuals; // ||Y_k||_F for k = 0..K, Y_k = UUᵀ - P_R Q_k
    int K = 0;
    double q = 0.0;

    /// Non-increasing up to rounding noise of 1e-12 ||Y_0||_F.
    bool monotone() const {
        if (residuals.empty()) return true;
        const double floor = 1e-12 * residuals.front();
        for (std::size_t k = 1; k < residuals.size(); ++k)
            if (residuals[k] > residuals[k - 1] + floor) return false;
        return true;
    }
};

/// Golfing scheme
///   Q_k = Q_{k-1} + q^{-1} P_{Omega_k} P_R(UUᵀ - Q_{k-1}),  Q_0 = 0,
/// with Omega_k drawn from the complement of supp(S*); W^L = P_R⊥ Q_K.
inline GolfingResult golfing_wl(const GroundTruthPair& truth, const CertificateConfig& config) {
    const int n = truth.n_vertices();
    if (truth.clique_size() == 0) throw ArgumentError("golfing_wl: empty clique");
    GolfingResult out;
    out.K = config.K ? *config.K : default_golfing_rounds(n);
    if (out.K < 1) throw ArgumentError("golfing_wl: K must be positive");
    out.q = config.q ? *config.q : resolve_q(sparsity_probability(truth), out.K);
    if (!(out.q > 0.0 && out.q <= 1.0)) throw ArgumentError("golfing_wl: q must lie in (0, 1]");

    const Matrix uut = detail::clique_projector(truth);
    const TangentSpace tangent(truth.u());
    const Mask complement = truth.s_star.array() == 0.0;
    Xoshiro256 rng(config.seed);

    Matrix q_acc = Matrix::Zero(n, n);
    Matrix y = uut;
    out.residuals.reserve(static_cast<std::size_t>(out.K) + 1);
    out.residuals.push_back(y.norm());
    for (int k = 1; k <= out.K; ++k) {
        const Mask omega_k = detail::sample_symmetric_subset(complement, out.q, rng);
        q_acc += project_Omega(omega_k, y) / out.q;
        y = uut - tangent.project(q_acc);
        out.residuals.push_back(y.norm());
    }
    out.w_l = tangent.project_perp(q_acc);
    symmetrize_in_place(out.w_l);
    return out;
}

struct NeumannResult {
    Matrix w_s;
    std::vector<double> term_norms; // ||(P_Omega P_R P_Omega)^k sgn(S*)||_F
    double tail_ratio = 0.0;        // lambda ||last term||_F / ||W^S||_F
};

/// W^S = lambda P_R⊥ sum_{k=0}^{T} (P_Omega P_R P_Omega)^k sgn(C o S*).
inline NeumannResult neumann_ws(const GroundTruthPair& truth, const Matrix& c, double lambda,
                                const CertificateConfig& config) {
    const int n = truth.n_vertices();
    if (c.rows() != n || c.cols() != n) throw ArgumentError("neumann_ws: C shape mismatch");
    if (!(c.array() > 0.0).all()) throw ArgumentError("neumann_ws: C must be strictly positive");
    if (!(lambda > 0.0)) throw ArgumentError("neumann_ws: lambda must be positive");
    const int terms = config.neumann_terms ? *config.neumann_terms
                                           : (config.K ? *config.K : default_golfing_rounds(n));
    if (terms < 0) throw ArgumentError("neumann_ws: term count must be nonnegative");

    // C > 0 entrywise, so sgn(C o S*) = sgn(S*).
    const Mask omega = truth.support();
    const TangentSpace tangent(truth.u());
    Matrix term = detail::sign_matrix(truth.s_star);
    Matrix sum = term;
    NeumannResult out;
    out.term_norms.push_back(term.norm());
    int rising = 0;
    for (int k = 1; k <= terms; ++k) {
        term = project_Omega(omega, tangent.project(term));
        sum += term;
        const double norm = term.norm();
        if (norm > 0.0 && norm >= out.term_norms.back()) {
            if (++rising >= 3)
                throw NumericalError("neumann_ws: series diverges at term " + std::to_string(k));
        } else {
            rising = 0;
        }
        out.term_norms.push_back(norm);
    }
    out.w_s = lambda * tangent.project_perp(sum);
    symmetrize_in_place(out.w_s);
    const double ws_norm = out.w_s.norm();
    out.tail_ratio = ws_norm > 0.0 ? lambda * out.term_norms.back() / ws_norm : 0.0;
    return out;
}

/// Power-iteration estimate of ||P_Omega P_R|| as sqrt of the top eigenvalue
/// of P_R P_Omega P_R, maximised over Gaussian random starts.
inline double estimate_pq_norm(const GroundTruthPair& truth, int trials, std::uint64_t seed,
                               int iterations = 300) {
    if (trials < 1) throw ArgumentError("estimate_pq_norm: trials must be positive");
    if (iterations < 1) throw ArgumentError("estimate_pq_norm: iterations must be positive");
    const int n = truth.n_vertices();
    const Mask omega = truth.support();
    if (!omega.any() || truth.clique_size() == 0) return 0.0;
    const TangentSpace tangent(truth.u());
    Xoshiro256 rng(seed);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        Matrix x(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.normal();
        x /= x.norm();
        double eig = 0.0;
        for (int it = 0; it < iterations; ++it) {
            Matrix y = tangent.project(project_Omega(omega, tangent.project(x)));
            const double next = y.norm();
            if (next == 0.0) {
                eig = 0.0;
                break;
            }
            x = y / next;
            const bool settled = std::abs(next - eig) <= 1e-13 * next;
            eig = next;
            if (settled) break;
        }
        best = std::max(best, std::sqrt(eig));
    }
    return best;
}

struct CertificateCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool strict = false; // value < threshold rather than <=
    bool pass = false;
};

struct CertificateReport {
    Matrix w_l;
    Matrix w_s;
    std::vector<CertificateCheck> checks;
    bool overall_pass = false;

    double alpha = 0.0;
    double lambda = 0.0;
    int K = 0;
    double q = 0.0;
    double sparsity = 0.0;
    std::vector<double> golfing_residuals;
    bool golfing_monotone = false;
    double neumann_tail_ratio = 0.0;
    double pq_norm = 0.0;
    double wl_range_leak = 0.0; // ||P_R W^L||_F / ||W^L||_F
    double ws_range_leak = 0.0;

    // Informational quantities.
    double sign_norm_ratio = 0.0;   // ||sgn(S*)|| / sqrt(N p)
    double f_inf = 0.0;             // ||P_Omega⊥(UUᵀ + W) / lambda||_inf
    double p_omega_b_fro = 0.0;     // ||P_Omega (UUᵀ + W^L) / lambda||_F
    double clique_block_bound = 0.0; // 1/n <= ||P_Omega⊥(UUᵀ + W)||_inf for any W in R⊥

    const CertificateCheck& check(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return c;
        throw ArgumentError("unknown certificate check: " + name);
    }
};

namespace detail {

inline CertificateCheck make_check(std::string name, double value, double threshold, bool strict) {
    CertificateCheck c{std::move(name), value, threshold, strict, false};
    c.pass = strict ? value < threshold : value <= threshold;
    return c;
}

inline double relative_leak(const TangentSpace& tangent, const Matrix& w) {
    const double norm = w.norm();
    return norm > 0.0 ? tangent.project(w).norm() / norm : 0.0;
}

} // namespace detail

/// Build W = W^L + W^S and evaluate the optimality conditions. overall_pass
/// is the conjunction of the first three checks.
inline CertificateReport certify(const GroundTruthPair& truth, const Matrix& c, double alpha,
                                 const CertificateConfig& config) {
    if (!(alpha > 0.0)) throw ArgumentError("certify: alpha must be positive");
    const int n = truth.n_vertices();
    CertificateReport r;
    r.alpha = alpha;
    r.lambda = compute_lambda(std::max(n, 2), alpha);
    r.sparsity = sparsity_probability(truth);

    GolfingResult golf = golfing_wl(truth, config);
    r.K = golf.K;
    r.q = golf.q;
    r.golfing_monotone = golf.monotone();
    r.golfing_residuals = std::move(golf.residuals);
    r.w_l = std::move(golf.w_l);

    NeumannResult neu = neumann_ws(truth, c, r.lambda, config);
    r.w_s = std::move(neu.w_s);
    r.neumann_tail_ratio = neu.tail_ratio;
    r.pq_norm = estimate_pq_norm(truth, config.pq_trials, config.seed + 1, config.power_iterations);

    const TangentSpace tangent(truth.u());
    r.wl_range_leak = detail::relative_leak(tangent, r.w_l);
    r.ws_range_leak = detail::relative_leak(tangent, r.w_s);

    const Mask omega = truth.support();
    const Matrix uut = detail::clique_projector(truth);
    const Matrix w = r.w_l + r.w_s;
    const Matrix base = uut + r.w_l;
    const auto linf = [](const Matrix& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; };

    r.checks.push_back(detail::make_check("norm_w", spectral_norm(w), alpha / 2, false));
    r.checks.push_back(detail::make_check("omega_uu_wl_fro", project_Omega(omega, base).norm(),
                                          r.lambda / 4, false));
    r.checks.push_back(detail::make_check("omega_perp_uu_w_inf",
                                          linf(project_Omega_perp(omega, uut + w)), r.lambda / 2,
                                          false));
    r.checks.push_back(detail::make_check("norm_wl", spectral_norm(r.w_l), alpha / 4, true));
    r.checks.push_back(detail::make_check("omega_perp_uu_wl_inf",
                                          linf(project_Omega_perp(omega, base)), r.lambda / 4,
                                          true));
    r.checks.push_back(detail::make_check("norm_ws", spectral_norm(r.w_s), alpha / 4, true));
    r.checks.push_back(detail::make_check("omega_perp_ws_inf",
                                          linf(project_Omega_perp(omega, r.w_s)), r.lambda / 4,
                                          true));
    r.checks.push_back(detail::make_check("pq_norm", r.pq_norm, config.gamma, false));
    r.overall_pass = r.checks[0].pass && r.checks[1].pass && r.checks[2].pass;

    const double np = n * r.sparsity;
    r.sign_norm_ratio =
        np > 0.0 ? spectral_norm(detail::sign_matrix(truth.s_star)) / std::sqrt(np) : 0.0;
    r.f_inf = linf(project_Omega_perp(omega, uut + w)) / r.lambda;
    r.p_omega_b_fro = project_Omega(omega, base).norm() / r.lambda;
    r.clique_block_bound = 1.0 / truth.clique_size();
    return r;
}

inline nlohmann::json to_json(const CertificateCheck& c) {
    return {{"name", c.name},
            {"value", c.value},
            {"threshold", c.threshold},
            {"strict", c.strict},
            {"pass", c.pass}};
}

inline nlohmann::json to_json(const CertificateReport& r, bool include_matrices = false) {
    nlohmann::json j;
    j["overall_pass"] = r.overall_pass;
    j["alpha"] = r.alpha;
    j["lambda"] = r.lambda;
    j["K"] = r.K;
    j["q"] = r.q;
    j["sparsity"] = r.sparsity;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    j["checks"] = std::move(checks);
    j["golfing_residuals"] = r.golfing_residuals;
    j["golfing_monotone"] = r.golfing_monotone;
    j["neumann_tail_ratio"] = r.neumann_tail_ratio;
    j["pq_norm"] = r.pq_norm;
    j["wl_range_leak"] = r.wl_range_leak;
    j["ws_range_leak"] = r.ws_range_leak;
    j["sign_norm_ratio"] = r.sign_norm_ratio;
    j["f_inf"] = r.f_inf;
    j["p_omega_b_fro"] = r.p_omega_b_fro;
    j["clique_block_bound"] = r.clique_block_bound;
    if (include_matrices) {
        const auto rows = [](const Matrix& m) {
            std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index k = 0; k < m.cols(); ++k)
                    out[static_cast<std::size_t>(i)].push_back(m(i, k));
            return out;
        };
        j["w_l"] = rows(r.w_l);
        j["w_s"] = rows(r.w_s);
    }
    return j;
}

} // namespace cliquedecomp
