#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "graph.hpp"
#include "prox.hpp"
#include "random.hpp"

namespace cliquedecomp {

/// Empirical admissible interval for alpha in lambda = alpha / sqrt(N).
inline constexpr double kAlphaLower = 0.0021;
inline constexpr double kAlphaUpper = 0.0914;

enum class Model { weighted, regular };
enum class InitMode { zeros, random_feasible };
enum class SolveStatus { converged, iteration_limit };

inline const char* to_string(Model m) { return m == Model::weighted ? "weighted" : "regular"; }
inline const char* to_string(InitMode m) {
    return m == InitMode::zeros ? "zeros" : "random_feasible";
}
inline const char* to_string(SolveStatus s) {
    return s == SolveStatus::converged ? "converged" : "iteration_limit";
}

struct SolverConfig {
    double alpha = 0.054;
    std::optional<double> lambda_override;
    std::optional<double> rho; // default 1 / mean(M)
    double epsilon = 0.05;
    int epoch_length = 1;
    double delta = 1e-4;
    int max_iterations = 5000;
    InitMode init_mode = InitMode::zeros;
    double init_zero_probability = 0.75; // random_feasible: P(S0_ij = 0)
    std::uint64_t init_seed = 0;
    Model model = Model::weighted;
    bool record_traces = true;

    void validate() const {
        if (lambda_override && !(*lambda_override > 0.0))
            throw ArgumentError("lambda must be positive");
        if (!lambda_override && !(alpha > 0.0)) throw ArgumentError("alpha must be positive");
        if (rho && !(*rho > 0.0)) throw ArgumentError("rho must be positive");
        if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
        if (epoch_length < 1) throw ArgumentError("epoch length must be positive");
        if (!(delta > 0.0)) throw ArgumentError("delta must be positive");
        if (max_iterations < 1) throw ArgumentError("max_iterations must be positive");
        if (!(init_zero_probability >= 0.0 && init_zero_probability <= 1.0))
            throw ArgumentError("init zero probability must lie in [0, 1]");
    }
};

/// Iterate state of the ADMM loop.
struct SolverState {
    Matrix L;
    Matrix S;
    Matrix mu;
    Matrix C;         // weights refreshed at the last epoch boundary
    Matrix C_applied; // weights used by the most recent S-step
    int iteration = 0; // J
    int epoch = 0;     // k
};

struct KktResiduals {
    double stationarity_L = 0.0;
    double stationarity_S = 0.0;
    double feasibility = 0.0;
};

struct SolveResult {
    Matrix L;
    Matrix S;
    Matrix mu;
    VertexSet clique;
    bool clique_valid = false;
    int iterations = 0;
    int epochs = 0;
    SolveStatus status = SolveStatus::iteration_limit;
    double lambda = 0.0;
    double rho = 0.0;
    std::vector<double> residual_trace;      // ||M - L - S||_F
    std::vector<double> objective_trace;     // ||L||_* + lambda ||C o S||_1
    std::vector<double> dual_residual_trace; // rho ||S_J - S_{J-1}||_F
    KktResiduals kkt;
    double s_min = 0.0; // extreme S entries seen over all iterations
    double s_max = 0.0;
    double wall_time = 0.0;

    double final_residual() const {
        return residual_trace.empty() ? std::nan("") : residual_trace.back();
    }
};

/// lambda = alpha / sqrt(N). Warns when alpha leaves the empirical interval.
inline double compute_lambda(int n_vertices, double alpha) {
    if (n_vertices < 2) throw ArgumentError("compute_lambda: N must be at least 2");
    if (!(alpha > 0.0)) throw ArgumentError("compute_lambda: alpha must be positive");
    if (!(alpha > kAlphaLower && alpha < kAlphaUpper))
        warn("alpha = " + std::to_string(alpha) + " lies outside (0.0021, 0.0914)");
    return alpha / std::sqrt(static_cast<double>(n_vertices));
}

/// C_ij = eps / (S_ij + eps)^2, the derivative of s / (s + eps).
inline Matrix update_weights(const Matrix& s, double epsilon) {
    if (!(epsilon > 0.0)) throw ArgumentError("update_weights: epsilon must be positive");
    require_finite(s, "update_weights");
    if ((s.array() == -epsilon).any())
        throw NumericalError("update_weights: S_ij = -epsilon makes the weight undefined");
    return s.unaryExpr([epsilon](double v) {
        const double d = v + epsilon;
        return epsilon / (d * d);
    });
}

inline double default_rho(const Graph& m) { return 1.0 / m.adjacency().mean(); }

namespace detail {

inline double distance_to_nuclear_subdifferential(const Matrix& L, const Matrix& mu,
                                                  double rank_tol) {
    // d(mu, d||L||_*) measured as ||P_R(mu) - U Vᵀ||_F + max(0, ||P_R⊥(mu)|| - 1).
    const SpectralDecomposition svd = symmetric_svd(L, rank_tol);
    const TangentSpace tangent(svd.u);
    const Matrix uvt = svd.u * svd.v.transpose();
    const double in_range = (tangent.project(mu) - uvt).norm();
    const double outside = spectral_norm(tangent.project_perp(mu));
    return in_range + std::max(0.0, outside - 1.0);
}

inline double distance_to_weighted_l1_subdifferential(const Matrix& S, const Matrix& C,
                                                      const Matrix& mu, double lambda,
                                                      double zero_tol) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < S.cols(); ++j) {
        for (Eigen::Index i = 0; i < S.rows(); ++i) {
            const double bound = lambda * C(i, j);
            double gap;
            if (std::abs(S(i, j)) <= zero_tol)
                gap = std::max(0.0, std::abs(mu(i, j)) - bound);
            else
                gap = mu(i, j) - bound * sign(S(i, j));
            sum += gap * gap;
        }
    }
    return std::sqrt(sum);
}

} // namespace detail

/// Residuals of the optimality system
///   mu in d||L||_*,  mu in lambda d||C o S||_1,  M - L - S = 0,
/// using the weights applied at the last S-step.
inline KktResiduals kkt_residuals(const SolverState& state, double lambda, const Graph& m,
                                  double rank_tol = 1e-6, double zero_tol = 1e-12) {
    KktResiduals out;
    out.feasibility = (m.adjacency() - state.L - state.S).norm();
    out.stationarity_L = detail::distance_to_nuclear_subdifferential(state.L, state.mu, rank_tol);
    const Matrix& c = state.C_applied.size() ? state.C_applied : state.C;
    out.stationarity_S =
        detail::distance_to_weighted_l1_subdifferential(state.S, c, state.mu, lambda, zero_tol);
    return out;
}

inline SolverState initial_state(const Graph& m, const SolverConfig& config) {
    const int n = m.n_vertices();
    SolverState st;
    st.mu = Matrix::Zero(n, n);
    if (config.init_mode == InitMode::zeros) {
        st.L = Matrix::Zero(n, n);
        st.S = Matrix::Zero(n, n);
    } else {
        // Feasible start: S is a symmetric 0/1 draw with P(0) = p_zero,
        // L = M - S.
        Xoshiro256 rng(config.init_seed);
        st.S = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                const bool one = !rng.bernoulli(config.init_zero_probability);
                if (one) {
                    st.S(i, j) = 1.0;
                    st.S(j, i) = 1.0;
                }
            }
        }
        st.L = m.adjacency() - st.S;
    }
    st.C = config.model == Model::weighted ? update_weights(st.S, config.epsilon)
                                           : Matrix::Ones(n, n);
    return st;
}

/// Low-rank plus sparse decomposition of the adjacency matrix by ADMM with
/// singular value thresholding for L and (re)weighted shrinkage for S:
///
///   L_J  = SVT_{1/rho}(M - S_{J-1} + mu_{J-1}/rho)
///   S_J  = STT_{lambda/rho}(C, M - L_J + mu_{J-1}/rho)   (ST for the regular model)
///   mu_J = mu_{J-1} + rho (M - L_J - S_J)
///
/// with C refreshed from S_J whenever J is a multiple of the epoch length.
/// Stops once ||M - L_J - S_J||_F <= delta.
inline SolveResult solve(const Graph& m, const SolverConfig& config) {
    config.validate();
    if (!m.has_self_loops())
        throw ArgumentError("solve: adjacency matrix must have a unit diagonal");
    const auto t0 = std::chrono::steady_clock::now();
    const int n = m.n_vertices();
    const Matrix& M = m.adjacency();

    SolveResult res;
    res.lambda = config.lambda_override ? *config.lambda_override
                                        : compute_lambda(std::max(n, 2), config.alpha);
    res.rho = config.rho ? *config.rho : default_rho(m);
    const double rho = res.rho;
    const double inv_rho = 1.0 / rho;
    const double shrink = res.lambda / rho;

    SolverState st = initial_state(m, config);
    res.s_min = st.S.minCoeff();
    res.s_max = st.S.maxCoeff();
    bool warned_range = false;
    if (config.record_traces) {
        res.residual_trace.reserve(static_cast<std::size_t>(std::min(config.max_iterations, 4096)));
        res.objective_trace.reserve(res.residual_trace.capacity());
        res.dual_residual_trace.reserve(res.residual_trace.capacity());
    }

    Matrix S_prev;
    double residual = (M - st.L - st.S).norm();
    for (int J = 1; J <= config.max_iterations; ++J) {
        S_prev = st.S;
        const SvtResult low = svt_with_spectrum(M - st.S + inv_rho * st.mu, inv_rho);
        st.L = low.value;
        const Matrix target = M - st.L + inv_rho * st.mu;
        if (config.model == Model::weighted) {
            st.S = weighted_soft_threshold(st.C, target, shrink);
            st.C_applied = st.C;
        } else {
            st.S = soft_threshold(target, shrink);
            st.C_applied = st.C;
        }
        const Matrix gap = M - st.L - st.S;
        st.mu += rho * gap;
        st.iteration = J;
        residual = gap.norm();

        if (!std::isfinite(residual) || !st.mu.allFinite())
            throw NumericalError("solve: non-finite iterate at iteration " + std::to_string(J));

        const double s_lo = st.S.minCoeff();
        const double s_hi = st.S.maxCoeff();
        res.s_min = std::min(res.s_min, s_lo);
        res.s_max = std::max(res.s_max, s_hi);
        if (!warned_range && (s_lo < -1e-6 || s_hi > 1.0 + 1e-6)) {
            warn("solve: S left [0, 1] at iteration " + std::to_string(J) +
                 " (min " + std::to_string(s_lo) + ", max " + std::to_string(s_hi) + ")");
            warned_range = true;
        }

        if (config.record_traces) {
            res.residual_trace.push_back(residual);
            res.objective_trace.push_back(low.nuclear_norm() +
                                          res.lambda * weighted_l1(st.C_applied, st.S));
            res.dual_residual_trace.push_back(rho * (st.S - S_prev).norm());
        }

        if (config.model == Model::weighted && J % config.epoch_length == 0) {
            st.C = update_weights(st.S, config.epsilon);
            ++st.epoch;
        }
        if (residual <= config.delta) {
            res.status = SolveStatus::converged;
            break;
        }
    }
    if (!config.record_traces) res.residual_trace.push_back(residual);

    res.iterations = st.iteration;
    res.epochs = st.epoch;
    res.kkt = kkt_residuals(st, res.lambda, m);
    res.L = std::move(st.L);
    res.S = std::move(st.S);
    res.mu = std::move(st.mu);
    for (int i = 0; i < n; ++i)
        if (res.L(i, i) >= 0.5) res.clique.push_back(i);
    res.clique_valid = m.is_clique(res.clique);
    res.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace cliquedecomp
