#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "graph.hpp"

namespace cliquedecomp {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kSymmetryTolerance = 1e-10;
inline constexpr double kOrthonormalityTolerance = 1e-8;

inline bool all_finite(const Matrix& x) { return x.allFinite(); }

inline void require_finite(const Matrix& x, const char* what) {
    if (!x.allFinite())
        throw ArgumentError(std::string(what) + ": matrix has non-finite entries");
}

/// max |X - Xᵀ| relative to max(1, max |X|).
inline bool is_symmetric(const Matrix& x, double tol = kSymmetryTolerance) {
    if (x.rows() != x.cols()) return false;
    if (x.size() == 0) return true;
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    return (x - x.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline void require_symmetric(const Matrix& x, const char* what) {
    if (!is_symmetric(x))
        throw ArgumentError(std::string(what) + ": input is not symmetric");
}

inline void symmetrize_in_place(Matrix& x) {
    x = 0.5 * (x + x.transpose()).eval();
}

/// sgn with sgn(0) = 0.
inline double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

// ---------------------------------------------------------------------------
// Spectral machinery

/// X = u diag(sigma) vᵀ with sigma nonincreasing and nonnegative.
struct SpectralDecomposition {
    Matrix u;
    Eigen::VectorXd sigma;
    Matrix v;

    int rank() const { return static_cast<int>(sigma.size()); }
    Matrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

/// Singular value decomposition of a symmetric matrix through its
/// eigendecomposition: sigma_i = |lambda_i| and v_i = sign(lambda_i) u_i.
/// Components with |lambda| <= rank_tol * max|lambda| are dropped.
inline SpectralDecomposition symmetric_svd(const Matrix& x, double rank_tol = 1e-12) {
    require_finite(x, "symmetric_svd");
    require_symmetric(x, "symmetric_svd");
    const Eigen::Index n = x.rows();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(x);
    if (eig.info() != Eigen::Success)
        throw NumericalError("symmetric eigendecomposition did not converge");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(lambda(a)) > std::abs(lambda(b));
    });
    const double top = n > 0 ? std::abs(lambda(order.front())) : 0.0;
    Eigen::Index r = 0;
    while (r < n && top > 0.0 && std::abs(lambda(order[r])) > rank_tol * top) ++r;

    SpectralDecomposition out{Matrix(n, r), Eigen::VectorXd(r), Matrix(n, r)};
    for (Eigen::Index k = 0; k < r; ++k) {
        const Eigen::Index idx = order[k];
        out.u.col(k) = eig.eigenvectors().col(idx);
        out.sigma(k) = std::abs(lambda(idx));
        out.v.col(k) = sign(lambda(idx)) * out.u.col(k);
    }
    return out;
}

struct SvtResult {
    Matrix value;
    /// Shrunk eigenvalues sign(l)*max(|l| - tau, 0) of the nonzero part.
    Eigen::VectorXd shrunk_eigenvalues;
    Matrix eigenvectors; // columns matching shrunk_eigenvalues

    double nuclear_norm() const { return shrunk_eigenvalues.cwiseAbs().sum(); }
};

/// Singular value thresholding for symmetric input, with the spectrum of the
/// result. The output is re-symmetrized.
inline SvtResult svt_with_spectrum(const Matrix& x, double tau) {
    if (!(tau > 0.0)) throw ArgumentError("svt: tau must be positive");
    require_finite(x, "svt");
    require_symmetric(x, "svt");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(x);
    if (eig.info() != Eigen::Success)
        throw NumericalError("svt: eigendecomposition did not converge");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (std::abs(lambda(i)) > tau) kept.push_back(i);

    SvtResult out;
    const auto r = static_cast<Eigen::Index>(kept.size());
    out.eigenvectors.resize(x.rows(), r);
    out.shrunk_eigenvalues.resize(r);
    for (Eigen::Index k = 0; k < r; ++k) {
        const double l = lambda(kept[static_cast<std::size_t>(k)]);
        out.shrunk_eigenvalues(k) = sign(l) * (std::abs(l) - tau);
        out.eigenvectors.col(k) = eig.eigenvectors().col(kept[static_cast<std::size_t>(k)]);
    }
    if (r == 0) {
        out.value = Matrix::Zero(x.rows(), x.cols());
    } else {
        out.value = out.eigenvectors * out.shrunk_eigenvalues.asDiagonal() *
                    out.eigenvectors.transpose();
        symmetrize_in_place(out.value);
    }
    return out;
}

/// argmin_Y tau ||Y||_* + 1/2 ||Y - X||_F^2 for symmetric X.
inline Matrix svt(const Matrix& x, double tau) { return svt_with_spectrum(x, tau).value; }

/// Entrywise sgn(x) max(|x| - tau, 0).
inline Matrix soft_threshold(const Matrix& x, double tau) {
    if (!(tau > 0.0)) throw ArgumentError("soft_threshold: tau must be positive");
    require_finite(x, "soft_threshold");
    return x.unaryExpr([tau](double v) { return sign(v) * std::max(std::abs(v) - tau, 0.0); });
}

/// Entrywise sgn(x) max(|x| - tau c, 0): the prox of tau ||C o Y||_1.
inline Matrix weighted_soft_threshold(const Matrix& c, const Matrix& x, double tau) {
    if (!(tau > 0.0)) throw ArgumentError("weighted_soft_threshold: tau must be positive");
    if (c.rows() != x.rows() || c.cols() != x.cols())
        throw ArgumentError("weighted_soft_threshold: shape mismatch");
    require_finite(x, "weighted_soft_threshold");
    if (!(c.array() > 0.0).all() || !c.allFinite())
        throw ArgumentError("weighted_soft_threshold: weights must be positive and finite");
    return x.binaryExpr(c, [tau](double v, double w) {
        return sign(v) * std::max(std::abs(v) - tau * w, 0.0);
    });
}

// ---------------------------------------------------------------------------
// Projections

/// Orthogonal projection onto the tangent space
/// R = { U Xᵀ + Y Uᵀ } of a matrix with orthonormal column basis U.
class TangentSpace {
public:
    explicit TangentSpace(Matrix u) : u_(std::move(u)) {
        require_finite(u_, "TangentSpace");
        const Matrix gram = u_.transpose() * u_;
        if (gram.size() > 0 &&
            (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() >
                kOrthonormalityTolerance)
            throw ArgumentError("TangentSpace: U must have orthonormal columns");
    }

    const Matrix& basis() const { return u_; }

    /// UUᵀX + XUUᵀ - UUᵀXUUᵀ, evaluated in O(N² r).
    Matrix project(const Matrix& x) const {
        check_shape(x);
        if (u_.cols() == 0) return Matrix::Zero(x.rows(), x.cols());
        const Matrix utx = u_.transpose() * x;     // r x N
        const Matrix xu = x * u_;                  // N x r
        const Matrix utxu = u_.transpose() * xu;   // r x r
        return u_ * utx + xu * u_.transpose() - u_ * (utxu * u_.transpose());
    }

    /// (I - UUᵀ) X (I - UUᵀ).
    Matrix project_perp(const Matrix& x) const { return x - project(x); }

private:
    void check_shape(const Matrix& x) const {
        if (x.rows() != u_.rows() || x.cols() != u_.rows())
            throw ArgumentError("TangentSpace: matrix shape does not match U");
    }

    Matrix u_;
};

inline Matrix project_R(const Matrix& u, const Matrix& x) { return TangentSpace(u).project(x); }
inline Matrix project_R_perp(const Matrix& u, const Matrix& x) {
    return TangentSpace(u).project_perp(x);
}

inline Matrix project_Omega(const Mask& mask, const Matrix& x) {
    if (mask.rows() != x.rows() || mask.cols() != x.cols())
        throw ArgumentError("project_Omega: shape mismatch");
    return mask.select(x, Matrix::Zero(x.rows(), x.cols()));
}

inline Matrix project_Omega_perp(const Mask& mask, const Matrix& x) {
    if (mask.rows() != x.rows() || mask.cols() != x.cols())
        throw ArgumentError("project_Omega_perp: shape mismatch");
    return mask.select(Matrix::Zero(x.rows(), x.cols()), x);
}

// ---------------------------------------------------------------------------
// Norms

inline Eigen::VectorXd singular_values(const Matrix& x) {
    require_finite(x, "singular_values");
    if (x.size() == 0) return {};
    if (x.rows() == x.cols() && x == x.transpose()) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(x, Eigen::EigenvaluesOnly);
        Eigen::VectorXd s = eig.eigenvalues().cwiseAbs();
        std::sort(s.data(), s.data() + s.size(), std::greater<>());
        return s;
    }
    Eigen::BDCSVD<Matrix> svd(x);
    return svd.singularValues();
}

inline double spectral_norm(const Matrix& x) {
    const Eigen::VectorXd s = singular_values(x);
    return s.size() ? s(0) : 0.0;
}

inline double nuclear_norm(const Matrix& x) { return singular_values(x).sum(); }

inline double weighted_l1(const Matrix& c, const Matrix& x) {
    if (c.rows() != x.rows() || c.cols() != x.cols())
        throw ArgumentError("weighted_l1: shape mismatch");
    return (c.array() * x.array()).abs().sum();
}

struct MatrixNorms {
    double frobenius;
    double nuclear;
    double spectral;
    double l1;   // sum of |x_ij|
    double linf; // max |x_ij|
};

inline MatrixNorms norms(const Matrix& x) {
    const Eigen::VectorXd s = singular_values(x);
    return {x.norm(), s.sum(), s.size() ? s(0) : 0.0, x.cwiseAbs().sum(),
            x.size() ? x.cwiseAbs().maxCoeff() : 0.0};
}

} // namespace cliquedecomp
