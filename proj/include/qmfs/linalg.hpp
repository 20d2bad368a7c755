#pragma once

// Small dense linear-algebra helpers for linear stochastic systems
//   dx = (A x + b) dt + dW,   E[dW dW^T] = Q dt.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "qmfs/error.hpp"

namespace qmfs {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Exact one-step map x -> phi x + forced + xi, xi ~ N(0, noise).
struct DiscreteTransition {
    Mat phi;
    Mat noise;
    Vec forced;
};

/// Van Loan block-exponential discretisation over a step h.
inline DiscreteTransition discretize(const Mat& A, const Mat& Q, const Vec& b, double h) {
    const auto n = A.rows();
    Mat vl = Mat::Zero(2 * n, 2 * n);
    vl.topLeftCorner(n, n) = -A * h;
    vl.topRightCorner(n, n) = Q * h;
    vl.bottomRightCorner(n, n) = A.transpose() * h;
    const Mat e = vl.exp();

    DiscreteTransition out;
    out.phi = e.bottomRightCorner(n, n).transpose();
    out.noise = out.phi * e.topRightCorner(n, n);
    out.noise = 0.5 * (out.noise + out.noise.transpose()).eval();

    Mat aug = Mat::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = A * h;
    aug.topRightCorner(n, 1) = b * h;
    out.forced = aug.exp().topRightCorner(n, 1);
    return out;
}

inline bool is_hurwitz(const Mat& A) {
    const Eigen::VectorXcd ev = A.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (!(ev[i].real() < 0.0)) return false;
    return true;
}

/// Solves A C + C A^T + Q = 0 for the stationary covariance.
inline Mat steady_state_covariance(const Mat& A, const Mat& Q) {
    if (!is_hurwitz(A)) throw SingularDrift("drift has eigenvalues with non-negative real part");
    const auto n = A.rows();
    const Mat I = Mat::Identity(n, n);
    Mat K = Mat::Zero(n * n, n * n);
    // Column-major vec: vec(A C) = (I kron A) vec(C), vec(C A^T) = (A kron I) vec(C).
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            K.block(i * n, j * n, n, n) += I(i, j) * A;
            K.block(i * n, j * n, n, n) += A(i, j) * I;
        }
    const Vec q = Eigen::Map<const Vec>(Q.data(), n * n);
    const Vec c = K.partialPivLu().solve(-q);
    Mat C = Eigen::Map<const Mat>(c.data(), n, n);
    return 0.5 * (C + C.transpose());
}

inline Mat lyapunov_rhs(const Mat& A, const Mat& Q, const Mat& C) {
    return A * C + C * A.transpose() + Q;
}

/// Classical fourth-order Runge-Kutta step for the Lyapunov flow.
inline Mat lyapunov_rk4_step(const Mat& A, const Mat& Q, const Mat& C, double h) {
    const Mat k1 = lyapunov_rhs(A, Q, C);
    const Mat k2 = lyapunov_rhs(A, Q, C + 0.5 * h * k1);
    const Mat k3 = lyapunov_rhs(A, Q, C + 0.5 * h * k2);
    const Mat k4 = lyapunov_rhs(A, Q, C + h * k3);
    return C + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Vec mean_rk4_step(const Mat& A, const Vec& b, const Vec& m, double h) {
    const Vec k1 = A * m + b;
    const Vec k2 = A * (m + 0.5 * h * k1) + b;
    const Vec k3 = A * (m + 0.5 * h * k2) + b;
    const Vec k4 = A * (m + h * k3) + b;
    return m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Symmetric square root of a positive semidefinite matrix; tiny negative
/// eigenvalues from round-off are clipped to zero.
inline Mat psd_sqrt(const Mat& C) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (C + C.transpose()));
    Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace qmfs
