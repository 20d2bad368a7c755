#pragma once

// Conditioned linear quadrature dynamics of the readout cavities for one qubit
// eigenstate, with the integrated homodyne record M = sqrt(kappa) * int Y_out
// carried as an extra state coordinate.
//
// State ordering: [filter quadratures][cavity quadratures X1 Y1 (X2 Y2)][M].
// Input-output convention: da/dt = -i chi sigma_z a - kappa/2 a + sqrt(kappa) a_in,
// a_out = sqrt(kappa) a - a_in.

#include <algorithm>
#include <cmath>
#include <vector>

#include "qmfs/linalg.hpp"
#include "qmfs/model.hpp"
#include "qmfs/source.hpp"

namespace qmfs {

struct Layout {
    int filter_dim = 0;
    int cavity_dim = 2;

    int cavity_offset() const noexcept { return filter_dim; }
    int record_index() const noexcept { return filter_dim + cavity_dim; }
    /// Number of coordinates excluding the record.
    int field_size() const noexcept { return filter_dim + cavity_dim; }
    int size() const noexcept { return field_size() + 1; }
    int cavities() const noexcept { return cavity_dim / 2; }
    int x_index(int j) const noexcept { return cavity_offset() + 2 * j; }
    int y_index(int j) const noexcept { return cavity_offset() + 2 * j + 1; }
};

struct LinearSystem {
    Layout layout;
    double sigma_z = 1.0;
    /// Drift while squeezing is active.
    Mat drift;
    /// Drift before the squeezing turn-on (differs only in the filter block).
    Mat drift_idle;
    /// Maps white input quadratures into state derivatives.
    Mat input_coupling;
    /// Delta-normalised covariance of the white inputs while squeezing is on.
    Mat input_cov;
    Mat input_cov_idle;
    /// Deterministic coherent-drive term, active for t >= 0.
    Vec drive;
    /// sqrt(kappa_ref): scale of the record so that vacuum gives <M_N^2> = kappa_ref * tau.
    double record_gain = 1.0;
    double squeeze_on = kPresqueezed;

    Mat diffusion() const { return input_coupling * input_cov * input_coupling.transpose(); }
    Mat diffusion_idle() const { return input_coupling * input_cov_idle * input_coupling.transpose(); }

    /// Largest rate present in the drift; sets integration step sizes.
    double max_rate() const {
        const auto n = layout.field_size();
        return std::max(drift.topLeftCorner(n, n).cwiseAbs().rowwise().sum().maxCoeff(),
                        drift_idle.topLeftCorner(n, n).cwiseAbs().rowwise().sum().maxCoeff());
    }
};

struct GaussianState {
    Vec mean;
    Mat covariance;
    double time = 0.0;

    double record_mean() const { return mean(mean.size() - 1); }
    double record_variance() const { return covariance(covariance.rows() - 1, covariance.cols() - 1); }
};

/// Builds the linear system seen by the cavities when the qubit is in `state`.
/// Input-side loss, if configured, is folded in here; detection-side loss is
/// applied to the measurement statistics instead.
inline LinearSystem build_system(const ValidatedConfig& cfg, QubitState state) {
    const int nc = static_cast<int>(cfg.cavity_count());
    const double eta_in = cfg.loss().placement == LossPlacement::Input ? cfg.loss().eta : 1.0;
    const InputNoiseModel noise = apply_loss(from_source(cfg.source()), eta_in);
    const bool filtered = noise.filter_block.has_value();

    LinearSystem sys;
    sys.sigma_z = sigma_z(state);
    sys.layout.cavity_dim = 2 * nc;
    sys.layout.filter_dim = filtered ? 2 * nc : 0;
    sys.squeeze_on = noise.active_from;
    const Layout& L = sys.layout;
    const int n = L.size();
    const int nw = 2 * nc;
    // Filtered sources with loss need a second bank of vacuum inputs.
    const bool extra_vacuum = filtered && noise.transmission < 1.0;
    const int nin = extra_vacuum ? 2 * nw : nw;

    sys.drift = Mat::Zero(n, n);
    sys.input_coupling = Mat::Zero(n, nin);
    sys.drive = Vec::Zero(n);
    sys.record_gain = std::sqrt(cfg.kappa_ref());

    const double weight = nc == 1 ? 1.0 : 1.0 / std::sqrt(2.0);
    const double T = noise.transmission;
    const double sqT = std::sqrt(T);

    for (int j = 0; j < nc; ++j) {
        const auto& c = cfg.cavity(j);
        const int x = L.x_index(j);
        const int y = L.y_index(j);
        const double rot = c.chi * sys.sigma_z;
        sys.drift(x, x) = -0.5 * c.kappa;
        sys.drift(y, y) = -0.5 * c.kappa;
        sys.drift(x, y) = rot;
        sys.drift(y, x) = -rot;

        const double sk = std::sqrt(c.kappa);
        // Cavity input u_j = sqrt(T) (w + sqrt(gamma) f) + sqrt(1 - T) v.
        sys.input_coupling(x, 2 * j) = sk * sqT;
        sys.input_coupling(y, 2 * j + 1) = sk * sqT;
        // Record: dM/dt = g * weight * (sqrt(kappa_j) Y_j - u_{Y_j}).
        const int m = L.record_index();
        const double gw = sys.record_gain * weight;
        sys.drift(m, y) = gw * sk;
        sys.input_coupling(m, 2 * j + 1) = -gw * sqT;
        if (extra_vacuum) {
            const double sl = std::sqrt(1.0 - T);
            sys.input_coupling(x, nw + 2 * j) = sk * sl;
            sys.input_coupling(y, nw + 2 * j + 1) = sk * sl;
            sys.input_coupling(m, nw + 2 * j + 1) = -gw * sl;
        }
        if (filtered) {
            const double sg = std::sqrt(noise.filter_block->gamma);
            sys.drift(x, 2 * j) = sk * sqT * sg;
            sys.drift(y, 2 * j + 1) = sk * sqT * sg;
            sys.drift(m, 2 * j + 1) = -gw * sqT * sg;
        }

        // Coherent drive along X for one cavity, along X_- for two.
        const double x_in = nc == 1 ? std::sqrt(c.drive_flux * c.kappa)
                                    : (j == 0 ? 1.0 : -1.0) * std::sqrt(0.5 * c.drive_flux * cfg.kappa_bar());
        sys.drive(x) = sk * std::sqrt(eta_in) * x_in;
    }

    sys.drift_idle = sys.drift;
    if (filtered) {
        const auto& fb = *noise.filter_block;
        const double sg = std::sqrt(fb.gamma);
        sys.drift.topLeftCorner(nw, nw) = fb.drift;
        sys.drift_idle.topLeftCorner(nw, nw) = fb.drift_idle;
        sys.input_coupling.topLeftCorner(nw, nw) = -sg * Mat::Identity(nw, nw);
        sys.input_cov = Mat::Identity(nin, nin);
        sys.input_cov_idle = Mat::Identity(nin, nin);
    } else {
        sys.input_cov = noise.covariance_of_white_inputs;
        sys.input_cov_idle = Mat::Identity(nin, nin);
    }
    return sys;
}

/// Applies an orthogonal change of coordinates x' = P x to the whole system.
inline LinearSystem transformed(const LinearSystem& sys, const Mat& P) {
    LinearSystem out = sys;
    out.drift = P * sys.drift * P.transpose();
    out.drift_idle = P * sys.drift_idle * P.transpose();
    out.input_coupling = P * sys.input_coupling;
    out.drive = P * sys.drive;
    return out;
}

/// Full-state orthogonal matrix rotating every two-cavity quadrature block
/// (filter and cavities) into the (X_-, Y_+, X_+, Y_-) basis.
inline Mat joint_basis_transform(const Layout& L) {
    Mat P = Mat::Identity(L.size(), L.size());
    if (L.cavity_dim != 4) return P;
    const Mat T = joint_basis();
    if (L.filter_dim == 4) P.topLeftCorner(4, 4) = T;
    P.block(L.cavity_offset(), L.cavity_offset(), 4, 4) = T;
    return P;
}

/// Field covariance (record excluded) at t = 0: the squeezed steady state in
/// the presqueezed limit, otherwise vacuum evolved from the turn-on time.
inline Mat initial_field_covariance(const LinearSystem& sys) {
    const int n = sys.layout.field_size();
    const Mat A = sys.drift.topLeftCorner(n, n);
    const Mat Q = sys.diffusion().topLeftCorner(n, n);
    if (std::isinf(sys.squeeze_on)) return steady_state_covariance(A, Q);

    Mat C = Mat::Identity(n, n);
    const double span = -sys.squeeze_on;
    if (span <= 0.0) return C;
    const double h_max = 0.5 / std::max(sys.max_rate(), 1e-12);
    const int steps = std::max(1, static_cast<int>(std::ceil(span / h_max)));
    const auto step = discretize(A, Q, Vec::Zero(n), span / steps);
    for (int k = 0; k < steps; ++k) C = step.phi * C * step.phi.transpose() + step.noise;
    return 0.5 * (C + C.transpose());
}

inline GaussianState initial_state(const LinearSystem& sys) {
    const int n = sys.layout.size();
    const int nf = sys.layout.field_size();
    GaussianState s;
    s.mean = Vec::Zero(n);
    s.covariance = Mat::Zero(n, n);
    s.covariance.topLeftCorner(nf, nf) = initial_field_covariance(sys);
    return s;
}

/// Exact Gaussian propagation over [0, tau]. Returns the state at t = 0 and
/// at `samples` equally spaced times ending at tau.
inline std::vector<GaussianState> propagate(const LinearSystem& sys, double tau, int samples = 1) {
    samples = std::max(samples, 1);
    std::vector<GaussianState> out;
    out.reserve(samples + 1);
    GaussianState s = initial_state(sys);
    out.push_back(s);

    const double dt_sample = tau / samples;
    // Bounded steps keep the Van Loan exponential well conditioned.
    const double h_max = 0.5 / std::max(sys.max_rate(), 1e-12);
    const int sub = std::max(1, static_cast<int>(std::ceil(dt_sample / h_max)));
    const auto step = discretize(sys.drift, sys.diffusion(), sys.drive, dt_sample / sub);
    for (int k = 1; k <= samples; ++k) {
        for (int i = 0; i < sub; ++i) {
            s.mean = step.phi * s.mean + step.forced;
            s.covariance = step.phi * s.covariance * step.phi.transpose() + step.noise;
        }
        s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
        s.time = k * dt_sample;
        out.push_back(s);
    }
    return out;
}

inline GaussianState propagate_to(const LinearSystem& sys, double tau) { return propagate(sys, tau, 1).back(); }

/// Mean state at time t >= 0 starting from an empty cavity, drive switched on at t = 0.
inline Vec evolve_mean(const LinearSystem& sys, double t) {
    const int n = sys.layout.size();
    if (t <= 0.0) return Vec::Zero(n);
    const double h_max = 0.5 / std::max(sys.max_rate(), 1e-12);
    const int steps = std::max(1, static_cast<int>(std::ceil(t / h_max)));
    const auto step = discretize(sys.drift, Mat::Zero(n, n), sys.drive, t / steps);
    Vec m = Vec::Zero(n);
    for (int k = 0; k < steps; ++k) m = step.phi * m + step.forced;
    return m;
}

/// Stationary field mean -A^{-1} b (record excluded).
inline Vec steady_state_mean(const LinearSystem& sys) {
    const int n = sys.layout.field_size();
    const Mat A = sys.drift.topLeftCorner(n, n);
    if (!is_hurwitz(A)) throw SingularDrift("drift is not invertible: some cavity has no damping");
    return -A.partialPivLu().solve(sys.drive.head(n));
}

/// Default fixed step for the Runge-Kutta path.
inline double rk4_default_step(const LinearSystem& sys) {
    return 1.0 / (50.0 * std::max(sys.max_rate(), 1e-12));
}

/// Independent fourth-order Runge-Kutta integration of the mean and the
/// Lyapunov equation, split exactly at the squeezing turn-on and at t = 0.
/// Every integration is repeated at half step; StepSizeRejected is thrown if
/// the two disagree by more than `rel_tol`.
inline GaussianState propagate_rk4(const LinearSystem& sys, double tau, double h = 0.0, double rel_tol = 1e-8) {
    if (h <= 0.0) h = rk4_default_step(sys);
    const int n = sys.layout.size();
    const int nf = sys.layout.field_size();

    auto integrate = [&](double step) {
        GaussianState s;
        s.mean = Vec::Zero(n);
        s.covariance = Mat::Zero(n, n);
        const Mat A = sys.drift.topLeftCorner(nf, nf);
        const Mat Q = sys.diffusion().topLeftCorner(nf, nf);
        if (std::isinf(sys.squeeze_on)) {
            s.covariance.topLeftCorner(nf, nf) = steady_state_covariance(A, Q);
        } else {
            Mat C = Mat::Identity(nf, nf);
            const double span = -sys.squeeze_on;
            const int k = span > 0.0 ? std::max(1, static_cast<int>(std::ceil(span / step))) : 0;
            for (int i = 0; i < k; ++i) C = lyapunov_rk4_step(A, Q, C, span / k);
            s.covariance.topLeftCorner(nf, nf) = C;
        }
        const int k = std::max(1, static_cast<int>(std::ceil(tau / step)));
        const Mat D = sys.diffusion();
        for (int i = 0; i < k; ++i) {
            s.mean = mean_rk4_step(sys.drift, sys.drive, s.mean, tau / k);
            s.covariance = lyapunov_rk4_step(sys.drift, D, s.covariance, tau / k);
        }
        s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
        s.time = tau;
        return s;
    };

    GaussianState coarse = integrate(h);
    GaussianState fine = integrate(0.5 * h);
    const double scale = 1.0 + fine.covariance.cwiseAbs().maxCoeff() + fine.mean.cwiseAbs().maxCoeff();
    const double err = std::max((fine.covariance - coarse.covariance).cwiseAbs().maxCoeff(),
                                (fine.mean - coarse.mean).cwiseAbs().maxCoeff());
    if (err > rel_tol * scale)
        throw StepSizeRejected("Richardson check failed: step " + std::to_string(h) + " gives error "
                               + std::to_string(err));
    return fine;
}

/// Zero-frequency transfer from cavity input quadratures to output
/// quadratures, a_out(0) = H a_in(0). Two-cavity systems are expressed in the
/// joint basis (X_-, Y_+, X_+, Y_-) for both rows and columns.
inline Mat output_zero_frequency_transfer(const LinearSystem& sys) {
    const Layout& L = sys.layout;
    const int nc = L.cavity_dim;
    const Mat A = sys.drift.block(L.cavity_offset(), L.cavity_offset(), nc, nc);
    Vec sk(nc);
    for (int i = 0; i < nc; ++i) sk(i) = std::sqrt(-2.0 * A(i, i));
    const Mat K = sk.asDiagonal();
    Mat H = -K * A.partialPivLu().solve(K) - Mat::Identity(nc, nc);
    if (nc == 4) {
        const Mat T = joint_basis();
        H = T * H * T.transpose();
    }
    return H;
}

/// Magnitude of the coupling from the amplified inputs (X_+, Y_-) into the
/// measured output Y_+ at zero frequency.
inline double antisqueezed_leakage(const Mat& joint_transfer) {
    return std::hypot(joint_transfer(1, 2), joint_transfer(1, 3));
}

}  // namespace qmfs
