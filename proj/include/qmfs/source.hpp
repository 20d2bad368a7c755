#pragma once

// Input-field noise models: broadband and Lorentzian-filtered squeezing, and
// the beamsplitter loss channel.

#include <cmath>
#include <complex>
#include <optional>

#include "qmfs/linalg.hpp"
#include "qmfs/model.hpp"

namespace qmfs {

/// Orthogonal map from local quadratures (X1, Y1, X2, Y2) to the joint
/// basis (X_-, Y_+, X_+, Y_-). The first two commute and form the QMFS.
inline Mat joint_basis() {
    const double s = 1.0 / std::sqrt(2.0);
    Mat T(4, 4);
    T << s, 0, -s, 0,
         0, s, 0, s,
         s, 0, s, 0,
         0, s, 0, -s;
    return T;
}

/// Degenerate (or non-degenerate) parametric filter cavity below threshold.
/// Its state f obeys df/dt = drift f - sqrt(gamma) w and it emits
/// w + sqrt(gamma) f.
struct FilterBlock {
    Mat drift;
    /// Drift before the squeezing pump turns on (passive cavity).
    Mat drift_idle;
    double gamma = 0.0;
};

struct InputNoiseModel {
    ModeKind mode = ModeKind::SingleMode;
    /// Covariance of the delta-correlated inputs in local quadratures. For a
    /// filtered source this is the vacuum feeding the filter.
    Mat covariance_of_white_inputs;
    std::optional<FilterBlock> filter_block;
    double active_from = kPresqueezed;
    /// Power transmission between source and cavities. Broadband models fold
    /// loss into the covariance and keep this at 1.
    double transmission = 1.0;

    Eigen::Index dim() const { return covariance_of_white_inputs.rows(); }

    /// Transfer from the filter's vacuum input to the emitted field.
    Eigen::MatrixXcd transfer(double omega) const {
        const auto n = dim();
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Identity(n, n);
        if (filter_block) {
            const auto& fb = *filter_block;
            Eigen::MatrixXcd m = std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(n, n)
                                 - fb.drift.cast<std::complex<double>>();
            H -= fb.gamma * m.inverse();
        }
        return H;
    }

    /// Symmetrised noise spectrum of the emitted field at angular frequency
    /// omega, normalised so that vacuum is the identity.
    Mat spectrum(double omega) const {
        const auto n = dim();
        const Eigen::MatrixXcd H = transfer(omega);
        const Eigen::MatrixXcd N = covariance_of_white_inputs.cast<std::complex<double>>();
        const Eigen::MatrixXcd S = H * N * H.adjoint();
        Mat out = S.real();
        out = 0.5 * (out + out.transpose()).eval();
        return transmission * out + (1.0 - transmission) * Mat::Identity(n, n);
    }

    Mat zero_frequency_covariance() const { return spectrum(0.0); }

    /// Photon flux carried by the squeezing, per unit bandwidth.
    double squeezing_photons() const {
        const Mat s = zero_frequency_covariance();
        return (s.trace() - static_cast<double>(dim())) / 4.0;
    }
};

inline InputNoiseModel vacuum(ModeKind mode) {
    InputNoiseModel m;
    m.mode = mode;
    const int n = mode == ModeKind::SingleMode ? 2 : 4;
    m.covariance_of_white_inputs = Mat::Identity(n, n);
    return m;
}

namespace detail {

// Unit vectors of the amplified (a) and squeezed (s) axes for angle theta.
inline Mat single_mode_axes(double theta) {
    Mat axes(2, 2);
    axes.col(0) << std::cos(theta), -std::sin(theta);
    axes.col(1) << std::sin(theta), std::cos(theta);
    return axes;
}

}  // namespace detail

inline InputNoiseModel broadband_single_mode(double r, double theta) {
    InputNoiseModel m = vacuum(ModeKind::SingleMode);
    const Mat axes = detail::single_mode_axes(theta);
    const Vec var = (Vec(2) << std::exp(2.0 * r), std::exp(-2.0 * r)).finished();
    m.covariance_of_white_inputs = axes * var.asDiagonal() * axes.transpose();
    return m;
}

/// <X_-X_-> = <Y_+Y_+> = e^{-2r}, <X_+X_+> = <Y_-Y_-> = e^{+2r}.
inline InputNoiseModel broadband_two_mode(double r) {
    InputNoiseModel m = vacuum(ModeKind::TwoMode);
    const Mat T = joint_basis();
    const double sq = std::exp(-2.0 * r);
    const double asq = std::exp(2.0 * r);
    const Vec var = (Vec(4) << sq, sq, asq, asq).finished();
    m.covariance_of_white_inputs = T.transpose() * var.asDiagonal() * T;
    return m;
}

/// Lorentzian squeezing of bandwidth Gamma: the squeezed quadratures have
/// spectrum 1 - (1 - e^{-2r}) Gamma^2 / (Gamma^2 + omega^2).
inline InputNoiseModel filtered_source(double r, double gamma_bw, ModeKind mode = ModeKind::TwoMode,
                                       double theta = 0.0) {
    InputNoiseModel m = vacuum(mode);
    const double er = std::exp(-r);
    FilterBlock fb;
    // Squeezed quadratures decay at Gamma, amplified ones at Gamma e^{-r};
    // the coupling gamma is their sum.
    fb.gamma = gamma_bw * (1.0 + er);
    const double slow = gamma_bw * er;
    if (mode == ModeKind::SingleMode) {
        const Mat axes = detail::single_mode_axes(theta);
        const Vec rates = (Vec(2) << -slow, -gamma_bw).finished();
        fb.drift = axes * rates.asDiagonal() * axes.transpose();
    } else {
        const Mat T = joint_basis();
        const Vec rates = (Vec(4) << -gamma_bw, -gamma_bw, -slow, -slow).finished();
        fb.drift = T.transpose() * rates.asDiagonal() * T;
    }
    fb.drift_idle = -0.5 * fb.gamma * Mat::Identity(m.dim(), m.dim());
    m.filter_block = fb;
    return m;
}

/// Noise model selected by a squeezing source description.
inline InputNoiseModel from_source(const SqueezeSource& src) {
    InputNoiseModel m;
    if (src.r == 0.0) {
        m = vacuum(src.mode_kind);
    } else if (!src.broadband()) {
        m = filtered_source(src.r, src.bandwidth, src.mode_kind, src.theta);
    } else if (src.mode_kind == ModeKind::SingleMode) {
        m = broadband_single_mode(src.r, src.theta);
    } else {
        m = broadband_two_mode(src.r);
    }
    m.active_from = src.t0;
    return m;
}

/// Beamsplitter of transmission eta mixing in vacuum: v -> eta v + (1 - eta).
inline InputNoiseModel apply_loss(InputNoiseModel model, double eta) {
    if (model.filter_block) {
        model.transmission *= eta;
    } else {
        const auto n = model.dim();
        model.covariance_of_white_inputs = eta * model.covariance_of_white_inputs
                                           + (1.0 - eta) * Mat::Identity(n, n);
    }
    return model;
}

/// Amplitude prefactor by which a Lorentzian source of bandwidth Gamma
/// reduces the broadband QMFS SNR at integration time tau.
inline double bandwidth_snr_prefactor(double r, double gamma_bw, double tau) {
    const double gt = gamma_bw * tau;
    return std::sqrt(gt / (gt + (std::exp(2.0 * r) - 1.0) * (1.0 - std::exp(-gt))));
}

}  // namespace qmfs
