#pragma once

// Measurement figures of merit: signal, imprecision noise, SNR and fidelity,
// from the dynamics engine and from closed-form asymptotics.

#include <cmath>
#include <numbers>
#include <vector>

#include "qmfs/dynamics.hpp"
#include "qmfs/model.hpp"

namespace qmfs {

struct MeasurementStats {
    double signal_ground = 0.0;
    double signal_excited = 0.0;
    double noise_ground = 0.0;
    double noise_excited = 0.0;
    double snr = 0.0;
    double fidelity = 0.5;
};

/// F = 1 - erfc(SNR/2)/2: the success probability of a midpoint threshold
/// between two Gaussians of equal width.
inline double fidelity_from_snr(double snr) { return 1.0 - 0.5 * std::erfc(0.5 * snr); }

/// SNR needed to reach a fidelity in (0.5, 1).
inline double snr_for_fidelity(double fidelity) {
    // erfc is monotone, so bisect in SNR; 200 halvings reach double precision.
    double lo = 0.0, hi = 1.0;
    while (fidelity_from_snr(hi) < fidelity) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (fidelity_from_snr(mid) < fidelity ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline MeasurementStats make_stats(double signal_ground, double signal_excited, double noise_ground,
                                   double noise_excited) {
    MeasurementStats s{signal_ground, signal_excited, noise_ground, noise_excited, 0.0, 0.5};
    const double total = noise_ground + noise_excited;
    s.snr = total > 0.0 ? std::abs(signal_ground - signal_excited) / std::sqrt(total) : 0.0;
    s.fidelity = fidelity_from_snr(s.snr);
    return s;
}

/// Detection-side beamsplitter: signals scale by sqrt(eta), noise becomes
/// eta * noise + (1 - eta) * vacuum_noise (vacuum_noise = kappa_ref * tau).
inline MeasurementStats apply_loss(const MeasurementStats& s, double eta, double vacuum_noise) {
    const double a = std::sqrt(eta);
    return make_stats(a * s.signal_ground, a * s.signal_excited, eta * s.noise_ground + (1.0 - eta) * vacuum_noise,
                      eta * s.noise_excited + (1.0 - eta) * vacuum_noise);
}

/// Statistics at `samples` equally spaced times up to the config's tau
/// (entry k holds time (k+1) tau / samples).
inline std::vector<MeasurementStats> measurement_series(const ValidatedConfig& cfg, int samples) {
    const auto g = propagate(build_system(cfg, QubitState::Ground), cfg.tau(), samples);
    const auto e = propagate(build_system(cfg, QubitState::Excited), cfg.tau(), samples);
    const bool detection_loss = cfg.loss().placement == LossPlacement::Detection && cfg.loss().eta < 1.0;
    std::vector<MeasurementStats> out;
    out.reserve(samples);
    for (std::size_t k = 1; k < g.size(); ++k) {
        auto s = make_stats(g[k].record_mean(), e[k].record_mean(), g[k].record_variance(), e[k].record_variance());
        if (detection_loss) s = apply_loss(s, cfg.loss().eta, cfg.kappa_ref() * g[k].time);
        out.push_back(s);
    }
    return out;
}

inline MeasurementStats measurement_stats(const ValidatedConfig& cfg) { return measurement_series(cfg, 1).back(); }

inline double snr_coherent_asymptotic(double phi_qb, double n0, double kappa_tau) {
    return std::abs(std::sin(phi_qb)) * std::sqrt(2.0 * n0 * kappa_tau);
}

/// Long-time coherent-drive SNR |sin phi| sqrt(2 n0 kappa tau).
inline double snr_coherent_asymptotic(const ValidatedConfig& cfg) {
    if (cfg.source().r != 0.0) throw RegimeViolation("closed-form coherent SNR requires an unsqueezed drive");
    return snr_coherent_asymptotic(cfg.phi_qb(0), cfg.cavity(0).drive_flux, cfg.kappa_ref() * cfg.tau());
}

/// Long-time single-mode squeezed noise at phi_qb = pi/2, up to exponentially
/// decaying terms.
inline double noise_single_mode_eq1(double r, double theta, double kappa, double tau) {
    const double s = std::sin(theta), c = std::cos(theta);
    return kappa * tau * (s * s * std::exp(-2.0 * r) + c * c * std::exp(2.0 * r))
           + 2.0 * std::numbers::sqrt2 * std::sinh(2.0 * r) * std::cos(2.0 * theta - 0.75 * std::numbers::pi);
}

/// Same, checked against a config. The formula holds for the ground-state
/// record when chi = kappa/2.
inline double noise_single_mode_eq1(const ValidatedConfig& cfg, double tol = 1e-9) {
    if (cfg.cavity_count() != 1) throw RegimeViolation("single-cavity formula applied to a two-cavity config");
    const auto& c = cfg.cavity(0);
    if (std::abs(c.chi - 0.5 * c.kappa) > tol * c.kappa)
        throw RegimeViolation("formula only holds for chi = kappa/2 (phi_qb = pi/2)");
    return noise_single_mode_eq1(cfg.source().r, cfg.source().theta, c.kappa, cfg.tau());
}

struct HeisenbergOptimum {
    double N_s = 0.0;
    double snr = 0.0;
};

/// Best split of N input photons between squeezing and displacement:
/// N_s = N^2 / (2 (N + 1)), SNR = 2 |sin phi| N sqrt(1 + 2/N).
inline HeisenbergOptimum snr_heisenberg_optimum(double N, double phi_qb) {
    return {N * N / (2.0 * (N + 1.0)), 2.0 * std::abs(std::sin(phi_qb)) * N * std::sqrt(1.0 + 2.0 / N)};
}

/// Long-time QMFS SNR for a fixed photon budget and squeezing share, with
/// N_d = n0 kappa tau / 4 and N_s = 2 sinh^2 r.
inline double snr_photon_budget(double N, double N_s, double phi_qb) {
    const double r = std::asinh(std::sqrt(0.5 * N_s));
    const double N_d = N - N_s;
    if (N_d <= 0.0) return 0.0;
    return std::exp(r) * std::abs(std::sin(phi_qb)) * std::sqrt(8.0 * N_d);
}

/// Heisenberg-like scaling with intracavity photons: 2 |sin(phi/2)| n_bar sqrt(kappa tau).
inline double snr_intracavity_optimum(double n_bar, double phi_qb, double kappa, double tau) {
    return 2.0 * std::abs(std::sin(0.5 * phi_qb)) * n_bar * std::sqrt(kappa * tau);
}

/// Steady-state intracavity photon number of the configured drive plus
/// squeezing, summed over cavities.
inline double intracavity_photons(const ValidatedConfig& cfg) {
    const auto sys = build_system(cfg, QubitState::Ground);
    const Vec m = steady_state_mean(sys);
    const int nf = sys.layout.field_size();
    const Mat C = steady_state_covariance(sys.drift.topLeftCorner(nf, nf), sys.diffusion().topLeftCorner(nf, nf));
    double n = 0.0;
    for (int j = 0; j < sys.layout.cavities(); ++j) {
        const int x = sys.layout.x_index(j), y = sys.layout.y_index(j);
        n += (m(x) * m(x) + m(y) * m(y) + C(x, x) + C(y, y) - 2.0) / 4.0;
    }
    return n;
}

}  // namespace qmfs
