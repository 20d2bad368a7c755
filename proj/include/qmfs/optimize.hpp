#pragma once

// Optimizers and inverse solvers over the readout engine: single-mode squeeze
// optimisation, integration time and photon number needed for a target
// fidelity, and asymmetric two-cavity tuning.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qmfs/readout.hpp"

namespace qmfs {

struct ScalarOptimum {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
template <class F>
ScalarOptimum golden_section_maximize(F&& f, double lo, double hi, double tol = 1e-7, int max_iter = 200) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && hi - lo > tol * (1.0 + std::abs(lo) + std::abs(hi)); ++i) {
        if (fc >= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    const double x = 0.5 * (lo + hi);
    return {x, f(x)};
}

/// Smallest x in [lo, hi] with f(x) >= target for nondecreasing f, assuming
/// f(lo) < target <= f(hi).
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi, double rel_tol = 1e-6) {
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < target ? lo : hi) = mid;
    }
    return hi;
}

/// Grid scan of a 1-D objective followed by golden refinement inside the
/// neighbouring grid cells. Ties go to the point closest to `prefer`.
template <class F>
ScalarOptimum grid_then_golden(F&& f, double lo, double hi, int points, double prefer) {
    if (hi <= lo) return {lo, f(lo)};
    points = std::max(points, 3);
    const double step = (hi - lo) / (points - 1);
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        const double x = lo + i * step;
        const double v = f(x);
        const double x_best = lo + best * step;
        const bool better = v > best_val * (1.0 + 1e-12) + 1e-300
                            || (std::abs(v - best_val) <= 1e-12 * std::abs(best_val)
                                && std::abs(x - prefer) < std::abs(x_best - prefer));
        if (better) {
            best = i;
            best_val = v;
        }
    }
    const double a = lo + std::max(best - 1, 0) * step;
    const double b = lo + std::min(best + 1, points - 1) * step;
    ScalarOptimum refined = golden_section_maximize(f, a, b);
    if (refined.value < best_val) refined = {lo + best * step, best_val};
    return refined;
}

struct SingleModeOptimum {
    double r = 0.0;
    double theta = 0.0;
    double snr = 0.0;
};

struct SingleModeSearch {
    int r_points = 13;
    int theta_points = 24;
    int refine_rounds = 3;
};

/// Maximises the engine SNR of single-mode squeezed readout over the squeeze
/// strength e^{2r} in [1, e2r_max] and angle theta in [0, pi).
inline SingleModeOptimum optimize_single_mode(const ValidatedConfig& base, double tau, double e2r_max,
                                              SingleModeSearch grid = {}) {
    if (base.cavity_count() != 1) throw RegimeViolation("single-mode optimisation needs one cavity");
    auto cfg = base.into_config();
    cfg.tau = tau;
    const double r_max = std::max(0.0, squeeze_r_from_power(e2r_max));
    auto snr = [&](double r, double theta) {
        auto c = cfg;
        c.protocol = r > 0.0 ? Protocol::SingleModeSqueezed : Protocol::Coherent;
        c.source.r = r;
        c.source.theta = theta;
        return measurement_stats(validate(c)).snr;
    };
    if (r_max == 0.0) return {0.0, 0.0, snr(0.0, 0.0)};

    SingleModeOptimum best{0.0, 0.0, snr(0.0, 0.0)};
    for (int i = 1; i < grid.r_points; ++i) {
        const double r = r_max * i / (grid.r_points - 1);
        for (int k = 0; k < grid.theta_points; ++k) {
            const double th = std::numbers::pi * k / grid.theta_points;
            const double v = snr(r, th);
            if (v > best.snr * (1.0 + 1e-12)) best = {r, th, v};
        }
    }
    double dr = r_max / (grid.r_points - 1);
    double dth = std::numbers::pi / grid.theta_points;
    for (int round = 0; round < grid.refine_rounds; ++round) {
        const auto th = golden_section_maximize([&](double t) { return snr(best.r, t); }, best.theta - dth,
                                                best.theta + dth, 1e-9);
        if (th.value > best.snr) best = {best.r, th.x, th.value};
        const auto rr = golden_section_maximize([&](double r) { return snr(r, best.theta); },
                                                std::max(0.0, best.r - dr), std::min(r_max, best.r + dr), 1e-9);
        if (rr.value > best.snr) best = {rr.x, best.theta, rr.value};
        dr *= 0.5;
        dth *= 0.5;
    }
    best.theta = std::fmod(std::fmod(best.theta, std::numbers::pi) + std::numbers::pi, std::numbers::pi);
    return best;
}

/// Integration time at which the engine fidelity first reaches `target`.
inline double required_tau(const ValidatedConfig& cfg, double target_fidelity, double tau_max = 1e4,
                           double rel_tol = 1e-6) {
    if (!(target_fidelity > 0.5 && target_fidelity < 1.0)) throw Error("target fidelity must lie in (0.5, 1)");
    auto fid = [&](double tau) { return measurement_stats(cfg.with_tau(tau)).fidelity; };
    double hi = 1.0;
    while (fid(hi) < target_fidelity) {
        hi *= 2.0;
        if (hi > tau_max) throw Unreachable("fidelity target not reached within tau_max");
    }
    return bisect_increasing(fid, target_fidelity, 0.0, hi, rel_tol);
}

/// Unsqueezed comparison drive with the same intracavity photon number as a
/// two-mode squeezed config: n0 -> n0 + 4 sinh^2 r.
inline ValidatedConfig photon_matched_coherent(const ValidatedConfig& cfg) {
    auto c = cfg.into_config();
    const double sh = std::sinh(c.source.r);
    for (auto& cav : c.cavities) cav.drive_flux += 4.0 * sh * sh;
    c.protocol = Protocol::Coherent;
    c.source.r = 0.0;
    c.source.bandwidth = kBroadband;
    return validate(c);
}

struct PhotonOptimum {
    double n_bar = 0.0;
    double n0 = 0.0;
    double r = 0.0;
    double snr = 0.0;
};

/// Drive strength and intracavity photons needed to hit `target` at fixed
/// tau and squeeze parameter r. Signal grows as sqrt(n0) and the noise does
/// not depend on the drive, so n0 follows from one engine evaluation.
inline PhotonOptimum photons_at_squeezing(const ValidatedConfig& cfg, double tau, double target, double r) {
    auto c = cfg.into_config();
    c.tau = tau;
    c.source.r = r;
    if (r == 0.0) c.protocol = Protocol::Coherent;
    for (auto& cav : c.cavities) cav.drive_flux = 1.0;
    const auto unit = validate(c);
    const double s1 = measurement_stats(unit).snr;
    if (!(s1 > 0.0)) throw Unreachable("configuration produces no signal");
    const double need = snr_for_fidelity(target);
    PhotonOptimum out;
    out.r = r;
    out.n0 = (need / s1) * (need / s1);
    for (auto& cav : c.cavities) cav.drive_flux = out.n0;
    const auto sized = validate(c);
    out.n_bar = intracavity_photons(sized);
    out.snr = need;
    return out;
}

/// Minimal intracavity photon number reaching `target` at fixed tau,
/// optimising the split between squeezing and coherent drive. Coherent
/// configs are solved at r = 0.
inline PhotonOptimum photons_for_fidelity(const ValidatedConfig& cfg, double tau, double target,
                                          double e2r_max = 1e4, int grid_points = 41) {
    if (!(target > 0.5 && target < 1.0)) throw Error("target fidelity must lie in (0.5, 1)");
    if (cfg.protocol() == Protocol::Coherent) return photons_at_squeezing(cfg, tau, target, 0.0);
    const double r_max = squeeze_r_from_power(e2r_max);
    auto neg_nbar = [&](double r) { return -photons_at_squeezing(cfg, tau, target, r).n_bar; };
    const auto best = grid_then_golden(neg_nbar, 0.0, r_max, grid_points, 0.0);
    return photons_at_squeezing(cfg, tau, target, best.x);
}

/// delta_kappa that satisfies (chi1 + chi2)/(chi1 - chi2) = (kappa1 - kappa2)/(kappa1 + kappa2).
inline double balanced_delta_kappa(double delta_chi, double chi_bar, double kappa_bar) {
    return kappa_bar * delta_chi / chi_bar;
}

struct AsymmetryOptimum {
    double delta_kappa = 0.0;
    double snr = 0.0;
    /// SNR relative to symmetric coherent readout (delta_chi = delta_kappa = 0, r = 0).
    double enhancement = 0.0;
    double reference_snr = 0.0;
};

inline double asymmetric_snr(double delta_chi, double chi_bar, double kappa_bar, double delta_kappa, double tau,
                             double r, double n0 = 1.0) {
    return measurement_stats(validate(qmfs_config(chi_bar, n0, r, tau, kappa_bar, delta_chi, delta_kappa))).snr;
}

/// Maximises the two-cavity SNR over delta_kappa at fixed delta_chi.
inline AsymmetryOptimum optimize_asymmetry(double delta_chi, double chi_bar, double kappa_bar, double tau, double r,
                                           double n0 = 1.0, int grid_points = 41) {
    auto f = [&](double dk) { return asymmetric_snr(delta_chi, chi_bar, kappa_bar, dk, tau, r, n0); };
    const double bound = 0.95 * kappa_bar;
    const auto best = grid_then_golden(f, -bound, bound, grid_points, 0.0);
    AsymmetryOptimum out;
    out.delta_kappa = best.x;
    out.snr = best.value;
    out.reference_snr = asymmetric_snr(0.0, chi_bar, kappa_bar, 0.0, tau, 0.0, n0);
    out.enhancement = out.snr / out.reference_snr;
    return out;
}

/// Dispersive shift giving rotation angle phi for decay rate kappa.
inline double chi_for_phi(double phi_qb, double kappa = 1.0) { return 0.5 * kappa * std::tan(0.5 * phi_qb); }

/// Engine SNR of symmetric QMFS readout when N input photons are split into
/// N_s squeezing photons and N - N_s displacement photons.
inline double engine_snr_for_budget(double N, double N_s, double phi_qb, double kappa_tau) {
    const double r = std::asinh(std::sqrt(0.5 * N_s));
    const double n0 = 4.0 * (N - N_s) / kappa_tau;
    if (n0 <= 0.0) return 0.0;
    return measurement_stats(validate(qmfs_config(chi_for_phi(phi_qb), n0, r, kappa_tau))).snr;
}

/// Engine optimum over r at fixed intracavity photon number
/// n_bar = n0 cos^2(phi/2) + 2 sinh^2 r (symmetric QMFS, broadband).
inline ScalarOptimum optimize_intracavity(double n_bar, double phi_qb, double kappa_tau, int grid_points = 41) {
    const double c2 = std::cos(0.5 * phi_qb) * std::cos(0.5 * phi_qb);
    const double r_max = std::asinh(std::sqrt(0.5 * n_bar));
    auto snr = [&](double r) {
        const double sh = std::sinh(r);
        const double n0 = (n_bar - 2.0 * sh * sh) / c2;
        if (n0 <= 0.0) return 0.0;
        return measurement_stats(validate(qmfs_config(chi_for_phi(phi_qb), n0, r, kappa_tau))).snr;
    };
    return grid_then_golden(snr, 0.0, r_max, grid_points, 0.0);
}

}  // namespace qmfs
