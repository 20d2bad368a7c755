#pragma once

// Monte Carlo homodyne records: sample realisations of the same linear SDE the
// covariance engine solves, and estimate signal, noise, SNR and readout error
// from the samples alone.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <thread>
#include <vector>

#include "qmfs/dynamics.hpp"
#include "qmfs/readout.hpp"

namespace qmfs {

enum class Scheme {
    EulerMaruyama,
    /// Exact-in-law discrete Gaussian transition (Van Loan step).
    ExactGaussian,
};

struct TrajectoryEnsemble {
    int n_traj = 0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::EulerMaruyama;
    double tau = 0.0;
    /// Integrated record M(tau) per trajectory, indexed by trajectory id.
    std::vector<double> ground;
    std::vector<double> excited;
};

/// Independent generator for one (trajectory, qubit state) pair. The stream
/// depends only on the key, so results do not depend on how trajectories are
/// split across threads.
inline std::mt19937_64 trajectory_stream(std::uint64_t seed, std::uint64_t traj, QubitState state) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(traj), static_cast<std::uint32_t>(traj >> 32),
                      state == QubitState::Ground ? 0u : 1u};
    return std::mt19937_64(seq);
}

/// Runs fn(i) for i in [0, n) over `threads` contiguous chunks.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    threads = std::clamp(threads, 1, std::max(n, 1));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk, hi = std::min(n, lo + chunk);
        pool.emplace_back([lo, hi, &fn] {
            for (int i = lo; i < hi; ++i) fn(i);
        });
    }
}

namespace detail {

struct RecordSampler {
    LinearSystem sys;
    Mat initial_sqrt;
    Mat noise_gain;
    DiscreteTransition exact;
    int steps = 0;
    double h = 0.0;
    double eta_detect = 1.0;
    double vacuum_noise = 0.0;
    Scheme scheme = Scheme::EulerMaruyama;

    double run(std::mt19937_64& rng) const {
        std::normal_distribution<double> normal;
        const int n = sys.layout.size();
        const int nf = sys.layout.field_size();
        auto draw = [&](Eigen::Index k) {
            Vec z(k);
            for (Eigen::Index i = 0; i < k; ++i) z(i) = normal(rng);
            return z;
        };
        Vec x = Vec::Zero(n);
        x.head(nf) = initial_sqrt * draw(nf);
        if (scheme == Scheme::EulerMaruyama) {
            const double sh = std::sqrt(h);
            for (int k = 0; k < steps; ++k) {
                const Vec dw = noise_gain * draw(noise_gain.cols());
                x += (sys.drift * x + sys.drive) * h + dw * sh;
            }
        } else {
            for (int k = 0; k < steps; ++k) x = exact.phi * x + exact.forced + noise_gain * draw(n);
        }
        double m = x(n - 1);
        if (eta_detect < 1.0) m = std::sqrt(eta_detect) * m + std::sqrt((1.0 - eta_detect) * vacuum_noise) * normal(rng);
        return m;
    }
};

inline RecordSampler make_sampler(const ValidatedConfig& cfg, QubitState state, double dt, Scheme scheme) {
    RecordSampler s;
    s.sys = build_system(cfg, state);
    s.scheme = scheme;
    const double limit = 1.0 / (50.0 * s.sys.max_rate());
    if (dt > limit * (1.0 + 1e-12))
        throw StepTooCoarse("dt = " + std::to_string(dt) + " exceeds 1/(50 max rate) = " + std::to_string(limit));
    s.steps = std::max(1, static_cast<int>(std::ceil(cfg.tau() / dt - 1e-9)));
    s.h = cfg.tau() / s.steps;
    s.initial_sqrt = psd_sqrt(initial_field_covariance(s.sys));
    if (scheme == Scheme::EulerMaruyama) {
        s.noise_gain = s.sys.input_coupling * psd_sqrt(s.sys.input_cov);
    } else {
        s.exact = discretize(s.sys.drift, s.sys.diffusion(), s.sys.drive, s.h);
        s.noise_gain = psd_sqrt(s.exact.noise);
    }
    if (cfg.loss().placement == LossPlacement::Detection) s.eta_detect = cfg.loss().eta;
    s.vacuum_noise = cfg.kappa_ref() * cfg.tau();
    return s;
}

}  // namespace detail

/// Samples M(tau) for n_traj trajectories per qubit state.
inline TrajectoryEnsemble sample_records(const ValidatedConfig& cfg, int n_traj, double dt, std::uint64_t seed,
                                         Scheme scheme = Scheme::EulerMaruyama, int threads = 1) {
    if (n_traj < 2) throw Error("need at least two trajectories");
    TrajectoryEnsemble ens;
    ens.n_traj = n_traj;
    ens.seed = seed;
    ens.scheme = scheme;
    ens.tau = cfg.tau();
    const auto g = detail::make_sampler(cfg, QubitState::Ground, dt, scheme);
    const auto e = detail::make_sampler(cfg, QubitState::Excited, dt, scheme);
    ens.dt = g.h;
    ens.ground.assign(n_traj, 0.0);
    ens.excited.assign(n_traj, 0.0);
    parallel_for(n_traj, threads, [&](int i) {
        auto rg = trajectory_stream(seed, static_cast<std::uint64_t>(i), QubitState::Ground);
        ens.ground[i] = g.run(rg);
        auto re = trajectory_stream(seed, static_cast<std::uint64_t>(i), QubitState::Excited);
        ens.excited[i] = e.run(re);
    });
    return ens;
}

struct EmpiricalStats {
    MeasurementStats stats;
    double se_signal_ground = 0.0;
    double se_signal_excited = 0.0;
    double se_noise_ground = 0.0;
    double se_noise_excited = 0.0;
    double se_snr = 0.0;
    /// Fraction misassigned by a threshold at the midpoint of the two means.
    double error_rate = 0.0;
    double se_error_rate = 0.0;
    double skewness_ground = 0.0;
    double skewness_excited = 0.0;
    double kurtosis_ground = 0.0;
    double kurtosis_excited = 0.0;
};

namespace detail {

struct Moments {
    double mean = 0.0, var = 0.0, skew = 0.0, kurt = 0.0;
};

inline Moments moments(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m.var = m2 / (n - 1.0);
    m2 /= n;
    m.skew = (m3 / n) / std::pow(m2, 1.5);
    m.kurt = (m4 / n) / (m2 * m2);
    return m;
}

// Leave-one-out means and unbiased variances in O(n).
inline void leave_one_out(const std::vector<double>& x, std::vector<double>& mean, std::vector<double>& var) {
    const double n = static_cast<double>(x.size());
    double s1 = 0.0, s2 = 0.0;
    // Shift by the first sample to limit cancellation.
    const double c = x.front();
    for (double v : x) {
        s1 += v - c;
        s2 += (v - c) * (v - c);
    }
    mean.resize(x.size());
    var.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - c;
        const double a = s1 - d, b = s2 - d * d;
        mean[i] = c + a / (n - 1.0);
        var[i] = (b - a * a / (n - 1.0)) / (n - 2.0);
    }
}

inline double jackknife_se(const std::vector<double>& pseudo) {
    const double n = static_cast<double>(pseudo.size());
    double mean = 0.0;
    for (double v : pseudo) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : pseudo) ss += (v - mean) * (v - mean);
    return std::sqrt((n - 1.0) / n * ss);
}

}  // namespace detail

/// Moment estimates with delete-one jackknife standard errors.
inline EmpiricalStats empirical_stats(const TrajectoryEnsemble& ens) {
    using namespace detail;
    EmpiricalStats out;
    const Moments g = moments(ens.ground), e = moments(ens.excited);
    out.stats = make_stats(g.mean, e.mean, g.var, e.var);
    out.skewness_ground = g.skew;
    out.skewness_excited = e.skew;
    out.kurtosis_ground = g.kurt;
    out.kurtosis_excited = e.kurt;

    std::vector<double> gm, gv, em, ev;
    leave_one_out(ens.ground, gm, gv);
    leave_one_out(ens.excited, em, ev);
    out.se_signal_ground = jackknife_se(gm);
    out.se_signal_excited = jackknife_se(em);
    out.se_noise_ground = jackknife_se(gv);
    out.se_noise_excited = jackknife_se(ev);

    // The two groups are independent, so their jackknife variances add.
    std::vector<double> snr_g(gm.size()), snr_e(em.size());
    for (std::size_t i = 0; i < gm.size(); ++i) snr_g[i] = std::abs(gm[i] - e.mean) / std::sqrt(gv[i] + e.var);
    for (std::size_t i = 0; i < em.size(); ++i) snr_e[i] = std::abs(g.mean - em[i]) / std::sqrt(g.var + ev[i]);
    out.se_snr = std::hypot(jackknife_se(snr_g), jackknife_se(snr_e));

    const double threshold = 0.5 * (g.mean + e.mean);
    const bool ground_above = g.mean > e.mean;
    std::size_t wrong = 0;
    for (double v : ens.ground) wrong += ground_above ? (v < threshold) : (v > threshold);
    for (double v : ens.excited) wrong += ground_above ? (v > threshold) : (v < threshold);
    const double total = static_cast<double>(ens.ground.size() + ens.excited.size());
    out.error_rate = static_cast<double>(wrong) / total;
    out.se_error_rate = std::sqrt(out.error_rate * (1.0 - out.error_rate) / total);
    return out;
}

}  // namespace qmfs
