#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qmfs/optimize.hpp"
#include "qmfs/readout.hpp"

using namespace qmfs;

TEST(Fidelity, LimitsAndMonotonicity) {
    EXPECT_DOUBLE_EQ(fidelity_from_snr(0.0), 0.5);
    EXPECT_NEAR(fidelity_from_snr(40.0), 1.0, 1e-15);
    double prev = 0.0;
    for (double s = 0.0; s < 10.0; s += 0.25) {
        const double f = fidelity_from_snr(s);
        EXPECT_GE(f, prev);
        EXPECT_GE(f, 0.5);
        EXPECT_LE(f, 1.0);
        prev = f;
    }
}

TEST(Fidelity, InverseIsConsistent) {
    for (double f : {0.6, 0.9, 0.99, 0.9999}) EXPECT_NEAR(fidelity_from_snr(snr_for_fidelity(f)), f, 1e-13);
    // Known value: erfc(x) = 2e-4 at x = 2.6297...
    EXPECT_NEAR(snr_for_fidelity(0.9999), 2.0 * 2.629741776210312, 1e-9);
}

TEST(Snr, QubitStateSymmetry) {
    const auto s = measurement_stats(validate(single_mode_config(0.5, 1.0, 0.7, 0.4, 5.0)));
    // Flipping sigma_z mirrors the rotation, so both states give signals of equal size.
    EXPECT_NEAR(s.signal_ground, -s.signal_excited, 1e-12);
    const auto q = measurement_stats(validate(qmfs_config(0.5, 1.0, 0.7, 5.0)));
    EXPECT_NEAR(q.noise_ground, q.noise_excited, 1e-12);
}

TEST(Snr, GrowsAsSquareRootOfDrive) {
    const double a = measurement_stats(validate(coherent_config(0.5, 1.0, 5.0))).snr;
    const double b = measurement_stats(validate(coherent_config(0.5, 16.0, 5.0))).snr;
    EXPECT_NEAR(b / a, 4.0, 1e-12);
}

TEST(Snr, CoherentApproachesClosedFormSlowly) {
    // A step turn-on delays the integrated signal by 2/kappa at phi = pi/2, up
    // to ringing terms of order e^{-kappa tau / 2}.
    for (double kt : {20.0, 50.0, 200.0}) {
        const auto v = validate(coherent_config(0.5, 100.0, kt));
        const double ratio = measurement_stats(v).snr / snr_coherent_asymptotic(v);
        EXPECT_NEAR(ratio, (kt - 2.0) / kt, 1e-4) << kt;
    }
}

TEST(Snr, ClosedFormsRejectWrongRegime) {
    EXPECT_THROW(snr_coherent_asymptotic(validate(single_mode_config(0.5, 1.0, 0.3, 0.0, 5.0))), RegimeViolation);
    EXPECT_THROW(noise_single_mode_eq1(validate(single_mode_config(0.3, 1.0, 0.3, 0.0, 5.0))), RegimeViolation);
    EXPECT_THROW(noise_single_mode_eq1(validate(qmfs_config(0.5, 1.0, 0.3, 5.0))), RegimeViolation);
}

TEST(Snr, SingleModeNoiseApproachesClosedForm) {
    // The neglected terms decay as e^{-kappa tau / 2}.
    for (double theta : {0.0, std::numbers::pi / 4, std::numbers::pi / 2}) {
        const double r = squeeze_r_from_power(10.0);
        double prev = 1e300;
        for (double kt : {10.0, 20.0, 30.0, 40.0}) {
            const auto v = validate(single_mode_config(0.5, 1.0, r, theta, kt));
            const double residual = std::abs(measurement_stats(v).noise_ground - noise_single_mode_eq1(v));
            EXPECT_LT(residual, 3.0 * std::exp(-0.5 * kt) * std::cosh(2 * r)) << theta << " " << kt;
            EXPECT_LT(residual, prev + 1e-9);
            prev = residual;
        }
    }
}

TEST(Snr, QmfsNoiseIsSqueezedVacuum) {
    for (double chi : {0.1, 0.5, 2.0}) {
        const auto s = measurement_stats(validate(qmfs_config(chi, 1.0, 1.0, 3.0)));
        EXPECT_NEAR(s.noise_ground, std::exp(-2.0) * 3.0, 1e-10);
    }
}

TEST(Snr, DetectionLossMixesInVacuum) {
    auto c = qmfs_config(0.5, 1.0, squeeze_r_from_power(100.0), 10.0);
    const auto lossless = measurement_stats(validate(c));
    c.loss.eta = 0.9;
    const auto lossy = measurement_stats(validate(c));
    EXPECT_NEAR(lossy.noise_ground, 0.9 * 0.1 + 0.1 * 10.0, 1e-9);
    EXPECT_NEAR(lossy.signal_ground, std::sqrt(0.9) * lossless.signal_ground, 1e-9);
    // Input-side loss on a broadband source is equivalent at zero frequency.
    c.loss.placement = LossPlacement::Input;
    EXPECT_NEAR(measurement_stats(validate(c)).noise_ground, 0.9 * 0.1 + 0.1 * 10.0, 1e-9);
}

TEST(Heisenberg, ClosedFormAtEightPhotons) {
    const auto h = snr_heisenberg_optimum(8.0, std::numbers::pi / 2);
    EXPECT_NEAR(h.N_s, 32.0 / 9.0, 1e-14);
    EXPECT_NEAR(h.snr, 16.0 * std::sqrt(1.25), 1e-12);
    EXPECT_NEAR(h.snr, 17.889, 1e-3);
}

TEST(Heisenberg, GridSearchFindsTheClosedFormOptimum) {
    for (double N : {4.0, 8.0, 16.0, 64.0}) {
        const auto h = snr_heisenberg_optimum(N, std::numbers::pi / 2);
        double best = 0.0, arg = 0.0;
        for (int i = 0; i <= 20000; ++i) {
            const double ns = N * i / 20000.0;
            const double s = snr_photon_budget(N, ns, std::numbers::pi / 2);
            if (s > best) best = s, arg = ns;
        }
        EXPECT_NEAR(arg, h.N_s, N / 20000.0 + 1e-12);
        EXPECT_NEAR(best, h.snr, 1e-6 * h.snr);
        // Heisenberg scaling: snr / N bounded below by 2.
        EXPECT_GE(h.snr / N, 2.0);
    }
}

TEST(Intracavity, PhotonNumberFromEngineMatchesBudget) {
    const auto v = validate(qmfs_config(0.5, 5.0, 0.9, 3.0));
    EXPECT_NEAR(intracavity_photons(v), v.photon_budget().n_bar, 1e-9);
    const auto c = validate(coherent_config(0.5, 5.0, 3.0));
    EXPECT_NEAR(intracavity_photons(c), 2.5, 1e-10);
}

TEST(Intracavity, EngineOptimumApproachesHeisenbergScalingAtLargePhotonNumber) {
    // Finite-n_bar optimum is 2|sin(phi/2)| sqrt(kappa tau n_bar (n_bar + 2)).
    const double phi = std::numbers::pi / 2, kt = 400.0, n = 60.0;
    const auto best = optimize_intracavity(n, phi, kt);
    const double closed = snr_intracavity_optimum(n, phi, 1.0, kt);
    EXPECT_NEAR(best.value / closed, 1.0, 0.05);
    EXPECT_NEAR(best.value, 2.0 * std::sin(phi / 2) * std::sqrt(kt * n * (n + 2.0)), 0.02 * best.value);
}
