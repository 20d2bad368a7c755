#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qmfs/dynamics.hpp"
#include "qmfs/readout.hpp"

using namespace qmfs;

namespace {

ValidatedConfig asymmetric(double r = 0.8) { return validate(qmfs_config(0.5, 2.0, r, 3.0, 1.0, 0.1, 0.05)); }

}  // namespace

TEST(Drift, CavityEigenvaluesDecayAtHalfKappa) {
    const auto v = validate(qmfs_config(0.7, 1.0, 0.5, 2.0, 1.0, 0.1, 0.3));
    const auto sys = build_system(v, QubitState::Ground);
    const auto& L = sys.layout;
    for (int j = 0; j < 2; ++j) {
        const Mat block = sys.drift.block(L.x_index(j), L.x_index(j), 2, 2);
        const Eigen::VectorXcd ev = block.eigenvalues();
        for (int i = 0; i < 2; ++i) EXPECT_NEAR(ev[i].real(), -0.5 * v.cavity(j).kappa, 1e-14);
        EXPECT_NEAR(std::abs(ev[0].imag()), std::abs(v.cavity(j).chi), 1e-14);
    }
    EXPECT_EQ(sys.drift(L.record_index(), L.record_index()), 0.0);
}

TEST(Drift, QubitStateFlipsTheRotation) {
    const auto v = validate(coherent_config(0.4, 1.0, 1.0));
    const auto g = build_system(v, QubitState::Ground);
    const auto e = build_system(v, QubitState::Excited);
    EXPECT_EQ(g.drift(0, 1), -e.drift(0, 1));
    EXPECT_EQ(g.drift(0, 0), e.drift(0, 0));
}

TEST(Dynamics, BasisChangeLeavesRecordStatisticsUnchanged) {
    const auto v = asymmetric();
    const auto sys = build_system(v, QubitState::Excited);
    const auto P = joint_basis_transform(sys.layout);
    const auto a = propagate_to(sys, 3.0);
    const auto b = propagate_to(transformed(sys, P), 3.0);
    EXPECT_NEAR(a.record_mean(), b.record_mean(), 1e-11);
    EXPECT_NEAR(a.record_variance(), b.record_variance(), 1e-11);
    EXPECT_LT((P * a.covariance * P.transpose() - b.covariance).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Dynamics, SymmetricQmfsDecouplesSqueezedPair) {
    const auto v = validate(qmfs_config(0.5, 1.0, 1.2, 2.0));
    for (auto s : {QubitState::Ground, QubitState::Excited}) {
        const auto sys = transformed(build_system(v, s), joint_basis_transform(build_system(v, s).layout));
        // (X_-, Y_+) occupy cavity rows 0, 1; (X_+, Y_-) rows 2, 3.
        EXPECT_LT(sys.drift.block(0, 2, 2, 2).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT(sys.drift.block(2, 0, 2, 2).cwiseAbs().maxCoeff(), 1e-14);
        // The record reads only Y_+.
        EXPECT_LT(std::abs(sys.drift(4, 0)) + std::abs(sys.drift(4, 2)) + std::abs(sys.drift(4, 3)), 1e-14);
    }
}

TEST(Dynamics, CovarianceRespectsUncertaintyAtAllTimes) {
    for (const auto& v : {asymmetric(1.5), validate(single_mode_config(0.5, 1.0, 1.0, 0.6, 4.0)),
                          validate(coherent_config(0.3, 1.0, 4.0))}) {
        for (auto s : {QubitState::Ground, QubitState::Excited}) {
            const auto sys = build_system(v, s);
            for (const auto& st : propagate(sys, v.tau(), 16)) {
                Eigen::SelfAdjointEigenSolver<Mat> es(st.covariance);
                EXPECT_GT(es.eigenvalues().minCoeff(), -1e-9);
                for (int j = 0; j < sys.layout.cavities(); ++j) {
                    const int x = sys.layout.x_index(j);
                    EXPECT_GE(st.covariance.block(x, x, 2, 2).determinant(), 1.0 - 1e-9);
                }
            }
        }
    }
}

TEST(Dynamics, RecordNoiseGrowsWithTime) {
    const auto v = validate(single_mode_config(0.5, 1.0, 1.0, 0.3, 6.0));
    const auto states = propagate(build_system(v, QubitState::Ground), 6.0, 30);
    for (std::size_t k = 1; k < states.size(); ++k)
        EXPECT_GE(states[k].record_variance(), states[k - 1].record_variance());
}

TEST(Dynamics, ZeroSqueezingMatchesCoherentDrive) {
    const auto q = measurement_stats(validate(qmfs_config(0.5, 2.0, 0.0, 4.0)));
    auto c = qmfs_config(0.5, 2.0, 0.0, 4.0);
    c.protocol = Protocol::Coherent;
    const auto k = measurement_stats(validate(c));
    EXPECT_NEAR(q.snr, k.snr, 1e-12);
    // Two-cavity drive along X_- equals one cavity driven with the same n0.
    const auto one = measurement_stats(validate(coherent_config(0.5, 2.0, 4.0)));
    EXPECT_NEAR(q.snr, one.snr, 1e-10);
    EXPECT_NEAR(q.noise_ground, 4.0, 1e-10);
}

TEST(Dynamics, MeanMatchesComplexClosedForm) {
    for (double chi : {0.2, 0.5, 1.7}) {
        const auto v = validate(coherent_config(chi, 9.0, 3.0, 1.3));
        for (auto s : {QubitState::Ground, QubitState::Excited}) {
            const auto st = propagate_to(build_system(v, s), 3.0);
            const double x_in = std::sqrt(9.0 * 1.3);
            EXPECT_NEAR(st.record_mean(), oracle::coherent_signal(1.3, chi, sigma_z(s), x_in, 3.0), 1e-10);
        }
    }
}

TEST(Dynamics, SteadyStateMeanIsTheLongTimeLimit) {
    const auto v = validate(coherent_config(0.5, 4.0, 1.0));
    const auto sys = build_system(v, QubitState::Ground);
    const Vec late = evolve_mean(sys, 60.0);
    const Vec ss = steady_state_mean(sys);
    EXPECT_LT((late.head(2) - ss).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Dynamics, UndampedDriftIsSingular) {
    const auto v = validate(coherent_config(0.5, 4.0, 1.0));
    auto sys = build_system(v, QubitState::Ground);
    sys.drift(0, 0) = sys.drift(1, 1) = 0.0;
    EXPECT_THROW(steady_state_mean(sys), SingularDrift);
    EXPECT_THROW(initial_field_covariance(sys), SingularDrift);
}

TEST(Dynamics, RungeKuttaPathAgreesWithExactPropagation) {
    for (const auto& v : {asymmetric(), validate(single_mode_config(0.5, 1.0, 0.9, 1.0, 5.0))}) {
        const auto sys = build_system(v, QubitState::Ground);
        const auto a = propagate_to(sys, v.tau());
        const auto b = propagate_rk4(sys, v.tau());
        EXPECT_NEAR(a.record_mean(), b.record_mean(), 1e-8 * (1.0 + std::abs(a.record_mean())));
        EXPECT_NEAR(a.record_variance(), b.record_variance(), 1e-8 * (1.0 + a.record_variance()));
    }
}

TEST(Dynamics, CoarseRungeKuttaStepIsRejected) {
    const auto v = asymmetric(1.5);
    EXPECT_THROW(propagate_rk4(build_system(v, QubitState::Ground), 3.0, 0.5), StepSizeRejected);
}

TEST(Dynamics, FiniteTurnOnApproachesPresqueezedLimit) {
    auto c = qmfs_config(0.5, 1.0, 1.0, 2.0);
    const double pre = measurement_stats(validate(c)).noise_ground;
    c.source.t0 = -40.0;
    EXPECT_NEAR(measurement_stats(validate(c)).noise_ground, pre, 1e-9);
    c.source.t0 = 0.0;
    const double cold = measurement_stats(validate(c)).noise_ground;
    EXPECT_GT(cold, pre);
}

TEST(Dynamics, StationaryNoiseMatchesFrequencyDomainOracle) {
    // Coarse quadrature oracle; agreement limited by the frequency grid.
    for (double theta : {0.0, 0.5, std::numbers::pi / 2}) {
        const double r = 0.6, tau = 4.0, chi = 0.5;
        const auto v = validate(single_mode_config(chi, 1.0, r, theta, tau));
        const Mat cov = broadband_single_mode(r, theta).covariance_of_white_inputs;
        for (auto s : {QubitState::Ground, QubitState::Excited}) {
            const double engine = propagate_to(build_system(v, s), tau).record_variance();
            const double ref = oracle::stationary_record_noise(1.0, chi, sigma_z(s), cov(0, 0), cov(0, 1), cov(1, 1), tau);
            EXPECT_NEAR(engine, ref, 2e-3 * ref) << theta;
        }
    }
}

TEST(Transfer, LeakageVanishesForSymmetricQmfs) {
    const auto sym = build_system(validate(qmfs_config(0.5, 1.0, 1.0, 1.0)), QubitState::Ground);
    EXPECT_LT(antisqueezed_leakage(output_zero_frequency_transfer(sym)), 1e-14);
    const auto asym = build_system(validate(qmfs_config(0.5, 1.0, 1.0, 1.0, 1.0, 0.1, 0.0)), QubitState::Ground);
    EXPECT_GT(antisqueezed_leakage(output_zero_frequency_transfer(asym)), 1e-3);
}
