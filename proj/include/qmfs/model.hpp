#pragma once

// Physical parameters of a dispersive readout experiment and their validation.
//
// Units: every rate is expressed in units of a reference decay rate (by
// convention cavity 1 has kappa = 1) and every time as kappa_ref * t.
// Quadratures follow a = (X + iY)/2, so vacuum has unit variance.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qmfs/error.hpp"

namespace qmfs {

enum class Protocol { Coherent, SingleModeSqueezed, TwoModeQMFS };
enum class ModeKind { SingleMode, TwoMode };
enum class LossPlacement { Detection, Input };

/// Ground couples with sigma_z = +1, excited with sigma_z = -1.
enum class QubitState { Ground, Excited };

constexpr double sigma_z(QubitState s) noexcept { return s == QubitState::Ground ? 1.0 : -1.0; }

inline constexpr double kBroadband = std::numeric_limits<double>::infinity();
inline constexpr double kPresqueezed = -std::numeric_limits<double>::infinity();

struct CavityParams {
    double kappa = 1.0;
    /// Signed dispersive shift; the two-cavity QMFS scheme uses chi_2 = -chi_1.
    double chi = 0.0;
    /// Coherent drive strength n0. Incident flux is n0*kappa/4 for a single
    /// cavity and n0*kappa_bar/8 per cavity for two cavities.
    double drive_flux = 0.0;
};

struct SqueezeSource {
    double r = 0.0;
    /// Squeeze angle. For a single mode the amplified axis sits at -theta
    /// from X, so theta = pi/2 squeezes the input X quadrature. Ignored for
    /// two-mode sources, which always squeeze (X_-, Y_+).
    double theta = 0.0;
    /// Lorentzian squeezing bandwidth; kBroadband for white squeezing.
    double bandwidth = kBroadband;
    /// Squeezing turn-on time; kPresqueezed for the kappa*t0 -> -inf limit.
    double t0 = kPresqueezed;
    ModeKind mode_kind = ModeKind::SingleMode;

    bool broadband() const noexcept { return std::isinf(bandwidth); }
    bool presqueezed() const noexcept { return std::isinf(t0); }
};

struct LossModel {
    double eta = 1.0;
    LossPlacement placement = LossPlacement::Detection;
};

struct ReadoutConfig {
    Protocol protocol = Protocol::Coherent;
    std::vector<CavityParams> cavities{CavityParams{}};
    SqueezeSource source{};
    LossModel loss{};
    double tau = 1.0;
    QubitState qubit_state = QubitState::Ground;
};

struct PhotonBudget {
    double N = 0.0;
    double N_s = 0.0;
    double N_d = 0.0;
    double n_bar = 0.0;
};

/// Output rotation angle 2*atan(2*chi/kappa), in (-pi, pi).
inline double qubit_rotation_angle(double chi, double kappa) {
    return 2.0 * std::atan(2.0 * chi / kappa);
}

/// A config that passed validation, together with derived quantities.
class ValidatedConfig {
public:
    const ReadoutConfig& config() const noexcept { return config_; }
    ReadoutConfig into_config() const { return config_; }

    Protocol protocol() const noexcept { return config_.protocol; }
    std::size_t cavity_count() const noexcept { return config_.cavities.size(); }
    const CavityParams& cavity(std::size_t j) const { return config_.cavities.at(j); }
    const SqueezeSource& source() const noexcept { return config_.source; }
    const LossModel& loss() const noexcept { return config_.loss; }
    double tau() const noexcept { return config_.tau; }

    double phi_qb(std::size_t j) const { return phi_.at(j); }

    /// Rate that normalises the integrated record: kappa for one cavity,
    /// (kappa_1 + kappa_2)/2 for two.
    double kappa_ref() const noexcept { return kappa_bar_; }
    double kappa_bar() const noexcept { return kappa_bar_; }
    double delta_kappa() const noexcept { return delta_kappa_; }
    /// chi_{1,2} = delta_chi +/- chi_bar.
    double chi_bar() const noexcept { return chi_bar_; }
    double delta_chi() const noexcept { return delta_chi_; }

    /// Steady-state intracavity photons and input photons for broadband
    /// symmetric squeezing.
    PhotonBudget photon_budget() const;

    /// Same experiment with a different integration time.
    ValidatedConfig with_tau(double tau) const;

    friend ValidatedConfig validate(const ReadoutConfig& config);

private:
    ValidatedConfig() = default;

    ReadoutConfig config_;
    std::vector<double> phi_;
    double kappa_bar_ = 1.0;
    double delta_kappa_ = 0.0;
    double chi_bar_ = 0.0;
    double delta_chi_ = 0.0;
};

namespace detail {

inline void require_finite(double v, const std::string& field) {
    if (!std::isfinite(v)) throw ConfigError(ConfigErrorKind::NonFinite, field, "value must be finite");
}

}  // namespace detail

inline ValidatedConfig validate(const ReadoutConfig& config) {
    using detail::require_finite;
    const auto n = config.cavities.size();
    if (n != 1 && n != 2)
        throw ConfigError(ConfigErrorKind::ProtocolCavityMismatch, "cavities",
                          "expected one or two cavities, got " + std::to_string(n));
    if (config.protocol == Protocol::SingleModeSqueezed && n != 1)
        throw ConfigError(ConfigErrorKind::ProtocolCavityMismatch, "cavities",
                          "single-mode squeezing needs exactly one cavity");
    if (config.protocol == Protocol::TwoModeQMFS && n != 2)
        throw ConfigError(ConfigErrorKind::ProtocolCavityMismatch, "cavities",
                          "two-mode QMFS readout needs exactly two cavities");
    const ModeKind expected_mode = n == 1 ? ModeKind::SingleMode : ModeKind::TwoMode;
    if (config.source.mode_kind != expected_mode)
        throw ConfigError(ConfigErrorKind::ProtocolCavityMismatch, "source.mode",
                          "squeezing mode kind does not match the cavity count");

    for (std::size_t j = 0; j < n; ++j) {
        const auto& c = config.cavities[j];
        const std::string prefix = "cavities[" + std::to_string(j) + "].";
        require_finite(c.kappa, prefix + "kappa_rate");
        require_finite(c.chi, prefix + "chi_rate");
        require_finite(c.drive_flux, prefix + "n0");
        if (!(c.kappa > 0.0))
            throw ConfigError(ConfigErrorKind::NegativeRate, prefix + "kappa_rate", "kappa must be > 0");
        if (c.drive_flux < 0.0)
            throw ConfigError(ConfigErrorKind::NegativeRate, prefix + "n0", "drive flux must be >= 0");
    }

    const auto& src = config.source;
    require_finite(src.r, "source.r");
    require_finite(src.theta, "source.theta_rad");
    if (src.r < 0.0) throw ConfigError(ConfigErrorKind::InvalidSqueezing, "source.r", "r must be >= 0");
    if (config.protocol == Protocol::Coherent && src.r != 0.0)
        throw ConfigError(ConfigErrorKind::InvalidSqueezing, "source.r", "coherent protocol requires r = 0");
    if (std::isnan(src.bandwidth) || src.bandwidth == -kBroadband)
        throw ConfigError(ConfigErrorKind::NonFinite, "source.bandwidth_rate", "bandwidth must be a number");
    if (!(src.bandwidth > 0.0))
        throw ConfigError(ConfigErrorKind::NegativeRate, "source.bandwidth_rate", "bandwidth must be > 0");
    if (std::isnan(src.t0) || src.t0 == kBroadband)
        throw ConfigError(ConfigErrorKind::NonFinite, "source.t0_kappa", "t0 must be a number");
    if (src.t0 > 0.0) throw ConfigError(ConfigErrorKind::InvalidTime, "source.t0_kappa", "t0 must be <= 0");

    if (std::isnan(config.loss.eta) || config.loss.eta < 0.0 || config.loss.eta > 1.0)
        throw ConfigError(ConfigErrorKind::EfficiencyOutOfRange, "loss.eta", "eta must lie in [0, 1]");

    require_finite(config.tau, "tau_kappa");
    if (!(config.tau > 0.0)) throw ConfigError(ConfigErrorKind::InvalidTime, "tau_kappa", "tau must be > 0");

    ValidatedConfig v;
    v.config_ = config;
    for (const auto& c : config.cavities) v.phi_.push_back(qubit_rotation_angle(c.chi, c.kappa));
    if (n == 1) {
        v.kappa_bar_ = config.cavities[0].kappa;
        v.chi_bar_ = config.cavities[0].chi;
    } else {
        const auto& c1 = config.cavities[0];
        const auto& c2 = config.cavities[1];
        v.kappa_bar_ = 0.5 * (c1.kappa + c2.kappa);
        v.delta_kappa_ = 0.5 * (c1.kappa - c2.kappa);
        v.chi_bar_ = 0.5 * (c1.chi - c2.chi);
        v.delta_chi_ = 0.5 * (c1.chi + c2.chi);
    }
    return v;
}

inline ValidatedConfig ValidatedConfig::with_tau(double tau) const {
    auto c = config_;
    c.tau = tau;
    return validate(c);
}

inline PhotonBudget ValidatedConfig::photon_budget() const {
    PhotonBudget b;
    const double sh2 = std::sinh(config_.source.r) * std::sinh(config_.source.r);
    const double modes = cavity_count() == 2 ? 2.0 : 1.0;
    b.N_s = modes * sh2;
    double n0_total = 0.0;
    double coherent = 0.0;
    for (std::size_t j = 0; j < cavity_count(); ++j) {
        const auto& c = config_.cavities[j];
        const double cos_half = std::cos(0.5 * phi_[j]);
        if (cavity_count() == 1) {
            n0_total = c.drive_flux;
            coherent = c.drive_flux * cos_half * cos_half;
        } else {
            // Each cavity receives half of the total flux n0*kappa_bar/4.
            n0_total += 0.5 * c.drive_flux;
            coherent += 0.5 * c.drive_flux * (kappa_bar_ / c.kappa) * cos_half * cos_half;
        }
    }
    b.N_d = 0.25 * n0_total * kappa_bar_ * config_.tau;
    b.N = b.N_s + b.N_d;
    b.n_bar = coherent + modes * sh2;
    return b;
}

// Convenience builders used by the CLI, the optimizers and the tests.

inline ReadoutConfig coherent_config(double chi, double n0, double tau, double kappa = 1.0) {
    ReadoutConfig c;
    c.protocol = Protocol::Coherent;
    c.cavities = {CavityParams{kappa, chi, n0}};
    c.tau = tau;
    return c;
}

inline ReadoutConfig single_mode_config(double chi, double n0, double r, double theta, double tau,
                                        double kappa = 1.0) {
    ReadoutConfig c = coherent_config(chi, n0, tau, kappa);
    c.protocol = Protocol::SingleModeSqueezed;
    c.source.r = r;
    c.source.theta = theta;
    return c;
}

/// Two cavities with chi_{1,2} = delta_chi +/- chi_bar and
/// kappa_{1,2} = kappa_bar +/- delta_kappa, both driven along X_-.
inline ReadoutConfig qmfs_config(double chi_bar, double n0, double r, double tau, double kappa_bar = 1.0,
                                 double delta_chi = 0.0, double delta_kappa = 0.0) {
    ReadoutConfig c;
    c.protocol = Protocol::TwoModeQMFS;
    c.cavities = {CavityParams{kappa_bar + delta_kappa, delta_chi + chi_bar, n0},
                  CavityParams{kappa_bar - delta_kappa, delta_chi - chi_bar, n0}};
    c.source.r = r;
    c.source.mode_kind = ModeKind::TwoMode;
    c.tau = tau;
    return c;
}

/// r such that e^{2r} equals the given power ratio.
inline double squeeze_r_from_power(double e2r) { return 0.5 * std::log(e2r); }

}  // namespace qmfs
