#pragma once

// Dispersive shifts of a transmon coupled to readout resonators, from exact
// diagonalisation of the charge-basis transmon and of the transmon-resonator
// Hamiltonian. Energies are in frequency units (h = 1), GHz by convention.

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qmfs/error.hpp"

namespace qmfs {

struct ResonatorSpec {
    double omega = 7.6;
    /// Qubit-resonator coupling, normalised to the 0-1 charge matrix element.
    double g = 0.008;
    int photon_cutoff = 5;
};

struct TransmonSpec {
    double E_J = 25.0;
    double E_C = 0.3;
    double n_g = 0.0;
    /// Charge states n = -charge_cutoff ... charge_cutoff.
    int charge_cutoff = 20;
    /// Transmon eigenstates kept in the joint diagonalisation.
    int levels = 6;
    std::vector<ResonatorSpec> resonators;
};

/// Transmon and resonators of the reference two-resonator device
/// (E_J = 25 GHz, 7.6 and 7.9 GHz resonators, 8 and 15 MHz couplings).
inline TransmonSpec reference_device(double E_C) {
    TransmonSpec s;
    s.E_J = 25.0;
    s.E_C = E_C;
    s.resonators = {ResonatorSpec{7.6, 0.008, 5}, ResonatorSpec{7.9, 0.015, 5}};
    return s;
}

struct TransmonEigen {
    Eigen::VectorXd energies;
    /// Charge operator in the eigenbasis (levels x levels).
    Eigen::MatrixXd charge;
};

namespace detail {

inline TransmonEigen diagonalize_transmon(double E_J, double E_C, double n_g, int cutoff, int levels) {
    const int dim = 2 * cutoff + 1;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd n(dim);
    for (int i = 0; i < dim; ++i) {
        n(i) = i - cutoff;
        H(i, i) = 4.0 * E_C * (n(i) - n_g) * (n(i) - n_g);
        if (i + 1 < dim) H(i, i + 1) = H(i + 1, i) = -0.5 * E_J;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    levels = std::min(levels, dim);
    const Eigen::MatrixXd V = es.eigenvectors().leftCols(levels);
    TransmonEigen out;
    out.energies = es.eigenvalues().head(levels);
    out.charge = V.transpose() * n.asDiagonal() * V;
    return out;
}

}  // namespace detail

/// Lowest `count` eigenvalues of 4 E_C (n - n_g)^2 - E_J cos(phi), ascending.
/// Throws CutoffTooSmall if enlarging the charge basis by 5 moves any of them
/// by more than 1e-9 (relative to max(1, |E|)).
inline Eigen::VectorXd transmon_levels(const TransmonSpec& spec, int count = -1) {
    if (!(spec.E_J >= 0.0 && spec.E_C > 0.0)) throw Error("transmon energies must satisfy E_J >= 0, E_C > 0");
    if (count < 0) count = spec.levels;
    const auto a = detail::diagonalize_transmon(spec.E_J, spec.E_C, spec.n_g, spec.charge_cutoff, count);
    const auto b = detail::diagonalize_transmon(spec.E_J, spec.E_C, spec.n_g, spec.charge_cutoff + 5, count);
    for (int i = 0; i < a.energies.size(); ++i)
        if (std::abs(a.energies(i) - b.energies(i)) > 1e-9 * std::max(1.0, std::abs(b.energies(i))))
            throw CutoffTooSmall("charge cutoff " + std::to_string(spec.charge_cutoff) + " not converged for level "
                                 + std::to_string(i));
    return a.energies;
}

/// Qubit frequency E_1 - E_0.
inline double qubit_frequency(const TransmonSpec& spec) {
    const auto e = transmon_levels(spec, 2);
    return e(1) - e(0);
}

/// chi_j = [E(1,1) - E(1,0) - E(0,1) + E(0,0)] / 2, where E(q, n) is the
/// dressed energy whose eigenvector overlaps most with bare |q, n>. The
/// transmon couples to resonator j through g_j n (a + a^dagger), with n
/// rescaled so that |<0|n|1>| = 1.
inline double dispersive_shift(const TransmonSpec& spec, std::size_t resonator_index) {
    const auto& res = spec.resonators.at(resonator_index);
    if (res.g == 0.0) return 0.0;
    transmon_levels(spec);
    const auto t = detail::diagonalize_transmon(spec.E_J, spec.E_C, spec.n_g, spec.charge_cutoff, spec.levels);
    const int L = static_cast<int>(t.energies.size());
    const int P = res.photon_cutoff + 1;
    const double n01 = std::abs(t.charge(0, 1));
    const double coupling = res.g / n01;

    const int dim = L * P;
    auto idx = [P](int q, int k) { return q * P + k; };
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
    for (int q = 0; q < L; ++q)
        for (int k = 0; k < P; ++k) {
            H(idx(q, k), idx(q, k)) = (t.energies(q) - t.energies(0)) + res.omega * k;
            for (int p = 0; p < L; ++p) {
                if (k + 1 < P) {
                    const double v = coupling * t.charge(q, p) * std::sqrt(static_cast<double>(k + 1));
                    H(idx(q, k + 1), idx(p, k)) += v;
                    H(idx(p, k), idx(q, k + 1)) += v;
                }
            }
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);

    auto dressed = [&](int q, int k) {
        const Eigen::VectorXd overlap = es.eigenvectors().row(idx(q, k)).cwiseAbs2();
        Eigen::Index best = 0;
        const double w = overlap.maxCoeff(&best);
        if (w < 0.5)
            throw StateIdentificationAmbiguous("bare state |" + std::to_string(q) + "," + std::to_string(k)
                                               + "> has maximal overlap " + std::to_string(w));
        return es.eigenvalues()(best);
    };
    return 0.5 * (dressed(1, 1) - dressed(1, 0) - dressed(0, 1) + dressed(0, 0));
}

/// Second-order two-level estimate -g^2 E_C / (Delta (Delta - E_C)),
/// Delta = omega_q - omega_r.
inline double dispersive_shift_perturbative(double g, double delta, double E_C) {
    return -g * g * E_C / (delta * (delta - E_C));
}

struct DispersiveSample {
    double E_C = 0.0;
    double chi_1 = 0.0;
    double chi_2 = 0.0;
    bool identified = true;
};

inline DispersiveSample dispersive_pair(TransmonSpec spec, double E_C) {
    spec.E_C = E_C;
    DispersiveSample s{E_C, 0.0, 0.0, true};
    try {
        s.chi_1 = dispersive_shift(spec, 0);
        s.chi_2 = dispersive_shift(spec, 1);
    } catch (const StateIdentificationAmbiguous&) {
        s.identified = false;
        s.chi_1 = s.chi_2 = std::nan("");
    }
    return s;
}

/// Dispersive shifts over an E_C grid (inclusive endpoints).
inline std::vector<DispersiveSample> sweep_charging_energy(const TransmonSpec& spec, double lo, double hi, int points) {
    std::vector<DispersiveSample> out;
    out.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double ec = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
        out.push_back(dispersive_pair(spec, ec));
    }
    return out;
}

enum class CouplingRegime {
    /// Delta < 0: qubit below the resonator.
    DispersiveBelow,
    /// 0 < Delta < E_C: resonator between the 0-1 and 1-2 transitions.
    Straddling,
    /// Delta > E_C: qubit above the resonator.
    DispersiveAbove,
};

inline CouplingRegime classify_regime(double delta, double E_C) {
    if (delta < 0.0) return CouplingRegime::DispersiveBelow;
    return delta < E_C ? CouplingRegime::Straddling : CouplingRegime::DispersiveAbove;
}

struct EqualOppositePoint {
    double E_C = 0.0;
    double chi_1 = 0.0;
    double chi_2 = 0.0;
    /// omega_q - omega_r for each resonator.
    double delta_1 = 0.0;
    double delta_2 = 0.0;
    CouplingRegime regime_1 = CouplingRegime::DispersiveBelow;
    CouplingRegime regime_2 = CouplingRegime::DispersiveBelow;

    /// One resonator straddling, the other dispersive with the qubit above.
    bool straddling_pair() const {
        return (regime_1 == CouplingRegime::Straddling && regime_2 == CouplingRegime::DispersiveAbove)
               || (regime_2 == CouplingRegime::Straddling && regime_1 == CouplingRegime::DispersiveAbove);
    }
};

/// Every E_C in [lo, hi] where chi_1 = -chi_2 with both shifts nonzero. Sign
/// changes of chi_1 + chi_2 across poles (level crossings) are rejected.
inline std::vector<EqualOppositePoint> find_equal_opposite_all(const TransmonSpec& spec, double lo, double hi,
                                                               int points = 401, double tol = 1e-10) {
    const auto grid = sweep_charging_energy(spec, lo, hi, points);
    auto f = [&](double ec) {
        const auto s = dispersive_pair(spec, ec);
        return s.identified ? s.chi_1 + s.chi_2 : std::nan("");
    };
    std::vector<EqualOppositePoint> roots;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const auto& a = grid[i];
        const auto& b = grid[i + 1];
        if (!a.identified || !b.identified) continue;
        const double fa = a.chi_1 + a.chi_2, fb = b.chi_1 + b.chi_2;
        if (!(fa * fb < 0.0)) continue;
        double x0 = a.E_C, x1 = b.E_C, f0 = fa;
        bool ok = true;
        while (x1 - x0 > tol) {
            const double xm = 0.5 * (x0 + x1);
            const double fm = f(xm);
            if (std::isnan(fm)) {
                ok = false;
                break;
            }
            if (f0 * fm <= 0.0) {
                x1 = xm;
            } else {
                x0 = xm;
                f0 = fm;
            }
        }
        if (!ok) continue;
        const double ec = 0.5 * (x0 + x1);
        const auto s = dispersive_pair(spec, ec);
        const double scale = std::max(std::abs(s.chi_1), std::abs(s.chi_2));
        if (!s.identified || !(scale > 0.0) || std::abs(s.chi_1 + s.chi_2) > 1e-6 * scale) continue;
        auto at = spec;
        at.E_C = ec;
        const double wq = qubit_frequency(at);
        EqualOppositePoint p{ec, s.chi_1, s.chi_2, wq - spec.resonators.at(0).omega,
                             wq - spec.resonators.at(1).omega};
        p.regime_1 = classify_regime(p.delta_1, ec);
        p.regime_2 = classify_regime(p.delta_2, ec);
        roots.push_back(p);
    }
    return roots;
}

/// First equal-and-opposite point with one straddling resonator and one
/// dispersive resonator below the qubit.
inline std::optional<EqualOppositePoint> find_equal_opposite(const TransmonSpec& spec, double lo, double hi,
                                                             int points = 401) {
    for (const auto& p : find_equal_opposite_all(spec, lo, hi, points))
        if (p.straddling_pair()) return p;
    return std::nullopt;
}

}  // namespace qmfs
