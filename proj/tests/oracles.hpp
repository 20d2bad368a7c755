#pragma once

// Reference computations that share no code with the library: complex-number
// closed forms for single-cavity means and a frequency-domain quadrature for
// the stationary record noise.

#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

using cd = std::complex<double>;

// Integrated record signal sqrt(kappa) * int_0^tau <Y_out> dt for one cavity
// driven from empty at t = 0 with input amplitude <X_in> = x_in.
inline double coherent_signal(double kappa, double chi, double sigma, double x_in, double tau) {
    const cd lambda(0.5 * kappa, chi * sigma);
    const cd alpha_in = 0.5 * x_in;
    const cd integral = std::sqrt(kappa) * alpha_in / lambda * (tau - (1.0 - std::exp(-lambda * tau)) / lambda);
    // <Y> = 2 Im a; the input carries no Y displacement.
    return std::sqrt(kappa) * std::sqrt(kappa) * 2.0 * integral.imag();
}

// Stationary single-cavity output Y spectrum for input covariance
// [[vxx, vxy], [vxy, vyy]] (delta-normalised), at angular frequency w.
inline double output_y_spectrum(double kappa, double chi, double sigma, double vxx, double vxy, double vyy,
                                double w) {
    // Quadrature drift A = [[-k/2, c], [-c, -k/2]] with c = chi sigma.
    // x(w) = (-i w - A)^{-1} sqrt(k) u(w); out = sqrt(k) x - u.
    const double c = chi * sigma;
    const cd a11 = cd(0.5 * kappa, -w), a12 = -c, a21 = c, a22 = cd(0.5 * kappa, -w);
    const cd det = a11 * a22 - a12 * a21;
    // Inverse of [[a11, a12], [a21, a22]].
    const cd i11 = a22 / det, i12 = -a12 / det, i21 = -a21 / det, i22 = a11 / det;
    const cd h21 = kappa * i21, h22 = kappa * i22 - 1.0;
    const cd s = h21 * std::conj(h21) * vxx + (h21 * std::conj(h22) + h22 * std::conj(h21)) * vxy
                 + h22 * std::conj(h22) * vyy;
    return s.real();
}

// <M_N^2> = kappa int dw/2pi S_yy(w) 4 sin^2(w tau/2) / w^2 for a stationary
// (presqueezed) single cavity, by midpoint quadrature up to |w| = w_max plus
// the white tail.
inline double stationary_record_noise(double kappa, double chi, double sigma, double vxx, double vxy, double vyy,
                                      double tau, double w_max = 2000.0, double dw = 0.002) {
    double sum = 0.0;
    const int n = static_cast<int>(w_max / dw);
    for (int i = 0; i < n; ++i) {
        const double w = (i + 0.5) * dw;
        const double s = 0.5 * (output_y_spectrum(kappa, chi, sigma, vxx, vxy, vyy, w)
                                + output_y_spectrum(kappa, chi, sigma, vxx, vxy, vyy, -w));
        const double k = 2.0 * std::sin(0.5 * w * tau) / w;
        sum += 2.0 * s * k * k * dw;
    }
    // Beyond w_max the output is the bare input reflection: S_yy -> vyy.
    sum += vyy * 4.0 / w_max;
    return kappa * sum / (2.0 * std::numbers::pi);
}

}  // namespace oracle
