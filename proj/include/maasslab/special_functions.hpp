#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "maasslab/errors.hpp"
#include "maasslab/quadrature.hpp"

namespace maass {

using Complex = std::complex<double>;

namespace detail {

// B_{2k} / (2k (2k-1)), the Stirling-series coefficients for log Gamma.
inline constexpr double kStirlingCoeff[10] = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0};

// Stirling asymptotic series; needs |z| reasonably large and Re z > 0.
inline Complex log_gamma_stirling(Complex z) {
    const double half_log_two_pi = 0.91893853320467274178;
    Complex lg = (z - 0.5) * std::log(z) - z + half_log_two_pi;
    const Complex z2 = z * z;
    Complex zp = z;
    for (double c : kStirlingCoeff) {
        lg += c / zp;
        zp *= z2;
    }
    return lg;
}

// log(sin(pi z)) with a branch consistent mod 2 pi i, safe for large |Im z|.
inline Complex log_sin_pi(Complex z) {
    const double pi = 3.14159265358979323846;
    if (std::abs(z.imag()) < 24.0) return std::log(std::sin(pi * z));
    if (z.imag() > 0) {
        // sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 pi i z})
        const Complex i(0.0, 1.0);
        return -i * pi * z + Complex(-std::log(2.0), pi / 2) +
               std::log(1.0 - std::exp(2.0 * i * pi * z));
    }
    return std::conj(log_sin_pi(std::conj(z)));
}

}  // namespace detail

// Principal-branch log Gamma (exact up to multiples of 2 pi i after
// reflection), via upward recurrence into the Stirling regime.  Relative
// accuracy comfortably below 1e-12 for |z| <= 200.
inline Complex log_gamma(Complex z) {
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) {
        throw pole_error("log_gamma: pole at non-positive integer " +
                         std::to_string(z.real()));
    }
    if (z.real() < 0.5) {
        // reflection: log Gamma(z) = log pi - log sin(pi z) - log Gamma(1-z)
        const double log_pi = 1.1447298858494001741;
        return log_pi - detail::log_sin_pi(z) - log_gamma(1.0 - z);
    }
    Complex shift = 0.0;
    while (std::abs(z) < 25.0) {
        shift += std::log(z);
        z += 1.0;
    }
    return detail::log_gamma_stirling(z) - shift;
}

// ---------------------------------------------------------------------------
// Smooth cutoff phi: 1 on [0,1], 0 on [2,inf), C-infinity transition on [1,2].
// Transition h(t) = g(1-t) / (g(t) + g(1-t)) with g(t) = exp(-1/t).
// ---------------------------------------------------------------------------

struct CutoffProfile {
    std::string name = "exp-bump-v1";
};

namespace detail {
inline double bump_g(double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; }
}  // namespace detail

inline double cutoff(const CutoffProfile& profile, double x) {
    if (profile.name != "exp-bump-v1")
        throw error("cutoff: unknown profile " + profile.name);
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    const double t = x - 1.0;
    const double g = detail::bump_g(t);
    const double gr = detail::bump_g(1.0 - t);
    return gr / (g + gr);
}

// d/dx of the cutoff; zero outside (1,2).
inline double cutoff_derivative(const CutoffProfile& profile, double x) {
    if (profile.name != "exp-bump-v1")
        throw error("cutoff: unknown profile " + profile.name);
    if (x <= 1.0 || x >= 2.0) return 0.0;
    const double t = x - 1.0;
    const double g = detail::bump_g(t);
    const double gr = detail::bump_g(1.0 - t);
    const double s = g + gr;
    return -g * gr * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (s * s);
}

// Mellin transform of the cutoff.  For Re w > 0 this is the defining integral
// int_0^inf phi(x) x^{w-1} dx.  One integration by parts turns it into
//   phi~(w) = -(1/w) int_1^2 phi'(x) x^w dx,
// which is the meromorphic continuation to all w != 0 (simple pole at w = 0);
// the AFE contour needs it at Re w < 0, and this form avoids the cancellation
// between the pole part and the bump tail at large |Im w|.
inline Complex mellin_cutoff(const CutoffProfile& profile, Complex w,
                             double abs_tol = 1e-13) {
    if (w == Complex(0.0, 0.0)) throw pole_error("mellin_cutoff: pole at w = 0");
    auto integrand = [&](double x) -> Complex {
        return cutoff_derivative(profile, x) * std::exp(w * std::log(x));
    };
    // seed enough panels that the x^{i Im w} oscillation is resolved
    const int initial = 1 + static_cast<int>(std::abs(w.imag()) / 6.0);
    auto tail = integrate_complex(integrand, 1.0, 2.0, abs_tol, 1 << 14, initial);
    return -tail.value / w;
}

// ---------------------------------------------------------------------------
// Riemann zeta by Euler-Maclaurin.  Reference oracle for the degenerate
// Euler-product fixtures; accuracy well below 1e-10 on 0.4 <= Re s <= 3,
// |Im s| <= 100 (and fine for real s > 1 generally).
// ---------------------------------------------------------------------------

inline Complex zeta_reference(Complex s, int terms = 0) {
    if (s == Complex(1.0, 0.0)) throw pole_error("zeta: pole at s = 1");
    // B_{2k} for k = 1..12
    static const double b2k[12] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30,
                                   5.0 / 66, -691.0 / 2730, 7.0 / 6, -3617.0 / 510,
                                   43867.0 / 798, -174611.0 / 330, 854513.0 / 138,
                                   -236364091.0 / 2730};
    const int M = terms > 0 ? terms : std::max(18, static_cast<int>(std::ceil(
                                          0.7 * std::abs(s.imag()) + 14)));
    Complex sum = 0.0;
    for (int n = 1; n < M; ++n) sum += std::exp(-s * std::log(static_cast<double>(n)));
    const double logM = std::log(static_cast<double>(M));
    const Complex Mms = std::exp(-s * logM);  // M^{-s}
    sum += Mms * static_cast<double>(M) / (s - 1.0);
    sum += 0.5 * Mms;
    // correction sum_{k>=1} B_{2k}/(2k)! * (s)(s+1)...(s+2k-2) * M^{1-s-2k}
    Complex poch = s;                    // rising product up to s+2k-2
    Complex mpow = Mms / static_cast<double>(M);  // M^{-s-1}
    double fact = 2.0;                   // (2k)!
    for (int k = 1; k <= 12; ++k) {
        const Complex term = b2k[k - 1] / fact * poch * mpow;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        // advance to k+1
        poch *= (s + Complex(2.0 * k - 1.0)) * (s + Complex(2.0 * k));
        mpow /= static_cast<double>(M) * static_cast<double>(M);
        fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
    }
    return sum;
}

}  // namespace maass
