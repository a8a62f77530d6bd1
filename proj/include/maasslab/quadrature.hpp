#pragma once

#include <cmath>
#include <complex>
#include <queue>
#include <vector>

#include "maasslab/errors.hpp"

namespace maass {

namespace detail {

// Gauss(7)-Kronrod(15) nodes and weights on [-1, 1] (QUADPACK dqk15 constants).
inline constexpr double kK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kK15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F, typename V>
void gk15(const F& f, double a, double b, V& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    V fc = f(c);
    V gauss = kG7Weights[3] * fc;
    kronrod = kK15Weights[7] * fc;
    for (int i = 0; i < 7; ++i) {
        V lo = f(c - h * kK15Nodes[i]);
        V hi = f(c + h * kK15Nodes[i]);
        kronrod += kK15Weights[i] * (lo + hi);
        if (i % 2 == 1) gauss += kG7Weights[i / 2] * (lo + hi);
    }
    kronrod *= h;
    gauss *= h;
    err = std::abs(kronrod - gauss);
    // sharpen the raw difference the usual way
    err = std::pow(200.0 * err, 1.5);
    double scale = std::abs(kronrod);
    if (scale > 0 && err > scale) err = scale;
}

}  // namespace detail

struct QuadratureResult {
    double value = 0;
    double error = 0;
    int panels = 0;
};

struct ComplexQuadratureResult {
    std::complex<double> value;
    double error = 0;
    int panels = 0;
};

// Adaptive Gauss-Kronrod on [a,b]: split the worst panel until the summed
// error estimate is below abs_tol.  Throws quadrature_error if the panel
// budget runs out first.  initial_panels seeds the heap with a uniform split,
// which oscillatory integrands need so the error estimator sees the
// oscillation at all.
template <typename V, typename F>
std::pair<V, double> integrate_adaptive_impl(const F& f, double a, double b,
                                             double abs_tol, int max_panels,
                                             int initial_panels = 1) {
    struct Panel {
        double a, b, err;
        V val;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    std::priority_queue<Panel> heap;
    initial_panels = std::max(1, std::min(initial_panels, max_panels));
    double total_err = 0.0;
    for (int i = 0; i < initial_panels; ++i) {
        const double pa = a + (b - a) * i / initial_panels;
        const double pb = a + (b - a) * (i + 1) / initial_panels;
        V v0;
        double e0;
        detail::gk15(f, pa, pb, v0, e0);
        heap.push({pa, pb, e0, v0});
        total_err += e0;
    }
    int panels = initial_panels;
    while (total_err > abs_tol) {
        if (panels >= max_panels) {
            throw quadrature_error("adaptive quadrature: tolerance " +
                                   std::to_string(abs_tol) + " unreachable within " +
                                   std::to_string(max_panels) + " panels");
        }
        Panel worst = heap.top();
        heap.pop();
        total_err -= worst.err;
        const double mid = 0.5 * (worst.a + worst.b);
        V vl, vr;
        double el, er;
        detail::gk15(f, worst.a, mid, vl, el);
        detail::gk15(f, mid, worst.b, vr, er);
        heap.push({worst.a, mid, el, vl});
        heap.push({mid, worst.b, er, vr});
        total_err += el + er;
        ++panels;
        // stop refining below roundoff
        if (total_err < 1e-300) break;
    }
    V sum{};
    while (!heap.empty()) {
        sum += heap.top().val;
        heap.pop();
    }
    return {sum, total_err};
}

template <typename F>
QuadratureResult integrate(const F& f, double a, double b, double abs_tol = 1e-12,
                           int max_panels = 1 << 14, int initial_panels = 1) {
    auto [v, e] =
        integrate_adaptive_impl<double>(f, a, b, abs_tol, max_panels, initial_panels);
    return {v, e, 0};
}

template <typename F>
ComplexQuadratureResult integrate_complex(const F& f, double a, double b,
                                          double abs_tol = 1e-12,
                                          int max_panels = 1 << 14,
                                          int initial_panels = 1) {
    auto [v, e] = integrate_adaptive_impl<std::complex<double>>(f, a, b, abs_tol,
                                                                max_panels,
                                                                initial_panels);
    return {v, e, 0};
}

}  // namespace maass
