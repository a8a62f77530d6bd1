#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "maasslab/errors.hpp"
#include "maasslab/hecke.hpp"
#include "maasslab/quadrature.hpp"
#include "maasslab/rng.hpp"

namespace maass {

// Density of the per-prime equidistribution measure mu_p on [-2,2]:
//   (1/2pi) (1+p) sqrt(4-x^2) / (n(p)^2 - x^2),
// zero outside [-2,2].  Tends to the semicircle density as p grows.
inline double sarnak_density(std::uint64_t p, double x) {
    if (std::abs(x) >= 2.0) return 0.0;
    const double np = hecke_norm(p);
    const double num = (1.0 + static_cast<double>(p)) * std::sqrt(4.0 - x * x);
    return num / (2.0 * 3.14159265358979323846 * (np * np - x * x));
}

namespace detail {

// mu_p mass of [a,b] with the substitution x = 2 sin(theta), which removes
// the sqrt endpoint behaviour and leaves an analytic integrand.
inline double sarnak_mass_theta(std::uint64_t p, double a, double b) {
    a = std::clamp(a, -2.0, 2.0);
    b = std::clamp(b, -2.0, 2.0);
    if (!(a < b)) return 0.0;
    const double np = hecke_norm(p);
    const double nsq = np * np;
    const double c = (1.0 + static_cast<double>(p)) / (2.0 * 3.14159265358979323846);
    auto f = [&](double th) {
        const double s = 2.0 * std::sin(th);
        const double cth = std::cos(th);
        return c * 4.0 * cth * cth / (nsq - s * s);
    };
    const double ta = std::asin(a / 2.0);
    const double tb = std::asin(b / 2.0);
    return integrate(f, ta, tb, 1e-13).value;
}

// Non-adaptive single-panel version for sub-table-cell intervals, where one
// Kronrod panel of the analytic theta-integrand is already exact.
inline double sarnak_mass_cell(std::uint64_t p, double a, double b) {
    if (!(a < b)) return 0.0;
    const double np = hecke_norm(p);
    const double nsq = np * np;
    const double c = (1.0 + static_cast<double>(p)) / (2.0 * 3.14159265358979323846);
    auto f = [&](double th) {
        const double s = 2.0 * std::sin(th);
        const double cth = std::cos(th);
        return c * 4.0 * cth * cth / (nsq - s * s);
    };
    double v, e;
    gk15(f, std::asin(a / 2.0), std::asin(b / 2.0), v, e);
    return v;
}

}  // namespace detail

// The measure mu_p with a cached CDF table (Chebyshev-clustered nodes, so the
// sqrt endpoints are well resolved) and inverse-CDF sampling.
class SarnakMeasure {
  public:
    explicit SarnakMeasure(std::uint64_t p, int table_size = 4096) : p_(p) {
        xs_.resize(table_size);
        cdf_.resize(table_size);
        const double pi = 3.14159265358979323846;
        for (int i = 0; i < table_size; ++i)
            xs_[i] = -2.0 * std::cos(pi * i / (table_size - 1));
        xs_.front() = -2.0;
        xs_.back() = 2.0;
        cdf_[0] = 0.0;
        for (int i = 1; i < table_size; ++i)
            cdf_[i] = cdf_[i - 1] + detail::sarnak_mass_theta(p_, xs_[i - 1], xs_[i]);
    }

    std::uint64_t p() const { return p_; }

    double density(double x) const { return sarnak_density(p_, x); }

    // int_{-2}^{2} d mu_p, by quadrature; equals 1 to ~1e-14.
    double total_mass() const { return detail::sarnak_mass_theta(p_, -2.0, 2.0); }

    // mu_p([a,b]) with [a,b] clipped to the support.
    double interval_mass(double a, double b) const {
        if (a > b) throw error("interval_mass: a > b");
        return detail::sarnak_mass_theta(p_, a, b);
    }

    // CDF from the table plus an exact single-panel correction inside the
    // cell; strictly monotone in exact arithmetic.
    double cdf(double x) const {
        if (x <= -2.0) return 0.0;
        if (x >= 2.0) return cdf_.back();
        auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        return cdf_[i] + detail::sarnak_mass_cell(p_, xs_[i], x);
    }

    // Inverse CDF by monotone bisection to 1e-10.
    double quantile(double u) const {
        if (u < 0.0 || u > 1.0) throw error("quantile: u outside [0,1]");
        if (u <= 0.0) return -2.0;
        if (u >= cdf_.back()) return 2.0;
        // bracket from the table, then bisect within the cell
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
        const double cell_lo = xs_[i - 1];
        const double base = cdf_[i - 1];
        double lo = cell_lo;
        double hi = xs_[std::min(i, xs_.size() - 1)];
        while (hi - lo > 1e-10) {
            const double mid = 0.5 * (lo + hi);
            if (base + detail::sarnak_mass_cell(p_, cell_lo, mid) < u)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    // One draw distributed as mu_p, from a counter-based stream.
    double sample(RngCursor& rng) const { return quantile(rng.next_uniform()); }
    double sample_at(const CounterRng& rng, std::uint64_t index) const {
        return quantile(rng.uniform(index));
    }

    // Draw conditioned on x in [a,b] (restricted and renormalized).
    double sample_conditional(double a, double b, double u) const {
        const double fa = cdf(a);
        const double fb = cdf(b);
        if (!(fb > fa))
            throw error("sample_conditional: interval has zero mass");
        return quantile(fa + u * (fb - fa));
    }

  private:
    std::uint64_t p_;
    std::vector<double> xs_;
    std::vector<double> cdf_;
};

// Shared cache: building the CDF table is the expensive part.
class SarnakMeasureCache {
  public:
    const SarnakMeasure& at(std::uint64_t p) {
        auto it = measures_.find(p);
        if (it == measures_.end())
            it = measures_.emplace(p, SarnakMeasure(p)).first;
        return it->second;
    }

  private:
    std::map<std::uint64_t, SarnakMeasure> measures_;
};

// Per-prime boxes Omega_p = [omega_p - delta, omega_p + delta], intersected
// with the support [-2,2] of mu_p.  strict mode enforces the delta < 1e-3
// regime; relaxed mode allows desk-scale widths.
struct BoxFamily {
    double delta = 0.0;
    std::map<std::uint64_t, double> omega;

    BoxFamily(double delta_, std::map<std::uint64_t, double> omega_, bool strict = false)
        : delta(delta_), omega(std::move(omega_)) {
        if (!(delta > 0)) throw validation_error("BoxFamily: delta must be positive");
        if (strict && delta > 1e-3)
            throw validation_error("BoxFamily: strict mode requires delta <= 1e-3");
        for (auto& [p, w] : omega) {
            (void)p;
            if (std::abs(w) > 2.0)
                throw validation_error("BoxFamily: omega_p outside [-2,2]");
        }
    }

    std::pair<double, double> box(std::uint64_t p) const {
        auto it = omega.find(p);
        if (it == omega.end())
            throw missing_coordinate_error("BoxFamily: no omega for p = " +
                                           std::to_string(p));
        return {std::max(it->second - delta, -2.0), std::min(it->second + delta, 2.0)};
    }

    bool contains(std::uint64_t p, double lambda) const {
        auto [a, b] = box(p);
        return lambda >= a && lambda <= b;
    }
};

// Ensemble average (1/J) sum_j testfn(lambda_j(p) : p in primes);  testfn gets
// the coordinates in the order of `primes`.
inline double empirical_average(
    const std::vector<MaassFormData>& forms, const std::vector<std::uint64_t>& primes,
    const std::function<double(const std::vector<double>&)>& testfn) {
    if (forms.empty()) throw error("empirical_average: empty ensemble");
    std::vector<double> coords(primes.size());
    double sum = 0.0;
    for (const auto& f : forms) {
        for (std::size_t i = 0; i < primes.size(); ++i)
            coords[i] = f.lambda_p(primes[i]);
        sum += testfn(coords);
    }
    return sum / static_cast<double>(forms.size());
}

// Product-measure expectation of a tensor-product test function,
// prod_p int f_p d mu_p, each factor by quadrature.
inline double product_measure_integral(
    SarnakMeasureCache& cache, const std::vector<std::uint64_t>& primes,
    const std::vector<std::function<double(double)>>& factors) {
    if (primes.size() != factors.size())
        throw error("product_measure_integral: size mismatch");
    double prod = 1.0;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        const auto& mu = cache.at(primes[i]);
        auto f = [&](double x) { return factors[i](x) * mu.density(x); };
        prod *= integrate(f, -2.0, 2.0, 1e-11).value;
    }
    return prod;
}

// Kolmogorov-Smirnov distance of a sample to a reference CDF.
inline double ks_distance(std::vector<double> sample,
                          const std::function<double(double)>& cdf) {
    if (sample.empty()) throw error("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
    }
    return d;
}

}  // namespace maass
