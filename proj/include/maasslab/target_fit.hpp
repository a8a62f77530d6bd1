#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "maasslab/errors.hpp"
#include "maasslab/hecke.hpp"
#include "maasslab/l_evaluator.hpp"
#include "maasslab/primes.hpp"
#include "maasslab/rng.hpp"
#include "maasslab/special_functions.hpp"

namespace maass {

// Admissible target f(s) = exp(P(s - 3/4)) with real polynomial P: f is
// holomorphic, non-vanishing, and real positive on K cap R by construction.
struct TargetSpec {
    std::vector<double> poly_coeffs;  // a_0 .. a_d
};

// g(s) = log f(s), the polynomial itself (Horner in s - 3/4).
inline Complex log_target(const TargetSpec& spec, Complex s) {
    const Complex z = s - DiscK::center;
    Complex acc = 0.0;
    for (auto it = spec.poly_coeffs.rbegin(); it != spec.poly_coeffs.rend(); ++it)
        acc = acc * z + *it;
    return acc;
}

inline Complex target_value(const TargetSpec& spec, Complex s) {
    return std::exp(log_target(spec, s));
}

// log(1 - w p^{-s} + p^{-2s}) as principal logs of the two Satake factors of
// x^2 - w x + 1; each factor stays in Re > 0 for Re s > 1/2, |w| <= 2.
inline Complex omega_log_factor(std::uint64_t p, double w, Complex s) {
    const auto ab = satake(p, w);
    const Complex ps = std::exp(-s * std::log(static_cast<double>(p)));
    return std::log(1.0 - ab.alpha * ps) + std::log(1.0 - ab.beta * ps);
}

inline Complex omega_log_sum(const std::map<std::uint64_t, double>& omega, Complex s) {
    Complex sum = 0.0;
    for (auto& [p, w] : omega) sum += omega_log_factor(p, w, s);
    return sum;
}

// Cutoff Y, centers omega_p for p <= Y, and the exactly re-evaluated sup-norm
// objective the fit achieved.
struct OmegaAssignment {
    double Y = 0.0;
    std::map<std::uint64_t, double> omega;
    double achieved_error = 0.0;
    bool converged = false;
};

// max over the boundary grid of |g(s) + sum_{p<=Y} log(1 - w_p p^{-s} + p^{-2s})|.
// By the maximum principle this is the sup over all of K up to grid resolution.
inline double fit_objective(const TargetSpec& spec, const OmegaAssignment& omega,
                            const DiscK& K) {
    double worst = 0.0;
    for (const Complex& s : K.boundary_grid()) {
        const Complex v = log_target(spec, s) + omega_log_sum(omega.omega, s);
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

// g_Z(s) = g(s) + sum_{p<=Z} log(1 + p^{-2s}).
inline Complex gz_transform(const TargetSpec& spec, int Z, Complex s) {
    if (!(s.real() > 0.5)) throw half_plane_error("gz_transform: requires Re s > 1/2");
    Complex sum = log_target(spec, s);
    for (std::uint64_t p : primes_up_to(static_cast<std::uint64_t>(std::max(Z, 0))))
        sum += std::log(1.0 + std::exp(-2.0 * s * std::log(static_cast<double>(p))));
    return sum;
}

// ---------------------------------------------------------------------------
// tail_bound(Z, theta) = 2 sum_{p>Z} sum_{m>=2} (4 p^{-(1/2+theta)})^m.
// Per-theta tables: exact per-prime contributions with checkpointed suffix
// sums over a sieved range, plus a prime-zeta closed form for the infinite
// remainder, so queries cost O(log).
// ---------------------------------------------------------------------------

namespace detail {

// Prime zeta P(u) = sum_p p^{-u} via the Moebius / log-zeta series; u > 1.
inline double prime_zeta(double u) {
    double sum = 0.0;
    for (int k = 1; k <= 256; ++k) {
        const double ku = k * u;
        if (ku > 64.0) break;
        const int mu = mobius(static_cast<std::uint64_t>(k));
        if (mu == 0) continue;
        const double lz = std::log(zeta_reference(Complex(ku, 0.0)).real());
        sum += mu * lz / k;
        if (std::abs(lz) < 1e-19) break;
    }
    return sum;
}

struct TailTable {
    double c;  // 1/2 + theta
    std::vector<std::uint64_t> primes;
    std::vector<double> suffix_checkpoint;  // every 64 primes
    double beyond_list;                     // sum of contributions past the list

    static double contribution(std::uint64_t p, double c) {
        const double q = 4.0 * std::pow(static_cast<double>(p), -c);
        return 2.0 * q * q / (1.0 - q);
    }

    explicit TailTable(double theta, std::uint64_t range) : c(0.5 + theta) {
        primes = primes_up_to(range);
        const std::size_t n = primes.size();
        suffix_checkpoint.assign(n / 64 + 2, 0.0);
        // remainder past the sieved range, by prime zeta with the listed
        // primes' contribution removed
        beyond_list = 0.0;
        double total = 1.0;
        for (int m = 2; m <= 200; ++m) {
            const double u = m * c;
            double listed = 0.0;
            if (u * std::log(static_cast<double>(primes.back())) < 45.0) {
                for (std::uint64_t p : primes) listed += std::pow(static_cast<double>(p), -u);
            } else {
                break;  // both P(u) and the listed sum are below 1e-19
            }
            const double term = 2.0 * std::pow(4.0, m) * (prime_zeta(u) - listed);
            beyond_list += term;
            total = std::max(total, beyond_list);
            if (std::abs(term) < 1e-18 * total && m > 4) break;
        }
        // checkpointed suffix sums, accumulated back to front
        double acc = beyond_list;
        for (std::size_t i = n; i-- > 0;) {
            acc += contribution(primes[i], c);
            if (i % 64 == 0) suffix_checkpoint[i / 64] = acc;
        }
    }

    // sum over primes > Z of the full per-prime contribution
    double query(double Z) const {
        auto it = std::upper_bound(primes.begin(), primes.end(),
                                   static_cast<std::uint64_t>(Z < 2 ? 1 : std::floor(Z)));
        std::size_t i = static_cast<std::size_t>(it - primes.begin());
        const std::size_t n = primes.size();
        if (i >= n) return beyond_list;
        const std::size_t cp = (i + 63) / 64;
        double acc = (cp * 64 < n) ? suffix_checkpoint[cp] : beyond_list;
        for (std::size_t j = i; j < std::min(cp * 64, n); ++j)
            acc += contribution(primes[j], c);
        return acc;
    }
};

inline std::shared_ptr<const TailTable> tail_table(double theta, double need_Z) {
    static std::mutex mutex;
    static std::map<double, std::shared_ptr<TailTable>> tables;
    static const std::uint64_t kMaxRange = 1ULL << 27;
    std::uint64_t range = 1ULL << 20;
    while (static_cast<double>(range) < 4.0 * need_Z && range < kMaxRange) range *= 2;
    if (static_cast<double>(range) < 2.0 * need_Z)
        throw budget_error("tail_bound: Z beyond the supported sieve range");
    std::lock_guard<std::mutex> lock(mutex);
    auto it = tables.find(theta);
    if (it == tables.end() || it->second->primes.back() < 2 * need_Z) {
        auto table = std::make_shared<TailTable>(theta, range);
        tables[theta] = table;
        return table;
    }
    return it->second;
}

}  // namespace detail

// The section-3.2 tail majorant.  Throws divergence_error when the smallest
// prime q > Z has 4 q^{-(1/2+theta)} >= 1.
inline double tail_bound(double Z, double theta) {
    const auto table = detail::tail_table(theta, std::max(Z, 16.0));
    auto it = std::upper_bound(table->primes.begin(), table->primes.end(),
                               static_cast<std::uint64_t>(Z < 0 ? 0 : std::floor(Z)));
    if (it == table->primes.end()) throw budget_error("tail_bound: Z beyond sieve");
    const double q = 4.0 * std::pow(static_cast<double>(*it), -(0.5 + theta));
    if (q >= 1.0)
        throw divergence_error("tail_bound: geometric series diverges at p = " +
                               std::to_string(*it) + " (4 p^{-(1/2+theta)} = " +
                               std::to_string(q) + " >= 1)");
    return table->query(Z);
}

// Smallest integer Z with tail_bound(Z, theta) < eps / 2.
inline int choose_Z(double theta, double eps) {
    if (!(eps > 0)) throw validation_error("choose_Z: eps must be positive");
    // find the smallest admissible prime cutoff by bisection on the prime list
    double hi_probe = 64.0;
    for (;;) {
        try {
            if (tail_bound(hi_probe, theta) < eps / 2.0) break;
        } catch (const divergence_error&) {
        }
        hi_probe *= 2.0;
        if (hi_probe > static_cast<double>(1ULL << 27))
            throw budget_error("choose_Z: eps demands Z beyond the sieve range");
    }
    const auto table = detail::tail_table(theta, hi_probe);
    // binary search over prime indices: want the first prime q* from which the
    // remaining mass is admissible and convergent
    const auto& ps = table->primes;
    std::size_t lo = 0, hi = ps.size() - 1;
    auto admissible = [&](std::size_t idx) {
        const double q = 4.0 * std::pow(static_cast<double>(ps[idx]), -(0.5 + theta));
        if (q >= 1.0) return false;
        return table->query(static_cast<double>(ps[idx]) - 0.5) < eps / 2.0;
    };
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (admissible(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    // smallest integer Z excluding every prime below ps[lo]
    const int z = lo == 0 ? 2 : static_cast<int>(ps[lo - 1]);
    return z;
}

// ---------------------------------------------------------------------------
// fit_omegas: projected cyclic coordinate descent with a golden-section line
// search per coordinate and random restarts.
// ---------------------------------------------------------------------------

struct FitBudget {
    int restarts = 8;
    int max_sweeps = 120;
    double sweep_tol = 1e-10;
    std::uint64_t seed = 1;
    int threads = 1;
};

namespace detail {

// Incremental objective state over a fixed boundary grid.
class FitState {
  public:
    FitState(const TargetSpec& spec, const DiscK& K,
             const std::vector<std::uint64_t>& primes)
        : primes_(primes), grid_(K.boundary_grid()) {
        base_.resize(grid_.size());
        for (std::size_t k = 0; k < grid_.size(); ++k)
            base_[k] = log_target(spec, grid_[k]);
        omega_.assign(primes_.size(), 0.0);
        factor_.assign(primes_.size() * grid_.size(), Complex(0.0));
        totals_ = base_;
        for (std::size_t i = 0; i < primes_.size(); ++i) set_omega(i, 0.0, true);
    }

    double objective() const {
        double worst = 0.0;
        for (const Complex& t : totals_) worst = std::max(worst, std::abs(t));
        return worst;
    }

    // try a value for coordinate i without committing
    double probe(std::size_t i, double w) const {
        double worst = 0.0;
        for (std::size_t k = 0; k < grid_.size(); ++k) {
            const Complex t = totals_[k] - factor_[i * grid_.size() + k] +
                              omega_log_factor(primes_[i], w, grid_[k]);
            worst = std::max(worst, std::abs(t));
        }
        return worst;
    }

    void set_omega(std::size_t i, double w, bool force = false) {
        if (!force && omega_[i] == w) return;
        for (std::size_t k = 0; k < grid_.size(); ++k) {
            const Complex f = omega_log_factor(primes_[i], w, grid_[k]);
            totals_[k] += f - factor_[i * grid_.size() + k];
            factor_[i * grid_.size() + k] = f;
        }
        omega_[i] = w;
    }

    double omega(std::size_t i) const { return omega_[i]; }
    const std::vector<std::uint64_t>& primes() const { return primes_; }

  private:
    std::vector<std::uint64_t> primes_;
    std::vector<Complex> grid_;
    std::vector<Complex> base_;
    std::vector<double> omega_;
    std::vector<Complex> factor_;  // current per-(prime, grid point) log factor
    std::vector<Complex> totals_;
};

// coarse bracket + golden-section refinement of coordinate i on [-2,2]
inline double line_search(const FitState& state, std::size_t i, double current_best) {
    const double golden = 0.61803398874989484820;
    double best_w = state.omega(i);
    double best_f = current_best;
    // coarse scan picks the basin
    const int coarse = 17;
    for (int j = 0; j < coarse; ++j) {
        const double w = -2.0 + 4.0 * j / (coarse - 1);
        const double f = state.probe(i, w);
        if (f < best_f) {
            best_f = f;
            best_w = w;
        }
    }
    double a = std::max(-2.0, best_w - 4.0 / (coarse - 1));
    double b = std::min(2.0, best_w + 4.0 / (coarse - 1));
    double x1 = b - golden * (b - a);
    double x2 = a + golden * (b - a);
    double f1 = state.probe(i, x1);
    double f2 = state.probe(i, x2);
    for (int it = 0; it < 48 && b - a > 1e-10; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            f1 = state.probe(i, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            f2 = state.probe(i, x2);
        }
    }
    const double w = f1 < f2 ? x1 : x2;
    const double f = std::min(f1, f2);
    return f < best_f ? w : best_w;
}

inline double run_descent(FitState& state, const FitBudget& budget) {
    double current = state.objective();
    for (int sweep = 0; sweep < budget.max_sweeps; ++sweep) {
        const double before = current;
        for (std::size_t i = 0; i < state.primes().size(); ++i) {
            const double w = line_search(state, i, current);
            const double f = state.probe(i, w);
            if (f < current) {  // accept only improvements
                state.set_omega(i, w);
                current = f;
            }
        }
        if (before - current < budget.sweep_tol) break;
    }
    return current;
}

}  // namespace detail

// Minimize max_K |g + sum log(1 - w_p p^{-s} + p^{-2s})| over w in [-2,2]^pi(Y).
// Returns the best restart; achieved_error is a fresh from-scratch
// re-evaluation of the objective, and converged reports achieved_error < eps.
inline OmegaAssignment fit_omegas(const TargetSpec& spec, const DiscK& K, double eps,
                                  double Y, const FitBudget& budget = {}) {
    if (!(eps > 0)) throw validation_error("fit_omegas: eps must be positive");
    if (!(Y >= 2)) throw validation_error("fit_omegas: Y must be at least 2");
    const auto primes = primes_up_to(static_cast<std::uint64_t>(Y));
    CounterRng rng(budget.seed);

    auto one_restart = [&](int restart) {
        detail::FitState state(spec, K, primes);
        if (restart > 0) {
            CounterRng stream = rng.substream(static_cast<std::uint64_t>(restart));
            for (std::size_t i = 0; i < primes.size(); ++i)
                state.set_omega(i, -1.0 + 2.0 * stream.uniform(i));
        }
        const double value = detail::run_descent(state, budget);
        std::map<std::uint64_t, double> omega;
        for (std::size_t i = 0; i < primes.size(); ++i) omega[primes[i]] = state.omega(i);
        return std::make_pair(value, std::move(omega));
    };

    std::vector<std::pair<double, std::map<std::uint64_t, double>>> results;
    if (budget.threads > 1) {
        std::vector<std::future<std::pair<double, std::map<std::uint64_t, double>>>> futs;
        for (int rsd = 0; rsd < budget.restarts; ++rsd)
            futs.push_back(std::async(std::launch::async, one_restart, rsd));
        for (auto& f : futs) results.push_back(f.get());
    } else {
        for (int rsd = 0; rsd < budget.restarts; ++rsd) results.push_back(one_restart(rsd));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].first < results[best].first) best = i;

    OmegaAssignment out;
    out.Y = Y;
    out.omega = std::move(results[best].second);
    out.achieved_error = fit_objective(spec, out, K);  // exact re-evaluation
    out.converged = out.achieved_error < eps;
    return out;
}

// The section-3.2 pathway: omega_p = 0 up to Z, a linear least-squares match
// of sum omega_p p^{-s} to g_Z on the grid for Z < p <= Y, then a descent
// polish.  Doubles as a numerical check of tail_bound.
inline OmegaAssignment fit_omegas_structured(const TargetSpec& spec, const DiscK& K,
                                             double eps, int Z, double Y,
                                             const FitBudget& budget = {}) {
    if (!(Y > Z)) throw validation_error("fit_omegas_structured: need Y > Z");
    const auto primes = primes_up_to(static_cast<std::uint64_t>(Y));
    const auto grid = K.boundary_grid();
    std::vector<std::uint64_t> free_primes;
    for (std::uint64_t p : primes)
        if (static_cast<double>(p) > Z) free_primes.push_back(p);

    // least squares: rows Re/Im of  sum_p w_p p^{-s_k} = g_Z(s_k)
    const std::size_t n = free_primes.size();
    std::vector<double> ata(n * n, 0.0), atb(n, 0.0);
    for (const Complex& s : grid) {
        std::vector<Complex> col(n);
        for (std::size_t i = 0; i < n; ++i)
            col[i] = std::exp(-s * std::log(static_cast<double>(free_primes[i])));
        const Complex b = gz_transform(spec, Z, s);
        for (std::size_t i = 0; i < n; ++i) {
            atb[i] += col[i].real() * b.real() + col[i].imag() * b.imag();
            for (std::size_t j = 0; j <= i; ++j)
                ata[i * n + j] += col[i].real() * col[j].real() +
                                  col[i].imag() * col[j].imag();
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) ata[i * n + j] = ata[j * n + i];
    // ridge-stabilized Gaussian elimination
    for (std::size_t i = 0; i < n; ++i) ata[i * n + i] += 1e-10;
    std::vector<double> w = atb;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(ata[r * n + col]) > std::abs(ata[piv * n + col])) piv = r;
        for (std::size_t c = 0; c < n; ++c) std::swap(ata[col * n + c], ata[piv * n + c]);
        std::swap(w[col], w[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || ata[r * n + col] == 0.0) continue;
            const double f = ata[r * n + col] / ata[col * n + col];
            for (std::size_t c = col; c < n; ++c) ata[r * n + c] -= f * ata[col * n + c];
            w[r] -= f * w[col];
        }
    }
    detail::FitState state(spec, K, primes);
    // after the Gauss-Jordan pass the system is diagonal
    std::size_t fi = 0;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        if (static_cast<double>(primes[i]) <= Z) continue;
        const double raw = w[fi] / ata[fi * n + fi];
        state.set_omega(i, std::clamp(raw, -2.0, 2.0));
        ++fi;
    }
    detail::run_descent(state, budget);
    OmegaAssignment out;
    out.Y = Y;
    for (std::size_t i = 0; i < primes.size(); ++i) out.omega[primes[i]] = state.omega(i);
    out.achieved_error = fit_objective(spec, out, K);
    out.converged = out.achieved_error < eps;
    return out;
}

}  // namespace maass
