#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "maasslab/errors.hpp"
#include "maasslab/hecke.hpp"
#include "maasslab/primes.hpp"
#include "maasslab/special_functions.hpp"

namespace maass {

// Closed disc |s - 3/4| <= radius with radius < 1/4, plus its boundary grid.
// theta = 1/4 - radius is the distance from the critical line.
struct DiscK {
    static constexpr double center = 0.75;
    double radius;
    int grid_size;

    explicit DiscK(double radius_, int grid_size_ = 256)
        : radius(radius_), grid_size(grid_size_) {
        if (!(radius > 0.0 && radius < 0.25))
            throw validation_error("DiscK: radius must lie in (0, 1/4)");
        if (grid_size < 4) throw validation_error("DiscK: grid too small");
    }

    double theta() const { return 0.25 - radius; }

    std::vector<Complex> boundary_grid() const {
        std::vector<Complex> g(grid_size);
        const double pi = 3.14159265358979323846;
        for (int k = 0; k < grid_size; ++k) {
            const double phi = 2.0 * pi * k / grid_size;
            g[k] = Complex(center + radius * std::cos(phi), radius * std::sin(phi));
        }
        return g;
    }
};

// Smoothed-AFE parameters.  N is the main-sum cutoff; the dual-sum contour
// sits at Re w = 1 + abscissa_eps (raised automatically if Re s demands it);
// contour_T and n_max of 0 mean "choose adaptively".
struct AfeParams {
    int N = 0;
    double abscissa_eps = 0.5;
    double contour_T = 0.0;
    int n_max = 0;
    CutoffProfile profile{};
};

// log gamma_j(s) = -s log pi + log G((s+eps+ir)/2) + log G((s+eps-ir)/2).
inline Complex log_gamma_factor(const MaassFormData& form, Complex s) {
    const double log_pi = 1.1447298858494001741;
    const Complex ir(0.0, form.r());
    const double eps = static_cast<double>(form.parity());
    return -s * log_pi + log_gamma((s + eps + ir) / 2.0) +
           log_gamma((s + eps - ir) / 2.0);
}

// gamma_j(s) itself, exponentiated from the log to dodge Gamma overflow.
inline Complex gamma_factor(const MaassFormData& form, Complex s) {
    return std::exp(log_gamma_factor(form, s));
}

namespace detail {

// 16-point Gauss-Legendre on [-1,1], positive half.
inline constexpr double kGL16Nodes[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
inline constexpr double kGL16Weights[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

// One contour node at w = a + i v (v > 0) with its Gauss weight and the
// cached Mellin value phi~(-w); the v < 0 half reuses conj(mell).
struct ContourNode {
    double v;
    double weight;
    Complex mellin;  // phi~(-(a + i v))
};

inline constexpr double kContourPanelHeight = 0.5;
inline constexpr int kContourMaxPanels = 4096;

// Global cache of contour nodes per (profile, abscissa); extended lazily and
// snapshotted behind a shared_ptr so readers never block each other.
class MellinContourCache {
  public:
    static MellinContourCache& instance() {
        static MellinContourCache cache;
        return cache;
    }

    std::shared_ptr<const std::vector<ContourNode>> nodes(const CutoffProfile& profile,
                                                          double abscissa,
                                                          int panels_needed) {
        const std::string key =
            profile.name + "@" + std::to_string(abscissa);
        std::lock_guard<std::mutex> lock(mutex_);
        auto& slot = slots_[key];
        const int have = slot ? static_cast<int>(slot->size()) / 16 : 0;
        if (have < panels_needed) {
            auto grown = std::make_shared<std::vector<ContourNode>>(
                slot ? *slot : std::vector<ContourNode>());
            for (int j = have; j < panels_needed; ++j) {
                const double lo = j * kContourPanelHeight;
                const double hi = lo + kContourPanelHeight;
                const double c = 0.5 * (lo + hi);
                const double h = 0.5 * (hi - lo);
                for (int i = 7; i >= 0; --i) {
                    grown->push_back(make_node(profile, abscissa, c - h * kGL16Nodes[i],
                                               h * kGL16Weights[i]));
                }
                for (int i = 0; i < 8; ++i) {
                    grown->push_back(make_node(profile, abscissa, c + h * kGL16Nodes[i],
                                               h * kGL16Weights[i]));
                }
            }
            slot = std::move(grown);
        }
        return slot;
    }

  private:
    static ContourNode make_node(const CutoffProfile& profile, double a, double v,
                                 double w) {
        return ContourNode{v, w, mellin_cutoff(profile, Complex(-a, -v))};
    }

    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const std::vector<ContourNode>>> slots_;
};

}  // namespace detail

struct WKernelResult {
    Complex value;
    double truncation_error = 0.0;
};

// The AFE tail kernel for a fixed (form, s): precomputes the xi-independent
// node factors so repeated xi evaluations are a dot product.
class WKernel {
  public:
    WKernel(const MaassFormData& form, Complex s, const AfeParams& params)
        : abscissa_(1.0 + effective_eps(params, s)) {
        if (!(abscissa_ > 1.0 - s.real()))
            throw error("WKernel: contour abscissa must exceed 1 - Re s");
        const double tol = 1e-15;
        auto& cache = detail::MellinContourCache::instance();
        int panels = params.contour_T > 0
                         ? static_cast<int>(std::ceil(params.contour_T /
                                                      detail::kContourPanelHeight))
                         : 8;
        auto nodes = cache.nodes(params.profile, abscissa_, panels);
        build(form, s, *nodes, 0, panels);
        if (params.contour_T <= 0) {
            // Extend until the added mass is negligible.  The gamma-ratio
            // grows polynomially while the true Mellin factor decays
            // superpolynomially, so genuine contributions fall below tol;
            // once increments stop shrinking at a negligible level the
            // quadrature noise floor has been reached and further panels
            // only add noise.
            int quiet = 0;
            double prev_increment = std::numeric_limits<double>::max();
            while (quiet < 3) {
                if (panels >= detail::kContourMaxPanels)
                    throw budget_error("WKernel: contour truncation not reached");
                nodes = cache.nodes(params.profile, abscissa_, panels + 4);
                const double before = abs_mass_;
                build(form, s, *nodes, panels, panels + 4);
                const double increment = abs_mass_ - before;
                const bool tiny = increment <= tol * abs_mass_;
                const bool noise_floor = increment <= 1e-9 * abs_mass_ &&
                                         increment >= 0.5 * prev_increment;
                quiet = (tiny || noise_floor) ? quiet + 1 : 0;
                prev_increment = increment;
                panels += 4;
            }
        }
        truncation_estimate_ = last_panel_mass_;
    }

    double abscissa() const { return abscissa_; }

    WKernelResult value(double xi) const {
        if (!(xi > 0)) throw error("WKernel: xi must be positive");
        const double lx = std::log(xi);
        Complex sum = 0.0;
        for (std::size_t k = 0; k < vs_.size(); ++k) {
            // e^{-i v ln xi} and its conjugate pick up the two half-contours
            const Complex osc = std::polar(1.0, -vs_[k] * lx);
            sum += plus_[k] * osc + minus_[k] * std::conj(osc);
        }
        const double inv_two_pi = 0.15915494309189533577;
        const double scale = std::exp(-abscissa_ * lx);
        return {-inv_two_pi * scale * sum, inv_two_pi * scale * truncation_estimate_};
    }

  private:
    static double effective_eps(const AfeParams& params, Complex s) {
        double eps = params.abscissa_eps;
        if (!(eps > 0.0) || eps > 1.0)
            throw validation_error("AfeParams: abscissa_eps must lie in (0,1]");
        // keep the dual Dirichlet series absolutely convergent: a > Re s + 1/4
        return std::max(eps, s.real() - 0.75);
    }

    static const CutoffProfile& form_profile(const AfeParams& params) {
        return params.profile;
    }

    void build(const MaassFormData& form, Complex s,
               const std::vector<detail::ContourNode>& nodes, int panel_from,
               int panel_to) {
        const Complex one_minus_s = 1.0 - s;
        for (int j = panel_from; j < panel_to; ++j) {
            double panel_mass = 0.0;
            for (int i = 0; i < 16; ++i) {
                const auto& node = nodes[static_cast<std::size_t>(j) * 16 + i];
                const Complex w(abscissa_, node.v);
                const Complex ratio_plus = std::exp(log_gamma_factor(form, one_minus_s + w) -
                                                    log_gamma_factor(form, s - w));
                const Complex wbar(abscissa_, -node.v);
                const Complex ratio_minus = std::exp(
                    log_gamma_factor(form, one_minus_s + wbar) -
                    log_gamma_factor(form, s - wbar));
                vs_.push_back(node.v);
                plus_.push_back(node.weight * ratio_plus * node.mellin);
                minus_.push_back(node.weight * ratio_minus * std::conj(node.mellin));
                panel_mass += std::abs(plus_.back()) + std::abs(minus_.back());
            }
            abs_mass_ += panel_mass;
            last_panel_mass_ = panel_mass;
        }
    }

    double abscissa_;
    std::vector<double> vs_;
    std::vector<Complex> plus_;
    std::vector<Complex> minus_;
    double abs_mass_ = 0.0;
    double last_panel_mass_ = 0.0;
    double truncation_estimate_ = 0.0;
};

// W(xi, s) of the smoothed approximate functional equation, with the
// truncation estimate surfaced.
inline WKernelResult tail_kernel_W(const MaassFormData& form, double xi, Complex s,
                                   const AfeParams& params) {
    WKernel kernel(form, s, params);
    return kernel.value(xi);
}

// ---------------------------------------------------------------------------
// Partial Euler products
// ---------------------------------------------------------------------------

// L_X(s) = prod_{p<=X} (1 - lambda(p) p^{-s} + p^{-2s}), the inverse partial
// product; holomorphic and non-vanishing for Re s > 1/2.
inline Complex partial_euler_inverse(const MaassFormData& form, double X, Complex s) {
    if (!(s.real() > 0.5))
        throw half_plane_error("partial_euler_inverse: requires Re s > 1/2");
    if (X > static_cast<double>(form.p_cap()))
        throw coefficient_cap_error("partial_euler_inverse: X beyond p_cap");
    Complex prod = 1.0;
    for (auto& [p, lam] : form.prime_eigs()) {
        if (static_cast<double>(p) > X) break;
        const Complex ps = std::exp(-s * std::log(static_cast<double>(p)));
        prod *= 1.0 - lam * ps + ps * ps;
    }
    return prod;
}

// log L_Y(s) as a sum of principal logs of the Satake factors; each factor
// 1 - alpha p^{-s} stays in the right half-plane for Re s > 1/2.
inline Complex log_inverse_partial(const MaassFormData& form, double Y, Complex s) {
    if (!(s.real() > 0.5))
        throw half_plane_error("log_inverse_partial: requires Re s > 1/2");
    if (Y > static_cast<double>(form.p_cap()))
        throw coefficient_cap_error("log_inverse_partial: Y beyond p_cap");
    Complex sum = 0.0;
    for (auto& [p, lam] : form.prime_eigs()) {
        if (static_cast<double>(p) > Y) break;
        const auto ab = satake(p, lam);
        const Complex ps = std::exp(-s * std::log(static_cast<double>(p)));
        sum += std::log(1.0 - ab.alpha * ps) + std::log(1.0 - ab.beta * ps);
    }
    return sum;
}

// Finitely supported Dirichlet polynomial sum c(u) u^{-s}.
struct DirichletPolynomial {
    std::map<unsigned __int128, double> coeffs;

    Complex evaluate(Complex s) const {
        Complex sum = 0.0;
        for (auto& [m, c] : coeffs) {
            const double logm = std::log(static_cast<double>(m));
            sum += c * std::exp(-s * logm);
        }
        return sum;
    }

    double coeff(unsigned __int128 m) const {
        auto it = coeffs.find(m);
        return it == coeffs.end() ? 0.0 : it->second;
    }
};

// Expand L_X(s) as a Dirichlet polynomial: per prime the factor contributes
// coefficients {1, -lambda(p), 1} at {1, p, p^2}; support is bounded by
// P(X) = prod_{p<=X} p^2, so X <= 31 keeps indices inside 128 bits.
inline DirichletPolynomial partial_euler_inverse_coeffs(const MaassFormData& form,
                                                        double X) {
    if (X > 31.0)
        throw budget_error("partial_euler_inverse_coeffs: P(X) overflows the "
                           "coefficient index budget for X > 31");
    if (X > static_cast<double>(form.p_cap()))
        throw coefficient_cap_error("partial_euler_inverse_coeffs: X beyond p_cap");
    DirichletPolynomial poly;
    poly.coeffs[1] = 1.0;
    for (auto& [p, lam] : form.prime_eigs()) {
        if (static_cast<double>(p) > X) break;
        std::map<unsigned __int128, double> next;
        const unsigned __int128 p1 = p;
        const unsigned __int128 p2 = p1 * p1;
        for (auto& [m, c] : poly.coeffs) {
            next[m] += c;
            next[m * p1] += -lam * c;
            next[m * p2] += c;
        }
        poly.coeffs = std::move(next);
    }
    return poly;
}

// ---------------------------------------------------------------------------
// evaluate_L: smoothed main sum plus W-weighted dual sum (the AFE identity).
// ---------------------------------------------------------------------------

inline Complex evaluate_L(const MaassFormData& form, Complex s, const AfeParams& params) {
    if (params.N < 1) throw validation_error("evaluate_L: params.N must be >= 1");
    const double sigma = s.real();
    if (!(sigma > 0.0 && sigma < 1.75))
        throw half_plane_error("evaluate_L: Re s outside the supported strip");
    const int N = params.N;
    const auto lam = coefficient_table(form, static_cast<std::uint32_t>(2 * N));
    Complex main = 0.0;
    for (int n = 1; n <= 2 * N; ++n) {
        const double phi = cutoff(params.profile, static_cast<double>(n) / N);
        if (phi == 0.0) continue;
        main += lam[n] * phi * std::exp(-s * std::log(static_cast<double>(n)));
    }
    WKernel kernel(form, s, params);
    const double scale = std::max(1.0, std::abs(main));
    Complex dual = 0.0;
    int consecutive_small = 0;
    std::vector<double> lam_ext(lam.begin(), lam.end());
    const int hard_cap = 200000;
    for (int n = 1;; ++n) {
        if (params.n_max > 0 && n > params.n_max) break;
        if (n > hard_cap) throw budget_error("evaluate_L: dual sum did not converge");
        if (n >= static_cast<int>(lam_ext.size())) {
            const auto grown = coefficient_table(
                form, static_cast<std::uint32_t>(2 * lam_ext.size()));
            lam_ext.assign(grown.begin(), grown.end());
        }
        const auto w = kernel.value(static_cast<double>(n) * N);
        dual += lam_ext[n] * std::exp((s - 1.0) * std::log(static_cast<double>(n))) *
                w.value;
        if (params.n_max == 0) {
            // crude envelope |lambda(n)| <= d(n) sqrt(n) from the Satake bound
            const double envelope = static_cast<double>(divisor_count(n)) *
                                    std::pow(static_cast<double>(n), sigma - 0.5);
            if (envelope * std::abs(w.value) < 1e-12 * scale)
                ++consecutive_small;
            else
                consecutive_small = 0;
            if (consecutive_small >= 16) break;
        }
    }
    const double sign = form.parity() == 0 ? 1.0 : -1.0;
    return main + sign * dual;
}

// Scale-free functional-equation defect in [0,1]; ~0 for genuine data,
// O(1) for coefficients that do not come from a true form.
inline double functional_equation_residual(const MaassFormData& form, Complex s,
                                           const AfeParams& params) {
    const Complex lhs = gamma_factor(form, s) * evaluate_L(form, s, params);
    const Complex rhs =
        gamma_factor(form, 1.0 - s) * evaluate_L(form, 1.0 - s, params);
    const double sign = form.parity() == 0 ? 1.0 : -1.0;
    const double denom = std::abs(lhs) + std::abs(rhs);
    if (denom == 0.0) return 0.0;
    return std::abs(lhs - sign * rhs) / denom;
}

// Dual-sum magnitude estimate sum_n d(n) n^{sigma-1/2} |W(nN, s)| at the
// rightmost disc point; the quantity choose_N drives below error_target.
inline double afe_tail_estimate(const MaassFormData& form, const DiscK& K, int N,
                                const AfeParams& params) {
    AfeParams p = params;
    p.N = N;
    const Complex s(DiscK::center + K.radius, 0.0);
    WKernel kernel(form, s, p);
    double total = 0.0;
    int consecutive_small = 0;
    for (int n = 1; n <= 100000; ++n) {
        const double envelope = static_cast<double>(divisor_count(n)) *
                                std::pow(static_cast<double>(n), s.real() - 0.5);
        const double term = envelope * std::abs(kernel.value(static_cast<double>(n) * N).value);
        total += term;
        if (term < 1e-14) ++consecutive_small;
        else consecutive_small = 0;
        if (consecutive_small >= 16) break;
    }
    return total;
}

// Smallest N in a doubling ladder whose estimated dual-sum weight is below
// error_target; never below ceil(r^{2-theta}).
inline int choose_N(const MaassFormData& form, const DiscK& K, double error_target,
                    const AfeParams& params = {}) {
    if (!(error_target > 0)) throw validation_error("choose_N: error_target <= 0");
    const int floor_N =
        static_cast<int>(std::ceil(std::pow(form.r(), 2.0 - K.theta())));
    for (int N = floor_N; N <= floor_N * (1 << 20); N *= 2) {
        if (afe_tail_estimate(form, K, N, params) < error_target) return N;
    }
    throw budget_error("choose_N: no N in the ladder met the target");
}

}  // namespace maass
