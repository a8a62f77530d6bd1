#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "maasslab/errors.hpp"
#include "maasslab/hecke.hpp"
#include "maasslab/l_evaluator.hpp"
#include "maasslab/sarnak.hpp"
#include "maasslab/target_fit.hpp"

namespace maass {

// Synthetic Weyl-law ensemble: J = round(c R^2) forms with stratified radial
// law r_j = R sqrt((j-1/2)/J) (so counts match c R^2 without sampling noise),
// fair-coin parity, and lambda(p) drawn from mu_p per prime p <= p_cap.
struct EnsembleSpec {
    double R_max = 0.0;
    double weyl_constant = 1.0 / 12.0;
    std::uint64_t p_cap = 2;
    std::uint64_t seed = 1;
    enum class Mode { unconditional, conditioned_on_boxes } mode = Mode::unconditional;
    std::optional<BoxFamily> boxes;  // required in conditioned mode
    double box_Y = 0.0;              // conditioning applies to p <= box_Y
};

inline std::vector<MaassFormData> generate_ensemble(const EnsembleSpec& spec,
                                                    SarnakMeasureCache& measures) {
    if (!(spec.R_max > 0)) throw validation_error("EnsembleSpec: R_max must be > 0");
    if (spec.p_cap < 2) throw validation_error("EnsembleSpec: p_cap must be >= 2");
    if (spec.mode == EnsembleSpec::Mode::conditioned_on_boxes && !spec.boxes)
        throw validation_error("EnsembleSpec: conditioned mode needs boxes");
    const auto primes = primes_up_to(spec.p_cap);
    const std::uint64_t J = static_cast<std::uint64_t>(
        std::llround(spec.weyl_constant * spec.R_max * spec.R_max));
    std::vector<MaassFormData> forms;
    forms.reserve(J);
    CounterRng rng(spec.seed);
    for (std::uint64_t j = 1; j <= J; ++j) {
        const double u = (static_cast<double>(j) - 0.5) / static_cast<double>(J);
        const double r = spec.R_max * std::sqrt(u);
        CounterRng stream = rng.substream(j);
        const int parity = stream.uniform(0) < 0.5 ? 0 : 1;
        std::map<std::uint64_t, double> eigs;
        std::uint64_t idx = 1;
        for (std::uint64_t p : primes) {
            const auto& mu = measures.at(p);
            const double draw = stream.uniform(idx++);
            if (spec.mode == EnsembleSpec::Mode::conditioned_on_boxes &&
                static_cast<double>(p) <= spec.box_Y) {
                auto [a, b] = spec.boxes->box(p);
                eigs[p] = mu.sample_conditional(a, b, draw);
            } else {
                eigs[p] = mu.quantile(draw);
            }
        }
        forms.emplace_back(r, parity, std::move(eigs), spec.p_cap,
                           MaassFormData::Source::synthetic, 1.0);
    }
    return forms;
}

// #{r_j <= R} / R^2, to be compared with the Weyl constant.
inline double weyl_check(const std::vector<MaassFormData>& forms, double R) {
    if (!(R > 0)) throw validation_error("weyl_check: R must be positive");
    std::size_t count = 0;
    for (const auto& f : forms)
        if (f.r() <= R) ++count;
    return static_cast<double>(count) / (R * R);
}

// lambda_j(p) in Omega_p for every p <= Y.
inline bool membership_BR(const MaassFormData& form, const BoxFamily& boxes, double Y) {
    for (std::uint64_t p : primes_up_to(static_cast<std::uint64_t>(std::max(Y, 0.0)))) {
        if (!form.has_prime(p))
            throw missing_coordinate_error("membership_BR: no lambda(" +
                                           std::to_string(p) + ")");
        if (!boxes.contains(p, form.lambda_p(p))) return false;
    }
    return true;
}

// (c/4) (prod_{p<=Y} mu_p(Omega_p)) R^2, the box-event cardinality floor.
inline double predicted_lower_bound(const BoxFamily& boxes, double Y, double c, double R,
                                    SarnakMeasureCache& measures) {
    double prod = 1.0;
    for (std::uint64_t p : primes_up_to(static_cast<std::uint64_t>(std::max(Y, 0.0)))) {
        auto [a, b] = boxes.box(p);
        prod *= measures.at(p).interval_mass(a, b);
    }
    return 0.25 * c * prod * R * R;
}

struct ProportionResult {
    double fraction = 0.0;         // empirical share of forms in B_R
    double ci_low = 0.0;           // Wilson 99% interval
    double ci_high = 1.0;
    double product_mass = 1.0;     // prod_{p<=Y} mu_p(Omega_p)
    double floor_share = 0.25;     // the (2-15) floor normalized by c R^2
    std::size_t hits = 0;
    std::size_t total = 0;
};

// Empirical box-event proportion with a Wilson 99% CI, paired with the
// product-measure expectation and the floor prod/4.
inline ProportionResult proportion_in_BR(const std::vector<MaassFormData>& forms,
                                         const BoxFamily& boxes, double Y,
                                         SarnakMeasureCache& measures) {
    ProportionResult out;
    out.total = forms.size();
    for (const auto& f : forms)
        if (membership_BR(f, boxes, Y)) ++out.hits;
    const double n = static_cast<double>(out.total);
    if (out.total > 0) {
        const double phat = static_cast<double>(out.hits) / n;
        const double z = 2.5758293035489004;  // 99.5th normal percentile
        const double z2 = z * z;
        const double denom = 1.0 + z2 / n;
        const double center = (phat + z2 / (2.0 * n)) / denom;
        const double half =
            z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
        out.fraction = phat;
        out.ci_low = std::max(0.0, center - half);
        out.ci_high = std::min(1.0, center + half);
    }
    double prod = 1.0;
    for (std::uint64_t p : primes_up_to(static_cast<std::uint64_t>(std::max(Y, 0.0)))) {
        auto [a, b] = boxes.box(p);
        prod *= measures.at(p).interval_mass(a, b);
    }
    out.product_mass = prod;
    out.floor_share = prod / 4.0;
    return out;
}

struct BoxDistance {
    double observed = 0.0;  // max_K |log L_Y - sum_p log(1 - w_p p^{-s} + p^{-2s})|
    double bound = 0.0;     // 3 delta sum_{p<=Y} p^{-(1/2+theta)}
};

// The per-form box-to-product distance of the (2-16) estimate, with an
// explicit computable envelope for the implied constant.
inline BoxDistance box_distance_bound(const MaassFormData& form,
                                      const OmegaAssignment& omega, const DiscK& K,
                                      double delta, const BoxFamily& boxes) {
    if (!membership_BR(form, boxes, omega.Y))
        throw membership_error("box_distance_bound: form outside B_R");
    BoxDistance out;
    for (const Complex& s : K.boundary_grid()) {
        const Complex diff =
            log_inverse_partial(form, omega.Y, s) - omega_log_sum(omega.omega, s);
        out.observed = std::max(out.observed, std::abs(diff));
    }
    const double expo = 0.5 + K.theta();
    for (std::uint64_t p : primes_up_to(static_cast<std::uint64_t>(omega.Y)))
        out.bound += std::pow(static_cast<double>(p), -expo);
    out.bound *= 3.0 * delta;
    return out;
}

// The section-2.5 triple-approximation diagnostics for one form.
struct ChainReport {
    std::optional<double> d_approx;  // max_K |L L_X - 1|; genuine forms only
    double d_tails = 0.0;            // max_K |log L_X - log L_Y|
    double d_box = 0.0;              // max_K |log L_Y - sum log(1 - w_p ...)|
    double d_target = 0.0;           // max_K |log f + sum log(1 - w_p ...)|
    double d_log_total = 0.0;        // max_K |log L - log f|
    double d_total = 0.0;            // max_K |L - f|
    bool triangle_consistent = false;
    bool exp_step_consistent = false;
};

enum class LMode { genuine, model };

// All six distances on the boundary grid.  In model mode L is replaced by
// 1/L_X (the partial-product surrogate), which keeps every distance defined
// for synthetic forms; d_approx is reported only for genuine evaluation.
inline ChainReport chain_report(const MaassFormData& form, const TargetSpec& target,
                                const OmegaAssignment& omega, const DiscK& K, double X,
                                double Y, const AfeParams& params,
                                LMode mode = LMode::genuine) {
    if (!(Y <= X)) throw validation_error("chain_report: need Y <= X");
    ChainReport rep;
    const auto grid = K.boundary_grid();
    double max_f = 0.0;
    double pointwise_budget = 0.0;  // max over grid of the per-point triangle sum
    double d_approx = 0.0;
    for (const Complex& s : grid) {
        const Complex logLX = log_inverse_partial(form, X, s);
        const Complex logLY = log_inverse_partial(form, Y, s);
        const Complex omega_sum = omega_log_sum(omega.omega, s);
        const Complex logf = log_target(target, s);
        max_f = std::max(max_f, std::abs(std::exp(logf)));

        Complex log_prod;  // log(L L_X); 0 in model mode by definition
        Complex L;
        if (mode == LMode::genuine) {
            L = evaluate_L(form, s, params);
            const Complex prod = L * partial_euler_inverse(form, X, s);
            d_approx = std::max(d_approx, std::abs(prod - 1.0));
            log_prod = std::log(prod);  // principal log of a near-1 value
        } else {
            L = std::exp(-logLX);
            log_prod = 0.0;
        }
        const Complex logL = log_prod - logLX;

        rep.d_tails = std::max(rep.d_tails, std::abs(logLX - logLY));
        rep.d_box = std::max(rep.d_box, std::abs(logLY - omega_sum));
        rep.d_target = std::max(rep.d_target, std::abs(omega_sum + logf));
        rep.d_log_total = std::max(rep.d_log_total, std::abs(logL - logf));
        rep.d_total = std::max(rep.d_total, std::abs(std::exp(logL) - std::exp(logf)));
        // pointwise triangle identity:
        // logL - logf = log(L L_X) - (logLX - logLY) - (logLY - omega) - (omega + logf)
        const double budget = std::abs(log_prod) + std::abs(logLX - logLY) +
                              std::abs(logLY - omega_sum) + std::abs(omega_sum + logf);
        pointwise_budget = std::max(pointwise_budget, budget);
    }
    if (mode == LMode::genuine) rep.d_approx = d_approx;
    rep.triangle_consistent = rep.d_log_total <= pointwise_budget + 1e-9;
    rep.exp_step_consistent =
        rep.d_total <= (std::expm1(rep.d_log_total)) * std::max(max_f, 1e-300) + 1e-9;
    return rep;
}

// Fraction of forms with max_K |L - f| < eps.  Model mode evaluates
// L = 1/L_X with X the given prime cutoff; genuine mode uses the AFE.
inline double universality_proportion(const std::vector<MaassFormData>& forms,
                                      const TargetSpec& target, const DiscK& K,
                                      double eps, const AfeParams& params,
                                      LMode mode = LMode::model, double X = 0.0) {
    if (forms.empty()) return 0.0;
    const auto grid = K.boundary_grid();
    std::size_t hits = 0;
    for (const auto& form : forms) {
        double worst = 0.0;
        const double cutoff_X =
            X > 0 ? X : static_cast<double>(form.p_cap());
        for (const Complex& s : grid) {
            Complex L;
            if (mode == LMode::model)
                L = 1.0 / partial_euler_inverse(form, cutoff_X, s);
            else
                L = evaluate_L(form, s, params);
            worst = std::max(worst, std::abs(L - target_value(target, s)));
            if (worst >= eps) break;
        }
        if (worst < eps) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(forms.size());
}

}  // namespace maass
