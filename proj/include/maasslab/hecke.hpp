#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "maasslab/errors.hpp"
#include "maasslab/primes.hpp"

namespace maass {

// Operator norm of the p-th Hecke operator, n(p) = p^{1/2} + p^{-1/2}.
// Always > 2.
inline double hecke_norm(std::uint64_t p) {
    const double sq = std::sqrt(static_cast<double>(p));
    return sq + 1.0 / sq;
}

// Satake parameters at p: the roots of x^2 - lambda(p) x + 1.  A real pair
// when |lambda| >= 2, a unit-circle conjugate pair when |lambda| < 2.
struct SatakePair {
    std::complex<double> alpha;
    std::complex<double> beta;
};

inline SatakePair satake(std::uint64_t p, double lambda_p) {
    const double np = hecke_norm(p);
    if (std::abs(lambda_p) > np * (1.0 + 1e-14) + 1e-14) {
        throw bound_violation_error("satake: |lambda(p)| = " + std::to_string(lambda_p) +
                                    " exceeds n(" + std::to_string(p) +
                                    ") = " + std::to_string(np));
    }
    if (std::abs(lambda_p) >= 2.0) {
        // avoid cancellation: compute the large root first
        const double disc = std::sqrt(std::max(0.0, lambda_p * lambda_p - 4.0));
        const double big = 0.5 * (lambda_p + (lambda_p >= 0 ? disc : -disc));
        return {std::complex<double>(big, 0.0), std::complex<double>(1.0 / big, 0.0)};
    }
    const double im = std::sqrt(4.0 - lambda_p * lambda_p) / 2.0;
    return {std::complex<double>(lambda_p / 2.0, im),
            std::complex<double>(lambda_p / 2.0, -im)};
}

// Discrete stand-in for a Hecke-Maass cusp form u_j: spectral parameter r
// (Laplace eigenvalue 1/4 + r^2), parity, and Hecke eigenvalues lambda(p) for
// every prime p <= p_cap.  Immutable after construction.
class MaassFormData {
  public:
    enum class Source { synthetic, ingested };

    MaassFormData(double r, int parity, std::map<std::uint64_t, double> prime_eigs,
                  std::uint64_t p_cap, Source source,
                  std::optional<double> norm_alpha = std::nullopt)
        : r_(r),
          parity_(parity),
          prime_eigs_(std::move(prime_eigs)),
          p_cap_(p_cap),
          norm_alpha_(norm_alpha),
          source_(source) {
        if (!(r > 0)) throw validation_error("MaassFormData: r must be positive");
        if (parity != 0 && parity != 1)
            throw validation_error("MaassFormData: parity must be 0 or 1");
        if (norm_alpha_ && !(*norm_alpha_ > 0))
            throw validation_error("MaassFormData: norm_alpha must be positive");
        for (auto& [p, lam] : prime_eigs_) {
            if (!std::isfinite(lam) || std::abs(lam) > hecke_norm(p) + 1e-12)
                throw validation_error("MaassFormData: |lambda(" + std::to_string(p) +
                                       ")| = " + std::to_string(lam) +
                                       " violates the Hecke bound n(p)");
        }
        for (std::uint64_t p : primes_up_to(p_cap)) {
            if (!prime_eigs_.count(p))
                throw validation_error("MaassFormData: missing lambda(" +
                                       std::to_string(p) + ") below p_cap " +
                                       std::to_string(p_cap));
        }
    }

    double r() const { return r_; }
    int parity() const { return parity_; }
    std::uint64_t p_cap() const { return p_cap_; }
    Source source() const { return source_; }
    std::optional<double> norm_alpha() const { return norm_alpha_; }
    const std::map<std::uint64_t, double>& prime_eigs() const { return prime_eigs_; }

    double lambda_p(std::uint64_t p) const {
        auto it = prime_eigs_.find(p);
        if (it == prime_eigs_.end())
            throw missing_coordinate_error("no eigenvalue stored for p = " +
                                           std::to_string(p));
        return it->second;
    }

    bool has_prime(std::uint64_t p) const { return prime_eigs_.count(p) > 0; }

    // lambda(p^k) by the Euler-factor recurrence
    //   lambda(p^{k+1}) = lambda(p) lambda(p^k) - lambda(p^{k-1}),
    // memoized per (p, k).  The memo is shared across copies; it only caches
    // values derived from the immutable eigenvalue data.
    double lambda_prime_power(std::uint64_t p, int k) const {
        if (k == 0) return 1.0;
        const double lam = lambda_p(p);
        if (k == 1) return lam;
        {
            std::lock_guard<std::mutex> lock(memo_->mutex);
            auto it = memo_->powers.find({p, k});
            if (it != memo_->powers.end()) return it->second;
        }
        double prev = 1.0;
        double cur = lam;
        for (int j = 2; j <= k; ++j) {
            const double next = cur * lam - prev;
            prev = cur;
            cur = next;
        }
        std::lock_guard<std::mutex> lock(memo_->mutex);
        memo_->powers[{p, k}] = cur;
        return cur;
    }

  private:
    struct Memo {
        std::mutex mutex;
        std::map<std::pair<std::uint64_t, int>, double> powers;
    };

    double r_;
    int parity_;
    std::map<std::uint64_t, double> prime_eigs_;
    std::uint64_t p_cap_;
    std::optional<double> norm_alpha_;
    Source source_;
    std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
};

// Multiplicative extension lambda(n) = prod lambda(p^{e_p}).
inline double hecke_eigenvalue_n(const MaassFormData& form, std::uint64_t n) {
    if (n == 0) throw error("hecke_eigenvalue_n: n must be >= 1");
    double value = 1.0;
    for (auto& [p, e] : factorize(n)) {
        if (p > form.p_cap())
            throw coefficient_cap_error("lambda(" + std::to_string(n) +
                                        "): prime factor " + std::to_string(p) +
                                        " exceeds p_cap " + std::to_string(form.p_cap()));
        value *= form.lambda_prime_power(p, e);
    }
    return value;
}

// lambda(n) for all n <= n_max at once via a smallest-prime-factor sieve;
// table[0] is unused (0).  Much faster than per-n factorization for long
// Dirichlet sums.
inline std::vector<double> coefficient_table(const MaassFormData& form,
                                             std::uint32_t n_max) {
    std::vector<double> lam(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (n_max == 0) return lam;
    lam[1] = 1.0;
    const auto spf = spf_table(n_max);
    for (std::uint32_t n = 2; n <= n_max; ++n) {
        const std::uint32_t p = spf[n];
        if (p > form.p_cap())
            throw coefficient_cap_error("coefficient_table: prime " + std::to_string(p) +
                                        " exceeds p_cap " + std::to_string(form.p_cap()));
        std::uint32_t m = n;
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        lam[n] = lam[m] * form.lambda_prime_power(p, e);
    }
    return lam;
}

// (1/N) sum_{n<=N} lambda(n)^2, the quantity the Ramanujan-on-average bound
// controls.
inline double ramanujan_average(const MaassFormData& form, std::uint32_t N) {
    if (N == 0) throw error("ramanujan_average: N must be >= 1");
    const auto lam = coefficient_table(form, N);
    double s = 0.0;
    for (std::uint32_t n = 1; n <= N; ++n) s += lam[n] * lam[n];
    return s / static_cast<double>(N);
}

// Degenerate fixtures with exact brute-force oracles.
inline MaassFormData constant_lambda_form(double lambda, std::uint64_t p_cap,
                                          double r = 1.0, int parity = 0) {
    std::map<std::uint64_t, double> eigs;
    for (std::uint64_t p : primes_up_to(p_cap)) eigs[p] = lambda;
    return MaassFormData(r, parity, std::move(eigs), p_cap,
                         MaassFormData::Source::synthetic, 1.0);
}

}  // namespace maass
