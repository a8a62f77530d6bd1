#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "maasslab/errors.hpp"

namespace maass {

// All primes <= x, increasing (sieve of Eratosthenes).
inline std::vector<std::uint64_t> primes_up_to(std::uint64_t x) {
    std::vector<std::uint64_t> ps;
    if (x < 2) return ps;
    std::vector<bool> comp(x + 1, false);
    for (std::uint64_t i = 2; i <= x; ++i) {
        if (!comp[i]) {
            ps.push_back(i);
            for (std::uint64_t j = i * i; j <= x; j += i) comp[j] = true;
        }
        if (i * i > x) break;
    }
    // finish collecting once i*i passed x
    if (!ps.empty()) {
        std::uint64_t resume = ps.back() + 1;
        for (std::uint64_t i = resume; i <= x; ++i)
            if (!comp[i]) ps.push_back(i);
    }
    return ps;
}

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Smallest-prime-factor table for 1..n; spf[1] = 1.
inline std::vector<std::uint32_t> spf_table(std::uint32_t n) {
    std::vector<std::uint32_t> spf(n + 1, 0);
    if (n >= 1) spf[1] = 1;
    for (std::uint32_t i = 2; i <= n; ++i) {
        if (spf[i] == 0) {
            for (std::uint64_t j = i; j <= n; j += i)
                if (spf[j] == 0) spf[j] = i;
        }
    }
    return spf;
}

// prime -> exponent, by trial division.
inline std::map<std::uint64_t, int> factorize(std::uint64_t n) {
    std::map<std::uint64_t, int> f;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        while (n % d == 0) {
            ++f[d];
            n /= d;
        }
    }
    if (n > 1) ++f[n];
    return f;
}

// Moebius function by trial division; 0 on non-squarefree input.
inline int mobius(std::uint64_t n) {
    int m = 1;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d == 0) {
            n /= d;
            if (n % d == 0) return 0;
            m = -m;
        }
    }
    if (n > 1) m = -m;
    return m;
}

inline std::uint64_t divisor_count(std::uint64_t n) {
    std::uint64_t c = 1;
    for (auto& [p, e] : factorize(n)) {
        (void)p;
        c *= static_cast<std::uint64_t>(e + 1);
    }
    return c;
}

}  // namespace maass
