#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "maasslab/l_evaluator.hpp"
#include "maasslab/rng.hpp"
#include "test_helpers.hpp"

using Catch::Approx;
using maass::Complex;
using maass_test::fixture_form;

namespace {

maass::MaassFormData bare_form(double r, int parity) {
    return maass::MaassFormData(r, parity, {{2, 0.0}}, 2,
                                maass::MaassFormData::Source::synthetic);
}

maass::MaassFormData random_form(std::uint64_t seed, std::uint64_t p_cap, double r,
                                 int parity) {
    maass::CounterRng rng(seed);
    std::map<std::uint64_t, double> eigs;
    std::uint64_t i = 0;
    for (std::uint64_t p : maass::primes_up_to(p_cap))
        eigs[p] = 2.0 * (2.0 * rng.uniform(i++) - 1.0);
    return maass::MaassFormData(r, parity, std::move(eigs), p_cap,
                                maass::MaassFormData::Source::synthetic);
}

// c(m) = sum_{k l^2 = m} lambda(k) mu(k) |mu(kl)|, the expansion the
// polynomial must reproduce
double coeff_oracle(const maass::MaassFormData& form, std::uint64_t m) {
    double c = 0.0;
    for (std::uint64_t l = 1; l * l <= m; ++l) {
        if (m % (l * l) != 0) continue;
        const std::uint64_t k = m / (l * l);
        const int mu_k = maass::mobius(k);
        if (mu_k == 0) continue;
        const int mu_kl = maass::mobius(k * l);
        if (mu_kl == 0) continue;
        c += maass::hecke_eigenvalue_n(form, k) * mu_k;
    }
    return c;
}

}  // namespace

TEST_CASE("DiscK geometry") {
    REQUIRE_THROWS_AS(maass::DiscK(0.3), maass::validation_error);
    REQUIRE_THROWS_AS(maass::DiscK(0.0), maass::validation_error);
    maass::DiscK K(0.1, 64);
    REQUIRE(K.theta() == Approx(0.15).margin(1e-15));
    const auto grid = K.boundary_grid();
    REQUIRE(grid.size() == 64);
    for (const Complex& s : grid) {
        REQUIRE(std::abs(s - Complex(0.75, 0.0)) == Approx(0.1).margin(1e-12));
        REQUIRE(s.real() > 0.5);
        REQUIRE(s.real() < 1.0);
    }
}

TEST_CASE("gamma_factor basics") {
    const auto even = bare_form(9.53369526135, 0);
    const Complex at_center = maass::gamma_factor(even, Complex(0.75, 0.0));
    REQUIRE(std::isfinite(at_center.real()));
    REQUIRE(at_center.real() > 0.0);
    REQUIRE(std::abs(at_center.imag()) < 1e-12 * std::abs(at_center));
    // Schwarz reflection for real spectral parameter
    for (const Complex s : {Complex(0.7, 0.3), Complex(0.9, -2.0)}) {
        const Complex a = maass::gamma_factor(even, s);
        const Complex b = maass::gamma_factor(even, std::conj(s));
        REQUIRE(std::abs(b - std::conj(a)) < 1e-12 * std::abs(a));
    }
    // log-magnitude vs the Stirling main term at s = 3/4 + 50i, within 1%
    const Complex s(0.75, 50.0);
    const double log_mag = maass::log_gamma_factor(even, s).real();
    const Complex ir(0.0, even.r());
    double main = -s.real() * std::log(3.14159265358979323846);
    for (const Complex z : {(s + ir) / 2.0, (s - ir) / 2.0}) {
        const Complex stirling =
            (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * 3.14159265358979323846);
        main += stirling.real();
    }
    REQUIRE(log_mag == Approx(main).epsilon(0.01));
}

TEST_CASE("partial euler inverse") {
    const auto divisor_form = maass::constant_lambda_form(2.0, 200);
    const auto zero_form = maass::constant_lambda_form(0.0, 200);

    REQUIRE(maass::partial_euler_inverse(divisor_form, 1.5, Complex(0.8, 0.3)) ==
            Complex(1.0, 0.0));  // empty product

    maass::CounterRng rng(17);
    for (int i = 0; i < 20; ++i) {
        const Complex s(0.55 + 0.6 * rng.uniform(2 * i), 3.0 * rng.uniform(2 * i + 1));
        // lambda = 2: L_X = prod (1 - p^{-s})^2
        Complex expect = 1.0;
        for (std::uint64_t p : maass::primes_up_to(100)) {
            const Complex f = 1.0 - std::exp(-s * std::log(double(p)));
            expect *= f * f;
        }
        const Complex got = maass::partial_euler_inverse(divisor_form, 100, s);
        REQUIRE(std::abs(got - expect) < 1e-12 * std::abs(expect));
        // lambda = 0: L_X = prod (1 + p^{-2s})
        Complex expect0 = 1.0;
        for (std::uint64_t p : maass::primes_up_to(100))
            expect0 *= 1.0 + std::exp(-2.0 * s * std::log(double(p)));
        const Complex got0 = maass::partial_euler_inverse(zero_form, 100, s);
        REQUIRE(std::abs(got0 - expect0) < 1e-12 * std::abs(expect0));
        // nonvanishing
        REQUIRE(std::abs(got) > 0.0);
    }
    REQUIRE_THROWS_AS(maass::partial_euler_inverse(zero_form, 10, Complex(0.4, 0.0)),
                      maass::half_plane_error);
}

TEST_CASE("dirichlet polynomial expansion") {
    const auto form = random_form(23, 31, 2.0, 0);
    // single factor at X = 2
    const auto poly2 = maass::partial_euler_inverse_coeffs(form, 2);
    REQUIRE(poly2.coeff(1) == 1.0);
    REQUIRE(poly2.coeff(2) == Approx(-form.lambda_p(2)).margin(1e-15));
    REQUIRE(poly2.coeff(4) == 1.0);
    REQUIRE(poly2.coeffs.size() == 3);

    // coefficients match the mu/lambda double-sum formula for X = 10
    const auto poly10 = maass::partial_euler_inverse_coeffs(form, 10);
    for (auto& [m, c] : poly10.coeffs) {
        REQUIRE(c ==
                Approx(coeff_oracle(form, static_cast<std::uint64_t>(m))).margin(1e-12));
    }

    // polynomial evaluation reproduces the direct product
    maass::CounterRng rng(29);
    for (int i = 0; i < 10; ++i) {
        const Complex s(0.55 + 0.4 * rng.uniform(2 * i), 2.0 * rng.uniform(2 * i + 1));
        const Complex via_poly = poly10.evaluate(s);
        const Complex via_prod = maass::partial_euler_inverse(form, 10, s);
        REQUIRE(std::abs(via_poly - via_prod) < 1e-10);
    }
    REQUIRE_THROWS_AS(maass::partial_euler_inverse_coeffs(form, 37),
                      maass::budget_error);
}

TEST_CASE("log of the inverse partial product") {
    const auto& form = fixture_form(0);
    REQUIRE(maass::log_inverse_partial(form, 1.5, Complex(0.8, 0.1)) ==
            Complex(0.0, 0.0));
    maass::CounterRng rng(31);
    for (int i = 0; i < 12; ++i) {
        const Complex s(0.55 + 0.4 * rng.uniform(2 * i), 4.0 * rng.uniform(2 * i + 1));
        const Complex lg = maass::log_inverse_partial(form, 500, s);
        const Complex prod = maass::partial_euler_inverse(form, 500, s);
        REQUIRE(std::abs(std::exp(lg) - prod) < 1e-10 * std::abs(prod));
    }
    // degenerate lambda(p) = 2: log L = 2 sum log(1 - p^{-s})
    const auto divisor_form = maass::constant_lambda_form(2.0, 100);
    const Complex s(0.7, 0.4);
    Complex expect = 0.0;
    for (std::uint64_t p : maass::primes_up_to(100))
        expect += 2.0 * std::log(1.0 - std::exp(-s * std::log(double(p))));
    REQUIRE(std::abs(maass::log_inverse_partial(divisor_form, 100, s) - expect) < 1e-12);
}

TEST_CASE("tail kernel W") {
    const auto& form = fixture_form(0);
    maass::AfeParams params;
    params.N = 65;
    // reported magnitude decreases along xi = 10^k
    const Complex s(0.75, 0.0);
    maass::WKernel kernel(form, s, params);
    double prev = 1e300;
    for (double xi : {1e2, 1e3, 1e4, 1e5, 1e6}) {
        const double mag = std::abs(kernel.value(xi).value);
        REQUIRE(mag < prev);
        prev = mag;
    }
    // conjugate symmetry in s
    const Complex sc(0.72, 0.21);
    maass::WKernel k1(form, sc, params);
    maass::WKernel k2(form, std::conj(sc), params);
    for (double xi : {130.0, 1000.0}) {
        const Complex a = k1.value(xi).value;
        const Complex b = k2.value(xi).value;
        REQUIRE(std::abs(b - std::conj(a)) < 1e-12 * std::max(std::abs(a), 1e-30));
    }
    // T-doubling stability
    maass::AfeParams t50 = params;
    t50.contour_T = 50.0;
    maass::AfeParams t100 = params;
    t100.contour_T = 100.0;
    const Complex w50 = maass::tail_kernel_W(form, 1000.0, s, t50).value;
    const Complex w100 = maass::tail_kernel_W(form, 1000.0, s, t100).value;
    REQUIRE(std::abs(w50 - w100) < 1e-8);
}

TEST_CASE("evaluate_L against the absolutely convergent series") {
    const auto& form = fixture_form(0);
    maass::AfeParams params;
    params.N = 65;
    const Complex L = maass::evaluate_L(form, Complex(1.5, 0.0), params);
    const auto lam = maass::coefficient_table(form, 1000000);
    double direct = 0.0;
    for (std::uint64_t n = 1; n <= 1000000; ++n)
        direct += lam[n] * std::pow(static_cast<double>(n), -1.5);
    REQUIRE(std::abs(L - direct) < 1e-6);
    REQUIRE(std::abs(L.imag()) < 1e-9);
}

TEST_CASE("evaluate_L conjugate symmetry and N-robustness") {
    const auto& form = fixture_form(2);  // even form
    maass::AfeParams params;
    params.N = 128;
    const Complex s(0.7, 0.08);
    const Complex a = maass::evaluate_L(form, s, params);
    const Complex b = maass::evaluate_L(form, std::conj(s), params);
    REQUIRE(std::abs(b - std::conj(a)) < 1e-10 * std::abs(a));
    maass::AfeParams doubled = params;
    doubled.N = 256;
    const Complex c = maass::evaluate_L(form, s, doubled);
    REQUIRE(std::abs(a - c) < 1e-8);
}

TEST_CASE("functional equation residual") {
    maass::AfeParams params;
    params.N = 80;
    // genuine data: the identity holds to numerical error
    REQUIRE(maass::functional_equation_residual(fixture_form(0), Complex(0.6, 0.2),
                                                params) < 1e-3);
    // self-dual point for an even form: both sides are literally equal
    REQUIRE(maass::functional_equation_residual(fixture_form(2), Complex(0.5, 0.0),
                                                params) < 1e-12);
    // random coefficients satisfy no functional equation
    const auto fake = random_form(57, 4096, 9.53369526135, 0);
    const double res =
        maass::functional_equation_residual(fake, Complex(0.6, 0.2), params);
    INFO("random-coefficient residual " << res);
    REQUIRE(res > 1e-2);
}

TEST_CASE("choose_N") {
    const auto& form = fixture_form(0);
    maass::DiscK K(0.1, 16);
    const int floor_N =
        static_cast<int>(std::ceil(std::pow(form.r(), 2.0 - K.theta())));
    REQUIRE(floor_N == 65);
    const int n_loose = maass::choose_N(form, K, 1e-2);
    const int n_tight = maass::choose_N(form, K, 5e-3);
    REQUIRE(n_loose >= 65);
    REQUIRE(n_tight >= n_loose);
    // doubling the returned N moves evaluate_L by less than the target
    maass::AfeParams pa;
    pa.N = n_loose;
    maass::AfeParams pb;
    pb.N = 2 * n_loose;
    double worst = 0.0;
    for (const Complex& s : K.boundary_grid()) {
        worst = std::max(worst, std::abs(maass::evaluate_L(form, s, pa) -
                                         maass::evaluate_L(form, s, pb)));
    }
    REQUIRE(worst < 1e-2);
}

TEST_CASE("L times L_X drifts toward 1") {
    const auto& form = fixture_form(1);
    maass::AfeParams params;
    params.N = 90;
    const Complex s(0.8, 0.05);
    const Complex L = maass::evaluate_L(form, s, params);
    double prev = 1e300;
    for (double X : {10.0, 100.0, 1000.0}) {
        const double dev = std::abs(L * maass::partial_euler_inverse(form, X, s) - 1.0);
        REQUIRE(dev < 2.0 * prev);  // non-strict decrease within noise factor 2
        prev = dev;
    }
    REQUIRE(prev < 0.05);
}
