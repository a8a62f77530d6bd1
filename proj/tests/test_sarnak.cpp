#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "maasslab/rng.hpp"
#include "maasslab/sarnak.hpp"

using Catch::Approx;

namespace {
constexpr double kPi = 3.14159265358979323846;

// closed-form CDF of mu_p via the substitution x = 2 sin(theta):
//   F(x) = (1+p)/(2 pi) [ (th + pi/2) - ((p-1)/(p+1)) (atan(((p-1)/(p+1)) tan th) + pi/2) ]
double oracle_cdf(double p, double x) {
    if (x <= -2.0) return 0.0;
    if (x >= 2.0) return 1.0;
    const double th = std::asin(x / 2.0);
    const double ratio = (p - 1.0) / (p + 1.0);
    return (1.0 + p) / (2.0 * kPi) *
           ((th + kPi / 2.0) - ratio * (std::atan(ratio * std::tan(th)) + kPi / 2.0));
}
}  // namespace

TEST_CASE("sarnak density values") {
    REQUIRE(maass::sarnak_density(2, 2.0) == 0.0);
    REQUIRE(maass::sarnak_density(2, -2.0) == 0.0);
    REQUIRE(maass::sarnak_density(2, 2.5) == 0.0);
    REQUIRE(maass::sarnak_density(7, -3.0) == 0.0);
    // (1/2pi) * 3 * 2 / 4.5 = 2/(3 pi)
    REQUIRE(maass::sarnak_density(2, 0.0) ==
            Approx(2.0 / (3.0 * kPi)).epsilon(1e-14));
    for (double x = -2.2; x <= 2.2; x += 0.05)
        REQUIRE(maass::sarnak_density(13, x) >= 0.0);
}

TEST_CASE("total mass is 1") {
    for (std::uint64_t p : {2ULL, 3ULL, 97ULL, 10007ULL}) {
        maass::SarnakMeasure mu(p);
        REQUIRE(std::abs(mu.total_mass() - 1.0) < 1e-10);
    }
}

TEST_CASE("interval masses") {
    maass::SarnakMeasure mu(2);
    REQUIRE(mu.interval_mass(-2.0, 2.0) == Approx(1.0).margin(1e-12));
    REQUIRE(mu.interval_mass(0.0, 2.0) == Approx(0.5).margin(1e-12));
    REQUIRE(mu.interval_mass(0.3, 0.3) == 0.0);
    REQUIRE_THROWS_AS(mu.interval_mass(1.0, 0.0), maass::error);
    // frozen external value
    REQUIRE(mu.interval_mass(-0.1, 0.1) ==
            Approx(0.0424550840087853726).margin(1e-12));
    // first order ~ 0.2 * density(2, 0)
    REQUIRE(mu.interval_mass(-0.1, 0.1) ==
            Approx(0.2 * maass::sarnak_density(2, 0.0)).margin(2e-5));
    // symmetry and additivity
    maass::CounterRng rng(9);
    for (int i = 0; i < 24; ++i) {
        const double a = -2.0 + 4.0 * rng.uniform(3 * i);
        const double b = -2.0 + 4.0 * rng.uniform(3 * i + 1);
        const double c = -2.0 + 4.0 * rng.uniform(3 * i + 2);
        const double lo = std::min(a, b), hi = std::max(a, b);
        REQUIRE(mu.interval_mass(lo, hi) ==
                Approx(mu.interval_mass(-hi, -lo)).margin(1e-12));
        if (lo <= c && c <= hi) {
            REQUIRE(mu.interval_mass(lo, hi) ==
                    Approx(mu.interval_mass(lo, c) + mu.interval_mass(c, hi))
                        .margin(1e-9));
        }
    }
    // positive mass for any box center in [-2,2]
    for (double w : {-2.0, -0.5, 0.0, 1.7, 2.0}) {
        const double lo = std::max(w - 0.01, -2.0);
        const double hi = std::min(w + 0.01, 2.0);
        REQUIRE(mu.interval_mass(lo, hi) > 0.0);
    }
}

TEST_CASE("cdf matches the closed form") {
    for (std::uint64_t p : {2ULL, 5ULL, 101ULL}) {
        maass::SarnakMeasure mu(p);
        for (double x = -1.95; x <= 1.951; x += 0.13) {
            REQUIRE(mu.cdf(x) ==
                    Approx(oracle_cdf(static_cast<double>(p), x)).margin(1e-10));
        }
        REQUIRE(mu.cdf(-2.0) == 0.0);
        REQUIRE(std::abs(mu.cdf(2.0) - 1.0) < 1e-10);
    }
}

TEST_CASE("semicircle limit at large p") {
    double sup = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double x = -2.0 + 4.0 * i / 1000.0;
        const double semi = x * x >= 4.0 ? 0.0 : std::sqrt(4.0 - x * x) / (2.0 * kPi);
        sup = std::max(sup, std::abs(maass::sarnak_density(1000000, x) - semi));
    }
    REQUIRE(sup < 1e-4);
}

TEST_CASE("quantile") {
    maass::SarnakMeasure mu(3);
    REQUIRE(std::abs(mu.quantile(0.5)) < 1e-9);
    REQUIRE(mu.quantile(0.0) == -2.0);
    REQUIRE(mu.quantile(1.0) == 2.0);
    for (double u = 0.02; u < 1.0; u += 0.044) {
        REQUIRE(mu.cdf(mu.quantile(u)) == Approx(u).margin(1e-8));
    }
    REQUIRE_THROWS_AS(mu.quantile(1.5), maass::error);
}

TEST_CASE("sampling follows mu_p") {
    maass::SarnakMeasure mu(2);
    maass::CounterRng rng(2024);
    const int n = 20000;
    std::vector<double> sample(n);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        sample[i] = mu.sample_at(rng, static_cast<std::uint64_t>(i));
        REQUIRE(sample[i] >= -2.0);
        REQUIRE(sample[i] <= 2.0);
        mean += sample[i];
    }
    mean /= n;
    const double d =
        maass::ks_distance(sample, [&](double x) { return mu.cdf(x); });
    REQUIRE(d < 1.63 / std::sqrt(static_cast<double>(n)));
    // even density: mean 0 within 3 sigma, Var = int x^2 dmu_2 = 1.5
    REQUIRE(std::abs(mean) < 3.0 * std::sqrt(1.5 / n));
}

TEST_CASE("second moment of mu_2 via quadrature") {
    maass::SarnakMeasureCache cache;
    const double m2 = maass::product_measure_integral(
        cache, {2}, {[](double x) { return x * x; }});
    REQUIRE(m2 == Approx(1.5).margin(1e-9));
}

TEST_CASE("conditional sampling stays in the box") {
    maass::SarnakMeasure mu(5);
    maass::CounterRng rng(77);
    for (int i = 0; i < 500; ++i) {
        const double x = mu.sample_conditional(0.2, 0.4, rng.uniform(i));
        REQUIRE(x >= 0.2 - 1e-9);
        REQUIRE(x <= 0.4 + 1e-9);
    }
}

TEST_CASE("box family validation and clipping") {
    REQUIRE_THROWS_AS(maass::BoxFamily(0.0, {{2, 0.0}}), maass::validation_error);
    REQUIRE_THROWS_AS(maass::BoxFamily(0.1, {{2, 2.5}}), maass::validation_error);
    REQUIRE_THROWS_AS(maass::BoxFamily(0.01, {{2, 0.0}}, /*strict=*/true),
                      maass::validation_error);
    REQUIRE_NOTHROW(maass::BoxFamily(1e-4, {{2, 0.0}}, /*strict=*/true));
    maass::BoxFamily wide(4.0, {{2, 0.0}});
    auto [lo, hi] = wide.box(2);
    REQUIRE(lo == -2.0);
    REQUIRE(hi == 2.0);
    REQUIRE(wide.contains(2, 1.99));
    REQUIRE_FALSE(wide.contains(2, 2.05));
    REQUIRE_THROWS_AS(wide.box(3), maass::missing_coordinate_error);
}

TEST_CASE("empirical_average basics") {
    maass::SarnakMeasureCache cache;
    std::vector<maass::MaassFormData> forms;
    maass::CounterRng rng(31);
    for (int j = 0; j < 400; ++j) {
        std::map<std::uint64_t, double> eigs;
        eigs[2] = cache.at(2).sample_at(rng.substream(j), 0);
        eigs[3] = cache.at(3).sample_at(rng.substream(j), 1);
        forms.emplace_back(1.0 + j, 0, eigs, 3,
                           maass::MaassFormData::Source::synthetic);
    }
    const double one = maass::empirical_average(
        forms, {2, 3}, [](const std::vector<double>&) { return 1.0; });
    REQUIRE(one == 1.0);
    const double emp = maass::empirical_average(
        forms, {2}, [](const std::vector<double>& v) { return v[0] * v[0]; });
    // CLT bound: Var(x^2) <= E x^4 <= 16, 3 sigma with n = 400
    REQUIRE(std::abs(emp - 1.5) < 3.0 * 4.0 / 20.0);
}
