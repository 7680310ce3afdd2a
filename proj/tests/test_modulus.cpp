#include "doctest.h"

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "yudovich/errors.hpp"
#include "yudovich/modulus.hpp"

using namespace yudovich;
using std::numbers::e;

TEST_CASE("osgood_bound closed forms") {
    const Modulus lip = Modulus::power(1.0, 10.0);
    for (double t : {0.0, 0.3, 1.0, 2.0}) {
        const double c = 0.01;
        CHECK(osgood_bound(lip, c, t).value == doctest::Approx(c * std::exp(t)).epsilon(1e-10));
    }
    // h log(1/h) = 0.5·h·log(h⁻²)
    const Modulus hl = Modulus::h_log(0.5, std::exp(-1.0));
    for (double c : {1e-3, 1e-8, 1e-40}) {
        for (double t : {0.1, 0.5, 1.0}) {
            const auto r = osgood_bound(hl, c, t);
            const double exact = std::pow(c, std::exp(-t));
            if (exact < hl.a()) {
                CHECK_FALSE(r.saturated);
                CHECK(r.value == doctest::Approx(exact).epsilon(1e-8));
            }
        }
    }
    const auto sat = osgood_bound(lip, 1.0, 10.0);
    CHECK(sat.saturated);
    CHECK(sat.value == 10.0);
}

TEST_CASE("gamma family: defining integral, semigroup, monotonicity") {
    const Modulus hl = Modulus::h_log(0.5, std::exp(-1.0));
    const GammaFamily fam(hl, 1.0, 2.0);
    CHECK(fam.a_tilde() > 0.0);
    CHECK(reciprocal_integral(hl, fam.a_tilde(), hl.a()) >= 2.0);
    const std::vector<double> hs{1e-30, 1e-12, 1e-6, fam.a_tilde()};
    for (double h : hs) {
        CHECK(fam(0.0, h) == h);
        double prev = h;
        for (double t : {0.25, 0.5, 1.0, 1.5, 2.0}) {
            const double g = fam(t, h);
            CHECK(g >= prev);
            prev = g;
            CHECK(g == doctest::Approx(std::pow(h, std::exp(-t))).epsilon(1e-8));
            CHECK(std::abs(reciprocal_integral(hl, h, g) - t) < 1e-9);
        }
        const double comp = fam.evaluate_unrestricted(0.5, fam(1.0, h)).value;
        CHECK(std::abs(reciprocal_integral(hl, h, comp) - 1.5) < 1e-8);
    }
    double prev = 0.0;
    for (double h : hs) {
        const double g = fam(1.0, h);
        CHECK(g >= prev);
        prev = g;
    }
    CHECK(fam(1.0, 0.0) == 0.0);
    CHECK_THROWS_AS(fam(1.0, 2.0 * fam.a_tilde()), DomainError);
}

TEST_CASE("yudovich modulus from theta_0 behaves like e·h·log(h⁻²)") {
    const Germ g0 = Germ::theta_m(0, 2.0);
    const Modulus mu = Modulus::from_germ(g0, 1.0, 0.3);
    for (double h : {1e-3, 1e-10, 1e-100}) {
        const double L = std::log(1.0 / (h * h));
        CHECK(mu(h) / (h * L) == doctest::Approx(e).epsilon(1e-10));
    }
    CHECK(mu(0.3) > 0.0);
    CHECK(std::isfinite(mu(0.3)));
    CHECK_THROWS_AS(Modulus::from_germ(g0, 1.0, 1.5), DomainError);
}

TEST_CASE("yudovich modulus satisfies modulus invariants on a 10^3 grid") {
    for (int m : {0, 1}) {
        const Modulus mu = Modulus::from_germ(Germ::theta_m(m), 1.0, 0.25);
        double prev = mu(0.0);
        CHECK(prev == 0.0);
        for (int i = 1; i <= 1000; ++i) {
            const double h = 0.25 * std::pow(10.0, -12.0 * (1000 - i) / 999.0);
            const double v = mu(h);
            CHECK(v > prev);
            prev = v;
        }
        CHECK(mu(1e-200) < 1e-190);
    }
}

TEST_CASE("theta_1 modulus bounded by C e h θ_2(h⁻²)") {
    const Germ g1 = Germ::theta_m(1);
    const Modulus mu = Modulus::from_germ(g1, 1.0, 0.25);
    for (double h : {0.2, 1e-3, 1e-20, 1e-150}) {
        const double L = std::log(1.0 / (h * h));
        CHECK(mu(h) <= e * h * L * std::log(L) * (1 + 1e-12));
    }
}

TEST_CASE("loglog bound dominates Gamma_t for the theta_1 modulus") {
    const double C = 1.0, kappa = 1.0;
    const Modulus mu = Modulus::from_germ(Germ::theta_m(1), C, 0.25);
    const GammaFamily fam(mu, kappa, 0.1);
    for (double t : {0.02, 0.05, 0.1}) {
        for (int k = 0; k <= 60; ++k) {
            const double h = fam.a_tilde() * std::ldexp(1.0, -k);
            const double L = std::log(1.0 / (h * h));
            const double bound = std::exp(-0.5 * std::pow(L, std::exp(-2.0 * C * e * kappa * t)));
            CHECK(fam(t, h) <= bound * (1 + 1e-10));
        }
    }
}

TEST_CASE("dini integral evidence") {
    const Modulus pw = Modulus::power(0.5, 1.0);
    const auto d = dini_integral(pw, 1e-12);
    CHECK(d.partial == doctest::Approx(2.0 * (1.0 - 1e-6)).epsilon(1e-10));
    CHECK(d.tail_ratio == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-10));
    CHECK(d.extrapolated == doctest::Approx(2.0).epsilon(1e-9));

    // 1/log(1/h): increments log(log(1/h_{k+1})/log(1/h_k)) ~ 1/k, ratio → 1
    const Modulus li = Modulus::log_inverse(1.0, 0.5);
    const auto n = dini_integral(li, 0.5 * std::ldexp(1.0, -200));
    const double exact = std::log(201.0);
    CHECK(n.partial == doctest::Approx(exact).epsilon(1e-9));
    CHECK(n.tail_ratio > 0.99);
    CHECK(n.scaled_last > 0.9);
    CHECK(std::isinf(n.extrapolated));
}

TEST_CASE("Gamma_t^r of the theta_1 flow modulus is Dini") {
    const Modulus mu = Modulus::from_germ(Germ::theta_m(1), 1.0, 0.25);
    auto fam = std::make_shared<const GammaFamily>(mu, 1.0, 0.1);
    const Modulus gr = Modulus::gamma_power(fam, 0.1, 0.5);
    const auto d = dini_integral(gr, gr.a() * std::ldexp(1.0, -400));
    // k·inc_k keeps shrinking with depth (harmonic decay would keep it flat)
    const auto& inc = d.increments;
    CHECK(400.0 * inc[399] < 0.3 * 200.0 * inc[199]);
    CHECK(200.0 * inc[199] < 0.3 * 100.0 * inc[99]);
    double tail = 0.0;
    for (std::size_t k = d.increments.size() / 2; k < d.increments.size(); ++k) tail += d.increments[k];
    CHECK(tail < 0.2 * d.partial);
}

TEST_CASE("holder composition bound") {
    CHECK(holder_compose_bound(0.0, 0.3, 5.0) == 0.0);
    CHECK(holder_compose_bound(1.0, 0.5, 4.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(holder_compose_bound(1.0, 1.5, 4.0), DomainError);
}

TEST_CASE("upsilon sums") {
    auto u = upsilon_sum(1, 0);
    CHECK(u.exact == "1/1");
    CHECK(u.bound == 20.0);
    u = upsilon_sum(2, 1);
    CHECK(u.exact == "1/2");
    CHECK(u.bound == 100.0);
    CHECK(upsilon_sum(3, 0).value == 1.0);
    CHECK(upsilon_sum(3, 0).bound == 8000.0);
    // convolution oracle: S_s(m) = Σ_j S_{s−1}(m−j)/(1+j)²
    for (int s = 1; s <= 6; ++s) {
        std::vector<double> S(13, 0.0);
        S[0] = 1.0;
        for (int step = 0; step < s; ++step) {
            std::vector<double> N(13, 0.0);
            for (int m = 0; m <= 12; ++m)
                for (int j = 0; j <= m; ++j) N[m] += S[m - j] / ((1.0 + j) * (1.0 + j));
            S = N;
        }
        for (int m = 0; m <= 12; ++m) {
            const auto r = upsilon_sum(s, m);
            CHECK(r.value == doctest::Approx(S[m]).epsilon(1e-13));
            CHECK(r.value <= r.bound);
        }
    }
    CHECK_THROWS_AS(upsilon_sum(9, 2), SizeError);
}
