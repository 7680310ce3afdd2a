#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "yudovich/errors.hpp"
#include "yudovich/newton.hpp"
#include "yudovich/quadrature.hpp"

using namespace yudovich;
using std::numbers::pi;

namespace {

double dini_profile(double r) { return r > 0.0 ? 1.0 / std::pow(std::log(4.0 / r), 2) : 0.0; }

Density dini_density() { return Density::radial(dini_profile, Modulus::log_inverse(2.0, 0.25)); }

// radial potential: Ψ'(ρ) = (1/ρ)∫₀^ρ f(s) s ds, u = Ψ''·e_r e_r + (Ψ'/ρ)·e_θ e_θ
std::array<double, 3> radial_oracle(double (*prof)(double), Vec2 x) {
    const double rho = norm(x);
    quad::Options o;
    o.abs_tol = 1e-15;
    o.rel_tol = 1e-13;
    std::vector<double> br{0.0};
    for (double h = rho * 1e-12; h < rho; h *= 4.0) br.push_back(h);
    br.push_back(rho);
    const double m = quad::gauss_kronrod([&](double s) { return prof(s) * s; }, br, o).value;
    const double dpsi = m / rho;
    const double urr = prof(rho) - dpsi / rho;
    const double utt = dpsi / rho;
    const double c = x.x / rho, s = x.y / rho;
    return {urr * c * c + utt * s * s, (urr - utt) * c * s, urr * s * s + utt * c * c};
}

}  // namespace

TEST_CASE("potential of the uniform disk") {
    const Density one = Density::constant(1.0);
    CHECK(newton_potential(one, {0.0, 0.0}) == doctest::Approx(-0.25).epsilon(1e-12));
    for (double rho : {0.3, 0.7, 0.95, 0.999}) {
        const Vec2 x{rho * std::cos(0.4), rho * std::sin(0.4)};
        CHECK(std::abs(newton_potential(one, x) - (rho * rho - 1.0) / 4.0) < 1e-9);
    }
    // outside: the whole mass π sits at the centre
    for (double rho : {1.0, 1.2, 3.0}) {
        const Vec2 x{0.0, rho};
        CHECK(std::abs(newton_potential(one, x) - 0.5 * std::log(rho)) < 1e-9);
    }
    CHECK(newton_potential(Density::constant(0.0), {0.2, 0.1}) == 0.0);
}

TEST_CASE("second derivatives of the uniform disk") {
    const Density one = Density::constant(1.0);
    const auto u0 = newton_second_derivatives(one, {0.0, 0.0});
    CHECK(std::abs(u0.trace() - 1.0) < 1e-10);
    CHECK(std::abs(u0.u[0][1]) < 1e-12);
    CHECK(std::abs(u0.u[1][0]) < 1e-12);
    for (Vec2 x : {Vec2{0.5, 0.2}, Vec2{-0.1, 0.9}}) {
        const auto u = newton_second_derivatives(one, x);
        CHECK(std::abs(u.u[0][0] - 0.5) < 1e-9);
        CHECK(std::abs(u.u[1][1] - 0.5) < 1e-9);
        CHECK(std::abs(u.u[0][1]) < 1e-9);
        CHECK(u.asymmetry() < 1e-8);
    }
}

TEST_CASE("linear density against the closed-form potential") {
    // Ψ = x₁(ρ²/8 − 1/4) inside the unit disk; matches the exterior dipole −x₁/(8ρ²) in C¹
    const Density lin = Density::linear({1.0, 0.0}, 0.0);
    for (Vec2 x : {Vec2{0.3, 0.4}, Vec2{-0.6, 0.1}, Vec2{0.05, -0.8}}) {
        const double rho2 = norm2(x);
        CHECK(std::abs(newton_potential(lin, x) - x.x * (rho2 / 8.0 - 0.25)) < 1e-10);
        const auto u = newton_second_derivatives(lin, x);
        CHECK(std::abs(u.u[0][0] - 0.75 * x.x) < 1e-5);
        CHECK(std::abs(u.u[1][1] - 0.25 * x.x) < 1e-5);
        CHECK(std::abs(u.u[0][1] - 0.25 * x.y) < 1e-5);
        CHECK(std::abs(u.u[1][0] - 0.25 * x.y) < 1e-5);
        CHECK(u.asymmetry() < 1e-8);
        CHECK(std::abs(u.trace() - x.x) < 1e-6);
    }
    const Vec2 out{1.5, 0.5};
    CHECK(std::abs(newton_potential(lin, out) + out.x / (8.0 * norm2(out))) < 1e-10);
}

TEST_CASE("Dini but not Hölder radial density") {
    const Density f = dini_density();
    std::vector<Vec2> samples;
    for (int k = 0; k < 20; ++k) {
        const double rho = k == 0 ? 0.0 : 0.85 * std::pow(10.0, -6.0 * (19 - k) / 18.0);
        samples.push_back({rho * std::cos(0.7 * k), rho * std::sin(0.7 * k)});
    }
    const LaplacianReport rep = laplacian_check(f, samples);
    CHECK(rep.max_error < 1e-3);
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const auto o = radial_oracle(dini_profile, samples[i]);
        const auto& u = rep.values[i];
        CHECK(std::abs(u.u[0][0] - o[0]) < 1e-6);
        CHECK(std::abs(u.u[0][1] - o[1]) < 1e-6);
        CHECK(std::abs(u.u[1][1] - o[2]) < 1e-6);
        CHECK(u.asymmetry() < 1e-8);
    }
    // centre: Ψ'/ρ → 0 since f(0) = 0
    CHECK(std::abs(rep.values[0].u[0][0]) < 1e-9);
    CHECK(rep.values[0].budget > 0.0);
    CHECK(rep.values[0].tail_share < 0.15);
}

TEST_CASE("non-Dini density is flagged") {
    const Density f = Density::radial([](double r) { return r > 0.0 ? 1.0 / std::log(4.0 / r) : 0.0; },
                                      Modulus::log_inverse(1.0, 0.25));
    CHECK_THROWS_AS(newton_second_derivatives(f, {0.0, 0.0}), AccuracyError);
    try {
        newton_second_derivatives(f, {0.0, 0.0});
    } catch (const AccuracyError& e) {
        CHECK(e.partial_dini() > 1.0);
    }
}

TEST_CASE("second differences of the potential converge") {
    // quadratic density: the potential is quartic, so the O(h²) term of the difference is visible
    Density lin = Density::constant(1.0);
    lin.f = [](Vec2 y) { return 1.0 + 2.0 * y.x * y.x - y.x * y.y; };
    const Vec2 x{0.2, -0.3};
    const auto u = newton_second_derivatives(lin, x);
    std::vector<double> err;
    for (double h : {0.08, 0.04, 0.02}) {
        const double c = newton_potential(lin, x);
        const double d11 = (newton_potential(lin, {x.x + h, x.y}) - 2 * c + newton_potential(lin, {x.x - h, x.y})) / (h * h);
        const double d22 = (newton_potential(lin, {x.x, x.y + h}) - 2 * c + newton_potential(lin, {x.x, x.y - h})) / (h * h);
        err.push_back(std::max(std::abs(d11 - u.u[0][0]), std::abs(d22 - u.u[1][1])));
    }
    CHECK(err[2] < err[1]);
    CHECK(err[1] < err[0]);
    CHECK(err[1] / err[2] > 3.0);

    const Density f = dini_density();
    const Vec2 y{0.3, 0.1};
    const auto v = newton_second_derivatives(f, y);
    std::vector<double> e2;
    for (double h : {0.04, 0.02, 0.01}) {
        const double c = newton_potential(f, y);
        const double d11 = (newton_potential(f, {y.x + h, y.y}) - 2 * c + newton_potential(f, {y.x - h, y.y})) / (h * h);
        e2.push_back(std::abs(d11 - v.u[0][0]));
    }
    CHECK(e2[2] < e2[0]);
}

TEST_CASE("mollified kernels approach u") {
    const Density f = dini_density();
    for (Vec2 x : {Vec2{0.0, 0.0}, Vec2{0.3, 0.2}, Vec2{0.005, 0.0}}) {
        const auto u = newton_second_derivatives(f, x);
        for (double eps : {1e-2, 1e-3}) {
            const auto m = mollified_second_derivatives(f, x, eps);
            double err = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) err = std::max(err, std::abs(m.u[i][j] - u.u[i][j]));
            CHECK(err <= m.budget);
        }
    }
    // smooth density: the mollified derivative is exact up to O(ε²) terms
    const Density lin = Density::linear({1.0, 0.0}, 0.0);
    const auto m = mollified_second_derivatives(lin, {0.3, 0.4}, 1e-3);
    CHECK(std::abs(m.u[0][0] - 0.225) < 1e-5);
    CHECK(std::abs(m.u[0][1] - 0.1) < 1e-5);
}

TEST_CASE("quintic ramp") {
    CHECK(ramp_eta(1.0) == 0.0);
    CHECK(ramp_eta(2.0) == 1.0);
    CHECK(ramp_eta_derivative(1.0) == 0.0);
    CHECK(ramp_eta_derivative(2.0) == 0.0);
    double peak = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double s = 1.0 + k / 100.0;
        peak = std::max(peak, ramp_eta_derivative(s));
        if (k > 0) CHECK(ramp_eta(s) >= ramp_eta(s - 0.01));
    }
    CHECK(peak <= 2.0);
    CHECK(dini_head(Modulus::log_inverse(2.0, 0.25), 1e-3) == doctest::Approx(1.0 / std::log(1e3)));
}

TEST_CASE("argument checks") {
    const Density one = Density::constant(1.0);
    CHECK_THROWS_AS(newton_second_derivatives(one, {1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(mollified_second_derivatives(one, {0.0, 0.0}, 0.0), DomainError);
    Density bad;
    CHECK_THROWS_AS(newton_potential(bad, {0.0, 0.0}), ArgumentError);
}
