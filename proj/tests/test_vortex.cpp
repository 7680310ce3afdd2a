#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "yudovich/errors.hpp"
#include "yudovich/taylor.hpp"
#include "yudovich/vortex.hpp"

using namespace yudovich;
using std::numbers::pi;

namespace {

std::shared_ptr<const GreenEvaluator> unit_disk() {
    static const auto g = build_green(Domain::disk());
    return g;
}

VortexSystem single(double rho) { return {{{rho, 0.0}}, {2 * pi}, {}, unit_disk()}; }

VortexSystem three_disk() { return {{{0.3, 0.1}, {-0.2, 0.35}, {0.05, -0.4}}, {1.0, 0.7, -0.5}, {}, unit_disk()}; }

VortexSystem annulus_pair() {
    static const auto g = build_green(Domain::annulus(0.4, 1.0));
    return {{{0.7, 0.0}, {-0.7, 0.0}}, {1.0, 1.0}, {0.5}, g};
}

// circular orbit of the image oracle: Ω = α/(2π(1 − ρ²))
Vec2 orbit(double rho, double t) {
    const double om = 1.0 / (1.0 - rho * rho);
    return {rho * std::cos(om * t), rho * std::sin(om * t)};
}

// (1/α_i) ∇⊥_{z_i} W by central differences
std::vector<Vec2> fd_velocity(const VortexSystem& s, double h = 1e-6) {
    std::vector<Vec2> v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto W = [&](Vec2 d) {
            auto z = s.positions;
            z[i] += d;
            return routh_energy(s, z);
        };
        const Vec2 g{(W({h, 0}) - W({-h, 0})) / (2 * h), (W({0, h}) - W({0, -h})) / (2 * h)};
        v[i] = (1.0 / s.strengths[i]) * perp(g);
    }
    return v;
}

double max_position_error(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double e = 0;
    for (std::size_t l = 0; l < a.size(); ++l) e = std::max(e, distance(a[l], b[l]));
    return e;
}

}  // namespace

TEST_CASE("Routh energy of single vortices") {
    CHECK(std::abs(routh_energy({{{0, 0}}, {1.0}, {}, unit_disk()})) < 1e-15);
    CHECK(routh_energy(single(0.5)) == doctest::Approx(-pi * std::log(0.75)).epsilon(1e-13));
    auto s = three_disk();
    const double W = routh_energy(s);
    std::swap(s.positions[0], s.positions[2]);
    std::swap(s.strengths[0], s.strengths[2]);
    CHECK(routh_energy(s) == doctest::Approx(W).epsilon(1e-14));
    VortexSystem bad{{{0.1, 0.1}, {0.1, 0.1}}, {1, 1}, {}, unit_disk()};
    CHECK_THROWS_AS(routh_energy(bad), SingularityError);
}

TEST_CASE("velocity field: equilibrium and the image oracle") {
    const auto v0 = vortex_rhs({{{0, 0}}, {1.0}, {}, unit_disk()});
    CHECK(norm(v0[0]) < 1e-15);
    const auto v = vortex_rhs(single(0.5));
    // image of strength −2π at (2, 0): speed αρ/(2π(1 − ρ²)), counter-clockwise
    CHECK(std::abs(v[0].x) < 1e-14);
    CHECK(v[0].y == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("velocity equals (1/α)∇⊥W by finite differences") {
    for (const auto& s : {three_disk(), annulus_pair()}) {
        const auto v = vortex_rhs(s);
        const auto fd = fd_velocity(s);
        for (std::size_t i = 0; i < s.size(); ++i) {
            CHECK(distance(v[i], fd[i]) < 1e-6);
            CHECK(distance(v[i], fd[i]) < 1e-5 * norm(v[i]));
        }
    }
}

TEST_CASE("rhs rejects near-coincident vortices") {
    VortexSystem s{{{0.1, 0.1}, {0.1 + 1e-5, 0.1}}, {1, 1}, {}, unit_disk()};
    CHECK_THROWS_AS(vortex_rhs(s), SingularityError);
    VortexSystem outside{{{1.1, 0.0}}, {1.0}, {}, unit_disk()};
    CHECK_THROWS_AS(outside.validate(), DomainError);
    VortexSystem zero{{{0.1, 0.0}}, {0.0}, {}, unit_disk()};
    CHECK_THROWS_AS(zero.validate(), ArgumentError);
}

TEST_CASE("single vortex returns after one period 3π/2") {
    const double T = 1.5 * pi;
    const auto tr = integrate(single(0.5), T, {Method::rk45, 1e-10});
    CHECK(tr.termination.kind == Termination::Kind::horizon);
    CHECK(tr.end_time() == doctest::Approx(T));
    CHECK(distance(tr.positions.back()[0], Vec2{0.5, 0.0}) < 1e-6);
    double worst = 0;
    for (double t = 0; t <= T; t += 0.05) worst = std::max(worst, distance(tr.position_at(t)[0], orbit(0.5, t)));
    CHECK(worst < 1e-6);
    CHECK(hamiltonian_drift(tr) < 1e-8);
}

TEST_CASE("zero horizon leaves the state frozen") {
    const auto tr = integrate(three_disk(), 0.0);
    CHECK(tr.times.size() == 1);
    CHECK(hamiltonian_drift(tr) == 0.0);
}

TEST_CASE("symmetric pairs stay symmetric") {
    // equal strengths: point symmetry z₂ = −z₁
    VortexSystem eq{{{0.4, 0.2}, {-0.4, -0.2}}, {2 * pi, 2 * pi}, {}, unit_disk()};
    auto tr = integrate(eq, 3.0, {Method::rk45, 1e-10});
    double asym = 0;
    for (const auto& z : tr.positions) asym = std::max(asym, norm(z[0] + z[1]));
    CHECK(asym < 1e-9);
    // ±2π: mirror symmetry across the vertical axis (reflection flips orientation, hence the sign)
    VortexSystem pm{{{0.2, -0.3}, {-0.2, -0.3}}, {2 * pi, -2 * pi}, {}, unit_disk()};
    tr = integrate(pm, 1.0, {Method::rk45, 1e-10});
    asym = 0;
    for (const auto& z : tr.positions) asym = std::max(asym, std::abs(z[0].x + z[1].x) + std::abs(z[0].y - z[1].y));
    CHECK(asym < 1e-9);
}

TEST_CASE("co-rotating pair in the annulus conserves W") {
    const auto tr = integrate(annulus_pair(), 10.0, {Method::rk45, 1e-10});
    CHECK(tr.termination.kind == Termination::Kind::horizon);
    CHECK(hamiltonian_drift(tr) < 1e-8);
}

TEST_CASE("drift shrinks as the tolerance tightens") {
    double prev = INFINITY;
    for (double tol : {1e-6, 1e-8, 1e-10}) {
        const double d = hamiltonian_drift(integrate(three_disk(), 5.0, {Method::rk45, tol}));
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 1e-8);
}

TEST_CASE("reversibility and angular impulse") {
    const auto s = three_disk();
    const auto fwd = integrate(s, 2.0, {Method::rk45, 1e-12});
    const auto back = integrate(reversed(s, fwd.positions.back()), 2.0, {Method::rk45, 1e-12});
    CHECK(max_position_error(back.positions.back(), s.positions) < 1e-7);

    auto impulse = [&](const std::vector<Vec2>& z) {
        double I = 0;
        for (std::size_t l = 0; l < z.size(); ++l) I += s.strengths[l] * norm2(z[l]);
        return I;
    };
    double drift = 0;
    for (const auto& z : fwd.positions) drift = std::max(drift, std::abs(impulse(z) - impulse(s.positions)));
    CHECK(drift < 1e-7);
}

TEST_CASE("early termination on boundary proximity and collision") {
    // dipole launched from the centre runs into the wall
    VortexSystem dip{{{0.05, 0.0}, {-0.05, 0.0}}, {-2 * pi, 2 * pi}, {}, unit_disk()};
    IntegrateOptions o;
    o.boundary_factor = 0.2;  // ε_bdry = 0.4
    auto tr = integrate(dip, 20.0, o);
    CHECK(tr.termination.kind == Termination::Kind::boundary_proximity);
    CHECK(tr.end_time() < 20.0);
    CHECK(tr.boundary_distance.back() == doctest::Approx(0.4).epsilon(1e-6));

    VortexSystem pair{{{0.9, 0.0}, {-0.3, 0.0}}, {2 * pi, -2 * pi}, {}, unit_disk()};
    o = {};
    o.collision_factor = 0.4;  // ε_coll = 0.8, crossed on the way to the closest approach ≈ 0.676
    tr = integrate(pair, 10.0, o);
    CHECK(tr.termination.kind == Termination::Kind::collision);
    CHECK(tr.termination.first == 0);
    CHECK(tr.termination.second == 1);
    CHECK(tr.min_pair_distance.back() == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("weak residual") {
    const VortexTrajectory empty = integrate({{}, {}, {}, unit_disk()}, 1.0);
    CHECK(weak_residual(empty, {{0.0, 0.0}, 0.5, 1.0}).residual == 0.0);

    const auto rest = integrate({{{0, 0}}, {1.0}, {}, unit_disk()}, 2.0);
    const auto wr = weak_residual(rest, {{0.0, 0.0}, 0.6, 2.0});
    CHECK(wr.residual < 1e-10);
    CHECK(wr.initial == doctest::Approx(1.0));

    CHECK_THROWS_AS(weak_residual(rest, {{0.5, 0.0}, 0.6, 2.0}), ArgumentError);
    CHECK_THROWS_AS(weak_residual(rest, {{0.0, 0.0}, 0.5, 3.0}), ArgumentError);

    const TestFunction phi{{0.5, 0.0}, 0.3, 3.0};
    double prev = INFINITY;
    std::vector<double> res, steps;
    for (double tol : {1e-6, 1e-8, 1e-10}) {
        const auto tr = integrate(single(0.5), 3.0, {Method::rk45, tol});
        const auto w = weak_residual(tr, phi);
        CHECK(std::abs(w.initial - 1.0 * 2 * pi) < 1e-12);
        CHECK(w.residual < prev);
        prev = w.residual;
        res.push_back(w.residual);
        double mean = 0;
        for (double h : tr.step_sizes) mean += h;
        steps.push_back(mean / static_cast<double>(tr.step_sizes.size()));
    }
    CHECK(prev < 1e-5);
    const double order = std::log(res[0] / res[2]) / std::log(steps[0] / steps[2]);
    MESSAGE("observed order " << order);
    CHECK(order >= 4.0);
}

TEST_CASE("Taylor coefficients of the circular orbit") {
    const auto s = single(0.5);
    const double om = 4.0 / 3.0;
    const auto a = taylor_coefficients(s, s.positions, 20);
    double fact = 1, worst = 0;
    for (int k = 0; k <= 20; ++k) {
        if (k > 0) fact *= k;
        const double ex = k % 2 == 0 ? 0.5 * (k % 4 == 0 ? 1 : -1) * std::pow(om, k) / fact : 0.0;
        const double ey = k % 2 == 1 ? 0.5 * (k % 4 == 1 ? 1 : -1) * std::pow(om, k) / fact : 0.0;
        worst = std::max({worst, std::abs(a[0][static_cast<std::size_t>(k)] - ex), std::abs(a[1][static_cast<std::size_t>(k)] - ey)});
    }
    CHECK(worst < 1e-10);

    const auto eq = taylor_coefficients({{{0, 0}}, {1.0}, {}, unit_disk()}, {{0, 0}}, 12);
    for (const auto& c : eq)
        for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k] == 0.0);
    CHECK_THROWS_AS(analyticity_estimate(eq), FitError);
}

TEST_CASE("analyticity estimate") {
    const auto s = single(0.5);
    std::vector<double> shat;
    for (int K : {12, 16, 20}) {
        const auto e = analyticity_estimate(taylor_coefficients(s, s.positions, K));
        CHECK(e.s_hat >= 0.9);
        CHECK(e.s_hat <= 1.1);
        CHECK(std::abs(e.rho_hat - 0.75) < 0.2 * 0.75);
        shat.push_back(e.s_hat);
    }
    CHECK(*std::max_element(shat.begin(), shat.end()) - *std::min_element(shat.begin(), shat.end()) < 0.05);

    // synthetic derivative magnitudes (k!)²/10^k: Gevrey order 2
    std::vector<std::vector<double>> syn(1);
    for (int k = 0; k <= 20; ++k) syn[0].push_back(std::exp(2 * std::lgamma(k + 1.0) - k * std::log(10.0)));
    const auto e = analyticity_estimate(syn, 4, true);
    CHECK(e.s_hat >= 1.9);
    CHECK(e.s_hat <= 2.1);

    auto mfs = build_green(Domain::disk(1.0, 256), {.backend = GreenOptions::Backend::mfs});
    VortexSystem m{{{0.2, 0}}, {1.0}, {}, mfs};
    CHECK_THROWS_AS(taylor_coefficients(m, m.positions, 12), ArgumentError);
}

TEST_CASE("Taylor integration agrees with rk45") {
    const auto s = three_disk();
    const auto rk = integrate(s, 1.0, {Method::rk45, 1e-12});
    const auto ty = integrate(s, 1.0, {Method::taylor, 1e-14, 20});
    CHECK(ty.termination.kind == Termination::Kind::horizon);
    CHECK(max_position_error(rk.positions.back(), ty.positions.back()) < 1e-9);
    CHECK(hamiltonian_drift(ty) < 1e-10);

    const auto one = integrate(single(0.5), 1.5 * pi, {Method::taylor, 1e-14, 20});
    CHECK(distance(one.positions.back()[0], Vec2{0.5, 0.0}) < 1e-10);
    CHECK(distance(one.position_at(1.0)[0], orbit(0.5, 1.0)) < 1e-10);

    const auto ann = integrate(annulus_pair(), 2.0, {Method::taylor, 1e-13, 20});
    const auto annrk = integrate(annulus_pair(), 2.0, {Method::rk45, 1e-12});
    CHECK(max_position_error(ann.positions.back(), annrk.positions.back()) < 1e-9);
}
