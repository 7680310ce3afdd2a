#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "yudovich/errors.hpp"
#include "yudovich/green.hpp"

using namespace yudovich;
using std::numbers::pi;

namespace {

constexpr double inv2pi = 0.5 / pi;

// Method-of-images oracle for the unit disk, written as in the classical formula.
double disk_oracle(Vec2 x, Vec2 y) {
    const double ny = norm(y);
    if (ny == 0.0) return inv2pi * std::log(norm(x));
    const Vec2 ystar = (1.0 / (ny * ny)) * y;
    return inv2pi * (std::log(distance(x, y)) - std::log(ny * distance(x, ystar)));
}

std::vector<Vec2> circle_points(double r, std::size_t n, bool ccw, Vec2 c = {}) {
    std::vector<Vec2> p(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = 2 * pi * k / n;
        p[k] = c + Vec2{r * std::cos(t), (ccw ? 1 : -1) * r * std::sin(t)};
    }
    return p;
}

Vec2 random_in_annulus(std::mt19937_64& rng, double rlo, double rhi) {
    std::uniform_real_distribution<double> U(0, 1);
    const double r = rlo + (rhi - rlo) * U(rng);
    const double t = 2 * pi * U(rng);
    return {r * std::cos(t), r * std::sin(t)};
}

Vec2 fd_grad(const std::function<double(Vec2)>& f, Vec2 x, double h = 1e-5) {
    return {(f(x + Vec2{h, 0}) - f(x - Vec2{h, 0})) / (2 * h), (f(x + Vec2{0, h}) - f(x - Vec2{0, h})) / (2 * h)};
}

}  // namespace

TEST_CASE("disk Green function matches the image formula and is symmetric") {
    const auto ev = build_green(Domain::disk());
    CHECK(ev->d() == 0);
    CHECK(ev->kernel() != nullptr);
    const Vec2 x{0.5, 0}, y{0, 0.5};
    CHECK(std::abs(ev->G(x, y) - ev->G(y, x)) < 1e-12);
    std::mt19937_64 rng(7);
    double worst = 0, sym = 0;
    for (int k = 0; k < 200; ++k) {
        const Vec2 a = random_in_annulus(rng, 0.0, 0.95), b = random_in_annulus(rng, 0.0, 0.95);
        worst = std::max(worst, std::abs(ev->G(a, b) - disk_oracle(a, b)));
        sym = std::max(sym, std::abs(ev->G(a, b) - ev->G(b, a)));
        CHECK(ev->G(a, b) == doctest::Approx(ev->G0(a, b)));
    }
    CHECK(worst < 1e-12);
    CHECK(sym < 1e-12);
}

TEST_CASE("disk Robin function") {
    const auto ev = build_green(Domain::disk());
    CHECK(std::abs(ev->robin({0, 0})) < 1e-15);
    CHECK(ev->robin({0.5, 0}) == doctest::Approx(-inv2pi * std::log(0.75)).epsilon(1e-13));
    CHECK(ev->robin({0.5, 0}) == doctest::Approx(0.045786).epsilon(1e-4));
    CHECK(ev->robin({0, 0.5}) == doctest::Approx(ev->robin({0.3, -0.4})).epsilon(1e-13));
    CHECK_THROWS_AS(ev->robin({1.2, 0}), DomainError);
    // radius-2 disk: r(x) = −(1/2π) log((R² − ‖x‖²)/R)
    const auto ev2 = build_green(Domain::disk(2.0));
    CHECK(ev2->robin({1, 0.5}) == doctest::Approx(-inv2pi * std::log((4 - 1.25) / 2.0)).epsilon(1e-13));
}

TEST_CASE("closed-form gradients agree with finite differences") {
    for (const Domain& dom : {Domain::disk(1.5), Domain::annulus(std::exp(-1.0), 1.0)}) {
        const auto ev = build_green(dom);
        const Vec2 x{0.3, 0.55}, y{-0.45, 0.2};
        const Vec2 gG = ev->grad_G(x, y), fG = fd_grad([&](Vec2 p) { return ev->G(p, y); }, x);
        CHECK(norm(gG - fG) < 1e-8);
        const Vec2 gr = ev->grad_robin(x), fr = fd_grad([&](Vec2 p) { return ev->robin(p); }, x);
        CHECK(norm(gr - fr) < 1e-8);
        const Vec2 gg = ev->grad_g(x, y), fg = fd_grad([&](Vec2 p) { return ev->g(p, y); }, x);
        CHECK(norm(gg - fg) < 1e-8);
    }
}

TEST_CASE("annulus Green function: symmetry, boundary values, zero circulation") {
    const double r0 = std::exp(-1.0);
    const auto ev = build_green(Domain::annulus(r0, 1.0));
    REQUIRE(ev->d() == 1);
    std::mt19937_64 rng(11);
    double sym = 0;
    for (int k = 0; k < 200; ++k) {
        const Vec2 a = random_in_annulus(rng, r0 + 0.02, 0.98), b = random_in_annulus(rng, r0 + 0.02, 0.98);
        sym = std::max(sym, std::abs(ev->G(a, b) - ev->G(b, a)));
    }
    CHECK(sym < 1e-8);
    for (const Vec2 y : {Vec2{0.6, 0.1}, Vec2{-0.2, -0.45}, Vec2{0.0, 0.9}}) {
        double outer = 0, mean = 0, m2 = 0;
        const int n = 64;
        for (int k = 0; k < n; ++k) {
            const double t = 2 * pi * k / n;
            outer = std::max(outer, std::abs(ev->G({std::cos(t), std::sin(t)}, y)));
            const double v = ev->G({r0 * std::cos(t), r0 * std::sin(t)}, y);
            mean += v / n;
            m2 += v * v / n;
        }
        CHECK(outer < 1e-6);
        CHECK(std::sqrt(std::max(0.0, m2 - mean * mean)) < 1e-6);
        CHECK(std::abs(circulation([&](Vec2 x) { return perp(ev->grad_G(x, y)); }, 1, *ev)) < 1e-10);
        // Dirichlet kernel vanishes on both curves
        CHECK(std::abs(ev->G0({r0, 0}, y)) < 1e-10);
        CHECK(std::abs(ev->G0({0, 1}, y)) < 1e-10);
    }
}

TEST_CASE("regular part is harmonic: second-order five-point Laplacian") {
    const auto ev = build_green(Domain::annulus(std::exp(-1.0), 1.0));
    const Vec2 y{0.1, 0.6}, x{-0.5, -0.3};
    std::vector<double> lap;
    for (double h : {0.02, 0.01, 0.005}) {
        auto g = [&](Vec2 p) { return ev->g(p, y); };
        lap.push_back(std::abs(g(x + Vec2{h, 0}) + g(x - Vec2{h, 0}) + g(x + Vec2{0, h}) + g(x - Vec2{0, h}) - 4 * g(x)) /
                      (h * h));
    }
    CHECK(lap[1] < lap[0]);
    CHECK(lap[0] / lap[1] > 3.0);  // O(h²)
    CHECK(lap[2] < 1e-5);
}

TEST_CASE("annulus period matrix and harmonic basis") {
    const double r0 = std::exp(-1.0);
    const auto ev = build_green(Domain::annulus(r0, 1.0));
    const auto& pm = ev->period_matrix();
    // m₁₁ = −∫‖∇φ₁‖² dA, radial Simpson rule in log ρ
    const int n = 2000;
    double s = 0;
    for (int k = 0; k <= n; ++k) {
        const double u = std::log(r0) + (0 - std::log(r0)) * k / n, rho = std::exp(u);
        const double grad = 1.0 / (rho * std::log(r0));
        const double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
        s += w * grad * grad * 2 * pi * rho * rho;
    }
    s *= (-std::log(r0)) / (3.0 * n);
    CHECK(pm.M(0, 0) == doctest::Approx(-s).epsilon(1e-9));
    CHECK(std::abs(pm.M(0, 0) + 2 * pi) < 1e-6);
    CHECK(pm.M(0, 0) < 0);
    CHECK(pm.P(0, 0) == doctest::Approx(-1.0 / (2 * pi)).epsilon(1e-9));

    const auto X = ev->harmonic_basis();
    REQUIRE(X.size() == 1);
    CHECK(circulation(X[0], 1, *ev) == doctest::Approx(1.0).epsilon(1e-10));
    // closed form: azimuthal field of magnitude 1/(2πρ)
    const Vec2 x{0.3, -0.5};
    const Vec2 expected = (1.0 / (2 * pi * norm2(x))) * perp(x);
    CHECK(norm(X[0](x) - expected) < 1e-12);
    // divergence and curl vanish
    const double h = 1e-4;
    auto dX = [&](Vec2 e) { return (1.0 / (2 * h)) * (X[0](x + h * e) - X[0](x - h * e)); };
    CHECK(std::abs(dX({1, 0}).x + dX({0, 1}).y) < 1e-6);
    CHECK(std::abs(dX({1, 0}).y - dX({0, 1}).x) < 1e-6);
    CHECK(build_green(Domain::disk())->harmonic_basis().empty());
}

TEST_CASE("psi0 and X0") {
    const auto ev = build_green(Domain::annulus(std::exp(-1.0), 1.0));
    CHECK(ev->psi0({0.0}, {0.5, 0}) == 0.0);
    CHECK(norm(ev->X0({0.0}, {0.5, 0})) == 0.0);
    CHECK(circulation([&](Vec2 x) { return ev->X0({1.0}, x); }, 1, *ev) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(circulation([&](Vec2 x) { return ev->X0({2.5}, x); }, 0, *ev) == doctest::Approx(2.5).epsilon(1e-10));
    // X₀ = ∇⊥ψ₀
    const Vec2 x{-0.2, 0.6};
    const Vec2 gpsi = fd_grad([&](Vec2 p) { return ev->psi0({1.7}, p); }, x);
    CHECK(norm(perp(gpsi) - ev->X0({1.7}, x)) < 1e-8);
    CHECK_THROWS_AS(ev->X0({1.0, 2.0}, x), ArgumentError);
    const auto disk = build_green(Domain::disk());
    CHECK(disk->psi0({}, {0.1, 0.1}) == 0.0);
}

TEST_CASE("circulation quadrature") {
    const auto ev = build_green(Domain::annulus(0.3, 1.0));
    // gradient field: zero circulation
    auto grad = [](Vec2 x) { return Vec2{std::cos(x.x) * x.y, std::sin(x.x) + 2 * x.y}; };  // ∇(sin x · y + y²)
    CHECK(std::abs(circulation(grad, 0, *ev)) < 1e-10);
    CHECK(std::abs(circulation(grad, 1, *ev)) < 1e-10);
    // point-vortex field around a small circle enclosing y
    const Vec2 y{0.4, 0.2};
    const BoundaryCurve small(circle_points(0.05, 128, true, y + Vec2{0.01, -0.005}));
    const double c = small.line_integral([&](Vec2 x) { return (inv2pi / norm2(x - y)) * perp(x - y); });
    CHECK(c == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("harmonic projection coefficients") {
    const auto ev = build_green(Domain::annulus(std::exp(-1.0), 1.0));
    const auto X = ev->harmonic_basis();
    auto a = project_harmonic(X[0], *ev);
    CHECK(a.alpha[0] == doctest::Approx(1.0).epsilon(1e-8));
    auto grad = [](Vec2 x) { return Vec2{2 * x.x * x.y, x.x * x.x}; };
    CHECK(std::abs(project_harmonic(grad, *ev).alpha[0]) < 1e-8);
    a = project_harmonic([&](Vec2 x) { return ev->X0({-0.7}, x); }, *ev);
    CHECK(a.alpha[0] == doctest::Approx(-0.7).epsilon(1e-8));
    // field with curl: f = ∇⊥ψ with ψ = (ρ² − r0²)(ρ² − 1), vanishing on both curves → α = 0
    const double r0 = std::exp(-1.0);
    auto f = [&](Vec2 x) {
        const double r2 = norm2(x);
        const double dpsi = 2 * r2 - r0 * r0 - 1;  // dψ/d(ρ²)
        return perp(2.0 * dpsi * x);
    };
    auto curl = [&](Vec2 x) { return 8 * norm2(x) - 4 * (r0 * r0 + 1) + 8 * norm2(x); };
    CHECK(std::abs(project_harmonic(f, *ev, curl).alpha[0]) < 1e-8);
    CHECK(std::abs(project_harmonic(f, *ev).alpha[0]) < 1e-6);
}

TEST_CASE("MFS on the unit disk agrees with the analytic kernel") {
    const auto mfs = build_green(Domain::general({circle_points(1.0, 512, true)}));
    CHECK(mfs->backend_name() == "mfs");
    CHECK(mfs->kernel() == nullptr);
    CHECK(mfs->boundary_residual() < 1e-8);
    const auto ana = build_green(Domain::disk());
    std::mt19937_64 rng(2024);
    double worst = 0, sym = 0, grad = 0;
    for (int k = 0; k < 100; ++k) {
        const Vec2 a = random_in_annulus(rng, 0.0, 0.75), b = random_in_annulus(rng, 0.0, 0.75);
        worst = std::max(worst, std::abs(mfs->G(a, b) - ana->G(a, b)));
        sym = std::max(sym, std::abs(mfs->G(a, b) - mfs->G(b, a)));
        grad = std::max(grad, norm(mfs->grad_G(a, b) - ana->grad_G(a, b)));
    }
    CHECK(worst < 1e-6);
    CHECK(sym < 1e-4);
    CHECK(grad < 1e-5);
    CHECK(mfs->robin({0.3, 0.2}) == doctest::Approx(ana->robin({0.3, 0.2})).epsilon(1e-7));
    CHECK(norm(mfs->grad_robin({0.3, 0.2}) - ana->grad_robin({0.3, 0.2})) < 1e-6);
}

TEST_CASE("MFS annulus reproduces period matrix and hydrodynamic kernel") {
    const double r0 = 0.5;
    const auto mfs = build_green(Domain::general({circle_points(1.0, 512, true), circle_points(r0, 512, false)}));
    const auto ana = build_green(Domain::annulus(r0, 1.0));
    REQUIRE(mfs->d() == 1);
    CHECK(mfs->period_matrix().M(0, 0) == doctest::Approx(ana->period_matrix().M(0, 0)).epsilon(1e-6));
    const Vec2 x{0.7, 0.1}, y{-0.1, -0.72};
    CHECK(std::abs(mfs->G(x, y) - ana->G(x, y)) < 1e-5);
    CHECK(std::abs(mfs->phi(1, x) - ana->phi(1, x)) < 1e-6);
    CHECK(std::abs(circulation([&](Vec2 p) { return perp(mfs->grad_G(p, y)); }, 1, *mfs)) < 1e-5);
}

TEST_CASE("general domain orientation is enforced") {
    CHECK_THROWS_AS(Domain::general({circle_points(1.0, 64, false)}), DomainError);
    CHECK_THROWS_AS(Domain::general({circle_points(1.0, 64, true), circle_points(0.3, 64, true)}), DomainError);
    const Domain d = Domain::general({circle_points(1.0, 64, true), circle_points(0.3, 64, false)});
    CHECK(d.curve(0).signed_area() > 0);
    CHECK(d.curve(1).signed_area() < 0);
    CHECK(d.contains({0.5, 0}));
    CHECK_FALSE(d.contains({0.1, 0}));
}

TEST_CASE("truncated image series breaks the boundary conditions") {
    GreenOptions o;
    o.annulus_images = 1;
    const auto bad = build_green(Domain::annulus(0.6, 1.0), o);
    const Vec2 y{0.8, 0.0};
    double mean = 0, m2 = 0;
    for (int k = 0; k < 64; ++k) {
        const double t = 2 * pi * k / 64;
        const double v = bad->G({0.6 * std::cos(t), 0.6 * std::sin(t)}, y);
        mean += v / 64;
        m2 += v * v / 64;
    }
    CHECK(std::sqrt(m2 - mean * mean) > 1e-4);
}
