#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "yudovich/errors.hpp"
#include "yudovich/ode.hpp"

using namespace yudovich;

namespace {
void oscillator(double, std::span<const double> y, std::span<double> d) {
    d[0] = y[1];
    d[1] = -y[0];
}
}  // namespace

TEST_CASE("dopri5 harmonic oscillator over one period") {
    ode::Options o;
    o.rtol = o.atol = 1e-11;
    std::vector<double> y0{1.0, 0.0};
    auto r = ode::dopri5(oscillator, 0.0, y0, 2 * std::numbers::pi, o);
    CHECK(r.t == doctest::Approx(2 * std::numbers::pi));
    CHECK(std::abs(r.y[0] - 1.0) < 1e-9);
    CHECK(std::abs(r.y[1]) < 1e-9);
}

TEST_CASE("dense output matches exact solution inside steps") {
    ode::Options o;
    o.rtol = o.atol = 1e-10;
    o.store_dense = true;
    std::vector<double> y0{1.0, 0.0};
    auto r = ode::dopri5(oscillator, 0.0, y0, 3.0, o);
    double worst = 0.0;
    for (const auto& s : r.dense) {
        for (double f : {0.1, 0.37, 0.5, 0.81}) {
            const double t = s.t0 + f * s.h;
            worst = std::max(worst, std::abs(s.component(t, 0) - std::cos(t)));
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("error decreases with tolerance") {
    std::vector<double> y0{1.0, 0.0};
    double prev = 1.0;
    for (double tol : {1e-4, 1e-6, 1e-8, 1e-10}) {
        ode::Options o;
        o.rtol = o.atol = tol;
        auto r = ode::dopri5(oscillator, 0.0, y0, 10.0, o);
        const double err = std::hypot(r.y[0] - std::cos(10.0), r.y[1] + std::sin(10.0));
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("backward integration") {
    ode::Options o;
    o.rtol = o.atol = 1e-11;
    std::vector<double> y0{std::cos(2.0), -std::sin(2.0)};
    auto r = ode::dopri5(oscillator, 2.0, y0, 0.0, o);
    CHECK(std::abs(r.y[0] - 1.0) < 1e-9);
}

TEST_CASE("terminal event stops at first downward crossing") {
    ode::Options o;
    o.rtol = o.atol = 1e-10;
    std::vector<double> y0{1.0, 0.0};
    ode::Event ev{"x_zero", [](double, std::span<const double> y) { return y[0]; }};
    auto r = ode::dopri5(oscillator, 0.0, y0, 10.0, o, std::span<const ode::Event>(&ev, 1));
    REQUIRE(r.event.has_value());
    CHECK(r.event->t == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
    CHECK(r.t == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
}

TEST_CASE("exponential growth y' = y") {
    ode::Options o;
    o.rtol = o.atol = 1e-12;
    std::vector<double> y0{1.0};
    auto r = ode::dopri5([](double, std::span<const double> y, std::span<double> d) { d[0] = y[0]; }, 0.0, y0, 1.0, o);
    CHECK(r.y[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
}
