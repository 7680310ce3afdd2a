#include "doctest.h"

#include <cmath>
#include <numbers>

#include "yudovich/errors.hpp"
#include "yudovich/quadrature.hpp"

using namespace yudovich;

TEST_CASE("gauss-legendre is exact for polynomials of degree 2n-1") {
    for (int n : {1, 2, 5, 8, 16}) {
        for (int deg = 0; deg <= 2 * n - 1; ++deg) {
            const double exact = (std::pow(2.0, deg + 1) - std::pow(-1.0, deg + 1)) / (deg + 1);
            const double got = quad::gauss_legendre([deg](double x) { return std::pow(x, deg); }, -1.0, 2.0, n);
            CHECK(got == doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("gauss-legendre weights sum to interval length") {
    const auto& r = quad::gauss_legendre(20);
    double s = 0.0;
    for (double w : r.weights) s += w;
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("adaptive GK handles endpoint log singularity") {
    // ∫_0^1 log x dx = -1
    auto r = quad::gauss_kronrod([](double x) { return std::log(x); }, 0.0, 1.0, {});
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-10));
    // ∫_0^1 x^{-1/2} = 2
    CHECK(quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0) ==
          doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("adaptive GK oscillatory and reversed limits") {
    const double v = quad::integrate([](double x) { return std::sin(20 * x); }, 0.0, std::numbers::pi);
    CHECK(std::abs(v) < 1e-10);
    CHECK(quad::integrate([](double x) { return x; }, 1.0, 0.0) == doctest::Approx(-0.5));
}

TEST_CASE("non-convergence raises") {
    quad::Options o;
    o.max_intervals = 3;
    o.abs_tol = 1e-15;
    CHECK_THROWS_AS(quad::integrate([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, o),
                    QuadratureError);
}
