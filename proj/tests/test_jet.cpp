#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "yudovich/errors.hpp"
#include "yudovich/jet.hpp"

using namespace yudovich;

namespace {

Jet random_jet(std::mt19937_64& rng, int K, double c0 = 0.0) {
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<double> a(static_cast<std::size_t>(K + 1));
    for (double& v : a) v = U(rng);
    a[0] += c0;
    return Jet(a);
}

// schoolbook truncated product
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; i + j < c.size() && j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

double maxdiff(const Jet& a, const Jet& b) {
    double d = 0;
    for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

}  // namespace

TEST_CASE("mul of (1 + t) and (1 - t)") {
    const Jet p = Jet{1, 1, 0, 0, 0} * Jet{1, -1, 0, 0, 0};
    CHECK(p.size() == 5);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.0);
    CHECK(p[2] == -1.0);
    CHECK(p[3] == 0.0);
    CHECK(p[4] == 0.0);
}

TEST_CASE("product agrees with schoolbook convolution") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Jet a = random_jet(rng, 12), b = random_jet(rng, 12);
        CHECK(maxdiff(a * b, Jet(convolve(a.coeffs(), b.coeffs()))) < 1e-14);
    }
}

TEST_CASE("ring axioms at truncation order") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Jet a = random_jet(rng, 16), b = random_jet(rng, 16), c = random_jet(rng, 16);
        CHECK(maxdiff((a * b) * c, a * (b * c)) < 1e-12);
        CHECK(maxdiff(a * b, b * a) < 1e-12);
        CHECK(maxdiff(a * (b + c), a * b + a * c) < 1e-12);
        CHECK(maxdiff((a + b) - b, a) < 1e-12);
        CHECK(maxdiff(a * 1.0, a) == 0.0);
    }
}

TEST_CASE("log of the exponential series is the identity jet") {
    std::vector<double> e(5);
    double f = 1;
    for (int k = 0; k <= 4; ++k) {
        e[static_cast<std::size_t>(k)] = 1.0 / f;
        f *= (k + 1);
    }
    const Jet l = log(Jet(e));
    CHECK(std::abs(l[0]) < 1e-15);
    CHECK(std::abs(l[1] - 1.0) < 1e-15);
    for (std::size_t k = 2; k <= 4; ++k) CHECK(std::abs(l[k]) < 1e-15);

    const Jet ex = exp(Jet::variable(0.0, 10));
    double fk = 1;
    for (int k = 0; k <= 10; ++k) {
        if (k > 0) fk *= k;
        CHECK(ex[static_cast<std::size_t>(k)] == doctest::Approx(1.0 / fk).epsilon(1e-14));
    }
}

TEST_CASE("exp(log a) = a and division identities") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Jet a = random_jet(rng, 14, 3.0);
        CHECK(maxdiff(exp(log(a)), a) < 1e-12);
        const Jet q = a / a;
        CHECK(std::abs(q[0] - 1.0) < 1e-14);
        for (std::size_t k = 1; k < q.size(); ++k) CHECK(std::abs(q[k]) < 1e-12);
        const Jet b = random_jet(rng, 14);
        CHECK(maxdiff((b / a) * a, b) < 1e-12);
        CHECK(maxdiff(sqrt(a) * sqrt(a), a) < 1e-12);
        CHECK(maxdiff(pow(a, 3.0), a * a * a) < 1e-11);
        CHECK(maxdiff(pow(a, -1.0), 1.0 / a) < 1e-12);
    }
}

TEST_CASE("singular jets are rejected") {
    const Jet z{0.0, 1.0, 2.0};
    const Jet one{1.0, 1.0};
    CHECK_THROWS_AS(one / z, SingularityError);
    CHECK_THROWS_AS(log(z), SingularityError);
    const Jet neg{-1.0, 1.0};
    CHECK_THROWS_AS(log(neg), SingularityError);
}

TEST_CASE("Horner evaluation and mixed-length padding") {
    const Jet p{1, 2, 3};
    CHECK(p.eval(2.0) == doctest::Approx(17.0));
    const Jet s = p + Jet{1};
    CHECK(s.size() == 3);
    CHECK(s[0] == 2.0);
    CHECK(s[2] == 3.0);
    CHECK(Jet()[5] == 0.0);
}
