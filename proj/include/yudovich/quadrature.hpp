#pragma once

#include <functional>
#include <span>
#include <vector>

namespace yudovich::quad {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_intervals = 4000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
    int evaluations = 0;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 21-point Gauss–Kronrod quadrature on [a, b] (a > b allowed).
/// Stops once the summed error estimate is below max(abs_tol, rel_tol·|I|).
Result gauss_kronrod(const Integrand& f, double a, double b, const Options& opts = {});

/// Same, starting from the partition given by `breaks` (must be monotone, size ≥ 2).
Result gauss_kronrod(const Integrand& f, std::span<const double> breaks, const Options& opts = {});

/// Like gauss_kronrod but throws QuadratureError when not converged.
double integrate(const Integrand& f, double a, double b, const Options& opts = {});

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss–Legendre rule on [-1, 1]; cached per n.
const GaussRule& gauss_legendre(int n);

/// Fixed n-point Gauss–Legendre approximation of ∫_a^b f.
double gauss_legendre(const Integrand& f, double a, double b, int n);

}  // namespace yudovich::quad
