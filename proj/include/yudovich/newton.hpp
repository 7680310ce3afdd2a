#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "yudovich/modulus.hpp"
#include "yudovich/vec2.hpp"

namespace yudovich {

/// Bounded density supported on a closed disk, extended by zero outside.
struct Density {
    Vec2 center{};
    double radius = 1.0;
    std::function<double(Vec2)> f;
    std::optional<Modulus> mu;      // claimed modulus, used for the Dini budget
    std::optional<Vec2> singular;   // point where f is least regular (quadrature grading)
    std::string name;

    static Density constant(double value, Vec2 center = {}, double radius = 1.0);
    /// f(y) = a·y + b on the disk.
    static Density linear(Vec2 a, double b, Vec2 center = {}, double radius = 1.0);
    /// f(y) = profile(|y − center|).
    static Density radial(std::function<double(double)> profile, std::optional<Modulus> mu,
                          Vec2 center = {}, double radius = 1.0);

    double operator()(Vec2 y) const;
    bool contains(Vec2 y) const;
    double diameter() const { return 2.0 * radius; }
    void validate() const;
};

struct NewtonOptions {
    double tol = 1e-11;         // angular refinement tolerance (absolute, scaled by max(1, |value|))
    double floor_factor = 1e-8; // innermost shell radius relative to diam(D)
    int min_shells = 10;
    int radial_nodes = 10;
    double outer_factor = 1.5;  // radius of D₀ relative to the circumradius of D
    int boundary_nodes = 512;
    int max_levels = 7;         // angular panel doublings
};

/// Ψ(x) = ∫_D Γ(x − y) f(y) dy with Γ(z) = (1/2π) log|z|.
double newton_potential(const Density& f, Vec2 x, const NewtonOptions& opts = {});

struct SecondDerivatives {
    double u[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    double trace() const { return u[0][0] + u[1][1]; }
    double asymmetry() const;
    /// Bound on the truncated innermost ball: ∫₀^{r_min} μ(r)/r dr when μ is claimed, else the
    /// last shell magnitude.
    double budget = 0.0;
    double r_min = 0.0;
    std::vector<double> shell_magnitudes;  // ∫_shell |f(y) − f(x)|/(2π|x − y|²) dy, outermost first
    double tail_share = 0.0;               // K·A_K / Σ A_k; ≈ 1/log K for non-Dini accumulation
    int levels = 0;
};

/// u_ij(x) = ∫_{D₀} ∂_ijΓ(x − y)(f(y) − f(x)) dy − f(x) ∫_{∂D₀} ∂_iΓ(x − y) ν_j ds.
/// Throws AccuracyError when the dyadic shell magnitudes decay like a harmonic series.
SecondDerivatives newton_second_derivatives(const Density& f, Vec2 x, const NewtonOptions& opts = {});

/// ∂_j ∫ Γ_{i,ε}(x − y) f(y) dy with Γ_{i,ε} = ∂_iΓ·η(|·|/ε), η the quintic ramp on [1, 2].
SecondDerivatives mollified_second_derivatives(const Density& f, Vec2 x, double eps,
                                               const NewtonOptions& opts = {});

/// 6∫₀^{2ε} μ(r)/r dr; requires a claimed modulus.
double mollifier_error_bound(const Density& f, double eps);

/// ∫₀^{h} μ(r)/r dr (in v = log(1/r)).
double dini_head(const Modulus& mu, double h);

struct LaplacianReport {
    double max_error = 0.0;
    std::vector<double> errors;  // |trace u(x) − f(x)| per sample
    std::vector<SecondDerivatives> values;
};

/// Samples are evaluated concurrently.
LaplacianReport laplacian_check(const Density& f, const std::vector<Vec2>& samples,
                                const NewtonOptions& opts = {});

/// Quintic ramp: 0 on s ≤ 1, 1 on s ≥ 2, η′ vanishing at both ends.
double ramp_eta(double s);
double ramp_eta_derivative(double s);

}  // namespace yudovich
