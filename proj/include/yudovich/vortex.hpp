#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "yudovich/green.hpp"
#include "yudovich/kernels.hpp"
#include "yudovich/ode.hpp"
#include "yudovich/vec2.hpp"

namespace yudovich {

/// N point vortices of strengths α_l in a domain with prescribed circulations Γ̄ around the holes.
struct VortexSystem {
    std::vector<Vec2> positions;
    std::vector<double> strengths;
    std::vector<double> circulations;
    std::shared_ptr<const GreenEvaluator> green;

    std::size_t size() const { return positions.size(); }
    /// Interior, pairwise distinct, nonzero strengths, one circulation per hole.
    void validate() const;
};

/// Kirchhoff–Routh–Lin function W = Σα_lψ₀(x_l) + ½Σα_l²r(x_l) + ½Σ_{l≠m}α_lα_mG(x_l, x_m).
double routh_energy(const VortexSystem& sys);
double routh_energy(const VortexSystem& sys, const std::vector<Vec2>& positions);

/// z'_l = X₀(z_l) + (α_l/2)∇⊥r(z_l) + Σ_{m≠l} α_m∇⊥ₓG(z_l, z_m).
std::vector<Vec2> vortex_rhs(const VortexSystem& sys);
std::vector<Vec2> vortex_rhs(const VortexSystem& sys, const std::vector<Vec2>& positions);

/// The same velocities from a closed-form kernel over any scalar type (used for Taylor jets).
template <class T>
std::vector<BasicVec2<T>> kernel_rhs(const ClosedFormKernel& k, const std::vector<BasicVec2<T>>& z,
                                     const std::vector<double>& alpha, const std::vector<double>& circ) {
    const std::size_t n = z.size();
    std::vector<BasicVec2<T>> v(n);
    for (std::size_t l = 0; l < n; ++l) {
        BasicVec2<T> acc = (0.5 * alpha[l]) * perp(k.grad_robin(z[l]));
        if (k.kind == ClosedFormKernel::Kind::annulus && !circ.empty() && circ[0] != 0.0)
            acc += circ[0] * k.X1(z[l]);
        for (std::size_t m = 0; m < n; ++m) {
            if (m == l) continue;
            acc += alpha[m] * perp(k.grad_G(z[l], z[m]));
        }
        v[l] = acc;
    }
    return v;
}

/// Coefficient block of one Taylor step: coeffs[c][k] for coordinate c = 2l (x) / 2l+1 (y).
struct TaylorStep {
    double t0 = 0.0;
    double h = 0.0;
    std::vector<std::vector<double>> coeffs;
    std::vector<Vec2> positions_at(double t) const;
};

struct Termination {
    enum class Kind { horizon, collision, boundary_proximity };
    Kind kind = Kind::horizon;
    double time = 0.0;
    int first = -1;   // vortex index (or first of the colliding pair)
    int second = -1;  // second of the colliding pair
    std::string describe() const;
};

enum class Method { rk45, taylor };

struct IntegrateOptions {
    Method method = Method::rk45;
    double tol = 1e-10;
    int taylor_order = 20;
    double collision_factor = 1e-4;  // ε_coll = factor·diam(Ω)
    double boundary_factor = 1e-3;   // ε_bdry = factor·diam(Ω)
};

struct VortexTrajectory {
    VortexSystem system;  // initial state
    Method method = Method::rk45;
    double tol = 0.0;
    std::vector<double> times;
    std::vector<std::vector<Vec2>> positions;
    std::vector<double> W;
    std::vector<double> min_pair_distance;
    std::vector<double> boundary_distance;
    std::vector<double> step_sizes;
    Termination termination;
    std::vector<ode::DenseStep> dense;    // rk45
    std::vector<TaylorStep> taylor;       // taylor

    double end_time() const { return times.empty() ? 0.0 : times.back(); }
    /// Continuous positions from dense output (rk45) or the Taylor polynomials.
    std::vector<Vec2> position_at(double t) const;
};

/// Integrates the Hamiltonian vortex ODE on [0, T]; stops early on collision or boundary proximity.
/// Throws StiffnessError on step-size underflow.
VortexTrajectory integrate(const VortexSystem& sys, double T, const IntegrateOptions& opts = {});

/// max_k |W(t_k) − W(t₀)|.
double hamiltonian_drift(const VortexTrajectory& traj);

/// Time-reversed system (α ↦ −α, Γ̄ ↦ −Γ̄): integrating it retraces the original trajectory.
VortexSystem reversed(const VortexSystem& sys, const std::vector<Vec2>& positions);

double min_pair_distance(const std::vector<Vec2>& z);

/// Built-in test function φ(t, x) = s(t)·b(x): s(t) = 1 − smootherstep(t/τ) ramps from 1 to 0
/// on [0, τ]; b(x) = (1 − ‖x − c‖²/ρ²)⁴ on the disk of radius ρ about c.
struct TestFunction {
    Vec2 center{};
    double radius = 0.1;
    double horizon = 1.0;  // τ

    double value(double t, Vec2 x) const;
    double dt(double t, Vec2 x) const;
    Vec2 grad(double t, Vec2 x) const;
};

struct WeakResidual {
    double initial = 0.0;
    double linear = 0.0;
    double quadratic = 0.0;
    double residual = 0.0;  // |initial + linear + quadratic|
};

/// Weak vorticity formulation evaluated on the atomic measure Σα_lδ_{z_l(t)}, with the Robin
/// term on the diagonal; composite 5-point Gauss–Legendre in time on every trajectory step.
/// ArgumentError when the bump touches ∂Ω or τ exceeds the trajectory.
WeakResidual weak_residual(const VortexTrajectory& traj, const TestFunction& phi);

}  // namespace yudovich
