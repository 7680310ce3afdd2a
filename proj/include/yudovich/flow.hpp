#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "yudovich/germ.hpp"
#include "yudovich/green.hpp"
#include "yudovich/modulus.hpp"
#include "yudovich/vec2.hpp"

namespace yudovich {

/// Initial vorticity ω₀ plus the background circulations Γ̄ around the holes.
struct VorticityField {
    enum class Kind { radial_patch, general_patch, radial_profile, loglog_singularity, particle_cloud };
    Kind kind = Kind::radial_patch;

    // radial_patch: ω̄ on the disk |x − center| < radius (radius 0 or value 0: ω ≡ 0)
    // loglog_singularity: ω = value·log log(4·length/‖x − center‖)
    Vec2 center{};
    double radius = 0.0;
    double value = 0.0;
    double length = 1.0;

    // general_patch: polygons (any orientation, pairwise disjoint) with their values
    std::vector<std::vector<Vec2>> polygons;
    std::vector<double> polygon_values;

    // radial_profile: (ρ, ω) samples, increasing ρ, linear in between, ω = 0 past the last sample
    std::vector<std::pair<double, double>> profile;

    // particle_cloud: weights w_j = ∫ω over the particle's cell, carried values ω_j ≠ 0, blob radius δ
    std::vector<Vec2> positions;
    std::vector<double> weights;
    std::vector<double> values;
    double blob = 0.0;

    std::vector<double> circulations;

    static VorticityField zero(std::vector<double> circulations = {});
    static VorticityField radial_patch(Vec2 center, double radius, double value, std::vector<double> circulations = {});
    static VorticityField general_patch(std::vector<std::vector<Vec2>> polygons, std::vector<double> values,
                                        std::vector<double> circulations = {});
    static VorticityField radial_profile(Vec2 center, std::vector<std::pair<double, double>> table,
                                         std::vector<double> circulations = {});
    /// `length` is diam(Ω) in the usual normalization.
    static VorticityField loglog(Vec2 x0, double scale, double length, std::vector<double> circulations = {});
    static VorticityField particle_cloud(std::vector<Vec2> positions, std::vector<double> weights,
                                         std::vector<double> values, double blob, std::vector<double> circulations = {});

    bool radial() const { return kind == Kind::radial_patch || kind == Kind::radial_profile; }
    /// ω(x) (not for particle clouds).
    double operator()(Vec2 x) const;
    /// ∫_Ω ω.
    double total(const Domain& domain) const;
    /// Support inside Ω, singular point interior, one circulation per hole, cloud sizes consistent.
    void validate(const Domain& domain) const;
    /// Radial about the centre of a disk or annulus: a steady Euler solution.
    bool stationary_in(const Domain& domain) const;
};

/// Particles on a square grid of the given spacing; each cell's weight is ω at the cell centre times
/// the area of the cell inside the support (4×4 subsampling, 32×32 on cut cells), placed at that area's centroid.
VorticityField discretize(const VorticityField& field, const Domain& domain, double spacing);

/// Intervals [r_a, r_b] of the ray x + r·e (r ≥ 0) that lie inside Ω; exact for disk/annulus.
std::vector<std::pair<double, double>> ray_intervals(const Domain& domain, Vec2 x, Vec2 e);

struct BiotSavartOptions {
    double abs_tol = 1e-10;
    int angular_nodes = 128;  // trapezoid nodes for the regular part of off-centre radial fields
};

/// u = X₀ + ∫K(x, y)ω(y)dy with K = ∇⊥ₓG.
/// Radial fields: exact enclosed circulation for the free-space part, quadrature for the regular part
/// (which vanishes identically for fields concentric with a disk/annulus). Patches: polar quadrature
/// about x. Log-log fields: radial treatment on a disk around x₀, polar quadrature about x outside it. Particle clouds: compact blob of radius δ plus exact images.
/// QuadratureError when the adaptive quadrature does not converge.
Vec2 biot_savart_velocity(const GreenEvaluator& ev, const VorticityField& field, Vec2 x,
                          const BiotSavartOptions& opts = {});
std::vector<Vec2> biot_savart_velocity(const GreenEvaluator& ev, const VorticityField& field,
                                       const std::vector<Vec2>& xs, const BiotSavartOptions& opts = {});

/// Dyadic pair sample: `base` uniform points, each with partners at distance 2^{−k}·diam(Ω),
/// k = k_min…k_max, in uniformly random directions (redrawn until inside Ω; dropped after 64 tries).
struct PairSample {
    std::vector<Vec2> points;
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> level;  // k of each pair
};
PairSample sample_pairs(const Domain& domain, int base = 512, std::uint64_t seed = 20240601, int k_min = 2,
                        int k_max = 20);

struct FlowOptions {
    double tol = 1e-8;
    int outputs = 10;                 // stored times k·T/outputs
    double particle_spacing = 0.02;   // for fields that are not stationary
    bool reverse = false;             // integrate the negated velocity (reversibility checks)
};

struct FlowMapRun {
    std::vector<Vec2> tracers;                   // initial positions
    std::vector<double> times;
    std::vector<std::vector<Vec2>> positions;    // Φ(t_k, x_j)
    bool frozen = false;                         // field kept fixed (stationary)
    VorticityField field;                        // initial field (cloud if transported)
    std::vector<std::vector<Vec2>> cloud;        // transported particle positions per stored time
    std::vector<double> step_sizes;
    std::shared_ptr<const GreenEvaluator> green;

    /// Vorticity field at stored time index k (the initial field when frozen).
    VorticityField field_at(std::size_t k) const;
};

/// Φ(t, x) = x + ∫₀ᵗ u(s, Φ(s, x))ds, tracers coupled to the Lagrangian particles.
/// ConservationError when a tracer leaves Ω̄ by more than 1e-6·diam(Ω).
FlowMapRun flow_map(std::shared_ptr<const GreenEvaluator> ev, const VorticityField& field,
                    const std::vector<Vec2>& tracers, double T, const FlowOptions& opts = {});

/// sup over pairs with ‖x − y‖ ≤ μ.a() of ‖u(x) − u(y)‖/μ(‖x − y‖).
double velocity_modulus_estimate(const std::vector<Vec2>& points, const std::vector<Vec2>& velocity,
                                 const std::vector<std::pair<int, int>>& pairs, const Modulus& mu);
/// Max over the run's stored times, velocities evaluated at the tracers' initial positions.
double velocity_modulus_estimate(const FlowMapRun& run, const std::vector<std::pair<int, int>>& pairs,
                                 const Modulus& mu);

struct ViolationReport {
    double fraction = 0.0;
    long checked = 0;
    long violations = 0;
    long skipped = 0;                  // pairs with ‖x − y‖ > ã
    std::vector<double> per_time;      // fraction at each stored time within the family horizon
};

/// Pairs with ‖Φ(t, x) − Φ(t, y)‖ > Γ_t(‖x − y‖)·(1 + 1e-9) at every stored t ≤ family horizon.
ViolationReport modulus_violation_check(const FlowMapRun& run, const GammaFamily& family,
                                        const std::vector<std::pair<int, int>>& pairs);

/// Time-dependent version: at each stored t > 0 a family Γ on [0, t] with κ is built, so that ã(t)
/// shrinks with t instead of being fixed by the full horizon. Times where no dyadic ã exists
/// (the bound has saturated below the finest separation) count every pair as skipped.
ViolationReport modulus_violation_check(const FlowMapRun& run, const Modulus& mu, double kappa,
                                        const std::vector<std::pair<int, int>>& pairs);

struct HolderFit {
    double r_hat = 0.0;
    double width = 0.0;  // 2 standard errors of the slope
    int points = 0;
    int scales = 0;
};

/// Pooled least-squares slope of log‖ΔΦ(t_k)‖ against log‖Δx‖. FitError with fewer than six distinct
/// separations or a degenerate design.
HolderFit holder_exponent_estimate(const FlowMapRun& run, std::size_t time_index,
                                   const std::vector<std::pair<int, int>>& pairs);

/// ‖ω‖_{Lᵖ(Ω)}.
double lp_norm(const VorticityField& field, const Domain& domain, double p);
/// ‖ω‖_{Lᵖ(Ω)}/θ(p) for each p (DomainError for p < p0).
std::vector<double> lp_membership_ratio(const VorticityField& field, const Domain& domain, const Germ& germ,
                                        const std::vector<double>& p_list);

}  // namespace yudovich
