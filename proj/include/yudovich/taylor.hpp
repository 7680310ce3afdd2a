#pragma once

#include <vector>

#include "yudovich/vortex.hpp"

namespace yudovich {

struct TaylorOptions {
    int order = 20;
    double tol = 1e-12;
    double max_step = 0.0;  // h₀; 0 → T
    double collision_factor = 1e-4;
    double boundary_factor = 1e-3;
};

struct TaylorRun {
    std::vector<TaylorStep> steps;
    Termination termination;
    double end_time = 0.0;
    std::vector<Vec2> final_positions;
};

/// Time coefficients a₀…a_K of every coordinate at the given configuration, by the recurrence
/// a_{k+1} = F[z]_k/(k+1) on jets. Requires a closed-form (disk/annulus) Green backend.
std::vector<std::vector<double>> taylor_coefficients(const VortexSystem& sys, const std::vector<Vec2>& z, int K);

/// Taylor-mode integration: step h = 0.9·min over the last two orders of (tol/‖a_k‖)^{1/k};
/// positions advance by Horner evaluation. SingularityError (with last valid time) on blow-up.
TaylorRun taylor_integrate(const VortexSystem& sys, double T, const TaylorOptions& opts = {});

struct AnalyticityEstimate {
    double s_hat = 0.0;      // Gevrey order of the smallest class s ≥ 1 consistent with the fit
    double rho_hat = 0.0;    // 1/L̂
    double sigma = 0.0;      // fitted exponent of k! in the Taylor coefficients
    double log_L = 0.0;
    double rms = 0.0;        // fit residual
    int points = 0;
};

/// Least-squares fit log c_k = σ·log k! + k·log L + c over k ∈ [k_min, K], with c_k the max over
/// coordinates of |a_k|. Derivative bounds (k!)^s L^k correspond to σ = s − 1, so ŝ = max(1, σ + 1).
/// With `derivatives` the inputs are derivative magnitudes z^{(k)} and are divided by k! first.
/// FitError when fewer than three coefficients exceed 1e-300.
AnalyticityEstimate analyticity_estimate(const std::vector<std::vector<double>>& coeffs, int k_min = 4,
                                         bool derivatives = false);

}  // namespace yudovich
