#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "yudovich/geometry.hpp"
#include "yudovich/kernels.hpp"
#include "yudovich/vec2.hpp"

namespace yudovich {

using VectorField = std::function<Vec2(Vec2)>;

struct GreenOptions {
    enum class Backend { automatic, analytic, mfs };
    Backend backend = Backend::automatic;
    int annulus_images = 0;  // 0: truncate at q^{2K} < 1e-14 (nonzero: override, used by fault injection)
    double mfs_outer_dilation = 1.25;
    double mfs_inner_dilation = 0.8;
    int mfs_charge_stride = 4;  // one charge per this many collocation points
    double svd_cutoff = 1e-12;
    double residual_tolerance = 1e-6;
    double condition_limit = 1e12;
};

/// m_ij = Γ_i(∇⊥φ_j) and its inverse p_ij.
struct PeriodMatrix {
    Eigen::MatrixXd M;
    Eigen::MatrixXd P;
    double condition = 1.0;
};

/// Hydrodynamic Green function G, its regular part g = G − (1/2π)log‖x − y‖, the Robin
/// function r(x) = g(x, x), harmonic measures φ_i (i = 1…d) and derived harmonic fields.
/// Circulations are counter-clockwise around every curve; ∇⊥ = (−∂₂, ∂₁).
class GreenEvaluator {
public:
    virtual ~GreenEvaluator() = default;

    const Domain& domain() const { return domain_; }
    int d() const { return domain_.holes(); }
    virtual std::string backend_name() const = 0;
    /// Closed-form kernel for jet evaluation; nullptr for the MFS backend.
    virtual const ClosedFormKernel* kernel() const { return nullptr; }

    /// Dirichlet Green function G₀ (zero on every boundary curve).
    virtual double G0(Vec2 x, Vec2 y) const = 0;
    virtual double G(Vec2 x, Vec2 y) const;
    virtual double g(Vec2 x, Vec2 y) const;
    virtual Vec2 grad_G(Vec2 x, Vec2 y) const;  // ∇ₓG
    virtual Vec2 grad_g(Vec2 x, Vec2 y) const;  // ∇ₓg
    virtual double robin(Vec2 x) const;
    virtual Vec2 grad_robin(Vec2 x) const;
    virtual double phi(int i, Vec2 x) const = 0;
    virtual Vec2 grad_phi(int i, Vec2 x) const = 0;

    const PeriodMatrix& period_matrix() const { return period_; }
    /// Max boundary-condition residual found at construction (0 for closed forms).
    double boundary_residual() const { return residual_; }

    /// X_k(x) = Σ_j p_jk ∇⊥φ_j(x), k = 1…d.
    Vec2 harmonic_field(int k, Vec2 x) const;
    std::vector<VectorField> harmonic_basis() const;
    /// ψ₀ = Σ Γ̄_i p_ij φ_j.
    double psi0(const std::vector<double>& circulations, Vec2 x) const;
    /// X₀ = ∇⊥ψ₀.
    Vec2 X0(const std::vector<double>& circulations, Vec2 x) const;

protected:
    explicit GreenEvaluator(Domain domain) : domain_(std::move(domain)) {}
    void compute_period_matrix(double condition_limit);
    void check_interior(Vec2 x, const char* what) const;

    Domain domain_;
    PeriodMatrix period_;
    double residual_ = 0.0;
};

/// Builds the evaluator: closed forms for disk/annulus, method of fundamental solutions otherwise.
/// Throws ConstructionError when the MFS residual exceeds the tolerance.
std::shared_ptr<const GreenEvaluator> build_green(const Domain& domain, const GreenOptions& opts = {});

/// Whether the annulus closed-form backend was compiled in.
bool annulus_backend_available();

/// Γ_i(f) counter-clockwise around curve i of the evaluator's domain.
double circulation(const VectorField& f, int curve_index, const GreenEvaluator& ev);

struct HarmonicProjection {
    std::vector<double> alpha;
};

/// α_i(f) = ∫_Ω φ_i curl f + Γ_i(f). When `curl` is empty it is taken by 4th-order central
/// differences of f with step 1e-4·diam.
HarmonicProjection project_harmonic(const VectorField& f, const GreenEvaluator& ev,
                                    const std::function<double(Vec2)>& curl = {}, int resolution = 64);

}  // namespace yudovich
