#pragma once

#include <cmath>
#include <numbers>

#include "yudovich/cplx.hpp"
#include "yudovich/vec2.hpp"

namespace yudovich {

/// Closed-form hydrodynamic Green kernels for the disk |x| < R and the annulus r0 < |x| < R.
/// Everything is written over a generic scalar so the same formulas drive both the double
/// evaluator and Taylor-mode integration.
struct ClosedFormKernel {
    enum class Kind { disk, annulus };
    Kind kind = Kind::disk;
    double R = 1.0;
    double q = 0.0;   // r0 / R
    int images = 0;   // truncation of the annulus image series

    static constexpr double inv2pi = 0.5 / std::numbers::pi;

    /// Smallest K with q^{2K} < 1e-14.
    static int default_images(double q) {
        return static_cast<int>(std::ceil(std::log(1e-14) / (2.0 * std::log(q))));
    }

    /// S(z, w) = F'(z) − 1/(z − w) in unit-scaled variables: the analytic derivative of the
    /// regular part, so that ∇ₓg = conj(S)/(2πR).
    template <class T>
    Cplx<T> regular_derivative(const Cplx<T>& z, const Cplx<T>& w) const {
        const Cplx<T> wb = conj(w);
        if (kind == Kind::disk) {
            return wb / one_minus(z * wb);
        }
        Cplx<T> acc{};
        double q2k = 1.0;
        for (int k = 0; k < images; ++k) {
            const double q2k2 = q2k * q * q;
            const Cplx<T> zwb = z * wb;
            // d/dz of −log(1 − q^{2k} z w̄), −log(1 − q^{2k+2}/(z w̄)),
            //            +log(1 − q^{2k+2} z/w), +log(1 − q^{2k+2} w/z)
            acc = acc + (q2k * wb) / one_minus(q2k * zwb);
            acc = acc - q2k2 / (z * (zwb - q2k2));
            acc = acc - q2k2 / (w - q2k2 * z);
            acc = acc + (q2k2 * w) / (z * (z - q2k2 * w));
            q2k = q2k2;
        }
        return acc;
    }

    /// ∇ₓG(x, y) for the hydrodynamic Green function.
    template <class T>
    BasicVec2<T> grad_G(const BasicVec2<T>& x, const BasicVec2<T>& y) const {
        const double s = 1.0 / R;
        const Cplx<T> z{x.x * s, x.y * s}, w{y.x * s, y.y * s};
        const Cplx<T> F = 1.0 / (z - w) + regular_derivative(z, w);
        return (inv2pi * s) * conj_as_vec(F);
    }

    /// ∇ₓg(x, y), g = G − (1/2π) log‖x − y‖.
    template <class T>
    BasicVec2<T> grad_g(const BasicVec2<T>& x, const BasicVec2<T>& y) const {
        const double s = 1.0 / R;
        const Cplx<T> z{x.x * s, x.y * s}, w{y.x * s, y.y * s};
        return (inv2pi * s) * conj_as_vec(regular_derivative(z, w));
    }

    /// ∇r(x) = 2 ∇ₓg(x, y)|_{y = x}.
    template <class T>
    BasicVec2<T> grad_robin(const BasicVec2<T>& x) const {
        return 2.0 * grad_g(x, x);
    }

    /// Harmonic basis field X₁ = p₁₁∇⊥φ₁ = perp(x)/(2π‖x‖²) (annulus only).
    template <class T>
    BasicVec2<T> X1(const BasicVec2<T>& x) const {
        const T r2 = x.x * x.x + x.y * x.y;
        return {(-inv2pi) * x.y / r2, inv2pi * x.x / r2};
    }
};

}  // namespace yudovich
