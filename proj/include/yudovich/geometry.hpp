#pragma once

#include <functional>
#include <vector>

#include "yudovich/vec2.hpp"

namespace yudovich {

/// Closed curve sampled at points equally spaced in its parameter t ∈ [0, 2π).
class BoundaryCurve {
public:
    explicit BoundaryCurve(std::vector<Vec2> points);

    const std::vector<Vec2>& points() const { return pts_; }
    /// dp/dt at the samples (spectral differentiation).
    const std::vector<Vec2>& derivative() const { return dpdt_; }
    std::size_t size() const { return pts_.size(); }
    double signed_area() const { return area_; }
    Vec2 centroid() const { return centroid_; }
    /// Integral over the curve, in its stored orientation, of f·τ ds (periodic trapezoid).
    double line_integral(const std::function<Vec2(Vec2)>& f) const;
    double distance(Vec2 x) const;
    /// Winding-number inclusion test for the polygon through the samples.
    bool encloses(Vec2 x) const;

private:
    std::vector<Vec2> pts_, dpdt_;
    double area_ = 0.0;
    Vec2 centroid_{};
};

/// Bounded domain: outer curve C₀ (counter-clockwise) minus the holes bounded by C₁…C_d
/// (stored clockwise, so the domain is always on the left).
class Domain {
public:
    enum class Kind { disk, annulus, general };

    static Domain disk(double R = 1.0, std::size_t samples = 512);
    static Domain annulus(double r0, double R = 1.0, std::size_t samples = 512);
    /// First curve is the outer boundary. Orientation is checked, not repaired.
    static Domain general(std::vector<std::vector<Vec2>> curves);

    Kind kind() const { return kind_; }
    double R() const { return R_; }
    double r0() const { return r0_; }
    int holes() const { return static_cast<int>(curves_.size()) - 1; }
    const BoundaryCurve& curve(int i) const { return curves_.at(static_cast<std::size_t>(i)); }
    const std::vector<BoundaryCurve>& curves() const { return curves_; }
    double diameter() const { return diam_; }

    bool contains(Vec2 x) const;
    double distance_to_boundary(Vec2 x) const;
    /// Outward unit normal at the boundary point nearest to x.
    Vec2 outward_normal_near(Vec2 x) const;
    /// Bounding box [lo, hi].
    std::pair<Vec2, Vec2> bounds() const;

    /// Circulation ∮ f·τ ds around C_i, counter-clockwise for every curve (see README).
    double circulation(const std::function<Vec2(Vec2)>& f, int i) const;

    /// ∫_Ω F dA. Polar Gauss rules for disk/annulus; adaptive cells for general domains.
    double area_integral(const std::function<double(Vec2)>& F, int resolution = 64) const;

private:
    Kind kind_ = Kind::general;
    double R_ = 0.0, r0_ = 0.0;
    double diam_ = 0.0;
    std::vector<BoundaryCurve> curves_;
};

}  // namespace yudovich
