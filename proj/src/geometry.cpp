#include "yudovich/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "yudovich/errors.hpp"
#include "yudovich/quadrature.hpp"

namespace yudovich {

namespace {

constexpr double pi = std::numbers::pi;

// Spectral derivative of periodic samples with respect to t ∈ [0, 2π).
std::vector<double> spectral_derivative(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::complex<double>> tw(n), c(n);
    for (std::size_t k = 0; k < n; ++k) tw[k] = std::polar(1.0, -2.0 * pi * static_cast<double>(k) / static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> s = 0;
        for (std::size_t j = 0; j < n; ++j) s += v[j] * tw[(k * j) % n];
        long kk = static_cast<long>(k);
        if (kk > static_cast<long>(n / 2)) kk -= static_cast<long>(n);
        if (n % 2 == 0 && k == n / 2) kk = 0;  // drop the Nyquist mode
        c[k] = s / static_cast<double>(n) * std::complex<double>(0.0, static_cast<double>(kk));
    }
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::complex<double> s = 0;
        for (std::size_t k = 0; k < n; ++k) s += c[k] * std::conj(tw[(k * j) % n]);
        out[j] = s.real();
    }
    return out;
}

double segment_distance(Vec2 x, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double L2 = norm2(ab);
    double t = L2 > 0 ? dot(x - a, ab) / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(x, a + t * ab);
}

std::vector<Vec2> circle(double r, std::size_t n, bool ccw) {
    std::vector<Vec2> p(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = 2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
        p[k] = {r * std::cos(t), (ccw ? 1.0 : -1.0) * r * std::sin(t)};
    }
    return p;
}

}  // namespace

BoundaryCurve::BoundaryCurve(std::vector<Vec2> points) : pts_(std::move(points)) {
    if (pts_.size() < 8) throw ArgumentError("boundary curve needs at least 8 samples");
    const std::size_t n = pts_.size();
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 p = pts_[k], q = pts_[(k + 1) % n];
        const double c = cross(p, q);
        a += c;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    area_ = 0.5 * a;
    if (std::abs(area_) < 1e-300) throw ArgumentError("boundary curve has zero area");
    centroid_ = {cx / (3.0 * a), cy / (3.0 * a)};
    std::vector<double> xs(n), ys(n);
    for (std::size_t k = 0; k < n; ++k) {
        xs[k] = pts_[k].x;
        ys[k] = pts_[k].y;
    }
    const auto dx = spectral_derivative(xs), dy = spectral_derivative(ys);
    dpdt_.resize(n);
    for (std::size_t k = 0; k < n; ++k) dpdt_[k] = {dx[k], dy[k]};
}

double BoundaryCurve::line_integral(const std::function<Vec2(Vec2)>& f) const {
    double s = 0.0;
    for (std::size_t k = 0; k < pts_.size(); ++k) s += dot(f(pts_[k]), dpdt_[k]);
    return s * 2.0 * pi / static_cast<double>(pts_.size());
}

double BoundaryCurve::distance(Vec2 x) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pts_.size(); ++k)
        d = std::min(d, segment_distance(x, pts_[k], pts_[(k + 1) % pts_.size()]));
    return d;
}

bool BoundaryCurve::encloses(Vec2 x) const {
    int wn = 0;
    const std::size_t n = pts_.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 a = pts_[k], b = pts_[(k + 1) % n];
        const double c = cross(b - a, x - a);
        if (a.y <= x.y) {
            if (b.y > x.y && c > 0) ++wn;
        } else if (b.y <= x.y && c < 0) {
            --wn;
        }
    }
    return wn != 0;
}

Domain Domain::disk(double R, std::size_t samples) {
    if (!(R > 0.0)) throw ArgumentError("disk: R must be positive");
    Domain d;
    d.kind_ = Kind::disk;
    d.R_ = R;
    d.diam_ = 2.0 * R;
    d.curves_.emplace_back(circle(R, samples, true));
    return d;
}

Domain Domain::annulus(double r0, double R, std::size_t samples) {
    if (!(r0 > 0.0 && R > r0)) throw ArgumentError("annulus: need 0 < r0 < R");
    Domain d;
    d.kind_ = Kind::annulus;
    d.R_ = R;
    d.r0_ = r0;
    d.diam_ = 2.0 * R;
    d.curves_.emplace_back(circle(R, samples, true));
    d.curves_.emplace_back(circle(r0, samples, false));
    return d;
}

Domain Domain::general(std::vector<std::vector<Vec2>> curves) {
    if (curves.empty()) throw ArgumentError("general domain: no curves");
    Domain d;
    d.kind_ = Kind::general;
    for (auto& c : curves) d.curves_.emplace_back(std::move(c));
    if (d.curves_[0].signed_area() <= 0.0)
        throw DomainError("general domain: outer curve must be counter-clockwise (positive signed area)");
    for (std::size_t i = 1; i < d.curves_.size(); ++i) {
        if (d.curves_[i].signed_area() >= 0.0) {
            std::ostringstream msg;
            msg << "general domain: inner curve " << i << " must be clockwise (negative signed area)";
            throw DomainError(msg.str());
        }
        for (const Vec2& p : d.curves_[i].points())
            if (!d.curves_[0].encloses(p)) throw DomainError("general domain: inner curve not inside outer curve");
        for (std::size_t j = 1; j < i; ++j)
            if (d.curves_[j].encloses(d.curves_[i].points()[0]) || d.curves_[i].encloses(d.curves_[j].points()[0]))
                throw DomainError("general domain: inner curves overlap");
    }
    const auto& P = d.curves_[0].points();
    for (std::size_t a = 0; a < P.size(); ++a)
        for (std::size_t b = a + 1; b < P.size(); ++b) d.diam_ = std::max(d.diam_, distance(P[a], P[b]));
    return d;
}

bool Domain::contains(Vec2 x) const {
    switch (kind_) {
        case Kind::disk:
            return norm(x) < R_;
        case Kind::annulus: {
            const double r = norm(x);
            return r > r0_ && r < R_;
        }
        case Kind::general:
            if (!curves_[0].encloses(x)) return false;
            for (std::size_t i = 1; i < curves_.size(); ++i)
                if (curves_[i].encloses(x)) return false;
            return true;
    }
    return false;
}

double Domain::distance_to_boundary(Vec2 x) const {
    switch (kind_) {
        case Kind::disk:
            return std::abs(R_ - norm(x));
        case Kind::annulus: {
            const double r = norm(x);
            return std::min(std::abs(R_ - r), std::abs(r - r0_));
        }
        case Kind::general: {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& c : curves_) d = std::min(d, c.distance(x));
            return d;
        }
    }
    return 0.0;
}

Vec2 Domain::outward_normal_near(Vec2 x) const {
    if (kind_ != Kind::general) {
        const double r = norm(x);
        const Vec2 er = (1.0 / r) * x;
        if (kind_ == Kind::annulus && std::abs(r - r0_) < std::abs(R_ - r)) return -er;
        return er;
    }
    double best = std::numeric_limits<double>::infinity();
    Vec2 n{};
    for (const auto& c : curves_) {
        const auto& P = c.points();
        for (std::size_t k = 0; k < P.size(); ++k) {
            const double dd = distance(x, P[k]);
            if (dd < best) {
                best = dd;
                const Vec2 t = c.derivative()[k];
                n = (1.0 / norm(t)) * Vec2{t.y, -t.x};  // right of the tangent: domain is on the left
            }
        }
    }
    return n;
}

std::pair<Vec2, Vec2> Domain::bounds() const {
    Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi = -lo;
    for (const Vec2& p : curves_[0].points()) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    return {lo, hi};
}

double Domain::circulation(const std::function<Vec2(Vec2)>& f, int i) const {
    const double v = curve(i).line_integral(f);
    return i == 0 ? v : -v;
}

double Domain::area_integral(const std::function<double(Vec2)>& F, int resolution) const {
    if (kind_ != Kind::general) {
        const auto& gr = quad::gauss_legendre(resolution);
        const double r_lo = kind_ == Kind::annulus ? r0_ : 0.0;
        const int nt = 2 * resolution;
        double s = 0.0;
        for (std::size_t i = 0; i < gr.nodes.size(); ++i) {
            const double r = 0.5 * (R_ + r_lo) + 0.5 * (R_ - r_lo) * gr.nodes[i];
            double ring = 0.0;
            for (int j = 0; j < nt; ++j) {
                const double t = 2.0 * pi * j / nt;
                ring += F({r * std::cos(t), r * std::sin(t)});
            }
            s += gr.weights[i] * r * ring * (2.0 * pi / nt);
        }
        return s * 0.5 * (R_ - r_lo);
    }
    // Cells of a uniform grid: tensor Gauss rule on interior cells, recursive split on cut cells.
    const auto [lo, hi] = bounds();
    const double hcell = std::max(hi.x - lo.x, hi.y - lo.y) / resolution;
    const auto& g = quad::gauss_legendre(4);
    std::function<double(Vec2, double, int)> cell = [&](Vec2 c0, double h, int depth) -> double {
        const Vec2 mid = c0 + Vec2{0.5 * h, 0.5 * h};
        const double dist = distance_to_boundary(mid);
        const bool inside = contains(mid);
        if (dist > 0.75 * h) {
            if (!inside) return 0.0;
            double s = 0.0;
            for (std::size_t a = 0; a < g.nodes.size(); ++a)
                for (std::size_t b = 0; b < g.nodes.size(); ++b)
                    s += g.weights[a] * g.weights[b] *
                         F({mid.x + 0.5 * h * g.nodes[a], mid.y + 0.5 * h * g.nodes[b]});
            return s * 0.25 * h * h;
        }
        if (depth == 0) return inside ? F(mid) * h * h : 0.0;
        const double h2 = 0.5 * h;
        return cell(c0, h2, depth - 1) + cell(c0 + Vec2{h2, 0}, h2, depth - 1) +
               cell(c0 + Vec2{0, h2}, h2, depth - 1) + cell(c0 + Vec2{h2, h2}, h2, depth - 1);
    };
    double s = 0.0;
    for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j) s += cell(lo + Vec2{i * hcell, j * hcell}, hcell, 3);
    return s;
}

}  // namespace yudovich
