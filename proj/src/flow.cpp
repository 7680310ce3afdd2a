#include "yudovich/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "yudovich/errors.hpp"
#include "yudovich/ode.hpp"
#include "yudovich/parallel.hpp"
#include "yudovich/quadrature.hpp"

namespace yudovich {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inv2pi = 0.5 / pi;

double shoelace(const std::vector<Vec2>& p) {
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
    return 0.5 * a;
}

bool in_polygon(const std::vector<Vec2>& p, Vec2 x) {
    bool in = false;
    for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
        if ((p[i].y > x.y) != (p[j].y > x.y) &&
            x.x < (p[j].x - p[i].x) * (x.y - p[i].y) / (p[j].y - p[i].y) + p[i].x)
            in = !in;
    }
    return in;
}

// Ray parameters r > 0 where x + r·e crosses the closed polyline p.
void polyline_hits(const std::vector<Vec2>& p, Vec2 x, Vec2 e, std::vector<double>& hits) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2 a = p[i], b = p[(i + 1) % p.size()];
        const Vec2 s = b - a;
        const double den = cross(e, s);
        if (den == 0.0) continue;
        const Vec2 ax = a - x;
        const double r = cross(ax, s) / den;
        const double u = cross(ax, e) / den;
        if (r > 0.0 && u >= 0.0 && u < 1.0) hits.push_back(r);
    }
}

std::vector<std::pair<double, double>> pair_up(std::vector<double> hits, bool inside) {
    std::sort(hits.begin(), hits.end());
    std::vector<std::pair<double, double>> out;
    std::size_t i = 0;
    if (inside) {
        if (hits.empty()) return out;
        out.emplace_back(0.0, hits[0]);
        i = 1;
    }
    for (; i + 1 < hits.size(); i += 2) out.emplace_back(hits[i], hits[i + 1]);
    return out;
}

// Smooth compact blob: fraction of the particle's vorticity within distance s·δ.
double blob_fraction(double s) {
    if (s >= 1.0) return 1.0;
    const double u = 1.0 - s * s;
    return 1.0 - u * u * u;
}

struct RegularGradient {
    const GreenEvaluator& ev;
    const ClosedFormKernel* k;
    explicit RegularGradient(const GreenEvaluator& e) : ev(e), k(e.kernel()) {}
    Vec2 operator()(Vec2 x, Vec2 y) const { return k ? k->grad_g(x, y) : ev.grad_g(x, y); }
};

double profile_value(const std::vector<std::pair<double, double>>& t, double rho) {
    if (t.empty() || rho > t.back().first) return 0.0;
    if (rho <= t.front().first) return rho == t.front().first || t.front().first == 0.0 ? t.front().second : 0.0;
    auto it = std::upper_bound(t.begin(), t.end(), rho, [](double r, const auto& s) { return r < s.first; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return a.second + (b.second - a.second) * (rho - a.first) / (b.first - a.first);
}

// 2π∫₀^ρ ω(s) s ds for a piecewise-linear profile (exact per segment)
double profile_enclosed(const std::vector<std::pair<double, double>>& t, double rho) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double a = t[i].first, b = std::min(t[i + 1].first, rho);
        if (b <= a) break;
        auto w = [&](double s) { return profile_value(t, s) * s; };
        acc += (b - a) / 6.0 * (w(a) + 4.0 * w(0.5 * (a + b)) + w(b));
    }
    return 2.0 * pi * acc;
}

double support_radius(const VorticityField& f) {
    return f.kind == VorticityField::Kind::radial_patch ? f.radius : (f.profile.empty() ? 0.0 : f.profile.back().first);
}

double enclosed(const VorticityField& f, double rho) {
    if (f.kind == VorticityField::Kind::radial_patch) return f.value * pi * std::pow(std::min(rho, f.radius), 2);
    return profile_enclosed(f.profile, rho);
}

std::vector<double> radial_breaks(const VorticityField& f) {
    if (f.kind == VorticityField::Kind::radial_patch) return {0.0, f.radius};
    std::vector<double> b;
    if (f.profile.front().first > 0.0) b.push_back(f.profile.front().first);
    for (const auto& s : f.profile) b.push_back(s.first);
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

bool is_zero(const VorticityField& f) {
    return f.kind == VorticityField::Kind::radial_patch && (f.radius == 0.0 || f.value == 0.0);
}

double loglog_value(const VorticityField& f, Vec2 x) {
    return f.value * std::log(std::log(4.0 * f.length / distance(x, f.center)));
}

// Vector-valued composite Gauss–Legendre over angular panels, doubled until converged.
template <class F>
Vec2 angular_integral(const F& ray, std::vector<double> breaks, double tol) {
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return b - a < 1e-13; }), breaks.end());
    const auto& g = quad::gauss_legendre(16);
    auto pass = [&](int split) {
        Vec2 s{};
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const double H = breaks[i + 1] - breaks[i];
            // θ = a + H(3σ² − 2σ³): smooths square-root behaviour at the panel ends (tangent rays)
            for (int k = 0; k < split; ++k)
                for (std::size_t n = 0; n < g.nodes.size(); ++n) {
                    const double sg = (k + 0.5 * (1.0 + g.nodes[n])) / split;
                    const double jac = 6.0 * sg * (1.0 - sg) * H;
                    s += (0.5 * g.weights[n] / split * jac) * ray(breaks[i] + H * sg * sg * (3.0 - 2.0 * sg));
                }
        }
        return s;
    };
    Vec2 prev = pass(1);
    for (int split = 2; split <= 256; split *= 2) {
        const Vec2 cur = pass(split);
        if (norm(cur - prev) <= tol * std::max(1.0, norm(cur))) return cur;
        prev = cur;
    }
    throw QuadratureError("biot_savart_velocity: angular quadrature did not converge");
}

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * pi);
    return a < 0.0 ? a + 2.0 * pi : a;
}

// Directions from x where the ray geometry has kinks.
void graded_around(std::vector<double>& b, double th, int levels) {
    b.push_back(wrap_angle(th));
    for (int k = 1; k <= levels; ++k) {
        b.push_back(wrap_angle(th + std::ldexp(1.0, -k)));
        b.push_back(wrap_angle(th - std::ldexp(1.0, -k)));
    }
}

std::vector<double> domain_kinks(const Domain& d, Vec2 x) {
    std::vector<double> b{0.0, 2.0 * pi};
    if (d.kind() != Domain::Kind::general) {
        const double rx = norm(x);
        // near a circle the exit distance varies on a √ε scale around the tangent directions
        const int lv = static_cast<int>(std::clamp(-std::log2(std::max(d.distance_to_boundary(x), 1e-300) / d.diameter()), 0.0, 40.0));
        if (rx > 0.0 && d.R() - rx < 0.05 * d.diameter()) {
            const double t = std::atan2(x.y, x.x);
            graded_around(b, t + 0.5 * pi, lv);
            graded_around(b, t - 0.5 * pi, lv);
        }
        if (d.kind() == Domain::Kind::annulus) {
            const double base = std::atan2(-x.y, -x.x);
            const double half = std::asin(std::min(1.0, d.r0() / rx));
            const int li = rx - d.r0() < 0.05 * d.diameter() ? lv : 0;
            graded_around(b, base - half, li);
            graded_around(b, base + half, li);
            b.push_back(wrap_angle(base));
        }
    } else if (d.kind() == Domain::Kind::general) {
        for (const auto& c : d.curves())
            for (const Vec2& p : c.points()) b.push_back(wrap_angle(std::atan2(p.y - x.y, p.x - x.x)));
    }
    return b;
}

}  // namespace

// ---------------------------------------------------------------- VorticityField

VorticityField VorticityField::zero(std::vector<double> circulations) {
    VorticityField f;
    f.circulations = std::move(circulations);
    return f;
}

VorticityField VorticityField::radial_patch(Vec2 center, double radius, double value, std::vector<double> circulations) {
    if (!(radius >= 0.0)) throw ArgumentError("radial_patch: radius must be non-negative");
    VorticityField f;
    f.center = center;
    f.radius = radius;
    f.value = value;
    f.circulations = std::move(circulations);
    return f;
}

VorticityField VorticityField::general_patch(std::vector<std::vector<Vec2>> polygons, std::vector<double> values,
                                             std::vector<double> circulations) {
    if (polygons.size() != values.size()) throw ArgumentError("general_patch: one value per polygon required");
    for (const auto& p : polygons)
        if (p.size() < 3 || shoelace(p) == 0.0) throw ArgumentError("general_patch: degenerate polygon");
    VorticityField f;
    f.kind = Kind::general_patch;
    f.polygons = std::move(polygons);
    f.polygon_values = std::move(values);
    f.circulations = std::move(circulations);
    return f;
}

VorticityField VorticityField::radial_profile(Vec2 center, std::vector<std::pair<double, double>> table,
                                              std::vector<double> circulations) {
    if (table.size() < 2) throw ArgumentError("radial_profile: at least two samples required");
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (!(table[i].first >= 0.0) || (i > 0 && !(table[i].first > table[i - 1].first)))
            throw ArgumentError("radial_profile: radii must be non-negative and increasing");
    }
    VorticityField f;
    f.kind = Kind::radial_profile;
    f.center = center;
    f.profile = std::move(table);
    f.circulations = std::move(circulations);
    return f;
}

VorticityField VorticityField::loglog(Vec2 x0, double scale, double length, std::vector<double> circulations) {
    if (!(length > 0.0)) throw ArgumentError("loglog: length must be positive");
    VorticityField f;
    f.kind = Kind::loglog_singularity;
    f.center = x0;
    f.value = scale;
    f.length = length;
    f.circulations = std::move(circulations);
    return f;
}

VorticityField VorticityField::particle_cloud(std::vector<Vec2> positions, std::vector<double> weights,
                                              std::vector<double> values, double blob, std::vector<double> circulations) {
    if (positions.size() != weights.size() || positions.size() != values.size())
        throw ArgumentError("particle_cloud: positions, weights and values must have equal length");
    if (!(blob > 0.0)) throw ArgumentError("particle_cloud: blob radius must be positive");
    for (std::size_t j = 0; j < values.size(); ++j)
        if (values[j] == 0.0 || weights[j] / values[j] <= 0.0)
            throw ArgumentError("particle_cloud: carried values must be nonzero with positive cell area w/ω");
    VorticityField f;
    f.kind = Kind::particle_cloud;
    f.positions = std::move(positions);
    f.weights = std::move(weights);
    f.values = std::move(values);
    f.blob = blob;
    f.circulations = std::move(circulations);
    return f;
}

double VorticityField::operator()(Vec2 x) const {
    switch (kind) {
        case Kind::radial_patch: return distance(x, center) < radius ? value : 0.0;
        case Kind::radial_profile: return profile_value(profile, distance(x, center));
        case Kind::general_patch:
            for (std::size_t i = 0; i < polygons.size(); ++i)
                if (in_polygon(polygons[i], x)) return polygon_values[i];
            return 0.0;
        case Kind::loglog_singularity: return loglog_value(*this, x);
        case Kind::particle_cloud: break;
    }
    throw ArgumentError("particle clouds have no pointwise values");
}

double VorticityField::total(const Domain& domain) const {
    switch (kind) {
        case Kind::radial_patch:
        case Kind::radial_profile: return enclosed(*this, support_radius(*this));
        case Kind::general_patch: {
            double s = 0.0;
            for (std::size_t i = 0; i < polygons.size(); ++i) s += polygon_values[i] * std::abs(shoelace(polygons[i]));
            return s;
        }
        case Kind::loglog_singularity: return (value < 0 ? -1.0 : 1.0) * lp_norm(*this, domain, 1.0);
        case Kind::particle_cloud: {
            double s = 0.0;
            for (double w : weights) s += w;
            return s;
        }
    }
    return 0.0;
}

void VorticityField::validate(const Domain& domain) const {
    if (static_cast<int>(circulations.size()) != domain.holes())
        throw ArgumentError("vorticity field: one circulation per inner boundary curve required");
    auto inside = [&](Vec2 p) { return domain.contains(p); };
    switch (kind) {
        case Kind::radial_patch:
        case Kind::radial_profile: {
            if (is_zero(*this)) return;
            const double a = support_radius(*this);
            double lo = 0.0;
            if (kind == Kind::radial_profile) {
                // innermost radius where ω may be nonzero
                lo = profile.front().second == 0.0 ? profile.front().first : 0.0;
                for (std::size_t i = 0; i + 1 < profile.size() && profile[i].second == 0.0 && profile[i + 1].second == 0.0; ++i)
                    lo = profile[i + 1].first;
            }
            for (int k = 0; k < 256; ++k) {
                const Vec2 e{std::cos(2 * pi * k / 256), std::sin(2 * pi * k / 256)};
                if (!inside(center + a * e) || (lo > 0.0 && !inside(center + lo * e)))
                    throw DomainError("vorticity support leaves the domain");
            }
            if (lo == 0.0 && !inside(center)) throw DomainError("vorticity support leaves the domain");
            for (int i = 1; i <= domain.holes(); ++i) {
                const double dc = distance(domain.curve(i).centroid(), center);
                if (dc >= lo && dc <= a) throw DomainError("vorticity support covers a hole");
            }
            if (lo == 0.0 && domain.distance_to_boundary(center) < a && domain.kind() != Domain::Kind::general) {
                // the sampled circle test above misses a hole strictly inside the support
                if (domain.kind() == Domain::Kind::annulus) throw DomainError("vorticity support covers a hole");
            }
            return;
        }
        case Kind::general_patch:
            for (const auto& p : polygons) {
                for (const Vec2& v : p)
                    if (!inside(v)) throw DomainError("patch polygon leaves the domain");
                for (int i = 1; i <= domain.holes(); ++i)
                    if (in_polygon(p, domain.curve(i).points().front())) throw DomainError("patch polygon covers a hole");
            }
            return;
        case Kind::loglog_singularity:
            if (!inside(center)) throw DomainError("log-log singularity must be interior");
            if (!(4.0 * length > std::exp(1.0) * domain.diameter()))
                throw ArgumentError("loglog: length must exceed e·diam(Ω)/4 so that ω > 0 on Ω");
            return;
        case Kind::particle_cloud:
            for (const Vec2& p : positions)
                if (!inside(p)) throw DomainError("particle outside the domain");
            return;
    }
}

bool VorticityField::stationary_in(const Domain& domain) const {
    if (is_zero(*this)) return true;
    if (!radial() || domain.kind() == Domain::Kind::general) return false;
    return norm(center) <= 1e-14 * domain.diameter();
}

VorticityField discretize(const VorticityField& field, const Domain& domain, double spacing) {
    if (field.kind == VorticityField::Kind::particle_cloud) return field;
    if (!(spacing > 0.0)) throw ArgumentError("discretize: spacing must be positive");
    field.validate(domain);
    std::vector<Vec2> pos;
    std::vector<double> w, v;
    if (is_zero(field)) return VorticityField::particle_cloud({}, {}, {}, spacing, field.circulations);
    Vec2 lo, hi;
    switch (field.kind) {
        case VorticityField::Kind::general_patch:
            lo = hi = field.polygons.front().front();
            for (const auto& p : field.polygons)
                for (const Vec2& q : p) {
                    lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
                    hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
                }
            break;
        case VorticityField::Kind::loglog_singularity:
            std::tie(lo, hi) = domain.bounds();
            break;
        default: {
            const double a = support_radius(field);
            lo = field.center - Vec2{a, a};
            hi = field.center + Vec2{a, a};
        }
    }
    const int nx = static_cast<int>(std::ceil((hi.x - lo.x) / spacing));
    const int ny = static_cast<int>(std::ceil((hi.y - lo.y) / spacing));
    constexpr int sub = 4;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            double area = 0.0, mass = 0.0;
            Vec2 c{};
            int hits = 0;
            auto sample = [&](int n) {
                area = mass = 0.0;
                c = {};
                hits = 0;
                const double da = spacing * spacing / (n * n);
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) {
                        const Vec2 p = lo + Vec2{(i + (a + 0.5) / n) * spacing, (j + (b + 0.5) / n) * spacing};
                        if (!domain.contains(p)) continue;
                        const double om = field(p);
                        if (om == 0.0) continue;
                        ++hits;
                        area += da;
                        mass += om * da;
                        c += da * p;
                    }
            };
            sample(sub);
            if (hits > 0 && hits < sub * sub) sample(8 * sub);  // cut cell
            if (area == 0.0 || mass == 0.0) continue;
            pos.push_back((1.0 / area) * c);
            w.push_back(mass);
            v.push_back(mass / area);
        }
    return VorticityField::particle_cloud(std::move(pos), std::move(w), std::move(v), spacing, field.circulations);
}

std::vector<std::pair<double, double>> ray_intervals(const Domain& domain, Vec2 x, Vec2 e) {
    if (domain.kind() != Domain::Kind::general) {
        const double b = dot(x, e);
        const double c = norm2(x) - domain.R() * domain.R();
        const double disc = b * b - c;
        if (disc < 0.0) return {};
        const double r_out = -b + std::sqrt(disc);
        if (r_out <= 0.0) return {};
        if (domain.kind() == Domain::Kind::annulus) {
            const double ci = norm2(x) - domain.r0() * domain.r0();
            const double di = b * b - ci;
            if (di > 0.0 && ci > 0.0) {
                const double r1 = -b - std::sqrt(di), r2 = -b + std::sqrt(di);
                if (r1 > 0.0) return {{0.0, r1}, {r2, r_out}};
            }
        }
        return {{0.0, r_out}};
    }
    std::vector<double> hits;
    for (const auto& cv : domain.curves()) polyline_hits(cv.points(), x, e, hits);
    return pair_up(std::move(hits), domain.contains(x));
}

// ---------------------------------------------------------------- velocity

Vec2 biot_savart_velocity(const GreenEvaluator& ev, const VorticityField& field, Vec2 x, const BiotSavartOptions& opts) {
    const Domain& dom = ev.domain();
    Vec2 u{};
    if (ev.d() > 0) {
        bool any = false;
        for (double c : field.circulations) any = any || c != 0.0;
        if (any) u += ev.X0(field.circulations, x);
    }
    if (is_zero(field)) return u;
    const RegularGradient reg(ev);

    switch (field.kind) {
        case VorticityField::Kind::particle_cloud: {
            const double d = field.blob;
            for (std::size_t j = 0; j < field.positions.size(); ++j) {
                const Vec2 dx = x - field.positions[j];
                const double r2 = norm2(dx);
                Vec2 k = perp(reg(x, field.positions[j]));
                if (r2 > 0.0) k += (inv2pi * blob_fraction(std::sqrt(r2) / d) / r2) * perp(dx);
                u += field.weights[j] * k;
            }
            return u;
        }
        case VorticityField::Kind::radial_patch:
        case VorticityField::Kind::radial_profile: {
            const Vec2 dx = x - field.center;
            const double r2 = norm2(dx);
            if (r2 > 0.0) u += (inv2pi * enclosed(field, std::sqrt(r2)) / r2) * perp(dx);
            if (field.stationary_in(dom)) return u;  // regular part averages to zero over circles
            const auto br = radial_breaks(field);
            const auto& g = quad::gauss_legendre(24);
            const int nt = opts.angular_nodes;
            Vec2 s{};
            for (std::size_t i = 0; i + 1 < br.size(); ++i) {
                const double a = br[i], b = br[i + 1];
                for (std::size_t n = 0; n < g.nodes.size(); ++n) {
                    const double rho = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[n];
                    const double om = field.kind == VorticityField::Kind::radial_patch ? field.value : profile_value(field.profile, rho);
                    if (om == 0.0) continue;
                    Vec2 ring{};
                    for (int k = 0; k < nt; ++k) {
                        const double t = 2 * pi * k / nt;
                        ring += perp(reg(x, field.center + Vec2{rho * std::cos(t), rho * std::sin(t)}));
                    }
                    s += (0.5 * (b - a) * g.weights[n] * om * rho * 2 * pi / nt) * ring;
                }
            }
            return u + s;
        }
        case VorticityField::Kind::general_patch: {
            std::vector<double> kinks{0.0, 2.0 * pi};
            for (const auto& p : field.polygons)
                for (const Vec2& q : p) kinks.push_back(wrap_angle(std::atan2(q.y - x.y, q.x - x.x)));
            const auto& g = quad::gauss_legendre(20);
            auto ray = [&](double th) {
                const Vec2 e{std::cos(th), std::sin(th)};
                Vec2 acc{};
                for (std::size_t i = 0; i < field.polygons.size(); ++i) {
                    std::vector<double> hits;
                    polyline_hits(field.polygons[i], x, e, hits);
                    for (auto [ra, rb] : pair_up(hits, in_polygon(field.polygons[i], x))) {
                        Vec2 seg = (-(rb - ra) * inv2pi) * perp(e);  // free-space part, exact
                        for (std::size_t n = 0; n < g.nodes.size(); ++n) {
                            const double r = 0.5 * (ra + rb) + 0.5 * (rb - ra) * g.nodes[n];
                            seg += (0.5 * (rb - ra) * g.weights[n] * r) * perp(reg(x, x + r * e));
                        }
                        acc += field.polygon_values[i] * seg;
                    }
                }
                return acc;
            };
            return u + angular_integral(ray, kinks, opts.abs_tol);
        }
        case VorticityField::Kind::loglog_singularity: {
            // ω is radial about x₀: inside the disk B(x₀, ρ_B) use the exact enclosed circulation plus a
            // ring quadrature of the regular part; outside B, ω is smooth and rays from x use fixed rules.
            const Vec2 c = field.center;
            const double rb = 0.9 * dom.distance_to_boundary(c);
            auto omega = [&](double rho) { return field.value * std::log(std::log(4.0 * field.length / rho)); };
            const auto& g8 = quad::gauss_legendre(8);
            auto graded = [&](double upper, const std::function<void(double, double)>& node) {
                // geometric panels towards ρ = 0 (ρ·log log(1/ρ) is not smooth there)
                for (int k = 0; k < 48; ++k) {
                    const double b = std::ldexp(upper, -k), a = k == 47 ? 0.0 : 0.5 * b;
                    for (std::size_t n = 0; n < g8.nodes.size(); ++n)
                        node(0.5 * (a + b) + 0.5 * (b - a) * g8.nodes[n], 0.5 * (b - a) * g8.weights[n]);
                }
            };
            const Vec2 dx = x - c;
            const double r = norm(dx);
            if (r > 0.0) {
                double enc = 0.0;
                graded(std::min(r, rb), [&](double rho, double w) { enc += w * omega(rho) * rho; });
                u += (enc / (r * r)) * perp(dx);  // 2π∫ωρdρ/(2πr²)
            }
            const int nt = 2 * opts.angular_nodes;
            graded(rb, [&](double rho, double w) {
                Vec2 ring{};
                for (int k = 0; k < nt; ++k) {
                    const double t = 2 * pi * k / nt;
                    ring += perp(reg(x, c + Vec2{rho * std::cos(t), rho * std::sin(t)}));
                }
                u += (w * omega(rho) * rho * 2 * pi / nt) * ring;
            });
            // outside B
            auto kinks = domain_kinks(dom, x);
            if (r > rb) {
                const double th0 = std::atan2(-dx.y, -dx.x), half = std::asin(rb / r);
                kinks.push_back(wrap_angle(th0 - half));
                kinks.push_back(wrap_angle(th0 + half));
            }
            const auto& g = quad::gauss_legendre(24);
            auto ray = [&](double th) {
                const Vec2 e{std::cos(th), std::sin(th)};
                // the part of the ray inside B
                const double b = dot(dx, e), cc = r * r - rb * rb, disc = b * b - cc;
                double ba = 0.0, bb = 0.0;
                if (disc > 0.0) {
                    ba = std::max(0.0, -b - std::sqrt(disc));
                    bb = std::max(0.0, -b + std::sqrt(disc));
                }
                Vec2 acc{};
                auto segment = [&](double ra, double rc) {
                    if (rc <= ra) return;
                    for (std::size_t n = 0; n < g.nodes.size(); ++n) {
                        const double rr = 0.5 * (ra + rc) + 0.5 * (rc - ra) * g.nodes[n];
                        const Vec2 y = x + rr * e;
                        const Vec2 k = perp(reg(x, y)) * rr + (-inv2pi) * perp(e);
                        acc += (0.5 * (rc - ra) * g.weights[n] * omega(distance(y, c))) * k;
                    }
                };
                for (auto [ra, rc] : ray_intervals(dom, x, e)) {
                    if (bb <= ra || ba >= rc) {
                        segment(ra, rc);
                    } else {
                        segment(ra, std::max(ra, ba));
                        segment(std::min(rc, bb), rc);
                    }
                }
                return acc;
            };
            return u + angular_integral(ray, kinks, opts.abs_tol);
        }
    }
    return u;
}

std::vector<Vec2> biot_savart_velocity(const GreenEvaluator& ev, const VorticityField& field, const std::vector<Vec2>& xs,
                                       const BiotSavartOptions& opts) {
    std::vector<Vec2> u(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { u[i] = biot_savart_velocity(ev, field, xs[i], opts); });
    return u;
}

// ---------------------------------------------------------------- sampling

PairSample sample_pairs(const Domain& domain, int base, std::uint64_t seed, int k_min, int k_max) {
    if (base < 1 || k_min > k_max) throw ArgumentError("sample_pairs: empty sample");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const auto [lo, hi] = domain.bounds();
    PairSample s;
    for (int b = 0; b < base; ++b) {
        Vec2 x;
        do {
            x = {lo.x + (hi.x - lo.x) * U(rng), lo.y + (hi.y - lo.y) * U(rng)};
        } while (!domain.contains(x));
        const int ix = static_cast<int>(s.points.size());
        s.points.push_back(x);
        for (int k = k_min; k <= k_max; ++k) {
            const double h = std::ldexp(domain.diameter(), -k);
            for (int attempt = 0; attempt < 64; ++attempt) {
                const double t = 2 * pi * U(rng);
                const Vec2 y = x + h * Vec2{std::cos(t), std::sin(t)};
                if (!domain.contains(y)) continue;
                s.pairs.emplace_back(ix, static_cast<int>(s.points.size()));
                s.level.push_back(k);
                s.points.push_back(y);
                break;
            }
        }
    }
    return s;
}

// ---------------------------------------------------------------- flow map

VorticityField FlowMapRun::field_at(std::size_t k) const {
    if (frozen || cloud.empty()) return field;
    VorticityField f = field;
    f.positions = cloud.at(k);
    return f;
}

FlowMapRun flow_map(std::shared_ptr<const GreenEvaluator> ev, const VorticityField& field, const std::vector<Vec2>& tracers,
                    double T, const FlowOptions& opts) {
    if (!ev) throw ArgumentError("flow_map: no Green evaluator");
    if (!(T >= 0.0)) throw ArgumentError("flow_map: horizon must be non-negative");
    if (!(opts.tol > 0.0) || opts.outputs < 1) throw ArgumentError("flow_map: tolerance and output count must be positive");
    const Domain& dom = ev->domain();
    field.validate(dom);
    for (const Vec2& p : tracers)
        if (!dom.contains(p)) throw DomainError("flow_map: tracer outside the domain");

    FlowMapRun run;
    run.green = ev;
    run.tracers = tracers;
    run.frozen = field.stationary_in(dom);
    run.field = run.frozen ? field : discretize(field, dom, opts.particle_spacing);
    const std::size_t np = run.frozen ? 0 : run.field.positions.size();
    const std::size_t nt = tracers.size();
    const double sign = opts.reverse ? -1.0 : 1.0;
    const double slack = 1e-6 * dom.diameter();

    auto record = [&](double t, std::span<const double> y) {
        std::vector<Vec2> z(nt);
        for (std::size_t j = 0; j < nt; ++j) {
            z[j] = {y[2 * (np + j)], y[2 * (np + j) + 1]};
            if (!dom.contains(z[j]) && dom.distance_to_boundary(z[j]) > slack) {
                std::ostringstream m;
                m << "flow_map: tracer " << j << " left the domain at t=" << t;
                throw ConservationError(m.str());
            }
        }
        run.times.push_back(t);
        run.positions.push_back(std::move(z));
        if (np > 0) {
            std::vector<Vec2> c(np);
            for (std::size_t j = 0; j < np; ++j) c[j] = {y[2 * j], y[2 * j + 1]};
            run.cloud.push_back(std::move(c));
        }
    };

    std::vector<double> y0(2 * (np + nt));
    for (std::size_t j = 0; j < np; ++j) {
        y0[2 * j] = run.field.positions[j].x;
        y0[2 * j + 1] = run.field.positions[j].y;
    }
    for (std::size_t j = 0; j < nt; ++j) {
        y0[2 * (np + j)] = tracers[j].x;
        y0[2 * (np + j) + 1] = tracers[j].y;
    }
    record(0.0, y0);
    if (T == 0.0) return run;

    VorticityField snapshot = run.field;
    auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
        for (std::size_t j = 0; j < np; ++j) snapshot.positions[j] = {y[2 * j], y[2 * j + 1]};
        parallel_for(np + nt, [&](std::size_t i) {
            const Vec2 u = sign * biot_savart_velocity(*ev, snapshot, {y[2 * i], y[2 * i + 1]});
            dy[2 * i] = u.x;
            dy[2 * i + 1] = u.y;
        });
    };
    ode::Options o;
    o.rtol = o.atol = opts.tol;
    std::size_t next = 1;
    auto observer = [&](const ode::DenseStep& st) {
        run.step_sizes.push_back(std::abs(st.h));
        while (next <= static_cast<std::size_t>(opts.outputs)) {
            const double t = T * static_cast<double>(next) / opts.outputs;
            if (t > st.t1() * (1 + 1e-14)) break;
            record(t, st.evaluate(std::min(t, st.t1())));
            ++next;
        }
        return true;
    };
    ode::dopri5(rhs, 0.0, y0, T, o, {}, observer);
    return run;
}

// ---------------------------------------------------------------- diagnostics

double velocity_modulus_estimate(const std::vector<Vec2>& points, const std::vector<Vec2>& velocity,
                                 const std::vector<std::pair<int, int>>& pairs, const Modulus& mu) {
    double sup = 0.0;
    for (auto [i, j] : pairs) {
        const double h = distance(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
        if (h == 0.0 || h > mu.a()) continue;
        sup = std::max(sup, distance(velocity[static_cast<std::size_t>(i)], velocity[static_cast<std::size_t>(j)]) / mu(h));
    }
    return sup;
}

double velocity_modulus_estimate(const FlowMapRun& run, const std::vector<std::pair<int, int>>& pairs, const Modulus& mu) {
    double sup = 0.0;
    const std::size_t n = run.frozen ? 1 : run.times.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto u = biot_savart_velocity(*run.green, run.field_at(k), run.tracers);
        sup = std::max(sup, velocity_modulus_estimate(run.tracers, u, pairs, mu));
    }
    return sup;
}

ViolationReport modulus_violation_check(const FlowMapRun& run, const GammaFamily& family,
                                        const std::vector<std::pair<int, int>>& pairs) {
    ViolationReport rep;
    const double at = family.a_tilde();
    for (std::size_t k = 0; k < run.times.size(); ++k) {
        const double t = run.times[k];
        if (t > family.horizon() * (1 + 1e-12)) break;
        long checked = 0, viol = 0;
        for (auto [i, j] : pairs) {
            const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
            const double h = distance(run.tracers[a], run.tracers[b]);
            if (h == 0.0) continue;
            if (h > at) {
                ++rep.skipped;
                continue;
            }
            ++checked;
            if (distance(run.positions[k][a], run.positions[k][b]) > family(std::min(t, family.horizon()), h) * (1 + 1e-9)) ++viol;
        }
        rep.checked += checked;
        rep.violations += viol;
        rep.per_time.push_back(checked ? static_cast<double>(viol) / static_cast<double>(checked) : 0.0);
    }
    rep.fraction = rep.checked ? static_cast<double>(rep.violations) / static_cast<double>(rep.checked) : 0.0;
    return rep;
}

ViolationReport modulus_violation_check(const FlowMapRun& run, const Modulus& mu, double kappa,
                                        const std::vector<std::pair<int, int>>& pairs) {
    if (!(kappa > 0.0)) throw ArgumentError("modulus_violation_check: κ must be positive");
    ViolationReport rep;
    for (std::size_t k = 0; k < run.times.size(); ++k) {
        const double t = run.times[k];
        std::unique_ptr<GammaFamily> fam;
        if (t > 0.0) {
            try {
                fam = std::make_unique<GammaFamily>(mu, kappa, t);
            } catch (const DomainError&) {
                rep.skipped += static_cast<long>(pairs.size());
                rep.per_time.push_back(0.0);
                continue;
            }
        }
        const double at = fam ? fam->a_tilde() : mu.a();
        long checked = 0, viol = 0;
        for (auto [i, j] : pairs) {
            const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
            const double h = distance(run.tracers[a], run.tracers[b]);
            if (h == 0.0) continue;
            if (h > at) {
                ++rep.skipped;
                continue;
            }
            ++checked;
            const double bound = fam ? (*fam)(t, h) : h;
            if (distance(run.positions[k][a], run.positions[k][b]) > bound * (1 + 1e-9)) ++viol;
        }
        rep.checked += checked;
        rep.violations += viol;
        rep.per_time.push_back(checked ? static_cast<double>(viol) / static_cast<double>(checked) : 0.0);
    }
    rep.fraction = rep.checked ? static_cast<double>(rep.violations) / static_cast<double>(rep.checked) : 0.0;
    return rep;
}

HolderFit holder_exponent_estimate(const FlowMapRun& run, std::size_t time_index, const std::vector<std::pair<int, int>>& pairs) {
    if (time_index >= run.times.size()) throw ArgumentError("holder_exponent_estimate: time index out of range");
    std::vector<double> xs, ys;
    std::vector<long> scales;
    for (auto [i, j] : pairs) {
        const auto a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
        const double h = distance(run.tracers[a], run.tracers[b]);
        const double d = distance(run.positions[time_index][a], run.positions[time_index][b]);
        if (h <= 0.0 || d <= 0.0) continue;
        xs.push_back(std::log(h));
        ys.push_back(std::log(d));
        scales.push_back(std::lround(std::log2(h) * 8.0));
    }
    std::sort(scales.begin(), scales.end());
    const int distinct = static_cast<int>(std::unique(scales.begin(), scales.end()) - scales.begin());
    if (distinct < 6) throw FitError("holder_exponent_estimate: fewer than six separation scales");
    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("holder_exponent_estimate: degenerate design");
    HolderFit fit;
    fit.r_hat = sxy / sxx;
    double ssr = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - my - fit.r_hat * (xs[i] - mx);
        ssr += e * e;
    }
    fit.width = 2.0 * std::sqrt(ssr / std::max(1.0, n - 2.0) / sxx);
    fit.points = static_cast<int>(xs.size());
    fit.scales = distinct;
    return fit;
}

namespace {

// log ∫_Ω |ω|^p for the log-log field, by rays from x₀ in v = log(4L/r) (r dr = (4L)² e^{−2v} dv).
double loglog_log_integral(const VorticityField& f, const Domain& dom, double p) {
    const double L4 = 4.0 * f.length;
    auto expo = [p](double v) { return p * std::log(std::abs(std::log(v))) - 2.0 * v; };
    // peak of p·log log v − 2v: p = 2 v log v
    double lo = 1.0, hi = p + 3.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (2.0 * mid * std::log(mid) < p ? lo : hi) = mid;
    }
    const double vs = 0.5 * (lo + hi);
    const double v_lo = std::log(L4 / dom.diameter());
    const double F = expo(std::max(vs, v_lo));
    quad::Options qo;
    qo.abs_tol = 0.0;
    qo.rel_tol = 1e-12;
    auto ray = [&](double th) {
        const Vec2 e{std::cos(th), std::sin(th)};
        double s = 0.0;
        for (auto [ra, rb] : ray_intervals(dom, f.center, e)) {
            const double va = std::log(L4 / rb);
            const double vb = ra > 0.0 ? std::log(L4 / ra) : std::max(va, vs) + 60.0 + 3.0 * vs;
            std::vector<double> br{va};
            if (vs > va && vs < vb) br.push_back(vs);
            for (double v = br.back() + 8.0; v < vb; v += 8.0) br.push_back(v);
            br.push_back(vb);
            const auto r = quad::gauss_kronrod([&](double v) { return std::exp(expo(v) - F); }, br, qo);
            if (!r.converged) throw QuadratureError("lp_norm: radial quadrature did not converge");
            s += r.value;
        }
        return Vec2{s, 0.0};
    };
    const Vec2 I = angular_integral(ray, domain_kinks(dom, f.center), 1e-11);
    return F + 2.0 * std::log(L4) + std::log(I.x);
}

}  // namespace

double lp_norm(const VorticityField& field, const Domain& domain, double p) {
    if (!(p >= 1.0)) throw ArgumentError("lp_norm: p must be at least 1");
    if (is_zero(field)) return 0.0;
    switch (field.kind) {
        case VorticityField::Kind::radial_patch:
            return std::abs(field.value) * std::exp(std::log(pi * field.radius * field.radius) / p);
        case VorticityField::Kind::general_patch:
        case VorticityField::Kind::particle_cloud: {
            std::vector<double> area, val;
            if (field.kind == VorticityField::Kind::general_patch) {
                for (std::size_t i = 0; i < field.polygons.size(); ++i) {
                    area.push_back(std::abs(shoelace(field.polygons[i])));
                    val.push_back(std::abs(field.polygon_values[i]));
                }
            } else {
                for (std::size_t j = 0; j < field.weights.size(); ++j) {
                    area.push_back(field.weights[j] / field.values[j]);
                    val.push_back(std::abs(field.values[j]));
                }
            }
            const double M = val.empty() ? 0.0 : *std::max_element(val.begin(), val.end());
            if (M == 0.0) return 0.0;
            double s = 0.0;
            for (std::size_t i = 0; i < val.size(); ++i) s += area[i] * std::pow(val[i] / M, p);
            return M * std::pow(s, 1.0 / p);
        }
        case VorticityField::Kind::radial_profile: {
            double M = 0.0;
            for (const auto& s : field.profile) M = std::max(M, std::abs(s.second));
            if (M == 0.0) return 0.0;
            const auto br = radial_breaks(field);
            quad::Options qo;
            qo.abs_tol = 0.0;
            qo.rel_tol = 1e-12;
            double s = 0.0;
            for (std::size_t i = 0; i + 1 < br.size(); ++i)
                s += quad::integrate([&](double r) { return std::pow(std::abs(profile_value(field.profile, r)) / M, p) * r; },
                                     br[i], br[i + 1], qo);
            return M * std::pow(2.0 * pi * s, 1.0 / p);
        }
        case VorticityField::Kind::loglog_singularity:
            return std::abs(field.value) * std::exp(loglog_log_integral(field, domain, p) / p);
    }
    return 0.0;
}

std::vector<double> lp_membership_ratio(const VorticityField& field, const Domain& domain, const Germ& germ,
                                        const std::vector<double>& p_list) {
    std::vector<double> out;
    for (double p : p_list) {
        const double th = germ.log_value(p);
        out.push_back(lp_norm(field, domain, p) / std::exp(th));
    }
    return out;
}

}  // namespace yudovich
