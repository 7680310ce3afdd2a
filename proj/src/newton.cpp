#include "yudovich/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "yudovich/errors.hpp"
#include "yudovich/parallel.hpp"
#include "yudovich/quadrature.hpp"

namespace yudovich {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kAngularNodes = 16;

// Exit distance along x + r e from a disk containing x.
double exit_distance(Vec2 c, double R, Vec2 x, Vec2 e) {
    const Vec2 d = x - c;
    const double b = dot(d, e);
    const double disc = b * b - (norm2(d) - R * R);
    return -b + std::sqrt(std::max(0.0, disc));
}

// Panels on [a, b]: geometric (ratio 2) from `start` outward, plus grading towards the point of
// closest approach to `s` along the ray.
std::vector<double> ray_breaks(double a, double b, double start, Vec2 x, Vec2 e,
                               const std::optional<Vec2>& s, double diam) {
    std::vector<double> br{a, b};
    if (start > a && start < b) br.push_back(start);
    for (double r = std::max(start, a) * 2.0; r < b && r > 0.0; r *= 2.0) br.push_back(r);
    if (s) {
        const Vec2 d = *s - x;
        const double rs = dot(d, e);
        if (rs > a && rs < b) {
            br.push_back(rs);
            const double miss = std::max(std::abs(cross(e, d)), 1e-14 * diam);
            for (double h = miss; h < b - a; h *= 2.0) {
                if (rs - h > a) br.push_back(rs - h);
                if (rs + h < b) br.push_back(rs + h);
            }
        }
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end(), [](double p, double q) { return q - p <= 1e-15 * std::max(1.0, std::abs(q)); }),
             br.end());
    return br;
}

// Angular breaks on [t0, t0 + 2π]: 8 uniform panels plus dyadic grading around the direction of
// the singular point.
std::vector<double> angular_breaks(Vec2 x, const std::optional<Vec2>& s, double diam) {
    double t0 = 0.0;
    int levels = 0;
    if (s) {
        const double d = distance(*s, x);
        if (d > 1e-14 * diam) {
            t0 = std::atan2(s->y - x.y, s->x - x.x);
            levels = std::clamp(static_cast<int>(std::ceil(std::log2(diam / d))) + 4, 4, 40);
        }
    }
    std::vector<double> br;
    for (int k = 0; k <= 8; ++k) br.push_back(t0 + kTwoPi * k / 8.0);
    for (int j = 1; j <= levels; ++j) {
        const double h = kPi * std::ldexp(1.0, -j);
        br.push_back(t0 + h);
        br.push_back(t0 + kTwoPi - h);
    }
    std::sort(br.begin(), br.end());
    return br;
}

// Composite Gauss–Legendre over `breaks`, each panel split into 2^L pieces, L increased until the
// first `checked` components settle.
template <class G>
std::vector<double> angular_integral(const G& g, std::size_t size, std::size_t checked,
                                     const std::vector<double>& breaks, double tol, int max_levels,
                                     int* levels_used) {
    const auto& rule = quad::gauss_legendre(kAngularNodes);
    std::vector<double> prev;
    for (int L = 0; L <= max_levels; ++L) {
        std::vector<double> acc(size, 0.0);
        const int split = 1 << L;
        for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
            const double len = (breaks[p + 1] - breaks[p]) / split;
            for (int q = 0; q < split; ++q) {
                const double a = breaks[p] + q * len;
                for (int k = 0; k < kAngularNodes; ++k) {
                    const double t = a + 0.5 * len * (rule.nodes[k] + 1.0);
                    const std::vector<double> v = g(t);
                    const double w = 0.5 * len * rule.weights[k];
                    for (std::size_t m = 0; m < size; ++m) acc[m] += w * v[m];
                }
            }
        }
        if (!prev.empty()) {
            double diff = 0.0, scale = 1.0;
            for (std::size_t m = 0; m < checked; ++m) {
                diff = std::max(diff, std::abs(acc[m] - prev[m]));
                scale = std::max(scale, std::abs(acc[m]));
            }
            if (diff <= tol * scale) {
                if (levels_used) *levels_used = L;
                return acc;
            }
        }
        prev = std::move(acc);
    }
    throw QuadratureError("angular quadrature did not settle after " + std::to_string(max_levels) +
                          " doublings");
}

template <class F>
double panel_sum(const std::vector<double>& br, int n, const F& f) {
    const auto& rule = quad::gauss_legendre(n);
    double s = 0.0;
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
        const double a = br[p], h = 0.5 * (br[p + 1] - br[p]);
        for (int k = 0; k < n; ++k) s += h * rule.weights[k] * f(a + h * (rule.nodes[k] + 1.0));
    }
    return s;
}

void require_interior(const Density& f, Vec2 x) {
    if (!(distance(x, f.center) < f.radius))
        throw DomainError("point must lie in the interior of the support");
}

double boundary_term(Vec2 c0, double R0, Vec2 x, int i, int j, int n) {
    // ∫_{∂D₀} ∂_iΓ(x − y) ν_j ds, periodic trapezoid.
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = kTwoPi * k / n;
        const Vec2 nu{std::cos(t), std::sin(t)};
        const Vec2 z = x - (c0 + R0 * nu);
        const double zi = i == 0 ? z.x : z.y;
        const double nj = j == 0 ? nu.x : nu.y;
        s += zi / (kTwoPi * norm2(z)) * nj;
    }
    return s * R0 * kTwoPi / n;
}

}  // namespace

double ramp_eta(double s) {
    if (s <= 1.0) return 0.0;
    if (s >= 2.0) return 1.0;
    const double u = s - 1.0;
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

double ramp_eta_derivative(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    const double u = s - 1.0;
    return 30.0 * u * u * (u - 1.0) * (u - 1.0);
}

Density Density::constant(double value, Vec2 center, double radius) {
    Density d;
    d.center = center;
    d.radius = radius;
    d.f = [value](Vec2) { return value; };
    d.mu = Modulus::power(1.0, 0.5);
    d.name = "constant";
    return d;
}

Density Density::linear(Vec2 a, double b, Vec2 center, double radius) {
    Density d;
    d.center = center;
    d.radius = radius;
    d.f = [a, b](Vec2 y) { return dot(a, y) + b; };
    d.mu = Modulus::power(1.0, 0.5);
    d.name = "linear";
    return d;
}

Density Density::radial(std::function<double(double)> profile, std::optional<Modulus> mu,
                        Vec2 center, double radius) {
    Density d;
    d.center = center;
    d.radius = radius;
    d.f = [profile = std::move(profile), center](Vec2 y) { return profile(distance(y, center)); };
    d.mu = std::move(mu);
    d.singular = center;
    d.name = "radial";
    return d;
}

double Density::operator()(Vec2 y) const { return contains(y) ? f(y) : 0.0; }

bool Density::contains(Vec2 y) const { return distance(y, center) <= radius; }

void Density::validate() const {
    if (!f) throw ArgumentError("density has no evaluator");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("support radius must be positive");
}

double SecondDerivatives::asymmetry() const { return std::abs(u[0][1] - u[1][0]); }

double dini_head(const Modulus& mu, double h) {
    h = std::min(h, mu.a());
    const double v0 = std::log(1.0 / h);
    if (mu.kind() == Modulus::Kind::log_inverse) {
        // μ(e^{−v}) = v^{−q}; the exponent is recovered from one evaluation.
        const double hq = std::min(h, 1e-3);
        const double q = -std::log(mu(hq)) / std::log(std::log(1.0 / hq));
        if (q <= 1.0) return std::numeric_limits<double>::infinity();
        return std::pow(v0, 1.0 - q) / (q - 1.0);
    }
    quad::Options o;
    o.abs_tol = 1e-14;
    o.rel_tol = 1e-10;
    return quad::integrate([&](double v) { return mu(std::exp(-v)); }, v0, 740.0, o);
}

double newton_potential(const Density& f, Vec2 x, const NewtonOptions& opts) {
    f.validate();
    const double diam = f.diameter();
    const Vec2 c = f.center;
    const double R = f.radius;
    const double dc = distance(x, c);

    if (dc < R * (1.0 - 1e-14)) {
        const double fx = f.f(x);
        const double r_near = R - dc;
        double r_min = std::min(opts.floor_factor * diam, r_near * std::ldexp(1.0, -opts.min_shells));
        const int J = static_cast<int>(std::ceil(std::log2(r_near / r_min)));
        r_min = r_near * std::ldexp(1.0, -J);
        // ∫₀^{r_min} r log r dr with f frozen at x.
        const double head = fx * (0.5 * r_min * r_min * std::log(r_min) - 0.25 * r_min * r_min);
        auto ray = [&](double t) {
            const Vec2 e{std::cos(t), std::sin(t)};
            const double rD = exit_distance(c, R, x, e);
            std::vector<double> br = ray_breaks(r_min, rD, r_near, x, e, f.singular, diam);
            for (int j = 1; j < J; ++j) br.push_back(r_near * std::ldexp(1.0, -j));
            std::sort(br.begin(), br.end());
            const double s = panel_sum(br, opts.radial_nodes, [&](double r) {
                return std::log(r) * r * f.f(x + r * e);
            });
            return std::vector<double>{(s + head) / kTwoPi};
        };
        return angular_integral(ray, 1, 1, angular_breaks(x, f.singular, diam), opts.tol,
                                opts.max_levels, nullptr)[0];
    }

    // x outside (or on) the support: only directions within the tangent cone meet the disk;
    // θ = θ_c + α sin φ makes the chord length smooth at the tangents.
    const double alpha = std::asin(std::min(1.0, R / dc));
    const double tc = std::atan2(c.y - x.y, c.x - x.x);
    auto ray = [&](double phi) {
        const double t = tc + alpha * std::sin(phi);
        const Vec2 e{std::cos(t), std::sin(t)};
        const Vec2 d = x - c;
        const double b = dot(d, e);
        const double disc = b * b - (norm2(d) - R * R);
        if (disc <= 0.0) return std::vector<double>{0.0};
        const double sq = std::sqrt(disc);
        const double r1 = std::max(0.0, -b - sq), r2 = -b + sq;
        if (r2 <= r1) return std::vector<double>{0.0};
        std::vector<double> br{r1, r2};
        const int pieces = std::max(1, static_cast<int>(std::ceil(4.0 * (r2 - r1) / R)));
        for (int k = 1; k < pieces; ++k) br.push_back(r1 + (r2 - r1) * k / pieces);
        if (r1 == 0.0) {
            // x on ∂D: the log singularity sits at the end point.
            for (double h = 0.25 * (r2 - r1); h > 1e-10 * diam; h *= 0.5) br.push_back(h);
        }
        if (f.singular) {
            const std::vector<double> extra = ray_breaks(r1, r2, r2, x, e, f.singular, diam);
            br.insert(br.end(), extra.begin(), extra.end());
        }
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());
        const double s = panel_sum(br, opts.radial_nodes, [&](double r) {
            return r > 0.0 ? std::log(r) * r * f.f(x + r * e) : 0.0;
        });
        return std::vector<double>{s * alpha * std::cos(phi) / kTwoPi};
    };
    std::vector<double> br;
    for (int k = 0; k <= 8; ++k) br.push_back(-0.5 * kPi + kPi * k / 8.0);
    return angular_integral(ray, 1, 1, br, opts.tol, opts.max_levels, nullptr)[0];
}

SecondDerivatives newton_second_derivatives(const Density& f, Vec2 x, const NewtonOptions& opts) {
    f.validate();
    require_interior(f, x);
    const double diam = f.diameter();
    const Vec2 c = f.center;
    const double R = f.radius;
    const double R0 = opts.outer_factor * R;
    const double fx = f.f(x);
    const double r_near = R - distance(x, c);
    double r_min = std::min(opts.floor_factor * diam, r_near * std::ldexp(1.0, -opts.min_shells));
    const int J = static_cast<int>(std::ceil(std::log2(r_near / r_min)));
    r_min = r_near * std::ldexp(1.0, -J);

    auto ray = [&](double t) {
        const Vec2 e{std::cos(t), std::sin(t)};
        const double rD = exit_distance(c, R, x, e);
        const double r0 = exit_distance(c, R0, x, e);
        std::vector<double> br = ray_breaks(r_min, rD, r_near, x, e, f.singular, diam);
        for (int j = 1; j < J; ++j) br.push_back(r_near * std::ldexp(1.0, -j));
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());

        std::vector<double> out(3 + J, 0.0);
        const auto& rule = quad::gauss_legendre(opts.radial_nodes);
        double S = 0.0;
        for (std::size_t p = 0; p + 1 < br.size(); ++p) {
            const double a = br[p], h = 0.5 * (br[p + 1] - br[p]);
            double part = 0.0, mag = 0.0;
            for (int k = 0; k < opts.radial_nodes; ++k) {
                const double r = a + h * (rule.nodes[k] + 1.0);
                const double v = (f.f(x + r * e) - fx) / r;
                part += h * rule.weights[k] * v;
                mag += h * rule.weights[k] * std::abs(v);
            }
            S += part;
            const double mid = a + h;
            if (mid < r_near) {
                const int j = std::clamp(static_cast<int>(std::floor(std::log2(r_near / mid))), 0, J - 1);
                out[3 + j] += mag / kTwoPi;
            }
        }
        // D₀ \ D: f(y) − f(x) = −f(x).
        S -= fx * std::log(r0 / rD);
        S /= kTwoPi;
        out[0] = (1.0 - 2.0 * e.x * e.x) * S;
        out[1] = -2.0 * e.x * e.y * S;
        out[2] = (1.0 - 2.0 * e.y * e.y) * S;
        return out;
    };

    SecondDerivatives res;
    const std::vector<double> I = angular_integral(ray, 3 + J, 3, angular_breaks(x, f.singular, diam),
                                                   opts.tol, opts.max_levels, &res.levels);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double vol = (i == 0 && j == 0) ? I[0] : (i == 1 && j == 1) ? I[2] : I[1];
            res.u[i][j] = vol - fx * boundary_term(c, R0, x, i, j, opts.boundary_nodes);
        }
    res.r_min = r_min;
    res.shell_magnitudes.assign(I.begin() + 3, I.end());
    double total = 0.0;
    for (double a : res.shell_magnitudes) total += a;
    const double last = res.shell_magnitudes.back();
    res.tail_share = total > 0.0 ? J * last / total : 0.0;
    res.budget = f.mu ? dini_head(*f.mu, r_min) : last;
    if (res.tail_share > 0.15 && last > 1e-12 * std::max(1.0, std::abs(fx))) {
        std::ostringstream msg;
        msg << "near-field shells do not settle (share of last shell " << res.tail_share
            << "); partial Dini integral " << total;
        throw AccuracyError(msg.str(), total);
    }
    return res;
}

SecondDerivatives mollified_second_derivatives(const Density& f, Vec2 x, double eps,
                                               const NewtonOptions& opts) {
    f.validate();
    require_interior(f, x);
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    const double diam = f.diameter();
    const Vec2 c = f.center;
    const double R = f.radius;

    auto ray = [&](double t) {
        const Vec2 e{std::cos(t), std::sin(t)};
        const double rD = exit_distance(c, R, x, e);
        std::vector<double> out(3, 0.0);
        if (rD <= eps) return out;
        const double top = std::min(2.0 * eps, rD);
        std::vector<double> br = ray_breaks(eps, rD, top, x, e, f.singular, diam);
        // Inner ramp: η(r/ε) and η′ terms.
        double A = 0.0, B = 0.0;
        const auto& rule = quad::gauss_legendre(opts.radial_nodes);
        for (std::size_t p = 0; p + 1 < br.size(); ++p) {
            const double a = br[p], h = 0.5 * (br[p + 1] - br[p]);
            for (int k = 0; k < opts.radial_nodes; ++k) {
                const double r = a + h * (rule.nodes[k] + 1.0);
                const double w = h * rule.weights[k] * f.f(x + r * e);
                A += w * ramp_eta(r / eps) / r;
                B += w * ramp_eta_derivative(r / eps) / eps;
            }
        }
        A /= kTwoPi;
        B /= kTwoPi;
        out[0] = (1.0 - 2.0 * e.x * e.x) * A + e.x * e.x * B;
        out[1] = -2.0 * e.x * e.y * A + e.x * e.y * B;
        out[2] = (1.0 - 2.0 * e.y * e.y) * A + e.y * e.y * B;
        return out;
    };
    SecondDerivatives res;
    const std::vector<double> I =
        angular_integral(ray, 3, 3, angular_breaks(x, f.singular, diam), opts.tol, opts.max_levels, &res.levels);
    res.u[0][0] = I[0];
    res.u[0][1] = res.u[1][0] = I[1];
    res.u[1][1] = I[2];
    if (f.mu) res.budget = mollifier_error_bound(f, eps);
    return res;
}

double mollifier_error_bound(const Density& f, double eps) {
    if (!f.mu) throw ArgumentError("mollifier bound needs a claimed modulus");
    return 6.0 * dini_head(*f.mu, 2.0 * eps);
}

LaplacianReport laplacian_check(const Density& f, const std::vector<Vec2>& samples,
                                const NewtonOptions& opts) {
    LaplacianReport rep;
    rep.values.resize(samples.size());
    rep.errors.resize(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        rep.values[i] = newton_second_derivatives(f, samples[i], opts);
        rep.errors[i] = std::abs(rep.values[i].trace() - f.f(samples[i]));
    });
    for (double e : rep.errors) rep.max_error = std::max(rep.max_error, e);
    return rep;
}

}  // namespace yudovich
