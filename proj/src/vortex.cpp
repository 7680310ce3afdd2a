#include "yudovich/vortex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "yudovich/errors.hpp"
#include "yudovich/quadrature.hpp"
#include "yudovich/taylor.hpp"

namespace yudovich {

namespace {

// Point-vortex velocities without the collision guard (RK stage points may dip below ε_coll).
std::vector<Vec2> stage_velocity(const VortexSystem& sys, const std::vector<Vec2>& z) {
    const auto& ev = *sys.green;
    std::vector<Vec2> v(z.size());
    for (std::size_t l = 0; l < z.size(); ++l) {
        Vec2 acc = (0.5 * sys.strengths[l]) * perp(ev.grad_robin(z[l]));
        if (ev.d() > 0) acc += ev.X0(sys.circulations, z[l]);
        for (std::size_t m = 0; m < z.size(); ++m)
            if (m != l) acc += sys.strengths[m] * perp(ev.grad_G(z[l], z[m]));
        v[l] = acc;
    }
    return v;
}

// One fifth-order Dormand–Prince step of length h from z0.
std::vector<Vec2> dp5_step(const VortexSystem& sys, const std::vector<Vec2>& z0, double h) {
    static constexpr double A[6][5] = {{1.0 / 5},
                                       {3.0 / 40, 9.0 / 40},
                                       {44.0 / 45, -56.0 / 15, 32.0 / 9},
                                       {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
                                       {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656}};
    static constexpr double B[6] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
    std::vector<std::vector<Vec2>> k;
    k.push_back(stage_velocity(sys, z0));
    for (int s = 1; s < 6; ++s) {
        std::vector<Vec2> z = z0;
        for (std::size_t l = 0; l < z.size(); ++l)
            for (int j = 0; j < s; ++j) z[l] += (h * A[s - 1][j]) * k[j][l];
        k.push_back(stage_velocity(sys, z));
    }
    std::vector<Vec2> z = z0;
    for (std::size_t l = 0; l < z.size(); ++l)
        for (int j = 0; j < 6; ++j) z[l] += (h * B[j]) * k[j][l];
    return z;
}

std::vector<Vec2> unpack(std::span<const double> y) {
    std::vector<Vec2> z(y.size() / 2);
    for (std::size_t l = 0; l < z.size(); ++l) z[l] = {y[2 * l], y[2 * l + 1]};
    return z;
}

double boundary_distance(const Domain& d, const std::vector<Vec2>& z) {
    double m = std::numeric_limits<double>::infinity();
    for (const Vec2& p : z) m = std::min(m, d.contains(p) ? d.distance_to_boundary(p) : -d.distance_to_boundary(p));
    return m;
}

std::pair<int, int> closest_pair(const std::vector<Vec2>& z) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> out{-1, -1};
    for (std::size_t a = 0; a < z.size(); ++a)
        for (std::size_t b = a + 1; b < z.size(); ++b)
            if (distance(z[a], z[b]) < best) {
                best = distance(z[a], z[b]);
                out = {static_cast<int>(a), static_cast<int>(b)};
            }
    return out;
}

int nearest_to_boundary(const Domain& d, const std::vector<Vec2>& z) {
    int idx = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < z.size(); ++l) {
        const double dist = d.distance_to_boundary(z[l]);
        if (dist < best) {
            best = dist;
            idx = static_cast<int>(l);
        }
    }
    return idx;
}

double smootherstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

double smootherstep_derivative(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return 30.0 * u * u * (u - 1.0) * (u - 1.0);
}

}  // namespace

void VortexSystem::validate() const {
    if (!green) throw ArgumentError("vortex system: no Green evaluator");
    if (strengths.size() != positions.size()) throw ArgumentError("vortex system: one strength per vortex required");
    if (static_cast<int>(circulations.size()) != green->d())
        throw ArgumentError("vortex system: one circulation per inner boundary curve required");
    for (std::size_t l = 0; l < positions.size(); ++l) {
        if (strengths[l] == 0.0) throw ArgumentError("vortex system: strengths must be nonzero");
        if (!green->domain().contains(positions[l])) {
            std::ostringstream msg;
            msg << "vortex " << l << " at (" << positions[l].x << ", " << positions[l].y << ") is not inside the domain";
            throw DomainError(msg.str());
        }
    }
    if (positions.size() > 1 && min_pair_distance(positions) == 0.0)
        throw SingularityError("vortex system: coincident vortices");
}

double min_pair_distance(const std::vector<Vec2>& z) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < z.size(); ++a)
        for (std::size_t b = a + 1; b < z.size(); ++b) best = std::min(best, distance(z[a], z[b]));
    return best;
}

double routh_energy(const VortexSystem& sys) { return routh_energy(sys, sys.positions); }

double routh_energy(const VortexSystem& sys, const std::vector<Vec2>& z) {
    const auto& ev = *sys.green;
    double W = 0.0;
    for (std::size_t l = 0; l < z.size(); ++l) {
        const double a = sys.strengths[l];
        if (ev.d() > 0) W += a * ev.psi0(sys.circulations, z[l]);
        W += 0.5 * a * a * ev.robin(z[l]);
        for (std::size_t m = 0; m < z.size(); ++m) {
            if (m == l) continue;
            if (z[l].x == z[m].x && z[l].y == z[m].y) throw SingularityError("routh_energy: coincident vortices");
            W += 0.5 * a * sys.strengths[m] * ev.G(z[l], z[m]);
        }
    }
    return W;
}

std::vector<Vec2> vortex_rhs(const VortexSystem& sys) { return vortex_rhs(sys, sys.positions); }

std::vector<Vec2> vortex_rhs(const VortexSystem& sys, const std::vector<Vec2>& z) {
    const auto& ev = *sys.green;
    const double eps = 1e-4 * ev.domain().diameter();
    if (z.size() > 1 && min_pair_distance(z) < eps) throw SingularityError("vortex_rhs: vortices closer than ε_coll");
    std::vector<Vec2> v(z.size());
    for (std::size_t l = 0; l < z.size(); ++l) {
        Vec2 acc = (0.5 * sys.strengths[l]) * perp(ev.grad_robin(z[l]));
        if (ev.d() > 0) acc += ev.X0(sys.circulations, z[l]);
        for (std::size_t m = 0; m < z.size(); ++m) {
            if (m == l) continue;
            acc += sys.strengths[m] * perp(ev.grad_G(z[l], z[m]));
        }
        v[l] = acc;
    }
    return v;
}

std::vector<Vec2> TaylorStep::positions_at(double t) const {
    const double s = t - t0;
    std::vector<Vec2> z(coeffs.size() / 2);
    for (std::size_t l = 0; l < z.size(); ++l) {
        auto horner = [s](const std::vector<double>& a) {
            double v = 0.0;
            for (std::size_t k = a.size(); k-- > 0;) v = v * s + a[k];
            return v;
        };
        z[l] = {horner(coeffs[2 * l]), horner(coeffs[2 * l + 1])};
    }
    return z;
}

std::string Termination::describe() const {
    std::ostringstream s;
    switch (kind) {
        case Kind::horizon: s << "horizon"; break;
        case Kind::collision: s << "collision(" << first << "," << second << ")"; break;
        case Kind::boundary_proximity: s << "boundary_proximity(" << first << ")"; break;
    }
    s << " at t=" << time;
    return s.str();
}

std::vector<Vec2> VortexTrajectory::position_at(double t) const {
    if (t < 0.0 || t > end_time() * (1 + 1e-14) + 1e-300) throw DomainError("position_at: t outside the trajectory");
    if (t == 0.0 || times.size() < 2) return positions.front();
    if (method == Method::rk45) {
        auto it = std::lower_bound(dense.begin(), dense.end(), t, [](const ode::DenseStep& s, double tt) { return s.t1() < tt; });
        if (it == dense.end()) --it;
        return unpack(it->evaluate(std::min(t, it->t1())));
    }
    auto it = std::lower_bound(taylor.begin(), taylor.end(), t, [](const TaylorStep& s, double tt) { return s.t0 + s.h < tt; });
    if (it == taylor.end()) --it;
    return it->positions_at(t);
}

VortexSystem reversed(const VortexSystem& sys, const std::vector<Vec2>& positions) {
    VortexSystem r = sys;
    r.positions = positions;
    for (double& a : r.strengths) a = -a;
    for (double& c : r.circulations) c = -c;
    return r;
}

VortexTrajectory integrate(const VortexSystem& sys, double T, const IntegrateOptions& opts) {
    sys.validate();
    if (!(T >= 0.0)) throw ArgumentError("integrate: horizon must be non-negative");
    if (!(opts.tol > 0.0)) throw ArgumentError("integrate: tolerance must be positive");
    const Domain& dom = sys.green->domain();
    const double eps_coll = opts.collision_factor * dom.diameter();
    const double eps_bdry = opts.boundary_factor * dom.diameter();

    VortexTrajectory tr;
    tr.system = sys;
    tr.method = opts.method;
    tr.tol = opts.tol;
    auto record = [&](double t, const std::vector<Vec2>& z) {
        tr.times.push_back(t);
        tr.positions.push_back(z);
        tr.W.push_back(routh_energy(sys, z));
        tr.min_pair_distance.push_back(z.size() > 1 ? min_pair_distance(z) : std::numeric_limits<double>::infinity());
        tr.boundary_distance.push_back(boundary_distance(dom, z));
    };
    record(0.0, sys.positions);
    tr.termination.time = 0.0;
    if (T == 0.0) return tr;

    if (opts.method == Method::taylor) {
        TaylorOptions to;
        to.order = opts.taylor_order;
        to.tol = opts.tol;
        to.collision_factor = opts.collision_factor;
        to.boundary_factor = opts.boundary_factor;
        auto run = taylor_integrate(sys, T, to);
        for (const auto& st : run.steps) {
            tr.step_sizes.push_back(st.h);
            record(st.t0 + st.h, st.positions_at(st.t0 + st.h));
        }
        if (run.termination.kind != Termination::Kind::horizon) {
            tr.times.back() = run.termination.time;
            tr.positions.back() = run.final_positions;
        }
        tr.taylor = std::move(run.steps);
        tr.termination = run.termination;
        return tr;
    }

    const std::size_t n = sys.size();
    std::vector<double> y0(2 * n);
    for (std::size_t l = 0; l < n; ++l) {
        y0[2 * l] = sys.positions[l].x;
        y0[2 * l + 1] = sys.positions[l].y;
    }
    auto rhs = [&](double, std::span<const double> y, std::span<double> dy) {
        const auto v = stage_velocity(sys, unpack(y));
        for (std::size_t l = 0; l < n; ++l) {
            dy[2 * l] = v[l].x;
            dy[2 * l + 1] = v[l].y;
        }
    };
    std::vector<ode::Event> events;
    if (n > 1)
        events.push_back({"collision", [&](double, std::span<const double> y) { return min_pair_distance(unpack(y)) - eps_coll; }});
    events.push_back({"boundary", [&](double, std::span<const double> y) {
                          const auto z = unpack(y);
                          double m = std::numeric_limits<double>::infinity();
                          for (const Vec2& p : z) m = std::min(m, dom.distance_to_boundary(p));
                          return m - eps_bdry;
                      }});
    ode::Options o;
    o.rtol = o.atol = opts.tol;
    o.store_dense = true;
    auto observer = [&](const ode::DenseStep& st) {
        tr.step_sizes.push_back(std::abs(st.h));
        return true;
    };
    auto res = ode::dopri5(rhs, 0.0, y0, T, o, events, observer);
    tr.dense = std::move(res.dense);
    for (const auto& st : tr.dense) {
        const double t1 = res.event && &st == &tr.dense.back() ? res.t : st.t1();
        record(t1, unpack(st.evaluate(t1)));
    }
    tr.termination.time = res.t;
    if (res.event) {
        const auto z = unpack(res.y);
        if (res.event->name == "collision") {
            tr.termination.kind = Termination::Kind::collision;
            std::tie(tr.termination.first, tr.termination.second) = closest_pair(z);
        } else {
            tr.termination.kind = Termination::Kind::boundary_proximity;
            tr.termination.first = nearest_to_boundary(dom, z);
        }
    }
    return tr;
}

double hamiltonian_drift(const VortexTrajectory& traj) {
    double d = 0.0;
    for (double w : traj.W) d = std::max(d, std::abs(w - traj.W.front()));
    return d;
}

double TestFunction::value(double t, Vec2 x) const {
    const double q = 1.0 - norm2(x - center) / (radius * radius);
    if (q <= 0.0) return 0.0;
    return (1.0 - smootherstep(t / horizon)) * q * q * q * q;
}

double TestFunction::dt(double t, Vec2 x) const {
    const double q = 1.0 - norm2(x - center) / (radius * radius);
    if (q <= 0.0) return 0.0;
    return -smootherstep_derivative(t / horizon) / horizon * q * q * q * q;
}

Vec2 TestFunction::grad(double t, Vec2 x) const {
    const double q = 1.0 - norm2(x - center) / (radius * radius);
    if (q <= 0.0) return {};
    const double s = 1.0 - smootherstep(t / horizon);
    return (s * 4.0 * q * q * q * (-2.0 / (radius * radius))) * (x - center);
}

WeakResidual weak_residual(const VortexTrajectory& traj, const TestFunction& phi) {
    const auto& sys = traj.system;
    const auto& ev = *sys.green;
    const Domain& dom = ev.domain();
    if (!(phi.radius > 0.0) || !(phi.horizon > 0.0)) throw ArgumentError("weak_residual: radius and horizon must be positive");
    if (!dom.contains(phi.center) || dom.distance_to_boundary(phi.center) <= phi.radius * (1.0 + 1e-9))
        throw ArgumentError("weak_residual: test-function support touches the boundary");
    // boundary curves of general domains: check the support disk against every sample
    for (const auto& c : dom.curves())
        for (const Vec2& p : c.points())
            if (distance(p, phi.center) <= phi.radius) throw ArgumentError("weak_residual: test-function support touches the boundary");
    WeakResidual out;
    const std::size_t n = sys.size();
    if (n == 0) return out;
    if (phi.horizon > traj.end_time() * (1 + 1e-12))
        throw ArgumentError("weak_residual: test function must vanish before the trajectory ends");

    for (std::size_t l = 0; l < n; ++l) out.initial += sys.strengths[l] * phi.value(0.0, sys.positions[l]);

    // rk45 nodes: a fresh step from the accepted state, so node positions carry the step's
    // fifth-order error rather than the fourth-order dense interpolant's
    std::size_t step = 0;
    auto pos = [&](double t) {
        return traj.method == Method::rk45 && !traj.dense.empty() ? dp5_step(sys, traj.positions[step], t - traj.times[step])
                                                                  : traj.position_at(t);
    };
    // signed support indicator per vortex: the bump is only C³ across its edge, so panels split there
    auto inside = [&](double t) {
        const auto z = pos(t);
        std::vector<bool> in(n);
        for (std::size_t l = 0; l < n; ++l) in[l] = distance(z[l], phi.center) < phi.radius;
        return in;
    };
    auto integrand = [&](double t, double& lin, double& quad) {
        const auto z = pos(t);
        lin = 0.0;
        quad = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const Vec2 gl = phi.grad(t, z[l]);
            double L = phi.dt(t, z[l]);
            if (ev.d() > 0 && (gl.x != 0.0 || gl.y != 0.0)) L += dot(ev.X0(sys.circulations, z[l]), gl);
            lin += sys.strengths[l] * L;
            const double al = sys.strengths[l];
            if (gl.x != 0.0 || gl.y != 0.0) quad += al * al * 0.5 * dot(gl, perp(ev.grad_robin(z[l])));
            for (std::size_t m = 0; m < n; ++m) {
                if (m == l) continue;
                const Vec2 gm = phi.grad(t, z[m]);
                const double H = 0.5 * (dot(gl, perp(ev.grad_G(z[l], z[m]))) + dot(gm, perp(ev.grad_G(z[m], z[l]))));
                quad += al * sys.strengths[m] * H;
            }
        }
    };
    const auto& gl5 = quad::gauss_legendre(5);
    std::vector<double> grid{0.0};
    for (std::size_t k = 1; k < traj.times.size() && traj.times[k - 1] < phi.horizon; ++k)
        grid.push_back(std::min(traj.times[k], phi.horizon));
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double a = grid[k - 1], b = grid[k];
        if (b <= a) continue;
        step = k - 1;
        // panels resolve the bump on its own time scales (crossing time, horizon), not the step's
        const auto za = traj.position_at(a), zb = traj.position_at(b);
        double speed = 0.0;
        for (std::size_t l = 0; l < n; ++l) speed = std::max(speed, distance(za[l], zb[l]) / (b - a));
        const double scale = std::min(phi.horizon / 32.0, speed > 0.0 ? phi.radius / (16.0 * speed) : phi.horizon);
        const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / scale)));
        std::vector<double> edges{a};
        auto prev = inside(a);
        for (int p = 1; p <= panels; ++p) {
            const double t1 = p == panels ? b : a + p * (b - a) / panels;
            const auto cur = inside(t1);
            if (cur != prev) {
                double lo = edges.back(), hi = t1;
                for (int it = 0; it < 60 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (inside(mid) == prev ? lo : hi) = mid;
                }
                if (hi < t1) edges.push_back(hi);
            }
            edges.push_back(t1);
            prev = cur;
        }
        for (std::size_t p = 1; p < edges.size(); ++p) {
            const double pa = edges[p - 1], h = edges[p] - pa;
            if (h <= 0.0) continue;
            for (std::size_t i = 0; i < gl5.nodes.size(); ++i) {
                const double t = pa + 0.5 * h * (1.0 + gl5.nodes[i]);
                double lin, quad;
                integrand(t, lin, quad);
                out.linear += 0.5 * h * gl5.weights[i] * lin;
                out.quadratic += 0.5 * h * gl5.weights[i] * quad;
            }
        }
    }
    out.residual = std::abs(out.initial + out.linear + out.quadratic);
    return out;
}

}  // namespace yudovich
