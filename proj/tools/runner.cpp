#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <Eigen/Core>
#include <boost/version.hpp>

#include "yudovich/errors.hpp"
#include "yudovich/flow.hpp"
#include "yudovich/germ.hpp"
#include "yudovich/green.hpp"
#include "yudovich/modulus.hpp"
#include "yudovich/newton.hpp"
#include "yudovich/parallel.hpp"
#include "yudovich/taylor.hpp"
#include "yudovich/vortex.hpp"

#ifndef YUDOVICH_VERSION
#define YUDOVICH_VERSION "unknown"
#endif

namespace yudovich::cli {

namespace fs = std::filesystem;
using std::numbers::pi;

// ---------------------------------------------------------------- csv / hashing

Csv::Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

std::string Csv::number(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Csv& Csv::row(const std::vector<double>& values) {
    std::vector<std::string> f;
    f.reserve(values.size());
    for (double v : values) f.push_back(number(v));
    return row(f);
}

Csv& Csv::row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw std::logic_error("csv row width mismatch");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ += ',';
        const std::string& s = fields[i];
        if (s.find_first_of(",\"\r\n") != std::string::npos) {
            out_ += '"';
            for (char c : s) {
                if (c == '"') out_ += '"';
                out_ += c;
            }
            out_ += '"';
        } else {
            out_ += s;
        }
    }
    out_ += "\r\n";
    return *this;
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

namespace {

// ---------------------------------------------------------------- schema helpers

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw SchemaError(path + ": " + what);
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

Vec2 as_point(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
    return {as_number(j[0], path + "[0]"), as_number(j[1], path + "[1]")};
}

std::vector<Vec2> as_points(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected a list of points");
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_point(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

class Obj {
public:
    Obj(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object()) fail(path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    bool has(const std::string& k) const { return j_->contains(k); }

    const json& raw(const std::string& k) {
        used_.insert(k);
        if (!has(k)) fail(sub(k), "required");
        return j_->at(k);
    }
    double number(const std::string& k) { return as_number(raw(k), sub(k)); }
    double number(const std::string& k, double def) { return has(k) ? number(k) : def; }
    double positive(const std::string& k) {
        const double v = number(k);
        if (!(v > 0.0)) fail(sub(k), "must be positive");
        return v;
    }
    double positive(const std::string& k, double def) { return has(k) ? positive(k) : def; }
    int integer(const std::string& k, int def, int lo, int hi) {
        if (!has(k)) return def;
        const json& j = raw(k);
        if (!j.is_number_integer()) fail(sub(k), "expected an integer");
        const long long v = j.get<long long>();
        if (v < lo || v > hi) fail(sub(k), "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return static_cast<int>(v);
    }
    bool boolean(const std::string& k, bool def) {
        if (!has(k)) return def;
        const json& j = raw(k);
        if (!j.is_boolean()) fail(sub(k), "expected true/false");
        return j.get<bool>();
    }
    std::string string(const std::string& k) {
        const json& j = raw(k);
        if (!j.is_string()) fail(sub(k), "expected a string");
        return j.get<std::string>();
    }
    std::string choice(const std::string& k, const std::vector<std::string>& options, const std::string& def = "") {
        if (!has(k)) {
            if (def.empty()) fail(sub(k), "required");
            return def;
        }
        const std::string s = string(k);
        if (std::find(options.begin(), options.end(), s) == options.end()) {
            std::string all;
            for (const auto& o : options) all += (all.empty() ? "" : "|") + o;
            fail(sub(k), "expected one of " + all);
        }
        return s;
    }
    Vec2 point(const std::string& k) { return as_point(raw(k), sub(k)); }
    Vec2 point(const std::string& k, Vec2 def) { return has(k) ? point(k) : def; }
    std::vector<Vec2> points(const std::string& k) { return as_points(raw(k), sub(k)); }
    std::vector<double> numbers(const std::string& k) {
        const json& j = raw(k);
        if (!j.is_array()) fail(sub(k), "expected a list of numbers");
        std::vector<double> v;
        for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_number(j[i], sub(k) + "[" + std::to_string(i) + "]"));
        return v;
    }
    std::vector<double> numbers(const std::string& k, std::vector<double> def) { return has(k) ? numbers(k) : def; }
    Obj object(const std::string& k) { return Obj(raw(k), sub(k)); }
    std::vector<Obj> objects(const std::string& k) {
        const json& j = raw(k);
        if (!j.is_array()) fail(sub(k), "expected a list of objects");
        std::vector<Obj> out;
        for (std::size_t i = 0; i < j.size(); ++i) out.emplace_back(j[i], sub(k) + "[" + std::to_string(i) + "]");
        return out;
    }
    /// Rejects keys that were never read.
    void finish() const {
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!used_.count(it.key())) fail(sub(it.key()), "unknown key");
    }

private:
    std::string sub(const std::string& k) const { return path_ + "." + k; }
    const json* j_;
    std::string path_;
    std::set<std::string> used_;
};

// Library argument/domain errors raised while building inputs are schema errors.
template <class F>
auto parsing(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const DomainError& e) {
        fail(where, e.what());
    } catch (const ArgumentError& e) {
        fail(where, e.what());
    } catch (const SizeError& e) {
        fail(where, e.what());
    }
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

json matrix_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(r);
    }
    return rows;
}

Domain parse_domain(Obj o) {
    const std::string kind = o.choice("kind", {"disk", "annulus", "general"});
    const int samples = o.integer("samples", 512, 16, 1 << 16);
    Domain d = parsing(o.path(), [&] {
        if (kind == "disk") return Domain::disk(o.positive("R", 1.0), samples);
        if (kind == "annulus") {
            const double r0 = o.positive("r0"), R = o.positive("R", 1.0);
            if (!(r0 < R)) fail(o.path(), "need r0 < R");
            return Domain::annulus(r0, R, samples);
        }
        const json& curves = o.raw("curves");
        if (!curves.is_array() || curves.empty()) fail(o.path() + ".curves", "expected a non-empty list of curves");
        std::vector<std::vector<Vec2>> cs;
        for (std::size_t i = 0; i < curves.size(); ++i) {
            cs.push_back(as_points(curves[i], o.path() + ".curves[" + std::to_string(i) + "]"));
            if (cs.back().size() < 8) fail(o.path() + ".curves[" + std::to_string(i) + "]", "need at least 8 samples");
        }
        return Domain::general(std::move(cs));
    });
    o.finish();
    return d;
}

GreenOptions parse_green_options(Obj& top) {
    GreenOptions g;
    if (!top.has("green")) return g;
    Obj o = top.object("green");
    const std::string b = o.choice("backend", {"automatic", "analytic", "mfs"}, "automatic");
    g.backend = b == "analytic" ? GreenOptions::Backend::analytic
              : b == "mfs"      ? GreenOptions::Backend::mfs
                                : GreenOptions::Backend::automatic;
    g.annulus_images = o.integer("annulus_images", 0, 0, 1000);
    g.residual_tolerance = o.positive("residual_tolerance", g.residual_tolerance);
    o.finish();
    return g;
}

std::vector<double> parse_circulations(Obj& top, const Domain& d) {
    std::vector<double> c = top.numbers("circulations", std::vector<double>(static_cast<std::size_t>(d.holes()), 0.0));
    if (static_cast<int>(c.size()) != d.holes())
        fail(top.path() + ".circulations", "need one circulation per hole (" + std::to_string(d.holes()) + ")");
    return c;
}

Germ parse_germ(Obj o) {
    const std::string kind = o.choice("kind", {"theta_m", "power", "tabulated"});
    Germ g = parsing(o.path(), [&] {
        if (kind == "theta_m") {
            const int m = o.integer("m", 1, 0, 6);
            return o.has("p0") ? Germ::theta_m(m, o.positive("p0")) : Germ::theta_m(m);
        }
        if (kind == "power") {
            const double e = o.number("exponent");
            return Germ::power(e, o.positive("p0", 1.0));
        }
        std::vector<std::pair<double, double>> s;
        for (Vec2 p : o.points("samples")) s.emplace_back(p.x, p.y);
        return Germ::tabulated(std::move(s));
    });
    o.finish();
    return g;
}

Modulus parse_modulus(Obj o) {
    const std::string kind = o.choice("kind", {"h_log", "power", "from_germ", "log_inverse"});
    Modulus m = parsing(o.path(), [&] {
        if (kind == "h_log") return Modulus::h_log(o.positive("C", 1.0), o.positive("a", std::exp(-1.0)));
        if (kind == "power") return Modulus::power(o.positive("r"), o.positive("a", 1.0));
        if (kind == "log_inverse") return Modulus::log_inverse(o.positive("q"), o.positive("a", 0.25));
        const Germ g = parse_germ(o.object("germ"));
        return Modulus::from_germ(g, o.positive("C", 1.0), o.positive("a", 0.25));
    });
    o.finish();
    return m;
}

struct Common {
    std::string name;
    std::uint64_t seed = 20240601;
    std::optional<double> tol;
};

Common parse_common(Obj& top, const std::string& subcommand, const Overrides& ov) {
    Common c;
    c.name = top.string("name");
    const std::string kind = top.string("kind");
    if (kind != subcommand) fail(top.path() + ".kind", "scenario kind '" + kind + "' does not match subcommand '" + subcommand + "'");
    if (top.has("description")) top.string("description");
    if (top.has("seed")) {
        const json& s = top.raw("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) fail(top.path() + ".seed", "expected a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (top.has("tol")) c.tol = top.positive("tol");
    if (ov.seed) c.seed = *ov.seed;
    if (ov.tol) {
        if (!(*ov.tol > 0.0)) fail("--tol", "must be positive");
        c.tol = *ov.tol;
    }
    return c;
}

// ---------------------------------------------------------------- vortices / jets

VortexSystem parse_vortices(Obj& top, const Domain& dom, std::shared_ptr<const GreenEvaluator> ev) {
    VortexSystem sys;
    for (Obj v : top.objects("vortices")) {
        sys.positions.push_back(v.point("position"));
        sys.strengths.push_back(v.number("strength"));
        v.finish();
    }
    if (sys.positions.empty()) fail(top.path() + ".vortices", "need at least one vortex");
    sys.circulations = parse_circulations(top, dom);
    sys.green = std::move(ev);
    parsing(top.path() + ".vortices", [&] {
        sys.validate();
        return 0;
    });
    return sys;
}

json termination_json(const Termination& t) {
    static const char* kinds[] = {"horizon", "collision", "boundary_proximity"};
    json j{{"kind", kinds[static_cast<int>(t.kind)]}, {"time", t.time}, {"description", t.describe()}};
    if (t.first >= 0) j["first"] = t.first;
    if (t.second >= 0) j["second"] = t.second;
    return j;
}

// First return of the polar angle about c to its initial value (±2π), by bisection on the trajectory.
std::optional<double> revolution_period(const VortexTrajectory& tr, Vec2 c) {
    const double end = tr.end_time();
    if (end <= 0.0) return std::nullopt;
    auto angle = [&](double t) {
        const Vec2 z = tr.position_at(t)[0] - c;
        return std::atan2(z.y, z.x);
    };
    const int n = 4000;
    const double phi0 = angle(0.0);
    double prev_t = 0.0, prev = phi0;
    for (int i = 1; i <= n; ++i) {
        const double t = end * i / n;
        const double cur = prev + std::remainder(angle(t) - prev, 2 * pi);
        if (std::abs(cur - phi0) >= 2 * pi) {
            const double target = phi0 + (cur > phi0 ? 2 * pi : -2 * pi);
            double a = prev_t, b = t, pa = prev;
            for (int it = 0; it < 80; ++it) {
                const double m = 0.5 * (a + b);
                const double pm = pa + std::remainder(angle(m) - pa, 2 * pi);
                if ((pm - target) * (pa - target) > 0.0) {
                    a = m;
                    pa = pm;
                } else {
                    b = m;
                }
            }
            return 0.5 * (a + b);
        }
        prev_t = t;
        prev = cur;
    }
    return std::nullopt;
}

Outcome run_vortices(Obj& top, const Common& c) {
    Outcome out;
    const Domain dom = parse_domain(top.object("domain"));
    const GreenOptions gopt = parse_green_options(top);
    const double T = top.positive("T");
    IntegrateOptions io;
    io.method = top.choice("method", {"rk45", "taylor"}, "rk45") == "taylor" ? Method::taylor : Method::rk45;
    io.tol = c.tol.value_or(1e-10);
    io.taylor_order = top.integer("taylor_order", 20, 4, 60);
    io.collision_factor = top.positive("collision_factor", io.collision_factor);
    io.boundary_factor = top.positive("boundary_factor", io.boundary_factor);
    const int samples = top.integer("samples", 200, 1, 1000000);
    std::vector<TestFunction> tests;
    if (top.has("test_functions"))
        for (Obj t : top.objects("test_functions")) {
            TestFunction f;
            f.center = t.point("center");
            f.radius = t.positive("radius");
            f.horizon = t.positive("horizon");
            if (f.horizon > T) fail(t.path() + ".horizon", "exceeds T");
            t.finish();
            tests.push_back(f);
        }
    const auto ev = build_green(dom, gopt);
    const VortexSystem sys = parse_vortices(top, dom, ev);
    top.finish();

    const VortexTrajectory tr = integrate(sys, T, io);
    const std::size_t n = sys.size();
    Csv traj({"t", "vortex", "x", "y"});
    for (int i = 0; i <= samples; ++i) {
        const double t = tr.end_time() * i / samples;
        const auto z = tr.position_at(t);
        for (std::size_t l = 0; l < n; ++l) traj.row({t, double(l), z[l].x, z[l].y});
    }
    Csv steps({"t", "W", "min_pair_distance", "boundary_distance"});
    for (std::size_t k = 0; k < tr.times.size(); ++k)
        steps.row({tr.times[k], tr.W[k], n > 1 ? tr.min_pair_distance[k] : NAN, tr.boundary_distance[k]});
    out.files.push_back({"trajectory.csv", traj.str()});
    out.files.push_back({"steps.csv", steps.str()});

    json& d = out.diagnostics;
    d["backend"] = ev->backend_name();
    d["method"] = io.method == Method::taylor ? "taylor" : "rk45";
    d["tol"] = io.tol;
    d["accepted_steps"] = tr.step_sizes.size();
    d["end_time"] = tr.end_time();
    d["hamiltonian_drift"] = hamiltonian_drift(tr);
    d["termination"] = termination_json(tr.termination);
    if (n == 1 && dom.kind() != Domain::Kind::general) {
        double spread = 0.0;
        const double rho0 = norm(sys.positions[0]);
        for (int i = 0; i <= samples; ++i) spread = std::max(spread, std::abs(norm(tr.position_at(tr.end_time() * i / samples)[0]) - rho0));
        d["orbit_radius_spread"] = spread;
        if (const auto p = revolution_period(tr, {0.0, 0.0})) d["period"] = *p;
    }
    if (!tests.empty()) {
        json wr = json::array();
        for (const auto& f : tests) {
            if (f.horizon > tr.end_time()) {
                wr.push_back({{"skipped", "trajectory ended before the test-function horizon"}});
                continue;
            }
            const WeakResidual r = weak_residual(tr, f);
            wr.push_back({{"center", vec_json(f.center)}, {"radius", f.radius}, {"horizon", f.horizon},
                          {"initial", r.initial}, {"linear", r.linear}, {"quadratic", r.quadratic}, {"residual", r.residual}});
        }
        d["weak_residuals"] = wr;
    }
    if (tr.termination.kind != Termination::Kind::horizon) {
        out.exit = early_termination;
        out.status = "early_termination";
    }
    return out;
}

Outcome run_jets(Obj& top, const Common& c) {
    Outcome out;
    const Domain dom = parse_domain(top.object("domain"));
    const GreenOptions gopt = parse_green_options(top);
    const double T = top.positive("T");
    TaylorOptions to;
    to.order = top.integer("order", 20, 4, 60);
    to.tol = c.tol.value_or(1e-12);
    to.collision_factor = top.positive("collision_factor", to.collision_factor);
    to.boundary_factor = top.positive("boundary_factor", to.boundary_factor);
    const int k_min = top.integer("k_min", 4, 1, 50);
    const int coeff_order = top.integer("coefficient_order", to.order, 4, 60);
    const std::optional<double> compare = top.has("compare_rk45_at") ? std::optional(top.positive("compare_rk45_at")) : std::nullopt;
    if (compare && *compare > T) fail(top.path() + ".compare_rk45_at", "exceeds T");
    const auto ev = build_green(dom, gopt);
    if (!ev->kernel()) fail(top.path() + ".domain", "Taylor jets need a disk or annulus domain");
    const VortexSystem sys = parse_vortices(top, dom, ev);
    top.finish();

    const auto coeffs = taylor_coefficients(sys, sys.positions, coeff_order);
    Csv cc({"k", "vortex", "coordinate", "a_k"});
    for (int k = 0; k <= coeff_order; ++k)
        for (std::size_t l = 0; l < sys.size(); ++l)
            for (int xy = 0; xy < 2; ++xy)
                cc.row(std::vector<std::string>{std::to_string(k), std::to_string(l), xy ? "y" : "x",
                                                Csv::number(coeffs[2 * l + xy][k])});
    out.files.push_back({"coefficients.csv", cc.str()});

    const TaylorRun run = taylor_integrate(sys, T, to);
    Csv st({"t0", "h"});
    for (const auto& s : run.steps) st.row({s.t0, s.h});
    out.files.push_back({"taylor_steps.csv", st.str()});

    json& d = out.diagnostics;
    const AnalyticityEstimate est = analyticity_estimate(coeffs, k_min);
    d["analyticity"] = {{"s_hat", est.s_hat}, {"rho_hat", est.rho_hat}, {"sigma", est.sigma},
                        {"log_L", est.log_L}, {"rms", est.rms}, {"points", est.points}};
    d["steps"] = run.steps.size();
    d["end_time"] = run.end_time;
    d["termination"] = termination_json(run.termination);
    json fin = json::array();
    for (Vec2 z : run.final_positions) fin.push_back(vec_json(z));
    d["final_positions"] = fin;
    if (compare && run.end_time >= *compare) {
        IntegrateOptions io;
        io.tol = 1e-12;
        const auto rk = integrate(sys, *compare, io);
        VortexTrajectory jt;
        jt.method = Method::taylor;
        jt.taylor = run.steps;
        jt.times = {0.0, run.end_time};
        jt.positions = {sys.positions, run.final_positions};
        const auto a = rk.position_at(*compare);
        const auto b = jt.position_at(*compare);
        double diff = 0.0;
        for (std::size_t l = 0; l < a.size(); ++l) diff = std::max(diff, distance(a[l], b[l]));
        d["rk45_difference"] = {{"t", *compare}, {"max_distance", diff}};
    }
    if (run.termination.kind != Termination::Kind::horizon) {
        out.exit = early_termination;
        out.status = "early_termination";
    }
    return out;
}

// ---------------------------------------------------------------- flow

VorticityField parse_field(Obj o, const Domain& dom, std::vector<double> circ) {
    const std::string kind = o.choice("kind", {"zero", "radial_patch", "patches", "radial_profile", "loglog"});
    VorticityField f = parsing(o.path(), [&] {
        if (kind == "zero") return VorticityField::zero(circ);
        if (kind == "radial_patch")
            return VorticityField::radial_patch(o.point("center", {}), o.positive("radius"), o.number("value"), circ);
        if (kind == "patches") {
            std::vector<std::vector<Vec2>> polys;
            std::vector<double> values;
            for (Obj p : o.objects("polygons")) {
                polys.push_back(p.points("vertices"));
                values.push_back(p.number("value"));
                p.finish();
            }
            return VorticityField::general_patch(std::move(polys), std::move(values), circ);
        }
        if (kind == "radial_profile") {
            std::vector<std::pair<double, double>> table;
            for (Vec2 p : o.points("table")) table.emplace_back(p.x, p.y);
            return VorticityField::radial_profile(o.point("center", {}), std::move(table), circ);
        }
        return VorticityField::loglog(o.point("x0"), o.number("scale", 1.0), o.positive("length", dom.diameter()), circ);
    });
    o.finish();
    parsing(o.path(), [&] {
        f.validate(dom);
        return 0;
    });
    return f;
}

std::vector<Vec2> grid_points(const Domain& dom, double spacing) {
    const auto [lo, hi] = dom.bounds();
    std::vector<Vec2> pts;
    for (double y = lo.y + 0.5 * spacing; y < hi.y; y += spacing)
        for (double x = lo.x + 0.5 * spacing; x < hi.x; x += spacing)
            if (dom.contains({x, y}) && dom.distance_to_boundary({x, y}) > 1e-3 * dom.diameter()) pts.push_back({x, y});
    return pts;
}

double polygon_area(const std::vector<Vec2>& p) {
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
    return 0.5 * a;
}

Outcome run_flow(Obj& top, const Common& c) {
    Outcome out;
    const Domain dom = parse_domain(top.object("domain"));
    const GreenOptions gopt = parse_green_options(top);
    const std::vector<double> circ = parse_circulations(top, dom);
    const VorticityField field = parse_field(top.object("field"), dom, circ);
    const double T = top.positive("T");
    FlowOptions fo;
    fo.tol = c.tol.value_or(1e-8);
    fo.outputs = top.integer("outputs", 10, 1, 10000);
    fo.particle_spacing = top.positive("particle_spacing", fo.particle_spacing);
    fo.reverse = top.boolean("reverse", false);

    std::vector<Vec2> tracers;
    std::size_t loop_begin = 0, loop_count = 0;
    std::vector<std::pair<int, int>> pairs;
    {
        Obj tr = top.object("tracers");
        if (tr.has("points")) {
            for (Vec2 p : tr.points("points")) tracers.push_back(p);
        }
        if (tr.has("grid")) {
            Obj g = tr.object("grid");
            const auto pts = grid_points(dom, g.positive("spacing"));
            tracers.insert(tracers.end(), pts.begin(), pts.end());
            g.finish();
        }
        if (tr.has("loop")) {
            Obj l = tr.object("loop");
            const Vec2 cen = l.point("center");
            const double r = l.positive("radius");
            const int cnt = l.integer("count", 128, 8, 100000);
            loop_begin = tracers.size();
            loop_count = static_cast<std::size_t>(cnt);
            for (int k = 0; k < cnt; ++k)
                tracers.push_back(cen + r * Vec2{std::cos(2 * pi * k / cnt), std::sin(2 * pi * k / cnt)});
            l.finish();
        }
        if (tr.has("pairs")) {
            Obj p = tr.object("pairs");
            const int base = p.integer("base", 512, 1, 1000000);
            const int kmin = p.integer("k_min", 2, 0, 60);
            const int kmax = p.integer("k_max", 20, kmin, 60);
            p.finish();
            const PairSample ps = sample_pairs(dom, base, c.seed, kmin, kmax);
            const int off = static_cast<int>(tracers.size());
            for (auto [i, j] : ps.pairs) pairs.emplace_back(i + off, j + off);
            tracers.insert(tracers.end(), ps.points.begin(), ps.points.end());
        }
        tr.finish();
    }
    if (tracers.empty()) fail(top.path() + ".tracers", "no tracers");
    for (std::size_t i = 0; i < tracers.size(); ++i)
        if (!dom.contains(tracers[i])) fail(top.path() + ".tracers", "tracer " + std::to_string(i) + " lies outside the domain");

    std::optional<Modulus> mu;
    double inflation = 1.1;
    bool holder = false;
    std::vector<double> lp_p;
    std::optional<Germ> lp_germ;
    std::vector<Vec2> probes;
    if (top.has("checks")) {
        Obj ch = top.object("checks");
        if (ch.has("modulus")) {
            Obj m = ch.object("modulus");
            mu = parsing(m.path(), [&] { return Modulus::h_log(m.positive("C", 1.0), m.positive("a", std::exp(-1.0))); });
            inflation = m.positive("inflation", 1.1);
            m.finish();
            if (pairs.empty()) fail(m.path(), "needs tracers.pairs");
        }
        holder = ch.boolean("holder", false);
        if (holder && pairs.empty()) fail(ch.path() + ".holder", "needs tracers.pairs");
        if (ch.has("lp")) {
            Obj l = ch.object("lp");
            lp_p = l.numbers("p");
            for (double p : lp_p)
                if (!(p >= 1.0)) fail(l.path() + ".p", "exponents must be ≥ 1");
            if (l.has("germ")) lp_germ = parse_germ(l.object("germ"));
            l.finish();
        }
        if (ch.has("velocity_probes")) probes = ch.points("velocity_probes");
        ch.finish();
    }
    top.finish();

    const auto ev = build_green(dom, gopt);
    if (!probes.empty()) {
        const auto u = biot_savart_velocity(*ev, field, probes);
        Csv vc({"x", "y", "u1", "u2"});
        for (std::size_t i = 0; i < probes.size(); ++i) vc.row({probes[i].x, probes[i].y, u[i].x, u[i].y});
        out.files.push_back({"velocity.csv", vc.str()});
    }
    const FlowMapRun run = flow_map(ev, field, tracers, T, fo);
    Csv fc({"t", "tracer", "x", "y"});
    for (std::size_t k = 0; k < run.times.size(); ++k)
        for (std::size_t j = 0; j < tracers.size(); ++j)
            fc.row({run.times[k], double(j), run.positions[k][j].x, run.positions[k][j].y});
    out.files.push_back({"flow.csv", fc.str()});

    json& d = out.diagnostics;
    d["backend"] = ev->backend_name();
    d["frozen"] = run.frozen;
    d["tracers"] = tracers.size();
    d["pairs"] = pairs.size();
    d["accepted_steps"] = run.step_sizes.size();
    if (!run.frozen) d["particles"] = run.field.positions.size();
    if (loop_count) {
        const std::vector<Vec2> l0(tracers.begin() + loop_begin, tracers.begin() + loop_begin + loop_count);
        const double A0 = polygon_area(l0);
        double drift = 0.0;
        for (const auto& z : run.positions) {
            const std::vector<Vec2> l(z.begin() + loop_begin, z.begin() + loop_begin + loop_count);
            drift = std::max(drift, std::abs(polygon_area(l) - A0));
        }
        d["loop_area"] = {{"initial", A0}, {"max_drift", drift}};
    }
    if (mu) {
        const double kappa = velocity_modulus_estimate(run, pairs, *mu);
        const ViolationReport rep = modulus_violation_check(run, *mu, inflation * kappa, pairs);
        d["modulus"] = {{"mu", mu->describe()}, {"kappa_hat", kappa}, {"kappa_used", inflation * kappa},
                        {"checked", rep.checked}, {"violations", rep.violations}, {"skipped", rep.skipped},
                        {"fraction", rep.fraction}, {"per_time", rep.per_time}};
    }
    if (holder) {
        Csv hc({"t", "r_hat", "width", "points", "scales"});
        json arr = json::array();
        for (std::size_t k = 0; k < run.times.size(); ++k) {
            const HolderFit h = holder_exponent_estimate(run, k, pairs);
            hc.row({run.times[k], h.r_hat, h.width, double(h.points), double(h.scales)});
            arr.push_back({{"t", run.times[k]}, {"r_hat", h.r_hat}, {"width", h.width}});
        }
        out.files.push_back({"holder.csv", hc.str()});
        d["holder"] = arr;
    }
    if (!lp_p.empty()) {
        Csv lc({"t", "p", "norm"});
        double spread = 0.0;
        for (double p : lp_p) {
            const double n0 = lp_norm(run.field_at(0), dom, p);
            for (std::size_t k = 0; k < run.times.size(); ++k) {
                const double nk = k == 0 ? n0 : lp_norm(run.field_at(k), dom, p);
                lc.row({run.times[k], p, nk});
                spread = std::max(spread, std::abs(nk - n0) / std::max(n0, 1e-300));
            }
        }
        out.files.push_back({"lp.csv", lc.str()});
        d["lp_relative_spread"] = spread;
        if (lp_germ) {
            const auto ratios = lp_membership_ratio(field, dom, *lp_germ, lp_p);
            Csv rc({"p", "ratio"});
            for (std::size_t i = 0; i < lp_p.size(); ++i) rc.row({lp_p[i], ratios[i]});
            out.files.push_back({"lp_ratio.csv", rc.str()});
            const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
            d["lp_ratio_variation"] = *hi / *lo;
        }
    }
    return out;
}

// ---------------------------------------------------------------- germ / modulus

Outcome run_germ(Obj& top, const Common&) {
    Outcome out;
    const Germ g = parse_germ(top.object("germ"));
    std::vector<double> checkpoints = top.numbers("log_checkpoints", {10, 20, 40, 80, 160, 320});
    for (std::size_t i = 0; i < checkpoints.size(); ++i)
        if (!(checkpoints[i] > 0.0) || (i && checkpoints[i] <= checkpoints[i - 1]))
            fail(top.path() + ".log_checkpoints", "must be positive and increasing");
    const std::vector<double> t_theta_at = top.numbers("t_theta_log_a", {});
    struct Ident {
        int m;
        double lp1, lp2;
    };
    std::vector<Ident> ids;
    if (top.has("identities"))
        for (Obj o : top.objects("identities")) {
            ids.push_back({o.integer("m", 1, 0, 6), o.number("log_p1"), o.number("log_p2")});
            if (!(ids.back().lp2 > ids.back().lp1)) fail(o.path(), "need log_p2 > log_p1");
            o.finish();
        }
    top.finish();

    const auto parts = admissibility_partial_integrals_log(g, checkpoints);
    Csv ac({"log_A", "integral", "error", "converged"});
    for (const auto& p : parts) ac.row({p.log_checkpoint, p.value, p.error, p.converged ? 1.0 : 0.0});
    out.files.push_back({"admissibility.csv", ac.str()});
    if (!t_theta_at.empty()) {
        Csv tc({"log_a", "T_theta", "epsilon", "at_boundary"});
        for (double la : t_theta_at) {
            const ThetaInfimum r = parsing(top.path() + ".t_theta_log_a", [&] { return t_theta_log(g, la); });
            tc.row({la, r.value, r.epsilon, r.at_boundary ? 1.0 : 0.0});
        }
        out.files.push_back({"t_theta.csv", tc.str()});
    }
    json arr = json::array();
    for (const auto& id : ids) {
        const IdentityCheck r = parsing(top.path() + ".identities", [&] { return iterated_log_identity_check_log(id.m, id.lp1, id.lp2); });
        arr.push_back({{"m", id.m}, {"log_p1", id.lp1}, {"log_p2", id.lp2}, {"quadrature", r.quadrature},
                       {"closed_form", r.closed_form}, {"difference", r.difference}});
    }
    out.diagnostics["identities"] = arr;
    out.diagnostics["final_integral"] = parts.empty() ? 0.0 : parts.back().value;
    return out;
}

Outcome run_modulus(Obj& top, const Common&) {
    Outcome out;
    const Modulus mu = parse_modulus(top.object("modulus"));
    json& d = out.diagnostics;
    d["modulus"] = mu.describe();
    std::optional<std::function<void()>> gamma_job;
    if (top.has("gamma")) {
        Obj g = top.object("gamma");
        const double kappa = g.positive("kappa", 1.0);
        const double T = g.positive("T");
        const std::vector<double> times = g.numbers("times", {0.25 * T, 0.5 * T, T});
        for (double t : times)
            if (t < 0.0 || t > T) fail(g.path() + ".times", "times must lie in [0, T]");
        const int kmin = g.integer("k_min", 1, 0, 60);
        const int kmax = g.integer("k_max", 40, kmin, 1000);
        g.finish();
        gamma_job = [&out, &d, mu, kappa, T, times, kmin, kmax] {
            const GammaFamily fam(mu, kappa, T);
            const bool closed = mu.kind() == Modulus::Kind::h_log;
            // h_log(C) = 2C·h·log(1/h): Γ_t(h) = h^{exp(−2Cκt)}
            const double h2 = 0.5 * mu.a();
            const double C = closed ? mu(h2) / (2.0 * h2 * std::log(1.0 / h2)) : 0.0;
            Csv gc({"t", "h", "gamma", "saturated", "closed_form"});
            double worst = 0.0;
            for (double t : times)
                for (int k = kmin; k <= kmax; ++k) {
                    const double h = std::ldexp(mu.a(), -k);
                    const OsgoodResult r = fam.evaluate_unrestricted(t, h);
                    const double cf = closed ? std::pow(h, std::exp(-2.0 * C * kappa * t)) : NAN;
                    if (closed && !r.saturated) worst = std::max(worst, std::abs(r.value - cf) / cf);
                    gc.row({t, h, r.value, r.saturated ? 1.0 : 0.0, cf});
                }
            out.files.push_back({"gamma.csv", gc.str()});
            d["gamma"] = {{"kappa", kappa}, {"T", T}, {"a_tilde", fam.a_tilde()}};
            if (closed) d["gamma"]["max_relative_error_vs_closed_form"] = worst;
        };
    }
    std::optional<double> dini_hmin;
    if (top.has("dini")) {
        Obj o = top.object("dini");
        dini_hmin = o.positive("h_min", 1e-12);
        o.finish();
    }
    std::optional<std::pair<int, int>> ups;
    if (top.has("upsilon")) {
        Obj o = top.object("upsilon");
        ups = std::pair{o.integer("s_max", 6, 1, 8), o.integer("m_max", 12, 0, 16)};
        o.finish();
    }
    top.finish();

    if (gamma_job) (*gamma_job)();
    if (dini_hmin) {
        const DiniResult r = dini_integral(mu, *dini_hmin);
        d["dini"] = {{"h_min", *dini_hmin}, {"partial", r.partial}, {"tail_ratio", r.tail_ratio},
                     {"scaled_last", r.scaled_last}, {"extrapolated", std::isfinite(r.extrapolated) ? json(r.extrapolated) : json("inf")}};
    }
    if (ups) {
        Csv uc({"s", "m", "exact", "value", "bound", "terms"});
        bool holds = true;
        for (int s = 1; s <= ups->first; ++s)
            for (int m = 0; m <= ups->second; ++m) {
                const UpsilonSum u = upsilon_sum(s, m);
                holds = holds && u.value <= u.bound;
                uc.row(std::vector<std::string>{std::to_string(s), std::to_string(m), u.exact, Csv::number(u.value),
                                                Csv::number(u.bound), std::to_string(u.terms)});
            }
        out.files.push_back({"upsilon.csv", uc.str()});
        d["upsilon_bound_holds"] = holds;
    }
    return out;
}

// ---------------------------------------------------------------- green

std::vector<Vec2> random_interior(const Domain& dom, int n, std::mt19937_64& rng, double margin) {
    const auto [lo, hi] = dom.bounds();
    std::uniform_real_distribution<double> ux(lo.x, hi.x), uy(lo.y, hi.y);
    std::vector<Vec2> pts;
    while (static_cast<int>(pts.size()) < n) {
        const Vec2 p{ux(rng), uy(rng)};
        if (dom.contains(p) && dom.distance_to_boundary(p) > margin) pts.push_back(p);
    }
    return pts;
}

Outcome run_green(Obj& top, const Common& c) {
    Outcome out;
    const Domain dom = parse_domain(top.object("domain"));
    const GreenOptions gopt = parse_green_options(top);
    const int npairs = top.integer("pairs", 100, 1, 1000000);
    const bool compare = top.boolean("compare_mfs", false);
    if (compare && dom.kind() == Domain::Kind::general) fail(top.path() + ".compare_mfs", "needs a disk or annulus domain");
    top.finish();

    const auto ev = build_green(dom, gopt);
    std::mt19937_64 rng(c.seed);
    const auto xs = random_interior(dom, npairs, rng, 0.02 * dom.diameter());
    const auto ys = random_interior(dom, npairs, rng, 0.02 * dom.diameter());
    std::shared_ptr<const GreenEvaluator> mfs;
    if (compare) {
        GreenOptions mo = gopt;
        mo.backend = GreenOptions::Backend::mfs;
        mfs = build_green(dom, mo);
    }
    Csv gc(compare ? std::vector<std::string>{"x1", "x2", "y1", "y2", "G_xy", "G_yx", "G_mfs"}
                   : std::vector<std::string>{"x1", "x2", "y1", "y2", "G_xy", "G_yx"});
    double asym = 0.0, mdiff = 0.0;
    for (int i = 0; i < npairs; ++i) {
        const double a = ev->G(xs[i], ys[i]), b = ev->G(ys[i], xs[i]);
        asym = std::max(asym, std::abs(a - b));
        std::vector<double> row{xs[i].x, xs[i].y, ys[i].x, ys[i].y, a, b};
        if (mfs) {
            const double m = mfs->G(xs[i], ys[i]);
            mdiff = std::max(mdiff, std::abs(m - a));
            row.push_back(m);
        }
        gc.row(row);
    }
    out.files.push_back({"green_pairs.csv", gc.str()});
    json& d = out.diagnostics;
    d["backend"] = ev->backend_name();
    d["boundary_residual"] = ev->boundary_residual();
    d["max_symmetry_defect"] = asym;
    if (mfs) {
        d["mfs_boundary_residual"] = mfs->boundary_residual();
        d["max_mfs_difference"] = mdiff;
    }
    if (ev->d() > 0) {
        d["period_matrix"] = matrix_json(ev->period_matrix().M);
        d["period_matrix_inverse"] = matrix_json(ev->period_matrix().P);
        d["period_matrix_condition"] = ev->period_matrix().condition;
        Eigen::MatrixXd circ(ev->d(), ev->d());
        for (int i = 1; i <= ev->d(); ++i)
            for (int j = 1; j <= ev->d(); ++j)
                circ(i - 1, j - 1) = circulation([&](Vec2 x) { return ev->harmonic_field(j, x); }, i, *ev);
        d["harmonic_basis_circulations"] = matrix_json(circ);
    }
    return out;
}

// ---------------------------------------------------------------- potential

Density parse_density(Obj o) {
    const std::string kind = o.choice("kind", {"constant", "linear", "radial_log_power"});
    const Vec2 c = o.point("center", {});
    const double R = o.positive("radius", 1.0);
    Density d;
    if (kind == "constant") {
        d = Density::constant(o.number("value", 1.0), c, R);
    } else if (kind == "linear") {
        d = Density::linear(o.point("gradient"), o.number("offset", 0.0), c, R);
    } else {
        // 1/log(4R/ρ)^q: Dini for q > 1, never Hölder
        const double q = o.positive("q");
        d = Density::radial([q, R](double r) { return r > 0.0 ? std::pow(std::log(4.0 * R / r), -q) : 0.0; },
                            parsing(o.path(), [&] { return Modulus::log_inverse(q, 0.25); }), c, R);
    }
    o.finish();
    return d;
}

Outcome run_potential(Obj& top, const Common& c) {
    Outcome out;
    const Density f = parse_density(top.object("density"));
    std::vector<Vec2> pts;
    {
        Obj s = top.object("samples");
        if (s.has("points")) pts = s.points("points");
        if (s.has("count")) {
            const int n = s.integer("count", 20, 1, 100000);
            const double rmax = s.positive("max_radius", 0.9);
            if (rmax >= 1.0) fail(s.path() + ".max_radius", "must be < 1 (fraction of the support radius)");
            std::mt19937_64 rng(c.seed);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (int i = 0; i < n; ++i) {
                const double r = rmax * f.radius * std::sqrt(u(rng)), t = 2 * pi * u(rng);
                pts.push_back(f.center + r * Vec2{std::cos(t), std::sin(t)});
            }
        }
        s.finish();
    }
    if (pts.empty()) fail(top.path() + ".samples", "no sample points");
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!(distance(pts[i], f.center) < f.radius)) fail(top.path() + ".samples", "point " + std::to_string(i) + " is not interior to the support");
    const std::vector<double> eps = top.numbers("mollified_eps", {});
    for (double e : eps)
        if (!(e > 0.0)) fail(top.path() + ".mollified_eps", "must be positive");
    NewtonOptions no;
    if (c.tol) no.tol = *c.tol;
    top.finish();

    const LaplacianReport rep = laplacian_check(f, pts, no);
    std::vector<double> psi(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { psi[i] = newton_potential(f, pts[i], no); });
    Csv pc({"x1", "x2", "f", "psi", "u11", "u12", "u21", "u22", "trace_error", "budget"});
    double asym = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& u = rep.values[i];
        asym = std::max(asym, u.asymmetry());
        pc.row({pts[i].x, pts[i].y, f.f(pts[i]), psi[i], u.u[0][0], u.u[0][1], u.u[1][0], u.u[1][1], rep.errors[i], u.budget});
    }
    out.files.push_back({"potential.csv", pc.str()});
    json& d = out.diagnostics;
    d["density"] = f.name;
    d["samples"] = pts.size();
    d["max_trace_error"] = rep.max_error;
    d["max_asymmetry"] = asym;
    if (!eps.empty()) {
        Csv mc({"eps", "x1", "x2", "max_error", "bound"});
        json arr = json::array();
        for (double e : eps) {
            std::vector<double> err(pts.size());
            parallel_for(pts.size(), [&](std::size_t i) {
                const auto m = mollified_second_derivatives(f, pts[i], e, no);
                double w = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) w = std::max(w, std::abs(m.u[a][b] - rep.values[i].u[a][b]));
                err[i] = w;
            });
            const double bound = f.mu ? mollifier_error_bound(f, e) : NAN;
            double worst = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                mc.row({e, pts[i].x, pts[i].y, err[i], bound});
                worst = std::max(worst, err[i]);
            }
            arr.push_back({{"eps", e}, {"max_error", worst}, {"bound", std::isnan(bound) ? json(nullptr) : json(bound)}});
        }
        out.files.push_back({"mollified.csv", mc.str()});
        d["mollified"] = arr;
    }
    return out;
}

}  // namespace

Outcome run_pipeline(const std::string& subcommand, const json& scenario, const Overrides& ov) {
    Obj top(scenario, "$");
    const Common c = parse_common(top, subcommand, ov);
    Outcome out;
    if (subcommand == "vortices") out = run_vortices(top, c);
    else if (subcommand == "jets") out = run_jets(top, c);
    else if (subcommand == "flow") out = run_flow(top, c);
    else if (subcommand == "germ") out = run_germ(top, c);
    else if (subcommand == "modulus") out = run_modulus(top, c);
    else if (subcommand == "green") out = run_green(top, c);
    else if (subcommand == "potential") out = run_potential(top, c);
    else throw SchemaError("unknown subcommand '" + subcommand + "'");
    out.diagnostics["seed"] = c.seed;
    return out;
}

int run_scenario(const std::string& subcommand, const std::string& path, const std::string& out_dir,
                 const Overrides& ov, std::string* message) {
    const auto start = std::chrono::steady_clock::now();
    auto say = [&](const std::string& m) {
        if (message) *message = m;
    };
    json scenario;
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            say("cannot read " + path);
            return schema_error;
        }
        try {
            scenario = json::parse(in);
        } catch (const json::exception& e) {
            say(std::string("malformed JSON: ") + e.what());
            return schema_error;
        }
    }
    Outcome out;
    try {
        out = run_pipeline(subcommand, scenario, ov);
    } catch (const SchemaError& e) {
        say(std::string("schema error: ") + e.what());
        return schema_error;
    } catch (const json::exception& e) {
        say(std::string("schema error: ") + e.what());
        return schema_error;
    } catch (const std::exception& e) {
        out = Outcome{};
        out.exit = numerical_failure;
        out.status = "numerical_failure";
        json diag{{"message", e.what()}};
        if (dynamic_cast<const AccuracyError*>(&e)) {
            diag["type"] = "AccuracyError";
            diag["partial_dini"] = static_cast<const AccuracyError&>(e).partial_dini();
        } else if (dynamic_cast<const NumericalError*>(&e)) {
            diag["type"] = "NumericalError";
        } else if (dynamic_cast<const Error*>(&e)) {
            diag["type"] = "Error";
        } else {
            diag["type"] = "std::exception";
        }
        out.diagnostics["failure"] = diag;
    }

    fs::create_directories(out_dir);
    json files = json::array();
    for (const auto& f : out.files) {
        std::ofstream o(fs::path(out_dir) / f.name, std::ios::binary);
        o << f.content;
        files.push_back({{"path", f.name}, {"sha256", sha256_hex(f.content)}, {"bytes", f.content.size()}});
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest{
        {"scenario_path", path},
        {"scenario", scenario},
        {"subcommand", subcommand},
        {"status", out.status},
        {"exit_code", out.exit},
        {"versions",
         {{"yudovich", YUDOVICH_VERSION},
          {"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
        {"overrides", {{"seed", ov.seed ? json(*ov.seed) : json(nullptr)}, {"tol", ov.tol ? json(*ov.tol) : json(nullptr)}}},
        {"workers", worker_count()},
        {"wall_time_s", wall},
        {"diagnostics", out.diagnostics},
        {"files", files}};
    std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << "\n";
    if (out.exit == numerical_failure) say(out.diagnostics["failure"]["message"].get<std::string>());
    else say(out.status);
    return out.exit;
}

}  // namespace yudovich::cli
