#include "yudovich/taylor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "yudovich/errors.hpp"
#include "yudovich/jet.hpp"

namespace yudovich {

namespace {

using JVec = BasicVec2<Jet>;

double boundary_gap(const Domain& d, const std::vector<Vec2>& z) {
    double m = std::numeric_limits<double>::infinity();
    for (const Vec2& p : z) m = std::min(m, d.contains(p) ? d.distance_to_boundary(p) : -d.distance_to_boundary(p));
    return m;
}

}  // namespace

std::vector<std::vector<double>> taylor_coefficients(const VortexSystem& sys, const std::vector<Vec2>& z0, int K) {
    const ClosedFormKernel* kern = sys.green->kernel();
    if (!kern) throw ArgumentError("taylor: requires a closed-form Green backend (disk or annulus)");
    if (K < 1) throw ArgumentError("taylor: order must be at least 1");
    const std::size_t n = z0.size();
    std::vector<std::vector<double>> a(2 * n, std::vector<double>(1));
    for (std::size_t l = 0; l < n; ++l) {
        a[2 * l][0] = z0[l].x;
        a[2 * l + 1][0] = z0[l].y;
    }
    for (int k = 0; k < K; ++k) {
        std::vector<JVec> z(n);
        for (std::size_t l = 0; l < n; ++l) z[l] = {Jet(a[2 * l]), Jet(a[2 * l + 1])};
        const auto v = kernel_rhs(*kern, z, sys.strengths, sys.circulations);
        for (std::size_t l = 0; l < n; ++l) {
            const double vx = v[l].x[static_cast<std::size_t>(k)], vy = v[l].y[static_cast<std::size_t>(k)];
            if (!std::isfinite(vx) || !std::isfinite(vy)) throw SingularityError("taylor: non-finite coefficient");
            a[2 * l].push_back(vx / (k + 1));
            a[2 * l + 1].push_back(vy / (k + 1));
        }
    }
    return a;
}

TaylorRun taylor_integrate(const VortexSystem& sys, double T, const TaylorOptions& opts) {
    sys.validate();
    if (!(T > 0.0)) throw ArgumentError("taylor: horizon must be positive");
    if (!(opts.tol > 0.0)) throw ArgumentError("taylor: tolerance must be positive");
    const int K = opts.order;
    const Domain& dom = sys.green->domain();
    const double eps_coll = opts.collision_factor * dom.diameter();
    const double eps_bdry = opts.boundary_factor * dom.diameter();
    const double hmax = opts.max_step > 0.0 ? opts.max_step : T;
    const std::size_t n = sys.size();

    TaylorRun run;
    std::vector<Vec2> z = sys.positions;
    double t = 0.0;
    auto violated = [&](const std::vector<Vec2>& p) {
        return (n > 1 && min_pair_distance(p) < eps_coll) || boundary_gap(dom, p) < eps_bdry;
    };
    while (t < T) {
        std::vector<std::vector<double>> a;
        try {
            a = taylor_coefficients(sys, z, K);
        } catch (const SingularityError& e) {
            std::ostringstream m;
            m << e.what() << " (last valid time " << t << ")";
            throw SingularityError(m.str());
        }
        double h = std::numeric_limits<double>::infinity();
        for (int k : {K - 1, K}) {
            double nk = 0.0;
            for (const auto& c : a) nk = std::max(nk, std::abs(c[static_cast<std::size_t>(k)]));
            if (nk > 0.0) h = std::min(h, std::pow(opts.tol / nk, 1.0 / k));
        }
        h = std::min({0.9 * h, hmax, T - t});
        if (!(h > 1e-14 * std::max(1.0, T))) {
            std::ostringstream m;
            m << "taylor: step size underflow at t=" << t;
            throw StiffnessError(m.str());
        }
        TaylorStep st{t, h, std::move(a)};
        auto end = st.positions_at(t + h);
        if (violated(end)) {
            // first crossing: coarse scan of the polynomial, then bisection
            double lo = t, hi = t + h;
            for (int i = 1; i <= 32; ++i) {
                const double s = t + h * i / 32.0;
                if (violated(st.positions_at(s))) {
                    hi = s;
                    break;
                }
                lo = s;
            }
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (violated(st.positions_at(mid)) ? hi : lo) = mid;
            }
            st.h = hi - t;
            end = st.positions_at(hi);
            run.steps.push_back(std::move(st));
            run.end_time = hi;
            run.final_positions = end;
            run.termination.time = hi;
            if (n > 1 && min_pair_distance(end) < eps_coll) {
                run.termination.kind = Termination::Kind::collision;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t p = 0; p < n; ++p)
                    for (std::size_t q = p + 1; q < n; ++q)
                        if (distance(end[p], end[q]) < best) {
                            best = distance(end[p], end[q]);
                            run.termination.first = static_cast<int>(p);
                            run.termination.second = static_cast<int>(q);
                        }
            } else {
                run.termination.kind = Termination::Kind::boundary_proximity;
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t p = 0; p < n; ++p)
                    if (dom.distance_to_boundary(end[p]) < best) {
                        best = dom.distance_to_boundary(end[p]);
                        run.termination.first = static_cast<int>(p);
                    }
            }
            return run;
        }
        run.steps.push_back(std::move(st));
        t = (T - t - h <= 1e-15 * T) ? T : t + h;
        z = std::move(end);
    }
    run.end_time = T;
    run.final_positions = z;
    run.termination.time = T;
    return run;
}

AnalyticityEstimate analyticity_estimate(const std::vector<std::vector<double>>& coeffs, int k_min, bool derivatives) {
    if (coeffs.empty()) throw FitError("analyticity_estimate: no coefficients");
    std::size_t K = 0;
    for (const auto& c : coeffs) K = std::max(K, c.size());
    std::vector<double> ks, ys;
    for (std::size_t k = static_cast<std::size_t>(std::max(k_min, 1)); k < K; ++k) {
        double c = 0.0;
        for (const auto& v : coeffs)
            if (k < v.size()) c = std::max(c, std::abs(v[k]));
        double logc = std::log(c);
        if (derivatives) logc -= std::lgamma(k + 1.0);
        if (!(c > 1e-300) || !std::isfinite(logc)) continue;
        ks.push_back(static_cast<double>(k));
        ys.push_back(logc);
    }
    if (ks.size() < 3) throw FitError("analyticity_estimate: fewer than three usable coefficients");
    Eigen::MatrixXd A(ks.size(), 3);
    Eigen::VectorXd y(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        A(i, 0) = std::lgamma(ks[i] + 1.0);
        A(i, 1) = ks[i];
        A(i, 2) = 1.0;
        y(i) = ys[i];
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(y);
    if (!x.allFinite()) throw FitError("analyticity_estimate: degenerate fit");
    AnalyticityEstimate e;
    e.sigma = x(0);
    e.log_L = x(1);
    e.s_hat = std::max(1.0, e.sigma + 1.0);
    e.rho_hat = std::exp(-e.log_L);
    e.rms = std::sqrt((A * x - y).squaredNorm() / static_cast<double>(ks.size()));
    e.points = static_cast<int>(ks.size());
    return e;
}

}  // namespace yudovich
