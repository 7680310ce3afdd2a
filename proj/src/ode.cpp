#include "yudovich/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "yudovich/errors.hpp"

namespace yudovich::ode {

namespace {

constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

double initial_step(const Rhs& f, double t0, std::span<const double> y0, std::span<const double> f0,
                    double direction, double h_max, const Options& o, std::size_t& nfev) {
    const std::size_t n = y0.size();
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sk = o.atol + o.rtol * std::abs(y0[i]);
        dnf += (f0[i] / sk) * (f0[i] / sk);
        dny += (y0[i] / sk) * (y0[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, h_max);
    std::vector<double> y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + direction * h * f0[i];
    f(t0 + direction * h, y1, f1);
    ++nfev;
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sk = o.atol + o.rtol * std::abs(y0[i]);
        der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                     : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * std::abs(h), h1, h_max});
}

}  // namespace

void DenseStep::evaluate(double t, std::span<double> out) const {
    const std::size_t n = dimension();
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = rcont[i] +
                 s * (rcont[n + i] +
                      s1 * (rcont[2 * n + i] + s * (rcont[3 * n + i] + s1 * rcont[4 * n + i])));
    }
}

std::vector<double> DenseStep::evaluate(double t) const {
    std::vector<double> out(dimension());
    evaluate(t, out);
    return out;
}

double DenseStep::component(double t, std::size_t i) const {
    const std::size_t n = dimension();
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    return rcont[i] +
           s * (rcont[n + i] +
                s1 * (rcont[2 * n + i] + s * (rcont[3 * n + i] + s1 * rcont[4 * n + i])));
}

Result dopri5(const Rhs& f, double t0, std::span<const double> y0_in, double t1, const Options& o,
              std::span<const Event> events, const StepObserver& observer) {
    const std::size_t n = y0_in.size();
    Result res;
    res.t = t0;
    res.y.assign(y0_in.begin(), y0_in.end());
    if (t1 == t0 || n == 0) return res;

    const double direction = t1 > t0 ? 1.0 : -1.0;
    const double h_max = o.h_max > 0.0 ? o.h_max : std::abs(t1 - t0);
    std::vector<double> y = res.y, y1(n), ysti(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n),
                        k7(n);
    f(t0, y, k1);
    res.rhs_evaluations = 1;
    double h = o.h_initial > 0.0 ? std::min(o.h_initial, h_max)
                                 : initial_step(f, t0, y, k1, direction, h_max, o,
                                                res.rhs_evaluations);
    double t = t0;
    double facold = 1e-4;
    const double expo1 = 0.2 - o.beta * 0.75;
    const double facc1 = 1.0 / o.fac_min;
    const double facc2 = 1.0 / o.fac_max;
    bool reject = false;

    std::vector<double> g_prev(events.size());
    for (std::size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].g(t, y);

    DenseStep step;
    step.rcont.resize(5 * n);

    while (true) {
        if (res.accepted + res.rejected >= o.max_steps) {
            throw StiffnessError("dopri5: maximum number of steps exceeded at t = " +
                                 std::to_string(t));
        }
        const double remaining = std::abs(t1 - t);
        bool last = false;
        if (h >= remaining * (1.0 - 1e-12)) {
            h = remaining;
            last = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            std::ostringstream msg;
            msg << "step size underflow (h = " << h << ") at t = " << t
                << "; accepted " << res.accepted << ", rejected " << res.rejected;
            throw StiffnessError(msg.str());
        }
        const double hs = direction * h;
        for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + hs * a21 * k1[i];
        f(t + c2 * hs, y1, k2);
        for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * hs, y1, k3);
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * hs, y1, k4);
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * hs, y1, k5);
        for (std::size_t i = 0; i < n; ++i)
            ysti[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                   a65 * k5[i]);
        const double tph = last ? t1 : t + hs;
        f(tph, ysti, k6);
        for (std::size_t i = 0; i < n; ++i)
            y1[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] +
                                 a76 * k6[i]);
        f(tph, y1, k7);
        res.rhs_evaluations += 6;

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                    e6 * k6[i] + e7 * k7[i]);
            const double sk = o.atol + o.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err += (ei / sk) * (ei / sk);
        }
        err = std::sqrt(err / static_cast<double>(n));
        if (!std::isfinite(err)) err = 1e10;

        const double fac11 = std::pow(err, expo1);
        double fac = fac11 / std::pow(facold, o.beta);
        fac = std::max(facc2, std::min(facc1, fac / o.safety));
        double hnew = h / fac;

        if (err <= 1.0) {
            facold = std::max(err, 1e-4);
            ++res.accepted;
            res.step_sizes.push_back(h);
            for (std::size_t i = 0; i < n; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = hs * k1[i] - ydiff;
                step.rcont[i] = y[i];
                step.rcont[n + i] = ydiff;
                step.rcont[2 * n + i] = bspl;
                step.rcont[3 * n + i] = ydiff - hs * k7[i] - bspl;
                step.rcont[4 * n + i] = hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                              d6 * k6[i] + d7 * k7[i]);
            }
            step.t0 = t;
            step.h = hs;

            // Terminal events: first downward crossing within the step.
            std::optional<EventHit> hit;
            for (std::size_t e = 0; e < events.size(); ++e) {
                const double g1 = events[e].g(tph, y1);
                if (g_prev[e] > 0.0 && g1 <= 0.0) {
                    double lo = t, hi = tph;
                    std::vector<double> ym(n);
                    for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
                        const double mid = 0.5 * (lo + hi);
                        step.evaluate(mid, ym);
                        if (events[e].g(mid, ym) > 0.0) lo = mid; else hi = mid;
                    }
                    if (!hit || direction * (hi - hit->t) < 0.0) {
                        EventHit eh;
                        eh.index = e;
                        eh.name = events[e].name;
                        eh.t = hi;
                        eh.y = step.evaluate(hi);
                        hit = std::move(eh);
                    }
                }
                g_prev[e] = g1;
            }
            if (hit) {
                // Truncate the stored step at the event time.
                if (o.store_dense) res.dense.push_back(step);
                if (observer) observer(step);
                res.t = hit->t;
                res.y = hit->y;
                res.event = std::move(hit);
                return res;
            }

            if (o.store_dense) res.dense.push_back(step);
            std::swap(k1, k7);
            y.swap(y1);
            t = tph;
            if (observer && !observer(step)) break;
            if (last) break;
            if (std::abs(hnew) > h_max) hnew = h_max;
            if (reject) hnew = std::min(std::abs(hnew), h);
            reject = false;
        } else {
            hnew = h / std::min(facc1, fac11 / o.safety);
            reject = true;
            if (res.accepted >= 1) ++res.rejected;
        }
        h = hnew;
    }
    res.t = t;
    res.y = y;
    return res;
}

}  // namespace yudovich::ode
