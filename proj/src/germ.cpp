#include "yudovich/germ.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "yudovich/errors.hpp"
#include "yudovich/quadrature.hpp"

namespace yudovich {

double iterated_exp(int k, double x) {
    for (int i = 0; i < k; ++i) x = std::exp(x);
    return x;
}

double iterated_log(int k, double x) {
    for (int i = 0; i < k; ++i) {
        if (!(x > 0.0)) throw DomainError("iterated_log: non-positive argument");
        x = std::log(x);
    }
    return x;
}

Germ Germ::theta_m(int m, std::optional<double> p0) {
    if (m < 0) throw ArgumentError("theta_m: m must be non-negative");
    Germ g;
    g.kind_ = Kind::theta_m;
    g.m_ = m;
    const double lower = iterated_exp(m, 1.0);
    g.p0_ = p0.value_or(std::max(lower, std::nextafter(1.0, 2.0)));
    if (!(g.p0_ > 1.0)) throw DomainError("theta_m: p0 must exceed 1");
    if (g.p0_ < lower * (1.0 - 1e-15)) {
        std::ostringstream msg;
        msg << "theta_" << m << ": p0 = " << g.p0_ << " below exp^" << m << "(1) = " << lower;
        throw DomainError(msg.str());
    }
    return g;
}

Germ Germ::power(double exponent, double p0) {
    if (!(exponent > 0.0)) throw ArgumentError("power germ: exponent must be positive");
    if (!(p0 > 1.0)) throw DomainError("power germ: p0 must exceed 1");
    Germ g;
    g.kind_ = Kind::power;
    g.exponent_ = exponent;
    g.p0_ = p0;
    return g;
}

Germ Germ::tabulated(std::vector<std::pair<double, double>> samples) {
    if (samples.size() < 2) throw ArgumentError("tabulated germ: need at least two samples");
    std::sort(samples.begin(), samples.end());
    Germ g;
    g.kind_ = Kind::tabulated;
    for (const auto& [p, th] : samples) {
        if (!(th > 0.0)) throw DomainError("tabulated germ: values must be positive");
        if (!g.log_p_.empty() && std::log(p) <= g.log_p_.back())
            throw ArgumentError("tabulated germ: duplicate sample points");
        g.log_p_.push_back(std::log(p));
        g.log_theta_.push_back(std::log(th));
    }
    g.p0_ = samples.front().first;
    if (!(g.p0_ > 1.0)) throw DomainError("tabulated germ: p0 must exceed 1");
    return g;
}

double Germ::log_value(double p) const {
    if (!(p >= p0_ * (1.0 - 1e-14))) {
        std::ostringstream msg;
        msg << "germ evaluated at p = " << p << " below p0 = " << p0_;
        throw DomainError(msg.str());
    }
    switch (kind_) {
        case Kind::theta_m: {
            double acc = 0.0, x = p;
            for (int k = 0; k < m_; ++k) {
                x = std::log(x);
                acc += std::log(std::max(x, 1.0));  // x ≥ 1 on the domain up to rounding
            }
            return acc;
        }
        case Kind::power:
            return exponent_ * std::log(p);
        case Kind::tabulated: {
            const double lp = std::log(p);
            if (lp > log_p_.back() * (1.0 + 1e-14))
                throw DomainError("tabulated germ: extrapolation beyond last sample");
            auto it = std::upper_bound(log_p_.begin(), log_p_.end(), lp);
            std::size_t j = std::clamp<std::size_t>(it - log_p_.begin(), 1, log_p_.size() - 1);
            const double w = (lp - log_p_[j - 1]) / (log_p_[j] - log_p_[j - 1]);
            return (1.0 - w) * log_theta_[j - 1] + w * log_theta_[j];
        }
    }
    return 0.0;
}

double Germ::operator()(double p) const { return std::exp(log_value(p)); }

ThetaInfimum t_theta_log(const Germ& germ, double log_a) {
    if (!(log_a > 0.0)) throw DomainError("t_theta: a must exceed 1");
    // log of the objective in s = log ε
    const double s_hi = -std::log(germ.p0());
    auto phi = [&](double s) {
        const double eps = std::exp(s);
        return eps * log_a + germ.log_value(1.0 / eps) - s;
    };
    // The minimizer sits near ε ≈ 1/log a for slowly varying θ; scan well beyond both sides.
    const double s_guess = std::min(s_hi, -std::log(log_a));
    const double s_lo = std::min(s_hi, s_guess) - 12.0;
    constexpr int n_scan = 64;
    std::vector<double> grid(n_scan), vals(n_scan);
    int best = 0;
    for (int i = 0; i < n_scan; ++i) {
        grid[i] = s_lo + (s_hi - s_lo) * i / (n_scan - 1);
        double v;
        try {
            v = phi(grid[i]);
        } catch (const DomainError&) {
            v = std::numeric_limits<double>::infinity();
        }
        vals[i] = v;
        if (v < vals[best]) best = i;
    }
    if (!std::isfinite(vals[best])) throw DomainError("t_theta: germ not evaluable on the scan range");
    double lo = grid[std::max(best - 1, 0)];
    double hi = grid[std::min(best + 1, n_scan - 1)];
    // golden section on [lo, hi]
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    auto safe = [&](double s) {
        try {
            return phi(s);
        } catch (const DomainError&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    double f1 = safe(x1), f2 = safe(x2);
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = safe(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = safe(x2);
        }
    }
    double s_best = f1 <= f2 ? x1 : x2;
    double f_best = std::min(f1, f2);
    // endpoints of the bracket, including ε = 1/p0
    for (double s : {lo, hi, grid[best]}) {
        const double v = safe(s);
        if (v < f_best) {
            f_best = v;
            s_best = s;
        }
    }
    ThetaInfimum out;
    out.value = std::exp(f_best);
    out.epsilon = std::exp(s_best);
    out.at_boundary = (s_hi - s_best) < 1e-9;
    return out;
}

double t_theta(const Germ& germ, double a) {
    if (!(a > 1.0)) throw DomainError("t_theta: a must exceed 1");
    return t_theta_log(germ, std::log(a)).value;
}

std::vector<PartialIntegral> admissibility_partial_integrals_log(const Germ& germ,
                                                                 std::span<const double> log_checkpoints) {
    std::vector<PartialIntegral> out;
    out.reserve(log_checkpoints.size());
    if (log_checkpoints.empty()) return out;
    if (!(log_checkpoints.front() > 0.0)) throw DomainError("admissibility: checkpoints must exceed 1");
    for (std::size_t i = 1; i < log_checkpoints.size(); ++i)
        if (!(log_checkpoints[i] > log_checkpoints[i - 1]))
            throw ArgumentError("admissibility: checkpoints must be strictly increasing");

    // a = e^u: ∫ da/(a T(a)) = ∫ du / T(e^u)
    auto integrand = [&](double u) { return 1.0 / t_theta_log(germ, std::max(u, 1e-300)).value; };
    quad::Options opts;
    opts.abs_tol = 1e-10;
    double acc = 0.0, err = 0.0, prev = 0.0;
    bool ok = true;
    for (double lc : log_checkpoints) {
        // geometric sub-partition keeps each panel's integrand tame over many decades of u
        std::vector<double> breaks{prev};
        double u = std::max(prev, 1.0);
        if (u > prev) breaks.push_back(u);
        const double boundary = germ.p0();  // for slowly varying θ the minimizer leaves ε = 1/p0 near u = p0
        while (u * 2.0 < lc) {
            u *= 2.0;
            breaks.push_back(u);
        }
        if (boundary > prev && boundary < lc) breaks.push_back(boundary);
        breaks.push_back(lc);
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
        const auto r = quad::gauss_kronrod(integrand, breaks, opts);
        acc += r.value;
        err += r.error;
        ok = ok && r.converged;
        out.push_back({lc, acc, err, ok && r.converged});
        prev = lc;
    }
    return out;
}

std::vector<PartialIntegral> admissibility_partial_integrals(const Germ& germ,
                                                             std::span<const double> checkpoints) {
    std::vector<double> logs;
    logs.reserve(checkpoints.size());
    for (double a : checkpoints) {
        if (!(a > 1.0)) throw DomainError("admissibility: checkpoints must exceed 1");
        logs.push_back(std::log(a));
    }
    return admissibility_partial_integrals_log(germ, logs);
}

IdentityCheck iterated_log_identity_check_log(int m, double log_p1, double log_p2) {
    if (m < 0) throw ArgumentError("identity check: m must be non-negative");
    if (log_p2 < log_p1) throw ArgumentError("identity check: need p1 ≤ p2");
    const double lower = m == 0 ? -std::numeric_limits<double>::infinity() : iterated_exp(m - 1, 1.0);
    if (log_p1 < lower * (1.0 - 1e-14)) throw DomainError("identity check: p1 below exp^m(1)");
    IdentityCheck out;
    // log^{m+1} p = log^m(u) with u = log p
    auto L = [m](double u) { return m == 0 ? u : iterated_log(m, u); };
    out.closed_form = L(log_p2) - L(log_p1);
    if (log_p2 == log_p1) return out;
    // dp/(p θ_m(p)) = du/θ_m(e^u) with θ_m(e^u) = u · log u ··· log^{m-1} u
    auto integrand = [m](double u) {
        double prod = 1.0, x = u;
        for (int k = 0; k < m; ++k) {
            prod *= x;
            x = std::log(x);
        }
        return 1.0 / prod;
    };
    std::vector<double> breaks{log_p1};
    if (m > 0) {
        double u = std::max(log_p1, 1e-300);
        while (u * 2.0 < log_p2) {
            u *= 2.0;
            breaks.push_back(u);
        }
    }
    breaks.push_back(log_p2);
    quad::Options opts;
    opts.abs_tol = 1e-13;
    const auto r = quad::gauss_kronrod(integrand, breaks, opts);
    if (!r.converged) throw QuadratureError("identity check: quadrature did not converge");
    out.quadrature = r.value;
    out.difference = std::abs(out.quadrature - out.closed_form);
    return out;
}

IdentityCheck iterated_log_identity_check(int m, double p1, double p2) {
    if (!(p1 > 0.0) || !(p2 > 0.0)) throw DomainError("identity check: p must be positive");
    return iterated_log_identity_check_log(m, std::log(p1), std::log(p2));
}

}  // namespace yudovich
