#include "yudovich/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "yudovich/errors.hpp"
#include "yudovich/quadrature.hpp"

namespace yudovich {

namespace {

constexpr double kMaxV = 690.0;  // h ≥ e^{-690}: keeps h and μ(h) normal doubles

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ArgumentError(std::string(what) + " must be positive");
}

quad::Options tight() {
    quad::Options o;
    o.abs_tol = 1e-14;
    o.rel_tol = 1e-13;
    o.max_intervals = 20000;
    return o;
}

// ∫ over v ∈ [v_lo, v_hi] of g(v), split into panels of width ≤ 1 so each stays smooth.
double panel_integral(const std::function<double(double)>& g, double v_lo, double v_hi) {
    if (v_hi == v_lo) return 0.0;
    const double sign = v_hi > v_lo ? 1.0 : -1.0;
    if (sign < 0) std::swap(v_lo, v_hi);
    std::vector<double> breaks{v_lo};
    const int n = static_cast<int>(std::ceil(v_hi - v_lo));
    for (int i = 1; i < n; ++i) breaks.push_back(v_lo + (v_hi - v_lo) * i / n);
    breaks.push_back(v_hi);
    const auto r = quad::gauss_kronrod(g, breaks, tight());
    if (!r.converged) throw QuadratureError("modulus quadrature did not converge");
    return sign * r.value;
}

// Solve ∫_c^R dh/μ = t for w = log R by safeguarded Newton inside [log c, log a].
double osgood_solve(const Modulus& mu, double c, double t, double w_guess) {
    const double w_lo0 = std::log(c), w_hi0 = std::log(mu.a());
    double lo = w_lo0, hi = w_hi0;
    double w = std::clamp(w_guess, lo, hi);
    auto J = [&](double ww) { return reciprocal_integral(mu, c, std::exp(ww)); };
    const double tol = 1e-13 * std::max(1.0, t);
    for (int it = 0; it < 200; ++it) {
        const double f = J(w) - t;
        if (std::abs(f) <= tol) return std::exp(w);
        if (f > 0) hi = w; else lo = w;
        if (hi - lo <= 4e-16 * std::max(1.0, std::abs(w))) break;
        // dJ/dw = R/μ(R)
        double wn = w - f * mu.ratio(std::exp(w));
        if (!(wn > lo && wn < hi)) wn = 0.5 * (lo + hi);
        w = wn;
    }
    return std::exp(w);
}

}  // namespace

Modulus Modulus::power(double r, double a) {
    require_positive(r, "power modulus exponent");
    require_positive(a, "modulus domain bound a");
    Modulus m;
    m.kind_ = Kind::power;
    m.r_ = r;
    m.a_ = a;
    return m;
}

Modulus Modulus::h_log(double C, double a) {
    require_positive(C, "h_log constant");
    require_positive(a, "modulus domain bound a");
    if (a > std::exp(-1.0) * (1 + 1e-15)) throw DomainError("h_log modulus: a must be ≤ 1/e");
    Modulus m;
    m.kind_ = Kind::h_log;
    m.C_ = C;
    m.a_ = a;
    return m;
}

Modulus Modulus::from_germ(const Germ& germ, double C, double a) {
    require_positive(C, "from_germ constant");
    require_positive(a, "modulus domain bound a");
    if (!(a < 1.0)) throw DomainError("from_germ modulus: a must be < 1 so that h⁻² > 1");
    Modulus m;
    m.kind_ = Kind::from_germ;
    m.germ_ = germ;
    m.C_ = C;
    m.a_ = a;
    return m;
}

Modulus Modulus::gamma_power(std::shared_ptr<const GammaFamily> family, double t, double r) {
    if (!family) throw ArgumentError("gamma_power: null family");
    require_positive(r, "gamma_power exponent");
    if (t < 0.0 || t > family->horizon()) throw DomainError("gamma_power: t outside [0, T]");
    Modulus m;
    m.kind_ = Kind::gamma_power;
    m.a_ = family->a_tilde();
    m.t_ = t;
    m.r_ = r;
    m.family_ = std::move(family);
    return m;
}

Modulus Modulus::tabulated(std::vector<std::pair<double, double>> samples) {
    if (samples.size() < 2) throw ArgumentError("tabulated modulus: need at least two samples");
    std::sort(samples.begin(), samples.end());
    Modulus m;
    m.kind_ = Kind::tabulated;
    for (const auto& [h, v] : samples) {
        require_positive(h, "tabulated modulus abscissa");
        require_positive(v, "tabulated modulus value");
        if (!m.log_mu_.empty() && std::log(v) <= m.log_mu_.back())
            throw ArgumentError("tabulated modulus: values must be strictly increasing");
        m.log_h_.push_back(std::log(h));
        m.log_mu_.push_back(std::log(v));
    }
    m.a_ = samples.back().first;
    return m;
}

Modulus Modulus::log_inverse(double q, double a) {
    require_positive(q, "log_inverse exponent");
    require_positive(a, "modulus domain bound a");
    if (!(a < 1.0)) throw DomainError("log_inverse modulus: a must be < 1");
    Modulus m;
    m.kind_ = Kind::log_inverse;
    m.r_ = q;
    m.a_ = a;
    return m;
}

std::string Modulus::describe() const {
    std::ostringstream s;
    switch (kind_) {
        case Kind::power: s << "h^" << r_; break;
        case Kind::h_log: s << C_ << "*h*log(h^-2)"; break;
        case Kind::from_germ: s << C_ << "*h*T_theta(h^-2)"; break;
        case Kind::gamma_power: s << "Gamma_" << t_ << "(h)^" << r_; break;
        case Kind::tabulated: s << "tabulated(" << log_h_.size() << ")"; break;
        case Kind::log_inverse: s << "log(1/h)^-" << r_; break;
    }
    s << " on [0," << a_ << "]";
    return s.str();
}

double Modulus::ratio(double h) const {
    if (!(h > 0.0) || h > a_ * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "modulus evaluated at h = " << h << " outside (0, " << a_ << "]";
        throw DomainError(msg.str());
    }
    switch (kind_) {
        case Kind::power:
            return std::pow(h, r_ - 1.0);
        case Kind::h_log:
            return -2.0 * C_ * std::log(h);
        case Kind::from_germ:
            return C_ * t_theta_log(*germ_, -2.0 * std::log(h)).value;
        case Kind::gamma_power:
            return std::pow((*family_)(t_, std::min(h, a_)), r_) / h;
        case Kind::tabulated:
            return (*this)(h) / h;
        case Kind::log_inverse:
            return std::pow(-std::log(h), -r_) / h;
    }
    return 0.0;
}

double Modulus::operator()(double h) const {
    if (h == 0.0) return 0.0;
    if (kind_ == Kind::tabulated) {
        if (!(h > 0.0) || h > a_ * (1.0 + 1e-12)) throw DomainError("tabulated modulus: h outside (0, a]");
        const double lh = std::log(h);
        std::size_t j;
        if (lh <= log_h_.front()) {
            j = 1;  // power-law continuation to 0 using the first segment
        } else {
            auto it = std::upper_bound(log_h_.begin(), log_h_.end(), lh);
            j = std::clamp<std::size_t>(it - log_h_.begin(), 1, log_h_.size() - 1);
        }
        const double w = (lh - log_h_[j - 1]) / (log_h_[j] - log_h_[j - 1]);
        return std::exp((1.0 - w) * log_mu_[j - 1] + w * log_mu_[j]);
    }
    if (kind_ == Kind::gamma_power) {
        if (!(h > 0.0) || h > a_ * (1.0 + 1e-12)) throw DomainError("gamma_power modulus: h outside (0, a]");
        return std::pow((*family_)(t_, std::min(h, a_)), r_);
    }
    return h * ratio(h);
}

double reciprocal_integral(const Modulus& mu, double h1, double h2) {
    if (!(h1 > 0.0) || !(h2 > 0.0)) throw DomainError("reciprocal_integral: endpoints must be positive");
    // h = e^{-v}: dh/μ(h) = −dv/ratio(h)
    auto g = [&](double v) { return 1.0 / mu.ratio(std::min(std::exp(-v), mu.a())); };
    return panel_integral(g, -std::log(h2), -std::log(h1));
}

OsgoodResult osgood_bound(const Modulus& mu, double c, double t) {
    if (!(c > 0.0) || c > mu.a() * (1 + 1e-12)) throw DomainError("osgood_bound: c must lie in (0, a]");
    if (t < 0.0) throw DomainError("osgood_bound: t must be non-negative");
    if (t == 0.0) return {c, false};
    const double total = reciprocal_integral(mu, c, mu.a());
    if (total <= t) return {mu.a(), true};
    const double guess = std::log(c) + t * mu.ratio(c);
    return {osgood_solve(mu, c, t, guess), false};
}

double largest_dyadic_below(const Modulus& mu, double target) {
    double acc = 0.0, h = mu.a();
    for (int k = 0; k <= 1000; ++k) {
        if (acc >= target) return h;
        const double next = h * 0.5;
        if (-std::log(next) > kMaxV) break;
        acc += reciprocal_integral(mu, next, h);
        h = next;
    }
    throw DomainError("no dyadic ã reaches the requested ∫ dh/μ (non-Osgood modulus or κT too large)");
}

GammaFamily::GammaFamily(Modulus mu, double kappa, double T) : mu_(std::move(mu)), kappa_(kappa), T_(T) {
    if (!(kappa >= 0.0)) throw ArgumentError("GammaFamily: kappa must be non-negative");
    if (!(T >= 0.0)) throw ArgumentError("GammaFamily: horizon must be non-negative");
    const double v_a = -std::log(mu_.a());
    const int n = static_cast<int>(std::floor((kMaxV - v_a) / dv_));
    cumulative_.assign(1, 0.0);
    auto g = [&](double v) { return 1.0 / mu_.ratio(std::min(std::exp(-v), mu_.a())); };
    for (int j = 1; j <= n; ++j) {
        const double panel = panel_integral(g, v_a + (j - 1) * dv_, v_a + j * dv_);
        cumulative_.push_back(cumulative_.back() + panel);
    }
    a_tilde_ = largest_dyadic_below(mu_, kappa_ * T_);
}

double GammaFamily::tail_integral(double h) const {
    if (!(h > 0.0) || h > mu_.a() * (1 + 1e-12)) throw DomainError("tail_integral: h outside (0, a]");
    const double v = std::log(mu_.a() / h);
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(std::round(v / dv_)), cumulative_.size() - 1);
    const double hj = mu_.a() * std::exp(-static_cast<double>(j) * dv_);
    return cumulative_[j] + reciprocal_integral(mu_, h, hj);
}

OsgoodResult GammaFamily::evaluate_unrestricted(double t, double h) const {
    if (t < 0.0 || t > T_ * (1 + 1e-12)) throw DomainError("Gamma_t: t outside [0, T]");
    if (h == 0.0) return {0.0, false};
    if (!(h > 0.0)) throw DomainError("Gamma_t: h must be non-negative");
    const double kt = kappa_ * t;
    if (kt == 0.0) return {h, false};
    const double Kh = tail_integral(h);
    if (Kh <= kt) return {mu_.a(), true};
    // Γ is where the tail integral drops to Kh − κt; bracket it in the table, then solve
    // ∫_Γ^{h_j} dh/μ = target − K_j locally from the nearest node below.
    const double target = Kh - kt;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const std::size_t j = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    const double log_hj = std::log(mu_.a()) - static_cast<double>(j) * dv_;
    const double hj = std::exp(log_hj);
    const double local = target - cumulative_[j];  // ≥ 0, < one panel
    if (local <= 0.0) return {hj, false};
    double lo = log_hj - dv_, hi = log_hj;
    if (j + 1 < cumulative_.size()) {
        const double w = local / (cumulative_[j + 1] - cumulative_[j]);
        double x = log_hj - w * dv_;
        const double tol = 1e-13 * std::max(1.0, Kh);
        for (int iter = 0; iter < 100; ++iter) {
            const double f = reciprocal_integral(mu_, std::exp(x), hj) - local;  // increasing as x decreases
            if (std::abs(f) <= tol) break;
            if (f > 0) lo = x; else hi = x;
            if (hi - lo <= 4e-16 * std::max(1.0, std::abs(x))) break;
            double xn = x + f * mu_.ratio(std::exp(x));
            if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
            x = xn;
        }
        return {std::exp(x), false};
    }
    return {osgood_solve(mu_, h, kt, std::log(h)), false};
}

double GammaFamily::operator()(double t, double h) const {
    if (h > a_tilde_ * (1 + 1e-12)) {
        std::ostringstream msg;
        msg << "Gamma_t: h = " << h << " exceeds ã = " << a_tilde_;
        throw DomainError(msg.str());
    }
    return evaluate_unrestricted(t, h).value;
}

DiniResult dini_integral(const Modulus& mu, double h_min) {
    if (!(h_min > 0.0) || !(h_min < mu.a())) throw DomainError("dini_integral: h_min must lie in (0, a)");
    DiniResult out;
    // μ/h dh = μ(e^{-v}) dv
    auto g = [&](double v) { return mu(std::min(std::exp(-v), mu.a())); };
    const int K = static_cast<int>(std::floor(std::log2(mu.a() / h_min) + 1e-12));
    double h = mu.a();
    const double ln2 = std::log(2.0);
    for (int k = 0; k < K; ++k) {
        const double v0 = -std::log(h);
        out.increments.push_back(panel_integral(g, v0, v0 + ln2));
        out.partial += out.increments.back();
        h *= 0.5;
    }
    out.partial += panel_integral(g, -std::log(h), -std::log(h_min));
    if (out.increments.size() >= 2) {
        const double last = out.increments.back();
        const double prev = out.increments[out.increments.size() - 2];
        out.tail_ratio = prev > 0 ? last / prev : 0.0;
        out.scaled_last = static_cast<double>(out.increments.size()) * last;
        // geometric tail only with clear geometric decay; slower decay is reported as divergent
        double full = 0.0;
        for (double inc : out.increments) full += inc;
        out.extrapolated = out.tail_ratio < 0.9
                               ? full + last * out.tail_ratio / (1.0 - out.tail_ratio)
                               : std::numeric_limits<double>::infinity();
    } else {
        out.extrapolated = out.partial;
    }
    return out;
}

double holder_compose_bound(double F_norm, double r, double phi_norm) {
    if (F_norm < 0.0 || phi_norm < 0.0) throw ArgumentError("holder_compose_bound: norms must be non-negative");
    if (!(r > 0.0 && r < 1.0)) throw DomainError("holder_compose_bound: r must lie in (0, 1)");
    if (F_norm == 0.0) return 0.0;
    return F_norm * std::pow(phi_norm, r);
}

UpsilonSum upsilon_sum(int s, int m) {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::cpp_rational;
    if (s < 1 || m < 0) throw ArgumentError("upsilon_sum: need s ≥ 1, m ≥ 0");
    if (s > 8 || m > 16) throw SizeError("upsilon_sum: enumeration limited to s ≤ 8, m ≤ 16");
    UpsilonSum out;
    cpp_rational total = 0;
    std::vector<int> alpha(static_cast<std::size_t>(s), 0);
    // enumerate compositions of m into s non-negative parts
    std::function<void(int, int, cpp_int)> rec = [&](int i, int left, cpp_int den) {
        if (i == s - 1) {
            alpha[static_cast<std::size_t>(i)] = left;
            const cpp_int d = den * (1 + left) * (1 + left);
            total += cpp_rational(cpp_int(1), d);
            ++out.terms;
            return;
        }
        for (int k = 0; k <= left; ++k) {
            alpha[static_cast<std::size_t>(i)] = k;
            rec(i + 1, left - k, den * (1 + k) * (1 + k));
        }
    };
    rec(0, m, cpp_int(1));
    std::ostringstream ex;
    ex << numerator(total) << "/" << denominator(total);
    out.exact = ex.str();
    out.value = static_cast<double>(total);
    out.bound = std::pow(20.0, s) / ((m + 1.0) * (m + 1.0));
    return out;
}

}  // namespace yudovich
