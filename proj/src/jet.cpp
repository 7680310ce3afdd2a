#include "yudovich/jet.hpp"

#include <algorithm>
#include <cmath>

#include "yudovich/errors.hpp"

namespace yudovich {

Jet Jet::variable(double c, int K) {
    std::vector<double> a(static_cast<std::size_t>(K) + 1, 0.0);
    a[0] = c;
    if (K >= 1) a[1] = 1.0;
    return Jet(std::move(a));
}

Jet Jet::constant(double c, int K) {
    std::vector<double> a(static_cast<std::size_t>(K) + 1, 0.0);
    a[0] = c;
    return Jet(std::move(a));
}

double& Jet::at(std::size_t k) {
    if (k >= a_.size()) a_.resize(k + 1, 0.0);
    return a_[k];
}

double Jet::eval(double t) const {
    double s = 0.0;
    for (std::size_t k = a_.size(); k-- > 0;) s = s * t + a_[k];
    return s;
}

Jet& Jet::operator+=(const Jet& b) {
    if (b.a_.size() > a_.size()) a_.resize(b.a_.size(), 0.0);
    for (std::size_t k = 0; k < b.a_.size(); ++k) a_[k] += b.a_[k];
    return *this;
}

Jet& Jet::operator-=(const Jet& b) {
    if (b.a_.size() > a_.size()) a_.resize(b.a_.size(), 0.0);
    for (std::size_t k = 0; k < b.a_.size(); ++k) a_[k] -= b.a_[k];
    return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator-(const Jet& a) {
    std::vector<double> c(a.coeffs());
    for (double& v : c) v = -v;
    return Jet(std::move(c));
}

Jet operator*(const Jet& a, const Jet& b) {
    const std::size_t n = std::max(a.size(), b.size());
    if (a.size() == 0 || b.size() == 0) return Jet(std::vector<double>(n, 0.0));
    std::vector<double> c(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        const std::size_t jlo = k >= b.size() ? k - b.size() + 1 : 0;
        const std::size_t jhi = std::min(k, a.size() - 1);
        for (std::size_t j = jlo; j <= jhi; ++j) s += a[j] * b[k - j];
        c[k] = s;
    }
    return Jet(std::move(c));
}

Jet operator/(const Jet& a, const Jet& b) {
    if (b[0] == 0.0) throw SingularityError("jet division by a series with zero constant term");
    const std::size_t n = std::max(a.size(), b.size());
    std::vector<double> c(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = a[k];
        for (std::size_t j = 1; j <= k && j < b.size(); ++j) s -= b[j] * c[k - j];
        c[k] = s / b[0];
    }
    return Jet(std::move(c));
}

Jet operator+(const Jet& a, double c) {
    Jet r = a;
    r.at(0) += c;
    return r;
}
Jet operator+(double c, const Jet& a) { return a + c; }
Jet operator-(const Jet& a, double c) { return a + (-c); }
Jet operator-(double c, const Jet& a) { return (-a) + c; }

Jet operator*(const Jet& a, double c) {
    std::vector<double> r(a.coeffs());
    for (double& v : r) v *= c;
    return Jet(std::move(r));
}
Jet operator*(double c, const Jet& a) { return a * c; }
Jet operator/(const Jet& a, double c) { return a * (1.0 / c); }
Jet operator/(double c, const Jet& a) { return Jet(c) / a; }

Jet exp(const Jet& a) {
    const std::size_t n = std::max<std::size_t>(a.size(), 1);
    std::vector<double> e(n, 0.0);
    e[0] = std::exp(a[0]);
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= k; ++j) s += static_cast<double>(j) * a[j] * e[k - j];
        e[k] = s / static_cast<double>(k);
    }
    return Jet(std::move(e));
}

Jet log(const Jet& a) {
    if (!(a[0] > 0.0)) throw SingularityError("jet log requires a positive constant term");
    const std::size_t n = std::max<std::size_t>(a.size(), 1);
    std::vector<double> l(n, 0.0);
    l[0] = std::log(a[0]);
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j < k; ++j) s += static_cast<double>(j) * l[j] * a[k - j];
        l[k] = (a[k] - s / static_cast<double>(k)) / a[0];
    }
    return Jet(std::move(l));
}

Jet pow(const Jet& a, double r) {
    if (!(a[0] > 0.0)) throw SingularityError("jet power requires a positive constant term");
    const std::size_t n = std::max<std::size_t>(a.size(), 1);
    std::vector<double> p(n, 0.0);
    p[0] = std::pow(a[0], r);
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 1; j <= k; ++j)
            s += (r * static_cast<double>(j) - static_cast<double>(k - j)) * a[j] * p[k - j];
        p[k] = s / (static_cast<double>(k) * a[0]);
    }
    return Jet(std::move(p));
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

}  // namespace yudovich
