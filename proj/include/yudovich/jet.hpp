#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace yudovich {

/// Truncated Taylor series a₀ + a₁t + … + a_K t^K. Operands of different lengths are
/// padded with zeros; results have the larger length. An empty jet is the constant 0.
class Jet {
public:
    Jet() = default;
    Jet(double c) : a_{c} {}  // NOLINT: implicit constants keep the kernel formulas generic
    Jet(std::initializer_list<double> coeffs) : a_(coeffs) {}
    explicit Jet(std::vector<double> coeffs) : a_(std::move(coeffs)) {}

    /// t ↦ c + t (the independent variable at c), truncated at order K.
    static Jet variable(double c, int K);
    static Jet constant(double c, int K);

    std::size_t size() const { return a_.size(); }
    int order() const { return static_cast<int>(a_.size()) - 1; }
    double operator[](std::size_t k) const { return k < a_.size() ? a_[k] : 0.0; }
    double& at(std::size_t k);
    const std::vector<double>& coeffs() const { return a_; }
    /// Horner evaluation at t.
    double eval(double t) const;

    Jet& operator+=(const Jet& b);
    Jet& operator-=(const Jet& b);
    Jet& operator*=(double c) {
        for (double& v : a_) v *= c;
        return *this;
    }

private:
    std::vector<double> a_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, const Jet& b);
/// Throws SingularityError when b₀ = 0.
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(const Jet& a, double c);
Jet operator+(double c, const Jet& a);
Jet operator-(const Jet& a, double c);
Jet operator-(double c, const Jet& a);
Jet operator*(const Jet& a, double c);
Jet operator*(double c, const Jet& a);
Jet operator/(const Jet& a, double c);
Jet operator/(double c, const Jet& a);

Jet exp(const Jet& a);
/// Throws SingularityError unless a₀ > 0.
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
/// a^r for a₀ > 0.
Jet pow(const Jet& a, double r);

}  // namespace yudovich
