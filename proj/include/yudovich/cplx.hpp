#pragma once

#include "yudovich/vec2.hpp"

namespace yudovich {

/// Minimal complex arithmetic over any field-like scalar (double or a Taylor jet).
template <class T>
struct Cplx {
    T re{};
    T im{};
};

template <class T>
Cplx<T> operator+(const Cplx<T>& a, const Cplx<T>& b) { return {a.re + b.re, a.im + b.im}; }
template <class T>
Cplx<T> operator-(const Cplx<T>& a, const Cplx<T>& b) { return {a.re - b.re, a.im - b.im}; }
template <class T>
Cplx<T> operator-(const Cplx<T>& a) { return {-a.re, -a.im}; }
template <class T>
Cplx<T> operator*(const Cplx<T>& a, const Cplx<T>& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
template <class T>
Cplx<T> operator*(double s, const Cplx<T>& a) { return {s * a.re, s * a.im}; }
template <class T>
Cplx<T> operator/(const Cplx<T>& a, const Cplx<T>& b) {
    const T den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}
template <class T>
Cplx<T> operator/(double s, const Cplx<T>& b) {
    const T den = b.re * b.re + b.im * b.im;
    return {s * b.re / den, -s * b.im / den};
}
template <class T>
Cplx<T> operator-(const Cplx<T>& a, double s) { return {a.re - s, a.im}; }
template <class T>
Cplx<T> conj(const Cplx<T>& a) { return {a.re, -a.im}; }
/// 1 − a
template <class T>
Cplx<T> one_minus(const Cplx<T>& a) { return {1.0 - a.re, -a.im}; }
template <class T>
T abs2(const Cplx<T>& a) { return a.re * a.re + a.im * a.im; }

template <class T>
Cplx<T> to_cplx(const BasicVec2<T>& v) { return {v.x, v.y}; }
/// A conjugated derivative read as a vector: ∇ Re F = conj(F').
template <class T>
BasicVec2<T> conj_as_vec(const Cplx<T>& f) { return {f.re, -f.im}; }

}  // namespace yudovich
