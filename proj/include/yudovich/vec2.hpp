#pragma once

#include <cmath>

namespace yudovich {

template <class T>
struct BasicVec2 {
    T x{};
    T y{};

    BasicVec2& operator+=(const BasicVec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    BasicVec2& operator-=(const BasicVec2& o) {
        x -= o.x;
        y -= o.y;
        return *this;
    }
    BasicVec2& operator*=(double s) {
        x *= s;
        y *= s;
        return *this;
    }
};

template <class T>
BasicVec2<T> operator+(BasicVec2<T> a, const BasicVec2<T>& b) {
    return a += b;
}
template <class T>
BasicVec2<T> operator-(BasicVec2<T> a, const BasicVec2<T>& b) {
    return a -= b;
}
template <class T>
BasicVec2<T> operator-(const BasicVec2<T>& a) {
    return {-a.x, -a.y};
}
template <class T>
BasicVec2<T> operator*(double s, BasicVec2<T> a) {
    return a *= s;
}
template <class T>
BasicVec2<T> operator*(BasicVec2<T> a, double s) {
    return a *= s;
}
template <class T>
T dot(const BasicVec2<T>& a, const BasicVec2<T>& b) {
    return a.x * b.x + a.y * b.y;
}
template <class T>
T cross(const BasicVec2<T>& a, const BasicVec2<T>& b) {
    return a.x * b.y - a.y * b.x;
}

/// Counter-clockwise rotation by π/2: (a, b) ↦ (−b, a). This is the ∇⊥ convention.
template <class T>
BasicVec2<T> perp(const BasicVec2<T>& a) {
    return {-a.y, a.x};
}

using Vec2 = BasicVec2<double>;

inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double norm2(const Vec2& a) { return a.x * a.x + a.y * a.y; }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

}  // namespace yudovich
