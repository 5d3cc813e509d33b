#pragma once

#include <Eigen/Core>
#include <cmath>

namespace dsoar {

// Make the std math functions visible to unqualified calls in scalar-generic
// code, so the same expression compiles for double and Dual.
using std::asin;
using std::atan2;
using std::cos;
using std::exp;
using std::sin;
using std::sqrt;

/// Forward-mode AD scalar carrying K partial derivatives. Used to obtain
/// exact Jacobians of the flight dynamics inside the trajectory optimizer.
template <int K>
struct Dual {
    double v = 0.0;
    Eigen::Matrix<double, K, 1> d = Eigen::Matrix<double, K, 1>::Zero();

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: implicit for constants

    static Dual seeded(double value, int slot) {
        Dual out(value);
        out.d[slot] = 1.0;
        return out;
    }

    Dual operator-() const {
        Dual out;
        out.v = -v;
        out.d = -d;
        return out;
    }

    Dual &operator+=(const Dual &o) {
        v += o.v;
        d += o.d;
        return *this;
    }
    Dual &operator-=(const Dual &o) {
        v -= o.v;
        d -= o.d;
        return *this;
    }
};

template <int K>
Dual<K> operator+(Dual<K> a, const Dual<K> &b) {
    a += b;
    return a;
}
template <int K>
Dual<K> operator-(Dual<K> a, const Dual<K> &b) {
    a -= b;
    return a;
}
template <int K>
Dual<K> operator*(const Dual<K> &a, const Dual<K> &b) {
    Dual<K> out;
    out.v = a.v * b.v;
    out.d = a.d * b.v + b.d * a.v;
    return out;
}
template <int K>
Dual<K> operator/(const Dual<K> &a, const Dual<K> &b) {
    Dual<K> out;
    out.v = a.v / b.v;
    out.d = (a.d - out.v * b.d) / b.v;
    return out;
}

template <int K>
bool operator<(const Dual<K> &a, const Dual<K> &b) {
    return a.v < b.v;
}
template <int K>
bool operator>(const Dual<K> &a, const Dual<K> &b) {
    return a.v > b.v;
}

template <int K>
Dual<K> sin(const Dual<K> &a) {
    Dual<K> out;
    out.v = std::sin(a.v);
    out.d = std::cos(a.v) * a.d;
    return out;
}
template <int K>
Dual<K> cos(const Dual<K> &a) {
    Dual<K> out;
    out.v = std::cos(a.v);
    out.d = -std::sin(a.v) * a.d;
    return out;
}
template <int K>
Dual<K> exp(const Dual<K> &a) {
    Dual<K> out;
    out.v = std::exp(a.v);
    out.d = out.v * a.d;
    return out;
}
template <int K>
Dual<K> sqrt(const Dual<K> &a) {
    Dual<K> out;
    out.v = std::sqrt(a.v);
    out.d = a.d / (2.0 * out.v);
    return out;
}
template <int K>
Dual<K> asin(const Dual<K> &a) {
    Dual<K> out;
    out.v = std::asin(a.v);
    out.d = a.d / std::sqrt(1.0 - a.v * a.v);
    return out;
}
template <int K>
Dual<K> atan2(const Dual<K> &y, const Dual<K> &x) {
    Dual<K> out;
    out.v = std::atan2(y.v, x.v);
    const double den = x.v * x.v + y.v * y.v;
    out.d = (x.v * y.d - y.v * x.d) / den;
    return out;
}

// Scalar-generic helpers so the same dynamics code runs on double and Dual.
inline double value_of(double x) { return x; }
template <int K>
double value_of(const Dual<K> &x) {
    return x.v;
}

}  // namespace dsoar
