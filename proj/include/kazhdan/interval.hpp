#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "kazhdan/types.hpp"

namespace kazhdan {

// Closed interval [lo, hi] of doubles. Every operation rounds outward by one
// ulp, which encloses the exact result of round-to-nearest arithmetic.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double v) : lo(v), hi(v) {}
    Interval(double l, double h) : lo(l), hi(h) {}

    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
    bool contains(double v) const { return lo <= v && v <= hi; }
    bool positive() const { return lo > 0.0; }
};

}  // namespace kazhdan

namespace Eigen {
template <>
struct NumTraits<kazhdan::Interval> : NumTraits<double> {
    using Real = kazhdan::Interval;
    using NonInteger = kazhdan::Interval;
    using Nested = kazhdan::Interval;
    enum { IsComplex = 0, IsInteger = 0, IsSigned = 1, RequireInitialization = 1, ReadCost = 2, AddCost = 8, MulCost = 16 };
};
}  // namespace Eigen

namespace kazhdan {

namespace detail {
inline double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
inline double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }
}  // namespace detail

inline Interval operator+(const Interval& a, const Interval& b) {
    return {detail::down(a.lo + b.lo), detail::up(a.hi + b.hi)};
}

inline Interval operator-(const Interval& a, const Interval& b) {
    return {detail::down(a.lo - b.hi), detail::up(a.hi - b.lo)};
}

inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator*(const Interval& a, const Interval& b) {
    const double p[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {detail::down(*std::min_element(p, p + 4)), detail::up(*std::max_element(p, p + 4))};
}

inline Interval operator/(const Interval& a, const Interval& b) {
    if (b.lo <= 0.0 && b.hi >= 0.0) throw DomainError("interval division by an interval containing 0");
    const double p[] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
    return {detail::down(*std::min_element(p, p + 4)), detail::up(*std::max_element(p, p + 4))};
}

inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }
inline Interval& operator-=(Interval& a, const Interval& b) { return a = a - b; }
inline Interval& operator*=(Interval& a, const Interval& b) { return a = a * b; }

inline Interval sqrt(const Interval& a) {
    if (a.lo < 0.0) throw DomainError("interval square root of a possibly negative interval");
    return {std::max(0.0, detail::down(std::sqrt(a.lo))), detail::up(std::sqrt(a.hi))};
}

}  // namespace kazhdan
