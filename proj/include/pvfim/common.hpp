#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace pvfim {

using Vec = std::vector<double>;

/// Numerical failure (non-finite value, failed iteration). Carries optional
/// iteration context in the message.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The barrier argument f_J + eps - f(x,y) became nonpositive: the iterate
/// left the interior of the restricted set.
class BarrierDomainError : public std::runtime_error {
public:
    BarrierDomainError(const std::string& msg, double slack)
        : std::runtime_error(msg), slack_(slack) {}
    double slack() const { return slack_; }

private:
    double slack_;
};

/// A caller violated a documented precondition (e.g. passed an infeasible
/// anchor point to a feasibility restoration).
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

/// A parameter schedule left its valid regime (e.g. sigma_l >= 1).
class ScheduleError : public std::runtime_error {
public:
    explicit ScheduleError(const std::string& msg) : std::runtime_error(msg) {}
};

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline void require_dim(const Vec& v, std::size_t dim, const char* what) {
    if (v.size() != dim)
        throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                    std::to_string(dim) + ", got " + std::to_string(v.size()));
}

inline void require_finite(const Vec& v, const char* what) {
    if (!all_finite(v))
        throw NumericalError(std::string(what) + ": non-finite entry");
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec add_scaled(const Vec& a, double t, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + t * b[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec lerp(const Vec& a, const Vec& b, double s) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * (b[i] - a[i]);
    return r;
}

}  // namespace pvfim
