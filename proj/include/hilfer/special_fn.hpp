#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hilfer/error.hpp"

namespace hilfer {

namespace detail {

// Lanczos approximation, g = 7, nine coefficients.
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coef = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_series(double z) {
    double acc = lanczos_coef[0];
    for (std::size_t i = 1; i < lanczos_coef.size(); ++i) {
        acc += lanczos_coef[i] / (z + static_cast<double>(i));
    }
    return acc;
}

inline bool is_nonpositive_integer(double x) {
    return x <= 0.0 && x == std::floor(x);
}

} // namespace detail

/// Gamma function for real arguments.
///
/// Lanczos approximation on [0.5, inf) and the reflection formula below it.
/// Throws DomainError at the poles 0, -1, -2, ... and OverflowError once the
/// result leaves the double range (x > ~171.6).
inline double gamma(double x) {
    if (!std::isfinite(x)) {
        throw DomainError("gamma: non-finite argument");
    }
    if (detail::is_nonpositive_integer(x)) {
        throw DomainError("gamma: pole at nonpositive integer");
    }
    if (x < 0.5) {
        const double s = std::sin(std::numbers::pi * x);
        return std::numbers::pi / (s * gamma(1.0 - x));
    }
    if (x > 171.62) {
        throw OverflowError("gamma: result exceeds double range");
    }
    const double z = x - 1.0;
    const double t = z + detail::lanczos_g + 0.5;
    // Split t^(z+1/2) so intermediate powers stay finite near the overflow edge.
    const double half = std::pow(t, 0.5 * (z + 0.5));
    const double value =
        std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) * detail::lanczos_series(z);
    if (!std::isfinite(value)) {
        throw OverflowError("gamma: result exceeds double range");
    }
    return value;
}

/// log|Gamma(x)| for x > 0, same approximation as gamma().
inline double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError("log_gamma: requires finite x > 0");
    }
    if (x < 0.5) {
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    const double t = z + detail::lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t +
           std::log(detail::lanczos_series(z));
}

/// Euler Beta function B(a, b) for a, b > 0.
inline double beta_fn(double a, double b) {
    if (a + b < 170.0) {
        return gamma(a) * gamma(b) / gamma(a + b);
    }
    return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

struct MLParams {
    double alpha = 1.0;
    double beta_p = 1.0;
    int terms_max = 500;
    double tol = 1e-15;

    [[nodiscard]] bool valid() const {
        return alpha > 0.0 && beta_p > 0.0 && terms_max >= 1 && tol >= 0.0;
    }
};

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) by its Taylor series.
///
/// Intended for |z| <= 5. Summation stops once three consecutive terms fall
/// below p.tol in absolute value; accumulation runs in long double because the
/// alternating series cancels heavily for negative z.
inline double mittag_leffler(const MLParams& p, double z) {
    if (!p.valid()) {
        throw DomainError("mittag_leffler: invalid parameters");
    }
    if (z == 0.0) {
        return 1.0 / gamma(p.beta_p);
    }
    const long double log_abs_z = std::log(std::fabs(static_cast<long double>(z)));
    const bool negative = z < 0.0;
    long double sum = 0.0L;
    int small_run = 0;
    for (int k = 0; k < p.terms_max; ++k) {
        const double arg = p.alpha * k + p.beta_p;
        long double term = 0.0L;
        if (!detail::is_nonpositive_integer(arg)) {
            const long double log_mag = k * log_abs_z - static_cast<long double>(log_gamma(arg));
            term = std::exp(log_mag);
            if (negative && (k % 2 == 1)) {
                term = -term;
            }
        }
        sum += term;
        if (std::fabs(static_cast<double>(term)) <= p.tol) {
            if (++small_run == 3) {
                return static_cast<double>(sum);
            }
        } else {
            small_run = 0;
        }
    }
    throw ConvergenceError("mittag_leffler: terms_max reached before tail criterion");
}

} // namespace hilfer
