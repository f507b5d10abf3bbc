#pragma once

#include <cmath>

namespace mvbsde::detail {

// (1 - e^{-x}) / x, equal to 1 at x = 0.
inline double phi1(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x / 2.0;
    return -std::expm1(-x) / x;
}

// (e^{-x} - 1 + x) / x^2, equal to 1/2 at x = 0.
inline double phi2(double x) {
    if (std::abs(x) < 1e-3) return 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0;
    return (std::expm1(-x) + x) / (x * x);
}

// (x - 2 (1 - e^{-x}) + (1 - e^{-2x}) / 2) / x^3, equal to 1/3 at x = 0.
inline double phi3(double x) {
    if (std::abs(x) < 1e-2) {
        // Taylor series through x^4.
        return 1.0 / 3.0 - x / 4.0 + 7.0 * x * x / 60.0 - x * x * x / 24.0 +
               31.0 * x * x * x * x / 2520.0;
    }
    return (x + 2.0 * std::expm1(-x) - std::expm1(-2.0 * x) / 2.0) / (x * x * x);
}

}  // namespace mvbsde::detail
