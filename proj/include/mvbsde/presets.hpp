#pragma once

#include "mvbsde/model.hpp"

namespace mvbsde {

// Square-root factor driving the stock volatility R^{-1/2}; starts at the stationary mean a / b.
MarketModel problem_a();
// Gaussian factor driving the Sharpe ratio with unit stock volatility; starts at a / b.
MarketModel problem_b();
// problem_a() with the factor diffusion R^p.
MarketModel problem_c(double p);

}  // namespace mvbsde
