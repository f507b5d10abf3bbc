#include "mvbsde/presets.hpp"

namespace mvbsde {

MarketModel problem_a() {
    MarketModel m;
    m.ckls = CklsParams{9.4251, 0.3374, 0.6503, 0.5, 9.4251 / 0.3374};
    m.stock = StockSpec{0.03, 0.0811, -1.0, -0.5, false};
    m.pref.gamma = 4.0;
    m.pref.rho = RhoWeight::constant(1.0);
    m.horizon = 1.0;
    return m;
}

MarketModel problem_b() {
    MarketModel m;
    m.ckls = CklsParams{0.021276, 0.27, 0.065, 0.0, 0.021276 / 0.27};
    m.stock = StockSpec{0.0014, 1.0, 1.0, -0.93, true};
    m.pref.gamma = 4.0;
    m.pref.rho = RhoWeight::constant(1.0);
    m.horizon = 1.0;
    return m;
}

MarketModel problem_c(double p) {
    MarketModel m = problem_a();
    m.ckls.p = p;
    return m;
}

}  // namespace mvbsde
