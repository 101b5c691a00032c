// Regression tests for time-varying premia on a simulated quote series.
#include "fxrp/regressions.hpp"
#include "fxrp/simulate.hpp"

#include <iostream>

int main() {
    const double phi[] = {0.55};
    const auto spec = fxrp::build_arma_spec(1, 0, phi, {}, 7.27e-4, 1.12e-4, 0.0);
    const auto path = fxrp::simulate(spec, 446, 7, fxrp::ExpectedSpotChange{0.0, 0.006});
    const auto rates = fxrp::synthesize_rates(path, fxrp::YearMonth{1979, 1});
    const auto s = fxrp::build_aligned(rates);

    const auto fama = fxrp::run_fama(s);
    std::cout << "beta1 = " << fama.fit1.beta << ", beta2 = " << fama.fit2.beta
              << " (sum " << fama.fit1.beta + fama.fit2.beta << ")\n";

    const auto v = fxrp::test_time_varying_premia(s, 0.05);
    std::cout << "beta3 = " << v.beta3_fit.beta << " (p " << v.p_beta3_two_tail << ")\n"
              << "beta4 = " << v.beta4_fit.beta << " (one-tail p " << v.p_beta4_one_tail << ")\n"
              << "premia exist and vary: " << std::boolalpha << v.premia_exist_and_vary << '\n';
}
