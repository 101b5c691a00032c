// Fit an AR(1) premium by maximum likelihood and recover the premium path.
#include "fxrp/premia.hpp"
#include "fxrp/simulate.hpp"

#include <cmath>
#include <iostream>

int main() {
    const double phi[] = {0.8};
    const auto truth = fxrp::build_arma_spec(1, 0, phi, {}, 5e-4, 2e-4, 0.0);
    const auto path = fxrp::simulate(truth, 600, 11);

    const auto fit = fxrp::mle_fit(1, 0, path.fe, /*constrain_c_zero=*/true);
    std::cout << "phi = " << fit.spec.phi[0] << ", R = " << fit.spec.R << ", Q = " << fit.spec.Q
              << ", L = " << fit.loglik << ", AIC = " << fit.aic << (fit.converged ? "" : " (not converged)") << '\n';

    const auto premia = fxrp::extract_premia(fit, path.fe);
    double err = 0.0, var = 0.0;
    for (std::size_t t = 0; t < path.rp.size(); ++t) {
        err += std::pow(premia.rp_hat[t] - path.rp[t], 2);
        var += path.rp[t] * path.rp[t];
    }
    std::cout << "share of premium variance captured by rp_hat: " << 1.0 - err / var << '\n';
}
