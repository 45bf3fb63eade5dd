#pragma once

#include <functional>
#include <vector>

namespace sfh {

struct QuadratureConfig {
    double abs_tol = 1e-13;
    double rel_tol = 1e-10;
    int max_subdivisions = 4000;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int panels = 0;
};

// Adaptive Gauss-Kronrod 15(7) on [a, b].  Optional breakpoints pre-split
// the interval at known kinks.  Throws convergence_error if the subdivision
// budget is exhausted before reaching max(abs_tol, rel_tol*|I|).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureConfig& cfg,
                           const std::vector<double>& breakpoints = {});

// Same, but integrates the weighted integral  \int_0^X u^{p-1} f(u) du
// for p in (0,1) by the exact substitution u = w^{1/p}, which absorbs the
// endpoint singularity into the measure.
QuadratureResult integrate_power_weighted(const std::function<double(double)>& f,
                                          double X, double p,
                                          const QuadratureConfig& cfg,
                                          const std::vector<double>& breakpoints = {});

} // namespace sfh
