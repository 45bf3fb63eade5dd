#pragma once

#include "sfh/quadrature.hpp"

namespace sfh::fbm {

// Fixes the fBm normalization.  We use the unit-variance convention
// E|B^H(t)|^2 = t^{2H}, which requires the factor alpha_h = H(2H-1) in
// front of every |t-s|^{2H-2} double integral; the Fourier-side constant
// c_h is rescaled by the same factor so both engines target one quantity.
struct FbmConvention {
    explicit FbmConvention(double hurst);

    double hurst;
    double alpha_h() const { return alpha_h_; }
    double c_h() const { return c_h_; }

private:
    double alpha_h_;
    double c_h_;
};

// The kernel g(t, .) = exp(-decay * (t - .)) restricted to [0, t].
struct ExpKernelSpec {
    double decay_rate; // l(l+1) for mode l, >= 0
    double upper_time; // t > 0

    ExpKernelSpec(double decay, double t);
};

// fBm covariance R_H(t,s) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double r_cov(double t, double s, const FbmConvention& conv);

// alpha_h * \int\int g_a(x) g_b(y) |x-y|^{2H-2} dx dy.
// The diagonal singularity is removed exactly by substituting u = x - y and
// integrating the |u|^{2H-2} weight analytically; the remaining smooth
// profile is handled by adaptive Gauss-Kronrod.
double weighted_inner(const ExpKernelSpec& a, const ExpKernelSpec& b,
                      const FbmConvention& conv, const QuadratureConfig& quad);

// sigma_l^2(t): variance of \int_0^t exp(-l(l+1)(t-s)) d beta(s).
// Time-domain engine (always adaptive quadrature).
double sigma_l_sq(int degree, double t, const FbmConvention& conv,
                  const QuadratureConfig& quad);

// Same quantity through the Fourier transform of g_l.  Cross-engine oracle;
// requires degree >= 1 (the l = 0 transform degenerates).
double sigma_l_sq_fourier(int degree, double t, const FbmConvention& conv,
                          const QuadratureConfig& quad);

// c_{3,3} = \int_R |tau|^{-(2H-1)} / (1+tau^2) dtau, by quadrature.
// Requires H >= 0.5 + 1e-3.
double c33(const FbmConvention& conv, const QuadratureConfig& quad);

// Closed form pi/sin(pi*H) of the same integral (validated against c33 in
// the test suite before being relied on).
double c33_closed(double hurst);

// Full mode covariance
//   U_l(t,s) = exp(-l(l+1)(t+s)) D + C * weighted_inner(g_l(t,.), g_l(s,.)).
double u_cov(int degree, double t, double s, double c_l, double d_l,
             const FbmConvention& conv, const QuadratureConfig& quad);

// Noise part of U_l (the weighted_inner factor without C) evaluated in
// closed form through incomplete-gamma functions.  Exact for any (b,t,s);
// used by bulk covariance assembly where per-entry quadrature would be too
// slow.  Falls back to quadrature in the small-b*t regime where the closed
// form loses digits to cancellation.
double mode_noise_cov(double decay, double t, double s, const FbmConvention& conv,
                      const QuadratureConfig& quad);

// U_l through mode_noise_cov; same value as u_cov, evaluated fast.
double u_cov_fast(int degree, double t, double s, double c_l, double d_l,
                  const FbmConvention& conv, const QuadratureConfig& quad);

// Large-time limit of mode_noise_cov(decay, t, t + lag): the stationary
// covariance of the saturated mode at the given lag.  Valid replacement for
// the finite-window value once decay * min(t, s) >= ~45 (corrections carry
// e^{-decay t} factors).
double stationary_mode_cov(double decay, double lag, const FbmConvention& conv);

namespace detail {
// Stable incomplete-gamma kit for a in (0,1), x >= 0.
double gamma_lower(double a, double x); // \int_0^x w^{a-1} e^{-w} dw
double btilde(double a, double x);      // e^{-x} \int_0^x y^{a-1} e^{y} dy
double etilde(double a, double x);      // e^{x} Gamma(a, x)
} // namespace detail

} // namespace sfh::fbm
