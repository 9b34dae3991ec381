#pragma once

namespace pcares::dist {

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse of the standard normal cdf (Wichura AS 241, ~1e-16 relative).
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double x, double df);
/// Inverse t cdf by bisection on student_t_cdf.
double student_t_quantile(double p, double df);

/// P(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_sf(double lambda);

}  // namespace pcares::dist
