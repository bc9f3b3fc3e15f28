#pragma once

#include <cstddef>

namespace depthfilter {

double normal_cdf(double t);
double student_t_cdf(double t, double dof);
double chi2_cdf(double x, double dof);
/// Inverse chi-squared CDF, 0 < q < 1.
double chi2_quantile(double dof, double q);
/// Inverse CDF of Snedecor's F(d1, d2).
double f_quantile(double d1, double d2, double q);
double skew_normal_cdf(double t, double location, double scale, double shape);

/// Smallest c with P(Bin(trials, prob) <= c) >= q, by direct summation of the pmf.
std::size_t binomial_quantile(std::size_t trials, double prob, double q);

} // namespace depthfilter
