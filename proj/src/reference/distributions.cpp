#include "depthfilter/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/skew_normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace depthfilter {

double normal_cdf(double t) {
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    return 0.5 * std::erfc(-t / std::sqrt(2.0));
}

double student_t_cdf(double t, double dof) {
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    return boost::math::cdf(boost::math::students_t(dof), t);
}

double chi2_cdf(double x, double dof) {
    if (x <= 0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double dof, double q) {
    if (dof <= 0 || !(q > 0.0 && q < 1.0)) throw std::domain_error("chi2_quantile: bad arguments");
    return 2.0 * boost::math::gamma_p_inv(0.5 * dof, q);
}

double f_quantile(double d1, double d2, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::domain_error("f_quantile: bad probability");
    return boost::math::quantile(boost::math::fisher_f(d1, d2), q);
}

double skew_normal_cdf(double t, double location, double scale, double shape) {
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    double v = boost::math::cdf(boost::math::skew_normal(location, scale, shape), t);
    return std::clamp(v, 0.0, 1.0);
}

std::size_t binomial_quantile(std::size_t trials, double prob, double q) {
    if (!(prob >= 0.0 && prob <= 1.0) || !(q > 0.0 && q < 1.0))
        throw std::domain_error("binomial_quantile: bad arguments");
    if (trials == 0 || prob == 0.0) return 0;
    if (prob == 1.0) return trials;
    // pmf(0) = (1-p)^n, pmf(c+1) = pmf(c) * (n-c)/(c+1) * p/(1-p); summed in log space for the start.
    const double n = static_cast<double>(trials);
    double log_pmf = n * std::log1p(-prob);
    double cdf = 0.0;
    const double ratio = prob / (1.0 - prob);
    for (std::size_t c = 0; c <= trials; ++c) {
        cdf += std::exp(log_pmf);
        if (cdf >= q * (1.0 - 1e-12)) return c;
        log_pmf += std::log((n - static_cast<double>(c)) / static_cast<double>(c + 1) * ratio);
    }
    return trials;
}

} // namespace depthfilter
