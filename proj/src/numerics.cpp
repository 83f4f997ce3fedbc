#include "fregime/numerics.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <string>

namespace fregime::numerics {

double log_gamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("log_gamma: x must be positive and finite");
    return std::lgamma(x);
}

double digamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("digamma: x must be positive and finite");
    return boost::math::digamma(x);
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("regularized_incomplete_beta: a and b must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("regularized_incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    return boost::math::ibeta(a, b, x);
}

double f_sf(double f, FTestDistribution dist) {
    if (dist.df1 < 1 || dist.df2 < 1) throw DomainError("f_sf: degrees of freedom must be >= 1");
    if (!(f >= 0.0)) throw DomainError("f_sf: f must be nonnegative");
    if (std::isinf(f)) return 0.0;
    const double d1 = dist.df1;
    const double d2 = dist.df2;
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
}

double binomial_pmf(int k, int n, double p) {
    if (n < 0 || k < 0 || k > n) throw DomainError("binomial_pmf: need 0 <= k <= n");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial_pmf: p outside [0, 1]");
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    // Multiplicative binomial coefficient is exact in double for the small n used here.
    double coef = 1.0;
    for (int j = 1; j <= k; ++j) coef = coef * (n - k + j) / j;
    return coef * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

double binomial_tail(int k, int n, double p) {
    if (n < 0 || k < 0 || k > n) throw DomainError("binomial_tail: need 0 <= k <= n");
    if (k == 0) return 1.0;
    double sum = 0.0;
    for (int j = n; j >= k; --j) sum += binomial_pmf(j, n, p);
    return sum;
}

}  // namespace fregime::numerics
