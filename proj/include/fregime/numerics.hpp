#pragma once

#include <stdexcept>

namespace fregime::numerics {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Degrees of freedom of an F(df1, df2) reference distribution.
struct FTestDistribution {
    int df1;
    int df2;
};

double log_gamma(double x);
double digamma(double x);

/// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

/// Upper tail P(F >= f) for F ~ F(df1, df2).
double f_sf(double f, FTestDistribution dist);

/// Exact upper tail P(X >= k) for X ~ Binomial(n, p).
double binomial_tail(int k, int n, double p);

/// Exact point mass P(X = k) for X ~ Binomial(n, p).
double binomial_pmf(int k, int n, double p);

}  // namespace fregime::numerics
