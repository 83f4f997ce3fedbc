#pragma once

// Exhaustive path-sum reference for the forward-backward recursion. Test-only.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "fregime/hmm.hpp"

namespace oracle {

struct PathSum {
    double loglik = 0.0;
    Eigen::MatrixXd gamma;
    Eigen::MatrixXd xi_sum;
};

// Sums p(path, x) over all K^T state paths using t_logpdf / gaussian_logpdf.
inline PathSum enumerate_paths(const fregime::hmm::HmmParams& p, const Eigen::MatrixXd& x) {
    const int K = p.n_states();
    const auto T = static_cast<int>(x.rows());
    Eigen::MatrixXd log_b(T, K);
    for (int t = 0; t < T; ++t) {
        for (int k = 0; k < K; ++k) {
            const Eigen::VectorXd xt = x.row(t).transpose();
            log_b(t, k) = p.family == fregime::hmm::EmissionFamily::student_t
                              ? fregime::hmm::t_logpdf(xt, p.mu[k], p.sigma[k], p.nu[k])
                              : fregime::hmm::gaussian_logpdf(xt, p.mu[k], p.sigma[k]);
        }
    }
    // Shift by a constant so exp() stays in range; undone in loglik.
    const double shift = log_b.maxCoeff();

    PathSum out;
    out.gamma = Eigen::MatrixXd::Zero(T, K);
    out.xi_sum = Eigen::MatrixXd::Zero(K, K);
    double total = 0.0;
    long n_paths = 1;
    for (int t = 0; t < T; ++t) n_paths *= K;
    std::vector<int> path(static_cast<std::size_t>(T));
    for (long code = 0; code < n_paths; ++code) {
        long c = code;
        for (int t = 0; t < T; ++t) {
            path[t] = static_cast<int>(c % K);
            c /= K;
        }
        double w = p.pi(path[0]) * std::exp(log_b(0, path[0]) - shift);
        for (int t = 1; t < T; ++t) w *= p.A(path[t - 1], path[t]) * std::exp(log_b(t, path[t]) - shift);
        total += w;
        for (int t = 0; t < T; ++t) out.gamma(t, path[t]) += w;
        for (int t = 0; t + 1 < T; ++t) out.xi_sum(path[t], path[t + 1]) += w;
    }
    out.loglik = std::log(total) + T * shift;
    out.gamma /= total;
    out.xi_sum /= total;
    return out;
}

inline fregime::hmm::HmmParams random_params(std::mt19937_64& rng, int K, int d,
                                             fregime::hmm::EmissionFamily family) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::normal_distribution<double> n(0.0, 1.0);
    fregime::hmm::HmmParams p;
    p.family = family;
    p.pi.resize(K);
    p.A.resize(K, K);
    p.nu.resize(K);
    for (int j = 0; j < K; ++j) {
        p.pi(j) = u(rng);
        for (int k = 0; k < K; ++k) p.A(j, k) = u(rng);
        p.A.row(j) /= p.A.row(j).sum();
        p.nu(j) = 2.5 + 20.0 * u(rng);
        p.mu.push_back(Eigen::VectorXd::NullaryExpr(d, [&]() { return n(rng); }));
        Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(d, d, [&]() { return n(rng); });
        p.sigma.push_back(b * b.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d));
    }
    p.pi /= p.pi.sum();
    return p;
}

}  // namespace oracle
