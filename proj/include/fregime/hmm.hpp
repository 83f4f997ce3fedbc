#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fregime/panel.hpp"

namespace fregime::hmm {

class DecompositionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class EmissionFamily { student_t, gaussian };

std::string to_string(EmissionFamily family);
EmissionFamily family_from_string(const std::string& name);

/// K-state HMM with multivariate Student-t or Gaussian emissions.
/// Locations are in percent, scales in percent squared.
struct HmmParams {
    Eigen::VectorXd pi;
    Eigen::MatrixXd A;  // row-stochastic, A(j, k) = P(z_t = k | z_{t-1} = j)
    std::vector<Eigen::VectorXd> mu;
    std::vector<Eigen::MatrixXd> sigma;
    Eigen::VectorXd nu;  // ignored for the gaussian family
    EmissionFamily family = EmissionFamily::student_t;

    int n_states() const { return static_cast<int>(pi.size()); }
    int dim() const { return mu.empty() ? 0 : static_cast<int>(mu.front().size()); }

    /// Throws std::invalid_argument if shapes or stochasticity constraints fail.
    void validate(double tol = 1e-9) const;
};

/// Log density of the multivariate Student-t with location mu, scale sigma
/// and nu degrees of freedom.
template <typename DerivedX, typename DerivedMu, typename DerivedSigma>
typename DerivedX::Scalar t_logpdf(const Eigen::MatrixBase<DerivedX>& x,
                                   const Eigen::MatrixBase<DerivedMu>& mu,
                                   const Eigen::MatrixBase<DerivedSigma>& sigma,
                                   typename DerivedX::Scalar nu) {
    using Scalar = typename DerivedX::Scalar;
    using std::lgamma;
    using std::log;
    const Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(sigma);
    if (llt.info() != Eigen::Success) throw DecompositionError("t_logpdf: scale matrix is not SPD");
    const Scalar d = static_cast<Scalar>(x.size());
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = llt.matrixL().solve((x - mu).eval());
    const Scalar delta = z.squaredNorm();
    const Scalar log_det = 2 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return lgamma((nu + d) / 2) - lgamma(nu / 2) - (d / 2) * log(nu * std::numbers::pi_v<Scalar>) -
           log_det / 2 - ((nu + d) / 2) * std::log1p(delta / nu);
}

template <typename DerivedX, typename DerivedMu, typename DerivedSigma>
typename DerivedX::Scalar gaussian_logpdf(const Eigen::MatrixBase<DerivedX>& x,
                                          const Eigen::MatrixBase<DerivedMu>& mu,
                                          const Eigen::MatrixBase<DerivedSigma>& sigma) {
    using Scalar = typename DerivedX::Scalar;
    using std::log;
    const Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(sigma);
    if (llt.info() != Eigen::Success) throw DecompositionError("gaussian_logpdf: covariance is not SPD");
    const Scalar d = static_cast<Scalar>(x.size());
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = llt.matrixL().solve((x - mu).eval());
    const Scalar log_det = 2 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -(d / 2) * log(2 * std::numbers::pi_v<Scalar>) - log_det / 2 - z.squaredNorm() / 2;
}

/// Per-observation emission log densities (T x K) and squared Mahalanobis
/// distances (T x K) of the rows of `x` under every state.
struct EmissionTerms {
    Eigen::MatrixXd log_density;
    Eigen::MatrixXd mahalanobis;
};
EmissionTerms emission_terms(const HmmParams& params, const Eigen::MatrixXd& x);

struct ForwardBackwardResult {
    double loglik = 0.0;
    Eigen::MatrixXd gamma;   // T x K smoothed posteriors
    Eigen::MatrixXd xi_sum;  // K x K summed pairwise posteriors
};

/// Scaled forward-backward recursion; exact observed-data log-likelihood.
ForwardBackwardResult forward_backward(const HmmParams& params, const Eigen::MatrixXd& x);
ForwardBackwardResult forward_backward(const HmmParams& params, const FactorPanel& panel);

/// Per-regime aggregates for the degrees-of-freedom update.
/// s1 = sum_t gamma_tk, s2 = sum_t gamma_tk (ln u_tk - u_tk), with u computed
/// at the current degrees of freedom `nu_current`.
struct NuStatistics {
    double s1 = 0.0;
    double s2 = 0.0;
    int dim = 1;
    double nu_current = 10.0;
};

inline constexpr double kNuLower = 2.1;
inline constexpr double kNuUpper = 200.0;

/// Score of the expected complete-data log-likelihood in nu; decreasing in nu.
double nu_score(double nu, const NuStatistics& stats);

/// Root of nu_score on [lower, upper] by bisection (tolerance 1e-8). Without a
/// sign change the bound with the smaller |score| is returned.
double solve_nu(const NuStatistics& stats, double lower = kNuLower, double upper = kNuUpper);

struct FitConfig {
    explicit FitConfig(std::uint64_t seed_) : seed(seed_) {}

    std::uint64_t seed;
    double tol = 1e-6;  // relative log-likelihood improvement
    int max_iters = 500;
    int n_restarts = 10;
    std::optional<double> fixed_nu;  // hold every nu at this value (student_t only)
    double nu_lower = kNuLower;
    double nu_upper = kNuUpper;
};

struct HmmFit {
    HmmParams params;
    double loglik = 0.0;
    double bic = 0.0;
    Eigen::MatrixXd gamma;
    std::vector<int> labels;
    int n_free_params = 0;

    std::vector<double> loglik_trace;  // best restart, one entry per E-step
    int iterations = 0;
    bool converged = false;
    int best_restart = 0;
    int n_restarts = 0;
    int failed_restarts = 0;
    std::uint64_t seed = 0;
};

int n_free_params(int n_states, int dim, EmissionFamily family);
double bic(double loglik, int n_params, Eigen::Index n_obs);

/// Quantile initialization (restart 0) or its randomized perturbation.
HmmParams initial_params(const Eigen::MatrixXd& x, int n_states, EmissionFamily family,
                         int restart, std::uint64_t seed);

/// EM from a given starting point; no restarts.
HmmFit em_run(const Eigen::MatrixXd& x, HmmParams init, const FitConfig& config);

/// Best-of-restarts EM fit. Throws EstimationError if every restart fails.
HmmFit em_fit(const FactorPanel& panel, int n_states, EmissionFamily family, const FitConfig& config);
HmmFit em_fit(const Eigen::MatrixXd& x, int n_states, EmissionFamily family, const FitConfig& config);

struct BicRow {
    int n_states = 0;
    bool ok = false;
    double loglik = 0.0;
    int n_params = 0;
    double bic = 0.0;
    std::string error;
};

struct KSelection {
    int best_k = 0;
    std::vector<BicRow> table;
    HmmFit best_fit;
};

/// Fits every K in [k_min, k_max] (within [1, 8]) with the same restart budget
/// and returns the BIC minimizer. Throws EstimationError if all fits fail.
KSelection select_k(const FactorPanel& panel, int k_min, int k_max, EmissionFamily family,
                    const FitConfig& config);

/// Relabels states so new state j is old state perm[j]; permutes every
/// state-indexed quantity consistently.
HmmFit permute_regimes(const HmmFit& fit, const std::vector<int>& perm);

/// Orders regimes by ascending mean volatility norm over their decoded days.
HmmFit order_regimes(const HmmFit& fit, const FactorPanel& panel);

/// Per-day argmax of smoothed posteriors; ties go to the lower index.
std::vector<int> argmax_labels(const Eigen::MatrixXd& gamma);
std::vector<int> decode(const HmmParams& params, const FactorPanel& panel);

}  // namespace fregime::hmm
