#include "fregime/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fregime/numerics.hpp"
#include "fregime/rng.hpp"

namespace fregime::hmm {

namespace {

constexpr double kRidgeEps = 1e-8;
constexpr int kMaxRidgeAttempts = 3;

// Cholesky with escalating ridge eps * trace / d; throws after three failures.
Eigen::MatrixXd regularize_spd(Eigen::MatrixXd sigma) {
    sigma = (0.5 * (sigma + sigma.transpose())).eval();
    if (Eigen::LLT<Eigen::MatrixXd>(sigma).info() == Eigen::Success) return sigma;
    const double d = static_cast<double>(sigma.rows());
    const double base = sigma.trace() / d;
    if (!(base > 0.0) || !std::isfinite(base)) throw EstimationError("degenerate covariance (zero variance)");
    double eps = kRidgeEps;
    for (int attempt = 0; attempt < kMaxRidgeAttempts; ++attempt, eps *= 100.0) {
        Eigen::MatrixXd ridged = sigma;
        ridged.diagonal().array() += eps * base;
        if (Eigen::LLT<Eigen::MatrixXd>(ridged).info() == Eigen::Success) return ridged;
    }
    throw EstimationError("covariance update not positive definite after ridge regularization");
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    return centered.transpose() * centered / std::max<double>(1.0, static_cast<double>(x.rows()));
}

}  // namespace

std::string to_string(EmissionFamily family) {
    return family == EmissionFamily::student_t ? "student-t" : "gaussian";
}

EmissionFamily family_from_string(const std::string& name) {
    if (name == "student-t" || name == "student_t" || name == "t") return EmissionFamily::student_t;
    if (name == "gaussian" || name == "normal") return EmissionFamily::gaussian;
    throw std::invalid_argument("unknown emission family '" + name + "'");
}

void HmmParams::validate(double tol) const {
    const auto k = pi.size();
    if (k < 1) throw std::invalid_argument("HmmParams: no states");
    if (A.rows() != k || A.cols() != k) throw std::invalid_argument("HmmParams: A must be K x K");
    if (static_cast<Eigen::Index>(mu.size()) != k || static_cast<Eigen::Index>(sigma.size()) != k) {
        throw std::invalid_argument("HmmParams: need one location and scale per state");
    }
    if (family == EmissionFamily::student_t && nu.size() != k) {
        throw std::invalid_argument("HmmParams: need one nu per state");
    }
    if ((pi.array() < 0.0).any() || std::abs(pi.sum() - 1.0) > tol) {
        throw std::invalid_argument("HmmParams: pi is not a probability vector");
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        if ((A.row(j).array() < 0.0).any() || std::abs(A.row(j).sum() - 1.0) > tol) {
            throw std::invalid_argument("HmmParams: A is not row-stochastic");
        }
    }
    const auto d = mu.front().size();
    for (Eigen::Index s = 0; s < k; ++s) {
        if (mu[s].size() != d || sigma[s].rows() != d || sigma[s].cols() != d) {
            throw std::invalid_argument("HmmParams: inconsistent dimensions");
        }
        if (family == EmissionFamily::student_t && !(nu[s] > 2.0)) {
            throw std::invalid_argument("HmmParams: nu must exceed 2");
        }
    }
}

EmissionTerms emission_terms(const HmmParams& params, const Eigen::MatrixXd& x) {
    const int k_states = params.n_states();
    const double d = static_cast<double>(x.cols());
    if (x.cols() != params.dim()) throw std::invalid_argument("emission_terms: dimension mismatch");

    EmissionTerms out{Eigen::MatrixXd(x.rows(), k_states), Eigen::MatrixXd(x.rows(), k_states)};
    for (int k = 0; k < k_states; ++k) {
        const Eigen::LLT<Eigen::MatrixXd> llt(params.sigma[k]);
        if (llt.info() != Eigen::Success) throw DecompositionError("emission_terms: scale matrix is not SPD");
        const Eigen::MatrixXd centered = (x.rowwise() - params.mu[k].transpose()).transpose();
        const Eigen::MatrixXd z = llt.matrixL().solve(centered);
        const Eigen::VectorXd delta = z.colwise().squaredNorm().transpose();
        const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        out.mahalanobis.col(k) = delta;
        if (params.family == EmissionFamily::student_t) {
            const double nu = params.nu[k];
            const double c = std::lgamma((nu + d) / 2.0) - std::lgamma(nu / 2.0) -
                             (d / 2.0) * std::log(nu * std::numbers::pi) - log_det / 2.0;
            out.log_density.col(k) = c - ((nu + d) / 2.0) * (delta.array() / nu).log1p();
        } else {
            const double c = -(d / 2.0) * std::log(2.0 * std::numbers::pi) - log_det / 2.0;
            out.log_density.col(k) = c - delta.array() / 2.0;
        }
    }
    return out;
}

namespace {

ForwardBackwardResult forward_backward_from_log_density(const HmmParams& params,
                                                        const Eigen::MatrixXd& log_b) {
    const Eigen::Index T = log_b.rows();
    const Eigen::Index K = log_b.cols();
    if (T == 0) throw std::invalid_argument("forward_backward: empty sample");
    if (!log_b.allFinite()) throw EstimationError("forward_backward: non-finite emission density");

    // b(t, k) = exp(log_b(t, k) - m_t), scaled so the per-row maximum is 1.
    const Eigen::VectorXd row_max = log_b.rowwise().maxCoeff();
    const Eigen::MatrixXd b = (log_b.colwise() - row_max).array().exp().matrix();

    Eigen::MatrixXd alpha(T, K);
    Eigen::VectorXd scale(T);
    alpha.row(0) = params.pi.transpose().cwiseProduct(b.row(0));
    for (Eigen::Index t = 0;; ++t) {
        scale(t) = alpha.row(t).sum();
        if (!(scale(t) > 0.0) || !std::isfinite(scale(t))) {
            throw EstimationError("forward_backward: likelihood underflow at t=" + std::to_string(t));
        }
        alpha.row(t) /= scale(t);
        if (t + 1 == T) break;
        alpha.row(t + 1) = (alpha.row(t) * params.A).cwiseProduct(b.row(t + 1));
    }

    Eigen::MatrixXd beta(T, K);
    beta.row(T - 1).setOnes();
    for (Eigen::Index t = T - 2; t >= 0; --t) {
        const Eigen::RowVectorXd weighted = b.row(t + 1).cwiseProduct(beta.row(t + 1));
        beta.row(t) = (params.A * weighted.transpose()).transpose() / scale(t + 1);
    }

    ForwardBackwardResult out;
    out.loglik = scale.array().log().sum() + row_max.sum();
    if (!std::isfinite(out.loglik)) throw EstimationError("forward_backward: non-finite log-likelihood");
    out.gamma = alpha.cwiseProduct(beta);
    for (Eigen::Index t = 0; t < T; ++t) out.gamma.row(t) /= out.gamma.row(t).sum();

    out.xi_sum = Eigen::MatrixXd::Zero(K, K);
    for (Eigen::Index t = 0; t + 1 < T; ++t) {
        const Eigen::RowVectorXd weighted = b.row(t + 1).cwiseProduct(beta.row(t + 1)) / scale(t + 1);
        out.xi_sum += (alpha.row(t).transpose() * weighted).cwiseProduct(params.A);
    }
    return out;
}

}  // namespace

ForwardBackwardResult forward_backward(const HmmParams& params, const Eigen::MatrixXd& x) {
    return forward_backward_from_log_density(params, emission_terms(params, x).log_density);
}

ForwardBackwardResult forward_backward(const HmmParams& params, const FactorPanel& panel) {
    return forward_backward(params, panel.returns());
}

double nu_score(double nu, const NuStatistics& stats) {
    const double d = stats.dim;
    const double half_old = (stats.nu_current + d) / 2.0;
    return -numerics::digamma(nu / 2.0) + std::log(nu / 2.0) + 1.0 + stats.s2 / stats.s1 +
           numerics::digamma(half_old) - std::log(half_old);
}

double solve_nu(const NuStatistics& stats, double lower, double upper) {
    if (!(stats.s1 > 0.0)) throw std::invalid_argument("solve_nu: s1 must be positive");
    double g_lo = nu_score(lower, stats);
    const double g_hi = nu_score(upper, stats);
    if ((g_lo > 0.0) == (g_hi > 0.0) || g_lo == 0.0 || g_hi == 0.0) {
        if (g_lo == 0.0) return lower;
        if (g_hi == 0.0) return upper;
        return std::abs(g_lo) <= std::abs(g_hi) ? lower : upper;
    }
    double lo = lower, hi = upper;
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = nu_score(mid, stats);
        if ((g_mid > 0.0) == (g_lo > 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

int n_free_params(int n_states, int dim, EmissionFamily family) {
    const int k = n_states;
    const int d = dim;
    const int base = (k - 1) + k * (k - 1) + k * d + k * d * (d + 1) / 2;
    return family == EmissionFamily::student_t ? base + k : base;
}

double bic(double loglik, int n_params, Eigen::Index n_obs) {
    return -2.0 * loglik + n_params * std::log(static_cast<double>(n_obs));
}

HmmParams initial_params(const Eigen::MatrixXd& x, int n_states, EmissionFamily family, int restart,
                         std::uint64_t seed) {
    const Eigen::Index T = x.rows();
    const Eigen::Index d = x.cols();
    const int K = n_states;
    if (K < 1) throw std::invalid_argument("initial_params: need at least one state");
    if (T < K) throw std::invalid_argument("initial_params: fewer observations than states");

    const Eigen::VectorXd norms = x.rowwise().norm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(T));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return norms(a) < norms(b); });

    auto rng = make_stream(seed, kHmmRestartStreamBase + static_cast<std::uint64_t>(restart));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Cut fractions: equal quantile groups, jittered on restarts > 0.
    std::vector<double> cuts(static_cast<std::size_t>(K + 1));
    for (int k = 0; k <= K; ++k) cuts[k] = static_cast<double>(k) / K;
    if (restart > 0) {
        for (int k = 1; k < K; ++k) cuts[k] += 0.4 / K * unif(rng);
        std::sort(cuts.begin() + 1, cuts.end() - 1);
    }

    const Eigen::MatrixXd pooled = sample_covariance(x);
    const Eigen::Index min_group = std::max<Eigen::Index>(d + 2, T / (20 * K));

    HmmParams p;
    p.family = family;
    p.pi = Eigen::VectorXd::Constant(K, 1.0 / K);
    p.A = Eigen::MatrixXd::Constant(K, K, K > 1 ? 0.05 / (K - 1) : 0.0);
    p.A.diagonal().setConstant(K > 1 ? 0.95 : 1.0);
    p.nu = Eigen::VectorXd::Constant(K, 10.0);

    for (int k = 0; k < K; ++k) {
        auto begin = static_cast<Eigen::Index>(std::floor(cuts[k] * T));
        auto end = static_cast<Eigen::Index>(std::floor(cuts[k + 1] * T));
        if (k == K - 1) end = T;
        if (end - begin < min_group) {
            const Eigen::Index centre = (begin + end) / 2;
            begin = std::clamp<Eigen::Index>(centre - min_group / 2, 0, std::max<Eigen::Index>(0, T - min_group));
            end = std::min(T, begin + min_group);
        }
        Eigen::MatrixXd group(end - begin, d);
        for (Eigen::Index i = begin; i < end; ++i) group.row(i - begin) = x.row(order[i]);

        Eigen::VectorXd mean = group.colwise().mean().transpose();
        Eigen::MatrixXd cov = sample_covariance(group);
        if (Eigen::LLT<Eigen::MatrixXd>(cov).info() != Eigen::Success || group.rows() <= d) {
            cov = 0.5 * cov + 0.5 * pooled;
        }
        if (restart > 0) {
            for (Eigen::Index j = 0; j < d; ++j) mean(j) += 0.25 * std::sqrt(cov(j, j)) * normal(rng);
        }
        p.mu.push_back(mean);
        p.sigma.push_back(regularize_spd(cov));
    }
    return p;
}

namespace {

void m_step(HmmParams& p, const Eigen::MatrixXd& x, const ForwardBackwardResult& fb,
            const Eigen::MatrixXd& mahalanobis, const FitConfig& config, const Eigen::MatrixXd& pooled) {
    const int K = p.n_states();
    const double d = static_cast<double>(x.cols());

    p.pi = fb.gamma.row(0).transpose();
    p.pi /= p.pi.sum();
    for (int j = 0; j < K; ++j) {
        const double row = fb.xi_sum.row(j).sum();
        if (row > 0.0) p.A.row(j) = fb.xi_sum.row(j) / row;
    }

    for (int k = 0; k < K; ++k) {
        const Eigen::VectorXd w = fb.gamma.col(k);
        const double s1 = w.sum();
        Eigen::VectorXd u = Eigen::VectorXd::Ones(x.rows());
        if (p.family == EmissionFamily::student_t) {
            const double nu = p.nu[k];
            u = ((nu + d) / (nu + mahalanobis.col(k).array())).matrix();
        }
        const Eigen::VectorXd wu = w.cwiseProduct(u);
        const double swu = wu.sum();
        if (!(swu > 0.0)) throw EstimationError("regime " + std::to_string(k) + " has no posterior mass");

        p.mu[k] = x.transpose() * wu / swu;
        const Eigen::MatrixXd centered = x.rowwise() - p.mu[k].transpose();
        Eigen::MatrixXd sigma = centered.transpose() * wu.asDiagonal() * centered / s1;
        if (s1 < d + 1.0) {
            // Too little mass for a full-rank scale: shrink toward the pooled covariance.
            const double shrink = (d + 1.0 - s1) / (d + 1.0);
            sigma = (1.0 - shrink) * sigma + shrink * pooled;
        }
        p.sigma[k] = regularize_spd(sigma);

        if (p.family == EmissionFamily::student_t) {
            if (config.fixed_nu) {
                p.nu[k] = *config.fixed_nu;
            } else {
                NuStatistics stats;
                stats.s1 = s1;
                stats.s2 = w.dot((u.array().log() - u.array()).matrix());
                stats.dim = static_cast<int>(d);
                stats.nu_current = p.nu[k];
                p.nu[k] = solve_nu(stats, config.nu_lower, config.nu_upper);
            }
        }
    }
}

}  // namespace

HmmFit em_run(const Eigen::MatrixXd& x, HmmParams params, const FitConfig& config) {
    params.validate();
    if (params.family == EmissionFamily::student_t && config.fixed_nu) {
        params.nu.setConstant(*config.fixed_nu);
    }
    const Eigen::MatrixXd pooled = sample_covariance(x);

    HmmFit fit;
    fit.seed = config.seed;
    ForwardBackwardResult fb;
    double prev = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < std::max(1, config.max_iters); ++iter) {
        const EmissionTerms terms = emission_terms(params, x);
        fb = forward_backward_from_log_density(params, terms.log_density);
        fit.loglik_trace.push_back(fb.loglik);
        fit.iterations = iter + 1;
        if (iter > 0 && (fb.loglik - prev) < config.tol * std::abs(prev)) {
            fit.converged = true;
            break;
        }
        prev = fb.loglik;
        if (iter + 1 == config.max_iters) break;
        m_step(params, x, fb, terms.mahalanobis, config, pooled);
    }

    fit.params = std::move(params);
    fit.loglik = fb.loglik;
    fit.gamma = std::move(fb.gamma);
    fit.labels = argmax_labels(fit.gamma);
    fit.n_free_params = n_free_params(fit.params.n_states(), fit.params.dim(), fit.params.family);
    fit.bic = bic(fit.loglik, fit.n_free_params, x.rows());
    return fit;
}

HmmFit em_fit(const Eigen::MatrixXd& x, int n_states, EmissionFamily family, const FitConfig& config) {
    if (n_states < 1) throw std::invalid_argument("em_fit: K must be >= 1");
    if (x.rows() <= 10 * n_states) throw std::invalid_argument("em_fit: need T > 10 K observations");

    const int restarts = std::max(1, config.n_restarts);
    std::optional<HmmFit> best;
    int failed = 0;
    std::string last_error;
    for (int r = 0; r < restarts; ++r) {
        try {
            HmmFit fit = em_run(x, initial_params(x, n_states, family, r, config.seed), config);
            fit.best_restart = r;
            if (!best || fit.loglik > best->loglik) best = std::move(fit);
        } catch (const EstimationError& e) {
            ++failed;
            last_error = e.what();
        } catch (const DecompositionError& e) {
            ++failed;
            last_error = e.what();
        }
    }
    if (!best) throw EstimationError("all EM restarts failed: " + last_error);
    best->n_restarts = restarts;
    best->failed_restarts = failed;
    return *std::move(best);
}

HmmFit em_fit(const FactorPanel& panel, int n_states, EmissionFamily family, const FitConfig& config) {
    return em_fit(panel.returns(), n_states, family, config);
}

KSelection select_k(const FactorPanel& panel, int k_min, int k_max, EmissionFamily family,
                    const FitConfig& config) {
    if (k_min < 1 || k_max > 8 || k_min > k_max) throw std::invalid_argument("select_k: range must lie in [1, 8]");
    KSelection out;
    std::optional<HmmFit> best;
    for (int k = k_min; k <= k_max; ++k) {
        BicRow row;
        row.n_states = k;
        try {
            HmmFit fit = em_fit(panel, k, family, config);
            row.ok = true;
            row.loglik = fit.loglik;
            row.n_params = fit.n_free_params;
            row.bic = fit.bic;
            if (!best || fit.bic < best->bic) {
                best = std::move(fit);
                out.best_k = k;
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        out.table.push_back(std::move(row));
    }
    if (!best) throw EstimationError("select_k: every candidate K failed");
    out.best_fit = *std::move(best);
    return out;
}

HmmFit permute_regimes(const HmmFit& fit, const std::vector<int>& perm) {
    const int K = fit.params.n_states();
    if (static_cast<int>(perm.size()) != K) throw std::invalid_argument("permute_regimes: wrong permutation size");
    std::vector<int> inverse(static_cast<std::size_t>(K), -1);
    for (int j = 0; j < K; ++j) {
        if (perm[j] < 0 || perm[j] >= K || inverse[perm[j]] != -1) {
            throw std::invalid_argument("permute_regimes: not a permutation");
        }
        inverse[perm[j]] = j;
    }
    HmmFit out = fit;
    auto& p = out.params;
    const auto& q = fit.params;
    for (int j = 0; j < K; ++j) {
        p.pi(j) = q.pi(perm[j]);
        for (int k = 0; k < K; ++k) p.A(j, k) = q.A(perm[j], perm[k]);
        p.mu[j] = q.mu[perm[j]];
        p.sigma[j] = q.sigma[perm[j]];
        if (q.nu.size() == K) p.nu(j) = q.nu(perm[j]);
        out.gamma.col(j) = fit.gamma.col(perm[j]);
    }
    for (auto& label : out.labels) label = inverse[label];
    return out;
}

HmmFit order_regimes(const HmmFit& fit, const FactorPanel& panel) {
    const int K = fit.params.n_states();
    if (static_cast<Eigen::Index>(fit.labels.size()) != panel.rows()) {
        throw std::invalid_argument("order_regimes: labels do not match panel");
    }
    const Eigen::VectorXd norms = volatility_norm(panel).values;
    std::vector<double> sum(static_cast<std::size_t>(K), 0.0);
    std::vector<int> count(static_cast<std::size_t>(K), 0);
    for (std::size_t t = 0; t < fit.labels.size(); ++t) {
        sum[fit.labels[t]] += norms(static_cast<Eigen::Index>(t));
        ++count[fit.labels[t]];
    }
    std::vector<double> mean(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        mean[k] = count[k] > 0 ? sum[k] / count[k] : std::numeric_limits<double>::infinity();
    }
    std::vector<int> perm(static_cast<std::size_t>(K));
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return mean[a] < mean[b]; });
    return permute_regimes(fit, perm);
}

std::vector<int> argmax_labels(const Eigen::MatrixXd& gamma) {
    std::vector<int> labels(static_cast<std::size_t>(gamma.rows()));
    for (Eigen::Index t = 0; t < gamma.rows(); ++t) {
        Eigen::Index best = 0;
        gamma.row(t).maxCoeff(&best);  // first maximal index
        labels[t] = static_cast<int>(best);
    }
    return labels;
}

std::vector<int> decode(const HmmParams& params, const FactorPanel& panel) {
    return argmax_labels(forward_backward(params, panel).gamma);
}

}  // namespace fregime::hmm
