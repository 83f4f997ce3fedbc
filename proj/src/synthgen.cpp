#include "fregime/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fregime/rng.hpp"

namespace fregime::synthgen {

namespace {

int draw_categorical(const Eigen::VectorXd& probs, double u) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
        acc += probs(k);
        if (u < acc) return static_cast<int>(k);
    }
    // rounding: fall back to the last state with positive mass
    for (Eigen::Index k = probs.size() - 1; k >= 0; --k) {
        if (probs(k) > 0.0) return static_cast<int>(k);
    }
    return 0;
}

}  // namespace

SyntheticPanel generate(const SyntheticSpec& spec) {
    const auto& p = spec.hmm;
    p.validate();
    if (spec.T < 1) throw std::invalid_argument("generate: T must be >= 1");
    if (!spec.start.ok()) throw std::invalid_argument("generate: invalid start date");
    const int K = p.n_states();
    const int d = p.dim();
    if (spec.cross_lag) {
        const auto& c = *spec.cross_lag;
        if (c.lag < 1 || !std::isfinite(c.coefficient) || c.source < 0 || c.source >= d || c.target < 0 ||
            c.target >= d) {
            throw std::invalid_argument("generate: invalid cross-lag specification");
        }
    }

    std::vector<std::string> names = spec.factor_names;
    if (names.empty()) {
        if (d == 6) {
            names = six_factor_names();
        } else {
            for (int j = 0; j < d; ++j) names.push_back("F" + std::to_string(j));
        }
    }

    std::vector<Eigen::MatrixXd> chol;
    for (int k = 0; k < K; ++k) {
        const Eigen::LLT<Eigen::MatrixXd> llt(p.sigma[k]);
        if (llt.info() != Eigen::Success) throw hmm::DecompositionError("generate: scale matrix is not SPD");
        chol.push_back(llt.matrixL());
    }

    auto rng = make_stream(spec.seed, kSynthgenStream);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    SyntheticPanel out;
    out.labels.resize(static_cast<std::size_t>(spec.T));
    Eigen::MatrixXd x(spec.T, d);
    for (Eigen::Index t = 0; t < spec.T; ++t) {
        const int state = t == 0 ? draw_categorical(p.pi, unif(rng))
                                 : draw_categorical(p.A.row(out.labels[t - 1]).transpose(), unif(rng));
        out.labels[t] = state;
        Eigen::VectorXd z(d);
        for (int j = 0; j < d; ++j) z(j) = normal(rng);
        Eigen::VectorXd draw = chol[state] * z;
        if (p.family == hmm::EmissionFamily::student_t) {
            const double nu = p.nu(state);
            std::gamma_distribution<double> chi2(nu / 2.0, 2.0);
            draw /= std::sqrt(chi2(rng) / nu);
        }
        x.row(t) = (p.mu[state] + draw).transpose();
    }
    if (spec.cross_lag) {
        const auto& c = *spec.cross_lag;
        const Eigen::VectorXd base_source = x.col(c.source);
        for (Eigen::Index t = c.lag; t < spec.T; ++t) {
            if (c.regime < 0 || out.labels[t] == c.regime) x(t, c.target) += c.coefficient * base_source(t - c.lag);
        }
    }

    std::vector<Date> dates;
    dates.reserve(static_cast<std::size_t>(spec.T));
    std::chrono::sys_days day{spec.start};
    while (static_cast<Eigen::Index>(dates.size()) < spec.T) {
        const std::chrono::weekday wd{day};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) dates.emplace_back(day);
        day += std::chrono::days{1};
    }
    out.panel = FactorPanel(std::move(dates), std::move(x), std::move(names));
    return out;
}

hmm::HmmParams table_like_params() {
    constexpr int d = 6;
    hmm::HmmParams p;
    p.family = hmm::EmissionFamily::student_t;
    p.pi = Eigen::Vector3d(0.4, 0.4, 0.2);
    p.A.resize(3, 3);
    p.A << 0.988, 0.010, 0.002,
           0.006, 0.991, 0.003,
           0.008, 0.024, 0.968;
    p.nu = Eigen::Vector3d(12.0, 7.0, 4.0);

    // Shared correlation structure; per-regime scales chosen so the mean
    // return-vector norm is close to 0.83 / 1.49 / 3.33.
    Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(d, d);
    corr(0, 1) = corr(1, 0) = 0.2;
    corr(0, 2) = corr(2, 0) = -0.1;
    corr(2, 4) = corr(4, 2) = 0.5;
    corr(2, 5) = corr(5, 2) = -0.3;
    corr(3, 4) = corr(4, 3) = 0.2;
    const double target_norm[3] = {0.83, 1.49, 3.33};
    for (int k = 0; k < 3; ++k) {
        const double nu = p.nu(k);
        // E||x|| ~= s * E[chi_d] * E[(W / nu)^-1/2], W ~ chi2(nu)
        const double chi_mean = std::sqrt(2.0) * std::exp(std::lgamma((d + 1) / 2.0) - std::lgamma(d / 2.0));
        const double mix = std::sqrt(nu / 2.0) * std::exp(std::lgamma((nu - 1.0) / 2.0) - std::lgamma(nu / 2.0));
        const double s = target_norm[k] / (chi_mean * mix);
        p.mu.push_back(Eigen::VectorXd::Constant(d, k == 2 ? -0.05 : 0.02));
        p.sigma.push_back(s * s * corr);
    }
    return p;
}

double label_accuracy(const std::vector<int>& estimated, const std::vector<int>& truth, int n_states) {
    if (estimated.size() != truth.size()) throw std::invalid_argument("label_accuracy: length mismatch");
    if (n_states < 1 || n_states > 8) throw std::invalid_argument("label_accuracy: K must be in [1, 8]");
    if (truth.empty()) return 1.0;
    // confusion(i, j) = #{t : estimated = i, truth = j}
    Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(n_states, n_states);
    for (std::size_t t = 0; t < truth.size(); ++t) {
        if (estimated[t] < 0 || estimated[t] >= n_states || truth[t] < 0 || truth[t] >= n_states) {
            throw std::out_of_range("label_accuracy: label outside [0, K)");
        }
        ++confusion(estimated[t], truth[t]);
    }
    std::vector<int> perm(static_cast<std::size_t>(n_states));
    std::iota(perm.begin(), perm.end(), 0);
    long best = 0;
    do {
        long agree = 0;
        for (int i = 0; i < n_states; ++i) agree += confusion(i, perm[i]);
        best = std::max(best, agree);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(truth.size());
}

}  // namespace fregime::synthgen
