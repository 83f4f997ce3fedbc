#include "fregime/granger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fregime/numerics.hpp"

namespace fregime::granger {

namespace {

constexpr double kDefaultBonferroni = 0.01 / 30.0;

}  // namespace

Mask regime_lag_mask(const std::vector<int>& labels, int k, int lag) {
    if (lag < 1) throw std::invalid_argument("regime_lag_mask: lag must be >= 1");
    const auto T = static_cast<Eigen::Index>(labels.size());
    Mask mask = Mask::Constant(T, false);
    // run = length of the current run of label k ending at t
    int run = 0;
    for (Eigen::Index t = 0; t < T; ++t) {
        run = labels[t] == k ? run + 1 : 0;
        mask(t) = run >= lag + 1;
    }
    return mask;
}

Mask window_lag_mask(Eigen::Index length, Eigen::Index first, Eigen::Index last, int lag) {
    if (lag < 1) throw std::invalid_argument("window_lag_mask: lag must be >= 1");
    Mask mask = Mask::Constant(length, false);
    first = std::max<Eigen::Index>(first, 0);
    last = std::min<Eigen::Index>(last, length - 1);
    for (Eigen::Index t = first + lag; t <= last; ++t) mask(t) = true;
    return mask;
}

Design collect_design(const Eigen::VectorXd& y, const Eigen::VectorXd& x, int lag, const Mask& mask) {
    if (lag < 1) throw std::invalid_argument("build_design: lag must be >= 1");
    if (y.size() != x.size() || y.size() != mask.size()) {
        throw std::invalid_argument("build_design: series and mask must have equal length");
    }
    if (mask.head(std::min<Eigen::Index>(lag, mask.size())).any()) {
        throw std::invalid_argument("build_design: mask selects a row without a full lag history");
    }
    const Eigen::Index n = mask.count();
    Design d;
    d.lag = lag;
    d.y.resize(n);
    d.unrestricted.resize(n, 2 * lag + 1);
    Eigen::Index row = 0;
    for (Eigen::Index t = 0; t < mask.size(); ++t) {
        if (!mask(t)) continue;
        d.y(row) = y(t);
        d.unrestricted(row, 0) = 1.0;
        for (int l = 1; l <= lag; ++l) {
            d.unrestricted(row, l) = y(t - l);
            d.unrestricted(row, lag + l) = x(t - l);
        }
        ++row;
    }
    d.restricted = d.unrestricted.leftCols(lag + 1);
    return d;
}

Design build_design(const Eigen::VectorXd& y, const Eigen::VectorXd& x, int lag, const Mask& mask) {
    Design d = collect_design(y, x, lag, mask);
    if (d.rows() < min_design_rows(lag)) throw SampleSizeError(min_design_rows(lag), d.rows());
    return d;
}

Design stack_designs(const std::vector<Design>& parts) {
    if (parts.empty()) throw std::invalid_argument("stack_designs: nothing to stack");
    const int lag = parts.front().lag;
    Eigen::Index n = 0;
    for (const auto& p : parts) {
        if (p.lag != lag) throw std::invalid_argument("stack_designs: lag mismatch");
        n += p.rows();
    }
    Design d;
    d.lag = lag;
    d.y.resize(n);
    d.restricted.resize(n, lag + 1);
    d.unrestricted.resize(n, 2 * lag + 1);
    Eigen::Index row = 0;
    for (const auto& p : parts) {
        d.y.segment(row, p.rows()) = p.y;
        d.restricted.middleRows(row, p.rows()) = p.restricted;
        d.unrestricted.middleRows(row, p.rows()) = p.unrestricted;
        row += p.rows();
    }
    return d;
}

OlsResult ols_rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() < x.cols()) throw std::invalid_argument("ols_rss: fewer rows than columns");
    if (x.rows() != y.size()) throw std::invalid_argument("ols_rss: row count mismatch");
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::VectorXd beta = qr.solve(y);
    OlsResult out;
    out.rss = (y - x * beta).squaredNorm();
    out.rank = qr.rank();
    out.full_rank = out.rank == x.cols();
    return out;
}

GrangerResult f_test(const Design& design) {
    const int lag = design.lag;
    const Eigen::Index n = design.rows();
    const Eigen::Index df2 = n - 2 * lag - 1;
    if (df2 <= 0) throw SampleSizeError(2 * lag + 2, n);

    const OlsResult unrestricted = ols_rss(design.unrestricted, design.y);
    if (!unrestricted.full_rank) {
        throw DegenerateFitError("unrestricted design is rank deficient (rank " + std::to_string(unrestricted.rank) +
                                 " of " + std::to_string(design.unrestricted.cols()) + ")");
    }
    const OlsResult restricted = ols_rss(design.restricted, design.y);
    const double tss = (design.y.array() - design.y.mean()).square().sum();
    if (!(unrestricted.rss > 1e-24 * std::max(tss, 1e-300))) {
        throw DegenerateFitError("unrestricted model fits exactly (zero residual)");
    }

    GrangerResult r;
    r.lag = lag;
    r.n_obs = n;
    const double gain = std::max(0.0, restricted.rss - unrestricted.rss);
    r.f_stat = (gain / lag) / (unrestricted.rss / static_cast<double>(df2));
    r.p_value = numerics::f_sf(r.f_stat, {lag, static_cast<int>(df2)});
    r.r2_increment = tss > 0.0 ? (restricted.rss - unrestricted.rss) / tss : 0.0;
    r.significant_bonferroni = r.p_value < kDefaultBonferroni;
    return r;
}

GrangerResult granger_f_test(const Eigen::VectorXd& y, const Eigen::VectorXd& x, int lag, const Mask& mask) {
    return f_test(build_design(y, x, lag, mask));
}

LagSelection select_lag_bic(const Eigen::VectorXd& y, const Eigen::VectorXd& x, const MaskBuilder& masks,
                            int max_lag) {
    if (max_lag < 1) throw std::invalid_argument("select_lag_bic: max_lag must be >= 1");
    LagSelection out;
    std::optional<double> best_bic;
    Eigen::Index available = 0;
    for (int lag = 1; lag <= max_lag; ++lag) {
        LagBicRow row;
        row.lag = lag;
        const Mask mask = masks(lag);
        row.n_obs = mask.count();
        if (lag == 1) available = row.n_obs;
        try {
            const Design d = build_design(y, x, lag, mask);
            const OlsResult fit = ols_rss(d.unrestricted, d.y);
            if (fit.full_rank && fit.rss > 0.0) {
                const double n = static_cast<double>(d.rows());
                row.feasible = true;
                row.rss = fit.rss;
                row.bic = n * std::log(fit.rss / n) + (2.0 * lag + 1.0) * std::log(n);
                if (!best_bic || row.bic < *best_bic) {
                    best_bic = row.bic;
                    out.best_lag = lag;
                }
            }
        } catch (const SampleSizeError&) {
        }
        out.table.push_back(row);
    }
    if (!best_bic) throw SampleSizeError(min_design_rows(1), available);
    return out;
}

GrangerResult granger_with_bic_lag(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                                   const MaskBuilder& masks, int max_lag) {
    const LagSelection sel = select_lag_bic(y, x, masks, max_lag);
    return granger_f_test(y, x, sel.best_lag, masks(sel.best_lag));
}

std::vector<GrangerCell> pairwise_regime_matrix(const FactorPanel& panel, const std::vector<int>& labels,
                                                int n_regimes, int max_lag, double alpha) {
    const Eigen::Index d = panel.cols();
    if (d < 2) throw std::invalid_argument("pairwise_regime_matrix: need at least two factors");
    if (static_cast<Eigen::Index>(labels.size()) != panel.rows()) {
        throw std::invalid_argument("pairwise_regime_matrix: labels do not match panel");
    }
    const double threshold = alpha / static_cast<double>(d * (d - 1));

    std::vector<GrangerCell> cells;
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (i == j) continue;
            const Eigen::VectorXd x = panel.returns().col(i);
            const Eigen::VectorXd y = panel.returns().col(j);
            for (int k = 0; k < n_regimes; ++k) {
                GrangerCell cell{panel.factor_names()[i], panel.factor_names()[j], k, std::nullopt, {}};
                try {
                    auto masks = [&labels, k](int lag) { return regime_lag_mask(labels, k, lag); };
                    GrangerResult r = granger_with_bic_lag(y, x, masks, max_lag);
                    r.source = cell.source;
                    r.target = cell.target;
                    r.regime = k;
                    r.significant_bonferroni = r.p_value < threshold;
                    cell.result = r;
                } catch (const SampleSizeError& e) {
                    cell.error = e.what();
                } catch (const DegenerateFitError& e) {
                    cell.error = e.what();
                }
                cells.push_back(std::move(cell));
            }
        }
    }
    return cells;
}

void write_results_csv(std::ostream& out, const std::vector<GrangerCell>& cells) {
    out << "source,target,regime,lag,f_stat,p_value,n_obs,r2_increment,significant\n";
    char buf[256];
    for (const auto& c : cells) {
        const std::string regime = c.regime ? std::to_string(*c.regime) : "pooled";
        out << c.source << ',' << c.target << ',' << regime << ',';
        if (c.result) {
            const auto& r = *c.result;
            std::snprintf(buf, sizeof(buf), "%d,%.6f,%.5e,%lld,%.6f,%s", r.lag, r.f_stat, r.p_value,
                          static_cast<long long>(r.n_obs), r.r2_increment,
                          r.significant_bonferroni ? "true" : "false");
            out << buf << '\n';
        } else {
            out << "NA,NA,NA,NA,NA,false\n";
        }
    }
}

}  // namespace fregime::granger
