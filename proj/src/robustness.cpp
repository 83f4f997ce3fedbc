#include "fregime/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fregime::robustness {

Eigen::VectorXd realized_volatility(const FactorPanel& panel, int window) {
    if (window < 1) throw std::invalid_argument("realized_volatility: window must be >= 1");
    const Eigen::VectorXd norm = volatility_norm(panel).values;
    Eigen::VectorXd out = Eigen::VectorXd::Constant(norm.size(), std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    for (Eigen::Index t = 0; t < norm.size(); ++t) {
        sum += norm(t);
        if (t >= window) sum -= norm(t - window);
        if (t + 1 >= window) out(t) = sum / window;
    }
    return out;
}

std::vector<int> threshold_regimes(const FactorPanel& panel, int window, double quantile) {
    if (panel.rows() <= window) throw std::invalid_argument("threshold_regimes: need T > window");
    if (!(quantile > 0.0 && quantile < 1.0)) throw std::invalid_argument("threshold_regimes: quantile in (0, 1)");
    const Eigen::VectorXd rv = realized_volatility(panel, window);
    const Eigen::VectorXd tail = rv.tail(rv.size() - (window - 1));

    std::vector<double> sorted(tail.data(), tail.data() + tail.size());
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> labels(static_cast<std::size_t>(panel.rows()), 0);
    if (sorted.front() == sorted.back()) return labels;

    // Linear interpolation between order statistics.
    const double h = quantile * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double threshold = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    for (Eigen::Index t = window - 1; t < rv.size(); ++t) labels[t] = rv(t) > threshold ? 1 : 0;
    return labels;
}

std::vector<LagSweepRow> lag_sweep(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                                   const granger::MaskBuilder& masks, const std::vector<int>& max_lags) {
    std::vector<LagSweepRow> rows;
    for (int max_lag : max_lags) {
        if (max_lag < 1) throw std::invalid_argument("lag_sweep: max lag values must be >= 1");
        LagSweepRow row;
        row.max_lag = max_lag;
        try {
            const auto sel = granger::select_lag_bic(y, x, masks, max_lag);
            const auto r = granger::granger_f_test(y, x, sel.best_lag, masks(sel.best_lag));
            row.selected_lag = sel.best_lag;
            row.p_value = r.p_value;
        } catch (const granger::SampleSizeError& e) {
            row.error = e.what();
        } catch (const granger::DegenerateFitError& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

namespace {

SubsampleSide run_side(const FactorPanel& panel, const std::vector<int>& labels,
                       const std::vector<Eigen::Index>& rows, int n_regimes, int crisis_index, int max_lag,
                       double alpha) {
    SubsampleSide side;
    side.n_rows = static_cast<Eigen::Index>(rows.size());
    std::vector<int> sub_labels;
    sub_labels.reserve(rows.size());
    for (auto r : rows) sub_labels.push_back(labels[r]);
    if (std::find(sub_labels.begin(), sub_labels.end(), crisis_index) == sub_labels.end()) {
        side.note = "no crisis days";
        return side;
    }
    side.testable = true;
    side.cells = granger::pairwise_regime_matrix(select_rows(panel, rows), sub_labels, n_regimes, max_lag, alpha);
    return side;
}

}  // namespace

SubsampleSplit subsample_split(const FactorPanel& panel, const std::vector<int>& labels, int n_regimes,
                               const Date& split, int crisis_index, int max_lag, double alpha) {
    if (static_cast<Eigen::Index>(labels.size()) != panel.rows()) {
        throw std::invalid_argument("subsample_split: labels do not match panel");
    }
    std::vector<Eigen::Index> before, after;
    for (Eigen::Index t = 0; t < panel.rows(); ++t) (panel.dates()[t] < split ? before : after).push_back(t);
    return {run_side(panel, labels, before, n_regimes, crisis_index, max_lag, alpha),
            run_side(panel, labels, after, n_regimes, crisis_index, max_lag, alpha)};
}

std::vector<Eigen::Index> crisis_entries(const std::vector<int>& labels, int crisis_index, int min_run) {
    std::vector<Eigen::Index> out;
    const auto T = static_cast<Eigen::Index>(labels.size());
    for (Eigen::Index t = 1; t < T; ++t) {
        if (labels[t] != crisis_index || labels[t - 1] == crisis_index) continue;
        Eigen::Index run = 0;
        while (t + run < T && labels[t + run] == crisis_index) ++run;
        if (run >= min_run) out.push_back(t);
    }
    return out;
}

std::vector<Eigen::Index> crisis_exits(const std::vector<int>& labels, int crisis_index, int min_run) {
    std::vector<Eigen::Index> out;
    const auto T = static_cast<Eigen::Index>(labels.size());
    for (Eigen::Index t = 0; t + 1 < T; ++t) {
        if (labels[t] != crisis_index || labels[t + 1] == crisis_index) continue;
        Eigen::Index run = 0;
        while (t - run >= 0 && labels[t - run] == crisis_index) ++run;
        if (run >= min_run) out.push_back(t);
    }
    return out;
}

namespace {

// Stacked test over [first, last] index intervals with lags inside each interval.
std::optional<granger::GrangerResult> pooled_window_test(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                                                         const std::vector<std::pair<Eigen::Index, Eigen::Index>>& spans,
                                                         int lag, std::string& error) {
    std::vector<granger::Design> parts;
    for (const auto& [first, last] : spans) {
        const granger::Mask mask = granger::window_lag_mask(y.size(), first, last, lag);
        if (mask.count() == 0) continue;
        granger::Design d = granger::collect_design(y, x, lag, mask);
        parts.push_back(std::move(d));
    }
    if (parts.empty()) {
        error = "no usable transition windows";
        return std::nullopt;
    }
    const granger::Design stacked = granger::stack_designs(parts);
    if (stacked.rows() < granger::min_design_rows(lag)) {
        error = granger::SampleSizeError(granger::min_design_rows(lag), stacked.rows()).what();
        return std::nullopt;
    }
    try {
        return granger::f_test(stacked);
    } catch (const std::exception& e) {
        error = e.what();
        return std::nullopt;
    }
}

TransitionTest transition_test(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                               const std::vector<std::pair<Eigen::Index, Eigen::Index>>& before,
                               const std::vector<std::pair<Eigen::Index, Eigen::Index>>& after, int n, int lag) {
    TransitionTest out;
    out.n_transitions = n;
    if (n == 0) return out;
    std::string err_before, err_after;
    out.before = pooled_window_test(y, x, before, lag, err_before);
    out.after = pooled_window_test(y, x, after, lag, err_after);
    if (!err_before.empty()) out.error = "before: " + err_before;
    if (!err_after.empty()) out.error += (out.error.empty() ? "" : "; ") + std::string("after: ") + err_after;
    return out;
}

}  // namespace

TransitionAnalysis transition_window_analysis(const FactorPanel& panel, const std::vector<int>& labels,
                                              int crisis_index, const std::string& source,
                                              const std::string& target, int lag, int min_run, int window) {
    if (static_cast<Eigen::Index>(labels.size()) != panel.rows()) {
        throw std::invalid_argument("transition_window_analysis: labels do not match panel");
    }
    const Eigen::VectorXd x = panel.column(source);
    const Eigen::VectorXd y = panel.column(target);
    const Eigen::Index T = panel.rows();

    using Span = std::pair<Eigen::Index, Eigen::Index>;
    std::vector<Span> entry_before, entry_after, exit_before, exit_after;
    const auto entries = crisis_entries(labels, crisis_index, min_run);
    for (auto s : entries) {
        entry_before.emplace_back(std::max<Eigen::Index>(0, s - window), s - 1);
        entry_after.emplace_back(s, std::min(T - 1, s + window - 1));
    }
    const auto exits = crisis_exits(labels, crisis_index, min_run);
    for (auto e : exits) {
        exit_before.emplace_back(std::max<Eigen::Index>(0, e - window + 1), e);
        exit_after.emplace_back(e + 1, std::min(T - 1, e + window));
    }
    TransitionAnalysis out;
    out.entry = transition_test(y, x, entry_before, entry_after, static_cast<int>(entries.size()), lag);
    out.exit = transition_test(y, x, exit_before, exit_after, static_cast<int>(exits.size()), lag);
    return out;
}

WeeklyAnalysis weekly_analysis(const FactorPanel& panel, const std::vector<int>& labels, int n_regimes,
                               int crisis_index, const std::string& source, const std::string& target,
                               int max_lag) {
    WeeklyAnalysis out;
    const FactorPanel weekly = weekly_aggregate(panel);
    const std::vector<int> week_labels = weekly_labels(panel.dates(), labels, n_regimes);
    out.n_weeks = weekly.rows();
    out.n_crisis_weeks = std::count(week_labels.begin(), week_labels.end(), crisis_index);
    try {
        auto masks = [&](int lag) { return granger::regime_lag_mask(week_labels, crisis_index, lag); };
        auto r = granger::granger_with_bic_lag(weekly.column(target), weekly.column(source), masks, max_lag);
        r.source = source;
        r.target = target;
        r.regime = crisis_index;
        out.result = r;
    } catch (const granger::SampleSizeError& e) {
        out.error = e.what();
    } catch (const granger::DegenerateFitError& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace fregime::robustness
