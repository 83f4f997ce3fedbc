#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fregime/granger.hpp"
#include "fregime/panel.hpp"

namespace fregime::robustness {

/// Two-regime labels from realized volatility (rolling mean of the return
/// norm over `window` days): 1 = Crisis where strictly above the full-sample
/// `quantile` of the post-warm-up series, 0 = Normal otherwise.
std::vector<int> threshold_regimes(const FactorPanel& panel, int window = 21, double quantile = 0.90);

/// Rolling mean of the volatility norm; the first window - 1 entries are NaN.
Eigen::VectorXd realized_volatility(const FactorPanel& panel, int window);

struct LagSweepRow {
    int max_lag = 0;
    std::optional<int> selected_lag;
    std::optional<double> p_value;
    std::string error;
};

std::vector<LagSweepRow> lag_sweep(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                                   const granger::MaskBuilder& masks, const std::vector<int>& max_lags);

struct SubsampleSide {
    bool testable = false;
    Eigen::Index n_rows = 0;
    std::vector<granger::GrangerCell> cells;
    std::string note;
};

struct SubsampleSplit {
    SubsampleSide before;  // dates < split
    SubsampleSide after;   // dates >= split
};

/// Pairwise regime tests on each side of `split`, each with its own masks.
/// A side is untestable when it has no row labelled `crisis_index`.
SubsampleSplit subsample_split(const FactorPanel& panel, const std::vector<int>& labels, int n_regimes,
                               const Date& split, int crisis_index, int max_lag, double alpha);

struct TransitionTest {
    int n_transitions = 0;
    std::optional<granger::GrangerResult> before;
    std::optional<granger::GrangerResult> after;
    std::string error;
};

struct TransitionAnalysis {
    TransitionTest entry;
    TransitionTest exit;
};

/// Index of each crisis entry: first day of a run of >= min_run crisis labels
/// directly preceded by a non-crisis label.
std::vector<Eigen::Index> crisis_entries(const std::vector<int>& labels, int crisis_index, int min_run);
/// Index of the last day of each such run that is followed by a non-crisis label.
std::vector<Eigen::Index> crisis_exits(const std::vector<int>& labels, int crisis_index, int min_run);

/// Source -> target test on the `window` days before and after every crisis
/// entry (and exit), stacking the per-transition designs into one regression.
TransitionAnalysis transition_window_analysis(const FactorPanel& panel, const std::vector<int>& labels,
                                              int crisis_index, const std::string& source,
                                              const std::string& target, int lag = 9, int min_run = 5,
                                              int window = 60);

struct WeeklyAnalysis {
    Eigen::Index n_weeks = 0;
    Eigen::Index n_crisis_weeks = 0;
    std::optional<granger::GrangerResult> result;
    std::string error;
};

/// Compounds the panel to weeks, labels weeks by modal regime, and runs the
/// BIC-lag test on crisis weeks.
WeeklyAnalysis weekly_analysis(const FactorPanel& panel, const std::vector<int>& labels, int n_regimes,
                               int crisis_index, const std::string& source, const std::string& target,
                               int max_lag);

}  // namespace fregime::robustness
