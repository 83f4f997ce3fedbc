#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <vector>

#include "fregime/date.hpp"

namespace fregime::backtest {

struct BacktestReport {
    std::vector<Date> dates;
    Eigen::VectorXd daily_returns;  // percent
    double annual_return = 0.0;     // percent, geometric
    std::optional<double> sharpe;   // annualized; none when variance is zero
    double max_drawdown = 0.0;      // percent, <= 0
    Eigen::Index n_active_days = 0;
};

/// +1/-1 by the sign of the compounded `source` return over the previous
/// `window` days, on days labelled `crisis_index`; 0 elsewhere.
Eigen::VectorXi strategy_signal(const Eigen::VectorXd& source, const std::vector<int>& labels, int crisis_index,
                                int window = 9);

/// Delays a position series by `days` (position[t] applied from t + days).
Eigen::VectorXi shift_signal(const Eigen::VectorXi& signal, int days);

/// strategy[t] = signal[t] * target[t].
Eigen::VectorXd apply_signal(const Eigen::VectorXi& signal, const Eigen::VectorXd& target);

/// Annualized (252-day) geometric return, sample-std Sharpe, and maximum
/// drawdown of the compounded wealth curve. n_active_days counts nonzero
/// returns.
BacktestReport performance_metrics(const std::vector<Date>& dates, const Eigen::VectorXd& returns);

/// apply_signal + performance_metrics, with n_active_days = nonzero positions.
BacktestReport run(const std::vector<Date>& dates, const Eigen::VectorXi& signal, const Eigen::VectorXd& target);

void write_report_json(std::ostream& out, const BacktestReport& strategy, const BacktestReport& benchmark);
void write_returns_csv(std::ostream& out, const BacktestReport& strategy, const BacktestReport& benchmark);

}  // namespace fregime::backtest
