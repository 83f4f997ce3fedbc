#include "fregime/backtest.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace fregime::backtest {

Eigen::VectorXi strategy_signal(const Eigen::VectorXd& source, const std::vector<int>& labels, int crisis_index,
                                int window) {
    if (window < 1) throw std::invalid_argument("strategy_signal: window must be >= 1");
    if (static_cast<Eigen::Index>(labels.size()) != source.size()) {
        throw std::invalid_argument("strategy_signal: labels and series differ in length");
    }
    Eigen::VectorXi signal = Eigen::VectorXi::Zero(source.size());
    for (Eigen::Index t = window; t < source.size(); ++t) {
        if (labels[t] != crisis_index) continue;
        const double growth = (1.0 + source.segment(t - window, window).array() / 100.0).prod() - 1.0;
        signal(t) = growth > 0.0 ? 1 : (growth < 0.0 ? -1 : 0);
    }
    return signal;
}

Eigen::VectorXi shift_signal(const Eigen::VectorXi& signal, int days) {
    if (days < 0) throw std::invalid_argument("shift_signal: days must be >= 0");
    Eigen::VectorXi out = Eigen::VectorXi::Zero(signal.size());
    if (days < signal.size()) out.tail(signal.size() - days) = signal.head(signal.size() - days);
    return out;
}

Eigen::VectorXd apply_signal(const Eigen::VectorXi& signal, const Eigen::VectorXd& target) {
    if (signal.size() != target.size()) throw std::invalid_argument("apply_signal: length mismatch");
    return signal.cast<double>().cwiseProduct(target);
}

BacktestReport performance_metrics(const std::vector<Date>& dates, const Eigen::VectorXd& returns) {
    const Eigen::Index T = returns.size();
    if (T == 0) throw std::invalid_argument("performance_metrics: empty return series");
    if (static_cast<Eigen::Index>(dates.size()) != T) throw std::invalid_argument("performance_metrics: length mismatch");

    BacktestReport r;
    r.dates = dates;
    r.daily_returns = returns;
    r.n_active_days = (returns.array() != 0.0).count();

    const Eigen::ArrayXd growth = 1.0 + returns.array() / 100.0;
    const double log_wealth = growth.log().sum();
    r.annual_return = 100.0 * std::expm1(log_wealth * 252.0 / static_cast<double>(T));

    if (T > 1) {
        const double mean = returns.mean();
        const double var = (returns.array() - mean).square().sum() / static_cast<double>(T - 1);
        const double scale = returns.cwiseAbs().maxCoeff();
        if (std::sqrt(var) > 1e-12 * scale) r.sharpe = mean / std::sqrt(var) * std::sqrt(252.0);
    }

    double wealth = 1.0, peak = 1.0, worst = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        wealth *= growth(t);
        peak = std::max(peak, wealth);
        worst = std::min(worst, wealth / peak - 1.0);
    }
    r.max_drawdown = 100.0 * worst;
    return r;
}

BacktestReport run(const std::vector<Date>& dates, const Eigen::VectorXi& signal, const Eigen::VectorXd& target) {
    BacktestReport r = performance_metrics(dates, apply_signal(signal, target));
    r.n_active_days = (signal.array() != 0).count();
    return r;
}

namespace {

nlohmann::json report_json(const BacktestReport& r) {
    nlohmann::json j;
    j["annual_return"] = r.annual_return;
    j["sharpe"] = r.sharpe ? nlohmann::json(*r.sharpe) : nlohmann::json(nullptr);
    j["max_drawdown"] = r.max_drawdown;
    j["n_active_days"] = r.n_active_days;
    j["n_days"] = r.daily_returns.size();
    if (!r.dates.empty()) {
        j["start"] = format_iso(r.dates.front());
        j["end"] = format_iso(r.dates.back());
    }
    return j;
}

}  // namespace

void write_report_json(std::ostream& out, const BacktestReport& strategy, const BacktestReport& benchmark) {
    nlohmann::json j;
    j["strategy"] = report_json(strategy);
    j["buy_and_hold"] = report_json(benchmark);
    out << j.dump(2) << '\n';
}

void write_returns_csv(std::ostream& out, const BacktestReport& strategy, const BacktestReport& benchmark) {
    if (strategy.dates != benchmark.dates) throw std::invalid_argument("write_returns_csv: misaligned reports");
    out << "date,strategy,buy_and_hold\n";
    char buf[96];
    for (std::size_t t = 0; t < strategy.dates.size(); ++t) {
        const auto i = static_cast<Eigen::Index>(t);
        std::snprintf(buf, sizeof(buf), ",%.6f,%.6f\n", strategy.daily_returns(i) + 0.0,
                      benchmark.daily_returns(i) + 0.0);
        out << format_iso(strategy.dates[t]) << buf;
    }
}

}  // namespace fregime::backtest
