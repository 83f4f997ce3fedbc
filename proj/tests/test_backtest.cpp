#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fregime/backtest.hpp"

using namespace fregime;
using namespace fregime::backtest;

namespace {

std::vector<Date> days(Eigen::Index n) {
    std::vector<Date> out;
    std::chrono::sys_days d{Date{std::chrono::year{2001}, std::chrono::January, std::chrono::day{1}}};
    for (Eigen::Index i = 0; i < n; ++i) out.emplace_back(d + std::chrono::days{i});
    return out;
}

}  // namespace

TEST(Metrics, ConstantReturnClosedForm) {
    const Eigen::VectorXd r = Eigen::VectorXd::Constant(252, 0.03);
    const auto m = performance_metrics(days(252), r);
    EXPECT_NEAR(m.annual_return, 100.0 * (std::pow(1.0003, 252) - 1.0), 1e-9);
    EXPECT_NEAR(m.annual_return, 7.85, 0.01);
    EXPECT_FALSE(m.sharpe);
    EXPECT_EQ(m.max_drawdown, 0.0);
    EXPECT_EQ(m.n_active_days, 252);
}

TEST(Metrics, UpThenDownDrawdown) {
    Eigen::VectorXd r(2);
    r << 10.0, -10.0;
    const auto m = performance_metrics(days(2), r);
    EXPECT_NEAR(m.max_drawdown, -10.0, 1e-12);
    EXPECT_NEAR(m.annual_return, 100.0 * (std::pow(0.99, 126.0) - 1.0), 1e-9);
    ASSERT_TRUE(m.sharpe);
    EXPECT_DOUBLE_EQ(*m.sharpe, 0.0);
}

TEST(Metrics, NonNegativeReturnsHaveNoDrawdown) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const Eigen::VectorXd r = Eigen::VectorXd::NullaryExpr(500, [&]() { return u(rng); });
    EXPECT_EQ(performance_metrics(days(500), r).max_drawdown, 0.0);
}

TEST(Metrics, SharpeIsScaleInvariantAndDrawdownBounded) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.05, 1.0);
    const Eigen::VectorXd r = Eigen::VectorXd::NullaryExpr(1000, [&]() { return n(rng); });
    const auto a = performance_metrics(days(1000), r);
    const auto b = performance_metrics(days(1000), 2.0 * r);
    ASSERT_TRUE(a.sharpe && b.sharpe);
    EXPECT_NEAR(*a.sharpe, *b.sharpe, 1e-12);
    EXPECT_NEAR(*a.sharpe, r.mean() / std::sqrt((r.array() - r.mean()).square().sum() / 999.0) * std::sqrt(252.0), 1e-12);
    EXPECT_LE(a.max_drawdown, 0.0);
    EXPECT_GE(a.max_drawdown, -100.0);
}

TEST(Signal, FollowsCompoundedTrailingReturnOnCrisisDays) {
    Eigen::VectorXd src(6);
    src << 1.0, 1.0, -5.0, 2.0, 2.0, 2.0;
    const std::vector<int> labels{2, 2, 2, 2, 0, 2};
    const Eigen::VectorXi s = strategy_signal(src, labels, 2, 2);
    Eigen::VectorXi expected(6);
    // t=2: 1.01*1.01 > 1; t=3: 1.01*0.95 < 1; t=4 not crisis; t=5: 1.02*1.02 > 1.
    expected << 0, 0, 1, -1, 0, 1;
    EXPECT_EQ(s, expected);
    EXPECT_THROW(strategy_signal(src, labels, 2, 0), std::invalid_argument);
}

TEST(Signal, ShiftDelaysPositions) {
    Eigen::VectorXi s(5);
    s << 1, -1, 0, 1, 1;
    Eigen::VectorXi expected(5);
    expected << 0, 1, -1, 0, 1;
    EXPECT_EQ(shift_signal(s, 1), expected);
    EXPECT_EQ(shift_signal(s, 0), s);
    EXPECT_TRUE(shift_signal(s, 9).isZero());

    Eigen::VectorXd target(5);
    target << 1.0, 2.0, -3.0, 4.0, 5.0;
    EXPECT_NE(apply_signal(s, target), apply_signal(shift_signal(s, 1), target));
}

TEST(Run, BuyAndHoldEqualsTargetMetrics) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    const Eigen::VectorXd target = Eigen::VectorXd::NullaryExpr(300, [&]() { return n(rng); });
    const auto bh = run(days(300), Eigen::VectorXi::Ones(300), target);
    const auto direct = performance_metrics(days(300), target);
    EXPECT_EQ(bh.annual_return, direct.annual_return);
    EXPECT_EQ(*bh.sharpe, *direct.sharpe);
    EXPECT_EQ(bh.max_drawdown, direct.max_drawdown);
    EXPECT_EQ(bh.n_active_days, 300);

    Eigen::VectorXi sparse = Eigen::VectorXi::Zero(300);
    sparse.segment(10, 5).setConstant(-1);
    EXPECT_EQ(run(days(300), sparse, target).n_active_days, 5);
}

TEST(Report, JsonAndCsvLayout) {
    Eigen::VectorXd r(3);
    r << 0.5, -0.25, 0.0;
    const auto a = performance_metrics(days(3), r);
    const auto b = performance_metrics(days(3), Eigen::VectorXd::Zero(3));
    std::ostringstream js;
    write_report_json(js, a, b);
    const auto j = nlohmann::json::parse(js.str());
    EXPECT_DOUBLE_EQ(j["strategy"]["annual_return"].get<double>(), a.annual_return);
    EXPECT_TRUE(j["buy_and_hold"]["sharpe"].is_null());
    EXPECT_EQ(j["strategy"]["start"], "2001-01-01");

    std::ostringstream csv;
    write_returns_csv(csv, a, b);
    EXPECT_EQ(csv.str(), "date,strategy,buy_and_hold\n2001-01-01,0.500000,0.000000\n"
                         "2001-01-02,-0.250000,0.000000\n2001-01-03,0.000000,0.000000\n");
}
