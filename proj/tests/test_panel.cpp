#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fregime/panel.hpp"

using namespace fregime;
using namespace std::chrono;

namespace {

Date ymd(int y, unsigned m, unsigned d) { return Date{year{y}, month{m}, day{d}}; }

const char* kFiveFactorSample =
    "This file was created by CMPT_ME_BEME_OP_INV_RETS_DAILY using the 202412 CRSP database.\r\n"
    "The Tbill return is the simple daily rate that, over the number of trading days\r\n"
    "\r\n"
    ",Mkt-RF,SMB,HML,RMW,CMA,RF\r\n"
    "19900102,   1.44,  -0.71,  -0.02,  -0.35,   0.32,   0.026\r\n"
    "19900103,  -0.06,   0.71,  -0.19,   0.12,  -0.22,   0.026\r\n"
    "19900104,  -0.71,   0.47,  -0.99, -99.99,   0.08,   0.026\r\n"
    "19900105,  -0.85,   0.80,  -0.30,   0.11,   0.15,   0.026\r\n"
    "\r\n"
    "Copyright 2024 Eugene F. Fama and Kenneth R. French\r\n";

FactorPanel small_panel(const std::vector<std::string>& names, const std::vector<Date>& dates, double base) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(dates.size()), static_cast<Eigen::Index>(names.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = base + 0.1 * i - 0.01 * j;
    return FactorPanel(dates, m, names);
}

}  // namespace

TEST(FactorPanel, RejectsBrokenInvariants) {
    Eigen::MatrixXd m(2, 1);
    m << 1.0, 2.0;
    EXPECT_THROW(FactorPanel({ymd(2020, 1, 2), ymd(2020, 1, 2)}, m, {"A"}), std::invalid_argument);
    EXPECT_THROW(FactorPanel({ymd(2020, 1, 2)}, m, {"A"}), std::invalid_argument);
    Eigen::MatrixXd m2(1, 2);
    m2 << 1.0, 2.0;
    EXPECT_THROW(FactorPanel({ymd(2020, 1, 2)}, m2, {"A", "A"}), std::invalid_argument);
    m2(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(FactorPanel({ymd(2020, 1, 2)}, m2, {"A", "B"}), std::invalid_argument);
}

TEST(ParseFrenchCsv, ReadsWellFormedRowsInOrder) {
    std::istringstream in(",Mom\n20200102, 0.1\n20200103,-0.2\n20200106, 0.3\n");
    const auto p = parse_ff_daily_csv(in, {"MOM"});
    ASSERT_EQ(p.rows(), 3);
    EXPECT_EQ(p.factor_names(), std::vector<std::string>{"MOM"});
    EXPECT_DOUBLE_EQ(p.returns()(0, 0), 0.1);
    EXPECT_DOUBLE_EQ(p.returns()(1, 0), -0.2);
    EXPECT_DOUBLE_EQ(p.returns()(2, 0), 0.3);
    EXPECT_EQ(p.dates()[2], ymd(2020, 1, 6));
}

TEST(ParseFrenchCsv, PreambleFooterAndSentinelRows) {
    std::istringstream in(kFiveFactorSample);
    const auto p = parse_ff_daily_csv(in, {"MKT-RF", "SMB", "HML", "RMW", "CMA"});
    ASSERT_EQ(p.rows(), 3);  // 1990-01-04 carries -99.99
    EXPECT_EQ(p.dates()[2], ymd(1990, 1, 5));
    EXPECT_DOUBLE_EQ(p.returns()(0, 0), 1.44);
    EXPECT_DOUBLE_EQ(p.returns()(2, 4), 0.15);
}

TEST(ParseFrenchCsv, MinusNineNineNineIsASentinel) {
    std::istringstream in(",A,B\n20200102,1,2\n20200103,-999,2\n20200106,1,-999.00\n");
    EXPECT_EQ(parse_ff_daily_csv(in, {"A", "B"}).rows(), 1);
}

TEST(ParseFrenchCsv, SentinelInUnrequestedColumnKeepsRow) {
    std::istringstream in(",A,B\n20200102,1,-99.99\n");
    EXPECT_EQ(parse_ff_daily_csv(in, {"A"}).rows(), 1);
}

TEST(ParseFrenchCsv, MapsColumnsByName) {
    std::istringstream in(",HML,SMB\n20200102,1.5,-2.5\n");
    const auto p = parse_ff_daily_csv(in, {"SMB", "HML"});
    EXPECT_DOUBLE_EQ(p.returns()(0, 0), -2.5);
    EXPECT_DOUBLE_EQ(p.returns()(0, 1), 1.5);
}

TEST(ParseFrenchCsv, MissingColumnIsSchemaError) {
    std::istringstream in(",SMB,HML\n20200102,1,2\n");
    try {
        parse_ff_daily_csv(in, {"SMB", "MOM"});
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("MOM"), std::string::npos);
    }
}

TEST(ParseFrenchCsv, MalformedDateReportsLine) {
    std::istringstream in(",A\n20200102,1\n2020013,2\n");
    try {
        parse_ff_daily_csv(in, {"A"});
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::istringstream bad_month(",A\n20200102,1\n20201302,2\n");
    EXPECT_THROW(parse_ff_daily_csv(bad_month, {"A"}), ParseError);
}

TEST(MergeOnDates, InnerJoinKeepsColumnOrder) {
    const auto a = small_panel({"A"}, {ymd(2020, 1, 2), ymd(2020, 1, 3), ymd(2020, 1, 6)}, 1.0);
    const auto b = small_panel({"B"}, {ymd(2020, 1, 3), ymd(2020, 1, 6), ymd(2020, 1, 7)}, 5.0);
    const auto m = merge_on_dates(a, b);
    EXPECT_EQ(m.dates(), (std::vector<Date>{ymd(2020, 1, 3), ymd(2020, 1, 6)}));
    EXPECT_EQ(m.factor_names(), (std::vector<std::string>{"A", "B"}));
    EXPECT_DOUBLE_EQ(m.returns()(0, 0), a.returns()(1, 0));
    EXPECT_DOUBLE_EQ(m.returns()(0, 1), b.returns()(0, 0));
}

TEST(MergeOnDates, IdenticalDatesAddColumns) {
    const std::vector<Date> dates{ymd(2020, 1, 2), ymd(2020, 1, 3)};
    const auto m = merge_on_dates(small_panel({"A", "B"}, dates, 0.0), small_panel({"C"}, dates, 1.0));
    EXPECT_EQ(m.rows(), 2);
    EXPECT_EQ(m.cols(), 3);
}

TEST(MergeOnDates, Errors) {
    const auto a = small_panel({"A"}, {ymd(2020, 1, 2)}, 0.0);
    EXPECT_THROW(merge_on_dates(a, small_panel({"A"}, {ymd(2020, 1, 2)}, 0.0)), SchemaError);
    EXPECT_THROW(merge_on_dates(a, small_panel({"B"}, {ymd(2021, 1, 4)}, 0.0)), std::runtime_error);
}

TEST(MergeOnDates, SymmetricUpToColumnOrder) {
    const auto a = small_panel({"A", "B"}, {ymd(2020, 1, 2), ymd(2020, 1, 3), ymd(2020, 1, 6)}, 1.0);
    const auto b = small_panel({"C"}, {ymd(2020, 1, 3), ymd(2020, 1, 6)}, 2.0);
    const auto ab = merge_on_dates(a, b);
    const auto ba = merge_on_dates(b, a);
    EXPECT_EQ(ab.dates(), ba.dates());
    EXPECT_EQ(ab.returns().col(0), ba.returns().col(1));
    EXPECT_EQ(ab.returns().col(1), ba.returns().col(2));
    EXPECT_EQ(ab.returns().col(2), ba.returns().col(0));
}

TEST(SliceDates, FullEmptyAndPartial) {
    const auto p = small_panel({"A"}, {ymd(2020, 1, 2), ymd(2020, 1, 3), ymd(2020, 1, 6)}, 1.0);
    EXPECT_EQ(slice_dates(p, ymd(2020, 1, 2), ymd(2020, 1, 6)), p);
    EXPECT_EQ(slice_dates(p, ymd(2019, 1, 1), ymd(2019, 12, 31)).rows(), 0);
    const auto mid = slice_dates(p, ymd(2020, 1, 3), ymd(2020, 1, 3));
    ASSERT_EQ(mid.rows(), 1);
    EXPECT_EQ(mid.dates()[0], ymd(2020, 1, 3));
    EXPECT_THROW(slice_dates(p, ymd(2020, 1, 6), ymd(2020, 1, 2)), std::invalid_argument);
}

TEST(VolatilityNorm, EuclideanRowNorm) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 6);
    m.row(0) << 3, 4, 0, 0, 0, 0;
    const FactorPanel p({ymd(2020, 1, 2), ymd(2020, 1, 3)}, m, six_factor_names());
    const auto v = volatility_norm(p);
    EXPECT_DOUBLE_EQ(v.values(0), 5.0);
    EXPECT_DOUBLE_EQ(v.values(1), 0.0);
}

TEST(VolatilityNorm, ZeroIffZeroRow) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    std::bernoulli_distribution zero(0.3);
    std::vector<Date> dates;
    Eigen::MatrixXd m(50, 3);
    sys_days day{ymd(2020, 1, 1)};
    for (int t = 0; t < 50; ++t) {
        dates.emplace_back(day + days{t});
        for (int j = 0; j < 3; ++j) m(t, j) = n(rng);
        if (zero(rng)) m.row(t).setZero();
    }
    const auto v = volatility_norm(FactorPanel(dates, m, {"A", "B", "C"}));
    for (int t = 0; t < 50; ++t) EXPECT_EQ(v.values(t) == 0.0, m.row(t).isZero(0.0));
}

TEST(WeeklyAggregate, CompoundsWithinIsoWeek) {
    // Mon 2020-01-06, Tue 2020-01-07, then Mon 2020-01-13 alone.
    Eigen::MatrixXd m(3, 1);
    m << 1.0, -1.0, 0.7;
    const FactorPanel p({ymd(2020, 1, 6), ymd(2020, 1, 7), ymd(2020, 1, 13)}, m, {"A"});
    const auto w = weekly_aggregate(p);
    ASSERT_EQ(w.rows(), 2);
    EXPECT_NEAR(w.returns()(0, 0), -0.01, 1e-12);
    EXPECT_NEAR(w.returns()(1, 0), 0.7, 1e-12);
    EXPECT_EQ(w.dates()[0], ymd(2020, 1, 7));
    EXPECT_EQ(w.dates()[1], ymd(2020, 1, 13));
}

TEST(WeeklyAggregate, DatesIncreasingAndWithinWeek) {
    std::vector<Date> dates;
    sys_days day{ymd(2019, 12, 23)};
    for (int i = 0; i < 60; ++i, day += days{1}) {
        const weekday wd{day};
        if (wd != Saturday && wd != Sunday && i % 7 != 3) dates.emplace_back(day);
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(dates.size()), 2, 0.1);
    const auto w = weekly_aggregate(FactorPanel(dates, m, {"A", "B"}));
    for (Eigen::Index i = 1; i < w.rows(); ++i) EXPECT_LT(w.dates()[i - 1], w.dates()[i]);
    for (const auto& d : w.dates()) EXPECT_NE(std::find(dates.begin(), dates.end(), d), dates.end());
    // Year-end week 2019-12-30 .. 2020-01-03 spans two calendar years but is one ISO week.
    EXPECT_EQ(iso_week_key(ymd(2019, 12, 30)), iso_week_key(ymd(2020, 1, 3)));
}

TEST(WeeklyLabels, ModalWithSevereTieBreak) {
    const std::vector<Date> dates{ymd(2020, 1, 6), ymd(2020, 1, 7), ymd(2020, 1, 8), ymd(2020, 1, 9),
                                  ymd(2020, 1, 13), ymd(2020, 1, 14), ymd(2020, 1, 15)};
    const std::vector<int> labels{0, 2, 2, 0, 1, 1, 0};
    EXPECT_EQ(weekly_labels(dates, labels, 3), (std::vector<int>{2, 1}));
}

TEST(CanonicalCsv, RoundTripIsStable) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n(0.0, 1.5);
    std::vector<Date> dates;
    Eigen::MatrixXd m(40, 6);
    sys_days day{ymd(2001, 3, 1)};
    for (int t = 0; t < 40; ++t) {
        dates.emplace_back(day + days{t});
        for (int j = 0; j < 6; ++j) m(t, j) = std::round(n(rng) * 100.0) / 100.0;
    }
    const FactorPanel p(dates, m, six_factor_names());
    std::stringstream first;
    write_panel_csv(first, p);
    const auto once = read_panel_csv(first);
    EXPECT_EQ(once, p);
    std::stringstream second;
    write_panel_csv(second, once);
    EXPECT_EQ(read_panel_csv(second), once);
    EXPECT_EQ(first.str(), second.str());
}

TEST(CanonicalCsv, HeaderAndFormat) {
    Eigen::MatrixXd m(1, 2);
    m << 0.1, -0.25;
    std::ostringstream out;
    write_panel_csv(out, FactorPanel({ymd(1990, 1, 2)}, m, {"SMB", "HML"}));
    EXPECT_EQ(out.str(), "date,SMB,HML\n1990-01-02,0.100000,-0.250000\n");
}

TEST(LabelCsv, RoundTrip) {
    const std::vector<Date> dates{ymd(2020, 1, 2), ymd(2020, 1, 3)};
    std::stringstream s;
    write_labels_csv(s, dates, {0, 2});
    const auto back = read_labels_csv(s);
    EXPECT_EQ(back.dates, dates);
    EXPECT_EQ(back.labels, (std::vector<int>{0, 2}));
}
