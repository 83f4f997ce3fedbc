#include <gtest/gtest.h>

#include <cmath>

#include "fregime/granger.hpp"
#include "fregime/synthgen.hpp"

using namespace fregime;
using namespace fregime::synthgen;

namespace {

hmm::HmmParams one_dim(int K, double nu, hmm::EmissionFamily family = hmm::EmissionFamily::student_t) {
    hmm::HmmParams p;
    p.family = family;
    p.pi = Eigen::VectorXd::Constant(K, 1.0 / K);
    p.A = Eigen::MatrixXd::Constant(K, K, 0.1 / std::max(1, K - 1));
    p.A.diagonal().setConstant(K == 1 ? 1.0 : 0.9);
    for (int k = 0; k < K; ++k) {
        p.mu.push_back(Eigen::VectorXd::Constant(1, 0.0));
        p.sigma.push_back(Eigen::MatrixXd::Constant(1, 1, 1.0 + k));
    }
    p.nu = Eigen::VectorXd::Constant(K, nu);
    return p;
}

double excess_kurtosis(const Eigen::VectorXd& x) {
    const Eigen::ArrayXd c = x.array() - x.mean();
    const double m2 = c.square().mean();
    return c.pow(4).mean() / (m2 * m2) - 3.0;
}

}  // namespace

TEST(Generate, IdentityTransitionsKeepInitialState) {
    auto p = synthgen::table_like_params();
    p.A.setIdentity();
    p.pi = Eigen::Vector3d(1.0, 0.0, 0.0);
    const auto s = generate({p, 500, std::nullopt, 7});
    for (int l : s.labels) EXPECT_EQ(l, 0);
    EXPECT_EQ(s.panel.factor_names(), six_factor_names());
    EXPECT_EQ(s.panel.rows(), 500);
}

TEST(Generate, DatesAreConsecutiveWeekdays) {
    const auto s = generate({one_dim(2, 8.0), 30, std::nullopt, 1});
    const auto& dates = s.panel.dates();
    EXPECT_EQ(dates.front(), (Date{std::chrono::year{2000}, std::chrono::January, std::chrono::day{3}}));
    for (std::size_t i = 1; i < dates.size(); ++i) {
        const int gap = calendar_days_between(dates[i - 1], dates[i]);
        EXPECT_TRUE(gap == 1 || gap == 3);
        const std::chrono::weekday wd{std::chrono::sys_days{dates[i]}};
        EXPECT_NE(wd, std::chrono::Saturday);
        EXPECT_NE(wd, std::chrono::Sunday);
    }
    EXPECT_EQ(s.panel.factor_names(), (std::vector<std::string>{"F0"}));
}

TEST(Generate, LargeNuMatchesGaussianKurtosis) {
    const auto s = generate({one_dim(1, 1e6), 100000, std::nullopt, 3});
    EXPECT_NEAR(excess_kurtosis(s.panel.returns().col(0)), 0.0, 0.1);
    const auto g = generate({one_dim(1, 5.0, hmm::EmissionFamily::gaussian), 100000, std::nullopt, 3});
    EXPECT_NEAR(excess_kurtosis(g.panel.returns().col(0)), 0.0, 0.1);
}

TEST(Generate, HeavyTailsForSmallNu) {
    // excess kurtosis of t(8) is 6 / (8 - 4) = 1.5
    const auto s = generate({one_dim(1, 8.0), 200000, std::nullopt, 4});
    EXPECT_NEAR(excess_kurtosis(s.panel.returns().col(0)), 1.5, 0.4);
}

TEST(Generate, EmpiricalTransitionsMatchMatrix) {
    const auto p = table_like_params();
    const auto s = generate({p, 100000, std::nullopt, 5});
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(3, 3);
    for (std::size_t t = 1; t < s.labels.size(); ++t) counts(s.labels[t - 1], s.labels[t]) += 1.0;
    for (int i = 0; i < 3; ++i) {
        ASSERT_GT(counts.row(i).sum(), 0.0);
        const Eigen::RowVectorXd freq = counts.row(i) / counts.row(i).sum();
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(freq(j), p.A(i, j), 0.02) << i << "," << j;
    }
}

TEST(Generate, TableLikeVolatilityOrdering) {
    const auto s = generate({table_like_params(), 100000, std::nullopt, 6});
    const Eigen::VectorXd vol = volatility_norm(s.panel).values;
    Eigen::Vector3d sum = Eigen::Vector3d::Zero(), n = Eigen::Vector3d::Zero();
    for (std::size_t t = 0; t < s.labels.size(); ++t) {
        sum(s.labels[t]) += vol(static_cast<Eigen::Index>(t));
        n(s.labels[t]) += 1.0;
    }
    const Eigen::Vector3d mean = sum.cwiseQuotient(n);
    EXPECT_LT(mean(0), mean(1));
    EXPECT_LT(mean(1), mean(2));
    EXPECT_NEAR(mean(0), 0.83, 0.05);
    EXPECT_NEAR(mean(1), 1.49, 0.08);
    EXPECT_NEAR(mean(2), 3.33, 0.17);
}

TEST(Generate, SeedDeterminism) {
    const SyntheticSpec spec{table_like_params(), 2000, std::nullopt, 42};
    const auto a = generate(spec);
    const auto b = generate(spec);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_TRUE(a.panel == b.panel);
    auto other = spec;
    other.seed = 43;
    EXPECT_FALSE(generate(other).panel == a.panel);
}

TEST(Generate, InvalidSpecsRejected) {
    EXPECT_THROW(generate({one_dim(2, 8.0), 0, std::nullopt, 1}), std::invalid_argument);
    EXPECT_THROW(generate({one_dim(2, 8.0), 10, CrossLag{0, 3, -1, 1, 0.5}, 1}), std::invalid_argument);
}

TEST(Generate, CrossLagIsRecoverable) {
    auto p = one_dim(2, 1e6, hmm::EmissionFamily::gaussian);
    p.mu.assign(2, Eigen::VectorXd::Zero(2));
    p.sigma.assign(2, Eigen::MatrixXd::Identity(2, 2));
    const auto s = generate({p, 3000, CrossLag{0, 1, -1, 2, 0.5}, 9, {"X", "Y"}});
    const auto mask = granger::window_lag_mask(3000, 0, 2999, 5);
    const auto fwd = granger::granger_f_test(s.panel.column("Y"), s.panel.column("X"), 5, mask);
    const auto rev = granger::granger_f_test(s.panel.column("X"), s.panel.column("Y"), 5, mask);
    EXPECT_LT(fwd.p_value, 1e-6);
    EXPECT_GT(rev.p_value, 1e-3);
    const auto masks = [](int lag) { return granger::window_lag_mask(3000, 0, 2999, lag); };
    EXPECT_EQ(granger::select_lag_bic(s.panel.column("Y"), s.panel.column("X"), masks, 10).best_lag, 2);
}

TEST(LabelAccuracy, InvariantToRelabeling) {
    const std::vector<int> truth{0, 0, 1, 1, 2, 2, 2, 0};
    EXPECT_DOUBLE_EQ(label_accuracy(truth, truth, 3), 1.0);
    std::vector<int> renamed;
    for (int l : truth) renamed.push_back((l + 1) % 3);
    EXPECT_DOUBLE_EQ(label_accuracy(renamed, truth, 3), 1.0);
    EXPECT_DOUBLE_EQ(label_accuracy(std::vector<int>(8, 0), truth, 3), 3.0 / 8.0);
    std::vector<int> off = truth;
    off[0] = 1;
    EXPECT_DOUBLE_EQ(label_accuracy(off, truth, 3), 7.0 / 8.0);
    EXPECT_THROW(label_accuracy({0, 3}, {0, 1}, 3), std::out_of_range);
    EXPECT_THROW(label_accuracy({0}, {0, 1}, 3), std::invalid_argument);
}
