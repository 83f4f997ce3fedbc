#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fregime/panel.hpp"

namespace fregime::granger {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Not enough rows for the requested design.
class SampleSizeError : public std::runtime_error {
public:
    SampleSizeError(Eigen::Index required, Eigen::Index available)
        : std::runtime_error("insufficient observations: need " + std::to_string(required) + ", have " +
                             std::to_string(available)),
          required_(required),
          available_(available) {}
    Eigen::Index required() const noexcept { return required_; }
    Eigen::Index available() const noexcept { return available_; }

private:
    Eigen::Index required_;
    Eigen::Index available_;
};

/// Rank-deficient design or perfect fit; the F ratio is not reportable.
class DegenerateFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GrangerResult {
    std::string source;
    std::string target;
    std::optional<int> regime;  // nullopt = pooled
    int lag = 0;
    double f_stat = 0.0;
    double p_value = 1.0;
    Eigen::Index n_obs = 0;
    double r2_increment = 0.0;
    bool significant_bonferroni = false;
};

/// mask[t] iff labels[t] == k and the previous `lag` labels are all k.
Mask regime_lag_mask(const std::vector<int>& labels, int k, int lag);

/// mask[t] iff t and t - lag both lie in the index interval [first, last].
Mask window_lag_mask(Eigen::Index length, Eigen::Index first, Eigen::Index last, int lag);

struct Design {
    Eigen::VectorXd y;
    Eigen::MatrixXd restricted;    // intercept, y lags 1..L
    Eigen::MatrixXd unrestricted;  // restricted plus x lags 1..L
    int lag = 0;

    Eigen::Index rows() const { return y.size(); }
};

/// Minimum usable rows for lag L: 2L + 1 regressors plus ten residual dof.
inline Eigen::Index min_design_rows(int lag) { return 2 * static_cast<Eigen::Index>(lag) + 11; }

/// Rows for every selected t (time order) without a sample-size check.
Design collect_design(const Eigen::VectorXd& y, const Eigen::VectorXd& x, int lag, const Mask& mask);

/// One row per selected t (time order). Selected t must satisfy t >= lag.
/// Throws SampleSizeError below min_design_rows(lag).
Design build_design(const Eigen::VectorXd& y, const Eigen::VectorXd& x, int lag, const Mask& mask);

/// Row-stacks designs with a common lag.
Design stack_designs(const std::vector<Design>& parts);

struct OlsResult {
    double rss = 0.0;
    Eigen::Index rank = 0;
    bool full_rank = false;
};

/// Least squares via column-pivoted Householder QR.
OlsResult ols_rss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// F test of the unrestricted against the restricted model on a prepared design.
GrangerResult f_test(const Design& design);

GrangerResult granger_f_test(const Eigen::VectorXd& y, const Eigen::VectorXd& x, int lag, const Mask& mask);

using MaskBuilder = std::function<Mask(int lag)>;

struct LagBicRow {
    int lag = 0;
    bool feasible = false;
    Eigen::Index n_obs = 0;
    double rss = 0.0;
    double bic = 0.0;
};

struct LagSelection {
    int best_lag = 0;
    std::vector<LagBicRow> table;
};

/// BIC = n ln(RSS_u / n) + (2L + 1) ln n of the unrestricted model, each L on
/// its own mask; ties go to the smaller L.
LagSelection select_lag_bic(const Eigen::VectorXd& y, const Eigen::VectorXd& x, const MaskBuilder& masks,
                            int max_lag);

/// Lag selection followed by the F test at the selected lag on that lag's mask.
GrangerResult granger_with_bic_lag(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                                   const MaskBuilder& masks, int max_lag);

/// One test cell; `error` is set when the cell could not be evaluated.
struct GrangerCell {
    std::string source;
    std::string target;
    std::optional<int> regime;
    std::optional<GrangerResult> result;
    std::string error;
};

/// Every ordered factor pair in every regime with BIC lags and a Bonferroni
/// flag at alpha / (d (d - 1)). Ordered by (source, target, regime) in panel
/// column order.
std::vector<GrangerCell> pairwise_regime_matrix(const FactorPanel& panel, const std::vector<int>& labels,
                                                int n_regimes, int max_lag, double alpha);

/// CSV export: source,target,regime,lag,f_stat,p_value,n_obs,r2_increment,significant.
void write_results_csv(std::ostream& out, const std::vector<GrangerCell>& cells);

}  // namespace fregime::granger
