#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fregime/date.hpp"

namespace fregime {

/// Thrown for malformed input text; carries the 1-based source line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Thrown when a requested column is absent or column sets conflict.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dated T x d panel of daily factor returns, in percent.
///
/// Invariants (checked on construction): dates strictly increasing, one date
/// per row, every entry finite, factor names distinct and one per column.
class FactorPanel {
public:
    FactorPanel() = default;
    FactorPanel(std::vector<Date> dates, Eigen::MatrixXd returns,
                std::vector<std::string> factor_names);

    const std::vector<Date>& dates() const noexcept { return dates_; }
    const Eigen::MatrixXd& returns() const noexcept { return returns_; }
    const std::vector<std::string>& factor_names() const noexcept { return factor_names_; }

    Eigen::Index rows() const noexcept { return returns_.rows(); }
    Eigen::Index cols() const noexcept { return returns_.cols(); }
    bool empty() const noexcept { return returns_.rows() == 0; }

    /// Column index for a factor name; throws SchemaError when absent.
    Eigen::Index column_index(const std::string& name) const;
    Eigen::VectorXd column(const std::string& name) const;

    bool operator==(const FactorPanel& other) const;

private:
    std::vector<Date> dates_;
    Eigen::MatrixXd returns_;
    std::vector<std::string> factor_names_;
};

/// Date-indexed scalar series.
struct DatedSeries {
    std::vector<Date> dates;
    Eigen::VectorXd values;
};

/// Names of the six daily factors in panel column order.
const std::vector<std::string>& six_factor_names();

/// Parses a daily factor file from the French data library layout: free-form
/// preamble, a header row naming the columns (first cell blank), YYYYMMDD data
/// rows, and an optional footer. Columns are matched by name ignoring case and
/// surrounding whitespace; the output uses the labels in `expected_columns`.
/// Rows with a missing-data sentinel (-99.99, -999) or an unparseable value in
/// any requested column are dropped.
FactorPanel parse_ff_daily_csv(std::istream& text, const std::vector<std::string>& expected_columns);

/// Inner join on dates; columns of `a` precede those of `b`.
FactorPanel merge_on_dates(const FactorPanel& a, const FactorPanel& b);

/// Rows with start <= date <= end. May be empty.
FactorPanel slice_dates(const FactorPanel& p, const Date& start, const Date& end);

/// Row subset by index list (indices ascending).
FactorPanel select_rows(const FactorPanel& p, const std::vector<Eigen::Index>& rows);

/// Per-day Euclidean norm of the factor return vector.
DatedSeries volatility_norm(const FactorPanel& p);

/// One row per ISO week with compounded percent returns, dated by the last
/// trading day of that week.
FactorPanel weekly_aggregate(const FactorPanel& p);

/// Weekly regime label: modal daily label of the week, ties toward the higher
/// (more severe) regime index. Weeks follow `weekly_aggregate` ordering.
std::vector<int> weekly_labels(const std::vector<Date>& dates, const std::vector<int>& labels,
                               int n_regimes);

/// Canonical CSV: header `date,<names...>`, ISO dates, six decimal places.
void write_panel_csv(std::ostream& out, const FactorPanel& p);
FactorPanel read_panel_csv(std::istream& in);

/// Sidecar label file `date,regime`.
void write_labels_csv(std::ostream& out, const std::vector<Date>& dates,
                      const std::vector<int>& labels);
struct LabelSeries {
    std::vector<Date> dates;
    std::vector<int> labels;
};
LabelSeries read_labels_csv(std::istream& in);

}  // namespace fregime
