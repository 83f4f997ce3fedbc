#include "fregime/panel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string_view>

namespace fregime {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        cells.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                               : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return cells;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool is_sentinel(double v) {
    return std::abs(v + 99.99) < 1e-9 || std::abs(v + 999.0) < 1e-9;
}

bool has_alpha(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c); });
}

FactorPanel assemble(std::vector<Date> dates, const std::vector<std::vector<double>>& rows,
                     std::vector<std::string> names) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < names.size(); ++j) m(i, j) = rows[i][j];
    }
    return FactorPanel(std::move(dates), std::move(m), std::move(names));
}

}  // namespace

FactorPanel::FactorPanel(std::vector<Date> dates, Eigen::MatrixXd returns,
                         std::vector<std::string> factor_names)
    : dates_(std::move(dates)), returns_(std::move(returns)), factor_names_(std::move(factor_names)) {
    if (static_cast<Eigen::Index>(dates_.size()) != returns_.rows()) {
        throw std::invalid_argument("FactorPanel: date count does not match row count");
    }
    if (static_cast<Eigen::Index>(factor_names_.size()) != returns_.cols()) {
        throw std::invalid_argument("FactorPanel: factor name count does not match column count");
    }
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i])) {
            throw std::invalid_argument("FactorPanel: dates not strictly increasing at " +
                                        format_iso(dates_[i]));
        }
    }
    if (!returns_.allFinite()) throw std::invalid_argument("FactorPanel: non-finite return value");
    std::set<std::string> seen(factor_names_.begin(), factor_names_.end());
    if (seen.size() != factor_names_.size()) {
        throw std::invalid_argument("FactorPanel: duplicate factor names");
    }
}

Eigen::Index FactorPanel::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < factor_names_.size(); ++j) {
        if (factor_names_[j] == name) return static_cast<Eigen::Index>(j);
    }
    throw SchemaError("factor '" + name + "' not in panel");
}

Eigen::VectorXd FactorPanel::column(const std::string& name) const {
    return returns_.col(column_index(name));
}

bool FactorPanel::operator==(const FactorPanel& other) const {
    return dates_ == other.dates_ && factor_names_ == other.factor_names_ &&
           returns_.rows() == other.returns_.rows() && returns_.cols() == other.returns_.cols() &&
           returns_ == other.returns_;
}

const std::vector<std::string>& six_factor_names() {
    static const std::vector<std::string> names{"MKT-RF", "SMB", "HML", "RMW", "CMA", "MOM"};
    return names;
}

FactorPanel parse_ff_daily_csv(std::istream& text, const std::vector<std::string>& expected_columns) {
    std::string line;
    std::size_t line_no = 0;
    std::string header;
    std::size_t header_line = 0;
    bool in_data = false;
    std::vector<std::size_t> positions;

    std::vector<Date> dates;
    std::vector<std::vector<double>> rows;

    auto resolve_header = [&]() {
        if (header_line == 0) throw ParseError(line_no, "data row without a preceding header row");
        const auto cells = split_csv(header);
        for (const auto& want : expected_columns) {
            const auto key = lower(trim(want));
            std::optional<std::size_t> found;
            for (std::size_t c = 1; c < cells.size(); ++c) {
                if (lower(cells[c]) == key) {
                    found = c;
                    break;
                }
            }
            if (!found) throw SchemaError("column '" + want + "' not found in header");
            positions.push_back(*found);
        }
    };

    while (std::getline(text, line)) {
        ++line_no;
        const auto cells = split_csv(line);
        const std::string_view first = cells.front();
        const bool looks_like_data = parse_compact_date(first).has_value();

        if (!in_data) {
            if (looks_like_data) {
                resolve_header();
                in_data = true;
            } else {
                if (!trim(line).empty()) {
                    header = line;
                    header_line = line_no;
                }
                continue;
            }
        } else if (!looks_like_data) {
            if (first.empty() || has_alpha(first)) break;  // footer
            throw ParseError(line_no, "malformed date token '" + std::string(first) + "'");
        }

        const Date date = *parse_compact_date(first);
        std::vector<double> values;
        values.reserve(positions.size());
        bool keep = true;
        for (std::size_t pos : positions) {
            const auto v = pos < cells.size() ? parse_number(cells[pos]) : std::nullopt;
            if (!v || !std::isfinite(*v) || is_sentinel(*v)) {
                keep = false;
                break;
            }
            values.push_back(*v);
        }
        if (!dates.empty() && !(dates.back() < date)) {
            throw ParseError(line_no, "dates not strictly increasing");
        }
        if (keep) {
            dates.push_back(date);
            rows.push_back(std::move(values));
        }
    }
    if (!in_data) {
        if (header_line == 0) throw ParseError(line_no, "no header or data rows found");
        resolve_header();  // reports missing columns on header-only input
    }
    return assemble(std::move(dates), rows, expected_columns);
}

FactorPanel merge_on_dates(const FactorPanel& a, const FactorPanel& b) {
    for (const auto& name : b.factor_names()) {
        if (std::find(a.factor_names().begin(), a.factor_names().end(), name) != a.factor_names().end()) {
            throw SchemaError("factor '" + name + "' present in both panels");
        }
    }
    std::vector<Date> dates;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
    Eigen::Index i = 0, j = 0;
    while (i < a.rows() && j < b.rows()) {
        const auto& da = a.dates()[i];
        const auto& db = b.dates()[j];
        if (da < db) {
            ++i;
        } else if (db < da) {
            ++j;
        } else {
            dates.push_back(da);
            pairs.emplace_back(i++, j++);
        }
    }
    if (dates.empty()) throw std::runtime_error("merge_on_dates: no common dates");

    Eigen::MatrixXd m(static_cast<Eigen::Index>(pairs.size()), a.cols() + b.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        m.row(r).head(a.cols()) = a.returns().row(pairs[r].first);
        m.row(r).tail(b.cols()) = b.returns().row(pairs[r].second);
    }
    auto names = a.factor_names();
    names.insert(names.end(), b.factor_names().begin(), b.factor_names().end());
    return FactorPanel(std::move(dates), std::move(m), std::move(names));
}

FactorPanel select_rows(const FactorPanel& p, const std::vector<Eigen::Index>& rows) {
    std::vector<Date> dates;
    dates.reserve(rows.size());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), p.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        dates.push_back(p.dates()[rows[r]]);
        m.row(static_cast<Eigen::Index>(r)) = p.returns().row(rows[r]);
    }
    return FactorPanel(std::move(dates), std::move(m), p.factor_names());
}

FactorPanel slice_dates(const FactorPanel& p, const Date& start, const Date& end) {
    if (end < start) throw std::invalid_argument("slice_dates: end before start");
    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 0; t < p.rows(); ++t) {
        const auto& d = p.dates()[t];
        if (!(d < start) && !(end < d)) rows.push_back(t);
    }
    return select_rows(p, rows);
}

DatedSeries volatility_norm(const FactorPanel& p) {
    return {p.dates(), p.returns().rowwise().norm()};
}

FactorPanel weekly_aggregate(const FactorPanel& p) {
    std::vector<Date> dates;
    std::vector<Eigen::RowVectorXd> rows;
    Eigen::RowVectorXd growth;
    for (Eigen::Index t = 0; t < p.rows(); ++t) {
        const bool new_week = t == 0 || iso_week_key(p.dates()[t]) != iso_week_key(p.dates()[t - 1]);
        if (new_week) {
            if (t > 0) rows.push_back(100.0 * (growth.array() - 1.0).matrix());
            growth = Eigen::RowVectorXd::Ones(p.cols());
            dates.push_back(p.dates()[t]);
        }
        growth.array() *= 1.0 + p.returns().row(t).array() / 100.0;
        dates.back() = p.dates()[t];
    }
    if (p.rows() > 0) rows.push_back(100.0 * (growth.array() - 1.0).matrix());

    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), p.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = rows[r];
    return FactorPanel(std::move(dates), std::move(m), p.factor_names());
}

std::vector<int> weekly_labels(const std::vector<Date>& dates, const std::vector<int>& labels,
                               int n_regimes) {
    if (dates.size() != labels.size()) throw std::invalid_argument("weekly_labels: length mismatch");
    std::vector<int> out;
    std::vector<int> counts(static_cast<std::size_t>(n_regimes), 0);
    auto flush = [&]() {
        int best = 0;
        for (int k = 1; k < n_regimes; ++k) {
            if (counts[k] >= counts[best]) best = k;
        }
        out.push_back(best);
        std::fill(counts.begin(), counts.end(), 0);
    };
    for (std::size_t t = 0; t < dates.size(); ++t) {
        if (t > 0 && iso_week_key(dates[t]) != iso_week_key(dates[t - 1])) flush();
        if (labels[t] < 0 || labels[t] >= n_regimes) throw std::out_of_range("weekly_labels: label out of range");
        ++counts[static_cast<std::size_t>(labels[t])];
    }
    if (!dates.empty()) flush();
    return out;
}

void write_panel_csv(std::ostream& out, const FactorPanel& p) {
    out << "date";
    for (const auto& name : p.factor_names()) out << ',' << name;
    out << '\n';
    char buf[64];
    for (Eigen::Index t = 0; t < p.rows(); ++t) {
        out << format_iso(p.dates()[t]);
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            double v = p.returns()(t, j);
            if (v == 0.0) v = 0.0;  // no "-0.000000"
            std::snprintf(buf, sizeof(buf), ",%.6f", v);
            out << buf;
        }
        out << '\n';
    }
}

FactorPanel read_panel_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError(1, "empty panel file");
    const auto header = split_csv(line);
    if (header.empty() || lower(header.front()) != "date") {
        throw ParseError(1, "panel header must start with 'date'");
    }
    std::vector<std::string> names(header.begin() + 1, header.end());
    std::vector<Date> dates;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        const auto date = parse_iso_date(cells.front());
        if (!date) throw ParseError(line_no, "malformed date token '" + std::string(cells.front()) + "'");
        if (cells.size() != names.size() + 1) throw ParseError(line_no, "wrong number of columns");
        std::vector<double> values;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto v = parse_number(cells[c]);
            if (!v || !std::isfinite(*v)) throw ParseError(line_no, "malformed value");
            values.push_back(*v);
        }
        if (!dates.empty() && !(dates.back() < *date)) throw ParseError(line_no, "dates not strictly increasing");
        dates.push_back(*date);
        rows.push_back(std::move(values));
    }
    return assemble(std::move(dates), rows, std::move(names));
}

void write_labels_csv(std::ostream& out, const std::vector<Date>& dates, const std::vector<int>& labels) {
    if (dates.size() != labels.size()) throw std::invalid_argument("write_labels_csv: length mismatch");
    out << "date,regime\n";
    for (std::size_t t = 0; t < dates.size(); ++t) out << format_iso(dates[t]) << ',' << labels[t] << '\n';
}

LabelSeries read_labels_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError(1, "empty label file");
    LabelSeries out;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 2) throw ParseError(line_no, "expected 'date,regime'");
        const auto date = parse_iso_date(cells[0]);
        if (!date) throw ParseError(line_no, "malformed date token '" + std::string(cells[0]) + "'");
        int label = 0;
        auto [ptr, ec] = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), label);
        if (ec != std::errc{} || ptr != cells[1].data() + cells[1].size() || label < 0) {
            throw ParseError(line_no, "malformed regime label");
        }
        out.dates.push_back(*date);
        out.labels.push_back(label);
    }
    return out;
}

}  // namespace fregime
