#include "fregime/events.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fregime/granger.hpp"
#include "fregime/numerics.hpp"

namespace fregime::events {

namespace {

Date ymd(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void check_lengths(const std::vector<int>& labels, const std::vector<Date>& dates) {
    if (labels.size() != dates.size()) throw std::invalid_argument("labels and dates differ in length");
}

}  // namespace

std::vector<EventWindow> default_event_windows() {
    return {
        {"2008 Financial", ymd(2008, 7, 1), ymd(2009, 6, 30), true},
        {"2011 EU Debt", ymd(2011, 7, 1), ymd(2011, 10, 31), true},
        {"2015 China", ymd(2015, 8, 1), ymd(2015, 10, 31), true},
        {"2018 Vol Shock", ymd(2018, 1, 22), ymd(2018, 3, 16), true},
        {"2020 COVID", ymd(2020, 2, 1), ymd(2020, 6, 30), true},
        {"2022 Rate Hikes", ymd(2022, 1, 3), ymd(2022, 10, 31), true},
    };
}

std::vector<EventWindow> parse_event_windows(std::istream& in) {
    std::vector<EventWindow> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(t);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(trim(cell));
        if (out.empty() && !cells.empty() && cells.front() == "name") continue;
        if (cells.size() < 3 || cells.size() > 4) throw ParseError(line_no, "expected name,start,end[,expected_crisis]");
        const auto start = parse_iso_date(cells[1]);
        const auto end = parse_iso_date(cells[2]);
        if (!start || !end) throw ParseError(line_no, "malformed ISO date");
        if (*end < *start) throw ParseError(line_no, "event end precedes start");
        bool expected = true;
        if (cells.size() == 4) {
            if (cells[3] == "true" || cells[3] == "1") {
                expected = true;
            } else if (cells[3] == "false" || cells[3] == "0") {
                expected = false;
            } else {
                throw ParseError(line_no, "expected_crisis must be true/false");
            }
        }
        out.push_back({cells[0], *start, *end, expected});
    }
    return out;
}

void write_event_windows(std::ostream& out, const std::vector<EventWindow>& windows) {
    out << "name,start,end,expected_crisis\n";
    for (const auto& w : windows) {
        out << w.name << ',' << format_iso(w.start) << ',' << format_iso(w.end) << ','
            << (w.expected_crisis ? "true" : "false") << '\n';
    }
}

std::optional<std::pair<Eigen::Index, Eigen::Index>> window_rows(const std::vector<Date>& dates,
                                                                 const EventWindow& w) {
    const auto first = std::lower_bound(dates.begin(), dates.end(), w.start);
    const auto past = std::upper_bound(dates.begin(), dates.end(), w.end);
    if (first >= past) return std::nullopt;
    return std::make_pair(static_cast<Eigen::Index>(first - dates.begin()),
                          static_cast<Eigen::Index>(past - dates.begin()) - 1);
}

double detection_rate(const std::vector<int>& labels, const std::vector<Date>& dates, const EventWindow& w,
                      int crisis_index) {
    check_lengths(labels, dates);
    const auto rows = window_rows(dates, w);
    if (!rows) throw std::invalid_argument("detection_rate: window '" + w.name + "' has no trading days");
    const auto [first, last] = *rows;
    const auto hits = std::count(labels.begin() + first, labels.begin() + last + 1, crisis_index);
    return static_cast<double>(hits) / static_cast<double>(last - first + 1);
}

std::optional<Date> first_sustained_detection(const std::vector<int>& labels, const std::vector<Date>& dates,
                                              const EventWindow& w, int crisis_index, int min_run) {
    check_lengths(labels, dates);
    if (min_run < 1) throw std::invalid_argument("first_sustained_detection: min_run must be >= 1");
    const auto rows = window_rows(dates, w);
    if (!rows) return std::nullopt;
    const auto T = static_cast<Eigen::Index>(labels.size());
    for (Eigen::Index t = rows->first; t <= rows->second; ++t) {
        Eigen::Index run = 0;
        while (t + run < T && labels[t + run] == crisis_index && run < min_run) ++run;
        if (run >= min_run) return dates[t];
    }
    return std::nullopt;
}

std::optional<LeadTime> lead_time(const std::vector<int>& labels, const std::vector<Date>& dates,
                                  const Eigen::VectorXd& volatility, const EventWindow& w, int crisis_index,
                                  int horizon, int min_run) {
    if (volatility.size() != static_cast<Eigen::Index>(dates.size())) {
        throw std::invalid_argument("lead_time: volatility series length mismatch");
    }
    const auto detect = first_sustained_detection(labels, dates, w, crisis_index, min_run);
    if (!detect) return std::nullopt;
    const auto start = static_cast<Eigen::Index>(std::lower_bound(dates.begin(), dates.end(), *detect) - dates.begin());
    const Eigen::Index stop = std::min<Eigen::Index>(volatility.size() - 1, start + horizon);
    Eigen::Index peak = 0;
    volatility.segment(start, stop - start + 1).maxCoeff(&peak);
    LeadTime out;
    out.detection = *detect;
    out.peak = dates[start + peak];
    out.lead_days = calendar_days_between(out.detection, out.peak);
    return out;
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::check: return "CHECK";
        case Classification::directional: return "DIR";
        case Classification::cross: return "CROSS";
        case Classification::untestable: return "UNTESTABLE";
    }
    return "UNTESTABLE";
}

Classification classify(double p_forward, double p_reverse, double level) {
    if (p_forward < level && p_reverse > level) return Classification::check;
    if (p_forward < p_reverse && p_forward >= level) return Classification::directional;
    return Classification::cross;
}

EventValidation event_granger_validation(const FactorPanel& panel, const std::vector<EventWindow>& windows,
                                         const EventValidationConfig& config, const std::vector<int>& labels) {
    const Eigen::VectorXd src = panel.column(config.source);
    const Eigen::VectorXd tgt = panel.column(config.target);
    if (config.mode == WindowMode::crisis_days && static_cast<Eigen::Index>(labels.size()) != panel.rows()) {
        throw std::invalid_argument("event_granger_validation: crisis_days mode needs labels for every row");
    }
    const int L = config.lag;
    const Eigen::Index T = panel.rows();

    EventValidation out;
    for (const auto& w : windows) {
        EventValidationRow row;
        row.event = w.name;
        const auto rows = window_rows(panel.dates(), w);
        const Eigen::Index window_days = rows ? rows->second - rows->first + 1 : 0;
        if (window_days < 2 * L + 12) {
            row.days = window_days;
            out.rows.push_back(row);
            continue;
        }
        granger::Mask mask = granger::window_lag_mask(T, rows->first, rows->second, L);
        if (config.mode == WindowMode::crisis_days) {
            mask = mask && granger::regime_lag_mask(labels, config.crisis_index, L);
        }
        row.days = mask.count();
        try {
            const auto fwd = granger::granger_f_test(tgt, src, L, mask);
            const auto rev = granger::granger_f_test(src, tgt, L, mask);
            row.p_forward = fwd.p_value;
            row.p_reverse = rev.p_value;
            row.classification = classify(fwd.p_value, rev.p_value, config.level);
            ++out.n_tested;
            if (row.classification == Classification::check) ++out.n_check;
            if (row.classification == Classification::check || row.classification == Classification::directional) {
                ++out.n_check_or_directional;
            }
        } catch (const granger::SampleSizeError&) {
        } catch (const granger::DegenerateFitError&) {
        }
        out.rows.push_back(row);
    }
    out.binomial_p_check = numerics::binomial_tail(out.n_check, out.n_tested, config.level);
    out.binomial_p_check_or_directional =
        numerics::binomial_tail(out.n_check_or_directional, out.n_tested, config.level);
    return out;
}

void write_validation_csv(std::ostream& out, const EventValidation& v) {
    out << "event,days,p_fwd,p_rev,classification\n";
    char buf[64];
    auto p = [&](const std::optional<double>& value) {
        if (!value) return std::string("NA");
        std::snprintf(buf, sizeof(buf), "%.6g", *value);
        return std::string(buf);
    };
    for (const auto& r : v.rows) {
        out << r.event << ',' << r.days << ',' << p(r.p_forward) << ',' << p(r.p_reverse) << ','
            << to_string(r.classification) << '\n';
    }
    std::snprintf(buf, sizeof(buf), "%.6e", v.binomial_p_check);
    out << "binomial_summary," << v.n_tested << ',' << buf << ",NA," << v.n_check << "_of_" << v.n_tested
        << "_CHECK\n";
}

}  // namespace fregime::events
