#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fregime/date.hpp"
#include "fregime/panel.hpp"

namespace fregime::events {

struct EventWindow {
    std::string name;
    Date start;
    Date end;
    bool expected_crisis = true;
};

/// Default stress-episode windows (2008, 2011, 2015, 2018, 2020, 2022).
std::vector<EventWindow> default_event_windows();

/// Event file: one `name,start,end[,expected_crisis]` line per event, ISO
/// dates, `#` comments and blank lines ignored, optional header starting
/// with `name`.
std::vector<EventWindow> parse_event_windows(std::istream& in);
void write_event_windows(std::ostream& out, const std::vector<EventWindow>& windows);

/// Index range [first, last] of dates inside the window; nullopt if none.
std::optional<std::pair<Eigen::Index, Eigen::Index>> window_rows(const std::vector<Date>& dates,
                                                                 const EventWindow& w);

/// Share of window trading days labelled `crisis_index`. Throws
/// std::invalid_argument when the window has no trading days.
double detection_rate(const std::vector<int>& labels, const std::vector<Date>& dates, const EventWindow& w,
                      int crisis_index);

/// Earliest in-window date starting a run of >= min_run crisis labels; the run
/// may extend past the window end.
std::optional<Date> first_sustained_detection(const std::vector<int>& labels, const std::vector<Date>& dates,
                                              const EventWindow& w, int crisis_index, int min_run = 3);

struct LeadTime {
    Date detection;
    Date peak;
    int lead_days = 0;  // calendar days
};

/// Peak = argmax of the volatility series over the detection day and the
/// following `horizon` trading days.
std::optional<LeadTime> lead_time(const std::vector<int>& labels, const std::vector<Date>& dates,
                                  const Eigen::VectorXd& volatility, const EventWindow& w, int crisis_index,
                                  int horizon = 90, int min_run = 3);

enum class Classification { check, directional, cross, untestable };
std::string to_string(Classification c);

/// Which rows of an event window enter the per-event test.
enum class WindowMode {
    raw,          // every trading day in the window (lags inside the window)
    crisis_days,  // only decoded crisis days whose lags are crisis days inside the window
};

struct EventValidationRow {
    std::string event;
    Eigen::Index days = 0;  // rows entering the forward test
    std::optional<double> p_forward;
    std::optional<double> p_reverse;
    Classification classification = Classification::untestable;
};

struct EventValidation {
    std::vector<EventValidationRow> rows;
    int n_tested = 0;
    int n_check = 0;
    int n_check_or_directional = 0;
    double binomial_p_check = 1.0;                 // P(X >= n_check), X ~ Bin(n_tested, 0.10)
    double binomial_p_check_or_directional = 1.0;  // P(X >= n_check + n_dir)
};

/// Classification at the 0.10 level: CHECK if p_fwd < 0.10 and p_rev > 0.10;
/// DIR if p_fwd < p_rev but p_fwd >= 0.10; CROSS otherwise.
Classification classify(double p_forward, double p_reverse, double level = 0.10);

struct EventValidationConfig {
    std::string source = "HML";
    std::string target = "SMB";
    int lag = 9;
    double level = 0.10;
    WindowMode mode = WindowMode::raw;
    int crisis_index = 2;
};

/// Per-event Granger test in both directions at a fixed lag. Windows with
/// fewer than 2L + 12 trading days are UNTESTABLE. `labels` is only used in
/// crisis_days mode.
EventValidation event_granger_validation(const FactorPanel& panel, const std::vector<EventWindow>& windows,
                                         const EventValidationConfig& config,
                                         const std::vector<int>& labels = {});

/// CSV: event,days,p_fwd,p_rev,classification plus one binomial summary row.
void write_validation_csv(std::ostream& out, const EventValidation& v);

}  // namespace fregime::events
