#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fregime/backtest.hpp"
#include "fregime/events.hpp"
#include "fregime/granger.hpp"
#include "fregime/hmm.hpp"
#include "fregime/model_io.hpp"
#include "fregime/panel.hpp"
#include "fregime/robustness.hpp"
#include "fregime/synthgen.hpp"

using namespace fregime;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitCompute = 3;

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    return out;
}

Date parse_date_flag(const std::string& text, const std::string& flag) {
    const auto d = parse_iso_date(text);
    if (!d) throw InputError(flag + ": expected an ISO date (YYYY-MM-DD), got '" + text + "'");
    return *d;
}

FactorPanel load_panel(const std::string& path) {
    auto in = open_in(path);
    try {
        return read_panel_csv(in);
    } catch (const ParseError& e) {
        throw InputError(path + ": " + e.what());
    }
}

struct Inputs {
    FactorPanel panel;
    std::vector<int> labels;
    int n_regimes = 0;
};

Inputs load_inputs(const std::string& panel_path, const std::string& labels_path) {
    Inputs out;
    out.panel = load_panel(panel_path);
    auto in = open_in(labels_path);
    LabelSeries ls;
    try {
        ls = read_labels_csv(in);
    } catch (const ParseError& e) {
        throw InputError(labels_path + ": " + e.what());
    }
    if (ls.dates != out.panel.dates()) {
        throw InputError("labels in '" + labels_path + "' are not aligned with the dates of '" + panel_path + "'");
    }
    if (ls.labels.empty()) throw InputError("empty labels file '" + labels_path + "'");
    if (*std::min_element(ls.labels.begin(), ls.labels.end()) < 0) throw InputError("negative regime label");
    out.labels = std::move(ls.labels);
    out.n_regimes = *std::max_element(out.labels.begin(), out.labels.end()) + 1;
    return out;
}

int resolve_crisis(int flag, int n_regimes) {
    if (flag < 0) return n_regimes - 1;
    if (flag >= n_regimes) throw InputError("--crisis " + std::to_string(flag) + " exceeds the labelled regimes");
    return flag;
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// ---- ingest ----------------------------------------------------------------

struct IngestOptions {
    std::string ff5;
    std::string mom;
    std::string out;
    std::string start;
    std::string end;
};

int cmd_ingest(const IngestOptions& o) {
    const auto& names = six_factor_names();
    const std::vector<std::string> ff5_cols(names.begin(), names.begin() + 5);
    const std::vector<std::string> mom_cols{names[5]};
    auto read = [](const std::string& path, const std::vector<std::string>& cols) {
        auto in = open_in(path);
        try {
            return parse_ff_daily_csv(in, cols);
        } catch (const ParseError& e) {
            throw InputError(path + ": " + e.what());
        } catch (const SchemaError& e) {
            throw InputError(path + ": " + e.what());
        }
    };
    FactorPanel panel = merge_on_dates(read(o.ff5, ff5_cols), read(o.mom, mom_cols));
    if (!o.start.empty() || !o.end.empty()) {
        const Date start = o.start.empty() ? panel.dates().front() : parse_date_flag(o.start, "--start");
        const Date end = o.end.empty() ? panel.dates().back() : parse_date_flag(o.end, "--end");
        panel = slice_dates(panel, start, end);
    }
    if (panel.empty()) throw InputError("no rows left after merging and slicing");
    auto out = open_out(o.out);
    write_panel_csv(out, panel);
    std::cout << "T=" << panel.rows() << " d=" << panel.cols() << " span=" << format_iso(panel.dates().front())
              << ".." << format_iso(panel.dates().back()) << '\n';
    return 0;
}

// ---- fit -------------------------------------------------------------------

struct FitOptions {
    std::string panel;
    int k = 3;
    std::string k_range;
    std::string family = "student-t";
    std::uint64_t seed = 0;
    int restarts = 10;
    std::string model = "model.json";
    std::string labels = "labels.csv";
};

std::pair<int, int> parse_k_range(const std::string& text) {
    const auto colon = text.find(':');
    int a = 0, b = 0;
    try {
        if (colon == std::string::npos) throw std::invalid_argument("no colon");
        std::size_t used = 0;
        a = std::stoi(text.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("trailing text");
        b = std::stoi(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) throw std::invalid_argument("trailing text");
    } catch (const std::logic_error&) {
        throw InputError("--k-range: expected A:B, got '" + text + "'");
    }
    if (a < 1 || b > 8 || a > b) throw InputError("--k-range must satisfy 1 <= A <= B <= 8");
    return {a, b};
}

void print_regime_summary(const hmm::HmmFit& fit, const FactorPanel& panel) {
    const int K = fit.params.n_states();
    const Eigen::VectorXd norm = volatility_norm(panel).values;
    std::vector<long> days(K, 0);
    std::vector<double> norm_sum(K, 0.0);
    for (std::size_t t = 0; t < fit.labels.size(); ++t) {
        ++days[fit.labels[t]];
        norm_sum[fit.labels[t]] += norm(static_cast<Eigen::Index>(t));
    }
    const bool t_family = fit.params.family == hmm::EmissionFamily::student_t;
    std::printf("%-8s %8s %10s %10s %8s %10s\n", "Regime", "Days", "Prop(%)", "Mean|x|", "nu", "Self-tr");
    for (int k = 0; k < K; ++k) {
        const double prop = 100.0 * static_cast<double>(days[k]) / static_cast<double>(fit.labels.size());
        const double mean_norm = days[k] > 0 ? norm_sum[k] / static_cast<double>(days[k]) : 0.0;
        std::printf("%-8d %8ld %10.1f %10.2f %8s %10.3f\n", k, days[k], prop, mean_norm,
                    t_family ? fmt("%.1f", fit.params.nu(k)).c_str() : "-", fit.params.A(k, k));
    }
    std::printf("loglik=%.4f bic=%.4f restarts=%d failed=%d seed=%llu\n", fit.loglik, fit.bic, fit.n_restarts,
                fit.failed_restarts, static_cast<unsigned long long>(fit.seed));
}

int cmd_fit(const FitOptions& o) {
    const FactorPanel panel = load_panel(o.panel);
    hmm::EmissionFamily family;
    try {
        family = hmm::family_from_string(o.family);
    } catch (const std::invalid_argument& e) {
        throw InputError(std::string("--family: ") + e.what());
    }
    if (o.restarts < 1) throw InputError("--restarts must be >= 1");
    hmm::FitConfig cfg(o.seed);
    cfg.n_restarts = o.restarts;

    hmm::HmmFit fit;
    if (!o.k_range.empty()) {
        const auto [a, b] = parse_k_range(o.k_range);
        const auto sel = hmm::select_k(panel, a, b, family, cfg);
        std::printf("%-4s %16s %8s %16s\n", "K", "loglik", "params", "BIC");
        for (const auto& row : sel.table) {
            if (row.ok) {
                std::printf("%-4d %16.4f %8d %16.4f%s\n", row.n_states, row.loglik, row.n_params, row.bic,
                            row.n_states == sel.best_k ? "  *" : "");
            } else {
                std::printf("%-4d %16s %8s %16s  (%s)\n", row.n_states, "NA", "NA", "NA", row.error.c_str());
            }
        }
        std::printf("best K=%d\n", sel.best_k);
        fit = sel.best_fit;
    } else {
        if (o.k < 1 || o.k > 8) throw InputError("--k must lie in [1, 8]");
        fit = hmm::em_fit(panel, o.k, family, cfg);
    }
    fit = hmm::order_regimes(fit, panel);

    {
        auto out = open_out(o.model);
        save_model(out, to_document(fit, panel.rows()));
    }
    {
        auto out = open_out(o.labels);
        write_labels_csv(out, panel.dates(), fit.labels);
    }
    print_regime_summary(fit, panel);
    return 0;
}

// ---- granger ---------------------------------------------------------------

struct GrangerOptions {
    std::string panel;
    std::string labels;
    int lmax = 15;
    double alpha = 0.01;
    std::string out = "granger.csv";
};

int cmd_granger(const GrangerOptions& o) {
    if (o.lmax < 1) throw InputError("--lmax must be >= 1");
    if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw InputError("--alpha must lie in (0, 1)");
    const Inputs in = load_inputs(o.panel, o.labels);
    const auto cells = granger::pairwise_regime_matrix(in.panel, in.labels, in.n_regimes, o.lmax, o.alpha);
    auto out = open_out(o.out);
    granger::write_results_csv(out, cells);
    const double d = static_cast<double>(in.panel.cols());
    std::printf("Bonferroni threshold %.3e over %zu cells\n", o.alpha / (d * (d - 1.0)), cells.size());
    int n_sig = 0;
    for (const auto& c : cells) {
        if (!c.result || !c.result->significant_bonferroni) continue;
        ++n_sig;
        std::printf("  %s -> %s  regime %d  L=%d  F=%.3f  p=%.3e  n=%ld\n", c.source.c_str(), c.target.c_str(),
                    c.regime.value_or(-1), c.result->lag, c.result->f_stat, c.result->p_value,
                    static_cast<long>(c.result->n_obs));
    }
    std::printf("%d significant\n", n_sig);
    return 0;
}

// ---- validate --------------------------------------------------------------

struct ValidateOptions {
    std::string panel;
    std::string labels;
    std::string events;
    std::string out = "validation.csv";
    std::string source = "HML";
    std::string target = "SMB";
    int lag = 9;
    int horizon = 90;
    int crisis = -1;
    std::string mode = "raw";
};

std::vector<events::EventWindow> load_events(const std::string& path) {
    if (path.empty()) return events::default_event_windows();
    auto in = open_in(path);
    try {
        return events::parse_event_windows(in);
    } catch (const ParseError& e) {
        throw InputError(path + ": " + e.what());
    }
}

int cmd_validate(const ValidateOptions& o) {
    if (o.lag < 1) throw InputError("--lag must be >= 1");
    if (o.horizon < 0) throw InputError("--horizon must be >= 0");
    const Inputs in = load_inputs(o.panel, o.labels);
    const int crisis = resolve_crisis(o.crisis, in.n_regimes);
    const auto windows = load_events(o.events);
    const Eigen::VectorXd vol = volatility_norm(in.panel).values;

    std::printf("%-20s %10s %12s %12s %6s\n", "Event", "Detect(%)", "Detected", "Peak", "Lead");
    for (const auto& w : windows) {
        if (!events::window_rows(in.panel.dates(), w)) {
            std::printf("%-20s %10s\n", w.name.c_str(), "no data");
            continue;
        }
        const double rate = events::detection_rate(in.labels, in.panel.dates(), w, crisis);
        const auto lt = events::lead_time(in.labels, in.panel.dates(), vol, w, crisis, o.horizon);
        if (lt) {
            std::printf("%-20s %10.1f %12s %12s %6d\n", w.name.c_str(), 100.0 * rate, format_iso(lt->detection).c_str(),
                        format_iso(lt->peak).c_str(), lt->lead_days);
        } else {
            std::printf("%-20s %10.1f %12s %12s %6s\n", w.name.c_str(), 100.0 * rate, "-", "-", "-");
        }
    }

    events::EventValidationConfig cfg;
    cfg.source = o.source;
    cfg.target = o.target;
    cfg.lag = o.lag;
    cfg.crisis_index = crisis;
    if (o.mode == "raw") {
        cfg.mode = events::WindowMode::raw;
    } else if (o.mode == "crisis") {
        cfg.mode = events::WindowMode::crisis_days;
    } else {
        throw InputError("--mode must be raw or crisis");
    }
    const auto v = events::event_granger_validation(in.panel, windows, cfg, in.labels);
    auto out = open_out(o.out);
    events::write_validation_csv(out, v);
    std::printf("\n%-20s %6s %12s %12s %s\n", "Event", "Days", "p_fwd", "p_rev", "Class");
    for (const auto& r : v.rows) {
        std::printf("%-20s %6ld %12s %12s %s\n", r.event.c_str(), static_cast<long>(r.days),
                    r.p_forward ? fmt("%.4f", *r.p_forward).c_str() : "NA",
                    r.p_reverse ? fmt("%.4f", *r.p_reverse).c_str() : "NA", events::to_string(r.classification).c_str());
    }
    std::printf("CHECK %d of %d tested, binomial p=%.3e; CHECK+DIR %d, p=%.3e\n", v.n_check, v.n_tested,
                v.binomial_p_check, v.n_check_or_directional, v.binomial_p_check_or_directional);
    return 0;
}

// ---- backtest --------------------------------------------------------------

struct BacktestOptions {
    std::string panel;
    std::string labels;
    int window = 9;
    std::string start = "1995-01-01";
    std::string end = "2024-12-31";
    std::string out = "backtest.json";
    std::string returns_out;
    std::string source = "HML";
    std::string target = "SMB";
    int crisis = -1;
};

int cmd_backtest(const BacktestOptions& o) {
    if (o.window < 1) throw InputError("--window must be >= 1");
    const Date start = parse_date_flag(o.start, "--start");
    const Date end = parse_date_flag(o.end, "--end");
    if (end < start) throw InputError("--end precedes --start");
    const Inputs in = load_inputs(o.panel, o.labels);
    const int crisis = resolve_crisis(o.crisis, in.n_regimes);
    const Eigen::VectorXd src = in.panel.column(o.source);
    const Eigen::VectorXd tgt = in.panel.column(o.target);
    const Eigen::VectorXi signal = backtest::strategy_signal(src, in.labels, crisis, o.window);

    std::vector<Eigen::Index> rows;
    for (Eigen::Index t = 0; t < in.panel.rows(); ++t) {
        if (!(in.panel.dates()[t] < start) && !(end < in.panel.dates()[t])) rows.push_back(t);
    }
    if (rows.empty()) throw InputError("no panel dates inside [--start, --end]");
    std::vector<Date> dates;
    Eigen::VectorXi sig(static_cast<Eigen::Index>(rows.size()));
    Eigen::VectorXd target(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        dates.push_back(in.panel.dates()[rows[i]]);
        sig(static_cast<Eigen::Index>(i)) = signal(rows[i]);
        target(static_cast<Eigen::Index>(i)) = tgt(rows[i]);
    }
    const auto strategy = backtest::run(dates, sig, target);
    const auto hold = backtest::run(dates, Eigen::VectorXi::Ones(target.size()), target);
    {
        auto out = open_out(o.out);
        backtest::write_report_json(out, strategy, hold);
    }
    if (!o.returns_out.empty()) {
        auto out = open_out(o.returns_out);
        backtest::write_returns_csv(out, strategy, hold);
    }
    auto line = [](const char* name, const backtest::BacktestReport& r) {
        std::printf("%-14s %10.2f %8s %10.2f %8ld\n", name, r.annual_return,
                    r.sharpe ? fmt("%.2f", *r.sharpe).c_str() : "NA", r.max_drawdown, static_cast<long>(r.n_active_days));
    };
    std::printf("%-14s %10s %8s %10s %8s\n", "Strategy", "Annual(%)", "Sharpe", "MaxDD(%)", "Active");
    line("signal", strategy);
    line("buy-and-hold", hold);
    return 0;
}

// ---- plotdata --------------------------------------------------------------

struct PlotOptions {
    std::string panel;
    std::string labels;
    std::string events;
    std::string out = "timeline.csv";
};

int cmd_plotdata(const PlotOptions& o) {
    const Inputs in = load_inputs(o.panel, o.labels);
    const auto windows = load_events(o.events);
    const Eigen::VectorXd vol = volatility_norm(in.panel).values;
    std::vector<std::string> marker(static_cast<std::size_t>(in.panel.rows()));
    for (const auto& w : windows) {
        const auto rows = events::window_rows(in.panel.dates(), w);
        if (!rows) continue;
        for (Eigen::Index t = rows->first; t <= rows->second; ++t) {
            if (marker[t].empty()) marker[t] = w.name;
        }
    }
    auto out = open_out(o.out);
    out << "date,volatility_norm,regime,event\n";
    for (Eigen::Index t = 0; t < in.panel.rows(); ++t) {
        out << format_iso(in.panel.dates()[t]) << ',' << fmt("%.6f", vol(t)) << ',' << in.labels[t] << ','
            << marker[t] << '\n';
    }
    std::printf("wrote %ld rows to %s\n", static_cast<long>(in.panel.rows()), o.out.c_str());
    return 0;
}

// ---- simulate --------------------------------------------------------------

struct SimulateOptions {
    long long T = 4000;
    std::uint64_t seed = 0;
    std::string out = "synthetic_panel.csv";
    std::string labels = "synthetic_labels.csv";
    int cross_lag = 9;
    double cross_coef = 0.0;
};

int cmd_simulate(const SimulateOptions& o) {
    if (o.T < 1) throw InputError("--T must be >= 1");
    synthgen::SyntheticSpec spec{synthgen::table_like_params(), static_cast<Eigen::Index>(o.T), std::nullopt, o.seed};
    if (o.cross_coef != 0.0) {
        if (o.cross_lag < 1) throw InputError("--cross-lag must be >= 1");
        const auto& names = six_factor_names();
        const auto index = [&](const std::string& n) {
            return static_cast<int>(std::find(names.begin(), names.end(), n) - names.begin());
        };
        spec.cross_lag = synthgen::CrossLag{index("HML"), index("SMB"), 2, o.cross_lag, o.cross_coef};
    }
    const auto sim = synthgen::generate(spec);
    {
        auto out = open_out(o.out);
        write_panel_csv(out, sim.panel);
    }
    {
        auto out = open_out(o.labels);
        write_labels_csv(out, sim.panel.dates(), sim.labels);
    }
    std::printf("T=%ld d=%ld seed=%llu\n", static_cast<long>(sim.panel.rows()), static_cast<long>(sim.panel.cols()),
                static_cast<unsigned long long>(o.seed));
    return 0;
}

// ---- robustness ------------------------------------------------------------

struct RobustnessOptions {
    std::string panel;
    std::string labels;
    std::string out = "robustness";
    int lmax = 15;
    int weekly_lmax = 8;
    double alpha = 0.01;
    std::string split = "2008-01-01";
    std::string source = "HML";
    std::string target = "SMB";
    int lag = 9;
    int window = 21;
    double quantile = 0.90;
    int crisis = -1;
};

std::string opt_num(const std::optional<double>& v, const char* spec) { return v ? fmt(spec, *v) : "NA"; }

void write_result_row(std::ostream& out, const std::string& label, const std::optional<granger::GrangerResult>& r,
                      const std::string& error) {
    out << label << ',';
    if (r) {
        out << r->lag << ',' << fmt("%.6f", r->f_stat) << ',' << fmt("%.5e", r->p_value) << ',' << r->n_obs;
    } else {
        out << "NA,NA,NA,NA";
    }
    out << ',' << error << '\n';
}

int cmd_robustness(const RobustnessOptions& o) {
    if (o.lmax < 1 || o.weekly_lmax < 1 || o.lag < 1) throw InputError("lag flags must be >= 1");
    const Date split = parse_date_flag(o.split, "--split");
    const Inputs in = load_inputs(o.panel, o.labels);
    const int crisis = resolve_crisis(o.crisis, in.n_regimes);
    std::filesystem::create_directories(o.out);
    const std::filesystem::path dir(o.out);
    const Eigen::VectorXd x = in.panel.column(o.source);
    const Eigen::VectorXd y = in.panel.column(o.target);

    {
        const auto thr = robustness::threshold_regimes(in.panel, o.window, o.quantile);
        const auto cells = granger::pairwise_regime_matrix(in.panel, thr, 2, o.lmax, o.alpha);
        auto out = open_out((dir / "threshold.csv").string());
        granger::write_results_csv(out, cells);
    }
    {
        const auto masks = [&](int lag) { return granger::regime_lag_mask(in.labels, crisis, lag); };
        const auto rows = robustness::lag_sweep(y, x, masks, {5, 10, 15, 20});
        auto out = open_out((dir / "lag_sweep.csv").string());
        out << "max_lag,selected_lag,p_value,error\n";
        for (const auto& r : rows) {
            out << r.max_lag << ',' << (r.selected_lag ? std::to_string(*r.selected_lag) : "NA") << ','
                << opt_num(r.p_value, "%.5e") << ',' << r.error << '\n';
        }
    }
    {
        const auto s = robustness::subsample_split(in.panel, in.labels, in.n_regimes, split, crisis, o.lmax, o.alpha);
        auto out = open_out((dir / "subsample.csv").string());
        out << "side,source,target,regime,lag,f_stat,p_value,n_obs,note\n";
        auto side = [&](const char* name, const robustness::SubsampleSide& sd) {
            if (!sd.testable) {
                out << name << ",NA,NA,NA,NA,NA,NA,NA," << sd.note << '\n';
                return;
            }
            for (const auto& c : sd.cells) {
                out << name << ',' << c.source << ',' << c.target << ',' << (c.regime ? std::to_string(*c.regime) : "pooled") << ',';
                if (c.result) {
                    out << c.result->lag << ',' << fmt("%.6f", c.result->f_stat) << ','
                        << fmt("%.5e", c.result->p_value) << ',' << c.result->n_obs << ",\n";
                } else {
                    out << "NA,NA,NA,NA," << c.error << '\n';
                }
            }
        };
        side("before", s.before);
        side("after", s.after);
    }
    {
        const auto t = robustness::transition_window_analysis(in.panel, in.labels, crisis, o.source, o.target, o.lag);
        auto out = open_out((dir / "transitions.csv").string());
        out << "transition,side,n_transitions,lag,f_stat,p_value,n_obs,error\n";
        const std::string ne = std::to_string(t.entry.n_transitions), nx = std::to_string(t.exit.n_transitions);
        write_result_row(out, "entry,before," + ne, t.entry.before, t.entry.error);
        write_result_row(out, "entry,after," + ne, t.entry.after, t.entry.error);
        write_result_row(out, "exit,before," + nx, t.exit.before, t.exit.error);
        write_result_row(out, "exit,after," + nx, t.exit.after, t.exit.error);
        std::printf("transitions: %d entries, %d exits\n", t.entry.n_transitions, t.exit.n_transitions);
    }
    {
        const auto w = robustness::weekly_analysis(in.panel, in.labels, in.n_regimes, crisis, o.source, o.target,
                                                   o.weekly_lmax);
        auto out = open_out((dir / "weekly.csv").string());
        out << "n_weeks,n_crisis_weeks,lag,f_stat,p_value,n_obs,error\n";
        write_result_row(out, std::to_string(w.n_weeks) + ',' + std::to_string(w.n_crisis_weeks), w.result, w.error);
    }
    std::printf("wrote threshold.csv lag_sweep.csv subsample.csv transitions.csv weekly.csv to %s\n", o.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regime detection and regime-conditional Granger analysis for factor return panels"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    IngestOptions ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Parse and merge daily factor files into a canonical panel");
    c_ingest->add_option("--ff5", ingest.ff5, "Five-factor daily CSV")->required();
    c_ingest->add_option("--mom", ingest.mom, "Momentum daily CSV")->required();
    c_ingest->add_option("--out", ingest.out, "Output panel CSV")->required();
    c_ingest->add_option("--start", ingest.start, "First date kept (ISO)");
    c_ingest->add_option("--end", ingest.end, "Last date kept (ISO)");

    FitOptions fit;
    auto* c_fit = app.add_subcommand("fit", "Fit the hidden Markov model and decode regimes");
    c_fit->add_option("--panel", fit.panel, "Panel CSV")->required();
    auto* k_opt = c_fit->add_option("--k", fit.k, "Number of regimes")->capture_default_str();
    c_fit->add_option("--k-range", fit.k_range, "Select K by BIC over A:B")->excludes(k_opt);
    c_fit->add_option("--family", fit.family, "Emission family")
        ->check(CLI::IsMember({"student-t", "gaussian"}))
        ->capture_default_str();
    c_fit->add_option("--seed", fit.seed, "Random seed")->required();
    c_fit->add_option("--restarts", fit.restarts, "EM restarts")->capture_default_str();
    c_fit->add_option("--model", fit.model, "Output model JSON")->capture_default_str();
    c_fit->add_option("--labels", fit.labels, "Output labels CSV")->capture_default_str();

    GrangerOptions gr;
    auto* c_granger = app.add_subcommand("granger", "Pairwise regime-conditional Granger tests");
    c_granger->add_option("--panel", gr.panel, "Panel CSV")->required();
    c_granger->add_option("--labels", gr.labels, "Labels CSV")->required();
    c_granger->add_option("--lmax", gr.lmax, "Maximum lag for BIC selection")->capture_default_str();
    c_granger->add_option("--alpha", gr.alpha, "Family-wise level before Bonferroni")->capture_default_str();
    c_granger->add_option("--out", gr.out, "Output CSV")->capture_default_str();

    ValidateOptions va;
    auto* c_validate = app.add_subcommand("validate", "Event-window detection and Granger validation");
    c_validate->add_option("--panel", va.panel, "Panel CSV")->required();
    c_validate->add_option("--labels", va.labels, "Labels CSV")->required();
    c_validate->add_option("--events", va.events, "Event windows CSV (built-in windows when omitted)");
    c_validate->add_option("--out", va.out, "Output CSV")->capture_default_str();
    c_validate->add_option("--source", va.source, "Leading factor")->capture_default_str();
    c_validate->add_option("--target", va.target, "Lagging factor")->capture_default_str();
    c_validate->add_option("--lag", va.lag, "Fixed test lag")->capture_default_str();
    c_validate->add_option("--horizon", va.horizon, "Peak search horizon (trading days)")->capture_default_str();
    c_validate->add_option("--mode", va.mode, "Window rows: raw or crisis")
        ->check(CLI::IsMember({"raw", "crisis"}))
        ->capture_default_str();
    c_validate->add_option("--crisis", va.crisis, "Crisis regime index (-1: highest label)")->capture_default_str();

    BacktestOptions bt;
    auto* c_backtest = app.add_subcommand("backtest", "Crisis-gated signal-following backtest");
    c_backtest->add_option("--panel", bt.panel, "Panel CSV")->required();
    c_backtest->add_option("--labels", bt.labels, "Labels CSV")->required();
    c_backtest->add_option("--window", bt.window, "Trailing window of the signal")->capture_default_str();
    c_backtest->add_option("--start", bt.start, "First evaluation date (ISO)")->capture_default_str();
    c_backtest->add_option("--end", bt.end, "Last evaluation date (ISO)")->capture_default_str();
    c_backtest->add_option("--out", bt.out, "Output JSON report")->capture_default_str();
    c_backtest->add_option("--returns-out", bt.returns_out, "Optional daily returns CSV");
    c_backtest->add_option("--source", bt.source, "Signal factor")->capture_default_str();
    c_backtest->add_option("--target", bt.target, "Traded factor")->capture_default_str();
    c_backtest->add_option("--crisis", bt.crisis, "Crisis regime index (-1: highest label)")->capture_default_str();

    PlotOptions pl;
    auto* c_plot = app.add_subcommand("plotdata", "Export a regime timeline for plotting");
    c_plot->add_option("--panel", pl.panel, "Panel CSV")->required();
    c_plot->add_option("--labels", pl.labels, "Labels CSV")->required();
    c_plot->add_option("--events", pl.events, "Event windows CSV (built-in windows when omitted)");
    c_plot->add_option("--out", pl.out, "Output CSV")->capture_default_str();

    SimulateOptions sim;
    auto* c_sim = app.add_subcommand("simulate", "Generate a synthetic three-regime six-factor panel");
    c_sim->add_option("--T", sim.T, "Number of days")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "Random seed")->required();
    c_sim->add_option("--out", sim.out, "Output panel CSV")->capture_default_str();
    c_sim->add_option("--labels", sim.labels, "Output true-labels CSV")->capture_default_str();
    c_sim->add_option("--cross-lag", sim.cross_lag, "Lag of the planted HML->SMB term")->capture_default_str();
    c_sim->add_option("--cross-coef", sim.cross_coef, "Coefficient of the planted term in the crisis regime")
        ->capture_default_str();

    RobustnessOptions rb;
    auto* c_rob = app.add_subcommand("robustness", "Threshold, lag sweep, subsample, transition and weekly checks");
    c_rob->add_option("--panel", rb.panel, "Panel CSV")->required();
    c_rob->add_option("--labels", rb.labels, "Labels CSV")->required();
    c_rob->add_option("--out", rb.out, "Output directory")->capture_default_str();
    c_rob->add_option("--lmax", rb.lmax, "Maximum lag for BIC selection")->capture_default_str();
    c_rob->add_option("--weekly-lmax", rb.weekly_lmax, "Maximum lag for the weekly test")->capture_default_str();
    c_rob->add_option("--alpha", rb.alpha, "Family-wise level before Bonferroni")->capture_default_str();
    c_rob->add_option("--split", rb.split, "Subsample split date (ISO)")->capture_default_str();
    c_rob->add_option("--source", rb.source, "Leading factor")->capture_default_str();
    c_rob->add_option("--target", rb.target, "Lagging factor")->capture_default_str();
    c_rob->add_option("--lag", rb.lag, "Transition-window test lag")->capture_default_str();
    c_rob->add_option("--window", rb.window, "Realized-volatility window")->capture_default_str();
    c_rob->add_option("--quantile", rb.quantile, "Realized-volatility crisis quantile")->capture_default_str();
    c_rob->add_option("--crisis", rb.crisis, "Crisis regime index (-1: highest label)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    try {
        if (*c_ingest) return cmd_ingest(ingest);
        if (*c_fit) return cmd_fit(fit);
        if (*c_granger) return cmd_granger(gr);
        if (*c_validate) return cmd_validate(va);
        if (*c_backtest) return cmd_backtest(bt);
        if (*c_plot) return cmd_plotdata(pl);
        if (*c_sim) return cmd_simulate(sim);
        if (*c_rob) return cmd_robustness(rb);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "computation failed: " << e.what() << '\n';
        return kExitCompute;
    }
    return kExitInput;
}
