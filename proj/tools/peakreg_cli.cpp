// Command-line surface: billing, the three optimizers, hourly sweeps, peak
// statistics, synthetic data generation, and the category experiment table.
// Exit codes: 0 success, 1 input error, 2 solver error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "peakreg/peakreg.hpp"

namespace {

using namespace peakreg;

// Battery used by `experiment categories` when the config does not size one
// (there is no input trace to derive it from). Chosen so the category trends
// are well separated; see README for the calibration notes.
constexpr BatterySpec kExperimentBattery{0.4, 0.4 / 6.0, 0.55, 0.2, 0.9};

struct CommonArgs {
    std::string trace_path, reg_path, config_path, out_path;
    bool normalize = false;
};

Config load_config_or_default(const std::string& path) {
    return path.empty() ? Config{} : parse_config(path);
}

TraceSeries load_trace(const CommonArgs& args) {
    TraceSeries t = load_trace_csv(args.trace_path);
    if (args.normalize) {
        const double p_max = *std::max_element(t.samples.begin(), t.samples.end());
        if (p_max > 0.0)
            for (double& v : t.samples) v /= p_max;
    }
    return t;
}

double duration_hours(const TraceSeries& t) {
    return static_cast<double>(t.size()) * t.t_s / kSecondsPerHour;
}

// Regulation series aligned to the trace: resampled to its step length and
// truncated to its length.
RegulationSeries load_aligned_regulation(const std::string& path, const TraceSeries& trace) {
    RegulationSeries r = load_regulation_csv(path);
    if (std::abs(r.t_s - trace.t_s) > 1e-9 * trace.t_s) r = resample(r, trace.t_s);
    if (r.samples.size() < trace.size())
        throw std::invalid_argument("regulation signal shorter than the trace (" +
                                    std::to_string(r.samples.size()) + " < " +
                                    std::to_string(trace.size()) + " samples at " +
                                    std::to_string(trace.t_s) + " s)");
    r.samples.resize(trace.size());
    return r;
}

void emit(const ordered_json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed for '" + out_path + "'");
}

ordered_json dispatch_json(const DispatchSolution& d) {
    ordered_json j;
    j["capacity_bid"] = d.capacity_bid;
    j["b"] = d.b;
    j["y"] = d.y;
    j["soc"] = d.soc;
    return j;
}

int cmd_bill(const CommonArgs& args) {
    const Config cfg = load_config_or_default(args.config_path);
    const TraceSeries trace = load_trace(args);
    const Tariff tariff = cfg.tariff_for(trace.t_s, duration_hours(trace));
    const double energy = energy_cost(trace.samples, tariff);
    const double peak = peak_cost(trace.samples, tariff);
    std::printf("baseline bill: %.2f  (energy %.2f, peak %.2f; %zu samples, %.2f h)\n",
                energy + peak, energy, peak, trace.size(), duration_hours(trace));
    return 0;
}

int cmd_optimize(const CommonArgs& args, const std::string& mode, const std::string& dump_lp) {
    const Config cfg = load_config_or_default(args.config_path);
    const TraceSeries trace = load_trace(args);
    const auto [battery, battery_defaulted] = cfg.battery_for(trace);
    const Tariff tariff = cfg.tariff_for(trace.t_s, duration_hours(trace));
    SolveOptions opts = cfg.solve_options();
    opts.dump_lp_path = dump_lp;

    ordered_json doc;
    doc["config_echo"] = cfg.echo();
    doc["battery_defaulted"] = battery_defaulted;
    doc["mode"] = mode;

    if (mode == "peak") {
        const PeakShavingResult res = optimize_peak_shaving(trace, battery, tariff, opts);
        doc["status"] = "optimal";
        doc["objective"] = res.objective;
        doc["iterations"] = res.iterations;
        doc["bill"] = breakdown_json(res.bill);
        doc["dispatch"] = dispatch_json(res.dispatch);
    } else if (mode == "regulation") {
        const RegulationSeries reg = load_aligned_regulation(args.reg_path, trace);
        const RegulationResult res = optimize_regulation(reg, battery, tariff, opts);
        doc["status"] = "optimal";
        doc["revenue"] = res.revenue;
        doc["total_bill"] = regulation_total_bill(trace, res, tariff);
        doc["iterations"] = res.iterations;
        doc["bill"] = breakdown_json(bill_breakdown(trace, res.dispatch, reg.samples, tariff,
                                                    BaselineMode::Raw, battery));
        doc["dispatch"] = dispatch_json(res.dispatch);
    } else {   // joint
        const RegulationSeries reg = load_aligned_regulation(args.reg_path, trace);
        const JointResult res = optimize_joint(trace, reg, battery, tariff, opts);
        doc["status"] = res.status == LpStatus::Optimal ? "optimal" : "unbounded";
        doc["message"] = res.message;
        doc["iterations"] = res.iterations;
        if (res.status == LpStatus::Optimal) {
            doc["objective"] = res.objective;
            doc["bill"] = breakdown_json(res.bill);
            doc["dispatch"] = dispatch_json(res.dispatch);
        }
    }
    emit(doc, args.out_path);
    return 0;
}

int cmd_sweep(const CommonArgs& args, unsigned workers) {
    const Config cfg = load_config_or_default(args.config_path);
    const TraceSeries trace = load_trace(args);
    const RegulationSeries reg = load_aligned_regulation(args.reg_path, trace);
    const auto [battery, battery_defaulted] = cfg.battery_for(trace);
    const Tariff tariff = cfg.tariff_for(trace.t_s, 1.0);   // hourly windows
    const SweepResult result = sweep(trace, reg, battery, tariff, cfg.solve_options(), workers);

    ordered_json echo = cfg.echo();
    echo["battery_defaulted"] = battery_defaulted;
    if (args.out_path.empty()) {
        std::cout << sweep_report_json(echo, result).dump(2) << "\n";
    } else {
        write_report_json(echo, result, args.out_path);
        std::printf("sweep: %zu hours, %zu superlinear (probability %.3f, mean q %.4f) -> %s\n",
                    result.summary.hours_total, result.summary.hours_superlinear,
                    result.summary.probability, result.summary.mean_q, args.out_path.c_str());
    }
    return 0;
}

int cmd_analyze_peaks(const CommonArgs& args) {
    const Config cfg = load_config_or_default(args.config_path);
    const TraceSeries trace = load_trace(args);
    const PeakStats stats = peak_statistics(trace, cfg.f, cfg.nocp_gap_s);
    emit(peak_stats_json(cfg.echo(), stats), args.out_path);
    return 0;
}

PeakCategory parse_category(const std::string& text) {
    PeakCategory c;
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t dot = text.find('.', pos);
        parts.push_back(text.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos));
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    if (parts.size() != 3)
        throw std::invalid_argument("category must be shape.width.height, e.g. rect.narrow.low");
    if (parts[0] == "rect") c.shape = PeakShape::Rectangular;
    else if (parts[0] == "tri") c.shape = PeakShape::Triangular;
    else throw std::invalid_argument("category shape must be rect or tri");
    if (parts[1] == "narrow") c.width = PeakWidthClass::Narrow;
    else if (parts[1] == "wide") c.width = PeakWidthClass::Wide;
    else throw std::invalid_argument("category width must be narrow or wide");
    if (parts[2] == "low") c.height = PeakHeightClass::Low;
    else if (parts[2] == "high") c.height = PeakHeightClass::High;
    else throw std::invalid_argument("category height must be low or high");
    return c;
}

int cmd_synth_trace(const std::string& category_text, int count, double gap_s, double hours,
                    double t_s, const std::string& out_path) {
    PeakCategory c = parse_category(category_text);
    c.count = count;
    c.gap_s = gap_s;
    const std::size_t T = static_cast<std::size_t>(std::llround(hours * kSecondsPerHour / t_s));
    const TraceSeries trace = synth_trace(c, T, t_s);
    write_trace_csv(trace, out_path);
    std::printf("wrote %zu samples (%s, %.1f h at %.0f s) to %s\n", trace.size(),
                category_name(c).c_str(), hours, t_s, out_path.c_str());
    return 0;
}

int cmd_synth_reg(double sigma, std::uint64_t seed, double hours, double t_s,
                  const std::string& out_path) {
    const std::size_t T = static_cast<std::size_t>(std::llround(hours * kSecondsPerHour / t_s));
    RegulationModel model;
    model.step_sigma = sigma;
    model.seed = seed;
    const RegulationSeries reg = synth_regulation(model, T, t_s);
    write_regulation_csv(reg, out_path);
    std::printf("wrote %zu samples (sigma %.3f, seed %llu) to %s\n", reg.samples.size(), sigma,
                static_cast<unsigned long long>(seed), out_path.c_str());
    return 0;
}

int cmd_experiment_categories(const CommonArgs& args, std::size_t trials, unsigned workers) {
    const Config cfg = load_config_or_default(args.config_path);
    BatterySpec battery = kExperimentBattery;
    if (cfg.battery_p_mw > 0.0 && cfg.battery_e_mwh > 0.0) {
        battery = BatterySpec{cfg.battery_p_mw, cfg.battery_e_mwh, cfg.battery_soc_ini,
                              cfg.battery_soc_min, cfg.battery_soc_max};
        validate(battery);
    }
    const Tariff tariff = cfg.tariff_for(kExperimentStepSeconds, 1.0);
    RegulationModel model;
    model.step_sigma = cfg.reg_sigma;
    const SolveOptions opts = cfg.solve_options();

    std::vector<PeakCategory> cats;
    for (PeakShape sh : {PeakShape::Rectangular, PeakShape::Triangular})
        for (PeakWidthClass w : {PeakWidthClass::Narrow, PeakWidthClass::Wide})
            for (PeakHeightClass h : {PeakHeightClass::Low, PeakHeightClass::High})
                cats.push_back(PeakCategory{sh, w, h, 1, 120.0});
    for (int n : {2, 3})
        cats.push_back(PeakCategory{PeakShape::Triangular, PeakWidthClass::Narrow,
                                    PeakHeightClass::Low, n, 120.0});

    std::vector<CategoryOutcome> rows;
    rows.reserve(cats.size());
    for (const auto& c : cats)
        rows.push_back(category_experiment(c, trials, model, battery, tariff, cfg.seed, opts,
                                           workers));
    ordered_json echo = cfg.echo();
    echo["experiment_battery"] = ordered_json{{"p_mw", battery.power_cap},
                                              {"e_mwh", battery.energy_cap},
                                              {"soc_ini", battery.soc_ini},
                                              {"soc_min", battery.soc_min},
                                              {"soc_max", battery.soc_max}};
    emit(category_table_json(echo, rows), args.out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Battery co-optimization for peak shaving and frequency regulation"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string mode = "joint", dump_lp, category = "rect.narrow.low";
    unsigned workers = 1;
    std::size_t trials = 100;
    int count = 1;
    double gap_s = 120.0, hours = 1.0, t_s = 20.0, sigma = 0.3;
    std::uint64_t seed = 42;

    auto* bill = app.add_subcommand("bill", "Baseline bill for a trace");
    bill->add_option("--trace", args.trace_path, "trace CSV")->required();
    bill->add_option("--config", args.config_path, "config file");
    bill->add_flag("--normalize", args.normalize, "scale the trace to unit peak");

    auto* optimize = app.add_subcommand("optimize", "Solve one dispatch problem");
    optimize->add_option("--mode", mode, "peak, regulation or joint")
        ->check(CLI::IsMember({"peak", "regulation", "joint"}));
    optimize->add_option("--trace", args.trace_path, "trace CSV")->required();
    optimize->add_option("--reg", args.reg_path, "regulation CSV");
    optimize->add_option("--config", args.config_path, "config file");
    optimize->add_option("--out", args.out_path, "report JSON path (stdout if omitted)");
    optimize->add_option("--dump-lp", dump_lp, "write the LP in plain text before solving");
    optimize->add_flag("--normalize", args.normalize, "scale the trace to unit peak");

    auto* sweep_cmd = app.add_subcommand("sweep", "Hourly four-scenario sweep");
    sweep_cmd->add_option("--trace", args.trace_path, "trace CSV")->required();
    sweep_cmd->add_option("--reg", args.reg_path, "regulation CSV")->required();
    sweep_cmd->add_option("--config", args.config_path, "config file");
    sweep_cmd->add_option("--out", args.out_path, "report JSON path (stdout if omitted)");
    sweep_cmd->add_option("--workers", workers, "worker threads (default 1)");
    sweep_cmd->add_flag("--normalize", args.normalize, "scale the trace to unit peak");

    auto* analyze = app.add_subcommand("analyze-peaks", "Peak statistics for a trace");
    analyze->add_option("--trace", args.trace_path, "trace CSV")->required();
    analyze->add_option("--config", args.config_path, "config file");
    analyze->add_option("--out", args.out_path, "stats JSON path (stdout if omitted)");

    auto* synth = app.add_subcommand("synth", "Generate synthetic inputs");
    synth->require_subcommand(1);
    auto* synth_trace_cmd = synth->add_subcommand("trace", "Synthetic load trace");
    synth_trace_cmd->add_option("--category", category, "shape.width.height, e.g. tri.wide.high");
    synth_trace_cmd->add_option("--count", count, "consecutive peaks (default 1)");
    synth_trace_cmd->add_option("--gap", gap_s, "gap between consecutive peaks, seconds");
    synth_trace_cmd->add_option("--hours", hours, "trace length in hours (default 1)");
    synth_trace_cmd->add_option("--ts", t_s, "step length in seconds (default 20)");
    synth_trace_cmd->add_option("--out", args.out_path, "output CSV")->required();
    auto* synth_reg_cmd = synth->add_subcommand("reg", "Synthetic regulation signal");
    synth_reg_cmd->add_option("--sigma", sigma, "walk step sigma (default 0.3)");
    synth_reg_cmd->add_option("--seed", seed, "generator seed (default 42)");
    synth_reg_cmd->add_option("--hours", hours, "signal length in hours (default 1)");
    synth_reg_cmd->add_option("--ts", t_s, "step length in seconds (default 20)");
    synth_reg_cmd->add_option("--out", args.out_path, "output CSV")->required();

    auto* experiment = app.add_subcommand("experiment", "Batch experiments");
    experiment->require_subcommand(1);
    auto* categories = experiment->add_subcommand("categories", "Superlinear probability by peak category");
    categories->add_option("--trials", trials, "trials per category (default 100)");
    categories->add_option("--config", args.config_path, "config file");
    categories->add_option("--workers", workers, "worker threads (default 1)");
    categories->add_option("--out", args.out_path, "table JSON path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (bill->parsed()) return cmd_bill(args);
        if (optimize->parsed()) return cmd_optimize(args, mode, dump_lp);
        if (sweep_cmd->parsed()) return cmd_sweep(args, workers);
        if (analyze->parsed()) return cmd_analyze_peaks(args);
        if (synth->parsed()) {
            if (synth_trace_cmd->parsed())
                return cmd_synth_trace(category, count, gap_s, hours, t_s, args.out_path);
            return cmd_synth_reg(sigma, seed, hours, t_s, args.out_path);
        }
        if (experiment->parsed()) return cmd_experiment_categories(args, trials, workers);
        std::fprintf(stderr, "no subcommand selected\n");
        return 1;
    } catch (const peakreg::SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
