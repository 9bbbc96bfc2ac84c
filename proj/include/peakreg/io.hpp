// Ingestion and emission: trace/regulation CSV files, mean-preserving
// resampling, hour windowing, the flat key=value config file, and the JSON
// report documents. All emission is deterministic so reruns with the same
// inputs produce byte-identical files.

#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "peakreg/gain.hpp"
#include "peakreg/optimize.hpp"
#include "peakreg/peaks.hpp"
#include "peakreg/types.hpp"

namespace peakreg {

using ordered_json = nlohmann::ordered_json;

inline constexpr const char* kTraceHeader = "timestamp,power_mw";
inline constexpr const char* kRegulationHeader = "timestamp,r";

namespace detail {

inline std::string trim(std::string_view v) {
    std::size_t a = 0, b = v.size();
    while (a < b && std::isspace(static_cast<unsigned char>(v[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(v[b - 1]))) --b;
    return std::string(v.substr(a, b - a));
}

inline double parse_number(const std::string& text, const std::string& what, std::size_t line_no) {
    const std::string t = trim(text);
    if (t.empty())
        throw std::invalid_argument(what + ": empty numeric field at line " + std::to_string(line_no));
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || !std::isfinite(v))
        throw std::invalid_argument(what + ": bad number '" + t + "' at line " + std::to_string(line_no));
    return v;
}

struct CsvColumns {
    std::vector<double> timestamps;
    std::vector<double> values;
};

inline CsvColumns load_two_column_csv(const std::string& path, const char* expected_header,
                                      const std::string& what) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument(what + ": cannot open '" + path + "'");
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw std::invalid_argument(what + ": '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line) != expected_header)
        throw std::invalid_argument(what + ": expected header '" + std::string(expected_header) +
                                    "' in '" + path + "', got '" + trim(line) + "'");
    CsvColumns out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument(what + ": missing comma at line " + std::to_string(line_no));
        out.timestamps.push_back(parse_number(line.substr(0, comma), what, line_no));
        out.values.push_back(parse_number(line.substr(comma + 1), what, line_no));
    }
    if (out.values.size() < 2)
        throw std::invalid_argument(what + ": need at least two rows to infer the step length");
    return out;
}

inline double infer_uniform_step(const std::vector<double>& ts, const std::string& what) {
    const double t_s = ts[1] - ts[0];
    if (!(t_s > 0.0) || !std::isfinite(t_s))
        throw std::invalid_argument(what + ": timestamps must be strictly increasing");
    for (std::size_t i = 1; i < ts.size(); ++i) {
        const double d = ts[i] - ts[i - 1];
        if (std::abs(d - t_s) > 1e-6 * t_s)
            throw std::invalid_argument(what + ": non-uniform timestamp spacing at row index " +
                                        std::to_string(i) + " (expected " + std::to_string(t_s) +
                                        " s, got " + std::to_string(d) + " s)");
    }
    return t_s;
}

} // namespace detail

inline TraceSeries load_trace_csv(const std::string& path) {
    auto cols = detail::load_two_column_csv(path, kTraceHeader, "load_trace_csv");
    for (std::size_t i = 0; i < cols.values.size(); ++i)
        if (cols.values[i] < 0.0)
            throw std::invalid_argument("load_trace_csv: negative power at row index " +
                                        std::to_string(i));
    TraceSeries trace;
    trace.t_s = detail::infer_uniform_step(cols.timestamps, "load_trace_csv");
    trace.start_time = cols.timestamps[0];
    trace.samples = std::move(cols.values);
    validate(trace);
    return trace;
}

inline RegulationSeries load_regulation_csv(const std::string& path) {
    auto cols = detail::load_two_column_csv(path, kRegulationHeader, "load_regulation_csv");
    for (std::size_t i = 0; i < cols.values.size(); ++i) {
        double& v = cols.values[i];
        if (v < -1.001 || v > 1.001)
            throw std::invalid_argument("load_regulation_csv: value " + std::to_string(v) +
                                        " outside [-1,1] at row index " + std::to_string(i));
        v = std::clamp(v, -1.0, 1.0);
    }
    RegulationSeries reg;
    reg.t_s = detail::infer_uniform_step(cols.timestamps, "load_regulation_csv");
    reg.samples = std::move(cols.values);
    validate(reg);
    return reg;
}

namespace detail {

inline void write_two_column_csv(const std::string& path, const char* header, double start_time,
                                 double t_s, std::span<const double> values,
                                 const std::string& what) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(what + ": cannot write '" + path + "'");
    out << header << "\n";
    char buf[80];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f", start_time + static_cast<double>(i) * t_s,
                      values[i]);
        out << buf << "\n";
    }
    if (!out) throw std::runtime_error(what + ": write failed for '" + path + "'");
}

} // namespace detail

inline void write_trace_csv(const TraceSeries& trace, const std::string& path) {
    validate(trace);
    detail::write_two_column_csv(path, kTraceHeader, trace.start_time, trace.t_s, trace.samples,
                                 "write_trace_csv");
}

inline void write_regulation_csv(const RegulationSeries& reg, const std::string& path,
                                 double start_time = 0.0) {
    validate(reg);
    detail::write_two_column_csv(path, kRegulationHeader, start_time, reg.t_s, reg.samples,
                                 "write_regulation_csv");
}

namespace detail {

inline std::vector<double> block_means(std::span<const double> src, std::size_t k) {
    const std::size_t n = src.size() / k;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) sum += src[i * k + j];
        out[i] = sum / static_cast<double>(k);
    }
    return out;
}

inline std::size_t resample_ratio(double src_ts, double target_ts, const std::string& what) {
    detail::require(src_ts > 0.0 && target_ts > 0.0, what + ": step lengths must be > 0");
    const double ratio = target_ts / src_ts;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * rounded)
        throw std::invalid_argument(what + ": target step " + std::to_string(target_ts) +
                                    " s is not an integer multiple of source step " +
                                    std::to_string(src_ts) + " s");
    return static_cast<std::size_t>(rounded);
}

} // namespace detail

// Downsample by averaging whole windows; a trailing partial window is
// dropped. Window means (rather than decimation) preserve per-step energy.
inline TraceSeries resample(const TraceSeries& trace, double target_ts) {
    validate(trace);
    const std::size_t k = detail::resample_ratio(trace.t_s, target_ts, "resample");
    if (k == 1) return trace;
    detail::require(trace.size() >= k, "resample: input shorter than one output step");
    TraceSeries out;
    out.t_s = target_ts;
    out.start_time = trace.start_time;
    out.samples = detail::block_means(trace.samples, k);
    return out;
}

inline RegulationSeries resample(const RegulationSeries& reg, double target_ts) {
    validate(reg);
    const std::size_t k = detail::resample_ratio(reg.t_s, target_ts, "resample");
    if (k == 1) return reg;
    detail::require(reg.samples.size() >= k, "resample: input shorter than one output step");
    RegulationSeries out;
    out.t_s = target_ts;
    out.samples = detail::block_means(reg.samples, k);
    return out;
}

// Consecutive whole-hour windows; any trailing partial hour is dropped (the
// caller can detect this from trace.size() % samples_per_hour).
inline std::vector<TraceSeries> window_hours(const TraceSeries& trace) {
    validate(trace);
    const double steps = kSecondsPerHour / trace.t_s;
    if (std::abs(steps - std::round(steps)) > 1e-9)
        throw std::invalid_argument("window_hours: step length " + std::to_string(trace.t_s) +
                                    " s does not divide one hour");
    const std::size_t W = static_cast<std::size_t>(std::llround(steps));
    std::vector<TraceSeries> out;
    for (std::size_t k = 0; (k + 1) * W <= trace.size(); ++k) {
        TraceSeries w;
        w.t_s = trace.t_s;
        w.start_time = trace.start_time + static_cast<double>(k * W) * trace.t_s;
        w.samples.assign(trace.samples.begin() + static_cast<std::ptrdiff_t>(k * W),
                         trace.samples.begin() + static_cast<std::ptrdiff_t>((k + 1) * W));
        out.push_back(std::move(w));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration: flat key=value file, '#' comments.

struct Config {
    // $/MWh prices as the user writes them; per-step scaling happens in
    // tariff_for() so reports stay in dollars.
    double lambda_elec = 50.0;
    double lambda_peak_monthly = 29200.0;   // a peak-heavy demand charge
    double hours_per_month = 730.0;
    double lambda_c = 30.0;        // $/MW per one-hour window
    double lambda_b = 5.0;         // $/MWh throughput
    double lambda_mis = 30.0;      // $/MWh mismatch

    double battery_p_mw = -1.0;    // <0: derive from the trace
    double battery_e_mwh = -1.0;   // <0: derive as P/6
    double battery_soc_ini = 0.55;
    double battery_soc_min = 0.2;
    double battery_soc_max = 0.9;

    double f = kDefaultCappingFraction;
    double nocp_gap_s = kDefaultNocpGapSeconds;
    BaselineMode baseline_mode = BaselineMode::PeakPlan;
    bool net_energy_zero = true;
    // Bids default to the physical rating: an uncapped C is unbounded
    // whenever the capacity fee beats the worst-case mismatch penalty.
    double capacity_cap_ratio = 1.0;   // C <= ratio * P; <= 0 removes the cap
    double solver_tol = 1e-8;
    double reg_sigma = 0.3;
    std::uint64_t seed = 42;

    // Battery from config, falling back to trace-derived sizing (flagged).
    std::pair<BatterySpec, bool> battery_for(const TraceSeries& trace) const {
        BatterySpec b;
        bool defaulted = false;
        if (battery_p_mw > 0.0) {
            b.power_cap = battery_p_mw;
        } else {
            b.power_cap = *std::max_element(trace.samples.begin(), trace.samples.end());
            defaulted = true;
        }
        if (battery_e_mwh > 0.0) {
            b.energy_cap = battery_e_mwh;
        } else {
            b.energy_cap = b.power_cap / 6.0;   // ten-minute ride-through
            defaulted = true;
        }
        b.soc_ini = battery_soc_ini;
        b.soc_min = battery_soc_min;
        b.soc_max = battery_soc_max;
        validate(b);
        return {b, defaulted};
    }

    // Per-step tariff for a window of the given length.
    Tariff tariff_for(double t_s_seconds, double window_hours_count = 1.0) const {
        const double step_h = t_s_seconds / kSecondsPerHour;
        Tariff t;
        t.lambda_elec = lambda_elec * step_h;
        t.lambda_mis = lambda_mis * step_h;
        t.lambda_b = lambda_b * step_h;
        t.lambda_peak = amortize_peak_price(lambda_peak_monthly, hours_per_month) * window_hours_count;
        t.lambda_c = lambda_c * window_hours_count;
        validate(t);
        return t;
    }

    SolveOptions solve_options() const {
        SolveOptions o;
        o.net_energy_zero = net_energy_zero;
        o.baseline_mode = baseline_mode;
        o.capacity_cap_ratio = capacity_cap_ratio > 0.0 ? capacity_cap_ratio : kInf;
        o.lp.feas_tol = solver_tol;
        return o;
    }

    ordered_json echo() const {
        ordered_json j;
        j["lambda_elec"] = lambda_elec;
        j["lambda_peak_monthly"] = lambda_peak_monthly;
        j["hours_per_month"] = hours_per_month;
        j["lambda_c"] = lambda_c;
        j["lambda_b"] = lambda_b;
        j["lambda_mis"] = lambda_mis;
        j["battery.p_mw"] = battery_p_mw;
        j["battery.e_mwh"] = battery_e_mwh;
        j["battery.soc_ini"] = battery_soc_ini;
        j["battery.soc_min"] = battery_soc_min;
        j["battery.soc_max"] = battery_soc_max;
        j["f"] = f;
        j["nocp_gap_s"] = nocp_gap_s;
        j["baseline_mode"] = baseline_mode == BaselineMode::Raw       ? "raw"
                             : baseline_mode == BaselineMode::PeakPlan ? "peak_plan"
                                                                       : "free";
        j["net_energy_zero"] = net_energy_zero;
        j["capacity_cap_ratio"] = capacity_cap_ratio;
        j["solver.tol"] = solver_tol;
        j["reg_model.sigma"] = reg_sigma;
        j["seed"] = seed;
        return j;
    }
};

inline BaselineMode parse_baseline_mode(const std::string& v) {
    if (v == "raw") return BaselineMode::Raw;
    if (v == "peak_plan") return BaselineMode::PeakPlan;
    if (v == "free") return BaselineMode::Free;
    throw std::invalid_argument("baseline_mode must be raw, peak_plan or free (got '" + v + "')");
}

inline Config parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("parse_config: cannot open '" + path + "'");
    Config cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = detail::trim(line);
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("parse_config: expected key=value at line " +
                                        std::to_string(line_no));
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        auto num = [&] { return detail::parse_number(value, "parse_config", line_no); };
        auto flag = [&]() -> bool {
            if (value == "true" || value == "1") return true;
            if (value == "false" || value == "0") return false;
            throw std::invalid_argument("parse_config: boolean expected at line " +
                                        std::to_string(line_no));
        };
        if (key == "lambda_elec") cfg.lambda_elec = num();
        else if (key == "lambda_peak_monthly") cfg.lambda_peak_monthly = num();
        else if (key == "hours_per_month") cfg.hours_per_month = num();
        else if (key == "lambda_c") cfg.lambda_c = num();
        else if (key == "lambda_b") cfg.lambda_b = num();
        else if (key == "lambda_mis") cfg.lambda_mis = num();
        else if (key == "battery.p_mw") cfg.battery_p_mw = num();
        else if (key == "battery.e_mwh") cfg.battery_e_mwh = num();
        else if (key == "battery.soc_ini") cfg.battery_soc_ini = num();
        else if (key == "battery.soc_min") cfg.battery_soc_min = num();
        else if (key == "battery.soc_max") cfg.battery_soc_max = num();
        else if (key == "f") cfg.f = num();
        else if (key == "nocp_gap_s") cfg.nocp_gap_s = num();
        else if (key == "baseline_mode") cfg.baseline_mode = parse_baseline_mode(value);
        else if (key == "net_energy_zero") cfg.net_energy_zero = flag();
        else if (key == "capacity_cap_ratio") cfg.capacity_cap_ratio = num();
        else if (key == "solver.tol") cfg.solver_tol = num();
        else if (key == "reg_model.sigma") cfg.reg_sigma = num();
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(num());
        else
            throw std::invalid_argument("parse_config: unknown key '" + key + "' at line " +
                                        std::to_string(line_no));
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// JSON reports.

inline ordered_json breakdown_json(const BillBreakdown& b) {
    ordered_json j;
    j["energy_cost"] = b.energy_cost;
    j["peak_cost"] = b.peak_cost;
    j["battery_cost"] = b.battery_cost;
    j["mismatch_penalty"] = b.mismatch_penalty;
    j["capacity_revenue"] = b.capacity_revenue;
    j["total"] = b.total;
    return j;
}

inline ordered_json cdf_json(const std::vector<std::pair<double, double>>& cdf) {
    ordered_json arr = ordered_json::array();
    for (const auto& [x, p] : cdf) arr.push_back(ordered_json::array({x, p}));
    return arr;
}

inline ordered_json sweep_report_json(const ordered_json& config_echo, const SweepResult& result) {
    ordered_json doc;
    doc["config_echo"] = config_echo;
    ordered_json windows = ordered_json::array();
    for (const auto& w : result.windows) {
        ordered_json rec;
        rec["index"] = w.index;
        rec["J"] = w.result.gain.J;
        rec["J_p"] = w.result.gain.J_p;
        rec["J_r"] = w.result.gain.J_r;
        rec["J_star"] = w.result.gain.J_star;
        rec["q"] = w.result.gain.q;
        rec["superlinear"] = w.result.gain.superlinear;
        ordered_json bills;
        bills["original"] = breakdown_json(w.result.original);
        bills["peak_shaving"] = breakdown_json(w.result.peak_shaving);
        bills["regulation"] = breakdown_json(w.result.regulation);
        bills["joint"] = breakdown_json(w.result.joint);
        rec["bill_breakdowns"] = bills;
        windows.push_back(std::move(rec));
    }
    doc["per_window"] = std::move(windows);
    ordered_json summary;
    summary["hours_total"] = result.summary.hours_total;
    summary["hours_superlinear"] = result.summary.hours_superlinear;
    summary["probability"] = result.summary.probability;
    summary["mean_q"] = result.summary.mean_q;
    std::vector<double> qs = result.summary.q_values;
    std::vector<std::pair<double, double>> cdf;
    if (!qs.empty()) {
        std::sort(qs.begin(), qs.end());
        for (std::size_t i = 0; i < qs.size(); ++i) {
            const double p = static_cast<double>(i + 1) / static_cast<double>(qs.size());
            if (!cdf.empty() && cdf.back().first == qs[i]) cdf.back().second = p;
            else cdf.emplace_back(qs[i], p);
        }
    }
    summary["q_cdf"] = cdf_json(cdf);
    doc["summary"] = std::move(summary);
    return doc;
}

inline void write_report_json(const ordered_json& config_echo, const SweepResult& result,
                              const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_json: cannot write '" + path + "'");
    out << sweep_report_json(config_echo, result).dump(2) << "\n";
    if (!out) throw std::runtime_error("write_report_json: write failed for '" + path + "'");
}

inline ordered_json category_table_json(const ordered_json& config_echo,
                                        const std::vector<CategoryOutcome>& rows) {
    ordered_json doc;
    doc["config_echo"] = config_echo;
    ordered_json arr = ordered_json::array();
    for (const auto& row : rows) {
        ordered_json r;
        r["name"] = category_name(row.category);
        r["shape"] = row.category.shape == PeakShape::Rectangular ? "rectangular" : "triangular";
        r["width"] = row.category.width == PeakWidthClass::Narrow ? "narrow" : "wide";
        r["height"] = row.category.height == PeakHeightClass::Low ? "low" : "high";
        r["count"] = row.category.count;
        r["trials"] = row.trials;
        r["superlinear_count"] = row.superlinear_count;
        r["probability"] = row.probability;
        r["mean_q"] = row.mean_q;
        arr.push_back(std::move(r));
    }
    doc["categories"] = std::move(arr);
    return doc;
}

inline ordered_json peak_stats_json(const ordered_json& config_echo, const PeakStats& stats) {
    ordered_json doc;
    doc["config_echo"] = config_echo;
    doc["day_count"] = stats.day_count;
    doc["total_peaks"] = stats.total_peaks;
    doc["has_partial_days"] = stats.has_partial_days;
    doc["height_cdf"] = cdf_json(stats.height_cdf);
    doc["width_cdf"] = cdf_json(stats.width_cdf);
    doc["gap_cdf"] = cdf_json(stats.gap_cdf);
    ordered_json hist;
    for (const auto& [size, n] : stats.nocp_histogram) hist[std::to_string(size)] = n;
    doc["nocp_histogram"] = std::move(hist);
    ordered_json shapes = ordered_json::array();
    for (const auto v : stats.day_shapes) shapes.push_back(to_string(v));
    doc["day_shapes"] = std::move(shapes);
    return doc;
}

} // namespace peakreg
