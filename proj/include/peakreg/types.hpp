// Core value types for battery dispatch studies: load and regulation
// series, battery limits, tariff coefficients, dispatch results and
// itemized bills. Everything here is a plain immutable-by-convention
// value; validation is explicit and throws std::invalid_argument.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace peakreg {

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr std::size_t kNoViolation = static_cast<std::size_t>(-1);

// Data-center load s(t) in MW at a fixed step length.
struct TraceSeries {
    std::vector<double> samples;   // MW, finite and >= 0
    double t_s = 0.0;              // step length, seconds
    std::int64_t start_time = 0;   // UTC epoch seconds of samples[0]

    std::size_t size() const { return samples.size(); }
    double step_hours() const { return t_s / kSecondsPerHour; }
};

// Normalized regulation signal r(t) in [-1, 1].
struct RegulationSeries {
    std::vector<double> samples;
    double t_s = 0.0;              // seconds

    std::size_t size() const { return samples.size(); }
    double step_hours() const { return t_s / kSecondsPerHour; }
};

// Battery power/energy ratings and the admissible state-of-charge window,
// SoC expressed as a fraction of the energy capacity.
struct BatterySpec {
    double power_cap = 0.0;    // P, MW
    double energy_cap = 0.0;   // E, MWh
    double soc_ini = 0.5;
    double soc_min = 0.0;
    double soc_max = 1.0;
};

// Price coefficients. Per-MWh prices (lambda_elec, lambda_b, lambda_mis)
// are stored already multiplied by the step length in hours, so every
// billing formula is a plain sum over MW samples; lambda_peak is the
// hourly amortized demand charge and lambda_c the per-window capacity fee.
struct Tariff {
    double lambda_elec = 0.0;   // $/MW per step
    double lambda_peak = 0.0;   // $/MW per window
    double lambda_c = 0.0;      // $/MW of capacity per window
    double lambda_b = 0.0;      // $/MW of throughput per step
    double lambda_mis = 0.0;    // $/MW of mismatch per step
};

// How the reported baseline y(t) is fixed when evaluating regulation
// mismatch in the joint problem.
enum class BaselineMode {
    Raw,        // y = s, the unmodified load
    PeakPlan,   // y = s - b_peak, the pre-committed peak-shaving plan
    Free,       // y is chosen by the optimizer, y >= 0
};

// A battery schedule plus the quantities the market settlement needs.
// b > 0 denotes discharge.
struct DispatchSolution {
    std::vector<double> b;     // MW
    double capacity_bid = 0.0; // C, MW
    std::vector<double> y;     // MW, reported baseline
    std::vector<double> soc;   // fraction of E after each step
};

struct BillBreakdown {
    double energy_cost = 0.0;
    double peak_cost = 0.0;
    double battery_cost = 0.0;
    double mismatch_penalty = 0.0;
    double capacity_revenue = 0.0;
    double total = 0.0;
};

// Outcome of the four-scenario comparison for one window. q > 0 means the
// joint saving exceeded the sum of the two single-application savings.
struct GainReport {
    double J = 0.0;        // idle-battery bill
    double J_p = 0.0;      // peak-shaving-only bill
    double J_r = 0.0;      // regulation-only bill
    double J_star = 0.0;   // joint bill
    double q = 0.0;
    bool superlinear = false;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

inline bool all_finite(std::span<const double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace detail

inline void validate(const TraceSeries& t) {
    detail::require(t.t_s > 0.0 && std::isfinite(t.t_s), "trace: step length must be positive");
    detail::require(!t.samples.empty(), "trace: at least one sample required");
    for (std::size_t i = 0; i < t.samples.size(); ++i)
        detail::require(std::isfinite(t.samples[i]) && t.samples[i] >= 0.0,
                        "trace: sample " + std::to_string(i) + " must be finite and >= 0");
}

inline void validate(const RegulationSeries& r) {
    detail::require(r.t_s > 0.0 && std::isfinite(r.t_s), "regulation: step length must be positive");
    for (std::size_t i = 0; i < r.samples.size(); ++i)
        detail::require(std::isfinite(r.samples[i]) && std::abs(r.samples[i]) <= 1.0,
                        "regulation: sample " + std::to_string(i) + " outside [-1, 1]");
}

inline void validate(const BatterySpec& b) {
    detail::require(std::isfinite(b.power_cap) && b.power_cap >= 0.0, "battery: power capacity must be >= 0");
    detail::require(std::isfinite(b.energy_cap) && b.energy_cap > 0.0, "battery: energy capacity must be > 0");
    detail::require(0.0 <= b.soc_min && b.soc_min <= b.soc_ini && b.soc_ini <= b.soc_max && b.soc_max <= 1.0,
                    "battery: need 0 <= soc_min <= soc_ini <= soc_max <= 1");
}

inline void validate(const Tariff& t) {
    for (double v : {t.lambda_elec, t.lambda_peak, t.lambda_c, t.lambda_b, t.lambda_mis})
        detail::require(std::isfinite(v) && v >= 0.0, "tariff: coefficients must be finite and >= 0");
}

// State of charge after each step for a given schedule. Discharge (b > 0)
// drains the battery. Returns the full trajectory even when it leaves the
// SoC window; bound checking is the caller's concern.
inline std::vector<double> soc_trajectory(std::span<const double> b, const BatterySpec& battery,
                                          double t_s_seconds) {
    validate(battery);
    detail::require(t_s_seconds > 0.0 && std::isfinite(t_s_seconds), "soc_trajectory: bad step length");
    detail::require(detail::all_finite(b), "soc_trajectory: schedule has non-finite entries");
    const double step_h = t_s_seconds / kSecondsPerHour;
    std::vector<double> soc(b.size());
    double energy = battery.soc_ini * battery.energy_cap;   // MWh
    for (std::size_t t = 0; t < b.size(); ++t) {
        energy -= b[t] * step_h;
        soc[t] = energy / battery.energy_cap;
    }
    return soc;
}

// Feasibility check used before billing a dispatch: power rating and SoC
// window, with a small absolute guard for solver round-off. Returns the
// first violating step index, or npos when feasible.
inline std::size_t first_dispatch_violation(const DispatchSolution& d, const BatterySpec& battery,
                                            double t_s_seconds, double tol = 1e-9) {
    const double p_tol = battery.power_cap + tol * std::max(1.0, battery.power_cap);
    for (std::size_t t = 0; t < d.b.size(); ++t)
        if (!(std::abs(d.b[t]) <= p_tol)) return t;
    const std::vector<double> soc =
        d.soc.size() == d.b.size() ? d.soc : soc_trajectory(d.b, battery, t_s_seconds);
    for (std::size_t t = 0; t < soc.size(); ++t)
        if (!(soc[t] >= battery.soc_min - tol && soc[t] <= battery.soc_max + tol)) return t;
    return kNoViolation;
}

} // namespace peakreg
