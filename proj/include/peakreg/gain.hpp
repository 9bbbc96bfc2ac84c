// Four-scenario evaluation (idle / peak-shaving / regulation / joint), the
// superlinear-gain ratio q, hourly sweeps, and seeded category experiments.
//
// q = ((J - J*) - ((J - J_r) + (J - J_p))) / J compares the joint saving
// against the sum of the two single-purpose savings; q > 0 means the joint
// dispatch beats operating the two applications separately.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <thread>
#include <vector>

#include "peakreg/billing.hpp"
#include "peakreg/optimize.hpp"
#include "peakreg/synth.hpp"
#include "peakreg/types.hpp"

namespace peakreg {

// Guard band against floating-point false positives on the strict q > 0 test.
inline constexpr double kSuperlinearGuard = 1e-9;

inline double superlinear_ratio(double J, double J_p, double J_r, double J_star) {
    detail::require(J > 0.0 && std::isfinite(J), "superlinear_ratio: baseline bill must be > 0");
    return ((J - J_star) - ((J - J_r) + (J - J_p))) / J;
}

struct FourScenarioResult {
    GainReport gain;
    BillBreakdown original;      // battery idle
    BillBreakdown peak_shaving;  // J^p
    BillBreakdown regulation;    // J^r itemized
    BillBreakdown joint;         // J*
};

inline FourScenarioResult run_four_scenarios(const TraceSeries& trace, const RegulationSeries& r,
                                             const BatterySpec& battery, const Tariff& tariff,
                                             const SolveOptions& opts = {}) {
    FourScenarioResult out;
    out.original = make_breakdown(energy_cost(trace.samples, tariff),
                                  peak_cost(trace.samples, tariff), 0.0, 0.0, 0.0);

    const PeakShavingResult pres = optimize_peak_shaving(trace, battery, tariff, opts);
    out.peak_shaving = pres.bill;

    const RegulationResult rres = optimize_regulation(r, battery, tariff, opts);
    out.regulation = bill_breakdown(trace, rres.dispatch, r.samples, tariff, BaselineMode::Raw,
                                    battery);

    const JointResult jres = optimize_joint(trace, r, battery, tariff, opts);
    if (jres.status != LpStatus::Optimal)
        throw SolverError("run_four_scenarios: joint problem not solvable to optimality: " +
                          jres.message);
    out.joint = jres.bill;

    GainReport& g = out.gain;
    g.J = out.original.total;
    g.J_p = out.peak_shaving.total;
    g.J_r = out.regulation.total;
    g.J_star = out.joint.total;
    g.q = superlinear_ratio(g.J, g.J_p, g.J_r, g.J_star);
    g.superlinear = g.q > kSuperlinearGuard;
    return out;
}

struct WindowRecord {
    std::size_t index = 0;
    FourScenarioResult result;
};

struct SweepSummary {
    std::size_t hours_total = 0;
    std::size_t hours_superlinear = 0;
    double probability = 0.0;
    double mean_q = 0.0;
    std::vector<double> q_values;   // in window order, for CDF emission
};

struct SweepResult {
    std::vector<WindowRecord> windows;
    SweepSummary summary;
};

namespace detail {

// Runs fn(0..n) across workers; each call writes only its own slot, so the
// aggregate is independent of the worker count. Exceptions are rethrown.
template <typename Fn>
void run_indexed(std::size_t n, unsigned n_workers, Fn&& fn) {
    if (n == 0) return;
    if (n_workers == 0) n_workers = std::max(1u, std::thread::hardware_concurrency());
    n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, n));
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline SweepSummary summarize(const std::vector<WindowRecord>& windows) {
    SweepSummary s;
    s.hours_total = windows.size();
    double sum_q = 0.0;
    s.q_values.reserve(windows.size());
    for (const auto& w : windows) {
        s.q_values.push_back(w.result.gain.q);
        sum_q += w.result.gain.q;
        if (w.result.gain.superlinear) ++s.hours_superlinear;
    }
    s.probability = static_cast<double>(s.hours_superlinear) / static_cast<double>(s.hours_total);
    s.mean_q = sum_q / static_cast<double>(s.hours_total);
    return s;
}

} // namespace detail

// Splits both series into aligned one-hour windows and evaluates the four
// scenarios on each. Deterministic: records are keyed and emitted by window
// index regardless of worker count.
inline SweepResult sweep(const TraceSeries& trace, const RegulationSeries& r,
                         const BatterySpec& battery, const Tariff& tariff,
                         const SolveOptions& opts = {}, unsigned n_workers = 1) {
    validate(trace);
    validate(r);
    detail::require(trace.samples.size() == r.samples.size(),
                    "sweep: trace and regulation lengths differ");
    detail::require(std::abs(trace.t_s - r.t_s) <= 1e-9 * trace.t_s,
                    "sweep: trace and regulation step lengths differ");
    const double steps_per_hour = kSecondsPerHour / trace.t_s;
    detail::require(std::abs(steps_per_hour - std::round(steps_per_hour)) < 1e-9,
                    "sweep: step length does not divide one hour");
    const std::size_t W = static_cast<std::size_t>(std::llround(steps_per_hour));
    const std::size_t n = trace.samples.size() / W;
    detail::require(n >= 1, "sweep: no whole hourly window in the input");

    SweepResult out;
    out.windows.resize(n);
    detail::run_indexed(n, n_workers, [&](std::size_t k) {
        TraceSeries tw;
        tw.t_s = trace.t_s;
        tw.start_time = trace.start_time + static_cast<double>(k * W) * trace.t_s;
        tw.samples.assign(trace.samples.begin() + static_cast<std::ptrdiff_t>(k * W),
                          trace.samples.begin() + static_cast<std::ptrdiff_t>((k + 1) * W));
        RegulationSeries rw;
        rw.t_s = r.t_s;
        rw.samples.assign(r.samples.begin() + static_cast<std::ptrdiff_t>(k * W),
                          r.samples.begin() + static_cast<std::ptrdiff_t>((k + 1) * W));
        out.windows[k] = WindowRecord{k, run_four_scenarios(tw, rw, battery, tariff, opts)};
    });
    out.summary = detail::summarize(out.windows);
    return out;
}

struct CategoryOutcome {
    PeakCategory category;
    std::size_t trials = 0;
    std::size_t superlinear_count = 0;
    double probability = 0.0;
    double mean_q = 0.0;
    std::vector<double> q_values;   // in trial order
};

inline constexpr std::size_t kExperimentHorizon = 180;   // one hour of 20 s steps
inline constexpr double kExperimentStepSeconds = 20.0;

// Fixed synthetic load of the given category against n fresh seeded
// regulation draws; returns the observed superlinear frequency.
inline CategoryOutcome category_experiment(const PeakCategory& category, std::size_t n_trials,
                                           const RegulationModel& reg_model,
                                           const BatterySpec& battery, const Tariff& tariff,
                                           std::uint64_t seed, const SolveOptions& opts = {},
                                           unsigned n_workers = 1) {
    detail::require(n_trials >= 1, "category_experiment: need at least one trial");
    const TraceSeries trace =
        synth_trace(category, kExperimentHorizon, kExperimentStepSeconds);

    CategoryOutcome out;
    out.category = category;
    out.trials = n_trials;
    out.q_values.resize(n_trials);
    std::vector<unsigned char> flags(n_trials, 0);
    detail::run_indexed(n_trials, n_workers, [&](std::size_t i) {
        RegulationModel m = reg_model;
        m.seed = detail::trial_seed(seed, i);
        const RegulationSeries r =
            synth_regulation(m, kExperimentHorizon, kExperimentStepSeconds);
        const FourScenarioResult res = run_four_scenarios(trace, r, battery, tariff, opts);
        out.q_values[i] = res.gain.q;
        flags[i] = res.gain.superlinear ? 1 : 0;
    });
    double sum_q = 0.0;
    for (std::size_t i = 0; i < n_trials; ++i) {
        sum_q += out.q_values[i];
        out.superlinear_count += flags[i];
    }
    out.probability = static_cast<double>(out.superlinear_count) / static_cast<double>(n_trials);
    out.mean_q = sum_q / static_cast<double>(n_trials);
    return out;
}

} // namespace peakreg
