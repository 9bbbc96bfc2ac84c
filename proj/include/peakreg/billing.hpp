// Bill arithmetic: energy charge, peak demand charge, battery throughput
// cost, regulation revenue, and itemized breakdowns.
//
// Price conventions (see Tariff in types.hpp): lambda_elec, lambda_mis and
// lambda_b arrive pre-multiplied by the step length in hours, so every
// routine here is a plain sum over MW samples. lambda_peak is the hourly
// amortized demand charge times the window length in hours; for the
// one-hour windows used throughout, that is just the hourly price.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "peakreg/types.hpp"

namespace peakreg {

inline double energy_cost(std::span<const double> grid, const Tariff& tariff) {
    detail::require(detail::all_finite(grid), "energy_cost: non-finite sample");
    double sum = 0.0;
    for (double g : grid) sum += g;
    return tariff.lambda_elec * sum;
}

inline double peak_cost(std::span<const double> grid, const Tariff& tariff) {
    detail::require(!grid.empty(), "peak_cost: empty series");
    detail::require(detail::all_finite(grid), "peak_cost: non-finite sample");
    return tariff.lambda_peak * *std::max_element(grid.begin(), grid.end());
}

inline double baseline_bill(const TraceSeries& trace, const Tariff& tariff) {
    validate(trace);
    validate(tariff);
    return energy_cost(trace.samples, tariff) + peak_cost(trace.samples, tariff);
}

inline double battery_cost(std::span<const double> b, const Tariff& tariff) {
    detail::require(detail::all_finite(b), "battery_cost: non-finite sample");
    double sum = 0.0;
    for (double x : b) sum += std::abs(x);
    return tariff.lambda_b * sum;
}

// R = lambda_c*C - lambda_mis*sum|b - C*r| - lambda_b*sum|b|
inline double regulation_revenue(std::span<const double> b, double C, std::span<const double> r,
                                 const Tariff& tariff) {
    detail::require(b.size() == r.size(), "regulation_revenue: b and r lengths differ");
    detail::require(C >= 0.0 && std::isfinite(C), "regulation_revenue: capacity must be >= 0");
    double mismatch = 0.0;
    for (std::size_t t = 0; t < b.size(); ++t) mismatch += std::abs(b[t] - C * r[t]);
    return tariff.lambda_c * C - tariff.lambda_mis * mismatch - battery_cost(b, tariff);
}

inline double amortize_peak_price(double monthly_price, double hours_per_month) {
    detail::require(monthly_price > 0.0 && std::isfinite(monthly_price),
                    "amortize_peak_price: monthly price must be > 0");
    detail::require(hours_per_month > 0.0 && std::isfinite(hours_per_month),
                    "amortize_peak_price: hours per month must be > 0");
    return monthly_price / hours_per_month;
}

inline BillBreakdown make_breakdown(double energy, double peak, double battery, double mismatch,
                                    double revenue) {
    BillBreakdown bb;
    bb.energy_cost = energy;
    bb.peak_cost = peak;
    bb.battery_cost = battery;
    bb.mismatch_penalty = mismatch;
    bb.capacity_revenue = revenue;
    bb.total = energy + peak + battery + mismatch - revenue;
    return bb;
}

// Itemized bill for a dispatch against a trace and regulation signal.
// The baseline y in the mismatch term |-s + b + y - C*r| follows the mode:
// Raw uses y = s; PeakPlan and Free use the plan stored in dispatch.y.
inline BillBreakdown bill_breakdown(const TraceSeries& trace, const DispatchSolution& dispatch,
                                    std::span<const double> r, const Tariff& tariff,
                                    BaselineMode mode, const BatterySpec& battery) {
    validate(trace);
    validate(tariff);
    validate(battery);
    const std::size_t T = trace.size();
    detail::require(dispatch.b.size() == T, "bill_breakdown: dispatch length differs from trace");
    detail::require(r.size() == T, "bill_breakdown: regulation signal length differs from trace");
    detail::require(dispatch.capacity_bid >= 0.0 && std::isfinite(dispatch.capacity_bid),
                    "bill_breakdown: capacity bid must be >= 0");
    if (mode != BaselineMode::Raw)
        detail::require(dispatch.y.size() == T, "bill_breakdown: dispatch carries no baseline plan y");
    const std::size_t bad = first_dispatch_violation(dispatch, battery, trace.t_s);
    if (bad != kNoViolation)
        throw std::invalid_argument("bill_breakdown: dispatch infeasible at step " + std::to_string(bad));

    std::vector<double> net(T);
    for (std::size_t t = 0; t < T; ++t) net[t] = trace.samples[t] - dispatch.b[t];

    double mismatch = 0.0;
    const double C = dispatch.capacity_bid;
    for (std::size_t t = 0; t < T; ++t) {
        const double y = (mode == BaselineMode::Raw) ? trace.samples[t] : dispatch.y[t];
        mismatch += std::abs(-trace.samples[t] + dispatch.b[t] + y - C * r[t]);
    }

    return make_breakdown(energy_cost(net, tariff), peak_cost(net, tariff),
                          battery_cost(dispatch.b, tariff), tariff.lambda_mis * mismatch,
                          tariff.lambda_c * C);
}

} // namespace peakreg
