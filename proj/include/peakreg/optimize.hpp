// The three dispatch optimizers (peak shaving, regulation-only, joint) and
// the greedy online follower. Each optimizer assembles a bounded-variable
// LP, seeds it with a feasible crash basis (so phase 1 is normally skipped),
// solves, and re-packages the vertex as a DispatchSolution.
//
// Linearization: |b| via the split b = b+ - b- with cost on both halves;
// the peak via an epigraph variable M >= s(t) - b(t) (shifted by max s so
// the slack basis starts feasible); mismatch absolute values via per-step
// slack pairs m+ - m- pinned by equality rows. Stored energy is tracked by
// state variables e(t) in MWh with the SoC window as plain bounds.

#pragma once

#include <cmath>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "peakreg/billing.hpp"
#include "peakreg/lp.hpp"
#include "peakreg/types.hpp"

namespace peakreg {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveOptions {
    bool net_energy_zero = true;                         // terminal SoC = SoC_ini
    BaselineMode baseline_mode = BaselineMode::PeakPlan; // joint problem only
    double capacity_cap_ratio = kInf;                    // C <= ratio * P
    LpOptions lp{};
    std::string dump_lp_path{};                          // write the LP here before solving
};

struct PeakShavingResult {
    DispatchSolution dispatch;
    BillBreakdown bill;
    double objective = 0.0;   // J^p
    long iterations = 0;
};

struct RegulationResult {
    DispatchSolution dispatch;
    double revenue = 0.0;     // R*
    long iterations = 0;
};

struct JointResult {
    LpStatus status = LpStatus::Optimal;
    DispatchSolution dispatch;
    BillBreakdown bill;
    double objective = 0.0;   // J*
    std::string message;
    long iterations = 0;
};

namespace detail {

// Battery schedule split plus the stored-energy chain shared by all three
// LPs. Returns the index of the first b+ variable; the blocks are laid out
// as b+[0..T), b-[0..T), e[0..T).
struct BatteryBlock {
    int bp0 = 0, bm0 = 0, e0 = 0;
};

inline BatteryBlock add_battery_block(LinearProgram& lp, std::size_t T, const BatterySpec& bat,
                                      double step_h, bool net_energy_zero, double cost_bp,
                                      double cost_bm) {
    BatteryBlock blk;
    const double P = bat.power_cap;
    blk.bp0 = static_cast<int>(lp.num_variables());
    for (std::size_t t = 0; t < T; ++t)
        lp.add_variable(0.0, P, cost_bp, "bp" + std::to_string(t));
    blk.bm0 = static_cast<int>(lp.num_variables());
    for (std::size_t t = 0; t < T; ++t)
        lp.add_variable(0.0, P, cost_bm, "bm" + std::to_string(t));

    const double e_ini = bat.soc_ini * bat.energy_cap;
    const double e_lo = bat.soc_min * bat.energy_cap;
    const double e_hi = bat.soc_max * bat.energy_cap;
    blk.e0 = static_cast<int>(lp.num_variables());
    for (std::size_t t = 0; t < T; ++t) {
        const bool pin = net_energy_zero && t == T - 1;
        lp.add_variable(pin ? e_ini : e_lo, pin ? e_ini : e_hi, 0.0, "e" + std::to_string(t));
    }
    // e(t) = e(t-1) - step_h * (b+ - b-), e(-1) = e_ini
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<std::pair<int, double>> terms;
        terms.reserve(4);
        terms.push_back({blk.e0 + static_cast<int>(t), 1.0});
        if (t > 0) terms.push_back({blk.e0 + static_cast<int>(t) - 1, -1.0});
        terms.push_back({blk.bp0 + static_cast<int>(t), step_h});
        terms.push_back({blk.bm0 + static_cast<int>(t), -step_h});
        lp.add_constraint(std::move(terms), Relation::Equal, t == 0 ? e_ini : 0.0,
                          blk.e0 + static_cast<int>(t));
    }
    return blk;
}

// Epigraph for the peak term: M >= s(t) - b(t) - mmax, M free. Shifting by
// mmax = max s keeps the all-slack start feasible; the objective carries
// lambda_peak * mmax as a constant offset. Skipped when the peak price is
// zero (the rows would otherwise wrongly cap the net load at mmax).
inline int add_peak_epigraph(LinearProgram& lp, std::span<const double> s, const BatteryBlock& blk,
                             double lambda_peak, double& offset) {
    if (lambda_peak <= 0.0) return -1;
    double mmax = s[0];
    for (double v : s) mmax = std::max(mmax, v);
    const int m_idx = lp.add_variable(-kInf, kInf, lambda_peak, "M");
    offset += lambda_peak * mmax;
    for (std::size_t t = 0; t < s.size(); ++t)
        lp.add_constraint({{blk.bp0 + static_cast<int>(t), -1.0},
                           {blk.bm0 + static_cast<int>(t), 1.0},
                           {m_idx, -1.0}},
                          Relation::LessEq, mmax - s[t]);
    return m_idx;
}

inline std::vector<double> extract_schedule(const std::vector<double>& sol, const BatteryBlock& blk,
                                            std::size_t T) {
    std::vector<double> b(T);
    for (std::size_t t = 0; t < T; ++t)
        b[t] = sol[static_cast<std::size_t>(blk.bp0) + t] - sol[static_cast<std::size_t>(blk.bm0) + t];
    return b;
}

inline void maybe_dump(const LinearProgram& lp, const SolveOptions& opts, const char* label) {
    if (opts.dump_lp_path.empty()) return;
    std::ofstream os(opts.dump_lp_path);
    if (!os) throw std::runtime_error("cannot write LP dump to " + opts.dump_lp_path);
    os << "# " << label << "\n";
    dump_lp(lp, os);
}

inline LpOutcome solve_or_throw(const LinearProgram& lp, const LpOptions& lpo, const char* what) {
    LpOutcome out = solve_lp(lp, lpo);
    if (out.status == LpStatus::Infeasible)
        throw SolverError(std::string(what) + ": LP unexpectedly infeasible (" + out.message + ")");
    return out;
}

} // namespace detail

// min lambda_elec*sum(s-b) + lambda_peak*max(s-b) + lambda_b*sum|b|
inline PeakShavingResult optimize_peak_shaving(const TraceSeries& trace, const BatterySpec& battery,
                                               const Tariff& tariff, const SolveOptions& opts = {}) {
    validate(trace);
    validate(battery);
    validate(tariff);
    const std::size_t T = trace.size();
    const double step_h = trace.step_hours();

    LinearProgram lp;
    double offset = 0.0;
    for (double v : trace.samples) offset += tariff.lambda_elec * v;
    const auto blk = detail::add_battery_block(lp, T, battery, step_h, opts.net_energy_zero,
                                               -tariff.lambda_elec + tariff.lambda_b,
                                               tariff.lambda_elec + tariff.lambda_b);
    detail::add_peak_epigraph(lp, trace.samples, blk, tariff.lambda_peak, offset);
    lp.objective_offset = offset;

    detail::maybe_dump(lp, opts, "peak-shaving");
    LpOutcome out = detail::solve_or_throw(lp, opts.lp, "optimize_peak_shaving");
    if (out.status == LpStatus::Unbounded)
        throw SolverError("optimize_peak_shaving: LP unexpectedly unbounded (" + out.message + ")");

    PeakShavingResult res;
    res.dispatch.b = detail::extract_schedule(out.solution, blk, T);
    res.dispatch.capacity_bid = 0.0;
    res.dispatch.y = trace.samples;
    res.dispatch.soc = soc_trajectory(res.dispatch.b, battery, trace.t_s);
    std::vector<double> net(T);
    for (std::size_t t = 0; t < T; ++t) net[t] = trace.samples[t] - res.dispatch.b[t];
    res.bill = make_breakdown(energy_cost(net, tariff), peak_cost(net, tariff),
                              battery_cost(res.dispatch.b, tariff), 0.0, 0.0);
    res.objective = out.objective;
    res.iterations = out.iterations;
    return res;
}

// max lambda_c*C - lambda_mis*sum|b - C*r| - lambda_b*sum|b|, solved as the
// minimization of the negation.
inline RegulationResult optimize_regulation(const RegulationSeries& r, const BatterySpec& battery,
                                            const Tariff& tariff, const SolveOptions& opts = {}) {
    validate(r);
    validate(battery);
    validate(tariff);
    const std::size_t T = r.samples.size();
    const double step_h = r.t_s / kSecondsPerHour;

    LinearProgram lp;
    const auto blk = detail::add_battery_block(lp, T, battery, step_h, opts.net_energy_zero,
                                               tariff.lambda_b, tariff.lambda_b);
    const double c_cap = std::isfinite(opts.capacity_cap_ratio)
                             ? opts.capacity_cap_ratio * battery.power_cap
                             : kInf;
    const int c_idx = lp.add_variable(0.0, c_cap, -tariff.lambda_c, "C");
    const int mp0 = static_cast<int>(lp.num_variables());
    for (std::size_t t = 0; t < T; ++t)
        lp.add_variable(0.0, kInf, tariff.lambda_mis, "mp" + std::to_string(t));
    const int mm0 = static_cast<int>(lp.num_variables());
    for (std::size_t t = 0; t < T; ++t)
        lp.add_variable(0.0, kInf, tariff.lambda_mis, "mm" + std::to_string(t));
    // b(t) - C r(t) = m+(t) - m-(t); all variables start at zero, so hinting
    // m- keeps the crash basis feasible.
    for (std::size_t t = 0; t < T; ++t)
        lp.add_constraint({{blk.bp0 + static_cast<int>(t), 1.0},
                           {blk.bm0 + static_cast<int>(t), -1.0},
                           {c_idx, -r.samples[t]},
                           {mp0 + static_cast<int>(t), -1.0},
                           {mm0 + static_cast<int>(t), 1.0}},
                          Relation::Equal, 0.0, mm0 + static_cast<int>(t));

    detail::maybe_dump(lp, opts, "regulation");
    LpOutcome out = detail::solve_or_throw(lp, opts.lp, "optimize_regulation");
    if (out.status == LpStatus::Unbounded)
        throw SolverError(
            "optimize_regulation: revenue grows without bound (capacity price exceeds the "
            "mismatch rate; cap C via capacity_cap_ratio). " + out.message);

    RegulationResult res;
    res.dispatch.b = detail::extract_schedule(out.solution, blk, T);
    res.dispatch.capacity_bid = std::max(0.0, out.solution[static_cast<std::size_t>(c_idx)]);
    res.dispatch.soc = soc_trajectory(res.dispatch.b, battery, r.t_s);
    res.revenue = -out.objective;
    res.iterations = out.iterations;
    return res;
}

// J^r: the regulation participant still pays its energy and peak charges on
// the net load; the market revenue nets off the bill.
inline double regulation_total_bill(const TraceSeries& trace, const RegulationResult& reg,
                                    const Tariff& tariff) {
    validate(trace);
    validate(tariff);
    detail::require(reg.dispatch.b.size() == trace.size(),
                    "regulation_total_bill: dispatch length differs from trace");
    std::vector<double> net(trace.size());
    for (std::size_t t = 0; t < trace.size(); ++t) net[t] = trace.samples[t] - reg.dispatch.b[t];
    return energy_cost(net, tariff) + peak_cost(net, tariff) - reg.revenue;
}

// min lambda_elec*sum(s-b) + lambda_peak*max(s-b) + lambda_b*sum|b|
//     - lambda_c*C + lambda_mis*sum|-s + b + y - C r|
// with the baseline y per opts.baseline_mode: Raw fixes y = s, PeakPlan
// fixes y = s - b^p (peak-shaving plan solved first), Free leaves y >= 0 as
// a decision variable (which can make the problem unbounded; reported via
// status, not an exception).
inline JointResult optimize_joint(const TraceSeries& trace, const RegulationSeries& r,
                                  const BatterySpec& battery, const Tariff& tariff,
                                  const SolveOptions& opts = {}) {
    validate(trace);
    validate(r);
    validate(battery);
    validate(tariff);
    const std::size_t T = trace.size();
    detail::require(r.samples.size() == T, "optimize_joint: trace and regulation lengths differ");
    detail::require(std::abs(r.t_s - trace.t_s) <= 1e-9 * trace.t_s,
                    "optimize_joint: trace and regulation step lengths differ");
    const double step_h = trace.step_hours();

    // Fixed baseline per mode; empty marks the free mode.
    std::vector<double> y_fixed;
    if (opts.baseline_mode == BaselineMode::Raw) {
        y_fixed = trace.samples;
    } else if (opts.baseline_mode == BaselineMode::PeakPlan) {
        SolveOptions inner = opts;
        inner.dump_lp_path.clear();
        const PeakShavingResult plan = optimize_peak_shaving(trace, battery, tariff, inner);
        y_fixed.resize(T);
        for (std::size_t t = 0; t < T; ++t) y_fixed[t] = trace.samples[t] - plan.dispatch.b[t];
    }

    LinearProgram lp;
    double offset = 0.0;
    for (double v : trace.samples) offset += tariff.lambda_elec * v;
    const auto blk = detail::add_battery_block(lp, T, battery, step_h, opts.net_energy_zero,
                                               -tariff.lambda_elec + tariff.lambda_b,
                                               tariff.lambda_elec + tariff.lambda_b);
    detail::add_peak_epigraph(lp, trace.samples, blk, tariff.lambda_peak, offset);
    lp.objective_offset = offset;

    const double c_cap = std::isfinite(opts.capacity_cap_ratio)
                             ? opts.capacity_cap_ratio * battery.power_cap
                             : kInf;
    const int c_idx = lp.add_variable(0.0, c_cap, -tariff.lambda_c, "C");
    const int mp0 = static_cast<int>(lp.num_variables());
    for (std::size_t t = 0; t < T; ++t)
        lp.add_variable(0.0, kInf, tariff.lambda_mis, "mp" + std::to_string(t));
    const int mm0 = static_cast<int>(lp.num_variables());
    for (std::size_t t = 0; t < T; ++t)
        lp.add_variable(0.0, kInf, tariff.lambda_mis, "mm" + std::to_string(t));
    int y0 = -1;
    if (y_fixed.empty()) {
        y0 = static_cast<int>(lp.num_variables());
        for (std::size_t t = 0; t < T; ++t)
            lp.add_variable(0.0, kInf, 0.0, "y" + std::to_string(t));
    }

    // -s + b + y - C r = m+ - m-. With y folded into the rhs when fixed:
    //   b+ - b- - C r - m+ + m- = s - y  (rhs b^p(t) for PeakPlan, 0 for Raw)
    // The sign of the rhs picks which slack half starts basic.
    for (std::size_t t = 0; t < T; ++t) {
        std::vector<std::pair<int, double>> terms;
        terms.reserve(6);
        terms.push_back({blk.bp0 + static_cast<int>(t), 1.0});
        terms.push_back({blk.bm0 + static_cast<int>(t), -1.0});
        if (r.samples[t] != 0.0) terms.push_back({c_idx, -r.samples[t]});
        terms.push_back({mp0 + static_cast<int>(t), -1.0});
        terms.push_back({mm0 + static_cast<int>(t), 1.0});
        double rhs;
        if (!y_fixed.empty()) {
            rhs = trace.samples[t] - y_fixed[t];
        } else {
            terms.push_back({y0 + static_cast<int>(t), 1.0});
            rhs = trace.samples[t];
        }
        const int hint = rhs >= 0.0 ? mm0 + static_cast<int>(t) : mp0 + static_cast<int>(t);
        lp.add_constraint(std::move(terms), Relation::Equal, rhs, hint);
    }

    detail::maybe_dump(lp, opts, "joint");
    LpOutcome out = detail::solve_or_throw(lp, opts.lp, "optimize_joint");

    JointResult res;
    res.status = out.status;
    res.iterations = out.iterations;
    if (out.status == LpStatus::Unbounded) {
        res.message = "joint problem unbounded: the free baseline lets capacity revenue outrun "
                      "the mismatch penalty (" + out.message + ")";
        return res;
    }
    res.dispatch.b = detail::extract_schedule(out.solution, blk, T);
    res.dispatch.capacity_bid = std::max(0.0, out.solution[static_cast<std::size_t>(c_idx)]);
    if (!y_fixed.empty()) {
        res.dispatch.y = std::move(y_fixed);
    } else {
        res.dispatch.y.resize(T);
        for (std::size_t t = 0; t < T; ++t)
            res.dispatch.y[t] = std::max(0.0, out.solution[static_cast<std::size_t>(y0) + t]);
    }
    res.dispatch.soc = soc_trajectory(res.dispatch.b, battery, trace.t_s);
    res.bill = bill_breakdown(trace, res.dispatch, r.samples, tariff, opts.baseline_mode, battery);
    res.objective = out.objective;
    res.message = out.message;
    return res;
}

// Online baseline: follow C*r(t) exactly, clipped first by the power cap and
// then by whatever SoC headroom remains at each step.
inline std::vector<double> greedy_follow(const RegulationSeries& r, double C,
                                         const BatterySpec& battery, double t_s_seconds) {
    validate(r);
    validate(battery);
    detail::require(C >= 0.0 && std::isfinite(C), "greedy_follow: capacity must be >= 0");
    detail::require(t_s_seconds > 0.0, "greedy_follow: bad step length");
    const double step_h = t_s_seconds / kSecondsPerHour;
    const double e_lo = battery.soc_min * battery.energy_cap;
    const double e_hi = battery.soc_max * battery.energy_cap;
    double energy = battery.soc_ini * battery.energy_cap;
    std::vector<double> b(r.samples.size());
    for (std::size_t t = 0; t < r.samples.size(); ++t) {
        double want = std::clamp(C * r.samples[t], -battery.power_cap, battery.power_cap);
        const double discharge_limit = (energy - e_lo) / step_h;  // b <= this keeps SoC above floor
        const double charge_limit = (energy - e_hi) / step_h;     // b >= this keeps SoC below cap
        want = std::clamp(want, charge_limit, discharge_limit);
        energy -= want * step_h;
        b[t] = want;
    }
    return b;
}

} // namespace peakreg
