// Independent reference implementations used to check the optimizers: direct
// objective evaluation from the cost definitions plus exhaustive grid search
// over the battery lattice. Everything here is deliberately written from the
// problem statement, not from the library internals.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "peakreg/types.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64), independent of the library's generators.

struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

// ---------------------------------------------------------------------------
// Direct objective evaluation (per-step tariff values, unclamped net load).

inline double direct_peak_objective(const std::vector<double>& s, const std::vector<double>& b,
                                    const peakreg::Tariff& tf) {
    double energy = 0.0, net_max = -std::numeric_limits<double>::infinity(), throughput = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        const double net = s[t] - b[t];
        energy += net;
        net_max = std::max(net_max, net);
        throughput += std::abs(b[t]);
    }
    return tf.lambda_elec * energy + tf.lambda_peak * net_max + tf.lambda_b * throughput;
}

inline double direct_regulation_revenue(const std::vector<double>& r, const std::vector<double>& b,
                                        double C, const peakreg::Tariff& tf) {
    double mismatch = 0.0, throughput = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
        mismatch += std::abs(b[t] - C * r[t]);
        throughput += std::abs(b[t]);
    }
    return tf.lambda_c * C - tf.lambda_mis * mismatch - tf.lambda_b * throughput;
}

// Joint objective for a given baseline y (pass the trace itself for raw mode).
inline double direct_joint_objective(const std::vector<double>& s, const std::vector<double>& r,
                                     const std::vector<double>& b, double C,
                                     const std::vector<double>& y, const peakreg::Tariff& tf) {
    double mismatch = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t)
        mismatch += std::abs(-s[t] + b[t] + y[t] - C * r[t]);
    return direct_peak_objective(s, b, tf) - tf.lambda_c * C + tf.lambda_mis * mismatch;
}

// Joint objective when the baseline is free: the best y >= 0 is
// max(0, s - b + C r), leaving mismatch only where that target is negative.
inline double direct_joint_objective_free_y(const std::vector<double>& s,
                                            const std::vector<double>& r,
                                            const std::vector<double>& b, double C,
                                            const peakreg::Tariff& tf) {
    double mismatch = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
        const double target = s[t] - b[t] + C * r[t];
        if (target < 0.0) mismatch -= target;
    }
    return direct_peak_objective(s, b, tf) - tf.lambda_c * C + tf.lambda_mis * mismatch;
}

// ---------------------------------------------------------------------------
// Lattice feasibility: SoC window and optional zero net energy.

inline bool lattice_feasible(const std::vector<double>& b, const peakreg::BatterySpec& bat,
                             double step_h, bool net_zero, long index_sum) {
    if (net_zero && index_sum != 0) return false;
    double energy = bat.soc_ini * bat.energy_cap;
    const double lo = bat.soc_min * bat.energy_cap - 1e-9;
    const double hi = bat.soc_max * bat.energy_cap + 1e-9;
    for (const double bt : b) {
        energy -= bt * step_h;
        if (energy < lo || energy > hi) return false;
    }
    return true;
}

// Odometer over b in {-K..K}^T scaled by P/K; calls fn(b, index_sum).
template <typename Fn>
void for_each_lattice_point(std::size_t T, double power_cap, int K, Fn&& fn) {
    std::vector<int> idx(T, -K);
    std::vector<double> b(T);
    const double h = power_cap / static_cast<double>(K);
    while (true) {
        long sum = 0;
        for (std::size_t t = 0; t < T; ++t) {
            b[t] = static_cast<double>(idx[t]) * h;
            sum += idx[t];
        }
        fn(b, sum);
        std::size_t t = 0;
        for (; t < T; ++t) {
            if (idx[t] < K) {
                ++idx[t];
                break;
            }
            idx[t] = -K;
        }
        if (t == T) break;
    }
}

// ---------------------------------------------------------------------------
// Grid-search oracles. K is the half resolution of the b lattice (step P/K);
// c_steps spans C in [0, c_max] inclusive.

struct GridBest {
    double value = 0.0;
    std::vector<double> b;
    double capacity = 0.0;
    bool found = false;
};

inline GridBest oracle_peak_shaving(const std::vector<double>& s, const peakreg::BatterySpec& bat,
                                    const peakreg::Tariff& tf, double step_h, bool net_zero,
                                    int K) {
    GridBest best;
    best.value = std::numeric_limits<double>::infinity();
    for_each_lattice_point(s.size(), bat.power_cap, K, [&](const std::vector<double>& b, long sum) {
        if (!lattice_feasible(b, bat, step_h, net_zero, sum)) return;
        const double J = direct_peak_objective(s, b, tf);
        if (J < best.value) {
            best.value = J;
            best.b = b;
            best.found = true;
        }
    });
    return best;
}

inline GridBest oracle_regulation(const std::vector<double>& r, const peakreg::BatterySpec& bat,
                                  const peakreg::Tariff& tf, double step_h, bool net_zero, int K,
                                  double c_max, int c_steps) {
    GridBest best;
    best.value = -std::numeric_limits<double>::infinity();
    for (int ci = 0; ci <= c_steps; ++ci) {
        const double C = c_max * static_cast<double>(ci) / static_cast<double>(c_steps);
        for_each_lattice_point(r.size(), bat.power_cap, K,
                               [&](const std::vector<double>& b, long sum) {
                                   if (!lattice_feasible(b, bat, step_h, net_zero, sum)) return;
                                   const double R = direct_regulation_revenue(r, b, C, tf);
                                   if (R > best.value) {
                                       best.value = R;
                                       best.b = b;
                                       best.capacity = C;
                                       best.found = true;
                                   }
                               });
    }
    return best;
}

// Joint oracle: y_fixed empty means the free-baseline mode.
inline GridBest oracle_joint(const std::vector<double>& s, const std::vector<double>& r,
                             const std::vector<double>& y_fixed, const peakreg::BatterySpec& bat,
                             const peakreg::Tariff& tf, double step_h, bool net_zero, int K,
                             double c_max, int c_steps) {
    GridBest best;
    best.value = std::numeric_limits<double>::infinity();
    for (int ci = 0; ci <= c_steps; ++ci) {
        const double C = c_max * static_cast<double>(ci) / static_cast<double>(c_steps);
        for_each_lattice_point(s.size(), bat.power_cap, K,
                               [&](const std::vector<double>& b, long sum) {
                                   if (!lattice_feasible(b, bat, step_h, net_zero, sum)) return;
                                   const double J =
                                       y_fixed.empty()
                                           ? direct_joint_objective_free_y(s, r, b, C, tf)
                                           : direct_joint_objective(s, r, b, C, y_fixed, tf);
                                   if (J < best.value) {
                                       best.value = J;
                                       best.b = b;
                                       best.capacity = C;
                                       best.found = true;
                                   }
                               });
    }
    return best;
}

// Upper bound on how far the lattice optimum can sit above the continuous one:
// round each coordinate to the nearest lattice point (h/2), repair the zero-sum
// constraint (another h/2 per coordinate), and round C (h_c/2).
inline double grid_gap_bound(std::size_t T, double h_b, double h_c, const peakreg::Tariff& tf,
                             double max_abs_r) {
    const double sum_db = static_cast<double>(T) * h_b;
    const double max_db = 0.5 * h_b * (1.0 + static_cast<double>(T));
    return tf.lambda_elec * sum_db + tf.lambda_peak * max_db + tf.lambda_b * sum_db +
           tf.lambda_mis * (sum_db + static_cast<double>(T) * 0.5 * h_c * max_abs_r) +
           tf.lambda_c * 0.5 * h_c;
}

// ---------------------------------------------------------------------------
// Random instances for the optimizer-vs-oracle comparison. Horizon <= 3 in
// one-hour steps so lattice sums equal energy sums. With soc_tight false the
// battery energy store is big enough that no lattice point can touch the SoC
// window, which keeps the rounding argument behind grid_gap_bound valid.

struct Instance {
    peakreg::TraceSeries trace;
    peakreg::RegulationSeries reg;
    peakreg::BatterySpec battery;
    peakreg::Tariff tariff;
    bool net_zero = false;
    bool soc_tight = false;
    double c_max = 2.0;
};

inline Instance make_instance(std::uint64_t seed, bool soc_tight) {
    Rng rng(seed);
    Instance ins;
    const std::size_t T = 1 + static_cast<std::size_t>(rng.below(3));
    ins.trace.t_s = 3600.0;
    ins.trace.start_time = 0;
    ins.reg.t_s = 3600.0;
    double sum_abs_r = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        ins.trace.samples.push_back(rng.uniform(0.5, 3.0));
        const double r = rng.uniform(-1.0, 1.0);
        ins.reg.samples.push_back(r);
        sum_abs_r += std::abs(r);
    }
    ins.battery.power_cap = 1.0;
    ins.battery.soc_min = 0.0;
    ins.battery.soc_max = 1.0;
    ins.battery.soc_ini = 0.5;
    ins.battery.energy_cap = soc_tight ? rng.uniform(0.6, 1.6) : 8.0;
    ins.soc_tight = soc_tight;
    ins.net_zero = (rng.next() & 1) != 0;
    ins.tariff.lambda_elec = rng.uniform(0.0, 1.5);
    ins.tariff.lambda_peak = rng.uniform(0.0, 6.0);
    ins.tariff.lambda_b = rng.uniform(0.0, 0.35);
    ins.tariff.lambda_mis = rng.uniform(0.5, 4.0);
    ins.tariff.lambda_c = rng.uniform(0.0, 0.7 * ins.tariff.lambda_mis * std::max(sum_abs_r, 0.2));
    return ins;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (const double x : v) m = std::max(m, std::abs(x));
    return m;
}

// ---------------------------------------------------------------------------

struct StopWatch {
    std::chrono::steady_clock::time_point begin = std::chrono::steady_clock::now();

    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - begin)
            .count();
    }
};

} // namespace testsupport
