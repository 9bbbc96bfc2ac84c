// Peak abstraction over demand traces: per-day capping threshold C_f,
// segmentation into peaks, height/width measures, area-growth shape
// classification, contiguous-peak grouping (NOCP), and pooled statistics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "peakreg/types.hpp"

namespace peakreg {

enum class ShapeVerdict { Rectangular, Triangular, Unclassified };

inline const char* to_string(ShapeVerdict v) {
    switch (v) {
        case ShapeVerdict::Rectangular: return "rectangular";
        case ShapeVerdict::Triangular: return "triangular";
        case ShapeVerdict::Unclassified: return "unclassified";
    }
    return "unclassified";
}

struct DayProfile {
    double p_min = 0.0, p_max = 0.0;  // MW
    double d = 0.0;                   // demand range p_max - p_min
    double f = 0.0;                   // capping fraction
    double c_f = 0.0;                 // threshold (1-f)*d + p_min
    bool degenerate = false;          // d == 0: flat day, no peaks possible
};

struct PeakDescriptor {
    std::size_t t_a = 0, t_b = 0;     // first/last sample index, inclusive
    double ph = 0.0;                  // peak height, fraction of d
    double pw_s = 0.0;                // peak width, seconds
    ShapeVerdict shape = ShapeVerdict::Unclassified;
};

struct PeakStats {
    std::vector<std::pair<double, double>> height_cdf;   // (PH, cumulative prob)
    std::vector<std::pair<double, double>> width_cdf;    // (PW seconds, cumulative prob)
    std::vector<std::pair<double, double>> gap_cdf;      // (inter-peak gap seconds, cum prob)
    std::map<std::size_t, std::size_t> nocp_histogram;   // group size -> occurrences
    std::vector<ShapeVerdict> day_shapes;                // one verdict per day
    std::size_t day_count = 0;
    std::size_t total_peaks = 0;
    bool has_partial_days = false;
};

inline DayProfile daily_threshold(std::span<const double> day, double f) {
    detail::require(!day.empty(), "daily_threshold: empty day");
    detail::require(f >= 0.0 && f <= 1.0, "daily_threshold: f must lie in [0,1]");
    detail::require(detail::all_finite(day), "daily_threshold: non-finite sample");
    DayProfile p;
    const auto [lo, hi] = std::minmax_element(day.begin(), day.end());
    p.p_min = *lo;
    p.p_max = *hi;
    p.d = p.p_max - p.p_min;
    p.f = f;
    p.c_f = (1.0 - f) * p.d + p.p_min;
    p.degenerate = p.d == 0.0;
    return p;
}

// Maximal runs of samples strictly above C_f. A sample exactly at C_f is a
// valley, so f = 0 cleanly yields zero peaks.
inline std::vector<PeakDescriptor> segment_peaks(std::span<const double> day,
                                                 const DayProfile& profile, double t_s) {
    detail::require(t_s > 0.0, "segment_peaks: bad step length");
    std::vector<PeakDescriptor> peaks;
    if (profile.degenerate) return peaks;
    std::size_t t = 0;
    while (t < day.size()) {
        if (!(day[t] > profile.c_f)) {
            ++t;
            continue;
        }
        PeakDescriptor pk;
        pk.t_a = t;
        double apex = day[t];
        while (t + 1 < day.size() && day[t + 1] > profile.c_f) {
            ++t;
            apex = std::max(apex, day[t]);
        }
        pk.t_b = t;
        pk.ph = (apex - profile.c_f) / profile.d;
        pk.pw_s = static_cast<double>(pk.t_b - pk.t_a + 1) * t_s;
        peaks.push_back(pk);
        ++t;
    }
    return peaks;
}

// Total area above the day's threshold for each capping fraction, MW*s.
// Rectangular peaks grow this linearly in f, triangular ones quadratically.
inline std::vector<double> area_growth(std::span<const double> day,
                                       std::span<const double> f_grid, double t_s) {
    detail::require(t_s > 0.0, "area_growth: bad step length");
    for (std::size_t i = 0; i + 1 < f_grid.size(); ++i)
        detail::require(f_grid[i] < f_grid[i + 1], "area_growth: f grid must be ascending");
    for (double f : f_grid)
        detail::require(f > 0.0 && f <= 1.0, "area_growth: f values must lie in (0,1]");
    std::vector<double> areas;
    areas.reserve(f_grid.size());
    for (double f : f_grid) {
        const DayProfile p = daily_threshold(day, f);
        double area = 0.0;
        for (double s : day) area += std::max(0.0, s - p.c_f);
        areas.push_back(area * t_s);
    }
    return areas;
}

namespace detail {

struct PolyFit {
    double ssr = 0.0;
    std::vector<double> coef;
};

// Least-squares polynomial fit via normal equations with Gaussian
// elimination; degree is 1 or 2 here, so conditioning is a non-issue.
inline PolyFit fit_poly(std::span<const double> x, std::span<const double> y, int degree) {
    const int k = degree + 1;
    std::vector<double> a(static_cast<std::size_t>(k) * (k + 1), 0.0);  // augmented [A | b]
    for (std::size_t i = 0; i < x.size(); ++i) {
        double powx[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
        for (int p = 1; p <= 2 * degree; ++p) powx[p] = powx[p - 1] * x[i];
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < k; ++c) a[static_cast<std::size_t>(r) * (k + 1) + c] += powx[r + c];
            a[static_cast<std::size_t>(r) * (k + 1) + k] += powx[r] * y[i];
        }
    }
    for (int col = 0; col < k; ++col) {
        int piv = col;
        for (int r = col + 1; r < k; ++r)
            if (std::abs(a[static_cast<std::size_t>(r) * (k + 1) + col]) >
                std::abs(a[static_cast<std::size_t>(piv) * (k + 1) + col]))
                piv = r;
        if (piv != col)
            for (int c = col; c <= k; ++c)
                std::swap(a[static_cast<std::size_t>(col) * (k + 1) + c],
                          a[static_cast<std::size_t>(piv) * (k + 1) + c]);
        const double pv = a[static_cast<std::size_t>(col) * (k + 1) + col];
        if (pv == 0.0) throw std::runtime_error("fit_poly: singular normal equations");
        for (int c = col; c <= k; ++c) a[static_cast<std::size_t>(col) * (k + 1) + c] /= pv;
        for (int r = 0; r < k; ++r) {
            if (r == col) continue;
            const double fctr = a[static_cast<std::size_t>(r) * (k + 1) + col];
            if (fctr == 0.0) continue;
            for (int c = col; c <= k; ++c)
                a[static_cast<std::size_t>(r) * (k + 1) + c] -=
                    fctr * a[static_cast<std::size_t>(col) * (k + 1) + c];
        }
    }
    PolyFit fit;
    fit.coef.resize(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) fit.coef[static_cast<std::size_t>(r)] = a[static_cast<std::size_t>(r) * (k + 1) + k];
    for (std::size_t i = 0; i < x.size(); ++i) {
        double pred = 0.0, xp = 1.0;
        for (int p = 0; p < k; ++p) {
            pred += fit.coef[static_cast<std::size_t>(p)] * xp;
            xp *= x[i];
        }
        const double e = y[i] - pred;
        fit.ssr += e * e;
    }
    return fit;
}

} // namespace detail

// Fit area(f) with a line and a parabola. Triangular if the parabola cuts
// the residual by more than half (and curves upward); rectangular if the
// line already explains the curve to within 5% of the parabola's residual.
inline ShapeVerdict classify_shape(std::span<const double> areas, std::span<const double> f_grid) {
    detail::require(areas.size() == f_grid.size(), "classify_shape: grid/area length mismatch");
    detail::require(f_grid.size() >= 4, "classify_shape: need at least 4 grid points");
    bool any = false;
    for (double a : areas) any = any || a != 0.0;
    if (!any) throw std::invalid_argument("classify_shape: degenerate all-zero areas");

    const auto lin = detail::fit_poly(f_grid, areas, 1);
    const auto quad = detail::fit_poly(f_grid, areas, 2);
    const double gamma = quad.coef[2];
    if (quad.ssr < 0.5 * lin.ssr && gamma > 0.0) return ShapeVerdict::Triangular;
    if (lin.ssr <= 1.05 * quad.ssr) return ShapeVerdict::Rectangular;
    return ShapeVerdict::Unclassified;
}

// Group sizes after merging peaks whose valley (end of one peak's last
// sample to start of the next's first, in seconds) is within the threshold.
inline std::vector<std::size_t> nocp_groups(const std::vector<PeakDescriptor>& peaks,
                                            double gap_threshold_s, double t_s) {
    detail::require(gap_threshold_s >= 0.0, "nocp_groups: negative threshold");
    detail::require(t_s > 0.0, "nocp_groups: bad step length");
    std::vector<std::size_t> groups;
    if (peaks.empty()) return groups;
    std::size_t run = 1;
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        detail::require(peaks[i].t_a > peaks[i - 1].t_b, "nocp_groups: peaks not sorted/disjoint");
        const double gap_s = static_cast<double>(peaks[i].t_a - peaks[i - 1].t_b - 1) * t_s;
        if (gap_s <= gap_threshold_s) {
            ++run;
        } else {
            groups.push_back(run);
            run = 1;
        }
    }
    groups.push_back(run);
    return groups;
}

namespace detail {

inline std::vector<std::pair<double, double>> make_cdf(std::vector<double> values) {
    std::vector<std::pair<double, double>> cdf;
    if (values.empty()) return cdf;
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        // collapse duplicates: keep the highest cumulative probability per x
        if (!cdf.empty() && cdf.back().first == values[i]) cdf.back().second = (i + 1) / n;
        else cdf.emplace_back(values[i], (i + 1) / n);
    }
    return cdf;
}

} // namespace detail

inline constexpr double kDefaultCappingFraction = 0.2;
inline constexpr double kDefaultNocpGapSeconds = 120.0;
inline constexpr double kSecondsPerDay = 86400.0;

// Whole-trace statistics: split by UTC midnight, threshold and segment each
// day, pool the per-peak measures, and classify each day's aggregate shape.
inline PeakStats peak_statistics(const TraceSeries& trace, double f = kDefaultCappingFraction,
                                 double gap_threshold_s = kDefaultNocpGapSeconds) {
    validate(trace);
    detail::require(f >= 0.0 && f <= 1.0, "peak_statistics: f must lie in [0,1]");

    // day boundaries by timestamp: sample t lives in day floor(time/86400)
    std::vector<std::pair<std::size_t, std::size_t>> days;  // [begin, end) sample ranges
    {
        std::size_t begin = 0;
        auto day_of = [&](std::size_t t) {
            return std::floor((trace.start_time + static_cast<double>(t) * trace.t_s) / kSecondsPerDay);
        };
        double cur = day_of(0);
        for (std::size_t t = 1; t < trace.size(); ++t) {
            const double d = day_of(t);
            if (d != cur) {
                days.emplace_back(begin, t);
                begin = t;
                cur = d;
            }
        }
        days.emplace_back(begin, trace.size());
    }

    PeakStats stats;
    stats.day_count = days.size();
    const std::size_t full_day = static_cast<std::size_t>(std::llround(kSecondsPerDay / trace.t_s));
    std::vector<double> heights, widths, gaps;
    std::vector<double> f_grid;
    for (int i = 1; i <= 19; ++i) f_grid.push_back(0.05 * i);

    for (const auto& [begin, end] : days) {
        if (end - begin < full_day) stats.has_partial_days = true;
        const std::span<const double> day(trace.samples.data() + begin, end - begin);
        const DayProfile profile = daily_threshold(day, f);
        auto peaks = segment_peaks(day, profile, trace.t_s);
        // Per-peak shape: same area fit, run on the peak's own support. A
        // flat-topped support is a rectangle outright (its range is zero).
        for (auto& pk : peaks) {
            const auto support = day.subspan(pk.t_a, pk.t_b - pk.t_a + 1);
            if (daily_threshold(support, f).degenerate)
                pk.shape = ShapeVerdict::Rectangular;
            else
                pk.shape = classify_shape(area_growth(support, f_grid, trace.t_s), f_grid);
        }
        stats.total_peaks += peaks.size();
        for (const auto& pk : peaks) {
            heights.push_back(pk.ph);
            widths.push_back(pk.pw_s);
        }
        for (std::size_t i = 1; i < peaks.size(); ++i)
            gaps.push_back(static_cast<double>(peaks[i].t_a - peaks[i - 1].t_b - 1) * trace.t_s);
        for (std::size_t g : nocp_groups(peaks, gap_threshold_s, trace.t_s))
            ++stats.nocp_histogram[g];
        if (profile.degenerate || peaks.empty()) {
            stats.day_shapes.push_back(ShapeVerdict::Unclassified);
        } else {
            const auto areas = area_growth(day, f_grid, trace.t_s);
            stats.day_shapes.push_back(classify_shape(areas, f_grid));
        }
    }

    stats.height_cdf = detail::make_cdf(std::move(heights));
    stats.width_cdf = detail::make_cdf(std::move(widths));
    stats.gap_cdf = detail::make_cdf(std::move(gaps));
    return stats;
}

} // namespace peakreg
