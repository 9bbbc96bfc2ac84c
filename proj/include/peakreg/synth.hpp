// Synthetic load traces (parameterized peak categories on a 1 MW base) and
// a clipped-random-walk regulation signal standing in for a real market
// feed. Everything here is deterministic given the seed; normals come from
// an in-house Box-Muller over mt19937_64 so regression values stay stable
// across standard libraries.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "peakreg/types.hpp"

namespace peakreg {

inline constexpr double kSynthBaseMw = 1.0;

enum class PeakShape { Rectangular, Triangular };
enum class PeakWidthClass { Narrow, Wide };
enum class PeakHeightClass { Low, High };

struct PeakCategory {
    PeakShape shape = PeakShape::Rectangular;
    PeakWidthClass width = PeakWidthClass::Narrow;
    PeakHeightClass height = PeakHeightClass::Low;
    int count = 1;          // consecutive peaks
    double gap_s = 120.0;   // valley between consecutive peaks, seconds
};

inline double category_peak_width_s(const PeakCategory& c) {
    return c.width == PeakWidthClass::Narrow ? 120.0 : 600.0;
}

inline double category_apex_mw(const PeakCategory& c) {
    return c.height == PeakHeightClass::Low ? 1.33 : 2.0;
}

inline std::string category_name(const PeakCategory& c) {
    std::string s = c.shape == PeakShape::Rectangular ? "rect" : "tri";
    s += c.width == PeakWidthClass::Narrow ? ".narrow" : ".wide";
    s += c.height == PeakHeightClass::Low ? ".low" : ".high";
    if (c.count != 1) s += ".x" + std::to_string(c.count);
    return s;
}

namespace detail {

// Samples of one peak, valley-to-valley exclusive. Rectangles hold the apex
// for round(width/t_s) samples; triangles ramp linearly and are widened to
// an odd sample count so the apex lands exactly on the middle sample.
inline std::vector<double> one_peak_samples(const PeakCategory& c, double t_s) {
    const double apex = category_apex_mw(c);
    long n = std::lround(category_peak_width_s(c) / t_s);
    if (n < 1) n = 1;
    std::vector<double> out;
    if (c.shape == PeakShape::Rectangular) {
        out.assign(static_cast<std::size_t>(n), apex);
    } else {
        if (n % 2 == 0) ++n;
        const double center = static_cast<double>(n - 1) / 2.0;
        const double half = static_cast<double>(n + 1) / 2.0;
        out.resize(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] =
                kSynthBaseMw +
                (apex - kSynthBaseMw) * (half - std::abs(static_cast<double>(i) - center)) / half;
    }
    return out;
}

} // namespace detail

// A flat 1 MW base with `count` copies of the category's peak, the first
// starting at sample `peak_start` (npos = center the whole block).
inline TraceSeries synth_trace(const PeakCategory& category, std::size_t T, double t_s,
                               std::size_t peak_start = kNoViolation, double start_time = 0.0) {
    detail::require(T >= 1, "synth_trace: horizon must be at least one sample");
    detail::require(t_s > 0.0 && std::isfinite(t_s), "synth_trace: bad step length");
    detail::require(category.count >= 1, "synth_trace: peak count must be >= 1");
    if (category.count > 1)
        detail::require(category.gap_s >= t_s, "synth_trace: gap must be at least one step");

    const std::vector<double> peak = detail::one_peak_samples(category, t_s);
    const std::size_t n = peak.size();
    const std::size_t gap = static_cast<std::size_t>(std::lround(category.gap_s / t_s));
    const std::size_t block =
        n * static_cast<std::size_t>(category.count) +
        gap * static_cast<std::size_t>(category.count - 1);
    detail::require(block <= T, "synth_trace: peaks overflow the horizon");
    if (peak_start == kNoViolation) peak_start = (T - block) / 2;
    detail::require(peak_start + block <= T, "synth_trace: peaks overflow the horizon");

    TraceSeries trace;
    trace.t_s = t_s;
    trace.start_time = start_time;
    trace.samples.assign(T, kSynthBaseMw);
    for (int k = 0; k < category.count; ++k) {
        const std::size_t at = peak_start + static_cast<std::size_t>(k) * (n + gap);
        for (std::size_t i = 0; i < n; ++i) trace.samples[at + i] = peak[i];
    }
    return trace;
}

struct RegulationModel {
    double step_sigma = 0.3;
    std::uint64_t seed = 0;
};

namespace detail {

// SplitMix64: cheap, well-mixed stream for deriving independent per-trial
// seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ull);
}

// Deterministic standard normals: Box-Muller over mt19937_64. Avoids
// std::normal_distribution, whose sample sequence is implementation-defined.
class GaussianDraw {
public:
    explicit GaussianDraw(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0,1)
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = mag * std::sin(ang);
        have_spare_ = true;
        return mag * std::cos(ang);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace detail

// Clipped random walk: r(0) = 0, r(t+1) = clip(r(t) + sigma * eps, -1, 1).
// The clipping concentrates occupancy near the rails, qualitatively like a
// fast regulation signal.
inline RegulationSeries synth_regulation(const RegulationModel& model, std::size_t T, double t_s) {
    detail::require(model.step_sigma > 0.0 && std::isfinite(model.step_sigma),
                    "synth_regulation: sigma must be > 0");
    detail::require(T >= 1, "synth_regulation: horizon must be at least one sample");
    detail::require(t_s > 0.0 && std::isfinite(t_s), "synth_regulation: bad step length");
    detail::GaussianDraw normal(model.seed);
    RegulationSeries out;
    out.t_s = t_s;
    out.samples.resize(T);
    double r = 0.0;
    out.samples[0] = 0.0;
    for (std::size_t t = 1; t < T; ++t) {
        r = std::clamp(r + model.step_sigma * normal(), -1.0, 1.0);
        out.samples[t] = r;
    }
    return out;
}

} // namespace peakreg
