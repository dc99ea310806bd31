#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ecmlab {

// Purpose tag mixed into the stream seed so that, e.g., the estimation-error
// draws of one simulation never consume numbers from its path-noise stream.
enum class StreamPurpose : std::uint32_t {
    path_noise = 0,
    estimation = 1,
};

// Inverse of the standard normal CDF (Acklam's rational approximation
// followed by one Halley step), accurate to a few ulp. Used instead of
// std::normal_distribution so every gaussian consumes exactly one engine
// draw and replay is bit-reproducible.
inline double inverse_normal_cdf(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement against the exact CDF.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

// One random stream per (master seed, simulation index, purpose). Streams are
// derived solely from the key, so ensemble results are independent of worker
// count and execution order.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t sim_index,
                 StreamPurpose purpose = StreamPurpose::path_noise) {
        std::seed_seq seq{
            static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
            static_cast<std::uint32_t>(sim_index),   static_cast<std::uint32_t>(sim_index >> 32),
            static_cast<std::uint32_t>(purpose)};
        engine_.seed(seq);
    }

    // Uniform on [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via inverse CDF; consumes exactly one engine draw.
    double gaussian() {
        const double u = (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
        return inverse_normal_cdf(u);
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace ecmlab
