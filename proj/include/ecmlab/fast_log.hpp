#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

namespace ecmlab {

// Natural log accurate to ~1 ulp, implemented as pure IEEE arithmetic
// (standard mantissa reduction plus the fdlibm minimax polynomial).
// The Kelly objective evaluates hundreds of logs per solve; a local
// branch-light implementation keeps that loop fast and makes results
// independent of the host libm.
inline double fast_log(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) return std::log(x);  // edge cases delegate

    constexpr double ln2_hi = 6.93147180369123816490e-01;
    constexpr double ln2_lo = 1.90821492927058770002e-10;
    constexpr double Lg1 = 6.666666666666735130e-01;
    constexpr double Lg2 = 3.999999999940941908e-01;
    constexpr double Lg3 = 2.857142874366239149e-01;
    constexpr double Lg4 = 2.222219843214978396e-01;
    constexpr double Lg5 = 1.818357216161805012e-01;
    constexpr double Lg6 = 1.531383769920937332e-01;
    constexpr double Lg7 = 1.479819860511658591e-01;

    int k = 0;
    if (x < 0x1p-1022) {  // subnormal: rescale
        x *= 0x1p54;
        k -= 54;
    }
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    std::uint32_t hx = static_cast<std::uint32_t>(bits >> 32);
    k += static_cast<int>(hx >> 20) - 1023;
    hx &= 0x000fffffu;
    const std::uint32_t i = (hx + 0x95f64u) & 0x100000u;
    // normalize mantissa into [sqrt(2)/2, sqrt(2))
    bits = (static_cast<std::uint64_t>(hx | (i ^ 0x3ff00000u)) << 32) |
           (bits & 0xffffffffull);
    x = std::bit_cast<double>(bits);
    k += static_cast<int>(i >> 20);

    const double f = x - 1.0;
    const double s = f / (2.0 + f);
    const double z = s * s;
    const double w = z * z;
    const double t1 = w * (Lg2 + w * (Lg4 + w * Lg6));
    const double t2 = z * (Lg1 + w * (Lg3 + w * (Lg5 + w * Lg7)));
    const double r = t1 + t2;
    const double hfsq = 0.5 * f * f;
    const double dk = static_cast<double>(k);
    return dk * ln2_hi - ((hfsq - (s * (hfsq + r) + dk * ln2_lo)) - f);
}

}  // namespace ecmlab
