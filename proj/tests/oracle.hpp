#pragma once

// Test-only reference model, independent of the SubWave code path.
//
// A rectangular pulse has constant amplitude, and the insertion instant cuts it into at most two
// segments. Within a segment every sample carries the same arm amplitudes, so each detector
// probability is sum(segment length * |amplitude|^2). Amplitudes are pushed through explicit
// 2x2 matrices.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

using C = std::complex<double>;
using Vec2 = std::array<C, 2>;
using Mat2 = std::array<std::array<C, 2>, 2>;
using Probs = std::array<double, 4>;

inline Vec2 mul(const Mat2& m, const Vec2& v)
{
    return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

inline Mat2 hadamard()
{
    const double r = 1.0 / std::sqrt(2.0);
    return {{{C(r), C(r)}, {C(r), C(-r)}}};
}

// Output splitter with the arm-1 phase: rows give (e^{i phi} a1 - a2, e^{i phi} a1 + a2) / sqrt2.
inline Mat2 output_splitter(double phi)
{
    const double r = 1.0 / std::sqrt(2.0);
    const C e = std::exp(C(0.0, phi));
    return {{{e * r, C(-r)}, {e * r, C(r)}}};
}

/// Arms after BS1 for a unit pulse of unit length.
inline Vec2 arms() { return mul(hadamard(), {C(1.0), C(0.0)}); }

/// Passed segment of length p_p to (D1, D2) with phase on arm 1; gated rest through BS2.
inline Probs edc_conceptual(double phi, double p_p)
{
    const Vec2 a = arms();
    const Vec2 front{std::exp(C(0.0, phi)) * a[0], a[1]};
    const Vec2 back = mul(output_splitter(phi), a);
    return {p_p * std::norm(front[0]) + (1.0 - p_p) * std::norm(back[0]),
            p_p * std::norm(front[1]) + (1.0 - p_p) * std::norm(back[1]), 0.0, 0.0};
}

/// Passed segment to (D3, D4); gated rest through BS2 to (D1, D2).
inline Probs edc_bench(double phi, double p_p)
{
    const Vec2 a = arms();
    const Vec2 back = mul(output_splitter(phi), a);
    return {(1.0 - p_p) * std::norm(back[0]), (1.0 - p_p) * std::norm(back[1]), p_p * std::norm(a[0]),
            p_p * std::norm(a[1])};
}

inline Probs closed(double phi) { return edc_conceptual(phi, 0.0); }
inline Probs open(double phi) { return edc_conceptual(phi, 1.0); }

/// Chi-square survival function for 1..3 degrees of freedom in closed form.
inline double chi2_sf(double x, unsigned dof)
{
    switch (dof) {
    case 1: return std::erfc(std::sqrt(x / 2.0));
    case 2: return std::exp(-x / 2.0);
    case 3: return std::erfc(std::sqrt(x / 2.0)) + std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-x / 2.0);
    default: return NAN;
    }
}

} // namespace oracle
