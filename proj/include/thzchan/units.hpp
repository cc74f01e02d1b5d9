#pragma once

#include <cmath>

// Unit conventions: external interfaces use cm and GHz; all internal
// arithmetic converts to SI.

namespace thzchan::units {

inline constexpr double kSpeedOfLightMPerS = 299'792'458.0;  // exact
inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// c expressed in GHz*mm: lambda_mm = kCGhzMm / f_ghz.
inline constexpr double kCGhzMm = 299.792458;

inline constexpr double cm_to_m(double cm) { return cm * 1e-2; }
inline constexpr double m_to_cm(double m) { return m * 1e2; }
inline constexpr double ghz_to_hz(double ghz) { return ghz * 1e9; }
inline constexpr double cm_to_mm(double cm) { return cm * 10.0; }
inline constexpr double mm_to_cm(double mm) { return mm * 0.1; }

inline double wavelength_mm(double f_ghz) { return kCGhzMm / f_ghz; }
inline double wavelength_cm(double f_ghz) { return mm_to_cm(wavelength_mm(f_ghz)); }

// Free-space wavenumber 2*pi*f/c in rad/cm.
inline double free_space_wavenumber_rad_per_cm(double f_ghz) {
    return kTwoPi * ghz_to_hz(f_ghz) / kSpeedOfLightMPerS / 100.0;
}

// Wraps an angle to the canonical range [-pi, pi).
inline double wrap_phase(double x) {
    double y = std::fmod(x + kPi, kTwoPi);
    if (y < 0.0) y += kTwoPi;
    return y - kPi;
}

}  // namespace thzchan::units
