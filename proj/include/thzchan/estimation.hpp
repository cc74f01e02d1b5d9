#pragma once

#include <span>
#include <utility>
#include <vector>

#include "thzchan/model.hpp"

namespace thzchan {

struct PathLossPoint {
    double distance_cm = 0.0;
    double path_loss_db = 0.0;
};

// Residual of the intercept-only fit, oriented fit-minus-measured so that a
// positive value marks constructive ripple (the measured loss dips below the
// line by the standing-wave gain).
struct ResidualPoint {
    double distance_cm = 0.0;
    double residual_db = 0.0;
};

struct PhaseSample {
    double frequency_ghz = 0.0;
    double phase_rad = 0.0;
};

struct FloatingInterceptFit {
    double alpha_db = 0.0;
    double beta = 0.0;
    double rms_db = 0.0;
};

// Initial (Gamma, k) guess recovered from floating-intercept residuals.
struct StandingWaveInit {
    ReflectionCoefficient gamma;
    double k_rad_per_cm = 0.0;
    bool ripple_detected = false;
};

struct MagnitudeInit {
    double alpha_db = 0.0;
    double beta = 0.0;
    ReflectionCoefficient gamma;
    double k_rad_per_cm = 0.0;
};

struct MagnitudeFitReport {
    MagnitudeModel model;
    double rms_before_db = 0.0;  // residual of the intercept-only fit
    double rms_after_db = 0.0;   // residual including the standing wave
    std::vector<std::pair<double, double>> per_distance_residuals;
    bool converged = true;  // false when the iteration cap was reached
};

// Fitted minus measured distance at one (distance, center frequency) cell.
struct DeltaDSample {
    double frequency_ghz = 0.0;
    double measured_distance_cm = 0.0;
    double fitted_distance_cm = 0.0;
    double delta_d_cm = 0.0;

    static DeltaDSample make(double frequency_ghz, double measured_cm,
                             double fitted_cm) {
        return {frequency_ghz, measured_cm, fitted_cm, fitted_cm - measured_cm};
    }
};

// Ordinary least squares of path loss against 10*log10(d/d0). Requires at
// least two distinct distances, all >= d0.
FloatingInterceptFit fit_floating_intercept(std::span<const PathLossPoint> points,
                                            double d0_cm);

struct StandingWaveSearchOptions {
    int grid_points = 2001;  // k samples over [0.8, 1.2] * k_prior
};

// Grid search for the ripple wavenumber with a per-k linear fit of the
// small-|Gamma| linearization
//   residual_db ~= (20/ln 10)*|G|*cos(angle(G) + 2k(d - d0))
// via cos/sin basis regression. On exact RMS ties the smallest k wins.
StandingWaveInit initialize_standing_wave(std::span<const ResidualPoint> residuals,
                                          double d0_cm, double k_prior_rad_per_cm,
                                          const StandingWaveSearchOptions& opts = {});

struct RefineOptions {
    int max_iterations = 500;
    double min_improvement_db2 = 1e-10;
    double gamma_max = 0.5;
    double k_band = 0.2;  // k constrained to init.k * (1 +- k_band)
};

// Least-squares refinement of (alpha, beta, |Gamma|, angle(Gamma), k) against
// the combined magnitude model, by damped Gauss-Newton steps projected onto
// the bounds. Never throws on noisy or flat data; non-convergence within the
// iteration cap returns the best-so-far with converged = false.
MagnitudeFitReport refine_magnitude_fit(std::span<const PathLossPoint> points,
                                        double d0_cm, const MagnitudeInit& init,
                                        const RefineOptions& opts = {});

// OLS of unwrapped phase against frequency over the window
// [center - halfwidth, center + halfwidth]; the apparent distance follows
// from the slope magnitude. Requires >= 5 samples in the window.
PhaseSlopeFit fit_phase_slope(std::span<const PhaseSample> sweep,
                              double center_ghz, double halfwidth_ghz);

// OLS of delta_d * lambda (mm*mm) against frequency (GHz). Requires samples
// spanning at least two distinct frequencies.
PhaseCorrectionModel fit_delta_d_line(std::span<const DeltaDSample> samples);

// Three-step phase prediction: delta_d from the correction line, corrected
// distance, then the propagation phase wrapped to [-pi, pi). Phase decreases
// with increasing frequency.
double predict_phase_rad(double distance_cm, double f_ghz,
                         const PhaseCorrectionModel& pcm);

// Standard unwrap: adds 2*pi multiples so adjacent differences lie in
// (-pi, pi]; the first element is unchanged.
std::vector<double> unwrap_phase(std::span<const double> wrapped);

// sqrt(mean((measured - predicted)^2)); lengths must match and be >= 1.
double rms_residual(std::span<const double> measured,
                    std::span<const double> predicted);

}  // namespace thzchan
