#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "thzchan/errors.hpp"

namespace thzchan {

// One complex transmission sample at (distance, frequency). Distances are
// total path lengths Tx -> reflector -> Rx, measured aperture to aperture.
struct SweepRecord {
    double distance_cm = 0.0;
    double frequency_ghz = 0.0;
    std::complex<double> s21{0.0, 0.0};  // linear, dimensionless

    double magnitude_db() const;  // 20*log10|s21|
    double path_loss_db() const;  // -20*log10|s21|, positive for attenuation
    double phase_rad() const;     // arg(s21) in [-pi, pi)
};

// Reflection coefficient in polar form. Magnitude must lie in [0, 1);
// the phase is canonicalized to [-pi, pi) on construction.
class ReflectionCoefficient {
public:
    ReflectionCoefficient() = default;
    ReflectionCoefficient(double magnitude, double phase_rad);

    double magnitude() const { return magnitude_; }
    double phase_rad() const { return phase_rad_; }

private:
    double magnitude_ = 0.0;
    double phase_rad_ = 0.0;
};

// Full magnitude-model parameter set: floating-intercept path loss plus a
// standing-wave ripple between the antennas.
//
//   PL(d)      = alpha + 10*beta*log10(d/d0)
//   ripple(d)  = 10*log10(1 + |G|^2 + 2|G|cos(angle(G) + 2k(d - d0)))
//   model(d)   = PL(d) - ripple(d)
//
// sigma is the RMS residual of the fit that produced the model; it is
// reported, never added to deterministic predictions.
struct MagnitudeModel {
    double alpha_db = 0.0;      // intercept at the reference distance
    double beta = 0.0;          // distance exponent
    double d0_cm = 0.0;         // reference distance
    double sigma_db = 0.0;      // shadow-fading std dev (fit statistic)
    ReflectionCoefficient gamma;
    double k_rad_per_cm = 0.0;  // standing-wave wavenumber

    // dB reference for the forward-wave amplitude. Absorbed into alpha_db:
    // the two are not separately identifiable from path-loss data, so the
    // ripple is kept a pure modulation.
    static constexpr double forward_amplitude_db = 0.0;

    void validate() const;  // throws DomainError on invariant violation
};

// Apparent distance recovered from the local slope of unwrapped phase
// against frequency.
struct PhaseSlopeFit {
    double center_frequency_ghz = 0.0;
    double window_halfwidth_ghz = 0.0;
    double fitted_distance_cm = 0.0;
    double rms_residual_rad = 0.0;
};

// Line fit of delta_d * lambda (mm*mm) against frequency (GHz). Used to
// predict the distance correction delta_d at a given frequency.
struct PhaseCorrectionModel {
    double slope_mm2_per_ghz = 0.0;
    double intercept_mm2 = 0.0;

    // Frequency band over which the correction is declared valid; the
    // predicted delta_d * lambda must stay positive across it.
    static constexpr double validity_min_ghz = 320.0;
    static constexpr double validity_max_ghz = 480.0;

    void validate() const;  // throws DomainError on invariant violation

    double delta_d_lambda_mm2(double f_ghz) const {
        return slope_mm2_per_ghz * f_ghz + intercept_mm2;
    }

    // Distance correction at f, in cm. Throws DomainError when the line
    // predicts a non-positive product (extrapolated out of validity).
    double delta_d_cm(double f_ghz) const;
};

// Distance-indexed collection of frequency sweeps with unit metadata.
// Records always form a complete grid: every (distance, frequency) pair
// present exactly once, distances strictly increasing, frequencies strictly
// increasing with uniform step.
class Dataset {
public:
    Dataset() = default;

    // Validates and adopts the records (any order); they are stored sorted
    // by distance, then frequency.
    static Dataset from_records(std::vector<SweepRecord> records,
                                std::string material = "");

    const std::vector<SweepRecord>& records() const { return records_; }
    const std::vector<double>& distances_cm() const { return distances_cm_; }
    const std::vector<double>& frequencies_ghz() const { return frequencies_ghz_; }
    double frequency_step_ghz() const { return frequency_step_ghz_; }
    const std::string& material() const { return material_; }

    // Nearest grid frequency within tol; throws GridError when absent.
    double snap_frequency(double f_ghz, double tol_ghz = 1e-6) const;
    double snap_distance(double d_cm, double tol_cm = 1e-6) const;

    // Per-distance path loss (-20*log10|s21|) at one grid frequency.
    std::vector<std::pair<double, double>> path_loss_slice(double f_ghz) const;

    // (frequency, wrapped phase) across the full sweep at one grid distance.
    std::vector<std::pair<double, double>> phase_track(double distance_cm) const;

private:
    std::vector<SweepRecord> records_;
    std::vector<double> distances_cm_;
    std::vector<double> frequencies_ghz_;
    double frequency_step_ghz_ = 0.0;
    std::string material_;
};

// Floating-intercept path loss, deterministic part only.
double path_loss_db(double distance_cm, const MagnitudeModel& m);

// Standing-wave power gain 10*log10(|V_net|^2/|A|^2) relative to the
// forward wave.
double standing_wave_gain_db(double distance_cm, double d0_cm,
                             const ReflectionCoefficient& gamma,
                             double k_rad_per_cm);

// Predicted path loss including the standing-wave ripple:
// path_loss_db - standing_wave_gain_db.
double combined_magnitude_db(double distance_cm, const MagnitudeModel& m);

// Phase shift 2*pi*d*delta_f/c accumulated over a frequency change.
double phase_shift_rad(double distance_cm, double delta_f_ghz);

}  // namespace thzchan
