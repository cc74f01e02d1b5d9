#include "thzchan/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "thzchan/units.hpp"

namespace thzchan {

double SweepRecord::magnitude_db() const {
    return 20.0 * std::log10(std::abs(s21));
}

double SweepRecord::path_loss_db() const {
    return -magnitude_db();
}

double SweepRecord::phase_rad() const {
    return units::wrap_phase(std::arg(s21));
}

ReflectionCoefficient::ReflectionCoefficient(double magnitude, double phase_rad)
    : magnitude_(magnitude), phase_rad_(units::wrap_phase(phase_rad)) {
    if (!(magnitude >= 0.0 && magnitude < 1.0)) {
        std::ostringstream os;
        os << "reflection coefficient magnitude " << magnitude
           << " outside [0, 1)";
        throw DomainError(os.str());
    }
}

void MagnitudeModel::validate() const {
    if (!(d0_cm > 0.0)) throw DomainError("reference distance d0 must be > 0");
    if (!std::isfinite(alpha_db)) throw DomainError("alpha must be finite");
    if (!std::isfinite(beta)) throw DomainError("beta must be finite");
    if (!(sigma_db >= 0.0)) throw DomainError("sigma must be >= 0");
    if (!(k_rad_per_cm > 0.0)) throw DomainError("wavenumber k must be > 0");
}

void PhaseCorrectionModel::validate() const {
    if (!(delta_d_lambda_mm2(validity_min_ghz) > 0.0) ||
        !(delta_d_lambda_mm2(validity_max_ghz) > 0.0)) {
        std::ostringstream os;
        os << "delta_d*lambda line must stay positive over ["
           << validity_min_ghz << ", " << validity_max_ghz << "] GHz";
        throw DomainError(os.str());
    }
}

double PhaseCorrectionModel::delta_d_cm(double f_ghz) const {
    const double product = delta_d_lambda_mm2(f_ghz);
    const double delta_d_mm = product / units::wavelength_mm(f_ghz);
    if (!(delta_d_mm > 0.0)) {
        throw DomainError("correction model extrapolated out of validity");
    }
    return units::mm_to_cm(delta_d_mm);
}

Dataset Dataset::from_records(std::vector<SweepRecord> records,
                              std::string material) {
    if (records.empty()) throw DataError("dataset has no records");

    for (const SweepRecord& r : records) {
        if (!std::isfinite(r.distance_cm) || !std::isfinite(r.frequency_ghz) ||
            !std::isfinite(r.s21.real()) || !std::isfinite(r.s21.imag())) {
            throw DataError("non-finite value in sweep record");
        }
        if (!(r.distance_cm > 0.0)) throw DataError("non-positive distance");
        if (!(r.frequency_ghz > 0.0)) throw DataError("non-positive frequency");
        if (!(std::abs(r.s21) > 0.0)) {
            std::ostringstream os;
            os << "zero-magnitude s21 at (" << r.distance_cm << " cm, "
               << r.frequency_ghz << " GHz)";
            throw DataError(os.str());
        }
    }

    std::sort(records.begin(), records.end(),
              [](const SweepRecord& a, const SweepRecord& b) {
                  if (a.distance_cm != b.distance_cm)
                      return a.distance_cm < b.distance_cm;
                  return a.frequency_ghz < b.frequency_ghz;
              });

    Dataset ds;
    for (const SweepRecord& r : records) {
        if (ds.distances_cm_.empty() || ds.distances_cm_.back() != r.distance_cm)
            ds.distances_cm_.push_back(r.distance_cm);
    }
    {
        std::vector<double> freqs;
        for (const SweepRecord& r : records) freqs.push_back(r.frequency_ghz);
        std::sort(freqs.begin(), freqs.end());
        freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
        ds.frequencies_ghz_ = std::move(freqs);
    }

    const size_t nd = ds.distances_cm_.size();
    const size_t nf = ds.frequencies_ghz_.size();
    if (records.size() != nd * nf) {
        std::ostringstream os;
        os << "incomplete grid: " << records.size() << " records for " << nd
           << " distances x " << nf << " frequencies";
        throw GridError(os.str());
    }
    // Sorted record order must match the full cartesian grid; a duplicate
    // pair always leaves some other pair missing, so this also catches
    // duplicates.
    size_t idx = 0;
    for (size_t i = 0; i < nd; ++i) {
        for (size_t j = 0; j < nf; ++j, ++idx) {
            const SweepRecord& r = records[idx];
            if (r.distance_cm != ds.distances_cm_[i] ||
                r.frequency_ghz != ds.frequencies_ghz_[j]) {
                std::ostringstream os;
                os << "grid cell (" << ds.distances_cm_[i] << " cm, "
                   << ds.frequencies_ghz_[j]
                   << " GHz) missing or duplicated";
                throw GridError(os.str());
            }
        }
    }

    if (nf >= 2) {
        const double step = ds.frequencies_ghz_[1] - ds.frequencies_ghz_[0];
        for (size_t j = 1; j < nf; ++j) {
            const double gap =
                ds.frequencies_ghz_[j] - ds.frequencies_ghz_[j - 1];
            if (std::abs(gap - step) > 1e-9) {
                std::ostringstream os;
                os << "non-uniform frequency step: gap of " << gap
                   << " GHz between " << ds.frequencies_ghz_[j - 1] << " and "
                   << ds.frequencies_ghz_[j] << " GHz (expected " << step
                   << ")";
                throw GridError(os.str());
            }
        }
        ds.frequency_step_ghz_ = step;
    }

    ds.records_ = std::move(records);
    ds.material_ = std::move(material);
    return ds;
}

namespace {

double snap_to(const std::vector<double>& values, double wanted, double tol,
               const char* what) {
    auto it = std::lower_bound(values.begin(), values.end(), wanted);
    double best = 0.0;
    double best_err = std::numeric_limits<double>::infinity();
    for (auto cand : {it == values.begin() ? it : std::prev(it), it}) {
        if (cand == values.end()) continue;
        const double err = std::abs(*cand - wanted);
        if (err < best_err) {
            best_err = err;
            best = *cand;
        }
    }
    if (!(best_err <= tol)) {
        std::ostringstream os;
        os << what << " " << wanted << " not on the grid";
        throw GridError(os.str());
    }
    return best;
}

}  // namespace

double Dataset::snap_frequency(double f_ghz, double tol_ghz) const {
    return snap_to(frequencies_ghz_, f_ghz, tol_ghz, "frequency (GHz)");
}

double Dataset::snap_distance(double d_cm, double tol_cm) const {
    return snap_to(distances_cm_, d_cm, tol_cm, "distance (cm)");
}

std::vector<std::pair<double, double>> Dataset::path_loss_slice(
    double f_ghz) const {
    const double f = snap_frequency(f_ghz);
    std::vector<std::pair<double, double>> slice;
    slice.reserve(distances_cm_.size());
    for (const SweepRecord& r : records_) {
        if (r.frequency_ghz == f) slice.emplace_back(r.distance_cm, r.path_loss_db());
    }
    return slice;
}

std::vector<std::pair<double, double>> Dataset::phase_track(
    double distance_cm) const {
    const double d = snap_distance(distance_cm);
    std::vector<std::pair<double, double>> track;
    track.reserve(frequencies_ghz_.size());
    for (const SweepRecord& r : records_) {
        if (r.distance_cm == d) track.emplace_back(r.frequency_ghz, r.phase_rad());
    }
    return track;
}

double path_loss_db(double distance_cm, const MagnitudeModel& m) {
    m.validate();
    if (distance_cm < m.d0_cm) {
        std::ostringstream os;
        os << "distance " << distance_cm << " cm below reference distance "
           << m.d0_cm << " cm";
        throw DomainError(os.str());
    }
    return m.alpha_db + 10.0 * m.beta * std::log10(distance_cm / m.d0_cm);
}

double standing_wave_gain_db(double distance_cm, double d0_cm,
                             const ReflectionCoefficient& gamma,
                             double k_rad_per_cm) {
    if (distance_cm < d0_cm) {
        std::ostringstream os;
        os << "distance " << distance_cm << " cm below reference distance "
           << d0_cm << " cm";
        throw DomainError(os.str());
    }
    const double g = gamma.magnitude();
    const double arg = gamma.phase_rad() + 2.0 * k_rad_per_cm * (distance_cm - d0_cm);
    return 10.0 * std::log10(1.0 + g * g + 2.0 * g * std::cos(arg));
}

double combined_magnitude_db(double distance_cm, const MagnitudeModel& m) {
    return path_loss_db(distance_cm, m) -
           standing_wave_gain_db(distance_cm, m.d0_cm, m.gamma, m.k_rad_per_cm);
}

double phase_shift_rad(double distance_cm, double delta_f_ghz) {
    if (!(distance_cm > 0.0)) throw DomainError("distance must be > 0");
    return units::kTwoPi * units::cm_to_m(distance_cm) *
           units::ghz_to_hz(delta_f_ghz) / units::kSpeedOfLightMPerS;
}

}  // namespace thzchan
