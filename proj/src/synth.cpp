#include "thzchan/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "thzchan/units.hpp"

namespace thzchan {

std::uint64_t NoiseStream::next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double NoiseStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double NoiseStream::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 drawn from (0, 1] so the log never sees zero.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = units::kTwoPi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

void SynthSpec::validate() const {
    model.validate();
    if (distances_cm.empty()) throw DomainError("synth needs distances");
    if (frequencies_ghz.empty()) throw DomainError("synth needs frequencies");
    if (!std::is_sorted(distances_cm.begin(), distances_cm.end()))
        throw DomainError("synth distances must be sorted");
    if (!std::is_sorted(frequencies_ghz.begin(), frequencies_ghz.end()))
        throw DomainError("synth frequencies must be sorted");
    if (distances_cm.front() < model.d0_cm)
        throw DomainError("synth distances must not fall below the model's d0");
    if (!(noise_sigma_db >= 0.0)) throw DomainError("noise sigma must be >= 0");
    if (!(phase_noise_rad >= 0.0)) throw DomainError("phase noise must be >= 0");
    if (delta_d_model) delta_d_model->validate();
}

namespace {

// Propagation phase in rad, before wrapping. With a correction model the
// correction enters via its antiderivative so that d(phase)/df encodes
// d + delta_d(f):
//   delta_d_mm(f) = (a*f + b)*f / C0   with C0 = c in GHz*mm
//   integral of delta_d_m over f = (a*f^3/3 + b*f^2/2) / (1000*C0)
double propagation_phase_rad(double distance_cm, double f_ghz,
                             const PhaseCorrectionModel* pcm) {
    double meters_times_ghz = units::cm_to_m(distance_cm) * f_ghz;
    if (pcm != nullptr) {
        const double a = pcm->slope_mm2_per_ghz;
        const double b = pcm->intercept_mm2;
        meters_times_ghz += (a * f_ghz * f_ghz * f_ghz / 3.0 +
                             b * f_ghz * f_ghz / 2.0) /
                            (1000.0 * units::kCGhzMm);
    }
    return -units::kTwoPi * 1e9 * meters_times_ghz / units::kSpeedOfLightMPerS;
}

}  // namespace

Dataset generate(const SynthSpec& spec) {
    spec.validate();

    NoiseStream noise(spec.seed);
    std::vector<SweepRecord> records;
    records.reserve(spec.distances_cm.size() * spec.frequencies_ghz.size());

    const PhaseCorrectionModel* pcm =
        spec.delta_d_model ? &*spec.delta_d_model : nullptr;

    for (double d : spec.distances_cm) {
        for (double f : spec.frequencies_ghz) {
            double magnitude_db = -combined_magnitude_db(d, spec.model);
            if (spec.noise_sigma_db > 0.0)
                magnitude_db += spec.noise_sigma_db * noise.gaussian();

            double phase = units::wrap_phase(propagation_phase_rad(d, f, pcm));
            if (spec.phase_noise_rad > 0.0)
                phase += spec.phase_noise_rad * noise.gaussian();

            const double amplitude = std::pow(10.0, magnitude_db / 20.0);
            records.push_back(
                {d, f, std::polar(amplitude, phase)});
        }
    }
    return Dataset::from_records(std::move(records), spec.material);
}

}  // namespace thzchan
