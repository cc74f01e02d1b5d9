#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thzchan/model.hpp"

namespace thzchan {

// Deterministic noise source: splitmix64 stream feeding a Box-Muller
// transform. Fully specified so a reimplementation that picks the same
// algorithm reproduces the stream bit for bit.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    double uniform();     // [0, 1)
    double gaussian();    // standard normal

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Everything generate() needs to produce a sweep grid from known model
// parameters. Identical specs (seed included) produce bit-identical
// datasets.
struct SynthSpec {
    MagnitudeModel model;
    std::vector<double> distances_cm;
    std::vector<double> frequencies_ghz;
    double noise_sigma_db = 0.0;
    double phase_noise_rad = 0.0;
    std::optional<PhaseCorrectionModel> delta_d_model;
    std::uint64_t seed = 0;
    std::string material;

    void validate() const;
};

// Forward-composes the magnitude model and the phase model over the grid:
//   |s21| dB  = -combined_magnitude_db(d) + N(0, noise_sigma_db)
//   phase     = wrap(propagation phase with delta_d correction)
//               + N(0, phase_noise_rad)
// The phase is generated so that its local slope in frequency encodes the
// apparent distance d + delta_d(f): the correction enters through its
// antiderivative, which is what makes a slope-based fit recover the
// generating correction model.
Dataset generate(const SynthSpec& spec);

}  // namespace thzchan
