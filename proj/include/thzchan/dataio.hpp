#pragma once

#include <filesystem>
#include <variant>

#include "thzchan/model.hpp"

namespace thzchan {

// The two sweep CSV schemas. Headers are mandatory and must match exactly:
//   complex_iq: distance_cm,freq_ghz,s21_re,s21_im
//   polar_db:   distance_cm,freq_ghz,mag_db,phase_rad
// An optional "# material: <label>" comment line may precede the header.
enum class SweepFormat { complex_iq, polar_db };

Dataset read_sweeps(const std::filesystem::path& path);
void write_sweeps(const Dataset& dataset, const std::filesystem::path& path,
                  SweepFormat format = SweepFormat::complex_iq);

// Model files are line-oriented "key = value" text with explicit units in
// the key names and a format_version field; numbers carry 17 significant
// digits so write-then-read is identity on every field.
using AnyModel = std::variant<MagnitudeModel, PhaseCorrectionModel>;

void write_model(const MagnitudeModel& model, const std::filesystem::path& path);
void write_model(const PhaseCorrectionModel& model,
                 const std::filesystem::path& path);

AnyModel read_model(const std::filesystem::path& path);
MagnitudeModel read_magnitude_model(const std::filesystem::path& path);
PhaseCorrectionModel read_phase_model(const std::filesystem::path& path);

}  // namespace thzchan
