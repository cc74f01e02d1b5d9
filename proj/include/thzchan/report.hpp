#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "thzchan/model.hpp"

namespace thzchan {

// One row of the fit-versus-measurement report at a single frequency:
// measured path loss, the intercept-only curve, and the combined curve.
struct ReportRow {
    double distance_cm = 0.0;
    double measured_db = 0.0;
    double floating_db = 0.0;
    double combined_db = 0.0;
};

std::vector<ReportRow> build_report(const Dataset& dataset,
                                    const MagnitudeModel& model, double f_ghz);

// Fixed columns: distance_cm,measured_db,floating_db,combined_db
void write_report_csv(const std::vector<ReportRow>& rows,
                      const std::filesystem::path& path);

// Self-contained static SVG plot of the three series.
void write_report_svg(const std::vector<ReportRow>& rows,
                      const std::filesystem::path& path,
                      const std::string& title);

}  // namespace thzchan
