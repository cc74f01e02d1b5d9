// thzchan: fit, evaluate, and synthesize single-reflection terahertz sweep
// data: floating-intercept path loss with a standing-wave ripple, and phase
// prediction through a frequency-linear distance correction.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thzchan/dataio.hpp"
#include "thzchan/estimation.hpp"
#include "thzchan/model.hpp"
#include "thzchan/report.hpp"
#include "thzchan/synth.hpp"
#include "thzchan/units.hpp"

namespace {

using namespace thzchan;

// Exit codes, one per error class (README "Exit codes").
enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kDomain = 3,
    kInsufficientData = 4,
    kFormat = 5,
    kData = 6,
    kGrid = 7,
    kVersion = 8,
    kIo = 9,
};

// Removes output files unless the run commits, so failures never leave
// partial outputs behind.
class OutputGuard {
public:
    void track(const std::filesystem::path& p) { pending_.push_back(p); }
    void commit() { committed_ = true; }
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& p : pending_) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    }

private:
    std::vector<std::filesystem::path> pending_;
    bool committed_ = false;
};

// Axis syntax: either a comma list ("30.4,34,37.6") or start:step:count
// ("30.4:3.6:12").
std::vector<double> parse_axis(const std::string& text) {
    std::vector<double> values;
    if (text.find(':') != std::string::npos) {
        double start = 0.0, step = 0.0;
        long count = 0;
        char trailing = 0;
        if (std::sscanf(text.c_str(), "%lf:%lf:%ld%c", &start, &step, &count,
                        &trailing) != 3 ||
            count < 1) {
            throw CLI::ValidationError("axis", "expected start:step:count, got '" +
                                                   text + "'");
        }
        for (long i = 0; i < count; ++i)
            values.push_back(start + step * static_cast<double>(i));
        return values;
    }
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t comma = text.find(',', pos);
        const std::string item =
            text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError("axis", "malformed number '" + item + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (values.empty())
        throw CLI::ValidationError("axis", "empty value list");
    return values;
}

std::vector<PathLossPoint> path_loss_points(const Dataset& ds, double f_ghz) {
    std::vector<PathLossPoint> points;
    for (const auto& [d, pl] : ds.path_loss_slice(f_ghz)) {
        points.push_back({d, pl});
    }
    return points;
}

MagnitudeFitReport run_magnitude_fit(const Dataset& ds, double f_ghz, double d0,
                                     std::optional<double> k_prior,
                                     int grid_points) {
    const double f = ds.snap_frequency(f_ghz);
    const std::vector<PathLossPoint> points = path_loss_points(ds, f);

    const FloatingInterceptFit base = fit_floating_intercept(points, d0);
    std::vector<ResidualPoint> residuals;
    residuals.reserve(points.size());
    for (const PathLossPoint& p : points) {
        const double predicted =
            base.alpha_db + base.beta * 10.0 * std::log10(p.distance_cm / d0);
        residuals.push_back({p.distance_cm, predicted - p.path_loss_db});
    }

    const double prior =
        k_prior ? *k_prior : units::free_space_wavenumber_rad_per_cm(f);
    StandingWaveSearchOptions search;
    search.grid_points = grid_points;
    const StandingWaveInit init =
        initialize_standing_wave(residuals, d0, prior, search);

    return refine_magnitude_fit(
        points, d0, {base.alpha_db, base.beta, init.gamma, init.k_rad_per_cm});
}

void print_magnitude_report(const MagnitudeFitReport& rep, double f_ghz,
                            const std::string& material) {
    const MagnitudeModel& m = rep.model;
    std::printf("magnitude fit at %.4g GHz%s%s\n", f_ghz,
                material.empty() ? "" : " - ", material.c_str());
    std::printf("  alpha         %12.6f dB\n", m.alpha_db);
    std::printf("  beta          %12.6f\n", m.beta);
    std::printf("  |Gamma|       %12.6f\n", m.gamma.magnitude());
    std::printf("  angle(Gamma)  %12.6f pi rad\n",
                m.gamma.phase_rad() / units::kPi);
    std::printf("  k             %12.6f pi rad/cm\n",
                m.k_rad_per_cm / units::kPi);
    std::printf("  sigma         %12.6f dB\n", m.sigma_db);
    std::printf("  rms_before    %12.6f dB\n", rep.rms_before_db);
    std::printf("  rms_after     %12.6f dB\n", rep.rms_after_db);
    std::printf("  converged     %s\n", rep.converged ? "yes" : "no");
}

int dispatch(int argc, char** argv) {
    CLI::App app{
        "Terahertz single-reflection channel toolkit: magnitude and phase "
        "model fitting, prediction, synthesis, and reporting"};
    app.require_subcommand(1);

    OutputGuard guard;

    // fit-mag
    auto* fit_mag = app.add_subcommand(
        "fit-mag", "Fit the standing-wave magnitude model at one frequency");
    struct {
        std::string input, out;
        double freq = 0.0, d0 = 0.0;
        std::optional<double> k_prior;
        int grid_points = 2001;
    } fm;
    fit_mag->add_option("--input", fm.input, "sweep CSV")->required();
    fit_mag->add_option("--freq", fm.freq, "fit frequency (GHz)")->required();
    fit_mag->add_option("--d0", fm.d0, "reference distance (cm)")->required();
    fit_mag->add_option("--k-prior", fm.k_prior,
                        "wavenumber prior (rad/cm); default: free space at "
                        "--freq");
    fit_mag->add_option("--grid-points", fm.grid_points,
                        "k grid resolution for the initial search");
    fit_mag->add_option("--out", fm.out, "model file to write")->required();
    fit_mag->callback([&] {
        const Dataset ds = read_sweeps(fm.input);
        const MagnitudeFitReport rep =
            run_magnitude_fit(ds, fm.freq, fm.d0, fm.k_prior, fm.grid_points);
        guard.track(fm.out);
        write_model(rep.model, fm.out);
        print_magnitude_report(rep, ds.snap_frequency(fm.freq), ds.material());
    });

    // fit-phase
    auto* fit_phase = app.add_subcommand(
        "fit-phase",
        "Fit apparent distances from phase slopes and the delta_d*lambda line");
    struct {
        std::string input, out;
        std::vector<double> centers;
        double window = 2.0;
    } fp;
    fit_phase->add_option("--input", fp.input, "sweep CSV")->required();
    fit_phase
        ->add_option("--centers", fp.centers, "center frequencies (GHz)")
        ->required()
        ->delimiter(',');
    fit_phase->add_option("--window", fp.window,
                          "window halfwidth around each center (GHz)");
    fit_phase->add_option("--out", fp.out, "phase model file to write")
        ->required();
    fit_phase->callback([&] {
        const Dataset ds = read_sweeps(fp.input);
        std::vector<double> centers;
        for (double c : fp.centers) centers.push_back(ds.snap_frequency(c));
        for (double c : centers) {
            if (c - fp.window < ds.frequencies_ghz().front() - 1e-9 ||
                c + fp.window > ds.frequencies_ghz().back() + 1e-9) {
                std::ostringstream os;
                os << "window of +-" << fp.window << " GHz around " << c
                   << " GHz extends beyond the sweep";
                throw InsufficientDataError(os.str());
            }
        }

        std::vector<DeltaDSample> samples;
        std::vector<std::vector<PhaseSlopeFit>> per_distance;
        for (double d : ds.distances_cm()) {
            const auto track = ds.phase_track(d);
            std::vector<double> wrapped;
            wrapped.reserve(track.size());
            for (const auto& [f, phi] : track) wrapped.push_back(phi);
            const std::vector<double> unwrapped = unwrap_phase(wrapped);

            std::vector<PhaseSample> sweep;
            sweep.reserve(track.size());
            for (size_t i = 0; i < track.size(); ++i)
                sweep.push_back({track[i].first, unwrapped[i]});

            std::vector<PhaseSlopeFit> fits;
            for (double c : centers) {
                const PhaseSlopeFit fit = fit_phase_slope(sweep, c, fp.window);
                samples.push_back(DeltaDSample::make(c, d, fit.fitted_distance_cm));
                fits.push_back(fit);
            }
            per_distance.push_back(std::move(fits));
        }

        const PhaseCorrectionModel line = fit_delta_d_line(samples);
        guard.track(fp.out);
        write_model(line, fp.out);

        std::printf("%-10s", "d_meas");
        for (double c : centers) {
            char label[32];
            std::snprintf(label, sizeof(label), "%.6g GHz", c);
            std::printf("  %-20s", label);
        }
        std::printf("\n%-10s", "");
        for (size_t j = 0; j < centers.size(); ++j)
            std::printf("  %9s %9s ", "d_fit", "delta_d");
        std::printf("\n");
        for (size_t i = 0; i < ds.distances_cm().size(); ++i) {
            std::printf("%-10.2f", ds.distances_cm()[i]);
            for (const PhaseSlopeFit& fit : per_distance[i]) {
                std::printf("  %9.2f %9.2f ", fit.fitted_distance_cm,
                            fit.fitted_distance_cm - ds.distances_cm()[i]);
            }
            std::printf("\n");
        }
        std::printf("delta_d*lambda line: slope = %.6g mm^2/GHz, intercept = "
                    "%.6g mm^2\n",
                    line.slope_mm2_per_ghz, line.intercept_mm2);
    });

    // predict-mag
    auto* predict_mag = app.add_subcommand(
        "predict-mag", "Evaluate the combined magnitude model at a distance");
    struct {
        std::string model;
        double distance = 0.0;
    } pm;
    predict_mag->add_option("--model", pm.model, "magnitude model file")
        ->required();
    predict_mag->add_option("--distance", pm.distance, "distance (cm)")
        ->required();
    predict_mag->callback([&] {
        const MagnitudeModel model = read_magnitude_model(pm.model);
        std::printf("%.12g dB\n", combined_magnitude_db(pm.distance, model));
    });

    // predict-phase
    auto* predict_phase = app.add_subcommand(
        "predict-phase", "Predict received phase with the distance correction");
    struct {
        std::string model;
        double freq = 0.0, distance = 0.0;
    } pp;
    predict_phase->add_option("--phase-model", pp.model, "phase model file")
        ->required();
    predict_phase->add_option("--freq", pp.freq, "frequency (GHz)")->required();
    predict_phase->add_option("--distance", pp.distance, "distance (cm)")
        ->required();
    predict_phase->callback([&] {
        const PhaseCorrectionModel model = read_phase_model(pp.model);
        std::printf("%.12g rad\n",
                    predict_phase_rad(pp.distance, pp.freq, model));
    });

    // synth
    auto* synth = app.add_subcommand(
        "synth", "Generate a synthetic sweep grid from model files");
    struct {
        std::string model, delta_d_model, out, material;
        std::string distances, freqs;
        std::string format = "complex";
        double noise_sigma_db = 0.0, phase_noise_rad = 0.0;
        std::uint64_t seed = 0;
    } sy;
    synth->add_option("--model", sy.model, "magnitude model file")->required();
    synth->add_option("--delta-d-model", sy.delta_d_model,
                      "optional phase model file");
    synth
        ->add_option("--distances", sy.distances,
                     "distances (cm): comma list or start:step:count")
        ->required();
    synth
        ->add_option("--freqs", sy.freqs,
                     "frequencies (GHz): comma list or start:step:count")
        ->required();
    synth->add_option("--noise-sigma-db", sy.noise_sigma_db,
                      "magnitude noise std dev (dB)");
    synth->add_option("--phase-noise-rad", sy.phase_noise_rad,
                      "phase noise std dev (rad)");
    synth->add_option("--seed", sy.seed, "noise stream seed");
    synth->add_option("--material", sy.material, "material label");
    synth->add_option("--format", sy.format, "output schema: complex or polar")
        ->check(CLI::IsMember({"complex", "polar"}));
    synth->add_option("--out", sy.out, "sweep CSV to write")->required();
    synth->callback([&] {
        SynthSpec spec;
        spec.model = read_magnitude_model(sy.model);
        if (!sy.delta_d_model.empty())
            spec.delta_d_model = read_phase_model(sy.delta_d_model);
        spec.distances_cm = parse_axis(sy.distances);
        spec.frequencies_ghz = parse_axis(sy.freqs);
        spec.noise_sigma_db = sy.noise_sigma_db;
        spec.phase_noise_rad = sy.phase_noise_rad;
        spec.seed = sy.seed;
        spec.material = sy.material;

        const Dataset ds = generate(spec);
        guard.track(sy.out);
        write_sweeps(ds, sy.out,
                     sy.format == "complex" ? SweepFormat::complex_iq
                                            : SweepFormat::polar_db);
        std::printf("wrote %zu records (%zu distances x %zu frequencies)\n",
                    ds.records().size(), ds.distances_cm().size(),
                    ds.frequencies_ghz().size());
    });

    // report
    auto* report = app.add_subcommand(
        "report", "Emit measured vs modeled path loss per distance");
    struct {
        std::string input, model, emit = "csv", out;
        double freq = 0.0;
    } rp;
    report->add_option("--input", rp.input, "sweep CSV")->required();
    report->add_option("--model", rp.model, "magnitude model file")->required();
    report->add_option("--freq", rp.freq, "frequency slice (GHz)")->required();
    report->add_option("--emit", rp.emit, "output kind: csv or svg")
        ->check(CLI::IsMember({"csv", "svg"}));
    report->add_option("--out", rp.out, "file to write")->required();
    report->callback([&] {
        const Dataset ds = read_sweeps(rp.input);
        const MagnitudeModel model = read_magnitude_model(rp.model);
        const double f = ds.snap_frequency(rp.freq);
        const std::vector<ReportRow> rows = build_report(ds, model, f);
        guard.track(rp.out);
        if (rp.emit == "csv") {
            write_report_csv(rows, rp.out);
        } else {
            std::ostringstream title;
            title << "path loss at " << f << " GHz";
            if (!ds.material().empty()) title << " - " << ds.material();
            write_report_svg(rows, rp.out, title.str());
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return kUsage;
    }
    guard.commit();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const thzchan::DomainError& e) {
        std::cerr << "error: domain: " << e.what() << "\n";
        return kDomain;
    } catch (const thzchan::InsufficientDataError& e) {
        std::cerr << "error: insufficient-data: " << e.what() << "\n";
        return kInsufficientData;
    } catch (const thzchan::FormatError& e) {
        std::cerr << "error: format: " << e.what() << "\n";
        return kFormat;
    } catch (const thzchan::DataError& e) {
        std::cerr << "error: data: " << e.what() << "\n";
        return kData;
    } catch (const thzchan::GridError& e) {
        std::cerr << "error: grid: " << e.what() << "\n";
        return kGrid;
    } catch (const thzchan::VersionError& e) {
        std::cerr << "error: version: " << e.what() << "\n";
        return kVersion;
    } catch (const thzchan::IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return kInternal;
    }
}
