#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "thzchan/dataio.hpp"
#include "thzchan/estimation.hpp"
#include "thzchan/synth.hpp"
#include "thzchan/units.hpp"

using namespace thzchan;
using units::kPi;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct TempDir {
    std::filesystem::path dir;
    explicit TempDir(const std::string& tag) {
        dir = std::filesystem::temp_directory_path() / ("thzchan_cli_" + tag);
        std::filesystem::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir, ec);
    }
    std::filesystem::path operator/(const std::string& name) const {
        return dir / name;
    }
};

RunResult run(const TempDir& tmp, const std::string& args) {
    const auto out_path = tmp / "_stdout.txt";
    const auto err_path = tmp / "_stderr.txt";
    const std::string cmd = std::string(THZCHAN_CLI_PATH) + " " + args + " >" +
                            out_path.string() + " 2>" + err_path.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WEXITSTATUS(status);
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

MagnitudeModel truth_model() {
    MagnitudeModel m;
    m.alpha_db = 75.0;
    m.beta = 2.0;
    m.d0_cm = 30.4;
    m.gamma = ReflectionCoefficient{0.06, -0.53 * kPi};
    m.k_rad_per_cm = 23.49 * kPi;
    return m;
}

std::string fmt_12g(double v, const char* unit) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g %s\n", v, unit);
    return buf;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("fit-mag recovers a synthesized model end to end") {
    TempDir tmp("fitmag");
    const MagnitudeModel truth = truth_model();
    write_model(truth, tmp / "truth.txt");

    const double spacing = units::wavelength_cm(340.0) / 8.0;
    std::ostringstream synth_cmd;
    synth_cmd << "synth --model " << (tmp / "truth.txt").string()
              << " --distances 30.4:" << spacing << ":40"
              << " --freqs 340 --material metal --out "
              << (tmp / "dense.csv").string();
    RunResult r = run(tmp, synth_cmd.str());
    REQUIRE(r.code == 0);

    std::ostringstream fit_cmd;
    fit_cmd << "fit-mag --input " << (tmp / "dense.csv").string()
            << " --freq 340 --d0 30.4 --out " << (tmp / "fit.txt").string();
    r = run(tmp, fit_cmd.str());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("rms_before") != std::string::npos);
    CHECK(r.out.find("rms_after") != std::string::npos);
    CHECK(r.out.find("|Gamma|") != std::string::npos);

    const MagnitudeModel fitted = read_magnitude_model(tmp / "fit.txt");
    CHECK(std::abs(fitted.alpha_db - truth.alpha_db) < 0.01);
    CHECK(std::abs(fitted.beta - truth.beta) < 0.005);
    CHECK(std::abs(fitted.gamma.magnitude() - truth.gamma.magnitude()) < 0.005);
    CHECK(std::abs(units::wrap_phase(fitted.gamma.phase_rad() -
                                     truth.gamma.phase_rad())) < 0.05);
    CHECK(std::abs(fitted.k_rad_per_cm - truth.k_rad_per_cm) /
              truth.k_rad_per_cm <
          0.001);
}

TEST_CASE("fit-mag with a single distance exits with the insufficient code") {
    TempDir tmp("fitmag_short");
    write_text(tmp / "one.csv",
               "distance_cm,freq_ghz,s21_re,s21_im\n"
               "30.4,340,0.001,0.002\n"
               "30.4,340.1,0.001,0.002\n");
    const RunResult r =
        run(tmp, "fit-mag --input " + (tmp / "one.csv").string() +
                     " --freq 340 --d0 30.4 --out " + (tmp / "m.txt").string());
    CHECK(r.code == 4);
    CHECK(r.err.rfind("error: insufficient-data:", 0) == 0);
    CHECK(r.err.find('\n') == r.err.size() - 1);  // single line
    CHECK_FALSE(std::filesystem::exists(tmp / "m.txt"));
}

TEST_CASE("predict-mag matches the library to the last printed digit") {
    TempDir tmp("predictmag");
    const MagnitudeModel truth = truth_model();
    write_model(truth, tmp / "m.txt");

    RunResult r = run(tmp, "predict-mag --model " + (tmp / "m.txt").string() +
                               " --distance 45.67");
    CHECK(r.code == 0);
    CHECK(r.out == fmt_12g(combined_magnitude_db(45.67, truth), "dB"));

    // At d0 with no ripple the prediction is exactly alpha.
    MagnitudeModel flat = truth;
    flat.gamma = ReflectionCoefficient{};
    flat.alpha_db = 81.25;
    write_model(flat, tmp / "flat.txt");
    r = run(tmp, "predict-mag --model " + (tmp / "flat.txt").string() +
                     " --distance 30.4");
    CHECK(r.code == 0);
    CHECK(r.out == "81.25 dB\n");

    r = run(tmp, "predict-mag --model " + (tmp / "m.txt").string() +
                     " --distance 12.0");
    CHECK(r.code == 3);
    CHECK(r.err.rfind("error: domain:", 0) == 0);
}

TEST_CASE("predict-phase matches the library and validates the band") {
    TempDir tmp("predictphase");
    const PhaseCorrectionModel eq5{-0.17, 107.18};
    write_model(eq5, tmp / "phase.txt");

    RunResult r = run(tmp, "predict-phase --phase-model " +
                               (tmp / "phase.txt").string() +
                               " --freq 340 --distance 52");
    CHECK(r.code == 0);
    CHECK(r.out == fmt_12g(predict_phase_rad(52.0, 340.0, eq5), "rad"));

    r = run(tmp, "predict-phase --phase-model " + (tmp / "phase.txt").string() +
                     " --freq 500 --distance 52");
    CHECK(r.code == 3);
    CHECK(r.err.rfind("error: domain:", 0) == 0);
}

TEST_CASE("fit-phase recovers a constant-product correction model") {
    TempDir tmp("fitphase");
    MagnitudeModel truth = truth_model();
    write_model(truth, tmp / "mag.txt");
    const PhaseCorrectionModel dd{0.0, 48.0};
    write_model(dd, tmp / "dd.txt");

    std::ostringstream synth_cmd;
    synth_cmd << "synth --model " << (tmp / "mag.txt").string()
              << " --delta-d-model " << (tmp / "dd.txt").string()
              << " --distances 30.4:3.6:12 --freqs 338:0.1:1441 --out "
              << (tmp / "sweeps.csv").string();
    RunResult r = run(tmp, synth_cmd.str());
    REQUIRE(r.code == 0);

    r = run(tmp, "fit-phase --input " + (tmp / "sweeps.csv").string() +
                     " --centers 340,480 --window 2 --out " +
                     (tmp / "line.txt").string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("delta_d*lambda line") != std::string::npos);
    CHECK(r.out.find("d_fit") != std::string::npos);

    const PhaseCorrectionModel fitted = read_phase_model(tmp / "line.txt");
    CHECK(std::abs(fitted.slope_mm2_per_ghz) < 1e-9);
    CHECK(std::abs(fitted.intercept_mm2 - 48.0) < 1e-9);
}

TEST_CASE("fit-phase failures leave no partial output behind") {
    TempDir tmp("fitphase_fail");
    MagnitudeModel truth = truth_model();
    write_model(truth, tmp / "mag.txt");

    std::ostringstream synth_cmd;
    synth_cmd << "synth --model " << (tmp / "mag.txt").string()
              << " --distances 30.4:3.6:12 --freqs 338:0.1:41 --out "
              << (tmp / "sweeps.csv").string();
    RunResult r = run(tmp, synth_cmd.str());
    REQUIRE(r.code == 0);

    // A 0.15 GHz halfwidth admits only 3 grid samples.
    r = run(tmp, "fit-phase --input " + (tmp / "sweeps.csv").string() +
                     " --centers 340 --window 0.15 --out " +
                     (tmp / "line.txt").string());
    CHECK(r.code == 4);
    CHECK(r.err.rfind("error: insufficient-data:", 0) == 0);
    CHECK_FALSE(std::filesystem::exists(tmp / "line.txt"));
}

TEST_CASE("report emits matching csv columns and a self-contained svg") {
    TempDir tmp("report");
    MagnitudeModel flat = truth_model();
    flat.gamma = ReflectionCoefficient{};  // floating == combined
    write_model(flat, tmp / "flat.txt");

    std::ostringstream synth_cmd;
    synth_cmd << "synth --model " << (tmp / "flat.txt").string()
              << " --distances 30.4:3.6:12 --freqs 340 --noise-sigma-db 0.4"
              << " --seed 8 --out " << (tmp / "sweeps.csv").string();
    RunResult r = run(tmp, synth_cmd.str());
    REQUIRE(r.code == 0);

    r = run(tmp, "report --input " + (tmp / "sweeps.csv").string() +
                     " --model " + (tmp / "flat.txt").string() +
                     " --freq 340 --emit csv --out " +
                     (tmp / "report.csv").string());
    REQUIRE(r.code == 0);

    std::ifstream in(tmp / "report.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "distance_cm,measured_db,floating_db,combined_db");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        double d, meas, floating, combined;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &d, &meas,
                            &floating, &combined) == 4);
        CHECK(floating == combined);
        ++rows;
    }
    CHECK(rows == 12);

    r = run(tmp, "report --input " + (tmp / "sweeps.csv").string() +
                     " --model " + (tmp / "flat.txt").string() +
                     " --freq 340 --emit svg --out " +
                     (tmp / "report.svg").string());
    REQUIRE(r.code == 0);
    const std::string svg = slurp(tmp / "report.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("report's combined column interpolates noiseless measurements") {
    TempDir tmp("report_interp");
    const MagnitudeModel truth = truth_model();
    write_model(truth, tmp / "truth.txt");

    std::ostringstream synth_cmd;
    synth_cmd << "synth --model " << (tmp / "truth.txt").string()
              << " --distances 30.4:3.6:12 --freqs 340 --out "
              << (tmp / "clean.csv").string();
    RunResult r = run(tmp, synth_cmd.str());
    REQUIRE(r.code == 0);

    r = run(tmp, "report --input " + (tmp / "clean.csv").string() +
                     " --model " + (tmp / "truth.txt").string() +
                     " --freq 340 --emit csv --out " +
                     (tmp / "report.csv").string());
    REQUIRE(r.code == 0);

    std::ifstream in(tmp / "report.csv");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        double d, meas, floating, combined;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &d, &meas,
                            &floating, &combined) == 4);
        CHECK(std::abs(meas - combined) < 1e-9);
    }
}

TEST_CASE("synth is deterministic and equals the library output") {
    TempDir tmp("synth_det");
    const MagnitudeModel truth = truth_model();
    write_model(truth, tmp / "m.txt");

    const std::string args = "synth --model " + (tmp / "m.txt").string() +
                             " --distances 30.4:3.6:12 --freqs 339:0.1:21"
                             " --noise-sigma-db 0.3 --phase-noise-rad 0.01"
                             " --seed 7 --material metal --out ";
    RunResult r1 = run(tmp, args + (tmp / "a.csv").string());
    RunResult r2 = run(tmp, args + (tmp / "b.csv").string());
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(slurp(tmp / "a.csv") == slurp(tmp / "b.csv"));

    SynthSpec spec;
    spec.model = truth;
    for (int i = 0; i < 12; ++i) spec.distances_cm.push_back(30.4 + 3.6 * i);
    for (int i = 0; i < 21; ++i) spec.frequencies_ghz.push_back(339.0 + 0.1 * i);
    spec.noise_sigma_db = 0.3;
    spec.phase_noise_rad = 0.01;
    spec.seed = 7;
    spec.material = "metal";
    write_sweeps(generate(spec), tmp / "lib.csv");
    CHECK(slurp(tmp / "a.csv") == slurp(tmp / "lib.csv"));
}

TEST_CASE("error classes map to distinct exit codes") {
    TempDir tmp("exitcodes");

    RunResult r = run(tmp, "No-such-command");
    CHECK(r.code == 2);
    CHECK(r.err.rfind("error: usage:", 0) == 0);

    r = run(tmp, "predict-mag --model");
    CHECK(r.code == 2);

    write_text(tmp / "bad_header.csv", "a,b,c,d\n1,2,3,4\n");
    r = run(tmp, "fit-mag --input " + (tmp / "bad_header.csv").string() +
                     " --freq 340 --d0 30.4 --out " + (tmp / "x.txt").string());
    CHECK(r.code == 5);
    CHECK(r.err.rfind("error: format:", 0) == 0);

    write_text(tmp / "dup.csv",
               "distance_cm,freq_ghz,s21_re,s21_im\n"
               "30.4,340.0,0.001,0.002\n"
               "30.4,340.0,0.001,0.002\n");
    r = run(tmp, "fit-mag --input " + (tmp / "dup.csv").string() +
                     " --freq 340 --d0 30.4 --out " + (tmp / "x.txt").string());
    CHECK(r.code == 6);
    CHECK(r.err.rfind("error: data:", 0) == 0);

    write_text(tmp / "gap.csv",
               "distance_cm,freq_ghz,s21_re,s21_im\n"
               "30.4,340.0,0.001,0.002\n"
               "30.4,340.1,0.001,0.002\n"
               "30.4,340.3,0.001,0.002\n");
    r = run(tmp, "fit-mag --input " + (tmp / "gap.csv").string() +
                     " --freq 340 --d0 30.4 --out " + (tmp / "x.txt").string());
    CHECK(r.code == 7);
    CHECK(r.err.rfind("error: grid:", 0) == 0);

    write_text(tmp / "v999.txt",
               "format_version = 999\n"
               "model = phase_correction\n"
               "slope_mm2_per_ghz = -0.17\n"
               "intercept_mm2 = 107.18\n");
    r = run(tmp, "predict-phase --phase-model " + (tmp / "v999.txt").string() +
                     " --freq 340 --distance 52");
    CHECK(r.code == 8);
    CHECK(r.err.rfind("error: version:", 0) == 0);

    r = run(tmp, "predict-mag --model /nonexistent/m.txt --distance 45");
    CHECK(r.code == 9);
    CHECK(r.err.rfind("error: io:", 0) == 0);
}
