#include "thzchan/dataio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "thzchan/units.hpp"

namespace thzchan {

namespace {

constexpr std::string_view kComplexHeader = "distance_cm,freq_ghz,s21_re,s21_im";
constexpr std::string_view kPolarHeader = "distance_cm,freq_ghz,mag_db,phase_rad";
constexpr std::string_view kMaterialPrefix = "# material:";

constexpr int kFormatVersion = 1;

std::string trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Shortest decimal form that parses back to the same double.
std::string format_shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// 17 significant digits, enough to round-trip any double.
std::string format_17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return std::string(buf);
}

double parse_double(const std::string& text, const std::string& context) {
    const std::string t = trim(text);
    if (t.empty()) throw FormatError(context + ": empty number");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) {
        throw FormatError(context + ": malformed number '" + t + "'");
    }
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write to " + path.string() + " failed");
}

}  // namespace

Dataset read_sweeps(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    std::string material;
    int line_no = 0;

    // Optional metadata comments precede the header.
    std::string header;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.starts_with("#")) {
            if (t.starts_with(kMaterialPrefix)) {
                material = trim(t.substr(kMaterialPrefix.size()));
            }
            continue;
        }
        header = t;
        break;
    }

    SweepFormat format;
    if (header == kComplexHeader) {
        format = SweepFormat::complex_iq;
    } else if (header == kPolarHeader) {
        format = SweepFormat::polar_db;
    } else if (header.empty()) {
        throw FormatError(path.string() + ": missing header row");
    } else {
        throw FormatError(path.string() + ": header '" + header +
                          "' matches no declared sweep schema");
    }

    std::vector<SweepRecord> records;
    std::map<std::pair<double, double>, int> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const std::vector<std::string> fields = split_csv(t);
        if (fields.size() != 4) {
            std::ostringstream os;
            os << path.string() << ":" << line_no << ": expected 4 fields, got "
               << fields.size();
            throw FormatError(os.str());
        }
        std::ostringstream ctx;
        ctx << path.string() << ":" << line_no;
        const double d = parse_double(fields[0], ctx.str());
        const double f = parse_double(fields[1], ctx.str());

        SweepRecord rec;
        rec.distance_cm = d;
        rec.frequency_ghz = f;
        if (format == SweepFormat::complex_iq) {
            rec.s21 = {parse_double(fields[2], ctx.str()),
                       parse_double(fields[3], ctx.str())};
        } else {
            const double mag_db = parse_double(fields[2], ctx.str());
            const double phase = parse_double(fields[3], ctx.str());
            rec.s21 = std::polar(std::pow(10.0, mag_db / 20.0), phase);
        }

        auto [it, inserted] = seen.try_emplace({d, f}, line_no);
        if (!inserted) {
            std::ostringstream os;
            os << path.string() << ":" << line_no << ": duplicate (distance, "
               << "frequency) key (" << fields[0] << ", " << fields[1]
               << "); first seen at line " << it->second;
            throw DataError(os.str());
        }
        records.push_back(rec);
    }
    return Dataset::from_records(std::move(records), std::move(material));
}

void write_sweeps(const Dataset& dataset, const std::filesystem::path& path,
                  SweepFormat format) {
    std::ofstream out = open_for_write(path);
    if (!dataset.material().empty()) {
        out << kMaterialPrefix << " " << dataset.material() << "\n";
    }
    out << (format == SweepFormat::complex_iq ? kComplexHeader : kPolarHeader)
        << "\n";
    for (const SweepRecord& r : dataset.records()) {
        out << format_shortest(r.distance_cm) << ","
            << format_shortest(r.frequency_ghz) << ",";
        if (format == SweepFormat::complex_iq) {
            out << format_shortest(r.s21.real()) << ","
                << format_shortest(r.s21.imag()) << "\n";
        } else {
            out << format_shortest(r.magnitude_db()) << ","
                << format_shortest(r.phase_rad()) << "\n";
        }
    }
    finish_write(out, path);
}

namespace {

void require_finite(double v, const char* field) {
    if (!std::isfinite(v)) {
        throw DataError(std::string("refusing to write non-finite ") + field);
    }
}

using KeyValues = std::map<std::string, std::string>;

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    KeyValues kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.starts_with("#")) continue;
        const size_t eq = t.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << path.string() << ":" << line_no << ": expected 'key = value'";
            throw FormatError(os.str());
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw FormatError(path.string() + ": empty key");
        if (!kv.emplace(key, value).second) {
            throw FormatError(path.string() + ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

void check_version(const KeyValues& kv, const std::filesystem::path& path) {
    auto it = kv.find("format_version");
    if (it == kv.end()) {
        throw FormatError(path.string() + ": missing format_version");
    }
    const double v = parse_double(it->second, path.string());
    if (v != kFormatVersion) {
        std::ostringstream os;
        os << path.string() << ": unsupported format_version " << it->second
           << " (this build reads version " << kFormatVersion << ")";
        throw VersionError(os.str());
    }
}

double take(KeyValues& kv, const std::string& key,
            const std::filesystem::path& path) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        throw FormatError(path.string() + ": missing key '" + key + "'");
    }
    const double v = parse_double(it->second, path.string() + ": " + key);
    kv.erase(it);
    return v;
}

void expect_drained(const KeyValues& kv, const std::filesystem::path& path) {
    if (!kv.empty()) {
        throw FormatError(path.string() + ": unexpected key '" +
                          kv.begin()->first + "'");
    }
}

}  // namespace

void write_model(const MagnitudeModel& model, const std::filesystem::path& path) {
    require_finite(model.alpha_db, "alpha_db");
    require_finite(model.beta, "beta");
    require_finite(model.d0_cm, "d0_cm");
    require_finite(model.sigma_db, "sigma_db");
    require_finite(model.gamma.magnitude(), "gamma_mag");
    require_finite(model.gamma.phase_rad(), "gamma_phase_rad");
    require_finite(model.k_rad_per_cm, "k_rad_per_cm");
    model.validate();

    std::ofstream out = open_for_write(path);
    out << "format_version = " << kFormatVersion << "\n";
    out << "model = magnitude\n";
    out << "alpha_db = " << format_17(model.alpha_db) << "\n";
    out << "beta = " << format_17(model.beta) << "\n";
    out << "d0_cm = " << format_17(model.d0_cm) << "\n";
    out << "sigma_db = " << format_17(model.sigma_db) << "\n";
    out << "gamma_mag = " << format_17(model.gamma.magnitude()) << "\n";
    out << "gamma_phase_rad = " << format_17(model.gamma.phase_rad()) << "\n";
    out << "k_rad_per_cm = " << format_17(model.k_rad_per_cm) << "\n";
    out << "forward_amplitude_db = " << format_17(model.forward_amplitude_db)
        << "\n";
    finish_write(out, path);
}

void write_model(const PhaseCorrectionModel& model,
                 const std::filesystem::path& path) {
    require_finite(model.slope_mm2_per_ghz, "slope_mm2_per_ghz");
    require_finite(model.intercept_mm2, "intercept_mm2");
    model.validate();

    std::ofstream out = open_for_write(path);
    out << "format_version = " << kFormatVersion << "\n";
    out << "model = phase_correction\n";
    out << "slope_mm2_per_ghz = " << format_17(model.slope_mm2_per_ghz) << "\n";
    out << "intercept_mm2 = " << format_17(model.intercept_mm2) << "\n";
    finish_write(out, path);
}

AnyModel read_model(const std::filesystem::path& path) {
    KeyValues kv = read_key_values(path);
    check_version(kv, path);
    kv.erase("format_version");

    auto kind_it = kv.find("model");
    if (kind_it == kv.end()) {
        throw FormatError(path.string() + ": missing key 'model'");
    }
    const std::string kind = kind_it->second;
    kv.erase(kind_it);

    if (kind == "magnitude") {
        MagnitudeModel m;
        m.alpha_db = take(kv, "alpha_db", path);
        m.beta = take(kv, "beta", path);
        m.d0_cm = take(kv, "d0_cm", path);
        m.sigma_db = take(kv, "sigma_db", path);
        const double gamma_mag = take(kv, "gamma_mag", path);
        const double gamma_phase = take(kv, "gamma_phase_rad", path);
        m.k_rad_per_cm = take(kv, "k_rad_per_cm", path);
        const double forward = take(kv, "forward_amplitude_db", path);
        expect_drained(kv, path);
        if (forward != MagnitudeModel::forward_amplitude_db) {
            throw DataError(path.string() +
                            ": forward_amplitude_db must be 0 (absorbed into "
                            "alpha_db)");
        }
        m.gamma = ReflectionCoefficient{gamma_mag, gamma_phase};
        m.validate();
        return m;
    }
    if (kind == "phase_correction") {
        PhaseCorrectionModel m;
        m.slope_mm2_per_ghz = take(kv, "slope_mm2_per_ghz", path);
        m.intercept_mm2 = take(kv, "intercept_mm2", path);
        expect_drained(kv, path);
        m.validate();
        return m;
    }
    throw FormatError(path.string() + ": unknown model kind '" + kind + "'");
}

MagnitudeModel read_magnitude_model(const std::filesystem::path& path) {
    AnyModel any = read_model(path);
    if (auto* m = std::get_if<MagnitudeModel>(&any)) return *m;
    throw FormatError(path.string() + ": expected a magnitude model");
}

PhaseCorrectionModel read_phase_model(const std::filesystem::path& path) {
    AnyModel any = read_model(path);
    if (auto* m = std::get_if<PhaseCorrectionModel>(&any)) return *m;
    throw FormatError(path.string() + ": expected a phase_correction model");
}

}  // namespace thzchan
