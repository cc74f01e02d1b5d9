#include "thzchan/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace thzchan {

namespace {

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int digits) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

}  // namespace

std::vector<ReportRow> build_report(const Dataset& dataset,
                                    const MagnitudeModel& model, double f_ghz) {
    std::vector<ReportRow> rows;
    for (const auto& [distance, measured] : dataset.path_loss_slice(f_ghz)) {
        ReportRow row;
        row.distance_cm = distance;
        row.measured_db = measured;
        row.floating_db = path_loss_db(distance, model);
        row.combined_db = combined_magnitude_db(distance, model);
        rows.push_back(row);
    }
    return rows;
}

void write_report_csv(const std::vector<ReportRow>& rows,
                      const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "distance_cm,measured_db,floating_db,combined_db\n";
    for (const ReportRow& r : rows) {
        out << fmt(r.distance_cm) << "," << fmt(r.measured_db) << ","
            << fmt(r.floating_db) << "," << fmt(r.combined_db) << "\n";
    }
    out.flush();
    if (!out) throw IoError("write to " + path.string() + " failed");
}

void write_report_svg(const std::vector<ReportRow>& rows,
                      const std::filesystem::path& path,
                      const std::string& title) {
    if (rows.empty()) throw DomainError("report has no rows to plot");

    constexpr double width = 720.0, height = 480.0;
    constexpr double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
    const double plot_w = width - ml - mr;
    const double plot_h = height - mt - mb;

    double x_min = rows.front().distance_cm, x_max = x_min;
    double y_min = rows.front().measured_db, y_max = y_min;
    for (const ReportRow& r : rows) {
        x_min = std::min(x_min, r.distance_cm);
        x_max = std::max(x_max, r.distance_cm);
        for (double y : {r.measured_db, r.floating_db, r.combined_db}) {
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    const double y_pad = std::max(0.5, (y_max - y_min) * 0.08);
    y_min -= y_pad;
    y_max += y_pad;

    auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * plot_w; };
    // dB axis grows downward: larger loss plotted lower.
    auto sy = [&](double y) { return mt + (y - y_min) / (y_max - y_min) * plot_h; };

    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title
        << "</text>\n";

    // Axes and ticks.
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    constexpr int ticks = 6;
    for (int i = 0; i <= ticks; ++i) {
        const double fx = x_min + (x_max - x_min) * i / ticks;
        const double fy = y_min + (y_max - y_min) * i / ticks;
        out << "<line x1=\"" << sx(fx) << "\" y1=\"" << mt + plot_h
            << "\" x2=\"" << sx(fx) << "\" y2=\"" << mt + plot_h + 5
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << sx(fx) << "\" y=\"" << mt + plot_h + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << fmt_fixed(fx, 1) << "</text>\n";
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(fy) << "\" x2=\""
            << ml << "\" y2=\"" << sy(fy) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << fmt_fixed(fy, 1) << "</text>\n";
    }
    out << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\">distance (cm)</text>\n";
    out << "<text x=\"18\" y=\"" << mt + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"13\" transform=\"rotate(-90 18 " << mt + plot_h / 2
        << ")\">path loss (dB)</text>\n";

    auto polyline = [&](auto getter, const char* color) {
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (const ReportRow& r : rows)
            out << sx(r.distance_cm) << "," << sy(getter(r)) << " ";
        out << "\"/>\n";
    };
    polyline([](const ReportRow& r) { return r.floating_db; }, "#888888");
    polyline([](const ReportRow& r) { return r.combined_db; }, "#d62728");
    for (const ReportRow& r : rows) {
        out << "<circle cx=\"" << sx(r.distance_cm) << "\" cy=\""
            << sy(r.measured_db) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }

    // Legend.
    const double lx = ml + 10, ly = mt + 14;
    out << "<circle cx=\"" << lx << "\" cy=\"" << ly
        << "\" r=\"3\" fill=\"#1f77b4\"/><text x=\"" << lx + 10 << "\" y=\""
        << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << "measured</text>\n";
    out << "<line x1=\"" << lx - 5 << "\" y1=\"" << ly + 18 << "\" x2=\""
        << lx + 5 << "\" y2=\"" << ly + 18
        << "\" stroke=\"#888888\" stroke-width=\"1.5\"/><text x=\"" << lx + 10
        << "\" y=\"" << ly + 22
        << "\" font-family=\"sans-serif\" font-size=\"12\">floating "
        << "intercept</text>\n";
    out << "<line x1=\"" << lx - 5 << "\" y1=\"" << ly + 36 << "\" x2=\""
        << lx + 5 << "\" y2=\"" << ly + 36
        << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/><text x=\"" << lx + 10
        << "\" y=\"" << ly + 40
        << "\" font-family=\"sans-serif\" font-size=\"12\">with standing "
        << "wave</text>\n";
    out << "</svg>\n";
    out.flush();
    if (!out) throw IoError("write to " + path.string() + " failed");
}

}  // namespace thzchan
