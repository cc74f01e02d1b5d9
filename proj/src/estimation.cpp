#include "thzchan/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "thzchan/units.hpp"

namespace thzchan {

namespace {

constexpr double kLn10 = 2.302585092994045684017991454684364208;
// Linearized ripple: residual_db ~= (20/ln 10) * |G| * cos(angle + 2k(d-d0)).
constexpr double kRippleSlope = 20.0 / kLn10;

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms = 0.0;
};

// Centered OLS; the caller guarantees at least two distinct abscissae.
LineFit ols_line(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;

    double sse = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        sse += r * r;
    }
    fit.rms = std::sqrt(sse / static_cast<double>(n));
    return fit;
}

void require_at_or_beyond_reference(std::span<const PathLossPoint> points,
                                    double d0_cm) {
    for (const PathLossPoint& p : points) {
        if (p.distance_cm < d0_cm) {
            std::ostringstream os;
            os << "distance " << p.distance_cm
               << " cm below reference distance " << d0_cm << " cm";
            throw DomainError(os.str());
        }
    }
}

size_t count_distinct(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values.size();
}

}  // namespace

FloatingInterceptFit fit_floating_intercept(std::span<const PathLossPoint> points,
                                            double d0_cm) {
    if (!(d0_cm > 0.0)) throw DomainError("reference distance d0 must be > 0");
    require_at_or_beyond_reference(points, d0_cm);

    std::vector<double> distances;
    distances.reserve(points.size());
    for (const PathLossPoint& p : points) distances.push_back(p.distance_cm);
    if (count_distinct(distances) < 2) {
        throw InsufficientDataError(
            "floating-intercept fit needs at least 2 distinct distances");
    }

    std::vector<double> x, y;
    x.reserve(points.size());
    y.reserve(points.size());
    for (const PathLossPoint& p : points) {
        x.push_back(10.0 * std::log10(p.distance_cm / d0_cm));
        y.push_back(p.path_loss_db);
    }
    const LineFit line = ols_line(x, y);
    return {line.intercept, line.slope, line.rms};
}

StandingWaveInit initialize_standing_wave(std::span<const ResidualPoint> residuals,
                                          double d0_cm, double k_prior_rad_per_cm,
                                          const StandingWaveSearchOptions& opts) {
    if (residuals.size() < 4) {
        throw InsufficientDataError(
            "standing-wave initialization needs at least 4 residual points");
    }
    if (!(k_prior_rad_per_cm > 0.0)) throw DomainError("k prior must be > 0");
    if (opts.grid_points < 2) throw DomainError("k grid needs at least 2 points");

    double max_abs = 0.0;
    for (const ResidualPoint& r : residuals)
        max_abs = std::max(max_abs, std::abs(r.residual_db));
    if (max_abs < 1e-12) {
        // No ripple detected: nothing to initialize from.
        return {ReflectionCoefficient{}, k_prior_rad_per_cm, false};
    }

    const double k_lo = 0.8 * k_prior_rad_per_cm;
    const double k_step = 0.4 * k_prior_rad_per_cm /
                          static_cast<double>(opts.grid_points - 1);

    double srr = 0.0;
    for (const ResidualPoint& r : residuals) srr += r.residual_db * r.residual_db;

    double best_sse = std::numeric_limits<double>::infinity();
    double best_k = k_prior_rad_per_cm;
    double best_p = 0.0, best_q = 0.0;

    for (int j = 0; j < opts.grid_points; ++j) {
        const double k = k_lo + k_step * static_cast<double>(j);
        double scc = 0.0, sss = 0.0, scs = 0.0, src = 0.0, srs = 0.0;
        for (const ResidualPoint& r : residuals) {
            const double arg = 2.0 * k * (r.distance_cm - d0_cm);
            const double c = std::cos(arg);
            const double s = std::sin(arg);
            scc += c * c;
            sss += s * s;
            scs += c * s;
            src += r.residual_db * c;
            srs += r.residual_db * s;
        }
        const double det = scc * sss - scs * scs;
        if (det <= 1e-12 * std::max(scc * sss, 1e-30)) continue;
        const double p = (sss * src - scs * srs) / det;
        const double q = (scc * srs - scs * src) / det;
        const double sse = std::max(0.0, srr - p * src - q * srs);
        if (sse < best_sse) {  // strict: smallest k wins exact ties
            best_sse = sse;
            best_k = k;
            best_p = p;
            best_q = q;
        }
    }

    const double amplitude = std::hypot(best_p, best_q);
    const double magnitude = std::min(amplitude / kRippleSlope, 0.99);
    const double phase = std::atan2(-best_q, best_p);
    return {ReflectionCoefficient{magnitude, phase}, best_k, true};
}

namespace {

// State of the 5-parameter magnitude objective
//   SSE = sum (PL_i - alpha - beta*x_i + ripple_db(d_i))^2.
struct MagnitudeObjective {
    std::vector<double> x;        // 10*log10(d/d0)
    std::vector<double> delta;    // d - d0
    std::vector<double> pl;

    double sse(const std::array<double, 5>& t) const {
        const double alpha = t[0], beta = t[1], g = t[2], phi = t[3], k = t[4];
        double acc = 0.0;
        for (size_t i = 0; i < pl.size(); ++i) {
            const double u =
                1.0 + g * g + 2.0 * g * std::cos(phi + 2.0 * k * delta[i]);
            const double f = alpha + beta * x[i] - 10.0 * std::log10(u);
            const double r = pl[i] - f;
            acc += r * r;
        }
        return acc;
    }

    // Fills JtJ (5x5, row major) and Jtr for the current parameters.
    void normal_equations(const std::array<double, 5>& t,
                          std::array<double, 25>& jtj,
                          std::array<double, 5>& jtr) const {
        jtj.fill(0.0);
        jtr.fill(0.0);
        const double alpha = t[0], beta = t[1], g = t[2], phi = t[3], k = t[4];
        for (size_t i = 0; i < pl.size(); ++i) {
            const double psi = phi + 2.0 * k * delta[i];
            const double c = std::cos(psi);
            const double s = std::sin(psi);
            const double u = 1.0 + g * g + 2.0 * g * c;
            const double f = alpha + beta * x[i] - 10.0 * std::log10(u);
            const double r = pl[i] - f;
            const double dlog = 10.0 / (kLn10 * u);
            const std::array<double, 5> grad = {
                1.0,
                x[i],
                -dlog * (2.0 * g + 2.0 * c),
                dlog * 2.0 * g * s,
                dlog * 2.0 * g * s * 2.0 * delta[i],
            };
            for (int a = 0; a < 5; ++a) {
                jtr[a] += grad[a] * r;
                for (int b = 0; b < 5; ++b) jtj[a * 5 + b] += grad[a] * grad[b];
            }
        }
    }
};

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve5(std::array<double, 25> a, std::array<double, 5> b,
            std::array<double, 5>& out) {
    for (int col = 0; col < 5; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 5; ++row) {
            if (std::abs(a[row * 5 + col]) > std::abs(a[pivot * 5 + col]))
                pivot = row;
        }
        if (std::abs(a[pivot * 5 + col]) < 1e-300) return false;
        if (pivot != col) {
            for (int j = 0; j < 5; ++j) std::swap(a[col * 5 + j], a[pivot * 5 + j]);
            std::swap(b[col], b[pivot]);
        }
        for (int row = col + 1; row < 5; ++row) {
            const double factor = a[row * 5 + col] / a[col * 5 + col];
            for (int j = col; j < 5; ++j) a[row * 5 + j] -= factor * a[col * 5 + j];
            b[row] -= factor * b[col];
        }
    }
    for (int row = 4; row >= 0; --row) {
        double acc = b[row];
        for (int j = row + 1; j < 5; ++j) acc -= a[row * 5 + j] * out[j];
        out[row] = acc / a[row * 5 + row];
    }
    return true;
}

}  // namespace

MagnitudeFitReport refine_magnitude_fit(std::span<const PathLossPoint> points,
                                        double d0_cm, const MagnitudeInit& init,
                                        const RefineOptions& opts) {
    if (points.size() < 5) {
        throw InsufficientDataError(
            "magnitude refinement needs at least 5 points for 5 parameters");
    }
    if (!(d0_cm > 0.0)) throw DomainError("reference distance d0 must be > 0");
    if (!(init.k_rad_per_cm > 0.0)) throw DomainError("init k must be > 0");
    require_at_or_beyond_reference(points, d0_cm);

    const FloatingInterceptFit base = fit_floating_intercept(points, d0_cm);
    const double n = static_cast<double>(points.size());
    const double sse_base = base.rms_db * base.rms_db * n;

    MagnitudeObjective obj;
    obj.x.reserve(points.size());
    obj.delta.reserve(points.size());
    obj.pl.reserve(points.size());
    for (const PathLossPoint& p : points) {
        obj.x.push_back(10.0 * std::log10(p.distance_cm / d0_cm));
        obj.delta.push_back(p.distance_cm - d0_cm);
        obj.pl.push_back(p.path_loss_db);
    }

    const double k_lo = init.k_rad_per_cm * (1.0 - opts.k_band);
    const double k_hi = init.k_rad_per_cm * (1.0 + opts.k_band);
    auto project = [&](std::array<double, 5>& t) {
        t[2] = std::clamp(t[2], 0.0, opts.gamma_max);
        t[4] = std::clamp(t[4], k_lo, k_hi);
    };

    std::array<double, 5> theta = {init.alpha_db, init.beta,
                                   init.gamma.magnitude(),
                                   init.gamma.phase_rad(), init.k_rad_per_cm};
    project(theta);
    double sse = obj.sse(theta);

    bool converged = false;
    double lambda = 1e-3;
    std::array<double, 25> jtj;
    std::array<double, 5> jtr;
    std::array<double, 5> step;

    for (int iter = 0; iter < opts.max_iterations && !converged; ++iter) {
        obj.normal_equations(theta, jtj, jtr);
        double max_diag = 0.0;
        for (int a = 0; a < 5; ++a) max_diag = std::max(max_diag, jtj[a * 5 + a]);
        const double floor = 1e-12 * (max_diag + 1.0);

        bool accepted = false;
        while (!accepted) {
            std::array<double, 25> damped = jtj;
            for (int a = 0; a < 5; ++a)
                damped[a * 5 + a] += lambda * std::max(jtj[a * 5 + a], floor);

            std::array<double, 5> trial = theta;
            if (solve5(damped, jtr, step)) {
                for (int a = 0; a < 5; ++a) trial[a] = theta[a] + step[a];
                project(trial);
                const double trial_sse = obj.sse(trial);
                if (trial_sse < sse) {
                    const double improvement = sse - trial_sse;
                    theta = trial;
                    sse = trial_sse;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    accepted = true;
                    if (improvement < opts.min_improvement_db2) converged = true;
                    break;
                }
            }
            lambda *= 4.0;
            if (lambda > 1e14) {
                // No step at any damping improves the objective.
                converged = true;
                break;
            }
        }
    }

    // The refinement optimizes the same objective the plain fit minimizes at
    // |Gamma| = 0, so it must never end above it.
    if (sse_base < sse) {
        theta = {base.alpha_db, base.beta, 0.0, 0.0, init.k_rad_per_cm};
        sse = sse_base;
        converged = true;
    }

    MagnitudeFitReport report;
    report.model.alpha_db = theta[0];
    report.model.beta = theta[1];
    report.model.d0_cm = d0_cm;
    report.model.gamma = ReflectionCoefficient{theta[2], theta[3]};
    report.model.k_rad_per_cm = theta[4];
    report.rms_before_db = base.rms_db;
    report.rms_after_db = std::sqrt(sse / n);
    report.model.sigma_db = report.rms_after_db;
    report.converged = converged;
    report.per_distance_residuals.reserve(points.size());
    for (const PathLossPoint& p : points) {
        report.per_distance_residuals.emplace_back(
            p.distance_cm,
            p.path_loss_db - combined_magnitude_db(p.distance_cm, report.model));
    }
    return report;
}

PhaseSlopeFit fit_phase_slope(std::span<const PhaseSample> sweep,
                              double center_ghz, double halfwidth_ghz) {
    std::vector<double> f, phi;
    for (const PhaseSample& s : sweep) {
        if (std::abs(s.frequency_ghz - center_ghz) <= halfwidth_ghz + 1e-9) {
            f.push_back(s.frequency_ghz);
            phi.push_back(s.phase_rad);
        }
    }
    if (f.size() < 5) {
        std::ostringstream os;
        os << "phase window around " << center_ghz << " GHz holds " << f.size()
           << " samples; need at least 5";
        throw InsufficientDataError(os.str());
    }

    const LineFit line = ols_line(f, phi);
    // slope is rad/GHz; |slope| * c / (2*pi) gives the distance.
    const double cm_per_rad_per_ghz =
        units::m_to_cm(units::kSpeedOfLightMPerS) / (units::kTwoPi * 1e9);
    const double distance_cm = std::abs(line.slope) * cm_per_rad_per_ghz;
    if (!(distance_cm > 0.0)) {
        throw DomainError("phase slope is zero; no distance is recoverable");
    }
    return {center_ghz, halfwidth_ghz, distance_cm, line.rms};
}

PhaseCorrectionModel fit_delta_d_line(std::span<const DeltaDSample> samples) {
    std::vector<double> freqs;
    freqs.reserve(samples.size());
    for (const DeltaDSample& s : samples) freqs.push_back(s.frequency_ghz);
    if (count_distinct(freqs) < 2) {
        throw InsufficientDataError(
            "delta_d line fit needs samples at 2 or more distinct frequencies");
    }

    std::vector<double> x, y;
    x.reserve(samples.size());
    y.reserve(samples.size());
    for (const DeltaDSample& s : samples) {
        x.push_back(s.frequency_ghz);
        y.push_back(units::cm_to_mm(s.delta_d_cm) *
                    units::wavelength_mm(s.frequency_ghz));
    }
    const LineFit line = ols_line(x, y);

    PhaseCorrectionModel model{line.slope, line.intercept};
    model.validate();
    return model;
}

double predict_phase_rad(double distance_cm, double f_ghz,
                         const PhaseCorrectionModel& pcm) {
    if (!(distance_cm > 0.0)) throw DomainError("distance must be > 0");
    if (f_ghz < PhaseCorrectionModel::validity_min_ghz ||
        f_ghz > PhaseCorrectionModel::validity_max_ghz) {
        std::ostringstream os;
        os << "frequency " << f_ghz << " GHz outside the correction model's"
           << " validity range [" << PhaseCorrectionModel::validity_min_ghz
           << ", " << PhaseCorrectionModel::validity_max_ghz << "] GHz";
        throw DomainError(os.str());
    }
    const double corrected_cm = distance_cm + pcm.delta_d_cm(f_ghz);
    return units::wrap_phase(-phase_shift_rad(corrected_cm, f_ghz));
}

std::vector<double> unwrap_phase(std::span<const double> wrapped) {
    std::vector<double> out;
    out.reserve(wrapped.size());
    if (wrapped.empty()) return out;
    out.push_back(wrapped[0]);
    // Accumulate whole 2*pi offsets so in-range steps pass through exactly.
    double offset = 0.0;
    for (size_t i = 1; i < wrapped.size(); ++i) {
        const double delta = wrapped[i] - wrapped[i - 1];
        offset -=
            units::kTwoPi * std::ceil((delta - units::kPi) / units::kTwoPi);
        out.push_back(wrapped[i] + offset);
    }
    return out;
}

double rms_residual(std::span<const double> measured,
                    std::span<const double> predicted) {
    if (measured.size() != predicted.size()) {
        throw std::invalid_argument("rms_residual: length mismatch");
    }
    if (measured.empty()) {
        throw std::invalid_argument("rms_residual: empty input");
    }
    double sse = 0.0;
    for (size_t i = 0; i < measured.size(); ++i) {
        const double r = measured[i] - predicted[i];
        sse += r * r;
    }
    return std::sqrt(sse / static_cast<double>(measured.size()));
}

}  // namespace thzchan
