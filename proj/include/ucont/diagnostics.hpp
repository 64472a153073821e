#pragma once

// Weighted norms along trajectories: H(t), log-convexity, the derivative
// bound, Gaussian decay schedules, persistence thresholds, Hardy rates and
// annulus mass profiles.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "csv.hpp"
#include "evolution.hpp"

namespace ucont {

class BoundaryMassError : public Error {
  public:
    using Error::Error;
};

namespace detail {

inline double radius2(const Grid& g, std::size_t p) {
    double r2 = 0;
    for (int a = 0; a < g.axes; ++a) {
        double x = g.coord(a, g.index(p, a));
        r2 += x * x;
    }
    return r2;
}

inline bool on_boundary(const Grid& g, std::size_t p) {
    for (int a = 0; a < g.axes; ++a) {
        int i = g.index(p, a);
        if (i == 0 || i == g.N[static_cast<std::size_t>(a)] - 1) return true;
    }
    return false;
}

// log of e^{2 beta r^{2 alpha}} |v|^2 summed in log space
struct LogSum {
    double shift = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    void add(double l) {
        logs.push_back(l);
        shift = std::max(shift, l);
    }
    double log_total() const {
        if (!std::isfinite(shift)) return shift;
        double s = 0;
        for (double l : logs) s += std::exp(l - shift);
        return shift + std::log(s);
    }
};

inline double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
    double s = 0;
    for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
    return s;
}

// frame indices covering [lo, hi]; both ends must be sampled
inline std::pair<std::size_t, std::size_t> window(const std::vector<double>& times, double lo, double hi) {
    auto find = [&](double v) -> std::size_t {
        for (std::size_t k = 0; k < times.size(); ++k)
            if (std::abs(times[k] - v) <= 1e-12 * (1 + std::abs(v))) return k;
        throw ValidationError("trajectory has no frame at t = " + format_number(v));
    };
    std::size_t a = find(lo), b = find(hi);
    if (b <= a) throw ValidationError("time window is empty");
    return {a, b};
}

}  // namespace detail

// log of the integral of e^{2 beta |x|^{2 alpha}} |v|^2; -inf for v = 0.
inline double log_weighted_norm(const Field& v, const Grid& g, double beta, double alpha = 1.0) {
    if (!(beta >= 0)) throw ValidationError("weight parameter beta must be >= 0");
    if (!(alpha > 0)) throw ValidationError("weight exponent alpha must be > 0");
    if (v.size() != g.size()) throw ValidationError("field does not match grid");
    detail::LogSum all;
    double boundary = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < v.size(); ++p) {
        double m = std::norm(v[p]);
        if (m == 0) continue;
        double r2 = detail::radius2(g, p);
        double l = 2 * beta * (alpha == 1.0 ? r2 : std::pow(r2, alpha)) + std::log(m);
        all.add(l);
        if (detail::on_boundary(g, p)) boundary = std::max(boundary, l);
    }
    if (!std::isfinite(all.shift)) return all.shift;
    if (boundary - all.shift > std::log(1e-12))
        throw BoundaryMassError("weighted integrand at the box boundary is " + format_number(std::exp(boundary - all.shift)) +
                                " of its peak (limit 1e-12): the weight outgrows the state on this box");
    return all.log_total() + std::log(g.cell_volume());
}

inline double weighted_norm(const Field& v, const Grid& g, double beta, double alpha = 1.0) {
    return std::exp(log_weighted_norm(v, g, beta, alpha));
}
inline double weighted_norm(const WaveState& u, double beta, double alpha = 1.0) {
    return weighted_norm(u.values, u.grid, beta, alpha);
}

// integral of e^{2 beta |x|^2} (|grad v|^2, |x|^2 |v|^2). The gradient comes from
// the weighted field w = e^{beta|x|^2} v as grad w - 2 beta x w, so spectral
// roundoff stays relative to the peak of w instead of being amplified by the
// weight in the tail.
struct WeightedMoments {
    double gradient = 0;
    double position = 0;
};

inline WeightedMoments weighted_moments(const Field& v, const Grid& g, double beta) {
    Field w(v.size());
    for (std::size_t p = 0; p < v.size(); ++p) w[p] = std::exp(beta * detail::radius2(g, p)) * v[p];
    Field hat = w;
    FFT::forward(hat, g);
    std::vector<double> grad2(v.size(), 0.0);
    for (int a = 0; a < g.axes; ++a) {
        Field d = spectral::derivative_from_hat(hat, g, spectral::axis_order(a));
        for (std::size_t p = 0; p < v.size(); ++p) grad2[p] += std::norm(d[p] - 2 * beta * g.coord(a, g.index(p, a)) * w[p]);
    }
    WeightedMoments m;
    double peak = 0, edge = 0;
    for (std::size_t p = 0; p < v.size(); ++p) {
        m.gradient += grad2[p];
        m.position += detail::radius2(g, p) * std::norm(w[p]);
        peak = std::max(peak, grad2[p]);
        if (detail::on_boundary(g, p)) edge = std::max(edge, grad2[p]);
    }
    if (peak > 0 && edge > 1e-12 * peak)
        throw BoundaryMassError("weighted gradient at the box boundary is " + format_number(edge / peak) +
                                " of its peak (limit 1e-12): the weight outgrows the state on this box");
    m.gradient *= g.cell_volume();
    m.position *= g.cell_volume();
    return m;
}

struct ConvexityTrace {
    double beta = 0, M1 = 0, C = 1;
    double M2 = 0;  // +inf when a denominator underflows
    std::vector<double> t, H, logH, d2logH;
    std::vector<double> ratio;       // H / (e^{M1^2} H0^{1-s} H1^s), s the normalized time
    double max_ratio = 0;            // with C = 1
    double min_d2logH = std::numeric_limits<double>::infinity();
    bool vacuous = false;            // zero state at an endpoint
    bool violated = false;           // max_ratio > C

    CsvTable csv() const {
        CsvTable c({"t", "H", "logH", "d2logH"});
        for (std::size_t k = 0; k < t.size(); ++k) c.add({t[k], H[k], logH[k], d2logH[k]});
        return c;
    }
};

// Central second differences of log H on the (possibly non-uniform) samples;
// the endpoints carry NaN.
inline std::vector<double> second_differences(const std::vector<double>& t, const std::vector<double>& y) {
    std::vector<double> d(y.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 1; k + 1 < y.size(); ++k) {
        double h0 = t[k] - t[k - 1], h1 = t[k + 1] - t[k];
        d[k] = 2 * (h0 * y[k + 1] - (h0 + h1) * y[k] + h1 * y[k - 1]) / (h0 * h1 * (h0 + h1));
    }
    return d;
}

inline ConvexityTrace logconvexity_check(const Trajectory& traj, double beta, double M1 = 0.0, double C = 1.0 + 1e-6) {
    if (traj.size() < 2) throw ValidationError("log-convexity needs at least two time samples");
    for (std::size_t k = 1; k < traj.size(); ++k)
        if (!(traj.times[k] > traj.times[k - 1])) throw ValidationError("trajectory times must be strictly increasing");
    ConvexityTrace tr;
    tr.beta = beta;
    tr.M1 = M1;
    tr.C = C;
    tr.t = traj.times;
    for (const auto& f : traj.frames) tr.logH.push_back(log_weighted_norm(f, traj.grid, beta));
    for (double l : tr.logH) tr.H.push_back(std::exp(l));
    tr.d2logH = second_differences(tr.t, tr.logH);
    for (std::size_t k = 1; k + 1 < tr.t.size(); ++k)
        if (std::isfinite(tr.d2logH[k])) tr.min_d2logH = std::min(tr.min_d2logH, tr.d2logH[k]);
    const double l0 = tr.logH.front(), l1 = tr.logH.back();
    if (!std::isfinite(l0) || !std::isfinite(l1)) {
        tr.vacuous = true;
        tr.ratio.assign(tr.t.size(), std::numeric_limits<double>::quiet_NaN());
        return tr;
    }
    const double t0 = tr.t.front(), span = tr.t.back() - t0;
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        double s = (tr.t[k] - t0) / span;
        double r = std::exp(tr.logH[k] - M1 * M1 - (1 - s) * l0 - s * l1);
        tr.ratio.push_back(r);
        tr.max_ratio = std::max(tr.max_ratio, r);
    }
    tr.violated = tr.max_ratio > C;
    return tr;
}

// sup_t ||e^{beta|x|^2} g|| / ||e^{beta|x|^2} u|| over matching frames.
inline double forcing_ratio(const Trajectory& g, const Trajectory& u, double beta) {
    if (g.size() != u.size()) throw ValidationError("forcing and state trajectories differ in length");
    double m = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        double lu = log_weighted_norm(u.frames[k], u.grid, beta);
        double lg = log_weighted_norm(g.frames[k], g.grid, beta);
        if (!std::isfinite(lu)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::exp(0.5 * (lg - lu)));
    }
    return m;
}

struct DerivativeBound {
    double lhs = 0, rhs = 0, ratio = 0;
    bool vacuous = false;
};

// LHS = beta int t(1-t) ||e^{beta|x|^2} grad u||^2 + beta^3 int t(1-t) ||e^{beta|x|^2} x u||^2,
// RHS = e^{M1^2} (H(0) + H(1)), time normalized to [0, 1].
inline DerivativeBound derivative_bound_check(const Trajectory& traj, double beta, double M1 = 0.0) {
    if (traj.size() < 2) throw ValidationError("derivative bound needs at least two time samples");
    const double t0 = traj.times.front(), span = traj.times.back() - t0;
    std::vector<double> s, fg, fx;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        double tau = (traj.times[k] - t0) / span;
        log_weighted_norm(traj.frames[k], traj.grid, beta);  // boundary check
        auto m = weighted_moments(traj.frames[k], traj.grid, beta);
        s.push_back(tau);
        fg.push_back(tau * (1 - tau) * m.gradient);
        fx.push_back(tau * (1 - tau) * m.position);
    }
    DerivativeBound r;
    r.lhs = beta * detail::trapezoid(s, fg) + beta * beta * beta * detail::trapezoid(s, fx);
    r.rhs = std::exp(M1 * M1) * (weighted_norm(traj.frames.front(), traj.grid, beta) + weighted_norm(traj.frames.back(), traj.grid, beta));
    if (r.rhs == 0) {
        r.vacuous = true;
        return r;
    }
    r.ratio = r.lhs / r.rhs;
    return r;
}

struct DecaySchedule {
    double gamma = 0;
    DissipationParams d;
    double lambda = 1, Lambda = 1, normA = 1, C_dim = 1;
    std::vector<double> t, alpha;
    bool degenerate = false;  // a = 0: no decay is maintained for t > 0

    double alpha_at(double s) const {
        const double a = d.a, b = d.b;
        if (s == 0) return gamma;
        const double num = gamma * lambda * a;
        return num / (lambda * a + 4 * gamma * (lambda * a * a * Lambda + 4 * b * b * normA * normA * C_dim) * s);
    }

    CsvTable csv() const {
        CsvTable c({"t", "alpha"});
        for (std::size_t k = 0; k < t.size(); ++k) c.add({t[k], alpha[k]});
        return c;
    }
};

inline DecaySchedule gaussian_decay_schedule(double gamma, DissipationParams d, double lambda, double Lambda, double normA,
                                             double C_dim = 1.0, int samples = 65) {
    d.validate();
    if (!(gamma > 0)) throw ValidationError("initial Gaussian rate gamma must be > 0");
    if (!(lambda > 0) || !(Lambda >= lambda)) throw ValidationError("ellipticity bounds need 0 < lambda <= Lambda");
    if (samples < 2) throw ValidationError("decay schedule needs at least two samples");
    DecaySchedule s{gamma, d, lambda, Lambda, normA, C_dim, {}, {}, d.a == 0};
    for (int k = 0; k < samples; ++k) {
        double t = static_cast<double>(k) / (samples - 1);
        s.t.push_back(t);
        s.alpha.push_back(s.alpha_at(t));
    }
    return s;
}

struct DecayCompanion {
    std::vector<double> t, alpha, weighted, bound;  // ||e^{alpha|x|^2} u(t)|| against the Gronwall bound
    double worst_ratio = 0;
    bool finite = true;
    bool holds() const { return finite && worst_ratio <= 1 + 1e-9; }
};

// Along a propagated dissipative trajectory: ||e^{alpha(t)|x|^2} u(t)|| is finite and
// at most e^{t ||a Re V - b Im V||} ||e^{gamma|x|^2} u(0)||.
inline DecayCompanion decay_companion(const Trajectory& traj, const DecaySchedule& s, double potential_sup) {
    DecayCompanion c;
    const double base = std::sqrt(weighted_norm(traj.frames.front(), traj.grid, s.gamma));
    for (std::size_t k = 0; k < traj.size(); ++k) {
        double t = traj.times[k];
        double a = s.alpha_at(t);
        double w = std::sqrt(weighted_norm(traj.frames[k], traj.grid, a));
        double b = std::exp(t * potential_sup) * base;
        c.t.push_back(t);
        c.alpha.push_back(a);
        c.weighted.push_back(w);
        c.bound.push_back(b);
        if (!std::isfinite(w)) c.finite = false;
        c.worst_ratio = std::max(c.worst_ratio, w / b);
    }
    return c;
}

// kappa0 = (1/alpha) (4 beta0 (2/(q-2))^{1/q})^alpha, q = alpha/(alpha-1).
inline double persistence_threshold(double beta0, double alpha) {
    if (!(alpha > 1 && alpha < 2)) throw ValidationError("persistence threshold formula needs alpha in (1,2); use the square-completion path for alpha = 2^m");
    if (!(beta0 >= 0)) throw ValidationError("beta0 must be >= 0");
    if (beta0 == 0) return 0.0;
    const double q = alpha / (alpha - 1);
    return std::pow(4 * beta0 * std::pow(2 / (q - 2), 1 / q), alpha) / alpha;
}

struct SquareCompletionRow {
    double r = 0, integral = 0, closed_form = 0;
    bool in_band = false;  // kappa/10 < I <= kappa sqrt(pi)
};

struct SquareCompletionCheck {
    double kappa = 0, beta0 = 0;
    std::vector<SquareCompletionRow> rows;
    double max_quadrature_error = 0;
    bool passed() const {
        bool ok = max_quadrature_error < 1e-9;
        for (const auto& r : rows) ok = ok && r.in_band;
        return ok;
    }
};

// I(r) = int_{beta0}^inf exp(-(beta/kappa - kappa r)^2) dbeta with r = |x|^2, by
// quadrature and by kappa (sqrt(pi)/2) erfc(beta0/kappa - kappa r).
inline SquareCompletionCheck square_completion_check(double kappa, double beta0, const std::vector<double>& radii2) {
    if (!(kappa > 0) || !(kappa >= beta0)) throw ValidationError("square completion needs kappa >= beta0 and kappa > 0");
    SquareCompletionCheck c{kappa, beta0, {}, 0};
    for (double r : radii2) {
        if (!(r >= 0)) throw ValidationError("square completion radii must be >= 0");
        auto f = [&](double b) {
            double z = b / kappa - kappa * r;
            return std::exp(-z * z);
        };
        // split at the peak so the finite piece carries the mass
        const double peak = std::max(beta0, kappa * kappa * r);
        double err = 0;
        double I = 0;
        if (peak > beta0) I += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, beta0, peak, 15, 1e-14, &err);
        I += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, peak, std::numeric_limits<double>::infinity(), 15, 1e-14, &err);
        const double closed = kappa * 0.5 * std::sqrt(std::numbers::pi) * std::erfc(beta0 / kappa - kappa * r);
        c.max_quadrature_error = std::max(c.max_quadrature_error, std::abs(I - closed) / closed);
        c.rows.push_back({r, I, closed, I > kappa / 10 && I <= kappa * std::sqrt(std::numbers::pi) * (1 + 1e-12)});
    }
    return c;
}

// Hardy rates of a free Schroedinger Gaussian: |u(0)| ~ e^{-A|x|^2},
// |u(1)| ~ e^{-B|x|^2}. The oracle is Re(1/(4s)) Re(1/(4(s+i))).
inline double hardy_product_closed_form(cplx s) {
    return (1.0 / (4.0 * s)).real() * (1.0 / (4.0 * (s + cplx(0, 1)))).real();
}

// Least-squares fit of log|v| = c - rate |x|^2 where |v| exceeds 1e-6 of its peak.
inline double fitted_gaussian_rate(const Field& v, const Grid& g) {
    double peak = 0;
    for (const auto& z : v) peak = std::max(peak, std::abs(z));
    if (peak == 0) throw ValidationError("cannot fit a decay rate to a zero state");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t p = 0; p < v.size(); ++p) {
        double a = std::abs(v[p]);
        if (a < 1e-6 * peak) continue;
        double x = detail::radius2(g, p), y = std::log(a);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        m += 1;
    }
    if (m < 3) throw ResolutionError("too few resolved points to fit a Gaussian rate");
    return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

struct HardyPoint {
    double s = 0, A = 0, B = 0, product = 0, oracle = 0;
};

inline HardyPoint hardy_point(double s, const Grid& g) {
    GaussianPacket p;
    p.n = g.axes;
    p.s = s;
    Field u0 = p.sample(g);
    PropagateOptions opt;
    opt.steps = 1;
    Trajectory tr = propagate({0.0, g, u0}, CoefficientField::identity(g.axes), DissipationParams::schroedinger(), 1.0, opt);
    HardyPoint h;
    h.s = s;
    h.A = fitted_gaussian_rate(u0, g);
    h.B = fitted_gaussian_rate(tr.frames.back(), g);
    h.product = h.A * h.B;
    h.oracle = hardy_product_closed_form(s);
    return h;
}

struct LowerBoundFit {
    int p = 0;
    double intercept = 0, C0 = 0, relative_residual = 0;
};

struct LowerBoundProfile {
    std::vector<double> radii, delta;
    double core_radius = 0, core_mass = 0, E1 = 0, E2 = 0;
    std::vector<LowerBoundFit> fits;  // p = 2 and p = 3
    int preferred = 0;
    std::string label;  // "ok", "hypothesis not met" or "degenerate"

    const LowerBoundFit& fit(int p) const {
        for (const auto& f : fits)
            if (f.p == p) return f;
        throw Error("no fit for exponent " + std::to_string(p));
    }

    CsvTable csv() const {
        CsvTable c({"R", "delta", "logdelta"});
        for (std::size_t k = 0; k < radii.size(); ++k) c.add({radii[k], delta[k], std::log(delta[k])});
        return c;
    }
};

// log delta ~ c - C0 R^p by least squares; residual RMS over the RMS spread of log delta.
inline LowerBoundFit fit_lower_bound(const std::vector<double>& R, const std::vector<double>& delta, int p) {
    const std::size_t m = R.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> x(m), y(m);
    for (std::size_t k = 0; k < m; ++k) {
        x[k] = std::pow(R[k], p);
        y[k] = std::log(delta[k]);
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    const double md = static_cast<double>(m);
    const double slope = (md * sxy - sx * sy) / (md * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / md;
    const double mean = sy / md;
    double res = 0, spread = 0;
    for (std::size_t k = 0; k < m; ++k) {
        double e = y[k] - icpt - slope * x[k];
        res += e * e;
        spread += (y[k] - mean) * (y[k] - mean);
    }
    return {p, icpt, -slope, spread > 0 ? std::sqrt(res / spread) : 0.0};
}

struct AnnulusOptions {
    double t_lo = 0.125, t_hi = 0.875;
    double core_radius = 1.0;  // R0
    double E1 = 0;             // reported only
    double E2 = 0;             // gate: int_{1/4}^{3/4} int_{B_R0} |u|^2 >= E2^2
    int min_cells = 8;
};

// delta(R) = int_{t_lo}^{t_hi} int_{R-1 <= |x| < R} (|u|^2 + |grad u|^2).
inline LowerBoundProfile annulus_mass_profile(const Trajectory& traj, const std::vector<double>& radii, const AnnulusOptions& opt = {}) {
    const Grid& g = traj.grid;
    if (radii.size() < 3) throw ValidationError("annulus profile needs at least three radii");
    for (int a = 0; a < g.axes; ++a) {
        if (1.0 / g.h(a) < opt.min_cells)
            throw ResolutionError("annulus is under-resolved: " + format_number(1.0 / g.h(a)) + " grid cells across, need " +
                                  std::to_string(opt.min_cells));
        for (double R : radii)
            if (!(R >= 1) || R > g.half_width(a)) throw ValidationError("annulus radius " + format_number(R) + " is outside [1, box half-width]");
    }
    auto [k0, k1] = detail::window(traj.times, opt.t_lo, opt.t_hi);
    std::vector<double> ts(traj.times.begin() + static_cast<std::ptrdiff_t>(k0), traj.times.begin() + static_cast<std::ptrdiff_t>(k1) + 1);
    std::vector<std::vector<double>> per_frame(radii.size());
    std::vector<double> density(g.size()), r(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) r[p] = std::sqrt(detail::radius2(g, p));
    for (std::size_t k = k0; k <= k1; ++k) {
        const Field& u = traj.frames[k];
        Field hat = u;
        FFT::forward(hat, g);
        for (std::size_t p = 0; p < g.size(); ++p) density[p] = std::norm(u[p]);
        for (int a = 0; a < g.axes; ++a) {
            Field d = spectral::derivative_from_hat(hat, g, spectral::axis_order(a));
            for (std::size_t p = 0; p < g.size(); ++p) density[p] += std::norm(d[p]);
        }
        for (std::size_t j = 0; j < radii.size(); ++j) {
            double s = 0;
            for (std::size_t p = 0; p < g.size(); ++p)
                if (r[p] >= radii[j] - 1 && r[p] < radii[j]) s += density[p];
            per_frame[j].push_back(s * g.cell_volume());
        }
    }
    LowerBoundProfile prof;
    prof.radii = radii;
    prof.core_radius = opt.core_radius;
    prof.E1 = opt.E1;
    prof.E2 = opt.E2;
    for (auto& f : per_frame) prof.delta.push_back(detail::trapezoid(ts, f));

    // E2 gate over the inner window
    auto [c0, c1] = detail::window(traj.times, 0.25, 0.75);
    std::vector<double> tc, core;
    for (std::size_t k = c0; k <= c1; ++k) {
        double s = 0;
        for (std::size_t p = 0; p < g.size(); ++p)
            if (r[p] < opt.core_radius) s += std::norm(traj.frames[k][p]);
        tc.push_back(traj.times[k]);
        core.push_back(s * g.cell_volume());
    }
    prof.core_mass = detail::trapezoid(tc, core);

    if (std::any_of(prof.delta.begin(), prof.delta.end(), [](double d) { return !(d > 0); })) {
        prof.label = "degenerate";
        return prof;
    }
    prof.fits = {fit_lower_bound(radii, prof.delta, 2), fit_lower_bound(radii, prof.delta, 3)};
    prof.preferred = prof.fits[0].relative_residual <= prof.fits[1].relative_residual ? 2 : 3;
    prof.label = prof.core_mass < opt.E2 * opt.E2 ? "hypothesis not met" : "ok";
    return prof;
}

// (t, mass, H) along a trajectory
inline CsvTable trajectory_csv(const Trajectory& traj, double beta) {
    CsvTable c({"t", "mass", "H"});
    for (std::size_t k = 0; k < traj.size(); ++k)
        c.add({traj.times[k], mass(traj.frames[k], traj.grid), weighted_norm(traj.frames[k], traj.grid, beta)});
    return c;
}

}  // namespace ucont
