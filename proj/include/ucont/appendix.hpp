#pragma once

// Subordination integral against its super-Gaussian target, and the
// weighted Poincare inequality on balls.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "csv.hpp"
#include "gauge.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace ucont {

// ---------------------------------------------------------------- subordination

struct SubordinationCase {
    double p = 1.5;
    double kappa = 10;
    double lambda0 = 1;
    std::vector<double> radii;

    double q() const { return p / (p - 1); }
    // kappa > 2 lambda0 (2/(q-2))^{1/q}
    double kappa_min() const { return 2 * lambda0 * std::pow(2 / (q() - 2), 1 / q()); }
    bool admissible() const { return kappa > kappa_min(); }

    void validate() const {
        if (!(p > 1 && p < 2)) throw ValidationError("subordination.p must lie in (1,2)");
        if (!(kappa > 0) || !(lambda0 > 0)) throw ValidationError("subordination.kappa and lambda0 must be positive");
        if (!admissible())
            throw ValidationError("subordination.kappa = " + format_number(kappa) + " is not admissible: needs kappa > " +
                                  format_number(kappa_min()));
        for (double r : radii)
            if (!(r > 0)) throw ValidationError("subordination radii must be positive");
    }

    static std::vector<double> log_spaced(double lo, double hi, int count) {
        std::vector<double> r;
        for (int k = 0; k < count; ++k)
            r.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
        return r;
    }
};

struct SubordinationRow {
    double r = 0;
    double log_integral = 0;
    double log_target = 0;  // kappa^p r^p / p
    double ratio = 0;       // raw, or divided by kappa^{q/2} when normalized
};

struct SubordinationReport {
    SubordinationCase c;
    bool normalized = false;
    std::vector<SubordinationRow> rows;
    double tolerance = 1e-12;  // relative quadrature tolerance

    double band() const {
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        for (const auto& r : rows) lo = std::min(lo, r.ratio), hi = std::max(hi, r.ratio);
        return hi / lo;
    }
    bool monotone_integral() const {
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (rows[i].r > rows[i - 1].r && !(rows[i].log_integral > rows[i - 1].log_integral)) return false;
        return true;
    }
    CsvTable csv() const {
        CsvTable t({"p", "q", "kappa", "lambda0", "r", "integral", "target", "ratio"});
        for (const auto& r : rows)
            t.add({c.p, c.q(), c.kappa, c.lambda0, r.r, std::exp(r.log_integral), std::exp(r.log_target), r.ratio});
        return t;
    }
};

// log of int_{lambda0}^inf exp(l r - l^q/(q kappa^q)) l^{(q-2)/2} dl.
// The integrand is log-concave; it is normalized by its peak, cut where it
// drops below 1e-14 of the peak, and integrated on each side of the peak.
inline double log_subordination_integral(double r, const SubordinationCase& c, double tol = 1e-12) {
    const double q = c.q(), kq = std::pow(c.kappa, q);
    auto g = [&](double l) { return l * r - std::pow(l, q) / (q * kq) + 0.5 * (q - 2) * std::log(l); };
    auto dg = [&](double l) { return r - std::pow(l, q - 1) / kq + 0.5 * (q - 2) / l; };
    double peak = c.lambda0;
    if (dg(c.lambda0) > 0) {
        double lo = c.lambda0, hi = 2 * c.lambda0;
        while (dg(hi) > 0) hi *= 2;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (dg(mid) > 0 ? lo : hi) = mid;
        }
        peak = 0.5 * (lo + hi);
    }
    const double gmax = g(peak), cut = std::log(1e-14);
    auto drop = [&](double from, double dir) {
        double step = std::max(1.0, peak), x = from;
        while (g(x + dir * step) - gmax > cut) {
            x += dir * step;
            step *= 2;
            if (dir < 0 && x - step <= c.lambda0) return c.lambda0;
        }
        double lo = x, hi = x + dir * step;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (g(mid) - gmax > cut ? lo : hi) = mid;
        }
        return hi;
    };
    const double right = drop(peak, 1.0);
    const double left = peak > c.lambda0 ? std::max(c.lambda0, drop(peak, -1.0)) : c.lambda0;
    auto f = [&](double l) { return std::exp(g(l) - gmax); };
    using boost::math::quadrature::gauss_kronrod;
    double total = 0, err_total = 0;
    for (auto [a, b] : {std::pair{left, peak}, std::pair{peak, right}}) {
        if (!(b > a)) continue;
        double err = 0;
        total += gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol, &err);
        err_total += err;
    }
    if (!std::isfinite(total) || !(total > 0) || err_total > 1e3 * tol * total)
        throw QuadratureError("subordination quadrature did not converge at r = " + format_number(r));
    return gmax + std::log(total);
}

inline SubordinationReport subordination_ratio(const SubordinationCase& c, bool normalize = false) {
    c.validate();
    SubordinationReport rep;
    rep.c = c;
    rep.normalized = normalize;
    rep.rows.resize(c.radii.size());
    const double norm = normalize ? std::pow(c.kappa, c.q() / 2) : 1.0;
    parallel_for(c.radii.size(), [&](std::size_t i) {
        SubordinationRow row;
        row.r = c.radii[i];
        row.log_integral = log_subordination_integral(row.r, c, rep.tolerance);
        row.log_target = std::pow(c.kappa * row.r, c.p) / c.p;
        row.ratio = std::exp(row.log_integral - row.log_target) / norm;
        rep.rows[i] = row;
    });
    return rep;
}

// ---------------------------------------------------------------- Poincare

// Default constant C(n) = sqrt(128/9) / j_n, from the proof with the
// Dirichlet constant (2r/j_n)^2 of the ball B_{2r}.
inline double poincare_constant(int n) {
    static const double j[] = {std::numbers::pi / 2, 2.404825557695773, std::numbers::pi};
    if (n < 1 || n > 3) throw ValidationError("dimension must be 1, 2 or 3");
    return std::sqrt(128.0 / 9.0) / j[n - 1];
}

struct PoincareResult {
    double lhs = 0;   // |f|_{L2(B_r)}
    double rhs1 = 0;  // r |grad f|_{L2(B_2r)}
    double rhs2 = 0;  // r^{-1} |x f|_{L2(B_2r)}
    double ratio = 0;
};

// Ball masks use grid points as cell centers; the gradient is spectral.
inline PoincareResult poincare_weighted_check(const Field& f, const Grid& g, double r) {
    if (!(r > 0)) throw ValidationError("poincare radius must be positive");
    if (f.size() != g.size()) throw ValidationError("field size does not match grid");
    for (int a = 0; a < g.axes; ++a)
        if (g.lo[static_cast<std::size_t>(a)] + g.len[static_cast<std::size_t>(a)] - g.h(a) < 2 * r || g.lo[static_cast<std::size_t>(a)] > -2 * r)
            throw ValidationError("ball B_2r is not contained in the grid");
    std::array<Field, 3> grad;
    Field hat = f;
    FFT::forward(hat, g);
    for (int a = 0; a < g.axes; ++a) grad[static_cast<std::size_t>(a)] = spectral::derivative_from_hat(hat, g, spectral::axis_order(a));
    double m1 = 0, m2 = 0, m3 = 0;
    for (std::size_t p = 0; p < f.size(); ++p) {
        double x2 = 0;
        for (int a = 0; a < g.axes; ++a) {
            double x = g.coord(a, g.index(p, a));
            x2 += x * x;
        }
        if (x2 <= r * r) m1 += std::norm(f[p]);
        if (x2 <= 4 * r * r) {
            for (int a = 0; a < g.axes; ++a) m2 += std::norm(grad[static_cast<std::size_t>(a)][p]);
            m3 += x2 * std::norm(f[p]);
        }
    }
    const double dv = g.cell_volume();
    PoincareResult res;
    res.lhs = std::sqrt(m1 * dv);
    res.rhs1 = r * std::sqrt(m2 * dv);
    res.rhs2 = std::sqrt(m3 * dv) / r;
    const double den = res.rhs1 + res.rhs2;
    res.ratio = den > 0 ? res.lhs / den : 0.0;
    return res;
}

// Random trigonometric polynomial periodic on the grid box, at most
// `kmax` wavelengths per axis across the box.
inline Field random_band_limited(const Grid& g, std::uint64_t seed, int modes = 8, int kmax = 4) {
    std::mt19937_64 rng(seed);
    auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
    Field f(g.size(), 0);
    for (int m = 0; m < modes; ++m) {
        std::array<int, 4> k{};
        for (int a = 0; a < g.axes; ++a) k[static_cast<std::size_t>(a)] = static_cast<int>(rng() % static_cast<std::uint64_t>(2 * kmax + 1)) - kmax;
        const double rad = std::sqrt(-2 * std::log(uniform())), th = 2 * std::numbers::pi * uniform();
        const cplx c = std::polar(rad, th);
        for (std::size_t p = 0; p < f.size(); ++p) {
            double ph = 0;
            for (int a = 0; a < g.axes; ++a)
                ph += 2 * std::numbers::pi * k[static_cast<std::size_t>(a)] * (g.coord(a, g.index(p, a)) - g.lo[static_cast<std::size_t>(a)]) /
                      g.len[static_cast<std::size_t>(a)];
            f[p] += c * std::polar(1.0, ph);
        }
    }
    return f;
}

struct PoincareSearch {
    int n = 2;
    double r = 1;
    int points = 64;        // per axis on the box [-2.5r, 2.5r)
    int samples = 200;
    std::uint64_t seed = 1;
    double worst = 0;
    std::uint64_t worst_seed = 0;
    std::vector<PoincareResult> results;
};

inline PoincareSearch poincare_worst_ratio(int n, double r, int points, int samples, std::uint64_t seed) {
    PoincareSearch s;
    s.n = n;
    s.r = r;
    s.points = points;
    s.samples = samples;
    s.seed = seed;
    Grid g = Grid::cube(n, points, 2.5 * r);
    s.results.resize(static_cast<std::size_t>(samples));
    parallel_for(s.results.size(), [&](std::size_t k) {
        s.results[k] = poincare_weighted_check(random_band_limited(g, seed + k), g, r);
    });
    for (std::size_t k = 0; k < s.results.size(); ++k)
        if (s.results[k].ratio > s.worst) s.worst = s.results[k].ratio, s.worst_seed = seed + k;
    return s;
}

inline CsvTable poincare_csv(const std::vector<PoincareSearch>& runs) {
    CsvTable t({"r", "lhs", "rhs1", "rhs2", "ratio"});
    for (const auto& s : runs)
        for (const auto& res : s.results) t.add({s.r, res.lhs, res.rhs1, res.rhs2, res.ratio});
    return t;
}

}  // namespace ucont
