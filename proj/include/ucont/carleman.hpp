#pragma once

// Numerical instantiation of the cubic-regime and translated-weight Carleman
// inequalities on random admissible space-time test functions.
//
// Everything that depends on beta is a polynomial in beta once three fields
// are known at beta = 1:
//   S = S0 + beta^2 S2,  A = beta A1,
//   |(S + A) f|^2 = |S0 f|^2 + 2b Re<S0f,A1f> + b^2 (|A1f|^2 + 2Re<S0f,S2f>)
//                   + 2b^3 Re<S2f,A1f> + b^4 |S2f|^2.
// Each sample is therefore reduced to a handful of inner products, and every
// beta on a sweep grid costs O(1).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "csv.hpp"
#include "grid.hpp"
#include "operators.hpp"
#include "parallel.hpp"

namespace ucont {

class SupportError : public Error {
  public:
    using Error::Error;
};

// ---------------------------------------------------------------- profiles

// Order-N polynomial smoothstep on [0,1]: C^N at both ends.
inline double smoothstep(double s, int order, int N = 5) {
    if (s <= 0) return 0;
    if (s >= 1) return order == 0 ? 1 : 0;
    // S(s) = s^{N+1} sum_k C(N+k,k) C(2N+1,N-k) (-s)^k as a dense polynomial
    std::vector<double> c(static_cast<std::size_t>(2 * N + 2), 0.0);
    auto binom = [](int n, int k) {
        double r = 1;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    };
    for (int k = 0; k <= N; ++k) c[static_cast<std::size_t>(N + 1 + k)] = binom(N + k, k) * binom(2 * N + 1, N - k) * ((k % 2) ? -1 : 1);
    for (int o = 0; o < order; ++o) {
        for (std::size_t d = 1; d < c.size(); ++d) c[d - 1] = c[d] * static_cast<double>(d);
        c.back() = 0;
    }
    double v = 0;
    for (std::size_t d = c.size(); d-- > 0;) v = v * s + c[d];
    return v;
}

// Time profile: 0 outside (a0, b1), height on [a1, b0], smoothstep ramps.
class PlateauProfile : public sym::Profile {
  public:
    PlateauProfile(double height = 3, double a0 = 0.13, double a1 = 0.25, double b0 = 0.75, double b1 = 0.87, int order = 5)
        : h_(height), a0_(a0), a1_(a1), b0_(b0), b1_(b1), N_(order) {
        if (!(0 < a0 && a0 < a1 && a1 <= b0 && b0 < b1 && b1 < 1)) throw ValidationError("plateau profile breakpoints out of order");
    }

    double value(double t, int order) const override {
        if (t <= a0_ || t >= b1_) return 0;
        if (t < a1_) {
            const double w = a1_ - a0_;
            return h_ * smoothstep((t - a0_) / w, order, N_) / std::pow(w, order);
        }
        if (t > b0_) {
            const double w = b1_ - b0_;
            return h_ * smoothstep((b1_ - t) / w, order, N_) * ((order % 2) ? -1 : 1) / std::pow(w, order);
        }
        return order == 0 ? h_ : 0;
    }
    std::string name() const override {
        return "plateau(" + format_number(h_) + ";" + format_number(a0_) + "," + format_number(a1_) + "," + format_number(b0_) + "," +
               format_number(b1_) + ")";
    }

    double height() const { return h_; }
    double support_lo() const { return a0_; }
    double support_hi() const { return b1_; }

    // sup |phi^{(order)}|: dense sampling of the ramps (the plateau is flat),
    // then golden-section refinement around the best sample
    double sup_norm(int order) const {
        double best = 0, at = a0_, step = 0;
        for (auto [lo, hi] : {std::pair{a0_, a1_}, std::pair{b0_, b1_}}) {
            const double h = (hi - lo) / 4000;
            for (int k = 0; k <= 4000; ++k) {
                double t = lo + k * h, v = std::abs(value(t, order));
                if (v > best) best = v, at = t, step = h;
            }
        }
        if (step == 0) return best;
        auto f = [&](double t) { return std::abs(value(t, order)); };
        double lo = at - step, hi = at + step;
        const double r = (std::sqrt(5.0) - 1) / 2;
        for (int it = 0; it < 80; ++it) {
            double m1 = hi - r * (hi - lo), m2 = lo + r * (hi - lo);
            (f(m1) < f(m2) ? lo : hi) = f(m1) < f(m2) ? m1 : m2;
        }
        return std::max(best, f(0.5 * (lo + hi)));
    }

    // first time at which the profile reaches level c (0 < c <= height)
    double level_time(double c) const {
        double lo = a0_, hi = a1_;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (value(mid, 0) >= c ? hi : lo) = mid;
        }
        return hi;
    }

  private:
    double h_, a0_, a1_, b0_, b1_;
    int N_;
};

// C-infinity edge psi(s): 0 for s <= 0, 1 for s >= 1, built from e^{-1/s}.
inline double smooth_edge(double s, int order) {
    if (s <= 0) return 0;
    if (s >= 1) return order == 0 ? 1 : 0;
    // psi = sigma(-g), g = 1/s - 1/(1-s)
    const double g = 1 / s - 1 / (1 - s);
    const double sig = g > 0 ? std::exp(-g) / (1 + std::exp(-g)) : 1 / (1 + std::exp(g));
    if (order == 0) return sig;
    const double ds = sig * (1 - sig);
    const double g1 = -1 / (s * s) - 1 / ((1 - s) * (1 - s));
    if (order == 1) return -ds * g1;
    if (order == 2) {
        const double g2 = 2 / (s * s * s) - 2 / ((1 - s) * (1 - s) * (1 - s));
        return ds * (1 - 2 * sig) * g1 * g1 - ds * g2;
    }
    throw Error("smooth edge derivative order above 2 is not available");
}

class EdgeProfile : public sym::Profile {
  public:
    double value(double s, int order) const override { return smooth_edge(s, order); }
    std::string name() const override { return "edge"; }
};

// w(s) = psi((s-a)/l) psi((b-s)/l) and its first two derivatives
struct Window {
    double a, b, l;

    std::array<double, 3> jet(double s) const {
        const double u = (s - a) / l, v = (b - s) / l;
        const double p0 = smooth_edge(u, 0), p1 = smooth_edge(u, 1), p2 = smooth_edge(u, 2);
        const double q0 = smooth_edge(v, 0), q1 = smooth_edge(v, 1), q2 = smooth_edge(v, 2);
        return {p0 * q0, (p1 * q0 - p0 * q1) / l, (p2 * q0 - 2 * p1 * q1 + p0 * q2) / (l * l)};
    }

    sym::Expression expr(const sym::Expression& s) const {
        static const auto edge = std::make_shared<const EdgeProfile>();
        using sym::Expression;
        return sym::apply_profile(edge, (s - Expression(a)) * Expression(1 / l)) *
               sym::apply_profile(edge, (Expression(b) - s) * Expression(1 / l));
    }
};

// ---------------------------------------------------------------- cutoffs

struct CutoffSpec {
    std::shared_ptr<const PlateauProfile> profile = std::make_shared<const PlateauProfile>();
    double r0 = 1;           // inner radius of the annulus support
    double r1 = 0;           // outer support radius; 0 picks the largest that fits the box
    double R = 1;            // weight scale
    double layer = 1;        // spatial transition width
    double time_layer = 0.125;
    int noise_modes = 12;    // 0 gives the bare bump (constant noise)
    int max_freq_t = 3;
    int max_freq_x = 3;
    double amplitude = 1;    // overall factor, for homogeneity checks

    double phi_sup(int order) const { return profile->sup_norm(order); }

    void validate() const {
        if (!(R >= 1)) throw ValidationError("cutoff.R: weight scale must satisfy R >= 1");
        if (!(r0 > 0)) throw ValidationError("cutoff.r0 must be positive");
        if (!(layer > 0) || !(time_layer > 0)) throw ValidationError("cutoff transition widths must be positive");
        if (noise_modes < 0 || max_freq_t < 0 || max_freq_x < 0) throw ValidationError("cutoff noise parameters out of range");
    }
};

enum class SupportMode { Annulus, Translated };

inline const char* mode_name(SupportMode m) { return m == SupportMode::Annulus ? "annulus" : "translated"; }

// Space-time grid: axis 0 is t in [0,1), axes 1..n are x in [-L, L).
inline Grid space_time_grid(int n, int nt, int nx, double half_width) {
    Grid g;
    g.axes = n + 1;
    g.N[0] = nt;
    g.lo[0] = 0;
    g.len[0] = 1;
    for (int i = 1; i <= n; ++i) {
        g.N[static_cast<std::size_t>(i)] = nx;
        g.lo[static_cast<std::size_t>(i)] = -half_width;
        g.len[static_cast<std::size_t>(i)] = 2 * half_width;
    }
    g.validate();
    return g;
}

// f and the derivatives the second-order operators act on
struct Jet {
    Field f, ft;
    std::array<Field, 3> fx;
    std::array<std::array<Field, 3>, 3> fxx;

    const Field& get(const MultiIndex& m) const {
        if (m.t() == 0 && m.spatial() == 0) return f;
        if (m.t() == 1 && m.spatial() == 0) return ft;
        if (m.t() == 0 && m.spatial() == 1)
            for (int i = 1; i <= 3; ++i)
                if (m[static_cast<std::size_t>(i)]) return fx[static_cast<std::size_t>(i - 1)];
        if (m.t() == 0 && m.spatial() == 2) {
            int a = -1, b = -1;
            for (int i = 1; i <= 3; ++i)
                for (int k = 0; k < m[static_cast<std::size_t>(i)]; ++k) (a < 0 ? a : b) = i - 1;
            return fxx[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
        throw Error("test-function jet does not carry this derivative");
    }
};

struct NoiseMode {
    int j = 0;
    std::array<int, 3> k{};
    cplx c;
};

// f(t,x) = amplitude * T(t) X(x) N(t,x) with N a random trigonometric
// polynomial that is periodic on the grid, T and X smooth windows.
class TestFunction {
  public:
    SupportMode mode = SupportMode::Annulus;
    int n = 1;
    std::uint64_t seed = 0;
    double half_width = 1;
    CutoffSpec cut;
    Window time_window{};
    double r1 = 0;                       // annulus outer radius
    std::array<Window, 3> box_window{};  // translated mode, per axis
    std::vector<NoiseMode> modes;

    double kappa() const { return std::numbers::pi / half_width; }

    double spatial_value(const std::array<double, 3>& x) const {
        if (mode == SupportMode::Annulus) {
            double r = 0;
            for (int i = 0; i < n; ++i) r += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            return Window{cut.r0, r1, cut.layer}.jet(std::sqrt(r))[0];
        }
        double v = 1;
        for (int i = 0; i < n; ++i) v *= box_window[static_cast<std::size_t>(i)].jet(x[static_cast<std::size_t>(i)])[0];
        return v;
    }

    Jet sample(const Grid& g) const {
        check_grid(g);
        const std::size_t total = g.size();
        const std::size_t nspace = total / static_cast<std::size_t>(g.N[0]);
        // spatial window jets
        std::vector<double> X(nspace);
        std::vector<std::array<double, 3>> Xi(nspace);
        std::vector<std::array<std::array<double, 3>, 3>> Xij(nspace);
        for (std::size_t s = 0; s < nspace; ++s) {
            std::array<double, 3> x{};
            for (int i = 1; i <= n; ++i) x[static_cast<std::size_t>(i - 1)] = g.coord(i, g.index(s, i));
            window_jet(x, X[s], Xi[s], Xij[s]);
        }
        Jet J;
        J.f.assign(total, 0);
        J.ft.assign(total, 0);
        for (int i = 0; i < n; ++i) {
            J.fx[static_cast<std::size_t>(i)].assign(total, 0);
            for (int j = 0; j < n; ++j) J.fxx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].assign(total, 0);
        }
        const double kap = kappa();
        for (int it = 0; it < g.N[0]; ++it) {
            const double t = g.coord(0, it);
            const auto T = time_window.jet(t);
            if (T[0] == 0 && T[1] == 0) continue;
            for (std::size_t s = 0; s < nspace; ++s) {
                if (X[s] == 0 && Xi[s][0] == 0 && Xi[s][1] == 0 && Xi[s][2] == 0) continue;
                const std::size_t p = static_cast<std::size_t>(it) * nspace + s;
                cplx N = 0, Nt = 0;
                std::array<cplx, 3> Ni{};
                std::array<std::array<cplx, 3>, 3> Nij{};
                for (const auto& m : modes) {
                    double ph = 2 * std::numbers::pi * m.j * t;
                    std::array<double, 3> kx{};
                    for (int i = 0; i < n; ++i) {
                        kx[static_cast<std::size_t>(i)] = kap * m.k[static_cast<std::size_t>(i)];
                        ph += kx[static_cast<std::size_t>(i)] * g.coord(i + 1, g.index(p, i + 1));
                    }
                    const cplx e = m.c * std::polar(1.0, ph);
                    N += e;
                    Nt += cplx(0, 2 * std::numbers::pi * m.j) * e;
                    for (int i = 0; i < n; ++i) {
                        Ni[static_cast<std::size_t>(i)] += cplx(0, kx[static_cast<std::size_t>(i)]) * e;
                        for (int j = 0; j < n; ++j)
                            Nij[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -= kx[static_cast<std::size_t>(i)] * kx[static_cast<std::size_t>(j)] * e;
                    }
                }
                const double A = cut.amplitude;
                J.f[p] = A * T[0] * X[s] * N;
                J.ft[p] = A * (T[1] * X[s] * N + T[0] * X[s] * Nt);
                for (int i = 0; i < n; ++i) {
                    const auto ui = static_cast<std::size_t>(i);
                    J.fx[ui][p] = A * T[0] * (Xi[s][ui] * N + X[s] * Ni[ui]);
                    for (int j = 0; j < n; ++j) {
                        const auto uj = static_cast<std::size_t>(j);
                        J.fxx[ui][uj][p] = A * T[0] * (Xij[s][ui][uj] * N + Xi[s][ui] * Ni[uj] + Xi[s][uj] * Ni[ui] + X[s] * Nij[ui][uj]);
                    }
                }
            }
        }
        return J;
    }

    // Closed form in the expression system (slot 0 = t, slots 1..n = x).
    sym::ComplexExpr expression() const {
        using sym::Expression;
        Expression X(1.0);
        if (mode == SupportMode::Annulus) {
            Expression r2(0.0);
            for (int i = 1; i <= n; ++i) r2 += sym::pow(Expression::x(i), 2);
            X = Window{cut.r0, r1, cut.layer}.expr(sym::pow(r2, 0.5));
        } else {
            for (int i = 1; i <= n; ++i) X *= box_window[static_cast<std::size_t>(i - 1)].expr(Expression::x(i));
        }
        Expression pre = Expression(cut.amplitude) * time_window.expr(Expression::t()) * X;
        Expression re(0.0), im(0.0);
        for (const auto& m : modes) {
            Expression ph = Expression(2 * std::numbers::pi * m.j) * Expression::t();
            for (int i = 1; i <= n; ++i) ph += Expression(kappa() * m.k[static_cast<std::size_t>(i - 1)]) * Expression::x(i);
            Expression c = sym::cos(ph), s = sym::sin(ph);
            re += Expression(m.c.real()) * c - Expression(m.c.imag()) * s;
            im += Expression(m.c.real()) * s + Expression(m.c.imag()) * c;
        }
        return {pre * re, pre * im};
    }

    // Number of grid points with f != 0 that violate the mode's support
    // constraint for weight scale R.
    std::size_t support_violations(const Grid& g, const Jet& J, double R) const {
        std::size_t bad = 0;
        for (std::size_t p = 0; p < g.size(); ++p) {
            if (J.f[p] == cplx(0)) continue;
            if (!admissible_point(g, p, R)) ++bad;
        }
        return bad;
    }

    bool admissible_point(const Grid& g, std::size_t p, double R) const {
        double r2 = 0;
        const double phi = cut.profile->value(g.coord(0, g.index(p, 0)), 0);
        for (int i = 1; i <= n; ++i) {
            double x = g.coord(i, g.index(p, i));
            double y = mode == SupportMode::Annulus ? x : x / R + (i == 1 ? phi : 0.0);
            r2 += y * y;
        }
        return mode == SupportMode::Annulus ? r2 >= cut.r0 * cut.r0 : r2 >= 1;
    }

    void check_grid(const Grid& g) const {
        if (g.axes != n + 1) throw ValidationError("space-time grid must carry t plus " + std::to_string(n) + " spatial axes");
        for (int i = 1; i <= n; ++i)
            if (std::abs(g.half_width(i) - half_width) > 1e-12 || std::abs(g.lo[static_cast<std::size_t>(i)] + half_width) > 1e-12)
                throw ValidationError("grid box differs from the one the test function was built for");
    }

  private:
    void window_jet(const std::array<double, 3>& x, double& X, std::array<double, 3>& Xi,
                    std::array<std::array<double, 3>, 3>& Xij) const {
        Xi = {};
        Xij = {};
        if (mode == SupportMode::Annulus) {
            double r2 = 0;
            for (int i = 0; i < n; ++i) r2 += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            const double r = std::sqrt(r2);
            const auto w = Window{cut.r0, r1, cut.layer}.jet(r);
            X = w[0];
            if (r == 0) return;
            for (int i = 0; i < n; ++i) {
                const double ei = x[static_cast<std::size_t>(i)] / r;
                Xi[static_cast<std::size_t>(i)] = w[1] * ei;
                for (int j = 0; j < n; ++j) {
                    const double ej = x[static_cast<std::size_t>(j)] / r;
                    Xij[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = w[2] * ei * ej + w[1] * ((i == j ? 1.0 : 0.0) - ei * ej) / r;
                }
            }
            return;
        }
        std::array<std::array<double, 3>, 3> w{};
        for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = box_window[static_cast<std::size_t>(i)].jet(x[static_cast<std::size_t>(i)]);
        auto prod_except = [&](int a, int b) {
            double v = 1;
            for (int k = 0; k < n; ++k)
                if (k != a && k != b) v *= w[static_cast<std::size_t>(k)][0];
            return v;
        };
        X = prod_except(-1, -1);
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            Xi[ui] = w[ui][1] * prod_except(i, -1);
            for (int j = 0; j < n; ++j) {
                const auto uj = static_cast<std::size_t>(j);
                Xij[ui][uj] = i == j ? w[ui][2] * prod_except(i, -1) : w[ui][1] * w[uj][1] * prod_except(i, j);
            }
        }
    }
};

// Random band-limited noise times smooth windows, admissible for `mode`.
// The translated mode puts the spatial support in x1 >= 0 and the time
// support where phi >= 1, so |x/R + phi e1| >= x1/R + phi >= 1 for every R.
inline TestFunction make_test_function(SupportMode mode, const Grid& g, const CutoffSpec& cut, std::uint64_t seed) {
    cut.validate();
    const int n = g.axes - 1;
    if (n < 1 || n > 3) throw ValidationError("space-time grid needs 1 to 3 spatial axes");
    const double L = g.half_width(1);
    for (int i = 1; i <= n; ++i)
        if (std::abs(g.half_width(i) - L) > 1e-12 || std::abs(g.lo[static_cast<std::size_t>(i)] + L) > 1e-12)
            throw ValidationError("space-time grid must be a centered cube in space");
    if (std::abs(g.lo[0]) > 0 || std::abs(g.len[0] - 1) > 1e-12) throw ValidationError("time axis must cover [0,1)");
    const double hx = g.h(1), ht = g.h(0);
    if (cut.layer < 8 * hx * (1 - 1e-12))
        throw ResolutionError("spatial transition layer " + format_number(cut.layer) + " spans fewer than 8 cells");
    if (cut.time_layer < 8 * ht * (1 - 1e-12))
        throw ResolutionError("time transition layer " + format_number(cut.time_layer) + " spans fewer than 8 cells");

    TestFunction tf;
    tf.mode = mode;
    tf.n = n;
    tf.seed = seed;
    tf.half_width = L;
    tf.cut = cut;
    const double edge = L - hx;  // last grid coordinate is L - h
    if (mode == SupportMode::Annulus) {
        tf.r1 = cut.r1 > 0 ? cut.r1 : edge;
        if (tf.r1 > edge + 1e-12) throw SupportError("annulus outer radius exceeds the grid box");
        if (cut.r0 + 2 * cut.layer > tf.r1)
            throw SupportError("empty admissible region: annulus [" + format_number(cut.r0) + ", " + format_number(tf.r1) +
                               "] cannot hold two transition layers of width " + format_number(cut.layer));
        tf.time_window = Window{1.0 / 16, 15.0 / 16, cut.time_layer};
    } else {
        const double t_lo = cut.profile->level_time(1.0);
        const double t_hi = 1 - t_lo;
        const bool symmetric = std::abs(cut.profile->value(t_hi, 0) - cut.profile->value(t_lo, 0)) < 1e-9;
        if (!symmetric || cut.profile->value(0.5, 0) < 1)
            throw SupportError("translated support needs a symmetric profile reaching 1");
        if (t_hi - t_lo < 2 * cut.time_layer) throw SupportError("empty admissible region: time window shorter than two layers");
        tf.time_window = Window{t_lo, t_hi, cut.time_layer};
        if (edge < 2 * cut.layer) throw SupportError("empty admissible region: box too small for the half-space support");
        tf.box_window[0] = Window{0.0, edge, cut.layer};
        for (int i = 1; i < n; ++i) tf.box_window[static_cast<std::size_t>(i)] = Window{-edge, edge, cut.layer};
    }

    if (cut.noise_modes == 0) {
        tf.modes.push_back(NoiseMode{0, {}, cplx(1, 0)});
        return tf;
    }
    std::mt19937_64 rng(seed);
    auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
    auto integer = [&](int m) { return static_cast<int>(rng() % static_cast<std::uint64_t>(2 * m + 1)) - m; };
    const double scale = 1 / std::sqrt(static_cast<double>(cut.noise_modes));
    for (int m = 0; m < cut.noise_modes; ++m) {
        NoiseMode nm;
        nm.j = integer(cut.max_freq_t);
        for (int i = 0; i < n; ++i) nm.k[static_cast<std::size_t>(i)] = integer(cut.max_freq_x);
        const double u1 = uniform(), u2 = uniform();
        const double rad = std::sqrt(-2 * std::log(u1));
        nm.c = scale * cplx(rad * std::cos(2 * std::numbers::pi * u2), rad * std::sin(2 * std::numbers::pi * u2));
        tf.modes.push_back(nm);
    }
    return tf;
}

// ---------------------------------------------------------------- operators

struct SampledOperator {
    std::vector<std::pair<MultiIndex, std::vector<cplx>>> terms;

    static SampledOperator from(const DiffOperator& P, const Grid& g) {
        SampledOperator s;
        for (const auto& [m, c] : P.terms()) {
            auto re = sample(c.re, g, {0, 1, 2, 3});
            auto im = sample(c.im, g, {0, 1, 2, 3});
            std::vector<cplx> v(re.size());
            for (std::size_t p = 0; p < v.size(); ++p) v[p] = cplx(re[p], im[p]);
            s.terms.emplace_back(m, std::move(v));
        }
        return s;
    }

    Field apply(const Jet& J) const {
        Field r(J.f.size(), 0);
        for (const auto& [m, c] : terms) {
            const Field& d = J.get(m);
            for (std::size_t p = 0; p < r.size(); ++p) r[p] += c[p] * d[p];
        }
        return r;
    }
};

// S0, S2 and A1 at unit beta plus the LHS zero-order weight, for one (field, weight shape, R).
struct CarlemanSetup {
    SupportMode mode = SupportMode::Annulus;
    CoefficientField field;
    double R = 1;
    double lambda = 1;
    sym::Expression phi_unit;  // weight at beta = 1
    SampledOperator S0, S2, A1;
    std::vector<double> lhs_weight;  // |x|^2 or |x/R + phi e1|^2
    DiffOperator commutator_first_order{1};
};

inline sym::Expression unit_weight(SupportMode mode, int n, double R, const std::shared_ptr<const PlateauProfile>& profile) {
    sym::Expression p = sym::apply_profile(profile, sym::Expression::t());
    return mode == SupportMode::Annulus ? WeightSpec::scaled_time(1.0, R, p).phi(n) : WeightSpec::translated(1.0, R, p).phi(n);
}

inline CarlemanSetup carleman_setup(SupportMode mode, const CoefficientField& field, double R, const CutoffSpec& cut, const Grid& g) {
    if (!(R >= 1)) throw ValidationError("R: weight scale must satisfy R >= 1");
    const int n = field.dim();
    if (g.axes != n + 1) throw ValidationError("space-time grid dimension does not match the coefficient field");
    CarlemanSetup s;
    s.mode = mode;
    s.field = field;
    s.R = R;
    SampleBox box = SampleBox::cube(n, g.half_width(1), 33);
    s.lambda = ellipticity_bounds(field, box).lambda;
    s.phi_unit = unit_weight(mode, n, R, cut.profile);
    Decomposition d = conjugate_decompose(field, s.phi_unit);
    DiffOperator S0(n), S2(n);
    for (const auto& [m, c] : d.S.terms()) (m.t() + m.spatial() == 0 ? S2 : S0).add(m, c);
    s.S0 = SampledOperator::from(S0, g);
    s.S2 = SampledOperator::from(S2, g);
    s.A1 = SampledOperator::from(d.A, g);
    using sym::Expression;
    Expression w(0.0);
    for (int i = 1; i <= n; ++i) {
        Expression y = mode == SupportMode::Annulus ? Expression::x(i)
                                                    : Expression(1 / R) * Expression::x(i) +
                                                          (i == 1 ? sym::apply_profile(cut.profile, Expression::t()) : Expression(0.0));
        w += y * y;
    }
    s.lhs_weight = sample(w, g, {0, 1, 2, 3});
    return s;
}

// Inner products that fix both sides as polynomials in beta.
struct SampleMoments {
    double G = 0;    // |grad f|^2
    double X = 0;    // |w f|^2, w the LHS zero-order factor
    double s00 = 0, s22 = 0, aa = 0, s02 = 0, s0a = 0, s2a = 0;

    double lhs(double beta, double R) const { return beta * G / (R * R) + beta * beta * beta * X / std::pow(R, 6); }
    // |(S + A) f|^2 at this beta
    double conjugated_norm2(double beta) const {
        const double b2 = beta * beta;
        double v = s00 + 2 * beta * s0a + b2 * (aa + 2 * s02) + 2 * b2 * beta * s2a + b2 * b2 * s22;
        return std::max(v, 0.0);
    }
    // <[S, A] f, f> = 2 Re<S f, A f> = c1 beta + c3 beta^3
    double c1() const { return 2 * s0a; }
    double c3() const { return 2 * s2a; }
    bool zero() const { return G == 0 && X == 0 && s00 == 0; }
};

inline SampleMoments sample_moments(const CarlemanSetup& s, const Jet& J, double cell_volume) {
    const Field a = s.S0.apply(J), b = s.S2.apply(J), c = s.A1.apply(J);
    SampleMoments m;
    const int n = s.field.dim();
    for (std::size_t p = 0; p < J.f.size(); ++p) {
        for (int i = 0; i < n; ++i) m.G += std::norm(J.fx[static_cast<std::size_t>(i)][p]);
        m.X += s.lhs_weight[p] * std::norm(J.f[p]);
        m.s00 += std::norm(a[p]);
        m.s22 += std::norm(b[p]);
        m.aa += std::norm(c[p]);
        m.s02 += std::real(a[p] * std::conj(b[p]));
        m.s0a += std::real(a[p] * std::conj(c[p]));
        m.s2a += std::real(b[p] * std::conj(c[p]));
    }
    for (double* v : {&m.G, &m.X, &m.s00, &m.s22, &m.aa, &m.s02, &m.s0a, &m.s2a}) *v *= cell_volume;
    return m;
}

// Defects of <Sf,g> = <f,Sg> and <Af,g> = -<f,Ag> for two compactly supported
// test functions, each relative to |Pf||g| + |f||Pg|.
struct SymmetryDefect {
    double symmetric = 0;
    double antisymmetric = 0;
};

inline SymmetryDefect symmetry_defect(const CarlemanSetup& s, const Jet& F, const Jet& G, double beta, double cell_volume) {
    auto S = [&](const Jet& J) {
        Field a = s.S0.apply(J), b = s.S2.apply(J);
        for (std::size_t p = 0; p < a.size(); ++p) a[p] += beta * beta * b[p];
        return a;
    };
    auto A = [&](const Jet& J) {
        Field c = s.A1.apply(J);
        for (auto& v : c) v *= beta;
        return c;
    };
    auto dot = [&](const Field& u, const Field& v) {
        cplx r = 0;
        for (std::size_t p = 0; p < u.size(); ++p) r += u[p] * std::conj(v[p]);
        return r * cell_volume;
    };
    auto norm = [&](const Field& u) { return std::sqrt(std::real(dot(u, u))); };
    const Field SF = S(F), SG = S(G), AF = A(F), AG = A(G);
    const double nf = norm(F.f), ng = norm(G.f);
    SymmetryDefect d;
    double scale = norm(SF) * ng + nf * norm(SG);
    d.symmetric = scale > 0 ? std::abs(dot(SF, G.f) - dot(F.f, SG)) / scale : 0.0;
    scale = norm(AF) * ng + nf * norm(AG);
    d.antisymmetric = scale > 0 ? std::abs(dot(AF, G.f) + dot(F.f, AG)) / scale : 0.0;
    return d;
}

// Smallest beta beyond which the commutator term dominates the LHS:
// (c1 - G/R^2) beta + (c3 - X/R^6) beta^3 >= 0. Infinite if it never does.
inline double commutator_frontier(const SampleMoments& m, double R) {
    const double a = m.c1() - m.G / (R * R), b = m.c3() - m.X / std::pow(R, 6);
    if (b <= 0) return a >= 0 && b == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return a >= 0 ? 0.0 : std::sqrt(-a / b);
}

// Smallest beta beyond which the full inequality |(S+A)f|^2 >= LHS holds,
// found on a logarithmic scan refined by bisection.
inline double inequality_frontier(const SampleMoments& m, double R, double beta_max = 1e9) {
    auto q = [&](double b) { return m.conjugated_norm2(b) - m.lhs(b, R); };
    if (q(beta_max) < 0) return std::numeric_limits<double>::infinity();
    double last_bad = 0;
    for (double b = 1e-6; b <= beta_max; b *= 1.05)
        if (q(b) < 0) last_bad = b;
    if (last_bad == 0) return 0.0;
    double lo = last_bad, hi = last_bad * 1.05;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        (q(mid) < 0 ? lo : hi) = mid;
    }
    return hi;
}

// ---------------------------------------------------------------- reports

struct CarlemanReport {
    SupportMode mode = SupportMode::Annulus;
    double beta = 0, R = 1, r0 = 1;
    std::uint64_t seed = 0;
    double lhs = 0, rhs = 0;
    double threshold = 0;             // beta_1 or beta_3 used for the run
    std::string threshold_name;       // "beta1" or "beta3"
    double constant = 1;              // C in the translated display
    double lambda = 1;
    double slack = 0;
    bool vacuous = false;
    bool exploratory = false;         // beta below the threshold
    bool pass = false;
};

inline constexpr double kSlackTolerance = 1e-6;

// beta_1 = max{lambda^{-1} |phi''|^{1/2} r0^{-1} R^3, C1 (1 + r0^{-1}) R^2}
inline double beta1_threshold(double lambda, double phi2_sup, double r0, double R, double C1 = 0) {
    return std::max(std::sqrt(phi2_sup) / (lambda * r0) * R * R * R, C1 * (1 + 1 / r0) * R * R);
}

inline CarlemanReport make_report(const CarlemanSetup& s, const SampleMoments& m, double beta, double threshold,
                                  const CutoffSpec& cut, std::uint64_t seed, double constant = 1) {
    CarlemanReport r;
    r.mode = s.mode;
    r.beta = beta;
    r.R = s.R;
    r.r0 = cut.r0;
    r.seed = seed;
    r.lambda = s.lambda;
    r.constant = constant;
    r.threshold = threshold;
    r.threshold_name = s.mode == SupportMode::Annulus ? "beta1" : "beta3";
    r.lhs = m.lhs(beta, s.R);
    const double P = m.conjugated_norm2(beta);
    if (s.mode == SupportMode::Annulus) {
        r.rhs = P / (s.lambda * s.lambda);
        r.slack = r.lhs > 0 ? s.lambda * s.lambda * r.rhs / r.lhs : std::numeric_limits<double>::infinity();
    } else {
        r.rhs = P;
        r.slack = r.lhs > 0 ? constant * r.rhs / r.lhs : std::numeric_limits<double>::infinity();
    }
    r.vacuous = r.lhs == 0 && P == 0;
    r.exploratory = beta < threshold;
    r.pass = r.vacuous || r.slack >= 1 - kSlackTolerance;
    return r;
}

inline void require_support(const TestFunction& tf, const Grid& g, const Jet& J, double R) {
    if (std::size_t bad = tf.support_violations(g, J, R))
        throw SupportError(std::to_string(bad) + " grid points of the test function violate the " + mode_name(tf.mode) +
                           " support constraint");
}

inline CarlemanReport carleman_sides_cubic(const TestFunction& tf, const Grid& g, const CoefficientField& field, double beta, double R,
                                           double C1 = 0) {
    if (tf.mode != SupportMode::Annulus) throw SupportError("cubic-regime sides need an annulus-mode test function");
    if (!(beta > 0)) throw ValidationError("beta must be positive");
    CarlemanSetup s = carleman_setup(SupportMode::Annulus, field, R, tf.cut, g);
    Jet J = tf.sample(g);
    require_support(tf, g, J, R);
    SampleMoments m = sample_moments(s, J, g.cell_volume());
    return make_report(s, m, beta, beta1_threshold(s.lambda, tf.cut.phi_sup(2), tf.cut.r0, R, C1), tf.cut, tf.seed);
}

inline CarlemanReport carleman_sides_translated(const TestFunction& tf, const Grid& g, const TransversalField& field, double beta, double R,
                                                double c0 = 0, double constant = 1) {
    if (tf.mode != SupportMode::Translated) throw SupportError("translated-weight sides need a translated-mode test function");
    if (!(beta > 0)) throw ValidationError("beta must be positive");
    CarlemanSetup s = carleman_setup(SupportMode::Translated, field.field(), R, tf.cut, g);
    Jet J = tf.sample(g);
    require_support(tf, g, J, R);
    SampleMoments m = sample_moments(s, J, g.cell_volume());
    return make_report(s, m, beta, c0 * R * R, tf.cut, tf.seed, constant);
}

// ---------------------------------------------------------------- identity

// Max relative gap between (S + A) f from the sampled decomposition and the
// expanded symbolic e^{phi}(i dt + L)(e^{-phi} f), on up to `points` grid
// points inside the support.
inline double conjugation_identity_error(const TestFunction& tf, const Grid& g, const CoefficientField& field, double beta, double R,
                                         std::size_t points = 48) {
    const int n = field.dim();
    sym::Expression phi_unit = unit_weight(tf.mode, n, R, tf.cut.profile);
    sym::Expression phi = sym::Expression(beta) * phi_unit;
    Decomposition d = conjugate_decompose(field, phi);
    DiffOperator P = d.S + d.A;
    Jet J = tf.sample(g);
    double peak = 0;
    for (const auto& v : J.f) peak = std::max(peak, std::abs(v));
    if (peak == 0) return 0;
    std::vector<std::size_t> idx;
    for (std::size_t p = 0; p < J.f.size(); ++p)
        if (std::abs(J.f[p]) > 1e-3 * peak) idx.push_back(p);
    std::vector<std::size_t> pick;
    const std::size_t step = std::max<std::size_t>(1, idx.size() / points);
    for (std::size_t k = 0; k < idx.size() && pick.size() < points; k += step) pick.push_back(idx[k]);

    std::array<std::vector<double>, sym::kMaxVars> c;
    for (int a = 0; a <= n; ++a)
        for (std::size_t p : pick) c[static_cast<std::size_t>(a)].push_back(g.coord(a, g.index(p, a)));
    auto spans = detail::spans(c);
    auto eval = [&](const sym::Expression& e) {
        sym::Program prog(e);
        std::vector<std::vector<double>> out;
        prog.evaluate(spans, pick.size(), out);
        return out[0];
    };
    std::vector<cplx> ours(pick.size(), 0);
    for (const auto& [m, coef] : P.terms()) {
        auto re = eval(coef.re), im = eval(coef.im);
        const Field& D = J.get(m);
        for (std::size_t k = 0; k < pick.size(); ++k) ours[k] += cplx(re[k], im[k]) * D[pick[k]];
    }
    sym::ComplexExpr direct = direct_conjugation(field, phi, tf.expression());
    auto dre = eval(sym::expand(direct.re)), dim = eval(sym::expand(direct.im));
    double gap = 0, scale = 0;
    for (std::size_t k = 0; k < pick.size(); ++k) {
        cplx v(dre[k], dim[k]);
        gap = std::max(gap, std::abs(v - ours[k]));
        scale = std::max(scale, std::abs(v));
    }
    return scale > 0 ? gap / scale : gap;
}

// ---------------------------------------------------------------- sweep

enum class BetaRule { Explicit, Threshold, Frontier };

struct SweepConfig {
    SupportMode mode = SupportMode::Annulus;
    CoefficientField field = CoefficientField::identity(1);
    std::vector<double> R_values{1};
    BetaRule rule = BetaRule::Threshold;  // Threshold: beta_1 (cubic); Frontier: c0 R^2 with c0 fitted here
    std::vector<double> betas;            // Explicit rule
    int samples = 100;
    std::uint64_t seed = 1;
    double C1 = 0;
    double constant = 1;  // translated C
    CutoffSpec cutoff;
    int nt = 64, nx = 64;
    double half_width = 8;
};

struct FrontierPoint {
    double R = 1;
    double commutator = 0;  // max over samples of the commutator frontier
    double inequality = 0;  // max over samples of the full-inequality frontier
};

struct SweepReport {
    std::vector<CarlemanReport> rows;
    std::vector<FrontierPoint> frontier;
    double min_slack = std::numeric_limits<double>::infinity();
    double frontier_exponent = std::numeric_limits<double>::quiet_NaN();  // fit of log commutator frontier vs log R
    double frontier_prefactor = std::numeric_limits<double>::quiet_NaN();
    double c0 = std::numeric_limits<double>::quiet_NaN();  // max frontier / R^2
    double c1_fit = std::numeric_limits<double>::quiet_NaN(); // max frontier / R^3
    double phi1_sup = 0, phi2_sup = 0;
    std::size_t failures = 0;

    bool all_pass() const { return failures == 0; }

    CsvTable csv() const {
        CsvTable t({"mode", "beta", "R", "seed", "lhs", "rhs", "slack", "pass"});
        for (const auto& r : rows)
            t.add({std::string(mode_name(r.mode)), r.beta, r.R, static_cast<long long>(r.seed), r.lhs, r.rhs, r.slack,
                   static_cast<long long>(r.pass ? 1 : 0)});
        return t;
    }
};

// Least-squares slope and intercept of log y against log x.
inline std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return {slope, (sy - slope * sx) / m};
}

inline SweepReport carleman_sweep(const SweepConfig& cfg) {
    if (cfg.R_values.empty()) throw ValidationError("sweep R grid is empty");
    if (cfg.samples < 1) throw ValidationError("sweep needs at least one sample");
    if (cfg.rule == BetaRule::Explicit && cfg.betas.empty()) throw ValidationError("sweep beta grid is empty");
    for (double R : cfg.R_values)
        if (!(R >= 1)) throw ValidationError("R: weight scale must satisfy R >= 1");
    for (double b : cfg.betas)
        if (!(b > 0)) throw ValidationError("sweep betas must be positive");
    const int n = cfg.field.dim();
    Grid g = space_time_grid(n, cfg.nt, cfg.nx, cfg.half_width);

    std::vector<CarlemanSetup> setups;
    for (double R : cfg.R_values) setups.push_back(carleman_setup(cfg.mode, cfg.field, R, cfg.cutoff, g));

    const std::size_t S = static_cast<std::size_t>(cfg.samples), NR = cfg.R_values.size();
    std::vector<SampleMoments> moments(S * NR);
    parallel_for(S, [&](std::size_t k) {
        TestFunction tf = make_test_function(cfg.mode, g, cfg.cutoff, cfg.seed + k);
        Jet J = tf.sample(g);
        for (std::size_t r = 0; r < NR; ++r) {
            require_support(tf, g, J, cfg.R_values[r]);
            moments[k * NR + r] = sample_moments(setups[r], J, g.cell_volume());
        }
    });

    SweepReport rep;
    rep.phi1_sup = cfg.cutoff.phi_sup(1);
    rep.phi2_sup = cfg.cutoff.phi_sup(2);
    std::vector<double> xs, ys;
    for (std::size_t r = 0; r < NR; ++r) {
        FrontierPoint fp;
        fp.R = cfg.R_values[r];
        for (std::size_t k = 0; k < S; ++k) {
            fp.commutator = std::max(fp.commutator, commutator_frontier(moments[k * NR + r], fp.R));
            fp.inequality = std::max(fp.inequality, inequality_frontier(moments[k * NR + r], fp.R));
        }
        rep.frontier.push_back(fp);
        if (std::isfinite(fp.commutator) && fp.commutator > 0) {
            xs.push_back(fp.R);
            ys.push_back(fp.commutator);
        }
        rep.c0 = r == 0 ? fp.commutator / (fp.R * fp.R) : std::max(rep.c0, fp.commutator / (fp.R * fp.R));
        rep.c1_fit = r == 0 ? fp.commutator / std::pow(fp.R, 3) : std::max(rep.c1_fit, fp.commutator / std::pow(fp.R, 3));
    }
    if (xs.size() >= 2) {
        auto [slope, icpt] = loglog_fit(xs, ys);
        rep.frontier_exponent = slope;
        rep.frontier_prefactor = std::exp(icpt);
    }

    for (std::size_t r = 0; r < NR; ++r) {
        const double R = cfg.R_values[r];
        const double thr = cfg.mode == SupportMode::Annulus ? beta1_threshold(setups[r].lambda, rep.phi2_sup, cfg.cutoff.r0, R, cfg.C1)
                                                            : rep.c0 * R * R;
        std::vector<double> betas;
        if (cfg.rule == BetaRule::Explicit) betas = cfg.betas;
        else if (cfg.rule == BetaRule::Threshold) betas = {cfg.mode == SupportMode::Annulus ? thr : rep.c0 * R * R};
        else betas = {rep.c0 * R * R};
        for (double b : betas)
            for (std::size_t k = 0; k < S; ++k) {
                CarlemanReport row = make_report(setups[r], moments[k * NR + r], b, thr, cfg.cutoff, cfg.seed + k, cfg.constant);
                rep.min_slack = std::min(rep.min_slack, row.slack);
                if (!row.pass) ++rep.failures;
                rep.rows.push_back(row);
            }
    }
    return rep;
}

}  // namespace ucont
