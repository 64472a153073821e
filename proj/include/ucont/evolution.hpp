#pragma once

// du/dt = (a + ib)(L u + V u) on a periodic grid by Strang splitting:
//   constant part  exp(c dt/2 * (-k.Abar k))  exactly in Fourier space,
//   potential      exp(c dt/2 * V)             pointwise,
//   remainder      d_k((a_kj - abar_kj) d_j)   by RK4 sub-steps, spectral in divergence form,
// in the order Lc(dt/2) V(dt/2) R(dt) V(dt/2) Lc(dt/2), with c = a + ib and
// Abar the box average of A.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "grid.hpp"

namespace ucont {

class BlowUpError : public Error {
  public:
    using Error::Error;
};

struct DissipationParams {
    double a = 0;
    double b = 1;

    static DissipationParams schroedinger() { return {0, 1}; }
    static DissipationParams heat(double a = 1) { return {a, 0}; }
    static DissipationParams regularized(double eps) { return {eps, 1}; }

    cplx c() const { return {a, b}; }
    void validate() const {
        if (!(a >= 0)) throw ValidationError("dissipation a must be >= 0 (backward parabolic flow is ill-posed)");
        if (a == 0 && b == 0) throw ValidationError("dissipation parameters a, b must not both vanish");
    }
};

struct WaveState {
    double t = 0;
    Grid grid;
    Field values;
};

struct Trajectory {
    Grid grid;
    std::vector<double> times;
    std::vector<Field> frames;

    std::size_t size() const { return times.size(); }
    WaveState state(std::size_t k) const { return {times[k], grid, frames[k]}; }
    const WaveState back() const { return state(size() - 1); }
};

// Trapezoidal (= rectangle on a periodic grid) L^2 norm squared.
inline double mass(const Field& u, const Grid& g) {
    double s = 0;
    for (const auto& v : u) s += std::norm(v);
    return s * g.cell_volume();
}
inline double mass(const WaveState& u) { return mass(u.values, u.grid); }

inline double l2_distance(const Field& u, const Field& v, const Grid& g) {
    if (u.size() != v.size()) throw ValidationError("fields live on different grids");
    double s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::norm(u[i] - v[i]);
    return std::sqrt(s * g.cell_volume());
}

// amplitude * exp(-|x - c|^2 / (4 s))
struct GaussianPacket {
    int n = 1;
    cplx s{1, 0};
    std::array<double, 3> center{0, 0, 0};
    cplx amplitude{1, 0};

    void validate() const {
        if (!(s.real() > 0)) throw ValidationError("Gaussian packet needs Re s > 0");
    }
    cplx value(const std::array<double, 3>& x) const {
        double r2 = 0;
        for (int i = 0; i < n; ++i) r2 += (x[static_cast<std::size_t>(i)] - center[static_cast<std::size_t>(i)]) * (x[static_cast<std::size_t>(i)] - center[static_cast<std::size_t>(i)]);
        return amplitude * std::exp(-r2 / (4.0 * s));
    }
    Field sample(const Grid& g) const {
        Field f(g.size());
        std::array<double, 3> x{};
        for (std::size_t p = 0; p < f.size(); ++p) {
            for (int a = 0; a < n; ++a) x[static_cast<std::size_t>(a)] = g.coord(a, g.index(p, a));
            f[p] = value(x);
        }
        return f;
    }
    // Decay rate of |u|^2 = |amp|^2 exp(-2 rho |x|^2): rho = Re(1/(4 s)).
    double modulus_rate() const { return (1.0 / (4.0 * s)).real(); }
    // exact L^2 norm squared on R^n
    double mass() const { return std::norm(amplitude) * std::pow(std::numbers::pi / (2 * modulus_rate()), n / 2.0); }
};

// Exact flow of du/dt = c * Laplacian u on Gaussians: s -> s + c t, amplitude
// scaled by (s / (s + c t))^{n/2}. c = i is the Schroedinger flow.
inline GaussianPacket free_flow_closed_form(const GaussianPacket& p, double t, cplx c = cplx(0, 1)) {
    p.validate();
    GaussianPacket q = p;
    q.s = p.s + c * t;
    q.amplitude = p.amplitude * std::pow(p.s / q.s, p.n / 2.0);
    return q;
}

struct PropagateOptions {
    int steps = 100;
    int save_every = 0;  // 0 keeps only the initial and final states
    double blowup_factor = 1e3;
    double resolution_tol = 1e-10;
    bool check_resolution = true;
    double rk_stability = 2.0;  // |lambda dt| budget per RK4 sub-step
};

class Propagator {
  public:
    Propagator(const CoefficientField& f, const Grid& g, DissipationParams d) : field_(f), grid_(g), d_(d) {
        d.validate();
        g.validate();
        if (g.axes != f.dim()) throw ValidationError("grid and coefficient dimensions differ");
        const int n = f.dim();
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) {
                auto v = sample_space(f.a(k, j), g);
                double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
                abar_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = mean;
                double dev = 0;
                for (auto& x : v) {
                    x -= mean;
                    dev = std::max(dev, std::abs(x));
                }
                if (dev > 0) {
                    variable_ = true;
                    max_dev_ = std::max(max_dev_, dev);
                }
                delta_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = std::move(v);
            }
        V_ = sample_space(f.V(), g);
        for (int a = 0; a < n; ++a) k_[static_cast<std::size_t>(a)] = g.wavenumbers(a);
        symbol_.resize(g.size());
        kmax2_ = 0;
        for (std::size_t p = 0; p < g.size(); ++p) {
            double s = 0, k2 = 0;
            for (int a = 0; a < n; ++a) {
                double ka = k_[static_cast<std::size_t>(a)][static_cast<std::size_t>(g.index(p, a))];
                k2 += ka * ka;
                for (int b = 0; b < n; ++b)
                    s += abar_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] * ka * k_[static_cast<std::size_t>(b)][static_cast<std::size_t>(g.index(p, b))];
            }
            symbol_[p] = -s;
            kmax2_ = std::max(kmax2_, k2);
        }
    }

    const Grid& grid() const { return grid_; }

    Trajectory run(const Field& u0, double t0, double t1, const PropagateOptions& opt) const {
        if (u0.size() != grid_.size()) throw ValidationError("initial state does not match grid");
        if (opt.steps < 1) throw ValidationError("steps must be >= 1");
        if (!(t1 >= t0)) throw ValidationError("time span must be increasing");
        if (opt.check_resolution) spectral::require_resolved(u0, grid_, opt.resolution_tol, "initial state");
        const double dt = (t1 - t0) / opt.steps;
        const cplx c = d_.c();
        Field half_lc(grid_.size()), half_v(grid_.size());
        for (std::size_t p = 0; p < grid_.size(); ++p) {
            half_lc[p] = std::exp(c * symbol_[p] * (0.5 * dt));
            half_v[p] = std::exp(c * V_[p] * (0.5 * dt));
        }
        int sub = 0;
        if (variable_) sub = std::max(1, static_cast<int>(std::ceil(std::abs(c) * max_dev_ * kmax2_ * dt / opt.rk_stability)));

        Trajectory tr;
        tr.grid = grid_;
        tr.times.push_back(t0);
        tr.frames.push_back(u0);
        const double m0 = mass(u0, grid_);
        Field u = u0;
        for (int s = 1; s <= opt.steps; ++s) {
            FFT::forward(u, grid_);
            for (std::size_t p = 0; p < u.size(); ++p) u[p] *= half_lc[p];
            FFT::inverse(u, grid_);
            for (std::size_t p = 0; p < u.size(); ++p) u[p] *= half_v[p];
            if (variable_) {
                const double h = dt / sub;
                for (int r = 0; r < sub; ++r) rk4(u, c, h);
            }
            for (std::size_t p = 0; p < u.size(); ++p) u[p] *= half_v[p];
            FFT::forward(u, grid_);
            for (std::size_t p = 0; p < u.size(); ++p) u[p] *= half_lc[p];
            FFT::inverse(u, grid_);
            const double m = mass(u, grid_);
            if (!std::isfinite(m) || (m0 > 0 && m > opt.blowup_factor * m0))
                throw BlowUpError("mass grew beyond " + std::to_string(opt.blowup_factor) + "x the initial mass at t = " +
                                  std::to_string(t0 + s * dt));
            bool save = s == opt.steps || (opt.save_every > 0 && s % opt.save_every == 0);
            if (save) {
                tr.times.push_back(t0 + s * dt);
                tr.frames.push_back(u);
            }
        }
        if (opt.check_resolution) spectral::require_resolved(u, grid_, std::max(opt.resolution_tol, 1e-8), "final state");
        return tr;
    }

    // d_k((a_kj - abar_kj) d_j u)
    Field remainder(const Field& u) const {
        const int n = field_.dim();
        Field hat = u;
        FFT::forward(hat, grid_);
        std::array<Field, 3> grad;
        for (int j = 0; j < n; ++j) grad[static_cast<std::size_t>(j)] = spectral::derivative_from_hat(hat, grid_, spectral::axis_order(j));
        Field out(u.size(), 0.0);
        for (int k = 0; k < n; ++k) {
            Field flux(u.size(), 0.0);
            bool any = false;
            for (int j = 0; j < n; ++j) {
                const auto& dv = delta_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
                if (std::all_of(dv.begin(), dv.end(), [](double x) { return x == 0; })) continue;
                any = true;
                for (std::size_t p = 0; p < u.size(); ++p) flux[p] += dv[p] * grad[static_cast<std::size_t>(j)][p];
            }
            if (!any) continue;
            Field d = spectral::derivative(flux, grid_, spectral::axis_order(k));
            for (std::size_t p = 0; p < u.size(); ++p) out[p] += d[p];
        }
        return out;
    }

  private:
    void rk4(Field& u, cplx c, double h) const {
        auto f = [&](const Field& v) {
            Field r = remainder(v);
            for (auto& x : r) x *= c;
            return r;
        };
        Field k1 = f(u);
        Field tmp(u.size());
        for (std::size_t p = 0; p < u.size(); ++p) tmp[p] = u[p] + 0.5 * h * k1[p];
        Field k2 = f(tmp);
        for (std::size_t p = 0; p < u.size(); ++p) tmp[p] = u[p] + 0.5 * h * k2[p];
        Field k3 = f(tmp);
        for (std::size_t p = 0; p < u.size(); ++p) tmp[p] = u[p] + h * k3[p];
        Field k4 = f(tmp);
        for (std::size_t p = 0; p < u.size(); ++p) u[p] += h / 6.0 * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
    }

    CoefficientField field_;
    Grid grid_;
    DissipationParams d_;
    std::array<std::array<double, 3>, 3> abar_{};
    std::array<std::array<std::vector<double>, 3>, 3> delta_{};
    std::vector<double> V_;
    std::array<std::vector<double>, 4> k_;
    std::vector<double> symbol_;
    double kmax2_ = 0, max_dev_ = 0;
    bool variable_ = false;
};

// Exact free flow sampled pointwise on `frames` uniform times in [t0, t1].
// Pointwise sampling keeps relative accuracy in the far tail, where FFT
// roundoff would otherwise dominate strongly weighted norms.
inline Trajectory sample_free_flow(const GaussianPacket& p, const Grid& g, double t0, double t1, int frames, cplx c = cplx(0, 1)) {
    if (frames < 2) throw ValidationError("free-flow sampling needs at least two frames");
    Trajectory tr;
    tr.grid = g;
    for (int k = 0; k < frames; ++k) {
        double t = t0 + (t1 - t0) * k / (frames - 1);
        tr.times.push_back(t);
        tr.frames.push_back(free_flow_closed_form(p, t, c).sample(g));
    }
    return tr;
}

inline Trajectory propagate(const WaveState& u0, const CoefficientField& f, DissipationParams d, double t1,
                            const PropagateOptions& opt = {}) {
    return Propagator(f, u0.grid, d).run(u0.values, u0.t, t1, opt);
}

// u_eps(t) = exp(t (eps + i)(L + V)) u0 on the time samples of the reference
// trajectory.
inline Trajectory regularized_flow(const Trajectory& u, const CoefficientField& f, double eps, const PropagateOptions& opt = {}) {
    if (!(eps > 0)) throw ValidationError("regularization eps must be > 0");
    if (u.size() < 1) throw ValidationError("empty trajectory");
    Propagator P(f, u.grid, DissipationParams::regularized(eps));
    const double t0 = u.times.front(), t1 = u.times.back();
    PropagateOptions o = opt;
    // save on the reference time samples when they are uniform
    if (u.size() > 2) {
        const int segments = static_cast<int>(u.size()) - 1;
        o.steps = std::max(o.steps, segments);
        o.steps = ((o.steps + segments - 1) / segments) * segments;
        o.save_every = o.steps / segments;
    }
    return P.run(u.frames.front(), t0, t1, o);
}

// Checkpoint container: "UCTR" magic, u32 version, u32 n, u32 N_i[n],
// f64 L_i[n], u32 frame count, f64 times[count], then complex64 frames
// (float32 re, im) in grid order. Little-endian throughout.
inline void write_checkpoint(const Trajectory& tr, const std::string& path) {
    static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes a little-endian host");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open checkpoint for writing: " + path);
    auto u32 = [&os](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    auto f64 = [&os](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    os.write("UCTR", 4);
    u32(1);
    u32(static_cast<std::uint32_t>(tr.grid.axes));
    for (int i = 0; i < tr.grid.axes; ++i) u32(static_cast<std::uint32_t>(tr.grid.N[static_cast<std::size_t>(i)]));
    for (int i = 0; i < tr.grid.axes; ++i) f64(tr.grid.half_width(i));
    u32(static_cast<std::uint32_t>(tr.size()));
    for (double t : tr.times) f64(t);
    for (const auto& fr : tr.frames)
        for (const auto& v : fr) {
            float re = static_cast<float>(v.real()), im = static_cast<float>(v.imag());
            os.write(reinterpret_cast<const char*>(&re), 4);
            os.write(reinterpret_cast<const char*>(&im), 4);
        }
    if (!os) throw Error("checkpoint write failed: " + path);
}

inline Trajectory read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::string(magic, 4) != "UCTR") throw Error("not a trajectory checkpoint: " + path);
    auto u32 = [&is] {
        std::uint32_t v = 0;
        is.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto f64 = [&is] {
        double v = 0;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    if (u32() != 1) throw Error("unsupported checkpoint version");
    Trajectory tr;
    tr.grid.axes = static_cast<int>(u32());
    if (tr.grid.axes < 1 || tr.grid.axes > 3) throw Error("corrupt checkpoint header");
    for (int i = 0; i < tr.grid.axes; ++i) tr.grid.N[static_cast<std::size_t>(i)] = static_cast<int>(u32());
    for (int i = 0; i < tr.grid.axes; ++i) {
        double L = f64();
        tr.grid.lo[static_cast<std::size_t>(i)] = -L;
        tr.grid.len[static_cast<std::size_t>(i)] = 2 * L;
    }
    tr.grid.validate();
    const std::uint32_t count = u32();
    for (std::uint32_t k = 0; k < count; ++k) tr.times.push_back(f64());
    for (std::uint32_t k = 0; k < count; ++k) {
        Field f(tr.grid.size());
        for (auto& v : f) {
            float re = 0, im = 0;
            is.read(reinterpret_cast<char*>(&re), 4);
            is.read(reinterpret_cast<char*>(&im), 4);
            v = {re, im};
        }
        tr.frames.push_back(std::move(f));
    }
    if (!is) throw Error("truncated checkpoint: " + path);
    return tr;
}

}  // namespace ucont
