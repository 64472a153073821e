#pragma once

// Periodic tensor grids (up to four axes, row-major with axis 0 slowest),
// FFTW-backed transforms and spectral differentiation.

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "coefficients.hpp"
#include "csv.hpp"

namespace ucont {

using cplx = std::complex<double>;
using Field = std::vector<cplx>;

class ResolutionError : public Error {
  public:
    using Error::Error;
};

struct Grid {
    int axes = 1;
    std::array<int, 4> N{1, 1, 1, 1};
    std::array<double, 4> lo{0, 0, 0, 0};
    std::array<double, 4> len{1, 1, 1, 1};

    // spatial cube [-L, L)^n with N points per axis
    static Grid cube(int n, int points, double half_width) {
        Grid g;
        g.axes = n;
        for (int i = 0; i < n; ++i) {
            g.N[static_cast<std::size_t>(i)] = points;
            g.lo[static_cast<std::size_t>(i)] = -half_width;
            g.len[static_cast<std::size_t>(i)] = 2 * half_width;
        }
        g.validate();
        return g;
    }

    void validate() const {
        if (axes < 1 || axes > 4) throw ValidationError("grid needs 1 to 4 axes");
        for (int i = 0; i < axes; ++i) {
            int n = N[static_cast<std::size_t>(i)];
            if (n < 2 || (n & (n - 1)) != 0) throw ValidationError("grid point counts must be powers of two >= 2");
            if (!(len[static_cast<std::size_t>(i)] > 0)) throw ValidationError("grid extents must be positive");
        }
    }

    std::size_t size() const {
        std::size_t s = 1;
        for (int i = 0; i < axes; ++i) s *= static_cast<std::size_t>(N[static_cast<std::size_t>(i)]);
        return s;
    }
    double h(int i) const { return len[static_cast<std::size_t>(i)] / N[static_cast<std::size_t>(i)]; }
    double cell_volume() const {
        double v = 1;
        for (int i = 0; i < axes; ++i) v *= h(i);
        return v;
    }
    double coord(int axis, int k) const { return lo[static_cast<std::size_t>(axis)] + h(axis) * k; }
    double half_width(int axis) const { return 0.5 * len[static_cast<std::size_t>(axis)]; }

    std::size_t stride(int axis) const {
        std::size_t s = 1;
        for (int i = axes - 1; i > axis; --i) s *= static_cast<std::size_t>(N[static_cast<std::size_t>(i)]);
        return s;
    }
    int index(std::size_t flat, int axis) const {
        return static_cast<int>((flat / stride(axis)) % static_cast<std::size_t>(N[static_cast<std::size_t>(axis)]));
    }

    // Flattened coordinate array for one axis.
    std::vector<double> coordinates(int axis) const {
        std::vector<double> c(size());
        for (std::size_t p = 0; p < c.size(); ++p) c[p] = coord(axis, index(p, axis));
        return c;
    }

    // Angular wavenumbers in FFT order; the Nyquist mode is kept with its
    // negative sign for first derivatives set to zero by the caller if needed.
    std::vector<double> wavenumbers(int axis) const {
        const int n = N[static_cast<std::size_t>(axis)];
        std::vector<double> k(static_cast<std::size_t>(n));
        const double base = 2 * std::numbers::pi / len[static_cast<std::size_t>(axis)];
        for (int m = 0; m < n; ++m) k[static_cast<std::size_t>(m)] = base * (m < n / 2 ? m : m - n);
        return k;
    }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.axes == b.axes && a.N == b.N && a.lo == b.lo && a.len == b.len;
    }
};

// Cached in-place FFTW plans. Planning is serialized; execution through the
// new-array interface is safe from several threads.
class FFT {
  public:
    static void forward(Field& f, const Grid& g) { run(f, g, FFTW_FORWARD); }
    // normalized inverse
    static void inverse(Field& f, const Grid& g) {
        run(f, g, FFTW_BACKWARD);
        const double s = 1.0 / static_cast<double>(g.size());
        for (auto& v : f) v *= s;
    }

  private:
    static void run(Field& f, const Grid& g, int sign) {
        if (f.size() != g.size()) throw ValidationError("field size does not match grid");
        fftw_plan p = plan(g, sign);
        auto* data = reinterpret_cast<fftw_complex*>(f.data());
        fftw_execute_dft(p, data, data);
    }

    static fftw_plan plan(const Grid& g, int sign) {
        static std::mutex mu;
        static std::map<std::pair<std::vector<int>, int>, fftw_plan> cache;
        std::vector<int> dims(g.N.begin(), g.N.begin() + g.axes);
        std::lock_guard<std::mutex> lock(mu);
        auto key = std::make_pair(dims, sign);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        Field scratch(g.size());
        auto* d = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan p = fftw_plan_dft(g.axes, dims.data(), d, d, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!p) throw Error("FFTW planning failed");
        cache.emplace(key, p);
        return p;
    }
};

namespace spectral {

// Multiplies the spectrum by prod_axis (i k_axis)^{order_axis}. Odd derivatives
// zero the Nyquist mode so real data stays real.
inline void apply_derivative(Field& hat, const Grid& g, const std::array<int, 4>& order) {
    std::array<std::vector<cplx>, 4> factor;
    for (int a = 0; a < g.axes; ++a) {
        auto k = g.wavenumbers(a);
        const int o = order[static_cast<std::size_t>(a)];
        factor[static_cast<std::size_t>(a)].resize(k.size());
        for (std::size_t m = 0; m < k.size(); ++m) {
            cplx v = 1;
            for (int r = 0; r < o; ++r) v *= cplx(0, k[m]);
            if (o % 2 == 1 && static_cast<int>(m) == g.N[static_cast<std::size_t>(a)] / 2) v = 0;
            factor[static_cast<std::size_t>(a)][m] = v;
        }
    }
    for (std::size_t p = 0; p < hat.size(); ++p) {
        cplx v = 1;
        for (int a = 0; a < g.axes; ++a)
            if (order[static_cast<std::size_t>(a)]) v *= factor[static_cast<std::size_t>(a)][static_cast<std::size_t>(g.index(p, a))];
        hat[p] *= v;
    }
}

inline Field derivative(const Field& f, const Grid& g, const std::array<int, 4>& order) {
    Field h = f;
    FFT::forward(h, g);
    apply_derivative(h, g, order);
    FFT::inverse(h, g);
    return h;
}

inline Field derivative_from_hat(const Field& hat, const Grid& g, const std::array<int, 4>& order) {
    Field h = hat;
    apply_derivative(h, g, order);
    FFT::inverse(h, g);
    return h;
}

inline std::array<int, 4> axis_order(int axis, int k = 1) {
    std::array<int, 4> o{};
    o[static_cast<std::size_t>(axis)] = k;
    return o;
}

// Ratio of the largest spectral magnitude in the outer eighth of any axis to
// the overall peak.
inline double tail_ratio(const Field& f, const Grid& g) {
    Field h = f;
    FFT::forward(h, g);
    double peak = 0, tail = 0;
    for (std::size_t p = 0; p < h.size(); ++p) {
        double m = std::abs(h[p]);
        peak = std::max(peak, m);
        bool outer = false;
        for (int a = 0; a < g.axes; ++a) {
            int n = g.N[static_cast<std::size_t>(a)];
            int idx = g.index(p, a);
            int mode = idx < n / 2 ? idx : n - idx;
            if (mode > n / 2 - std::max(1, n / 16)) outer = true;
        }
        if (outer) tail = std::max(tail, m);
    }
    return peak > 0 ? tail / peak : 0.0;
}

inline void require_resolved(const Field& f, const Grid& g, double tol, const char* what) {
    double r = tail_ratio(f, g);
    if (r > tol) {
        throw ResolutionError(std::string(what) + " is under-resolved: spectral tail " + format_number(r) + " exceeds " +
                              format_number(tol));
    }
}

}  // namespace spectral

// Evaluates a real expression on every grid point. `slots[a]` names the
// expression variable slot carried by grid axis a.
inline std::vector<double> sample(const sym::Expression& e, const Grid& g, const std::array<int, 4>& slots) {
    if (e.is_constant()) return std::vector<double>(g.size(), e.constant_value());
    std::array<std::vector<double>, sym::kMaxVars> c;
    for (int a = 0; a < g.axes; ++a) c[static_cast<std::size_t>(slots[static_cast<std::size_t>(a)])] = g.coordinates(a);
    for (int v = 0; v < sym::kMaxVars; ++v)
        if (e.depends_on(v) && c[static_cast<std::size_t>(v)].empty())
            throw ValidationError("expression depends on a variable the grid does not carry");
    sym::Program prog(e);
    std::vector<std::vector<double>> out;
    prog.evaluate(detail::spans(c), g.size(), out);
    return std::move(out[0]);
}

// Spatial grid: axis a carries x_{a+1}.
inline std::vector<double> sample_space(const sym::Expression& e, const Grid& g) {
    return sample(e, g, {1, 2, 3, 0});
}

}  // namespace ucont
