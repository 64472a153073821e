#pragma once

// Elliptic coefficient data A(x), V(x): symmetric entry tables of symbolic
// expressions plus sampled metrics (ellipticity, |x||grad A| smallness, C^3
// size, sup |V|).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "expression.hpp"

namespace ucont {

class ValidationError : public Error {
  public:
    using Error::Error;
};

// Tensor sample set [lo_i, hi_i]^n with `points` samples per axis, endpoints included.
struct SampleBox {
    int n = 1;
    std::array<double, 3> lo{-1, -1, -1};
    std::array<double, 3> hi{1, 1, 1};
    int points = 64;

    static SampleBox cube(int n, double half_width, int points = 64) {
        SampleBox b;
        b.n = n;
        b.lo.fill(-half_width);
        b.hi.fill(half_width);
        b.points = points;
        return b;
    }

    std::size_t size() const {
        std::size_t s = 1;
        for (int i = 0; i < n; ++i) s *= static_cast<std::size_t>(points);
        return s;
    }

    // Coordinates per variable slot (slot 0 = t stays empty).
    std::array<std::vector<double>, sym::kMaxVars> coordinates() const {
        if (points < 2) throw ValidationError("sample box needs at least 2 points per axis");
        std::array<std::vector<double>, sym::kMaxVars> c;
        const std::size_t total = size();
        for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i + 1)].resize(total);
        c[0].assign(total, 0.0);
        for (std::size_t k = 0; k < total; ++k) {
            std::size_t r = k;
            for (int i = n - 1; i >= 0; --i) {
                std::size_t idx = r % static_cast<std::size_t>(points);
                r /= static_cast<std::size_t>(points);
                double s = static_cast<double>(idx) / (points - 1);
                c[static_cast<std::size_t>(i + 1)][k] = lo[static_cast<std::size_t>(i)] + s * (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]);
            }
        }
        return c;
    }
};

namespace detail {

inline std::array<std::span<const double>, sym::kMaxVars> spans(const std::array<std::vector<double>, sym::kMaxVars>& c) {
    std::array<std::span<const double>, sym::kMaxVars> s;
    for (std::size_t i = 0; i < c.size(); ++i) s[i] = c[i];
    return s;
}

// Randomized equality test on a box: |a-b| <= tol*(1+|a|+|b|) at every probe.
inline bool numerically_equal(const sym::Expression& a, const sym::Expression& b, int n, double tol = 1e-10) {
    if (structurally_equal(a, b)) return true;
    std::array<sym::Expression, 2> e{a, b};
    sym::Program prog(e);
    std::uint64_t state = 0x2545F4914F6CDD1DULL;
    for (int k = 0; k < 64; ++k) {
        sym::Point p{};
        for (int i = 0; i <= n; ++i) {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            p[static_cast<std::size_t>(i)] = -1.5 + 3.0 * static_cast<double>(state >> 11) / 9007199254740992.0;
        }
        auto v = prog.evaluate(p);
        if (std::abs(v[0] - v[1]) > tol * (1 + std::abs(v[0]) + std::abs(v[1]))) return false;
    }
    return true;
}

}  // namespace detail

struct EllipticityBounds {
    double lambda = 0;
    double Lambda = 0;
};

class CoefficientField {
  public:
    CoefficientField() : CoefficientField(identity(1)) {}

    // entries is row-major n*n; V may depend on x only.
    CoefficientField(int n, std::vector<sym::Expression> entries, sym::Expression V = sym::Expression(0.0))
        : n_(n), V_(std::move(V)) {
        if (n < 1 || n > 3) throw ValidationError("dimension must be 1, 2 or 3");
        if (entries.size() != static_cast<std::size_t>(n * n))
            throw ValidationError("coefficient table needs " + std::to_string(n * n) + " entries");
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) a_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = entries[static_cast<std::size_t>(k * n + j)];
        for (int k = 0; k < n; ++k)
            for (int j = k + 1; j < n; ++j)
                if (!detail::numerically_equal(a(k, j), a(j, k), n))
                    throw ValidationError("coefficient table is not symmetric at (" + std::to_string(k + 1) + "," +
                                          std::to_string(j + 1) + ")");
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) check_vars(a(k, j), "a" + std::to_string(k + 1) + std::to_string(j + 1));
        check_vars(V_, "V");
    }

    static CoefficientField identity(int n, sym::Expression V = sym::Expression(0.0)) {
        std::vector<sym::Expression> e(static_cast<std::size_t>(n * n), sym::Expression(0.0));
        for (int i = 0; i < n; ++i) e[static_cast<std::size_t>(i * n + i)] = sym::Expression(1.0);
        return CoefficientField(n, std::move(e), std::move(V));
    }

    int dim() const { return n_; }
    // 0-based entry access
    const sym::Expression& a(int k, int j) const { return a_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]; }
    const sym::Expression& V() const { return V_; }

    bool is_constant() const {
        for (int k = 0; k < n_; ++k)
            for (int j = 0; j < n_; ++j)
                if (!a(k, j).is_constant()) return false;
        return true;
    }

    std::vector<sym::Expression> entries() const {
        std::vector<sym::Expression> e;
        for (int k = 0; k < n_; ++k)
            for (int j = 0; j < n_; ++j) e.push_back(a(k, j));
        return e;
    }

    CoefficientField with_potential(sym::Expression V) const { return CoefficientField(n_, entries(), std::move(V)); }

  private:
    void check_vars(const sym::Expression& e, const std::string& what) const {
        if (e.depends_on(0)) throw ValidationError(what + " must not depend on t");
        for (int i = n_ + 1; i < sym::kMaxVars; ++i)
            if (e.depends_on(i)) throw ValidationError(what + " depends on x" + std::to_string(i) + " beyond dimension");
    }

    int n_ = 1;
    std::array<std::array<sym::Expression, 3>, 3> a_{};
    sym::Expression V_;
};

// Exact sample-wise eigenvalue bounds of A(x) over the box.
inline EllipticityBounds ellipticity_bounds(const CoefficientField& f, const SampleBox& box) {
    const int n = f.dim();
    auto coords = box.coordinates();
    auto entries = f.entries();
    sym::Program prog(entries);
    std::vector<std::vector<double>> vals;
    prog.evaluate(detail::spans(coords), box.size(), vals);
    EllipticityBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3> M(n, n);
    Eigen::SelfAdjointEigenSolver<decltype(M)> es;
    for (std::size_t p = 0; p < box.size(); ++p) {
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) M(k, j) = vals[static_cast<std::size_t>(k * n + j)][p];
        es.compute(M, Eigen::EigenvaluesOnly);
        double lo = es.eigenvalues()(0), hi = es.eigenvalues()(n - 1);
        if (!(lo > 0)) {
            std::ostringstream os;
            os << "coefficient matrix is not positive definite at x = (";
            for (int i = 0; i < n; ++i) os << (i ? ", " : "") << coords[static_cast<std::size_t>(i + 1)][p];
            os << "), smallest eigenvalue " << lo;
            throw ValidationError(os.str());
        }
        b.lambda = std::min(b.lambda, lo);
        b.Lambda = std::max(b.Lambda, hi);
    }
    return b;
}

// sup over the box of |y| * (sum_{l,j,k} |d_l a_jk|^2)^{1/2}, where y ranges over
// the coordinates listed in `slots` (1-based spatial slots) and only those
// derivatives enter. With all slots this is the full |x||grad A| metric.
inline double smallness_over(const CoefficientField& f, const SampleBox& box, const std::vector<int>& slots) {
    const int n = f.dim();
    std::vector<sym::Expression> d;
    for (int l : slots)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) d.push_back(f.a(k, j).derivative(l));
    bool all_zero = true;
    for (const auto& e : d) all_zero = all_zero && e.is_zero();
    if (all_zero) return 0.0;
    auto coords = box.coordinates();
    sym::Program prog(d);
    std::vector<std::vector<double>> vals;
    prog.evaluate(detail::spans(coords), box.size(), vals);
    double sup = 0;
    for (std::size_t p = 0; p < box.size(); ++p) {
        double g2 = 0, r2 = 0;
        for (const auto& v : vals) g2 += v[p] * v[p];
        for (int l : slots) r2 += coords[static_cast<std::size_t>(l)][p] * coords[static_cast<std::size_t>(l)][p];
        sup = std::max(sup, std::sqrt(r2 * g2));
    }
    return sup;
}

inline double decay_smallness(const CoefficientField& f, const SampleBox& box) {
    std::vector<int> all;
    for (int i = 1; i <= f.dim(); ++i) all.push_back(i);
    return smallness_over(f, box, all);
}

// Sampled size of A and its derivatives through order 3: max over |alpha| <= 3
// of sup_x |d^alpha A| (Frobenius in the entries).
inline double c3_norm(const CoefficientField& f, const SampleBox& box) {
    const int n = f.dim();
    double best = 0;
    auto coords = box.coordinates();
    std::vector<std::vector<int>> idx{{}};
    for (int order = 0; order <= 3; ++order) {
        std::vector<std::vector<int>> next;
        for (const auto& mi : idx) {
            std::vector<sym::Expression> e;
            for (const auto& a : f.entries()) e.push_back(a.derivative(std::span<const int>(mi)));
            sym::Program prog(e);
            std::vector<std::vector<double>> vals;
            prog.evaluate(detail::spans(coords), box.size(), vals);
            for (std::size_t p = 0; p < box.size(); ++p) {
                double s = 0;
                for (const auto& v : vals) s += v[p] * v[p];
                best = std::max(best, std::sqrt(s));
            }
            if (order < 3) {
                int start = mi.empty() ? 1 : mi.back();
                for (int l = start; l <= n; ++l) {
                    auto m = mi;
                    m.push_back(l);
                    next.push_back(m);
                }
            }
        }
        idx = std::move(next);
    }
    return best;
}

inline double sup_abs(const sym::Expression& e, const SampleBox& box) {
    if (e.is_constant()) return std::abs(e.constant_value());
    auto coords = box.coordinates();
    sym::Program prog(e);
    std::vector<std::vector<double>> vals;
    prog.evaluate(detail::spans(coords), box.size(), vals);
    double m = 0;
    for (double v : vals[0]) m = std::max(m, std::abs(v));
    return m;
}

struct FieldMetrics {
    EllipticityBounds bounds;
    double smallness = 0;
    double c3 = 0;
    double sup_A = 0;  // sup |A| (operator norm via largest eigenvalue)
    double M1 = 0;     // sup |V|
};

inline FieldMetrics field_metrics(const CoefficientField& f, const SampleBox& box) {
    FieldMetrics m;
    m.bounds = ellipticity_bounds(f, box);
    m.smallness = decay_smallness(f, box);
    m.c3 = c3_norm(f, box);
    m.sup_A = m.bounds.Lambda;
    m.M1 = sup_abs(f.V(), box);
    return m;
}

// Block-structured field diag(a11(x1), Atilde(x')).
class TransversalField {
  public:
    TransversalField(int n, sym::Expression a11, std::vector<sym::Expression> atilde, sym::Expression V = sym::Expression(0.0))
        : n_(n), a11_(std::move(a11)), atilde_(std::move(atilde)), V_(std::move(V)) {
        if (n < 1 || n > 3) throw ValidationError("dimension must be 1, 2 or 3");
        const auto m = static_cast<std::size_t>(n - 1);
        if (atilde_.size() != m * m) throw ValidationError("transversal block needs " + std::to_string(m * m) + " entries");
        for (int i = 0; i <= 3; ++i)
            if (i != 1 && a11_.depends_on(i)) throw ValidationError("a11 must depend on x1 only");
        for (const auto& e : atilde_)
            if (e.depends_on(0) || e.depends_on(1)) throw ValidationError("transversal block must depend on x' only");
        field_ = CoefficientField(n, full_entries(), V_);
    }

    static TransversalField identity(int n) {
        std::vector<sym::Expression> t(static_cast<std::size_t>((n - 1) * (n - 1)), sym::Expression(0.0));
        for (int i = 0; i < n - 1; ++i) t[static_cast<std::size_t>(i * (n - 1) + i)] = sym::Expression(1.0);
        return TransversalField(n, sym::Expression(1.0), std::move(t));
    }

    int dim() const { return n_; }
    const sym::Expression& a11() const { return a11_; }
    const std::vector<sym::Expression>& atilde() const { return atilde_; }
    const sym::Expression& V() const { return V_; }
    const CoefficientField& field() const { return field_; }
    bool a11_constant() const { return a11_.is_constant(); }

    TransversalField with(sym::Expression a11, sym::Expression V) const { return TransversalField(n_, std::move(a11), atilde_, std::move(V)); }

    // sup |x'| |grad_{x'} Atilde| over the box.
    double transversal_smallness(const SampleBox& box) const {
        if (n_ == 1) return 0.0;
        std::vector<int> slots;
        for (int i = 2; i <= n_; ++i) slots.push_back(i);
        return smallness_over(field_, box, slots);
    }

  private:
    std::vector<sym::Expression> full_entries() const {
        std::vector<sym::Expression> e(static_cast<std::size_t>(n_ * n_), sym::Expression(0.0));
        e[0] = a11_;
        for (int k = 1; k < n_; ++k)
            for (int j = 1; j < n_; ++j)
                e[static_cast<std::size_t>(k * n_ + j)] = atilde_[static_cast<std::size_t>((k - 1) * (n_ - 1) + (j - 1))];
        return e;
    }

    int n_;
    sym::Expression a11_;
    std::vector<sym::Expression> atilde_;
    sym::Expression V_;
    CoefficientField field_;
};

}  // namespace ucont
