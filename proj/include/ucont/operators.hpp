#pragma once

// Linear differential operators sum_alpha c_alpha(t,x) D^alpha with symbolic
// complex coefficients, closed under composition (Leibniz rule) and
// commutators, plus the weighted conjugation e^{phi}(i dt + L)e^{-phi} and its
// symmetric/antisymmetric split.

#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coefficients.hpp"

namespace ucont {

class OrderOverflow : public Error {
  public:
    using Error::Error;
};

// (time order, spatial orders x1..x3)
struct MultiIndex {
    std::array<int, sym::kMaxVars> d{};

    static MultiIndex time(int k = 1) {
        MultiIndex m;
        m.d[0] = k;
        return m;
    }
    // spatial derivative in x_i (1-based)
    static MultiIndex x(int i, int k = 1) {
        MultiIndex m;
        m.d[static_cast<std::size_t>(i)] = k;
        return m;
    }
    static MultiIndex xx(int i, int j) {
        MultiIndex m = x(i);
        m.d[static_cast<std::size_t>(j)] += 1;
        return m;
    }

    int t() const { return d[0]; }
    int spatial() const { return d[1] + d[2] + d[3]; }
    int operator[](std::size_t i) const { return d[i]; }

    friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
        MultiIndex r;
        for (std::size_t i = 0; i < r.d.size(); ++i) r.d[i] = a.d[i] + b.d[i];
        return r;
    }
    friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
        // by total order first so printing groups by order
        int oa = a.t() + a.spatial(), ob = b.t() + b.spatial();
        if (oa != ob) return oa > ob;
        return a.d > b.d;
    }
    friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.d == b.d; }

    std::vector<int> slots() const {
        std::vector<int> s;
        for (int i = 0; i < sym::kMaxVars; ++i)
            for (int k = 0; k < d[static_cast<std::size_t>(i)]; ++k) s.push_back(i);
        return s;
    }
};

namespace detail {

inline std::vector<sym::Expression> addends(const sym::Expression& e) {
    if (e.kind() == sym::Kind::Add) {
        std::vector<sym::Expression> r;
        for (const auto& a : e.node()->args) r.emplace_back(a);
        return r;
    }
    return {e};
}


// Deterministic probe points: t in (0.05, 0.95), x in [-1.5, 1.5]^n.
inline const std::vector<sym::Point>& probe_points(int n) {
    static const std::array<std::vector<sym::Point>, 4> sets = [] {
        std::array<std::vector<sym::Point>, 4> s;
        for (int dim = 1; dim <= 3; ++dim) {
            std::uint64_t state = 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(dim);
            auto next = [&state] {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                return static_cast<double>(state >> 11) / 9007199254740992.0;
            };
            for (int k = 0; k < 64; ++k) {
                sym::Point p{};
                p[0] = 0.05 + 0.9 * next();
                for (int i = 1; i <= 3; ++i) p[static_cast<std::size_t>(i)] = i <= dim ? -1.5 + 3.0 * next() : 0.0;
                s[static_cast<std::size_t>(dim)].push_back(p);
            }
        }
        return s;
    }();
    return sets[static_cast<std::size_t>(std::clamp(n, 1, 3))];
}

}  // namespace detail

// Zero test: |sum| <= tol * sum |addends| at 64 probe points (relative to the
// size of the pieces that cancel).
inline bool numerically_zero(const sym::ComplexExpr& c, int n, double tol = 1e-10) {
    if (c.is_zero()) return true;
    std::vector<sym::Expression> parts;
    std::vector<int> owner;  // 0 = real, 1 = imaginary
    for (const auto& a : detail::addends(c.re)) {
        if (!a.is_zero()) parts.push_back(a), owner.push_back(0);
    }
    for (const auto& a : detail::addends(c.im)) {
        if (!a.is_zero()) parts.push_back(a), owner.push_back(1);
    }
    sym::Program prog(parts);
    for (const auto& p : detail::probe_points(n)) {
        auto v = prog.evaluate(p);
        double s[2] = {0, 0}, m[2] = {0, 0};
        for (std::size_t i = 0; i < v.size(); ++i) {
            s[owner[i]] += v[i];
            m[owner[i]] += std::abs(v[i]);
        }
        for (int k = 0; k < 2; ++k) {
            if (!std::isfinite(s[k])) return false;
            if (std::abs(s[k]) > tol * m[k]) return false;
        }
    }
    return true;
}

inline sym::ComplexExpr normalize(const sym::ComplexExpr& c) { return {sym::expand(c.re), sym::expand(c.im)}; }

class DiffOperator {
  public:
    static constexpr int kMaxSpatialOrder = 4;
    static constexpr int kMaxTimeOrder = 2;

    explicit DiffOperator(int n = 1) : n_(n) {
        if (n < 1 || n > 3) throw ValidationError("operator dimension must be 1, 2 or 3");
    }

    static DiffOperator identity(int n) { return multiply(n, sym::ComplexExpr(sym::Expression(1.0))); }
    static DiffOperator multiply(int n, const sym::ComplexExpr& c) {
        DiffOperator d(n);
        d.add(MultiIndex{}, c);
        return d;
    }
    static DiffOperator derivative(int n, const MultiIndex& m, const sym::ComplexExpr& c = sym::ComplexExpr(sym::Expression(1.0))) {
        DiffOperator d(n);
        d.add(m, c);
        return d;
    }
    // L = sum_{k,j} d_k (a_kj d_j), expanded to a_kj d_kj + (d_k a_kj) d_j
    static DiffOperator divergence_form(const CoefficientField& f) {
        const int n = f.dim();
        DiffOperator L(n);
        for (int k = 1; k <= n; ++k)
            for (int j = 1; j <= n; ++j) {
                const auto& a = f.a(k - 1, j - 1);
                L.add(MultiIndex::xx(k, j), a);
                L.add(MultiIndex::x(j), a.derivative(k));
            }
        return L;
    }

    int dim() const { return n_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const std::map<MultiIndex, sym::ComplexExpr>& terms() const { return terms_; }

    sym::ComplexExpr coefficient(const MultiIndex& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? sym::ComplexExpr() : it->second;
    }

    void add(const MultiIndex& m, const sym::ComplexExpr& c) {
        if (c.is_zero()) return;
        for (int i = n_ + 1; i < sym::kMaxVars; ++i)
            if (m.d[static_cast<std::size_t>(i)] != 0) throw ValidationError("derivative index exceeds operator dimension");
        if (m.spatial() > kMaxSpatialOrder || m.t() > kMaxTimeOrder)
            throw OrderOverflow("operator order overflow: time " + std::to_string(m.t()) + ", space " + std::to_string(m.spatial()));
        auto [it, inserted] = terms_.emplace(m, c);
        if (!inserted) {
            it->second = it->second + c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    int spatial_order() const {
        int o = -1;
        for (const auto& [m, c] : terms_) o = std::max(o, m.spatial());
        return o;
    }
    int time_order() const {
        int o = -1;
        for (const auto& [m, c] : terms_) o = std::max(o, m.t());
        return o;
    }

    // Terms with no time derivative and spatial order k.
    DiffOperator spatial_part(int k) const {
        DiffOperator r(n_);
        for (const auto& [m, c] : terms_)
            if (m.t() == 0 && m.spatial() == k) r.terms_.emplace(m, c);
        return r;
    }

    // Expands every coefficient and drops the ones that vanish numerically.
    DiffOperator normalized(double tol = 1e-10) const {
        DiffOperator r(n_);
        for (const auto& [m, c] : terms_) {
            sym::ComplexExpr e = normalize(c);
            if (!numerically_zero(e, n_, tol)) r.terms_.emplace(m, e);
        }
        return r;
    }

    friend DiffOperator operator+(const DiffOperator& a, const DiffOperator& b) {
        check_dims(a, b);
        DiffOperator r = a;
        for (const auto& [m, c] : b.terms_) r.add(m, c);
        return r;
    }
    friend DiffOperator operator-(const DiffOperator& a, const DiffOperator& b) {
        check_dims(a, b);
        DiffOperator r = a;
        for (const auto& [m, c] : b.terms_) r.add(m, -c);
        return r;
    }
    // left multiplication by a function
    friend DiffOperator operator*(const sym::ComplexExpr& f, const DiffOperator& a) {
        DiffOperator r(a.n_);
        for (const auto& [m, c] : a.terms_) r.add(m, f * c);
        return r;
    }

    // Symbolic application to a function of (t, x).
    sym::ComplexExpr apply(const sym::ComplexExpr& f) const {
        sym::ComplexExpr r;
        for (const auto& [m, c] : terms_) {
            auto s = m.slots();
            sym::ComplexExpr d{f.re.derivative(std::span<const int>(s)), f.im.derivative(std::span<const int>(s))};
            r += c * d;
        }
        return r;
    }

    // "coef ⊗ dt^a dx^(m1,...,mn)" per line, in canonical term order.
    std::string to_text() const {
        std::ostringstream os;
        for (const auto& [m, c] : terms_) {
            os << c.to_string() << " ⊗ dt^" << m.t() << " dx^(";
            for (int i = 1; i <= n_; ++i) os << (i > 1 ? "," : "") << m.d[static_cast<std::size_t>(i)];
            os << ")\n";
        }
        return os.str();
    }

  private:
    static void check_dims(const DiffOperator& a, const DiffOperator& b) {
        if (a.n_ != b.n_) throw ValidationError("operator dimensions differ");
    }

    int n_;
    std::map<MultiIndex, sym::ComplexExpr> terms_;
};

namespace detail {

inline long binomial(int n, int k) {
    long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace detail

// P∘Q by the Leibniz rule: c D^a ∘ (d D^b) = sum_{g<=a} C(a,g) c (D^g d) D^{a-g+b}.
inline DiffOperator compose(const DiffOperator& P, const DiffOperator& Q) {
    if (P.dim() != Q.dim()) throw ValidationError("operator dimensions differ");
    DiffOperator r(P.dim());
    std::map<std::pair<const sym::Node*, std::array<int, sym::kMaxVars>>, sym::Expression> cache;
    auto deriv = [&cache](const sym::Expression& e, const std::array<int, sym::kMaxVars>& g) {
        if (e.is_zero()) return e;
        auto key = std::make_pair(e.node().get(), g);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        sym::Expression d = e;
        for (int i = 0; i < sym::kMaxVars; ++i)
            for (int k = 0; k < g[static_cast<std::size_t>(i)]; ++k) d = d.derivative(i);
        cache.emplace(key, d);
        return d;
    };
    for (const auto& [a, c] : P.terms()) {
        for (const auto& [b, d] : Q.terms()) {
            // enumerate gamma <= a
            std::array<int, sym::kMaxVars> g{};
            for (;;) {
                long coef = 1;
                MultiIndex rest;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    coef *= detail::binomial(a.d[i], g[i]);
                    rest.d[i] = a.d[i] - g[i] + b.d[i];
                }
                sym::ComplexExpr dd{deriv(d.re, g), deriv(d.im, g)};
                if (!dd.is_zero()) r.add(rest, sym::ComplexExpr(sym::Expression(static_cast<double>(coef))) * c * dd);
                std::size_t i = 0;
                for (; i < g.size(); ++i) {
                    if (g[i] < a.d[i]) {
                        ++g[i];
                        break;
                    }
                    g[i] = 0;
                }
                if (i == g.size()) break;
            }
        }
    }
    return r;
}

inline DiffOperator commutator(const DiffOperator& S, const DiffOperator& A) {
    return (compose(S, A) - compose(A, S)).normalized();
}

inline bool operators_equal(const DiffOperator& P, const DiffOperator& Q, double tol = 1e-10) {
    return (P - Q).normalized(tol).empty();
}

// Smooth weight phi(t, x) in one of the four supported shapes.
struct WeightSpec {
    enum class Variant { Quadratic, Power, ScaledTime, Translated };

    Variant variant = Variant::Quadratic;
    double beta = 1.0;
    double alpha = 1.0;  // Power: |x|^{2 alpha}
    double R = 1.0;
    sym::Expression profile{0.0};  // time profile for ScaledTime / Translated

    static WeightSpec quadratic(double beta) { return {Variant::Quadratic, beta, 1.0, 1.0, sym::Expression(0.0)}; }
    static WeightSpec power(double beta, double alpha) { return {Variant::Power, beta, alpha, 1.0, sym::Expression(0.0)}; }
    static WeightSpec scaled_time(double beta, double R, sym::Expression profile) {
        return {Variant::ScaledTime, beta, 1.0, R, std::move(profile)};
    }
    static WeightSpec translated(double beta, double R, sym::Expression profile) {
        return {Variant::Translated, beta, 1.0, R, std::move(profile)};
    }

    void validate() const {
        if (!(beta >= 0)) throw ValidationError("weight beta must be nonnegative");
        if (!(R >= 1)) throw ValidationError("weight scale R must satisfy R >= 1");
        if (variant == Variant::Power && !(alpha > 1)) throw ValidationError("power weight needs alpha > 1");
        for (int i = 1; i < sym::kMaxVars; ++i)
            if (profile.depends_on(i)) throw ValidationError("time profile must depend on t only");
    }

    static const char* name(Variant v) {
        switch (v) {
            case Variant::Quadratic: return "quadratic";
            case Variant::Power: return "power";
            case Variant::ScaledTime: return "scaled-time";
            case Variant::Translated: return "translated";
        }
        return "?";
    }

    sym::Expression phi(int n) const {
        validate();
        using sym::Expression;
        Expression r2(0.0);
        for (int i = 1; i <= n; ++i) r2 += sym::pow(Expression::x(i), 2);
        switch (variant) {
            case Variant::Quadratic: return Expression(beta) * r2;
            case Variant::Power: return Expression(beta) * sym::pow(r2, alpha);
            case Variant::ScaledTime: return Expression(beta) * (Expression(1.0 / (R * R)) * r2 + profile);
            case Variant::Translated: {
                Expression s(0.0);
                for (int i = 1; i <= n; ++i) {
                    Expression yi = Expression(1.0 / R) * Expression::x(i);
                    if (i == 1) yi += profile;
                    s += sym::pow(yi, 2);
                }
                return Expression(beta) * s;
            }
        }
        return Expression(0.0);
    }
};

struct Decomposition {
    sym::Expression phi;
    DiffOperator S;
    DiffOperator A;
};

// S and A assembled from their closed forms:
//   S = i dt + a_kj d_kj + (d_k a_kj) d_j + phi_k phi_j a_kj
//   A = -2 phi_l a_ml d_m - phi_l (d_m a_ml) - phi_ml a_ml - i phi_t
inline Decomposition conjugate_decompose(const CoefficientField& f, const sym::Expression& phi) {
    const int n = f.dim();
    for (int i = n + 1; i < sym::kMaxVars; ++i)
        if (phi.depends_on(i)) throw ValidationError("weight depends on x" + std::to_string(i) + " beyond the field dimension");
    using sym::ComplexExpr;
    using sym::Expression;
    DiffOperator S(n), A(n);
    S.add(MultiIndex::time(), ComplexExpr::imag(Expression(1.0)));
    std::vector<Expression> g(static_cast<std::size_t>(n + 1));
    for (int i = 1; i <= n; ++i) g[static_cast<std::size_t>(i)] = phi.derivative(i);
    Expression s0(0.0), a0(0.0);
    for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n; ++j) {
            const Expression& a = f.a(k - 1, j - 1);
            S.add(MultiIndex::xx(k, j), a);
            S.add(MultiIndex::x(j), a.derivative(k));
            s0 += g[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(j)] * a;
        }
    S.add(MultiIndex{}, s0);
    for (int m = 1; m <= n; ++m)
        for (int l = 1; l <= n; ++l) {
            const Expression& a = f.a(m - 1, l - 1);
            A.add(MultiIndex::x(m), Expression(-2.0) * g[static_cast<std::size_t>(l)] * a);
            a0 -= g[static_cast<std::size_t>(l)] * a.derivative(m);
            a0 -= g[static_cast<std::size_t>(l)].derivative(m) * a;
        }
    A.add(MultiIndex{}, ComplexExpr(a0, -phi.derivative(0)));
    return {phi, S, A};
}

inline Decomposition conjugate_decompose(const CoefficientField& f, const WeightSpec& w) {
    return conjugate_decompose(f, w.phi(f.dim()));
}

// e^{phi}(i dt + L)e^{-phi} built by composing e^{phi} d_j e^{-phi} = d_j - phi_j.
inline DiffOperator conjugated_operator(const CoefficientField& f, const sym::Expression& phi) {
    const int n = f.dim();
    using sym::ComplexExpr;
    using sym::Expression;
    auto shifted = [&](int slot) {
        DiffOperator d = DiffOperator::derivative(n, slot == 0 ? MultiIndex::time() : MultiIndex::x(slot));
        d.add(MultiIndex{}, -phi.derivative(slot));
        return d;
    };
    DiffOperator P = ComplexExpr::imag(Expression(1.0)) * shifted(0);
    for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n; ++j)
            P = P + compose(shifted(k), compose(DiffOperator::multiply(n, f.a(k - 1, j - 1)), shifted(j)));
    return P;
}

// Pointwise values of e^{phi}(i dt + L)(e^{-phi} f) by direct symbolic
// differentiation of the product, independent of the operator algebra.
inline sym::ComplexExpr direct_conjugation(const CoefficientField& f, const sym::Expression& phi, const sym::ComplexExpr& u) {
    using sym::ComplexExpr;
    using sym::Expression;
    const int n = f.dim();
    Expression w = sym::exp(-phi), iw = sym::exp(phi);
    ComplexExpr g{w * u.re, w * u.im};
    ComplexExpr r = ComplexExpr(Expression(0.0), Expression(1.0)) * g.derivative(0);
    for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n; ++j) {
            const Expression& a = f.a(k - 1, j - 1);
            ComplexExpr flux{a * g.re.derivative(j), a * g.im.derivative(j)};
            r += flux.derivative(k);
        }
    return {iw * r.re, iw * r.im};
}

}  // namespace ucont
