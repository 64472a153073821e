#pragma once

// Reduction of diag(a11(x1), Atilde(x')) to a11 = 1 by the coordinate change
// dy1/dx1 = a11^{-1/2} and the gauge v = e^{psi} u with psi = (1/4) log(a11/a11(0)).
// With that gauge the first-order term produced by the coordinate change
// cancels and (L + V) becomes d^2/dy1^2 + L' + Vred with
//   Vred = V - a11''/4 + a11'^2/(16 a11)   (= V - psi_y^2 - psi_yy).

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "coefficients.hpp"

namespace ucont {

class QuadratureError : public Error {
  public:
    using Error::Error;
};

struct GaugeOptions {
    double half_width = 8.0;  // x1 range [-half_width, half_width] for the table
    int nodes = 1025;
    double tol = 1e-13;
};

class GaugeReduction {
  public:
    GaugeReduction(const TransversalField& f, const GaugeOptions& opt = {})
        : original_(f), opt_(opt), a_(f.a11()), da_(a_.derivative(1)), dda_(da_.derivative(1)),
          a_prog_(std::vector<sym::Expression>{a_, da_, dda_}) {
        if (opt.nodes < 3 || opt.half_width <= 0) throw ValidationError("gauge table needs nodes >= 3 and positive width");
        xs_.resize(static_cast<std::size_t>(opt.nodes));
        ys_.resize(xs_.size());
        const double h = 2 * opt.half_width / (opt.nodes - 1);
        amin_ = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < xs_.size(); ++i) {
            xs_[i] = -opt.half_width + h * static_cast<double>(i);
            amin_ = std::min(amin_, a11(xs_[i]));
        }
        if (!(amin_ > 0)) throw ValidationError("a11 is not bounded below by a positive constant on the table range");
        a0_ = a11(0.0);
        const std::size_t mid = xs_.size() / 2;
        // node mid sits at x1 = 0 when nodes is odd; otherwise integrate from 0 to it
        ys_[mid] = segment(0.0, xs_[mid]);
        for (std::size_t i = mid + 1; i < xs_.size(); ++i) ys_[i] = ys_[i - 1] + segment(xs_[i - 1], xs_[i]);
        for (std::size_t i = mid; i-- > 0;) ys_[i] = ys_[i + 1] - segment(xs_[i], xs_[i + 1]);
        for (std::size_t i = 1; i < ys_.size(); ++i)
            if (!(ys_[i] > ys_[i - 1])) throw QuadratureError("coordinate map failed to increase strictly");
        std::vector<sym::Expression> table = f.atilde();
        reduced_field_ = TransversalField(f.dim(), sym::Expression(1.0), std::move(table), affine() ? reduced_potential_affine() : sym::Expression(0.0));
        vred_x_ = f.V() - sym::Expression(0.25) * dda_ + sym::Expression(1.0 / 16.0) * da_ * da_ / a_;
    }

    const TransversalField& original() const { return original_; }
    // a11 = 1 by construction; when the map is affine its potential is the
    // reduced potential in y coordinates, otherwise use potential_at().
    const TransversalField& reduced() const { return *reduced_field_; }
    bool affine() const { return a_.is_constant(); }

    double a11(double x1) const { return a_prog_.evaluate({0, x1, 0, 0})[0]; }

    double y_of_x(double x1) const {
        check_range(x1);
        auto i = nearest(x1);
        return ys_[i] + segment(xs_[i], x1);
    }

    // Newton on y(x) - y = 0 with dy/dx = a11^{-1/2}; bracketed by the table.
    double x_of_y(double y) const {
        if (y < ys_.front() || y > ys_.back()) throw ValidationError("y outside the tabulated coordinate range");
        auto it = std::lower_bound(ys_.begin(), ys_.end(), y);
        std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - ys_.begin()));
        double lo = xs_[i - 1], hi = xs_[i];
        double x = lo + (hi - lo) * (y - ys_[i - 1]) / (ys_[i] - ys_[i - 1]);
        for (int k = 0; k < 50; ++k) {
            double r = y_of_x(x) - y;
            double step = r * std::sqrt(a11(x));
            double xn = std::clamp(x - step, lo, hi);
            if (std::abs(xn - x) <= 1e-15 * (1 + std::abs(x))) return xn;
            x = xn;
        }
        return x;
    }

    double psi_at_x(double x1) const { return 0.25 * std::log(a11(x1) / a0_); }
    double psi_at_y(double y1) const { return psi_at_x(x_of_y(y1)); }

    // Reduced potential as a function of the original coordinates.
    const sym::Expression& reduced_potential_x() const { return vred_x_; }
    double potential_at(const sym::Point& y) const {
        sym::Point x = y;
        x[1] = x_of_y(y[1]);
        return vred_x_.evaluate(x);
    }

    const std::vector<double>& table_x() const { return xs_; }
    const std::vector<double>& table_y() const { return ys_; }
    double a11_min() const { return amin_; }

  private:
    double segment(double a, double b) const {
        if (a == b) return 0.0;
        double err = 0;
        auto g = [this](double x) { return 1.0 / std::sqrt(a11(x)); };
        // table segments are short and the integrand smooth: one Kronrod pass
        // (the adaptive estimate floors near 1e-11 and would never meet tol)
        double v = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(g, a, b, 0, opt_.tol, &err);
        if (!std::isfinite(v) || err > 1e-9 * (1 + std::abs(v))) throw QuadratureError("coordinate quadrature did not converge");
        return v;
    }

    std::size_t nearest(double x) const {
        double h = xs_[1] - xs_[0];
        auto i = static_cast<std::ptrdiff_t>(std::llround((x - xs_.front()) / h));
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(xs_.size()) - 1));
    }

    void check_range(double x) const {
        if (x < xs_.front() - 1e-12 || x > xs_.back() + 1e-12) throw ValidationError("x1 outside the tabulated gauge range");
    }

    sym::Expression reduced_potential_affine() const {
        // x1 = sqrt(a) * y1 exactly; substitute by rebuilding V on the scaled variable
        const double s = std::sqrt(a_.constant_value());
        return substitute_x1(original_.V(), s);
    }

    static sym::Expression substitute_x1(const sym::Expression& e, double s);

    TransversalField original_;
    GaugeOptions opt_;
    sym::Expression a_, da_, dda_;
    sym::Program a_prog_;
    std::vector<double> xs_, ys_;
    double amin_ = 0, a0_ = 1;
    std::optional<TransversalField> reduced_field_;
    sym::Expression vred_x_;
};

namespace detail {

inline sym::NodePtr scale_slot(const sym::NodePtr& p, int slot, double s, std::unordered_map<const sym::Node*, sym::NodePtr>& memo) {
    if (!((p->vars >> slot) & 1u)) return p;
    auto it = memo.find(p.get());
    if (it != memo.end()) return it->second;
    sym::NodePtr r;
    using sym::Kind;
    switch (p->kind) {
        case Kind::Var: r = sym::detail::mul({sym::detail::constant(s), p}); break;
        case Kind::Add: {
            std::vector<sym::NodePtr> a;
            for (const auto& c : p->args) a.push_back(scale_slot(c, slot, s, memo));
            r = sym::detail::add(std::move(a));
            break;
        }
        case Kind::Mul: {
            std::vector<sym::NodePtr> a;
            for (const auto& c : p->args) a.push_back(scale_slot(c, slot, s, memo));
            r = sym::detail::mul(std::move(a));
            break;
        }
        case Kind::Pow: r = sym::detail::power(scale_slot(p->args[0], slot, s, memo), p->value); break;
        case Kind::Prof: r = sym::detail::profile(p->profile, p->index, scale_slot(p->args[0], slot, s, memo)); break;
        default: r = sym::detail::unary(p->kind, scale_slot(p->args[0], slot, s, memo)); break;
    }
    memo.emplace(p.get(), r);
    return r;
}

}  // namespace detail

inline sym::Expression GaugeReduction::substitute_x1(const sym::Expression& e, double s) {
    std::unordered_map<const sym::Node*, sym::NodePtr> memo;
    return sym::Expression(detail::scale_slot(e.node(), 1, s, memo));
}

inline GaugeReduction gauge_reduce(const TransversalField& f, const GaugeOptions& opt = {}) { return GaugeReduction(f, opt); }

struct GaugeCheck {
    double max_abs_error = 0;
    double scale = 0;
    double relative() const { return scale > 0 ? max_abs_error / scale : max_abs_error; }
};

// Transports the original operator: for a test function v(y) (an expression in
// slots 1..n read as y coordinates) builds u(x) = e^{-psi(x1)} v(y1(x1), x') and
// evaluates e^{psi}(L + V)u at x by the product and chain rules in x, then
// compares with (d^2/dy1^2 + L' + Vred) v at y(x).
inline GaugeCheck gauge_check(const GaugeReduction& g, const sym::Expression& v, const std::vector<sym::Point>& xs) {
    const auto& f = g.original();
    const int n = f.dim();
    const sym::Expression a = f.a11(), da = a.derivative(1), dda = da.derivative(1);
    const sym::Expression vy = v.derivative(1), vyy = vy.derivative(1);
    // transversal part L'v = sum_{k,j>=2} d_k(at_kj d_j v)
    sym::Expression lt(0.0);
    for (int k = 2; k <= n; ++k)
        for (int j = 2; j <= n; ++j)
            lt += (f.field().a(k - 1, j - 1) * v.derivative(j)).derivative(k);
    std::vector<sym::Expression> outs{v, vy, vyy, lt};
    sym::Program vp(outs);
    std::vector<sym::Expression> aouts{a, da, dda, f.V()};
    sym::Program ap(aouts);
    GaugeCheck r;
    for (const auto& x : xs) {
        sym::Point y = x;
        y[1] = g.y_of_x(x[1]);
        auto V = vp.evaluate(y);  // v, v_y, v_yy, L'v at y
        auto A = ap.evaluate(x);  // a, a', a'', V at x
        const double av = A[0], a1 = A[1], a2 = A[2];
        const double psi = g.psi_at_x(x[1]);
        const double dpsi = a1 / (4 * av);
        const double ddpsi = (a2 * av - a1 * a1) / (4 * av * av);
        const double yp = 1 / std::sqrt(av), ypp = -0.5 * a1 / (av * std::sqrt(av));
        const double e = std::exp(-psi);
        // u, u', u'' by the chain rule
        const double u = e * V[0];
        const double u1 = e * (V[1] * yp - dpsi * V[0]);
        const double u2 = e * (V[2] * yp * yp + V[1] * ypp - 2 * dpsi * V[1] * yp + (dpsi * dpsi - ddpsi) * V[0]);
        const double transported = std::exp(psi) * (a1 * u1 + av * u2 + A[3] * u) + V[3];
        const double reduced = V[2] + V[3] + g.reduced_potential_x().evaluate(x) * V[0];
        r.max_abs_error = std::max(r.max_abs_error, std::abs(transported - reduced));
        r.scale = std::max(r.scale, std::abs(transported));
    }
    return r;
}

}  // namespace ucont
