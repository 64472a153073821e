#pragma once

// Independent assembly of the four pieces of [S, A] from their index formulas
// and the comparison against the machine commutator.
//
// Two variants are kept. `Printed` follows the published display verbatim.
// `Corrected` differs in two places found by this comparison:
//   * first term of T2 carries d^2_{mj}, not d^2_{ml};
//   * T1 needs the extra term -2 a_kj (d_l phi)(d^2_{kj} a_ml) d_m.
// Every tested configuration matches with the corrected variant; the printed
// variant leaves residuals whenever A is not constant.

#include <map>
#include <string>
#include <vector>

#include "operators.hpp"

namespace ucont {

enum class TVariant { Corrected, Printed };

struct TTerms {
    DiffOperator T2, T1, T01, T02;
};

namespace detail {

class DerivCache {
  public:
    explicit DerivCache(sym::Expression e) : base_(std::move(e)) {}
    const sym::Expression& operator()(std::vector<int> s) {
        std::sort(s.begin(), s.end());
        auto it = memo_.find(s);
        if (it != memo_.end()) return it->second;
        sym::Expression d = s.empty() ? base_ : (*this)(std::vector<int>(s.begin(), s.end() - 1)).derivative(s.back());
        return memo_.emplace(std::move(s), std::move(d)).first->second;
    }

  private:
    sym::Expression base_;
    std::map<std::vector<int>, sym::Expression> memo_;
};

}  // namespace detail

inline TTerms t_terms(const CoefficientField& f, const sym::Expression& phi, TVariant variant = TVariant::Corrected) {
    using sym::ComplexExpr;
    using sym::Expression;
    const int n = f.dim();
    detail::DerivCache p(phi);
    std::vector<std::vector<detail::DerivCache>> a;
    for (int k = 0; k < n; ++k) {
        a.emplace_back();
        for (int j = 0; j < n; ++j) a.back().emplace_back(f.a(k, j));
    }
    // a_kj and its derivatives, 1-based indices
    auto A = [&](int k, int j, std::vector<int> d = {}) -> const Expression& {
        return a[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(j - 1)](std::move(d));
    };
    const ComplexExpr imag_unit(Expression(0.0), Expression(1.0));

    TTerms T{DiffOperator(n), DiffOperator(n), DiffOperator(n), DiffOperator(n)};
    auto X = [](int i) { return MultiIndex::x(i); };
    auto XX = [](int i, int j) { return MultiIndex::xx(i, j); };
    const bool printed = variant == TVariant::Printed;

    for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n; ++j)
            for (int m = 1; m <= n; ++m)
                for (int l = 1; l <= n; ++l) {
                    // T2
                    T.T2.add(printed ? XX(m, l) : XX(m, j), Expression(-4.0) * A(k, j) * A(m, l) * p({k, l}));
                    T.T2.add(XX(m, j), Expression(-4.0) * A(k, j) * A(m, l, {k}) * p({l}));
                    T.T2.add(XX(k, j), Expression(2.0) * A(m, l) * A(k, j, {m}) * p({l}));

                    // T1
                    T.T1.add(X(m), Expression(-4.0) * A(k, j) * A(m, l) * p({k, j, l}));
                    T.T1.add(X(m), Expression(-4.0) * A(k, j) * p({k, l}) * A(m, l, {j}));
                    T.T1.add(X(m), Expression(-4.0) * A(m, l) * p({j, l}) * A(k, j, {k}));
                    T.T1.add(X(j), Expression(-2.0) * A(k, j) * p({m, l}) * A(m, l, {k}));
                    T.T1.add(X(m), Expression(-2.0) * p({l}) * A(m, l, {j}) * A(k, j, {k}));
                    T.T1.add(X(j), Expression(-2.0) * A(k, j) * p({l}) * A(m, l, {k, m}));
                    T.T1.add(X(j), Expression(2.0) * A(m, l) * p({l}) * A(k, j, {k, m}));
                    if (!printed) T.T1.add(X(m), Expression(-2.0) * A(k, j) * p({l}) * A(m, l, {k, j}));

                    // T01
                    T.T01.add(MultiIndex{}, Expression(4.0) * A(m, l) * A(k, j) * p({l}) * p({k, m}) * p({j}));
                    T.T01.add(MultiIndex{}, Expression(2.0) * A(m, l) * A(k, j, {m}) * p({l}) * p({k}) * p({j}));

                    // T02, spatial four-index part
                    Expression t02 = -(A(k, j) * A(m, l) * p({k, j, m, l}));
                    t02 -= Expression(2.0) * A(k, j) * p({k, j, l}) * A(m, l, {m});
                    t02 -= Expression(2.0) * A(k, j) * p({k, m, l}) * A(m, l, {j});
                    t02 -= A(k, j, {k}) * p({j, l}) * A(m, l, {m});
                    t02 -= A(k, j, {k}) * p({m, l}) * A(m, l, {j});
                    t02 -= Expression(2.0) * A(k, j) * p({k, l}) * A(m, l, {j, m});
                    t02 -= A(k, j) * p({m, l}) * A(m, l, {k, j});
                    t02 -= A(k, j, {k}) * p({l}) * A(m, l, {j, m});
                    t02 -= A(k, j) * p({l}) * A(m, l, {k, j, m});
                    T.T02.add(MultiIndex{}, t02);
                }
    // terms with fewer free indices
    for (int m = 1; m <= n; ++m)
        for (int l = 1; l <= n; ++l) {
            T.T1.add(X(m), imag_unit * ComplexExpr(Expression(-4.0) * A(m, l) * p({0, l})));
            T.T02.add(MultiIndex{}, imag_unit * ComplexExpr(Expression(-2.0) * p({0, l}) * A(m, l, {m})));
        }
    for (int k = 1; k <= n; ++k)
        for (int j = 1; j <= n; ++j) T.T02.add(MultiIndex{}, imag_unit * ComplexExpr(Expression(-2.0) * A(k, j) * p({0, k, j})));
    T.T02.add(MultiIndex{}, p({0, 0}));
    return T;
}

struct TermResidual {
    std::string name;
    DiffOperator residual;
    bool zero = false;
};

struct TDecompositionReport {
    DiffOperator commutator;
    std::vector<TermResidual> terms;  // T2, T1, T01, T02, total
    bool reconstruction_ok = false;   // S + A equals the composed conjugation
    bool order_collapse_ok = false;   // no spatial order >= 3 in [S, A]
    bool passed() const {
        bool ok = reconstruction_ok && order_collapse_ok;
        for (const auto& t : terms) ok = ok && t.zero;
        return ok;
    }
    std::string mismatch_text() const {
        std::string s;
        for (const auto& t : terms)
            if (!t.zero) s += "[" + t.name + "]\n" + t.residual.to_text();
        return s;
    }
};

// Compares each formula term with the matching piece of the machine commutator:
// T2, T1 with the order-2 and order-1 parts of [S, A]; T01 with [S2, A] where
// S2 = phi_k phi_j a_kj; T02 with the order-0 part of [S - S2, A].
inline TDecompositionReport verify_T_decomposition(const CoefficientField& f, const sym::Expression& phi,
                                                   TVariant variant = TVariant::Corrected) {
    const int n = f.dim();
    Decomposition d = conjugate_decompose(f, phi);
    TDecompositionReport r{commutator(d.S, d.A), {}, false, false};
    r.reconstruction_ok = operators_equal(d.S + d.A, conjugated_operator(f, phi));
    r.order_collapse_ok = r.commutator.spatial_order() <= 2 && r.commutator.time_order() <= 0;

    DiffOperator S2 = DiffOperator::multiply(n, d.S.coefficient(MultiIndex{}));
    DiffOperator S0 = d.S - S2;
    DiffOperator c01 = commutator(S2, d.A);
    DiffOperator c0 = commutator(S0, d.A);

    TTerms T = t_terms(f, phi, variant);
    auto check = [&](std::string name, const DiffOperator& formula, const DiffOperator& machine) {
        DiffOperator res = (formula - machine).normalized();
        r.terms.push_back({std::move(name), res, res.empty()});
    };
    check("T2", T.T2, r.commutator.spatial_part(2));
    check("T1", T.T1, r.commutator.spatial_part(1));
    check("T01", T.T01, c01);
    check("T02", T.T02, c0.spatial_part(0));
    check("total", T.T2 + T.T1 + T.T01 + T.T02, r.commutator);
    return r;
}

inline TDecompositionReport verify_T_decomposition(const CoefficientField& f, const WeightSpec& w,
                                                   TVariant variant = TVariant::Corrected) {
    return verify_T_decomposition(f, w.phi(f.dim()), variant);
}

}  // namespace ucont
