#pragma once

// Shared cases for the unit suites and the acceptance binary.

#include <array>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ucont/carleman.hpp"
#include "ucont/parser.hpp"
#include "ucont/t_terms.hpp"

namespace fixtures {

using ucont::CoefficientField;
using ucont::WeightSpec;
using ucont::DiffOperator;
using ucont::MultiIndex;
namespace sym = ucont::sym;

inline CoefficientField field(int n, const std::vector<std::string>& a, const std::string& V = "0") {
    std::vector<ucont::sym::Expression> e;
    for (const auto& s : a) e.push_back(ucont::parse_expression(s, n));
    return CoefficientField(n, std::move(e), ucont::parse_expression(V, n));
}

struct TCase {
    std::string name;
    CoefficientField f;
    WeightSpec w;
};

// (field, weight) pairs for the T-decomposition identity.
inline std::vector<TCase> t_cases() {
    using ucont::parse_expression;
    auto prof = [](const char* s) { return parse_expression(s, 3); };
    return {
        {"identity_1d_quadratic", CoefficientField::identity(1), WeightSpec::quadratic(1.5)},
        {"identity_2d_quadratic", CoefficientField::identity(2), WeightSpec::quadratic(0.7)},
        {"identity_3d_quadratic", CoefficientField::identity(3), WeightSpec::quadratic(2)},
        {"const_diag_2d_scaled_time", field(2, {"2", "0", "0", "3"}), WeightSpec::scaled_time(1.2, 4, prof("3*t^2*(1-t)^2"))},
        {"const_diag_3d_scaled_time", field(3, {"1.5", "0", "0", "0", "2", "0", "0", "0", "0.5"}),
         WeightSpec::scaled_time(2, 2, prof("t^2"))},
        {"transversal_2d_translated", field(2, {"1 + x1^2/10", "0", "0", "1 + x2^2/10"}), WeightSpec::translated(2, 4, prof("3*t^2*(1-t)^2"))},
        {"transversal_3d_translated", field(3, {"2 + x1^2/5", "0", "0", "0", "1 + x2^2/8", "x2*x3/20", "0", "x2*x3/20", "1 + x3^2/8"}),
         WeightSpec::translated(1, 2, prof("t*(1-t)"))},
        {"full_2d_quadratic", field(2, {"1 + x1^2/10", "x1*x2/20", "x1*x2/20", "1 + x2^2/10"}), WeightSpec::quadratic(1)},
        {"identity_2d_power", CoefficientField::identity(2), WeightSpec::power(0.5, 2)},
        {"gaussian_bump_1d_scaled_time", field(1, {"1 + 0.05*exp(-x1^2)"}), WeightSpec::scaled_time(3, 2, prof("t^3"))},
    };
}

// Two variable-coefficient fields for the pairing checks: a 1-D Gaussian bump
// and its cubic-regime cutoff on a grid that resolves the transition layers.
struct PairingSetup {
    ucont::CutoffSpec cut;
    ucont::Grid grid;
};

inline PairingSetup pairing_setup() {
    PairingSetup s;
    s.cut.profile = std::make_shared<ucont::PlateauProfile>();
    s.cut.layer = 2;
    s.cut.time_layer = 0.25;
    s.cut.r1 = 7;
    s.grid = ucont::space_time_grid(1, 128, 256, 8);
    return s;
}

// -8 beta Laplacian + 32 beta^3 |x|^2, built term by term.
inline DiffOperator expected_specialization(int n, double b) {
    DiffOperator d(n);
    sym::Expression r2(0.0);
    for (int i = 1; i <= n; ++i) {
        d.add(MultiIndex::x(i, 2), sym::Expression(-8 * b));
        r2 += sym::pow(sym::Expression::x(i), 2);
    }
    d.add(MultiIndex{}, sym::Expression(32 * b * b * b) * r2);
    return d;
}

// x1^p1 x2^p2 x3^p3 and its closed-form Laplacian
struct Monomial {
    std::array<int, 3> p{};
    double value(const sym::Point& x) const {
        double v = 1;
        for (int i = 0; i < 3; ++i) v *= std::pow(x[static_cast<std::size_t>(i + 1)], p[static_cast<std::size_t>(i)]);
        return v;
    }
    double laplacian(const sym::Point& x) const {
        double s = 0;
        for (int i = 0; i < 3; ++i) {
            const int k = p[static_cast<std::size_t>(i)];
            if (k < 2) continue;
            Monomial m = *this;
            m.p[static_cast<std::size_t>(i)] -= 2;
            s += k * (k - 1) * m.value(x);
        }
        return s;
    }
    sym::Expression expr() const {
        sym::Expression e(1.0);
        for (int i = 0; i < 3; ++i)
            if (p[static_cast<std::size_t>(i)]) e *= sym::pow(sym::Expression::x(i + 1), p[static_cast<std::size_t>(i)]);
        return e;
    }
};

// Largest relative mismatch of [S,A] applied to random monomials against the
// closed form, for A = I and phi = b|x|^2 in three dimensions.
inline double monomial_oracle_error(double b, int samples, std::uint64_t seed) {
    auto d = ucont::conjugate_decompose(CoefficientField::identity(3), WeightSpec::quadratic(b));
    std::mt19937_64 rng(seed);
    const sym::Point x{0, 0.6, -0.45, 1.3};
    const double r2 = x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    double worst = 0;
    for (int k = 0; k < samples; ++k) {
        Monomial m{{static_cast<int>(rng() % 5), static_cast<int>(rng() % 4), static_cast<int>(rng() % 3)}};
        sym::ComplexExpr u(m.expr());
        sym::ComplexExpr lhs = d.S.apply(d.A.apply(u)) - d.A.apply(d.S.apply(u));
        const double want = -8 * b * m.laplacian(x) + 32 * b * b * b * r2 * m.value(x);
        const double scale = 1 + std::abs(want);
        worst = std::max({worst, std::abs(lhs.re.evaluate(x) - want) / scale, std::abs(lhs.im.evaluate(x)) / scale});
    }
    return worst;
}

}  // namespace fixtures
