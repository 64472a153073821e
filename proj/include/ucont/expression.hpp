#pragma once

// Immutable expression trees over the variables (t, x1, x2, x3) with exact
// symbolic differentiation and a compiled batch evaluator.
//
// Nodes are shared and never mutated, so an Expression is cheap to copy and
// safe to read from several threads. Smart constructors keep a light normal
// form: sums and products are flattened, numeric constants folded, like terms
// and like bases merged, and arguments sorted by a deterministic structural
// order. That is enough for exact cancellation of the identical products that
// appear in commutator expansions; general zero testing is randomized (see
// operators.hpp).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ucont {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace sym {

inline constexpr int kMaxVars = 4;  // slot 0 is t, slots 1..3 are x1..x3
using Point = std::array<double, kMaxVars>;

// A smooth scalar function of one variable whose derivatives are available
// in closed form. Used for time cutoffs that the expression grammar cannot
// spell (piecewise smoothsteps).
class Profile {
  public:
    virtual ~Profile() = default;
    virtual double value(double s, int order) const = 0;
    virtual std::string name() const = 0;
};

enum class Kind : std::uint8_t { Const, Var, Add, Mul, Pow, Exp, Sin, Cos, Atan, Prof };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Kind kind = Kind::Const;
    double value = 0.0;  // Const: the value. Pow: the exponent.
    int index = 0;       // Var: variable slot. Prof: derivative order.
    std::uint8_t vars = 0;  // bitmask of variable slots this node depends on
    std::size_t hash = 0;
    std::vector<NodePtr> args;
    std::shared_ptr<const Profile> profile;
};

namespace detail {

inline std::size_t mix(std::size_t h, std::size_t v) {
    // splitmix-style combine; deterministic across runs
    std::uint64_t x = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return static_cast<std::size_t>(x);
}

inline std::size_t hash_string(const std::string& s) {
    std::size_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline NodePtr finish(Node n) {
    std::size_t h = mix(static_cast<std::size_t>(n.kind) + 1, std::bit_cast<std::uint64_t>(n.value));
    h = mix(h, static_cast<std::size_t>(n.index));
    std::uint8_t vars = 0;
    if (n.kind == Kind::Var) vars = static_cast<std::uint8_t>(1u << n.index);
    for (const auto& a : n.args) {
        h = mix(h, a->hash);
        vars |= a->vars;
    }
    if (n.profile) h = mix(h, hash_string(n.profile->name()));
    n.hash = h;
    n.vars = vars;
    return std::make_shared<const Node>(std::move(n));
}

// Total order used for canonical argument sorting.
inline int compare(const Node& a, const Node& b) {
    if (&a == &b) return 0;
    if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
    if (a.hash != b.hash) return a.hash < b.hash ? -1 : 1;
    if (a.value != b.value) return a.value < b.value ? -1 : 1;
    if (a.index != b.index) return a.index < b.index ? -1 : 1;
    if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
    if (a.profile != b.profile) {
        auto na = a.profile ? a.profile->name() : std::string{};
        auto nb = b.profile ? b.profile->name() : std::string{};
        if (na != nb) return na < nb ? -1 : 1;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        int c = compare(*a.args[i], *b.args[i]);
        if (c != 0) return c;
    }
    return 0;
}

inline bool same(const NodePtr& a, const NodePtr& b) { return compare(*a, *b) == 0; }

inline NodePtr constant(double v) {
    Node n;
    n.kind = Kind::Const;
    n.value = v == 0.0 ? 0.0 : v;  // fold -0
    return finish(std::move(n));
}

inline bool is_const(const NodePtr& p, double v) { return p->kind == Kind::Const && p->value == v; }

NodePtr add(std::vector<NodePtr> terms);
NodePtr mul(std::vector<NodePtr> factors);
NodePtr power(const NodePtr& base, double exponent);
NodePtr unary(Kind k, const NodePtr& arg);

// Splits c * rest, with rest free of a leading numeric factor.
inline std::pair<double, NodePtr> split_coefficient(const NodePtr& p) {
    if (p->kind == Kind::Mul && !p->args.empty() && p->args.front()->kind == Kind::Const) {
        double c = p->args.front()->value;
        if (p->args.size() == 2) return {c, p->args[1]};
        Node rest;
        rest.kind = Kind::Mul;
        rest.args.assign(p->args.begin() + 1, p->args.end());
        return {c, finish(std::move(rest))};
    }
    return {1.0, p};
}

inline NodePtr scaled(double c, const NodePtr& rest) {
    if (c == 0.0) return constant(0.0);
    if (c == 1.0) return rest;
    Node n;
    n.kind = Kind::Mul;
    n.args.push_back(constant(c));
    if (rest->kind == Kind::Mul) {
        n.args.insert(n.args.end(), rest->args.begin(), rest->args.end());
    } else {
        n.args.push_back(rest);
    }
    return finish(std::move(n));
}

inline NodePtr add(std::vector<NodePtr> terms) {
    double c = 0.0;
    double cmag = 0.0;
    std::vector<std::pair<double, NodePtr>> parts;
    std::function<void(const NodePtr&)> collect = [&](const NodePtr& p) {
        if (p->kind == Kind::Add) {
            for (const auto& a : p->args) collect(a);
        } else if (p->kind == Kind::Const) {
            c += p->value;
            cmag = std::max(cmag, std::abs(p->value));
        } else {
            parts.push_back(split_coefficient(p));
        }
    };
    for (const auto& t : terms) collect(t);
    std::sort(parts.begin(), parts.end(),
              [](const auto& a, const auto& b) { return compare(*a.second, *b.second) < 0; });
    std::vector<NodePtr> out;
    if (std::abs(c) > 1e-13 * cmag) out.push_back(constant(c));
    for (std::size_t i = 0; i < parts.size();) {
        double k = parts[i].first;
        double mag = std::abs(k);
        std::size_t j = i + 1;
        while (j < parts.size() && same(parts[j].second, parts[i].second)) {
            k += parts[j].first;
            mag = std::max(mag, std::abs(parts[j++].first));
        }
        // cancellation down to rounding noise counts as exact
        if (std::abs(k) > 1e-13 * mag) out.push_back(scaled(k, parts[i].second));
        i = j;
    }
    if (out.empty()) return constant(0.0);
    if (out.size() == 1) return out.front();
    Node n;
    n.kind = Kind::Add;
    n.args = std::move(out);
    return finish(std::move(n));
}

inline NodePtr mul(std::vector<NodePtr> factors) {
    double c = 1.0;
    std::vector<std::pair<NodePtr, double>> bases;
    std::vector<NodePtr> exponents;
    std::function<void(const NodePtr&)> collect = [&](const NodePtr& p) {
        switch (p->kind) {
            case Kind::Mul:
                for (const auto& a : p->args) collect(a);
                break;
            case Kind::Const:
                c *= p->value;
                break;
            case Kind::Pow:
                bases.emplace_back(p->args[0], p->value);
                break;
            case Kind::Exp:
                exponents.push_back(p->args[0]);
                break;
            default:
                bases.emplace_back(p, 1.0);
        }
    };
    for (const auto& f : factors) collect(f);
    if (c == 0.0) return constant(0.0);
    std::sort(bases.begin(), bases.end(),
              [](const auto& a, const auto& b) { return compare(*a.first, *b.first) < 0; });
    std::vector<NodePtr> out;
    for (std::size_t i = 0; i < bases.size();) {
        double e = bases[i].second;
        std::size_t j = i + 1;
        while (j < bases.size() && same(bases[j].first, bases[i].first)) e += bases[j++].second;
        if (e != 0.0) out.push_back(e == 1.0 ? bases[i].first : power(bases[i].first, e));
        i = j;
    }
    if (!exponents.empty()) {
        NodePtr sum = add(exponents);
        if (sum->kind == Kind::Const) {
            c *= std::exp(sum->value);
        } else {
            out.push_back(unary(Kind::Exp, sum));
        }
    }
    std::sort(out.begin(), out.end(), [](const NodePtr& a, const NodePtr& b) { return compare(*a, *b) < 0; });
    if (out.empty()) return constant(c);
    if (out.size() == 1 && c == 1.0) return out.front();
    Node n;
    n.kind = Kind::Mul;
    if (c != 1.0) n.args.push_back(constant(c));
    n.args.insert(n.args.end(), out.begin(), out.end());
    if (n.args.size() == 1) return n.args.front();
    return finish(std::move(n));
}

inline bool is_integer(double v) { return std::floor(v) == v && std::abs(v) < 1e9; }

inline NodePtr power(const NodePtr& base, double exponent) {
    if (exponent == 0.0) return constant(1.0);
    if (exponent == 1.0) return base;
    if (base->kind == Kind::Const) return constant(std::pow(base->value, exponent));
    if (is_integer(exponent)) {
        if (base->kind == Kind::Pow && is_integer(base->value)) return power(base->args[0], base->value * exponent);
        if (base->kind == Kind::Exp) {
            return unary(Kind::Exp, mul({constant(exponent), base->args[0]}));
        }
        if (base->kind == Kind::Mul) {
            std::vector<NodePtr> fs;
            for (const auto& a : base->args) fs.push_back(power(a, exponent));
            return mul(std::move(fs));
        }
    }
    Node n;
    n.kind = Kind::Pow;
    n.value = exponent;
    n.args = {base};
    return finish(std::move(n));
}

inline NodePtr unary(Kind k, const NodePtr& arg) {
    if (arg->kind == Kind::Const) {
        double v = arg->value;
        switch (k) {
            case Kind::Exp: return constant(std::exp(v));
            case Kind::Sin: return constant(std::sin(v));
            case Kind::Cos: return constant(std::cos(v));
            case Kind::Atan: return constant(std::atan(v));
            default: break;
        }
    }
    Node n;
    n.kind = k;
    n.args = {arg};
    return finish(std::move(n));
}

inline NodePtr profile(std::shared_ptr<const Profile> p, int order, const NodePtr& arg) {
    if (arg->kind == Kind::Const) return constant(p->value(arg->value, order));
    Node n;
    n.kind = Kind::Prof;
    n.index = order;
    n.profile = std::move(p);
    n.args = {arg};
    return finish(std::move(n));
}

inline NodePtr variable(int slot) {
    Node n;
    n.kind = Kind::Var;
    n.index = slot;
    return finish(std::move(n));
}

// Distributes products over sums and multiplies out positive integer powers
// of sums, recursively inside function arguments. Polynomials in the atoms
// (variables, exponentials, trig and profile nodes, negative powers) then have
// a unique representation.
class Expander {
  public:
    NodePtr operator()(const NodePtr& p) {
        auto it = memo_.find(p.get());
        if (it != memo_.end()) return it->second;
        NodePtr r = compute(p);
        memo_.emplace(p.get(), r);
        keep_.push_back(p);
        return r;
    }

  private:
    static std::vector<NodePtr> terms_of(const NodePtr& p) {
        if (p->kind == Kind::Add) return p->args;
        return {p};
    }

    static NodePtr product(const std::vector<NodePtr>& factors) {
        std::vector<NodePtr> acc{constant(1.0)};
        for (const auto& f : factors) {
            std::vector<NodePtr> ts = terms_of(f);
            std::vector<NodePtr> next;
            next.reserve(acc.size() * ts.size());
            for (const auto& a : acc)
                for (const auto& b : ts) next.push_back(mul({a, b}));
            acc = terms_of(add(std::move(next)));
        }
        return add(std::move(acc));
    }

    NodePtr compute(const NodePtr& p) {
        switch (p->kind) {
            case Kind::Const:
            case Kind::Var: return p;
            case Kind::Add: {
                std::vector<NodePtr> ts;
                for (const auto& a : p->args) ts.push_back((*this)(a));
                return add(std::move(ts));
            }
            case Kind::Mul: {
                std::vector<NodePtr> fs;
                for (const auto& a : p->args) fs.push_back((*this)(a));
                return product(fs);
            }
            case Kind::Pow: {
                NodePtr b = (*this)(p->args[0]);
                if (b->kind == Kind::Add && is_integer(p->value) && p->value > 0 && p->value <= 8) {
                    return product(std::vector<NodePtr>(static_cast<std::size_t>(p->value), b));
                }
                NodePtr r = power(b, p->value);
                return r.get() == p.get() ? r : (r->kind == Kind::Pow ? r : (*this)(r));
            }
            case Kind::Prof: return profile(p->profile, p->index, (*this)(p->args[0]));
            default: return unary(p->kind, (*this)(p->args[0]));
        }
    }

    std::unordered_map<const Node*, NodePtr> memo_;
    std::vector<NodePtr> keep_;
};

}  // namespace detail

class Expression {
  public:
    Expression() : node_(detail::constant(0.0)) {}
    Expression(double c) : node_(detail::constant(c)) {}  // NOLINT: implicit numeric literal
    explicit Expression(NodePtr node) : node_(std::move(node)) {}

    static Expression variable(int slot) {
        if (slot < 0 || slot >= kMaxVars) throw Error("variable slot out of range: " + std::to_string(slot));
        return Expression(detail::variable(slot));
    }
    static Expression t() { return variable(0); }
    // Spatial coordinate x_i, 1-based like the grammar.
    static Expression x(int i) { return variable(i); }

    const NodePtr& node() const { return node_; }
    Kind kind() const { return node_->kind; }
    bool is_constant() const { return node_->kind == Kind::Const; }
    bool is_zero() const { return detail::is_const(node_, 0.0); }
    bool is_one() const { return detail::is_const(node_, 1.0); }
    double constant_value() const { return node_->value; }
    bool depends_on(int slot) const { return (node_->vars >> slot) & 1u; }
    std::uint8_t variable_mask() const { return node_->vars; }

    friend Expression operator+(const Expression& a, const Expression& b) {
        return Expression(detail::add({a.node_, b.node_}));
    }
    friend Expression operator-(const Expression& a, const Expression& b) {
        return Expression(detail::add({a.node_, detail::mul({detail::constant(-1.0), b.node_})}));
    }
    friend Expression operator*(const Expression& a, const Expression& b) {
        return Expression(detail::mul({a.node_, b.node_}));
    }
    friend Expression operator/(const Expression& a, const Expression& b) {
        if (b.is_zero()) throw Error("division by the zero expression");
        return Expression(detail::mul({a.node_, detail::power(b.node_, -1.0)}));
    }
    Expression operator-() const { return Expression(detail::mul({detail::constant(-1.0), node_})); }
    Expression& operator+=(const Expression& o) { return *this = *this + o; }
    Expression& operator-=(const Expression& o) { return *this = *this - o; }
    Expression& operator*=(const Expression& o) { return *this = *this * o; }

    friend bool structurally_equal(const Expression& a, const Expression& b) { return detail::same(a.node_, b.node_); }

    Expression derivative(int slot) const;
    Expression derivative(std::span<const int> slots) const {
        Expression e = *this;
        for (int s : slots) e = e.derivative(s);
        return e;
    }

    double evaluate(const Point& p) const;
    std::string to_string() const;

  private:
    NodePtr node_;
};

inline Expression pow(const Expression& b, double e) { return Expression(detail::power(b.node(), e)); }
inline Expression exp(const Expression& a) { return Expression(detail::unary(Kind::Exp, a.node())); }
inline Expression sin(const Expression& a) { return Expression(detail::unary(Kind::Sin, a.node())); }
inline Expression cos(const Expression& a) { return Expression(detail::unary(Kind::Cos, a.node())); }
inline Expression atan(const Expression& a) { return Expression(detail::unary(Kind::Atan, a.node())); }
inline Expression apply_profile(std::shared_ptr<const Profile> p, const Expression& arg, int order = 0) {
    return Expression(detail::profile(std::move(p), order, arg.node()));
}

inline Expression expand(const Expression& e) {
    detail::Expander x;
    return Expression(x(e.node()));
}

inline Expression sum(std::span<const Expression> terms) {
    std::vector<NodePtr> ns;
    ns.reserve(terms.size());
    for (const auto& t : terms) ns.push_back(t.node());
    return Expression(detail::add(std::move(ns)));
}

namespace detail {

class Differentiator {
  public:
    explicit Differentiator(int slot) : slot_(slot) {}

    NodePtr operator()(const NodePtr& p) {
        if (!((p->vars >> slot_) & 1u)) return zero_;
        auto it = memo_.find(p.get());
        if (it != memo_.end()) return it->second;
        NodePtr r = compute(p);
        memo_.emplace(p.get(), r);
        keep_.push_back(p);
        return r;
    }

  private:
    NodePtr compute(const NodePtr& p) {
        switch (p->kind) {
            case Kind::Const: return zero_;
            case Kind::Var: return constant(p->index == slot_ ? 1.0 : 0.0);
            case Kind::Add: {
                std::vector<NodePtr> ts;
                for (const auto& a : p->args) ts.push_back((*this)(a));
                return add(std::move(ts));
            }
            case Kind::Mul: {
                std::vector<NodePtr> ts;
                for (std::size_t i = 0; i < p->args.size(); ++i) {
                    NodePtr d = (*this)(p->args[i]);
                    if (is_const(d, 0.0)) continue;
                    std::vector<NodePtr> fs = p->args;
                    fs[i] = d;
                    ts.push_back(mul(std::move(fs)));
                }
                return add(std::move(ts));
            }
            case Kind::Pow: {
                const NodePtr& b = p->args[0];
                return mul({constant(p->value), power(b, p->value - 1.0), (*this)(b)});
            }
            case Kind::Exp: return mul({p, (*this)(p->args[0])});
            case Kind::Sin: return mul({unary(Kind::Cos, p->args[0]), (*this)(p->args[0])});
            case Kind::Cos: return mul({constant(-1.0), unary(Kind::Sin, p->args[0]), (*this)(p->args[0])});
            case Kind::Atan: {
                const NodePtr& u = p->args[0];
                return mul({(*this)(u), power(add({constant(1.0), power(u, 2.0)}), -1.0)});
            }
            case Kind::Prof: return mul({profile(p->profile, p->index + 1, p->args[0]), (*this)(p->args[0])});
        }
        return zero_;
    }

    int slot_;
    NodePtr zero_ = constant(0.0);
    std::unordered_map<const Node*, NodePtr> memo_;
    std::vector<NodePtr> keep_;
};

}  // namespace detail

inline Expression Expression::derivative(int slot) const {
    if (slot < 0 || slot >= kMaxVars) throw Error("derivative slot out of range");
    detail::Differentiator d(slot);
    return Expression(d(node_));
}

// Flattened evaluation program for a set of expressions sharing subtrees.
// Evaluates in blocks so that memory stays bounded for large point sets.
class Program {
  public:
    Program() = default;
    explicit Program(std::span<const Expression> outputs) {
        std::unordered_map<const Node*, int> slot_of;
        for (const auto& e : outputs) outputs_.push_back(emit(e.node(), slot_of));
    }
    explicit Program(const Expression& e) : Program(std::span<const Expression>(&e, 1)) {}

    std::size_t outputs() const { return outputs_.size(); }
    std::size_t size() const { return code_.size(); }

    // coords[v] holds variable slot v for every point (unused slots may be empty).
    // out[k] receives the values of output k, resized to npts.
    void evaluate(const std::array<std::span<const double>, kMaxVars>& coords, std::size_t npts,
                  std::vector<std::vector<double>>& out) const {
        out.assign(outputs_.size(), std::vector<double>(npts));
        const std::size_t block = std::clamp<std::size_t>(npts, 1, 512);
        std::vector<double> reg(code_.size() * block);
        for (std::size_t start = 0; start < npts; start += block) {
            std::size_t m = std::min(block, npts - start);
            for (std::size_t k = 0; k < code_.size(); ++k) {
                const Instr& ins = code_[k];
                double* r = &reg[k * block];
                auto arg = [&](std::size_t i) { return &reg[static_cast<std::size_t>(ins.args[i]) * block]; };
                switch (ins.kind) {
                    case Kind::Const: std::fill(r, r + m, ins.value); break;
                    case Kind::Var: {
                        const auto& c = coords[static_cast<std::size_t>(ins.index)];
                        if (c.empty()) throw Error("missing coordinate for variable slot " + std::to_string(ins.index));
                        std::copy(c.begin() + static_cast<std::ptrdiff_t>(start),
                                  c.begin() + static_cast<std::ptrdiff_t>(start + m), r);
                        break;
                    }
                    case Kind::Add: {
                        std::copy(arg(0), arg(0) + m, r);
                        for (std::size_t a = 1; a < ins.args.size(); ++a) {
                            const double* s = arg(a);
                            for (std::size_t i = 0; i < m; ++i) r[i] += s[i];
                        }
                        break;
                    }
                    case Kind::Mul: {
                        std::copy(arg(0), arg(0) + m, r);
                        for (std::size_t a = 1; a < ins.args.size(); ++a) {
                            const double* s = arg(a);
                            for (std::size_t i = 0; i < m; ++i) r[i] *= s[i];
                        }
                        break;
                    }
                    case Kind::Pow: {
                        const double* s = arg(0);
                        const double e = ins.value;
                        if (e == 2.0) {
                            for (std::size_t i = 0; i < m; ++i) r[i] = s[i] * s[i];
                        } else if (e == -1.0) {
                            for (std::size_t i = 0; i < m; ++i) r[i] = 1.0 / s[i];
                        } else if (detail::is_integer(e)) {
                            const int ie = static_cast<int>(e);
                            for (std::size_t i = 0; i < m; ++i) r[i] = ipow(s[i], ie);
                        } else {
                            for (std::size_t i = 0; i < m; ++i) r[i] = std::pow(s[i], e);
                        }
                        break;
                    }
                    case Kind::Exp: {
                        const double* s = arg(0);
                        for (std::size_t i = 0; i < m; ++i) r[i] = std::exp(s[i]);
                        break;
                    }
                    case Kind::Sin: {
                        const double* s = arg(0);
                        for (std::size_t i = 0; i < m; ++i) r[i] = std::sin(s[i]);
                        break;
                    }
                    case Kind::Cos: {
                        const double* s = arg(0);
                        for (std::size_t i = 0; i < m; ++i) r[i] = std::cos(s[i]);
                        break;
                    }
                    case Kind::Atan: {
                        const double* s = arg(0);
                        for (std::size_t i = 0; i < m; ++i) r[i] = std::atan(s[i]);
                        break;
                    }
                    case Kind::Prof: {
                        const double* s = arg(0);
                        for (std::size_t i = 0; i < m; ++i) r[i] = ins.profile->value(s[i], ins.index);
                        break;
                    }
                }
            }
            for (std::size_t o = 0; o < outputs_.size(); ++o) {
                const double* r = &reg[static_cast<std::size_t>(outputs_[o]) * block];
                std::copy(r, r + m, out[o].begin() + static_cast<std::ptrdiff_t>(start));
            }
        }
    }

    std::vector<double> evaluate(const Point& p) const {
        std::array<std::span<const double>, kMaxVars> coords;
        for (int v = 0; v < kMaxVars; ++v) coords[static_cast<std::size_t>(v)] = std::span<const double>(&p[static_cast<std::size_t>(v)], 1);
        std::vector<std::vector<double>> out;
        evaluate(coords, 1, out);
        std::vector<double> r;
        for (auto& o : out) r.push_back(o[0]);
        return r;
    }

  private:
    struct Instr {
        Kind kind;
        double value;
        int index;
        std::vector<int> args;
        const Profile* profile;
    };

    static double ipow(double b, int e) {
        bool inv = e < 0;
        unsigned n = static_cast<unsigned>(inv ? -e : e);
        double r = 1.0;
        while (n) {
            if (n & 1u) r *= b;
            b *= b;
            n >>= 1u;
        }
        return inv ? 1.0 / r : r;
    }

    int emit(const NodePtr& p, std::unordered_map<const Node*, int>& slot_of) {
        auto it = slot_of.find(p.get());
        if (it != slot_of.end()) return it->second;
        Instr ins{p->kind, p->value, p->index, {}, p->profile.get()};
        for (const auto& a : p->args) ins.args.push_back(emit(a, slot_of));
        code_.push_back(std::move(ins));
        keep_.push_back(p);
        int slot = static_cast<int>(code_.size()) - 1;
        slot_of.emplace(p.get(), slot);
        return slot;
    }

    std::vector<Instr> code_;
    std::vector<int> outputs_;
    std::vector<NodePtr> keep_;
};

inline double Expression::evaluate(const Point& p) const { return Program(*this).evaluate(p)[0]; }

namespace detail {

inline const char* func_name(Kind k) {
    switch (k) {
        case Kind::Exp: return "exp";
        case Kind::Sin: return "sin";
        case Kind::Cos: return "cos";
        case Kind::Atan: return "atan";
        default: return "?";
    }
}

inline std::string number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    std::string s = os.str();
    return s;
}

inline void print(const NodePtr& p, std::ostream& os, int parent_prec) {
    // precedence: 1 sum, 2 product, 3 power, 4 atom
    switch (p->kind) {
        case Kind::Const: {
            bool neg = p->value < 0;
            if (neg && parent_prec > 1) os << '(';
            os << number(p->value);
            if (neg && parent_prec > 1) os << ')';
            return;
        }
        case Kind::Var:
            if (p->index == 0) os << 't';
            else os << 'x' << p->index;
            return;
        case Kind::Add: {
            if (parent_prec > 1) os << '(';
            for (std::size_t i = 0; i < p->args.size(); ++i) {
                if (i) os << " + ";
                print(p->args[i], os, 1);
            }
            if (parent_prec > 1) os << ')';
            return;
        }
        case Kind::Mul: {
            if (parent_prec > 2) os << '(';
            for (std::size_t i = 0; i < p->args.size(); ++i) {
                if (i) os << '*';
                print(p->args[i], os, 2);
            }
            if (parent_prec > 2) os << ')';
            return;
        }
        case Kind::Pow: {
            if (is_integer(p->value) && p->value < 0) {
                if (parent_prec > 2) os << '(';
                os << "1/";
                if (p->value == -1.0) {
                    print(p->args[0], os, 4);
                } else {
                    print(p->args[0], os, 4);
                    os << '^' << static_cast<long long>(-p->value);
                }
                if (parent_prec > 2) os << ')';
                return;
            }
            print(p->args[0], os, 4);
            os << '^';
            if (is_integer(p->value)) os << static_cast<long long>(p->value);
            else os << '(' << number(p->value) << ')';
            return;
        }
        case Kind::Prof:
            os << p->profile->name();
            if (p->index) os << "^(" << p->index << ")";
            os << '(';
            print(p->args[0], os, 0);
            os << ')';
            return;
        default:
            os << func_name(p->kind) << '(';
            print(p->args[0], os, 0);
            os << ')';
            return;
    }
}

}  // namespace detail

inline std::string Expression::to_string() const {
    std::ostringstream os;
    detail::print(node_, os, 0);
    return os.str();
}

// Complex-valued expression held as a pair of real expressions.
struct ComplexExpr {
    Expression re;
    Expression im;

    ComplexExpr() = default;
    ComplexExpr(Expression r, Expression i = Expression(0.0)) : re(std::move(r)), im(std::move(i)) {}  // NOLINT
    static ComplexExpr imag(const Expression& i) { return {Expression(0.0), i}; }

    bool is_zero() const { return re.is_zero() && im.is_zero(); }

    friend ComplexExpr operator+(const ComplexExpr& a, const ComplexExpr& b) { return {a.re + b.re, a.im + b.im}; }
    friend ComplexExpr operator-(const ComplexExpr& a, const ComplexExpr& b) { return {a.re - b.re, a.im - b.im}; }
    friend ComplexExpr operator*(const ComplexExpr& a, const ComplexExpr& b) {
        if (a.im.is_zero() && b.im.is_zero()) return {a.re * b.re, Expression(0.0)};
        if (a.im.is_zero()) return {a.re * b.re, a.re * b.im};
        if (b.im.is_zero()) return {a.re * b.re, a.im * b.re};
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    ComplexExpr operator-() const { return {-re, -im}; }
    ComplexExpr& operator+=(const ComplexExpr& o) { return *this = *this + o; }

    ComplexExpr derivative(int slot) const { return {re.derivative(slot), im.derivative(slot)}; }

    std::string to_string() const {
        if (im.is_zero()) return re.to_string();
        if (re.is_zero()) return "i*(" + im.to_string() + ")";
        return "(" + re.to_string() + ") + i*(" + im.to_string() + ")";
    }
};

}  // namespace sym
}  // namespace ucont
