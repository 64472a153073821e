#pragma once

// Experiment configuration: a flat, sectioned key = value text format.
//
//   # comment
//   kind = "convexity"
//   seed = 7
//   [grid]
//   points = 1024
//   [convexity]
//   betas = [0.05, 0.1, 0.2]
//
// Values are "strings", numbers, true/false, or one-line [arrays] of those.
// Keys before the first section live at the top level. Validation checks
// every key against the schema of the declared kind and reports all
// problems at once, each prefixed with its field path.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "parser.hpp"

namespace ucont {

class ConfigError : public Error {
  public:
    explicit ConfigError(std::vector<std::string> errors) : Error(join(errors)), errors_(std::move(errors)) {}
    const std::vector<std::string>& errors() const { return errors_; }

  private:
    static std::string join(const std::vector<std::string>& e) {
        std::string s;
        for (const auto& x : e) s += (s.empty() ? "" : "\n") + x;
        return s;
    }
    std::vector<std::string> errors_;
};

struct Value {
    enum class Type { String, Number, Bool, Array };
    Type type = Type::Number;
    std::string s;
    double x = 0;
    bool b = false;
    std::vector<Value> items;

    static Value str(std::string v) {
        Value r;
        r.type = Type::String;
        r.s = std::move(v);
        return r;
    }
    static Value num(double v) {
        Value r;
        r.x = v;
        return r;
    }
    static Value boolean(bool v) {
        Value r;
        r.type = Type::Bool;
        r.b = v;
        return r;
    }
    static Value array(std::vector<Value> v) {
        Value r;
        r.type = Type::Array;
        r.items = std::move(v);
        return r;
    }
    static Value nums(const std::vector<double>& v) {
        std::vector<Value> it;
        for (double d : v) it.push_back(num(d));
        return array(std::move(it));
    }
    static Value strs(const std::vector<std::string>& v) {
        std::vector<Value> it;
        for (const auto& d : v) it.push_back(str(d));
        return array(std::move(it));
    }

    std::string text() const {
        switch (type) {
            case Type::String: {
                std::string o = "\"";
                for (char c : s) {
                    if (c == '"' || c == '\\') o += '\\';
                    o += c;
                }
                return o + "\"";
            }
            case Type::Number: return format_number(x);
            case Type::Bool: return b ? "true" : "false";
            case Type::Array: {
                std::string o = "[";
                for (std::size_t i = 0; i < items.size(); ++i) o += (i ? ", " : "") + items[i].text();
                return o + "]";
            }
        }
        return "";
    }
};

inline const char* type_name(Value::Type t) {
    switch (t) {
        case Value::Type::String: return "string";
        case Value::Type::Number: return "number";
        case Value::Type::Bool: return "bool";
        case Value::Type::Array: return "array";
    }
    return "?";
}

// ---------------------------------------------------------------- reader

struct RawEntry {
    std::string path;  // "key" or "section.key"
    Value value;
    int line = 0;
};

namespace detail {

class ValueReader {
  public:
    explicit ValueReader(std::string_view s) : s_(s) {}

    Value read() {
        Value v = value(true);
        skip();
        if (i_ != s_.size()) throw Error("unexpected text after value: '" + std::string(s_.substr(i_)) + "'");
        return v;
    }

  private:
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    Value value(bool allow_array) {
        skip();
        if (i_ >= s_.size()) throw Error("missing value");
        char c = s_[i_];
        if (c == '"') return string();
        if (c == '[') {
            if (!allow_array) throw Error("nested arrays are not supported");
            ++i_;
            std::vector<Value> items;
            skip();
            if (i_ < s_.size() && s_[i_] == ']') {
                ++i_;
                return Value::array({});
            }
            for (;;) {
                items.push_back(value(false));
                skip();
                if (i_ >= s_.size()) throw Error("unterminated array");
                if (s_[i_] == ',') {
                    ++i_;
                    continue;
                }
                if (s_[i_] == ']') {
                    ++i_;
                    return Value::array(std::move(items));
                }
                throw Error("expected ',' or ']' in array");
            }
        }
        std::size_t j = i_;
        while (j < s_.size() && s_[j] != ',' && s_[j] != ']' && !std::isspace(static_cast<unsigned char>(s_[j]))) ++j;
        std::string tok(s_.substr(i_, j - i_));
        i_ = j;
        if (tok == "true") return Value::boolean(true);
        if (tok == "false") return Value::boolean(false);
        double x = 0;
        auto r = std::from_chars(tok.data(), tok.data() + tok.size(), x);
        if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
            throw Error("cannot read value '" + tok + "' (strings need double quotes)");
        return Value::num(x);
    }
    Value string() {
        ++i_;
        std::string o;
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
            o += s_[i_++];
        }
        if (i_ >= s_.size()) throw Error("unterminated string");
        ++i_;
        return Value::str(std::move(o));
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

inline std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

// drops a '#' comment that is not inside a string
inline std::string strip_comment(const std::string& line) {
    bool in = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '\\' && in) {
            ++i;
            continue;
        }
        if (line[i] == '"') in = !in;
        if (line[i] == '#' && !in) return line.substr(0, i);
    }
    return line;
}

inline bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; });
}

}  // namespace detail

inline std::vector<RawEntry> read_config_entries(const std::string& text, std::vector<std::string>& errors) {
    std::vector<RawEntry> out;
    std::istringstream in(text);
    std::string line, section;
    std::map<std::string, int> seen;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        std::string t = detail::trim(detail::strip_comment(line));
        if (t.empty()) continue;
        const std::string where = "line " + std::to_string(no) + ": ";
        if (t.front() == '[') {
            if (t.back() != ']') {
                errors.push_back(where + "malformed section header");
                continue;
            }
            section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
            if (!detail::valid_name(section)) errors.push_back(where + "invalid section name '" + section + "'");
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back(where + "expected 'key = value'");
            continue;
        }
        std::string key = detail::trim(std::string_view(t).substr(0, eq));
        if (!detail::valid_name(key)) {
            errors.push_back(where + "invalid key '" + key + "'");
            continue;
        }
        std::string path = section.empty() ? key : section + "." + key;
        try {
            Value v = detail::ValueReader(std::string_view(t).substr(eq + 1)).read();
            if (seen.count(path)) {
                errors.push_back(path + ": duplicate key (first set on line " + std::to_string(seen[path]) + ")");
                continue;
            }
            seen[path] = no;
            out.push_back({path, std::move(v), no});
        } catch (const Error& e) {
            errors.push_back(path + ": " + e.what() + " (line " + std::to_string(no) + ")");
        }
    }
    return out;
}

// ---------------------------------------------------------------- schema

using KeyCheck = std::function<std::optional<std::string>(const Value&)>;

struct KeySpec {
    std::string path;
    Value::Type type;
    std::optional<Value> def;  // nullopt: required
    KeyCheck check;
    Value::Type item = Value::Type::Number;  // array element type
};

namespace check {

inline KeyCheck positive() {
    return [](const Value& v) -> std::optional<std::string> {
        if (!(v.x > 0)) return "must be positive";
        return std::nullopt;
    };
}
inline KeyCheck nonnegative() {
    return [](const Value& v) -> std::optional<std::string> {
        if (!(v.x >= 0)) return "must be nonnegative";
        return std::nullopt;
    };
}
inline KeyCheck integer(long lo, long hi) {
    return [=](const Value& v) -> std::optional<std::string> {
        if (std::floor(v.x) != v.x) return "must be an integer";
        if (v.x < static_cast<double>(lo) || v.x > static_cast<double>(hi))
            return "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
        return std::nullopt;
    };
}
inline KeyCheck power_of_two(long lo, long hi) {
    return [=](const Value& v) -> std::optional<std::string> {
        if (auto e = integer(lo, hi)(v)) return e;
        long n = static_cast<long>(v.x);
        if ((n & (n - 1)) != 0) return "must be a power of two";
        return std::nullopt;
    };
}
inline KeyCheck one_of(std::vector<std::string> options) {
    return [=](const Value& v) -> std::optional<std::string> {
        if (std::find(options.begin(), options.end(), v.s) != options.end()) return std::nullopt;
        std::string o;
        for (const auto& x : options) o += (o.empty() ? "" : ", ") + x;
        return "must be one of: " + o;
    };
}
inline KeyCheck each(KeyCheck c) {
    return [=](const Value& v) -> std::optional<std::string> {
        for (std::size_t i = 0; i < v.items.size(); ++i)
            if (auto e = c(v.items[i])) return "[" + std::to_string(i) + "] " + *e;
        return std::nullopt;
    };
}
inline KeyCheck nonempty_each(KeyCheck c) {
    return [=](const Value& v) -> std::optional<std::string> {
        if (v.items.empty()) return "must not be empty";
        return each(c)(v);
    };
}
inline KeyCheck weight_scale() {
    return [](const Value& v) -> std::optional<std::string> {
        auto bad = [](double R) { return !(R >= 1); };
        if (v.type == Value::Type::Array) {
            if (v.items.empty()) return "must not be empty";
            for (std::size_t i = 0; i < v.items.size(); ++i)
                if (bad(v.items[i].x))
                    return "[" + std::to_string(i) + "] = " + format_number(v.items[i].x) +
                           " violates R >= 1 (the cubic-regime Carleman estimate holds for R >= 1 only)";
            return std::nullopt;
        }
        if (bad(v.x)) return "= " + format_number(v.x) + " violates R >= 1 (the cubic-regime Carleman estimate holds for R >= 1 only)";
        return std::nullopt;
    };
}

}  // namespace check

inline const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> k{"simulate", "convexity", "carleman-sweep", "symbolic-verify", "subordination",
                                            "poincare", "hardy", "lowerbound-fit", "gauge-reduce"};
    return k;
}

inline std::string kind_summary(const std::string& kind) {
    static const std::map<std::string, std::string> d{
        {"simulate", "propagate a Gaussian packet; optional regularized-flow and decay-schedule checks"},
        {"convexity", "log-convexity of the Gaussian-weighted norm along a flow"},
        {"carleman-sweep", "Carleman inequality slack over random admissible test functions"},
        {"symbolic-verify", "commutator expansion against the four-term formula"},
        {"subordination", "subordination integral against its super-Gaussian target"},
        {"poincare", "weighted Poincare ratio over random band-limited fields"},
        {"hardy", "endpoint Gaussian rate product of free Gaussian flows"},
        {"lowerbound-fit", "annulus mass profile and its exponent fit"},
        {"gauge-reduce", "gauge reduction of a11(x1) to the identity"},
    };
    auto it = d.find(kind);
    return it == d.end() ? "" : it->second;
}

inline std::vector<KeySpec> config_schema(const std::string& kind) {
    using T = Value::Type;
    using namespace check;
    std::vector<KeySpec> s{
        {"kind", T::String, std::nullopt, one_of(experiment_kinds())},
        {"seed", T::Number, Value::num(1), integer(0, 4294967295L)},
        {"output", T::String, Value::str("out/" + kind), nullptr},
        {"tolerances.slack", T::Number, Value::num(1e-6), positive()},
        {"tolerances.convexity_C", T::Number, Value::num(1 + 1e-6), positive()},
        {"tolerances.d2_floor", T::Number, Value::num(1e-3), nonnegative()},
        {"tolerances.symbolic", T::Number, Value::num(1e-10), positive()},
        {"tolerances.identity", T::Number, Value::num(1e-7), positive()},
        {"tolerances.hardy", T::Number, Value::num(1e-8), positive()},
        {"tolerances.fit_residual", T::Number, Value::num(0.05), positive()},
        {"tolerances.refinement", T::Number, Value::num(0.05), positive()},
        {"tolerances.fidelity", T::Number, Value::num(1e-6), positive()},
        {"tolerances.semigroup", T::Number, Value::num(1e-7), positive()},
        {"tolerances.gauge", T::Number, Value::num(1e-6), positive()},
    };
    auto add = [&](std::vector<KeySpec> more) { s.insert(s.end(), more.begin(), more.end()); };
    const std::vector<KeySpec> field{
        {"field.dim", T::Number, Value::num(1), integer(1, 3)},
        {"field.a", T::Array, Value::array({}), nullptr, T::String},
        {"field.V", T::String, Value::str("0"), nullptr},
    };
    const std::vector<KeySpec> transversal{
        {"field.dim", T::Number, Value::num(2), integer(1, 3)},
        {"field.a11", T::String, Value::str("1"), nullptr},
        {"field.atilde", T::Array, Value::array({}), nullptr, T::String},
        {"field.V", T::String, Value::str("0"), nullptr},
    };
    const std::vector<KeySpec> grid{
        {"grid.points", T::Number, Value::num(256), power_of_two(2, 1 << 20)},
        {"grid.half_width", T::Number, Value::num(16), positive()},
    };
    const std::vector<KeySpec> packet{
        {"data.s", T::Array, Value::nums({1, 0}), nullptr},
        {"data.center", T::Array, Value::nums({}), nullptr},
    };
    if (kind == "simulate") {
        add(field);
        add(grid);
        add(packet);
        add({{"simulate.t1", T::Number, Value::num(1), positive()},
             {"simulate.steps", T::Number, Value::num(200), integer(1, 10000000)},
             {"simulate.save_every", T::Number, Value::num(10), integer(0, 10000000)},
             {"simulate.dissipation", T::Array, Value::nums({0, 1}), nullptr},
             {"simulate.beta", T::Number, Value::num(0), nonnegative()},
             {"simulate.checkpoint", T::Bool, Value::boolean(false), nullptr},
             {"simulate.regularize", T::Array, Value::nums({}), each(positive())},
             {"simulate.decay_gamma", T::Number, Value::num(0), nonnegative()}});
    } else if (kind == "convexity") {
        add(field);
        add(grid);
        add(packet);
        add({{"convexity.betas", T::Array, Value::nums({0.05, 0.1, 0.2}), nonempty_each(positive())},
             {"convexity.frames", T::Number, Value::num(65), integer(5, 100000)},
             {"convexity.t1", T::Number, Value::num(1), positive()},
             {"convexity.method", T::String, Value::str("exact"), one_of({"exact", "propagate"})},
             {"convexity.steps", T::Number, Value::num(256), integer(1, 10000000)},
             {"convexity.M1", T::Number, Value::num(0), nonnegative()}});
    } else if (kind == "carleman-sweep") {
        add(transversal);
        add({{"field.a", T::Array, Value::array({}), nullptr, T::String}});
        add({{"carleman.mode", T::String, Value::str("annulus"), one_of({"annulus", "translated"})},
             {"carleman.R", T::Array, Value::nums({1}), weight_scale()},
             {"carleman.beta_rule", T::String, Value::str("threshold"), one_of({"threshold", "frontier", "explicit"})},
             {"carleman.betas", T::Array, Value::nums({}), each(positive())},
             {"carleman.samples", T::Number, Value::num(100), integer(1, 100000)},
             {"carleman.nt", T::Number, Value::num(128), power_of_two(8, 4096)},
             {"carleman.nx", T::Number, Value::num(256), power_of_two(8, 4096)},
             {"carleman.half_width", T::Number, Value::num(8), positive()},
             {"carleman.r0", T::Number, Value::num(1), positive()},
             {"carleman.r1", T::Number, Value::num(0), nonnegative()},
             {"carleman.layer", T::Number, Value::num(1), positive()},
             {"carleman.time_layer", T::Number, Value::num(0.125), positive()},
             {"carleman.noise_modes", T::Number, Value::num(12), integer(0, 1000)},
             {"carleman.C1", T::Number, Value::num(0), nonnegative()},
             {"carleman.C", T::Number, Value::num(1), positive()},
             {"carleman.identity_checks", T::Number, Value::num(2), integer(0, 1000)},
             {"carleman.expected_exponent", T::Number, Value::num(0), nonnegative()}});
    } else if (kind == "symbolic-verify") {
        add(field);
        add({{"weight.variant", T::String, Value::str("quadratic"), one_of({"quadratic", "power", "scaled-time", "translated"})},
             {"weight.beta", T::Number, Value::num(1), nonnegative()},
             {"weight.alpha", T::Number, Value::num(2), positive()},
             {"weight.R", T::Number, Value::num(1), weight_scale()},
             {"weight.profile", T::String, Value::str("0"), nullptr},
             {"symbolic.printed_variant", T::Bool, Value::boolean(false), nullptr}});
    } else if (kind == "subordination") {
        add({{"subordination.p", T::Number, Value::num(1.5), nullptr},
             {"subordination.kappa", T::Number, Value::num(10), positive()},
             {"subordination.lambda0", T::Number, Value::num(1), positive()},
             {"subordination.r_min", T::Number, Value::num(0.1), positive()},
             {"subordination.r_max", T::Number, Value::num(10), positive()},
             {"subordination.count", T::Number, Value::num(20), integer(1, 100000)},
             {"subordination.normalize", T::Bool, Value::boolean(false), nullptr},
             {"subordination.band_max", T::Number, Value::num(0), nonnegative()}});
    } else if (kind == "poincare") {
        add({{"poincare.dim", T::Number, Value::num(2), integer(1, 3)},
             {"poincare.radii", T::Array, Value::nums({0.5, 1, 2}), nonempty_each(positive())},
             {"poincare.samples", T::Number, Value::num(200), integer(1, 100000)},
             {"poincare.points", T::Number, Value::num(64), power_of_two(8, 4096)},
             {"poincare.refine", T::Bool, Value::boolean(true), nullptr},
             {"poincare.C", T::Number, Value::num(0), nonnegative()}});
    } else if (kind == "hardy") {
        add({{"hardy.s", T::Array, Value::nums({1, 0.5, 0.1, 0.01}), nonempty_each(positive())},
             {"grid.points", T::Number, Value::num(8192), power_of_two(2, 1 << 20)},
             {"grid.half_width", T::Number, Value::num(128), positive()}});
    } else if (kind == "lowerbound-fit") {
        add({{"grid.points", T::Number, Value::num(2048), power_of_two(2, 1 << 20)},
             {"grid.half_width", T::Number, Value::num(32), positive()}});
        add(packet);
        add({{"lowerbound.R", T::Array, Value::nums({2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5, 6}), nonempty_each(positive())},
             {"lowerbound.frames", T::Number, Value::num(65), integer(5, 100000)},
             {"lowerbound.E2", T::Number, Value::num(0), nonnegative()},
             {"lowerbound.expect_p", T::Number, Value::num(0), integer(0, 3)}});
    } else if (kind == "gauge-reduce") {
        add(transversal);
        add({{"gauge.half_width", T::Number, Value::num(8), positive()},
             {"gauge.nodes", T::Number, Value::num(1025), integer(3, 10000001)},
             {"gauge.test_functions", T::Number, Value::num(10), integer(1, 10000)},
             {"gauge.points", T::Number, Value::num(16), integer(1, 100000)}});
    }
    return s;
}

// ---------------------------------------------------------------- config

class ExperimentConfig {
  public:
    const std::string& kind() const { return kind_; }
    std::uint64_t seed() const { return static_cast<std::uint64_t>(num("seed")); }
    const std::string& output() const { return get("output").s; }

    const Value& get(const std::string& path) const {
        auto it = values_.find(path);
        if (it == values_.end()) throw Error("config has no key " + path);
        return it->second;
    }
    bool has(const std::string& path) const { return values_.count(path) > 0; }
    bool explicitly_set(const std::string& path) const { return explicit_.count(path) > 0; }
    double num(const std::string& p) const { return get(p).x; }
    int integer(const std::string& p) const { return static_cast<int>(get(p).x); }
    bool flag(const std::string& p) const { return get(p).b; }
    const std::string& str(const std::string& p) const { return get(p).s; }
    std::vector<double> nums(const std::string& p) const {
        std::vector<double> r;
        for (const auto& v : get(p).items) r.push_back(v.x);
        return r;
    }
    std::vector<std::string> strs(const std::string& p) const {
        std::vector<std::string> r;
        for (const auto& v : get(p).items) r.push_back(v.s);
        return r;
    }

    // Canonical text: top-level keys, then sections in schema order, every
    // key with its effective value.
    std::string normalized() const {
        std::string out;
        std::string section = "";
        for (const auto& k : order_) {
            auto dot = k.find('.');
            std::string sec = dot == std::string::npos ? "" : k.substr(0, dot);
            std::string key = dot == std::string::npos ? k : k.substr(dot + 1);
            if (sec != section) {
                out += "\n[" + sec + "]\n";
                section = sec;
            }
            out += key + " = " + values_.at(k).text() + "\n";
        }
        return out;
    }

    void set(const std::string& path, Value v) {
        if (!values_.count(path)) order_.push_back(path);
        values_[path] = std::move(v);
    }

  private:
    friend ExperimentConfig parse_config(const std::string& text);
    std::string kind_;
    std::map<std::string, Value> values_;
    std::map<std::string, bool> explicit_;
    std::vector<std::string> order_;
};

namespace detail {

inline void check_expression(const std::string& path, const std::string& text, int dim, std::vector<std::string>& errors) {
    try {
        auto e = parse_expression(text, dim);
        if (e.depends_on(0)) errors.push_back(path + ": coefficients must not depend on t");
    } catch (const Error& ex) {
        errors.push_back(path + ": " + ex.what());
    }
}

inline void cross_checks(const ExperimentConfig& c, std::vector<std::string>& errors) {
    const std::string& k = c.kind();
    if (c.has("field.dim")) {
        const int n = c.integer("field.dim");
        if (c.has("field.a")) {
            auto a = c.strs("field.a");
            if (!a.empty() && a.size() != static_cast<std::size_t>(n * n))
                errors.push_back("field.a: needs " + std::to_string(n * n) + " entries for dim " + std::to_string(n) + ", got " +
                                 std::to_string(a.size()));
            for (std::size_t i = 0; i < a.size(); ++i) check_expression("field.a[" + std::to_string(i) + "]", a[i], n, errors);
        }
        if (c.has("field.a11")) {
            check_expression("field.a11", c.str("field.a11"), n, errors);
            auto t = c.strs("field.atilde");
            const std::size_t m = static_cast<std::size_t>((n - 1) * (n - 1));
            if (!t.empty() && t.size() != m)
                errors.push_back("field.atilde: needs " + std::to_string(m) + " entries for dim " + std::to_string(n) + ", got " +
                                 std::to_string(t.size()));
            for (std::size_t i = 0; i < t.size(); ++i) check_expression("field.atilde[" + std::to_string(i) + "]", t[i], n, errors);
        }
        if (c.has("field.V")) check_expression("field.V", c.str("field.V"), n, errors);
        if (k == "carleman-sweep" && c.explicitly_set("field.a") && (c.explicitly_set("field.a11") || c.explicitly_set("field.atilde")))
            errors.push_back("field.a: give either the full table or the a11/atilde blocks, not both");
        if (k == "carleman-sweep" && c.str("carleman.mode") == "translated" && c.explicitly_set("field.a"))
            errors.push_back("field.a: the translated mode needs the block form a11/atilde");
        if (k == "carleman-sweep" && c.str("carleman.mode") == "translated" && n < 2)
            errors.push_back("field.dim: the translated mode needs dim >= 2");
    }
    if (c.has("data.s")) {
        auto s = c.nums("data.s");
        if (s.size() != 2) errors.push_back("data.s: must be [re, im]");
        else if (!(s[0] > 0)) errors.push_back("data.s: real part must be positive");
        auto ctr = c.nums("data.center");
        if (c.has("field.dim") && !ctr.empty() && ctr.size() != static_cast<std::size_t>(c.integer("field.dim")))
            errors.push_back("data.center: needs one coordinate per dimension");
    }
    if (k == "simulate") {
        auto d = c.nums("simulate.dissipation");
        if (d.size() != 2) errors.push_back("simulate.dissipation: must be [a, b]");
        else if (!(d[0] >= 0)) errors.push_back("simulate.dissipation: a must be >= 0 (backward parabolic flow is ill-posed)");
        else if (d[0] == 0 && d[1] == 0) errors.push_back("simulate.dissipation: a and b must not both vanish");
        if (c.num("simulate.decay_gamma") > 0 && d.size() == 2 && d[0] == 0)
            errors.push_back("simulate.decay_gamma: the decay schedule needs a > 0");
    }
    if (k == "carleman-sweep") {
        if (c.str("carleman.beta_rule") == "explicit" && c.get("carleman.betas").items.empty())
            errors.push_back("carleman.betas: must not be empty with beta_rule = \"explicit\"");
    }
    if (k == "subordination") {
        const double p = c.num("subordination.p");
        if (!(p > 1 && p < 2)) errors.push_back("subordination.p: must lie in (1,2)");
        else {
            const double q = p / (p - 1), kmin = 2 * c.num("subordination.lambda0") * std::pow(2 / (q - 2), 1 / q);
            if (!(c.num("subordination.kappa") > kmin))
                errors.push_back("subordination.kappa: not admissible, needs kappa > " + format_number(kmin));
        }
        if (!(c.num("subordination.r_max") >= c.num("subordination.r_min")))
            errors.push_back("subordination.r_max: must be >= r_min");
    }
    if (k == "symbolic-verify") {
        const std::string v = c.str("weight.variant");
        if (v == "power" && !(c.num("weight.alpha") > 1)) errors.push_back("weight.alpha: the power weight needs alpha > 1");
        try {
            auto p = parse_expression(c.str("weight.profile"), 3);
            for (int i = 1; i <= 3; ++i)
                if (p.depends_on(i)) errors.push_back("weight.profile: must depend on t only");
        } catch (const Error& e) {
            errors.push_back(std::string("weight.profile: ") + e.what());
        }
    }
    if (k == "lowerbound-fit")
        for (double R : c.nums("lowerbound.R"))
            if (!(R >= 1)) errors.push_back("lowerbound.R: radii must be >= 1");
}

}  // namespace detail

// Parses and validates; throws ConfigError carrying every problem found.
inline ExperimentConfig parse_config(const std::string& text) {
    std::vector<std::string> errors;
    auto entries = read_config_entries(text, errors);
    ExperimentConfig c;
    const RawEntry* kind = nullptr;
    for (const auto& e : entries)
        if (e.path == "kind") kind = &e;
    if (!kind) {
        errors.insert(errors.begin(), "kind: missing required field (one of the kinds listed by list-kinds)");
        throw ConfigError(errors);
    }
    if (kind->value.type != Value::Type::String) {
        errors.push_back("kind: expected string, got " + std::string(type_name(kind->value.type)));
        throw ConfigError(errors);
    }
    c.kind_ = kind->value.s;
    if (std::find(experiment_kinds().begin(), experiment_kinds().end(), c.kind_) == experiment_kinds().end()) {
        errors.push_back("kind: unknown experiment kind \"" + c.kind_ + "\"");
        throw ConfigError(errors);
    }
    auto schema = config_schema(c.kind_);
    std::map<std::string, const KeySpec*> by_path;
    for (const auto& k : schema) by_path[k.path] = &k;  // later entries override earlier ones
    std::map<std::string, const RawEntry*> given;
    for (const auto& e : entries) {
        if (!by_path.count(e.path)) {
            errors.push_back(e.path + ": unknown key for kind \"" + c.kind_ + "\" (line " + std::to_string(e.line) + ")");
            continue;
        }
        given[e.path] = &e;
    }
    std::vector<std::string> seen;
    for (const auto& k : schema) {
        if (std::find(seen.begin(), seen.end(), k.path) != seen.end()) continue;
        seen.push_back(k.path);
        const KeySpec& spec = *by_path[k.path];
        auto it = given.find(k.path);
        if (it == given.end()) {
            if (!spec.def) {
                errors.push_back(k.path + ": missing required field");
                continue;
            }
            c.set(k.path, *spec.def);
            continue;
        }
        Value v = it->second->value;
        // a scalar where an array is expected is read as a one-element array
        if (spec.type == Value::Type::Array && v.type != Value::Type::Array) v = Value::array({v});
        if (v.type != spec.type) {
            errors.push_back(k.path + ": expected " + type_name(spec.type) + ", got " + type_name(v.type));
            continue;
        }
        if (v.type == Value::Type::Array) {
            bool ok = true;
            for (std::size_t i = 0; i < v.items.size(); ++i)
                if (v.items[i].type != spec.item) {
                    errors.push_back(k.path + "[" + std::to_string(i) + "]: expected " + type_name(spec.item) + ", got " +
                                     type_name(v.items[i].type));
                    ok = false;
                }
            if (!ok) continue;
        }
        if (spec.check)
            if (auto e = spec.check(v)) {
                errors.push_back(k.path + ": " + *e);
                continue;
            }
        c.explicit_[k.path] = true;
        c.set(k.path, std::move(v));
    }
    if (errors.empty()) detail::cross_checks(c, errors);
    if (!errors.empty()) throw ConfigError(errors);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot read config file " + path});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace ucont
