// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// usage: acceptance [config_dir] [output_dir]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "ucont/experiment.hpp"

using namespace ucont;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double v) { return format_number(v); }

class Runner {
  public:
    Runner(fs::path configs, fs::path out) : configs_(std::move(configs)), out_(std::move(out)) {}

    // Runs a shipped config with its output redirected; every asserted check must pass.
    ExperimentReport run(const std::string& name, Outcome& o, const std::string& subdir = "first") {
        auto c = load_config((configs_ / (name + ".cfg")).string());
        const fs::path dir = out_ / subdir / name;
        fs::remove_all(dir);
        c.set("output", Value::str(dir.string()));
        ExperimentReport rep;
        try {
            rep = run_experiment(c);
        } catch (const std::exception& e) {
            o.require(false, name + ": " + e.what());
            return rep;
        }
        for (const auto& ch : rep.checks)
            if (ch.status == "fail") o.require(false, name + ": " + ch.name + " (" + num(ch.value) + " " + ch.relation + " " + num(ch.tolerance) + ")");
        if (subdir == "first") used_.push_back(name);
        return rep;
    }

    const std::vector<std::string>& used() const { return used_; }
    const fs::path& out() const { return out_; }

  private:
    fs::path configs_, out_;
    std::vector<std::string> used_;
};

double metric(const ExperimentReport& r, const std::string& key) {
    auto it = r.metrics.find(key);
    if (it == r.metrics.end() || !it->is_number()) return NAN;
    return it->get<double>();
}

double check_value(const ExperimentReport& r, const std::string& prefix) {
    for (const auto& c : r.checks)
        if (c.name.rfind(prefix, 0) == 0) return c.value;
    return NAN;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Field step_run(const CoefficientField& f, const Grid& g, int steps) {
    PropagateOptions o;
    o.steps = steps;
    GaussianPacket p;
    return propagate({0.0, g, p.sample(g)}, f, DissipationParams::schroedinger(), 1.0, o).frames.back();
}

Outcome c1(Runner& run) {
    Outcome o;
    int ok = 0;
    auto cases = fixtures::t_cases();
    for (const auto& c : cases) {
        auto r = verify_T_decomposition(c.f, c.w);
        if (r.passed() && r.order_collapse_ok) ++ok;
        else o.require(false, c.name);
    }
    o.note(std::to_string(ok) + "/" + std::to_string(cases.size()) + " cases with zero residual");
    run.run("symbolic_quadratic", o);
    run.run("symbolic_translated", o);
    return o;
}

Outcome c2(Runner&) {
    Outcome o;
    for (int n = 1; n <= 3; ++n)
        for (double b : {0.25, 1.0, 1.5}) {
            auto d = conjugate_decompose(CoefficientField::identity(n), WeightSpec::quadratic(b));
            o.require(operators_equal(commutator(d.S, d.A), fixtures::expected_specialization(n, b)),
                      "symbolic n=" + std::to_string(n) + " beta=" + num(b));
        }
    double worst = 0;
    for (double b : {0.25, 0.75, 2.0}) worst = std::max(worst, fixtures::monomial_oracle_error(b, 20, 42));
    o.require(worst < 1e-10, "monomial oracle");
    o.note("symbolic exact for n=1..3, monomial oracle error " + num(worst));
    return o;
}

Outcome c3(Runner&) {
    Outcome o;
    auto s = fixtures::pairing_setup();
    auto f = fixtures::field(1, {"1 + 0.05*exp(-x1^2)"});
    auto setup = carleman_setup(SupportMode::Annulus, f, 2, s.cut, s.grid);
    const double vol = s.grid.cell_volume();
    double ws = 0, wa = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        auto a = make_test_function(SupportMode::Annulus, s.grid, s.cut, 1000 + 2 * k).sample(s.grid);
        auto b = make_test_function(SupportMode::Annulus, s.grid, s.cut, 1001 + 2 * k).sample(s.grid);
        auto d = symmetry_defect(setup, a, b, 3, vol);
        ws = std::max(ws, d.symmetric);
        wa = std::max(wa, d.antisymmetric);
    }
    o.require(ws < 1e-7, "symmetric defect " + num(ws));
    o.require(wa < 1e-7, "antisymmetric defect " + num(wa));
    o.note("100 pairs, worst S defect " + num(ws) + ", worst A defect " + num(wa));
    return o;
}

Outcome c4(Runner& run) {
    Outcome o;
    auto r = run.run("free_flow", o);
    o.note("closed-form error " + num(check_value(r, "closed-form fidelity")));
    Grid g = Grid::cube(1, 1024, 20);
    auto f = CoefficientField::identity(1, parse_expression("0.5*exp(-x1^2)", 1));
    Field ref = step_run(f, g, 6400);
    const double ratio = l2_distance(step_run(f, g, 50), ref, g) / l2_distance(step_run(f, g, 100), ref, g);
    o.require(ratio > 3.6 && ratio < 4.4, "step-halving ratio " + num(ratio));
    o.note("step-halving ratio " + num(ratio));
    return o;
}

Outcome c5(Runner& run) {
    Outcome o;
    auto r = run.run("hardy", o);
    o.note("max oracle error " + num(check_value(r, "rate product matches oracle")));
    return o;
}

Outcome c6(Runner& run) {
    Outcome o;
    run.run("convexity_free", o);
    auto f = fixtures::field(1, {"1 + 0.05*exp(-x1^2)"});
    const double small = decay_smallness(f, SampleBox::cube(1, 24, 2001));
    o.require(small <= 0.05, "smallness " + num(small));
    auto r = run.run("convexity_variable", o);
    o.note("smallness " + num(small) + ", variable min d2 log H " + num(check_value(r, "log-convexity floor")));
    return o;
}

Outcome c7(Runner& run) {
    Outcome o;
    auto r = run.run("regularize", o);
    o.note("semigroup gap " + num(check_value(r, "semigroup composition")));
    return o;
}

Outcome c8(Runner& run) {
    Outcome o;
    auto r = run.run("decay", o);
    o.note("dominance margin " + num(check_value(r, "exact rate dominates")));
    return o;
}

Outcome c9(Runner& run) {
    Outcome o;
    auto f = fixtures::field(1, {"1 + 0.05*exp(-x1^2)"});
    const double small = decay_smallness(f, SampleBox::cube(1, 8, 2001));
    o.require(small <= 0.05, "smallness " + num(small));
    auto a = run.run("carleman_cubic_identity", o);
    auto b = run.run("carleman_cubic_variable", o);
    o.note("min slack A=I " + num(metric(a, "min_slack")) + ", variable " + num(metric(b, "min_slack")));
    return o;
}

Outcome c10(Runner& run) {
    Outcome o;
    auto t = run.run("carleman_translated", o);
    auto c = run.run("carleman_cubic_frontier", o);
    const double et = metric(t, "frontier_exponent"), ec = metric(c, "frontier_exponent");
    o.require(std::abs(et - 2) <= 0.2, "translated exponent " + num(et));
    o.require(std::abs(ec - 3) <= 0.2, "cubic exponent " + num(ec));
    o.note("exponents translated " + num(et) + ", cubic " + num(ec) + ", c0 " + num(metric(t, "c0_fit")) + ", min slack " +
           num(metric(t, "min_slack")));
    return o;
}

Outcome c11(Runner& run) {
    Outcome o;
    auto r = run.run("lowerbound", o);
    o.note("preferred p " + num(metric(r, "preferred_p")));
    return o;
}

Outcome c12(Runner& run) {
    Outcome o;
    auto r = run.run("subordination", o);
    o.note("band " + num(metric(r, "band")));
    return o;
}

Outcome c13(Runner& run) {
    Outcome o;
    auto r = run.run("poincare", o);
    double worst = 0, drift = 0;
    for (const auto& c : r.checks) {
        if (c.name.rfind("ratio below", 0) == 0) worst = std::max(worst, c.value);
        if (c.name.rfind("refinement", 0) == 0) drift = std::max(drift, c.value);
    }
    o.note("worst ratio " + num(worst) + " <= C " + num(metric(r, "C")) + ", refinement change " + num(drift));
    return o;
}

Outcome c14(Runner& run) {
    Outcome o;
    int files = 0;
    for (const auto& name : run.used()) {
        run.run(name, o, "second");
        const fs::path a = run.out() / "first" / name, b = run.out() / "second" / name;
        for (const auto& e : fs::directory_iterator(a)) {
            if (e.path().extension() != ".csv") continue;
            ++files;
            const fs::path other = b / e.path().filename();
            o.require(fs::exists(other) && slurp(e.path()) == slurp(other), name + "/" + e.path().filename().string() + " differs");
        }
    }
    o.note(std::to_string(run.used().size()) + " configs, " + std::to_string(files) + " CSVs compared byte for byte");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path configs = argc > 1 ? argv[1] : UCONT_CONFIG_DIR;
    const fs::path out = argc > 2 ? argv[2] : "acceptance_out";
    Runner run(configs, out);
    struct Criterion {
        int id;
        std::string name;
        double budget_s;
        std::function<Outcome(Runner&)> fn;
    };
    const std::vector<Criterion> all = {
        {1, "symbolic T-decomposition", 30, c1},
        {2, "commutator specialization", 1, c2},
        {3, "symmetric and antisymmetric parts", 60, c3},
        {4, "free-flow fidelity and order", 10, c4},
        {5, "Hardy saturation sweep", 5, c5},
        {6, "log-convexity", 300, c6},
        {7, "regularized-flow convergence", 120, c7},
        {8, "Gaussian decay schedule", 30, c8},
        {9, "Carleman cubic regime", 600, c9},
        {10, "Carleman translated weight", 900, c10},
        {11, "lower-bound exponent fit", 60, c11},
        {12, "subordination band", 30, c12},
        {13, "weighted Poincare ratio", 120, c13},
        {14, "determinism", 0, c14},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn(run);
        } catch (const std::exception& e) {
            o.require(false, e.what());
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0) o.require(dt < c.budget_s, "time budget " + num(c.budget_s) + " s");
        if (!o.pass) ++failed;
        std::printf("%s %2d %-36s %8.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), dt, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed ? 1 : 0;
}
