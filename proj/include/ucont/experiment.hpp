#pragma once

// Runs one validated experiment config: builds the objects, executes the
// checks, writes CSV data and a JSON report into the output directory.
// A check is "pass", "fail" or "exploratory"; only asserted failures make the
// run fail.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "appendix.hpp"
#include "carleman.hpp"
#include "config.hpp"
#include "diagnostics.hpp"
#include "evolution.hpp"
#include "gauge.hpp"
#include "t_terms.hpp"

namespace ucont {

inline constexpr const char* kVersion = "0.1.0";

struct Check {
    std::string name;
    std::string status;  // pass, fail, exploratory
    double value = 0;
    double tolerance = 0;
    std::string relation;  // how value is compared with tolerance
    std::string detail;
};

struct ExperimentReport {
    std::string kind;
    std::string config_echo;
    std::uint64_t seed = 0;
    std::vector<Check> checks;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    std::vector<std::string> artifacts;
    double wall_clock = 0;

    bool failed() const {
        for (const auto& c : checks)
            if (c.status == "fail") return true;
        return false;
    }

    // asserted check: value `relation` tolerance must hold
    void assert_check(std::string name, bool ok, double value, double tolerance, std::string relation, std::string detail = "") {
        checks.push_back({std::move(name), ok ? "pass" : "fail", value, tolerance, std::move(relation), std::move(detail)});
    }
    void exploratory(std::string name, double value, double tolerance, std::string relation, std::string detail = "") {
        checks.push_back({std::move(name), "exploratory", value, tolerance, std::move(relation), std::move(detail)});
    }

    nlohmann::ordered_json json() const {
        auto num = [](double v) -> nlohmann::ordered_json {
            if (std::isfinite(v)) return v;
            return format_number(v);
        };
        nlohmann::ordered_json j;
        j["kind"] = kind;
        j["version"] = std::string("ucont ") + kVersion;
        j["seed"] = seed;
        j["status"] = failed() ? "fail" : "pass";
        j["config"] = config_echo;
        auto& cs = j["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : checks)
            cs.push_back({{"name", c.name}, {"status", c.status}, {"value", num(c.value)}, {"tolerance", num(c.tolerance)},
                          {"relation", c.relation}, {"detail", c.detail}});
        j["metrics"] = metrics;
        j["artifacts"] = artifacts;
        j["wall_clock_s"] = wall_clock;
        return j;
    }
};

namespace detail {

inline nlohmann::ordered_json jnum(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

class Outputs {
  public:
    Outputs(std::string dir, ExperimentReport& rep) : dir_(std::move(dir)), rep_(rep) { std::filesystem::create_directories(dir_); }
    std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }
    void csv(const std::string& name, const CsvTable& t) {
        t.write(path(name));
        rep_.artifacts.push_back(path(name));
    }
    void text(const std::string& name, const std::string& s) {
        std::ofstream os(path(name), std::ios::binary);
        os << s;
        rep_.artifacts.push_back(path(name));
    }
    void note(const std::string& name) { rep_.artifacts.push_back(path(name)); }

  private:
    std::string dir_;
    ExperimentReport& rep_;
};

inline sym::Expression expr(const std::string& s, int n) { return parse_expression(s, n); }

inline TransversalField build_transversal(const ExperimentConfig& c) {
    const int n = c.integer("field.dim");
    std::vector<sym::Expression> t;
    for (const auto& s : c.strs("field.atilde")) t.push_back(expr(s, n));
    if (t.empty()) return TransversalField::identity(n).with(expr(c.str("field.a11"), n), expr(c.str("field.V"), n));
    return TransversalField(n, expr(c.str("field.a11"), n), std::move(t), expr(c.str("field.V"), n));
}

inline CoefficientField build_field(const ExperimentConfig& c) {
    const int n = c.integer("field.dim");
    if (c.has("field.a") && !c.get("field.a").items.empty()) {
        std::vector<sym::Expression> a;
        for (const auto& s : c.strs("field.a")) a.push_back(expr(s, n));
        return CoefficientField(n, std::move(a), expr(c.str("field.V"), n));
    }
    if (c.has("field.a11")) return build_transversal(c).field();
    return CoefficientField::identity(n, expr(c.str("field.V"), n));
}

inline bool is_free(const CoefficientField& f) {
    for (int k = 0; k < f.dim(); ++k)
        for (int j = 0; j < f.dim(); ++j)
            if (!f.a(k, j).is_constant() || f.a(k, j).constant_value() != (k == j ? 1.0 : 0.0)) return false;
    return f.V().is_zero();
}

inline GaussianPacket build_packet(const ExperimentConfig& c, int n) {
    GaussianPacket p;
    p.n = n;
    auto s = c.nums("data.s");
    p.s = cplx(s[0], s[1]);
    auto ctr = c.nums("data.center");
    for (std::size_t i = 0; i < ctr.size() && i < 3; ++i) p.center[i] = ctr[i];
    return p;
}

inline void metrics_field(ExperimentReport& rep, const CoefficientField& f, double half_width) {
    auto m = field_metrics(f, SampleBox::cube(f.dim(), half_width, f.dim() == 1 ? 257 : (f.dim() == 2 ? 65 : 17)));
    rep.metrics["field"] = {{"dim", f.dim()}, {"lambda", jnum(m.bounds.lambda)}, {"Lambda", jnum(m.bounds.Lambda)},
                            {"smallness", jnum(m.smallness)}, {"sup_V", jnum(m.M1)}};
}

// ---------------------------------------------------------------- kinds

inline void run_simulate(const ExperimentConfig& c, ExperimentReport& rep, Outputs& out) {
    const CoefficientField f = build_field(c);
    const int n = f.dim();
    Grid g = Grid::cube(n, c.integer("grid.points"), c.num("grid.half_width"));
    GaussianPacket pk = build_packet(c, n);
    auto dv = c.nums("simulate.dissipation");
    DissipationParams d{dv[0], dv[1]};
    PropagateOptions opt;
    opt.steps = c.integer("simulate.steps");
    opt.save_every = c.integer("simulate.save_every");
    const double t1 = c.num("simulate.t1");
    metrics_field(rep, f, g.half_width(0));
    Trajectory tr = propagate({0.0, g, pk.sample(g)}, f, d, t1, opt);
    const double beta = c.num("simulate.beta");
    out.csv("trajectory.csv", trajectory_csv(tr, beta));
    if (c.flag("simulate.checkpoint")) {
        write_checkpoint(tr, out.path("trajectory.uctr"));
        out.note("trajectory.uctr");
    }
    const double m0 = mass(tr.frames.front(), g);
    double drift = 0;
    for (const auto& fr : tr.frames) drift = std::max(drift, std::abs(mass(fr, g) / m0 - 1));
    rep.metrics["mass_drift"] = jnum(drift);
    const double tol = c.num("tolerances.fidelity");
    if (d.a == 0) rep.assert_check("mass conservation", drift <= tol, drift, tol, "<=", "max relative mass drift");
    if (is_free(f)) {
        Field exact = free_flow_closed_form(pk, t1, d.c()).sample(g);
        double err = l2_distance(tr.frames.back(), exact, g) / std::sqrt(mass(exact, g));
        rep.assert_check("closed-form fidelity", err <= tol, err, tol, "<=", "relative L2 error at t1 against the Gaussian closed form");
    }

    auto eps = c.nums("simulate.regularize");
    if (!eps.empty()) {
        std::sort(eps.begin(), eps.end(), std::greater<>());
        CsvTable t({"eps", "distance"});
        std::vector<double> dist;
        for (double e : eps) {
            Trajectory r = regularized_flow(tr, f, e, opt);
            dist.push_back(l2_distance(r.frames.back(), tr.frames.back(), g));
            t.add({e, dist.back()});
        }
        out.csv("regularize.csv", t);
        bool decreasing = true;
        for (std::size_t i = 1; i < dist.size(); ++i) decreasing = decreasing && dist[i] < dist[i - 1];
        rep.assert_check("regularized convergence", decreasing, dist.back(), 0, "strictly decreasing in eps",
                         "endpoint L2 distance to the unregularized trajectory");
        // semigroup: one run to t1 against two runs through t1/2 with the same step size
        Propagator P(f, g, DissipationParams::regularized(eps.back()));
        PropagateOptions o = opt;
        o.steps = 2 * std::max(1, opt.steps / 2);
        o.save_every = 0;
        PropagateOptions half = o;
        half.steps = o.steps / 2;
        Field direct = P.run(tr.frames.front(), 0, t1, o).frames.back();
        Field mid = P.run(tr.frames.front(), 0, t1 / 2, half).frames.back();
        Field twice = P.run(mid, t1 / 2, t1, half).frames.back();
        double gap = l2_distance(direct, twice, g) / std::sqrt(mass(direct, g));
        const double stol = c.num("tolerances.semigroup");
        rep.assert_check("semigroup composition", gap <= stol, gap, stol, "<=", "relative L2 gap, eps = " + format_number(eps.back()));
    }

    const double gamma = c.num("simulate.decay_gamma");
    if (gamma > 0) {
        auto eb = ellipticity_bounds(f, SampleBox::cube(n, g.half_width(0), 65));
        const int frames = std::max<int>(2, static_cast<int>(tr.size()));
        DecaySchedule s = gaussian_decay_schedule(gamma, d, eb.lambda, eb.Lambda, eb.Lambda, 1.0, frames);
        Trajectory src = is_free(f) ? sample_free_flow(pk, g, 0, t1, frames, d.c()) : tr;
        double vsup = sup_abs(f.V(), SampleBox::cube(n, g.half_width(0), 65));
        DecayCompanion comp = decay_companion(src, s, d.a * vsup);
        CsvTable t({"t", "alpha", "weighted", "bound"});
        for (std::size_t k = 0; k < comp.t.size(); ++k) t.add({comp.t[k], comp.alpha[k], comp.weighted[k], comp.bound[k]});
        out.csv("decay.csv", t);
        rep.assert_check("decay schedule finiteness", comp.holds(), comp.worst_ratio, 1 + 1e-9, "<=",
                         "weighted norm at alpha(t) against the Gronwall bound");
        if (is_free(f) && d.b == 0) {
            double worst = -std::numeric_limits<double>::infinity();
            for (double t : comp.t) worst = std::max(worst, s.alpha_at(t) - free_flow_closed_form(pk, t, d.c()).modulus_rate());
            rep.assert_check("exact rate dominates schedule", worst <= 0, worst, 0, "<=", "max of alpha(t) minus the exact rate");
        }
    }
}

inline void run_convexity(const ExperimentConfig& c, ExperimentReport& rep, Outputs& out) {
    const CoefficientField f = build_field(c);
    const int n = f.dim();
    Grid g = Grid::cube(n, c.integer("grid.points"), c.num("grid.half_width"));
    GaussianPacket pk = build_packet(c, n);
    const int frames = c.integer("convexity.frames");
    const double t1 = c.num("convexity.t1");
    metrics_field(rep, f, g.half_width(0));
    Trajectory tr;
    if (c.str("convexity.method") == "exact") {
        if (!is_free(f)) throw ConfigError({"convexity.method: exact sampling needs A = I and V = 0"});
        tr = sample_free_flow(pk, g, 0, t1, frames);
    } else {
        PropagateOptions o;
        o.steps = c.integer("convexity.steps");
        if (o.steps % (frames - 1) != 0)
            throw ConfigError({"convexity.steps: must be a multiple of frames - 1 = " + std::to_string(frames - 1)});
        o.save_every = o.steps / (frames - 1);
        tr = propagate({0.0, g, pk.sample(g)}, f, DissipationParams::schroedinger(), t1, o);
    }
    const double C = c.num("tolerances.convexity_C"), floor = c.num("tolerances.d2_floor"), M1 = c.num("convexity.M1");
    CsvTable summary({"beta", "max_ratio", "min_d2logH", "derivative_ratio"});
    auto& per = rep.metrics["betas"] = nlohmann::ordered_json::array();
    for (double beta : c.nums("convexity.betas")) {
        ConvexityTrace tt = logconvexity_check(tr, beta, M1, C);
        DerivativeBound db = derivative_bound_check(tr, beta, M1);
        const std::string b = format_number(beta);
        out.csv("convexity_beta_" + b + ".csv", tt.csv());
        summary.add({beta, tt.max_ratio, tt.min_d2logH, db.ratio});
        per.push_back({{"beta", beta}, {"max_ratio", jnum(tt.max_ratio)}, {"min_d2logH", jnum(tt.min_d2logH)},
                       {"M2", jnum(tt.M2)}, {"derivative_ratio", jnum(db.ratio)}});
        if (tt.vacuous) {
            rep.exploratory("interpolation bound beta=" + b, 0, C, "<=", "vacuous: zero state at an endpoint");
            continue;
        }
        rep.assert_check("interpolation bound beta=" + b, tt.max_ratio <= C, tt.max_ratio, C, "<=",
                         "H(t) / (e^{M1^2} H0^{1-t} H1^t)");
        rep.assert_check("log-convexity floor beta=" + b, tt.min_d2logH >= -floor, tt.min_d2logH, -floor, ">=",
                         "min second difference of log H");
    }
    out.csv("convexity_summary.csv", summary);
}

inline void run_carleman(const ExperimentConfig& c, ExperimentReport& rep, Outputs& out) {
    SweepConfig s;
    s.mode = c.str("carleman.mode") == "annulus" ? SupportMode::Annulus : SupportMode::Translated;
    s.field = s.mode == SupportMode::Translated ? build_transversal(c).field() : build_field(c);
    if (!s.field.V().is_zero()) throw ConfigError({"field.V: the Carleman inequalities are stated without a potential"});
    s.R_values = c.nums("carleman.R");
    const std::string rule = c.str("carleman.beta_rule");
    s.rule = rule == "explicit" ? BetaRule::Explicit : rule == "frontier" ? BetaRule::Frontier : BetaRule::Threshold;
    s.betas = c.nums("carleman.betas");
    s.samples = c.integer("carleman.samples");
    s.seed = c.seed();
    s.C1 = c.num("carleman.C1");
    s.constant = c.num("carleman.C");
    s.nt = c.integer("carleman.nt");
    s.nx = c.integer("carleman.nx");
    s.half_width = c.num("carleman.half_width");
    s.cutoff.r0 = c.num("carleman.r0");
    s.cutoff.r1 = c.num("carleman.r1");
    s.cutoff.layer = c.num("carleman.layer");
    s.cutoff.time_layer = c.num("carleman.time_layer");
    s.cutoff.noise_modes = c.integer("carleman.noise_modes");
    metrics_field(rep, s.field, s.half_width);
    SweepReport r = carleman_sweep(s);
    out.csv("samples.csv", r.csv());
    CsvTable fr({"R", "commutator_frontier", "inequality_frontier"});
    for (const auto& p : r.frontier) fr.add({p.R, p.commutator, p.inequality});
    out.csv("frontier.csv", fr);
    rep.metrics["min_slack"] = jnum(r.min_slack);
    rep.metrics["frontier_exponent"] = jnum(r.frontier_exponent);
    rep.metrics["frontier_prefactor"] = jnum(r.frontier_prefactor);
    rep.metrics["c0_fit"] = jnum(r.c0);
    rep.metrics["C1_fit"] = jnum(r.c1_fit);
    rep.metrics["phi1_sup"] = jnum(r.phi1_sup);
    rep.metrics["phi2_sup"] = jnum(r.phi2_sup);
    const double tol = c.num("tolerances.slack");
    std::size_t asserted = 0, bad = 0, explored = 0, explored_bad = 0;
    double min_asserted = std::numeric_limits<double>::infinity();
    for (const auto& row : r.rows) {
        if (row.exploratory) {
            ++explored;
            if (!(row.slack >= 1 - tol)) ++explored_bad;
        } else {
            ++asserted;
            min_asserted = std::min(min_asserted, row.slack);
            if (!(row.vacuous || row.slack >= 1 - tol)) ++bad;
        }
    }
    if (asserted)
        rep.assert_check("slack at admissible beta", bad == 0, min_asserted, 1 - tol, ">=",
                         std::to_string(asserted) + " rows, " + std::to_string(bad) + " below");
    if (explored)
        rep.exploratory("slack below threshold", static_cast<double>(explored_bad), 0, "count",
                        std::to_string(explored) + " rows under the threshold, " + std::to_string(explored_bad) + " below 1");
    const int idc = std::min(c.integer("carleman.identity_checks"), s.samples);
    if (idc > 0) {
        Grid g = space_time_grid(s.field.dim(), s.nt, s.nx, s.half_width);
        const double beta = r.rows.front().beta, R = s.R_values.front();
        double worst = 0;
        for (int k = 0; k < idc; ++k) {
            TestFunction tf = make_test_function(s.mode, g, s.cutoff, s.seed + static_cast<std::uint64_t>(k));
            worst = std::max(worst, conjugation_identity_error(tf, g, s.field, beta, R));
        }
        const double itol = c.num("tolerances.identity");
        rep.assert_check("conjugated evaluation identity", worst <= itol, worst, itol, "<=",
                         "S + A against direct conjugation on " + std::to_string(idc) + " samples");
    }
    const double expect = c.num("carleman.expected_exponent");
    if (expect > 0)
        rep.assert_check("frontier exponent", std::abs(r.frontier_exponent - expect) <= 0.2, r.frontier_exponent, 0.2,
                         "|value - " + format_number(expect) + "| <=");
}

inline WeightSpec build_weight(const ExperimentConfig& c) {
    const std::string v = c.str("weight.variant");
    const double b = c.num("weight.beta");
    if (v == "quadratic") return WeightSpec::quadratic(b);
    if (v == "power") return WeightSpec::power(b, c.num("weight.alpha"));
    auto prof = parse_expression(c.str("weight.profile"), 3);
    if (v == "scaled-time") return WeightSpec::scaled_time(b, c.num("weight.R"), prof);
    return WeightSpec::translated(b, c.num("weight.R"), prof);
}

inline void run_symbolic(const ExperimentConfig& c, ExperimentReport& rep, Outputs& out) {
    const CoefficientField f = build_field(c);
    const WeightSpec w = build_weight(c);
    const bool printed = c.flag("symbolic.printed_variant");
    auto r = verify_T_decomposition(f, w, printed ? TVariant::Printed : TVariant::Corrected);
    const double tol = c.num("tolerances.symbolic");
    CsvTable t({"term", "residual_terms", "zero"});
    for (const auto& term : r.terms) {
        const double residual = static_cast<double>(term.residual.size());
        t.add({term.name, static_cast<long long>(term.residual.size()), static_cast<long long>(term.zero ? 1 : 0)});
        if (printed) rep.exploratory("T residual " + term.name, residual, 0, "nonzero terms after normal form (tolerance " + format_number(tol) + ")");
        else rep.assert_check("T residual " + term.name, term.zero, residual, 0, "==", "nonzero terms after normal form (tolerance " + format_number(tol) + ")");
    }
    out.csv("t_terms.csv", t);
    rep.assert_check("S + A reconstruction", r.reconstruction_ok, r.reconstruction_ok ? 0 : 1, 0, "==", "against the composed conjugation");
    rep.assert_check("order collapse", r.order_collapse_ok, r.commutator.spatial_order(), 2, "<=", "spatial order of [S, A]");
    out.text("commutator.txt", r.commutator.to_text());
    if (!printed) out.text("mismatch.txt", r.mismatch_text());
    if (w.variant == WeightSpec::Variant::Quadratic && is_free(f)) {
        const int n = f.dim();
        const double b = w.beta;
        DiffOperator expect(n);
        sym::Expression r2(0.0);
        for (int i = 1; i <= n; ++i) {
            expect.add(MultiIndex::x(i, 2), sym::Expression(-8 * b));
            r2 += sym::pow(sym::Expression::x(i), 2);
        }
        expect.add(MultiIndex{}, sym::Expression(32 * b * b * b) * r2);
        const bool ok = operators_equal(r.commutator, expect, tol);
        rep.assert_check("commutator specialization", ok, ok ? 0 : 1, 0, "==", "[S, A] = -8 beta Laplacian + 32 beta^3 |x|^2");
    }
    rep.metrics["commutator_terms"] = r.commutator.size();
}

inline void run_subordination(const ExperimentConfig& c, ExperimentReport& rep, Outputs& out) {
    SubordinationCase sc;
    sc.p = c.num("subordination.p");
    sc.kappa = c.num("subordination.kappa");
    sc.lambda0 = c.num("subordination.lambda0");
    sc.radii = SubordinationCase::log_spaced(c.num("subordination.r_min"), c.num("subordination.r_max"), c.integer("subordination.count"));
    auto r = subordination_ratio(sc, c.flag("subordination.normalize"));
    out.csv("subordination.csv", r.csv());
    rep.metrics["q"] = sc.q();
    rep.metrics["kappa_min"] = sc.kappa_min();
    rep.metrics["band"] = jnum(r.band());
    rep.metrics["quadrature_tolerance"] = r.tolerance;
    rep.assert_check("integral monotone in r", r.monotone_integral(), 0, 0, "strictly increasing");
    bool finite = true;
    for (const auto& row : r.rows) finite = finite && std::isfinite(row.ratio) && row.ratio > 0;
    rep.assert_check("ratios finite", finite, r.band(), 0, "finite and positive");
    const double bmax = c.num("subordination.band_max");
    if (bmax > 0) rep.assert_check("ratio band", r.band() <= bmax, r.band(), bmax, "<=", "max ratio / min ratio");
}

inline void run_poincare(const ExperimentConfig& c, ExperimentReport& rep, Outputs& out) {
    const int n = c.integer("poincare.dim");
    const double C = c.num("poincare.C") > 0 ? c.num("poincare.C") : poincare_constant(n);
    const int pts = c.integer("poincare.points"), samples = c.integer("poincare.samples");
    const double tol = c.num("tolerances.refinement");
    std::vector<PoincareSearch> coarse;
    CsvTable worst({"r", "points", "worst", "worst_seed"});
    for (double r : c.nums("poincare.radii")) {
        coarse.push_back(poincare_worst_ratio(n, r, pts, samples, c.seed()));
        const auto& a = coarse.back();
        worst.add({r, static_cast<long long>(pts), a.worst, static_cast<long long>(a.worst_seed)});
        const std::string rs = format_number(r);
        rep.assert_check("ratio below C(n) r=" + rs, a.worst <= C, a.worst, C, "<=");
        if (c.flag("poincare.refine")) {
            auto b = poincare_worst_ratio(n, r, 2 * pts, samples, c.seed());
            worst.add({r, static_cast<long long>(2 * pts), b.worst, static_cast<long long>(b.worst_seed)});
            const double rel = std::abs(b.worst / a.worst - 1);
            rep.assert_check("refinement stability r=" + rs, rel <= tol, rel, tol, "<=", "relative change of the worst ratio on grid doubling");
            rep.assert_check("ratio below C(n) refined r=" + rs, b.worst <= C, b.worst, C, "<=");
        }
    }
    out.csv("poincare.csv", poincare_csv(coarse));
    out.csv("poincare_worst.csv", worst);
    rep.metrics["C"] = C;
}

inline void run_hardy(const ExperimentConfig& c, ExperimentReport& rep, Outputs& out) {
    Grid g = Grid::cube(1, c.integer("grid.points"), c.num("grid.half_width"));
    const double tol = c.num("tolerances.hardy");
    CsvTable t({"s", "A", "B", "product", "oracle"});
    double prev = -1, worst = 0, top = 0;
    bool monotone = true;
    auto ss = c.nums("hardy.s");
    for (double s : ss) {
        HardyPoint h = hardy_point(s, g);
        t.add({s, h.A, h.B, h.product, h.oracle});
        worst = std::max(worst, std::abs(h.product - h.oracle));
        top = std::max(top, h.product);
        if (prev >= 0 && !(h.product > prev)) monotone = false;
        prev = h.product;
    }
    out.csv("hardy.csv", t);
    rep.assert_check("rate product matches oracle", worst <= tol, worst, tol, "<=", "max |AB - 1/(16(s^2+1))|");
    rep.assert_check("rate product below 1/16", top <= 1.0 / 16, top, 1.0 / 16, "<=");
    const bool sorted_desc = std::is_sorted(ss.rbegin(), ss.rend());
    if (sorted_desc) rep.assert_check("monotone approach", monotone, prev, 1.0 / 16, "increasing as s decreases");
}

inline void run_lowerbound(const ExperimentConfig& c, ExperimentReport& rep, Outputs& out) {
    Grid g = Grid::cube(1, c.integer("grid.points"), c.num("grid.half_width"));
    GaussianPacket pk = build_packet(c, 1);
    Trajectory tr = sample_free_flow(pk, g, 0, 1, c.integer("lowerbound.frames"));
    AnnulusOptions o;
    o.E2 = c.num("lowerbound.E2");
    auto prof = annulus_mass_profile(tr, c.nums("lowerbound.R"), o);
    out.csv("annulus.csv", prof.csv());
    rep.metrics["label"] = prof.label;
    rep.metrics["core_mass"] = jnum(prof.core_mass);
    if (prof.fits.empty()) {
        rep.exploratory("exponent fit", 0, 0, "none", "degenerate profile");
        return;
    }
    CsvTable f({"p", "C0", "intercept", "relative_residual"});
    for (const auto& fit : prof.fits) f.add({static_cast<long long>(fit.p), fit.C0, fit.intercept, fit.relative_residual});
    out.csv("fits.csv", f);
    rep.metrics["preferred_p"] = prof.preferred;
    const int expect = c.integer("lowerbound.expect_p");
    const double tol = c.num("tolerances.fit_residual");
    const double res = prof.fit(prof.preferred).relative_residual;
    if (expect > 0 && prof.label == "ok") {
        rep.assert_check("preferred exponent", prof.preferred == expect, prof.preferred, expect, "==");
        rep.assert_check("fit residual", res < tol, res, tol, "<");
    } else {
        rep.exploratory("fit residual", res, tol, "<", prof.label);
    }
}

inline void run_gauge(const ExperimentConfig& c, ExperimentReport& rep, Outputs& out) {
    TransversalField f = build_transversal(c);
    const int n = f.dim();
    GaugeOptions o;
    o.half_width = c.num("gauge.half_width");
    o.nodes = c.integer("gauge.nodes");
    GaugeReduction gr = gauge_reduce(f, o);
    CsvTable t({"x1", "y1", "psi"});
    for (int k = 0; k <= 64; ++k) {
        double x = -o.half_width + 2 * o.half_width * k / 64.0;
        t.add({x, gr.y_of_x(x), gr.psi_at_x(x)});
    }
    out.csv("gauge_map.csv", t);
    std::mt19937_64 rng(c.seed());
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
    const double box = 0.5 * o.half_width;
    double worst = 0;
    CsvTable rows({"function", "relative_error"});
    for (int k = 0; k < c.integer("gauge.test_functions"); ++k) {
        using sym::Expression;
        Expression poly(uniform(0.5, 1.5)), r2(0.0);
        for (int i = 1; i <= n; ++i) {
            poly += Expression(uniform(-1, 1)) * Expression::x(i) + Expression(uniform(-0.5, 0.5)) * sym::pow(Expression::x(i), 2);
            r2 += sym::pow(Expression::x(i), 2);
        }
        Expression v = poly * sym::exp(Expression(-uniform(0.1, 0.4)) * r2);
        std::vector<sym::Point> xs;
        for (int p = 0; p < c.integer("gauge.points"); ++p) {
            sym::Point x{0, 0, 0, 0};
            for (int i = 1; i <= n; ++i) x[static_cast<std::size_t>(i)] = uniform(-box, box);
            xs.push_back(x);
        }
        double e = gauge_check(gr, v, xs).relative();
        rows.add({static_cast<long long>(k), e});
        worst = std::max(worst, e);
    }
    out.csv("gauge_check.csv", rows);
    const double tol = c.num("tolerances.gauge");
    rep.assert_check("transported operator agreement", worst <= tol, worst, tol, "<=", "max relative error over the test functions");
    rep.metrics["a11_min"] = gr.a11_min();
    rep.metrics["affine"] = gr.affine();
}

}  // namespace detail

// Runs the experiment and writes report.json next to the data files.
inline ExperimentReport run_experiment(const ExperimentConfig& c) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.kind = c.kind();
    rep.seed = c.seed();
    rep.config_echo = c.normalized();
    detail::Outputs out(c.output(), rep);
    const std::string& k = c.kind();
    try {
        if (k == "simulate") detail::run_simulate(c, rep, out);
        else if (k == "convexity") detail::run_convexity(c, rep, out);
        else if (k == "carleman-sweep") detail::run_carleman(c, rep, out);
        else if (k == "symbolic-verify") detail::run_symbolic(c, rep, out);
        else if (k == "subordination") detail::run_subordination(c, rep, out);
        else if (k == "poincare") detail::run_poincare(c, rep, out);
        else if (k == "hardy") detail::run_hardy(c, rep, out);
        else if (k == "lowerbound-fit") detail::run_lowerbound(c, rep, out);
        else if (k == "gauge-reduce") detail::run_gauge(c, rep, out);
        else throw ConfigError({"kind: unknown experiment kind \"" + k + "\""});
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(k + " experiment failed: " + e.what());
    }
    rep.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.artifacts.push_back(out.path("report.json"));
    std::ofstream os(out.path("report.json"), std::ios::binary);
    os << rep.json().dump(2) << "\n";
    return rep;
}

}  // namespace ucont
