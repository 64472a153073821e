#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ucont/experiment.hpp"

using namespace ucont;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> errors_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.errors();
    }
    return {};
}

bool mentions(const std::vector<std::string>& errs, const std::string& s) {
    for (const auto& e : errs)
        if (e.find(s) != std::string::npos) return true;
    return false;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("ucont_config_test_" + name);
    fs::remove_all(p);
    return p.string();
}

}  // namespace

TEST(Config, EmptyTextNeedsKind) {
    auto e = errors_of("");
    ASSERT_FALSE(e.empty());
    EXPECT_EQ(e[0].rfind("kind: missing required field", 0), 0u);
}

TEST(Config, UnknownKind) { EXPECT_TRUE(mentions(errors_of("kind = \"teleport\""), "unknown experiment kind")); }

TEST(Config, UnknownKeyIsReportedWithLine) {
    auto e = errors_of("kind = \"hardy\"\n[hardy]\nbogus = 1\n");
    EXPECT_TRUE(mentions(e, "hardy.bogus: unknown key for kind \"hardy\" (line 3)"));
}

TEST(Config, DuplicateKey) {
    auto e = errors_of("kind = \"hardy\"\nseed = 1\nseed = 2\n");
    EXPECT_TRUE(mentions(e, "seed: duplicate key (first set on line 2)"));
}

TEST(Config, SmallRadiusMessage) {
    auto e = errors_of("kind = \"carleman-sweep\"\n[carleman]\nR = [0.5, 2]\n");
    EXPECT_TRUE(mentions(e, "violates R >= 1"));
}

TEST(Config, TypeMismatch) {
    auto e = errors_of("kind = \"hardy\"\nseed = \"one\"\n");
    EXPECT_TRUE(mentions(e, "seed: expected number, got string"));
}

TEST(Config, CollectsEveryError) {
    auto e = errors_of("kind = \"simulate\"\nfoo = 1\nbar = 2\n[field]\ndim = 7\n");
    EXPECT_GE(e.size(), 3u);
}

TEST(Config, BadExpressionIsReported) {
    auto e = errors_of("kind = \"gauge-reduce\"\n[field]\ndim = 2\na11 = \"1 + x3\"\n");
    EXPECT_TRUE(mentions(e, "field.a11"));
}

TEST(Config, ScalarPromotesToArray) {
    auto c = parse_config("kind = \"carleman-sweep\"\n[carleman]\nR = 2\n");
    EXPECT_EQ(c.nums("carleman.R"), std::vector<double>{2});
}

TEST(Config, NormalizedEchoIsAFixedPoint) {
    auto c = parse_config("# comment\nkind = \"subordination\"\n[subordination]\nkappa = 12   # trailing\n");
    auto again = parse_config(c.normalized());
    EXPECT_EQ(again.normalized(), c.normalized());
    EXPECT_DOUBLE_EQ(again.num("subordination.kappa"), 12);
    EXPECT_TRUE(again.explicitly_set("subordination.p"));
}

TEST(Config, EveryShippedConfigValidates) {
    int n = 0;
    for (const auto& e : fs::directory_iterator(UCONT_CONFIG_DIR))
        if (e.path().extension() == ".cfg") {
            EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
            ++n;
        }
    EXPECT_GE(n, 14);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/x.cfg"), ConfigError); }

TEST(Experiment, ReportCarriesChecks) {
    const std::string out = scratch("report");
    auto c = parse_config("kind = \"subordination\"\noutput = \"" + out + "\"\n[subordination]\ncount = 5\n");
    auto rep = run_experiment(c);
    EXPECT_FALSE(rep.failed());
    EXPECT_TRUE(fs::exists(fs::path(out) / "report.json"));
    EXPECT_TRUE(fs::exists(fs::path(out) / "subordination.csv"));
    auto j = nlohmann::json::parse(slurp(fs::path(out) / "report.json"));
    EXPECT_EQ(j["kind"], "subordination");
    EXPECT_FALSE(j["checks"].empty());
    fs::remove_all(out);
}

TEST(Experiment, CsvOutputIsDeterministic) {
    const std::string a = scratch("det_a"), b = scratch("det_b");
    const std::string body = "seed = 4\n[carleman]\nR = [1, 2]\nsamples = 4\nnt = 64\nnx = 256\nidentity_checks = 1\n";
    run_experiment(parse_config("kind = \"carleman-sweep\"\noutput = \"" + a + "\"\n" + body));
    run_experiment(parse_config("kind = \"carleman-sweep\"\noutput = \"" + b + "\"\n" + body));
    int compared = 0;
    for (const auto& e : fs::directory_iterator(a))
        if (e.path().extension() == ".csv") {
            EXPECT_EQ(slurp(e.path()), slurp(fs::path(b) / e.path().filename())) << e.path().filename();
            ++compared;
        }
    EXPECT_GE(compared, 1);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Experiment, FailedCheckIsReportedNotThrown) {
    const std::string out = scratch("fail");
    auto c = parse_config("kind = \"subordination\"\noutput = \"" + out + "\"\n[subordination]\ncount = 5\nband_max = 1.0000001\n");
    EXPECT_TRUE(run_experiment(c).failed());
    fs::remove_all(out);
}
