#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "paralab/runner.hpp"

using namespace paralab;
namespace rn = paralab::runner;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

rn::ExperimentSpec make(const std::string& name, std::map<std::string, std::string> params = {},
                        std::optional<std::uint64_t> seed = std::nullopt) {
    rn::ExperimentSpec s;
    s.name = name;
    s.params = std::move(params);
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("pipeline catalog") {
    const auto& all = rn::list_pipelines();
    std::set<std::string> names;
    for (const auto& p : all) {
        names.insert(p.name);
        CHECK_FALSE(p.claim.empty());
        CHECK_FALSE(p.columns.empty());
        for (const auto& q : p.params) CHECK_FALSE(q.help.empty());
    }
    CHECK(names.size() == all.size());
    for (const char* n : {"sharpness", "sumset-growth", "vinogradov", "fu-ren", "flattening-monotone", "psi-audit",
                          "furstenberg", "smoothing", "fourier-decay"})
        CHECK(names.count(n) == 1);
    CHECK(rn::pipeline_info("fu-ren").needs_seed);
    CHECK_FALSE(rn::pipeline_info("psi-audit").needs_seed);
    CHECK_THROWS_WITH_AS(rn::pipeline_info("nope"), doctest::Contains("unknown pipeline 'nope'"), Error);
}

TEST_CASE("spec validation") {
    CHECK_THROWS_WITH_AS(rn::run(make("no-such")), doctest::Contains("available:"), Error);
    CHECK_THROWS_WITH_AS(rn::run(make("psi-audit", {{"k", "1"}})), doctest::Contains("unknown parameter 'k'"), Error);
    CHECK_THROWS_WITH_AS(rn::run(make("fu-ren", {{"instances", "2"}})), doctest::Contains("--seed"), Error);

    auto s = rn::spec_from_json(R"({"pipeline": "sharpness", "params": {"s": 0.4, "levels": "6:8"}, "seed": 3, "out": "x"})");
    CHECK(s.name == "sharpness");
    CHECK(s.params.at("levels") == "6:8");
    CHECK(std::stod(s.params.at("s")) == 0.4);
    CHECK(*s.seed == 3);
    CHECK(s.out_dir == "x");
    CHECK_THROWS_WITH_AS(rn::spec_from_json("{nope"), doctest::Contains("not valid JSON"), Error);

    rn::apply_override(s, "s=0.7");
    CHECK(s.params.at("s") == "0.7");
    CHECK_THROWS_WITH_AS(rn::apply_override(s, "s0.7"), doctest::Contains("not of the form key=value"), Error);
}

TEST_CASE("psi-audit passes and fills the record") {
    auto rec = rn::run(make("psi-audit", {{"samples", "2000"}, {"transfers", "4"}}));
    CHECK(rec.pass());
    CHECK_FALSE(rec.verdicts.empty());
    CHECK(rec.resolved.at("samples") == "2000");
    CHECK(rec.resolved.count("tol") == 1);
    for (const auto& row : rec.rows) CHECK(row.size() == rec.columns.size());
    CHECK(rec.timings.count("total_s") == 1);
}

TEST_CASE("seeded runs are reproducible") {
    auto spec = make("fu-ren", {{"instances", "3"}, {"levels", "6:7"}}, 17);
    auto a = rn::run(spec), b = rn::run(spec);
    CHECK(rn::record_csv(a) == rn::record_csv(b));
    CHECK(a.rows.size() == 3);
    spec.seed = 18;
    auto c = rn::run(spec);
    CHECK(rn::record_csv(c) != rn::record_csv(a));
}

TEST_CASE("verdicts and outputs") {
    auto spec = make("sharpness", {{"levels", "5:7"}, {"s", "0.5"}});
    spec.out_dir = std::string(PARALAB_TEST_TMP) + "/runner-out";
    fs::remove_all(spec.out_dir);
    auto rec = rn::run(spec);
    REQUIRE(rec.verdicts.size() == 1);
    const auto& v = rec.verdicts[0];
    CHECK(v.relation == "within");
    CHECK(v.reference == doctest::Approx(0.5));
    CHECK(v.tolerance == doctest::Approx(0.15));
    CHECK(v.pass == (std::abs(v.measured - v.reference) <= v.tolerance));
    CHECK_FALSE(rec.predicted.empty());
    CHECK(rec.plot.size() == 3);

    for (const char* ext : {".csv", ".json", ".plotdata"}) CHECK(fs::exists(fs::path(spec.out_dir) / ("sharpness" + std::string(ext))));
    auto csv = read_file(fs::path(spec.out_dir) / "sharpness.csv");
    CHECK(csv.rfind("delta,atoms,l2_sq,log2_inv_delta,log2_l2_sq\n", 0) == 0);
    auto js = read_file(fs::path(spec.out_dir) / "sharpness.json");
    CHECK(js.find("\"verdicts\"") != std::string::npos);
    CHECK(js.find("\"claim\"") != std::string::npos);
    auto plot = read_file(fs::path(spec.out_dir) / "sharpness.plotdata");
    CHECK(std::count(plot.begin(), plot.end(), '\n') == 3);
}

TEST_CASE("grid cache") {
    auto m = arc_measure(0x1p-4);
    ConvolveOptions o;
    auto k1 = rn::cache_key(m, 2, 0x1p-4, o);
    CHECK(k1 == rn::cache_key(m, 2, 0x1p-4, o));
    CHECK(k1 != rn::cache_key(m, 3, 0x1p-4, o));
    CHECK(k1 != rn::cache_key(m, 2, 0x1p-5, o));
    o.h = 0x1p-7;
    CHECK(k1 != rn::cache_key(m, 2, 0x1p-4, o));

    auto dir = std::string(PARALAB_TEST_TMP) + "/cache";
    fs::remove_all(dir);
    setenv("PARALAB_CACHE", dir.c_str(), 1);
    auto a = rn::cached_convolve_power(m, 2, 0x1p-4, o);
    CHECK(fs::exists(fs::path(dir) / (rn::cache_key(m, 2, 0x1p-4, o) + ".plgrid")));
    auto b = rn::cached_convolve_power(m, 2, 0x1p-4, o);
    unsetenv("PARALAB_CACHE");
    REQUIRE(a.values.size() == b.values.size());
    CHECK(a.nx == b.nx);
    CHECK(a.origin.x == b.origin.x);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
    CHECK(worst == 0.0);
}
