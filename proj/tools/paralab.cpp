// paralab <pipeline> [--config file] [--set key=value]... [--out dir] [--seed N]
// paralab list
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "paralab/runner.hpp"

namespace rn = paralab::runner;

namespace {

void print_catalog() {
    for (const auto& p : rn::list_pipelines()) {
        std::cout << p.name << (p.needs_seed ? "  (needs --seed)" : "") << "\n  " << p.claim << "\n";
        for (const auto& q : p.params) std::cout << "    " << q.key << " = " << q.fallback << "  " << q.help << "\n";
        std::cout << "    csv:";
        for (const auto& c : p.columns) std::cout << ' ' << c;
        std::cout << "\n";
    }
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw paralab::Error("cannot read config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"paralab: scaling experiments for measures on the parabola"};
    std::string pipeline, config, out = "paralab-out";
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    app.add_option("pipeline", pipeline, "pipeline name, or 'list'")->required();
    app.add_option("--config", config, "JSON config file");
    app.add_option("--set", sets, "parameter override key=value (repeatable)");
    auto* out_opt = app.add_option("--out", out, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "random seed");
    CLI11_PARSE(app, argc, argv);

    if (pipeline == "list") {
        print_catalog();
        return 0;
    }
    try {
        rn::ExperimentSpec spec;
        if (!config.empty()) spec = rn::spec_from_json(slurp(config));
        if (!spec.name.empty() && spec.name != pipeline)
            throw paralab::Error("config is for pipeline " + spec.name + ", not " + pipeline);
        spec.name = pipeline;
        for (const auto& s : sets) rn::apply_override(spec, s);
        if (*seed_opt) spec.seed = seed;
        if (*out_opt || spec.out_dir.empty()) spec.out_dir = out;

        auto rec = rn::run(spec);
        for (const auto& v : rec.verdicts)
            std::cout << (v.pass ? "PASS " : "FAIL ") << v.check << ": " << v.measured << ' ' << v.relation << ' '
                      << v.reference << " (tol " << v.tolerance << ")\n";
        for (const auto& [k, v] : rec.fitted) std::cout << "fitted " << k << " = " << v << "\n";
        std::cout << "wrote " << spec.out_dir << "/" << spec.name << ".{csv,json,plotdata} in " << rec.timings["total_s"]
                  << " s\n";
        return rec.pass() ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "paralab: " << e.what() << "\n";
        return 1;
    }
}
