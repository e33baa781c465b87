#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "paralab/fourier.hpp"

namespace paralab::runner {

struct ParamInfo {
    std::string key;
    std::string fallback;  // default value as text
    std::string help;
};

struct PipelineInfo {
    std::string name;
    std::string claim;  // the statement the pipeline reproduces
    bool needs_seed = false;
    std::vector<ParamInfo> params;
    std::vector<std::string> columns;  // CSV header
};

const std::vector<PipelineInfo>& list_pipelines();
const PipelineInfo& pipeline_info(const std::string& name);

struct ExperimentSpec {
    std::string name;
    std::map<std::string, std::string> params;
    std::string out_dir;  // empty: nothing written
    std::optional<std::uint64_t> seed;
};

// {"pipeline": ..., "params": {...}, "seed": N, "out": "..."}; every key optional.
ExperimentSpec spec_from_json(const std::string& text);
// "key=value"
void apply_override(ExperimentSpec& spec, const std::string& assignment);

struct Verdict {
    std::string check;
    double measured = 0.0;
    double reference = 0.0;  // predicted value or bound
    double tolerance = 0.0;
    std::string relation;    // "<=", ">=", "within"
    bool pass = false;
};

struct ExperimentRecord {
    ExperimentSpec spec;
    std::string claim;
    std::map<std::string, std::string> resolved;  // parameters after defaults
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::map<std::string, double> fitted;
    std::map<std::string, double> predicted;
    std::vector<Verdict> verdicts;
    std::vector<std::pair<double, double>> plot;  // log-log pairs
    std::map<std::string, double> timings;        // seconds

    bool pass() const;
};

ExperimentRecord run(const ExperimentSpec& spec);

std::string record_csv(const ExperimentRecord& rec);
std::string record_json(const ExperimentRecord& rec);
std::string record_plotdata(const ExperimentRecord& rec);
void write_outputs(const ExperimentRecord& rec, const std::string& dir);

// convolve_power with grid dumps reused from $PARALAB_CACHE when set.
GridField cached_convolve_power(const AtomicMeasure& m, int n, double delta, const ConvolveOptions& opt);
std::string cache_key(const AtomicMeasure& m, int n, double delta, const ConvolveOptions& opt);

}  // namespace paralab::runner
