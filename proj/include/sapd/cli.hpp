#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace sapd::cli {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ExperimentConfig {
    std::string command;
    json problem = json::object();
    std::vector<double> thetas;
    int runs = 0;        // 0 = command default
    int iterations = 0;  // 0 = command default
    std::uint64_t seed = 1;
    std::string out_dir = "sapd-out";
    bool emit_csv = true;
    bool emit_json = true;
    bool emit_svg = true;
    double eps = 1e-2;
    double p = 0.9;
    int workers = 0;
};

json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const json& j);
// Fills command-specific defaults for missing problem fields and thetas.
void apply_defaults(ExperimentConfig& c);
// FNV-1a over the canonical JSON, excluding seed, out_dir and workers.
std::string config_hash(const ExperimentConfig& c);
std::string version();

struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::string rule;  // "freedman-diaconis" or "fixed-40"
};

Histogram histogram(const std::vector<double>& v);

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

std::string svg_lines(const std::string& title, const std::vector<SvgSeries>& series,
                      const std::string& stamp);
std::string svg_histogram(const std::string& title, const Histogram& h,
                          const std::vector<std::pair<std::string, double>> markers,
                          const std::string& stamp);

struct CommandResult {
    json summary;
    std::vector<std::string> files;
};

CommandResult cmd_toy(const ExperimentConfig& c);
CommandResult cmd_bilinear(const ExperimentConfig& c);
CommandResult cmd_quadcov(const ExperimentConfig& c);
CommandResult cmd_drlr(const ExperimentConfig& c);
CommandResult cmd_certify(const ExperimentConfig& c);
CommandResult cmd_risk(const ExperimentConfig& c);

CommandResult dispatch(const ExperimentConfig& c);

// Full CLI entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace sapd::cli
