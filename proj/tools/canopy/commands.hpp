#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace canopy::cli {

/// Contradictory or unusable flags that the parser cannot catch.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Files a command read and wrote, plus a small machine-readable summary.
struct RunContext {
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    std::vector<std::filesystem::path> diagnostics;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    int exit_code = 0;
};

struct SynthOptions {
    std::uint64_t seed = 7;
    int width = 256;
    int height = 256;
    std::size_t footprints = 20000;
    std::uint64_t sample_seed = 11;
    double radius_px = 1.25;
    double sigma_m = 5.0;
    int split_tile = 32;
    double validation_fraction = 0.2;
    std::uint64_t split_seed = 5;
    std::string out;
    std::string world_out;  // defaults to <out>.world
};

struct TrainOptions {
    std::string data;
    int members = 3;
    std::size_t iterations = 20000;
    int batch = 32;
    double lr = 1e-4;
    int blocks = 4;
    int filters = 32;
    std::uint64_t seed = 1;
    std::uint64_t assignment_seed = 31;
    std::size_t log_every = 1000;
    std::string out;
};

struct FinetuneOptions {
    std::string ensemble;
    std::string data;
    std::size_t iterations = 3000;
    int batch = 32;
    double lr = 1e-4;
    double bin_width = 1.0;
    std::uint64_t seed = 2;
    std::string out;
};

struct InferOptions {
    std::string ensemble;
    std::string data;
    std::string split = "validation";
    std::string out;
};

struct FuseOptions {
    std::string predictions;
    double variance_floor = 1e-6;
    std::string out;
};

struct EvaluateOptions {
    std::string predictions;
    std::size_t bins = 20;
    std::string bin_mode = "equal-width";
    std::string out;
};

struct MapOptions {
    std::string world;
    std::string ensemble;
    int tile_size = 64;
    int workers = 1;
    int max_orbits = 2;
    int images = 10;
    int first_day = 121;
    int last_day = 273;
    std::string member_mode = "assigned";
    std::string out;
};

struct ReportOptions {
    std::string world;
    std::string map;
    std::size_t bins = 20;
    std::string out;
};

void run_synth_data(const SynthOptions& o, RunContext& ctx);
void run_train(const TrainOptions& o, RunContext& ctx);
void run_finetune(const FinetuneOptions& o, RunContext& ctx);
void run_infer(const InferOptions& o, RunContext& ctx);
void run_fuse(const FuseOptions& o, RunContext& ctx);
void run_evaluate(const EvaluateOptions& o, RunContext& ctx);
void run_map(const MapOptions& o, RunContext& ctx);
void run_report(const ReportOptions& o, RunContext& ctx);

}  // namespace canopy::cli
