#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>

#include "CLI11.hpp"
#include "canopy/numerics/memory.hpp"
#include "commands.hpp"
#include "manifest.hpp"

#ifndef CANOPY_VERSION
#define CANOPY_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace canopy::cli;

namespace {

struct ReplayRequest {
    fs::path manifest;
    RunManifest recorded;
    bool check = false;
};

/// Subcommand name followed by every long option with its effective value.
std::vector<std::string> resolved_argv(const CLI::App& sub, nlohmann::ordered_json& config,
                                       nlohmann::ordered_json& seeds) {
    std::vector<std::string> argv = {sub.get_name()};
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (name == "help") continue;
        if (opt->get_type_size() == 0) {
            if (opt->count() == 0) continue;
            argv.push_back("--" + name);
            config[name] = true;
            continue;
        }
        const std::string value = opt->count() ? opt->results().front() : opt->get_default_str();
        if (value.empty()) continue;
        argv.push_back("--" + name);
        argv.push_back(value);
        config[name] = value;
        if (name.find("seed") != std::string::npos) seeds[name] = value;
    }
    return argv;
}

int compare_outputs(const RunManifest& recorded, const RunManifest& now) {
    if (recorded.outputs.size() != now.outputs.size()) {
        std::fprintf(stderr, "replay: %zu outputs recorded, %zu produced\n", recorded.outputs.size(),
                     now.outputs.size());
        return 1;
    }
    int mismatches = 0;
    for (std::size_t i = 0; i < now.outputs.size(); ++i) {
        const auto& a = recorded.outputs[i];
        const auto& b = now.outputs[i];
        if (a.fnv1a64 != b.fnv1a64 || a.bytes != b.bytes) {
            std::fprintf(stderr, "replay: %s differs from recorded %s\n", b.path.c_str(), a.path.c_str());
            ++mismatches;
        }
    }
    if (mismatches) return 1;
    std::printf("replay: %zu outputs identical\n", now.outputs.size());
    return 0;
}

int run_cli(std::vector<std::string> args, const std::optional<ReplayRequest>& replay);

int dispatch(CLI::App& app, const std::map<CLI::App*, std::pair<std::function<void(RunContext&)>, std::string*>>& commands,
             const std::optional<ReplayRequest>& replay) {
    for (const auto& [sub, entry] : commands) {
        if (!sub->parsed()) continue;
        RunManifest m;
        m.tool_version = CANOPY_VERSION;
        m.subcommand = sub->get_name();
        m.argv = resolved_argv(*sub, m.config, m.seeds);
        if (replay) m.replayed_from = replay->manifest.string();

        RunContext ctx;
        const auto t0 = std::chrono::steady_clock::now();
        entry.first(ctx);
        m.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& p : ctx.inputs) m.inputs.push_back(record_file(p));
        for (const auto& p : ctx.outputs) m.outputs.push_back(record_file(p));
        for (const auto& p : ctx.diagnostics) m.diagnostics.push_back(p.string());
        m.summary = ctx.summary;
        const auto path = manifest_path(*entry.second);
        write_manifest(path, m);
        std::printf("%s\n", m.summary.dump().c_str());
        std::printf("manifest: %s\n", path.string().c_str());
        if (replay && replay->check) {
            const int rc = compare_outputs(replay->recorded, m);
            if (rc) return rc;
        }
        return ctx.exit_code;
    }
    (void)app;
    return 0;
}

int run_cli(std::vector<std::string> args, const std::optional<ReplayRequest>& replay) {
    CLI::App app{"Canopy height mapping pipeline on synthetic worlds"};
    app.set_version_flag("--version", CANOPY_VERSION);
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    std::map<CLI::App*, std::pair<std::function<void(RunContext&)>, std::string*>> commands;

    SynthOptions so;
    auto* synth = app.add_subcommand("synth-data", "Generate a seeded world and a split footprint dataset");
    synth->add_option("--seed", so.seed, "World seed");
    synth->add_option("--width", so.width, "World width in pixels")->check(CLI::Range(64, 1 << 16));
    synth->add_option("--height", so.height, "World height in pixels")->check(CLI::Range(64, 1 << 16));
    synth->add_option("--footprints", so.footprints, "Number of footprints to draw")->check(CLI::PositiveNumber);
    synth->add_option("--sample-seed", so.sample_seed, "Footprint sampling seed");
    synth->add_option("--radius-px", so.radius_px, "Footprint disc radius in pixels")->check(CLI::PositiveNumber);
    synth->add_option("--sigma-m", so.sigma_m, "Geolocation error standard deviation in meters")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--split-tile", so.split_tile, "Split tile size in pixels")->check(CLI::PositiveNumber);
    synth->add_option("--validation-fraction", so.validation_fraction, "Share of tiles held out")
        ->check(CLI::Range(0.0, 1.0));
    synth->add_option("--split-seed", so.split_seed, "Tile split seed");
    synth->add_option("--out", so.out, "Dataset file")->required();
    synth->add_option("--world-out", so.world_out, "World spec file (default <out>.world)");
    commands[synth] = {[&](RunContext& c) { run_synth_data(so, c); }, &so.out};

    TrainOptions to;
    auto* train = app.add_subcommand("train", "Train an ensemble of independently seeded networks");
    train->add_option("--data", to.data, "Dataset file")->required()->check(CLI::ExistingFile);
    train->add_option("--members", to.members, "Ensemble size")->check(CLI::PositiveNumber);
    train->add_option("--iterations", to.iterations, "Updates per member")->check(CLI::PositiveNumber);
    train->add_option("--batch", to.batch, "Batch size")->check(CLI::PositiveNumber);
    train->add_option("--lr", to.lr, "Base learning rate")->check(CLI::PositiveNumber);
    train->add_option("--blocks", to.blocks, "Residual blocks")->check(CLI::PositiveNumber);
    train->add_option("--filters", to.filters, "Filters per block")->check(CLI::PositiveNumber);
    train->add_option("--seed", to.seed, "Seed of member 0; member m uses seed + m");
    train->add_option("--assignment-seed", to.assignment_seed, "Seed of the date-to-member table");
    train->add_option("--log-every", to.log_every, "Progress interval in steps (0 = quiet)");
    train->add_option("--out", to.out, "Ensemble directory")->required();
    commands[train] = {[&](RunContext& c) { run_train(to, c); }, &to.out};

    FinetuneOptions fo;
    auto* finetune = app.add_subcommand("finetune", "Re-train the mean heads with height-balanced weights");
    finetune->add_option("--ensemble", fo.ensemble, "Ensemble directory")->required()->check(CLI::ExistingDirectory);
    finetune->add_option("--data", fo.data, "Dataset file")->required()->check(CLI::ExistingFile);
    finetune->add_option("--iterations", fo.iterations, "Updates per member")->check(CLI::PositiveNumber);
    finetune->add_option("--batch", fo.batch, "Batch size")->check(CLI::PositiveNumber);
    finetune->add_option("--lr", fo.lr, "Learning rate")->check(CLI::PositiveNumber);
    finetune->add_option("--bin-width", fo.bin_width, "Height bin width in meters")->check(CLI::PositiveNumber);
    finetune->add_option("--seed", fo.seed, "Batch seed of member 0; member m uses seed + m");
    finetune->add_option("--out", fo.out, "Output ensemble directory")->required();
    commands[finetune] = {[&](RunContext& c) { run_finetune(fo, c); }, &fo.out};

    InferOptions io;
    auto* infer = app.add_subcommand("infer", "Predict dataset samples with every ensemble member");
    infer->add_option("--ensemble", io.ensemble, "Ensemble directory")->required()->check(CLI::ExistingDirectory);
    infer->add_option("--data", io.data, "Dataset file")->required()->check(CLI::ExistingFile);
    infer->add_option("--split", io.split, "Which split to predict")->check(CLI::IsMember({"train", "validation"}));
    infer->add_option("--out", io.out, "Per-member predictions (TSV)")->required();
    commands[infer] = {[&](RunContext& c) { run_infer(io, c); }, &io.out};

    FuseOptions uo;
    auto* fuse = app.add_subcommand("fuse", "Inverse-variance fuse per-member predictions");
    fuse->add_option("--predictions", uo.predictions, "Per-member predictions")->required()->check(CLI::ExistingFile);
    fuse->add_option("--variance-floor", uo.variance_floor, "Lower bound on member variances")
        ->check(CLI::PositiveNumber);
    fuse->add_option("--out", uo.out, "Fused predictions (TSV)")->required();
    commands[fuse] = {[&](RunContext& c) { run_fuse(uo, c); }, &uo.out};

    EvaluateOptions eo;
    auto* evaluate = app.add_subcommand("evaluate", "Error, calibration and filtering tables of fused predictions");
    evaluate->add_option("--predictions", eo.predictions, "Fused predictions")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--bins", eo.bins, "Calibration bins")->check(CLI::PositiveNumber);
    evaluate->add_option("--bin-mode", eo.bin_mode, "Calibration binning")
        ->check(CLI::IsMember({"equal-width", "equal-population"}));
    evaluate->add_option("--out", eo.out, "Report (TSV tables)")->required();
    commands[evaluate] = {[&](RunContext& c) { run_evaluate(eo, c); }, &eo.out};

    MapOptions mo;
    auto* map = app.add_subcommand("map", "Tile a world and write height, std and mask rasters");
    map->add_option("--world", mo.world, "World spec file")->required()->check(CLI::ExistingFile);
    map->add_option("--ensemble", mo.ensemble, "Ensemble directory")->required()->check(CLI::ExistingDirectory);
    map->add_option("--tiles", mo.tile_size, "Tile edge length in pixels")->check(CLI::PositiveNumber);
    map->add_option("--workers", mo.workers, "Worker threads")->check(CLI::PositiveNumber);
    map->add_option("--max-orbits", mo.max_orbits, "Orbits per tile")->check(CLI::PositiveNumber);
    map->add_option("--images", mo.images, "Images per orbit")->check(CLI::PositiveNumber);
    map->add_option("--first-day", mo.first_day, "First day of year of the window")->check(CLI::Range(1, 366));
    map->add_option("--last-day", mo.last_day, "Last day of year of the window")->check(CLI::Range(1, 366));
    map->add_option("--member-mode", mo.member_mode, "One assigned member per date, or all members")
        ->check(CLI::IsMember({"assigned", "all"}));
    map->add_option("--out", mo.out, "Output directory")->required();
    commands[map] = {[&](RunContext& c) { run_map(mo, c); }, &mo.out};

    ReportOptions ro;
    auto* report = app.add_subcommand("report", "Compare a map product with the world's true heights");
    report->add_option("--world", ro.world, "World spec file")->required()->check(CLI::ExistingFile);
    report->add_option("--map", ro.map, "Map output directory")->required()->check(CLI::ExistingDirectory);
    report->add_option("--bins", ro.bins, "Calibration bins")->check(CLI::PositiveNumber);
    report->add_option("--out", ro.out, "Report (TSV tables)")->required();
    commands[report] = {[&](RunContext& c) { run_report(ro, c); }, &ro.out};

    std::string replay_manifest, replay_out;
    bool replay_check = false;
    auto* rep = app.add_subcommand("replay", "Rerun a subcommand from its manifest");
    rep->add_option("--manifest", replay_manifest, "Manifest to replay")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", replay_out, "Write outputs here instead of the recorded --out");
    rep->add_flag("--check", replay_check, "Fail unless inputs and outputs hash as recorded");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (rep->parsed()) {
            if (replay) throw UsageError("a replay manifest cannot itself be a replay request");
            ReplayRequest r{replay_manifest, read_manifest(replay_manifest), replay_check};
            auto argv = r.recorded.argv;
            if (!replay_out.empty()) {
                auto it = std::find(argv.begin(), argv.end(), "--out");
                if (it == argv.end() || it + 1 == argv.end()) throw UsageError("recorded run has no --out");
                *(it + 1) = replay_out;
            }
            if (r.check)
                for (const auto& in : r.recorded.inputs)
                    if (record_file(in.path).fnv1a64 != in.fnv1a64)
                        throw UsageError("input " + in.path + " changed since the recorded run");
            return run_cli(argv, r);
        }
        return dispatch(app, commands, replay);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    canopy::numerics::tune_allocator();
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(std::move(args), std::nullopt);
}
