#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "canopy/data/dataset_io.hpp"
#include "canopy/fusion/ensemble.hpp"
#include "canopy/fusion/fuse.hpp"
#include "canopy/metrics/tables.hpp"
#include "canopy/numerics/binary_io.hpp"
#include "canopy/tiler/raster_io.hpp"
#include "canopy/tiler/run_map.hpp"
#include "canopy/training/trainer.hpp"
#include "formats.hpp"

namespace canopy::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kInferBatch = 64;

bool same_file(const fs::path& a, const fs::path& b) { return fs::weakly_canonical(a) == fs::weakly_canonical(b); }

void guard_output(const fs::path& out, const std::vector<fs::path>& inputs) {
    if (out.empty()) throw UsageError("--out is required");
    for (const auto& in : inputs)
        if (same_file(out, in)) throw UsageError("output " + out.string() + " would overwrite an input");
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::vector<data::FootprintSample> normalized(const std::vector<data::FootprintSample>& raw,
                                              const data::NormStats& stats) {
    std::vector<data::FootprintSample> out;
    out.reserve(raw.size());
    for (const auto& s : raw) out.push_back(data::normalize(s, stats));
    return out;
}

data::NormStats stats_of(const data::Dataset& ds) {
    return ds.stats ? *ds.stats : data::compute_norm_stats(ds.train);
}

/// Every member's center-pixel prediction for every sample, sample-major.
std::vector<PredictionRow> predict_samples(const fusion::Ensemble& e, const std::vector<data::FootprintSample>& raw) {
    const auto norm = normalized(raw, e.stats);
    std::vector<PredictionRow> rows;
    rows.reserve(raw.size() * e.members.size());
    for (std::size_t i = 0; i < norm.size(); i += kInferBatch) {
        const std::size_t n = std::min<std::size_t>(kInferBatch, norm.size() - i);
        std::vector<std::size_t> idx(n), centers;
        for (std::size_t k = 0; k < n; ++k) idx[k] = i + k;
        const auto image = training::stack_patches(norm, idx, &centers);
        std::vector<model::PredictionPair> out;
        for (const auto& m : e.members) out.push_back(model::forward(m, image));
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t m = 0; m < out.size(); ++m) {
                const auto [mu, var] =
                    data::denormalize_prediction(out[m].mean[centers[k]], out[m].variance[centers[k]], e.stats);
                const auto& s = raw[i + k];
                rows.push_back({i + k, s.center_x, s.center_y, s.label, static_cast<int>(m), mu, var});
            }
    }
    return rows;
}

double rmse_against(const std::vector<data::FootprintSample>& samples, const std::vector<double>& pred) {
    double se = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) se += (pred[i] - samples[i].label) * (pred[i] - samples[i].label);
    return std::sqrt(se / static_cast<double>(samples.size()));
}

/// Per-member validation RMSE and the predict-the-training-mean baseline.
nlohmann::ordered_json validation_summary(const fusion::Ensemble& e, const data::Dataset& ds) {
    nlohmann::ordered_json j;
    if (ds.validation.empty()) return j;
    double mean = 0.0;
    for (const auto& s : ds.train) mean += s.label;
    mean /= static_cast<double>(ds.train.size());
    const auto rows = predict_samples(e, ds.validation);
    const std::size_t m = e.members.size();
    j["validation_samples"] = ds.validation.size();
    j["baseline_rmse"] = rmse_against(ds.validation, std::vector<double>(ds.validation.size(), mean));
    std::vector<double> member_rmse;
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<double> pred(ds.validation.size());
        for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = rows[i * m + k].mean;
        member_rmse.push_back(rmse_against(ds.validation, pred));
    }
    j["member_rmse"] = member_rmse;
    return j;
}

fusion::Ensemble load_checked_ensemble(const std::string& dir) {
    auto e = fusion::load_ensemble(dir);
    e.validate();
    return e;
}

std::vector<fs::path> ensemble_files(const fs::path& dir, int members, bool with_logs) {
    std::vector<fs::path> files = {dir / "ensemble.txt"};
    for (int m = 0; m < members; ++m) {
        files.push_back(dir / ("member" + std::to_string(m) + ".ckpt"));
        if (with_logs) files.push_back(dir / ("member" + std::to_string(m) + ".log.jsonl"));
    }
    return files;
}

void write_log(const fs::path& path, const std::vector<training::TrainLogEntry>& log) {
    std::ostringstream os;
    training::write_train_log(os, log);
    io::write_file_atomic(path, os.str());
}

tiler::RasterHeader world_header(const data::WorldState& w, const char* channel, double nodata,
                                 tiler::RasterType type) {
    tiler::RasterHeader h;
    h.width = w.width();
    h.height = w.height();
    h.channel = channel;
    h.lon_min = w.geo.origin_lon;
    h.lat_max = w.geo.origin_lat;
    h.lon_max = w.geo.origin_lon + w.width() * w.geo.deg_per_pixel;
    h.lat_min = w.geo.origin_lat - w.height() * w.geo.deg_per_pixel;
    h.gsd_m = w.params.gsd_m;
    h.nodata = nodata;
    h.type = type;
    return h;
}

metrics::BinMode parse_bin_mode(const std::string& s) {
    if (s == "equal-width") return metrics::BinMode::equal_width;
    if (s == "equal-population") return metrics::BinMode::equal_population;
    throw UsageError("unknown bin mode " + s);
}

}  // namespace

void run_synth_data(const SynthOptions& o, RunContext& ctx) {
    const fs::path world_out = o.world_out.empty() ? fs::path(o.out + ".world") : fs::path(o.world_out);
    guard_output(o.out, {});
    if (same_file(o.out, world_out)) throw UsageError("--out and --world-out must differ");

    data::WorldParams wp;
    wp.width = o.width;
    wp.height = o.height;
    const auto world = data::generate_world(o.seed, wp);

    data::Dataset ds;
    ds.world_seed = o.seed;
    ds.world = wp;
    ds.sample_seed = o.sample_seed;
    ds.footprint.disc_radius_px = o.radius_px;
    ds.footprint.geolocation_sigma_m = o.sigma_m;
    ds.split = {o.width, o.height, o.split_tile, o.validation_fraction, o.split_seed};
    auto [train, validation] =
        data::split_by_tile(data::sample_footprints(world, o.footprints, o.sample_seed, ds.footprint), ds.split);
    if (train.empty()) throw UsageError("the split leaves no training samples");
    ds.stats = data::compute_norm_stats(train);
    ds.train = std::move(train);
    ds.validation = std::move(validation);

    ensure_parent(o.out);
    ensure_parent(world_out);
    data::write_dataset(fs::path(o.out), ds);
    write_world_spec(world_out, {o.seed, wp});
    ctx.outputs = {o.out, world_out};
    ctx.summary["train_samples"] = ds.train.size();
    ctx.summary["validation_samples"] = ds.validation.size();
    ctx.summary["label_mean"] = ds.stats->label_mean;
    ctx.summary["label_std"] = ds.stats->label_std;
}

void run_train(const TrainOptions& o, RunContext& ctx) {
    ctx.inputs = {o.data};
    guard_output(o.out, ctx.inputs);
    if (o.members < 1) throw UsageError("--members must be at least 1");
    const auto ds = data::read_dataset(fs::path(o.data));
    if (ds.train.empty()) throw UsageError("dataset has no training samples");

    model::ModelConfig mc;
    mc.num_blocks = o.blocks;
    mc.filters_per_block = o.filters;
    mc.validate();
    training::TrainConfig tc;
    tc.iterations = o.iterations;
    tc.batch_size = o.batch;
    tc.base_lr = o.lr;
    tc.validate();

    fusion::Ensemble e;
    e.stats = stats_of(ds);
    e.assignment_seed = o.assignment_seed;
    const auto train = normalized(ds.train, e.stats);
    fs::create_directories(o.out);
    for (int m = 0; m < o.members; ++m) {
        tc.seed = o.seed + static_cast<std::uint64_t>(m);
        double running = 0.0;
        auto result = training::train(model::build(mc, o.seed + static_cast<std::uint64_t>(m)), train, tc,
                                      [&](const training::TrainLogEntry& s) {
                                          running = s.step == 1 ? s.loss : 0.99 * running + 0.01 * s.loss;
                                          if (o.log_every > 0 && s.step % o.log_every == 0)
                                              std::fprintf(stderr, "member %d step %zu loss %.4f lr %.3g\n", m,
                                                           s.step, running, s.lr);
                                      });
        write_log(fs::path(o.out) / ("member" + std::to_string(m) + ".log.jsonl"), result.log);
        e.members.push_back(std::move(result.params));
    }
    fusion::save_ensemble(o.out, e);
    ctx.outputs = ensemble_files(o.out, o.members, true);
    ctx.summary = validation_summary(e, ds);
    ctx.summary["parameters_per_member"] = model::parameter_count(mc);
}

void run_finetune(const FinetuneOptions& o, RunContext& ctx) {
    ctx.inputs = ensemble_files(o.ensemble, 0, false);
    ctx.inputs.push_back(o.data);
    guard_output(o.out, {o.ensemble, o.data});
    auto e = load_checked_ensemble(o.ensemble);
    for (int m = 0; m < e.size(); ++m) ctx.inputs.push_back(fs::path(o.ensemble) / ("member" + std::to_string(m) + ".ckpt"));
    const auto ds = data::read_dataset(fs::path(o.data));
    if (ds.train.empty()) throw UsageError("dataset has no training samples");

    std::vector<float> labels;
    for (const auto& s : ds.train) labels.push_back(s.label);
    const auto weights = training::compute_balance_weights(labels, o.bin_width);
    const auto train = normalized(ds.train, e.stats);

    fs::create_directories(o.out);
    const auto before = validation_summary(e, ds);
    for (int m = 0; m < e.size(); ++m) {
        training::FinetuneConfig fc;
        fc.iterations = o.iterations;
        fc.batch_size = o.batch;
        fc.lr = o.lr;
        fc.seed = o.seed + static_cast<std::uint64_t>(m);
        std::vector<training::TrainLogEntry> log;
        e.members[static_cast<std::size_t>(m)] =
            training::finetune_mean_head(e.members[static_cast<std::size_t>(m)], train, weights, fc, &log);
        write_log(fs::path(o.out) / ("member" + std::to_string(m) + ".log.jsonl"), log);
    }
    fusion::save_ensemble(o.out, e);
    ctx.outputs = ensemble_files(o.out, e.size(), true);
    ctx.summary["before"] = before;
    ctx.summary["after"] = validation_summary(e, ds);
    ctx.summary["height_bins"] = weights.counts.size();
}

void run_infer(const InferOptions& o, RunContext& ctx) {
    ctx.inputs = ensemble_files(o.ensemble, 0, false);
    ctx.inputs.push_back(o.data);
    guard_output(o.out, {o.ensemble, o.data});
    const auto e = load_checked_ensemble(o.ensemble);
    for (int m = 0; m < e.size(); ++m) ctx.inputs.push_back(fs::path(o.ensemble) / ("member" + std::to_string(m) + ".ckpt"));
    const auto ds = data::read_dataset(fs::path(o.data));
    const auto& samples = o.split == "train" ? ds.train : ds.validation;
    if (samples.empty()) throw UsageError("the " + o.split + " split is empty");
    ensure_parent(o.out);
    write_predictions(o.out, predict_samples(e, samples), false);
    ctx.outputs = {o.out};
    ctx.summary["samples"] = samples.size();
    ctx.summary["members"] = e.size();
}

void run_fuse(const FuseOptions& o, RunContext& ctx) {
    ctx.inputs = {o.predictions};
    guard_output(o.out, ctx.inputs);
    bool fused = false;
    const auto rows = read_predictions(o.predictions, fused);
    if (fused) throw UsageError(o.predictions + " is already fused");
    if (rows.empty()) throw UsageError(o.predictions + " has no rows");

    // samples in order of first appearance; one date per member id
    std::map<std::size_t, int> column;
    std::vector<const PredictionRow*> first;
    int members = 0;
    for (const auto& r : rows) {
        if (r.member < 0) throw FormatError("negative member id in " + o.predictions);
        members = std::max(members, r.member + 1);
        if (column.emplace(r.sample, static_cast<int>(first.size())).second) first.push_back(&r);
    }
    const int width = static_cast<int>(first.size());
    fusion::ObservationStack stack;
    stack.height = 1;
    stack.width = width;
    for (int m = 0; m < members; ++m) {
        fusion::Observation ob;
        ob.mean = data::Grid<float>(1, 1, width, 0.0f);
        ob.variance = data::Grid<float>(1, 1, width, 1.0f);
        ob.valid = data::Grid<std::uint8_t>(1, 1, width, 0);
        ob.member = m;
        stack.dates.push_back(std::move(ob));
    }
    for (const auto& r : rows) {
        auto& ob = stack.dates[static_cast<std::size_t>(r.member)];
        const int c = column.at(r.sample);
        if (ob.valid.at(0, c)) throw FormatError("duplicate (sample, member) row in " + o.predictions);
        ob.mean.at(0, c) = static_cast<float>(r.mean);
        ob.variance.at(0, c) = static_cast<float>(r.variance);
        ob.valid.at(0, c) = 1;
    }
    const auto f = fusion::fuse(stack, o.variance_floor);
    std::vector<PredictionRow> out;
    for (int c = 0; c < width; ++c) {
        const auto& r = *first[static_cast<std::size_t>(c)];
        out.push_back({r.sample, r.x, r.y, r.label, -1, f.mean.at(0, c), f.variance.at(0, c)});
    }
    ensure_parent(o.out);
    write_predictions(o.out, out, true);
    ctx.outputs = {o.out};
    ctx.summary["samples"] = width;
    ctx.summary["members"] = members;
}

void run_evaluate(const EvaluateOptions& o, RunContext& ctx) {
    ctx.inputs = {o.predictions};
    guard_output(o.out, ctx.inputs);
    bool fused = false;
    const auto rows = read_predictions(o.predictions, fused);
    if (!fused) throw UsageError(o.predictions + " holds per-member rows; run fuse first");
    std::vector<metrics::EvalPair> pairs;
    for (const auto& r : rows) pairs.push_back({r.mean, r.label, r.variance});
    const auto report = metrics::evaluate_pairs(pairs, o.bins, parse_bin_mode(o.bin_mode));
    ensure_parent(o.out);
    io::write_file_atomic(o.out, metrics::report_to_text(report));
    ctx.outputs = {o.out};
    ctx.summary["n"] = report.overall.count;
    ctx.summary["rmse"] = report.overall.rmse;
    ctx.summary["me"] = report.overall.me;
    ctx.summary["armse"] = report.balanced.armse;
    ctx.summary["uce"] = report.calibration.uce;
}

void run_map(const MapOptions& o, RunContext& ctx) {
    ctx.inputs = ensemble_files(o.ensemble, 0, false);
    ctx.inputs.push_back(o.world);
    guard_output(o.out, {o.ensemble, o.world});
    if (o.first_day > o.last_day) throw UsageError("--first-day is after --last-day");
    if (o.member_mode != "assigned" && o.member_mode != "all")
        throw UsageError("unknown member mode " + o.member_mode);
    const auto spec = read_world_spec(o.world);
    const auto world = data::generate_world(spec.seed, spec.params);
    const auto e = load_checked_ensemble(o.ensemble);
    for (int m = 0; m < e.size(); ++m) ctx.inputs.push_back(fs::path(o.ensemble) / ("member" + std::to_string(m) + ".ckpt"));

    tiler::MapOptions mo;
    mo.tile_size = o.tile_size;
    mo.workers = o.workers;
    mo.tile.max_orbits = o.max_orbits;
    mo.tile.images_per_orbit = o.images;
    mo.tile.window = {o.first_day, o.last_day};
    mo.tile.mode = o.member_mode == "all" ? fusion::MemberMode::all_members : fusion::MemberMode::assigned;
    mo.out_dir = fs::path(o.out);
    fs::create_directories(o.out);
    const auto r = tiler::run_map(world, e, mo);

    const fs::path dir(o.out);
    for (const auto& t : r.tiles)
        if (t.ok)
            for (const char* ch : {"height", "std", "mask"}) ctx.outputs.push_back(tiler::tile_raster_path(dir, t.id, ch));
    const auto height = tiler::mosaic_height(r);
    const auto std_m = tiler::mosaic_std(r);
    const auto mask = tiler::mosaic_mask(r);
    tiler::write_raster(dir / "map.height.raster",
                        world_header(world, "mean_height_m", tiler::kHeightNoData, tiler::RasterType::u8),
                        height.values());
    tiler::write_raster(dir / "map.std.raster",
                        world_header(world, "std_height_m", tiler::kStdNoData, tiler::RasterType::f32), std_m.values());
    tiler::write_raster(dir / "map.mask.raster",
                        world_header(world, "mask_code", tiler::kHeightNoData, tiler::RasterType::u8), mask.values());
    for (const char* ch : {"height", "std", "mask"}) ctx.outputs.push_back(dir / (std::string("map.") + ch + ".raster"));

    std::ostringstream report;
    tiler::write_run_report(report, r);
    io::write_file_atomic(dir / "run_report.jsonl", report.str());
    ctx.diagnostics = {dir / "run_report.jsonl"};

    ctx.summary["tiles"] = r.tiles.size();
    ctx.summary["failed"] = r.failed;
    ctx.summary["pixels"] = r.pixels;
    ctx.summary["pixels_per_second"] = r.pixels_per_second();
    if (r.failed > 0) {
        std::fprintf(stderr, "error: %d of %zu tiles failed; see %s\n", r.failed, r.tiles.size(),
                     (dir / "run_report.jsonl").string().c_str());
        ctx.exit_code = 1;
    }
}

void run_report(const ReportOptions& o, RunContext& ctx) {
    const fs::path dir(o.map);
    ctx.inputs = {o.world, dir / "map.height.raster", dir / "map.std.raster", dir / "map.mask.raster"};
    guard_output(o.out, ctx.inputs);
    const auto spec = read_world_spec(o.world);
    const auto world = data::generate_world(spec.seed, spec.params);
    const auto height = tiler::read_raster(ctx.inputs[1]);
    const auto std_m = tiler::read_raster(ctx.inputs[2]);
    const auto mask = tiler::read_raster(ctx.inputs[3]);
    for (const auto* r : {&height, &std_m, &mask})
        if (r->header.width != world.width() || r->header.height != world.height())
            throw UsageError("map extent does not match the world");

    std::size_t counts[3] = {0, 0, 0};
    std::size_t tall[3] = {0, 0, 0};
    const double thresholds[3] = {5.0, 15.0, 30.0};
    std::vector<metrics::EvalPair> pairs;
    for (int y = 0; y < world.height(); ++y)
        for (int x = 0; x < world.width(); ++x) {
            const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(world.width()) +
                           static_cast<std::size_t>(x);
            const auto code = mask.u8[i];
            if (code > 2) throw FormatError("unknown mask code " + std::to_string(code));
            ++counts[code];
            if (code != 0) continue;
            const double h = height.u8[i];
            for (int k = 0; k < 3; ++k) tall[k] += h >= thresholds[k];
            const double s = std_m.f32[i];
            pairs.push_back({h, world.true_height.at(y, x), s * s});
        }
    if (pairs.empty()) throw UsageError("the map has no valid pixels");
    const auto metrics_report = metrics::evaluate_pairs(pairs, o.bins);
    std::string text = metrics::report_to_text(metrics_report);
    text += "\n# map\npixels\tvalid\tland_cover\tno_observation\tcover_5m\tcover_15m\tcover_30m\n";
    const double valid = static_cast<double>(counts[0]);
    text += std::to_string(height.u8.size()) + '\t' + std::to_string(counts[0]) + '\t' + std::to_string(counts[1]) +
            '\t' + std::to_string(counts[2]);
    for (std::size_t t : tall) text += '\t' + format_number(static_cast<double>(t) / valid);
    text += '\n';
    ensure_parent(o.out);
    io::write_file_atomic(o.out, text);
    ctx.outputs = {o.out};
    ctx.summary["valid_pixels"] = counts[0];
    ctx.summary["rmse"] = metrics_report.overall.rmse;
    ctx.summary["me"] = metrics_report.overall.me;
}

}  // namespace canopy::cli
