// Runs the acceptance criteria and prints one PASS/FAIL line for each.
//
//   acceptance            all criteria
//   acceptance 2 3 7      a subset
//
// Criterion 5 fine-tunes the ensemble trained by criterion 4; running 5
// alone trains that ensemble first.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "canopy/data/split.hpp"
#include "canopy/fusion/fuse.hpp"
#include "canopy/metrics/calibration.hpp"
#include "canopy/metrics/errors.hpp"
#include "canopy/metrics/filtering.hpp"
#include "canopy/numerics/binary_io.hpp"
#include "canopy/numerics/memory.hpp"
#include "canopy/tiler/run_map.hpp"
#include "canopy/training/balance.hpp"
#include "canopy/training/nll.hpp"
#include "canopy/training/trainer.hpp"
#include "json.hpp"
#include "support/fusion_oracle.hpp"
#include "support/gradcheck.hpp"
#include "support/metrics_oracle.hpp"
#include "support/random.hpp"
#include "support/world_fixtures.hpp"

using namespace canopy;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. gradients of the NLL through the full network

Outcome gradient_correctness() {
    constexpr std::size_t kProbes = 100;
    constexpr double kTolerance = 1e-4;
    constexpr double kBudgetSeconds = 300.0;
    const auto t0 = std::chrono::steady_clock::now();

    model::ModelConfig c;  // 4 blocks of 32 filters
    const auto p = testing::randomized_network(c, 101, 1.0);
    std::vector<numerics::TensorD> inputs;
    for (const auto& t : p.tensors) inputs.push_back(t.value.cast<double>());
    inputs.push_back(testing::random_tensor<double>(numerics::Shape{1, 15, 8, 8}, 102));
    const std::size_t n_params = p.tensors.size();

    std::mt19937_64 rng(103);
    std::vector<std::size_t> mask;
    std::vector<double> labels;
    std::uniform_real_distribution<double> label(-1.0, 2.0);
    for (std::size_t i = 0; i < 64; i += 3) {
        mask.push_back(i);
        labels.push_back(label(rng));
    }
    auto loss = [&](numerics::BasicTape<double>&, const std::vector<numerics::BasicVar<double>>& v) {
        std::span<const numerics::BasicVar<double>> params(v.data(), n_params);
        const auto g = model::forward_graph<double>(c, params, v[n_params]);
        return training::gaussian_nll<double>(g.mean, g.log_variance, labels, mask);
    };

    // uniform over tensors, then over entries, so that small tensors are probed too
    std::uniform_int_distribution<std::size_t> pick_tensor(0, n_params - 1);
    testing::GradCheckResult total;
    while (total.probes < kProbes) {
        std::vector<std::pair<std::size_t, std::size_t>> probes;
        for (std::size_t k = total.probes; k < kProbes; ++k) {
            const std::size_t t = pick_tensor(rng);
            probes.emplace_back(t, std::uniform_int_distribution<std::size_t>(0, inputs[t].size() - 1)(rng));
        }
        const auto r = testing::gradient_check(loss, inputs, probes, 1e-4);
        total.probes += r.probes;
        total.skipped_kinks += r.skipped_kinks;
        total.max_rel_error = std::max(total.max_rel_error, r.max_rel_error);
    }
    const double secs = seconds_since(t0);
    return {total.max_rel_error <= kTolerance && secs < kBudgetSeconds,
            fmt("%zu probes (%zu skipped at kinks), max relative error %.3g (limit %.0e), %.1f s (limit %.0f s)",
                total.probes, total.skipped_kinks, total.max_rel_error, kTolerance, secs, kBudgetSeconds)};
}

// ---------------------------------------------------------------------------
// 2. fusion against the scalar formulas and Monte-Carlo mixture moments

Outcome fusion_oracle() {
    constexpr int kStacks = 1000;
    constexpr std::size_t kDraws = 1000000;
    constexpr double kFormulaTolerance = 1e-6;
    constexpr double kSigmas = 3.0;
    constexpr double kBudgetSeconds = 120.0;
    const auto t0 = std::chrono::steady_clock::now();

    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> dates(1, 10);
    std::uniform_real_distribution<double> mean(0.0, 40.0), sd(0.3, 8.0), u(0.0, 1.0);
    double worst_formula = 0.0;
    int beyond = 0, compared = 0;
    double worst_z = 0.0;
    for (int s = 0; s < kStacks; ++s) {
        const int T = dates(rng);
        constexpr int H = 2, W = 3;
        fusion::ObservationStack stack;
        stack.height = H;
        stack.width = W;
        for (int t = 0; t < T; ++t) {
            fusion::Observation ob;
            ob.mean = data::Grid<float>(1, H, W, 0.0f);
            ob.variance = data::Grid<float>(1, H, W, 1.0f);
            ob.valid = data::Grid<std::uint8_t>(1, H, W, 1);
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    ob.mean.at(y, x) = static_cast<float>(mean(rng));
                    const double d = sd(rng);
                    ob.variance.at(y, x) = static_cast<float>(d * d);
                    // pixel (0,0) always keeps its dates for the Monte-Carlo check
                    if ((y || x) && u(rng) < 0.2) ob.valid.at(y, x) = 0;
                }
            stack.dates.push_back(std::move(ob));
        }
        const auto fused = fusion::fuse(stack);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                std::vector<double> mu, var;
                std::vector<bool> valid;
                for (const auto& ob : stack.dates) {
                    mu.push_back(ob.mean.at(y, x));
                    var.push_back(ob.variance.at(y, x));
                    valid.push_back(ob.valid.at(y, x) != 0);
                }
                const auto o = testing::fuse_oracle(mu, var, valid);
                if (!o.valid) {
                    if (fused.valid.at(y, x)) worst_formula = INFINITY;
                    continue;
                }
                worst_formula = std::max({worst_formula, testing::rel_diff(fused.mean.at(y, x), o.mean),
                                          testing::rel_diff(fused.variance.at(y, x), o.variance)});
                if (y || x) continue;
                std::vector<double> w;
                double wsum = 0.0;
                for (double v : var) wsum += 1.0 / v;
                for (double v : var) w.push_back(1.0 / v / wsum);
                const auto mc = testing::sample_mixture(mu, var, w, kDraws, 5000 + static_cast<std::uint64_t>(s));
                for (double z : {std::fabs(mc.mean - fused.mean.at(0, 0)) / mc.mean_se,
                                 std::fabs(mc.variance - fused.variance.at(0, 0)) / mc.variance_se}) {
                    ++compared;
                    beyond += z > kSigmas;
                    worst_z = std::max(worst_z, z);
                }
            }
    }
    // With `compared` independent comparisons, about 0.27% exceed 3 standard
    // errors by chance alone; the check accepts up to 1% but none beyond 5.
    const double expected = compared * std::erfc(kSigmas / std::sqrt(2.0));
    const double secs = seconds_since(t0);
    const bool ok = worst_formula <= kFormulaTolerance && beyond <= compared / 100 && worst_z < 5.0 &&
                    secs < kBudgetSeconds;
    return {ok, fmt("formula max relative difference %.3g (limit %.0e); Monte-Carlo %d of %d moments beyond %.0f SE "
                    "(%.1f expected by chance), max %.2f SE; %.1f s (limit %.0f s)",
                    worst_formula, kFormulaTolerance, beyond, compared, kSigmas, expected, worst_z, secs,
                    kBudgetSeconds)};
}

// ---------------------------------------------------------------------------
// 3. metrics against two-pass oracles, and hand fixtures

Outcome metric_oracle() {
    constexpr std::size_t kPairs = 100000;
    constexpr double kTolerance = 1e-9;
    std::mt19937_64 rng(303);
    std::gamma_distribution<double> ref(2.0, 6.0);
    std::normal_distribution<double> err(0.5, 4.0);
    std::uniform_real_distribution<double> unc(0.1, 60.0);
    std::vector<metrics::EvalPair> pairs(kPairs);
    for (auto& p : pairs) {
        p.reference = ref(rng);
        p.prediction = p.reference + err(rng);
        p.uncertainty = unc(rng);
    }
    const auto e = metrics::error_metrics(pairs);
    const auto b = metrics::balanced_metrics(pairs);
    const auto c = metrics::calibration(pairs, 20);
    const auto oe = testing::oracle_errors(pairs);
    const auto ob = testing::oracle_balanced(pairs);
    const auto oc = testing::oracle_calibration(pairs, 20);
    const double worst = std::max({testing::rel_diff(e.rmse, oe.rmse), testing::rel_diff(e.me, oe.me),
                                   testing::rel_diff(e.mae, oe.mae), testing::rel_diff(e.rmv, oe.rmv),
                                   testing::rel_diff(b.armse, ob.armse), testing::rel_diff(b.ame, ob.ame),
                                   testing::rel_diff(b.amae, ob.amae), testing::rel_diff(c.uce, oc.uce),
                                   testing::rel_diff(c.auce, oc.auce)});

    const std::vector<metrics::EvalPair> hand = {{2.0, 1.0, 0.0}, {4.0, 2.0, 0.0}};
    const auto h = metrics::error_metrics(hand);
    const bool me_case = h.me == 1.5 && h.mae == 1.5 && h.rmse == std::sqrt(5.0 / 2.0);
    std::vector<float> labels(100, 0.5f);
    labels.push_back(1.5f);
    const auto w = training::compute_balance_weights(labels, 1.0);
    const bool weight_case = w.bin_weight.size() == 2 && w.bin_weight[0] == 1.0 / 11.0 && w.bin_weight[1] == 10.0 / 11.0;

    return {worst <= kTolerance && me_case && weight_case,
            fmt("max relative difference over 9 metrics on %zu pairs %.3g (limit %.0e); ME=1.5 fixture %s; "
                "[1/11, 10/11] weights %s",
                kPairs, worst, kTolerance, me_case ? "exact" : "MISMATCH", weight_case ? "exact" : "MISMATCH")};
}

// ---------------------------------------------------------------------------
// 4 and 5. synthetic end-to-end recovery and the balanced fine-tune

struct TrainedSetup {
    data::WorldState world;
    std::vector<data::FootprintSample> train, validation;  // raw
    std::vector<data::FootprintSample> train_norm, validation_norm;
    fusion::Ensemble ensemble;
    double train_seconds = 0.0;
};

constexpr int kMembers = 3;
constexpr std::size_t kSteps = 20000;

std::optional<TrainedSetup>& trained_slot() {
    static std::optional<TrainedSetup> s;
    return s;
}

const TrainedSetup& trained() {
    auto& slot = trained_slot();
    if (slot) return *slot;
    TrainedSetup s;
    s.world = data::generate_world(7);
    data::SplitSpec split;
    split.seed = 5;
    auto [tr, va] = data::split_by_tile(data::sample_footprints(s.world, 20000, 11), split);
    s.train = std::move(tr);
    s.validation = std::move(va);
    s.ensemble.stats = data::compute_norm_stats(s.train);
    s.ensemble.assignment_seed = 31;
    for (const auto& x : s.train) s.train_norm.push_back(data::normalize(x, s.ensemble.stats));
    for (const auto& x : s.validation) s.validation_norm.push_back(data::normalize(x, s.ensemble.stats));
    const auto t0 = std::chrono::steady_clock::now();
    for (int m = 0; m < kMembers; ++m) {
        training::TrainConfig tc;
        tc.iterations = kSteps;
        tc.seed = 1 + static_cast<std::uint64_t>(m);
        auto r = training::train(model::build({}, tc.seed), s.train_norm, tc, [&](const training::TrainLogEntry& e) {
            if (e.step % 5000 == 0)
                std::fprintf(stderr, "  member %d step %zu loss %.4f\n", m, e.step, e.loss);
        });
        s.ensemble.members.push_back(std::move(r.params));
    }
    s.train_seconds = seconds_since(t0);
    slot = std::move(s);
    return *slot;
}

/// Fused ensemble prediction at each sample's center, in meters.
std::vector<metrics::EvalPair> ensemble_pairs(const fusion::Ensemble& e, const std::vector<data::FootprintSample>& raw,
                                              const std::vector<data::FootprintSample>& norm) {
    const int n = static_cast<int>(norm.size());
    fusion::ObservationStack stack;
    stack.height = 1;
    stack.width = n;
    for (int m = 0; m < e.size(); ++m) {
        fusion::Observation ob;
        ob.mean = data::Grid<float>(1, 1, n, 0.0f);
        ob.variance = data::Grid<float>(1, 1, n, 1.0f);
        ob.valid = data::Grid<std::uint8_t>(1, 1, n, 1);
        stack.dates.push_back(std::move(ob));
    }
    for (std::size_t i = 0; i < norm.size(); i += 64) {
        const std::size_t k = std::min<std::size_t>(64, norm.size() - i);
        std::vector<std::size_t> idx(k), centers;
        for (std::size_t j = 0; j < k; ++j) idx[j] = i + j;
        const auto image = training::stack_patches(norm, idx, &centers);
        for (int m = 0; m < e.size(); ++m) {
            const auto out = model::forward(e.members[static_cast<std::size_t>(m)], image);
            for (std::size_t j = 0; j < k; ++j) {
                const auto [mu, var] = data::denormalize_prediction(out.mean[centers[j]], out.variance[centers[j]], e.stats);
                stack.dates[static_cast<std::size_t>(m)].mean.at(0, static_cast<int>(i + j)) = static_cast<float>(mu);
                stack.dates[static_cast<std::size_t>(m)].variance.at(0, static_cast<int>(i + j)) = static_cast<float>(var);
            }
        }
    }
    const auto f = fusion::fuse(stack);
    std::vector<metrics::EvalPair> pairs;
    for (int i = 0; i < n; ++i) pairs.push_back({f.mean.at(0, i), raw[static_cast<std::size_t>(i)].label, f.variance.at(0, i)});
    return pairs;
}

Outcome synthetic_recovery() {
    constexpr double kMaxRatio = 0.5;
    constexpr double kBudgetSeconds = 4 * 3600.0;
    const auto& s = trained();
    double mean = 0.0;
    for (const auto& x : s.train) mean += x.label;
    mean /= static_cast<double>(s.train.size());
    const auto pairs = ensemble_pairs(s.ensemble, s.validation, s.validation_norm);
    std::vector<metrics::EvalPair> baseline = pairs;
    for (auto& p : baseline) p.prediction = mean;
    const double rmse = metrics::rmse(pairs), base = metrics::rmse(baseline);
    const double ratio = rmse / base;
    return {ratio <= kMaxRatio && s.train_seconds < kBudgetSeconds,
            fmt("%d members x %zu steps on %zu train / %zu held-out samples: RMSE %.3f m vs global-mean baseline "
                "%.3f m, ratio %.3f (limit %.2f); training %.0f s",
                kMembers, kSteps, s.train.size(), s.validation.size(), rmse, base, ratio, kMaxRatio, s.train_seconds)};
}

Outcome imbalance_correction() {
    const auto& s = trained();
    std::vector<float> labels;
    for (const auto& x : s.train) labels.push_back(x.label);
    const auto weights = training::compute_balance_weights(labels, 1.0);

    fusion::Ensemble tuned = s.ensemble;
    for (int m = 0; m < tuned.size(); ++m) {
        training::FinetuneConfig fc;
        fc.seed = 2 + static_cast<std::uint64_t>(m);
        tuned.members[static_cast<std::size_t>(m)] =
            training::finetune_mean_head(s.ensemble.members[static_cast<std::size_t>(m)], s.train_norm, weights, fc);
    }

    const auto before = metrics::balanced_metrics(ensemble_pairs(s.ensemble, s.validation, s.validation_norm));
    const auto after = metrics::balanced_metrics(ensemble_pairs(tuned, s.validation, s.validation_norm));
    const auto& tb = before.bins.back();
    const auto& ta = after.bins.back();

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < std::min<std::size_t>(64, s.validation_norm.size()); ++i) idx.push_back(i);
    const auto probe = training::stack_patches(s.validation_norm, idx);
    bool identical = true;
    for (int m = 0; m < tuned.size(); ++m) {
        const auto a = model::forward(s.ensemble.members[static_cast<std::size_t>(m)], probe).variance;
        const auto b = model::forward(tuned.members[static_cast<std::size_t>(m)], probe).variance;
        identical = identical && a.shape() == b.shape() &&
                    std::equal(a.values().begin(), a.values().end(), b.values().begin(),
                               [](float x, float y) { return std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y); });
    }
    const bool shrinks = std::fabs(ta.metrics.me) < std::fabs(tb.metrics.me);
    return {shrinks && identical,
            fmt("tallest populated bin [%.0f, %s) m with %zu samples: |aME| %.3f -> %.3f m; aME over bins %.3f -> %.3f; "
                "variance outputs on a %zu-sample probe batch %s",
                tb.lower, std::isinf(tb.upper) ? "inf" : fmt("%.0f", tb.upper).c_str(), tb.metrics.count,
                std::fabs(tb.metrics.me), std::fabs(ta.metrics.me), before.ame, after.ame, idx.size(),
                identical ? "bit-identical" : "CHANGED")};
}

// ---------------------------------------------------------------------------
// 6. calibration and filtering on calibrated heteroscedastic data

Outcome calibration_filtering() {
    constexpr std::size_t kPairs = 100000;
    constexpr double kMaxUce = 0.3;
    std::mt19937_64 rng(606);
    std::gamma_distribution<double> height(2.0, 6.0);
    std::uniform_real_distribution<double> sd(0.5, 10.0);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<metrics::EvalPair> pairs(kPairs);
    for (auto& p : pairs) {
        const double s = sd(rng);
        p.prediction = height(rng);
        p.uncertainty = s * s;
        p.reference = p.prediction + s * z(rng);
    }
    const auto c = metrics::calibration(pairs, 20);
    const auto curve = metrics::filtering_curve(pairs, std::vector<double>{0.0, 0.2});
    const double r0 = curve[0].metrics.rmse, r20 = curve[1].metrics.rmse;
    return {c.uce < kMaxUce && r20 < r0,
            fmt("UCE %.4f m at N=%zu (limit %.1f); filtering RMSE f=0 %.3f m, f=0.2 %.3f m", c.uce, kPairs, kMaxUce, r0,
                r20)};
}

// ---------------------------------------------------------------------------
// 7. tiled map products: worker-count determinism, seams, masks

// Single-worker throughput of this configuration measured on the reference
// desk machine; runs must reach at least half of it.
constexpr double kReferencePixelsPerSecond = 14000.0;

Outcome tiling() {
    const auto world = data::generate_world(7);
    const auto ensemble = testing::test_ensemble(world, 3, 4, 32);
    tiler::MapOptions o;
    o.tile_size = 64;
    const auto d1 = fs::temp_directory_path() / "canopy_acceptance_w1";
    const auto d4 = fs::temp_directory_path() / "canopy_acceptance_w4";
    fs::remove_all(d1);
    fs::remove_all(d4);
    o.workers = 1;
    o.out_dir = d1;
    const auto a = tiler::run_map(world, ensemble, o);
    o.workers = 4;
    o.out_dir = d4;
    const auto b = tiler::run_map(world, ensemble, o);

    int differing_files = 0;
    for (const auto& t : a.tiles)
        for (const char* ch : {"height", "std", "mask"})
            differing_files += io::read_file(tiler::tile_raster_path(d1, t.id, ch)) !=
                               io::read_file(tiler::tile_raster_path(d4, t.id, ch));

    // each tile against a wider window over the same dates, cropped back
    const int halo = tiler::halo_for(ensemble);
    long seam_mismatches = 0;
    for (const auto& t : a.tiles) {
        const auto& p = *t.product;
        const int x0 = std::max(0, p.x0 - 16), y0 = std::max(0, p.y0 - 16);
        const int x1 = std::min(world.width(), p.x0 + p.width + 16), y1 = std::min(world.height(), p.y0 + p.height + 16);
        const auto wide = tiler::predict_region(world, ensemble, p.acquisitions, x0, y0, x1 - x0, y1 - y0, halo);
        const auto own = tiler::predict_region(world, ensemble, p.acquisitions, p.x0, p.y0, p.width, p.height, halo);
        for (int y = 0; y < p.height; ++y)
            for (int x = 0; x < p.width; ++x) {
                const int wy = p.y0 - y0 + y, wx = p.x0 - x0 + x;
                seam_mismatches += wide.mean.at(wy, wx) != own.mean.at(y, x) ||
                                   wide.variance.at(wy, wx) != own.variance.at(y, x) ||
                                   wide.valid.at(wy, wx) != own.valid.at(y, x);
            }
    }

    const auto height = tiler::mosaic_height(a);
    long masked = 0, masked_wrong = 0, valid_255 = 0;
    const auto mask = tiler::mosaic_mask(a);
    for (int y = 0; y < world.height(); ++y)
        for (int x = 0; x < world.width(); ++x) {
            const bool m = data::masked_class(world.class_at(x, y));
            masked += m;
            masked_wrong += m && height.at(y, x) != tiler::kHeightNoData;
            valid_255 += mask.at(y, x) == 0 && height.at(y, x) == tiler::kHeightNoData;
        }
    const bool ok = a.tiles.size() == 16 && a.failed == 0 && b.failed == 0 && differing_files == 0 &&
                    height == tiler::mosaic_height(b) && seam_mismatches == 0 && masked > 0 && masked_wrong == 0 &&
                    valid_255 == 0 && a.pixels_per_second() >= 0.5 * kReferencePixelsPerSecond;
    return {ok, fmt("%zu tiles; rasters differing between 1 and 4 workers: %d; seam mismatches: %ld; masked pixels "
                    "%ld, of which not 255: %ld; valid pixels at 255: %ld; %.0f px/s with 1 worker (floor %.0f), "
                    "%.0f px/s with 4",
                    a.tiles.size(), differing_files, seam_mismatches, masked, masked_wrong, valid_255,
                    a.pixels_per_second(), 0.5 * kReferencePixelsPerSecond, b.pixels_per_second())};
}

// ---------------------------------------------------------------------------
// 8. every CLI subcommand reruns from its manifest byte-identically

Outcome reproducibility() {
#ifndef CANOPY_CLI_PATH
    return {false, "built without the CLI path"};
#else
    const fs::path dir = fs::temp_directory_path() / "canopy_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = CANOPY_CLI_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args + " >>cli.log 2>&1";
        return std::system(cmd.c_str());
    };
    const std::vector<std::pair<std::string, std::string>> steps = {
        {"data.bin", "synth-data --seed 7 --width 96 --height 96 --footprints 1500 --out data.bin"},
        {"ensemble", "train --data data.bin --members 2 --iterations 60 --blocks 1 --filters 8 --log-every 0 --out ensemble"},
        {"ensemble_ft", "finetune --ensemble ensemble --data data.bin --iterations 30 --out ensemble_ft"},
        {"predictions.tsv", "infer --ensemble ensemble_ft --data data.bin --out predictions.tsv"},
        {"fused.tsv", "fuse --predictions predictions.tsv --out fused.tsv"},
        {"evaluation.tsv", "evaluate --predictions fused.tsv --out evaluation.tsv"},
        {"map", "map --world data.bin.world --ensemble ensemble_ft --tiles 48 --workers 2 --out map"},
        {"map_report.tsv", "report --world data.bin.world --map map --out map_report.tsv"},
    };
    int failures = 0, files = 0, differing = 0;
    std::string failed_names;
    for (const auto& [out, args] : steps) {
        if (run(args) != 0) {
            ++failures;
            failed_names += " " + out;
            continue;
        }
        const std::string again = "replay_" + out;
        if (run("replay --manifest " + out + ".manifest.json --out " + again + " --check") != 0) {
            ++failures;
            failed_names += " " + out + "(replay)";
            continue;
        }
        const auto first = nlohmann::json::parse(io::read_file(dir / (out + ".manifest.json")));
        const auto second = nlohmann::json::parse(io::read_file(dir / (again + ".manifest.json")));
        if (first["outputs"].size() != second["outputs"].size()) {
            ++differing;
            continue;
        }
        for (std::size_t i = 0; i < first["outputs"].size(); ++i) {
            ++files;
            differing += io::read_file(dir / first["outputs"][i]["path"].get<std::string>()) !=
                         io::read_file(dir / second["outputs"][i]["path"].get<std::string>());
        }
    }
    return {failures == 0 && differing == 0 && files > 0,
            fmt("%zu subcommands run and replayed; %d failed%s; %d output files compared, %d differ", steps.size(),
                failures, failed_names.c_str(), files, differing)};
#endif
}

}  // namespace

int main(int argc, char** argv) {
    numerics::tune_allocator();
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"gradient correctness", gradient_correctness},
        {"fusion oracle", fusion_oracle},
        {"metric and calibration oracle", metric_oracle},
        {"end-to-end synthetic recovery", synthetic_recovery},
        {"imbalance correction direction", imbalance_correction},
        {"calibration and filtering", calibration_filtering},
        {"tiling determinism and seams", tiling},
        {"reproducibility from manifests", reproducibility},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = criteria[k].second();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        failed += !r.pass;
        std::printf("criterion %d %s: %s (%s; %.1f s)\n", id, criteria[k].first, r.pass ? "PASS" : "FAIL",
                    r.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
