#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support/gradcheck.hpp"
#include "support/model_fixtures.hpp"
#include "support/random.hpp"

#include "canopy/numerics/ops.hpp"
#include "canopy/training/balance.hpp"
#include "canopy/training/nll.hpp"
#include "canopy/training/schedule.hpp"
#include "canopy/training/trainer.hpp"

using namespace canopy;
using namespace canopy::training;
using numerics::Shape;
using numerics::Tensor;
using numerics::TensorD;

namespace {

model::ModelConfig tiny(int blocks = 1, int filters = 6) {
    model::ModelConfig c;
    c.num_blocks = blocks;
    c.filters_per_block = filters;
    return c;
}

/// Patches whose channel 0 is a constant u drawn per sample; every other
/// channel is noise. The label is produced by `label(u, rng)`.
template <typename F>
std::vector<data::FootprintSample> feature_samples(std::size_t n, std::uint64_t seed, F label) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<data::FootprintSample> out(n);
    for (auto& s : out) {
        const double u = unit(rng);
        s.patch.resize(data::kPatchValues);
        for (int i = 0; i < 225; ++i) s.patch[static_cast<std::size_t>(i)] = static_cast<float>(2.0 * u - 1.0);
        for (std::size_t i = 225; i < s.patch.size(); ++i) s.patch[i] = static_cast<float>(0.3 * noise(rng));
        s.label = static_cast<float>(label(u, rng));
    }
    return out;
}

bool same_tensor(const Tensor& a, const Tensor& b) {
    return a.shape() == b.shape() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

double nll_loss(const std::vector<float>& mean, const std::vector<float>& logvar, const std::vector<float>& labels,
                const std::vector<std::size_t>& mask, const std::vector<float>* w = nullptr) {
    numerics::Tape tape;
    const auto n = static_cast<int>(mean.size());
    auto m = tape.constant(Tensor(Shape{n}, mean));
    auto s = tape.constant(Tensor(Shape{n}, logvar));
    return gaussian_nll<float>(m, s, labels, mask, w).value().item();
}

}  // namespace

TEST_CASE("nll hand values") {
    CHECK(nll_loss({3.0f}, {0.0f}, {3.0f}, {0}) == 0.0);
    CHECK(nll_loss({5.0f}, {0.0f}, {3.0f}, {0}) == doctest::Approx(2.0));
    // sigma^2 = e: 4/(2e) + 1/2
    CHECK(nll_loss({1.0f}, {1.0f}, {3.0f}, {0}) == doctest::Approx(2.0 / std::exp(1.0) + 0.5));
    // mean over the masked pixels
    CHECK(nll_loss({5.0f, 0.0f, 3.0f}, {0.0f, 0.0f, 0.0f}, {3.0f, 3.0f}, {0, 2}) == doctest::Approx(1.0));
    const std::vector<float> w = {0.5f, 1.5f};
    CHECK(nll_loss({5.0f, 1.0f}, {0.0f, 0.0f}, {3.0f, 3.0f}, {0, 1}, &w) == doctest::Approx((0.5 * 2 + 1.5 * 2) / 2));
}

TEST_CASE("nll ignores unlabeled pixels in value and gradient") {
    const std::vector<float> labels = {1.0f, -2.0f};
    const std::vector<std::size_t> mask = {1, 3};
    auto m = testing::random_floats(5, 1), s = testing::random_floats(5, 2);
    const double base = nll_loss(m, s, labels, mask);
    for (std::size_t i : {0u, 2u, 4u}) {
        auto m2 = m, s2 = s;
        m2[i] += 10.0f;
        s2[i] -= 3.0f;
        CHECK(nll_loss(m2, s2, labels, mask) == base);
    }
    numerics::Tape tape;
    auto vm = tape.parameter(Tensor(Shape{5}, m));
    auto vs = tape.parameter(Tensor(Shape{5}, s));
    tape.backward(gaussian_nll<float>(vm, vs, labels, mask));
    for (std::size_t i : {0u, 2u, 4u}) {
        CHECK(vm.grad()[i] == 0.0f);
        CHECK(vs.grad()[i] == 0.0f);
    }
    CHECK(vm.grad()[1] != 0.0f);
}

TEST_CASE("nll rejects an empty mask and mismatched labels") {
    CHECK_THROWS_AS(nll_loss({1.0f}, {0.0f}, {}, {}), Error);
    CHECK_THROWS_AS(nll_loss({1.0f, 2.0f}, {0.0f, 0.0f}, {1.0f}, {0, 1}), Error);
    CHECK_THROWS_AS(nll_loss({1.0f}, {0.0f}, {1.0f}, {3}), Error);
}

TEST_CASE("nll gradients match finite differences") {
    const std::vector<TensorD> inputs = {testing::random_tensor<double>(Shape{9}, 3, -2, 2),
                                         testing::random_tensor<double>(Shape{9}, 4, -1.5, 1.5)};
    const std::vector<double> labels = {0.3, -1.0, 2.0, 0.7};
    const std::vector<std::size_t> mask = {0, 3, 4, 8};
    const std::vector<double> w = {0.2, 1.0, 2.5, 0.3};
    auto build = [&](numerics::BasicTape<double>&, const std::vector<numerics::BasicVar<double>>& v) {
        return numerics::add(gaussian_nll<double>(v[0], v[1], labels, mask),
                             gaussian_nll<double>(v[0], v[1], labels, mask, &w));
    };
    std::vector<std::pair<std::size_t, std::size_t>> probes;
    for (std::size_t i : mask) {
        probes.emplace_back(0, i);
        probes.emplace_back(1, i);
    }
    const auto r = testing::gradient_check(build, inputs, probes);
    CHECK(r.probes == probes.size());
    CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("loss gradient w.r.t. the image vanishes outside the labeled receptive fields") {
    const auto c = tiny(1, 4);
    const int r = model::receptive_radius(c);
    const auto p = testing::randomized_network(c, 3, 1.0);
    numerics::Tape tape;
    const auto vars = model::bind<float>(tape, p, false);
    auto image = tape.parameter(testing::random_tensor(Shape{1, 15, 15, 15}, 4));
    const auto out = model::forward_graph<float>(c, vars, image);
    const std::vector<std::size_t> mask = {7 * 15 + 7, 2 * 15 + 12};
    tape.backward(gaussian_nll<float>(out.mean, out.log_variance, {0.5f, -0.2f}, mask));
    const Tensor& g = image.grad();
    int inside_nonzero = 0;
    for (int y = 0; y < 15; ++y)
        for (int x = 0; x < 15; ++x) {
            const bool near = (std::abs(y - 7) <= r && std::abs(x - 7) <= r) ||
                              (std::abs(y - 2) <= r && std::abs(x - 12) <= r);
            for (int ch = 0; ch < 15; ++ch) {
                const float v = g.at(0, ch, y, x);
                if (!near) CHECK(v == 0.0f);
                if (near && v != 0.0f) ++inside_nonzero;
            }
        }
    CHECK(inside_nonzero > 0);
}

TEST_CASE("schedule drops the rate tenfold at 40 and 70 percent") {
    TrainConfig cfg;
    cfg.iterations = 100;
    CHECK(drop_steps(cfg) == std::vector<std::size_t>{40, 70});
    for (std::size_t s = 0; s < 100; ++s) {
        const double want = s < 40 ? 1e-4 : s < 70 ? 1e-4 * 0.1 : 1e-4 * 0.1 * 0.1;
        CHECK(learning_rate_at(cfg, s) == want);
    }
    cfg.iterations = 20000;
    CHECK(drop_steps(cfg) == std::vector<std::size_t>{8000, 14000});
}

TEST_CASE("schedule validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.base_lr = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.drop_at = {0.7, 0.4};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.drop_at = {1.5};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("balance weights: two bins of 100 and 1 samples") {
    std::vector<float> labels(100, 0.5f);
    labels.push_back(1.5f);
    const auto w = compute_balance_weights(labels);
    REQUIRE(w.counts.size() == 2);
    CHECK(w.counts[0] == 100);
    CHECK(w.counts[1] == 1);
    CHECK(w.bin_weight[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-15));
    CHECK(w.bin_weight[1] == doctest::Approx(10.0 / 11.0).epsilon(1e-15));
    CHECK(w.sample_weight[0] == w.bin_weight[0]);
    CHECK(w.sample_weight[100] == w.bin_weight[1]);
}

TEST_CASE("balance weights: uniform histogram, empty bins, edges and single bin") {
    std::vector<float> uniform;
    for (int k = 0; k < 5; ++k)
        for (int i = 0; i < 7; ++i) uniform.push_back(static_cast<float>(k) + 0.1f * static_cast<float>(i));
    for (double q : compute_balance_weights(uniform).sample_weight) CHECK(q == doctest::Approx(0.2));

    const auto gap = compute_balance_weights(std::vector<float>{0.2f, 5.5f});
    CHECK(gap.counts.size() == 6);
    CHECK(gap.counts[2] == 0);
    CHECK(gap.bin_weight[2] == 0.0);
    CHECK(gap.sample_weight[0] == doctest::Approx(0.5));
    CHECK(gap.sample_weight[1] == doctest::Approx(0.5));

    const auto edge = compute_balance_weights(std::vector<float>{1.0f, 0.999f});
    CHECK(edge.bin_of(1.0) == 1);
    CHECK(edge.bin_of(0.999) == 0);

    const auto one = compute_balance_weights(std::vector<float>{3.2f, 3.4f, 3.9f});
    for (double q : one.sample_weight) CHECK(q == 1.0);

    CHECK_THROWS_AS(compute_balance_weights(std::vector<float>{}), Error);
    CHECK_THROWS_AS(compute_balance_weights(std::vector<float>{-0.5f}), Error);
}

TEST_CASE("balance weights sum to one over bins and rescale to unit mean") {
    std::mt19937_64 rng(5);
    std::exponential_distribution<float> e(0.2f);
    std::vector<float> labels(2000);
    for (auto& l : labels) l = e(rng);
    const auto w = compute_balance_weights(labels);
    double sum = 0.0;
    for (std::size_t k = 0; k < w.counts.size(); ++k) {
        if (w.counts[k]) {
            CHECK(w.bin_weight[k] > 0.0);
            sum += w.bin_weight[k];
        }
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    const auto u = w.unit_mean_weights();
    double m = 0.0;
    for (double x : u) m += x;
    CHECK(m / static_cast<double>(u.size()) == doctest::Approx(1.0).epsilon(1e-12));
    // the sparsest populated bin weighs more per sample than the densest
    std::size_t rare = 0, dense = 0;
    for (std::size_t k = 0; k < w.counts.size(); ++k) {
        if (w.counts[k] && (!w.counts[rare] || w.counts[k] < w.counts[rare])) rare = k;
        if (w.counts[k] > w.counts[dense]) dense = k;
    }
    REQUIRE(w.counts[rare] < w.counts[dense]);
    CHECK(w.bin_weight[rare] > w.bin_weight[dense]);
}

TEST_CASE("training is deterministic and lowers the loss") {
    const auto samples = feature_samples(200, 1, [](double u, auto&) { return 2.0 * u - 1.0; });
    TrainConfig cfg;
    cfg.iterations = 60;
    cfg.batch_size = 8;
    cfg.base_lr = 3e-3;
    cfg.seed = 4;
    std::vector<TrainLogEntry> seen;
    const auto a = train(model::build(tiny(), 1), samples, cfg, [&](const TrainLogEntry& e) { seen.push_back(e); });
    const auto b = train(model::build(tiny(), 1), samples, cfg);
    CHECK(a.params == b.params);
    REQUIRE(a.log.size() == 60);
    CHECK(seen.size() == 60);
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].step == i + 1);
        CHECK(a.log[i].lr == learning_rate_at(cfg, i));
        CHECK(a.log[i].grad_norm >= 0.0);
    }
    double first = 0, last = 0;
    for (int i = 0; i < 10; ++i) {
        first += a.log[static_cast<std::size_t>(i)].loss;
        last += a.log[a.log.size() - 1 - static_cast<std::size_t>(i)].loss;
    }
    CHECK(last < first);
}

TEST_CASE("constant labels: the mean head converges to the constant") {
    // Identical inputs too, so nothing but the constant can be fitted.
    auto samples = feature_samples(64, 2, [](double, auto&) { return 0.7; });
    for (auto& s : samples) s.patch = samples[0].patch;
    TrainConfig cfg;
    cfg.iterations = 800;
    cfg.batch_size = 8;
    cfg.base_lr = 1e-2;
    cfg.seed = 1;
    const auto r = train(model::build(tiny(), 3), samples, cfg);
    std::vector<std::size_t> idx(samples.size()), centers;
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const auto out = model::forward(r.params, stack_patches(samples, idx, &centers));
    for (std::size_t c : centers) CHECK(std::fabs(out.mean[c] - 0.7f) < 0.05f);
}

TEST_CASE("heteroscedastic labels: learned spread is larger where the noise is") {
    const auto samples = feature_samples(3000, 3, [](double u, std::mt19937_64& rng) {
        std::normal_distribution<double> n(0.0, u < 0.5 ? 0.2 : 0.4);
        return 2.0 * u - 1.0 + n(rng);
    });
    TrainConfig cfg;
    cfg.iterations = 1500;
    cfg.batch_size = 16;
    cfg.base_lr = 3e-3;
    cfg.seed = 2;
    const auto r = train(model::build(tiny(1, 8), 5), samples, cfg);
    std::vector<std::size_t> idx(500), centers;
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const auto out = model::forward(r.params, stack_patches(samples, idx, &centers));
    double tall = 0, short_ = 0, nt = 0, ns = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double sd = std::sqrt(out.variance[centers[i]]);
        if (samples[i].patch[0] > 0.0f) {
            tall += sd;
            ++nt;
        } else {
            short_ += sd;
            ++ns;
        }
    }
    CHECK(tall / nt > 1.3 * (short_ / ns));
}

TEST_CASE("non-finite labels abort training with a divergence error") {
    auto samples = feature_samples(4, 1, [](double u, auto&) { return u; });
    for (auto& s : samples) s.label = std::nanf("");
    TrainConfig cfg;
    cfg.iterations = 3;
    cfg.batch_size = 2;
    CHECK_THROWS_AS(train(model::build(tiny(), 1), samples, cfg), DivergenceError);
}

TEST_CASE("fine-tuning touches only the mean head") {
    const auto samples = feature_samples(300, 4, [](double u, auto&) { return 3.0 * u * u; });
    const auto params = testing::randomized_network(tiny(2, 6), 7);
    std::vector<float> labels;
    for (const auto& s : samples) labels.push_back(s.label);
    const auto w = compute_balance_weights(labels, 0.5);
    FinetuneConfig fc;
    fc.iterations = 50;
    fc.batch_size = 8;
    fc.lr = 1e-2;
    fc.seed = 3;
    std::vector<TrainLogEntry> log;
    const auto tuned = finetune_mean_head(params, samples, w, fc, &log);
    CHECK(log.size() == 50);
    const std::size_t head = params.mean_head_index();
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        if (i == head || i == head + 1)
            CHECK_FALSE(same_tensor(tuned.tensors[i].value, params.tensors[i].value));
        else
            CHECK(same_tensor(tuned.tensors[i].value, params.tensors[i].value));
    }
    const Tensor probe = testing::random_tensor(Shape{2, 15, 20, 20}, 9);
    CHECK(same_tensor(model::forward(tuned, probe).variance, model::forward(params, probe).variance));
}

TEST_CASE("uniform-weight fine-tuning equals an independent head-only ADAM loop") {
    const auto samples = feature_samples(100, 6, [](double u, auto&) { return 1.5 * u - 0.2; });
    const auto params = testing::randomized_network(tiny(1, 5), 8);
    std::vector<float> flat(samples.size(), 0.5f);  // one bin: every weight equal
    FinetuneConfig fc;
    fc.iterations = 40;
    fc.batch_size = 6;
    fc.lr = 5e-3;
    fc.seed = 12;
    const auto tuned = finetune_mean_head(params, samples, compute_balance_weights(flat), fc);

    const auto cf = center_features(params, samples);
    const std::size_t f = static_cast<std::size_t>(cf.filters), head = params.mean_head_index();
    std::vector<double> theta(f + 1), m(f + 1, 0.0), v(f + 1, 0.0);
    for (std::size_t k = 0; k < f; ++k) theta[k] = params.tensors[head].value[k];
    theta[f] = params.tensors[head + 1].value[0];
    std::mt19937_64 rng(fc.seed);
    for (std::size_t t = 1; t <= fc.iterations; ++t) {
        const auto idx = draw_batch(rng, samples.size(), fc.batch_size);
        std::vector<double> g(f + 1, 0.0);
        for (std::size_t i : idx) {
            double mu = theta[f];
            for (std::size_t k = 0; k < f; ++k) mu += theta[k] * cf.features[i * f + k];
            const double s = std::clamp(static_cast<double>(cf.log_variance[i]), -10.0, 10.0);
            const double d = (mu - samples[i].label) / std::exp(s) / static_cast<double>(idx.size());
            for (std::size_t k = 0; k < f; ++k) g[k] += d * cf.features[i * f + k];
            g[f] += d;
        }
        for (std::size_t k = 0; k <= f; ++k) {
            m[k] = 0.9 * m[k] + 0.1 * g[k];
            v[k] = 0.999 * v[k] + 0.001 * g[k] * g[k];
            const double mh = m[k] / (1.0 - std::pow(0.9, static_cast<double>(t)));
            const double vh = v[k] / (1.0 - std::pow(0.999, static_cast<double>(t)));
            theta[k] -= fc.lr * mh / (std::sqrt(vh) + 1e-8);
        }
    }
    for (std::size_t k = 0; k < f; ++k) CHECK(tuned.tensors[head].value[k] == doctest::Approx(theta[k]).epsilon(1e-3));
    CHECK(tuned.tensors[head + 1].value[0] == doctest::Approx(theta[f]).epsilon(1e-3));
}

TEST_CASE("fine-tuning rejects misaligned weights") {
    const auto samples = feature_samples(10, 6, [](double u, auto&) { return u; });
    const auto w = compute_balance_weights(std::vector<float>{1.0f, 2.0f});
    CHECK_THROWS_AS(finetune_mean_head(model::build(tiny(), 0), samples, w, {}), ShapeError);
}

TEST_CASE("train log lines are JSON objects with the documented keys") {
    std::ostringstream os;
    const std::vector<TrainLogEntry> log = {{1, 0.5, 1e-4, 2.0}, {2, 0.25, 1e-5, 1.0}};
    write_train_log(os, log);
    CHECK(os.str() == "{\"step\":1,\"loss\":0.5,\"lr\":0.0001,\"grad_norm\":2.0}\n"
                      "{\"step\":2,\"loss\":0.25,\"lr\":1e-05,\"grad_norm\":1.0}\n");
}

TEST_CASE("stacking patches places each sample in its batch slot") {
    const auto samples = feature_samples(3, 8, [](double u, auto&) { return u; });
    std::vector<std::size_t> idx = {2, 0}, centers;
    const Tensor t = stack_patches(samples, idx, &centers);
    CHECK(t.shape() == Shape{2, 15, 15, 15});
    CHECK(centers == std::vector<std::size_t>{112, 225 + 112});
    CHECK(t.at(1, 4, 3, 9) == samples[0].patch[(4 * 15 + 3) * 15 + 9]);
    CHECK(t.at(0, 0, 7, 7) == samples[2].patch[7 * 15 + 7]);
}
