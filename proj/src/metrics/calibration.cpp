#include "canopy/metrics/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "canopy/numerics/error.hpp"

namespace canopy::metrics {

namespace {

struct Accum {
    std::size_t n = 0;
    double se = 0.0;
    double e = 0.0;
    double ae = 0.0;
    double u = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    void add(const EvalPair& p) {
        const double d = p.prediction - p.reference;
        if (n == 0) lo = hi = p.uncertainty;
        lo = std::min(lo, p.uncertainty);
        hi = std::max(hi, p.uncertainty);
        se += d * d;
        e += d;
        ae += std::fabs(d);
        u += p.uncertainty;
        ++n;
    }
};

}  // namespace

CalibrationReport calibration(std::span<const EvalPair> pairs, std::size_t num_bins, BinMode mode) {
    if (pairs.empty()) throw Error("calibration: no pairs");
    if (num_bins == 0) throw Error("calibration: need at least one bin");
    for (const auto& p : pairs)
        if (!std::isfinite(p.uncertainty) || p.uncertainty < 0.0)
            throw NumericError("calibration: predicted variance must be finite and >= 0");

    std::vector<Accum> acc(num_bins);
    std::vector<double> lower(num_bins), upper(num_bins);
    const std::size_t n = pairs.size();

    if (mode == BinMode::equal_width) {
        auto [mn, mx] = std::minmax_element(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
            return a.uncertainty < b.uncertainty;
        });
        const double lo = mn->uncertainty, hi = mx->uncertainty;
        const double width = (hi - lo) / static_cast<double>(num_bins);
        for (std::size_t k = 0; k < num_bins; ++k) {
            lower[k] = lo + width * static_cast<double>(k);
            upper[k] = k + 1 == num_bins ? hi : lo + width * static_cast<double>(k + 1);
        }
        for (const auto& p : pairs) {
            std::size_t k = 0;
            if (hi > lo) {
                const double t = (p.uncertainty - lo) / (hi - lo) * static_cast<double>(num_bins);
                k = std::min(num_bins - 1, static_cast<std::size_t>(t));
            }
            acc[k].add(p);
        }
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return pairs[a].uncertainty < pairs[b].uncertainty; });
        for (std::size_t k = 0; k < num_bins; ++k) {
            const std::size_t b = k * n / num_bins, e = (k + 1) * n / num_bins;
            for (std::size_t i = b; i < e; ++i) acc[k].add(pairs[order[i]]);
            lower[k] = acc[k].n ? acc[k].lo : 0.0;
            upper[k] = acc[k].n ? acc[k].hi : 0.0;
        }
    }

    CalibrationReport r;
    double se = 0.0, u = 0.0;
    std::size_t populated = 0;
    for (std::size_t k = 0; k < num_bins; ++k) {
        CalibrationBin b{lower[k], upper[k], acc[k].n, 0.0, 0.0, 0.0, 0.0};
        if (acc[k].n) {
            const double m = static_cast<double>(acc[k].n);
            b.rmse = std::sqrt(acc[k].se / m);
            b.me = acc[k].e / m;
            b.mae = acc[k].ae / m;
            b.rmv = std::sqrt(acc[k].u / m);
            const double gap = std::fabs(b.rmse - b.rmv);
            r.uce += m * gap;
            r.auce += gap;
            ++populated;
            se += acc[k].se;
            u += acc[k].u;
        }
        r.bins.push_back(b);
    }
    r.uce /= static_cast<double>(n);
    r.auce /= static_cast<double>(populated);
    r.rmse = std::sqrt(se / static_cast<double>(n));
    r.rmv = std::sqrt(u / static_cast<double>(n));
    return r;
}

}  // namespace canopy::metrics
