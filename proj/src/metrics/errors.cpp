#include "canopy/metrics/errors.hpp"

#include <cmath>
#include <map>

#include "canopy/numerics/error.hpp"

namespace canopy::metrics {

ErrorMetrics error_metrics(std::span<const EvalPair> pairs) {
    if (pairs.empty()) throw Error("metrics: no pairs");
    double se = 0.0, e = 0.0, ae = 0.0, u = 0.0;
    for (const auto& p : pairs) {
        const double d = p.prediction - p.reference;
        se += d * d;
        e += d;
        ae += std::fabs(d);
        u += p.uncertainty;
    }
    const double n = static_cast<double>(pairs.size());
    return {pairs.size(), std::sqrt(se / n), e / n, ae / n, std::sqrt(u / n)};
}

double rmse(std::span<const EvalPair> pairs) { return error_metrics(pairs).rmse; }
double me(std::span<const EvalPair> pairs) { return error_metrics(pairs).me; }
double mae(std::span<const EvalPair> pairs) { return error_metrics(pairs).mae; }

BalancedMetrics balanced_metrics(std::span<const EvalPair> pairs, double bin_width) {
    if (pairs.empty()) throw Error("balanced metrics: no pairs");
    if (!(bin_width > 0.0)) throw Error("balanced metrics: bin width must be positive");
    std::map<long, std::vector<EvalPair>> bins;
    for (const auto& p : pairs) {
        if (!(p.reference >= 0.0)) throw Error("balanced metrics: reference heights must be >= 0");
        bins[static_cast<long>(std::floor(p.reference / bin_width))].push_back(p);
    }
    BalancedMetrics out;
    for (const auto& [k, members] : bins) {
        HeightBin b;
        b.lower = static_cast<double>(k) * bin_width;
        b.upper = b.lower + bin_width;
        b.metrics = error_metrics(members);
        out.armse += b.metrics.rmse;
        out.ame += b.metrics.me;
        out.amae += b.metrics.mae;
        out.bins.push_back(b);
    }
    out.bins.back().upper = std::numeric_limits<double>::infinity();
    const double k = static_cast<double>(out.bins.size());
    out.armse /= k;
    out.ame /= k;
    out.amae /= k;
    return out;
}

}  // namespace canopy::metrics
