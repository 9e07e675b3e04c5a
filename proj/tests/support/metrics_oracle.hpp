#pragma once

// Two-pass scalar-loop reference implementations of the evaluation metrics,
// written independently of the library code.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "canopy/metrics/errors.hpp"

namespace canopy::testing {

struct OracleErrors {
    double rmse = 0.0, me = 0.0, mae = 0.0, rmv = 0.0;
};

inline OracleErrors oracle_errors(const std::vector<metrics::EvalPair>& p) {
    const double n = static_cast<double>(p.size());
    double me = 0.0;
    for (const auto& x : p) me += x.prediction - x.reference;
    me /= n;
    // second pass around the mean error: rmse^2 = var(e) + me^2
    double var = 0.0, mae = 0.0, u = 0.0;
    for (const auto& x : p) {
        const double e = x.prediction - x.reference;
        var += (e - me) * (e - me);
        mae += std::fabs(e);
        u += x.uncertainty;
    }
    return {std::sqrt(var / n + me * me), me, mae / n, std::sqrt(u / n)};
}

struct OracleBalanced {
    double armse = 0.0, ame = 0.0, amae = 0.0;
};

inline OracleBalanced oracle_balanced(const std::vector<metrics::EvalPair>& p, double width = 5.0) {
    std::map<long, std::vector<metrics::EvalPair>> bins;
    for (const auto& x : p) bins[static_cast<long>(std::floor(x.reference / width))].push_back(x);
    OracleBalanced b;
    for (const auto& [k, v] : bins) {
        const auto e = oracle_errors(v);
        b.armse += e.rmse;
        b.ame += e.me;
        b.amae += e.mae;
    }
    const double k = static_cast<double>(bins.size());
    return {b.armse / k, b.ame / k, b.amae / k};
}

struct OracleCalibration {
    double uce = 0.0, auce = 0.0;
};

/// Equal-width bins over [min u, max u].
inline OracleCalibration oracle_calibration(const std::vector<metrics::EvalPair>& p, int k) {
    double lo = p[0].uncertainty, hi = p[0].uncertainty;
    for (const auto& x : p) {
        lo = std::min(lo, x.uncertainty);
        hi = std::max(hi, x.uncertainty);
    }
    std::vector<std::vector<metrics::EvalPair>> bins(static_cast<std::size_t>(k));
    for (const auto& x : p) {
        int b = hi > lo ? static_cast<int>((x.uncertainty - lo) / (hi - lo) * k) : 0;
        b = std::min(b, k - 1);
        bins[static_cast<std::size_t>(b)].push_back(x);
    }
    OracleCalibration c;
    int used = 0;
    for (const auto& v : bins) {
        if (v.empty()) continue;
        const auto e = oracle_errors(v);
        const double gap = std::fabs(e.rmse - e.rmv);
        c.uce += static_cast<double>(v.size()) / static_cast<double>(p.size()) * gap;
        c.auce += gap;
        ++used;
    }
    c.auce /= used;
    return c;
}

inline double rel_diff(double a, double b) { return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-300}); }

}  // namespace canopy::testing
