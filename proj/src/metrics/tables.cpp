#include "canopy/metrics/tables.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <type_traits>

namespace canopy::metrics {

MetricsReport evaluate_pairs(std::span<const EvalPair> pairs, std::size_t calibration_bins, BinMode mode) {
    MetricsReport r;
    r.overall = error_metrics(pairs);
    r.balanced = balanced_metrics(pairs);
    r.calibration = calibration(pairs, calibration_bins, mode);
    r.filtering = filtering_curve(pairs, default_filter_fractions());
    return r;
}

namespace {

void num(std::ostream& os, double v) {
    if (std::isinf(v))
        os << (v > 0 ? "inf" : "-inf");
    else
        os << v;
}

template <typename... Ts>
void row(std::ostream& os, const Ts&... values) {
    bool first = true;
    auto put = [&](const auto& v) {
        if (!first) os << '\t';
        first = false;
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>)
            num(os, v);
        else
            os << v;
    };
    (put(values), ...);
    os << '\n';
}

}  // namespace

void write_report(std::ostream& os, const MetricsReport& r) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(8);

    os << "# summary\n";
    row(os, "n", "rmse", "me", "mae", "rmv", "armse", "ame", "amae", "uce", "auce");
    row(os, r.overall.count, r.overall.rmse, r.overall.me, r.overall.mae, r.overall.rmv, r.balanced.armse,
        r.balanced.ame, r.balanced.amae, r.calibration.uce, r.calibration.auce);

    os << "\n# height_bins\n";
    row(os, "lower", "upper", "n", "rmse", "me", "mae", "rmv");
    for (const auto& b : r.balanced.bins)
        row(os, b.lower, b.upper, b.metrics.count, b.metrics.rmse, b.metrics.me, b.metrics.mae, b.metrics.rmv);

    os << "\n# calibration\n";
    row(os, "lower", "upper", "n", "rmse", "me", "mae", "rmv");
    for (const auto& b : r.calibration.bins) row(os, b.lower, b.upper, b.count, b.rmse, b.me, b.mae, b.rmv);

    os << "\n# filtering\n";
    row(os, "fraction", "retained_pct", "n", "rmse", "me", "mae");
    for (const auto& f : r.filtering) {
        const double total = static_cast<double>(f.metrics.count + f.removed);
        row(os, f.fraction, 100.0 * static_cast<double>(f.metrics.count) / total, f.metrics.count, f.metrics.rmse,
            f.metrics.me, f.metrics.mae);
    }

    os.flags(flags);
    os.precision(prec);
}

std::string report_to_text(const MetricsReport& report) {
    std::ostringstream os;
    write_report(os, report);
    return os.str();
}

}  // namespace canopy::metrics
