#include "fvalue/transform.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <vector>

namespace fvalue {

double median(std::span<const double> values) {
    if (values.empty()) throw ValidationError("median of an empty series");
    std::vector<double> v(values.begin(), values.end());
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

VstParams vst_fit(std::span<const double> series, const VstOptions& opts) {
    VstParams p;
    p.a = median(series);
    std::vector<double> dev(series.size());
    std::transform(series.begin(), series.end(), dev.begin(),
                   [&](double x) { return std::abs(x - p.a); });
    p.b = median(dev);
    if (opts.mad_consistency) p.b *= 1.4826;
    if (p.degenerate())
        spdlog::warn("VST calibration series is constant (median {}); using unit scale", p.a);
    return p;
}

double vst_apply(double x, const VstParams& p) { return std::asinh((x - p.a) / p.scale()); }

double vst_invert(double z, const VstParams& p) { return p.scale() * std::sinh(z) + p.a; }

Panel vst_apply(const Panel& x, const VstParams& p) {
    return x.unaryExpr([&](double v) { return vst_apply(v, p); });
}

Panel vst_invert(const Panel& z, const VstParams& p) {
    return z.unaryExpr([&](double v) { return vst_invert(v, p); });
}

DailyDecomposition split_daily_mean(const Panel& prices) {
    DailyDecomposition d;
    d.daily_mean = prices.rowwise().mean();
    d.deviation = prices.colwise() - d.daily_mean;
    d.remainder.resize(prices.rows(), prices.cols());
    for (Eigen::Index t = 0; t < prices.rows(); ++t)
        for (Eigen::Index h = 0; h < prices.cols(); ++h)
            d.remainder(t, h) = prices(t, h) - (d.daily_mean(t) + d.deviation(t, h));
    return d;
}

Panel recombine(const DailyDecomposition& d) {
    Panel out = d.deviation.colwise() + d.daily_mean;
    if (d.remainder.size() == out.size()) out += d.remainder;
    return out;
}

}  // namespace fvalue
