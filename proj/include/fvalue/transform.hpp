#pragma once

#include "fvalue/types.hpp"

#include <span>

namespace fvalue {

/// Median/MAD standardisation followed by asinh.
struct VstParams {
    double a = 0.0;  // median
    double b = 1.0;  // median absolute deviation, possibly scaled

    /// b == 0 (constant calibration series) is replaced by 1 when applying.
    bool degenerate() const { return !(b > 0.0); }
    double scale() const { return degenerate() ? 1.0 : b; }
};

struct VstOptions {
    /// Multiply the MAD by 1.4826 (normal consistency).
    bool mad_consistency = false;
};

double median(std::span<const double> values);

/// Logs a warning when the series is constant; see VstParams::scale.
VstParams vst_fit(std::span<const double> series, const VstOptions& opts = {});
double vst_apply(double x, const VstParams& p);
double vst_invert(double z, const VstParams& p);

Panel vst_apply(const Panel& x, const VstParams& p);
Panel vst_invert(const Panel& z, const VstParams& p);

/// P = daily_mean + deviation (+ remainder). The remainder carries the rounding error of the
/// subtraction so recombination is bit exact; it is zero for decompositions built from forecasts.
struct DailyDecomposition {
    Eigen::VectorXd daily_mean;
    Panel deviation;
    Panel remainder;
};

DailyDecomposition split_daily_mean(const Panel& prices);
Panel recombine(const DailyDecomposition& d);

}  // namespace fvalue
