#include "fvalue/ingest.hpp"
#include "fvalue/transform.hpp"

#include <algorithm>

namespace fvalue {

namespace {

constexpr std::array<size_t, 3> kLagDays{1, 2, 7};
constexpr size_t kCommodityLag = 2;

double row_mean(const Panel& p, size_t t) { return p.row(static_cast<Eigen::Index>(t)).mean(); }

std::vector<double> deterministic_terms(const FrameSource& src, Family family, size_t t) {
    const int wd = (*src.weekday)[t];
    if (family == Family::LEAR) {
        std::vector<double> d(7, 0.0);
        d[static_cast<size_t>(wd)] = 1.0;
        return d;
    }
    return {1.0, wd >= 5 ? 1.0 : 0.0, wd == 0 ? 1.0 : 0.0};
}

std::vector<double> common_daily(const FrameSource& src, size_t t) {
    const auto prev = src.level->row(static_cast<Eigen::Index>(t - 1));
    std::vector<double> x1{prev.minCoeff(), prev.maxCoeff(), prev.mean(), row_mean(*src.res, t),
                           row_mean(*src.load, t)};
    const auto c = src.commodities->row(static_cast<Eigen::Index>(t - kCommodityLag));
    for (int k = 0; k < kCommodities; ++k) x1.push_back(c(k));
    return x1;
}

void check_history(size_t t) {
    if (t < kMaxLagDays)
        throw ValidationError("insufficient history: target day needs " +
                              std::to_string(kMaxLagDays) + " prior days");
}

}  // namespace

void RegressorFrame::flatten_into(double* out) const {
    for (const auto* part : {&deterministic, &ar_terms, &x1, &x2, &augmentation})
        out = std::copy(part->begin(), part->end(), out);
}

size_t frame_width(Family family, Estimator estimator, const FrameOptions& opts) {
    if (family == Family::LEAR) {
        const size_t base = 7 + 72 + (opts.lear_keep_x1 ? 9 : 0) + 96;
        return estimator == Estimator::Pooled ? base + 7 : base;
    }
    return 3 + 3 + 9 + 4;
}

size_t daily_frame_width(Family family) { return (family == Family::LEAR ? 7 : 3) + 3 + 9 + 2; }

RegressorFrame make_frame(const FrameSource& src, Family family, Estimator estimator, size_t t,
                          int hour, const FrameOptions& opts) {
    check_history(t);
    const Panel& y = *src.target;
    const Panel& load = *src.load;
    const Panel& res = *src.res;
    const auto ti = static_cast<Eigen::Index>(t);
    const Eigen::Index hi = hour - 1;

    RegressorFrame f;
    f.target_day = (*src.dates)[t];
    f.hour = hour;
    f.deterministic = deterministic_terms(src, family, t);

    if (family == Family::LEAR) {
        f.ar_terms.reserve(72);
        for (size_t lag : kLagDays)
            for (Eigen::Index h = 0; h < kHours; ++h)
                f.ar_terms.push_back(y(ti - static_cast<Eigen::Index>(lag), h));
        if (opts.lear_keep_x1) f.x1 = common_daily(src, t);
        f.x2.reserve(96);
        for (const Panel* p : {&load, &res})
            for (Eigen::Index h = 0; h < kHours; ++h) f.x2.push_back((*p)(ti, h));
        for (const Panel* p : {&load, &res})
            for (Eigen::Index h = 0; h < kHours; ++h) f.x2.push_back((*p)(ti - 1, h));
        if (estimator == Estimator::Pooled) {
            f.augmentation = {y(ti - 1, hi),    y(ti - 2, hi),      y(ti - 7, hi),
                              load(ti, hi),     load(ti - 1, hi),   res(ti, hi),
                              res(ti - 1, hi)};
        }
        return f;
    }

    for (size_t lag : kLagDays) f.ar_terms.push_back(y(ti - static_cast<Eigen::Index>(lag), hi));
    f.x1 = common_daily(src, t);
    f.x2 = {load(ti, hi), res(ti, hi), load(ti - 1, hi), res(ti - 1, hi)};
    return f;
}

RegressorFrame make_daily_frame(const FrameSource& src, Family family, size_t t) {
    check_history(t);
    const Panel& ybar = *src.target;
    const auto ti = static_cast<Eigen::Index>(t);
    RegressorFrame f;
    f.target_day = (*src.dates)[t];
    f.hour = 0;
    f.deterministic = deterministic_terms(src, family, t);
    for (size_t lag : kLagDays) f.ar_terms.push_back(ybar(ti - static_cast<Eigen::Index>(lag), 0));
    f.x1 = common_daily(src, t);
    f.x2 = {row_mean(*src.load, t - 1), row_mean(*src.res, t - 1)};
    return f;
}

std::vector<RegressorFrame> build_frames(const MarketDataset& ds, Family family, DepVar depvar,
                                         Estimator estimator, const FrameOptions& opts) {
    if (ds.days() <= kMaxLagDays)
        throw ValidationError("insufficient history: dataset has " + std::to_string(ds.days()) +
                              " days, need more than " + std::to_string(kMaxLagDays));
    Panel deviation;
    FrameSource src{&ds.prices, &ds.prices, &ds.load_fc, &ds.res_fc,
                    &ds.commodities, &ds.weekday, &ds.dates};
    if (depvar == DepVar::Deviation) {
        deviation = split_daily_mean(ds.prices).deviation;
        src.target = &deviation;
    }
    std::vector<RegressorFrame> frames;
    frames.reserve((ds.days() - kMaxLagDays) * kHours);
    for (size_t t = kMaxLagDays; t < ds.days(); ++t)
        for (int h = 1; h <= kHours; ++h) frames.push_back(make_frame(src, family, estimator, t, h, opts));
    return frames;
}

}  // namespace fvalue
