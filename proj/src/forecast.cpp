#include "fvalue/forecast.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace fvalue {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Fits the family's estimator on (X, y) and predicts the rows of Xnew.
Vector fit_predict(Family family, const Matrix& X, const Vector& y, const Matrix& Xnew,
                   std::uint64_t seed, const ModelSettings& settings) {
    switch (family) {
        case Family::ARX:
            return ols_fit(X, y).predict(Xnew);
        case Family::LEAR: {
            const auto prob = StandardizedProblem::make(X, y);
            const auto grid =
                log_lambda_grid(prob.lambda_max(), settings.lambda_count, settings.lambda_ratio);
            return lasso_fit(X, y, grid, settings.lasso).predict(Xnew);
        }
        case Family::NARX:
            return narx_train(X, y, seed, settings.lm).predict(Xnew);
    }
    throw RuntimeError("unknown model family");
}

Matrix stack_frames(const std::vector<RegressorFrame>& frames, size_t width) {
    Matrix X(static_cast<Eigen::Index>(frames.size()), static_cast<Eigen::Index>(width));
    std::vector<double> buf(width);
    for (size_t r = 0; r < frames.size(); ++r) {
        if (frames[r].size() != width) throw RuntimeError("frame width mismatch");
        frames[r].flatten_into(buf.data());
        for (size_t c = 0; c < width; ++c)
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = buf[c];
    }
    return X;
}

std::vector<double> flat_rows(const Panel& p, Eigen::Index first, Eigen::Index count) {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(count * p.cols()));
    for (Eigen::Index t = first; t < first + count; ++t)
        for (Eigen::Index h = 0; h < p.cols(); ++h) out.push_back(p(t, h));
    return out;
}

}  // namespace

std::array<double, kHours> forecast_day(const ForecastSpec& spec, const MarketDataset& ds,
                                        Date target_day, const ModelSettings& settings) {
    if (spec.is_average()) throw ValidationError("forecast_day: averaged spec has no window");
    const size_t t = ds.index_of(target_day);
    const auto window = static_cast<size_t>(spec.window);
    if (t < window + kMaxLagDays)
        throw ValidationError("insufficient history: window " + std::to_string(spec.window) +
                              " for target " + format_date(target_day) + " needs " +
                              std::to_string(window + kMaxLagDays) + " prior days, have " +
                              std::to_string(t));

    // Local copy of exactly the days the model may see; unknown cells are poisoned so any
    // look-ahead surfaces as a non-finite input.
    MarketDataset local = ds.slice(t - window - kMaxLagDays, window + kMaxLagDays + 1);
    const auto L = static_cast<Eigen::Index>(window + kMaxLagDays);
    const auto first_calib = static_cast<Eigen::Index>(kMaxLagDays);
    const auto W = static_cast<Eigen::Index>(window);
    local.prices.row(L).setConstant(kNaN);
    local.commodities.row(L).setConstant(kNaN);
    local.commodities.row(L - 1).setConstant(kNaN);

    Panel price = local.prices;
    Panel load = local.load_fc;
    VstParams price_vst;
    if (spec.vst) {
        const auto p = flat_rows(local.prices, first_calib, W);
        const auto l = flat_rows(local.load_fc, first_calib, W);
        price_vst = vst_fit(p, settings.vst);
        price = vst_apply(local.prices, price_vst);
        load = vst_apply(local.load_fc, vst_fit(l, settings.vst));
    }

    Panel target = price;
    DailyDecomposition dec;
    Panel daily_mean;
    if (spec.depvar == DepVar::Deviation) {
        dec = split_daily_mean(price);
        target = dec.deviation;
        daily_mean = dec.daily_mean;
    }

    const FrameSource src{&target, &price, &load, &local.res_fc,
                          &local.commodities, &local.weekday, &local.dates};
    const size_t width = frame_width(spec.family, spec.estimator, settings.frames);
    const std::uint64_t seed =
        mix_seed(settings.seed ^ fnv1a(spec.id()),
                 static_cast<std::uint64_t>(target_day.time_since_epoch().count()));

    std::array<double, kHours> out{};
    auto frames_for_hour = [&](int hour) {
        std::vector<RegressorFrame> frames;
        frames.reserve(window);
        for (Eigen::Index d = first_calib; d < L; ++d)
            frames.push_back(make_frame(src, spec.family, spec.estimator, static_cast<size_t>(d),
                                        hour, settings.frames));
        return frames;
    };

    if (spec.estimator == Estimator::Pooled) {
        std::vector<RegressorFrame> frames;
        frames.reserve(window * kHours);
        Vector y(W * kHours);
        Eigen::Index r = 0;
        for (Eigen::Index d = first_calib; d < L; ++d)
            for (int h = 1; h <= kHours; ++h) {
                frames.push_back(make_frame(src, spec.family, spec.estimator,
                                            static_cast<size_t>(d), h, settings.frames));
                y(r++) = target(d, h - 1);
            }
        std::vector<RegressorFrame> next;
        for (int h = 1; h <= kHours; ++h)
            next.push_back(make_frame(src, spec.family, spec.estimator, static_cast<size_t>(L), h,
                                      settings.frames));
        const Vector pred = fit_predict(spec.family, stack_frames(frames, width), y,
                                        stack_frames(next, width), mix_seed(seed, 0), settings);
        for (int h = 0; h < kHours; ++h) out[static_cast<size_t>(h)] = pred(h);
    } else {
        for (int h = 1; h <= kHours; ++h) {
            const auto frames = frames_for_hour(h);
            const Vector y = target.col(h - 1).segment(first_calib, W);
            const std::vector<RegressorFrame> next{make_frame(
                src, spec.family, spec.estimator, static_cast<size_t>(L), h, settings.frames)};
            const Vector pred =
                fit_predict(spec.family, stack_frames(frames, width), y, stack_frames(next, width),
                            mix_seed(seed, static_cast<std::uint64_t>(h)), settings);
            out[static_cast<size_t>(h - 1)] = pred(0);
        }
    }

    if (spec.depvar == DepVar::Deviation) {
        const FrameSource dsrc{&daily_mean, &price, &load, &local.res_fc,
                               &local.commodities, &local.weekday, &local.dates};
        std::vector<RegressorFrame> frames;
        for (Eigen::Index d = first_calib; d < L; ++d)
            frames.push_back(make_daily_frame(dsrc, spec.family, static_cast<size_t>(d)));
        const std::vector<RegressorFrame> next{
            make_daily_frame(dsrc, spec.family, static_cast<size_t>(L))};
        const size_t dwidth = daily_frame_width(spec.family);
        const Vector y = daily_mean.col(0).segment(first_calib, W);
        const double mean_fc = fit_predict(spec.family, stack_frames(frames, dwidth), y,
                                           stack_frames(next, dwidth), mix_seed(seed, 25),
                                           settings)(0);
        for (auto& v : out) v += mean_fc;
    }

    if (spec.vst)
        for (auto& v : out) v = vst_invert(v, price_vst);
    for (double v : out)
        if (!std::isfinite(v))
            throw RuntimeError("non-finite forecast for " + spec.id() + " on " +
                               format_date(target_day));
    return out;
}

ForecastMatrix average_forecasts(std::span<const ForecastMatrix> members) {
    if (members.empty()) throw ValidationError("average_forecasts: no members");
    const auto& first = members.front();
    for (const auto& m : members) {
        if (m.dates != first.dates || m.values.rows() != first.values.rows() ||
            m.values.cols() != first.values.cols())
            throw ValidationError("average_forecasts: mismatched day ranges");
        if (!(m.spec.base() == first.spec.base()))
            throw ValidationError("average_forecasts: members have different base specs");
    }
    ForecastMatrix out;
    out.spec = first.spec.base();
    out.dates = first.dates;
    out.values.resize(first.values.rows(), first.values.cols());
    std::vector<double> cell(members.size());
    const double n = static_cast<double>(members.size());
    for (Eigen::Index t = 0; t < out.values.rows(); ++t)
        for (Eigen::Index h = 0; h < out.values.cols(); ++h) {
            for (size_t k = 0; k < members.size(); ++k) cell[k] = members[k].values(t, h);
            std::sort(cell.begin(), cell.end());
            double excess = 0.0;
            for (double v : cell) excess += v - cell.front();
            out.values(t, h) = cell.front() + excess / n;
        }
    return out;
}

std::vector<ForecastSpec> PoolConfig::bases() const {
    if (!base_specs.empty()) {
        std::vector<ForecastSpec> out = base_specs;
        for (auto& s : out) s.window = 0;
        return out;
    }
    std::vector<ForecastSpec> out;
    for (Family f : families)
        for (DepVar d : depvars)
            for (bool v : vst)
                for (Estimator e : estimators) out.push_back({f, d, v, e, 0});
    return out;
}

std::vector<ForecastSpec> PoolConfig::members() const {
    std::vector<ForecastSpec> out;
    for (const ForecastSpec& base : bases()) {
        for (int w : windows) {
            ForecastSpec s = base;
            s.window = w;
            out.push_back(s);
        }
        if (include_averages) out.push_back(base);
    }
    return out;
}

int PoolConfig::max_window() const {
    return windows.empty() ? 0 : *std::max_element(windows.begin(), windows.end());
}

void parallel_for(size_t count, unsigned threads, const std::function<void(size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<size_t>(threads, std::max<size_t>(count, 1)));
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= count) return;
            {
                std::lock_guard lock(error_mutex);
                if (error) return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
}

std::vector<ForecastMatrix> run_pool(const MarketDataset& ds, Date first, Date last,
                                     const PoolConfig& pool, const ModelSettings& settings,
                                     unsigned threads) {
    if (last < first) throw ValidationError("run_pool: empty evaluation range");
    if (pool.windows.empty()) throw ValidationError("run_pool: no calibration windows");
    const size_t i0 = ds.index_of(first);
    const size_t i1 = ds.index_of(last);
    const size_t need = static_cast<size_t>(pool.max_window()) + kMaxLagDays;
    if (i0 < need)
        throw ValidationError("insufficient history: evaluation start " + format_date(first) +
                              " needs " + std::to_string(need) + " prior days, have " +
                              std::to_string(i0));
    const size_t n_days = i1 - i0 + 1;
    const std::vector<Date> dates(ds.dates.begin() + static_cast<std::ptrdiff_t>(i0),
                                  ds.dates.begin() + static_cast<std::ptrdiff_t>(i1) + 1);

    const auto members = pool.members();
    if (members.empty()) throw ValidationError("run_pool: no pool members selected");
    std::vector<ForecastMatrix> out(members.size());
    std::vector<size_t> individual;
    for (size_t m = 0; m < members.size(); ++m) {
        out[m].spec = members[m];
        out[m].dates = dates;
        out[m].values = Panel::Zero(static_cast<Eigen::Index>(n_days), kHours);
        if (!members[m].is_average()) individual.push_back(m);
    }

    parallel_for(individual.size() * n_days, threads, [&](size_t task) {
        const size_t m = individual[task / n_days];
        const size_t d = task % n_days;
        const auto row = forecast_day(members[m], ds, dates[d], settings);
        for (int h = 0; h < kHours; ++h)
            out[m].values(static_cast<Eigen::Index>(d), h) = row[static_cast<size_t>(h)];
    });

    for (size_t m = 0; m < members.size(); ++m) {
        if (!members[m].is_average()) continue;
        std::vector<ForecastMatrix> group;
        for (size_t k : individual)
            if (members[k].base() == members[m]) group.push_back(out[k]);
        out[m] = average_forecasts(group);
    }
    return out;
}

}  // namespace fvalue
