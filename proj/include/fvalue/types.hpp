#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fvalue {

inline constexpr int kHours = 24;

/// Day x hour panel. Row t is one calendar day, column h-1 is delivery hour h.
using Panel = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Date = std::chrono::sys_days;

/// Thrown for malformed inputs or violated preconditions that the caller can fix.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a computation cannot proceed on otherwise valid input.
class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_date(Date d);
Date parse_date(std::string_view text);

/// 0 = Monday ... 6 = Sunday.
int iso_weekday_index(Date d);

enum class Family { ARX, NARX, LEAR };
enum class DepVar { Direct, Deviation };
enum class Estimator { Heterogeneous, Pooled };

std::string to_string(Family f);
std::string to_string(DepVar d);
std::string to_string(Estimator e);
Family parse_family(std::string_view s);
DepVar parse_depvar(std::string_view s);
Estimator parse_estimator(std::string_view s);

/// Identity of one pool member. window == 0 marks the window-averaged ensemble.
struct ForecastSpec {
    Family family = Family::ARX;
    DepVar depvar = DepVar::Direct;
    bool vst = false;
    Estimator estimator = Estimator::Heterogeneous;
    int window = 0;

    bool is_average() const { return window == 0; }
    /// Same spec with the window axis dropped.
    ForecastSpec base() const {
        ForecastSpec b = *this;
        b.window = 0;
        return b;
    }
    /// Stable member identifier, e.g. "ARX_direct_vst-on_pooled_w56" or "..._avg".
    std::string id() const;

    friend bool operator==(const ForecastSpec&, const ForecastSpec&) = default;
};

ForecastSpec parse_member_id(std::string_view id);

/// splitmix64 finaliser; combines a base seed with a stream index.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Day-ahead predictions of one pool member over the evaluation period.
struct ForecastMatrix {
    ForecastSpec spec;
    std::vector<Date> dates;
    Panel values;
};

}  // namespace fvalue
