#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace epicast {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Throws Error(InvalidArgument) on malformed input.
[[nodiscard]] Date parse_iso_date(const std::string& text);
[[nodiscard]] std::string format_iso_date(Date date);

/**
 * @brief Daily cumulative case counts for one region.
 *
 * Values are non-negative and non-empty; point i is observed on start_date + i days.
 */
class TimeSeries {
public:
    TimeSeries(std::string region_id, Date start_date, std::vector<double> values);

    [[nodiscard]] const std::string& region_id() const noexcept { return region_id_; }
    [[nodiscard]] Date start_date() const noexcept { return start_date_; }
    [[nodiscard]] Date date_at(std::size_t index) const;
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::string region_id_;
    Date start_date_;
    std::vector<double> values_;
};

/// One supervised example: n_s inputs followed immediately by n_p targets.
struct WindowSample {
    std::vector<double> inputs;
    std::vector<double> targets;
    /// Index in the source series of the last input value.
    std::size_t window_end_index = 0;

    friend bool operator==(const WindowSample&, const WindowSample&) = default;
};

/// Chronological partition; validation and test hold the 10 + 10 most recent samples.
struct SupervisedSplit {
    std::vector<WindowSample> train;
    std::vector<WindowSample> validation;
    std::vector<WindowSample> test;
};

inline constexpr std::size_t kValidationSize = 10;
inline constexpr std::size_t kTestSize = 10;

/// Drops the leading points below `threshold`. Later dips are kept verbatim.
[[nodiscard]] TimeSeries truncate_below_threshold(const TimeSeries& series, double threshold);

[[nodiscard]] std::vector<WindowSample> make_windows(std::span<const double> values,
                                                     std::size_t n_s, std::size_t n_p);
[[nodiscard]] std::vector<WindowSample> make_windows(const TimeSeries& series, std::size_t n_s,
                                                     std::size_t n_p);

[[nodiscard]] SupervisedSplit split_train_val_test(std::vector<WindowSample> samples);

}  // namespace epicast
