#include "epicast/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>

#include <fmt/format.h>

#include "epicast/error.hpp"

namespace epicast {

namespace {

int parse_int(std::string_view text, const std::string& whole) {
    int out = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw Error(ErrorKind::InvalidArgument, "malformed date '" + whole + "'");
    }
    return out;
}

}  // namespace

Date parse_iso_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error(ErrorKind::InvalidArgument, "expected YYYY-MM-DD, got '" + text + "'");
    }
    const std::string_view view(text);
    const Date date{std::chrono::year{parse_int(view.substr(0, 4), text)},
                    std::chrono::month{static_cast<unsigned>(parse_int(view.substr(5, 2), text))},
                    std::chrono::day{static_cast<unsigned>(parse_int(view.substr(8, 2), text))}};
    if (!date.ok()) {
        throw Error(ErrorKind::InvalidArgument, "invalid calendar date '" + text + "'");
    }
    return date;
}

std::string format_iso_date(Date date) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()),
                       static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
}

TimeSeries::TimeSeries(std::string region_id, Date start_date, std::vector<double> values)
    : region_id_(std::move(region_id)), start_date_(start_date), values_(std::move(values)) {
    if (values_.empty()) {
        throw Error(ErrorKind::InvalidArgument, "time series '" + region_id_ + "' is empty");
    }
    if (!start_date_.ok()) {
        throw Error(ErrorKind::InvalidArgument, "invalid start date");
    }
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error(ErrorKind::InvalidArgument,
                        fmt::format("time series '{}' has invalid count {}", region_id_, v));
        }
    }
}

Date TimeSeries::date_at(std::size_t index) const {
    if (index >= values_.size()) {
        throw Error(ErrorKind::InvalidArgument, "date index out of range");
    }
    return Date{std::chrono::sys_days{start_date_} +
                std::chrono::days{static_cast<long>(index)}};
}

TimeSeries truncate_below_threshold(const TimeSeries& series, double threshold) {
    if (!(threshold > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "truncation threshold must be positive");
    }
    const auto& values = series.values();
    const auto first = std::find_if(values.begin(), values.end(),
                                    [threshold](double v) { return v >= threshold; });
    if (first == values.end()) {
        throw Error(ErrorKind::EmptyAfterTruncation,
                    fmt::format("no value of '{}' reaches {}", series.region_id(), threshold));
    }
    const auto offset = static_cast<std::size_t>(std::distance(values.begin(), first));
    return TimeSeries(series.region_id(), series.date_at(offset),
                      std::vector<double>(first, values.end()));
}

std::vector<WindowSample> make_windows(std::span<const double> values, std::size_t n_s,
                                       std::size_t n_p) {
    if (n_s == 0 || n_p == 0) {
        throw Error(ErrorKind::InvalidArgument, "window length and horizon must be >= 1");
    }
    if (values.size() < n_s + n_p) {
        throw Error(ErrorKind::SeriesTooShort,
                    fmt::format("series of length {} cannot hold a window of {} + {}",
                                values.size(), n_s, n_p));
    }
    const std::size_t count = values.size() - n_s - n_p + 1;
    std::vector<WindowSample> samples;
    samples.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        const auto inputs = values.subspan(j, n_s);
        const auto targets = values.subspan(j + n_s, n_p);
        samples.push_back({{inputs.begin(), inputs.end()},
                           {targets.begin(), targets.end()},
                           j + n_s - 1});
    }
    return samples;
}

std::vector<WindowSample> make_windows(const TimeSeries& series, std::size_t n_s,
                                       std::size_t n_p) {
    return make_windows(std::span<const double>(series.values()), n_s, n_p);
}

SupervisedSplit split_train_val_test(std::vector<WindowSample> samples) {
    const std::size_t n_d = samples.size();
    if (n_d <= kValidationSize + kTestSize) {
        throw Error(ErrorKind::TooFewSamples,
                    fmt::format("need more than {} samples, got {}", kValidationSize + kTestSize,
                                n_d));
    }
    const auto train_end = samples.begin() + static_cast<std::ptrdiff_t>(n_d - 20);
    const auto val_end = train_end + static_cast<std::ptrdiff_t>(kValidationSize);
    SupervisedSplit split;
    split.train.assign(std::make_move_iterator(samples.begin()), std::make_move_iterator(train_end));
    split.validation.assign(std::make_move_iterator(train_end), std::make_move_iterator(val_end));
    split.test.assign(std::make_move_iterator(val_end), std::make_move_iterator(samples.end()));
    return split;
}

}  // namespace epicast
