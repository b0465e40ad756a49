#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epicast/series.hpp"

namespace epicast::app {

/// Splits one CSV record; double quotes group fields and "" escapes a quote.
[[nodiscard]] std::vector<std::string> split_csv_record(std::string_view line);

/// Parses the M/D/YY column labels of the wide-format file (years are 20YY).
[[nodiscard]] Date parse_jhu_date(std::string_view text);

/**
 * @brief Reads one country's cumulative confirmed cases from the wide-format
 * global CSV (`Province/State,Country/Region,Lat,Long,<M/D/YY>...`).
 *
 * Rows whose Country/Region matches exactly are summed; columns after
 * `cutoff` are dropped. The result is not truncated. Date columns must be
 * consecutive days.
 */
[[nodiscard]] TimeSeries parse_jhu_csv(std::istream& in, const std::string& country,
                                       std::optional<Date> cutoff = std::nullopt);
[[nodiscard]] TimeSeries parse_jhu_csv(const std::filesystem::path& path,
                                       const std::string& country,
                                       std::optional<Date> cutoff = std::nullopt);

}  // namespace epicast::app
