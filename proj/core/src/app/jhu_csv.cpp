#include "epicast/app/jhu_csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "epicast/error.hpp"

namespace epicast::app {

namespace {

constexpr std::array<std::string_view, 4> kLeadingColumns = {"Province/State", "Country/Region",
                                                             "Lat", "Long"};

void strip_line_end(std::string& line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
}

unsigned parse_unsigned(std::string_view text, std::string_view whole) {
    unsigned value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw Error(ErrorKind::MalformedHeader, fmt::format("bad date column '{}'", whole));
    }
    return value;
}

double parse_cell(const std::string& cell, std::size_t line_number, std::size_t column) {
    double value = 0.0;
    const auto* begin = cell.data();
    const auto* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (cell.empty() || ec != std::errc{} || ptr != end || !(value >= 0.0)) {
        throw Error(ErrorKind::NonNumericCell,
                    fmt::format("line {}, column {}: '{}' is not a count", line_number,
                                column + 1, cell));
    }
    return value;
}

}  // namespace

std::vector<std::string> split_csv_record(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

Date parse_jhu_date(std::string_view text) {
    const auto first = text.find('/');
    const auto second = text.find('/', first == std::string_view::npos ? 0 : first + 1);
    if (first == std::string_view::npos || second == std::string_view::npos) {
        throw Error(ErrorKind::MalformedHeader, fmt::format("bad date column '{}'", text));
    }
    const unsigned month = parse_unsigned(text.substr(0, first), text);
    const unsigned day = parse_unsigned(text.substr(first + 1, second - first - 1), text);
    unsigned year = parse_unsigned(text.substr(second + 1), text);
    if (year < 100) year += 2000;
    const Date date{std::chrono::year{static_cast<int>(year)}, std::chrono::month{month},
                    std::chrono::day{day}};
    if (!date.ok()) {
        throw Error(ErrorKind::MalformedHeader, fmt::format("bad date column '{}'", text));
    }
    return date;
}

TimeSeries parse_jhu_csv(std::istream& in, const std::string& country, std::optional<Date> cutoff) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::MalformedHeader, "empty input");
    }
    strip_line_end(line);
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    const auto header = split_csv_record(line);
    if (header.size() <= kLeadingColumns.size()) {
        throw Error(ErrorKind::MalformedHeader, "header has no date columns");
    }
    for (std::size_t i = 0; i < kLeadingColumns.size(); ++i) {
        if (header[i] != kLeadingColumns[i]) {
            throw Error(ErrorKind::MalformedHeader,
                        fmt::format("column {} is '{}', expected '{}'", i + 1, header[i],
                                    kLeadingColumns[i]));
        }
    }
    std::vector<Date> dates;
    for (std::size_t i = kLeadingColumns.size(); i < header.size(); ++i) {
        dates.push_back(parse_jhu_date(header[i]));
        if (dates.size() > 1 && std::chrono::sys_days{dates.back()} !=
                                    std::chrono::sys_days{dates[dates.size() - 2]} +
                                        std::chrono::days{1}) {
            throw Error(ErrorKind::MalformedHeader,
                        fmt::format("date column '{}' does not follow the previous day",
                                    header[i]));
        }
    }
    std::size_t kept = dates.size();
    if (cutoff) {
        kept = 0;
        while (kept < dates.size() &&
               std::chrono::sys_days{dates[kept]} <= std::chrono::sys_days{*cutoff}) {
            ++kept;
        }
        if (kept == 0) {
            throw Error(ErrorKind::InvalidArgument,
                        "cutoff " + format_iso_date(*cutoff) + " precedes the first date column");
        }
    }

    std::vector<double> totals(kept, 0.0);
    bool found = false;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        strip_line_end(line);
        if (line.empty()) continue;
        const auto fields = split_csv_record(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorKind::MalformedHeader,
                        fmt::format("line {} has {} fields, header has {}", line_number,
                                    fields.size(), header.size()));
        }
        if (fields[1] != country) continue;
        found = true;
        for (std::size_t k = 0; k < kept; ++k) {
            totals[k] += parse_cell(fields[kLeadingColumns.size() + k], line_number,
                                    kLeadingColumns.size() + k);
        }
    }
    if (!found) {
        throw Error(ErrorKind::CountryNotFound, "no rows for country '" + country + "'");
    }
    return TimeSeries(country, dates.front(), std::move(totals));
}

TimeSeries parse_jhu_csv(const std::filesystem::path& path, const std::string& country,
                         std::optional<Date> cutoff) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "'");
    }
    return parse_jhu_csv(in, country, cutoff);
}

}  // namespace epicast::app
