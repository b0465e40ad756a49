#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epicast::app {

enum class ReportFormat { Csv, Json };

[[nodiscard]] std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept;
[[nodiscard]] std::string_view to_string(ReportFormat format) noexcept;

/// One grid cell: model x country x window length x horizon.
struct ReportRow {
    std::string model;
    std::string country;
    std::size_t n_s = 0;
    std::size_t n_p = 0;
    double kmape_percent = 0.0;
    double kmdsa_percent = 0.0;

    friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// A grid cell that produced no row. n_p == 0 means every horizon of the cell.
struct CellFailure {
    std::string model;
    std::string country;
    std::size_t n_s = 0;
    std::size_t n_p = 0;
    std::string message;

    friend bool operator==(const CellFailure&, const CellFailure&) = default;
};

struct ReportMetadata {
    std::string cutoff_date;
    std::uint64_t base_seed = 0;
    std::size_t n_inits = 0;
    double threshold = 0.0;
    std::string toolkit_version;
    std::vector<CellFailure> failures;

    friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct MetricReport {
    std::vector<ReportRow> rows;
    ReportMetadata metadata;

    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Header `model,country,n_s,n_p,kmape_percent,kmdsa_percent`; numbers in shortest round-trip form.
[[nodiscard]] std::string report_to_csv(const MetricReport& report);
[[nodiscard]] std::string report_to_json(const MetricReport& report);
[[nodiscard]] MetricReport report_from_json(std::string_view text);

void emit_report(const MetricReport& report, ReportFormat format,
                 const std::filesystem::path& path);

}  // namespace epicast::app
