#include "epicast/app/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "epicast/error.hpp"
#include "json.hpp"

namespace epicast::app {

namespace {

using nlohmann::json;

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string quoted = "\"";
    for (char ch : text) {
        if (ch == '"') quoted.push_back('"');
        quoted.push_back(ch);
    }
    quoted.push_back('"');
    return quoted;
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view name) noexcept {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    return std::nullopt;
}

std::string_view to_string(ReportFormat format) noexcept {
    return format == ReportFormat::Csv ? "csv" : "json";
}

std::string report_to_csv(const MetricReport& report) {
    std::string out = "model,country,n_s,n_p,kmape_percent,kmdsa_percent\n";
    for (const auto& row : report.rows) {
        out += fmt::format("{},{},{},{},{},{}\n", csv_field(row.model), csv_field(row.country),
                           row.n_s, row.n_p, row.kmape_percent, row.kmdsa_percent);
    }
    return out;
}

std::string report_to_json(const MetricReport& report) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"model", row.model},
                        {"country", row.country},
                        {"n_s", row.n_s},
                        {"n_p", row.n_p},
                        {"kmape_percent", row.kmape_percent},
                        {"kmdsa_percent", row.kmdsa_percent}});
    }
    json failures = json::array();
    for (const auto& f : report.metadata.failures) {
        failures.push_back({{"model", f.model},
                            {"country", f.country},
                            {"n_s", f.n_s},
                            {"n_p", f.n_p},
                            {"message", f.message}});
    }
    const auto& meta = report.metadata;
    const json doc = {{"rows", rows},
                      {"metadata",
                       {{"cutoff_date", meta.cutoff_date},
                        {"base_seed", meta.base_seed},
                        {"n_inits", meta.n_inits},
                        {"threshold", meta.threshold},
                        {"toolkit_version", meta.toolkit_version},
                        {"failures", failures}}}};
    return doc.dump(2) + "\n";
}

MetricReport report_from_json(std::string_view text) {
    try {
        const auto doc = json::parse(text);
        MetricReport report;
        for (const auto& row : doc.at("rows")) {
            report.rows.push_back({row.at("model").get<std::string>(),
                                   row.at("country").get<std::string>(),
                                   row.at("n_s").get<std::size_t>(),
                                   row.at("n_p").get<std::size_t>(),
                                   row.at("kmape_percent").get<double>(),
                                   row.at("kmdsa_percent").get<double>()});
        }
        const auto& meta = doc.at("metadata");
        report.metadata.cutoff_date = meta.at("cutoff_date").get<std::string>();
        report.metadata.base_seed = meta.at("base_seed").get<std::uint64_t>();
        report.metadata.n_inits = meta.at("n_inits").get<std::size_t>();
        report.metadata.threshold = meta.at("threshold").get<double>();
        report.metadata.toolkit_version = meta.at("toolkit_version").get<std::string>();
        for (const auto& f : meta.at("failures")) {
            report.metadata.failures.push_back(
                {f.at("model").get<std::string>(), f.at("country").get<std::string>(),
                 f.at("n_s").get<std::size_t>(), f.at("n_p").get<std::size_t>(),
                 f.at("message").get<std::string>()});
        }
        return report;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::MalformedHeader, std::string("report JSON: ") + e.what());
    }
}

void emit_report(const MetricReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
    }
    out << (format == ReportFormat::Csv ? report_to_csv(report) : report_to_json(report));
    if (!out.flush()) {
        throw Error(ErrorKind::IoFailure, "failed writing '" + path.string() + "'");
    }
}

}  // namespace epicast::app
