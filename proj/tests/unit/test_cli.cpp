#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "epicast/app/experiment.hpp"
#include "epicast/app/jhu_csv.hpp"
#include "epicast/app/plot.hpp"
#include "epicast/app/report.hpp"
#include "epicast/error.hpp"
#include "test_support.hpp"

using namespace epicast;
using namespace epicast::app;

namespace {

const std::filesystem::path kFixtures{EPICAST_FIXTURE_DIR};

template <typename F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an epicast::Error";
    return ErrorKind::InvalidArgument;
}

// Independent reader: sums every row whose second field is `country`, no quoting support needed
// for the unquoted fixture rows it is used on.
std::vector<double> oracle_sum(const std::filesystem::path& path, const std::string& country) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<double> totals;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 5 || fields[1] != country) continue;
        totals.resize(fields.size() - 4, 0.0);
        for (std::size_t i = 4; i < fields.size(); ++i) totals[i - 4] += std::stod(fields[i]);
    }
    return totals;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.data_path = kFixtures / "synthetic_confirmed.csv";
    c.countries = {"Testland", "Otherland"};
    c.cutoff_date = parse_iso_date("2020-06-30");
    c.models = {"arima", "vanilla"};
    c.seq_lengths = {3};
    c.arima_seq_lengths = {15};
    c.horizons = {1, 3};
    c.n_inits = 2;
    c.epochs = 10;
    return c;
}

}  // namespace

TEST(CsvRecord, QuotesAndEscapes) {
    EXPECT_EQ(split_csv_record("a,b,,c"), (std::vector<std::string>{"a", "b", "", "c"}));
    EXPECT_EQ(split_csv_record(R"(,"Korea, South",1)"), (std::vector<std::string>{"", "Korea, South", "1"}));
    EXPECT_EQ(split_csv_record(R"("say ""hi""",x)"), (std::vector<std::string>{"say \"hi\"", "x"}));
    EXPECT_EQ(split_csv_record(""), (std::vector<std::string>{""}));
}

TEST(JhuDates, MonthDayYear) {
    EXPECT_EQ(parse_jhu_date("1/22/20"), parse_iso_date("2020-01-22"));
    EXPECT_EQ(parse_jhu_date("12/3/21"), parse_iso_date("2021-12-03"));
    EXPECT_THROW((void)parse_jhu_date("2020-01-22"), Error);
    EXPECT_THROW((void)parse_jhu_date("2/30/20"), Error);
}

TEST(JhuCsv, SingleRowCountry) {
    const auto s = parse_jhu_csv(kFixtures / "jhu_small.csv", "Germany");
    EXPECT_EQ(s.values(), (std::vector<double>{0, 1, 4}));
    EXPECT_EQ(s.region_id(), "Germany");
    EXPECT_EQ(s.start_date(), parse_iso_date("2020-01-22"));
}

TEST(JhuCsv, SumsProvinces) {
    EXPECT_EQ(parse_jhu_csv(kFixtures / "jhu_small.csv", "Australia").values(),
              (std::vector<double>{5, 7, 9}));
}

TEST(JhuCsv, QuotedCountryMatchesExactly) {
    EXPECT_EQ(parse_jhu_csv(kFixtures / "jhu_small.csv", "Korea, South").values(),
              (std::vector<double>{1, 1, 2}));
    EXPECT_EQ(parse_jhu_csv(kFixtures / "jhu_small.csv", "Korea").values(),
              (std::vector<double>{100, 100, 100}));
}

TEST(JhuCsv, Cutoff) {
    const auto s = parse_jhu_csv(kFixtures / "jhu_small.csv", "Australia", parse_iso_date("2020-01-23"));
    EXPECT_EQ(s.values(), (std::vector<double>{5, 7}));
    EXPECT_EQ(kind_of([] {
                  (void)parse_jhu_csv(kFixtures / "jhu_small.csv", "Germany", parse_iso_date("2020-01-01"));
              }),
              ErrorKind::InvalidArgument);
}

TEST(JhuCsv, WindowsLineEndings) {
    EXPECT_EQ(parse_jhu_csv(kFixtures / "jhu_crlf.csv", "Germany").values(), (std::vector<double>{3, 5}));
}

TEST(JhuCsv, Errors) {
    EXPECT_EQ(kind_of([] { (void)parse_jhu_csv(kFixtures / "jhu_small.csv", "Atlantis"); }),
              ErrorKind::CountryNotFound);
    EXPECT_EQ(kind_of([] { (void)parse_jhu_csv(kFixtures / "jhu_bad_header.csv", "Germany"); }),
              ErrorKind::MalformedHeader);
    EXPECT_EQ(kind_of([] { (void)parse_jhu_csv(kFixtures / "jhu_non_numeric.csv", "Germany"); }),
              ErrorKind::NonNumericCell);
    EXPECT_EQ(kind_of([] { (void)parse_jhu_csv(kFixtures / "jhu_gap.csv", "Germany"); }),
              ErrorKind::MalformedHeader);
    EXPECT_EQ(kind_of([] { (void)parse_jhu_csv(kFixtures / "missing.csv", "Germany"); }),
              ErrorKind::IoFailure);
    std::istringstream empty("");
    EXPECT_EQ(kind_of([&] { (void)parse_jhu_csv(empty, "Germany"); }), ErrorKind::MalformedHeader);
}

TEST(JhuCsv, AgreesWithIndependentReader) {
    const auto path = kFixtures / "synthetic_confirmed.csv";
    for (const std::string country : {"Testland", "Otherland"}) {
        const auto s = parse_jhu_csv(path, country);
        EXPECT_EQ(s.values(), oracle_sum(path, country));
        EXPECT_EQ(s.size(), 161u);
        EXPECT_EQ(format_iso_date(s.date_at(s.size() - 1)), "2020-06-30");
    }
    EXPECT_EQ(parse_jhu_csv(kFixtures / "jhu_small.csv", "Australia").values(),
              oracle_sum(kFixtures / "jhu_small.csv", "Australia"));
}

TEST(ReportFormat, Names) {
    EXPECT_EQ(parse_report_format("csv"), ReportFormat::Csv);
    EXPECT_EQ(parse_report_format("json"), ReportFormat::Json);
    EXPECT_FALSE(parse_report_format("xml").has_value());
    EXPECT_EQ(to_string(ReportFormat::Json), "json");
}

TEST(Report, CsvLayout) {
    MetricReport report;
    report.rows.push_back({"arima", "Germany", 15, 1, 0.22, 0.2});
    const auto csv = report_to_csv(report);
    EXPECT_EQ(csv, "model,country,n_s,n_p,kmape_percent,kmdsa_percent\narima,Germany,15,1,0.22,0.2\n");
    report.rows.push_back({"vanilla", "Korea, South", 3, 5, 1.5, 2.0});
    EXPECT_NE(report_to_csv(report).find("\"Korea, South\""), std::string::npos);
}

TEST(Report, CsvKeepsFullPrecision) {
    MetricReport report;
    report.rows.push_back({"m", "c", 3, 1, 0.123456789012345, 1.0 / 3.0});
    const auto csv = report_to_csv(report);
    const auto line = csv.substr(csv.find('\n') + 1);
    const auto fields = split_csv_record(line.substr(0, line.size() - 1));
    ASSERT_EQ(fields.size(), 6u);
    EXPECT_EQ(std::stod(fields[4]), 0.123456789012345);
    EXPECT_EQ(std::stod(fields[5]), 1.0 / 3.0);
}

TEST(Report, JsonRoundTrip) {
    epicast::testing::Gen gen(1);
    MetricReport report;
    for (int i = 0; i < 20; ++i) {
        report.rows.push_back({"vanilla", "US", gen.index(1, 15), gen.index(1, 5), gen.uniform(0, 50),
                               gen.uniform(0, 50)});
    }
    report.metadata = {"2020-05-25", 42, 100, 100.0, "1.0.0",
                       {{"arima", "Atlantis", 15, 0, "no rows for country 'Atlantis'"}}};
    EXPECT_EQ(report_from_json(report_to_json(report)), report);
    EXPECT_THROW((void)report_from_json("{\"rows\": 3}"), Error);
    EXPECT_THROW((void)report_from_json("not json"), Error);
}

TEST(Report, EmitWritesFile) {
    const auto dir = std::filesystem::temp_directory_path() / "epicast_report_test";
    std::filesystem::create_directories(dir);
    MetricReport report;
    report.rows.push_back({"arima", "US", 15, 1, 0.15, 0.14});
    emit_report(report, ReportFormat::Json, dir / "r.json");
    std::ifstream in(dir / "r.json");
    std::stringstream buffer;
    buffer << in.rdbuf();
    EXPECT_EQ(report_from_json(buffer.str()), report);
    std::filesystem::remove_all(dir);
    EXPECT_THROW(emit_report(report, ReportFormat::Csv, dir / "nested" / "r.csv"), Error);
}

TEST(Plot, OneForecastPolylineAndOneTruthPolyline) {
    PlotInput input;
    input.title = "Testland <3-day>";
    input.truth = {100, 120, 150, 190, 240};
    input.truth_labels = {"5/1", "5/2", "5/3", "5/4", "5/5"};
    input.forecast_offset = 2;
    ForecastResult forecast{{152.5, 187.25, 1.0 / 3.0 + 230}, 1};
    input.models.push_back({"arima (n_s=15)", forecast});
    const auto svg = render_plot_svg(input);

    const std::regex poly(R"re(<polyline class="(\w+)"[^>]*data-offset="(\d+)" data-values="([^"]*)")re");
    std::vector<std::smatch> found;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator(); ++it) {
        found.push_back(*it);
    }
    ASSERT_EQ(found.size(), 2u);
    EXPECT_EQ(found[0][1], "truth");
    EXPECT_EQ(parse_values(found[0][3]), input.truth);
    EXPECT_EQ(found[1][1], "forecast");
    EXPECT_EQ(found[1][2], "2");
    EXPECT_EQ(parse_values(found[1][3]), forecast.predictions);
    EXPECT_NE(svg.find("Testland &lt;3-day&gt;"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Plot, NeedsAModel) {
    PlotInput input;
    input.truth = {1, 2, 3};
    EXPECT_EQ(kind_of([&] { (void)render_plot_svg(input); }), ErrorKind::InvalidArgument);
}

TEST(Config, DefaultsFollowTheProtocol) {
    const auto c = parse_experiment_config("{}");
    EXPECT_EQ(c.countries, (std::vector<std::string>{"US", "Italy", "Spain", "Germany"}));
    EXPECT_EQ(c.seq_lengths, (std::vector<std::size_t>{3, 6, 10, 15}));
    EXPECT_EQ(c.horizons, (std::vector<std::size_t>{1, 3, 5}));
    EXPECT_EQ(c.n_inits, 100u);
    EXPECT_EQ(c.threshold, 100.0);
    EXPECT_EQ(c.cutoff_date, parse_iso_date("2020-05-25"));
    EXPECT_EQ(c.arima_orders, (arima::ArimaOrders{1, 2, 2}));
    EXPECT_EQ(c.models.size(), known_models().size());
}

TEST(Config, ParsesEveryField) {
    const auto c = parse_experiment_config(R"({
        "data_path": "data/global.csv", "countries": ["Germany"], "cutoff_date": "2020-04-30",
        "threshold": 50, "models": ["arima", "conv_lstm"], "seq_lengths": [6],
        "arima_seq_lengths": [10, 15], "horizons": [2], "n_inits": 20, "base_seed": 7,
        "arima_orders": [2, 1, 1], "arima_grid_search": true, "epochs": 50, "learning_rate": 0.05,
        "threads": 4, "output_dir": "out", "report_format": "json", "emit_plots": true})");
    EXPECT_EQ(c.data_path, "data/global.csv");
    EXPECT_EQ(c.countries, std::vector<std::string>{"Germany"});
    EXPECT_EQ(c.cutoff_date, parse_iso_date("2020-04-30"));
    EXPECT_EQ(c.threshold, 50.0);
    EXPECT_EQ(c.models, (std::vector<std::string>{"arima", "conv_lstm"}));
    EXPECT_EQ(c.arima_seq_lengths, (std::vector<std::size_t>{10, 15}));
    EXPECT_EQ(c.horizons, std::vector<std::size_t>{2});
    EXPECT_EQ(c.n_inits, 20u);
    EXPECT_EQ(c.base_seed, 7u);
    EXPECT_EQ(c.arima_orders, (arima::ArimaOrders{2, 1, 1}));
    EXPECT_TRUE(c.arima_grid_search);
    EXPECT_EQ(c.epochs, 50u);
    EXPECT_EQ(c.learning_rate, 0.05);
    EXPECT_EQ(c.threads, 4u);
    EXPECT_EQ(c.output_dir, "out");
    EXPECT_EQ(c.report_format, ReportFormat::Json);
    EXPECT_TRUE(c.emit_plots);
    EXPECT_FALSE(parse_experiment_config(R"({"cutoff_date": null})").cutoff_date.has_value());
}

TEST(Config, Strict) {
    for (const char* bad : {R"({"n_init": 5})", R"({"models": ["gru"]})", R"({"horizons": []})",
                            R"({"horizons": [0]})", R"({"n_inits": 0})", R"({"threshold": -1})",
                            R"({"report_format": "xml"})", R"({"cutoff_date": "5/25/20"})",
                            R"({"arima_orders": [1, 2]})", R"({"n_inits": "many"})", "[1, 2]", "{"}) {
        EXPECT_EQ(kind_of([&] { (void)parse_experiment_config(bad); }), ErrorKind::InvalidArgument) << bad;
    }
    EXPECT_EQ(kind_of([] { (void)load_experiment_config(kFixtures / "no_such_config.json"); }),
              ErrorKind::IoFailure);
}

TEST(Benchmark, EmptyModelListYieldsMetadataOnly) {
    auto c = small_config();
    c.models.clear();
    c.n_inits = 7;
    c.base_seed = 3;
    const auto out = run_benchmark(c);
    EXPECT_TRUE(out.report.rows.empty());
    EXPECT_TRUE(out.plots.empty());
    EXPECT_EQ(out.report.metadata.n_inits, 7u);
    EXPECT_EQ(out.report.metadata.base_seed, 3u);
    EXPECT_EQ(out.report.metadata.cutoff_date, "2020-06-30");
    EXPECT_EQ(out.report.metadata.toolkit_version, kToolkitVersion);
}

TEST(Benchmark, CoversTheGridInOrder) {
    auto c = small_config();
    c.emit_plots = true;
    std::vector<std::string> log;
    const auto out = run_benchmark(c, [&](std::string_view line) { log.emplace_back(line); });
    EXPECT_TRUE(out.report.metadata.failures.empty());
    ASSERT_EQ(out.report.rows.size(), 2u * 2u * 1u * 2u);
    std::size_t i = 0;
    for (const std::string model : {"arima", "vanilla"}) {
        for (const std::string country : {"Testland", "Otherland"}) {
            for (std::size_t n_p : {1u, 3u}) {
                const auto& row = out.report.rows[i++];
                EXPECT_EQ(row.model, model);
                EXPECT_EQ(row.country, country);
                EXPECT_EQ(row.n_s, model == "arima" ? 15u : 3u);
                EXPECT_EQ(row.n_p, n_p);
                EXPECT_TRUE(std::isfinite(row.kmape_percent));
                EXPECT_GE(row.kmape_percent, 0.0);
            }
        }
    }
    EXPECT_FALSE(log.empty());
    ASSERT_EQ(out.plots.size(), 4u);
    EXPECT_EQ(out.plots[0].first, "plot_Testland_np1.svg");
    for (const auto& [name, plot] : out.plots) {
        EXPECT_EQ(plot.models.size(), 2u) << name;
        EXPECT_EQ(plot.truth.size(), 15u + 3u);
        EXPECT_EQ(plot.truth_labels.back(), "6/30");
        EXPECT_EQ(plot.forecast_offset, 15u);
    }
}

TEST(Benchmark, Deterministic) {
    const auto c = small_config();
    EXPECT_EQ(report_to_csv(run_benchmark(c).report), report_to_csv(run_benchmark(c).report));
}

TEST(Benchmark, FailedCellsAreRecordedAndOthersStillRun) {
    auto c = small_config();
    c.models = {"arima"};
    c.countries = {"Atlantis", "Testland"};
    c.arima_seq_lengths = {15, 200};
    const auto out = run_benchmark(c);
    // Atlantis fails both window lengths, Testland is too short for n_s = 200
    ASSERT_EQ(out.report.metadata.failures.size(), 3u);
    const auto& f = out.report.metadata.failures;
    EXPECT_EQ(f[0].country, "Atlantis");
    EXPECT_EQ(f[0].n_p, 0u);
    EXPECT_NE(f[0].message.find("Atlantis"), std::string::npos);
    EXPECT_EQ(f[2].country, "Testland");
    EXPECT_EQ(f[2].n_s, 200u);
    ASSERT_EQ(out.report.rows.size(), 2u);
    const std::size_t grid = 1 * 2 * 2 * 2;
    const std::size_t failed_cells = 3 * 2;  // n_p == 0 covers both horizons
    EXPECT_EQ(out.report.rows.size(), grid - failed_cells);
}

TEST(Benchmark, WriteOutputs) {
    auto c = small_config();
    c.models = {"arima"};
    c.emit_plots = true;
    c.report_format = ReportFormat::Json;
    c.output_dir = std::filesystem::temp_directory_path() / "epicast_outputs_test";
    std::filesystem::remove_all(c.output_dir);
    const auto out = run_benchmark(c);
    write_outputs(c, out);
    EXPECT_TRUE(std::filesystem::exists(c.output_dir / "report.json"));
    EXPECT_TRUE(std::filesystem::exists(c.output_dir / "plot_Otherland_np3.svg"));
    std::filesystem::remove_all(c.output_dir);
}
