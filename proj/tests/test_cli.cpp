#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "wgmqed/cli/config.hpp"
#include "wgmqed/cli/run.hpp"

using namespace wgm;
using namespace wgm::cli;
namespace fs = std::filesystem;

namespace {

const fs::path source_dir = WGMQED_SOURCE_DIR;
const std::string cli_binary = WGMQED_CLI;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("wgmqed_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

int run_cli(const std::string& args, const fs::path& out_dir) {
    const std::string cmd = "WGMQED_OUTPUT_DIR='" + out_dir.string() + "' '" + cli_binary + "' " + args +
                            " > '" + (out_dir / "stdout.txt").string() + "' 2> '" +
                            (out_dir / "stderr.txt").string() + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_error(const std::string& text) {
    try {
        const auto c = resolve_config(text, "cfg.json");
        build_run_config(c, text, "cfg.json", ".");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::vector<std::vector<double>> csv_rows(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (!header) {
            header = true;
            continue;
        }
        std::vector<double> r;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ','))
            r.push_back(std::stod(cell));
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST(Config, DefaultsCarryTheExperimentalParameters) {
    const auto d = default_config();
    EXPECT_EQ(d["resonator"]["kappa0_MHz"], 5.0);
    EXPECT_EQ(d["resonator"]["kappa_ext_MHz"], 5.0);
    EXPECT_EQ(d["atom"]["linewidth_MHz"], 6.07);
    EXPECT_EQ(d["atom"]["B_gauss"], 4.5);
    EXPECT_EQ(d["drive"]["photon_flux"], 1.2e7);
    EXPECT_EQ(d["distribution"]["g_mean_MHz"], 17.0);
    EXPECT_EQ(d["distribution"]["g_sigma_MHz"], 6.0);
    EXPECT_EQ(d["distribution"]["g_min_MHz"], 7.5);
    EXPECT_EQ(d["distribution"]["g_max_MHz"], 30.0);
    EXPECT_EQ(d["transit"]["eta1"], 6);
    EXPECT_EQ(d["transit"]["dt1_us"], 1.2);
    EXPECT_EQ(d["transit"]["eta2"], 2);
    EXPECT_EQ(d["transit"]["dt2_us"], 1.0);
    EXPECT_EQ(d["transit"]["detector_efficiency"], 0.5);
}

TEST(Config, UnknownKeyReportsLineAndPath) {
    const std::string msg = config_error("{\n  \"scenario\": \"spectrum\",\n  \"spectrum\": {\n    \"gg_MHz\": 3\n  }\n}\n");
    EXPECT_NE(msg.find("cfg.json:4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("/spectrum/gg_MHz"), std::string::npos) << msg;
}

TEST(Config, TypeMismatchReportsField) {
    const std::string msg = config_error("{\"scenario\": \"spectrum\",\n \"spectrum\": {\"points\": \"many\"}}");
    EXPECT_NE(msg.find("cfg.json:2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("/spectrum/points"), std::string::npos) << msg;
}

TEST(Config, SyntaxErrorsAndMissingScenario) {
    EXPECT_NE(config_error("{\"scenario\": \"spectrum\",\n\n  oops}").find("cfg.json:3"), std::string::npos);
    EXPECT_NE(config_error("").find("cfg.json:1"), std::string::npos);
    EXPECT_NE(config_error("{\"seed\": 3}").find("scenario"), std::string::npos);
    EXPECT_FALSE(config_error("{\"scenario\": \"teleport\"}").empty());
}

TEST(Config, SemanticValidationNamesTheField) {
    const std::string msg = config_error("{\"scenario\": \"spectrum\",\n \"resonator\": {\"kappa0_MHz\": -1}}");
    EXPECT_NE(msg.find("/resonator/kappa0_MHz"), std::string::npos) << msg;
    EXPECT_NE(config_error("{\"scenario\": \"spectrum\", \"spectrum\": {\"geometry\": \"diagonal\"}}")
                  .find("/spectrum/geometry"),
              std::string::npos);
    EXPECT_FALSE(config_error("{\"scenario\": \"spectrum\", \"seed\": -4}").empty());
}

TEST(Config, UnitsAreConverted) {
    const std::string text = "{\"scenario\": \"spectrum\", \"spectrum\": {\"g_MHz\": 12.5, \"points\": 3}}";
    const auto rc = build_run_config(resolve_config(text, "x"), text, "x", ".");
    EXPECT_NEAR(rc.g_fixed, units::mhz_to_rad(12.5), 1e-6);
    ASSERT_EQ(rc.detunings.size(), 3u);
    EXPECT_NEAR(rc.detunings.front(), units::mhz_to_rad(-60.0), 1e-6);
    EXPECT_NEAR(rc.model.kappa0, units::mhz_to_rad(5.0), 1e-6);
    EXPECT_NEAR(rc.transit.trigger.dt1, 1.2e-6, 1e-18);
}

TEST(Config, HashIgnoresFormattingButNotValues) {
    auto hash = [](const std::string& t) { return config_hash(resolve_config(t, "x")); };
    const std::string a = "{\"scenario\": \"spectrum\", \"spectrum\": {\"g_MHz\": 20, \"points\": 5}}";
    const std::string b = "{\n \"spectrum\": {\"points\": 5, \"g_MHz\": 20.0},\n \"scenario\": \"spectrum\"\n}";
    const std::string c = "{\"scenario\": \"spectrum\", \"spectrum\": {\"g_MHz\": 21, \"points\": 5}}";
    EXPECT_EQ(hash(a), hash(b));
    EXPECT_NE(hash(a), hash(c));
    EXPECT_EQ(hash(a).size(), 16u);
}

TEST(Cli, RunsAreByteIdentical) {
    const auto dir = scratch("identical");
    write_file(dir / "cfg.json",
               "{\"scenario\": \"spectrum\", \"output\": {\"prefix\": \"s\"},\n"
               " \"spectrum\": {\"detuning_min_MHz\": -30, \"detuning_max_MHz\": 30, \"points\": 7}}\n");
    ASSERT_EQ(run_cli("run '" + (dir / "cfg.json").string() + "'", dir), 0) << slurp(dir / "stderr.txt");
    const auto csv1 = slurp(dir / "s.csv");
    const auto json1 = slurp(dir / "s.json");
    ASSERT_EQ(run_cli("run '" + (dir / "cfg.json").string() + "'", dir), 0);
    EXPECT_EQ(csv1, slurp(dir / "s.csv"));
    EXPECT_EQ(json1, slurp(dir / "s.json"));
    EXPECT_NE(csv1.find("# config_hash: "), std::string::npos);
    EXPECT_EQ(csv_rows(csv1).size(), 7u);
    const auto j = nlohmann::json::parse(json1);
    EXPECT_EQ(j["scenario"], "spectrum");
    EXPECT_EQ(j["config"]["spectrum"]["points"], 7);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("exit");
    write_file(dir / "bad.json", "{\"scenario\": \"spectrum\", \"bogus\": 1}");
    EXPECT_EQ(run_cli("run '" + (dir / "bad.json").string() + "'", dir), 2);
    EXPECT_NE(slurp(dir / "stderr.txt").find("/bogus"), std::string::npos);
    EXPECT_EQ(run_cli("run '" + (dir / "missing.json").string() + "'", dir), 2);
    write_file(dir / "big.json", "{\"scenario\": \"spectrum\", \"numerics\": {\"cutoff_a\": 4, \"cutoff_b\": 4}}");
    EXPECT_EQ(run_cli("run '" + (dir / "big.json").string() + "'", dir), 3);
    EXPECT_NE(slurp(dir / "stderr.txt").find("budget"), std::string::npos);
    EXPECT_EQ(run_cli("print-defaults", dir), 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "stdout.txt")), nlohmann::json(default_config()));
}

TEST(Cli, ExportTables) {
    const auto dir = scratch("tables");
    ASSERT_EQ(run_cli("export-tables --out '" + dir.string() + "'", dir), 0);
    const auto transitions = csv_rows(slurp(dir / "transitions.csv"));
    EXPECT_EQ(transitions.size(), 21u);
    double total = 0.0;
    for (const auto& r : transitions)
        total += r[4];
    EXPECT_NEAR(total, 9.0, 1e-9);  // unit strength out of each excited sublevel
    const auto overlaps = slurp(dir / "overlaps.csv");
    EXPECT_NE(overlaps.find("1.45,TM+,0.975"), std::string::npos);
    const auto lande = slurp(dir / "lande.csv");
    EXPECT_NE(lande.find("0.333333"), std::string::npos);
    EXPECT_NE(lande.find(",0.5"), std::string::npos);
}

TEST(Cli, FieldsScenario) {
    const auto dir = scratch("fields");
    ASSERT_EQ(run_cli("run '" + (source_dir / "configs/fields.json").string() + "'", dir), 0);
    for (const char* f : {"fields_overlap.csv", "fields_evanescent.csv", "fields_azimuth.csv", "fields_distance.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_NE(slurp(dir / "stdout.txt").find("0.9750"), std::string::npos);
}

TEST(Cli, CoTmSpectrumMinimaNearTwentyMegahertz) {
    const auto dir = scratch("spectrum");
    ASSERT_EQ(run_cli("run '" + (source_dir / "configs/spectrum_co_TM.json").string() + "'", dir), 0);
    const auto rows = csv_rows(slurp(dir / "spectrum_co_TM.csv"));
    ASSERT_EQ(rows.size(), 121u);
    double lo = 2.0, hi = 2.0, where_lo = 0.0, where_hi = 0.0;
    for (const auto& r : rows) {
        if (r[0] < -5.0 && r[1] < lo) {
            lo = r[1];
            where_lo = r[0];
        }
        if (r[0] > 5.0 && r[1] < hi) {
            hi = r[1];
            where_hi = r[0];
        }
    }
    EXPECT_NEAR(where_lo, -20.0, 2.0);
    EXPECT_NEAR(where_hi, 20.0, 2.0);
}

TEST(Cli, FitRecoversTheBundledDataset) {
    const auto dir = scratch("fit");
    ASSERT_EQ(run_cli("run '" + (source_dir / "configs/fit_bundled.json").string() + "'", dir), 0)
        << slurp(dir / "stderr.txt");
    const auto j = nlohmann::json::parse(slurp(dir / "fit_bundled.json"));
    EXPECT_NEAR(j["fit"]["g_mean_MHz"].get<double>(), 17.0, 1.0);
    EXPECT_NEAR(j["fit"]["g_sigma_MHz"].get<double>(), 6.0, 1.0);
    EXPECT_EQ(j["data_source"], "data/synthetic_co_TM_17_6.csv");
    const auto rows = csv_rows(slurp(dir / "fit_bundled.csv"));
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows[0].size(), 3u);  // detuning, data, model
}

TEST(Cli, TransitScenarioIsReplayable) {
    const auto dir = scratch("transit");
    write_file(dir / "t.json", "{\"scenario\": \"transit\", \"seed\": 4, \"output\": {\"prefix\": \"t\"},\n"
                               " \"numerics\": {\"cutoff_a\": 1}, \"transit\": {\"g_peak_MHz\": [20.0], \"runs\": 50,"
                               " \"table_points\": 5}}");
    ASSERT_EQ(run_cli("run '" + (dir / "t.json").string() + "'", dir), 0) << slurp(dir / "stderr.txt");
    const auto first = slurp(dir / "t_outcomes.jsonl");
    ASSERT_EQ(run_cli("run '" + (dir / "t.json").string() + "'", dir), 0);
    EXPECT_EQ(first, slurp(dir / "t_outcomes.jsonl"));
    EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 50);
    EXPECT_EQ(csv_rows(slurp(dir / "t_summary.csv")).size(), 1u);
}
