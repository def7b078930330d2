#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "nvmag/app/commands.hpp"

namespace fs = std::filesystem;
using namespace nvmag;
using namespace nvmag::app;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("nvmag_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Exit status of the CLI; stdout and stderr go to `log`.
int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(NVMAG_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string default_config_path() { return std::string(NVMAG_CONFIG_DIR) + "/paper_default.json"; }

}  // namespace

// --- config layer -------------------------------------------------------------

TEST(Config, ShippedDefaultMatchesBuiltInDefaults) {
  const Config shipped = load_config(default_config_path());
  EXPECT_EQ(config_hash(shipped), config_hash(Config{}));
  EXPECT_EQ(config_to_json(shipped).dump(), config_to_json(Config{}).dump());
}

TEST(Config, HashIsPinned) {
  // FNV-1a 64 of the compact canonical dump, computed independently in Python.
  // Changes whenever a default or the canonical key set changes.
  EXPECT_EQ(config_hash(Config{}), "b669b2ee590ee0f5");
}

TEST(Config, HashTracksScenarioButNotOutputDir) {
  Config a;
  Config b = a;
  b.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  Config c = a;
  c.ensemble.t2_star *= 1.0000001;
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, RoundTripsThroughJson) {
  Config c;
  c.seed = 99;
  c.ensemble.t2_star = 4.2e-6;
  c.noise.harmonics.pop_back();
  c.sequence.phase_cycle[1].label = "+y/-y";
  c.sequence.phase_cycle[1].second = -constants::kPi / 2.0;
  c.sequence.phase_cycle[1].first = constants::kPi / 2.0;
  const Config back = parse_config(config_to_json(c).dump());
  EXPECT_EQ(config_to_json(back).dump(), config_to_json(c).dump());
}

TEST(Config, PartialFileKeepsDefaults) {
  const Config c = parse_config(R"({"seed": 7, "ensemble": {"t2_star_s": 3.0e-6}})");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_DOUBLE_EQ(c.ensemble.t2_star, 3.0e-6);
  EXPECT_DOUBLE_EQ(c.ensemble.photocurrent, Config{}.ensemble.photocurrent);
}

TEST(Config, UnknownKeysAreErrors) {
  EXPECT_THROW(parse_config(R"({"sed": 7})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"ensemble": {"t2_star": 3e-6}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"noise": {"excess": {"level": 1e-12}}})"), ConfigError);
}

TEST(Config, BadValuesAreErrors) {
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config(R"({"seed": "seven"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"ensemble": {"t2_star_s": -1.0}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"phantom": {"sensor_center_m": [0, 0]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"sequence": {"phase_cycle": ["+x/+q", "+x/-x", "-x/-x", "-x/+x"]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"welch": {"window": "kaiser"}})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, WeightArraysAreStrict) {
  const Config c = parse_config(R"({"odmr": {"axis_weights": [1, 0.5, 0.5, 0.5]},
                                    "sensitivity": {"hyperfine_weights": [1, 1, 1]}})");
  EXPECT_DOUBLE_EQ(c.odmr.options.axis_weights[1], 0.5);
  EXPECT_DOUBLE_EQ(c.sensitivity.response.hyperfine_weights[0], 1.0);
  EXPECT_THROW(parse_config(R"({"odmr": {"axis_weights": [1, 1, 1]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"odmr": {"axis_weights": [1, -1, 1, 1]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"sensitivity": {"hyperfine_weights": [0, 0, 0]}})"), ConfigError);
}

TEST(Config, ResponseOptionsReachTheSlope) {
  Config c;
  const double base = numerical_response_slope(c);
  c.sensitivity.response.common_mode = 1e-3;  // rejected by demodulation
  EXPECT_NEAR(numerical_response_slope(c) / base, 1.0, 1e-9);
  c.sensitivity.response.hyperfine_weights = {1.0, 1.0, 1.0};  // detuned sub-ensembles dilute the slope
  EXPECT_LT(numerical_response_slope(c), 0.9 * base);
}

// --- commands in process -------------------------------------------------------

TEST(Commands, OdmrDefaultShowsFourTriplets) {
  const auto r = cmd_odmr(Config{});
  EXPECT_NE(r.summary.find("12 local minima in 4 groups"), std::string::npos) << r.summary;
}

TEST(Commands, OdmrZeroFieldCollapsesToHyperfineTriplet) {
  Config c;
  c.bias.magnitude = 0.0;
  const auto odmr = run_odmr(c);
  EXPECT_EQ(odmr.lines.size(), 24u);
  EXPECT_EQ(distinct_lines(odmr.lines), 3u);
}

TEST(Commands, NoiselessRamseyResidualIsNegligible) {
  for (int dm : {1, 2}) {
    const auto run = run_ramsey(Config{}, dm, 0.0, 1);
    ASSERT_TRUE(run.fit.converged);
    EXPECT_LT(run.fit.residual_norm / std::sqrt(static_cast<double>(run.samples.size())), 1e-9);
  }
}

TEST(Commands, EveryOutputCarriesProvenance) {
  const Config c;
  const std::string hash = config_hash(c);
  for (const auto& r : {cmd_odmr(c, {true}), cmd_ramsey(c, {true}), cmd_sensitivity(c, {true})}) {
    for (const auto& f : r.files) {
      EXPECT_NE(f.content.find(hash), std::string::npos) << f.name;
      EXPECT_NE(f.content.find(kVersion), std::string::npos) << f.name;
    }
  }
}

TEST(Commands, PhantomZeroCurrentIsConsistentWithZero) {
  const Config c;
  const dsp::NarrowbandFilter filter(c.filter, c.phantom.sample_rate);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t = run_phantom_trial(c, c.resolved_noise(), filter, 0.0, seed);
    EXPECT_LE(t.fit.amplitude, 3.0 * t.sigma_predicted) << seed;
  }
}

// --- the executable --------------------------------------------------------------

TEST(Cli, DefaultAcceptPasses) {
  const auto dir = scratch("accept");
  EXPECT_EQ(run_cli("accept --out " + (dir / "out").string(), dir / "log.txt"), 0) << slurp(dir / "log.txt");
  const std::string log = slurp(dir / "log.txt");
  EXPECT_NE(log.find("ALL PASS"), std::string::npos);
  EXPECT_EQ(log.find("FAIL "), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "acceptance_report.json"));
}

TEST(Cli, PerturbedT2StarFailsSlopeCriterion) {
  const auto dir = scratch("perturbed");
  write_text(dir / "cfg.json", R"({"name": "perturbed", "ensemble": {"t2_star_s": 3.0e-6}})");
  const int code = run_cli("accept --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string(),
                           dir / "log.txt");
  const std::string log = slurp(dir / "log.txt");
  EXPECT_EQ(code, 2) << log;
  EXPECT_NE(log.find("FAIL  1"), std::string::npos) << log;
  EXPECT_NE(log.find("PASS  6"), std::string::npos) << log;
}

TEST(Cli, MalformedConfigExitsOneAndWritesNothing) {
  const auto dir = scratch("malformed");
  write_text(dir / "bad.json", R"({"ensemble": {"t2_star_s": 3.0e-6,}})");
  EXPECT_EQ(run_cli("phantom --config " + (dir / "bad.json").string() + " --out " + (dir / "out").string(),
                    dir / "log.txt"),
            1);
  EXPECT_FALSE(fs::exists(dir / "out"));
  EXPECT_NE(slurp(dir / "log.txt").find("config error"), std::string::npos);

  write_text(dir / "unknown.json", R"({"ensemble": {"t2star": 3.0e-6}})");
  EXPECT_EQ(run_cli("odmr --config " + (dir / "unknown.json").string() + " --out " + (dir / "out").string(),
                    dir / "log.txt"),
            1);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, UsageErrorsExitOne) {
  const auto dir = scratch("usage");
  EXPECT_EQ(run_cli("", dir / "log.txt"), 1);
  EXPECT_EQ(run_cli("levitate", dir / "log.txt"), 1);
  EXPECT_EQ(run_cli("odmr --seed notanumber", dir / "log.txt"), 1);
  EXPECT_EQ(run_cli("odmr --config /nonexistent.json", dir / "log.txt"), 1);
  EXPECT_EQ(run_cli("--help", dir / "log.txt"), 0);
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto dir = scratch("rerun");
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(run_cli("phantom --seed 5 --out " + (dir / sub).string(), dir / "log.txt"), 0) << slurp(dir / "log.txt");
    ASSERT_EQ(run_cli("sensitivity --seed 5 --out " + (dir / sub).string(), dir / "log.txt"), 0);
  }
  int csvs = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++csvs;
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / entry.path().filename())) << entry.path().filename();
  }
  EXPECT_GE(csvs, 10);

  ASSERT_EQ(run_cli("phantom --seed 6 --out " + (dir / "c").string(), dir / "log.txt"), 0);
  EXPECT_NE(slurp(dir / "a" / "phantom_raw.csv"), slurp(dir / "c" / "phantom_raw.csv"));
}

TEST(Cli, SeedOverrideIsRecordedInHeaders) {
  const auto dir = scratch("seed");
  ASSERT_EQ(run_cli("odmr --seed 42 --plot --out " + (dir / "out").string(), dir / "log.txt"), 0);
  Config c;
  c.seed = 42;
  const std::string csv = slurp(dir / "out" / "odmr_spectrum.csv");
  EXPECT_NE(csv.find("# seed: 42"), std::string::npos);
  EXPECT_NE(csv.find("# config_hash: " + config_hash(c)), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "odmr_spectrum.svg"));
  for (const auto& entry : fs::directory_iterator(dir / "out")) EXPECT_NE(entry.path().extension(), ".tmp");
}
