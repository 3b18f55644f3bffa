#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "rotor_spectra/commands.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rotor_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "model.json";
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(ROTOR_CLI_PATH) + " " + args + " --out " + out.string() + " > " +
                          (out / "stdout.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Rows of a CSV as header-keyed maps.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) head.push_back(c);
  }
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::map<std::string, std::string> row;
    std::size_t i = 0;
    for (std::string c; std::getline(ss, c, ',') && i < head.size(); ++i) row[head[i]] = c;
    rows.push_back(row);
  }
  return rows;
}

const std::string kCase = std::string(ROTOR_CONFIG_DIR) + "/case_study.json";

}  // namespace

TEST(Cli, ValidateCaseStudy) {
  const auto out = scratch("validate");
  EXPECT_EQ(run("validate --config " + kCase, out), 0);
  const auto j = nlohmann::json::parse(slurp(out / "validate.json"));
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["N"].get<int>(), 33);
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["command"], "validate");
  EXPECT_EQ(m["exit_code"], 0);
}

TEST(Cli, ValidateRejectsBadGenerators) {
  const auto out = scratch("validate_bad");
  // Negative off-diagonal entry.
  auto cfg = write_config(out, R"({"beta":[0.1,0.3],"L":[1,1],"generator":[[1,-1],[-1,1]]})");
  EXPECT_EQ(run("validate --config " + cfg.string(), out), 1);
  EXPECT_FALSE(nlohmann::json::parse(slurp(out / "validate.json"))["pass"].get<bool>());
  // Not symmetric.
  cfg = write_config(out, R"({"beta":[0.1,0.3,0.6],"L":[1,1,1],
    "generator":[[-1,1,0],[0.5,-1,0.5],[0,1,-1]]})");
  EXPECT_EQ(run("validate --config " + cfg.string(), out), 1);
  EXPECT_FALSE(nlohmann::json::parse(slurp(out / "validate.json"))["item1_symmetric_stochastic"].get<bool>());
}

TEST(Cli, OracleNeedsLaplacian) {
  const auto out = scratch("oracle_bad");
  const auto cfg = write_config(out, R"({"beta":[0.1,0.3],"L":[2,1],
    "generator":[[-2,1,1],[1,-2,1],[1,1,-2]]})");
  EXPECT_EQ(run("oracle --config " + cfg.string(), out), 1);
  EXPECT_NE(slurp(out / "stdout.txt").find("Laplacian"), std::string::npos);
}

TEST(Cli, OracleCaseStudy) {
  const auto out = scratch("oracle");
  EXPECT_EQ(run("oracle --config " + kCase + " --k 1,2", out), 0);
  for (const char* f : {"oracle_k1.csv", "oracle_k2.csv"}) {
    const auto rows = read_csv(out / f);
    ASSERT_EQ(rows.size(), 33u);
    for (const auto& r : rows) EXPECT_LT(std::stod(r.at("abs_diff")), 1e-10);
  }
}

TEST(Cli, ConfigErrorsExitTwo) {
  const auto out = scratch("config");
  EXPECT_EQ(run("validate --config " + (out / "missing.json").string(), out), 2);
  auto cfg = write_config(out, R"({"beta":["tau/3"],"L":[2]})");
  EXPECT_EQ(run("spectrum --config " + cfg.string(), out), 2);
  cfg = write_config(out, R"({"beta":[0.1,0.2],"L":[2]})");
  EXPECT_EQ(run("spectrum --config " + cfg.string(), out), 2);
  cfg = write_config(out, "{not json");
  EXPECT_EQ(run("limit --config " + cfg.string(), out), 2);
  EXPECT_EQ(run("spectrum --config " + kCase + " --eps -0.1", out), 2);
  EXPECT_EQ(run("spectrum", out), 2);  // --config missing
  EXPECT_EQ(run("frobnicate --config " + kCase, out), 2);
}

TEST(Cli, SpectrumWritesLabelledTables) {
  const auto out = scratch("spectrum");
  EXPECT_EQ(run("spectrum --config " + kCase + " --k 0,1 --eps 0,0.1", out), 0);
  for (const auto& r : read_csv(out / "spectrum_k0_eps0.1.csv")) EXPECT_LT(std::abs(std::stod(r.at("im"))), 1e-12);
  for (const auto& r : read_csv(out / "spectrum_k1_eps0.csv")) EXPECT_EQ(std::stod(r.at("dist_to_target")), 0.0);
  const auto rows = read_csv(out / "spectrum_k1_eps0.1.csv");
  ASSERT_EQ(rows.size(), 33u);
  for (const auto& r : rows) EXPECT_LE(std::stod(r.at("dist_to_target")), std::stod(r.at("gersh_radius")));
  EXPECT_TRUE(fs::exists(out / "eigenvectors_k1_eps0.1.csv"));
  EXPECT_TRUE(fs::exists(out / "gershgorin_k1_eps0.1.csv"));
  EXPECT_TRUE(fs::exists(out / "unit_circle.csv"));
}

TEST(Cli, ResponseOnSingleBandHasNoSecondOrder) {
  const auto out = scratch("response");
  EXPECT_EQ(run("response --config " + std::string(ROTOR_CONFIG_DIR) + "/single_band.json --k 1", out), 0);
  for (const auto& r : read_csv(out / "response_k1.csv")) {
    EXPECT_EQ(std::stod(r.at("lhathat_re")), 0.0);
    EXPECT_EQ(std::stod(r.at("lhathat_im")), 0.0);
  }
  const auto order = read_csv(out / "order_k1.csv");
  int footers = 0;
  for (const auto& r : order) footers += r.at("eps") == "slope";
  EXPECT_EQ(footers, 5);
}

TEST(Cli, LimitAndConvergence) {
  const auto out = scratch("limit");
  EXPECT_EQ(run("limit --config " + kCase + " --eps 0.01,0.001", out), 0);
  const auto conv = read_csv(out / "convergence_k1.csv");
  ASSERT_EQ(conv.size(), 66u);
  for (const auto& r : conv)
    if (r.at("eps") == "0.001") EXPECT_LT(std::stod(r.at("proj_distance")), 0.05);
}

TEST(Cli, CasestudyProducesEveryFamily) {
  const auto out = scratch("casestudy");
  EXPECT_EQ(run("casestudy --config " + kCase + " --x-res 16", out), 0);
  for (const char* f : {"unit_circle.csv", "spectrum_k1_eps0.1.csv", "eigenvectors_k1_eps0.1.csv",
                        "gershgorin_k1_eps0.1.csv", "eigenfunctions_k1_eps0.1.csv", "limit_k1.csv",
                        "response_k1.csv", "fhat_k1.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_EQ(read_csv(out / "eigenfunctions_k1_eps0.1.csv").size(), 33u * 33u * 16u);
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m["files"].size(), 8u);
  EXPECT_EQ(m["seed"].get<std::uint64_t>(), 20240601u);
}

TEST(Cli, SimulateIsBitReproducible) {
  const auto dir = scratch("simulate_cfg");
  const auto cfg = write_config(dir, R"({"beta":[0.1,0.35],"L":[2,2],"delta":0.05,"epsilons":[0.1],
    "bins":16,"paths":200,"steps":200,"top_m":2,"seed":5})");
  const auto a = scratch("simulate_a"), b = scratch("simulate_b");
  EXPECT_EQ(run("simulate --config " + cfg.string(), a), 0);
  EXPECT_EQ(run("simulate --config " + cfg.string(), b), 0);
  for (const char* f : {"trajectories.csv", "cycles_analytic.csv", "cycles_empirical.csv", "manifest.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_EQ(read_csv(a / "trajectories.csv").size(), 200u * 201u);
  const auto c = scratch("simulate_c");
  EXPECT_EQ(run("simulate --config " + cfg.string() + " --seed 6", c), 0);
  EXPECT_NE(slurp(a / "trajectories.csv"), slurp(c / "trajectories.csv"));
}

TEST(Cli, ManifestHashTracksConfig) {
  rotor::RunConfig a = rotor::parse_config(R"({"beta":[0.1],"L":[1]})");
  rotor::RunConfig b = rotor::parse_config(R"({"beta":[0.1],"L":[1],"seed":2})");
  EXPECT_NE(rotor::fnv1a64(a.source_text), rotor::fnv1a64(b.source_text));
  EXPECT_EQ(rotor::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(rotor::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
