#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::path(EVSLIP_TEST_TMP) / "cli";

int run(const std::string& args) {
  const std::string cmd = std::string(EVSLIP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path dir(const std::string& name) {
  const fs::path d = kRoot / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("simulate --detector neither") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("simulate a load drop") {
  const fs::path out = dir("load_drop");
  REQUIRE(run("simulate --scenario load_drop --seed 4 --out " + out.string()) == 0);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report["suppressed"] == true);
  CHECK(report["final_slipping"] == false);
  for (const char* f : {"events.csv", "ground_truth.csv", "windows.csv", "force.csv", "fuzzy_trace.json",
                        "scenario.json"})
    CHECK(fs::exists(out / f));
}

TEST_CASE("flicker noise: baseline false slips at least the feature ones") {
  const fs::path out = dir("flicker");
  REQUIRE(run("simulate --scenario flicker_noise --seed 2 --out " + out.string()) == 0);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report["baseline"]["false_flags"].get<int>() >= report["feature"]["false_flags"].get<int>());
}

TEST_CASE("invalid scenario file") {
  const fs::path out = dir("invalid");
  std::ofstream(out / "bad.json") << R"({"plant": {"object_mass": -0.3}})";
  CHECK(run("simulate --config " + (out / "bad.json").string() + " --out " + out.string()) == 5);
  std::ofstream(out / "broken.json") << "{ not json";
  CHECK(run("simulate --config " + (out / "broken.json").string() + " --out " + out.string()) == 4);
  CHECK(run("simulate --config " + (out / "missing.json").string() + " --out " + out.string()) == 3);
  CHECK(run("simulate --scenario nope --out " + out.string()) == 5);
}

TEST_CASE("config path from the environment") {
  const fs::path out = dir("env");
  std::ofstream(out / "bad.json") << R"({"plant": {"mu": -1}})";
  const std::string env = "EVSLIP_CONFIG=" + (out / "bad.json").string() + " ";
  const std::string cmd = env + EVSLIP_CLI_PATH + " scenario >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  CHECK(WEXITSTATUS(status) == 5);
}

TEST_CASE("sample, then detect") {
  const fs::path out = dir("pipeline");
  std::ofstream(out / "empty.csv") << "# t_us,x,y,pol\n";
  CHECK(run("sample " + (out / "empty.csv").string() + " --out " + out.string()) == 6);

  REQUIRE(run("sample --seed 5 --duration-us 500000 --out " + out.string()) == 0);
  const std::string th1 = slurp(out / "thresholds.json");
  REQUIRE(run("sample --seed 5 --duration-us 500000 --out " + out.string()) == 0);
  CHECK(slurp(out / "thresholds.json") == th1);

  const fs::path sim = dir("pipeline_sim");
  REQUIRE(run("simulate --scenario load_drop --seed 5 --out " + sim.string()) == 0);
  const std::string log = (sim / "events.csv").string();
  CHECK(run("detect " + log + " --out " + out.string()) == 7);
  CHECK(run("detect " + log + " --thresholds " + (out / "thresholds.json").string() + " --out " + out.string()) ==
        0);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report.contains("feature"));

  std::ofstream(out / "garbage.csv") << "1,2,3\n";
  CHECK(run("detect " + (out / "garbage.csv").string() + " --thresholds " + (out / "thresholds.json").string() +
            " --out " + out.string()) == 4);
}

}  // TEST_SUITE
