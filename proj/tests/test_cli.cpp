#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "nlohmann/json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path workdir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / "chaosbench_cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

Result run(const std::string& args, const std::string& env = "") {
  const auto out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd = "cd " + workdir().string() + " && " + env + " " + CHAOSBENCH_CLI + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

void write(const std::string& name, const std::string& text) { std::ofstream(workdir() / name) << text; }

}  // namespace

TEST(Cli, PresetsList) {
  const auto r = run("presets list");
  EXPECT_EQ(r.code, 0);
  for (const char* p : {"lorenz-classic", "lorenz-contracting", "duffing-holmes", "duffing-periodic", "harmonic"})
    EXPECT_NE(r.out.find(p), std::string::npos) << p;
}

TEST(Cli, SimulateSmoke) {
  write("sim.cfg", "[run]\ntag = smoke\n[simulate]\nduration = 10\n");
  const auto r = run("--config sim.cfg --out runs --quiet simulate");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const auto csv = slurp(workdir() / "runs" / "simulate-smoke" / "trajectory.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2,x3");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1002);
  const auto m = nlohmann::json::parse(slurp(workdir() / "runs" / "simulate-smoke" / "manifest.json"));
  EXPECT_EQ(m["rerun"], "chaosbench simulate --config resolved.cfg");
}

TEST(Cli, OutputRootFromEnvironment) {
  write("env.cfg", "[run]\ntag = env\n[simulate]\nduration = 1\n");
  const auto r = run("--config env.cfg simulate", "CHAOSBENCH_OUT=envroot");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(workdir() / "envroot" / "simulate-env" / "trajectory.csv"));
  EXPECT_NE(r.out.find("artifacts: envroot/simulate-env"), std::string::npos);
}

TEST(Cli, SeedFlagOverridesConfig) {
  write("q.cfg", "[run]\ntag = seeded\n[quantum]\nN = 16\nM = 4\nsteps = 3\n");
  ASSERT_EQ(run("--config q.cfg --seed 42 --out runs --quiet entropy-quantum").code, 0);
  EXPECT_NE(slurp(workdir() / "runs" / "entropy-quantum-seeded" / "resolved.cfg").find("seed = 42"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwoWithJson) {
  write("bad.cfg", "[simulate]\nduration = 1\n[bogus]\nx = 1\n");
  const auto r = run("--config bad.cfg --out runs simulate");
  EXPECT_EQ(r.code, 2);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["error"]["exit_code"], 2);
  EXPECT_EQ(j["error"]["kind"], "config");
  EXPECT_NE(j["error"]["message"].get<std::string>().find("bogus.x"), std::string::npos);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("--config missing.cfg simulate").code, 2);
}

TEST(Cli, InvalidModelParametersExitTwo) {
  write("odd.cfg", "[run]\ntag = odd\n[quantum]\nN = 33\nM = 3\n");
  const auto r = run("--config odd.cfg --out runs entropy-quantum");
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(fs::exists(workdir() / "runs" / "entropy-quantum-odd" / "error.json"));
}

TEST(Cli, DivergenceExitsThreeAndKeepsPartialOutput) {
  write("div.cfg",
        "[run]\ntag = div\n[system]\npreset = harmonic\nx0 = 1e100,1e100\n[precision]\nstep = 10\norder = 4\n"
        "[simulate]\nduration = 1000\n");
  const auto r = run("--config div.cfg --out runs simulate");
  EXPECT_EQ(r.code, 3);
  const auto dir = workdir() / "runs" / "simulate-div";
  EXPECT_TRUE(fs::exists(dir / "trajectory.csv"));
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "error.json"))["error"]["kind"], "diverged");
}

TEST(Cli, ResourceGuardsExitFour) {
  write("mem.cfg", "[run]\ntag = mem\n[simulate]\nduration = 1e9\n");
  EXPECT_EQ(run("--config mem.cfg --out runs simulate").code, 4);
  write("wall.cfg", "[run]\ntag = wall\n[lyapunov]\nt_total = 1e7\n[guard]\nwall_seconds = 0.5\n");
  const auto r = run("--config wall.cfg --out runs lyapunov");
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("wall-clock"), std::string::npos);
}
