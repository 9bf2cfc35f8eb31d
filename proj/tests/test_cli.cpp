#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tylerscale_cli_" + std::to_string(std::hash<std::string>{}(
                                    std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
                                    std::to_string(std::rand()))));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(TYLERSCALE_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

json load(const std::string& path) { return json::parse(slurp(path)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("estimate writes a trace-normalized shape") {
  TempDir tmp;
  REQUIRE(run("estimate --d 3 --n 30 --seed 4 --radial t:2 --json " + tmp.file("e.json")) == 0);
  const json j = load(tmp.file("e.json"));
  CHECK(j["d"] == 3);
  CHECK(j["converged"] == true);
  double trace = 0.0;
  for (int i = 0; i < 3; ++i) trace += j["sigma_hat"][i * 3 + i].get<double>();
  CHECK(trace == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(j["residual"].get<double>() <= 1e-10);
}

TEST_CASE("estimate reads a data file") {
  TempDir tmp;
  std::ofstream(tmp.file("x.txt")) << "data 2 3\n1 0 0.5\n0 1 0.5\n";
  REQUIRE(run("estimate --input " + tmp.file("x.txt") + " --json " + tmp.file("e.json")) == 0);
  const json j = load(tmp.file("e.json"));
  CHECK(j["iterations"].get<long>() >= 1);
  CHECK(j["capacity_trace"].size() == j["iterations"].get<std::size_t>() + 1);
}

TEST_CASE("scale with both methods") {
  TempDir tmp;
  for (const std::string method : {"flipflop", "flow"}) {
    const std::string out = tmp.file(method + ".json");
    REQUIRE(run("scale --method " + method + " --d 3 --n 9 --seed 2 --tol 1e-9 --json " + out +
                " --csv " + tmp.file(method + ".csv")) == 0);
    const json j = load(out);
    CHECK(j["method"] == method);
    CHECK(j["converged"] == true);
    CHECK(j["final_error"].get<double>() <= 1e-9);
    CHECK(j["R"].size() == 9);
    CHECK(j["L"].size() == 9);
    CHECK(slurp(tmp.file(method + ".csv")).find('\n') != std::string::npos);
  }
  CHECK(load(tmp.file("flow.json")).contains("left_growth_bound"));
}

TEST_CASE("expansion certificates in both modes") {
  TempDir tmp;
  REQUIRE(run("expansion --d 2 --n 8 --seed 3 --beta 1/2 --json " + tmp.file("x.json")) == 0);
  const json j = load(tmp.file("x.json"));
  CHECK(j["mode"] == "exact");
  CHECK(j["seed"].is_null());
  CHECK(j["lambda_infty"].is_number());
  CHECK(j["witness"]["subset"][0] == 1);
  CHECK(j["witness"]["subset"].size() == 4);

  REQUIRE(run("expansion --d 3 --n 24 --seed 3 --beta 1/4 --mode sampled --subsets 40 --json " +
              tmp.file("s.json")) == 0);
  const json s = load(tmp.file("s.json"));
  CHECK(s["mode"] == "sampled");
  CHECK(s["seed"]["master_seed"] == 3);
  CHECK(s["trials"] == 40);
}

TEST_CASE("experiment output is byte-identical on rerun") {
  TempDir tmp;
  const std::string args =
      "experiment expansion-survey --d 3 --n-grid 8,12 --trials 3 --seed 9 --mode exact --csv ";
  REQUIRE(run(args + tmp.file("a.csv")) == 0);
  REQUIRE(run(args + tmp.file("b.csv") + " --threads 2") == 0);
  const std::string a = slurp(tmp.file("a.csv"));
  CHECK(!a.empty());
  CHECK(a == slurp(tmp.file("b.csv")));

  REQUIRE(run("experiment sample-complexity --d 2 --n-grid 8,16 --trials 2 --seed 1 --csv " +
              tmp.file("sc.csv")) == 0);
  CHECK(slurp(tmp.file("sc.csv")).rfind("d,n,trial,seed,rel_op_error", 0) == 0);
  REQUIRE(run("experiment convergence --d 2 --n 8 --trials 2 --seed 1 --csv " +
              tmp.file("cv.csv")) == 0);
  CHECK(slurp(tmp.file("cv.csv")).rfind("trial,iter,", 0) == 0);
}

TEST_CASE("derivative diagnostics") {
  TempDir tmp;
  CHECK(run("diagnose derivatives --csv " + tmp.file("d.csv") + " --json " + tmp.file("d.json")) ==
        0);
  const json j = load(tmp.file("d.json"));
  CHECK(j["passed"] == true);
  CHECK(j["frames"].size() == 10);
}

TEST_CASE("bad input exits with an error status") {
  TempDir tmp;
  CHECK(run("experiment convergence --d 4 --n 6 --csv " + tmp.file("x.csv")) == 1);
  CHECK(run("expansion --d 2 --n 5 --json " + tmp.file("x.json")) == 1);
  CHECK(run("scale --method newton --json " + tmp.file("x.json")) == 1);
  CHECK(run("estimate --input " + tmp.file("missing.txt")) == 1);
  std::ofstream(tmp.file("bad.txt")) << "2 2\n1 0\n";
  CHECK(run("scale --input " + tmp.file("bad.txt")) == 1);
  CHECK(run("") != 0);
}

}  // TEST_SUITE
