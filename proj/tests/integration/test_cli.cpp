#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

using Json = nlohmann::json;

std::string bin() {
  const char* b = std::getenv("RELUGEO_BIN");
  REQUIRE(b != nullptr);
  return b;
}

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run(const std::string& args) {
  std::string cmd = bin() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[512];
  while (fgets(buf, sizeof(buf), pipe)) out += buf;
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, out};
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  REQUIRE(f.good());
  f << content;
}

Json load_json(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  Json j;
  f >> j;
  return j;
}

const char* kTmp = "/tmp/relugeo_cli_test";

void ensure_setup() {
  static bool done = [] {
    std::system(("rm -rf " + std::string(kTmp) + " && mkdir -p " + kTmp).c_str());
    std::ofstream(std::string(kTmp) + "/s012.csv") << "0\n1\n2\n";
    std::ofstream(std::string(kTmp) + "/t021.csv") << "0\n2\n1\n";
    std::ofstream(std::string(kTmp) + "/bad.csv") << "1,2\n3,oops\n";
    std::ofstream(std::string(kTmp) + "/ones.csv") << "1\n1\n1\n";
    return true;
  }();
  (void)done;
}

std::string path(const std::string& name) {
  ensure_setup();
  return std::string(kTmp) + "/" + name;
}

}  // namespace

TEST_CASE("cone dim on a line sample") {
  auto r = run("cone dim --sample " + path("s012.csv") + " --out " + path("dim.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("2") != std::string::npos);
  Json j = load_json(path("dim.json"));
  CHECK(j["results"]["rank"] == 2);
  CHECK(j["schema_version"] == 1);
  CHECK(j["input_digests"]["sample"].get<std::string>().substr(0, 6) == "fnv1a:");
}

TEST_CASE("cone member verdicts map to exit code 0") {
  auto r = run("cone member --sample " + path("s012.csv") + " --response " + path("ones.csv"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("MEMBER") == 0);
}

TEST_CASE("cone faces lists all six patterns of the line") {
  auto r = run("cone faces --sample " + path("s012.csv") + " --out " + path("faces.json"));
  CHECK(r.exit_code == 0);
  Json j = load_json(path("faces.json"));
  CHECK(j["results"]["count"] == 6);
}

TEST_CASE("parse errors exit 2") {
  auto r = run("cone dim --sample " + path("bad.csv"));
  CHECK(r.exit_code == 2);
}

TEST_CASE("dimension mismatches exit 3") {
  write_file(path("long.csv"), "1\n2\n3\n4\n");
  auto r = run("cone member --sample " + path("s012.csv") + " --response " + path("long.csv"));
  CHECK(r.exit_code == 3);
}

TEST_CASE("image member exact path and NON_MEMBER at width 1") {
  auto r = run("image member --sample " + path("s012.csv") + " --response " + path("t021.csv") +
               " --width 1");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("NON_MEMBER") != std::string::npos);
  CHECK(r.output.find("exact") != std::string::npos);

  r = run("image member --sample " + path("s012.csv") + " --response " + path("t021.csv") +
          " --width 2");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("NON_MEMBER") == std::string::npos);
  CHECK(r.output.find("MEMBER") != std::string::npos);
}

TEST_CASE("image distance reports the projection") {
  auto r = run("image distance --sample " + path("s012.csv") + " --response " + path("t021.csv") +
               " --width 1 --out " + path("dist.json"));
  CHECK(r.exit_code == 0);
  Json j = load_json(path("dist.json"));
  CHECK(j["results"]["sq_distance"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("image bound formula query") {
  auto r = run("image bound --width 2 --outputs 1 --inputs 2 --samples 10");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("7") != std::string::npos);
}

TEST_CASE("large samples require --numeric, exit 4 otherwise") {
  std::ostringstream big;
  for (int i = 0; i < 20; ++i) big << i << "\n";
  write_file(path("big.csv"), big.str());
  std::ostringstream bigt;
  for (int i = 0; i < 20; ++i) bigt << (i % 3) << "\n";
  write_file(path("bigt.csv"), bigt.str());
  auto r = run("image member --sample " + path("big.csv") + " --response " + path("bigt.csv") +
               " --width 1");
  CHECK(r.exit_code == 4);
  r = run("image member --sample " + path("big.csv") + " --response " + path("bigt.csv") +
          " --width 1 --numeric --restarts 2 --max-iters 300");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("numeric") != std::string::npos);
}

TEST_CASE("image dim reports the rank probe") {
  auto r = run("image dim --sample " + path("s012.csv") +
               " --width 1 --outputs 1 --restarts 30 --seed 3 --out " + path("idim.json"));
  CHECK(r.exit_code == 0);
  Json j = load_json(path("idim.json"));
  CHECK(j["results"]["numerical_rank_max"].get<int>() <=
        j["results"]["theoretical_upper"].get<int>());
}

TEST_CASE("fit command produces a labeled heuristic classification") {
  write_file(path("const.csv"), "3\n3\n3\n");
  auto r = run("fit --sample " + path("s012.csv") + " --response " + path("const.csv") +
               " --widths 1,2,1 --activation relu --restarts 2 --max-iters 500 --seed 5 --out " +
               path("fit.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("heuristic") != std::string::npos);
  Json j = load_json(path("fit.json"));
  CHECK(j["results"]["best_sq_loss"].get<double>() <= 1e-10);
  CHECK(j["results"]["classification"] == "LIKELY_ATTAINED");
}

TEST_CASE("fit honors a JSON config file with flag overrides") {
  write_file(path("const.csv"), "3\n3\n3\n");
  write_file(path("cfg.json"), "{\"restarts\": 2, \"max_iters\": 400, \"seed\": 11}");
  auto r = run("fit --sample " + path("s012.csv") + " --response " + path("const.csv") +
               " --widths 1,2,1 --config " + path("cfg.json") + " --out " + path("fitc.json"));
  CHECK(r.exit_code == 0);
  Json j = load_json(path("fitc.json"));
  CHECK(j["config"]["restarts"] == 2);
  CHECK(j["seed"] == 11);
  r = run("fit --sample " + path("s012.csv") + " --response " + path("const.csv") +
          " --widths 1,2,1 --config " + path("cfg.json") + " --seed 13 --out " + path("fitd.json"));
  CHECK(r.exit_code == 0);
  CHECK(load_json(path("fitd.json"))["seed"] == 13);
}

TEST_CASE("fit rejects inconsistent widths with exit 3") {
  auto r = run("fit --sample " + path("s012.csv") + " --response " + path("t021.csv") +
               " --widths 2,2,1 --restarts 1 --max-iters 100");
  CHECK(r.exit_code == 3);
}

TEST_CASE("replicate nonclosed emits the closed-form table and dumps data") {
  auto r = run("replicate nonclosed --k 1,10,100 --dump --out " + path("rep.json"));
  CHECK(r.exit_code == 0);
  Json j = load_json(path("rep.json"));
  auto seq = j["results"]["sequence"];
  REQUIRE(seq.size() == 3);
  CHECK(seq[0][1].get<double>() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(seq[1][1].get<double>() == doctest::Approx(std::sqrt(5.0) / 10).epsilon(1e-12));
  CHECK(seq[2][1].get<double>() == doctest::Approx(std::sqrt(5.0) / 100).epsilon(1e-12));
  std::ifstream f("paper_s.csv");
  CHECK(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str().find("-2,0") == 0);
}

TEST_CASE("replicate tanh single point analysis") {
  auto r = run("replicate tanh --epsilon 0 --grid 1 --restarts 3 --max-iters 3000 --out " +
               path("tanh.json"));
  CHECK(r.exit_code == 0);
  Json j = load_json(path("tanh.json"));
  REQUIRE(j["results"]["grid"].size() == 1);
  CHECK(j["results"]["grid"][0]["isotonic_sq"].get<double>() == doctest::Approx(0.5));
  CHECK(j["results"]["grid"][0]["best_sq_loss"].get<double>() ==
        doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("run records are deterministic apart from time fields") {
  std::string cmd = "image distance --sample " + path("s012.csv") + " --response " +
                    path("t021.csv") + " --width 1 --seed 9 --out ";
  CHECK(run(cmd + path("a.json")).exit_code == 0);
  CHECK(run(cmd + path("b.json")).exit_code == 0);
  Json a = load_json(path("a.json"));
  Json b = load_json(path("b.json"));
  a.erase("timestamp");
  a.erase("wall_time_ms");
  b.erase("timestamp");
  b.erase("wall_time_ms");
  CHECK(a == b);
}
