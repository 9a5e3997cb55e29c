#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

// End-to-end coverage of the command-line tool. The test runner injects the
// binary location via ANOSOV_CLI and the packaged configs via
// ANOSOV_CONFIG_DIR; when run outside ctest without those, the cases skip.

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

const char* cli_path() { return std::getenv("ANOSOV_CLI"); }

std::string config_path(const std::string& name) {
  const char* dir = std::getenv("ANOSOV_CONFIG_DIR");
  REQUIRE(dir != nullptr);
  return std::string(dir) + "/" + name;
}

CliResult run_cli(const std::string& args) {
  CliResult r;
  std::string cmd = std::string(cli_path()) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) {
    r.out.append(buf, got);
  }
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

#define REQUIRE_CLI()                      \
  do {                                     \
    if (cli_path() == nullptr) {           \
      MESSAGE("ANOSOV_CLI not set; skip"); \
      return;                              \
    }                                      \
  } while (0)

TEST_CASE("cli help lists every subcommand") {
  REQUIRE_CLI();
  CliResult r = run_cli("--help");
  CHECK(r.exit_code == 0);
  for (const char* name : {"slope", "slope-field", "h-expansion", "qnt",
                           "bound", "oracle", "trees", "verify"}) {
    CHECK(r.out.find(name) != std::string::npos);
  }
}

TEST_CASE("cli slope on the packaged config matches its oracle") {
  REQUIRE_CLI();
  CliResult r =
      run_cli("slope --config " + config_path("onewave.json") + " --K 3");
  REQUIRE(r.exit_code == 0);
  nlohmann::json doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("command") == "slope");
  CHECK(doc.at("forced") == true);
  CHECK(doc.at("restrict_mode") == "stem-minus-only");
  CHECK(doc.at("per_order").size() == 3);
  CHECK(doc.at("abs_err").get<double>() < 1e-6);
  CHECK(std::abs(doc.at("oracle_residual").get<double>()) < 1e-12);
  // Unit tangent direction.
  const auto& tan = doc.at("tangent");
  double norm = std::hypot(tan[0].get<double>(), tan[1].get<double>());
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cli refuses eps beyond the radius estimate unless forced") {
  REQUIRE_CLI();
  CliResult blocked = run_cli("slope");
  CHECK(blocked.exit_code == 3);
  nlohmann::json err = nlohmann::json::parse(blocked.out);
  CHECK(err.at("error") == "numeric");

  CliResult small = run_cli("slope --eps 0.0001");
  REQUIRE(small.exit_code == 0);
  nlohmann::json doc = nlohmann::json::parse(small.out);
  CHECK(doc.at("forced") == false);
  CHECK(doc.at("eps").get<double>() <= doc.at("radius").get<double>());

  CliResult forced = run_cli("slope --force");
  CHECK(forced.exit_code == 0);
}

TEST_CASE("cli rejects bad usage with exit code 2") {
  REQUIRE_CLI();
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("slope --restrict-mode sideways").exit_code == 2);
  CHECK(run_cli("slope --K 99").exit_code == 2);
  CHECK(run_cli("slope --config /no/such/file.json").exit_code == 2);
  CHECK(run_cli("oracle --iters 2").exit_code == 2);
  CHECK(run_cli("trees --k 9").exit_code == 2);
}

TEST_CASE("cli trees table matches the small-order counts") {
  REQUIRE_CLI();
  CliResult r = run_cli("trees --kmax 4");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 5);  // header + orders 1..4
  CHECK(rows[0][0] == "k");
  CHECK(rows[1][1] == "1");
  CHECK(rows[2][1] == "1");
  CHECK(rows[3][1] == "2");
  CHECK(rows[4][1] == "5");
  // Order 1 admits exactly one label per value in [0, pmax].
  CHECK(rows[1][4] == "41");
  // Class counts never shrink with the order.
  long long prev = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    long long classes = std::stoll(rows[i][3]);
    CHECK(classes >= prev);
    prev = classes;
  }
}

TEST_CASE("cli qnt gaps shrink when the step shrinks") {
  REQUIRE_CLI();
  CliResult r = run_cli("qnt --config " + config_path("onewave.json") +
                        " --t-list 0.01 0.005");
  REQUIRE(r.exit_code == 0);
  auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 7);  // header + K=3 orders x two steps
  CHECK(rows[0][0] == "n");
  for (std::size_t i = 1; i + 1 < rows.size(); i += 2) {
    CHECK(rows[i][0] == rows[i + 1][0]);
    double wide = std::stod(rows[i][4]);
    double narrow = std::stod(rows[i + 1][4]);
    CHECK(narrow < wide);
  }
}

TEST_CASE("cli bound reports a growing majorant sequence") {
  REQUIRE_CLI();
  CliResult r = run_cli("bound --config " + config_path("onewave.json"));
  REQUIRE(r.exit_code == 0);
  nlohmann::json doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("lambda_plus").get<double>() ==
        doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0));
  const auto& per = doc.at("per_order");
  REQUIRE(per.size() == 10);
  double prev = 0.0;
  for (const auto& row : per) {
    double bk = row.at("B_k").get<double>();
    CHECK(bk > prev);
    prev = bk;
  }
  CHECK(doc.at("radius").get<double>() > 0.0);
}

TEST_CASE("cli output is deterministic and mirrored to the out directory") {
  REQUIRE_CLI();
  std::string args = "slope --config " + config_path("onewave.json");
  CliResult first = run_cli(args);
  CliResult second = run_cli(args);
  REQUIRE(first.exit_code == 0);
  CHECK(first.out == second.out);

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "anosov_cli_mirror_test";
  fs::remove_all(dir);
  CliResult mirrored = run_cli(args + " --out-dir " + dir.string());
  REQUIRE(mirrored.exit_code == 0);
  std::ifstream in(dir / "slope.json");
  REQUIRE(in.good());
  std::stringstream content;
  content << in.rdbuf();
  CHECK(content.str() == mirrored.out);
  fs::remove_all(dir);
}
