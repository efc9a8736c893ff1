#include "doctest.h"

#include "heis/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using heis::cli::run;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run call(std::vector<std::string> args) {
  args.insert(args.begin(), "heis");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const fs::path d = fs::temp_directory_path() / "heis_cli_test";
  fs::create_directories(d);
  return d;
}

fs::path write(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> v;
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_CASE("section-h writes the circular boundary") {
  const auto cfg = write("sqnorm_s1.json", R"({"function": {"builtin": "sqnorm"}, "height": 1})");
  const auto csv = scratch() / "out.csv";
  const Run r = call({"section-h", "--config", cfg.string(), "--csv", csv.string()});
  CHECK(r.code == 0);
  const auto rows = lines(csv);
  REQUIRE(rows.size() == 721);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double rad = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
    CHECK(std::abs(rad - 1.0) < 1e-9);
  }
  CHECK(r.out.find("\"provenance\"") != std::string::npos);
  CHECK(r.out.find("\"seed\": 1") != std::string::npos);
}

TEST_CASE("convexity on a concave input") {
  const auto cfg = write("concave.json", R"j({"function": {"expr": "-(x1^2)", "n": 1}})j");
  const auto csv = scratch() / "viol.csv";
  const Run r = call({"convexity", "--config", cfg.string(), "--csv", csv.string()});
  CHECK(r.code == 1);
  CHECK(lines(csv).size() > 1);
}

TEST_CASE("usage and config errors") {
  CHECK(call({}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"decompose", "--budget", "huge"}).code == 2);
  const auto bad = write("bad.json", "{\"height\": 1,,}");
  const Run r = call({"section-h", "--config", bad.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("byte") != std::string::npos);
  const auto typo = write("typo.json", R"({"function": {"builtin": "sqnrom"}})");
  CHECK(call({"section-h", "--config", typo.string()}).code == 2);
  const auto expr = write("expr.json", R"({"function": {"expr": "x1 + * y1", "n": 1}})");
  CHECK(call({"section-h", "--config", expr.string()}).code == 2);
  CHECK(call({"section-h", "--config", (scratch() / "missing.json").string()}).code == 2);
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("numerical failure exit code") {
  const auto cfg = write("concave_h.json", R"j({"function": {"expr": "-(x1^2)", "n": 1}, "height": 1})j");
  CHECK(call({"section-h", "--config", cfg.string()}).code == 3);
  const auto aff = write("affine.json", R"({"function": {"expr": "x1", "n": 1}, "height": 1})");
  CHECK(call({"section-h", "--config", aff.string()}).code == 3);
}

TEST_CASE("reports are deterministic") {
  const auto cfg = write("eng.json", R"({"function": "wang", "budgets": {"pairs": 300, "sections": 20}})");
  const Run a = call({"engulfing", "--config", cfg.string(), "--seed", "5", "--jobs", "3"});
  const Run b = call({"engulfing", "--config", cfg.string(), "--seed", "5", "--jobs", "1"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const Run c = call({"engulfing", "--config", cfg.string(), "--seed", "6"});
  CHECK(c.out != a.out);
  CHECK(a.out.find("\"seconds\"") == std::string::npos);
  CHECK(call({"engulfing", "--config", cfg.string(), "--timing"}).out.find("\"seconds\"") != std::string::npos);
}

TEST_CASE("other subcommands") {
  const auto dec = write("dec.json", R"({"target": [0, 0, 1.7320508075688772]})");
  const Run d = call({"decompose", "--config", dec.string()});
  CHECK(d.code == 0);
  CHECK(d.out.find("max_norm") != std::string::npos);

  const auto mm = write("mm.json", R"({"function": "sqnorm", "grid": {"r": [0.5, 1, 2]}})");
  const auto csv = scratch() / "mm.csv";
  CHECK(call({"m-M", "--config", mm.string(), "--csv", csv.string()}).code == 0);
  CHECK(lines(csv).size() == 4);

  const auto hn = write("hn.json", R"({"height": 1, "points": [[0, 0, 1.7], [0, 0, 1.8]]})");
  const Run h = call({"section-hn", "--config", hn.string(), "--budget", "quick"});
  CHECK(h.code == 0);
  CHECK(h.out.find("\"out_at_resolution\"") != std::string::npos);

  const auto qm = write("qm.json", R"({"points": [[0, 0, 0], [3, 0, 0]]})");
  const auto dcsv = scratch() / "d.csv";
  CHECK(call({"quasimetric", "--config", qm.string(), "--budget", "quick", "--csv", dcsv.string()}).code == 0);
  CHECK(lines(dcsv).size() == 5);

  const auto ch = write("chain.json", R"j({"function": {"expr": "-(x1^2)", "n": 1}})j");
  CHECK(call({"chain", "--config", ch.string()}).code == 1);
}
