#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ilab/cli.hpp"
#include "ilab/error.hpp"
#include "ilab/parallel.hpp"

using namespace ilab;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::stringstream o, e;
  int c = dispatch(args, o, e);
  return {c, o.str(), e.str()};
}

std::string body(const std::string& text) {
  std::istringstream in(text);
  std::string line, b;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') b += line + '\n';
  return b;
}

std::string header_value(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  const std::string tag = "# " + key + ": ";
  while (std::getline(in, line))
    if (line.rfind(tag, 0) == 0) return line.substr(tag.size());
  return {};
}

}  // namespace

TEST_CASE("cli: renewal CSV for the geometric law") {
  Run r = run({"renewal", "--tail", "geometric:q=0.5", "--n-max", "10"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.rfind(std::string("# intermittency-lab ") + kVersion + "\n", 0) == 0);
  CHECK(header_value(r.out, "command") == "renewal");
  CHECK(header_value(r.out, "seed") == "1");
  CHECK(header_value(r.out, "config").find("tail=geometric:q=0.5") != std::string::npos);
  std::istringstream in(body(r.out));
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,a");
  int rows = 0;
  while (std::getline(in, line)) {
    auto comma = line.find(',');
    int n = std::stoi(line.substr(0, comma));
    double a = std::stod(line.substr(comma + 1));
    CHECK(a == doctest::Approx(n == 0 ? 1.0 : 0.5).epsilon(1e-14));
    ++rows;
  }
  CHECK(rows == 11);
}

TEST_CASE("cli: usage errors") {
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"renewal", "--tail", "geometric:q=0.5", "--bogus"}).code == kExitUsage);
  CHECK(run({"renewal"}).code == kExitUsage);
  Run bad = run({"renewal", "--tail", "power:alpha=0.5"});
  CHECK(bad.code == kExitUsage);
  CHECK(!bad.err.empty());
  CHECK(run({"mixing", "--map", "lsv:s=0.5", "--mode", "set", "--set", "intervals:0-0.3", "--n-max", "10",
             "--grid", "64"})
            .code == kExitUsage);
  CHECK(run({"mixing", "--map", "lsv:s=0.5", "--mode", "wb", "--ell", "11", "--grid", "64"}).code == kExitUsage);
}

TEST_CASE("cli: self-check") {
  Run r = run({"self-check", "--quick"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("ok ") != std::string::npos);
}

TEST_CASE("cli: seeded output is reproducible and independent of the thread count") {
  std::vector<std::string> a{"markov", "--tail", "power:alpha=3", "--n-max", "20", "--trials", "20000", "--seed", "9"};
  Run r1 = run(a), r2 = run(a);
  auto b = a;
  b.insert(b.end(), {"--threads", "3"});
  Run r3 = run(b);
  set_thread_count(1);
  REQUIRE(r1.code == kExitOk);
  CHECK(r1.out == r2.out);
  CHECK(body(r1.out) == body(r3.out));
  CHECK(header_value(r1.out, "seed") == "9");
  auto c = a;
  c[8] = "10";
  CHECK(body(run(c).out) != body(r1.out));
}

TEST_CASE("cli: --args-from and --out") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "ilab_cli_test";
  fs::create_directories(dir);
  fs::path args = dir / "args.txt";
  {
    std::ofstream f(args);
    f << "--tail\ngeometric:q=0.5\n\n--n-max\n5\n";
  }
  Run direct = run({"renewal", "--tail", "geometric:q=0.5", "--n-max", "5"});
  Run from = run({"renewal", "--args-from", args.string()});
  CHECK(from.code == kExitOk);
  CHECK(body(from.out) == body(direct.out));
  auto expanded = expand_args_from({"renewal", "--args-from=" + args.string(), "--method", "direct"});
  CHECK(expanded.size() == 7);
  CHECK(expanded.back() == "direct");
  CHECK(run({"renewal", "--args-from", (dir / "missing.txt").string()}).code == kExitUsage);

  fs::path out = dir / "out.csv";
  Run w = run({"renewal", "--tail", "geometric:q=0.5", "--n-max", "5", "--out", out.string()});
  CHECK(w.code == kExitOk);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(body(ss.str()) == body(direct.out));
  fs::remove_all(dir);
}

TEST_CASE("cli: thread count from the environment") {
  ::unsetenv("INTERMITTENCY_LAB_THREADS");
  CHECK(resolve_threads(std::nullopt) == 1);
  ::setenv("INTERMITTENCY_LAB_THREADS", "4", 1);
  CHECK(resolve_threads(std::nullopt) == 4);
  CHECK(resolve_threads(2) == 2);
  ::setenv("INTERMITTENCY_LAB_THREADS", "many", 1);
  CHECK_THROWS_AS(resolve_threads(std::nullopt), ValidationError);
  CHECK(run({"renewal", "--tail", "geometric:q=0.5", "--n-max", "3"}).code == kExitUsage);
  ::unsetenv("INTERMITTENCY_LAB_THREADS");
  CHECK_THROWS_AS(resolve_threads(0), ValidationError);
}

TEST_CASE("cli: pipeline regimes") {
  PipelineOptions opt;
  opt.n_max = 400;
  opt.n_grid = 128;
  opt.fit_lo = 50;
  PipelineReport fin = pipeline_lsv(0.5, opt);
  CHECK(fin.regime == "finite");
  CHECK(fin.series == "v");
  CHECK(fin.d == doctest::Approx(1.0));
  CHECK(fin.predicted == doctest::Approx(-1.0));
  CHECK(std::isfinite(fin.M1));
  PipelineReport inf = pipeline_lsv(2.0, opt);
  CHECK(inf.regime == "infinite");
  CHECK(inf.series == "u");
  CHECK(inf.predicted == doctest::Approx(-0.5));
  CHECK(std::abs(inf.operator_fit.slope + 0.5) < 0.1);
  PipelineReport log = pipeline_lsv(1.0, opt);
  CHECK(log.regime == "logarithmic");
  CHECK(std::isnan(log.predicted));
  std::stringstream ss;
  write_pipeline_report(ss, log);
  CHECK(ss.str().find("logarithmic") != std::string::npos);
}
