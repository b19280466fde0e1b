#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "nsplat/chain_io.hpp"
#include "nsplat/cli.hpp"
#include "nsplat/testbeds.hpp"

using namespace nsplat;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// key=value lines up to the first blank line.
std::map<std::string, std::string> report(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream s(text);
  std::string line;
  while (std::getline(s, line) && !line.empty()) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// Rows of the CSV panel that follows `marker`.
std::vector<std::vector<double>> panel_rows(const std::string& text, const std::string& marker) {
  std::vector<std::vector<double>> rows;
  std::istringstream s(text.substr(text.find(marker)));
  std::string line;
  std::getline(s, line);
  std::getline(s, line);
  while (std::getline(s, line) && !line.empty() && line[0] != '#') {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nsplat_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("a chain written by run resums to the same evidence") {
    TempDir dir;
    const std::string chain = dir / "wc.csv";
    const Result r = cli({"run", "--model", "wedding-cake", "--n-live", "50", "--seed", "3", "--out", chain,
                          "--n-sim", "50"});
    REQUIRE(r.code == 0);
    const auto run = report(r.out);
    CHECK(run.at("termination") == "evidence_remainder");
    CHECK(std::stod(run.at("tie_group_count")) > 0);
    CHECK(r.out.find("# live-count trace") != std::string::npos);

    const Result s = cli({"resum", chain, "--n-sim", "50"});
    REQUIRE(s.code == 0);
    CHECK(report(s.out).at("log_Z") == run.at("log_Z"));
    CHECK(report(s.out).at("log_Z_sd") == run.at("log_Z_sd"));
    CHECK(report(s.out).at("model") == run.at("model"));
  }

  TEST_CASE("identical invocations give identical bytes") {
    TempDir dir;
    const std::vector<std::string> base{"run", "--model", "gauss", "--n-live", "40", "--seed", "11", "--n-sim", "20"};
    auto with_out = [&](const std::string& name) {
      auto a = base;
      a.push_back("--out");
      a.push_back(dir / name);
      return a;
    };
    const Result a = cli(with_out("a.csv"));
    const Result b = cli(with_out("b.csv"));
    REQUIRE(a.code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv.meta") == slurp(dir / "b.csv.meta"));
    auto without_chain = [](std::string text) {
      const auto at = text.find("chain=");
      return text.erase(at, text.find('\n', at) - at);
    };
    CHECK(without_chain(a.out) == without_chain(b.out));

    const Result f1 = cli({"figdata", "--figure", "5", "--grid", "11", "--n-live", "30", "--seed", "2"});
    const Result f2 = cli({"figdata", "--figure", "5", "--grid", "11", "--n-live", "30", "--seed", "2"});
    CHECK(f1.out == f2.out);
  }

  TEST_CASE("zero-likelihood plateau shows up in the diagnostics") {
    TempDir dir;
    const std::string chain = dir / "base.csv";
    const Result r = cli({"run", "--model", "scenario-base", "--algorithm", "original", "--n-live", "100", "--seed",
                          "1", "--out", chain, "--n-sim", "0", "--no-trace"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# live-count trace") == std::string::npos);
    const Result s = cli({"resum", chain, "--compare-naive", "--n-sim", "0"});
    REQUIRE(s.code == 0);
    const auto kv = report(s.out);
    CHECK(std::stod(kv.at("plateau_fraction_of_steps")) > 0.0);
    CHECK(std::stod(kv.at("min_n_live")) < 100);
    CHECK(std::stod(kv.at("delta_naive")) > 0.0);
  }

  TEST_CASE("weights table") {
    TempDir dir;
    const std::string weights = dir / "w.csv";
    const Result r = cli({"run", "--model", "plateau-gauss", "--n-live", "30", "--seed", "4", "--weights", weights,
                          "--n-sim", "0"});
    REQUIRE(r.code == 0);
    std::istringstream s(slurp(weights));
    std::string line;
    std::getline(s, line);
    CHECK(line == "index,logL,n_live,logX,weight");
    double total = 0.0;
    std::size_t rows = 0;
    while (std::getline(s, line)) {
      total += std::stod(line.substr(line.rfind(',') + 1));
      ++rows;
    }
    CHECK(rows == std::stoul(report(r.out).at("n_points")));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("empty and death-only chains") {
    TempDir dir;
    RunRecord empty;
    empty.meta = {10, 1, "gauss", Termination::max_iterations, 1};
    save_run(empty, dir / "empty.csv");
    const Result e = cli({"resum", dir / "empty.csv"});
    CHECK(e.code != 0);
    CHECK(e.err.find("no points") != std::string::npos);

    {
      std::ofstream f(dir / "deaths.csv");
      f << "logL,x0\n-3,0.1\n-2,0.2\n-1,0.3\n";
      std::ofstream m(dir / "deaths.csv.meta");
      write_meta(empty.meta, m);
    }
    CHECK(cli({"resum", dir / "deaths.csv"}).code != 0);
    const Result ok = cli({"resum", dir / "deaths.csv", "--assume-prior-births", "--n-sim", "0"});
    CHECK(ok.code == 0);
    CHECK(report(ok.out).at("n_points") == "3");
  }

  TEST_CASE("error simulation") {
    TempDir dir;
    const std::string chain = dir / "g.csv";
    REQUIRE(cli({"run", "--n-live", "50", "--seed", "5", "--out", chain, "--n-sim", "0"}).code == 0);
    const Result pm = cli({"error-sim", chain, "--point-mass", "--n-sim", "5"});
    REQUIRE(pm.code == 0);
    const auto kv = report(pm.out);
    CHECK(kv.at("log_Z_sd") == "0");
    CHECK(kv.at("log_Z_mean") == kv.at("log_Z"));
    const Result beta = cli({"error-sim", chain, "--n-sim", "200", "--samples", dir / "s.txt"});
    REQUIRE(beta.code == 0);
    CHECK(std::stod(report(beta.out).at("log_Z_sd")) > 0.0);
    std::istringstream s(slurp(dir / "s.txt"));
    std::size_t lines = 0;
    for (std::string l; std::getline(s, l);) ++lines;
    CHECK(lines == 200);
  }

  TEST_CASE("series") {
    const Result r = cli({"series", "--alpha", "0.7", "--sigma", "0.2", "--D", "2"});
    REQUIRE(r.code == 0);
    const auto kv = report(r.out);
    CHECK(std::stod(kv.at("log_Z")) == wedding_cake_log_Z(WeddingCakeParams{}));
    CHECK(std::abs(std::stod(kv.at("log_Z_window")) - std::stod(kv.at("log_Z"))) < 1e-14);
  }

  TEST_CASE("repeat") {
    const Result r = cli({"repeat", "--model", "scenario-base", "--runs", "3", "--n-live", "40", "--seed", "7",
                          "--n-sim", "20"});
    REQUIRE(r.code == 0);
    std::istringstream s(r.out);
    std::string line;
    std::getline(s, line);
    CHECK(line == "run,seed,log_Z,log_Z_sd,log_Z_naive,n_points,min_n_live");
    for (int k = 0; k < 3; ++k) {
      std::getline(s, line);
      CHECK(line.rfind(std::to_string(k) + "," + std::to_string(7 + k) + ",", 0) == 0);
    }
    std::getline(s, line);
    CHECK(line.empty());
    std::stringstream rest;
    rest << s.rdbuf();
    const auto kv = report(rest.str());
    CHECK(kv.at("runs") == "3");
    CHECK(kv.count("coverage_1sd") == 1);
    CHECK(kv.count("bias") == 1);
  }

  TEST_CASE("figure data") {
    const Result f2 = cli({"figdata", "--figure", "2", "--n", "100"});
    REQUIRE(f2.code == 0);
    const auto rows = panel_rows(f2.out, "# figure 2");
    REQUIRE(rows.size() == 100);
    CHECK(rows[49][0] == 50);
    CHECK(rows[49][1] == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(rows[49][2] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rows[99][2] == 0.0);
    CHECK(rows[99][1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

    const Result f3 = cli({"figdata", "--figure", "3", "--n", "100", "--prior", "logarithmic"});
    REQUIRE(f3.code == 0);
    for (const auto& row : panel_rows(f3.out, "# figure 3 panel moments_logarithmic")) {
      CHECK(row[1] == row[3]);
      CHECK(row[2] == row[4]);
    }

    const Result f1 = cli({"figdata", "--figure", "1", "--grid", "21"});
    REQUIRE(f1.code == 0);
    for (const char* name : {"likelihood", "likelihood_distribution", "x_of_lambda", "generalized_inverse"}) {
      CHECK(f1.out.find(std::string("# figure 1 panel ") + name + "\n") != std::string::npos);
    }
    for (const auto& row : panel_rows(f1.out, "# figure 1 panel generalized_inverse")) {
      if (row[0] > 0.77) CHECK(row[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
  }

  TEST_CASE("bad input is rejected") {
    CHECK(cli({"run", "--no-such-flag"}).code != 0);
    CHECK(cli({"figdata", "--figure", "9"}).code != 0);
    CHECK(cli({"figdata", "--figure", "9"}).err.find("unknown figure") != std::string::npos);
    CHECK(cli({"run", "--model", "nonesuch"}).code != 0);
    CHECK(cli({"run", "--algorithm", "sideways"}).code != 0);
    CHECK(cli({}).code != 0);
    CHECK(cli({"resum", "/nonexistent/chain.csv"}).code != 0);
  }

  TEST_CASE("exhausted contour exits with its own code") {
    const Result r = cli({"run", "--model", "constant", "--algorithm", "original", "--n-live", "5", "--max-rejections",
                          "10", "--n-sim", "0"});
    CHECK(r.code == 3);
    CHECK(r.err.find("contour exhausted") != std::string::npos);
  }
}
