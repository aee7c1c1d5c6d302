#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#ifndef FUL_CLI_PATH
#error "FUL_CLI_PATH must point at the built binary"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Workdir {
  fs::path dir;
  Workdir() {
    dir = fs::temp_directory_path() / ("ful_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Workdir() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  fs::path file(const std::string& name, const std::string& content) const {
    fs::path p = dir / name;
    std::ofstream(p) << content;
    return p;
  }
};

int run_cli(const std::string& args) {
  std::string cmd = std::string(FUL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("classify scenario reproduces the worked row") {
  Workdir w;
  auto cfg = w.file("classify.json",
                    R"({"task":"classical-classify","A":0.70710678,"B":1.41421356,"T":1,)"
                    R"("D":"1/2","tau0":0.1})");
  auto out = (w.dir / "out").string();
  REQUIRE(run_cli("classical classify --config " + cfg.string() + " --out " + out) == 0);

  auto lines = read_lines(fs::path(out) / "classify.csv");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].rfind("# ful ", 0) == 0);
  CHECK(lines[1] == "r,s,q,tau0,Q,delta_eta,verdict");
  CHECK(lines[2] == "1,2,1,0.1,2,1,escaping");

  json layout = json::parse(slurp(fs::path(out) / "layout.json"));
  CHECK(layout.at("q") == 1);
  CHECK(layout.at("components").size() == 4);
}

TEST_CASE("spectrum scenario reproduces the (1,1) band") {
  Workdir w;
  auto cfg = w.file("spec.json",
                    R"({"task":"quantum-spectrum","A":1,"B":2,"p":1,"q":1,"grid":256})");
  auto out = (w.dir / "out").string();
  REQUIRE(run_cli("quantum spectrum --config " + cfg.string() + " --out " + out) == 0);

  auto lines = read_lines(fs::path(out) / "spectrum.csv");
  REQUIRE(lines.size() >= 4);
  CHECK(lines[1] == "x0,branch,xi,rho");
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    auto last_comma = lines[i].rfind(',');
    double rho = std::stod(lines[i].substr(last_comma + 1));
    lo = std::min(lo, rho);
    hi = std::max(hi, rho);
  }
  const double pi = std::numbers::pi;
  CHECK(std::fabs(lo + pi * pi / 32.0) < 1e-8);
  CHECK(std::fabs(hi) < 1e-8);
}

TEST_CASE("malformed scenarios exit with code 2") {
  Workdir w;
  auto bad = w.file("bad.json",
                    R"({"task":"classical-classify","A":2,"B":1,"T":1,"D":"1/2","tau0":0.1})");
  CHECK(run_cli("classical classify --config " + bad.string()) == 2);

  auto mismatch = w.file("mismatch.json",
                         R"({"task":"quantum-evolve","A":1,"B":2,"T":1,"D":"1/2","tau0":0.1})");
  CHECK(run_cli("classical classify --config " + mismatch.string()) == 2);

  auto float_D = w.file("floatD.json",
                        R"({"task":"classical-classify","A":1,"B":2,"T":1,"D":0.5,"tau0":0.1})");
  CHECK(run_cli("classical classify --config " + float_D.string()) == 2);

  CHECK(run_cli("classical classify --config " + (w.dir / "missing.json").string()) == 2);
  CHECK(run_cli("classical simulate") == 2);
}

TEST_CASE("numerical guard trips exit with code 3") {
  Workdir w;
  // far too few modes for this many periods: kick truncation overflows
  auto cfg = w.file("overflow.json",
                    R"({"task":"quantum-evolve","A":1,"B":3,"p":1,"q":2,)"
                    R"("n_periods":400,"n_modes":16})");
  auto out = (w.dir / "out").string();
  CHECK(run_cli("quantum evolve --config " + cfg.string() + " --out " + out) == 3);
  // the partial series was still written
  CHECK(fs::exists(fs::path(out) / "energy.csv"));
  json fit = json::parse(slurp(fs::path(out) / "fit.json"));
  CHECK(fit.at("aborted").get<bool>());
}

TEST_CASE("simulate scenario dumps the worked trajectory") {
  Workdir w;
  auto cfg = w.file("sim.json",
                    R"({"task":"classical-simulate","A":1,"B":2,"T":1,"t0":0.5,"v0":10,)"
                    R"("stop":{"n_collisions":3}})");
  auto out = (w.dir / "out").string();
  REQUIRE(run_cli("classical simulate --config " + cfg.string() + " --out " + out) == 0);
  auto lines = read_lines(fs::path(out) / "simulate.csv");
  REQUIRE(lines.size() == 6);  // header comment + columns + initial + 3 records
  CHECK(lines[1] == "n,t,v,I,theta,singular");
  // second record: t = 8.5/11, v = 12
  std::stringstream row(lines[3]);
  std::string field;
  std::getline(row, field, ',');
  CHECK(field == "1");
  std::getline(row, field, ',');
  CHECK(std::stod(field) == Catch::Approx(8.5 / 11.0).epsilon(1e-12));
  std::getline(row, field, ',');
  CHECK(std::stod(field) == Catch::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("poincare scenario holds the fixed point") {
  Workdir w;
  auto cfg = w.file("poincare.json",
                    R"({"task":"classical-poincare","A":1,"B":2,"T":1,)"
                    R"("tau0":0.3,"I0":10.4,"periods":50,"I_min":5})");
  auto out = (w.dir / "out").string();
  REQUIRE(run_cli("classical poincare --config " + cfg.string() + " --out " + out) == 0);
  auto lines = read_lines(fs::path(out) / "poincare.csv");
  REQUIRE(lines.size() == 53);
  for (std::size_t i = 2; i < lines.size(); ++i) {
    std::stringstream row(lines[i]);
    std::string k, tau, I;
    std::getline(row, k, ',');
    std::getline(row, tau, ',');
    std::getline(row, I, ',');
    CHECK(std::stod(tau) == Catch::Approx(0.3).margin(1e-10));
    CHECK(std::stod(I) == Catch::Approx(10.4).margin(1e-10));
  }
}

TEST_CASE("birkhoff scenario reports the atypical identity cocycle") {
  Workdir w;
  auto cfg = w.file("birkhoff.json",
                    R"({"task":"classical-birkhoff","A":1,"B":2,"T":1,)"
                    R"("D":"0/1","tau0":0.3,"N":5000})");
  auto out = (w.dir / "out").string();
  REQUIRE(run_cli("classical birkhoff --config " + cfg.string() + " --out " + out) == 0);
  json rep = json::parse(slurp(fs::path(out) / "birkhoff.json"));
  CHECK(rep.at("zero_returns").get<long long>() == 5000);
  CHECK(rep.at("final_sum").get<long long>() == 0);
}

TEST_CASE("evolve scenario fits the analytic coefficient") {
  Workdir w;
  auto cfg = w.file("evolve.json",
                    R"({"task":"quantum-evolve","A":1,"B":2,"p":1,"q":1,)"
                    R"("n_periods":60,"n_modes":512})");
  auto out = (w.dir / "out").string();
  REQUIRE(run_cli("quantum evolve --config " + cfg.string() + " --out " + out) == 0);
  json fit = json::parse(slurp(fs::path(out) / "fit.json"));
  CHECK(fit.at("rel_err").get<double>() < 1e-3);
  CHECK_FALSE(fit.at("aborted").get<bool>());
  auto lines = read_lines(fs::path(out) / "energy.csv");
  CHECK(lines.size() == 63);  // header + columns + E(0..60)
}

TEST_CASE("coeff scenario writes the analytic report") {
  Workdir w;
  auto cfg = w.file("coeff.json",
                    R"({"task":"quantum-coeff","A":1,"B":2,"p":1,"q":1,"grid":512})");
  auto out = (w.dir / "out").string();
  REQUIRE(run_cli("quantum coeff --config " + cfg.string() + " --out " + out) == 0);
  json rep = json::parse(slurp(fs::path(out) / "coeff.json"));
  CHECK(rep.at("a_analytic").get<double>() == Catch::Approx(0.0871834).epsilon(1e-4));
  CHECK(rep.at("branches").get<int>() == 1);
}

TEST_CASE("outputs are byte-identical across runs") {
  Workdir w;
  auto cfg = w.file("classify.json",
                    R"({"task":"classical-classify","A":1,"B":2,"T":1,"D":"1/3",)"
                    R"("tau0":[0.05,0.35,0.65,0.95]})");
  auto out1 = (w.dir / "o1").string(), out2 = (w.dir / "o2").string();
  REQUIRE(run_cli("classical classify --config " + cfg.string() + " --out " + out1) == 0);
  REQUIRE(run_cli("classical classify --config " + cfg.string() + " --out " + out2) == 0);
  CHECK(slurp(fs::path(out1) / "classify.csv") == slurp(fs::path(out2) / "classify.csv"));
  CHECK(slurp(fs::path(out1) / "layout.json") == slurp(fs::path(out2) / "layout.json"));

  // the timestamp flag only touches the header comment line
  auto out3 = (w.dir / "o3").string();
  REQUIRE(run_cli("classical classify --timestamp --config " + cfg.string() + " --out " +
                  out3) == 0);
  auto plain = read_lines(fs::path(out1) / "classify.csv");
  auto stamped = read_lines(fs::path(out3) / "classify.csv");
  REQUIRE(plain.size() == stamped.size());
  CHECK(stamped[0].find(" time=") != std::string::npos);
  for (std::size_t i = 1; i < plain.size(); ++i) CHECK(plain[i] == stamped[i]);
}

TEST_CASE("spectrum output is independent of the thread flag") {
  Workdir w;
  auto cfg = w.file("spec.json",
                    R"({"task":"quantum-spectrum","A":1,"B":3,"p":1,"q":2,"grid":64})");
  auto out1 = (w.dir / "t1").string(), out4 = (w.dir / "t4").string();
  REQUIRE(run_cli("quantum spectrum --config " + cfg.string() + " --out " + out1) == 0);
  REQUIRE(run_cli("quantum spectrum --threads 4 --config " + cfg.string() + " --out " + out4) ==
          0);
  CHECK(slurp(fs::path(out1) / "spectrum.csv") == slurp(fs::path(out4) / "spectrum.csv"));
}

TEST_CASE("verify passes at quick scale and fails on a broken tolerance") {
  Workdir w;
  auto quick = w.file("verify.json", R"({"task":"verify","quick":true})");
  auto out = (w.dir / "out").string();
  CHECK(run_cli("verify --config " + quick.string() + " --out " + out) == 0);
  json rep = json::parse(slurp(fs::path(out) / "verify.json"));
  CHECK(rep.at("all_pass").get<bool>());
  CHECK(rep.at("gates").size() == 10);

  auto broken = w.file("broken.json",
                       R"({"task":"verify","quick":true,"tolerances":{"adiabatic_I":1e-30}})");
  CHECK(run_cli("verify --config " + broken.string() + " --out " + out) == 1);
}
