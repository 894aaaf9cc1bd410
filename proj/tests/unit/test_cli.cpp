#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poststab_cli/cli.hpp"
#include "two_point_oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "poststab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = poststab::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return std::string(POSTSTAB_FIXTURES) + "/" + name; }

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("poststab_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Data rows of a CSV written by the tool, keyed by column name.
std::vector<std::map<std::string, std::string>> csv_rows(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (header.empty()) {
      header = cells;
      continue;
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(row);
  }
  return rows;
}

std::size_t file_count(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("verify reproduces the two-point values") {
  const auto dir = fresh_dir("two_point");
  const auto r = cli({"verify", "--scenario", fixture("two_point.json"), "--out", dir.string()});
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(dir / "two_point_verify.csv");
  REQUIRE(rows.size() == 14);
  const std::map<std::string, std::pair<double, double>> expect{
      {"hellinger_phi", {oracle::hellinger_phi_lhs, oracle::hellinger_phi_rhs}},
      {"tv_phi", {oracle::tv_phi_lhs, oracle::tv_phi_rhs}},
      {"kl_phi_forward", {oracle::kl_phi_forward_lhs, oracle::kl_phi_rhs}},
      {"kl_phi_reverse", {oracle::kl_phi_reverse_lhs, oracle::kl_phi_rhs}},
      {"w1_phi_sharp", {oracle::w1_phi_lhs, oracle::w1_phi_sharp_rhs}},
      {"w1_phi_simplified", {oracle::w1_phi_lhs, oracle::w1_phi_simplified_rhs}},
      {"hellinger_prior", {oracle::hellinger_prior_lhs, oracle::hellinger_prior_rhs}},
      {"tv_prior", {oracle::tv_posteriors, oracle::tv_prior_rhs}},
      {"kl_prior_forward", {oracle::kl_prior_lhs, oracle::kl_prior_rhs}},
      {"w1_prior_sharp", {oracle::tv_posteriors, oracle::w1_prior_sharp_rhs}},
      {"w1_prior_simplified", {oracle::tv_posteriors, oracle::w1_prior_simplified_rhs}},
  };
  std::size_t matched = 0;
  for (const auto& row : rows) {
    CHECK(row.at("holds") == "true");
    CHECK(row.at("side_checks_hold") == "true");
    auto it = expect.find(row.at("theorem_id"));
    if (it == expect.end()) continue;
    ++matched;
    INFO(row.at("theorem_id"));
    CHECK(std::stod(row.at("lhs")) == doctest::Approx(it->second.first).epsilon(1e-9));
    CHECK(std::stod(row.at("rhs")) == doctest::Approx(it->second.second).epsilon(1e-9));
  }
  CHECK(matched == expect.size());
  const auto j = json::parse(slurp(dir / "two_point_verify.json"));
  CHECK(j.at("all_hold") == true);
  CHECK(j.at("reports").size() == 14);
}

TEST_CASE("identical perturbations give zero slack") {
  const auto dir = fresh_dir("identical");
  const auto r = cli({"verify", "--scenario", fixture("identical.json"), "--out", dir.string(), "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(file_count(dir) == 1);
  for (const auto& row : csv_rows(dir / "identical_verify.csv")) {
    INFO(row.at("theorem_id"));
    CHECK(std::stod(row.at("lhs")) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(std::stod(row.at("rhs")) == 0.0);
    CHECK(std::stod(row.at("slack")) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  }
}

TEST_CASE("input errors exit 2 without writing") {
  SUBCASE("violated hypothesis is named") {
    const auto dir = fresh_dir("negative");
    const auto r = cli({"verify", "--scenario", fixture("negative_phi_prior.json"), "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("nonnegative") != std::string::npos);
    CHECK(r.err.find("hellinger_prior") != std::string::npos);
    CHECK(file_count(dir) == 0);
  }
  SUBCASE("huber eps outside (0,1)") {
    const auto dir = fresh_dir("huber_bad");
    const auto r = cli({"experiment", "huber", "--scenario", fixture("huber_bad_eps.json"), "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("eps") != std::string::npos);
    CHECK(file_count(dir) == 0);
  }
  SUBCASE("malformed JSON reports a position") {
    const auto dir = fresh_dir("malformed");
    const auto bad = dir / "in" / "bad.json";
    write(bad, "{\n  \"name\": \"x\",\n  \"space\": {\"points\": [0, 1]\n");
    const auto r = cli({"verify", "--scenario", bad.string(), "--out", (dir / "out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("parse error") != std::string::npos);
    CHECK(r.err.find("line") != std::string::npos);
    CHECK(file_count(dir / "out") == 0);
  }
  SUBCASE("unresolved names report the field") {
    const auto dir = fresh_dir("unresolved");
    const auto path = dir / "in" / "s.json";
    write(path, R"({"space": {"points": [0, 1]}, "priors": {"mu": [0.5, 0.5]},
      "likelihoods": {"phi": {"values": [0, 1]}},
      "perturbations": [{"kind": "phi", "payload": {"prior": "mu", "phi": "phi", "phi_tilde": "nope"}}],
      "checks": ["tv_phi"]})");
    const auto r = cli({"verify", "--scenario", path.string(), "--out", (dir / "out").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("phi_tilde") != std::string::npos);
    CHECK(r.err.find("nope") != std::string::npos);
  }
  SUBCASE("check without a matching perturbation") {
    const auto dir = fresh_dir("unmatched");
    const auto path = dir / "in" / "s.json";
    write(path, R"({"space": {"points": [0, 1]}, "priors": {"mu": [0.5, 0.5]},
      "perturbations": [], "checks": ["tv_prior"]})");
    CHECK(cli({"verify", "--scenario", path.string(), "--out", (dir / "out").string()}).code == 2);
  }
  SUBCASE("command line errors") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"verify"}).code == 2);
    CHECK(cli({"experiment", "nonsense", "--scenario", fixture("two_point.json")}).code == 2);
    CHECK(cli({"verify", "--scenario", fixture("two_point.json"), "--format", "xml"}).code == 2);
    CHECK(cli({"verify", "--scenario", fixture("does_not_exist.json")}).code == 2);
    CHECK(cli({"--help"}).code == 0);
  }
}

TEST_CASE("gaussian command") {
  SUBCASE("identical Gaussians") {
    const auto r = cli({"gaussian", "--mean-a", "0", "--var-a", "2", "--mean-b", "0", "--var-b", "2"});
    REQUIRE(r.code == 0);
    for (const auto& row : json::parse(r.out).at("rows")) {
      INFO(row.dump());
      CHECK(row.at("value").get<double>() == 0.0);
    }
  }
  SUBCASE("unit shift against quadrature") {
    const auto dir = fresh_dir("gauss");
    const auto r = cli({"gaussian", "--mean-a", "0", "--var-a", "1", "--mean-b", "1", "--var-b", "1", "--oracle",
                        "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    bool saw_h = false;
    for (const auto& row : j.at("rows")) {
      CHECK(row.at("within_tol") == true);
      if (row.at("quantity") == "d_H") {
        saw_h = true;
        CHECK(std::abs(row.at("value").get<double>() - row.at("oracle").get<double>()) <= 1e-6);
      }
    }
    CHECK(saw_h);
    CHECK(fs::exists(dir / "gaussian_gaussian.csv"));
  }
  SUBCASE("diverging mean series") {
    const auto r = cli({"gaussian", "--scenario", fixture("spectral_diverging.json")});
    CHECK(r.code == 1);
    const auto j = json::parse(r.out);
    bool refused = false, singular = false;
    for (const auto& row : j.at("rows")) {
      if (row.at("quantity") == "equivalent") singular = row.at("value") == false;
      if (row.at("quantity") == "d_H") refused = row.at("value").is_null();
    }
    CHECK(singular);
    CHECK(refused);
  }
  SUBCASE("bad input") {
    CHECK(cli({"gaussian", "--mean-a", "0", "--var-a", "-1", "--mean-b", "0", "--var-b", "1"}).code == 2);
    CHECK(cli({"gaussian", "--mean-a", "0"}).code == 2);
    CHECK(cli({"gaussian", "--mean-a", "0", "--var-a", "1", "--mean-b", "0", "--var-b", "1", "--distance", "js"})
              .code == 2);
  }
}

TEST_CASE("experiments") {
  SUBCASE("sensitivity with identical priors") {
    const auto dir = fresh_dir("sens_id");
    const auto r = cli({"experiment", "sensitivity", "--scenario", fixture("sensitivity_identity.json"), "--out",
                        dir.string()});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(dir / "sensitivity_identity_sensitivity.csv");
    CHECK(rows.size() == 20);
    for (const auto& row : rows) {
      CHECK(row.at("ratio") == "0");
      CHECK(row.at("posterior_distance") == "0");
    }
  }
  SUBCASE("brittleness fixture") {
    const auto dir = fresh_dir("brittle");
    const auto r = cli({"experiment", "brittleness", "--scenario", fixture("brittleness.json"), "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(dir / "brittleness_brittleness.csv");
    REQUIRE(rows.size() == 7);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].at("holds") == "true");
      CHECK(std::stod(rows[i].at("d_L")) <= 0.05 + 1e-12);
      if (i > 0) CHECK(std::stod(rows[i].at("d_TV")) > std::stod(rows[i - 1].at("d_TV")));
    }
  }
  SUBCASE("two-point experiments pass") {
    for (const char* name : {"sensitivity", "huber", "continuity", "derivative"}) {
      INFO(name);
      const auto dir = fresh_dir(std::string("tp_") + name);
      const auto r = cli({"experiment", name, "--scenario", fixture("two_point.json"), "--out", dir.string()});
      CHECK(r.code == 0);
      const auto j = json::parse(slurp(dir / (std::string("two_point_") + name + ".json")));
      CHECK(j.at("pass") == true);
      CHECK(j.at("experiment") == name);
    }
  }
  SUBCASE("huber values") {
    const auto dir = fresh_dir("huber_vals");
    REQUIRE(cli({"experiment", "huber", "--scenario", fixture("two_point.json"), "--out", dir.string()}).code == 0);
    const auto rows = csv_rows(dir / "two_point_huber.csv");
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[0].at("inf")) == doctest::Approx(oracle::huber_inf).epsilon(1e-9));
    CHECK(std::stod(rows[0].at("sup")) == doctest::Approx(oracle::huber_sup).epsilon(1e-9));
    CHECK(std::stod(rows[0].at("tv_range")) == doctest::Approx(oracle::tv_range).epsilon(1e-9));
  }
  SUBCASE("experiment without its section") {
    CHECK(cli({"experiment", "brittleness", "--scenario", fixture("two_point.json"), "--out",
               fresh_dir("nosec").string()})
              .code == 2);
  }
}

TEST_CASE("outputs are deterministic") {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  REQUIRE(cli({"verify", "--scenario", fixture("two_point.json"), "--seed", "0", "--out", a.string()}).code == 0);
  REQUIRE(cli({"verify", "--scenario", fixture("two_point.json"), "--seed", "0", "--out", b.string()}).code == 0);
  CHECK(slurp(a / "two_point_verify.csv") == slurp(b / "two_point_verify.csv"));

  REQUIRE(cli({"experiment", "derivative", "--scenario", fixture("two_point.json"), "--seed", "7", "--out",
               a.string()})
              .code == 0);
  REQUIRE(cli({"experiment", "derivative", "--scenario", fixture("two_point.json"), "--seed", "7", "--out",
               b.string()})
              .code == 0);
  const auto csv = slurp(a / "two_point_derivative.csv");
  CHECK(csv == slurp(b / "two_point_derivative.csv"));
  CHECK(csv.find("# seed: 7") != std::string::npos);

  REQUIRE(cli({"experiment", "derivative", "--scenario", fixture("two_point.json"), "--seed", "8", "--out",
               b.string()})
              .code == 0);
  CHECK(csv != slurp(b / "two_point_derivative.csv"));
}

TEST_CASE("the installed executable honours the exit codes") {
  const auto dir = fresh_dir("exe");
  const std::string exe = POSTSTAB_EXE;
  const auto run = [&](const std::string& args) {
    const int s = std::system((exe + " " + args + " > " + (dir.string() + "_log") + " 2>&1").c_str());
    return WEXITSTATUS(s);
  };
  CHECK(run("verify --scenario " + fixture("two_point.json") + " --out " + dir.string()) == 0);
  CHECK(run("verify --scenario " + fixture("negative_phi_prior.json") + " --out " + dir.string()) == 2);
  CHECK(run("experiment huber --scenario " + fixture("huber_bad_eps.json") + " --out " + dir.string()) == 2);
}
