#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "dicke/io.hpp"
#include "doctest.h"

using namespace dicke;
using namespace dicke::cli;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("dicke_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  [[nodiscard]] std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

const char* kSmallStability = R"({
  "subcommand": "stability",
  "params": {"dg": 0.0},
  "grid": {"x_min": 0.0, "x_max": 0.6, "x_steps": 61, "y_min": 0.2, "y_max": 1.0, "y_steps": 5},
  "numerics": {"steps_per_period": 400}
})";

}  // namespace

TEST_CASE("shortest round-trip formatting") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(0.0) == "0");
  CHECK(io::format_double(-0.0) == "0");
  CHECK(io::format_double(2.5) == "2.5");
  CHECK(io::format_double(1e-300) == "1e-300");
  CHECK(io::format_double(std::nan("")) == "nan");
  CHECK(io::format_double(-INFINITY) == "-inf");
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 2000; ++i) {
    std::uint64_t b = bits(rng);
    double x;
    std::memcpy(&x, &b, sizeof x);
    if (!std::isfinite(x)) continue;
    const std::string s = io::format_double(x);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == x);
  }
}

TEST_CASE("fnv1a reference values") {
  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::hex64(0xaf63dc4c8601ec8cULL) == "af63dc4c8601ec8c");
}

TEST_CASE("csv writer") {
  std::ostringstream out;
  io::CsvWriter csv("-", out, "demo", "00ff", {"a", "b", "c"});
  csv.row({1.5, 2, true});
  CHECK(out.str().empty());
  CHECK_THROWS_AS(csv.row({1.0}), InvalidArgument);
  csv.close();
  CHECK(out.str() == "# dicke demo config_hash=00ff\na,b,c\n1.5,2,1\n");
}

TEST_CASE("config parsing") {
  const json doc = json::parse(kSmallStability);
  const RunConfig c = parse_config(doc, Command::Stability);
  CHECK(c.grid.x_steps == 61);
  CHECK(c.numerics.steps_per_period == 400);
  CHECK(c.numerics.tol_stability == 1e-9);
  CHECK(c.output == "-");

  SUBCASE("round trip through the normalised form") {
    const json norm = c.to_json();
    const RunConfig again = parse_config(norm, Command::Stability);
    CHECK(again.to_json() == norm);
    CHECK(again.hash() == c.hash());
    CHECK(parse_config(json::parse(norm.dump()), Command::Stability).to_json() == norm);
  }
  SUBCASE("hash ignores output and threads but not physics") {
    json d = doc;
    d["output"] = "elsewhere.csv";
    d["threads"] = 3;
    CHECK(parse_config(d, Command::Stability).hash() == c.hash());
    d["params"]["dg"] = 0.1;
    CHECK(parse_config(d, Command::Stability).hash() != c.hash());
  }
  SUBCASE("unknown keys") {
    for (const char* bad : {R"({"colour": 1})", R"({"params": {"gg": 1}})",
                            R"({"params": {"g": 0.1}})", R"({"numerics": {"k": 1}})",
                            R"({"sweep": {"min": 0, "max": 1, "steps": 2}})"}) {
      json d = doc;
      d.merge_patch(json::parse(bad));
      CHECK_THROWS_AS(parse_config(d, Command::Stability), ConfigError);
    }
    json d = doc;
    d["grid"]["z_steps"] = 3;
    CHECK_THROWS_AS(parse_config(d, Command::Stability), ConfigError);
  }
  SUBCASE("types and ranges") {
    for (const char* bad :
         {R"({"numerics": {"steps_per_period": 400.5}})", R"({"numerics": {"tol_det": 0}})",
          R"({"numerics": {"tol_stability": -1e-9}})", R"({"params": {"dg": -0.1}})",
          R"({"params": {"Omega": 0}})", R"({"params": {"dg": "big"}})", R"({"grid": {"x_steps": 0}})",
          R"({"subcommand": "verify"})", R"({"output": "x.json"})", R"({"threads": 0})"}) {
      json d = doc;
      d.merge_patch(json::parse(bad));
      CHECK_THROWS_AS(parse_config(d, Command::Stability), ConfigError);
    }
  }
  SUBCASE("per-command defaults") {
    const RunConfig v = parse_config(json::object(), Command::Verify);
    CHECK(v.numerics.n_max == 20);
    CHECK(v.numerics.n_atoms == 4);
    CHECK_THROWS_AS(parse_config(json::object(), Command::Spectrum), ConfigError);  // sweep required
    CHECK_THROWS_AS(parse_config(json::object(), Command::Section), ConfigError);   // panels required
  }
}

TEST_CASE("dotted overrides") {
  json d = json::object();
  apply_override(d, "numerics.k=2");
  apply_override(d, "numerics.variant=second_order");
  apply_override(d, "panels=[0.5, 1.6]");
  apply_override(d, "output=a.csv");
  CHECK(d["numerics"]["k"] == 2);
  CHECK(d["numerics"]["variant"] == "second_order");
  CHECK(d["panels"].size() == 2);
  CHECK(d["output"] == "a.csv");
  CHECK_THROWS_AS(apply_override(d, "novalue"), ConfigError);
  CHECK_THROWS_AS(apply_override(d, "output.x=1"), ConfigError);
}

TEST_CASE("exit codes and error reports") {
  SUBCASE("empty grid") {
    const auto r = invoke({"stability", "--set", "grid={\"x_min\":0,\"x_max\":1,\"x_steps\":0,"
                                                 "\"y_min\":0.1,\"y_max\":1,\"y_steps\":3}"});
    CHECK(r.code == kExitConfig);
    const json e = json::parse(r.err);
    CHECK(e["error"]["exit_code"] == 2);
    CHECK(e["error"]["kind"] == "config");
    CHECK(r.out.empty());
  }
  SUBCASE("k = 3 has no effective Hamiltonian") {
    const auto r = invoke({"spectrum", "--k", "3", "--set", "sweep={\"min\":0,\"max\":0.1,\"steps\":2}",
                           "--set", "numerics.n_atoms_values=[2]"});
    CHECK(r.code == kExitConfig);
    CHECK(json::parse(r.err)["error"]["type"] == "UnsupportedVariant");
    CHECK(r.out.empty());
  }
  SUBCASE("numerical failure") {
    const auto r = invoke({"verify", "--g", "0.02", "--dg", "2.0", "--set", "numerics.n_atoms=2", "--set",
                           "numerics.n_max=6", "--set", "numerics.average_slices=2"});
    CHECK(r.code == kExitNumerical);
    CHECK(json::parse(r.err)["error"]["type"] == "QuadratureNonConvergence");
  }
  SUBCASE("usage") {
    CHECK(invoke({"stability", "--no-such-flag"}).code == kExitConfig);
    CHECK(invoke({}).code == kExitConfig);
    CHECK(invoke({"--help"}).code == kExitOk);
  }
  SUBCASE("missing config file") {
    const auto r = invoke({"stability", "--config", "/nonexistent/cfg.json"});
    CHECK(r.code == kExitConfig);
  }
}

TEST_CASE("stability output: determinism, header, static separatrix") {
  Scratch s;
  write_file(s.path("cfg.json"), kSmallStability);
  const auto a = invoke({"stability", "--config", s.path("cfg.json"), "--output", s.path("a.csv")});
  REQUIRE(a.code == 0);
  const auto b = invoke({"stability", "--config", s.path("cfg.json"), "--output", s.path("b.csv"),
                         "--threads", "3"});
  REQUIRE(b.code == 0);
  CHECK(slurp(s.path("a.csv")) == slurp(s.path("b.csv")));

  const RunConfig c = parse_config(json::parse(kSmallStability), Command::Stability);
  const std::string text = slurp(s.path("a.csv"));
  CHECK(text.rfind("# dicke stability config_hash=" + c.hash() + "\ng,omega,stable_plus,stable_minus,stable\n", 0) == 0);
  std::size_t lines = 0;
  for (char ch : text) lines += ch == '\n';
  CHECK(lines == 2 + 61 * 5);

  // With no drive the minus mode destabilises at g = omega / 2.
  const json summary = json::parse(slurp(s.path("a.json")));
  CHECK(summary["config_hash"] == c.hash());
  for (const auto& row : summary["first_unstable_g"]) {
    const double w = row["omega"];
    if (w / 2 > 0.6) continue;
    CHECK(std::abs(row["g"].get<double>() - w / 2) <= 0.01 + 1e-12);
  }
}

TEST_CASE("flags override file keys") {
  Scratch s;
  write_file(s.path("cfg.json"), kSmallStability);
  const auto r = invoke({"stability", "--config", s.path("cfg.json"), "--dg", "0.15", "--set",
                         "numerics.steps_per_period=500", "--output", s.path("o.csv")});
  REQUIRE(r.code == 0);
  const json summary = json::parse(slurp(s.path("o.json")));
  CHECK(summary["config"]["params"]["dg"] == 0.15);
  CHECK(summary["config"]["numerics"]["steps_per_period"] == 500);
  // A flag for a key the command does not read is an error.
  CHECK(invoke({"stability", "--config", s.path("cfg.json"), "--g", "0.1"}).code == kExitConfig);
}

TEST_CASE("critical lines on stdout") {
  const auto r = invoke({"critical-lines", "--omega", "0.5", "--omega0", "0.5", "--set",
                         "sweep={\"min\":0,\"max\":0.2,\"steps\":3}", "--set", "numerics.k_values=[0]"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("k,dg,branch,g\n0,0,0,0.25\n0,0.1,0,0.255\n0,0.2,0,0.27\n") != std::string::npos);
}

TEST_CASE("spectrum: undriven equivalence and schema") {
  Scratch s;
  const auto r = invoke({"spectrum", "--omega", "1", "--omega0", "1", "--set",
                         "sweep={\"min\":0.2,\"max\":0.6,\"steps\":5}", "--set", "numerics.n_atoms_values=[2]",
                         "--set", "numerics.n_max=12", "--output", s.path("sp.csv")});
  REQUIRE(r.code == 0);
  const json summary = json::parse(slurp(s.path("sp.json")));
  CHECK(summary["undriven_equivalence"]["pass"] == true);
  CHECK(slurp(s.path("sp.csv")).find("\nk,g,dg,N,n_max,e0,e1,e2,order_field,order_atom\n0,0.2,0,2,12,") !=
        std::string::npos);
}

TEST_CASE("section panels") {
  Scratch s;
  const auto r = invoke({"section", "--omega", "0.05", "--omega0", "0.05", "--g", "0.0975", "--set",
                         "panels=[0.5, 2.9]", "--set", "numerics.samples=41", "--output", s.path("f3.csv")});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(s.path("f3_panel1.csv")));
  CHECK(fs::exists(s.path("f3_panel2.csv")));
  CHECK_FALSE(fs::exists(s.path("f3.csv")));
  const json summary = json::parse(slurp(s.path("f3.json")));
  CHECK(summary["panels"][0]["kind"] == "superradiant");
  CHECK(summary["panels"][1]["global_at_origin"] == true);
  CHECK(invoke({"section", "--g", "0.1", "--set", "panels=[0.5]"}).code == kExitConfig);
}

TEST_CASE("verify without drive is exact") {
  Scratch s;
  const auto r = invoke({"verify", "--g", "0.01", "--dg", "0", "--set", "numerics.n_atoms=2", "--set",
                         "numerics.n_max=8", "--set", "numerics.n_slices=1000", "--set",
                         "numerics.average_slices=16", "--output", s.path("v.csv")});
  REQUIRE(r.code == 0);
  const json report = json::parse(slurp(s.path("v.json")));
  CHECK(report["average"]["pass"] == true);
  CHECK(report["crosscheck"]["pass"] == true);
  CHECK(report["crosscheck"]["min_fidelity"].get<double>() > 1.0 - 1e-9);
  CHECK(report["validity"]["within_window"] == true);
  CHECK(slurp(s.path("v.csv")).find("\nk,g,dg,N,n_max,quasienergy_index,quasienergy,fidelity\n") !=
        std::string::npos);
}

TEST_CASE("shipped configs parse") {
  const fs::path dir = fs::path(DICKE_SOURCE_DIR) / "configs";
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const json doc = load_config_file(entry.path().string());
    const auto cmd = parse_command(doc.at("subcommand").get<std::string>());
    REQUIRE(cmd.has_value());
    CHECK_NOTHROW(parse_config(doc, *cmd));
    ++n;
  }
  CHECK(n >= 4);
}
