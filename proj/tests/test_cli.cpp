#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "kaonbell/commands.hpp"

using namespace kaonbell;

namespace {

namespace fs = std::filesystem;

std::string csv(const Table& t) {
  std::ostringstream out;
  write_csv(t, out);
  return out.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("kaonbell_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string("\"") + KAONBELL_CLI_PATH + "\" " + args + " > \"" + stdout_file.string() +
                          "\" 2> \"" + stdout_file.string() + ".err\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# constants\n"
      "gamma_l = 0.002   # shorter K_L\n"
      "\n"
      "epsilon_re=1.635e-3\n"
      "epsilon_im = -2e-4\n"
      "restarts = 5\n"
      "seed = 42\n"
      "physical_units = true\n");
  const RunConfig c = parse_config(in);
  CHECK(c.physics.gamma_l == 0.002);
  CHECK(c.physics.epsilon == Complex(1.635e-3, -2e-4));
  CHECK(c.optimizer.restarts == 5);
  CHECK(c.optimizer.seed == 42);
  CHECK(c.physical_units);
  CHECK(c.physics.gamma_s == 1.0);
}

TEST_CASE("config errors") {
  std::istringstream unknown("gamma_s = 1\nlambda = 0.3\n");
  try {
    parse_config(unknown, "run.cfg");
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("run.cfg:2") != std::string::npos);
    CHECK(std::string(e.what()).find("lambda") != std::string::npos);
  }
  std::istringstream malformed("restarts = three\n");
  CHECK_THROWS_AS(parse_config(malformed), ConfigError);
  std::istringstream trailing("tolerance = 1e-8x\n");
  CHECK_THROWS_AS(parse_config(trailing), ConfigError);
  std::istringstream no_equals("restarts 3\n");
  CHECK_THROWS_AS(parse_config(no_equals), ConfigError);
  std::istringstream bad_bool("physical_units = maybe\n");
  CHECK_THROWS_AS(parse_config(bad_bool), ConfigError);

  RunConfig c;
  c.optimizer.restarts = 0;
  CHECK_THROWS_AS(validate_config(c), ConfigError);
  c = {};
  c.physics.gamma_l = 3.0;
  CHECK_THROWS_AS(validate_config(c), ConfigError);
  c = {};
  c.physics.epsilon = 0.5;
  CHECK_THROWS_AS(validate_config(c), ConfigError);
  CHECK_NOTHROW(validate_config(RunConfig{}));

  CHECK_THROWS_AS(load_config("/nonexistent/kaonbell.cfg"), IoError);
}

TEST_CASE("number formatting and writers") {
  CHECK(format_number(0.0719) == "7.19000000000e-02");
  CHECK(format_number(-2.0) == "-2.00000000000e+00");

  Table t{{"name", "x", "n", "ok"}, {}};
  t.add_row({std::string("a,b"), 1.5, 3LL, true});
  t.add_row({std::string("say \"hi\""), -0.25, -1LL, false});
  CHECK_THROWS_AS(t.add_row({1.0}), std::invalid_argument);
  CHECK(csv(t) ==
        "name,x,n,ok\n"
        "\"a,b\",1.50000000000e+00,3,true\n"
        "\"say \"\"hi\"\"\",-2.50000000000e-01,-1,false\n");

  std::ostringstream json;
  write_json(t, json);
  const std::string j = json.str();
  CHECK(j.find("\"name\": \"a,b\"") != std::string::npos);
  CHECK(j.find("\"n\": 3") != std::string::npos);
  CHECK(j.find("\"ok\": false") != std::string::npos);
  CHECK(j.find("\"name\"") < j.find("\"x\""));

  CHECK(parse_output_format("csv") == OutputFormat::csv);
  CHECK(parse_output_format("json") == OutputFormat::json);
  CHECK_THROWS(parse_output_format("xml"));
}

TEST_CASE("time grid") {
  const auto g = time_grid(1.0, 0.1);
  REQUIRE(g.size() == 11);
  CHECK(g.back() == doctest::Approx(1.0));
  CHECK(time_grid(0.0, 0.5).size() == 1);
  CHECK_THROWS_AS(time_grid(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(time_grid(-1.0, 0.1), ConfigError);
}

TEST_CASE("oscillation table") {
  const RunConfig config;
  const Table t = oscillation_table(config, 2.0, 0.5);
  CHECK(first_line(csv(t)) == "t,p_k0_k0,p_k0_k0bar,trace_rho_ss,trace_rho_ff");
  REQUIRE(t.rows.size() == 5);
  const auto value = [&](std::size_t r, std::size_t c) { return std::get<double>(t.rows[r][c]); };
  CHECK(value(0, 1) == 1.0);
  CHECK(value(0, 2) == 0.0);
  CHECK(value(0, 3) == doctest::Approx(1.0));
  CHECK(value(0, 4) == 0.0);
  const double oracle = 0.25 * (std::exp(-1.0) + std::exp(-1.0 / 600) -
                                2.0 * std::exp(-0.5 * (1.0 + 1.0 / 600)) * std::cos(0.474));
  CHECK(value(2, 0) == 1.0);
  CHECK(std::abs(value(2, 2) - oracle) < 1e-10);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CHECK(std::abs(value(r, 1) + value(r, 2) - value(r, 3)) < 1e-8);
    CHECK(std::abs(value(r, 3) + value(r, 4) - 1.0) < 1e-8);
  }
  CHECK_THROWS_AS(oscillation_table(config, 0.0, 0.1), ConfigError);

  RunConfig seconds;
  seconds.physical_units = true;
  const Table ts = oscillation_table(seconds, 1.0, 1.0);
  CHECK(ts.columns[0] == "t_seconds");
  CHECK(std::get<double>(ts.rows[1][0]) == doctest::Approx(kTauSSeconds));
}

TEST_CASE("scan table is reproducible") {
  RunConfig config;
  const std::string a = csv(scan_table(config, TimeMode::zeros_second, 0.4, 0.2, 1));
  const std::string b = csv(scan_table(config, TimeMode::zeros_second, 0.4, 0.2, 2));
  CHECK(a == b);
  CHECK(first_line(a) == "T,S_max,reduced_purity,converged");
  const Table t = scan_table(config, TimeMode::equal, 0.0, 0.1, 1);
  REQUIRE(t.rows.size() == 1);
  CHECK(std::abs(std::get<double>(t.rows[0][1]) - 2.0 * std::numbers::sqrt2) < 1e-4);
}

TEST_CASE("cp-check report") {
  CHECK_THROWS_AS(cp_check_report(std::nullopt, std::nullopt), ConfigError);
  CHECK_THROWS_AS(cp_check_report(1e-3, 1e-3), ConfigError);
  CHECK_THROWS_AS(cp_check_report(1.5, std::nullopt), ConfigError);

  const Table measured = cp_check_report(3.27e-3, std::nullopt);
  CHECK(first_line(csv(measured)) ==
        "delta,epsilon_re,violated,margin,verdict,measured_delta,measured_delta_error,measured_violated,"
        "ks_k1_indistinguishable");
  CHECK(std::get<double>(measured.rows[0][0]) == doctest::Approx(3.27e-3).epsilon(1e-12));
  CHECK(std::get<bool>(measured.rows[0][2]));
  CHECK(std::get<std::string>(measured.rows[0][4]) == "VIOLATED");

  const Table zero = cp_check_report(0.0, std::nullopt);
  CHECK_FALSE(std::get<bool>(zero.rows[0][2]));
  CHECK(std::get<std::string>(zero.rows[0][4]) == "not violated (boundary)");

  const Table negative = cp_check_report(std::nullopt, -1e-3);
  CHECK(std::get<double>(negative.rows[0][0]) < 0.0);
  CHECK_FALSE(std::get<bool>(negative.rows[0][2]));
  CHECK(std::get<std::string>(negative.rows[0][4]) == "not violated");
}

TEST_CASE("command-line tool") {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "stdout.txt";

  SUBCASE("oscillation to stdout and to a file") {
    CHECK(run_cli("oscillation --t-max 1 --step 0.5", out) == 0);
    const std::string text = slurp(out);
    CHECK(first_line(text) == "t,p_k0_k0,p_k0_k0bar,trace_rho_ss,trace_rho_ff");
    const fs::path file = dir / "osc.json";
    CHECK(run_cli("--format json --out \"" + file.string() + "\" oscillation --t-max 1 --step 0.5", out) == 0);
    CHECK(slurp(file).find("\"p_k0_k0bar\"") != std::string::npos);
    CHECK(run_cli("--out \"" + file.string() + "\" oscillation --t-max 1 --step 0.5", out) == 0);
    CHECK(slurp(file) == text);
  }
  SUBCASE("config file and seed") {
    const fs::path cfg = dir / "run.cfg";
    std::ofstream(cfg) << "restarts = 2\nphysical_units = true\n";
    CHECK(run_cli("--config \"" + cfg.string() + "\" --seed 7 scan --t-max 0.2 --step 0.2 --threads 1", out) == 0);
    CHECK(first_line(slurp(out)) == "T_seconds,S_max,reduced_purity,converged");
  }
  SUBCASE("cp-check") {
    CHECK(run_cli("cp-check --delta 3.27e-3", out) == 0);
    CHECK(slurp(out).find("VIOLATED") != std::string::npos);
    CHECK(slurp(out.string() + ".err").find("VIOLATED") != std::string::npos);
    CHECK(run_cli("cp-check --epsilon -1e-3", out) == 0);
    CHECK(slurp(out).find("not violated") != std::string::npos);
    CHECK(run_cli("cp-check", out) == 2);
    CHECK(run_cli("cp-check --delta 1e-3 --epsilon 1e-3", out) == 2);
  }
  SUBCASE("error exit codes") {
    CHECK(run_cli("", out) == 2);
    CHECK(run_cli("frobnicate", out) == 2);
    CHECK(run_cli("--format xml oscillation", out) == 2);
    CHECK(run_cli("scan --mode diagonal", out) == 2);
    CHECK(run_cli("oscillation --step 0", out) == 2);
    const fs::path bad = dir / "bad.cfg";
    std::ofstream(bad) << "gamma_s = 1\nunknown_key = 2\n";
    CHECK(run_cli("--config \"" + bad.string() + "\" oscillation", out) == 2);
    CHECK(slurp(out.string() + ".err").find("unknown_key") != std::string::npos);
    CHECK(run_cli("--config \"" + (dir / "missing.cfg").string() + "\" oscillation", out) == 4);
    CHECK(run_cli("--out /nonexistent/dir/x.csv oscillation --t-max 0.5", out) == 4);
  }
  fs::remove_all(dir);
}
