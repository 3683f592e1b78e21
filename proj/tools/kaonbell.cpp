// kaonbell: neutral-kaon Bell-inequality experiments from the command line.
//
//   kaonbell oscillation --t-max 10 --step 0.1
//   kaonbell scan --mode zeros_second --t-max 2 --step 0.1 --out scan.csv
//   kaonbell strangeness-opt --format json
//   kaonbell cp-check --delta 3.27e-3

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "kaonbell/commands.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericalError = 3,
  kIoError = 4,
};

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "csv";
};

kaonbell::RunConfig resolve_config(const GlobalOptions& options) {
  kaonbell::RunConfig config = options.config_path.empty() ? kaonbell::RunConfig{}
                                                           : kaonbell::load_config(options.config_path);
  if (options.seed) config.optimizer.seed = *options.seed;
  kaonbell::validate_config(config);
  return config;
}

void emit(const kaonbell::Table& table, const GlobalOptions& options) {
  const auto format = kaonbell::parse_output_format(options.format);
  if (options.out_path.empty()) {
    kaonbell::write_table(table, format, std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(options.out_path);
  if (!out) throw kaonbell::IoError("cannot open output file " + options.out_path);
  kaonbell::write_table(table, format, out);
  out.flush();
  if (!out) throw kaonbell::IoError("failed writing " + options.out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neutral-kaon Bell inequalities: open-system dynamics and CHSH optimization"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions options;
  app.add_option("--config", options.config_path, "Flat key = value configuration file");
  app.add_option("--seed", options.seed, "Master seed for the optimizer");
  app.add_option("--out", options.out_path, "Output file (default: stdout)");
  app.add_option("--format", options.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  double osc_t_max = 10.0, osc_step = 0.1;
  auto* oscillation = app.add_subcommand("oscillation", "K0 -> K0 / K0bar probabilities and sector traces");
  oscillation->add_option("--t-max", osc_t_max, "Last time, in tau_S");
  oscillation->add_option("--step", osc_step, "Grid spacing, in tau_S");

  std::string scan_mode = "equal";
  double scan_t_max = 2.0, scan_step = 0.1;
  unsigned scan_threads = 0;
  auto* scan = app.add_subcommand("scan", "Maximal CHSH value over quasi-spins and states along a time grid");
  scan->add_option("--mode", scan_mode, "Time pattern")
      ->check(CLI::IsMember({"equal", "zeros_first", "zeros_second"}));
  scan->add_option("--t-max", scan_t_max, "Largest T, in tau_S");
  scan->add_option("--step", scan_step, "Grid spacing, in tau_S");
  scan->add_option("--threads", scan_threads, "Worker threads (0: all cores)");

  auto* strangeness = app.add_subcommand("strangeness-opt", "Optimize the strangeness CHSH over times and state");

  std::optional<double> cp_delta, cp_epsilon;
  auto* cp = app.add_subcommand("cp-check", "Test the CP Bell inequality delta <= 0");
  auto* delta_opt = cp->add_option("--delta", cp_delta, "Leptonic asymmetry delta");
  auto* eps_opt = cp->add_option("--epsilon", cp_epsilon, "Real CP parameter epsilon");
  delta_opt->excludes(eps_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    const kaonbell::RunConfig config = resolve_config(options);
    if (oscillation->parsed()) {
      emit(kaonbell::oscillation_table(config, osc_t_max, osc_step), options);
    } else if (scan->parsed()) {
      const auto mode = kaonbell::parse_time_mode(scan_mode);
      emit(kaonbell::scan_table(config, mode, scan_t_max, scan_step, scan_threads), options);
    } else if (strangeness->parsed()) {
      const auto table = kaonbell::strangeness_report(config);
      std::fprintf(stderr, "strangeness CHSH: best %.6f (singlet %.6f), reduced purity %.6f\n",
                   std::get<double>(table.rows[0][0]), std::get<double>(table.rows[0].back()),
                   std::get<double>(table.rows[0][13]));
      emit(table, options);
    } else if (cp->parsed()) {
      const auto table = kaonbell::cp_check_report(cp_delta, cp_epsilon);
      const bool violated = std::get<bool>(table.rows[0][2]);
      std::fprintf(stderr, "%s, margin %+.2e\n", violated ? "VIOLATED" : "not violated",
                   std::get<double>(table.rows[0][3]));
      emit(table, options);
    }
  } catch (const kaonbell::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const kaonbell::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return kOk;
}
