#include <cstdio>
#include <exception>
#include <iostream>

#include "amagold/errors.hpp"
#include "amagold/experiment.hpp"

int main(int argc, char** argv) {
  try {
    const amagold::CliCommand cmd = amagold::parse_args(argc, argv);
    if (!cmd.help.empty()) {
      std::cout << cmd.help;
      return 0;
    }
    if (cmd.print_config) {
      std::cout << amagold::config_to_json(cmd.config);
      return 0;
    }
    const amagold::RunReport report = amagold::run_experiment(cmd.config);
    std::cout << amagold::serialize_run_report(report);
    if (!report.complete) {
      std::cerr << "amagold: run incomplete: " << report.error << '\n';
      return 1;
    }
    return 0;
  } catch (const amagold::UsageError& e) {
    std::cerr << "amagold: " << e.what() << "\nRun with --help for the list of flags.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "amagold: " << e.what() << '\n';
    return 1;
  }
}
