#ifndef FIRMFACTS_CLI_HPP
#define FIRMFACTS_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "firmfacts/dists.hpp"
#include "firmfacts/panel.hpp"

namespace firmfacts::cli {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  std::string command;
  std::string panel, deflators, factors, returns;
  std::string deflator_mode = "nominal";
  std::string subset = "good";
  std::string var;
  std::string scale;  // conditioning scale for binscatter and dynamism, basis for adjust
  std::string families = "normal,skewnormal,laplace,stable,dln";
  std::string adjust_mode = "time";
  std::string transform = "t3";
  int bins = 49;
  int chi2_bins = 50;
  double trim = 0.01;
  int reps = 999;
  int horizon = 10;
  std::uint64_t seed = 0;
  std::string out = ".";

  // synth
  int firms = 5000;
  int years = 30;
  int first_year = 1990;
  double gamma = -0.13;
  double hazard = 0.074;
  double drift = 0.076;
  double entry_rate = 0.074;
};

/// Parses arguments and runs one command. Errors are reported on `err` as
/// "error[CODE]: message" and yield exit status 1.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

void cmd_ingest(const RunConfig& cfg, std::ostream& out);
void cmd_synth(const RunConfig& cfg, std::ostream& out);
void cmd_fit_test(const RunConfig& cfg, std::ostream& out);
void cmd_adjust(const RunConfig& cfg, std::ostream& out);
void cmd_binscatter(const RunConfig& cfg, std::ostream& out);
void cmd_growth(const RunConfig& cfg, std::ostream& out);
void cmd_dynamism(const RunConfig& cfg, std::ostream& out);
void cmd_report(const RunConfig& cfg, std::ostream& out);

std::vector<Family> parse_families(const std::string& list);

}  // namespace firmfacts::cli

#endif  // FIRMFACTS_CLI_HPP
