#include <filesystem>
#include <ostream>

#include "CLI11.hpp"
#include "firmfacts/cli.hpp"
#include "firmfacts/errors.hpp"

namespace firmfacts::cli {
namespace {

void add_data_options(CLI::App* c, RunConfig& cfg) {
  c->add_option("--panel", cfg.panel, "Raw panel CSV or store CSV")->required();
  c->add_option("--deflators", cfg.deflators, "Deflator CSV (year, nominal_gdp, gdp_deflator)");
  c->add_option("--deflator-mode", cfg.deflator_mode, "nominal (default) or real");
  c->add_option("--subset", cfg.subset, "all, good (default) or nonbank");
}

void add_out(CLI::App* c, RunConfig& cfg) { c->add_option("--out", cfg.out, "Output directory"); }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Firm-panel distribution facts: fitting, testing, adjustment and binscatters", "firmfacts"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "Validate a panel and write the constructed store");
  add_data_options(ingest, cfg);
  add_out(ingest, cfg);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic panel with planted parameters");
  synth->add_option("--firms", cfg.firms, "Initial firms");
  synth->add_option("--years", cfg.years, "Years");
  synth->add_option("--first-year", cfg.first_year, "First year");
  synth->add_option("--gamma", cfg.gamma, "Growth dispersion exponent");
  synth->add_option("--hazard", cfg.hazard, "Yearly exit hazard");
  synth->add_option("--drift", cfg.drift, "Yearly scale drift");
  synth->add_option("--entry-rate", cfg.entry_rate, "Entrants per year as a share of initial firms");
  synth->add_option("--seed", cfg.seed, "Seed");
  add_out(synth, cfg);

  auto* fit = app.add_subcommand("fit-test", "Fit families and run the goodness-of-fit battery");
  add_data_options(fit, cfg);
  fit->add_option("--var", cfg.var, "Variable")->required();
  fit->add_option("--families", cfg.families, "Comma-separated families");
  fit->add_option("--bins", cfg.bins, "Histogram bins");
  fit->add_option("--chi2-bins", cfg.chi2_bins, "Equiprobable bins of the chi-squared test");
  fit->add_option("--reps", cfg.reps, "Bootstrap replicates (0 skips p-values)");
  fit->add_option("--seed", cfg.seed, "Seed");
  add_out(fit, cfg);

  auto* adjust = app.add_subcommand("adjust", "Append a time- and/or scale-adjusted column to the store");
  add_data_options(adjust, cfg);
  adjust->add_option("--var", cfg.var, "Variable")->required();
  adjust->add_option("--mode", cfg.adjust_mode, "time, scale or both");
  adjust->add_option("--transform", cfg.transform, "Time transform: t1, t2, t3 (default), t4 or t5");
  adjust->add_option("--basis", cfg.scale, "Lagged scale basis for the scale adjustment (default log.lag.KT)");
  adjust->add_option("--bins", cfg.bins, "Bins of the dispersion regression");
  adjust->add_option("--trim", cfg.trim, "Trim share per side");
  add_out(adjust, cfg);

  auto* bins = app.add_subcommand("binscatter", "Binned percentiles of a variable by scale");
  add_data_options(bins, cfg);
  bins->add_option("--var", cfg.var, "Variable")->required();
  bins->add_option("--scale", cfg.scale, "Conditioning scale (default log.lag.KT)");
  bins->add_option("--bins", cfg.bins, "Bins");
  bins->add_option("--trim", cfg.trim, "Trim share per side");
  add_out(bins, cfg);

  auto* growth = app.add_subcommand("growth", "Per-year growth distribution and persistence");
  add_data_options(growth, cfg);
  growth->add_option("--var", cfg.var, "Growth variable (default dlog.SL)");
  growth->add_option("--factors", cfg.factors, "Factor CSV (date, mkt_rf, smb, hml, rf)");
  growth->add_option("--returns", cfg.returns, "Daily returns CSV (firm_id, date, ret)");
  add_out(growth, cfg);

  auto* dyn = app.add_subcommand("dynamism", "Exit, entry, age and forward-scale statistics");
  add_data_options(dyn, cfg);
  dyn->add_option("--var", cfg.var, "Scale variable (default log.KT)");
  dyn->add_option("--bins", cfg.bins, "Scale bins");
  dyn->add_option("--horizon", cfg.horizon, "Forward horizon in years");
  add_out(dyn, cfg);

  auto* report = app.add_subcommand("report", "Descriptive statistics and model comparison as one JSON");
  add_data_options(report, cfg);
  report->add_option("--var", cfg.var, "Variable")->required();
  report->add_option("--scale", cfg.scale, "Scale for the scaling slope (default log.lag.KT)");
  report->add_option("--families", cfg.families, "Comma-separated families");
  add_out(report, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[E_CONFIG]: " << e.what() << '\n';
    return 1;
  }

  try {
    auto* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    std::filesystem::create_directories(cfg.out);
    if (cfg.command == "ingest") cmd_ingest(cfg, out);
    else if (cfg.command == "synth") cmd_synth(cfg, out);
    else if (cfg.command == "fit-test") cmd_fit_test(cfg, out);
    else if (cfg.command == "adjust") cmd_adjust(cfg, out);
    else if (cfg.command == "binscatter") cmd_binscatter(cfg, out);
    else if (cfg.command == "growth") cmd_growth(cfg, out);
    else if (cfg.command == "dynamism") cmd_dynamism(cfg, out);
    else if (cfg.command == "report") cmd_report(cfg, out);
  } catch (const Error& e) {
    err << "error[" << e.code() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error[E_INTERNAL]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace firmfacts::cli
