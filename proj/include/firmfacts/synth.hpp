#ifndef FIRMFACTS_SYNTH_HPP
#define FIRMFACTS_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "firmfacts/panel.hpp"

namespace firmfacts {

/// Planted parameters of a synthetic panel. Scale s is log real total assets.
///
/// Each surviving firm moves as
///   s' = s + drift + (rho - 1)(s - scale_xi) + growth_sd * exp(gamma (s - scale_ref)) * eps
/// so the growth IQR scales with size^gamma. Sales and expenses are
/// exp(s) times independent log-Normals, which makes CF / KT exactly
/// DLN(income_mu_p, income_sigma_p, income_mu_n, income_sigma_n).
struct SynthConfig {
  int n_firms = 5000;
  int n_years = 30;
  int first_year = 1990;

  double scale_xi = 6.5;
  double scale_omega = 2.1;
  double scale_alpha = 0.0;

  double rho = 1.0;
  double drift = 0.076;
  double growth_sd = 0.25;
  double gamma = -0.13;
  double scale_ref = 6.5;

  double income_mu_p = 1.0;
  double income_sigma_p = 0.6;
  double income_mu_n = 0.2;
  double income_sigma_n = 0.8;

  double hazard = 0.074;
  double hazard_slope = 0.0;  // per unit of scale around scale_ref
  double entry_rate = 0.074;
  double entry_shift = -0.5;

  double nominal_growth = 0.05;
  double inflation = 0.02;
  double financial_share = 0.15;
  double utility_share = 0.05;
  double acquisition_prob = 0.01;

  std::uint64_t seed = 1;

  void validate() const;
  int last_year() const { return first_year + n_years - 1; }
};

struct SynthPanel {
  std::vector<RawFirmYear> rows;  // sorted by (firm_id, year)
  DeflatorSeries deflators;
  std::vector<double> initial_scales;  // first-year cross-section of the initial firms
};

SynthPanel generate_panel(const SynthConfig& cfg);

struct PlantedTruth {
  SynthConfig config;
  double scale_mean = 0.0;  // of the initial skew-Normal cross-section
  double scale_sd = 0.0;
  double log_survival = 0.0;  // log(1 - hazard)
};

PlantedTruth planted_truth(const SynthConfig& cfg);
std::string truth_json(const PlantedTruth& truth);

/// FNV-1a over the raw CSV serialisation.
std::uint64_t panel_hash(const std::vector<RawFirmYear>& rows);

}  // namespace firmfacts

#endif  // FIRMFACTS_SYNTH_HPP
