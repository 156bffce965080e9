#include "firmfacts/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "dists/families.hpp"
#include "firmfacts/errors.hpp"
#include "firmfacts/parallel.hpp"
#include "firmfacts/random.hpp"
#include "json.hpp"

namespace firmfacts {

void SynthConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("synth: ") + what);
  };
  require(n_firms >= 1, "n_firms must be positive");
  require(n_years >= 1, "n_years must be positive");
  require(first_year >= 1900 && last_year() <= 2100, "years must lie in [1900, 2100]");
  require(scale_omega > 0.0 && growth_sd > 0.0 && income_sigma_p > 0.0 && income_sigma_n > 0.0,
          "dispersion parameters must be positive");
  require(std::isfinite(scale_xi) && std::isfinite(scale_alpha) && std::isfinite(gamma) && std::isfinite(drift),
          "parameters must be finite");
  require(hazard >= 0.0 && hazard < 1.0, "hazard must lie in [0, 1)");
  require(std::abs(rho) <= 1.0, "|rho| must not exceed 1");
  require(entry_rate >= 0.0, "entry_rate must be nonnegative");
  require(financial_share >= 0.0 && utility_share >= 0.0 && financial_share + utility_share <= 1.0,
          "industry shares must lie in [0, 1]");
  require(acquisition_prob >= 0.0 && acquisition_prob <= 1.0, "acquisition_prob must lie in [0, 1]");
}

namespace {

struct FirmSeed {
  std::int64_t entry_year;
  bool entrant;
};

double nominal_factor(const SynthConfig& cfg, std::int64_t year) {
  return std::exp(cfg.nominal_growth * static_cast<double>(year - DeflatorSeries::kBaseYear));
}

double hazard_at(const SynthConfig& cfg, double s) {
  return std::clamp(cfg.hazard + cfg.hazard_slope * (s - cfg.scale_ref), 0.0, 0.99);
}

int draw_sic(const SynthConfig& cfg, Rng& rng) {
  const double u = uniform_open(rng);
  const auto pick = [&](int lo, int width) { return lo + static_cast<int>(uniform_open(rng) * width); };
  if (u < cfg.financial_share) return pick(6000, 1000);
  if (u < cfg.financial_share + cfg.utility_share) return pick(4900, 50);
  return uniform_open(rng) < 0.6 ? pick(2000, 2000) : pick(7000, 1000);
}

// One firm's history. The real scale path drives every item; nominal values
// are the real ones times the nominal GDP index.
std::vector<RawFirmYear> simulate_firm(const SynthConfig& cfg, std::size_t index, const FirmSeed& seed,
                                       double* initial_scale) {
  Rng rng = make_rng(cfg.seed, index);
  NormalSource normal;
  char id[32];
  std::snprintf(id, sizeof id, "F%07zu", index + 1);
  const int sic = draw_sic(cfg, rng);

  double s = detail::skew_normal::draw(cfg.scale_xi, cfg.scale_omega, cfg.scale_alpha, rng, normal);
  if (seed.entrant) s += cfg.entry_shift;
  if (initial_scale) *initial_scale = s;

  std::vector<RawFirmYear> rows;
  double at_prev = 0.0, lt_prev = 0.0, ppent_prev = 0.0;
  for (std::int64_t t = seed.entry_year; t <= cfg.last_year(); ++t) {
    const double nf = nominal_factor(cfg, t);
    const bool first = rows.empty();
    RawFirmYear r;
    r.firm_id = id;
    r.fiscal_year = t;
    r.sic = sic;

    const double at = std::exp(s) * nf;
    const double lt = 0.5 * at;
    const double ppent = 0.4 * at;
    const double dp = 0.05 * at;
    const double sales = at * std::exp(cfg.income_mu_p + cfg.income_sigma_p * normal(rng));
    const double expenses = at * std::exp(cfg.income_mu_n + cfg.income_sigma_n * normal(rng));
    const double cf = sales - expenses;
    const double mve = at * std::exp(0.2 + 0.5 * normal(rng));

    // Lags of a notional prior year for entrants keep the first row's flows sensible.
    const double at_l = first ? at * std::exp(-cfg.drift) : at_prev;
    const double lt_l = first ? 0.5 * at_l : lt_prev;
    const double ppent_l = first ? 0.4 * at_l : ppent_prev;
    const double xint = 0.05 * lt_l;
    const double it = at - at_l + dp;
    const double dd = xint + (lt_l - lt);
    const double de = cf - it - dd;
    const double ip = ppent - ppent_l + dp;

    r.mve = mve;
    r.lt = lt;
    r.at = at;
    r.ppent = ppent;
    r.dp = dp;
    r.xint = xint;
    r.sl = sales;
    r.dvt = de >= 0.0 ? 0.6 * de : 0.0;
    r.prstkc = de >= 0.0 ? 0.4 * de : 0.0;
    r.sstk = de >= 0.0 ? 0.0 : -de;
    r.cogs = 0.6 * expenses;
    r.xsga = 0.3 * expenses;
    r.txt = 0.1 * expenses;
    r.xrd = 0.1 * 0.3 * expenses;
    r.capx = ip >= 0.0 ? ip : 0.0;
    r.sppe = ip >= 0.0 ? 0.0 : -ip;
    r.aqc = (!first && uniform_open(rng) < cfg.acquisition_prob) ? 0.3 * at_prev : 0.0;
    rows.push_back(std::move(r));

    at_prev = at;
    lt_prev = lt;
    ppent_prev = ppent;
    if (t == cfg.last_year()) break;
    if (uniform_open(rng) < hazard_at(cfg, s)) break;
    const double sd = cfg.growth_sd * std::exp(cfg.gamma * (s - cfg.scale_ref));
    s += cfg.drift + (cfg.rho - 1.0) * (s - cfg.scale_xi) + sd * normal(rng);
  }
  return rows;
}

}  // namespace

SynthPanel generate_panel(const SynthConfig& cfg) {
  cfg.validate();
  std::vector<FirmSeed> firms;
  for (int i = 0; i < cfg.n_firms; ++i) firms.push_back({cfg.first_year, false});
  const auto entrants = static_cast<int>(std::lround(cfg.entry_rate * cfg.n_firms));
  for (std::int64_t t = cfg.first_year + 1; t <= cfg.last_year(); ++t)
    for (int k = 0; k < entrants; ++k) firms.push_back({t, true});

  std::vector<std::vector<RawFirmYear>> histories(firms.size());
  SynthPanel out;
  out.initial_scales.resize(cfg.n_firms);
  parallel_for(firms.size(), [&](std::size_t i) {
    histories[i] = simulate_firm(cfg, i, firms[i], i < static_cast<std::size_t>(cfg.n_firms) ? &out.initial_scales[i] : nullptr);
  });
  for (auto& h : histories)
    for (auto& r : h) out.rows.push_back(std::move(r));

  const std::int64_t lo = std::min<std::int64_t>(cfg.first_year, DeflatorSeries::kBaseYear);
  const std::int64_t hi = std::max<std::int64_t>(cfg.last_year(), DeflatorSeries::kBaseYear);
  for (std::int64_t t = lo; t <= hi; ++t) {
    const double dt = static_cast<double>(t - DeflatorSeries::kBaseYear);
    out.deflators.add(t, 100.0 * std::exp(cfg.nominal_growth * dt), 100.0 * std::exp(cfg.inflation * dt));
  }
  return out;
}

PlantedTruth planted_truth(const SynthConfig& cfg) {
  cfg.validate();
  const Moments m = moments(ParamVector::skew_normal(cfg.scale_xi, cfg.scale_omega, cfg.scale_alpha));
  return {cfg, m.mean, m.sd, std::log1p(-cfg.hazard)};
}

std::string truth_json(const PlantedTruth& t) {
  const SynthConfig& c = t.config;
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["seed"] = c.seed;
  j["n_firms"] = c.n_firms;
  j["n_years"] = c.n_years;
  j["first_year"] = c.first_year;
  j["scale"] = {{"family", "SkewNormal"}, {"xi", c.scale_xi}, {"omega", c.scale_omega}, {"alpha", c.scale_alpha},
                {"mean", t.scale_mean}, {"sd", t.scale_sd}};
  j["dynamics"] = {{"rho", c.rho},       {"drift", c.drift},         {"growth_sd", c.growth_sd},
                   {"gamma", c.gamma},   {"scale_ref", c.scale_ref}};
  j["income_intensity"] = {{"family", "DLN"},
                           {"mu_p", c.income_mu_p},
                           {"sigma_p", c.income_sigma_p},
                           {"mu_n", c.income_mu_n},
                           {"sigma_n", c.income_sigma_n}};
  j["hazard"] = c.hazard;
  j["hazard_slope"] = c.hazard_slope;
  j["log_survival"] = t.log_survival;
  j["entry_rate"] = c.entry_rate;
  j["entry_shift"] = c.entry_shift;
  j["nominal_growth"] = c.nominal_growth;
  j["inflation"] = c.inflation;
  j["financial_share"] = c.financial_share;
  j["utility_share"] = c.utility_share;
  j["acquisition_prob"] = c.acquisition_prob;
  return j.dump(2) + "\n";
}

std::uint64_t panel_hash(const std::vector<RawFirmYear>& rows) {
  std::ostringstream os;
  write_raw_csv(os, rows);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace firmfacts
