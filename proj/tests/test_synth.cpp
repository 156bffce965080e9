#include <cmath>

#include "doctest.h"
#include "firmfacts/errors.hpp"
#include "firmfacts/synth.hpp"
#include "json.hpp"

using namespace firmfacts;

namespace {

SynthConfig small_config() {
  SynthConfig c;
  c.n_firms = 400;
  c.n_years = 12;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("balanced panel without exit or entry") {
  SynthConfig c = small_config();
  c.hazard = 0;
  c.entry_rate = 0;
  const SynthPanel p = generate_panel(c);
  CHECK(p.rows.size() == static_cast<std::size_t>(c.n_firms * c.n_years));
}

TEST_CASE("determinism and truth") {
  const SynthConfig c = small_config();
  const auto a = generate_panel(c), b = generate_panel(c);
  CHECK(panel_hash(a.rows) == panel_hash(b.rows));
  SynthConfig d = c;
  d.seed = 6;
  CHECK(panel_hash(generate_panel(d).rows) != panel_hash(a.rows));

  const auto t = nlohmann::json::parse(truth_json(planted_truth(c)));
  const auto u = nlohmann::json::parse(truth_json(planted_truth(d)));
  CHECK(t["schema_version"] == 1);
  CHECK(t["n_firms"] == c.n_firms);
  CHECK(t["scale"]["omega"] == c.scale_omega);
  CHECK(t["dynamics"]["gamma"] == c.gamma);
  CHECK(t["hazard"] == c.hazard);
  CHECK(t["income_intensity"]["mu_p"] == c.income_mu_p);
  auto strip = [](nlohmann::json j) {
    j.erase("seed");
    return j;
  };
  CHECK(strip(t) == strip(u));
}

TEST_CASE("config validation") {
  SynthConfig c = small_config();
  c.hazard = 1.0;
  CHECK_THROWS_AS(generate_panel(c), ConfigError);
  c = small_config();
  c.scale_omega = 0;
  CHECK_THROWS_AS(generate_panel(c), ConfigError);
  c = small_config();
  c.rho = 1.2;
  CHECK_THROWS_AS(generate_panel(c), ConfigError);
}

TEST_CASE("generated panels satisfy the panel invariants") {
  SynthConfig c = small_config();
  const SynthPanel sp = generate_panel(c);
  const Panel p = build_panel(sp.rows, &sp.deflators, DeflatorMode::NominalGDP);
  const VectorXd &sl = p.column("SL"), &xs = p.column("XS"), &di = p.column("DI"), &it = p.column("IT");
  Index complete = 0;
  for (Index r = 0; r < p.rows(); ++r) {
    if (!std::isfinite(xs(r)) || !std::isfinite(di(r)) || !std::isfinite(it(r))) continue;
    ++complete;
    CHECK(std::abs((sl(r) - xs(r)) - (di(r) + it(r))) <= 1e-6 * std::max(std::abs(sl(r)), 1.0));
    if (p.in_subset(r, Subset::NonBank)) CHECK(p.in_subset(r, Subset::Good));
  }
  CHECK(complete > p.rows() / 2);
  const VectorXd &kt = p.column("KT"), &kp = p.column("KP");
  for (Index r = 0; r < p.rows(); ++r) CHECK(kt(r) >= kp(r));
}

TEST_CASE("initial scales follow the planted skew-normal") {
  SynthConfig c;
  c.n_firms = 100'000;
  c.n_years = 1;
  c.scale_alpha = 2.0;
  const SynthPanel sp = generate_panel(c);
  const PlantedTruth t = planted_truth(c);
  const Moments m = sample_moments(Eigen::Map<const VectorXd>(sp.initial_scales.data(), sp.initial_scales.size()));
  const double n = static_cast<double>(c.n_firms);
  CHECK(std::abs(m.mean - t.scale_mean) < 3 * t.scale_sd / std::sqrt(n));
  // se of the sd is about sd * sqrt((kurtosis - 1) / (4 n))
  CHECK(std::abs(m.sd - t.scale_sd) < 3 * t.scale_sd * std::sqrt((m.kurtosis - 1) / (4 * n)));
}

TEST_CASE("homoskedastic growth gives a flat dispersion slope") {
  SynthConfig c;
  c.gamma = 0.0;
  c.seed = 8;
  const SynthPanel sp = generate_panel(c);
  const Panel p = build_panel(sp.rows, &sp.deflators, DeflatorMode::NominalGDP);
  const VectorXd g = resolve_variable(p, "dlog.KT"), s = resolve_variable(p, "log.lag.KT");
  std::vector<Index> rows;
  for (Index r = 0; r < p.rows(); ++r)
    if (std::isfinite(g(r)) && std::isfinite(s(r))) rows.push_back(r);
  const ScalingFit f = dispersion_scale_fit(binscatter(g(rows), s(rows)));
  CHECK(std::abs(f.slope) < 0.02);
}

TEST_CASE("end-to-end recovery at desk scale") {
  SynthConfig c;  // 5000 firms, 30 years, omega 2.1, gamma -0.13, hazard 0.074
  c.seed = 3;
  const SynthPanel sp = generate_panel(c);
  const Panel p = build_panel(sp.rows, &sp.deflators, DeflatorMode::NominalGDP);

  std::vector<Index> first;
  for (Index r = 0; r < p.rows(); ++r)
    if (p.year(r) == c.first_year) first.push_back(r);
  const VectorXd s0 = resolve_variable(p, "log.KT")(first);
  CHECK(std::abs(sample_moments(s0).sd - planted_truth(c).scale_sd) < 0.1);

  const VectorXd g = resolve_variable(p, "dlog.KT"), s = resolve_variable(p, "log.lag.KT");
  std::vector<Index> rows;
  for (Index r = 0; r < p.rows(); ++r)
    if (std::isfinite(g(r)) && std::isfinite(s(r))) rows.push_back(r);
  CHECK(std::abs(dispersion_scale_fit(binscatter(g(rows), s(rows))).slope - c.gamma) < 0.02);

  const DynamismStats d = dynamism_stats(p, resolve_variable(p, "log.KT"));
  CHECK(std::abs(d.pooled_exit_rate - c.hazard) < 0.01);
}
