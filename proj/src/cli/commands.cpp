#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "../csv.hpp"
#include "firmfacts/cli.hpp"
#include "firmfacts/errors.hpp"
#include "firmfacts/gof.hpp"
#include "firmfacts/random.hpp"
#include "firmfacts/synth.hpp"
#include "json.hpp"

namespace firmfacts::cli {
namespace {

using json = nlohmann::ordered_json;
using detail::fmt;

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out) / name).string();
}

void write_json(const std::string& path, const json& j) {
  auto f = detail::open_output(path);
  f << j.dump(2) << '\n';
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw ConfigError(std::string(flag) + " is required");
  if (!std::filesystem::is_regular_file(path)) throw ConfigError(std::string(flag) + ": file '" + path + "' not found");
}

Panel load(const RunConfig& cfg) {
  require_file(cfg.panel, "--panel");
  const DeflatorMode mode = parse_deflator_mode(cfg.deflator_mode);
  if (cfg.deflators.empty()) return load_panel(cfg.panel, nullptr, mode);
  require_file(cfg.deflators, "--deflators");
  const DeflatorSeries series = read_deflators(cfg.deflators);
  return load_panel(cfg.panel, &series, mode);
}

// Finite values of `v` on rows of the subset, with their row numbers.
VectorXd select(const Panel& p, const VectorXd& v, Subset s, std::vector<Index>* rows = nullptr) {
  std::vector<double> out;
  for (Index r = 0; r < p.rows(); ++r) {
    if (!p.in_subset(r, s) || !std::isfinite(v(r))) continue;
    out.push_back(v(r));
    if (rows) rows->push_back(r);
  }
  return Eigen::Map<const VectorXd>(out.data(), static_cast<Index>(out.size()));
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json moments_json(const Moments& m) {
  return {{"mean", num(m.mean)}, {"sd", num(m.sd)}, {"skewness", num(m.skewness)}, {"kurtosis", num(m.kurtosis)}};
}

json params_json(const ParamVector& p) {
  json j = json::object();
  const auto names = p.names();
  for (Index i = 0; i < p.size(); ++i) j[names[i]] = p[i];
  return j;
}

json comparison_json(const ModelComparison& mc) {
  json arr = json::array();
  for (const auto& e : mc.entries)
    arr.push_back({{"family", family_name(e.family)},
                   {"k", e.fit.params.size()},
                   {"loglik", num(e.fit.loglik)},
                   {"aic", num(e.aic)},
                   {"bic", num(e.bic)},
                   {"rl_aic", num(e.rl_aic)},
                   {"rl_bic", num(e.rl_bic)}});
  return arr;
}

json sign_split_json(const SignSplit& s) {
  return {{"share_positive", s.share_positive},
          {"share_negative", s.share_negative},
          {"n_positive", s.n_positive},
          {"n_negative", s.n_negative},
          {"positive_asinh", s.positive ? moments_json(*s.positive) : json(nullptr)},
          {"negative_asinh", s.negative ? moments_json(*s.negative) : json(nullptr)}};
}

json counts_json(const FilterCounts& c) {
  return {{"rows", c.all_rows},
          {"firms", c.all_firms},
          {"removed_missing_critical", c.missing_critical},
          {"removed_too_small", c.too_small},
          {"removed_restructuring", c.restructuring},
          {"good_rows", c.good_rows},
          {"good_firms", c.good_firms},
          {"nonbank_rows", c.nonbank_rows},
          {"nonbank_firms", c.nonbank_firms}};
}

std::string default_if_empty(const std::string& v, const char* fallback) { return v.empty() ? fallback : v; }

}  // namespace

std::vector<Family> parse_families(const std::string& list) {
  std::vector<Family> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = detail::trim(item);
    if (t.empty()) continue;
    const Family f = parse_family(t);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  if (out.empty()) throw ConfigError("--families: no family given");
  return out;
}

void cmd_ingest(const RunConfig& cfg, std::ostream& out) {
  const Panel p = load(cfg);
  const FilterCounts c = filter_counts(p);
  write_store_csv(out_path(cfg, "store.csv"), p);
  json j{{"schema_version", kSchemaVersion},
         {"deflated", !cfg.deflators.empty()},
         {"deflator_mode", cfg.deflators.empty() ? "none" : cfg.deflator_mode},
         {"first_year", p.rows() ? p.first_year() : 0},
         {"last_year", p.rows() ? p.last_year() : 0},
         {"counts", counts_json(c)}};
  write_json(out_path(cfg, "ingest.json"), j);
  out << "rows " << c.all_rows << ", firms " << c.all_firms << '\n'
      << "removed: missing critical items " << c.missing_critical << ", too small " << c.too_small
      << ", restructuring " << c.restructuring << '\n'
      << "good rows " << c.good_rows << ", firms " << c.good_firms << '\n'
      << "nonbank rows " << c.nonbank_rows << ", firms " << c.nonbank_firms << '\n';
}

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
  SynthConfig sc;
  sc.n_firms = cfg.firms;
  sc.n_years = cfg.years;
  sc.first_year = cfg.first_year;
  sc.gamma = cfg.gamma;
  sc.hazard = cfg.hazard;
  sc.drift = cfg.drift;
  sc.entry_rate = cfg.entry_rate;
  sc.seed = cfg.seed;
  const SynthPanel sp = generate_panel(sc);
  write_raw_csv(out_path(cfg, "panel.csv"), sp.rows);
  write_deflators(out_path(cfg, "deflators.csv"), sp.deflators);
  auto f = detail::open_output(out_path(cfg, "truth.json"));
  f << truth_json(planted_truth(sc));
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(panel_hash(sp.rows)));
  out << "rows " << sp.rows.size() << ", panel hash " << hash << '\n';
}

void cmd_fit_test(const RunConfig& cfg, std::ostream& out) {
  const Panel p = load(cfg);
  const Subset subset = parse_subset(cfg.subset);
  const auto families = parse_families(cfg.families);
  const VectorXd x = select(p, resolve_variable(p, cfg.var), subset);
  if (cfg.reps < 0 || (cfg.reps > 0 && cfg.reps < 200)) throw ConfigError("--reps must be 0 or at least 200");

  std::vector<FitResult> fits;
  json reports = json::array();
  for (std::size_t k = 0; k < families.size(); ++k) {
    const Family fam = families[k];
    FitResult fit = [&] {
      try {
        return fit_mle(fam, x);
      } catch (const Error& e) {
        throw FitError(std::string(family_name(fam)) + " fit failed: " + e.what());
      }
    }();
    if (!fit.converged) throw FitError(std::string(family_name(fam)) + " fit did not converge: " + fit.diagnostics);
    const GofReport g = gof_test(x, fit, {cfg.reps, stream_seed(cfg.seed, k), cfg.chi2_bins});
    auto pv = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    reports.push_back({{"family", family_name(fam)},
                       {"params", params_json(fit.params)},
                       {"loglik", num(fit.loglik)},
                       {"converged", fit.converged},
                       {"iterations", fit.iterations},
                       {"statistics", {{"ks", g.statistic_ks}, {"chi2", g.statistic_chi2}, {"ad", g.statistic_ad}}},
                       {"pvalues", {{"ks", pv(g.pvalue_ks)}, {"chi2", pv(g.pvalue_chi2)}, {"ad", pv(g.pvalue_ad)}}},
                       {"bootstrap_reps", g.bootstrap_reps},
                       {"failed_refits", g.failed_refits}});
    fits.push_back(std::move(fit));
  }
  const ModelComparison mc = compare_fits(fits);
  json j{{"schema_version", kSchemaVersion}, {"variable", cfg.var},   {"subset", subset_name(subset)},
         {"n", x.size()},                    {"seed", cfg.seed},     {"reps", cfg.reps},
         {"chi2_bins", cfg.chi2_bins},       {"families", reports},  {"comparison", comparison_json(mc)}};
  write_json(out_path(cfg, "fit_test.json"), j);

  // Histogram on the asinh axis with expected counts under each fit.
  {
    const double lo = asinh_scale(x.minCoeff()), hi = asinh_scale(x.maxCoeff());
    const int nb = std::max(cfg.bins, 1);
    const double w = (hi - lo) / nb;
    std::vector<Index> counts(nb, 0);
    for (Index i = 0; i < x.size(); ++i)
      ++counts[std::clamp(static_cast<int>((asinh_scale(x(i)) - lo) / (w > 0 ? w : 1.0)), 0, nb - 1)];
    auto f = detail::open_output(out_path(cfg, "histogram.csv"));
    f << "bin,asinh_low,asinh_high,count";
    for (const auto& fit : fits) f << ",expected_" << family_name(fit.params.family());
    f << '\n';
    for (int b = 0; b < nb; ++b) {
      const double a0 = lo + b * w, a1 = b + 1 == nb ? hi : lo + (b + 1) * w;
      f << b << ',' << fmt(a0) << ',' << fmt(a1) << ',' << counts[b];
      for (const auto& fit : fits) {
        const double e = x.size() * (cdf(fit.params, sinh_unscale(a1)) - cdf(fit.params, sinh_unscale(a0)));
        f << ',' << fmt(e);
      }
      f << '\n';
    }
  }
  // Q-Q pairs at the 99 percentiles.
  {
    const VectorXd sorted = sorted_copy(x);
    auto f = detail::open_output(out_path(cfg, "qq.csv"));
    f << "q,empirical";
    for (const auto& fit : fits) f << ",fitted_" << family_name(fit.params.family());
    f << '\n';
    for (int i = 1; i <= 99; ++i) {
      const double q = i / 100.0;
      f << fmt(q) << ',' << fmt(quantile_sorted(sorted, q));
      for (const auto& fit : fits) f << ',' << fmt(quantile(fit.params, q));
      f << '\n';
    }
  }

  out << cfg.var << " (" << subset_name(subset) << ", n=" << x.size() << ")\n";
  for (std::size_t k = 0; k < fits.size(); ++k) {
    const auto& e = mc.entries[k];
    const auto& r = reports[k];
    out << "  " << family_name(e.family) << ": " << e.fit.params.to_string() << "  KS=" << fmt(r["statistics"]["ks"].get<double>())
        << " AD=" << fmt(r["statistics"]["ad"].get<double>());
    if (cfg.reps > 0)
      out << " p(KS,C2,AD)=" << fmt(r["pvalues"]["ks"].get<double>()) << ',' << fmt(r["pvalues"]["chi2"].get<double>())
          << ',' << fmt(r["pvalues"]["ad"].get<double>());
    out << "  RL(AIC)=" << fmt(e.rl_aic) << " RL(BIC)=" << fmt(e.rl_bic) << '\n';
  }
}

void cmd_adjust(const RunConfig& cfg, std::ostream& out) {
  Panel p = load(cfg);
  const Subset subset = parse_subset(cfg.subset);
  if (cfg.adjust_mode != "time" && cfg.adjust_mode != "scale" && cfg.adjust_mode != "both")
    throw ConfigError("--mode must be time, scale or both");
  const VectorXd raw = resolve_variable(p, cfg.var);
  const std::string basis_name = default_if_empty(cfg.scale, "log.lag.KT");
  const bool do_time = cfg.adjust_mode != "scale";
  const bool do_scale = cfg.adjust_mode != "time";
  const VectorXd basis = do_scale ? resolve_variable(p, basis_name) : VectorXd();

  std::vector<Index> rows;
  for (Index r = 0; r < p.rows(); ++r)
    if (p.in_subset(r, subset) && std::isfinite(raw(r)) && (!do_scale || std::isfinite(basis(r)))) rows.push_back(r);
  if (rows.empty()) throw SampleSizeError("adjust: no observations of '" + cfg.var + "' in the subset");
  VectorXd x = raw(rows);
  GroupVector years = p.year(rows);

  json anchors{{"schema_version", kSchemaVersion}, {"variable", cfg.var}, {"mode", cfg.adjust_mode}};
  if (do_time) {
    const std::string& t = cfg.transform;
    if (t == "t1") x = t1_standardize(x, years);
    else if (t == "t2") x = t2_reflate(x, years);
    else if (t == "t3") x = t3_robust_reflate(x, years);
    else if (t == "t4") x = t4_size_domain(x, years);
    else if (t == "t5") x = t5_signed_adjust(x, years);
    else throw ConfigError("--transform must be one of t1, t2, t3, t4, t5");
    if (t == "t2" || t == "t3") {
      const GroupAnchors a = estimate_group_anchors(raw(rows), years, t == "t2" ? AnchorKind::MeanSd : AnchorKind::MedianIqr);
      json g = json::array();
      for (const auto& y : a.groups) g.push_back({{"year", y.year}, {"location", y.location}, {"dispersion", y.dispersion}});
      anchors["time"] = {{"transform", t}, {"target_location", a.target_location},
                         {"target_dispersion", a.target_dispersion}, {"years", g}};
    } else {
      anchors["time"] = {{"transform", t}};
    }
  }
  if (do_scale) {
    const VectorXd s = basis(rows);
    const ScaleAnchors a = estimate_scale_anchors(x, s, cfg.bins, cfg.trim);
    x = t7_scale_adjust(x, s, a);
    anchors["scale"] = {{"basis", basis_name}, {"b0_loc", a.b0_loc}, {"b1_loc", a.b1_loc},
                        {"b0_dis", a.b0_dis},  {"b1_dis", a.b1_dis}, {"median_scale", a.median_scale}};
  }
  VectorXd column = VectorXd::Constant(p.rows(), std::numeric_limits<double>::quiet_NaN());
  column(rows) = x;
  const std::string name = "adj." + cfg.var;
  p.set_column(name, column);
  write_store_csv(out_path(cfg, "store.csv"), p);
  write_json(out_path(cfg, "anchors.json"), anchors);
  out << "wrote column " << name << " for " << rows.size() << " rows\n";
}

void cmd_binscatter(const RunConfig& cfg, std::ostream& out) {
  const Panel p = load(cfg);
  const Subset subset = parse_subset(cfg.subset);
  const std::string scale_name = default_if_empty(cfg.scale, "log.lag.KT");
  const VectorXd v = resolve_variable(p, cfg.var), s = resolve_variable(p, scale_name);
  std::vector<Index> rows;
  for (Index r = 0; r < p.rows(); ++r)
    if (p.in_subset(r, subset) && std::isfinite(v(r)) && std::isfinite(s(r))) rows.push_back(r);
  const VectorXd x = v(rows), z = s(rows);
  const auto stats = binscatter(x, z, cfg.bins, cfg.trim);
  {
    auto f = detail::open_output(out_path(cfg, "binscatter.csv"));
    f << "bin,scale_low,scale_high,scale_median,count,p01,p10,p25,p50,p75,p90,p99,iqr,mean,skewness\n";
    for (const auto& b : stats) {
      f << b.bin_index << ',' << fmt(b.scale_low) << ',' << fmt(b.scale_high) << ',' << fmt(b.scale_median) << ','
        << b.count;
      for (double q : b.percentiles) f << ',' << fmt(q);
      f << ',' << fmt(b.iqr) << ',' << fmt(b.mean) << ',' << fmt(b.skewness) << '\n';
    }
  }
  json j{{"schema_version", kSchemaVersion}, {"variable", cfg.var}, {"scale", scale_name},
         {"subset", subset_name(subset)},    {"n", x.size()},       {"bins", cfg.bins},
         {"trim", cfg.trim}};
  try {
    const ScalingFit d = dispersion_scale_fit(stats);
    j["dispersion_fit"] = {{"slope", d.slope}, {"intercept", d.intercept}, {"se", d.se}, {"r2", d.r2}};
  } catch (const Error& e) {
    j["dispersion_fit"] = nullptr;
    j["dispersion_fit_error"] = e.what();
  }
  try {
    j["median_slope"] = quantile_slope(x, z, 0.5);
  } catch (const Error& e) {
    j["median_slope"] = nullptr;
  }
  write_json(out_path(cfg, "binscatter.json"), j);
  out << stats.size() << " bins over " << x.size() << " observations of " << cfg.var << " by " << scale_name << '\n';
}

void cmd_growth(const RunConfig& cfg, std::ostream& out) {
  const Panel p = load(cfg);
  const Subset subset = parse_subset(cfg.subset);
  const std::string var = default_if_empty(cfg.var, "dlog.SL");
  const VectorXd v = resolve_variable(p, var);
  std::vector<Index> rows;
  const VectorXd x = select(p, v, subset, &rows);
  if (x.size() < 2) throw SampleSizeError("growth: fewer than two observations of '" + var + "'");
  const auto years = per_year_stats(x, p.year(rows));
  {
    auto f = detail::open_output(out_path(cfg, "growth_by_year.csv"));
    f << "year,n,mean,sd,p10,p25,median,p75,p90,iqr\n";
    for (const auto& y : years)
      f << y.year << ',' << y.n << ',' << fmt(y.mean) << ',' << fmt(y.sd) << ',' << fmt(y.p10) << ',' << fmt(y.p25)
        << ',' << fmt(y.median) << ',' << fmt(y.p75) << ',' << fmt(y.p90) << ',' << fmt(y.iqr) << '\n';
  }
  const Moments m = sample_moments(x);
  json j{{"schema_version", kSchemaVersion}, {"variable", var}, {"subset", subset_name(subset)}, {"n", x.size()},
         {"moments", moments_json(m)},       {"median", median(x)}, {"iqr", iqr(x)}};
  try {
    j["autocorr"] = pooled_autocorr(p, var, subset);
  } catch (const Error&) {
    j["autocorr"] = nullptr;
  }

  if (!cfg.returns.empty() || !cfg.factors.empty()) {
    require_file(cfg.returns, "--returns");
    require_file(cfg.factors, "--factors");
    const auto returns = read_returns(cfg.returns);
    const FactorSeries factors = read_factors(cfg.factors);
    auto f = detail::open_output(out_path(cfg, "excess_returns.csv"));
    f << "firm_id,date,ret,excess,beta_mkt,beta_smb,beta_hml\n";
    Index skipped = 0;
    std::vector<double> excess;
    for (const auto& [firm, obs] : returns) {
      const RollingResult rr = rolling_beta_excess(obs, factors);
      skipped += rr.skipped;
      for (const auto& e : rr.rows) {
        f << detail::csv_escape(firm) << ',' << format_date(e.date) << ',' << fmt(e.ret) << ',' << fmt(e.excess) << ','
          << fmt(e.betas[0]) << ',' << fmt(e.betas[1]) << ',' << fmt(e.betas[2]) << '\n';
        excess.push_back(e.excess);
      }
    }
    json ex{{"rows", excess.size()}, {"skipped", skipped}};
    if (excess.size() >= 2)
      ex["moments"] = moments_json(sample_moments(Eigen::Map<const VectorXd>(excess.data(), static_cast<Index>(excess.size()))));
    j["excess_returns"] = ex;
  }
  write_json(out_path(cfg, "growth.json"), j);
  out << var << ": n=" << x.size() << " mean=" << fmt(m.mean) << " median=" << fmt(median(x)) << " over "
      << years.size() << " years\n";
}

void cmd_dynamism(const RunConfig& cfg, std::ostream& out) {
  const Panel p = load(cfg);
  const std::string var = default_if_empty(cfg.var, "log.KT");
  const DynamismStats d = dynamism_stats(p, resolve_variable(p, var), {cfg.bins, cfg.horizon});
  {
    auto f = detail::open_output(out_path(cfg, "dynamism_bins.csv"));
    f << "bin,scale_low,scale_high,scale_median,exit_at_risk,exit_prob,entry_candidates,entry_prob,forward_base,"
         "forward_survivors,fwd_p10,fwd_p25,fwd_p50,fwd_p75,fwd_p90\n";
    for (const auto& b : d.bins) {
      f << b.bin_index << ',' << fmt(b.scale_low) << ',' << fmt(b.scale_high) << ',' << fmt(b.scale_median) << ','
        << b.exit_at_risk << ',' << fmt(b.exit_prob) << ',' << b.entry_candidates << ',' << fmt(b.entry_prob) << ','
        << b.forward_base << ',' << b.forward_survivors;
      for (double q : b.forward) f << ',' << fmt(q);
      f << '\n';
    }
  }
  {
    auto f = detail::open_output(out_path(cfg, "dynamism_age.csv"));
    f << "age,firm_years,exit_at_risk,exit_prob,cohort_firms,cohort_median_scale\n";
    for (const auto& a : d.ages)
      f << a.age << ',' << a.firms << ',' << a.exit_at_risk << ',' << fmt(a.exit_prob) << ',' << a.cohort_firms << ','
        << fmt(a.cohort_median_scale) << '\n';
  }
  auto line = [](const LineFit& l) {
    return json{{"slope", num(l.slope)}, {"intercept", num(l.intercept)}, {"se", num(l.slope_se)}, {"r2", num(l.r2)}, {"points", l.n}};
  };
  json j{{"schema_version", kSchemaVersion},
         {"scale", var},
         {"first_year", p.first_year()},
         {"last_year", p.last_year()},
         {"horizon", d.horizon},
         {"pooled_exit_rate", num(d.pooled_exit_rate)},
         {"pooled_entry_rate", num(d.pooled_entry_rate)},
         {"max_age", d.max_age},
         {"cohort_firms", d.cohorts},
         {"log_count_by_age", line(d.log_count_by_age)},
         {"median_scale_by_age", line(d.median_scale_by_age)}};
  write_json(out_path(cfg, "dynamism.json"), j);
  out << "exit rate " << fmt(d.pooled_exit_rate) << ", entry rate " << fmt(d.pooled_entry_rate)
      << ", log-count slope " << fmt(d.log_count_by_age.slope) << ", median-scale slope "
      << fmt(d.median_scale_by_age.slope) << '\n';
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
  const Panel p = load(cfg);
  const Subset subset = parse_subset(cfg.subset);
  const VectorXd v = resolve_variable(p, cfg.var);
  const VectorXd x = select(p, v, subset);
  if (x.size() < 2) throw SampleSizeError("report: fewer than two observations of '" + cfg.var + "'");
  const std::string scale_name = default_if_empty(cfg.scale, "log.lag.KT");

  json var{{"name", cfg.var}, {"n", x.size()}, {"moments", moments_json(sample_moments(x))},
           {"median", median(x)}, {"iqr", iqr(x)}, {"sign_split", sign_split_json(sign_split_stats(x))}};
  try {
    var["autocorr"] = pooled_autocorr(p, cfg.var, subset);
  } catch (const Error&) {
    var["autocorr"] = nullptr;
  }
  try {
    const VectorXd s = resolve_variable(p, scale_name);
    std::vector<Index> rows;
    for (Index r = 0; r < p.rows(); ++r)
      if (p.in_subset(r, subset) && std::isfinite(v(r)) && std::isfinite(s(r))) rows.push_back(r);
    var["scale"] = scale_name;
    var["scaling_slope_median"] = quantile_slope(v(rows), s(rows), 0.5);
  } catch (const Error&) {
    var["scaling_slope_median"] = nullptr;
  }
  const ModelComparison mc = compare_models(x, parse_families(cfg.families));
  json fams = json::array();
  for (const auto& e : mc.entries) fams.push_back({{"family", family_name(e.family)}, {"params", params_json(e.fit.params)}});
  json j{{"schema_version", kSchemaVersion},
         {"subset", subset_name(subset)},
         {"panel", counts_json(filter_counts(p))},
         {"variable", var},
         {"fits", fams},
         {"comparison", comparison_json(mc)}};
  write_json(out_path(cfg, "report.json"), j);
  out << "report for " << cfg.var << " written (n=" << x.size() << ")\n";
}

}  // namespace firmfacts::cli
