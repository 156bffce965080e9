#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "firmfacts/dists.hpp"
#include "firmfacts/errors.hpp"
#include "firmfacts/panel.hpp"

using namespace firmfacts;

namespace {

RawFirmYear firm_year(const std::string& id, std::int64_t year, double at, std::optional<int> sic = 3000) {
  RawFirmYear r;
  r.firm_id = id;
  r.fiscal_year = year;
  r.sic = sic;
  r.mve = 2.0 * at;
  r.lt = 0.5 * at;
  r.at = at;
  r.ppent = 0.4 * at;
  r.dp = 0.05 * at;
  r.xint = 0.02 * at;
  r.sl = 1.5 * at;
  r.dvt = 0.03 * at;
  r.prstkc = 0.01 * at;
  r.sstk = 0.005 * at;
  r.cogs = 0.8 * at;
  r.xsga = 0.3 * at;
  r.txt = 0.1 * at;
  r.xrd = 0.05 * at;
  r.capx = 0.09 * at;
  r.sppe = 0.01 * at;
  r.aqc = 0.0;
  return r;
}

std::vector<RawFirmYear> history(const std::string& id, std::int64_t y0, int n, double at0, double growth = 0.05) {
  std::vector<RawFirmYear> out;
  for (int t = 0; t < n; ++t) out.push_back(firm_year(id, y0 + t, at0 * std::exp(growth * t)));
  return out;
}

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "firmfacts_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

void write_text(const std::string& path, const std::string& s) { std::ofstream(path, std::ios::binary) << s; }

}  // namespace

TEST_CASE("construct_variables examples") {
  RawFirmYear prev = firm_year("A", 2000, 88.0), cur = firm_year("A", 2001, 100.0);
  cur.sl = 100;
  cur.dvt = 10;
  cur.prstkc = 0;
  cur.sstk = 0;
  cur.xint = 0;
  cur.lt = prev.lt;
  cur.dp = 8;
  FirmYear f = construct_variables(cur, &prev);
  CHECK(*f.DI == doctest::Approx(10));
  CHECK(*f.IT == doctest::Approx(20));
  CHECK(*f.CF == doctest::Approx(30));
  CHECK(*f.XS == doctest::Approx(70));

  prev.lt = 50;
  cur.lt = 40;
  cur.xint = 5;
  CHECK(*construct_variables(cur, &prev).DD == doctest::Approx(15));

  prev.at = 90;
  cur.at = 100;
  CHECK(*construct_variables(cur, &prev).IT == doctest::Approx(18));

  const FirmYear first = construct_variables(cur, nullptr);
  CHECK_FALSE(first.DD.has_value());
  CHECK_FALSE(first.IT.has_value());
  CHECK_FALSE(first.IP.has_value());
  CHECK(first.VL.has_value());
  CHECK(*first.IA == doctest::Approx(*cur.capx - *cur.sppe));

  cur.xsga.reset();
  const FirmYear miss = construct_variables(cur, &prev);
  CHECK_FALSE(miss.XA.has_value());
  CHECK_FALSE(miss.CA.has_value());
  CHECK(miss.CF.has_value());
}

TEST_CASE("accounting identity on a random panel") {
  std::mt19937_64 g(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    RawFirmYear prev = firm_year("A", 2000, 1 + 1000 * u(g)), cur = firm_year("A", 2001, 1 + 1000 * u(g));
    for (auto name : kRawItems) cur.*raw_member(name) = 1e4 * u(g) * u(g);
    for (auto name : kRawItems) prev.*raw_member(name) = 1e4 * u(g) * u(g);
    const FirmYear f = construct_variables(cur, &prev);
    CHECK(std::abs((*f.SL - *f.XS) - (*f.DI + *f.IT)) <= 1e-6 * std::max(std::abs(*f.SL), 1.0));
  }
}

TEST_CASE("deflators") {
  DeflatorSeries s;
  s.add(2010, 50.0, 80.0);
  s.add(2019, 100.0, 100.0);
  CHECK(apply_deflator(7.0, 2019, DeflatorMode::RealGDP, s) == 7.0);
  CHECK(apply_deflator(7.0, 2019, DeflatorMode::NominalGDP, s) == 7.0);
  CHECK(apply_deflator(8.0, 2010, DeflatorMode::RealGDP, s) == doctest::Approx(10.0));
  CHECK(apply_deflator(8.0, 2010, DeflatorMode::NominalGDP, s) == doctest::Approx(16.0));
  CHECK_THROWS_AS(apply_deflator(1.0, 2011, DeflatorMode::RealGDP, s), CoverageError);
  CHECK_THROWS_AS(s.add(2012, -1.0, 1.0), DomainError);

  // nominal GDP = price level * real GDP, with 2% inflation and 3% real growth
  DeflatorSeries t;
  for (int y = 2000; y <= 2019; ++y) {
    const double p = std::pow(1.02, y - 2019), r = std::pow(1.03, y - 2019);
    t.add(y, 100 * p * r, 100 * p);
  }
  for (int y = 2000; y <= 2019; ++y)
    CHECK(apply_deflator(1.0, y, DeflatorMode::NominalGDP, t) ==
          doctest::Approx(apply_deflator(1.0, y, DeflatorMode::RealGDP, t) * std::pow(1.03, 2019 - y)));
  CHECK(parse_deflator_mode("real") == DeflatorMode::RealGDP);
  CHECK_THROWS_AS(parse_deflator_mode("cpi"), ConfigError);
}

TEST_CASE("filters") {
  std::vector<RawFirmYear> raws;
  auto a = history("A", 2000, 3, 100.0);
  auto small = history("B", 2000, 3, 100.0);
  auto bank = history("C", 2000, 3, 100.0);
  auto merger = history("D", 2000, 3, 100.0);
  for (auto& r : small) r.lt = 0.2, r.mve = 0.3;  // VL = 0.5
  for (auto& r : bank) r.sic = 6020;
  merger[2].aqc = 0.25 * *merger[2].at;
  for (auto* h : {&a, &small, &bank, &merger}) raws.insert(raws.end(), h->begin(), h->end());
  const Panel p = build_panel(raws);

  auto row = [&](const std::string& id, std::int64_t y) {
    for (Index r = 0; r < p.rows(); ++r)
      if (p.firm[r] == id && p.year(r) == y) return r;
    return Index{-1};
  };
  CHECK(p.in_subset(row("A", 2001), Subset::Good));
  CHECK_FALSE(p.in_subset(row("A", 2000), Subset::Good));  // lagged at is a critical item
  CHECK_FALSE(p.in_subset(row("B", 2001), Subset::Good));
  CHECK(p.in_subset(row("C", 2001), Subset::Good));
  CHECK_FALSE(p.in_subset(row("C", 2001), Subset::NonBank));
  CHECK(p.in_subset(row("D", 2001), Subset::Good));
  CHECK_FALSE(p.in_subset(row("D", 2002), Subset::Good));

  const FilterCounts c = filter_counts(p);
  CHECK(c.all_rows == 12);
  CHECK(c.all_firms == 4);
  CHECK(c.missing_critical == 4);
  CHECK(c.too_small == 2);
  CHECK(c.restructuring == 1);
  CHECK(c.good_rows == 12 - 4 - 2 - 1);
  CHECK(c.nonbank_rows == c.good_rows - 2);
  for (Index r = 0; r < p.rows(); ++r) {
    if (p.in_subset(r, Subset::NonBank)) CHECK(p.in_subset(r, Subset::Good));
    if (p.in_subset(r, Subset::Good)) CHECK(p.in_subset(r, Subset::All));
  }
  CHECK(is_financial_or_utility(4900));
  CHECK(is_financial_or_utility(4949));
  CHECK_FALSE(is_financial_or_utility(4950));
  CHECK(is_financial_or_utility(6999));
  CHECK_FALSE(is_financial_or_utility(7000));
}

TEST_CASE("build_panel links lags and deflates") {
  auto raws = history("A", 2017, 3, 100.0);
  raws.push_back(firm_year("B", 2019, 10.0));
  std::reverse(raws.begin(), raws.end());
  DeflatorSeries s;
  s.add(2017, 90, 95);
  s.add(2018, 95, 97);
  s.add(2019, 100, 100);
  const Panel p = build_panel(raws, &s, DeflatorMode::NominalGDP);
  REQUIRE(p.rows() == 4);
  CHECK(p.firm[0] == "A");
  CHECK(p.year(0) == 2017);
  CHECK(p.prev[0] == -1);
  CHECK(p.prev[1] == 0);
  CHECK(p.prev[3] == -1);
  CHECK(p.column("at")(0) == doctest::Approx(100.0));
  CHECK(p.column("KT")(0) == doctest::Approx(100.0 * 100 / 90));
  CHECK(std::isnan(p.column("DD")(0)));

  auto dup = raws;
  dup.push_back(firm_year("B", 2019, 11.0));
  CHECK_THROWS_AS(build_panel(dup), SchemaError);
  DeflatorSeries partial;
  partial.add(2019, 100, 100);
  CHECK_THROWS_AS(build_panel(raws, &partial), CoverageError);
}

TEST_CASE("resolve_variable") {
  auto raws = history("A", 2000, 4, 100.0, 0.1);
  const Panel p = build_panel(raws);
  const VectorXd ct = resolve_variable(p, "intensity.CF.KT");
  CHECK(ct(2) == doctest::Approx(p.column("CF")(2) / p.column("KT")(2)));
  const VectorXd g = resolve_variable(p, "dlog.SL");
  CHECK(std::isnan(g(0)));
  CHECK(g(1) == doctest::Approx(0.1));
  CHECK(resolve_variable(p, "log.KT")(3) == doctest::Approx(std::log(100.0) + 0.3));
  CHECK(resolve_variable(p, "lag.KT")(1) == doctest::Approx(100.0));
  CHECK(resolve_variable(p, "asinh.CF")(2) == doctest::Approx(std::asinh(p.column("CF")(2))));
  CHECK_THROWS_AS(resolve_variable(p, "nope"), ConfigError);
  CHECK_THROWS_AS(resolve_variable(p, "intensity.CF.NOPE"), ConfigError);
}

TEST_CASE("binscatter") {
  std::mt19937_64 g(1);
  std::normal_distribution<double> z;
  VectorXd s(5000), v(5000);
  for (Index i = 0; i < 5000; ++i) {
    s(i) = 5 + 2 * z(g);
    v(i) = z(g);
  }
  const auto b = binscatter(v, s, 49, 0.01);
  REQUIRE(b.size() == 49);
  Index total = 0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    CHECK(b[k].count == 100);
    total += b[k].count;
    if (k) CHECK(b[k].scale_low >= b[k - 1].scale_high);
  }
  CHECK(total == 4900);

  const auto uneven = binscatter(v.head(4999), s.head(4999), 7, 0.0);
  Index lo = 1 << 30, hi = 0;
  for (const auto& x : uneven) lo = std::min(lo, x.count), hi = std::max(hi, x.count);
  CHECK(hi - lo <= 1);

  for (const auto& x : binscatter(VectorXd::Constant(5000, 3.0), s, 49, 0.01)) {
    CHECK(x.iqr == 0.0);
    CHECK(x.percentiles.front() == x.percentiles.back());
  }
  const auto id = binscatter(s, s, 49, 0.01);
  for (std::size_t k = 1; k < id.size(); ++k) CHECK(id[k].median() > id[k - 1].median());
  CHECK_THROWS_AS(binscatter(v.head(10), s.head(10), 49, 0.01), SampleSizeError);
}

TEST_CASE("dispersion_scale_fit") {
  std::vector<BinnedStats> bins(20);
  for (int k = 0; k < 20; ++k) {
    bins[k].bin_index = k;
    bins[k].scale_median = 1 + 0.5 * k;
    bins[k].iqr = 0.7 * std::exp(-0.13 * bins[k].scale_median);
  }
  ScalingFit f = dispersion_scale_fit(bins);
  CHECK(f.slope == doctest::Approx(-0.13));
  CHECK(f.r2 == doctest::Approx(1.0));
  for (auto& b : bins) b.iqr = 0.4;
  CHECK(std::abs(dispersion_scale_fit(bins).slope) < 1e-12);
  bins[3].iqr = 0.0;
  CHECK_THROWS_AS(dispersion_scale_fit(bins), DegenerateGroupError);
  bins.resize(9);
  bins[3].iqr = 0.4;
  CHECK_THROWS_AS(dispersion_scale_fit(bins), SampleSizeError);
}

TEST_CASE("quantile regression") {
  std::mt19937_64 g(2);
  std::normal_distribution<double> z;
  VectorXd x(10'000), line(10'000), noisy(10'000), indep(10'000);
  for (Index i = 0; i < x.size(); ++i) {
    x(i) = 3 * z(g);
    line(i) = 2 * x(i);
    noisy(i) = x(i) + std::pow(z(g), 3);
    indep(i) = z(g) + 0.2 * z(g) * z(g);
  }
  for (double tau : {0.1, 0.5, 0.9}) CHECK(quantile_slope(line, x, tau) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(quantile_slope(noisy, x, 0.5) - 1.0) < 0.05);
  CHECK(std::abs(quantile_slope(indep, x, 0.5)) < 0.05);

  // check-loss optimality: no small move of either coefficient helps
  for (double tau : {0.25, 0.5, 0.8}) {
    const QuantileFit f = quantile_regression(noisy, x, tau);
    const double l = check_loss(noisy, x, f.intercept, f.slope, tau);
    for (double d : {1e-3, 1e-5}) {
      CHECK(l <= check_loss(noisy, x, f.intercept + d, f.slope, tau) + 1e-9);
      CHECK(l <= check_loss(noisy, x, f.intercept - d, f.slope, tau) + 1e-9);
      CHECK(l <= check_loss(noisy, x, f.intercept, f.slope + d, tau) + 1e-9);
      CHECK(l <= check_loss(noisy, x, f.intercept, f.slope - d, tau) + 1e-9);
    }
  }
  CHECK_THROWS_AS(quantile_regression(line, x, 1.0), DomainError);
}

TEST_CASE("sign split") {
  VectorXd pos = VectorXd::LinSpaced(100, 1, 50);
  SignSplit s = sign_split_stats(pos);
  CHECK_FALSE(s.negative.has_value());
  CHECK(s.share_positive == 1.0);

  VectorXd sym(201);
  sym << pos, -pos, 0.0;
  s = sign_split_stats(sym);
  CHECK(s.positive->mean == doctest::Approx(-s.negative->mean));
  CHECK(s.share_positive + s.share_negative < 1.0);

  const VectorXd d = sample(ParamVector::dln(5, 2, 3.6, 1.9), 100'000, 3);
  std::mt19937_64 g(4);
  std::lognormal_distribution<double> yp(5, 2), yn(3.6, 1.9);
  Index mc = 0;
  for (int i = 0; i < 1'000'000; ++i) mc += yp(g) > yn(g);
  CHECK(std::abs(sign_split_stats(d).share_positive - mc / 1e6) < 0.02);
}

TEST_CASE("pooled autocorrelation") {
  std::mt19937_64 g(5);
  std::normal_distribution<double> z;
  const int firms = 1000, years = 11;
  VectorXd c(firms * years), iid(firms * years), ar(firms * years);
  std::vector<Index> prev(firms * years);
  for (int f = 0; f < firms; ++f) {
    const double level = z(g);
    double a = z(g) / std::sqrt(1 - 0.81);
    for (int t = 0; t < years; ++t) {
      const Index r = f * years + t;
      prev[r] = t ? r - 1 : -1;
      c(r) = level;
      iid(r) = z(g);
      a = t ? 0.9 * a + z(g) : a;
      ar(r) = a;
    }
  }
  CHECK(pooled_autocorr(c, prev) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(pooled_autocorr(iid, prev)) < 0.03);
  CHECK(std::abs(pooled_autocorr(ar, prev) - 0.9) < 0.03);
  CHECK_THROWS_AS(pooled_autocorr(c.head(55), std::vector<Index>(prev.begin(), prev.begin() + 55)), SampleSizeError);
}

TEST_CASE("price jitter") {
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const double a = jitter_price(3.4375, 1.0 / 16, seed);
    CHECK(a >= 3.40625);
    CHECK(a <= 3.46875);
    const double b = jitter_price(3.44, 0.01, seed);
    CHECK(b >= 3.435);
    CHECK(b <= 3.445);
  }
  CHECK(jitter_price(3.44, 0.01, 7) == jitter_price(3.44, 0.01, 7));
  const VectorXd j = jitter_prices(VectorXd::Constant(100'000, 10.0), 0.1, 3);
  CHECK(std::abs(j.mean() - 10.0) < 3 * 0.1 / std::sqrt(12.0 * 1e5));
  CHECK_THROWS_AS(jitter_price(0.01, 0.01, 1), DomainError);
}

TEST_CASE("rolling betas") {
  std::mt19937_64 g(6);
  std::normal_distribution<double> z;
  FactorSeries f;
  std::vector<ReturnObs> exact1, exact2, planted;
  const std::int64_t d0 = parse_date("2015-01-01");
  int trading = 0;
  for (std::int64_t d = d0; d < d0 + 2 * 365; ++d) {
    if ((d + 3) % 7 >= 5) continue;  // weekends
    FactorRow r{0.01 * z(g), 0.007 * z(g), 0.006 * z(g), 0.0001};
    f[d] = r;
    exact1.push_back({d, r.rf + r.mkt_rf});
    exact2.push_back({d, r.rf + 2 * r.mkt_rf});
    planted.push_back({d, r.rf + 0.8 * r.mkt_rf + 0.3 * r.smb - 0.2 * r.hml + 0.002 * z(g)});
    ++trading;
  }
  const RollingResult a = rolling_beta_excess(exact1, f);
  REQUIRE_FALSE(a.rows.empty());
  CHECK(a.skipped + static_cast<Index>(a.rows.size()) == trading);
  CHECK(a.skipped >= 250);
  for (const auto& e : a.rows) {
    CHECK(e.betas[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(e.excess) < 1e-10);
  }
  for (const auto& e : rolling_beta_excess(exact2, f).rows) CHECK(e.betas[0] == doctest::Approx(2.0).epsilon(1e-8));
  const RollingResult p = rolling_beta_excess(planted, f);
  const auto& last = p.rows.back();
  CHECK(std::abs(last.betas[0] - 0.8) < 0.1);
  CHECK(std::abs(last.betas[1] - 0.3) < 0.1);
  CHECK(std::abs(last.betas[2] + 0.2) < 0.1);

  CHECK(format_date(parse_date("2020-02-29")) == "2020-02-29");
  CHECK_THROWS_AS(parse_date("2021-02-29"), SchemaError);
}

TEST_CASE("dynamism basics") {
  std::vector<RawFirmYear> raws;
  for (int f = 0; f < 200; ++f) {
    char id[8];
    std::snprintf(id, sizeof id, "F%03d", f);
    auto h = history(id, 2000, 12, 10.0 + f);
    raws.insert(raws.end(), h.begin(), h.end());
  }
  const Panel p = build_panel(raws);
  const DynamismStats d = dynamism_stats(p, resolve_variable(p, "log.KT"), {10, 5});
  CHECK(d.pooled_exit_rate == 0.0);
  CHECK(d.pooled_entry_rate == 0.0);
  for (const auto& b : d.bins) {
    CHECK(b.exit_prob == 0.0);
    CHECK(b.entry_prob == 0.0);
    CHECK(b.forward_survivors == b.forward_base);
  }
  CHECK_THROWS_AS(dynamism_stats(p, resolve_variable(p, "log.KT"), {10, 12}), CoverageError);
}

TEST_CASE("csv round trips and schema errors") {
  auto raws = history("A", 2000, 3, 100.0);
  raws[1].xrd.reset();
  raws[2].sic.reset();
  const std::string path = temp_path("raw.csv");
  write_raw_csv(path, raws);
  const auto back = read_raw_csv(path);
  REQUIRE(back.size() == 3);
  CHECK_FALSE(back[1].xrd.has_value());
  CHECK_FALSE(back[2].sic.has_value());
  CHECK(*back[0].at == *raws[0].at);
  CHECK(*back[2].sl == *raws[2].sl);

  const Panel p = build_panel(raws);
  const std::string store = temp_path("store.csv");
  write_store_csv(store, p);
  const Panel q = load_panel(store, nullptr, DeflatorMode::NominalGDP);
  CHECK(q.rows() == p.rows());
  CHECK(q.column("CF")(2) == p.column("CF")(2));
  CHECK(q.in_subset(1, Subset::Good) == p.in_subset(1, Subset::Good));
  DeflatorSeries s;
  s.add(2019, 1, 1);
  CHECK_THROWS_AS(load_panel(store, &s, DeflatorMode::NominalGDP), ConfigError);

  const std::string empty = temp_path("empty.csv");
  write_text(empty, "");
  try {
    read_raw_csv(empty);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("header") != std::string::npos);
  }

  std::ostringstream os;
  write_raw_csv(os, raws);
  std::string text = os.str();
  const auto second = text.find('\n', text.find('\n') + 1);
  text.insert(text.find(',', text.find(',', second + 1) + 1) + 1, "x");  // corrupt sic on line 3
  write_text(temp_path("bad.csv"), text);
  try {
    read_raw_csv(temp_path("bad.csv"));
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::string missing = os.str();
  missing.replace(missing.find("mve"), 3, "mvx");
  write_text(temp_path("hdr.csv"), missing);
  CHECK_THROWS_AS(read_raw_csv(temp_path("hdr.csv")), SchemaError);
}
