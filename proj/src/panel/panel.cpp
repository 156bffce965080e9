#include "firmfacts/panel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

#include "firmfacts/errors.hpp"
#include "internal.hpp"

namespace firmfacts {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Item operator+(const Item& a, const Item& b) { return a && b ? Item(*a + *b) : std::nullopt; }
Item operator-(const Item& a, const Item& b) { return a && b ? Item(*a - *b) : std::nullopt; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

Item RawFirmYear::* raw_member(std::string_view name) {
  static constexpr Item RawFirmYear::* members[] = {
      &RawFirmYear::mve,  &RawFirmYear::lt,   &RawFirmYear::dvt, &RawFirmYear::prstkc, &RawFirmYear::sstk,
      &RawFirmYear::xint, &RawFirmYear::ppent, &RawFirmYear::at, &RawFirmYear::dp,     &RawFirmYear::sl,
      &RawFirmYear::cogs, &RawFirmYear::xsga, &RawFirmYear::txt, &RawFirmYear::xrd,    &RawFirmYear::capx,
      &RawFirmYear::sppe, &RawFirmYear::aqc};
  for (std::size_t i = 0; i < kRawItems.size(); ++i)
    if (kRawItems[i] == name) return members[i];
  return nullptr;
}

Item FirmYear::* derived_member(std::string_view name) {
  static constexpr Item FirmYear::* members[] = {
      &FirmYear::EQ, &FirmYear::DB, &FirmYear::VL, &FirmYear::DE, &FirmYear::DD, &FirmYear::DI,
      &FirmYear::KP, &FirmYear::KT, &FirmYear::DP, &FirmYear::IP, &FirmYear::IT, &FirmYear::CF,
      &FirmYear::SL, &FirmYear::XS, &FirmYear::RD, &FirmYear::XA, &FirmYear::CA, &FirmYear::IA};
  for (std::size_t i = 0; i < kDerivedItems.size(); ++i)
    if (kDerivedItems[i] == name) return members[i];
  return nullptr;
}

FirmYear construct_variables(const RawFirmYear& raw, const RawFirmYear* prev) {
  const Item none;
  const Item& lag_lt = prev ? prev->lt : none;
  const Item& lag_ppent = prev ? prev->ppent : none;
  const Item& lag_at = prev ? prev->at : none;

  FirmYear f;
  f.EQ = raw.mve;
  f.DB = raw.lt;
  f.VL = f.EQ + f.DB;
  f.DE = raw.dvt + (raw.prstkc - raw.sstk);
  f.DD = raw.xint + (lag_lt - f.DB);
  f.DI = f.DE + f.DD;
  f.KP = raw.ppent;
  f.KT = raw.at;
  f.DP = raw.dp;
  f.IP = f.KP - lag_ppent + f.DP;
  f.IT = f.KT - lag_at + f.DP;
  f.CF = f.DI + f.IT;
  f.SL = raw.sl;
  f.XS = f.SL - f.CF;
  f.RD = raw.xrd;
  f.XA = raw.cogs + raw.xsga + raw.txt;
  f.CA = f.SL - f.XA;
  f.IA = raw.capx - raw.sppe;
  return f;
}

FirmYear scale_items(const FirmYear& fy, double factor) {
  FirmYear out = fy;
  for (auto name : kDerivedItems) {
    Item& v = out.*derived_member(name);
    if (v) *v *= factor;
  }
  return out;
}

DeflatorMode parse_deflator_mode(std::string_view s) {
  const std::string l = lower(s);
  if (l == "nominal" || l == "nominalgdp" || l == "gdp") return DeflatorMode::NominalGDP;
  if (l == "real" || l == "realgdp" || l == "deflator") return DeflatorMode::RealGDP;
  throw ConfigError("unknown deflator mode '" + std::string(s) + "' (use nominal or real)");
}

void DeflatorSeries::add(std::int64_t year, double nominal_gdp, double gdp_deflator) {
  if (!(nominal_gdp > 0.0) || !(gdp_deflator > 0.0))
    throw DomainError("deflator series: year " + std::to_string(year) + " is not strictly positive");
  rows_[year] = {nominal_gdp, gdp_deflator};
}

double DeflatorSeries::factor(std::int64_t year, DeflatorMode mode) const {
  const auto it = rows_.find(year);
  if (it == rows_.end()) throw CoverageError("deflator series does not cover year " + std::to_string(year));
  const auto base = rows_.find(kBaseYear);
  if (base == rows_.end()) throw CoverageError("deflator series lacks the base year 2019");
  return mode == DeflatorMode::NominalGDP ? base->second.first / it->second.first
                                          : base->second.second / it->second.second;
}

double apply_deflator(double x, std::int64_t year, DeflatorMode mode, const DeflatorSeries& series) {
  return x * series.factor(year, mode);
}

Subset parse_subset(std::string_view s) {
  const std::string l = lower(s);
  if (l == "all") return Subset::All;
  if (l == "good") return Subset::Good;
  if (l == "nonbank" || l == "non-bank") return Subset::NonBank;
  throw ConfigError("unknown subset '" + std::string(s) + "' (use all, good or nonbank)");
}

std::string_view subset_name(Subset s) {
  switch (s) {
    case Subset::All: return "all";
    case Subset::Good: return "good";
    case Subset::NonBank: return "nonbank";
  }
  return "?";
}

const VectorXd& Panel::column(std::string_view name) const {
  const auto it = columns.find(name);
  if (it == columns.end()) throw ConfigError("unknown variable '" + std::string(name) + "'");
  return it->second;
}

void Panel::set_column(const std::string& name, VectorXd values) {
  if (values.size() != rows()) throw DomainError("set_column: length mismatch for '" + name + "'");
  columns[name] = std::move(values);
}

bool Panel::in_subset(Index row, Subset s) const {
  switch (s) {
    case Subset::All: return true;
    case Subset::Good: return flags[row].good;
    case Subset::NonBank: return flags[row].nonbank;
  }
  return false;
}

std::vector<Index> Panel::subset_rows(Subset s) const {
  std::vector<Index> out;
  for (Index r = 0; r < rows(); ++r)
    if (in_subset(r, s)) out.push_back(r);
  return out;
}

Index Panel::firm_count(Subset s) const {
  Index n = 0;
  const std::string* last = nullptr;
  for (Index r = 0; r < rows(); ++r) {
    if (!in_subset(r, s)) continue;
    if (!last || *last != firm[r]) ++n;
    last = &firm[r];
  }
  return n;
}

std::int64_t Panel::first_year() const {
  if (rows() == 0) throw SampleSizeError("empty panel");
  return year.minCoeff();
}

std::int64_t Panel::last_year() const {
  if (rows() == 0) throw SampleSizeError("empty panel");
  return year.maxCoeff();
}

bool is_financial_or_utility(int sic) { return (sic >= 6000 && sic <= 6999) || (sic >= 4900 && sic <= 4949); }

namespace {

enum class FilterReason { Pass, MissingCritical, TooSmall, Restructuring };

struct FilterColumns {
  const VectorXd *mve, *lt, *at, *sl, *aqc, *vl, *kt, *sales;

  explicit FilterColumns(const Panel& p) {
    auto col = [&](std::string_view name) -> const VectorXd* {
      const auto it = p.columns.find(name);
      return it == p.columns.end() ? nullptr : &it->second;
    };
    mve = col("mve"), lt = col("lt"), at = col("at"), sl = col("sl"), aqc = col("aqc");
    vl = col("VL"), kt = col("KT"), sales = col("SL");
  }
};

bool present(const VectorXd* c, Index r) { return c && r >= 0 && std::isfinite((*c)(r)); }

FilterReason filter_reason(const Panel& panel, const FilterColumns& c, Index r) {
  const Index p = panel.prev[r];
  if (!(present(c.mve, r) && present(c.lt, r) && present(c.at, r) && present(c.sl, r) && present(c.at, p)))
    return FilterReason::MissingCritical;
  if (!present(c.vl, r) || !present(c.kt, r) || !present(c.sales, r)) return FilterReason::MissingCritical;
  if (std::min({(*c.vl)(r), (*c.kt)(r), (*c.sales)(r)}) < 1.0) return FilterReason::TooSmall;
  if (present(c.aqc, r)) {
    const double assets = present(c.at, p) ? (*c.at)(p) : (*c.at)(r);
    if ((*c.aqc)(r) > 0.2 * assets) return FilterReason::Restructuring;
  }
  return FilterReason::Pass;
}

}  // namespace

void apply_filters(Panel& panel) {
  const FilterColumns c(panel);
  panel.flags.assign(panel.rows(), SubsetFlags{});
  for (Index r = 0; r < panel.rows(); ++r) {
    if (filter_reason(panel, c, r) != FilterReason::Pass) continue;
    panel.flags[r].good = true;
    panel.flags[r].nonbank = panel.sic[r] < 0 || !is_financial_or_utility(panel.sic[r]);
  }
}

FilterCounts filter_counts(const Panel& panel) {
  const FilterColumns c(panel);
  FilterCounts out;
  out.all_rows = panel.rows();
  out.all_firms = panel.firm_count(Subset::All);
  for (Index r = 0; r < panel.rows(); ++r) {
    switch (filter_reason(panel, c, r)) {
      case FilterReason::MissingCritical: ++out.missing_critical; break;
      case FilterReason::TooSmall: ++out.too_small; break;
      case FilterReason::Restructuring: ++out.restructuring; break;
      case FilterReason::Pass: break;
    }
  }
  out.good_rows = static_cast<Index>(panel.subset_rows(Subset::Good).size());
  out.good_firms = panel.firm_count(Subset::Good);
  out.nonbank_rows = static_cast<Index>(panel.subset_rows(Subset::NonBank).size());
  out.nonbank_firms = panel.firm_count(Subset::NonBank);
  return out;
}

namespace detail {

void link_lags(Panel& panel) {
  const Index n = panel.rows();
  panel.prev.assign(n, -1);
  for (Index r = 1; r < n; ++r)
    if (panel.firm[r] == panel.firm[r - 1] && panel.year(r) == panel.year(r - 1) + 1) panel.prev[r] = r - 1;
}

}  // namespace detail

Panel build_panel(std::vector<RawFirmYear> raws, const DeflatorSeries* deflators, DeflatorMode mode) {
  std::stable_sort(raws.begin(), raws.end(), [](const RawFirmYear& a, const RawFirmYear& b) {
    return a.firm_id < b.firm_id || (a.firm_id == b.firm_id && a.fiscal_year < b.fiscal_year);
  });
  for (std::size_t i = 1; i < raws.size(); ++i)
    if (raws[i].firm_id == raws[i - 1].firm_id && raws[i].fiscal_year == raws[i - 1].fiscal_year)
      throw SchemaError("duplicate firm-year (" + raws[i].firm_id + ", " + std::to_string(raws[i].fiscal_year) + ")");

  Panel panel;
  const Index n = static_cast<Index>(raws.size());
  panel.firm.reserve(n);
  panel.year.resize(n);
  panel.sic.resize(n);
  for (Index r = 0; r < n; ++r) {
    panel.firm.push_back(raws[r].firm_id);
    panel.year(r) = raws[r].fiscal_year;
    panel.sic[r] = raws[r].sic.value_or(-1);
  }
  detail::link_lags(panel);

  for (auto name : kRawItems) {
    const auto m = raw_member(name);
    VectorXd c(n);
    for (Index r = 0; r < n; ++r) c(r) = (raws[r].*m).value_or(kNaN);
    panel.columns.emplace(std::string(name), std::move(c));
  }
  std::vector<VectorXd> derived(kDerivedItems.size(), VectorXd(n));
  for (Index r = 0; r < n; ++r) {
    const Index p = panel.prev[r];
    FirmYear fy = construct_variables(raws[r], p >= 0 ? &raws[p] : nullptr);
    if (deflators) fy = scale_items(fy, deflators->factor(raws[r].fiscal_year, mode));
    for (std::size_t k = 0; k < kDerivedItems.size(); ++k) derived[k](r) = (fy.*derived_member(kDerivedItems[k])).value_or(kNaN);
  }
  for (std::size_t k = 0; k < kDerivedItems.size(); ++k)
    panel.columns.emplace(std::string(kDerivedItems[k]), std::move(derived[k]));
  apply_filters(panel);
  return panel;
}

}  // namespace firmfacts
