#ifndef FIRMFACTS_PANEL_HPP
#define FIRMFACTS_PANEL_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "firmfacts/binscatter.hpp"
#include "firmfacts/stats.hpp"
#include "firmfacts/transforms.hpp"

namespace firmfacts {

using Item = std::optional<double>;

/// One firm-year of raw accounting items in nominal millions.
struct RawFirmYear {
  std::string firm_id;
  std::int64_t fiscal_year = 0;
  std::optional<int> sic;
  Item mve, lt, dvt, prstkc, sstk, xint, ppent, at, dp, sl, cogs, xsga, txt, xrd, capx, sppe, aqc;
};

inline constexpr std::array<std::string_view, 17> kRawItems{
    "mve", "lt", "dvt", "prstkc", "sstk", "xint", "ppent", "at", "dp",
    "sl",  "cogs", "xsga", "txt", "xrd", "capx", "sppe", "aqc"};

Item RawFirmYear::* raw_member(std::string_view name);

struct SubsetFlags {
  bool all = true;
  bool good = false;
  bool nonbank = false;
};

struct FirmYear {
  Item EQ, DB, VL, DE, DD, DI, KP, KT, DP, IP, IT, CF, SL, XS, RD, XA, CA, IA;
  SubsetFlags flags;
};

inline constexpr std::array<std::string_view, 18> kDerivedItems{
    "EQ", "DB", "VL", "DE", "DD", "DI", "KP", "KT", "DP", "IP", "IT", "CF", "SL", "XS", "RD", "XA", "CA", "IA"};

Item FirmYear::* derived_member(std::string_view name);

/// Derived items in the currency of the inputs. Items depending on a
/// missing input, or on the lag when `prev` is null, stay missing.
FirmYear construct_variables(const RawFirmYear& raw, const RawFirmYear* prev);

/// FirmYear with every item multiplied by `factor`.
FirmYear scale_items(const FirmYear& fy, double factor);

enum class DeflatorMode { NominalGDP, RealGDP };

DeflatorMode parse_deflator_mode(std::string_view s);

class DeflatorSeries {
 public:
  static constexpr std::int64_t kBaseYear = 2019;

  void add(std::int64_t year, double nominal_gdp, double gdp_deflator);
  bool covers(std::int64_t year) const { return rows_.count(year) > 0; }
  /// D_base / D_year for the chosen index.
  double factor(std::int64_t year, DeflatorMode mode) const;
  const std::map<std::int64_t, std::pair<double, double>>& rows() const { return rows_; }

 private:
  std::map<std::int64_t, std::pair<double, double>> rows_;
};

/// x * D_2019 / D_year.
double apply_deflator(double x, std::int64_t year, DeflatorMode mode, const DeflatorSeries& series);

enum class Subset { All, Good, NonBank };

Subset parse_subset(std::string_view s);
std::string_view subset_name(Subset s);

/// Columnar firm panel sorted by (firm_id, year). Raw items are stored in
/// nominal units under their lower-case names, derived items deflated under
/// their mnemonics; missing cells are NaN.
struct Panel {
  std::vector<std::string> firm;
  GroupVector year;
  std::vector<int> sic;  // -1 when missing
  std::map<std::string, VectorXd, std::less<>> columns;
  std::vector<Index> prev;  // row of the same firm's previous year, -1 if absent
  std::vector<SubsetFlags> flags;

  Index rows() const { return year.size(); }
  bool has(std::string_view name) const { return columns.find(name) != columns.end(); }
  const VectorXd& column(std::string_view name) const;
  void set_column(const std::string& name, VectorXd values);
  bool in_subset(Index row, Subset s) const;
  std::vector<Index> subset_rows(Subset s) const;
  Index firm_count(Subset s = Subset::All) const;
  std::int64_t first_year() const;
  std::int64_t last_year() const;
};

/// Sorts rows, links lags, constructs and deflates variables, and sets the
/// subset flags. Without a deflator series values stay nominal.
Panel build_panel(std::vector<RawFirmYear> raws, const DeflatorSeries* deflators = nullptr,
                  DeflatorMode mode = DeflatorMode::NominalGDP);

/// Recomputes flags from the stored columns:
/// Good = mve, lt, at, sl and lagged at present, min(VL, KT, SL) >= 1, and
/// aqc <= 0.2 * at (lagged at when available). NonBank = Good outside SIC
/// 6000-6999 and 4900-4949.
void apply_filters(Panel& panel);

bool is_financial_or_utility(int sic);

/// Rows removed from {Good}, each attributed to the first failing filter.
struct FilterCounts {
  Index all_rows = 0, all_firms = 0;
  Index missing_critical = 0, too_small = 0, restructuring = 0;
  Index good_rows = 0, good_firms = 0;
  Index nonbank_rows = 0, nonbank_firms = 0;
};

FilterCounts filter_counts(const Panel& panel);

// CSV interfaces ------------------------------------------------------------

std::vector<RawFirmYear> read_raw_csv(const std::string& path);
void write_raw_csv(const std::string& path, const std::vector<RawFirmYear>& rows);
void write_raw_csv(std::ostream& out, const std::vector<RawFirmYear>& rows);
DeflatorSeries read_deflators(const std::string& path);
void write_deflators(const std::string& path, const DeflatorSeries& series);

/// Store: the built panel with every column and the subset flags.
void write_store_csv(const std::string& path, const Panel& panel);
Panel read_store_csv(const std::string& path);
/// Reads either a raw panel or a store, detected from the header.
Panel load_panel(const std::string& path, const DeflatorSeries* deflators, DeflatorMode mode);

// Variables -------------------------------------------------------------------

/// Resolves a column or derived measure to one value per row (NaN when
/// undefined). Grammar: a stored column; log.X, asinh.X, lag.X, dlog.X;
/// ret.EQ (dispensation-adjusted equity return); dln.P.N, with dln.CF and
/// dln.CA standing for (SL, XS) and (SL, XA); intensity.X.Y.
VectorXd resolve_variable(const Panel& panel, std::string_view name);

// Analyses ----------------------------------------------------------------------

struct SignSplit {
  std::optional<Moments> positive, negative;  // of asinh(values) per side
  double share_positive = 0.0;
  double share_negative = 0.0;
  Index n_positive = 0;
  Index n_negative = 0;
};

SignSplit sign_split_stats(const VecRef& values);

/// Pearson correlation over within-firm consecutive pairs (x_t, x_{t-1}).
double pooled_autocorr(const VecRef& values, const std::vector<Index>& prev);
double pooled_autocorr(const Panel& panel, std::string_view variable, Subset subset = Subset::All);

/// Uniform on [price - tick/2, price + tick/2].
double jitter_price(double price, double tick, std::uint64_t seed);
VectorXd jitter_prices(const VecRef& prices, double tick, std::uint64_t seed);

struct PerYearStats {
  std::int64_t year = 0;
  Index n = 0;
  double mean = 0.0, sd = 0.0, p10 = 0.0, p25 = 0.0, median = 0.0, p75 = 0.0, p90 = 0.0, iqr = 0.0;
};

std::vector<PerYearStats> per_year_stats(const VecRef& values, const GroupRef& years);

// Returns and factors -----------------------------------------------------------

/// Days since 1970-01-01 of an ISO-8601 date.
std::int64_t parse_date(std::string_view iso);
std::string format_date(std::int64_t days);

struct FactorRow {
  double mkt_rf = 0.0, smb = 0.0, hml = 0.0, rf = 0.0;
};

using FactorSeries = std::map<std::int64_t, FactorRow>;

FactorSeries read_factors(const std::string& path);

struct ReturnObs {
  std::int64_t date = 0;
  double ret = 0.0;
};

struct ExcessReturn {
  std::int64_t date = 0;
  double ret = 0.0;
  double excess = 0.0;
  std::array<double, 3> betas{};
};

struct RollingResult {
  std::vector<ExcessReturn> rows;
  Index skipped = 0;  // dates without a full window of history
};

struct RollingOptions {
  int window_months = 12;
  Index min_obs = 60;
};

/// Per date, OLS of (ret - rf) on a constant and the three factors over the
/// trailing window of prior dates; excess = ret - rf - sum beta_k f_k.
RollingResult rolling_beta_excess(const std::vector<ReturnObs>& returns, const FactorSeries& factors,
                                  const RollingOptions& opt = {});

/// Returns CSV: firm_id, date, ret.
std::map<std::string, std::vector<ReturnObs>> read_returns(const std::string& path);

// Dynamism ------------------------------------------------------------------------

struct DynamismOptions {
  int bins = 49;
  int horizon = 10;
};

inline constexpr std::array<double, 5> kForwardPercentiles{0.10, 0.25, 0.50, 0.75, 0.90};

struct DynamismBin {
  int bin_index = 0;
  double scale_low = 0.0, scale_high = 0.0, scale_median = 0.0;
  Index exit_at_risk = 0;
  double exit_prob = 0.0;
  Index entry_candidates = 0;
  double entry_prob = 0.0;
  Index forward_base = 0;
  Index forward_survivors = 0;
  std::array<double, 5> forward{};  // scale percentiles at t + horizon, NaN when no survivors
};

struct AgeRow {
  int age = 0;
  Index firms = 0;          // firm-years at this age across all observed entrants
  Index exit_at_risk = 0;
  double exit_prob = 0.0;
  Index cohort_firms = 0;   // survivors from the balanced cohort set
  double cohort_median_scale = 0.0;
};

struct DynamismStats {
  std::vector<DynamismBin> bins;
  std::vector<AgeRow> ages;
  double pooled_exit_rate = 0.0;
  double pooled_entry_rate = 0.0;
  LineFit log_count_by_age;
  LineFit median_scale_by_age;
  int horizon = 0;
  int max_age = 0;
  Index cohorts = 0;
};

/// Exit is a firm's last year when that precedes the panel's last year; entry
/// a firm's first year after the panel's first year. Age statistics use
/// firms whose entry is observed; the by-age slopes follow the cohorts that
/// are observable for all ages 0..A, A = floor(span / 2).
DynamismStats dynamism_stats(const Panel& panel, const VecRef& scale, const DynamismOptions& opt = {});

}  // namespace firmfacts

#endif  // FIRMFACTS_PANEL_HPP
