#include <algorithm>
#include <limits>
#include <set>

#include "../csv.hpp"
#include "firmfacts/errors.hpp"
#include "firmfacts/panel.hpp"
#include "internal.hpp"

namespace firmfacts {
namespace {

using detail::fmt;

constexpr std::int64_t kMinYear = 1900;
constexpr std::int64_t kMaxYear = 2100;

std::string raw_header() {
  std::string h = "firm_id,fiscal_year,sic";
  for (auto name : kRawItems) h += "," + std::string(name);
  return h;
}

std::int64_t parse_year(const std::string& cell, std::size_t line) {
  const auto v = detail::parse_cell(cell, line, "fiscal_year");
  if (!v || *v != std::floor(*v)) throw SchemaError("fiscal_year must be an integer", line);
  const auto y = static_cast<std::int64_t>(*v);
  if (y < kMinYear || y > kMaxYear)
    throw SchemaError("fiscal_year " + std::to_string(y) + " outside [1900, 2100]", line);
  return y;
}

std::optional<int> parse_sic(const std::string& cell, std::size_t line) {
  const auto v = detail::parse_cell(cell, line, "sic");
  if (!v) return std::nullopt;
  if (*v != std::floor(*v) || *v < 0 || *v > 9999) throw SchemaError("sic must be an integer code in [0, 9999]", line);
  return static_cast<int>(*v);
}

}  // namespace

std::vector<RawFirmYear> read_raw_csv(const std::string& path) {
  detail::CsvFile f;
  try {
    f = detail::read_csv(path);
  } catch (const SchemaError& e) {
    if (e.line() == 1 && std::string(e.what()).find("empty file") != std::string::npos)
      throw SchemaError("empty file '" + path + "': missing header row (" + raw_header() + ")", 1);
    throw;
  }
  const int i_firm = f.require("firm_id"), i_year = f.require("fiscal_year"), i_sic = f.require("sic");
  std::vector<std::pair<Item RawFirmYear::*, int>> items;
  for (auto name : kRawItems) items.emplace_back(raw_member(name), f.require(name));

  std::vector<RawFirmYear> out;
  out.reserve(f.rows.size());
  std::set<std::pair<std::string, std::int64_t>> seen;
  for (const auto& [line, cells] : f.rows) {
    RawFirmYear r;
    r.firm_id = cells[i_firm];
    if (r.firm_id.empty()) throw SchemaError("empty firm_id", line);
    r.fiscal_year = parse_year(cells[i_year], line);
    r.sic = parse_sic(cells[i_sic], line);
    for (std::size_t k = 0; k < items.size(); ++k) {
      const auto v = detail::parse_cell(cells[items[k].second], line, kRawItems[k]);
      if (v && *v < 0.0) throw SchemaError("column '" + std::string(kRawItems[k]) + "' must be nonnegative", line);
      r.*items[k].first = v;
    }
    if (!seen.emplace(r.firm_id, r.fiscal_year).second)
      throw SchemaError("duplicate firm-year (" + r.firm_id + ", " + std::to_string(r.fiscal_year) + ")", line);
    out.push_back(std::move(r));
  }
  return out;
}

void write_raw_csv(const std::string& path, const std::vector<RawFirmYear>& rows) {
  auto out = detail::open_output(path);
  write_raw_csv(out, rows);
}

void write_raw_csv(std::ostream& out, const std::vector<RawFirmYear>& rows) {
  out << raw_header() << '\n';
  for (const auto& r : rows) {
    out << detail::csv_escape(r.firm_id) << ',' << r.fiscal_year << ',' << (r.sic ? std::to_string(*r.sic) : "");
    for (auto name : kRawItems) out << ',' << fmt(r.*raw_member(name));
    out << '\n';
  }
}

DeflatorSeries read_deflators(const std::string& path) {
  const auto f = detail::read_csv(path);
  const int iy = f.require("year"), in = f.require("nominal_gdp"), id = f.require("gdp_deflator");
  DeflatorSeries s;
  for (const auto& [line, cells] : f.rows) {
    const auto y = detail::parse_cell(cells[iy], line, "year");
    const auto n = detail::parse_cell(cells[in], line, "nominal_gdp");
    const auto d = detail::parse_cell(cells[id], line, "gdp_deflator");
    if (!y || !n || !d) throw SchemaError("deflator rows must be complete", line);
    if (!(*n > 0.0) || !(*d > 0.0)) throw SchemaError("deflators must be strictly positive", line);
    s.add(static_cast<std::int64_t>(*y), *n, *d);
  }
  return s;
}

void write_deflators(const std::string& path, const DeflatorSeries& series) {
  auto out = detail::open_output(path);
  out << "year,nominal_gdp,gdp_deflator\n";
  for (const auto& [y, v] : series.rows()) out << y << ',' << fmt(v.first) << ',' << fmt(v.second) << '\n';
}

void write_store_csv(const std::string& path, const Panel& panel) {
  std::vector<std::string> names;
  for (auto n : kRawItems) names.emplace_back(n);
  for (auto n : kDerivedItems) names.emplace_back(n);
  for (const auto& [name, col] : panel.columns)
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  std::vector<const VectorXd*> cols;
  for (const auto& n : names) cols.push_back(panel.has(n) ? &panel.column(n) : nullptr);

  auto out = detail::open_output(path);
  out << "firm_id,fiscal_year,sic";
  for (const auto& n : names) out << ',' << detail::csv_escape(n);
  out << ",good,nonbank\n";
  for (Index r = 0; r < panel.rows(); ++r) {
    out << detail::csv_escape(panel.firm[r]) << ',' << panel.year(r) << ','
        << (panel.sic[r] >= 0 ? std::to_string(panel.sic[r]) : "");
    for (const auto* c : cols) out << ',' << (c ? fmt((*c)(r)) : "");
    out << ',' << int(panel.flags[r].good) << ',' << int(panel.flags[r].nonbank) << '\n';
  }
}

namespace {

bool is_store_header(const std::vector<std::string>& header) {
  return std::find(header.begin(), header.end(), "good") != header.end() &&
         std::find(header.begin(), header.end(), "EQ") != header.end();
}

Panel panel_from_store(const detail::CsvFile& f) {
  const int i_firm = f.require("firm_id"), i_year = f.require("fiscal_year"), i_sic = f.require("sic");
  const int i_good = f.require("good"), i_nonbank = f.require("nonbank");
  const Index n = static_cast<Index>(f.rows.size());

  // Rows must already be in (firm, year) order; sort a permutation otherwise.
  std::vector<Index> order(n);
  for (Index r = 0; r < n; ++r) order[r] = r;
  std::vector<std::int64_t> years(n);
  for (Index r = 0; r < n; ++r) years[r] = parse_year(f.rows[r].second[i_year], f.rows[r].first);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const auto& fa = f.rows[a].second[i_firm];
    const auto& fb = f.rows[b].second[i_firm];
    return fa < fb || (fa == fb && years[a] < years[b]);
  });

  Panel p;
  p.firm.resize(n);
  p.year.resize(n);
  p.sic.resize(n);
  p.flags.resize(n);
  std::vector<std::pair<int, VectorXd>> cols;
  for (std::size_t c = 0; c < f.header.size(); ++c) {
    const int ci = static_cast<int>(c);
    if (ci == i_firm || ci == i_year || ci == i_sic || ci == i_good || ci == i_nonbank) continue;
    cols.emplace_back(ci, VectorXd(n));
  }
  for (Index k = 0; k < n; ++k) {
    const auto& [line, cells] = f.rows[order[k]];
    p.firm[k] = cells[i_firm];
    p.year(k) = years[order[k]];
    if (k > 0 && p.firm[k] == p.firm[k - 1] && p.year(k) == p.year(k - 1))
      throw SchemaError("duplicate firm-year (" + p.firm[k] + ", " + std::to_string(p.year(k)) + ")", line);
    p.sic[k] = parse_sic(cells[i_sic], line).value_or(-1);
    p.flags[k].good = detail::parse_cell(cells[i_good], line, "good").value_or(0.0) != 0.0;
    p.flags[k].nonbank = detail::parse_cell(cells[i_nonbank], line, "nonbank").value_or(0.0) != 0.0;
    for (auto& [ci, v] : cols)
      v(k) = detail::parse_cell(cells[ci], line, f.header[ci]).value_or(std::numeric_limits<double>::quiet_NaN());
  }
  for (auto& [ci, v] : cols) p.columns.emplace(f.header[ci], std::move(v));
  detail::link_lags(p);
  return p;
}

}  // namespace

Panel read_store_csv(const std::string& path) {
  const auto f = detail::read_csv(path);
  if (!is_store_header(f.header)) throw SchemaError("'" + path + "' is not a panel store (missing good/EQ columns)", 1);
  return panel_from_store(f);
}

Panel load_panel(const std::string& path, const DeflatorSeries* deflators, DeflatorMode mode) {
  const auto f = detail::read_csv(path);
  if (is_store_header(f.header)) {
    if (deflators) throw ConfigError("'" + path + "' is a store with deflated values; omit --deflators");
    return panel_from_store(f);
  }
  return build_panel(read_raw_csv(path), deflators, mode);
}

FactorSeries read_factors(const std::string& path) {
  const auto f = detail::read_csv(path);
  const int id = f.require("date"), im = f.require("mkt_rf"), is = f.require("smb"), ih = f.require("hml"),
            ir = f.require("rf");
  FactorSeries out;
  for (const auto& [line, cells] : f.rows) {
    std::int64_t date = 0;
    try {
      date = parse_date(cells[id]);
    } catch (const Error& e) {
      throw SchemaError(e.what(), line);
    }
    auto get = [&](int i, const char* name) {
      const auto v = detail::parse_cell(cells[i], line, name);
      if (!v) throw SchemaError(std::string("missing ") + name, line);
      return *v;
    };
    out[date] = {get(im, "mkt_rf"), get(is, "smb"), get(ih, "hml"), get(ir, "rf")};
  }
  return out;
}

std::map<std::string, std::vector<ReturnObs>> read_returns(const std::string& path) {
  const auto f = detail::read_csv(path);
  const int i_firm = f.require("firm_id"), id = f.require("date"), ir = f.require("ret");
  std::map<std::string, std::vector<ReturnObs>> out;
  for (const auto& [line, cells] : f.rows) {
    ReturnObs o;
    try {
      o.date = parse_date(cells[id]);
    } catch (const Error& e) {
      throw SchemaError(e.what(), line);
    }
    const auto v = detail::parse_cell(cells[ir], line, "ret");
    if (!v) continue;
    o.ret = *v;
    out[cells[i_firm]].push_back(o);
  }
  for (auto& [firm, obs] : out)
    std::stable_sort(obs.begin(), obs.end(), [](const ReturnObs& a, const ReturnObs& b) { return a.date < b.date; });
  return out;
}

}  // namespace firmfacts
