#include <chrono>
#include <cstdio>

#include "firmfacts/errors.hpp"
#include "firmfacts/panel.hpp"

namespace firmfacts {
namespace {

namespace chr = std::chrono;

chr::year_month_day to_ymd(std::int64_t days) { return chr::year_month_day{chr::sys_days{chr::days{days}}}; }

std::int64_t to_days(const chr::year_month_day& ymd) {
  return chr::sys_days{ymd}.time_since_epoch().count();
}

// Same day `months` earlier, clamped to the month's last day.
std::int64_t months_before(std::int64_t days, int months) {
  const auto ymd = to_ymd(days);
  const chr::year_month ym = chr::year_month{ymd.year(), ymd.month()} - chr::months{months};
  const chr::year_month_day_last last{ym.year(), chr::month_day_last{ym.month()}};
  const auto day = std::min(ymd.day(), last.day());
  return to_days(chr::year_month_day{ym.year(), ym.month(), day});
}

}  // namespace

std::int64_t parse_date(std::string_view iso) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  const std::string s(iso);
  if (std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3 || s.size() != 10)
    throw SchemaError("malformed date '" + s + "' (expected YYYY-MM-DD)");
  const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
  if (!ymd.ok()) throw SchemaError("invalid date '" + s + "'");
  return to_days(ymd);
}

std::string format_date(std::int64_t days) {
  const auto ymd = to_ymd(days);
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

RollingResult rolling_beta_excess(const std::vector<ReturnObs>& returns, const FactorSeries& factors,
                                  const RollingOptions& opt) {
  if (opt.window_months < 1 || opt.min_obs < 5) throw ConfigError("rolling_beta_excess: window too small");
  struct Obs {
    std::int64_t date;
    double y;  // ret - rf
    double ret;
    const FactorRow* f;
  };
  std::vector<Obs> obs;
  RollingResult out;
  for (const auto& r : returns) {
    const auto it = factors.find(r.date);
    if (it == factors.end()) {
      ++out.skipped;
      continue;
    }
    obs.push_back({r.date, r.ret - it->second.rf, r.ret, &it->second});
  }
  std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) { return a.date < b.date; });
  if (obs.empty()) return out;

  const std::int64_t first = obs.front().date;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::int64_t start = months_before(obs[i].date, opt.window_months);
    while (lo < i && obs[lo].date < start) ++lo;
    const auto m = static_cast<Index>(i - lo);
    if (start < first || m < opt.min_obs) {
      ++out.skipped;
      continue;
    }
    Eigen::MatrixXd x(m, 4);
    VectorXd y(m);
    for (Index k = 0; k < m; ++k) {
      const Obs& o = obs[lo + k];
      x.row(k) << 1.0, o.f->mkt_rf, o.f->smb, o.f->hml;
      y(k) = o.y;
    }
    const VectorXd b = least_squares(x, y);
    const FactorRow& f = *obs[i].f;
    ExcessReturn e;
    e.date = obs[i].date;
    e.ret = obs[i].ret;
    e.betas = {b(1), b(2), b(3)};
    e.excess = obs[i].ret - f.rf - (b(1) * f.mkt_rf + b(2) * f.smb + b(3) * f.hml);
    out.rows.push_back(e);
  }
  return out;
}

}  // namespace firmfacts
