#include <limits>
#include <map>

#include "firmfacts/errors.hpp"
#include "firmfacts/panel.hpp"

namespace firmfacts {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct FirmSpan {
  Index begin, end;  // rows [begin, end)
  std::int64_t first, last;
};

std::vector<FirmSpan> firm_spans(const Panel& p) {
  std::vector<FirmSpan> spans;
  for (Index r = 0; r < p.rows();) {
    Index e = r + 1;
    while (e < p.rows() && p.firm[e] == p.firm[r]) ++e;
    spans.push_back({r, e, p.year(r), p.year(e - 1)});
    r = e;
  }
  return spans;
}

double median_of(std::vector<double>& v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  return quantile_sorted(Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size())), 0.5);
}

}  // namespace

DynamismStats dynamism_stats(const Panel& panel, const VecRef& scale, const DynamismOptions& opt) {
  if (scale.size() != panel.rows()) throw DomainError("dynamism_stats: scale length differs from panel");
  const std::int64_t y0 = panel.first_year(), y1 = panel.last_year();
  const std::int64_t span = y1 - y0;
  if (opt.horizon < 1) throw ConfigError("dynamism_stats: horizon must be positive");
  if (opt.horizon > span)
    throw CoverageError("horizon " + std::to_string(opt.horizon) + " exceeds the panel span of " +
                        std::to_string(span) + " years");

  const auto spans = firm_spans(panel);
  std::vector<const FirmSpan*> owner(panel.rows());
  for (const auto& s : spans)
    for (Index r = s.begin; r < s.end; ++r) owner[r] = &s;

  DynamismStats out;
  out.horizon = opt.horizon;

  // Pooled rates over every firm-year.
  Index at_risk = 0, exits = 0, candidates = 0, entries = 0;
  for (Index r = 0; r < panel.rows(); ++r) {
    const FirmSpan& f = *owner[r];
    if (panel.year(r) < y1) {
      ++at_risk;
      exits += panel.year(r) == f.last;
    }
    if (panel.year(r) > y0) {
      ++candidates;
      entries += panel.year(r) == f.first;
    }
  }
  out.pooled_exit_rate = at_risk ? static_cast<double>(exits) / at_risk : kNaN;
  out.pooled_entry_rate = candidates ? static_cast<double>(entries) / candidates : kNaN;

  // By current scale bin.
  const std::vector<int> bin = bin_assignment(scale, opt.bins, 0.0);
  out.bins.resize(opt.bins);
  std::vector<std::vector<double>> bin_scale(opt.bins), forward(opt.bins);
  std::vector<Index> bin_exits(opt.bins, 0), bin_entries(opt.bins, 0);
  for (Index r = 0; r < panel.rows(); ++r) {
    const int b = bin[r];
    if (b < 0) continue;
    DynamismBin& d = out.bins[b];
    const FirmSpan& f = *owner[r];
    const std::int64_t t = panel.year(r);
    bin_scale[b].push_back(scale(r));
    if (t < y1) {
      ++d.exit_at_risk;
      bin_exits[b] += t == f.last;
    }
    if (t > y0) {
      ++d.entry_candidates;
      bin_entries[b] += t == f.first;
    }
    if (t + opt.horizon <= y1) {
      ++d.forward_base;
      for (Index k = r + 1; k < f.end && panel.year(k) <= t + opt.horizon; ++k) {
        if (panel.year(k) == t + opt.horizon && std::isfinite(scale(k))) {
          ++d.forward_survivors;
          forward[b].push_back(scale(k));
        }
      }
    }
  }
  for (int b = 0; b < opt.bins; ++b) {
    DynamismBin& d = out.bins[b];
    d.bin_index = b;
    auto& s = bin_scale[b];
    std::sort(s.begin(), s.end());
    d.scale_low = s.front();
    d.scale_high = s.back();
    d.scale_median = median_of(s);
    d.exit_prob = d.exit_at_risk ? static_cast<double>(bin_exits[b]) / d.exit_at_risk : kNaN;
    d.entry_prob = d.entry_candidates ? static_cast<double>(bin_entries[b]) / d.entry_candidates : kNaN;
    auto& fw = forward[b];
    std::sort(fw.begin(), fw.end());
    const Eigen::Map<const VectorXd> m(fw.data(), static_cast<Index>(fw.size()));
    for (std::size_t q = 0; q < kForwardPercentiles.size(); ++q)
      d.forward[q] = fw.empty() ? kNaN : quantile_sorted(m, kForwardPercentiles[q]);
  }

  // By age, for firms whose entry is observed.
  const int max_age = static_cast<int>(span / 2);
  out.max_age = max_age;
  std::map<int, AgeRow> ages;
  std::vector<std::vector<double>> cohort_scale(max_age + 1);
  std::vector<Index> cohort_count(max_age + 1, 0);
  std::map<int, Index> age_exits;
  for (const auto& f : spans) {
    if (f.first <= y0) continue;
    const bool balanced = f.first <= y1 - max_age;
    out.cohorts += balanced;
    for (Index r = f.begin; r < f.end; ++r) {
      const int age = static_cast<int>(panel.year(r) - f.first);
      AgeRow& a = ages[age];
      a.age = age;
      ++a.firms;
      if (panel.year(r) < y1) {
        ++a.exit_at_risk;
        age_exits[age] += panel.year(r) == f.last;
      }
      if (balanced && age <= max_age) {
        ++cohort_count[age];
        if (std::isfinite(scale(r))) cohort_scale[age].push_back(scale(r));
      }
    }
  }
  for (auto& [age, a] : ages) {
    a.exit_prob = a.exit_at_risk ? static_cast<double>(age_exits[age]) / a.exit_at_risk : kNaN;
    if (age <= max_age) {
      a.cohort_firms = cohort_count[age];
      a.cohort_median_scale = median_of(cohort_scale[age]);
    } else {
      a.cohort_median_scale = kNaN;
    }
    out.ages.push_back(a);
  }

  std::vector<double> xa, yc, xm, ym;
  for (int a = 0; a <= max_age; ++a) {
    if (cohort_count[a] > 0) {
      xa.push_back(a);
      yc.push_back(std::log(static_cast<double>(cohort_count[a])));
    }
    if (!cohort_scale[a].empty()) {
      xm.push_back(a);
      ym.push_back(median_of(cohort_scale[a]));
    }
  }
  auto fit = [](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 3) return LineFit{kNaN, kNaN, kNaN, kNaN, static_cast<Index>(x.size())};
    const auto n = static_cast<Index>(x.size());
    return fit_line(Eigen::Map<const VectorXd>(x.data(), n), Eigen::Map<const VectorXd>(y.data(), n));
  };
  out.log_count_by_age = fit(xa, yc);
  out.median_scale_by_age = fit(xm, ym);
  return out;
}

}  // namespace firmfacts
