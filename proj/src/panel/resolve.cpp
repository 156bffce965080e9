#include <limits>

#include "firmfacts/errors.hpp"
#include "firmfacts/panel.hpp"

namespace firmfacts {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool starts_with(std::string_view s, std::string_view prefix, std::string_view& rest) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  rest = s.substr(prefix.size());
  return !rest.empty();
}

// Two dot-separated column names.
std::pair<std::string_view, std::string_view> split_pair(std::string_view s, std::string_view full) {
  const auto dot = s.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == s.size() || s.find('.', dot + 1) != std::string_view::npos)
    throw ConfigError("variable '" + std::string(full) + "' needs exactly two column names");
  return {s.substr(0, dot), s.substr(dot + 1)};
}

template <typename F>
VectorXd map_rows(Index n, F&& f) {
  VectorXd out(n);
  for (Index r = 0; r < n; ++r) out(r) = f(r);
  return out;
}

double positive_log(double v) { return v > 0.0 ? std::log(v) : kNaN; }

}  // namespace

VectorXd resolve_variable(const Panel& panel, std::string_view name) {
  if (panel.has(name)) return panel.column(name);
  const Index n = panel.rows();
  std::string_view rest;
  if (starts_with(name, "log.", rest)) {
    const VectorXd x = resolve_variable(panel, rest);
    return x.unaryExpr([](double v) { return positive_log(v); });
  }
  if (starts_with(name, "asinh.", rest)) {
    const VectorXd x = resolve_variable(panel, rest);
    return x.unaryExpr([](double v) { return asinh_scale(v); });
  }
  if (starts_with(name, "lag.", rest)) {
    const VectorXd x = resolve_variable(panel, rest);
    return map_rows(n, [&](Index r) { return panel.prev[r] >= 0 ? x(panel.prev[r]) : kNaN; });
  }
  if (starts_with(name, "dlog.", rest)) {
    const VectorXd x = resolve_variable(panel, rest);
    return map_rows(n, [&](Index r) {
      const Index p = panel.prev[r];
      return p >= 0 ? positive_log(x(r)) - positive_log(x(p)) : kNaN;
    });
  }
  if (starts_with(name, "ret.", rest)) {
    if (rest != "EQ") throw ConfigError("variable '" + std::string(name) + "': returns are defined for EQ only");
    const VectorXd& eq = panel.column("EQ");
    const VectorXd& de = panel.column("DE");
    return map_rows(n, [&](Index r) {
      const Index p = panel.prev[r];
      if (p < 0 || !(eq(p) > 0.0) || !(eq(r) + de(r) > 0.0)) return kNaN;
      return adj_equity_growth(eq(r), de(r), eq(p));
    });
  }
  if (starts_with(name, "dln.", rest)) {
    std::string_view pos, neg;
    if (rest == "CF") {
      pos = "SL", neg = "XS";
    } else if (rest == "CA") {
      pos = "SL", neg = "XA";
    } else {
      std::tie(pos, neg) = split_pair(rest, name);
    }
    const VectorXd& yp = panel.column(pos);
    const VectorXd& yn = panel.column(neg);
    return map_rows(n, [&](Index r) {
      const Index p = panel.prev[r];
      if (p < 0 || !std::isfinite(yp(r) + yn(r) + yp(p) + yn(p))) return kNaN;
      try {
        return dln_growth({yp(p), yn(p)}, {yp(r), yn(r)});
      } catch (const Error&) {
        return kNaN;
      }
    });
  }
  if (starts_with(name, "intensity.", rest)) {
    const auto [num, den] = split_pair(rest, name);
    const VectorXd& x = panel.column(num);
    const VectorXd& y = panel.column(den);
    return map_rows(n, [&](Index r) { return y(r) > 0.0 ? x(r) / y(r) : kNaN; });
  }
  throw ConfigError("unknown variable '" + std::string(name) + "'");
}

}  // namespace firmfacts
