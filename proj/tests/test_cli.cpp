#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "firmfacts/cli.hpp"
#include "firmfacts/panel.hpp"
#include "json.hpp"

using namespace firmfacts;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "firmfacts");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "firmfacts_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream f(path);
  return nlohmann::json::parse(f);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

// One synthetic panel shared by the command tests.
const std::string& synth_dir() {
  static const std::string dir = [] {
    const std::string d = scratch("synth");
    const Result r = run_cli({"synth", "--firms", "3000", "--years", "20", "--seed", "4", "--out", d});
    REQUIRE(r.code == 0);
    const Result i = run_cli({"ingest", "--panel", d + "/panel.csv", "--deflators", d + "/deflators.csv", "--out", d});
    REQUIRE(i.code == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("usage and configuration errors") {
  CHECK(run_cli({"--help"}).code == 0);
  const Result none = run_cli({});
  CHECK(none.code == 1);
  CHECK(none.err.rfind("error[E_CONFIG]", 0) == 0);
  CHECK(run_cli({"ingest", "--bogus"}).err.rfind("error[E_CONFIG]", 0) == 0);
  const Result missing = run_cli({"ingest", "--panel", "/nonexistent/panel.csv", "--out", scratch("missing")});
  CHECK(missing.code == 1);
  CHECK(missing.err.rfind("error[E_CONFIG]", 0) == 0);
  CHECK(run_cli({"fit-test", "--panel", synth_dir() + "/store.csv", "--var", "intensity.CF.KT", "--families", "cauchy",
                 "--out", scratch("fam")})
            .err.rfind("error[E_", 0) == 0);
}

TEST_CASE("ingest examples") {
  const std::string d = scratch("ingest");
  std::ofstream(d + "/empty.csv").close();
  const Result e = run_cli({"ingest", "--panel", d + "/empty.csv", "--out", d});
  CHECK(e.code == 1);
  CHECK(e.err.rfind("error[E_SCHEMA]", 0) == 0);
  CHECK(e.err.find("header") != std::string::npos);

  const Result s = run_cli({"synth", "--firms", "100", "--years", "5", "--entry-rate", "0", "--out", d});
  REQUIRE(s.code == 0);
  const Result i = run_cli({"ingest", "--panel", d + "/panel.csv", "--out", d});
  REQUIRE(i.code == 0);
  CHECK(i.out.find("firms 100\n") != std::string::npos);
  CHECK(read_json(d + "/ingest.json")["counts"]["firms"] == 100);

  // one firm pushed under the size cutoff loses exactly its Good rows
  auto raws = read_raw_csv(d + "/panel.csv");
  const Panel orig = build_panel(raws);
  Index lost = 0;
  for (Index r = 0; r < orig.rows(); ++r) lost += orig.firm[r] == "F0000001" && orig.in_subset(r, Subset::Good);
  CHECK(lost > 0);
  for (auto& r : raws)
    if (r.firm_id == "F0000001") r.mve = 0.1, r.lt = 0.1;
  write_raw_csv(d + "/small.csv", raws);
  REQUIRE(run_cli({"ingest", "--panel", d + "/small.csv", "--out", d}).code == 0);
  const auto c = read_json(d + "/ingest.json")["counts"];
  CHECK(c["rows"].get<Index>() == orig.rows());
  CHECK(c["good_rows"].get<Index>() == filter_counts(orig).good_rows - lost);
}

TEST_CASE("fit-test output") {
  const std::string d = scratch("fit");
  const Result r = run_cli({"fit-test", "--panel", synth_dir() + "/store.csv", "--var", "intensity.CF.KT", "--families",
                            "laplace,dln", "--reps", "0", "--out", d});
  REQUIRE(r.code == 0);
  const auto j = read_json(d + "/fit_test.json");
  CHECK(j["schema_version"] == 1);
  CHECK(j["families"].size() == 2);
  for (const auto& f : j["families"]) {
    CHECK(f["pvalues"]["ks"].is_null());
    CHECK(f["statistics"]["ad"].get<double>() >= 0.0);
  }
  for (const auto& e : j["comparison"]) {
    if (e["family"] == "DLN") CHECK(e["rl_aic"] == 1.0);
    if (e["family"] == "Laplace") CHECK(e["rl_aic"].get<double>() < 1e-3);
  }
  CHECK(fs::exists(d + "/histogram.csv"));
  CHECK(fs::exists(d + "/qq.csv"));
  CHECK(run_cli({"fit-test", "--panel", synth_dir() + "/store.csv", "--var", "intensity.CF.KT", "--reps", "10",
                 "--out", d})
            .err.rfind("error[E_CONFIG]", 0) == 0);
}

TEST_CASE("q-q pairs of a self-fitted sample") {
  const std::string d = scratch("qq");
  REQUIRE(run_cli({"synth", "--firms", "5000", "--years", "24", "--seed", "9", "--out", d}).code == 0);
  const Result r = run_cli({"fit-test", "--panel", d + "/panel.csv", "--deflators", d + "/deflators.csv", "--subset",
                            "all", "--var", "intensity.CF.KT", "--families", "dln", "--reps", "0", "--out", d});
  REQUIRE(r.code == 0);
  CHECK(read_json(d + "/fit_test.json")["n"].get<int>() >= 100'000);
  std::ifstream f(d + "/qq.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line == "q,empirical,fitted_DLN");
  double worst = 0.0;
  int rows = 0;
  while (std::getline(f, line)) {
    double q, e, m;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &q, &e, &m) == 3);
    worst = std::max(worst, std::abs(e - m));
    ++rows;
  }
  CHECK(rows == 99);
  CHECK(worst < 0.05);
}

TEST_CASE("adjust examples") {
  const std::string d = scratch("adjust");
  REQUIRE(run_cli({"synth", "--firms", "300", "--years", "1", "--out", d}).code == 0);
  REQUIRE(run_cli({"adjust", "--panel", d + "/panel.csv", "--subset", "all", "--var", "log.KT", "--out", d}).code == 0);
  const Panel p = read_store_csv(d + "/store.csv");
  const VectorXd adj = p.column("adj.log.KT"), raw = resolve_variable(p, "log.KT");
  CHECK((adj - raw).cwiseAbs().maxCoeff() < 1e-12);

  const std::string h = scratch("adjust_both");
  REQUIRE(run_cli({"adjust", "--panel", synth_dir() + "/store.csv", "--var", "dlog.KT", "--mode", "both", "--out", h})
              .code == 0);
  const auto a = read_json(h + "/anchors.json");
  CHECK(std::abs(a["scale"]["b1_dis"].get<double>() + 0.13) < 0.03);
  REQUIRE(run_cli({"binscatter", "--panel", h + "/store.csv", "--var", "adj.dlog.KT", "--out", h}).code == 0);
  CHECK(std::abs(read_json(h + "/binscatter.json")["dispersion_fit"]["slope"].get<double>()) < 0.02);

  const Result bad = run_cli({"adjust", "--panel", synth_dir() + "/store.csv", "--var", "dlog.KT", "--mode", "scale",
                              "--basis", "log.lag.NOPE", "--out", h});
  CHECK(bad.code == 1);
  CHECK(bad.err.rfind("error[E_CONFIG]", 0) == 0);
}

TEST_CASE("binscatter, growth and dynamism tables") {
  const std::string d = scratch("tables");
  REQUIRE(run_cli({"binscatter", "--panel", synth_dir() + "/store.csv", "--var", "log.KT", "--scale", "log.KT",
                   "--out", d})
              .code == 0);
  std::ifstream f(d + "/binscatter.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line.rfind("bin,scale_low,scale_high,scale_median,count,p01", 0) == 0);
  double prev = -1e300;
  int bins = 0;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    const double med = std::stod(cells[8]);
    CHECK(med > prev);
    prev = med;
    ++bins;
  }
  CHECK(bins == 49);

  REQUIRE(run_cli({"growth", "--panel", synth_dir() + "/store.csv", "--out", d}).code == 0);
  const auto g = read_json(d + "/growth.json");
  CHECK(g["variable"] == "dlog.SL");
  CHECK(std::abs(g["moments"]["mean"].get<double>() - 0.076) < 0.01);
  CHECK(fs::exists(d + "/growth_by_year.csv"));

  const std::string im = scratch("immortal");
  REQUIRE(run_cli({"synth", "--firms", "800", "--years", "12", "--hazard", "0", "--entry-rate", "0", "--out", im})
              .code == 0);
  REQUIRE(run_cli({"dynamism", "--panel", im + "/panel.csv", "--subset", "all", "--horizon", "5", "--out", im}).code ==
          0);
  std::ifstream b(im + "/dynamism_bins.csv");
  std::getline(b, line);
  while (std::getline(b, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    CHECK(std::stod(cells[5]) == 0.0);
  }
  CHECK(read_json(im + "/dynamism.json")["pooled_exit_rate"] == 0.0);
}

TEST_CASE("growth with returns and factors") {
  const std::string d = scratch("returns");
  {
    std::ofstream fac(d + "/factors.csv"), ret(d + "/returns.csv");
    fac << "date,mkt_rf,smb,hml,rf\n";
    ret << "firm_id,date,ret\n";
    const std::int64_t d0 = parse_date("2018-01-01");
    unsigned state = 1;
    auto noise = [&] {
      state = state * 1103515245u + 12345u;
      return ((state >> 8) % 2001) / 1000.0 - 1.0;
    };
    for (std::int64_t t = d0; t < d0 + 500; ++t) {
      const double m = 0.01 * noise(), s = 0.005 * noise(), h = 0.005 * noise();
      fac << format_date(t) << ',' << m << ',' << s << ',' << h << ",0.0001\n";
      ret << "F1," << format_date(t) << ',' << 0.0001 + 1.5 * m << '\n';
    }
  }
  const Result r = run_cli({"growth", "--panel", synth_dir() + "/store.csv", "--factors", d + "/factors.csv",
                            "--returns", d + "/returns.csv", "--out", d});
  REQUIRE(r.code == 0);
  const auto g = read_json(d + "/growth.json");
  CHECK(g["excess_returns"]["rows"].get<int>() > 100);
  CHECK(g["excess_returns"]["skipped"].get<int>() > 300);
  CHECK(std::abs(g["excess_returns"]["moments"]["mean"].get<double>()) < 1e-6);
  CHECK(run_cli({"growth", "--panel", synth_dir() + "/store.csv", "--factors", d + "/factors.csv", "--out", d})
            .err.rfind("error[E_CONFIG]", 0) == 0);
}

TEST_CASE("report") {
  const std::string d = scratch("report");
  REQUIRE(run_cli({"report", "--panel", synth_dir() + "/store.csv", "--var", "intensity.CF.KT", "--families",
                   "normal,laplace,dln", "--out", d})
              .code == 0);
  const auto j = read_json(d + "/report.json");
  CHECK(j["variable"]["scaling_slope_median"].is_number());
  CHECK(j["comparison"].size() == 3);
}

TEST_CASE("reruns are byte-identical") {
  const std::string a = scratch("det_a"), b = scratch("det_b");
  for (const auto& d : {a, b}) {
    REQUIRE(run_cli({"synth", "--firms", "300", "--years", "10", "--seed", "12", "--out", d}).code == 0);
    REQUIRE(run_cli({"fit-test", "--panel", d + "/panel.csv", "--var", "intensity.CF.KT", "--families", "normal,laplace",
                     "--reps", "200", "--seed", "3", "--out", d})
                .code == 0);
  }
  for (const char* name : {"panel.csv", "deflators.csv", "truth.json", "fit_test.json", "histogram.csv", "qq.csv"})
    CHECK(slurp(a + "/" + name) == slurp(b + "/" + name));
}
