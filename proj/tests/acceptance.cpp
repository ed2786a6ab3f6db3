// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance <cli binary> <scenarios dir>
//
// Exits nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "sheaf_goodwin/dynamics/area.hpp"
#include "sheaf_goodwin/dynamics/sweep.hpp"
#include "sheaf_goodwin/io/format.hpp"
#include "sheaf_goodwin/io/scenario.hpp"
#include "sheaf_goodwin/models/lotka_volterra.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace sheaf_goodwin;
using testsupport::uniform;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

fs::path g_cli;
fs::path g_scenarios;

// 1. Closed-form Goodwin point has zero residual.
Outcome equilibrium_closed_forms() {
  Rng rng(101);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const GoodwinParams g = testsupport::random_goodwin_params(rng);
    const auto r = goodwin_rhs({(g.alpha + g.gamma) / g.rho, 1 - g.sigma * (g.alpha + g.beta)}, g);
    worst = std::max({worst, std::abs(r[0]), std::abs(r[1])});
  }
  return {worst < 1e-12, "max residual " + sci(worst) + " over 1000 parameter sets"};
}

// 2. Zero trace at the Goodwin point; LV det = ac and tr = 0 exactly.
Outcome conservativity() {
  Rng rng(102);
  double worst_tr = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const GoodwinParams g = testsupport::random_goodwin_params(rng);
    worst_tr = std::max(worst_tr, std::abs(goodwin_jacobian({g.v_star(), g.u_star()}, g).trace()));
  }
  bool lv_exact = true;
  for (const LVParams p : {LVParams{}, LVParams{2, 4, 3, 6}, LVParams{0.5, 0.25, 1.5, 0.75}}) {
    const Matrix J = lv_jacobian({p.c / p.d, p.a / p.b}, p);
    lv_exact = lv_exact && J.trace() == 0.0 && J.determinant() == p.a * p.c;
  }
  return {worst_tr < 1e-12 && lv_exact,
          "Goodwin max |tr| " + sci(worst_tr) + "; LV det=ac, tr=0 " + (lv_exact ? "exact" : "NOT exact")};
}

// 3. LV log-form integral drift and its order in dt.
Outcome first_integral() {
  const LVParams p;
  const auto m = make_lv_model(p);
  auto F = [&](const State& x) { return lv_first_integral({x[0], x[1]}, p); };
  const double drift = conservation_report(integrate(m, {2.0, 1.0}, 100.0, 1e-3), F).relative_drift;
  std::vector<double> lx, ly;
  for (double dt : {0.08, 0.04, 0.02, 0.01}) {
    lx.push_back(std::log(dt));
    ly.push_back(std::log(conservation_report(integrate(m, {2.0, 1.0}, 100.0, dt), F).max_drift));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
  const double slope = sxy / sxx;
  return {drift < 1e-6 && slope >= 3.5 && slope <= 4.5,
          "relative drift " + sci(drift) + " at dt=1e-3; exponent " + sci(slope)};
}

// 4. Small-orbit period against the closed form, by v-crossing timing.
Outcome period_formula() {
  Rng rng(104);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const GoodwinParams g = testsupport::random_goodwin_params(rng);
    const double T = goodwin_period(g);
    const auto tr = integrate(make_goodwin_model(g), {g.v_star() + 1e-4, g.u_star()}, 4 * T, T / 4000);
    std::vector<double> up;
    for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
      const double a = tr.states[i][0] - g.v_star(), b = tr.states[i + 1][0] - g.v_star();
      if (a < 0 && b >= 0) up.push_back(tr.t[i] + (tr.t[i + 1] - tr.t[i]) * (-a / (b - a)));
    }
    if (up.size() < 2) return {false, "fewer than two crossings for parameter set " + std::to_string(k)};
    const double measured = (up.back() - up.front()) / static_cast<double>(up.size() - 1);
    worst = std::max(worst, std::abs(measured / T - 1));
  }
  return {worst < 0.01, "max relative period error " + sci(worst) + " over 10 parameter sets"};
}

// 5. Price-adjustment eigenvalues and excess demand at E.
Outcome price_adjustment() {
  Rng rng(105);
  double worst_ev = 0.0, worst_ed = 0.0;
  for (int k = 0; k < 1000; ++k) {
    TradeModelParams p;
    p.country1.goodwin = testsupport::random_goodwin_params(rng);
    p.country2.goodwin = testsupport::random_goodwin_params(rng);
    p.country1.theta = uniform(rng, 0.05, 0.95);
    p.country2.theta = uniform(rng, 0.05, 0.95);
    p.country1.a_prod = uniform(rng, 0.5, 2), p.country2.a_prod = uniform(rng, 0.5, 2);
    p.country1.N = uniform(rng, 0.5, 2), p.country2.N = uniform(rng, 0.5, 2);
    const TradeState s{uniform(rng, 0.1, 1), uniform(rng, 0.1, 1), uniform(rng, 0.5, 2),
                       uniform(rng, 0.1, 1), uniform(rng, 0.1, 1), uniform(rng, 0.5, 2)};
    const auto& c1 = p.country1;
    const auto& c2 = p.country2;
    const double expect = -((1 - c1.theta) * c1.a_prod * s[kU1] * s[kV1] * c1.N +
                            (1 - c2.theta) * c2.a_prod * s[kU2] * s[kV2] * c2.N);
    Eigen::EigenSolver<Matrix> es(price_adjustment_matrix(s, p), false);
    std::array<double, 2> ev{es.eigenvalues()[0].real(), es.eigenvalues()[1].real()};
    std::sort(ev.begin(), ev.end());
    worst_ev = std::max({worst_ev, std::abs(ev[0] - expect), std::abs(ev[1]),
                         std::abs(es.eigenvalues()[0].imag()), std::abs(es.eigenvalues()[1].imag())});
    // E balances trade for a common home bias.
    TradeModelParams q = p;
    q.country2.theta = q.country1.theta;
    worst_ed = std::max(worst_ed, std::abs(price_excess_demand_rhs(short_run_price_equilibrium(s, q), s, q)[0]));
  }
  return {worst_ev < 1e-10 && worst_ed < 1e-10,
          "max eigenvalue error " + sci(worst_ev) + "; max excess demand at E " + sci(worst_ed)};
}

// 6. Sections of both sheaves against brute-force solution sets.
Outcome sections_solutions() {
  Rng rng(106);
  int systems = 0;
  for (int k = 0; k < 60; ++k) {
    const auto f = testsupport::random_finite_system(rng, true);
    const auto expect = testsupport::brute_force_solutions(f);
    if (testsupport::variable_parts(f.sys, enumerate_sections(build_solution_sheaf(f.sys))) != expect ||
        testsupport::variable_parts(f.sys, enumerate_sections(build_explicit_solution_sheaf(f.sys))) != expect)
      return {false, "mismatch on explicit system " + std::to_string(k)};
    ++systems;
  }
  for (int k = 0; k < 60; ++k) {
    const auto f = testsupport::random_finite_system(rng, false);
    if (testsupport::variable_parts(f.sys, enumerate_sections(build_solution_sheaf(f.sys))) !=
        testsupport::brute_force_solutions(f))
      return {false, "mismatch on relational system " + std::to_string(k)};
    ++systems;
  }
  return {true, std::to_string(systems) + " random finite systems match (explicit ones through both sheaves)"};
}

// 7. Degrees of freedom of the sub-diagrams.
Outcome dof_counts() {
  const auto sys = two_country_system({});
  const int c = degrees_of_freedom(sub_diagram(sys, subsystem_equations(ModelKind::two_country, "country1")));
  const int p = degrees_of_freedom(sub_diagram(sys, subsystem_equations(ModelKind::two_country, "price")));
  return {c == 3 && p == 6, "country " + std::to_string(c) + ", price " + std::to_string(p)};
}

// 8. Diagram chase on the full scenario, structural then numeric.
Outcome diagram_chase() {
  const Scenario st = read_scenario(Config::load((g_scenarios / "stage3_country_two.ini").string()));
  const EquationSystem sys = st.system();
  const auto rs = extend_local_section(sys, st.asserted, ExtensionMode::structural);
  const std::size_t known = rs.asserted.size() + rs.determined.size();
  const bool all = rs.still_free.empty() && known == sys.variables().size();

  const Scenario nu = read_scenario(Config::load((g_scenarios / "stage3_numeric.ini").string()));
  const auto rn = extend_local_section(nu.system(), nu.asserted, ExtensionMode::numeric);
  bool amb_ok = false;
  std::string amb = "no ambiguity reported";
  for (const auto& a : rn.ambiguities) {
    if (a.witnesses.size() < 2 || a.witnesses[0] == a.witnesses[1]) continue;
    const double r = *std::max_element(a.witness_residuals.begin(), a.witness_residuals.end());
    const auto& w0 = a.witnesses[0];
    const auto& w1 = a.witnesses[1];
    const bool product = w0.contains("country2.u") && w0.contains("country2.v") && w1.contains("country2.u") &&
                         w1.contains("country2.v");
    if (!product) continue;
    const double p0 = w0.at("country2.u")[0] * w0.at("country2.v")[0];
    const double p1 = w1.at("country2.u")[0] * w1.at("country2.v")[0];
    amb_ok = r < 1e-9 && std::abs(p0 - p1) < 1e-9;
    amb = "u2 v2 ambiguity, witnesses (" + sci(w0.at("country2.u")[0]) + ", " + sci(w0.at("country2.v")[0]) + ") and (" +
          sci(w1.at("country2.u")[0]) + ", " + sci(w1.at("country2.v")[0]) + "), max residual " + sci(r);
    break;
  }
  return {all && amb_ok, "structural determines " + std::to_string(known) + "/" + std::to_string(sys.variables().size()) +
                             " variables; " + amb};
}

// 9. Regime interleaving over the sigma2 sweep.
Outcome sigma_sweep() {
  const Config cfg = Config::load((g_scenarios / "two_country.ini").string());
  const std::string param = cfg.get("sweep", "parameter");
  const auto grid = make_grid(cfg.number("sweep", "lo"), cfg.number("sweep", "hi"), cfg.number("sweep", "step"));
  const ModelSpec base = read_model_spec(cfg);
  ClassifyOptions opts = read_classify_options(cfg, base.seed);
  opts.lyapunov.horizon = 5000;
  opts.lyapunov.dt = 1e-3;
  auto make_case = [&](double value) {
    Config c = cfg;
    c.set("params", param, format_double(value));
    const ModelSpec s = read_model_spec(c);
    return std::pair{s.model(), s.initial};
  };
  const auto rows = run_sweep(grid, make_case, opts, std::max(1u, std::thread::hardware_concurrency()));
  int chaotic = 0, regular = 0, other = 0, truncated = 0;
  double lmin = INFINITY, lmax = -INFINITY;
  for (const auto& r : rows) {
    if (r.truncated) {
      ++truncated;
      continue;
    }
    const auto& v = r.verdict;
    lmin = std::min(lmin, v.lyapunov);
    lmax = std::max(lmax, v.lyapunov);
    if (v.kind == DynamicsKind::chaotic && v.lyapunov > kChaosThreshold) ++chaotic;
    else if (v.lyapunov <= kZeroBand && (v.kind == DynamicsKind::limit_cycle || v.kind == DynamicsKind::fixed_point))
      ++regular;
    else ++other;
  }
  std::ostringstream d;
  d << rows.size() << " points over " << param << " in [" << grid.front() << ", " << grid.back() << "]: " << chaotic
    << " chaotic, " << regular << " cycle/fixed-point, " << other << " undetermined, " << truncated
    << " truncated; lambda in [" << sci(lmin) << ", " << sci(lmax) << "]";
  return {chaotic >= 1 && regular >= 1, d.str()};
}

// 10. Triangle area: preserved by Goodwin, shrinking under the modified curve.
Outcome area_test() {
  const GoodwinParams g;
  const double T = goodwin_period(g);
  const State c{g.v_star() + 0.02, g.u_star()};
  const std::array<State, 3> tri{c, State{c[0] + 1e-4, c[1]}, State{c[0], c[1] + 1e-4}};
  const auto a = triangle_area_history(make_goodwin_model(g), tri, T, 1e-3, 1);
  const double change = std::abs(a[1] / a[0] - 1);
  const auto b = triangle_area_history(make_modified_goodwin_model(g, PhillipsShift::linear(0.05)), tri, T, 1e-3, 20);
  bool monotone = true;
  for (std::size_t i = 1; i < b.size(); ++i) monotone = monotone && b[i] < b[i - 1];
  return {change < 0.01 && monotone, "Goodwin area change " + sci(change) + " over one period; modified " +
                                         (monotone ? "shrinks monotonically" : "does NOT shrink monotonically") +
                                         " to " + sci(b.back() / b.front()) + " of the initial area"};
}

// 11. Every CLI subcommand twice with a fixed seed, outputs compared byte for byte.
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  const fs::path work = fs::temp_directory_path() / ("sheaf_goodwin_accept_" + std::to_string(::getpid()));
  fs::remove_all(work);
  const std::string cli = "\"" + g_cli.string() + "\"";
  auto sc = [](const char* f) { return "\"" + (g_scenarios / f).string() + "\""; };
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"simulate", "simulate --model " + sc("goodwin.ini") + " --seed 7 --out OUT"},
      {"simulate-trade", "simulate --model " + sc("two_country.ini") + " --seed 7 --t-end 50 --out OUT"},
      {"equilibria", "equilibria --model " + sc("two_country.ini") + " --seed 7 --out OUT/eq.json"},
      {"equilibria-vadasz", "equilibria --model " + sc("vadasz.ini") + " --seed 7 --out OUT/eq.json"},
      {"classify", "classify --model " + sc("goodwin.ini") + " --seed 7 --horizon 300 --dt 1e-2 --out OUT/c.json"},
      {"sweep", "sweep --model " + sc("two_country.ini") +
                    " --seed 7 --lo 2 --hi 2.4 --step 0.2 --horizon 200 --dt 1e-2 --jobs 2 --out OUT/s.csv"},
      {"graph", "graph --model " + sc("two_country.ini") + " --seed 7 --subsystem price --out OUT"},
      {"extend", "extend --scenario " + sc("stage3_numeric.ini") + " --format json --out OUT/x.json"},
      {"extend-table", "extend --scenario " + sc("stage2_price_system.ini") + " --out OUT/x.txt"},
  };
  std::size_t files = 0;
  for (const auto& [name, args] : cmds) {
    std::vector<fs::path> dirs;
    for (int run = 0; run < 2; ++run) {
      const fs::path out = work / name / std::to_string(run);
      fs::create_directories(out);
      std::string a = args;
      for (auto pos = a.find("OUT"); pos != std::string::npos; pos = a.find("OUT", pos)) {
        a.replace(pos, 3, "\"" + out.string() + "\"");
        pos += out.string().size() + 2;
      }
      // OUT/file becomes "dir"/file, which the shell joins back
      const std::string cmd = cli + " " + a + " > \"" + (out / "stdout.txt").string() + "\" 2> \"" +
                              (out / "stderr.txt").string() + "\"";
      if (std::system(cmd.c_str()) != 0) return {false, name + " exited nonzero: " + slurp(out / "stderr.txt")};
      dirs.push_back(out);
    }
    std::set<std::string> n0, n1;
    for (const auto& e : fs::directory_iterator(dirs[0])) n0.insert(e.path().filename().string());
    for (const auto& e : fs::directory_iterator(dirs[1])) n1.insert(e.path().filename().string());
    if (n0 != n1) return {false, name + " produced different file sets"};
    for (const auto& f : n0) {
      if (slurp(dirs[0] / f) != slurp(dirs[1] / f)) return {false, name + ": " + f + " differs between runs"};
      ++files;
    }
  }
  fs::remove_all(work);
  return {true, std::to_string(cmds.size()) + " invocations, " + std::to_string(files) + " output files identical"};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  ///< <= 0 means no runtime limit
  std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <cli binary> <scenarios dir>\n";
    return 2;
  }
  g_cli = fs::absolute(argv[1]);
  g_scenarios = fs::absolute(argv[2]);
  ::unsetenv("SHEAF_GOODWIN_SEED");

  const std::vector<Criterion> criteria = {
      {1, "equilibrium closed forms", 1, equilibrium_closed_forms},
      {2, "conservativity", 1, conservativity},
      {3, "first-integral conservation", 10, first_integral},
      {4, "period formula", 30, period_formula},
      {5, "price-adjustment eigenvalues and excess demand at E", 1, price_adjustment},
      {6, "sections match solutions", 5, sections_solutions},
      {7, "degrees of freedom", 0, dof_counts},
      {8, "diagram chase", 1, diagram_chase},
      {9, "sigma2 sweep regime interleaving", 600, sigma_sweep},
      {10, "area test", 30, area_test},
      {11, "CLI determinism", 0, cli_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) {
      o.pass = false;
      o.detail += "; over the " + sci(c.limit_s) + " s limit";
    }
    char t[32];
    std::snprintf(t, sizeof t, "%.2f s", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " (" << o.detail << "; " << t
              << ")" << std::endl;
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
