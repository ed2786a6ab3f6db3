// sheaf_goodwin: command-line front end for the model, dynamics and
// sheaf/section library.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sheaf_goodwin/dynamics/classify.hpp"
#include "sheaf_goodwin/dynamics/integrate.hpp"
#include "sheaf_goodwin/dynamics/sweep.hpp"
#include "sheaf_goodwin/equation_system.hpp"
#include "sheaf_goodwin/io/config.hpp"
#include "sheaf_goodwin/io/model_file.hpp"
#include "sheaf_goodwin/io/output.hpp"
#include "sheaf_goodwin/io/scenario.hpp"
#include "sheaf_goodwin/sections/report.hpp"

namespace sg = sheaf_goodwin;

namespace {

struct Common {
  std::string model_path;
  std::vector<std::string> overrides;  // section.key=value
  std::optional<std::uint64_t> seed;
  std::string out;
};

// `section.key=value`; the key itself may contain dots (country1.alpha), so
// the first dot separates the section.
void apply_overrides(sg::Config& c, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw sg::ConfigError("override '" + o + "' is not of the form section.key=value");
    c.set(o.substr(0, dot), o.substr(dot + 1, eq - dot - 1), o.substr(eq + 1));
  }
}

// Config seed, then --seed, then SHEAF_GOODWIN_SEED.
std::uint64_t resolve_seed(std::uint64_t from_config, const std::optional<std::uint64_t>& flag) {
  std::uint64_t seed = flag ? *flag : from_config;
  if (const char* env = std::getenv("SHEAF_GOODWIN_SEED"); env && *env) {
    const std::string s = env;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw sg::ConfigError("SHEAF_GOODWIN_SEED must be a non-negative integer, got '" + s + "'");
    seed = v;
  }
  return seed;
}

sg::Config load_config(const Common& c) {
  sg::Config cfg = sg::Config::load(c.model_path);
  apply_overrides(cfg, c.overrides);
  return cfg;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw sg::Error("cannot write '" + p.string() + "'");
  f << text;
  if (!f) throw sg::Error("write failed for '" + p.string() + "'");
}

// stdout when `out` is empty.
void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

sg::Json model_header(const sg::ModelSpec& spec, const sg::DynamicalModel& m, std::uint64_t seed) {
  sg::Json j;
  j["model"] = m.name;
  j["params_hash"] = m.params_hash;
  j["seed"] = seed;
  if (spec.kind == sg::ModelKind::two_country) j["price_mode"] = sg::to_string(spec.trade.price_mode);
  return j;
}

void add_common(CLI::App* sub, Common& c, bool needs_model = true) {
  if (needs_model) sub->add_option("--model", c.model_path, "model file")->required()->check(CLI::ExistingFile);
  sub->add_option("--set", c.overrides, "override a file value, section.key=value (repeatable)");
  sub->add_option("--seed", c.seed, "random seed (SHEAF_GOODWIN_SEED takes precedence)");
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::optional<double> t_end, dt;
  std::optional<std::size_t> stride;
  std::optional<std::string> price_mode;
};

int cmd_simulate(const SimulateArgs& a) {
  sg::Config cfg = load_config(a.common);
  if (a.price_mode) cfg.set("trade", "price_mode", *a.price_mode);
  const sg::ModelSpec spec = sg::read_model_spec(cfg);
  const std::uint64_t seed = resolve_seed(spec.seed, a.common.seed);
  const double t_end = a.t_end ? *a.t_end : cfg.number_or("simulate", "t_end", 100.0);
  const double dt = a.dt ? *a.dt : cfg.number_or("simulate", "dt", 1e-3);
  const double stride_cfg = cfg.number_or("simulate", "stride", 1.0);
  if (!(stride_cfg >= 1)) throw sg::ConfigError("'simulate.stride' must be >= 1");
  const std::size_t stride = a.stride ? *a.stride : static_cast<std::size_t>(stride_cfg);

  const sg::DynamicalModel m = spec.model();
  const sg::Trajectory tr = sg::integrate(m, spec.initial, t_end, dt, {stride, 0.0});

  sg::ClassifyOptions opts = sg::read_classify_options(cfg, seed);
  opts.lyapunov.horizon = t_end;
  opts.lyapunov.dt = dt;
  const sg::DynamicsVerdict v = sg::classify_dynamics(m, spec.initial, opts);

  const std::filesystem::path dir = a.common.out.empty() ? std::filesystem::path(".") : std::filesystem::path(a.common.out);
  std::ostringstream csv;
  sg::write_trajectory_csv(csv, tr, m.state_names);
  write_text(dir / "trajectory.csv", csv.str());
  sg::Json j = model_header(spec, m, seed);
  j["t_end"] = t_end;
  j["dt"] = dt;
  j["rows"] = tr.size();
  j["verdict"] = sg::to_json(v);
  write_text(dir / "verdict.json", j.dump(2) + "\n");
  return 0;
}

int cmd_equilibria(const Common& c) {
  const sg::Config cfg = load_config(c);
  const sg::ModelSpec spec = sg::read_model_spec(cfg);
  const std::uint64_t seed = resolve_seed(spec.seed, c.seed);
  const sg::DynamicalModel m = spec.model();
  sg::Json j = model_header(spec, m, seed);
  j["fixed_points"] = sg::Json::array();
  for (const auto& fp : spec.equilibria()) j["fixed_points"].push_back(sg::to_json(fp, m.state_names));
  emit(c.out, j.dump(2) + "\n");
  return 0;
}

struct ClassifyArgs {
  Common common;
  std::optional<double> horizon, dt;
};

int cmd_classify(const ClassifyArgs& a) {
  const sg::Config cfg = load_config(a.common);
  const sg::ModelSpec spec = sg::read_model_spec(cfg);
  const std::uint64_t seed = resolve_seed(spec.seed, a.common.seed);
  sg::ClassifyOptions opts = sg::read_classify_options(cfg, seed);
  if (a.horizon) opts.lyapunov.horizon = *a.horizon;
  if (a.dt) opts.lyapunov.dt = *a.dt;
  const sg::DynamicalModel m = spec.model();
  sg::Json j = model_header(spec, m, seed);
  j["horizon"] = opts.lyapunov.horizon;
  j["dt"] = opts.lyapunov.dt;
  j["verdict"] = sg::to_json(sg::classify_dynamics(m, spec.initial, opts));
  emit(a.common.out, j.dump(2) + "\n");
  return 0;
}

struct SweepArgs {
  Common common;
  std::optional<std::string> param;
  std::optional<double> lo, hi, step, horizon, dt;
  unsigned jobs = 1;
};

int cmd_sweep(const SweepArgs& a) {
  const sg::Config cfg = load_config(a.common);
  const sg::ModelSpec base = sg::read_model_spec(cfg);  // fails early on a bad file
  const std::uint64_t seed = resolve_seed(base.seed, a.common.seed);
  const std::string param = a.param ? *a.param : cfg.get("sweep", "parameter");
  if (!cfg.has("params", param)) throw sg::MissingKeyError("params." + param);
  const double lo = a.lo ? *a.lo : cfg.number("sweep", "lo");
  const double hi = a.hi ? *a.hi : cfg.number("sweep", "hi");
  const double step = a.step ? *a.step : cfg.number_or("sweep", "step", 0.1);
  sg::ClassifyOptions opts = sg::read_classify_options(cfg, seed);
  if (a.horizon) opts.lyapunov.horizon = *a.horizon;
  if (a.dt) opts.lyapunov.dt = *a.dt;

  const auto grid = sg::make_grid(lo, hi, step);
  auto make_case = [&cfg, &param](double value) {
    sg::Config c = cfg;
    c.set("params", param, sg::format_double(value));
    const sg::ModelSpec s = sg::read_model_spec(c);
    return std::pair{s.model(), s.initial};
  };
  const auto rows = sg::run_sweep(grid, make_case, opts, a.jobs);
  std::ostringstream os;
  sg::write_sweep_csv(os, param, rows);
  emit(a.common.out, os.str());
  for (const auto& r : rows)
    if (r.truncated) std::cerr << "note: " << param << " = " << sg::format_double(r.value, 12) << " truncated: " << r.message << "\n";
  return 0;
}

struct GraphArgs {
  Common common;
  std::optional<std::string> subsystem;
  std::string form = "as-printed";
};

int cmd_graph(const GraphArgs& a) {
  const sg::Config cfg = load_config(a.common);
  const sg::ModelSpec spec = sg::read_model_spec(cfg);
  const sg::EquationSystem sys = spec.system(sg::parse_price_form(a.form));
  const std::filesystem::path dir = a.common.out.empty() ? std::filesystem::path(".") : std::filesystem::path(a.common.out);
  const std::string name = sg::to_string(spec.kind);

  write_text(dir / "dependency.dot", sg::dependency_graph(sys, true).to_dot(name + ".dependency"));
  write_text(dir / "dependency_expanded.dot", sg::dependency_graph(sys, false).to_dot(name + ".dependency_expanded"));
  const sg::Sheaf sheaf = sg::build_explicit_solution_sheaf(sys);
  write_text(dir / "sheaf.dot", sg::to_dot(sheaf, name + ".sheaf"));
  if (a.subsystem) {
    const auto ids = sg::subsystem_equations(spec.kind, *a.subsystem);
    sg::DotCluster cluster{*a.subsystem, {}};
    for (const auto& v : sg::sub_diagram(sys, ids).variables) cluster.members.push_back(v);
    cluster.members.insert(cluster.members.end(), ids.begin(), ids.end());
    write_text(dir / ("sheaf_" + *a.subsystem + ".dot"), sg::to_dot(sheaf, name + ".sheaf." + *a.subsystem, cluster));
  }
  return 0;
}

struct ExtendArgs {
  std::string scenario;
  std::optional<std::string> mode;
  std::string format = "table";
  std::string out;
};

int cmd_extend(const ExtendArgs& a) {
  sg::Config cfg = sg::Config::load(a.scenario);
  if (a.mode) cfg.set("assert", "mode", *a.mode);
  const sg::Scenario sc = sg::read_scenario(cfg);
  const sg::ExtensionResult r = sg::extend_local_section(sc.system(), sc.asserted, sc.mode);
  const sg::ExtensionReport rep = sg::section_report(r);
  if (a.format == "json") {
    sg::Json j;
    j["scenario"] = std::filesystem::path(a.scenario).filename().string();
    j["form"] = sg::to_string(sc.form);
    j["scope"] = sc.scope;
    for (const auto& [k, v] : rep.json.items()) j[k] = v;
    emit(a.out, j.dump(2) + "\n");
  } else {
    emit(a.out, rep.table);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goodwin-family models, dynamics classification and sheaf section analysis"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "integrate a model; writes trajectory.csv and verdict.json");
  add_common(s_sim, sim.common);
  s_sim->add_option("--t-end", sim.t_end, "end time");
  s_sim->add_option("--dt", sim.dt, "RK4 step");
  s_sim->add_option("--stride", sim.stride, "store every n-th step");
  s_sim->add_option("--price-mode", sim.price_mode, "algebraic-equilibrium or excess-demand-ode");
  s_sim->add_option("--out", sim.common.out, "output directory (default .)");

  Common eq;
  auto* s_eq = app.add_subcommand("equilibria", "fixed points as JSON");
  add_common(s_eq, eq);
  s_eq->add_option("--out", eq.out, "output file (default stdout)");

  ClassifyArgs cl;
  auto* s_cl = app.add_subcommand("classify", "dynamics verdict as JSON");
  add_common(s_cl, cl.common);
  s_cl->add_option("--horizon", cl.horizon, "integration horizon");
  s_cl->add_option("--dt", cl.dt, "RK4 step");
  s_cl->add_option("--out", cl.common.out, "output file (default stdout)");

  SweepArgs sw;
  auto* s_sw = app.add_subcommand("sweep", "classify over a parameter grid; CSV");
  add_common(s_sw, sw.common);
  s_sw->add_option("--param", sw.param, "[params] key to vary");
  s_sw->add_option("--lo", sw.lo, "grid start");
  s_sw->add_option("--hi", sw.hi, "grid end (inclusive)");
  s_sw->add_option("--step", sw.step, "grid step");
  s_sw->add_option("--horizon", sw.horizon, "integration horizon");
  s_sw->add_option("--dt", sw.dt, "RK4 step");
  s_sw->add_option("--jobs", sw.jobs, "worker threads")->check(CLI::PositiveNumber);
  s_sw->add_option("--out", sw.common.out, "output file (default stdout)");

  GraphArgs gr;
  auto* s_gr = app.add_subcommand("graph", "dependency graphs and sheaf diagram as DOT");
  add_common(s_gr, gr.common);
  s_gr->add_option("--subsystem", gr.subsystem, "box a sub-diagram: country1, price or country2");
  s_gr->add_option("--form", gr.form, "price equations: as-printed or excess-demand");
  s_gr->add_option("--out", gr.common.out, "output directory (default .)");

  ExtendArgs ex;
  auto* s_ex = app.add_subcommand("extend", "extend a local section from a scenario file");
  s_ex->add_option("--scenario", ex.scenario, "scenario file")->required()->check(CLI::ExistingFile);
  s_ex->add_option("--mode", ex.mode, "structural or numeric (overrides the file)");
  s_ex->add_option("--format", ex.format, "table or json")->check(CLI::IsMember({"table", "json"}));
  s_ex->add_option("--out", ex.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*s_sim) return cmd_simulate(sim);
    if (*s_eq) return cmd_equilibria(eq);
    if (*s_cl) return cmd_classify(cl);
    if (*s_sw) return cmd_sweep(sw);
    if (*s_gr) return cmd_graph(gr);
    if (*s_ex) return cmd_extend(ex);
  } catch (const sg::MissingKeyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sg::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
