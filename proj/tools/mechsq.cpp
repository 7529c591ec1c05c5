// mechsq: command-line front end. See README.md for the scenario format.

#include "mechsq/runner.hpp"
#include "mechsq/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace {

using namespace mechsq;

struct Options {
  std::string config;
  std::string out;
  std::string format;
  bool reduced = false;
  bool thermal_bath = false;
  bool dump_config = false;
};

void write_to(const std::string& path, const std::function<void(std::ostream&)>& emit) {
  if (path.empty() || path == "-") {
    emit(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cli", "cannot write '" + path + "'");
  emit(f);
  if (!f) throw ConfigError("cli", "write to '" + path + "' failed");
}

/// Loads the scenario for a subcommand and applies the command-line flags.
Scenario prepare(const std::string& command, const std::set<Kind>& allowed, Kind fallback, const Options& o) {
  Scenario sc;
  if (!o.config.empty()) {
    sc = load_scenario(o.config);
    if (!allowed.contains(sc.kind))
      throw ConfigError("cli", fmt::format("scenario kind '{}' cannot run under '{}'", to_string(sc.kind), command));
  } else {
    sc.kind = fallback;
  }
  if (o.reduced) {
    if (sc.kind != Kind::Simulate && sc.kind != Kind::SimulateReduced)
      throw ConfigError("cli", "--reduced applies to simulate only");
    sc.kind = Kind::SimulateReduced;
  }
  if (o.thermal_bath) sc.thermal_bath = true;
  if (!o.format.empty()) sc.output_format = o.format;
  validate_scenario(sc);
  return sc;
}

int execute(const Scenario& sc, const Options& o) {
  if (o.dump_config) {
    write_to(o.out, [&](std::ostream& s) { s << dump_scenario(sc); });
    return 0;
  }
  const RunResult res = run_scenario(sc);
  const std::string path = !o.out.empty() ? o.out : sc.output_path;
  write_to(path, [&](std::ostream& s) { write_result(res, sc, sc.output_format, s); });
  if (res.failure) throw NumericError("dynamics", *res.failure);
  return 0;
}

int run_recipes(bool list, const std::string& dump, const std::vector<std::string>& run, const std::string& out_dir,
                const std::string& write_dir) {
  const auto recipes = figure_recipes();
  auto find = [&](const std::string& name) -> const Scenario& {
    for (const auto& r : recipes)
      if (r.name == name) return r;
    throw ConfigError("cli", "unknown recipe '" + name + "'");
  };
  if (list)
    for (const auto& r : recipes) std::cout << r.name << "\t" << to_string(r.kind) << "\n";
  if (!dump.empty()) std::cout << dump_scenario(find(dump));
  if (!write_dir.empty()) {
    std::filesystem::create_directories(write_dir);
    for (const auto& r : recipes)
      write_to((std::filesystem::path(write_dir) / (r.name + ".json")).string(),
               [&](std::ostream& s) { s << dump_scenario(r); });
  }
  if (!run.empty()) {
    const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
    std::filesystem::create_directories(dir);
    std::vector<const Scenario*> todo;
    for (const auto& name : run) {
      if (name == "all")
        for (const auto& r : recipes) todo.push_back(&r);
      else
        todo.push_back(&find(name));
    }
    for (const Scenario* r : todo) {
      const RunResult res = run_scenario(*r);
      const auto path = (dir / r->output_path).string();
      write_to(path, [&](std::ostream& s) { write_result(res, *r, r->output_format, s); });
      std::cerr << "wrote " << path << "\n";
      if (res.failure) throw NumericError("dynamics", r->name + ": " + *res.failure);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mechsq: mechanical squeezing by dynamical instability"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "scenario file (JSON)");
    if (config_required) c->required();
    c->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output path (default: scenario output.path, else stdout)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--dump-config", o.dump_config, "print the effective scenario and exit");
  };

  struct Command {
    std::set<Kind> kinds;
    Kind fallback;
    bool config_required;
  };
  const std::map<std::string, Command> commands{
      {"simulate", {{Kind::Simulate, Kind::SimulateReduced}, Kind::Simulate, true}},
      {"normalform", {{Kind::NormalForm}, Kind::NormalForm, true}},
      {"wigner", {{Kind::Wigner}, Kind::Wigner, true}},
      {"map", {{Kind::StabilityMap, Kind::SqueezingMap}, Kind::StabilityMap, true}},
      {"sweep", {{Kind::Feasibility}, Kind::Feasibility, true}},
      {"optimize", {{Kind::Optimize}, Kind::Optimize, true}},
      {"rates", {{Kind::Rates, Kind::Optimize, Kind::Feasibility}, Kind::Rates, false}},
  };
  const std::map<std::string, std::string> help{
      {"simulate", "exact Gaussian moment evolution (or the reduced model with --reduced)"},
      {"normalform", "normal form of the unstable dynamics"},
      {"wigner", "mechanical Wigner function on a grid"},
      {"map", "stability or squeezing map"},
      {"sweep", "feasibility sweep over cavity length"},
      {"optimize", "optimal detuning"},
      {"rates", "model rates of a coherent-scattering setup"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, cmd] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    add_common(sub, cmd.config_required);
    if (name == "simulate") {
      sub->add_flag("--reduced", o.reduced, "use the reduced normal-mode model");
      sub->add_flag("--thermal-bath", o.thermal_bath, "use the thermal mechanical dissipator");
    }
    if (name == "wigner") sub->add_flag("--thermal-bath", o.thermal_bath, "use the thermal mechanical dissipator");
    subs[name] = sub;
  }

  bool list = false;
  std::string dump, out_dir, write_dir;
  std::vector<std::string> run;
  auto* recipes = app.add_subcommand("recipes", "bundled figure-data scenarios");
  recipes->add_flag("--list", list, "list recipe names");
  recipes->add_option("--dump", dump, "print one recipe as a scenario file");
  recipes->add_option("--write", write_dir, "write every recipe as DIR/<name>.json");
  recipes->add_option("--run", run, "run recipes by name, or 'all'");
  recipes->add_option("--out", out_dir, "output directory for --run (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (recipes->parsed()) return run_recipes(list, dump, run, out_dir, write_dir);
    for (const auto& [name, sub] : subs)
      if (sub->parsed()) {
        const auto& cmd = commands.at(name);
        Scenario sc = prepare(name, cmd.kinds, cmd.fallback, o);
        if (name == "rates") sc.kind = Kind::Rates;
        return execute(sc, o);
      }
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << e.module() << "]: " << e.what() << "\n";
    return 2;
  } catch (const RegimeError& e) {
    std::cerr << "regime error [" << e.module() << "]: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure [" << e.module() << "]: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
