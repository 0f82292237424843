// dbarlab: command-line front end. Subcommand options override the keys of
// the --config file; see README.md for the config grammar.

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "dbarlab/cli.hpp"
#include "dbarlab/error.hpp"

namespace {

struct Flag {
  const char* name;  // option name without the leading dashes
  const char* key;   // config key; "%" stands for the subcommand
  const char* help;
  bool boolean = false;
};

const std::map<std::string, std::vector<Flag>>& flag_table() {
  static const std::map<std::string, std::vector<Flag>> table = {
      {"domains",
       {{"domain", "%.domain", "domain spec, e.g. disk:0,0,1"},
        {"h", "%.h", "grid spacings, comma separated"},
        {"dump-mask", "%.dump_mask", "write the finest node classification", true}}},
      {"cauchy",
       {{"domain", "%.domain", "domain spec"},
        {"f", "%.f", "density expression"},
        {"exact", "%.exact", "closed-form transform to compare against"},
        {"targets", "%.targets", "grid, circle or file"},
        {"target-file", "%.target_file", "file of 're,im' lines"},
        {"h", "%.h", "grid spacings"}}},
      {"bezout",
       {{"domain", "%.domain", "domain spec"},
        {"f", "%.f", "generators, ';' separated"},
        {"method", "%.method", "poly or pou"},
        {"degree", "%.degree", "maximum polynomial degree"},
        {"epsilon", "%.epsilon", "partition-of-unity threshold"},
        {"h", "%.h", "grid spacings"},
        {"dump", "%.dump", "write the solution at the finest level", true}}},
      {"corona",
       {{"domain", "%.domain", "domain spec"},
        {"f", "%.f", "generators, ';' separated"},
        {"target", "%.target", "one, g5, g6 or g12"},
        {"g", "%.g", "g for the power targets"},
        {"x", "%.x", "smooth solution of sum x_j f_j = g (g5, g6)"},
        {"h-list", "%.h_list", "h_j for the g12 target"},
        {"degree", "%.degree", "maximum polynomial degree (target one)"},
        {"h", "%.h", "grid spacings"},
        {"dump", "%.dump", "write u at the finest level", true}}},
      {"divide",
       {{"domain", "%.domain", "domain spec"},
        {"f", "%.f", "numerator"},
        {"g", "%.g", "divisor"},
        {"power", "%.power", "exponent N in f^N / g"},
        {"class", "%.class", "C0, A0, C1, A1 or Dbar1"},
        {"points", "%.points", "extra probe points 're,im;re,im'"},
        {"probe-h", "%.probe_h", "grid spacing used to locate Z(g)"},
        {"bound-m", "%.bound_m", "derivative bound scan: m"},
        {"bound-n", "%.bound_n", "derivative bound scan: n"},
        {"bound-kind", "%.bound_kind", "holomorphic or mixed"},
        {"h", "%.h", "grid spacings for the bound scan"}}},
      {"sharpness", {{"probe-h", "%.probe_h", "grid spacing used to locate zeros"}}},
      {"faa",
       {{"n", "%.n", "order of the coefficient table"},
        {"verify", "%.verify", "run the oracle battery", true},
        {"max-order", "%.max_order", "battery: highest order"},
        {"samples", "%.samples", "battery: number of evaluations"},
        {"seed", "%.seed", "battery: RNG seed"}}},
      {"lconn",
       {{"domain", "%.domain", "domain spec"},
        {"z0", "%.z0", "boundary point 're,im'"},
        {"scales", "%.scales", "probe radii, comma separated"},
        {"samples", "%.samples", "circle samples per scale"},
        {"landing", "%.landing", "landing-ball fraction in (0, 1)"},
        {"h", "%.h", "grid spacings"}}},
      {"taylor",
       {{"domain", "%.domain", "domain spec"},
        {"f", "%.f", "holomorphic expression"},
        {"z0", "%.z0", "boundary point 're,im'"},
        {"m", "%.m", "Taylor order"},
        {"rho", "%.rho", "largest arc radius"},
        {"radii", "%.levels", "number of halvings of rho"},
        {"angles", "%.angles", "samples per full circle"},
        {"chain", "%.chain", "also tabulate this many disk-chain quotients"}}},
  };
  return table;
}

std::string expand(const char* key, const std::string& command) {
  std::string k = key;
  if (const auto at = k.find('%'); at != std::string::npos) k.replace(at, 1, command);
  return k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical workbench for dbar problems, division and corona solvers on planar compacta"};
  app.set_help_flag("--help", "print help and exit");
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string config_path, out_dir;
  int levels = 0, threads = 0;
  app.add_option("--config", config_path, "INI experiment file");
  app.add_option("--out", out_dir, "output directory (default: run.out or ./out)");
  app.add_option("--levels", levels, "use the first n spacings of the grid ladder");
  app.add_option("--threads", threads, "worker threads (orchestration is single-threaded)");

  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : dbarlab::command_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " pipeline");
    subs[name] = sub;
    for (const auto& f : flag_table().at(name)) {
      const std::string key = expand(f.key, name);
      if (f.boolean)
        sub->add_flag("--" + std::string(f.name), switches[key], f.help);
      else
        sub->add_option("--" + std::string(f.name), values[key], f.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dbarlab::kExitConfig;
  }

  try {
    dbarlab::Config cfg = config_path.empty() ? dbarlab::Config() : dbarlab::Config::load(config_path);
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      cfg.set("run.command", name);
      for (const auto& f : flag_table().at(name)) {
        const std::string key = expand(f.key, name);
        if (f.boolean) {
          if (switches[key]) cfg.set(key, "true");
        } else if (sub->count("--" + std::string(f.name))) {
          cfg.set(key, values[key]);
        }
      }
    }
    if (!cfg.find("run.command"))
      throw dbarlab::ConfigError("no subcommand given and the config has no run.command");

    dbarlab::RunOptions opts;
    opts.out_dir = !out_dir.empty() ? out_dir : cfg.get("run.out", "out");
    if (app.count("--levels"))
      opts.levels = levels;
    else if (cfg.find("run.levels"))
      opts.levels = cfg.integer("run.levels", 0);
    opts.threads = app.count("--threads") ? threads : cfg.integer("run.threads", 1);

    const auto report = dbarlab::run(cfg, opts);
    std::cout << dbarlab::render(report);
    return report.exit_status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dbarlab::exit_code_for(e);
  }
}
