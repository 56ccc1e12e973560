// leibenson: parameter tables, simulations and verification runs for the
// weighted Leibenson equation, driven by `key = value` config files.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "leibenson/commands.hpp"

namespace {

using Command = int (*)(const leibenson::RunConfig&, std::ostream&, std::ostream&);

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  bool dump = false;
};

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("-c,--config", opt.config_path, "config file with one 'key = value' per line");
  sub->add_option("-s,--set", opt.overrides, "override a key, e.g. --set l=1.9 (repeatable)");
  sub->add_flag("--dump-config", opt.dump, "print the effective config and exit");
}

int execute(const Options& opt, Command command) {
  leibenson::RunConfig cfg;
  try {
    if (!opt.config_path.empty()) cfg = leibenson::load_config(opt.config_path);
    for (const auto& kv : opt.overrides) leibenson::apply_assignment(cfg, kv, "--set: ");
    if (opt.dump) {
      leibenson::validate(cfg);
      std::cout << leibenson::dump_config(cfg);
      return leibenson::kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return leibenson::kExitInput;
  }
  return command(cfg, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extinction-time experiments for rho du/dt = Delta_p u^q on weighted models"};
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    Command command;
  };
  const std::vector<Entry> entries{
      {"params", "derived exponents and the admissible l-range", leibenson::cmd_params},
      {"simulate", "run the finite-volume solver and write the energy trace", leibenson::cmd_simulate},
      {"verify-exact", "residual convergence of the self-similar solution", leibenson::cmd_verify_exact},
      {"finiteness", "weighted L^theta norm of rho/omega and its tail verdict", leibenson::cmd_finiteness},
      {"sobolev-probe", "lower bound for the Sobolev constant from bump profiles", leibenson::cmd_sobolev_probe},
  };

  std::vector<Options> options(entries.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    subs.push_back(app.add_subcommand(entries[i].name, entries[i].help));
    add_common(subs.back(), options[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : leibenson::kExitInput;
  }

  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (subs[i]->parsed()) return execute(options[i], entries[i].command);
  }
  return leibenson::kExitInput;
}
