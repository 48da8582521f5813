#include "cli.hpp"

#include "pcsft/units.hpp"
#include "pcsft/serialization.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace pcsft::cli {

Outcome run_alpha_bound(double b_ev, std::ostream& out, std::ostream& err) {
  Outcome o;
  try {
    const units::AlphaBound bound = units::alpha_bound_from_b(b_ev);
    out << "alpha_upper_bound_eV=" << format_number(bound.alpha_upper_bound_ev) << '\n';
    err << "note: " << bound.note << '\n';
    o.report = {{"b_ev", b_ev}, {"alpha_upper_bound_eV", bound.alpha_upper_bound_ev}, {"note", bound.note}};
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    o.exit_code = exit_usage;
    o.message = e.what();
  }
  return o;
}

Outcome run_command(const std::string& command, const json& config) {
  if (config.contains("command") && config.at("command") != command)
    throw ConfigError("config is for command '" + config.at("command").get<std::string>() + "', not '" + command + "'");
  Outcome o;
  if (command == "dequantize") o = run_dequantize(config);
  else if (command == "evolve") o = run_evolve(config);
  else if (command == "trace-check") o = run_trace_check(config);
  else throw ConfigError("unknown command '" + command + "'");
  write_manifest(config.value("output_dir", std::string("out")), command, config);
  return o;
}

namespace {

/// Maps library errors onto the exit-code contract.
int guarded(const std::string& command, const json& config) {
  try {
    const Outcome o = run_command(command, config);
    std::cerr << command << ": " << o.message << '\n';
    return o.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const EvaluationError& e) {
    std::cerr << "evaluation failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const NonSmoothError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const Error& e) {
    // structure, dimension and domain errors all trace back to the inputs
    std::cerr << "invalid input: " << e.what() << '\n';
  }
  return exit_usage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcsft: prequantum classical statistical field theory experiments"};
  app.set_version_flag("--version", PCSFT_VERSION);
  app.require_subcommand(1);

  std::string config_path, preset_name, out_dir;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option("--preset", preset_name, "bundled preset name");
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_dir, "output directory");
  };
  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (const char* name : {"dequantize", "evolve", "trace-check"}) {
    CLI::App* sub = app.add_subcommand(name);
    add_common(sub);
    subs.emplace_back(name, sub);
  }
  subs[0].second->description("verify <f>_rho = (alpha/2) Tr D f''(0) + O(alpha^2) over a sweep of alphas");
  subs[1].second->description("integrate a Hamilton-Schroedinger equation");
  subs[2].second->description("Monte Carlo check of the trace formula on random (A, state) pairs");

  double b_ev = 0;
  CLI::App* bound = app.add_subcommand("alpha-bound", "alpha upper bound from a bound on the log coupling b");
  bound->add_option("--b-ev", b_ev, "bound on |b| in eV")->required();
  bound->add_option("--out", out_dir, "write a manifest into this directory");

  CLI::App* list = app.add_subcommand("presets", "list bundled presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : exit_usage;
  }

  if (list->parsed()) {
    for (const auto& name : preset_names()) std::cout << name << '\n';
    return exit_pass;
  }
  if (bound->parsed()) {
    const Outcome o = run_alpha_bound(b_ev, std::cout, std::cerr);
    if (o.exit_code == exit_pass && !out_dir.empty()) write_manifest(out_dir, "alpha-bound", {{"b_ev", b_ev}});
    return o.exit_code;
  }
  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      json config = json::object();
      if (!preset_name.empty()) config["preset"] = preset_name;
      if (!config_path.empty()) {
        json file = load_config_file(config_path);
        if (!file.is_object()) throw ConfigError("config must be a JSON object");
        config.merge_patch(file);
      }
      if (config_path.empty() && preset_name.empty()) throw ConfigError("give --config or --preset");
      Overrides ov;
      if (sub->count("--seed")) ov.seed = seed;
      if (!out_dir.empty()) ov.output_dir = out_dir;
      return guarded(name, resolve_config(std::move(config), ov));
    } catch (const Error& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return exit_usage;
    }
  }
  return exit_usage;
}

}  // namespace pcsft::cli
