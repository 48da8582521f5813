#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>

namespace pcsft::cli {

namespace {

const std::map<std::string, json>& presets() {
  static const std::map<std::string, json> table = [] {
    std::map<std::string, json> t;
    const json alphas = {{"from", 0.1}, {"to", 1e-4}, {"points", 5}};
    const json quartic_terms = json::array({
        {{"type", "quadratic"}, {"coeff", 0.5}, {"operator", {{"random", {{"seed", 5}, {"scale", 1.0}}}}}},
        {{"type", "factored-quartic"},
         {"coeff", 0.25},
         {"gamma1", {{"random-positive", {{"seed", 6}, {"shift", 1.0}}}}},
         {"gamma2", {{"random-positive", {{"seed", 7}, {"shift", 1.0}}}}}},
    });
    t["quartic-demo"] = {{"command", "dequantize"},
                         {"seed", 1},
                         {"n", 3},
                         {"density", {{"random", {{"seed", 3}}}}},
                         {"variable", quartic_terms},
                         {"alphas", alphas},
                         {"count", 100000},
                         {"path", "isserlis"}};
    t["quartic-demo-mc"] = t["quartic-demo"];
    t["quartic-demo-mc"]["path"] = "monte-carlo";
    t["quartic-demo-mc"]["count"] = 1000000;
    t["quadratic-demo"] = {{"command", "dequantize"},
                           {"seed", 1},
                           {"n", 3},
                           {"density", {{"random", {{"seed", 3}}}}},
                           {"variable", json::array({quartic_terms[0]})},
                           {"alphas", alphas},
                           {"path", "isserlis"}};
    t["plane-wave"] = {{"command", "evolve"},
                       {"seed", 1},
                       {"hamiltonian", {{"kind", "cubic-nls"}, {"coupling", 1.0}, {"kinetic", 0.5}}},
                       {"grid", {{"dimension", 1}, {"points", 512}, {"box_length", 2 * std::numbers::pi}}},
                       {"initial", {{"type", "plane-wave"}, {"amplitude", 1.0}, {"mode", 1}}},
                       {"dt", 1e-3},
                       {"t_end", 10.0},
                       {"sample_stride", 100},
                       {"reference_tolerance", 1e-6}};
    t["gausson"] = {{"command", "evolve"},
                    {"seed", 1},
                    {"hamiltonian", {{"kind", "log-nls"}, {"b", -1.0}, {"a", 1.0}, {"kinetic", 0.5}}},
                    {"grid", {{"dimension", 1}, {"points", 512}, {"box_length", 16.0}}},
                    {"initial", {{"type", "gausson"}, {"amplitude", 1.0}}},
                    {"dt", 1e-3},
                    {"t_end", "period"},
                    {"sample_stride", 100},
                    {"reference_tolerance", 1e-3}};
    t["bilinear-demo"] = {
        {"command", "evolve"},
        {"seed", 1},
        {"hamiltonian",
         {{"kind", "bilinear"},
          {"n", 4},
          {"linear", {{"diagonal", {0.2, 0.4, 0.6, 0.8}}}},
          {"coupling", 0.4},
          {"gamma1", "identity"},
          {"gamma2", "identity"}}},
        {"initial", {{"type", "vector"}, {"re", {0.5, 0.3, -0.4, 0.2}}, {"im", {0.1, -0.5, 0.3, 0.4}}}},
        {"dt", 1e-3},
        {"t_end", 1.0},
        {"sample_stride", 10},
        {"reference_tolerance", 1e-6}};
    t["trace-check"] = {{"command", "trace-check"}, {"seed", 1}, {"n", 3}, {"trials", 20}, {"count", 100000}};
    return t;
  }();
  return table;
}

}  // namespace

json preset(const std::string& name) {
  const auto& t = presets();
  auto it = t.find(name);
  if (it == t.end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [k, _] : presets()) names.push_back(k);
  return names;
}

json load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

json resolve_config(json config, const Overrides& overrides) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (config.contains("preset")) {
    if (!config.at("preset").is_string()) throw ConfigError("'preset' must be a string");
    json base = preset(config.at("preset").get<std::string>());
    config.erase("preset");
    base.merge_patch(config);
    config = std::move(base);
  }
  if (overrides.seed) config["seed"] = *overrides.seed;
  if (overrides.output_dir) config["output_dir"] = overrides.output_dir->string();
  return config;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const json& config) {
  json canonical = config;
  canonical.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canonical.dump())));
  return std::string("fnv1a64:") + buf;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const json& config) {
  std::filesystem::create_directories(dir);
  json m = {{"command", command},
            {"config_hash", config_hash(config)},
            {"seed", config.value("seed", std::uint64_t{0})},
            {"library_version", PCSFT_VERSION},
            {"config", config}};
  std::ofstream out(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

}  // namespace pcsft::cli
