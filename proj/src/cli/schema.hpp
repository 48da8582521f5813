#ifndef PCSFT_CLI_SCHEMA_HPP
#define PCSFT_CLI_SCHEMA_HPP

#include "cli.hpp"

#include <set>
#include <string>

namespace pcsft::cli {

/// Typed access to one JSON object. Every key read is recorded; finish()
/// rejects whatever was not read.
class Fields {
 public:
  Fields(const json& object, std::string where) : j_(object), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    if (!has(key)) fail("missing required key '" + key + "'");
    return j_.at(key);
  }

  template <typename T>
  T require(const std::string& key) {
    return convert<T>(raw(key), key);
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    return has(key) ? convert<T>(j_.at(key), key) : fallback;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double v = fallback && !has(key) ? *fallback : require<double>(key);
    if (!(v > 0) || !std::isfinite(v)) fail("'" + key + "' must be a positive number");
    return v;
  }

  std::int64_t at_least(const std::string& key, std::int64_t lo, std::optional<std::int64_t> fallback = std::nullopt) {
    const std::int64_t v = fallback && !has(key) ? *fallback : require<std::int64_t>(key);
    if (v < lo) fail("'" + key + "' must be >= " + std::to_string(lo));
    return v;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) fail("unknown key '" + key + "'");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(where_ + ": " + what); }

  const std::string& where() const { return where_; }

 private:
  template <typename T>
  T convert(const json& v, const std::string& key) const {
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) fail("'" + key + "' must be an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) fail("'" + key + "' must be non-negative");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) fail("'" + key + "' must be a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail("'" + key + "' must be true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail("'" + key + "' must be a string");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      fail("'" + key + "': " + e.what());
    }
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

/// Global fields shared by every command.
struct Common {
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string precision = "f64";
};

inline Common read_common(Fields& f) {
  Common c;
  c.seed = f.get<std::uint64_t>("seed", 0);
  c.output_dir = f.get<std::string>("output_dir", "out");
  c.precision = f.get<std::string>("precision", "f64");
  if (c.precision != "f32" && c.precision != "f64") f.fail("precision must be \"f32\" or \"f64\"");
  f.has("command");
  return c;
}

}  // namespace pcsft::cli

#endif  // PCSFT_CLI_SCHEMA_HPP
