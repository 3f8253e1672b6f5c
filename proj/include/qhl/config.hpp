// Experiment configuration and the TOML subset it is read from.
//
// Supported TOML: comments, [table] headers, bare or quoted keys, and values
// that are basic strings, integers, floats, booleans or (nested, possibly
// multi-line) arrays. Inline tables, dates and literal strings are rejected.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qhl/geometry.hpp"

namespace qhl {

struct TomlValue {
  enum class Kind { Bool, Int, Float, String, Array };
  Kind kind = Kind::Int;
  bool b = false;
  std::int64_t i = 0;
  double d = 0.0;
  std::string s;
  std::vector<TomlValue> array;

  /// Int or Float as double; throws Config otherwise.
  double number() const;
};

/// Table name ("" for the root) -> key -> value.
using TomlDocument = std::map<std::string, std::map<std::string, TomlValue>>;

/// Throws Config with the line number on malformed input.
TomlDocument parse_toml(const std::string& text);
TomlDocument parse_toml_file(const std::string& path);

struct ExperimentConfig {
  std::string name;
  /// Template for every surface the experiment builds; backend is the first
  /// entry of `backends` unless the experiment iterates over them.
  SurfaceConfig surface;
  std::vector<Backend> backends;
  std::vector<int> kgrid;
  std::vector<std::string> functions;
  std::map<std::string, double> tolerances;
  std::map<std::string, double> params;
  std::string out_dir = "qhl-out";
  std::string cache_dir;
  std::uint64_t seed = 1;
  int jobs = 1;

  double tolerance(const std::string& key) const;
  double param(const std::string& key) const;
  SurfaceConfig surface_for(Backend b) const;

  /// Sorted-key JSON of everything that affects results (not paths or jobs).
  std::string canonical_json() const;
  std::string hash() const;
};

/// Applies [experiment], [surface], [tolerances], [params] and [output]
/// tables over `base`. Unknown keys are errors.
ExperimentConfig apply_toml(ExperimentConfig base, const TomlDocument& doc);

}  // namespace qhl
