#include "qhl/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qhl/error.hpp"
#include "qhl/sections.hpp"

namespace qhl {

double TomlValue::number() const {
  if (kind == Kind::Int) return static_cast<double>(i);
  if (kind == Kind::Float) return d;
  throw Error(ErrorCode::Config, "expected a number");
}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : t_(text) {}

  TomlDocument run() {
    TomlDocument doc;
    doc[""];
    std::string table;
    while (true) {
      skip_space_and_comments(true);
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        skip_inline_space();
        table = key();
        skip_inline_space();
        expect(']');
        if (doc.count(table) && table != "") fail(fmt::format("table [{}] defined twice", table));
        doc[table];
      } else {
        const std::string k = key();
        skip_inline_space();
        expect('=');
        skip_inline_space();
        TomlValue v = value();
        if (doc[table].count(k)) fail(fmt::format("key '{}' defined twice", k));
        doc[table][k] = std::move(v);
      }
      skip_inline_space();
      if (!eof() && peek() == '#') skip_comment();
      if (!eof() && peek() != '\n' && peek() != '\r') fail("expected end of line");
    }
    return doc;
  }

 private:
  bool eof() const { return pos_ >= t_.size(); }
  char peek() const { return t_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    int line = 1;
    for (std::size_t i = 0; i < pos_ && i < t_.size(); ++i) line += t_[i] == '\n';
    throw Error(ErrorCode::Config, fmt::format("TOML line {}: {}", line, what));
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(fmt::format("expected '{}'", c));
    ++pos_;
  }

  void skip_comment() {
    while (!eof() && peek() != '\n') ++pos_;
  }

  void skip_inline_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_space_and_comments(bool newlines) {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || (newlines && (c == '\n' || c == '\r')))
        ++pos_;
      else if (c == '#')
        skip_comment();
      else
        break;
    }
  }

  std::string key() {
    if (!eof() && peek() == '"') return basic_string();
    const std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-' ||
                      peek() == '.'))
      ++pos_;
    if (pos_ == start) fail("expected a key");
    return t_.substr(start, pos_ - start);
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = t_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      const char e = t_[pos_++];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: fail(fmt::format("unsupported escape \\{}", e));
      }
    }
    return out;
  }

  TomlValue value() {
    if (eof()) fail("expected a value");
    TomlValue v;
    const char c = peek();
    if (c == '"') {
      v.kind = TomlValue::Kind::String;
      v.s = basic_string();
      return v;
    }
    if (c == '[') {
      ++pos_;
      v.kind = TomlValue::Kind::Array;
      while (true) {
        skip_space_and_comments(true);
        if (eof()) fail("unterminated array");
        if (peek() == ']') {
          ++pos_;
          break;
        }
        v.array.push_back(value());
        skip_space_and_comments(true);
        if (!eof() && peek() == ',') {
          ++pos_;
          continue;
        }
        skip_space_and_comments(true);
        expect(']');
        break;
      }
      return v;
    }
    const std::size_t start = pos_;
    while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
           peek() != '#')
      ++pos_;
    std::string tok = t_.substr(start, pos_ - start);
    if (tok == "true" || tok == "false") {
      v.kind = TomlValue::Kind::Bool;
      v.b = tok == "true";
      return v;
    }
    std::string clean;
    for (char ch : tok)
      if (ch != '_') clean += ch;
    const bool is_float = clean.find_first_of(".eE") != std::string::npos;
    const char* first = clean.data();
    const char* last = clean.data() + clean.size();
    if (!clean.empty() && clean[0] == '+') ++first;
    if (is_float) {
      v.kind = TomlValue::Kind::Float;
      const auto r = std::from_chars(first, last, v.d);
      if (r.ec != std::errc() || r.ptr != last) fail(fmt::format("bad number '{}'", tok));
    } else {
      v.kind = TomlValue::Kind::Int;
      const auto r = std::from_chars(first, last, v.i);
      if (r.ec != std::errc() || r.ptr != last || clean.empty()) fail(fmt::format("bad value '{}'", tok));
    }
    return v;
  }

  const std::string& t_;
  std::size_t pos_ = 0;
};

const std::string& as_string(const TomlValue& v, const std::string& key) {
  if (v.kind != TomlValue::Kind::String) throw Error(ErrorCode::Config, fmt::format("'{}' must be a string", key));
  return v.s;
}

const std::vector<TomlValue>& as_array(const TomlValue& v, const std::string& key) {
  if (v.kind != TomlValue::Kind::Array) throw Error(ErrorCode::Config, fmt::format("'{}' must be an array", key));
  return v.array;
}

std::int64_t as_int(const TomlValue& v, const std::string& key) {
  if (v.kind != TomlValue::Kind::Int) throw Error(ErrorCode::Config, fmt::format("'{}' must be an integer", key));
  return v.i;
}

double as_number(const TomlValue& v, const std::string& key) {
  if (v.kind != TomlValue::Kind::Int && v.kind != TomlValue::Kind::Float)
    throw Error(ErrorCode::Config, fmt::format("'{}' must be a number", key));
  return v.number();
}

}  // namespace

TomlDocument parse_toml(const std::string& text) { return Parser(text).run(); }

TomlDocument parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot read '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

double ExperimentConfig::tolerance(const std::string& key) const {
  const auto it = tolerances.find(key);
  if (it == tolerances.end()) throw Error(ErrorCode::Config, fmt::format("{}: no tolerance '{}'", name, key));
  return it->second;
}

double ExperimentConfig::param(const std::string& key) const {
  const auto it = params.find(key);
  if (it == params.end()) throw Error(ErrorCode::Config, fmt::format("{}: no parameter '{}'", name, key));
  return it->second;
}

SurfaceConfig ExperimentConfig::surface_for(Backend b) const {
  SurfaceConfig c = surface;
  c.backend = b;
  if (!is_perturbed(b)) {
    c.epsilon = 0.0;
    c.perturbation.clear();
  }
  // sphere and torus perturbation modes are not interchangeable
  if (!c.perturbation.empty() && is_sphere(b) != is_sphere(surface.backend)) c.perturbation.clear();
  return c;
}

std::string ExperimentConfig::canonical_json() const {
  nlohmann::json j;  // std::map-backed: keys sorted
  j["name"] = name;
  nlohmann::json s;
  s["epsilon"] = surface.epsilon;
  s["tau"] = {surface.tau.real(), surface.tau.imag()};
  s["resolution"] = surface.resolution;
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : surface.perturbation) modes.push_back({m.a, m.b, m.cos_coeff, m.sin_coeff});
  s["perturbation"] = modes;
  j["surface"] = s;
  std::vector<std::string> bs;
  for (Backend b : backends) bs.emplace_back(to_string(b));
  j["backends"] = bs;
  j["kgrid"] = kgrid;
  j["functions"] = functions;
  j["tolerances"] = tolerances;
  j["params"] = params;
  j["seed"] = seed;
  return j.dump();
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical_json()); }

ExperimentConfig apply_toml(ExperimentConfig c, const TomlDocument& doc) {
  for (const auto& [table, entries] : doc) {
    for (const auto& [key, v] : entries) {
      const std::string where = table.empty() ? key : table + "." + key;
      if (table == "experiment" || table.empty()) {
        if (key == "name")
          c.name = as_string(v, where);
        else if (key == "seed")
          c.seed = static_cast<std::uint64_t>(as_int(v, where));
        else if (key == "jobs")
          c.jobs = static_cast<int>(as_int(v, where));
        else if (key == "kgrid") {
          c.kgrid.clear();
          for (const auto& e : as_array(v, where)) c.kgrid.push_back(static_cast<int>(as_int(e, where)));
        } else if (key == "functions") {
          c.functions.clear();
          for (const auto& e : as_array(v, where)) c.functions.push_back(as_string(e, where));
        } else if (key == "backends") {
          c.backends.clear();
          for (const auto& e : as_array(v, where)) c.backends.push_back(backend_from_string(as_string(e, where)));
        } else {
          throw Error(ErrorCode::Config, fmt::format("unknown key '{}'", where));
        }
      } else if (table == "surface") {
        if (key == "backend") {
          c.surface.backend = backend_from_string(as_string(v, where));
          c.backends = {c.surface.backend};
        } else if (key == "epsilon") {
          c.surface.epsilon = as_number(v, where);
        } else if (key == "resolution") {
          c.surface.resolution = static_cast<int>(as_int(v, where));
        } else if (key == "tau") {
          const auto& a = as_array(v, where);
          if (a.size() != 2) throw Error(ErrorCode::Config, "tau = [re, im]");
          c.surface.tau = {as_number(a[0], where), as_number(a[1], where)};
        } else if (key == "perturbation") {
          c.surface.perturbation.clear();
          for (const auto& e : as_array(v, where)) {
            const auto& m = as_array(e, where);
            if (m.size() != 4) throw Error(ErrorCode::Config, "perturbation modes are [a, b, cos, sin]");
            c.surface.perturbation.push_back({static_cast<int>(as_int(m[0], where)),
                                              static_cast<int>(as_int(m[1], where)), as_number(m[2], where),
                                              as_number(m[3], where)});
          }
        } else {
          throw Error(ErrorCode::Config, fmt::format("unknown key '{}'", where));
        }
      } else if (table == "tolerances") {
        c.tolerances[key] = as_number(v, where);
      } else if (table == "params") {
        c.params[key] = as_number(v, where);
      } else if (table == "output") {
        if (key == "dir")
          c.out_dir = as_string(v, where);
        else if (key == "cache")
          c.cache_dir = as_string(v, where);
        else
          throw Error(ErrorCode::Config, fmt::format("unknown key '{}'", where));
      } else {
        throw Error(ErrorCode::Config, fmt::format("unknown table [{}]", table));
      }
    }
  }
  if (!c.backends.empty()) c.surface.backend = c.backends.front();
  return c;
}

}  // namespace qhl
