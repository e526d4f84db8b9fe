#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mirroropt/csv.hpp"
#include "mirroropt/digest.hpp"
#include "mirroropt/errors.hpp"
#include "mirroropt/problems.hpp"
#include "mirroropt/stepsizes.hpp"

namespace mirroropt {

// Declarative experiment description, parsed from a flat key = value file
// with [problem], [map], [set], [rules], and [run] sections. Unknown keys
// are errors; serialize() emits a normalized form that parses back to the
// same configuration.
struct RuleSpec {
  std::string kind;            // constant | sweep_constant | msps | msps_max |
                               // smoothed_msps_max | polyak
  std::vector<double> params;  // positional, as documented per kind
};

struct ExperimentConfig {
  // [problem]
  std::string problem_kind = "quad1d";
  std::vector<QuadCoeffs> coeffs;                 // quad1d
  int rows = 8, cols = 5;                         // linear_system
  std::uint64_t system_seed = 1;
  int markov_m = 5;
  std::uint64_t markov_seed = 1;
  std::string dataset;                            // logistic: path or synth:n,d,margin,seed
  std::optional<double> rbf_bandwidth;

  // [map]
  std::string map_kind = "euclidean";
  double p = 1.5;

  // [set]
  std::string set_kind = "reals";
  double lo = 0.0, hi = 1.0;
  double lambda = 1.0;

  // [rules]
  std::vector<RuleSpec> rules;

  // [run]
  long iterations = 1000;
  int replicates = 100;
  long record_every = 1;
  std::uint64_t seed = 42;
  std::string x_init = "auto";

  std::string serialize() const;
  std::string digest() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& s, int line) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": expected a number, got '" + s + "'");
  }
}

inline long parse_long(const std::string& s, int line) {
  try {
    size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line) + ": expected an integer, got '" + s + "'");
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.rules.clear();
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("line " + std::to_string(lineno) + ": unclosed section");
      section = line.substr(1, line.size() - 2);
      if (section != "problem" && section != "map" && section != "set" && section != "rules" &&
          section != "run")
        throw ParseError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty())
      throw ParseError("line " + std::to_string(lineno) + ": key outside any section");

    if (section == "problem") {
      if (key == "kind") cfg.problem_kind = value;
      else if (key == "coeffs") {
        cfg.coeffs.clear();
        for (const auto& triple : detail::split(value, ';')) {
          const auto parts = detail::split(triple, ',');
          if (parts.size() != 3)
            throw ParseError("line " + std::to_string(lineno) + ": coeffs need a,b,c triples");
          cfg.coeffs.push_back({detail::parse_double(parts[0], lineno),
                                detail::parse_double(parts[1], lineno),
                                detail::parse_double(parts[2], lineno)});
        }
      } else if (key == "rows") cfg.rows = static_cast<int>(detail::parse_long(value, lineno));
      else if (key == "cols") cfg.cols = static_cast<int>(detail::parse_long(value, lineno));
      else if (key == "system_seed") cfg.system_seed = static_cast<std::uint64_t>(detail::parse_long(value, lineno));
      else if (key == "markov_m") cfg.markov_m = static_cast<int>(detail::parse_long(value, lineno));
      else if (key == "markov_seed") cfg.markov_seed = static_cast<std::uint64_t>(detail::parse_long(value, lineno));
      else if (key == "dataset") cfg.dataset = value;
      else if (key == "rbf_bandwidth") cfg.rbf_bandwidth = detail::parse_double(value, lineno);
      else throw ParseError("line " + std::to_string(lineno) + ": unknown problem key '" + key + "'");
    } else if (section == "map") {
      if (key == "kind") cfg.map_kind = value;
      else if (key == "p") cfg.p = detail::parse_double(value, lineno);
      else throw ParseError("line " + std::to_string(lineno) + ": unknown map key '" + key + "'");
    } else if (section == "set") {
      if (key == "kind") cfg.set_kind = value;
      else if (key == "lo") cfg.lo = detail::parse_double(value, lineno);
      else if (key == "hi") cfg.hi = detail::parse_double(value, lineno);
      else if (key == "lambda") cfg.lambda = detail::parse_double(value, lineno);
      else throw ParseError("line " + std::to_string(lineno) + ": unknown set key '" + key + "'");
    } else if (section == "rules") {
      if (key != "rule")
        throw ParseError("line " + std::to_string(lineno) + ": unknown rules key '" + key + "'");
      std::istringstream rs(value);
      RuleSpec spec;
      rs >> spec.kind;
      std::string tok;
      while (rs >> tok) spec.params.push_back(detail::parse_double(tok, lineno));
      static const std::vector<std::pair<std::string, size_t>> kArity = {
          {"constant", 1},          {"sweep_constant", 3}, {"msps", 1},
          {"msps_max", 2},          {"smoothed_msps_max", 5}, {"polyak", 0},
      };
      bool known = false;
      for (const auto& [name, arity] : kArity) {
        if (spec.kind == name) {
          known = true;
          if (spec.params.size() != arity)
            throw ParseError("line " + std::to_string(lineno) + ": rule '" + name + "' takes " +
                             std::to_string(arity) + " parameters");
        }
      }
      if (!known)
        throw ParseError("line " + std::to_string(lineno) + ": unknown rule '" + spec.kind + "'");
      cfg.rules.push_back(std::move(spec));
    } else if (section == "run") {
      if (key == "iterations") cfg.iterations = detail::parse_long(value, lineno);
      else if (key == "replicates") cfg.replicates = static_cast<int>(detail::parse_long(value, lineno));
      else if (key == "record_every") cfg.record_every = detail::parse_long(value, lineno);
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_long(value, lineno));
      else if (key == "x_init") cfg.x_init = value;
      else throw ParseError("line " + std::to_string(lineno) + ": unknown run key '" + key + "'");
    }
  }
  if (cfg.rules.empty()) throw ParseError("config declares no stepsize rules");
  return cfg;
}

inline std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out << "[problem]\n";
  out << "kind = " << problem_kind << "\n";
  if (!coeffs.empty()) {
    out << "coeffs = ";
    for (size_t i = 0; i < coeffs.size(); ++i) {
      if (i) out << " ; ";
      out << format_double(coeffs[i].a) << "," << format_double(coeffs[i].b) << ","
          << format_double(coeffs[i].c);
    }
    out << "\n";
  }
  if (problem_kind == "linear_system")
    out << "rows = " << rows << "\ncols = " << cols << "\nsystem_seed = " << system_seed << "\n";
  if (problem_kind == "markov")
    out << "markov_m = " << markov_m << "\nmarkov_seed = " << markov_seed << "\n";
  if (!dataset.empty()) out << "dataset = " << dataset << "\n";
  if (rbf_bandwidth) out << "rbf_bandwidth = " << format_double(*rbf_bandwidth) << "\n";

  out << "\n[map]\nkind = " << map_kind << "\n";
  if (map_kind == "pnorm") out << "p = " << format_double(p) << "\n";

  out << "\n[set]\nkind = " << set_kind << "\n";
  if (set_kind == "box") out << "lo = " << format_double(lo) << "\nhi = " << format_double(hi) << "\n";
  if (set_kind == "l1ball") out << "lambda = " << format_double(lambda) << "\n";

  out << "\n[rules]\n";
  for (const auto& r : rules) {
    out << "rule = " << r.kind;
    for (double v : r.params) out << " " << format_double(v);
    out << "\n";
  }

  out << "\n[run]\n";
  out << "iterations = " << iterations << "\n";
  out << "replicates = " << replicates << "\n";
  out << "record_every = " << record_every << "\n";
  out << "seed = " << seed << "\n";
  out << "x_init = " << x_init << "\n";
  return out.str();
}

// Covers every field through the normalized serialization.
inline std::string ExperimentConfig::digest() const {
  detail::Fnv1a h;
  h.add_str(serialize());
  return h.hex();
}

}  // namespace mirroropt
