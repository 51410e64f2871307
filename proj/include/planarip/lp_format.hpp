#pragma once

// Textual LP export of a BinaryProgram (CPLEX-style subset) and the matching
// reader. The grammar is documented in docs/lp_format.md.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "planarip/program.hpp"

namespace planarip {

struct LpParseError : std::runtime_error {
  LpParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
  int line;
};

namespace detail {

inline std::string lp_number(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string lp_terms(const std::vector<std::pair<double, std::string>>& terms) {
  std::string s;
  for (size_t i = 0; i < terms.size(); ++i) {
    const auto& [c, name] = terms[i];
    if (i == 0) s += lp_number(c) + " " + name;
    else if (c < 0) s += " - " + lp_number(-c) + " " + name;
    else s += " + " + lp_number(c) + " " + name;
  }
  return s;
}

inline const char* lp_relation(Relation r) {
  switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::Equal: return "=";
    case Relation::GreaterEqual: return ">=";
  }
  return "";
}

}  // namespace detail

inline std::string write_lp(const BinaryProgram& p) {
  std::ostringstream out;
  const auto& vars = p.variables();
  std::vector<std::pair<double, std::string>> obj;
  for (size_t j = 0; j < vars.size(); ++j)
    if (p.objective()[j] != 0.0) obj.push_back({p.objective()[j], var_name(vars[j].ref)});
  out << "Maximize\n obj:";
  if (!obj.empty()) out << " " << detail::lp_terms(obj);
  out << "\nSubject To\n";
  std::map<Family, int> counter;
  for (const auto& c : p.constraints()) {
    std::vector<std::pair<double, std::string>> terms;
    for (const auto& t : c.terms) terms.push_back({t.coef, var_name(t.var)});
    out << " " << family_name(c.family) << "_" << counter[c.family]++ << ": " << detail::lp_terms(terms) << " "
        << detail::lp_relation(c.relation) << " " << detail::lp_number(c.rhs) << "\n";
  }
  out << "Bounds\n";
  for (const auto& v : vars)
    if (!v.binary) out << " 0 <= " << var_name(v.ref) << " <= " << detail::lp_number(v.upper) << "\n";
  out << "Binary\n";
  for (const auto& v : vars)
    if (v.binary) out << " " << var_name(v.ref) << "\n";
  out << "End\n";
  return out.str();
}

/// Inverse of var_name.
inline std::optional<VarRef> parse_var_name(const std::string& s) {
  static const std::regex re(R"(^(c|r|su|sl)_(\d+)$|^e_(\d+)_(\d+)$|^d_(\d+)_b(\d+)$)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) return std::nullopt;
  try {
    if (m[1].matched) {
      const int a = std::stoi(m[2]);
      const std::string k = m[1];
      if (k == "c") return VarRef::corner(a);
      if (k == "r") return VarRef::region(a);
      if (k == "su") return VarRef::slack_up(a);
      return VarRef::slack_lo(a);
    }
    if (m[3].matched) {
      const int a = std::stoi(m[3]), b = std::stoi(m[4]);
      if (a >= b) return std::nullopt;
      return VarRef::edge(a, b);
    }
    const int bin = std::stoi(m[6]);
    if (bin >= kDirectionBins) return std::nullopt;
    return VarRef::direction(std::stoi(m[5]), bin);
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

namespace detail {

inline std::vector<std::string> lp_tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

inline double lp_parse_number(const std::string& t, int line) {
  size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw LpParseError(line, "expected a number, got '" + t + "'");
  }
  if (used != t.size()) throw LpParseError(line, "expected a number, got '" + t + "'");
  return v;
}

inline bool lp_is_number(const std::string& t) {
  static const std::regex re(R"(^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$|^[+-]?(inf|nan)$)");
  return std::regex_match(t, re);
}

struct RawTerm {
  double coef;
  VarRef var;
};

/// Parses "[sign] [coef] name" terms from tokens[begin, end).
inline std::vector<RawTerm> lp_parse_terms(const std::vector<std::string>& tok, size_t begin, size_t end, int line) {
  std::vector<RawTerm> out;
  size_t i = begin;
  while (i < end) {
    double sign = 1.0;
    if (tok[i] == "+" || tok[i] == "-") {
      sign = tok[i] == "-" ? -1.0 : 1.0;
      if (++i >= end) throw LpParseError(line, "dangling sign");
    } else if (!out.empty()) {
      throw LpParseError(line, "expected '+' or '-' between terms");
    }
    double coef = 1.0;
    if (lp_is_number(tok[i])) {
      coef = lp_parse_number(tok[i], line);
      if (++i >= end) throw LpParseError(line, "coefficient without variable");
    }
    const auto v = parse_var_name(tok[i]);
    if (!v) throw LpParseError(line, "bad variable name '" + tok[i] + "'");
    out.push_back({sign * coef, *v});
    ++i;
  }
  return out;
}

inline std::optional<Family> family_from_label(const std::string& label) {
  const auto us = label.rfind('_');
  if (us == std::string::npos || us + 1 == label.size()) return std::nullopt;
  for (char ch : label.substr(us + 1))
    if (ch < '0' || ch > '9') return std::nullopt;
  const std::string prefix = label.substr(0, us);
  for (Family f : kAllFamilies)
    if (prefix == family_name(f)) return f;
  return std::nullopt;
}

}  // namespace detail

/// Reads the format produced by write_lp. Constraint families come from the
/// row labels; a row is marked softened when it contains a slack variable.
inline BinaryProgram parse_lp(const std::string& text) {
  enum class Section { None, Objective, Constraints, Bounds, Binary, End };
  Section sec = Section::None;
  std::vector<detail::RawTerm> objective;
  struct RawRow {
    std::vector<detail::RawTerm> terms;
    Relation rel;
    double rhs;
    Family family;
    int line;
  };
  std::vector<RawRow> rows;
  std::vector<std::pair<VarRef, double>> slacks;
  std::vector<VarRef> binaries;
  bool seen_objective = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto tok = detail::lp_tokens(raw);
    if (tok.empty() || tok[0][0] == '\\') continue;
    if (sec == Section::End) throw LpParseError(line, "content after End");
    const std::string head = tok.size() == 1 ? tok[0] : tok[0] + " " + tok[1];
    if (tok.size() == 1 && tok[0] == "Maximize") {
      if (sec != Section::None) throw LpParseError(line, "Maximize must come first");
      sec = Section::Objective;
      continue;
    }
    if (tok.size() == 2 && head == "Subject To") {
      if (sec != Section::Objective) throw LpParseError(line, "Subject To must follow the objective");
      sec = Section::Constraints;
      continue;
    }
    if (tok.size() == 1 && tok[0] == "Bounds") {
      if (sec != Section::Constraints) throw LpParseError(line, "Bounds must follow Subject To");
      sec = Section::Bounds;
      continue;
    }
    if (tok.size() == 1 && tok[0] == "Binary") {
      if (sec != Section::Bounds) throw LpParseError(line, "Binary must follow Bounds");
      sec = Section::Binary;
      continue;
    }
    if (tok.size() == 1 && tok[0] == "End") {
      if (sec != Section::Binary) throw LpParseError(line, "End must follow Binary");
      sec = Section::End;
      continue;
    }
    switch (sec) {
      case Section::None: throw LpParseError(line, "expected Maximize");
      case Section::Objective: {
        if (seen_objective) throw LpParseError(line, "objective must be a single line");
        if (tok[0] != "obj:") throw LpParseError(line, "objective must be labelled 'obj:'");
        objective = detail::lp_parse_terms(tok, 1, tok.size(), line);
        seen_objective = true;
        break;
      }
      case Section::Constraints: {
        if (tok.size() < 4 || tok[0].back() != ':') throw LpParseError(line, "expected 'label: terms rel rhs'");
        const auto fam = detail::family_from_label(tok[0].substr(0, tok[0].size() - 1));
        if (!fam) throw LpParseError(line, "unknown constraint label '" + tok[0] + "'");
        const std::string& rel = tok[tok.size() - 2];
        RawRow r{{}, Relation::LessEqual, detail::lp_parse_number(tok.back(), line), *fam, line};
        if (rel == "<=") r.rel = Relation::LessEqual;
        else if (rel == ">=") r.rel = Relation::GreaterEqual;
        else if (rel == "=") r.rel = Relation::Equal;
        else throw LpParseError(line, "bad relation '" + rel + "'");
        r.terms = detail::lp_parse_terms(tok, 1, tok.size() - 2, line);
        if (r.terms.empty()) throw LpParseError(line, "constraint without terms");
        rows.push_back(std::move(r));
        break;
      }
      case Section::Bounds: {
        if (tok.size() != 5 || tok[0] != "0" || tok[1] != "<=" || tok[3] != "<=")
          throw LpParseError(line, "expected '0 <= name <= cap'");
        const auto v = parse_var_name(tok[2]);
        if (!v || !v->is_slack()) throw LpParseError(line, "bounds are only allowed on slack variables");
        slacks.push_back({*v, detail::lp_parse_number(tok[4], line)});
        break;
      }
      case Section::Binary: {
        for (const auto& t : tok) {
          const auto v = parse_var_name(t);
          if (!v || v->is_slack()) throw LpParseError(line, "bad binary variable '" + t + "'");
          binaries.push_back(*v);
        }
        break;
      }
      case Section::End: break;
    }
  }
  if (sec != Section::End) throw LpParseError(line, "missing End");

  BinaryProgram p;
  try {
    for (const auto& v : binaries) p.add_binary(v);
    for (const auto& [v, cap] : slacks) p.add_slack(v, cap, 0.0);
  } catch (const std::exception& e) {
    throw LpParseError(line, e.what());
  }
  for (const auto& t : objective) {
    if (!p.has(t.var)) throw LpParseError(2, "objective uses undeclared variable " + var_name(t.var));
    p.add_objective(t.var, t.coef);
  }
  for (const auto& r : rows) {
    LinearConstraint c{{}, r.rel, r.rhs, r.family, false};
    for (const auto& t : r.terms) {
      if (!p.has(t.var)) throw LpParseError(r.line, "undeclared variable " + var_name(t.var));
      c.terms.push_back({t.coef, t.var});
      if (t.var.is_slack()) c.softened = true;
    }
    try {
      p.add_constraint(std::move(c));
    } catch (const std::exception& e) {
      throw LpParseError(r.line, e.what());
    }
  }
  return p;
}

/// Same variables, rows, families and softening; numbers agree to `rel_tol`
/// (the text format keeps 9 significant digits).
inline bool structurally_equal(const BinaryProgram& a, const BinaryProgram& b, double rel_tol = 1e-8) {
  auto close = [&](double x, double y) { return std::abs(x - y) <= rel_tol * std::max({1.0, std::abs(x), std::abs(y)}); };
  if (a.variables().size() != b.variables().size() || a.constraints().size() != b.constraints().size()) return false;
  for (size_t j = 0; j < a.variables().size(); ++j) {
    const auto &u = a.variables()[j], &v = b.variables()[j];
    if (u.ref != v.ref || u.binary != v.binary || !close(u.upper, v.upper)) return false;
    if (!close(a.objective()[j], b.objective()[j])) return false;
  }
  for (size_t k = 0; k < a.constraints().size(); ++k) {
    const auto &c = a.constraints()[k], &d = b.constraints()[k];
    if (c.relation != d.relation || c.family != d.family || c.softened != d.softened || !close(c.rhs, d.rhs) ||
        c.terms.size() != d.terms.size())
      return false;
    for (size_t t = 0; t < c.terms.size(); ++t)
      if (c.terms[t].var != d.terms[t].var || !close(c.terms[t].coef, d.terms[t].coef)) return false;
  }
  return true;
}

}  // namespace planarip
