// Problem files: a line-oriented key/value format with section headers that
// describes a prime, a patch, and optional connection / filtration / lift /
// Higgs data. Parsing gives line/column diagnostics; serialization is
// canonical and idempotent.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "charp/connection.hpp"
#include "charp/filtration.hpp"
#include "charp/frobenius.hpp"
#include "charp/parse.hpp"

namespace charp {

struct ProblemOptions {
  std::optional<std::uint32_t> level;
  std::optional<std::uint32_t> degree_bound;
  std::optional<std::uint32_t> exponent;
  std::optional<std::uint64_t> seed;
};

struct ProblemFile {
  std::uint32_t p = 2;
  std::vector<std::string> vars{"x"};
  std::size_t rank = 1;
  WeightMode mode = WeightMode::DR;

  std::optional<Connection> connection;          // [connection] A1..Am
  std::optional<FilteredModule> filtration;      // [filtration] weights, frame
  std::optional<std::vector<ModPoly>> lift;      // [lift] h1..hm over the base
  std::optional<std::vector<PolyMatrix>> higgs;  // [higgs] B1..Bm over the twist
  std::optional<std::vector<PolyMatrix>> psi;    // [psi] P1..Pm over the working ring
  ProblemOptions options;

  RingPtr base_ring() const { return make_ring(p, vars, false); }
};

/// Problem files accept a fourth mode, "conj": DR weights over F_p[x][t]
/// with companion psi matrices (conjugate triples).
struct ParsedProblem {
  ProblemFile file;
  bool conj = false;

  RingPtr working_ring() const {
    bool needs_t = conj || file.mode == WeightMode::HOD;
    return make_ring(file.p, file.vars, needs_t);
  }
};

namespace detail {

struct Line {
  std::size_t number;
  std::string text;
};

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  if (s.empty()) throw parse_error("expected an integer", line, 1);
  std::uint64_t v = 0;
  for (char c : s) {
    if (!std::isdigit((unsigned char)c)) throw parse_error("expected an integer", line, 1);
    v = v * 10 + std::uint64_t(c - '0');
  }
  return v;
}

} // namespace detail

inline ParsedProblem parse_problem(const std::string& text) {
  // first pass: collect section -> (key, value, line)
  std::map<std::string, std::vector<std::tuple<std::string, std::string, std::size_t>>> sections;
  std::vector<std::string> order;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw parse_error("unterminated section header", lineno, 1);
      current = line.substr(1, line.size() - 2);
      if (!sections.count(current)) order.push_back(current);
      sections[current];
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw parse_error("expected 'key = value'", lineno, 1);
    if (current.empty()) throw parse_error("key outside any section", lineno, 1);
    sections[current].emplace_back(detail::trim(line.substr(0, eq)),
                                   detail::trim(line.substr(eq + 1)), lineno);
  }

  ParsedProblem out;
  ProblemFile& pf = out.file;

  auto section = [&](const std::string& name)
      -> const std::vector<std::tuple<std::string, std::string, std::size_t>>* {
    auto it = sections.find(name);
    return it == sections.end() ? nullptr : &it->second;
  };

  const auto* prob = section("problem");
  if (!prob) throw parse_error("missing [problem] section", 1, 1);
  for (const auto& [key, value, ln] : *prob) {
    if (key == "p") {
      pf.p = std::uint32_t(detail::parse_uint(value, ln));
      if (!is_prime(pf.p)) throw parse_error("p must be prime", ln, 1);
    } else if (key == "vars") {
      pf.vars = detail::split_ws(value);
      if (pf.vars.empty()) throw parse_error("vars must name at least one variable", ln, 1);
    } else if (key == "rank") {
      pf.rank = std::size_t(detail::parse_uint(value, ln));
      if (pf.rank == 0) throw parse_error("rank must be positive", ln, 1);
    } else if (key == "mode") {
      if (value == "dr") pf.mode = WeightMode::DR;
      else if (value == "dol") pf.mode = WeightMode::DOL;
      else if (value == "hod") pf.mode = WeightMode::HOD;
      else if (value == "conj") {
        pf.mode = WeightMode::DR;
        out.conj = true;
      } else {
        throw parse_error("mode must be dr, dol, hod or conj", ln, 1);
      }
    } else {
      throw parse_error("unknown key '" + key + "' in [problem]", ln, 1);
    }
  }

  RingPtr ring = out.working_ring();
  RingPtr base = pf.base_ring();
  FrobeniusContext fctx = make_frobenius(base);

  auto matrix_list = [&](const std::vector<std::tuple<std::string, std::string, std::size_t>>& kvs,
                         char prefix, const RingPtr& r) {
    std::vector<PolyMatrix> mats(pf.vars.size(), PolyMatrix::zero(r, pf.rank, pf.rank));
    std::vector<bool> seen(pf.vars.size(), false);
    for (const auto& [key, value, ln] : kvs) {
      if (key.size() < 2 || key[0] != prefix)
        throw parse_error("expected keys like " + std::string(1, prefix) + "1", ln, 1);
      std::size_t idx = std::size_t(detail::parse_uint(key.substr(1), ln));
      if (idx == 0 || idx > pf.vars.size())
        throw parse_error("matrix index out of range", ln, 1);
      PolyMatrix m = parse_matrix(value, r, ln, key.size() + 4);
      if (m.rows() != pf.rank || m.cols() != pf.rank)
        throw parse_error("matrix must be rank x rank", ln, 1);
      mats[idx - 1] = std::move(m);
      seen[idx - 1] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (!seen[i]) throw parse_error("missing matrix " + std::string(1, prefix) +
                                       std::to_string(i + 1), 1, 1);
    return mats;
  };

  if (const auto* conn = section("connection")) {
    Connection c;
    c.ring = ring;
    c.rank = pf.rank;
    c.mode = pf.mode;
    c.A = matrix_list(*conn, 'A', ring);
    c.validate();
    pf.connection = std::move(c);
  }

  if (const auto* filt = section("filtration")) {
    std::vector<std::uint32_t> weights;
    std::optional<FpMat> frame;
    for (const auto& [key, value, ln] : *filt) {
      if (key == "weights") {
        for (const auto& w : detail::split_ws(value))
          weights.push_back(std::uint32_t(detail::parse_uint(w, ln)));
      } else if (key == "frame") {
        PolyMatrix m = parse_matrix(value, base, ln, 9);
        FpMat f(m.rows(), m.cols(), pf.p);
        for (std::size_t i = 0; i < m.rows(); ++i)
          for (std::size_t j = 0; j < m.cols(); ++j) {
            if (!m.at(i, j).is_zero() && m.at(i, j).degree() != 0)
              throw parse_error("frame entries must be constants", ln, 1);
            f.at(i, j) = m.at(i, j).constant_term();
          }
        frame = std::move(f);
      } else {
        throw parse_error("unknown key '" + key + "' in [filtration]", ln, 1);
      }
    }
    if (weights.size() != pf.rank) throw parse_error("need one weight per frame column", 1, 1);
    if (!frame) {
      FpMat id(pf.rank, pf.rank, pf.p);
      for (std::size_t i = 0; i < pf.rank; ++i) id.at(i, i) = 1;
      frame = std::move(id);
    }
    pf.filtration = FilteredModule::make(base, std::move(*frame), std::move(weights));
  }

  if (const auto* lift = section("lift")) {
    std::vector<ModPoly> h(pf.vars.size(), ModPoly::zero(base));
    for (const auto& [key, value, ln] : *lift) {
      if (key.size() < 2 || key[0] != 'h') throw parse_error("expected keys like h1", ln, 1);
      std::size_t idx = std::size_t(detail::parse_uint(key.substr(1), ln));
      if (idx == 0 || idx > pf.vars.size()) throw parse_error("lift index out of range", ln, 1);
      h[idx - 1] = parse_poly(value, base, ln, key.size() + 4);
    }
    pf.lift = std::move(h);
  }

  if (const auto* higgs = section("higgs")) pf.higgs = matrix_list(*higgs, 'B', fctx.twist);
  if (const auto* psi = section("psi")) pf.psi = matrix_list(*psi, 'P', ring);

  if (const auto* opts = section("options")) {
    for (const auto& [key, value, ln] : *opts) {
      if (key == "level") pf.options.level = std::uint32_t(detail::parse_uint(value, ln));
      else if (key == "degree_bound")
        pf.options.degree_bound = std::uint32_t(detail::parse_uint(value, ln));
      else if (key == "exponent") pf.options.exponent = std::uint32_t(detail::parse_uint(value, ln));
      else if (key == "seed") pf.options.seed = detail::parse_uint(value, ln);
      else throw parse_error("unknown key '" + key + "' in [options]", ln, 1);
    }
  }

  for (const auto& name : order)
    if (name != "problem" && name != "connection" && name != "filtration" && name != "lift" &&
        name != "higgs" && name != "psi" && name != "options")
      throw parse_error("unknown section [" + name + "]", 1, 1);

  return out;
}

/// Canonical form: fixed section order, one key per line, matrices and
/// polynomials in their canonical renderings. Serializing a parsed file and
/// re-parsing is the identity.
inline std::string serialize_problem(const ParsedProblem& parsed) {
  const ProblemFile& pf = parsed.file;
  std::ostringstream out;
  out << "[problem]\n";
  out << "p = " << pf.p << "\n";
  out << "vars =";
  for (const auto& v : pf.vars) out << " " << v;
  out << "\n";
  out << "rank = " << pf.rank << "\n";
  out << "mode = " << (parsed.conj ? "conj" : mode_name(pf.mode)) << "\n";
  if (pf.connection) {
    out << "\n[connection]\n";
    for (std::size_t i = 0; i < pf.connection->A.size(); ++i)
      out << "A" << (i + 1) << " = " << pf.connection->A[i].render() << "\n";
  }
  if (pf.filtration) {
    out << "\n[filtration]\n";
    out << "weights =";
    for (auto w : pf.filtration->weights) out << " " << w;
    out << "\n";
    out << "frame = [";
    for (std::size_t i = 0; i < pf.filtration->rank; ++i) {
      if (i) out << ", ";
      out << "[";
      for (std::size_t j = 0; j < pf.filtration->rank; ++j) {
        if (j) out << ", ";
        out << pf.filtration->frame.at(i, j);
      }
      out << "]";
    }
    out << "]\n";
  }
  if (pf.lift) {
    out << "\n[lift]\n";
    for (std::size_t i = 0; i < pf.lift->size(); ++i)
      out << "h" << (i + 1) << " = " << (*pf.lift)[i].render() << "\n";
  }
  if (pf.higgs) {
    out << "\n[higgs]\n";
    for (std::size_t i = 0; i < pf.higgs->size(); ++i)
      out << "B" << (i + 1) << " = " << (*pf.higgs)[i].render() << "\n";
  }
  if (pf.psi) {
    out << "\n[psi]\n";
    for (std::size_t i = 0; i < pf.psi->size(); ++i)
      out << "P" << (i + 1) << " = " << (*pf.psi)[i].render() << "\n";
  }
  std::ostringstream opts;
  if (pf.options.level) opts << "level = " << *pf.options.level << "\n";
  if (pf.options.degree_bound) opts << "degree_bound = " << *pf.options.degree_bound << "\n";
  if (pf.options.exponent) opts << "exponent = " << *pf.options.exponent << "\n";
  if (pf.options.seed) opts << "seed = " << *pf.options.seed << "\n";
  if (!opts.str().empty()) out << "\n[options]\n" << opts.str();
  return out.str();
}

} // namespace charp
