#pragma once

// Reference models for ordinal arithmetic, independent of the library
// implementation, plus a property suite run over random triples.
//
// Model: an ordinal below w^64 is a finite sum of atoms w^e. A list of
// exponents, read left to right, denotes that sum. Normalization uses only
// the absorption law x + w^e = w^e for x < w^e: an atom vanishes when some
// later atom has a strictly larger exponent.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ittm/ordinal.hpp"

namespace oracle {

using Atoms = std::vector<std::uint64_t>;

inline Atoms atoms_of(const ittm::Ordinal& a) {
  Atoms out;
  for (const auto& t : a.terms())
    for (std::uint64_t i = 0; i < t.coefficient; ++i) out.push_back(t.exponent);
  return out;
}

inline Atoms normalize(Atoms xs) {
  // Keep an atom only when no later atom is strictly larger.
  std::vector<char> keep(xs.size(), 0);
  std::uint64_t later_max = 0;
  bool any_later = false;
  for (size_t i = xs.size(); i-- > 0;) {
    keep[i] = !any_later || xs[i] >= later_max;
    if (!any_later || xs[i] > later_max) later_max = xs[i];
    any_later = true;
  }
  Atoms out;
  for (size_t i = 0; i < xs.size(); ++i)
    if (keep[i]) out.push_back(xs[i]);
  return out;
}

inline ittm::Ordinal from_atoms(const Atoms& xs) {
  Atoms n = normalize(xs);
  std::vector<ittm::OrdinalTerm> terms;
  for (size_t i = 0; i < n.size();) {
    size_t j = i;
    while (j < n.size() && n[j] == n[i]) ++j;
    terms.push_back({n[i], j - i});
    i = j;
  }
  return ittm::Ordinal::from_terms(terms);
}

inline ittm::Ordinal add(const ittm::Ordinal& a, const ittm::Ordinal& b) {
  Atoms xs = atoms_of(a);
  Atoms ys = atoms_of(b);
  xs.insert(xs.end(), ys.begin(), ys.end());
  return from_atoms(xs);
}

// a * w^e = w^(deg a + e) for e >= 1 and a > 0; multiplying by w^0 keeps a.
// The product walks b's atoms left to right and concatenates the pieces.
inline ittm::Ordinal mul(const ittm::Ordinal& a, const ittm::Ordinal& b) {
  if (a.is_zero() || b.is_zero()) return ittm::Ordinal();
  std::uint64_t deg = a.terms().front().exponent;
  Atoms out;
  for (std::uint64_t e : atoms_of(b)) {
    if (e == 0) {
      Atoms xs = atoms_of(a);
      out.insert(out.end(), xs.begin(), xs.end());
    } else {
      out.push_back(deg + e);
    }
  }
  return from_atoms(out);
}

// Evaluate at w := base. With every coefficient below base this is the
// base-`base` reading of the term list, so numeric order matches ordinal
// order. Exponents and coefficients must stay small enough to fit.
inline unsigned __int128 eval(const ittm::Ordinal& a, std::uint64_t base) {
  unsigned __int128 v = 0;
  for (const auto& t : a.terms()) {
    unsigned __int128 p = 1;
    for (std::uint64_t i = 0; i < t.exponent; ++i) p *= base;
    v += p * t.coefficient;
  }
  return v;
}

inline int compare(const ittm::Ordinal& a, const ittm::Ordinal& b, std::uint64_t base) {
  auto va = eval(a, base), vb = eval(b, base);
  return va < vb ? -1 : va > vb ? 1 : 0;
}

// Least limit ordinal above a, found by scanning a grid that provably
// contains it: exponents up to max(deg a, 1), coefficients up to one more
// than any coefficient of a.
inline ittm::Ordinal next_limit(const ittm::Ordinal& a, std::uint64_t base) {
  std::uint64_t max_exp = 1, max_coeff = 1;
  for (const auto& t : a.terms()) {
    max_exp = std::max(max_exp, t.exponent);
    max_coeff = std::max(max_coeff, t.coefficient);
  }
  std::vector<ittm::Ordinal> grid;
  std::vector<ittm::OrdinalTerm> cur;
  auto rec = [&](auto&& self, std::uint64_t exp) -> void {
    if (exp == 0) {
      if (!cur.empty()) grid.push_back(ittm::Ordinal::from_terms(cur));
      return;
    }
    self(self, exp - 1);
    for (std::uint64_t c = 1; c <= max_coeff + 1; ++c) {
      cur.push_back({exp, c});
      self(self, exp - 1);
      cur.pop_back();
    }
  };
  rec(rec, max_exp);
  std::optional<ittm::Ordinal> best;
  for (const auto& g : grid) {
    if (compare(g, a, base) <= 0) continue;
    if (!best || compare(g, *best, base) < 0) best = g;
  }
  return *best;
}

// Random ordinal below w^3 with coefficients at most 9.
inline ittm::Ordinal random_ordinal(std::mt19937& rng) {
  std::uniform_int_distribution<std::uint64_t> coeff(0, 9);
  std::vector<ittm::OrdinalTerm> terms;
  for (std::uint64_t exp : {std::uint64_t{2}, std::uint64_t{1}, std::uint64_t{0}}) {
    std::uint64_t c = coeff(rng);
    if (c > 0) terms.push_back({exp, c});
  }
  return ittm::Ordinal::from_terms(terms);
}

// Runs the property suite over `triples` random triples below w^3.
// Returns a description of the first failure, or nothing when all pass.
inline std::optional<std::string> check_properties(std::uint32_t seed, int triples) {
  std::mt19937 rng(seed);
  const std::uint64_t base = 64;  // beyond any coefficient in play
  auto fail = [](const std::string& what, const ittm::Ordinal& a, const ittm::Ordinal& b,
                 const ittm::Ordinal& c) {
    std::ostringstream os;
    os << what << " at a=" << ittm::format(a) << " b=" << ittm::format(b)
       << " c=" << ittm::format(c);
    return os.str();
  };
  for (int it = 0; it < triples; ++it) {
    ittm::Ordinal a = random_ordinal(rng);
    ittm::Ordinal b = random_ordinal(rng);
    ittm::Ordinal c = random_ordinal(rng);

    if (ittm::add(a, b) != oracle::add(a, b)) return fail("add disagrees with atom model", a, b, c);
    if (ittm::mul(a, b) != oracle::mul(a, b)) return fail("mul disagrees with atom model", a, b, c);

    int lib = a < b ? -1 : a > b ? 1 : 0;
    if (lib != oracle::compare(a, b, base)) return fail("compare disagrees with evaluation", a, b, c);

    if (ittm::add(ittm::add(a, b), c) != ittm::add(a, ittm::add(b, c)))
      return fail("add not associative", a, b, c);
    if (ittm::mul(ittm::mul(a, b), c) != ittm::mul(a, ittm::mul(b, c)))
      return fail("mul not associative", a, b, c);
    if (ittm::mul(a, ittm::add(b, c)) != ittm::add(ittm::mul(a, b), ittm::mul(a, c)))
      return fail("mul not left distributive", a, b, c);

    if (!(a < ittm::successor(a))) return fail("successor not above", a, b, c);
    if (!ittm::successor(a).is_successor()) return fail("successor kind wrong", a, b, c);
    if (b <= c && !(ittm::add(a, b) <= ittm::add(a, c)))
      return fail("add not monotone on the right", a, b, c);
    if (a <= b && !(ittm::add(a, c) <= ittm::add(b, c)))
      return fail("add not weakly monotone on the left", a, b, c);

    if (ittm::parse_ordinal(ittm::format(a)) != a) return fail("format round trip", a, b, c);

    ittm::Ordinal nl = ittm::next_limit(a);
    if (!nl.is_limit()) return fail("next_limit not a limit", a, b, c);
    if (!(a < nl)) return fail("next_limit not above", a, b, c);
    if (nl != oracle::next_limit(a, base)) return fail("next_limit disagrees with grid scan", a, b, c);
  }
  return std::nullopt;
}

}  // namespace oracle
