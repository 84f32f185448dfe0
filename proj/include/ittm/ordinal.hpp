#pragma once

// Ordinals below w^w in Cantor normal form.
//
// An Ordinal is a strictly-decreasing list of (exponent, coefficient) terms
// standing for the sum of w^exponent * coefficient. The empty list is 0.
// All arithmetic keeps the representation canonical, so equality is
// structural.

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ittm {

struct OrdinalTerm {
  std::uint64_t exponent = 0;
  std::uint64_t coefficient = 0;  // always >= 1 in a canonical ordinal

  friend bool operator==(const OrdinalTerm&, const OrdinalTerm&) = default;
};

class Ordinal {
 public:
  Ordinal() = default;

  // Finite ordinal.
  explicit Ordinal(std::uint64_t n) {
    if (n > 0) terms_.push_back({0, n});
  }

  // Builds w^exponent * coefficient.
  static Ordinal omega_power(std::uint64_t exponent, std::uint64_t coefficient = 1) {
    Ordinal o;
    if (coefficient > 0) o.terms_.push_back({exponent, coefficient});
    return o;
  }

  static Ordinal omega() { return omega_power(1); }

  // Terms must be strictly decreasing in exponent with positive coefficients.
  static Ordinal from_terms(std::vector<OrdinalTerm> terms) {
    for (size_t i = 0; i < terms.size(); ++i) {
      if (terms[i].coefficient == 0) throw std::invalid_argument("zero coefficient");
      if (i > 0 && terms[i - 1].exponent <= terms[i].exponent)
        throw std::invalid_argument("exponents not strictly decreasing");
    }
    Ordinal o;
    o.terms_ = std::move(terms);
    return o;
  }

  const std::vector<OrdinalTerm>& terms() const { return terms_; }

  bool is_zero() const { return terms_.empty(); }

  bool is_finite() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].exponent == 0);
  }

  // Finite value; throws on infinite ordinals.
  std::uint64_t finite_value() const {
    if (terms_.empty()) return 0;
    if (!is_finite()) throw std::logic_error("ordinal is not finite");
    return terms_[0].coefficient;
  }

  // A nonzero ordinal is a limit exactly when it has no finite part.
  bool is_limit() const {
    return !terms_.empty() && terms_.back().exponent > 0;
  }

  bool is_successor() const {
    return !terms_.empty() && terms_.back().exponent == 0;
  }

  friend bool operator==(const Ordinal& a, const Ordinal& b) {
    return a.terms_ == b.terms_;
  }

  friend std::strong_ordering operator<=>(const Ordinal& a, const Ordinal& b) {
    size_t n = std::min(a.terms_.size(), b.terms_.size());
    for (size_t i = 0; i < n; ++i) {
      if (a.terms_[i].exponent != b.terms_[i].exponent)
        return a.terms_[i].exponent <=> b.terms_[i].exponent;
      if (a.terms_[i].coefficient != b.terms_[i].coefficient)
        return a.terms_[i].coefficient <=> b.terms_[i].coefficient;
    }
    return a.terms_.size() <=> b.terms_.size();
  }

 private:
  std::vector<OrdinalTerm> terms_;

  friend Ordinal add(const Ordinal&, const Ordinal&);
  friend Ordinal mul(const Ordinal&, const Ordinal&);
};

// Ordinal addition: terms of the left operand below the right operand's
// leading exponent are absorbed.
inline Ordinal add(const Ordinal& a, const Ordinal& b) {
  if (b.is_zero()) return a;
  std::uint64_t lead = b.terms_[0].exponent;
  std::vector<OrdinalTerm> out;
  for (const auto& t : a.terms_) {
    if (t.exponent > lead) out.push_back(t);
  }
  size_t start = 0;
  if (!a.terms_.empty()) {
    // Merge a coefficient when a retains a term of the leading exponent.
    for (const auto& t : a.terms_) {
      if (t.exponent == lead) {
        out.push_back({lead, t.coefficient + b.terms_[0].coefficient});
        start = 1;
        break;
      }
    }
  }
  for (size_t i = start; i < b.terms_.size(); ++i) out.push_back(b.terms_[i]);
  return Ordinal::from_terms(std::move(out));
}

inline Ordinal successor(const Ordinal& a) { return add(a, Ordinal(1)); }

// Ordinal multiplication, using left distributivity over the right operand:
// a * (w^e * c) = w^(deg a + e) * c for e > 0, and a * m scales the leading
// coefficient of a.
inline Ordinal mul(const Ordinal& a, const Ordinal& b) {
  if (a.is_zero() || b.is_zero()) return Ordinal();
  std::uint64_t deg = a.terms_[0].exponent;
  std::vector<OrdinalTerm> out;
  for (const auto& t : b.terms_) {
    if (t.exponent > 0) {
      out.push_back({deg + t.exponent, t.coefficient});
    } else {
      // Finite part of b: a * m = (leading term scaled) + tail of a.
      out.push_back({deg, a.terms_[0].coefficient * t.coefficient});
      for (size_t i = 1; i < a.terms_.size(); ++i) out.push_back(a.terms_[i]);
    }
  }
  // Adjacent equal exponents can only arise between the scaled leading term
  // and a preceding w^deg term when deg appears twice; merge defensively.
  std::vector<OrdinalTerm> merged;
  for (const auto& t : out) {
    if (!merged.empty() && merged.back().exponent == t.exponent)
      merged.back().coefficient += t.coefficient;
    else
      merged.push_back(t);
  }
  return Ordinal::from_terms(std::move(merged));
}

// Least limit ordinal strictly above a: drop the finite part and add w.
inline Ordinal next_limit(const Ordinal& a) {
  std::vector<OrdinalTerm> out;
  for (const auto& t : a.terms())
    if (t.exponent > 0) out.push_back(t);
  return add(Ordinal::from_terms(std::move(out)), Ordinal::omega());
}

// The unique c with a + c = b. Requires a <= b.
inline Ordinal left_diff(const Ordinal& a, const Ordinal& b) {
  if (b < a) throw std::invalid_argument("left_diff requires a <= b");
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  size_t k = 0;
  while (k < ta.size() && k < tb.size() && ta[k] == tb[k]) ++k;
  if (k == ta.size()) {
    // a is a prefix of b; the remainder is the difference.
    return Ordinal::from_terms({tb.begin() + static_cast<std::ptrdiff_t>(k), tb.end()});
  }
  std::vector<OrdinalTerm> out;
  if (ta[k].exponent == tb[k].exponent) {
    out.push_back({tb[k].exponent, tb[k].coefficient - ta[k].coefficient});
    out.insert(out.end(), tb.begin() + static_cast<std::ptrdiff_t>(k) + 1, tb.end());
  } else {
    out.insert(out.end(), tb.begin() + static_cast<std::ptrdiff_t>(k), tb.end());
  }
  return Ordinal::from_terms(std::move(out));
}

// ASCII rendering: terms joined by '+', each "w^E*C" with "w^1" shortened to
// "w", exponent 0 rendered as a bare number, and "*1" omitted.
inline std::string format(const Ordinal& a) {
  if (a.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& t : a.terms()) {
    if (!first) out += "+";
    first = false;
    if (t.exponent == 0) {
      out += std::to_string(t.coefficient);
      continue;
    }
    out += "w";
    if (t.exponent > 1) {
      out += "^";
      out += std::to_string(t.exponent);
    }
    if (t.coefficient > 1) {
      out += "*";
      out += std::to_string(t.coefficient);
    }
  }
  return out;
}

namespace detail {

inline std::uint64_t parse_nat(const std::string& s, size_t& pos) {
  if (pos >= s.size() || s[pos] < '0' || s[pos] > '9')
    throw std::invalid_argument("expected number in ordinal at position " + std::to_string(pos));
  std::uint64_t v = 0;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
    v = v * 10 + static_cast<std::uint64_t>(s[pos] - '0');
    ++pos;
  }
  return v;
}

}  // namespace detail

// Parses the ASCII form. Terms are summed with ordinal addition, so input
// need not be canonical ("1+w" parses to w).
inline Ordinal parse_ordinal(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '\t') s += c;
  if (s.empty()) throw std::invalid_argument("empty ordinal");
  Ordinal acc;
  size_t pos = 0;
  while (true) {
    std::uint64_t exponent = 0;
    std::uint64_t coefficient = 0;
    if (pos < s.size() && (s[pos] == 'w' || s[pos] == 'W')) {
      ++pos;
      exponent = 1;
      if (pos < s.size() && s[pos] == '^') {
        ++pos;
        exponent = detail::parse_nat(s, pos);
      }
      coefficient = 1;
      if (pos < s.size() && s[pos] == '*') {
        ++pos;
        coefficient = detail::parse_nat(s, pos);
      }
    } else {
      coefficient = detail::parse_nat(s, pos);
    }
    acc = add(acc, Ordinal::omega_power(exponent, coefficient));
    if (pos == s.size()) break;
    if (s[pos] != '+') throw std::invalid_argument("unexpected character in ordinal: " + std::string(1, s[pos]));
    ++pos;
  }
  return acc;
}

}  // namespace ittm
