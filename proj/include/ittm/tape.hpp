#pragma once

// Eventually periodic binary sequences and the codings built on them.
//
// An EPReal is the full content of one machine tape: a finite prefix
// followed by a repeating period. Construction always canonicalizes, so
// equality is structural: the period is primitive and the prefix is minimal
// (its last bit differs from the period bit that would replace it).

#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ittm {

using Bits = std::vector<std::uint8_t>;

// Raised when an operation would need more bits than the in-memory
// representation is willing to hold.
struct unrepresentable_real : std::runtime_error {
  unrepresentable_real() : std::runtime_error("real exceeds representable size") {}
};

inline constexpr std::uint64_t kMaxRealBits = 1u << 20;

class EPReal {
 public:
  // All zeros.
  EPReal() : period_{0} {}

  EPReal(Bits prefix, Bits period) : prefix_(std::move(prefix)), period_(std::move(period)) {
    if (period_.empty()) throw std::invalid_argument("empty period");
    for (auto b : prefix_)
      if (b > 1) throw std::invalid_argument("non-binary bit");
    for (auto b : period_)
      if (b > 1) throw std::invalid_argument("non-binary bit");
    canonicalize();
  }

  static EPReal zeros() { return EPReal(); }
  static EPReal ones() { return EPReal({}, {1}); }

  const Bits& prefix() const { return prefix_; }
  const Bits& period() const { return period_; }

  std::uint8_t bit(std::uint64_t i) const {
    if (i < prefix_.size()) return prefix_[i];
    return period_[(i - prefix_.size()) % period_.size()];
  }

  // Returns a copy with bit i set to v.
  EPReal with_bit(std::uint64_t i, std::uint8_t v) const {
    if (v > 1) throw std::invalid_argument("non-binary bit");
    if (i >= kMaxRealBits) throw unrepresentable_real{};
    Bits p = prefix_;
    while (p.size() <= i) p.push_back(period_[(p.size() - prefix_.size()) % period_.size()]);
    p[i] = v;
    // The period must resume at the phase the extended prefix reached.
    std::uint64_t rot = (p.size() - prefix_.size()) % period_.size();
    Bits q(period_.begin() + static_cast<std::ptrdiff_t>(rot), period_.end());
    q.insert(q.end(), period_.begin(), period_.begin() + static_cast<std::ptrdiff_t>(rot));
    return EPReal(std::move(p), std::move(q));
  }

  // Drops the first n bits.
  EPReal suffix(std::uint64_t n) const {
    if (n <= prefix_.size()) {
      return EPReal(Bits(prefix_.begin() + static_cast<std::ptrdiff_t>(n), prefix_.end()), period_);
    }
    std::uint64_t rot = (n - prefix_.size()) % period_.size();
    Bits q(period_.begin() + static_cast<std::ptrdiff_t>(rot), period_.end());
    q.insert(q.end(), period_.begin(), period_.begin() + static_cast<std::ptrdiff_t>(rot));
    return EPReal({}, std::move(q));
  }

  bool all_zero() const { return prefix_.empty() && period_.size() == 1 && period_[0] == 0; }

  friend bool operator==(const EPReal& a, const EPReal& b) {
    return a.prefix_ == b.prefix_ && a.period_ == b.period_;
  }

  // Bitwise combination of two reals.
  static EPReal combine(const EPReal& a, const EPReal& b,
                        const std::function<std::uint8_t(std::uint8_t, std::uint8_t)>& f) {
    std::uint64_t plen = std::max(a.prefix_.size(), b.prefix_.size());
    std::uint64_t qlen = std::lcm(a.period_.size(), b.period_.size());
    if (plen + qlen > kMaxRealBits) throw unrepresentable_real{};
    Bits p, q;
    p.reserve(plen);
    q.reserve(qlen);
    for (std::uint64_t i = 0; i < plen; ++i) p.push_back(f(a.bit(i), b.bit(i)));
    for (std::uint64_t i = plen; i < plen + qlen; ++i) q.push_back(f(a.bit(i), b.bit(i)));
    return EPReal(std::move(p), std::move(q));
  }

  friend EPReal bit_or(const EPReal& a, const EPReal& b) {
    return combine(a, b, [](std::uint8_t x, std::uint8_t y) { return std::uint8_t(x | y); });
  }

  friend EPReal bit_and(const EPReal& a, const EPReal& b) {
    return combine(a, b, [](std::uint8_t x, std::uint8_t y) { return std::uint8_t(x & y); });
  }

  // Bits set in a but not in b.
  friend EPReal bit_minus(const EPReal& a, const EPReal& b) {
    return combine(a, b, [](std::uint8_t x, std::uint8_t y) { return std::uint8_t(x & (1 - y)); });
  }

  size_t hash() const {
    size_t h = prefix_.size() * 1000003u + period_.size();
    for (auto b : prefix_) h = h * 131 + b + 7;
    for (auto b : period_) h = h * 137 + b + 11;
    return h;
  }

  // "prefix|period", e.g. "110|0".
  std::string to_string() const {
    std::string s;
    s.reserve(prefix_.size() + period_.size() + 1);
    for (auto b : prefix_) s += char('0' + b);
    s += '|';
    for (auto b : period_) s += char('0' + b);
    return s;
  }

  static EPReal parse(const std::string& text) {
    auto bar = text.find('|');
    Bits p, q;
    auto read = [](const std::string& part, Bits& out) {
      for (char c : part) {
        if (c == '0')
          out.push_back(0);
        else if (c == '1')
          out.push_back(1);
        else
          throw std::invalid_argument("bad bit character in real");
      }
    };
    if (bar == std::string::npos) {
      read(text, p);
      q = {0};
    } else {
      read(text.substr(0, bar), p);
      read(text.substr(bar + 1), q);
      if (q.empty()) throw std::invalid_argument("empty period in real");
    }
    return EPReal(std::move(p), std::move(q));
  }

 private:
  Bits prefix_;
  Bits period_;

  void canonicalize() {
    // Shrink the period to its primitive root.
    size_t m = period_.size();
    for (size_t d = 1; d <= m / 2; ++d) {
      if (m % d != 0) continue;
      bool rep = true;
      for (size_t i = d; i < m && rep; ++i) rep = period_[i] == period_[i % d];
      if (rep) {
        period_.resize(d);
        break;
      }
    }
    // Shrink the prefix while its last bit matches the period bit that
    // would cover that position; the period rotates right each time.
    while (!prefix_.empty() && prefix_.back() == period_.back()) {
      prefix_.pop_back();
      period_.insert(period_.begin(), period_.back());
      period_.pop_back();
    }
  }
};

// Coding of naturals as reals: n ones followed by zeros.
inline EPReal encode_natural(std::uint64_t n) {
  return EPReal(Bits(n, 1), {0});
}

// Inverse of encode_natural; empty for reals of any other shape.
inline std::optional<std::uint64_t> decode_natural(const EPReal& r) {
  if (r.period() != Bits{0}) return std::nullopt;
  for (auto b : r.prefix())
    if (b != 1) return std::nullopt;
  return r.prefix().size();
}

// Cantor pairing.
inline std::uint64_t pair(std::uint64_t i, std::uint64_t j) {
  std::uint64_t s = i + j;
  return s * (s + 1) / 2 + j;
}

inline std::pair<std::uint64_t, std::uint64_t> unpair(std::uint64_t n) {
  // Largest s with s(s+1)/2 <= n.
  std::uint64_t s = 0;
  while ((s + 1) * (s + 2) / 2 <= n) ++s;
  std::uint64_t j = n - s * (s + 1) / 2;
  return {s - j, j};
}

// A binary relation on naturals coded into a single real: i is related to j
// exactly when bit pair(i,j) is set.
struct RelationCode {
  EPReal real;

  bool related(std::uint64_t i, std::uint64_t j) const { return real.bit(pair(i, j)) == 1; }
};

inline RelationCode encode_relation(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& pairs) {
  std::uint64_t hi = 0;
  for (auto [i, j] : pairs) hi = std::max(hi, pair(i, j) + 1);
  Bits p(hi, 0);
  for (auto [i, j] : pairs) p[pair(i, j)] = 1;
  return RelationCode{EPReal(std::move(p), {0})};
}

// All related pairs with code position below bound.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> materialize_relation(
    const RelationCode& r, std::uint64_t bound) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::uint64_t n = 0; n < bound; ++n)
    if (r.real.bit(n) == 1) out.push_back(unpair(n));
  return out;
}

}  // namespace ittm
