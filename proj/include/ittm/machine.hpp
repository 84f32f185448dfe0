#pragma once

// Program tables, machine configurations, the successor-step rule, and the
// oracle query protocol.
//
// A program runs over 3 tapes (input, scratch, output) or 4 (adds an oracle
// tape), with a single head shared by all tapes. States are indexed; halt is
// the sentinel target kHaltTarget rather than a state row. The limit state
// is an ordinary row entered by the executor at limit stages; query/yes/no
// exist only on oracle-enabled programs, and rules out of query are carried
// in the table but superseded by answer_query at run time.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ittm/tape.hpp"

namespace ittm {

inline constexpr std::uint32_t kHaltTarget = 0xFFFFFFFFu;

enum class Move : std::uint8_t { left, stay, right };

inline char move_letter(Move m) { return m == Move::left ? 'L' : m == Move::stay ? 'S' : 'R'; }

inline Move move_from_letter(char c) {
  switch (c) {
    case 'L': return Move::left;
    case 'S': return Move::stay;
    case 'R': return Move::right;
    default: throw std::invalid_argument("bad move letter");
  }
}

struct Rule {
  std::array<std::uint8_t, 4> write{};  // first tape_count entries used
  Move move = Move::stay;
  std::uint32_t next = kHaltTarget;

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct MachineState {
  std::string name;
  std::vector<Rule> rules;  // dense, indexed by read key; size 1 << tape_count

  friend bool operator==(const MachineState&, const MachineState&) = default;
};

struct program_error : std::runtime_error {
  explicit program_error(const std::string& what) : std::runtime_error(what) {}
};

class Program {
 public:
  Program(std::uint32_t tape_count, std::vector<MachineState> states, std::uint32_t start,
          std::uint32_t limit, std::optional<std::uint32_t> query = std::nullopt,
          std::optional<std::uint32_t> yes = std::nullopt,
          std::optional<std::uint32_t> no = std::nullopt)
      : tape_count_(tape_count),
        states_(std::move(states)),
        start_(start),
        limit_(limit),
        query_(query),
        yes_(yes),
        no_(no) {
    validate();
  }

  std::uint32_t tape_count() const { return tape_count_; }
  const std::vector<MachineState>& states() const { return states_; }
  const MachineState& state(std::uint32_t i) const { return states_[i]; }
  std::uint32_t start() const { return start_; }
  std::uint32_t limit() const { return limit_; }
  std::optional<std::uint32_t> query() const { return query_; }
  std::optional<std::uint32_t> yes() const { return yes_; }
  std::optional<std::uint32_t> no() const { return no_; }
  bool uses_oracle() const { return query_.has_value(); }

  const Rule& rule(std::uint32_t state, std::uint8_t read_key) const {
    return states_[state].rules[read_key];
  }

  std::optional<std::uint32_t> index_of(const std::string& name) const {
    for (std::uint32_t i = 0; i < states_.size(); ++i)
      if (states_[i].name == name) return i;
    return std::nullopt;
  }

  const std::string& state_name(std::uint32_t i) const {
    static const std::string halt = "halt";
    return i == kHaltTarget ? halt : states_[i].name;
  }

  friend bool operator==(const Program& a, const Program& b) {
    return a.tape_count_ == b.tape_count_ && a.states_ == b.states_ && a.start_ == b.start_ &&
           a.limit_ == b.limit_ && a.query_ == b.query_ && a.yes_ == b.yes_ && a.no_ == b.no_;
  }

 private:
  std::uint32_t tape_count_;
  std::vector<MachineState> states_;
  std::uint32_t start_, limit_;
  std::optional<std::uint32_t> query_, yes_, no_;

  void validate() const {
    if (tape_count_ != 3 && tape_count_ != 4) throw program_error("tape count must be 3 or 4");
    if (states_.empty()) throw program_error("program has no states");
    size_t keys = size_t(1) << tape_count_;
    for (const auto& s : states_) {
      if (s.rules.size() != keys)
        throw program_error("state " + s.name + " is not total over read vectors");
      for (const auto& r : s.rules) {
        if (r.next != kHaltTarget && r.next >= states_.size())
          throw program_error("state " + s.name + " targets an undefined state");
        for (std::uint32_t t = 0; t < tape_count_; ++t)
          if (r.write[t] > 1) throw program_error("non-binary write");
      }
    }
    if (start_ >= states_.size()) throw program_error("undefined start state");
    if (limit_ >= states_.size()) throw program_error("undefined limit state");
    bool any_oracle = query_ || yes_ || no_;
    if (any_oracle) {
      if (!(query_ && yes_ && no_))
        throw program_error("oracle programs need query, yes and no states");
      if (tape_count_ != 4) throw program_error("oracle programs need 4 tapes");
      if (*query_ >= states_.size() || *yes_ >= states_.size() || *no_ >= states_.size())
        throw program_error("undefined oracle state");
    }
  }
};

struct Configuration {
  std::uint32_t state = 0;  // kHaltTarget marks a terminal snapshot
  std::uint64_t head = 0;
  std::vector<EPReal> tapes;

  friend bool operator==(const Configuration&, const Configuration&) = default;

  bool halted() const { return state == kHaltTarget; }
};

// Oracle for 4-tape programs: a total membership predicate on reals.
struct Oracle {
  std::string description;
  std::function<bool(const EPReal&)> membership;

  static Oracle finite_set(std::vector<EPReal> members, std::string name = "finite set") {
    return {std::move(name), [ms = std::move(members)](const EPReal& r) {
              for (const auto& m : ms)
                if (m == r) return true;
              return false;
            }};
  }

  static Oracle complement_of(std::vector<EPReal> members, std::string name = "cofinite set") {
    return {std::move(name), [ms = std::move(members)](const EPReal& r) {
              for (const auto& m : ms)
                if (m == r) return false;
              return true;
            }};
  }
};

inline Configuration initial_configuration(const Program& p, const EPReal& input) {
  Configuration c;
  c.state = p.start();
  c.head = 0;
  c.tapes.assign(p.tape_count(), EPReal::zeros());
  c.tapes[0] = input;
  return c;
}

inline std::uint8_t read_key(const Program& p, const Configuration& c) {
  std::uint8_t key = 0;
  for (std::uint32_t t = 0; t < p.tape_count(); ++t)
    key = std::uint8_t(key | (c.tapes[t].bit(c.head) << t));
  return key;
}

// One successor step. The resulting state may be kHaltTarget (the halting
// act still performs its writes and move). Stepping from halt or from query
// is an error; query configurations advance via answer_query.
inline Configuration step(const Program& p, const Configuration& c) {
  if (c.halted()) throw std::logic_error("step from halt");
  if (p.query() && c.state == *p.query()) throw std::logic_error("step from query");
  const Rule& r = p.rule(c.state, read_key(p, c));
  Configuration out = c;
  for (std::uint32_t t = 0; t < p.tape_count(); ++t)
    if (out.tapes[t].bit(c.head) != r.write[t]) out.tapes[t] = out.tapes[t].with_bit(c.head, r.write[t]);
  switch (r.move) {
    case Move::left:
      if (out.head > 0) --out.head;
      break;
    case Move::right:
      ++out.head;
      break;
    case Move::stay: break;
  }
  out.state = r.next;
  return out;
}

// Oracle protocol: from query, the state becomes yes or no according to
// membership of the oracle tape; head and tapes are untouched.
inline Configuration answer_query(const Configuration& c, const Program& p, const Oracle& o) {
  if (!p.query() || c.state != *p.query()) throw std::logic_error("answer_query outside query state");
  Configuration out = c;
  out.state = o.membership(c.tapes[3]) ? *p.yes() : *p.no();
  return out;
}

}  // namespace ittm
