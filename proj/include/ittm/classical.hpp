#pragma once

// Ordinary finite-time Turing machines on one binary one-way-infinite tape,
// kept as data so they can be embedded into transfinite programs by product
// construction. A move left at cell 0 keeps the head at 0, matching the
// transfinite convention, so embedded behavior is act-for-act identical.
//
// Text form (line oriented, '#' starts a comment, vocabulary as in the
// program assembler):
//   start <name>
//   state <name>:
//     on 0 write <0|1> move <L|R|S> goto <name|halt>
//     on 1 write <0|1> move <L|R|S> goto <name|halt>

#include <array>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ittm/machine.hpp"

namespace ittm {

struct ClassicalRule {
  std::uint8_t write = 0;
  Move move = Move::stay;
  std::uint32_t next = 0;  // kHaltTarget halts
  friend bool operator==(const ClassicalRule&, const ClassicalRule&) = default;
};

struct ClassicalState {
  std::string name;
  std::array<ClassicalRule, 2> rules;  // indexed by the read bit
  friend bool operator==(const ClassicalState&, const ClassicalState&) = default;
};

class ClassicalTM {
 public:
  ClassicalTM(std::vector<ClassicalState> states, std::uint32_t start)
      : states_(std::move(states)), start_(start) {
    if (states_.empty()) throw program_error("classical machine has no states");
    if (start_ >= states_.size()) throw program_error("undefined classical start state");
    for (const auto& s : states_)
      for (const auto& r : s.rules) {
        if (r.write > 1) throw program_error("non-binary classical write");
        if (r.next != kHaltTarget && r.next >= states_.size())
          throw program_error("classical state " + s.name + " targets an undefined state");
      }
  }

  const std::vector<ClassicalState>& states() const { return states_; }
  std::uint32_t start() const { return start_; }

  std::optional<std::uint32_t> index_of(const std::string& name) const {
    for (std::uint32_t i = 0; i < states_.size(); ++i)
      if (states_[i].name == name) return i;
    return std::nullopt;
  }

  friend bool operator==(const ClassicalTM& a, const ClassicalTM& b) {
    return a.states_ == b.states_ && a.start_ == b.start_;
  }

 private:
  std::vector<ClassicalState> states_;
  std::uint32_t start_;
};

inline ClassicalTM parse_ctm(const std::string& source) {
  auto fail = [](int line_no, const std::string& what) -> void {
    throw program_error("line " + std::to_string(line_no) + ": " + what);
  };

  std::vector<ClassicalState> states;
  std::vector<std::array<std::string, 2>> targets;  // by name, resolved later
  std::vector<std::array<bool, 2>> covered;
  std::string start_name;
  int open = -1;

  std::istringstream is(source);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) toks.push_back(t);
    if (toks.empty()) continue;

    if (toks[0] == "start") {
      if (toks.size() != 2) fail(line_no, "expected: start <name>");
      start_name = toks[1];
    } else if (toks[0] == "state") {
      if (toks.size() != 2 || toks[1].back() != ':') fail(line_no, "expected: state <name>:");
      std::string name = toks[1].substr(0, toks[1].size() - 1);
      for (const auto& s : states)
        if (s.name == name) fail(line_no, "state " + name + " redefined");
      states.push_back({name, {}});
      targets.push_back({});
      covered.push_back({false, false});
      open = int(states.size()) - 1;
    } else if (toks[0] == "on") {
      if (open < 0) fail(line_no, "rule outside a state block");
      if (toks.size() != 8 || toks[2] != "write" || toks[4] != "move" || toks[6] != "goto")
        fail(line_no, "expected: on <bit> write <bit> move <L|R|S> goto <target>");
      auto bit = [&](const std::string& s) -> std::uint8_t {
        if (s != "0" && s != "1") fail(line_no, "bad bit " + s);
        return std::uint8_t(s == "1");
      };
      std::uint8_t read = bit(toks[1]);
      if (covered[open][read]) fail(line_no, "duplicate rule for read " + toks[1]);
      covered[open][read] = true;
      ClassicalRule& r = states[open].rules[read];
      r.write = bit(toks[3]);
      if (toks[5] == "L")
        r.move = Move::left;
      else if (toks[5] == "R")
        r.move = Move::right;
      else if (toks[5] == "S")
        r.move = Move::stay;
      else
        fail(line_no, "bad move " + toks[5]);
      targets[open][read] = toks[7];
    } else {
      fail(line_no, "unrecognized directive " + toks[0]);
    }
  }

  for (size_t i = 0; i < states.size(); ++i)
    for (int b = 0; b < 2; ++b)
      if (!covered[i][b])
        throw program_error("state " + states[i].name + " has no rule for read " +
                            std::to_string(b));

  auto resolve = [&](const std::string& name) -> std::uint32_t {
    if (name == "halt") return kHaltTarget;
    for (std::uint32_t i = 0; i < states.size(); ++i)
      if (states[i].name == name) return i;
    throw program_error("undefined state " + name);
  };
  for (size_t i = 0; i < states.size(); ++i)
    for (int b = 0; b < 2; ++b) states[i].rules[b].next = resolve(targets[i][b]);

  if (start_name.empty()) throw program_error("missing start declaration");
  return ClassicalTM(std::move(states), resolve(start_name));
}

inline std::string format_ctm(const ClassicalTM& m) {
  std::ostringstream os;
  os << "start " << m.states()[m.start()].name << "\n";
  for (const auto& s : m.states()) {
    os << "state " << s.name << ":\n";
    for (int b = 0; b < 2; ++b) {
      const ClassicalRule& r = s.rules[b];
      os << "  on " << b << " write " << int(r.write) << " move "
         << (r.move == Move::left ? 'L' : r.move == Move::right ? 'R' : 'S') << " goto "
         << (r.next == kHaltTarget ? "halt" : m.states()[r.next].name) << "\n";
    }
  }
  return os.str();
}

}  // namespace ittm
