#pragma once

// Product constructions that embed ordinary Turing machines into transfinite
// programs: the classical halting decider, membership in a computably
// enumerable set, and bounded existential search over the naturals.
//
// None of these uses the oracle protocol; every non-halting branch is
// resolved by the limit state, so negative verdicts land at or just past the
// first limit while positive ones land at finite stages (halting, search) or
// just past the limit (membership).

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ittm/classical.hpp"
#include "ittm/machine.hpp"
#include "ittm/tape.hpp"

namespace ittm {

namespace decider_detail {

// write vector that leaves every tape unchanged under read key k
inline std::array<std::uint8_t, 4> echo(std::uint8_t k) {
  return {std::uint8_t(k & 1), std::uint8_t((k >> 1) & 1), std::uint8_t((k >> 2) & 1),
          std::uint8_t((k >> 3) & 1)};
}

inline MachineState uniform(std::string name, std::uint32_t key_count,
                            std::array<std::uint8_t, 4> write, Move move, std::uint32_t next) {
  MachineState s{std::move(name), std::vector<Rule>(key_count)};
  for (std::uint32_t k = 0; k < key_count; ++k) s.rules[k] = {write, move, next};
  return s;
}

inline MachineState uniform_echo(std::string name, std::uint32_t key_count, Move move,
                                 std::uint32_t next) {
  MachineState s{std::move(name), std::vector<Rule>(key_count)};
  for (std::uint32_t k = 0; k < key_count; ++k) s.rules[k] = {echo(std::uint8_t(k)), move, next};
  return s;
}

// The classical machine lives on the scratch tape: its rule for the scratch
// bit acts there while every other tape's bit is written back unchanged.
inline MachineState widen(const ClassicalState& c, std::uint32_t key_count,
                          std::uint32_t base, std::uint32_t halt_to) {
  MachineState s{"m_" + c.name, std::vector<Rule>(key_count)};
  for (std::uint32_t k = 0; k < key_count; ++k) {
    const ClassicalRule& r = c.rules[(k >> 1) & 1];
    auto w = echo(std::uint8_t(k));
    w[1] = r.write;
    s.rules[k] = {w, r.move, r.next == kHaltTarget ? halt_to : base + r.next};
  }
  return s;
}

}  // namespace decider_detail

// Does m halt when started on a tape holding n in unary (n ones from cell 0)?
// The produced program, run on input 0̄, lays the unary argument on the
// scratch tape, drops a home marker on the fourth tape at cell 0, and runs m
// in place. A halting run walks home and reports 1 at a finite stage; a
// non-halting run is cut off by the limit state, which reports 0 at the
// first limit it reaches. Whether that limit is certified depends on the
// embedded trajectory: exact loops and rightward drifts close, while
// unboundedly growing returning excursions exhaust the block budget.
inline Program halting_decider(const ClassicalTM& m, std::uint64_t n) {
  using namespace decider_detail;
  const std::uint32_t keys = 16;
  std::vector<MachineState> states;

  std::uint32_t lay_count = n >= 2 ? std::uint32_t(n - 1) : 0;
  std::uint32_t rewind = n >= 1 ? std::uint32_t(1 + lay_count) : 0;
  std::uint32_t report = n >= 1 ? rewind + 1 : 1;
  std::uint32_t base = report + 1;
  std::uint32_t wstart = base + m.start();

  if (n == 0) {
    // nothing to lay: plant the marker and start in place
    MachineState boot{"boot", std::vector<Rule>(keys)};
    for (std::uint32_t k = 0; k < keys; ++k) {
      auto w = echo(std::uint8_t(k));
      w[3] = 1;
      boot.rules[k] = {w, Move::stay, wstart};
    }
    states.push_back(std::move(boot));
  } else {
    MachineState boot{"boot", std::vector<Rule>(keys)};
    for (std::uint32_t k = 0; k < keys; ++k) {
      auto w = echo(std::uint8_t(k));
      w[1] = 1;
      w[3] = 1;
      boot.rules[k] = {w, Move::right, n >= 2 ? 1 : rewind};
    }
    states.push_back(std::move(boot));
    for (std::uint32_t j = 2; j <= n; ++j) {
      MachineState lay{"lay_" + std::to_string(j), std::vector<Rule>(keys)};
      for (std::uint32_t k = 0; k < keys; ++k) {
        auto w = echo(std::uint8_t(k));
        w[1] = 1;
        lay.rules[k] = {w, Move::right, j < n ? std::uint32_t(j) : rewind};
      }
      states.push_back(std::move(lay));
    }
    MachineState rew{"rewind", std::vector<Rule>(keys)};
    for (std::uint32_t k = 0; k < keys; ++k) {
      bool home = (k >> 3) & 1;
      rew.rules[k] = {echo(std::uint8_t(k)), home ? Move::stay : Move::left,
                      home ? wstart : rewind};
    }
    states.push_back(std::move(rew));
  }

  MachineState rep{"report", std::vector<Rule>(keys)};
  for (std::uint32_t k = 0; k < keys; ++k) {
    if ((k >> 3) & 1) {
      auto w = echo(std::uint8_t(k));
      w[2] = 1;
      w[3] = 0;
      rep.rules[k] = {w, Move::stay, kHaltTarget};
    } else {
      rep.rules[k] = {echo(std::uint8_t(k)), Move::left, report};
    }
  }
  states.push_back(std::move(rep));

  for (const auto& c : m.states()) states.push_back(widen(c, keys, base, report));

  MachineState lim{"limit", std::vector<Rule>(keys)};
  for (std::uint32_t k = 0; k < keys; ++k) {
    auto w = echo(std::uint8_t(k));
    w[2] = 0;
    w[3] = 0;
    lim.rules[k] = {w, Move::stay, kHaltTarget};
  }
  states.push_back(std::move(lim));

  return Program(4, std::move(states), 0, std::uint32_t(states.size()) - 1);
}

// Is n a member of the set enumerated by the given machine? The enumeration
// convention is positional: the machine, started on a blank tape, records
// that it has produced the value v by eventually-permanently setting its
// tape cell v+1 to 1; a cell it never stabilizes to 1 stays 0 under limsup.
// The decider runs the machine on the scratch tape through the first limit,
// then walks out to cell n+1 and reads the limit value: 1 reports
// membership at stage ω+2n+2, 0 reports non-membership at ω+n+1. A machine
// that halts is parked in a one-act spin so the limit still arrives.
inline Program ce_membership(const ClassicalTM& enumerator, std::uint64_t n) {
  using namespace decider_detail;
  const std::uint32_t keys = 8;
  std::vector<MachineState> states;

  std::uint32_t count = std::uint32_t(enumerator.states().size());
  std::uint32_t spin = count;
  std::uint32_t walk = count + 1;                      // w_1..w_n
  std::uint32_t probe = walk + std::uint32_t(n);
  std::uint32_t back = probe + 1;                      // b_0..b_n
  std::uint32_t limit = back + std::uint32_t(n) + 1;

  for (const auto& c : enumerator.states()) states.push_back(widen(c, keys, 0, spin));
  states.push_back(uniform_echo("spin", keys, Move::stay, spin));
  for (std::uint64_t i = 1; i <= n; ++i)
    states.push_back(uniform_echo("w_" + std::to_string(i), keys, Move::right,
                                  i < n ? walk + std::uint32_t(i) : probe));

  MachineState pr{"probe", std::vector<Rule>(keys)};
  for (std::uint32_t k = 0; k < keys; ++k) {
    bool marked = (k >> 1) & 1;
    pr.rules[k] = {echo(std::uint8_t(k)), marked ? Move::left : Move::stay,
                   marked ? back + std::uint32_t(n) : kHaltTarget};
  }
  states.push_back(std::move(pr));

  MachineState b0{"b_0", std::vector<Rule>(keys)};
  for (std::uint32_t k = 0; k < keys; ++k) {
    auto w = echo(std::uint8_t(k));
    w[2] = 1;
    b0.rules[k] = {w, Move::stay, kHaltTarget};
  }
  states.push_back(std::move(b0));
  for (std::uint64_t i = 1; i <= n; ++i)
    states.push_back(uniform_echo("b_" + std::to_string(i), keys, Move::left,
                                  back + std::uint32_t(i) - 1));

  states.push_back(uniform_echo("limit", keys, Move::right, n == 0 ? probe : walk));

  return Program(3, std::move(states), enumerator.start(), limit);
}

// Predicate programs usable with exists_search. The predicate is invoked
// with the scratch tape holding n+1 ones on cells 1..n+1 and the head on the
// last of them; it may read the argument real on the input tape and must
// finish with a halting act of move stay whose scratch write, one cell past
// the run, is the verdict bit. Every rule must write the input and output
// bits back unchanged, and run cells must not be lowered; workspace above
// the run is free. Bounded excursions that look only a fixed distance below
// the head keep the no-witness limit certifiable.

// bit n of the input real
inline Program bit_predicate() {
  using namespace decider_detail;
  const std::uint32_t keys = 8;
  std::vector<MachineState> states;
  states.push_back(uniform_echo("p_start", keys, Move::left, 1));
  MachineState rd{"p_read", std::vector<Rule>(keys)};
  for (std::uint32_t k = 0; k < keys; ++k)
    rd.rules[k] = {echo(std::uint8_t(k)), Move::right, (k & 1) ? 2u : 3u};
  states.push_back(std::move(rd));
  states.push_back(uniform_echo("p_yes", keys, Move::right, 4));
  states.push_back(uniform_echo("p_no", keys, Move::right, 5));
  MachineState w1{"p_w1", std::vector<Rule>(keys)};
  MachineState w0{"p_w0", std::vector<Rule>(keys)};
  for (std::uint32_t k = 0; k < keys; ++k) {
    auto a = echo(std::uint8_t(k));
    a[1] = 1;
    w1.rules[k] = {a, Move::stay, kHaltTarget};
    auto b = echo(std::uint8_t(k));
    b[1] = 0;
    w0.rules[k] = {b, Move::stay, kHaltTarget};
  }
  states.push_back(std::move(w1));
  states.push_back(std::move(w0));
  states.push_back(uniform_echo("p_limit", keys, Move::stay, kHaltTarget));
  return Program(3, std::move(states), 0, 6);
}

// ignores its argument entirely
inline Program const_predicate(bool value) {
  using namespace decider_detail;
  const std::uint32_t keys = 8;
  std::vector<MachineState> states;
  states.push_back(uniform_echo("p_skip", keys, Move::right, 1));
  MachineState w{"p_verdict", std::vector<Rule>(keys)};
  for (std::uint32_t k = 0; k < keys; ++k) {
    auto a = echo(std::uint8_t(k));
    a[1] = std::uint8_t(value);
    w.rules[k] = {a, Move::stay, kHaltTarget};
  }
  states.push_back(std::move(w));
  states.push_back(uniform_echo("p_limit", keys, Move::stay, kHaltTarget));
  return Program(3, std::move(states), 0, 2);
}

// Does some natural satisfy the given predicate of (n, x)? The produced
// program is meant to be run on input x. It grows a scratch run of ones
// whose length names the candidate under trial, invoking the predicate at
// the run's end for n = length-1; a verdict of 0 becomes the next run cell,
// so candidates are tried in order with no wasted tape, while a verdict of 1
// erases itself and triggers a walk home that reports 1 at a finite stage.
// If no candidate ever answers 1 the run swallows the tape and the limit
// state reports 0 at ω. The x argument fixes the intended input; the
// construction itself does not depend on it.
inline Program exists_search(const Program& phi, const EPReal& x) {
  using namespace decider_detail;
  (void)x;
  if (phi.tape_count() != 3) throw program_error("predicate must use 3 tapes");
  if (phi.uses_oracle()) throw program_error("predicate must not use the oracle");
  for (const auto& s : phi.states())
    for (std::uint32_t k = 0; k < s.rules.size(); ++k) {
      const Rule& r = s.rules[k];
      if (r.write[0] != (k & 1) || r.write[2] != ((k >> 2) & 1))
        throw program_error("predicate state " + s.name + " must write input and output back");
      if (r.next == kHaltTarget && r.move != Move::stay)
        throw program_error("predicate state " + s.name + " must halt in place");
    }

  const std::uint32_t keys = 8;
  std::vector<MachineState> states;
  std::uint32_t vdisp = 1, acc_walk = 2, base = 3;
  std::uint32_t limit = base + std::uint32_t(phi.states().size());

  states.push_back(uniform_echo("boot", keys, Move::right, vdisp));

  MachineState vd{"vdisp", std::vector<Rule>(keys)};
  for (std::uint32_t k = 0; k < keys; ++k) {
    auto w = echo(std::uint8_t(k));
    if ((k >> 1) & 1) {
      w[1] = 0;
      vd.rules[k] = {w, Move::left, acc_walk};
    } else {
      w[1] = 1;
      vd.rules[k] = {w, Move::stay, base + phi.start()};
    }
  }
  states.push_back(std::move(vd));

  MachineState acc{"acc_walk", std::vector<Rule>(keys)};
  for (std::uint32_t k = 0; k < keys; ++k) {
    if ((k >> 1) & 1) {
      acc.rules[k] = {echo(std::uint8_t(k)), Move::left, acc_walk};
    } else {
      auto w = echo(std::uint8_t(k));
      w[2] = 1;
      acc.rules[k] = {w, Move::stay, kHaltTarget};
    }
  }
  states.push_back(std::move(acc));

  for (const auto& s : phi.states()) {
    MachineState copy{"p_" + s.name, s.rules};
    for (auto& r : copy.rules) r.next = r.next == kHaltTarget ? vdisp : base + r.next;
    states.push_back(std::move(copy));
  }

  MachineState lim{"limit", std::vector<Rule>(keys)};
  for (std::uint32_t k = 0; k < keys; ++k) {
    auto w = echo(std::uint8_t(k));
    w[1] = 0;
    w[2] = 0;
    lim.rules[k] = {w, Move::stay, kHaltTarget};
  }
  states.push_back(std::move(lim));

  return Program(3, std::move(states), 0, limit);
}

}  // namespace ittm
