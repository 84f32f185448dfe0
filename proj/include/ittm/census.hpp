// Canonical scratch-driven program family, the parallel census over it,
// and the bounded weak-jump approximation.
//
// Family: programs with n working states, 1 <= n <= max_states, on three
// tapes, branching on the scratch bit alone; each of the 2n rules writes a
// scratch bit, moves, and names a working state or halts. State 0 is both
// start and limit state, so every limit reenters state 0 reading cell 0.
// Enumeration is lexicographic over the flattened rule table: state 0's
// scratch-0 rule is most significant, write 0 before 1, moves left, stay,
// right, targets in state order with halt last; smaller state counts come
// first. Reports drop per-run histories to keep large families in memory;
// rerunning family_program(index) reproduces any run exactly.

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "leap.hpp"
#include "machine.hpp"
#include "ordinal.hpp"
#include "tape.hpp"

namespace ittm {

inline constexpr Budgets kCensusBudgets{512, 3, 32};

namespace census_detail {

inline std::uint64_t rule_options(std::uint32_t n) { return 6ull * (n + 1); }

inline std::uint64_t ipow(std::uint64_t base, std::uint32_t exp) {
  std::uint64_t r = 1;
  while (exp--) r *= base;
  return r;
}

}  // namespace census_detail

// Number of n-state programs: (6 (n + 1)) ^ (2 n).
inline std::uint64_t family_block(std::uint32_t n) {
  return census_detail::ipow(census_detail::rule_options(n), 2 * n);
}

inline std::uint64_t family_size(std::uint32_t max_states) {
  std::uint64_t total = 0;
  for (std::uint32_t n = 1; n <= max_states; ++n) total += family_block(n);
  return total;
}

inline Program family_program(std::uint32_t max_states, std::uint64_t index) {
  std::uint32_t n = 1;
  while (n <= max_states && index >= family_block(n)) index -= family_block(n++);
  if (n > max_states) throw program_error("family index out of range");

  std::uint64_t base = census_detail::rule_options(n);
  std::vector<std::uint64_t> digits(2 * n);
  for (std::uint32_t slot = 2 * n; slot-- > 0;) {  // least significant last
    digits[slot] = index % base;
    index /= base;
  }

  std::vector<MachineState> states(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    states[s].name = "s" + std::to_string(s);
    states[s].rules.resize(8);
    for (std::uint32_t bit = 0; bit < 2; ++bit) {
      std::uint64_t d = digits[2 * s + bit];
      std::uint8_t w = std::uint8_t(d / (3 * (n + 1)));
      std::uint64_t rem = d % (3 * (n + 1));
      Move m = Move(rem / (n + 1));
      std::uint64_t t = rem % (n + 1);
      std::uint32_t next = t < n ? std::uint32_t(t) : kHaltTarget;
      for (std::uint32_t key = 0; key < 8; ++key) {
        if (((key >> 1) & 1u) != bit) continue;
        Rule& r = states[s].rules[key];
        r.write = {std::uint8_t(key & 1u), w, std::uint8_t((key >> 2) & 1u), 0};
        r.move = m;
        r.next = next;
      }
    }
  }
  return Program(3, std::move(states), 0, 0);
}

struct CensusReport {
  std::uint32_t max_states = 0;
  std::vector<RunOutcome> outcomes;  // family order, histories dropped
  std::vector<Ordinal> stages;       // sorted multiset of halting stages
  std::vector<std::pair<Ordinal, Ordinal>> gaps;  // maximal unrealized [lo, hi)
  std::uint64_t undetermined = 0;
};

namespace census_detail {

inline std::vector<RunOutcome> run_family(std::uint32_t max_states, const Budgets& budgets,
                                          unsigned jobs) {
  std::uint64_t total = family_size(max_states);
  std::vector<RunOutcome> outcomes(total);
  if (jobs == 0) jobs = 1;
  RunOptions opt;
  opt.budgets = budgets;
  std::atomic<std::uint64_t> cursor{0};
  auto worker = [&] {
    for (std::uint64_t i = cursor.fetch_add(1); i < total; i = cursor.fetch_add(1)) {
      RunOutcome out = run(family_program(max_states, i), EPReal::zeros(), nullptr, opt);
      out.history.clear();
      out.history.shrink_to_fit();
      outcomes[i] = std::move(out);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return outcomes;
}

}  // namespace census_detail

inline CensusReport census(std::uint32_t max_states, const Budgets& budgets = kCensusBudgets,
                           unsigned jobs = std::thread::hardware_concurrency()) {
  CensusReport rep;
  rep.max_states = max_states;
  rep.outcomes = census_detail::run_family(max_states, budgets, jobs);
  for (const RunOutcome& out : rep.outcomes) {
    if (out.kind == RunOutcome::Kind::halted)
      rep.stages.push_back(out.stage);
    else if (out.kind == RunOutcome::Kind::undetermined)
      ++rep.undetermined;
  }
  std::sort(rep.stages.begin(), rep.stages.end());
  for (size_t i = 0; i + 1 < rep.stages.size(); ++i) {
    if (rep.stages[i + 1] == rep.stages[i]) continue;
    Ordinal lo = add(rep.stages[i], Ordinal(1));
    if (lo < rep.stages[i + 1]) rep.gaps.push_back({std::move(lo), rep.stages[i + 1]});
  }
  return rep;
}

// Family indices whose run halts strictly below the bound; ascending.
inline std::vector<std::uint64_t> approx_weak_jump(
    const Ordinal& bound, std::uint32_t max_states, const Budgets& budgets = kCensusBudgets,
    unsigned jobs = std::thread::hardware_concurrency()) {
  std::vector<RunOutcome> outcomes = census_detail::run_family(max_states, budgets, jobs);
  std::vector<std::uint64_t> indices;
  for (std::uint64_t i = 0; i < outcomes.size(); ++i)
    if (outcomes[i].kind == RunOutcome::Kind::halted && outcomes[i].stage < bound)
      indices.push_back(i);
  return indices;
}

}  // namespace ittm
