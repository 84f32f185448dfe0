#pragma once

// Stepwise reference interpreter: runs successor stages one public step()
// at a time over full EPReal configurations. Slow and obviously correct;
// the leap engine is held against it.

#include <optional>
#include <random>
#include <vector>

#include "ittm/leap.hpp"
#include "ittm/machine.hpp"

namespace naive {

struct StepTrace {
  // trace[t] is the configuration t successor stages after the start; if
  // the machine halts, the final entry is the terminal snapshot.
  std::vector<ittm::Configuration> trace;
  bool halted = false;
};

inline StepTrace run_steps(const ittm::Program& p, ittm::Configuration start,
                           const ittm::Oracle* oracle, std::uint64_t max_steps) {
  StepTrace out;
  out.trace.push_back(std::move(start));
  for (std::uint64_t t = 0; t < max_steps; ++t) {
    const ittm::Configuration& cur = out.trace.back();
    ittm::Configuration next = p.query() && cur.state == *p.query()
                                   ? ittm::answer_query(cur, p, *oracle)
                                   : ittm::step(p, cur);
    bool stop = next.halted();
    out.trace.push_back(std::move(next));
    if (stop) {
      out.halted = true;
      break;
    }
  }
  return out;
}

// Dense random programs over 3 tapes; the middle state doubles as limit.
inline ittm::Program random_program(std::mt19937_64& rng, int num_states = 3) {
  std::uniform_int_distribution<int> bit(0, 1), mv(0, 2), tgt(0, num_states * 8 - 1);
  std::vector<ittm::MachineState> states;
  for (int s = 0; s < num_states; ++s) {
    ittm::MachineState st;
    st.name = "q" + std::to_string(s);
    for (int k = 0; k < 8; ++k) {
      ittm::Rule r;
      for (int t = 0; t < 3; ++t) r.write[size_t(t)] = std::uint8_t(bit(rng));
      int m = mv(rng);
      r.move = m == 0 ? ittm::Move::left : m == 1 ? ittm::Move::stay : ittm::Move::right;
      int g = tgt(rng);
      r.next = g < num_states * 7 ? std::uint32_t(g % num_states) : ittm::kHaltTarget;
      st.rules.push_back(r);
    }
    states.push_back(std::move(st));
  }
  return ittm::Program(3, std::move(states), 0, std::uint32_t(num_states > 1 ? 1 : 0));
}

}  // namespace naive
