// Count-through decider for well-orderedness of Cantor-coded relations.
//
// Input: a relation real, bit pair(i,j) set iff i R j. The decider covers
// fields inside a fixed envelope, elements 0..kMaxElement, so every edge
// bit lives at a cell <= kTopCode. Every scanning state is pinned to one
// fixed cell; positions live in the state index, never on a tape.
//
// Block 0 consumes edges left to right onto the scratch copy, checking each
// against every earlier edge: transitive closures must already be present,
// distinct elements of the two edges must be comparable, a diagonal bit or a
// missing requirement halts with output 0 at a finite stage. Later blocks
// alternate find-least scans with erase sweeps. A find scan seeds its guess
// from the first copied edge and restarts whenever the guess has an incoming
// edge, flashing the output-0 flag on and off at every change; the guess is
// parked in unary on the fourth tape. The following block erases every copy
// bit mentioning the guess. A find scan over an empty copy leaves the found
// bit clear and the next limit dispatch accepts with output 1. A flag still
// set at a limit rejects. Bits coding elements beyond the envelope drive the
// run into a growing bounce that never certifies, so the step budget ends
// the run Undetermined rather than guessing.
//
// Tape use: input = unconsumed edges, scratch = consumed copy, output =
// flag at cell 0 and erase-phase bit at cell 1, fourth = phase bit at cell
// 0, found bit at cell 1, guess run from cell 2.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "machine.hpp"
#include "tape.hpp"

namespace ittm {

namespace wo_detail {

inline constexpr std::uint64_t kMaxElement = 3;
inline constexpr std::uint64_t kTopCode = 24;  // pair(kMaxElement, kMaxElement)
inline constexpr std::uint64_t kTopEdge = 18;  // largest off-diagonal code in the envelope

enum class cell_kind { valid, diagonal, foreign };

inline cell_kind classify(std::uint64_t code) {
  auto [a, b] = unpair(code);
  if (a > kMaxElement || b > kMaxElement) return cell_kind::foreign;
  return a == b ? cell_kind::diagonal : cell_kind::valid;
}

// -1 echoes the read bit, 0/1 overwrite.
using write_spec = std::array<int, 4>;
inline constexpr write_spec kKeep{-1, -1, -1, -1};

inline Rule act(std::uint8_t key, const write_spec& w, Move m, std::uint32_t next) {
  Rule r;
  for (std::uint32_t t = 0; t < 4; ++t)
    r.write[t] = w[t] < 0 ? std::uint8_t((key >> t) & 1u) : std::uint8_t(w[t]);
  r.move = m;
  r.next = next;
  return r;
}

struct builder {
  std::vector<MachineState> states;
  std::uint64_t walk_count = 0;

  std::uint32_t fresh(std::string name) {
    states.push_back({std::move(name), std::vector<Rule>(16)});
    return std::uint32_t(states.size() - 1);
  }

  template <class F>
  void fill(std::uint32_t st, F f) {
    for (std::uint32_t k = 0; k < 16; ++k) states[st].rules[k] = f(std::uint8_t(k));
  }

  void uniform(std::uint32_t st, const write_spec& w, Move m, std::uint32_t next) {
    fill(st, [&](std::uint8_t key) { return act(key, w, m, next); });
  }

  // Echo states stepping from one fixed cell to another; `then` acts at `to`.
  std::uint32_t walk(std::uint64_t from, std::uint64_t to, std::uint32_t then) {
    if (from == to) return then;
    Move m = to > from ? Move::right : Move::left;
    std::uint64_t steps = to > from ? to - from : from - to;
    std::uint32_t next = then;
    for (std::uint64_t s = 0; s < steps; ++s) {  // built nearest to `to` first
      std::uint32_t st = fresh("walk_" + std::to_string(walk_count++));
      uniform(st, kKeep, m, next);
      next = st;
    }
    return next;
  }
};

// Requirements for admitting edge (i,j) given the earlier edge (u,v): each
// set lists cells of which at least one must carry an edge bit. A chain
// closing onto the diagonal can never be satisfied and rejects outright.
struct check {
  bool reject = false;
  std::vector<std::vector<std::uint64_t>> sets;
};

inline check make_check(std::uint64_t i, std::uint64_t j, std::uint64_t u, std::uint64_t v) {
  check c;
  auto add = [&](std::vector<std::uint64_t> s) {
    std::sort(s.begin(), s.end());
    for (const auto& have : c.sets)
      if (have == s) return;
    c.sets.push_back(std::move(s));
  };
  if (v == i) {  // chain u -> i -> j needs (u,j)
    if (u == j) {
      c.reject = true;
      return c;
    }
    add({pair(u, j)});
  }
  if (j == u) {  // chain i -> u -> v needs (i,v)
    if (i == v) {
      c.reject = true;
      return c;
    }
    add({pair(i, v)});
  }
  const std::pair<std::uint64_t, std::uint64_t> across[] = {{i, u}, {i, v}, {j, u}, {j, v}};
  for (auto [a, bb] : across) {  // comparability between the two edges' elements
    if (a == bb) continue;
    if ((a == i && bb == j) || (a == j && bb == i)) continue;
    if ((a == u && bb == v) || (a == v && bb == u)) continue;
    add({pair(a, bb), pair(bb, a)});
  }
  return c;
}

// Probe chain running the checklist for (k, kp); enters acting at kp and
// leaves through `cont` acting at cont_pos. Probes read edge presence as
// input-or-copy, so consumed and pending edges count alike.
inline std::uint32_t build_checks(builder& b, std::uint64_t k, std::uint64_t kp,
                                  const check& c, std::uint32_t cont,
                                  std::uint64_t cont_pos) {
  size_t n = c.sets.size();
  if (n == 0) return b.walk(kp, cont_pos, cont);
  std::string tag = "check_" + std::to_string(k) + "_" + std::to_string(kp) + "_";
  std::vector<std::uint32_t> first(n), second(n, 0);
  for (size_t s = 0; s < n; ++s) {
    first[s] = b.fresh(tag + std::to_string(s));
    if (c.sets[s].size() == 2) second[s] = b.fresh(tag + std::to_string(s) + "b");
  }
  for (size_t s = 0; s < n; ++s) {
    std::uint64_t c1 = c.sets[s][0];
    std::uint64_t next_pos = s + 1 < n ? c.sets[s + 1][0] : cont_pos;
    std::uint32_t next_st = s + 1 < n ? first[s + 1] : cont;
    std::uint32_t ok1 = b.walk(c1, next_pos, next_st);
    if (c.sets[s].size() == 1) {
      b.fill(first[s], [&](std::uint8_t key) {
        return (key & 3u) ? act(key, kKeep, Move::stay, ok1)
                          : act(key, kKeep, Move::stay, kHaltTarget);
      });
    } else {
      std::uint64_t c2 = c.sets[s][1];
      std::uint32_t ok2 = b.walk(c2, next_pos, next_st);
      std::uint32_t go2 = b.walk(c1, c2, second[s]);
      b.fill(first[s], [&](std::uint8_t key) {
        return (key & 3u) ? act(key, kKeep, Move::stay, ok1)
                          : act(key, kKeep, Move::stay, go2);
      });
      b.fill(second[s], [&](std::uint8_t key) {
        return (key & 3u) ? act(key, kKeep, Move::stay, ok2)
                          : act(key, kKeep, Move::stay, kHaltTarget);
      });
    }
  }
  return b.walk(kp, c.sets[0][0], first[0]);
}

inline Program build() {
  builder b;

  std::uint32_t p0 = b.fresh("start");
  std::uint32_t trap_grow = b.fresh("overflow_grow");
  std::uint32_t trap_back = b.fresh("overflow_back");
  std::uint32_t a_tail = b.fresh("consume_tail");
  std::uint32_t b_march = b.fresh("find_tail");
  std::uint32_t e_march = b.fresh("erase_tail");
  std::uint32_t d_acc = b.fresh("accept");
  std::uint32_t d_rej = b.fresh("reject_flag");
  std::uint32_t d_probe = b.fresh("dispatch_probe");
  std::uint32_t limit = b.fresh("limit");

  std::array<std::uint32_t, kTopCode + 1> seek{};
  for (std::uint64_t k = 1; k <= kTopCode; ++k)
    seek[k] = b.fresh("consume_" + std::to_string(k));

  // scan[k][kp]: after consuming edge k, revisit copied cell kp
  std::array<std::array<std::uint32_t, kTopCode>, kTopCode + 1> scan{};
  for (std::uint64_t k = 2; k <= kTopCode; ++k) {
    if (classify(k) != cell_kind::valid) continue;
    for (std::uint64_t kp = 1; kp < k; ++kp)
      scan[k][kp] = b.fresh("scan_" + std::to_string(k) + "_" + std::to_string(kp));
  }

  std::array<std::uint32_t, kTopEdge + 1> find_first{};
  for (std::uint64_t k = 1; k <= kTopEdge; ++k)
    find_first[k] = b.fresh("find_seed_" + std::to_string(k));

  std::array<std::array<std::uint32_t, kTopEdge + 1>, kMaxElement + 1> find_g{};
  std::array<std::array<std::uint32_t, kTopEdge + 1>, kMaxElement + 1> erase_g{};
  for (std::uint64_t g = 0; g <= kMaxElement; ++g)
    for (std::uint64_t k = 1; k <= kTopEdge; ++k) {
      find_g[g][k] = b.fresh("find_g" + std::to_string(g) + "_" + std::to_string(k));
      erase_g[g][k] = b.fresh("erase_g" + std::to_string(g) + "_" + std::to_string(k));
    }

  std::array<std::uint32_t, 7> clear_guess{};
  std::array<std::uint32_t, 7> read_guess{};
  for (std::uint64_t x = 2; x <= 6; ++x) {
    clear_guess[x] = b.fresh("clear_guess_" + std::to_string(x));
    read_guess[x] = b.fresh("read_guess_" + std::to_string(x));
  }

  // Growing bounce: stretches an output run rightward with a dip after each
  // extension, so no block it owns ever certifies.
  b.fill(trap_grow, [&](std::uint8_t key) {
    return (key >> 2) & 1u ? act(key, kKeep, Move::right, trap_grow)
                           : act(key, {-1, -1, 1, -1}, Move::left, trap_back);
  });
  b.fill(trap_back, [&](std::uint8_t key) {
    return (key >> 2) & 1u ? act(key, kKeep, Move::left, trap_back)
                           : act(key, kKeep, Move::right, trap_grow);
  });

  // Closing marches; each one's first recurrence certifies its block.
  b.uniform(b_march, kKeep, Move::right, b_march);
  b.uniform(e_march, kKeep, Move::right, e_march);
  b.fill(a_tail, [&](std::uint8_t key) {
    return key & 1u ? act(key, kKeep, Move::stay, trap_grow)
                    : act(key, kKeep, Move::right, a_tail);
  });

  b.uniform(d_acc, {-1, -1, 1, -1}, Move::stay, kHaltTarget);
  b.uniform(d_rej, {-1, -1, 0, -1}, Move::stay, kHaltTarget);

  // Seed and change sequences share shape: flash the flag on and off, set
  // the found bit, lay down the guess run, return to cell 1.
  std::array<std::uint32_t, kMaxElement + 1> seed_entry{};
  std::array<std::uint32_t, kMaxElement + 1> change_entry{};
  for (std::uint64_t g = 0; g <= kMaxElement; ++g) {
    std::string sg = std::to_string(g);
    {
      std::uint32_t next = b.walk(g + 1, 1, find_g[g][1]);
      for (std::uint64_t t = g + 1; t-- > 0;) {
        std::uint32_t one = b.fresh("seed_one" + sg + "_" + std::to_string(t));
        b.uniform(one, {-1, -1, -1, 1}, t == g ? Move::left : Move::right, next);
        next = one;
      }
      std::uint32_t found = b.fresh("seed_found" + sg);
      b.uniform(found, {-1, -1, -1, 1}, Move::right, next);
      std::uint32_t off = b.fresh("seed_flag_off" + sg);
      b.uniform(off, {-1, -1, 0, -1}, Move::right, found);
      std::uint32_t on = b.fresh("seed_flag_on" + sg);
      b.uniform(on, {-1, -1, 1, -1}, Move::stay, off);
      seed_entry[g] = on;
    }
    {
      std::uint32_t next = b.walk(g + 1, 1, find_g[g][1]);
      for (std::uint64_t t = g + 1; t-- > 0;) {
        std::uint32_t one = b.fresh("chg_one" + sg + "_" + std::to_string(t));
        b.uniform(one, {-1, -1, -1, 1}, t == g ? Move::left : Move::right, next);
        next = one;
      }
      next = b.walk(5, 2, next);  // back from the cleared run's end
      for (std::uint64_t x = 6; x >= 2; --x) {
        std::uint32_t cl = b.fresh("chg_clear" + sg + "_" + std::to_string(x));
        b.uniform(cl, {-1, -1, -1, 0}, x == 6 ? Move::left : Move::right, next);
        next = cl;
      }
      std::uint32_t found = b.fresh("chg_found" + sg);
      b.uniform(found, {-1, -1, -1, 1}, Move::right, next);
      std::uint32_t off = b.fresh("chg_flag_off" + sg);
      b.uniform(off, {-1, -1, 0, -1}, Move::right, found);
      std::uint32_t on = b.fresh("chg_flag_on" + sg);
      b.uniform(on, {-1, -1, 1, -1}, Move::stay, off);
      change_entry[g] = on;
    }
  }

  // Limit dispatch at cell 0. Key bits: input, scratch, output flag, phase.
  b.fill(limit, [&](std::uint8_t key) {
    if (key & 3u) return act(key, kKeep, Move::stay, trap_grow);
    bool flag = (key >> 2) & 1u, phase = (key >> 3) & 1u;
    if (!flag && !phase) return act(key, {-1, -1, -1, 1}, Move::right, find_first[1]);
    if (!flag) return act(key, kKeep, Move::right, d_probe);
    if (phase) return act(key, {-1, -1, 0, -1}, Move::right, d_rej);
    return act(key, kKeep, Move::stay, trap_grow);
  });

  // Cell 1 probe: erase-phase bit on output, found bit on the fourth tape.
  b.fill(d_probe, [&](std::uint8_t key) {
    bool sub = (key >> 2) & 1u, found = (key >> 3) & 1u;
    if (sub) return act(key, {-1, -1, 0, 0}, Move::right, clear_guess[2]);
    if (found) return act(key, {-1, -1, 1, -1}, Move::right, read_guess[2]);
    return act(key, kKeep, Move::left, d_acc);
  });

  for (std::uint64_t x = 2; x <= 6; ++x) {
    std::uint32_t back_find = b.walk(x - 1, 1, find_first[1]);
    b.fill(clear_guess[x], [&](std::uint8_t key) {
      if ((key >> 3) & 1u)
        return x < 6 ? act(key, {-1, -1, -1, 0}, Move::right, clear_guess[x + 1])
                     : act(key, kKeep, Move::stay, trap_grow);
      return act(key, kKeep, Move::left, back_find);
    });
    std::uint32_t to_erase =
        x >= 3 ? b.walk(x - 1, 1, erase_g[x - 3][1]) : trap_grow;
    b.fill(read_guess[x], [&](std::uint8_t key) {
      if ((key >> 3) & 1u)
        return x < 6 ? act(key, kKeep, Move::right, read_guess[x + 1])
                     : act(key, kKeep, Move::stay, trap_grow);
      return x >= 3 ? act(key, kKeep, Move::left, to_erase)
                    : act(key, kKeep, Move::stay, trap_grow);
    });
  }

  b.fill(p0, [&](std::uint8_t key) {
    return key & 1u ? act(key, kKeep, Move::stay, kHaltTarget)
                    : act(key, kKeep, Move::right, seek[1]);
  });

  for (std::uint64_t k = 1; k <= kTopCode; ++k) {
    std::uint32_t onward = k < kTopCode ? seek[k + 1] : a_tail;
    cell_kind kind = classify(k);
    std::uint32_t consumed_next = 0;
    if (kind == cell_kind::valid)
      consumed_next = k == 1 ? seek[2] : scan[k][k - 1];
    b.fill(seek[k], [&](std::uint8_t key) {
      if (!(key & 1u)) return act(key, kKeep, Move::right, onward);
      if (kind == cell_kind::diagonal) return act(key, kKeep, Move::stay, kHaltTarget);
      if (kind == cell_kind::foreign) return act(key, kKeep, Move::stay, trap_grow);
      if ((key >> 1) & 1u) return act(key, kKeep, Move::stay, trap_grow);
      return act(key, {0, 1, -1, -1}, k == 1 ? Move::right : Move::left, consumed_next);
    });
  }

  for (std::uint64_t k = 2; k <= kTopCode; ++k) {
    if (classify(k) != cell_kind::valid) continue;
    auto [i, j] = unpair(k);
    for (std::uint64_t kp = 1; kp < k; ++kp) {
      std::uint32_t cont = kp > 1 ? scan[k][kp - 1] : seek[2];
      std::uint64_t cont_pos = kp > 1 ? kp - 1 : 2;
      Move cont_move = kp > 1 ? Move::left : Move::right;
      std::uint32_t on_copy = trap_grow;
      bool rejects = false;
      if (classify(kp) == cell_kind::valid) {
        auto [u, v] = unpair(kp);
        check c = make_check(i, j, u, v);
        if (c.reject)
          rejects = true;
        else
          on_copy = build_checks(b, k, kp, c, cont, cont_pos);
      }
      std::uint32_t checks = on_copy;
      bool reject_here = rejects;
      b.fill(scan[k][kp], [&](std::uint8_t key) {
        if (!((key >> 1) & 1u)) return act(key, kKeep, cont_move, cont);
        if (reject_here) return act(key, kKeep, Move::stay, kHaltTarget);
        return act(key, kKeep, Move::stay, checks);
      });
    }
  }

  for (std::uint64_t k = 1; k <= kTopEdge; ++k) {
    std::uint32_t onward = k < kTopEdge ? find_first[k + 1] : b_march;
    bool valid = classify(k) == cell_kind::valid;
    std::uint32_t to_seed =
        valid ? b.walk(k, 0, seed_entry[unpair(k).first]) : trap_grow;
    b.fill(find_first[k], [&](std::uint8_t key) {
      if (!((key >> 1) & 1u)) return act(key, kKeep, Move::right, onward);
      return valid ? act(key, kKeep, Move::stay, to_seed)
                   : act(key, kKeep, Move::stay, trap_grow);
    });
  }

  for (std::uint64_t g = 0; g <= kMaxElement; ++g)
    for (std::uint64_t k = 1; k <= kTopEdge; ++k) {
      std::uint32_t onward = k < kTopEdge ? find_g[g][k + 1] : b_march;
      bool incoming =
          classify(k) == cell_kind::valid && unpair(k).second == g;
      std::uint32_t to_change =
          incoming ? b.walk(k, 0, change_entry[unpair(k).first]) : 0;
      b.fill(find_g[g][k], [&](std::uint8_t key) {
        if (incoming && ((key >> 1) & 1u))
          return act(key, kKeep, Move::stay, to_change);
        return act(key, kKeep, Move::right, onward);
      });

      std::uint32_t e_onward = k < kTopEdge ? erase_g[g][k + 1] : e_march;
      bool mentions = classify(k) == cell_kind::valid &&
                      (unpair(k).first == g || unpair(k).second == g);
      if (mentions)
        b.uniform(erase_g[g][k], {-1, 0, -1, -1}, Move::right, e_onward);
      else
        b.uniform(erase_g[g][k], kKeep, Move::right, e_onward);
    }

  return Program(4, std::move(b.states), p0, limit);
}

}  // namespace wo_detail

// Decides whether the relation on the input tape is a strict well-order;
// over its envelope (finite fields within 0..wo_detail::kMaxElement) that
// is exactly a strict linear order. Halts with output 1 on accept, output
// 0 at a finite stage on reject; inputs outside the envelope exhaust the
// step budget and come back Undetermined.
inline Program wo_decider() { return wo_detail::build(); }

}  // namespace ittm
