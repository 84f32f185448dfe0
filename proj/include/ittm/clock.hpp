#pragma once

// Clock compiler: programs that halt at exactly a requested ordinal stage,
// for targets below w^3 with bounded coefficients, plus sequential
// composition of compiled clocks.
//
// Layout for a target w^2*a + w*b + c. Cell 0 of each tape is a flag column
// the limit state branches on in a single act: input[0] holds F, the
// more-limits-pending flag; scratch[0] is the flash cell that reads 1 at a
// limit iff that limit is a limit of limits; output[0] marks phase A active.
// Countdowns are runs of ones from cell 1 (A units on the output tape, B
// units on the input tape), erased rightmost-first so the live run always
// starts at cell 1. Every intra-block walk ends by drifting left forever;
// the move clamp at cell 0 turns the drift into an exact-repeat spin, so
// each block closes with an exact cycle certificate.
//
// Stage accounting: a final limit L with c = 0 halts by the one act taken
// in the limit configuration (reported stage exactly L); c >= 1 appends a
// chain of c states, giving L + c. Finite targets are plain act chains.
// Phase A units end in meta-leaps: the flash cell flips inside every block,
// so equal block-limit configurations are not divergence fixed points and
// the engine jumps to the unit's w^2 boundary, where flash reads 1.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ittm/machine.hpp"
#include "ittm/ordinal.hpp"

namespace ittm {

inline constexpr std::uint64_t kMaxClockCoefficient = 64;

struct Clock {
  Program program;
  Ordinal target;
  // set when the limit state multiplexes a marker column (see compose_clocks)
  bool marker_composed = false;
};

namespace clock_detail {

inline std::uint8_t col(int i, int s, int o) { return std::uint8_t(i | (s << 1) | (o << 2)); }

inline std::array<std::uint8_t, 4> col_bits(std::uint8_t key) {
  return {std::uint8_t(key & 1), std::uint8_t((key >> 1) & 1), std::uint8_t((key >> 2) & 1), 0};
}

struct Builder {
  std::vector<MachineState> states;

  // every key spins in place until overridden, so tables are always total
  std::uint32_t add(const std::string& name) {
    std::uint32_t idx = std::uint32_t(states.size());
    MachineState st;
    st.name = name;
    st.rules.resize(8);
    for (std::uint8_t k = 0; k < 8; ++k) st.rules[k] = Rule{col_bits(k), Move::stay, idx};
    states.push_back(std::move(st));
    return idx;
  }

  Rule& at(std::uint32_t s, std::uint8_t key) { return states[s].rules[key]; }

  void set(std::uint32_t s, std::uint8_t key, std::array<std::uint8_t, 4> write, Move m,
           std::uint32_t next) {
    states[s].rules[key] = Rule{write, m, next};
  }
};

// chain of n pass-through states ending in halt; returns the entry index
inline std::uint32_t add_chain(Builder& b, std::uint64_t n, const std::string& stem) {
  std::vector<std::uint32_t> ids;
  for (std::uint64_t i = 1; i <= n; ++i) ids.push_back(b.add(stem + std::to_string(i)));
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint32_t next = (i + 1 < n) ? ids[i + 1] : kHaltTarget;
    for (std::uint8_t k = 0; k < 8; ++k) b.set(ids[i], k, col_bits(k), Move::stay, next);
  }
  return ids.front();
}

}  // namespace clock_detail

inline Clock compile_clock(const Ordinal& target) {
  using namespace clock_detail;
  if (target.is_zero()) throw std::invalid_argument("clock target must be positive");
  std::uint64_t a = 0, b = 0, c = 0;
  for (const auto& t : target.terms()) {
    if (t.exponent > 2) throw std::invalid_argument("clock target must lie below w^3");
    if (t.coefficient > kMaxClockCoefficient)
      throw std::invalid_argument("clock target coefficient exceeds " +
                                  std::to_string(kMaxClockCoefficient));
    (t.exponent == 2 ? a : t.exponent == 1 ? b : c) = t.coefficient;
  }

  Builder bld;
  if (a == 0 && b == 0) {
    std::uint32_t entry = add_chain(bld, c, "tick");
    std::uint32_t lim = bld.add("limit");  // unreachable, the run ends before w
    return {Program(3, std::move(bld.states), entry, lim), target};
  }

  // countdown widths; with phase A present the transition act consumes the
  // first B unit, so the full b marks are laid out
  std::uint64_t ma = a ? a - 1 : 0;
  std::uint64_t mb = a ? b : (b ? b - 1 : 0);
  std::uint64_t walk = std::max(ma, mb);
  std::uint8_t f0 = a ? (a >= 2 || b >= 1) : (b >= 2);

  std::uint32_t lim = bld.add("limit");
  std::uint32_t boot = bld.add("boot");
  std::uint32_t drift = bld.add("drift");
  for (std::uint8_t k = 0; k < 8; ++k) bld.set(drift, k, col_bits(k), Move::left, drift);

  std::uint32_t flash_off = 0;
  if (a) {
    flash_off = bld.add("flash_off");
    bld.set(flash_off, col(0, 1, 1), {0, 0, 1, 0}, Move::stay, drift);
    bld.set(flash_off, col(1, 1, 1), {1, 0, 1, 0}, Move::stay, drift);
  }

  if (walk == 0) {
    if (a)  // a = 1, b = 0: flags and first flash in one act
      bld.set(boot, col(0, 0, 0), {f0, 1, 1, 0}, Move::stay, flash_off);
    // a = 0, b = 1: boot spins as laid down; the first limit is final
  } else {
    std::vector<std::uint32_t> wr;
    for (std::uint64_t i = 1; i <= walk; ++i) wr.push_back(bld.add("lay" + std::to_string(i)));
    std::uint32_t back = bld.add("rewind");
    bld.set(boot, col(0, 0, 0), {0, 0, 0, 0}, Move::right, wr[0]);
    for (std::uint64_t i = 1; i <= walk; ++i) {
      std::array<std::uint8_t, 4> w{std::uint8_t(i <= mb), 0, std::uint8_t(i <= ma), 0};
      if (i < walk)
        bld.set(wr[i - 1], col(0, 0, 0), w, Move::right, wr[i]);
      else
        bld.set(wr[i - 1], col(0, 0, 0), w, Move::left, back);
    }
    for (std::uint8_t k = 0; k < 8; ++k) {
      if ((k & 1) || (k & 4))
        bld.set(back, k, col_bits(k), Move::left, back);  // over the mark runs
      else if (a)
        bld.set(back, k, {f0, 1, 1, 0}, Move::stay, flash_off);  // flags + flash at cell 0
      else
        bld.set(back, k, {f0, 0, 0, 0}, Move::stay, drift);
    }
  }

  std::uint32_t fin = c ? add_chain(bld, c, "tail") : kHaltTarget;

  if (a && (a >= 2 || b >= 1)) {
    // dispatch walk after a non-final limit of limits
    std::uint32_t scan_a0 = bld.add("scan_a0");
    std::uint32_t scan_a1 = bld.add("scan_a1");
    std::uint32_t scan_a2 = bld.add("scan_a2");
    std::uint32_t erase_a = bld.add("erase_a");
    std::uint32_t erase_a_last = bld.add("erase_a_last");
    std::uint32_t clear_f = bld.add("clear_f");
    for (int i = 0; i <= 1; ++i)
      for (int s = 0; s <= 1; ++s) {
        bld.set(scan_a0, col(i, s, 1), col_bits(col(i, s, 1)), Move::right, scan_a1);
        bld.set(scan_a1, col(i, s, 1), col_bits(col(i, s, 1)), Move::right, scan_a2);
        bld.set(scan_a2, col(i, s, 1), col_bits(col(i, s, 1)), Move::right, scan_a2);
        bld.set(scan_a1, col(i, s, 0), col_bits(col(i, s, 0)), Move::left, erase_a_last);
        bld.set(scan_a2, col(i, s, 0), col_bits(col(i, s, 0)), Move::left, erase_a);
        bld.set(erase_a, col(i, s, 1), {std::uint8_t(i), 0, 0, 0}, Move::left, drift);
      }
    bld.set(erase_a_last, col(1, 0, 1), {1, 0, 0, 0}, Move::left, drift);    // next unit is last, b >= 1 keeps F
    bld.set(erase_a_last, col(0, 0, 1), {0, 0, 0, 0}, Move::left, clear_f);  // b = 0: final approach
    bld.set(clear_f, col(1, 0, 1), {0, 0, 1, 0}, Move::stay, drift);
    bld.set(lim, col(1, 1, 1), {1, 0, 1, 0}, Move::right, scan_a0);

    if (b) {
      // no A mark under the scan: hand over to phase B, consuming one B unit
      std::uint32_t trans_b1 = bld.add("hand_b1");
      std::uint32_t trans_b2 = bld.add("hand_b2");
      std::uint32_t trans_last = bld.add("hand_last");
      std::uint32_t trans_fin = bld.add("hand_fin");
      std::uint32_t trans_erase = bld.add("hand_erase");
      std::uint32_t trans_back = bld.add("hand_back");
      for (int s = 0; s <= 1; ++s) {
        bld.set(scan_a0, col(1, s, 0), col_bits(col(1, s, 0)), Move::right, trans_b1);
        for (int o = 0; o <= 1; ++o) {
          bld.set(trans_b1, col(1, s, o), col_bits(col(1, s, o)), Move::right, trans_b2);
          bld.set(trans_b1, col(0, s, o), col_bits(col(0, s, o)), Move::left, trans_last);
          bld.set(trans_b2, col(1, s, o), col_bits(col(1, s, o)), Move::right, trans_b2);
          bld.set(trans_b2, col(0, s, o), col_bits(col(0, s, o)), Move::left, trans_erase);
        }
      }
      bld.set(trans_last, col(1, 0, 0), {0, 0, 0, 0}, Move::left, trans_fin);
      bld.set(trans_fin, col(1, 0, 1), {0, 0, 0, 0}, Move::stay, drift);  // F off, phase A off
      bld.set(trans_erase, col(1, 0, 0), {0, 0, 0, 0}, Move::left, trans_back);
      for (int i = 0; i <= 1; ++i)
        for (int s = 0; s <= 1; ++s)
          bld.set(trans_back, col(i, s, 0), col_bits(col(i, s, 0)), Move::left, trans_back);
      bld.set(trans_back, col(1, 0, 1), {1, 0, 0, 0}, Move::stay, drift);  // phase A off, F stays
    }
  }

  if (b >= 2) {
    // simple-limit countdown walk in phase B
    std::uint32_t scan_b1 = bld.add("scan_b1");
    std::uint32_t scan_b2 = bld.add("scan_b2");
    std::uint32_t erase_b = bld.add("erase_b");
    std::uint32_t erase_b_last = bld.add("erase_b_last");
    std::uint32_t clear_fb = bld.add("clear_fb");
    std::uint32_t scan_b0 = bld.add("scan_b0");
    for (int s = 0; s <= 1; ++s)
      for (int o = 0; o <= 1; ++o) {
        bld.set(scan_b0, col(1, s, o), col_bits(col(1, s, o)), Move::right, scan_b1);
        bld.set(scan_b1, col(1, s, o), col_bits(col(1, s, o)), Move::right, scan_b2);
        bld.set(scan_b2, col(1, s, o), col_bits(col(1, s, o)), Move::right, scan_b2);
        bld.set(scan_b1, col(0, s, o), col_bits(col(0, s, o)), Move::left, erase_b_last);
        bld.set(scan_b2, col(0, s, o), col_bits(col(0, s, o)), Move::left, erase_b);
      }
    bld.set(erase_b, col(1, 0, 0), {0, 0, 0, 0}, Move::left, drift);
    bld.set(erase_b_last, col(1, 0, 0), {0, 0, 0, 0}, Move::left, clear_fb);
    bld.set(clear_fb, col(1, 0, 0), {0, 0, 0, 0}, Move::stay, drift);
    bld.set(lim, col(1, 0, 0), {1, 0, 0, 0}, Move::right, scan_b0);
  }

  if (a) {
    // simple limit inside phase A: flash on, flash off, drift
    bld.set(lim, col(0, 0, 1), {0, 1, 1, 0}, Move::stay, flash_off);
    bld.set(lim, col(1, 0, 1), {1, 1, 1, 0}, Move::stay, flash_off);
  }
  // the final limit halts (or starts the finite tail) in its first act
  std::uint8_t final_col = (b || !a) ? col(0, 0, 0) : col(0, 1, 1);
  bld.set(lim, final_col, {0, 0, 0, 0}, Move::stay, c ? fin : kHaltTarget);

  return {Program(3, std::move(bld.states), boot, lim), target};
}

namespace clock_detail {

// copy src's states into b with indices shifted, names prefixed, and every
// halt transition rewritten to `on_halt` (moving left when `halt_left`, for
// handoffs that must step from the relocated cell 0 to the marker cell)
inline std::uint32_t splice(Builder& b, const Program& src, const std::string& prefix,
                            std::uint32_t on_halt, bool halt_left) {
  std::uint32_t off = std::uint32_t(b.states.size());
  for (const auto& st : src.states()) {
    MachineState copy;
    copy.name = prefix + st.name;
    copy.rules = st.rules;
    for (auto& r : copy.rules) {
      if (r.next == kHaltTarget) {
        if (on_halt != kHaltTarget) {
          r.next = on_halt;
          if (halt_left) r.move = Move::left;
        }
      } else {
        r.next += off;
      }
    }
    b.states.push_back(std::move(copy));
  }
  return off;
}

}  // namespace clock_detail

// Sequential composition: run `first` to its halting stage, then `second`;
// the result halts at exactly add(first.target, second.target).
//
// When at most one part reaches limit stages the programs concatenate: the
// halt acts of `first` are redirected to `second`'s start, and whichever
// part owns the limit stages supplies the limit state. When both parts are
// transfinite the first runs shifted one cell right behind a marker column
// (0,1,0) at cell 0, which no compiled clock shows at any limit; the
// composed limit state routes marker limits one cell right into a copy of
// the first part's limit row, and the handoff clears the marker and starts
// the second part on pristine tapes. All walks are content-driven and every
// clock construction is position-blind except for the cell 0 clamp, which
// the drift states tolerate one cell early, so the shifted replay is exact.
//
// Marker limit rows nest as the first part (each level routes one cell
// further right), but not as the second of a transfinite pair: the inner
// marker would collide with the outer one on the shared limit state. Such
// calls throw; fold composition chains to the left instead.
inline Clock compose_clocks(const Clock& first, const Clock& second) {
  using namespace clock_detail;
  Ordinal sum = add(first.target, second.target);
  bool f_inf = !first.target.is_finite();
  bool s_inf = !second.target.is_finite();

  Builder b;
  if (!f_inf || !s_inf) {
    std::uint32_t f_off = splice(b, first.program, "f_", kHaltTarget, false);
    std::uint32_t s_off = splice(b, second.program, "s_", kHaltTarget, false);
    for (std::uint32_t i = f_off; i < s_off; ++i)
      for (auto& r : b.states[i].rules)
        if (r.next == kHaltTarget) r.next = s_off + second.program.start();
    std::uint32_t limit = s_inf ? s_off + second.program.limit() : f_off + first.program.limit();
    bool marked = s_inf ? second.marker_composed : first.marker_composed;
    return {Program(3, std::move(b.states), f_off + first.program.start(), limit), sum, marked};
  }
  if (second.marker_composed)
    throw std::invalid_argument(
        "compose_clocks: transfinite second part must not itself be marker composed; "
        "fold composition chains to the left");

  std::uint32_t mark = b.add("mark");
  std::uint32_t climit = b.add("limit");
  std::uint32_t limdisp = b.add("first_limits");
  std::uint32_t unmark = b.add("unmark");
  std::uint32_t f_off = splice(b, first.program, "f_", unmark, true);
  std::uint32_t s_off = splice(b, second.program, "s_", kHaltTarget, false);

  for (std::uint8_t k = 0; k < 8; ++k) b.set(mark, k, {0, 1, 0, 0}, Move::right, f_off + first.program.start());
  b.states[limdisp].rules = b.states[f_off + first.program.limit()].rules;
  b.states[climit].rules = b.states[s_off + second.program.limit()].rules;
  b.set(climit, col(0, 1, 0), {0, 1, 0, 0}, Move::right, limdisp);
  b.set(unmark, col(0, 1, 0), {0, 0, 0, 0}, Move::stay, s_off + second.program.start());

  return {Program(3, std::move(b.states), mark, climit), sum, true};
}

}  // namespace ittm
