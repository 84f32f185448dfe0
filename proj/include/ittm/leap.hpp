#pragma once

// The transfinite executor.
//
// Within an omega-block the engine steps concretely over byte tapes,
// logging one record per step so any earlier in-block configuration can be
// rebuilt by undo. A block closes when a repeat is certified:
//   exact      the full configuration recurs, so the tail of the block is
//              periodic and each cell's limit is the limsup (or liminf)
//              over one period window;
//   translated the configuration recurs shifted right by d with the head
//              never dipping below the earlier position and the tape
//              suffixes equal from the respective heads, so the behavior
//              drifts right forever laying a periodic wake, and every cell
//              stabilizes.
// Each closed block appends a limit entry (stage, configuration, per-tape
// change and ever-held masks). Equal entries either certify divergence
// (every cell that changes in the repeating segment already holds the
// value limits assign it, so the repeat is closed under limits) or justify
// a leap over omega-many repetitions of the segment. Nothing else is ever
// concluded; exhausted budgets report Undetermined.

#include <deque>
#include <functional>
#include <numeric>
#include <unordered_map>

#include "ittm/machine.hpp"
#include "ittm/ordinal.hpp"

namespace ittm {

enum class LimitRule : std::uint8_t { limsup, liminf };

struct Budgets {
  std::uint64_t max_steps_per_block = 20000;
  int max_limit_depth = 3;
  std::uint64_t max_total_leaps = 300;
};

enum class UndeterminedReason : std::uint8_t {
  step_budget,
  block_budget,
  limit_depth_budget,
  unrepresentable_limit,
};

inline const char* to_string(UndeterminedReason r) {
  switch (r) {
    case UndeterminedReason::step_budget: return "step_budget";
    case UndeterminedReason::block_budget: return "block_budget";
    case UndeterminedReason::limit_depth_budget: return "limit_depth_budget";
    case UndeterminedReason::unrepresentable_limit: return "unrepresentable_limit";
  }
  return "?";
}

struct BlockCycle {
  enum class Kind : std::uint8_t { exact, translated } kind = Kind::exact;
  std::uint64_t start_index = 0;  // steps into the block
  std::uint64_t length = 0;
  std::uint64_t displacement = 0;  // 0 for exact, rightward drift for translated
};

enum class LeapKind : std::uint8_t { exact, translated, meta };

inline const char* to_string(LeapKind k) {
  switch (k) {
    case LeapKind::exact: return "exact";
    case LeapKind::translated: return "translated";
    case LeapKind::meta: return "meta";
  }
  return "?";
}

// Snapshot taken at each limit stage, with masks describing the stages
// since the previous entry (the half-open stage interval ending here).
struct LimitEntry {
  Ordinal stage;
  Configuration config;  // state = limit, head = 0
  Ordinal delta;         // stage == add(previous entry's stage, delta)
  std::vector<EPReal> changed;  // cells whose value flipped at least once
  std::vector<EPReal> ever1;    // cells that held 1 at some stage
  std::vector<EPReal> ever0;    // cells that held 0 at some stage
  int level = 0;                // 0 plain block; n+1 leaps over level-n segments
  LeapKind kind = LeapKind::exact;
};

struct RunOutcome {
  enum class Kind : std::uint8_t { halted, diverges, undetermined } kind = Kind::undetermined;
  // halted
  EPReal output;
  Ordinal stage;
  // diverges
  Ordinal first_limit, repeat_limit;
  // undetermined
  UndeterminedReason reason = UndeterminedReason::step_budget;
  Ordinal last_stage;
  std::string diagnostics;
  // every limit stage reached, in order
  std::vector<LimitEntry> history;
};

struct TraceEvent {
  enum class Kind : std::uint8_t { step, leap, query, halt, diverge, undetermined } kind;
  Ordinal stage;
  std::string state;
  std::uint64_t head = 0;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> changed_cells;  // (tape, cell)
  std::string note;           // leap kind, query answer, undetermined reason
  std::vector<EPReal> tapes;  // filled on leap and terminal events
};

struct RunOptions {
  Budgets budgets;
  LimitRule limit_rule = LimitRule::limsup;
  std::uint64_t trace_step_window = 32;  // step events per block sent to trace
  std::function<void(const TraceEvent&)> trace;
  std::vector<Configuration>* capture = nullptr;  // first configurations of the run
  std::uint64_t capture_limit = 500;
};

inline Ordinal advance_clock(const Ordinal& current, bool leap) {
  return leap ? next_limit(current) : successor(current);
}

// Union of w shifted right by every multiple of d; bit x is an OR over the
// bits x, x-d, x-2d, ... of w. Eventually periodic with period lcm(d, |w|).
inline EPReal periodic_shift_union(const EPReal& w, std::uint64_t d) {
  if (d == 0) throw std::invalid_argument("zero shift");
  if (w.all_zero()) return w;
  std::uint64_t p = w.prefix().size(), q = w.period().size();
  std::uint64_t m = std::lcm(d, q);
  std::uint64_t plen = p + d * q + m;
  if (plen + m > kMaxRealBits) throw unrepresentable_real{};
  Bits out(plen + m);
  for (std::uint64_t x = 0; x < out.size(); ++x)
    out[x] = std::uint8_t(w.bit(x) | (x >= d ? out[x - d] : 0));
  Bits pref(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(plen));
  Bits per(out.begin() + static_cast<std::ptrdiff_t>(plen), out.end());
  return EPReal(std::move(pref), std::move(per));
}

// Reference detectors over explicit configuration traces. The engine works
// over byte tapes with the same certification conditions; tests hold the
// two against each other.

namespace leap_detail {

inline bool suffixes_match(const Configuration& a, std::uint64_t ha, const Configuration& b,
                           std::uint64_t hb) {
  for (size_t t = 0; t < a.tapes.size(); ++t)
    if (!(a.tapes[t].suffix(ha) == b.tapes[t].suffix(hb))) return false;
  return true;
}

}  // namespace leap_detail

// Earliest certified repeat within a block trace (consecutive successor
// configurations starting at the block's first). Translated candidates are
// rejected across query steps (oracle answers need not commute with
// translation) and across left moves clamped at the origin (the clamp
// disappears when the trajectory is shifted right).
inline std::optional<BlockCycle> detect_block_cycle(const Program& p,
                                                    const std::vector<Configuration>& trace) {
  auto is_query = [&](const Configuration& c) { return p.query() && c.state == *p.query(); };
  auto clamps = [&](const Configuration& c) {
    return c.head == 0 && !is_query(c) && !c.halted() &&
           p.rule(c.state, read_key(p, c)).move == Move::left;
  };
  for (std::uint64_t t1 = 1; t1 < trace.size(); ++t1) {
    for (std::uint64_t t0 = 0; t0 < t1; ++t0) {
      if (trace[t0] == trace[t1])
        return BlockCycle{BlockCycle::Kind::exact, t0, t1 - t0, 0};
      if (trace[t0].state != trace[t1].state || trace[t1].head <= trace[t0].head) continue;
      bool ok = true;
      for (std::uint64_t t = t0; t <= t1 && ok; ++t)
        ok = trace[t].head >= trace[t0].head &&
             (t == t1 || (!is_query(trace[t]) && !clamps(trace[t])));
      if (!ok) continue;
      if (leap_detail::suffixes_match(trace[t1], trace[t1].head, trace[t0], trace[t0].head))
        return BlockCycle{BlockCycle::Kind::translated, t0, t1 - t0,
                          trace[t1].head - trace[t0].head};
    }
  }
  return std::nullopt;
}

// Limit configuration determined by a certified cycle: limsup (or liminf)
// of every cell over the block's tail, head at the origin, limit state.
inline Configuration limit_configuration(const Program& p, const std::vector<Configuration>& trace,
                                         const BlockCycle& cycle, LimitRule rule) {
  Configuration out;
  out.state = p.limit();
  out.head = 0;
  const Configuration& at0 = trace[cycle.start_index];
  if (cycle.kind == BlockCycle::Kind::exact) {
    // The tail cycles through the window forever, so each cell attains
    // exactly the values it shows there: limsup is OR, liminf is AND.
    out.tapes = at0.tapes;
    for (std::uint64_t i = 1; i < cycle.length; ++i)
      for (size_t t = 0; t < out.tapes.size(); ++t)
        out.tapes[t] = rule == LimitRule::limsup
                           ? bit_or(out.tapes[t], trace[cycle.start_index + i].tapes[t])
                           : bit_and(out.tapes[t], trace[cycle.start_index + i].tapes[t]);
  } else {
    // Every cell stabilizes: below the later head position the tape is
    // final, and beyond it the drift lays the same d-wide wake forever.
    const Configuration& at1 = trace[cycle.start_index + cycle.length];
    std::uint64_t h0 = at0.head, h1 = at1.head;
    for (const EPReal& tape : at1.tapes) {
      Bits pref, per;
      for (std::uint64_t i = 0; i < h1; ++i) pref.push_back(tape.bit(i));
      for (std::uint64_t i = h0; i < h1; ++i) per.push_back(tape.bit(i));
      out.tapes.emplace_back(std::move(pref), std::move(per));
    }
  }
  return out;
}

// The fixed-point divergence rule over the limit history: a repeated limit
// configuration proves an endless loop only when every cell that changes
// in the repeating segment already sits at the value limits assign it.
inline std::optional<std::pair<Ordinal, Ordinal>> detect_divergence(
    const std::vector<LimitEntry>& history, LimitRule rule) {
  for (size_t j = 1; j < history.size(); ++j) {
    for (size_t i = 0; i < j; ++i) {
      if (!(history[i].config == history[j].config)) continue;
      bool ok = true;
      for (size_t t = 0; t < history[i].config.tapes.size() && ok; ++t) {
        EPReal changed = EPReal::zeros();
        for (size_t k = i + 1; k <= j; ++k) changed = bit_or(changed, history[k].changed[t]);
        const EPReal& tape = history[i].config.tapes[t];
        ok = rule == LimitRule::limsup ? bit_minus(changed, tape).all_zero()
                                       : bit_and(changed, tape).all_zero();
      }
      if (ok) return std::make_pair(history[i].stage, history[j].stage);
    }
  }
  return std::nullopt;
}

namespace leap_detail {

struct Rec {
  std::uint64_t head_before;
  std::uint32_t state_before;
  std::uint8_t old_bits;
  std::uint8_t new_bits;
};

struct Milestone {
  std::uint64_t t;
  std::uint64_t head;
  std::uint64_t sig;
  std::uint32_t state;
};

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Engine {
 public:
  Engine(const Program& p, const Oracle* oracle, const RunOptions& opt)
      : p_(p), oracle_(oracle), opt_(opt) {}

  RunOutcome run_from(Configuration start, Ordinal start_stage) {
    if (p_.uses_oracle() && !oracle_)
      throw std::invalid_argument("oracle program run without an oracle");
    if (start.tapes.size() != p_.tape_count())
      throw std::invalid_argument("configuration tape count mismatch");
    if (start.halted() || start.state >= p_.states().size())
      throw std::invalid_argument("configuration state out of range");
    start_stage_ = start_stage;
    stage_ = std::move(start_stage);
    load_block(start);
    capture(start);
    while (true) {
      BlockEnd end = run_block();
      if (end.outcome) return std::move(*end.outcome);
      try {
        append_limit_entry(end.cycle);
        if (auto out = analyze()) return std::move(*out);
      } catch (const unrepresentable_real&) {
        return undetermined(UndeterminedReason::unrepresentable_limit,
                            history_.empty() ? stage_ : history_.back().stage,
                            "limit tape or mask exceeds the representable size");
      }
      if (++leaps_ > opt_.budgets.max_total_leaps)
        return undetermined(UndeterminedReason::block_budget, history_.back().stage,
                            "leap budget exhausted");
      stage_ = history_.back().stage;
      load_block(history_.back().config);
    }
  }

 private:
  struct BlockTape {
    std::vector<std::uint8_t> bytes;
    EPReal original;
  };

  struct BlockEnd {
    std::optional<RunOutcome> outcome;
    BlockCycle cycle;
  };

  const Program& p_;
  const Oracle* oracle_;
  const RunOptions& opt_;

  Ordinal start_stage_;
  Ordinal stage_;  // stage of the current block's first configuration
  std::vector<LimitEntry> history_;
  std::uint64_t leaps_ = 0;
  std::uint64_t captured_ = 0;

  // Block-local machine state.
  std::uint32_t state_ = 0;
  std::uint64_t head_ = 0;
  std::vector<BlockTape> tapes_;
  std::vector<std::vector<std::uint8_t>> ever_bits_;  // bit 0: held 1, bit 1: held 0
  std::vector<std::vector<std::uint8_t>> changed_bits_;
  std::vector<Rec> recs_;
  std::uint64_t hash_ = 0;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> seen_;
  std::deque<Milestone> milestones_;
  std::uint64_t max_head_ = 0;
  std::int64_t last_query_ = -1;
  std::int64_t last_clamp_ = -1;  // act with a left move held at the origin

  static constexpr std::uint64_t kSigWindow = 24;
  static constexpr size_t kMaxMilestones = 128;

  void capture(const Configuration& c) {
    if (opt_.capture && captured_ < opt_.capture_limit) {
      opt_.capture->push_back(c);
      ++captured_;
    }
  }

  void emit(TraceEvent ev) {
    if (opt_.trace) opt_.trace(ev);
  }

  RunOutcome undetermined(UndeterminedReason r, Ordinal at, std::string note) {
    RunOutcome out;
    out.kind = RunOutcome::Kind::undetermined;
    out.reason = r;
    out.last_stage = std::move(at);
    out.diagnostics = std::move(note);
    out.history = history_;
    emit({TraceEvent::Kind::undetermined, out.last_stage,
          state_ < p_.states().size() ? p_.state_name(state_) : "?", head_, {}, to_string(r), {}});
    return out;
  }

  void load_block(const Configuration& c) {
    state_ = c.state;
    head_ = c.head;
    tapes_.assign(p_.tape_count(), {});
    ever_bits_.assign(p_.tape_count(), {});
    changed_bits_.assign(p_.tape_count(), {});
    for (std::uint32_t t = 0; t < p_.tape_count(); ++t) tapes_[t].original = c.tapes[t];
    recs_.clear();
    seen_.clear();
    milestones_.clear();
    hash_ = splitmix(state_ + 0x51ed270b) + splitmix(head_ + 0x2545f491);
    max_head_ = 0;
    last_query_ = -1;
    last_clamp_ = -1;
    ensure(head_);
  }

  std::uint64_t extent() const { return tapes_[0].bytes.size(); }

  void ensure(std::uint64_t j) {
    for (std::uint32_t t = 0; t < p_.tape_count(); ++t) {
      auto& bt = tapes_[t];
      auto& ev = ever_bits_[t];
      auto& ch = changed_bits_[t];
      while (bt.bytes.size() <= j) {
        std::uint8_t b = bt.original.bit(bt.bytes.size());
        bt.bytes.push_back(b);
        ev.push_back(std::uint8_t(b == 1 ? 1 : 2));
        ch.push_back(0);
      }
    }
  }

  std::uint8_t content(std::uint32_t t, std::uint64_t j) const {
    const auto& bt = tapes_[t];
    return j < bt.bytes.size() ? bt.bytes[j] : bt.original.bit(j);
  }

  std::uint64_t cell_hash(std::uint32_t t, std::uint64_t c, std::uint8_t v) const {
    return splitmix((std::uint64_t(t) << 58) ^ (c << 1) ^ v);
  }

  // Content signature over the next kSigWindow cells of every tape. Cheap
  // necessary condition for a translated match; full verification follows.
  std::uint64_t window_sig(std::uint64_t h) const {
    std::uint64_t s = 1469598103934665603ULL;
    for (std::uint32_t t = 0; t < p_.tape_count(); ++t)
      for (std::uint64_t i = 0; i < kSigWindow; ++i)
        s = (s ^ content(t, h + i)) * 1099511628211ULL;
    return s;
  }

  EPReal tape_real(std::uint32_t t) const { return splice(tapes_[t].bytes, tapes_[t].original); }

  // bytes over [0, n) followed by the real's own tail from n.
  static EPReal splice(const std::vector<std::uint8_t>& bytes, const EPReal& orig) {
    EPReal tail = orig.suffix(bytes.size());
    Bits pref(bytes.begin(), bytes.end());
    pref.insert(pref.end(), tail.prefix().begin(), tail.prefix().end());
    return EPReal(std::move(pref), tail.period());
  }

  Configuration materialize() const {
    Configuration c;
    c.state = state_;
    c.head = head_;
    for (std::uint32_t t = 0; t < p_.tape_count(); ++t) c.tapes.push_back(tape_real(t));
    return c;
  }

  // Configuration at in-block index t0, rebuilt by undoing records. Cells
  // materialized later than t0 undo to their original values, so the byte
  // arrays stay valid over the full current extent.
  void reconstruct(std::uint64_t t0, std::vector<std::vector<std::uint8_t>>& bytes,
                   std::uint32_t& state, std::uint64_t& head) const {
    bytes.resize(p_.tape_count());
    for (std::uint32_t t = 0; t < p_.tape_count(); ++t) bytes[t] = tapes_[t].bytes;
    state = state_;
    head = head_;
    for (std::uint64_t k = recs_.size(); k-- > t0;) {
      const Rec& r = recs_[k];
      for (std::uint32_t t = 0; t < p_.tape_count(); ++t)
        bytes[t][r.head_before] = std::uint8_t((r.old_bits >> t) & 1);
      state = r.state_before;
      head = r.head_before;
    }
  }

  bool exact_match(std::uint64_t t0) const {
    std::vector<std::vector<std::uint8_t>> bytes;
    std::uint32_t state;
    std::uint64_t head;
    reconstruct(t0, bytes, state, head);
    if (state != state_ || head != head_) return false;
    for (std::uint32_t t = 0; t < p_.tape_count(); ++t)
      if (bytes[t] != tapes_[t].bytes) return false;
    return true;
  }

  // Full verification of a translated candidate: the earlier suffix from
  // its head must equal the current suffix from the current head, over the
  // materialized extent and over the original tails beyond it.
  bool translated_match(const Milestone& m) const {
    std::uint64_t h0 = m.head, h1 = head_, d = h1 - h0, e = extent();
    std::vector<std::vector<std::uint8_t>> bytes;
    std::uint32_t state;
    std::uint64_t head;
    reconstruct(m.t, bytes, state, head);
    if (state != state_ || head != h0) return false;
    for (std::uint32_t t = 0; t < p_.tape_count(); ++t) {
      for (std::uint64_t i = 0; h0 + i < e; ++i)
        if (bytes[t][h0 + i] != content(t, h1 + i)) return false;
      if (!(tapes_[t].original.suffix(e) == tapes_[t].original.suffix(e + d))) return false;
    }
    return true;
  }

  BlockEnd run_block() {
    while (true) {
      std::uint64_t t = recs_.size();

      if (p_.query() && state_ == *p_.query()) {
        // Oracle protocol: resolved in place as a deterministic act that
        // only switches the state.
        bool member = oracle_->membership(tape_real(3));
        Rec r{head_, state_, 0, 0};
        for (std::uint32_t tt = 0; tt < p_.tape_count(); ++tt)
          r.old_bits |= std::uint8_t(tapes_[tt].bytes[head_] << tt);
        r.new_bits = r.old_bits;
        std::uint32_t next = member ? *p_.yes() : *p_.no();
        hash_ += splitmix(next + 0x51ed270b) - splitmix(state_ + 0x51ed270b);
        state_ = next;
        recs_.push_back(r);
        last_query_ = std::int64_t(t);
        if (t < opt_.trace_step_window)
          emit({TraceEvent::Kind::query, add(stage_, Ordinal(t + 1)), p_.state_name(state_), head_,
                {}, member ? "yes" : "no", {}});
        if (opt_.capture && captured_ < opt_.capture_limit) capture(materialize());
        continue;
      }

      // Milestones whose head the run has since dipped below can no longer
      // anchor a translated repeat; drop them the moment it happens.
      while (!milestones_.empty() && milestones_.back().head > head_) milestones_.pop_back();

      // While early configurations are being captured, closure is deferred
      // so the capture covers genuine successor stages; limits found later
      // are unchanged because they do not depend on the witness pair.
      bool capturing = opt_.capture && captured_ < opt_.capture_limit;

      if (!capturing && t > 0) {
        if (auto it = seen_.find(hash_); it != seen_.end()) {
          for (std::uint32_t t0 : it->second) {
            if (exact_match(t0)) {
              BlockEnd end;
              end.cycle = {BlockCycle::Kind::exact, t0, t - t0, 0};
              return end;
            }
          }
        }
      }

      if (head_ >= max_head_) {
        std::uint64_t sig = window_sig(head_);
        bool duplicate = false;
        for (const Milestone& m : milestones_) {
          if (m.state == state_ && m.head == head_) duplicate = true;
          if (capturing) continue;
          if (m.state != state_ || m.head >= head_ || m.sig != sig) continue;
          if (std::int64_t(m.t) <= std::max(last_query_, last_clamp_)) continue;
          if (translated_match(m)) {
            BlockEnd end;
            end.cycle = {BlockCycle::Kind::translated, m.t, t - m.t, head_ - m.head};
            return end;
          }
        }
        if (!duplicate) {
          if (milestones_.size() == kMaxMilestones) milestones_.pop_front();
          milestones_.push_back({t, head_, sig, state_});
        }
        max_head_ = head_;
      }

      if (t >= opt_.budgets.max_steps_per_block) {
        BlockEnd end;
        end.outcome = undetermined(UndeterminedReason::step_budget, add(stage_, Ordinal(t)),
                                   "no repeat found within the block step budget");
        return end;
      }

      seen_[hash_].push_back(std::uint32_t(t));

      // One successor act.
      std::uint8_t key = 0;
      for (std::uint32_t tt = 0; tt < p_.tape_count(); ++tt)
        key = std::uint8_t(key | (tapes_[tt].bytes[head_] << tt));
      const Rule& rule = p_.rule(state_, key);
      if (head_ == 0 && rule.move == Move::left) last_clamp_ = std::int64_t(t);
      Rec r{head_, state_, key, 0};
      std::vector<std::pair<std::uint32_t, std::uint64_t>> changed_cells;
      for (std::uint32_t tt = 0; tt < p_.tape_count(); ++tt) {
        std::uint8_t oldv = tapes_[tt].bytes[head_];
        std::uint8_t newv = rule.write[tt];
        r.new_bits |= std::uint8_t(newv << tt);
        if (oldv != newv) {
          hash_ += cell_hash(tt, head_, newv) - cell_hash(tt, head_, oldv);
          tapes_[tt].bytes[head_] = newv;
          changed_bits_[tt][head_] = 1;
          if (opt_.trace) changed_cells.push_back({tt, head_});
        }
        ever_bits_[tt][head_] |= std::uint8_t(newv == 1 ? 1 : 2);
      }
      recs_.push_back(r);

      std::uint64_t new_head = rule.move == Move::left    ? (head_ > 0 ? head_ - 1 : 0)
                               : rule.move == Move::right ? head_ + 1
                                                          : head_;

      if (rule.next == kHaltTarget) {
        // The halting act leaves the configuration at stage_ + t; in
        // ordinal arithmetic the halt lands at 1 + that stage.
        RunOutcome out;
        out.kind = RunOutcome::Kind::halted;
        out.stage = add(Ordinal(1), add(stage_, Ordinal(t)));
        out.output = tape_real(2);
        out.history = history_;
        if (opt_.trace) {
          std::vector<EPReal> finals;
          for (std::uint32_t tt = 0; tt < p_.tape_count(); ++tt) finals.push_back(tape_real(tt));
          emit({TraceEvent::Kind::halt, out.stage, "halt", new_head, std::move(changed_cells), "",
                std::move(finals)});
        }
        BlockEnd end;
        end.outcome = std::move(out);
        return end;
      }

      hash_ += splitmix(new_head + 0x2545f491) - splitmix(head_ + 0x2545f491);
      hash_ += splitmix(rule.next + 0x51ed270b) - splitmix(state_ + 0x51ed270b);
      head_ = new_head;
      state_ = rule.next;
      ensure(head_);

      if (opt_.trace && t < opt_.trace_step_window)
        emit({TraceEvent::Kind::step, add(stage_, Ordinal(t + 1)), p_.state_name(state_), head_,
              std::move(changed_cells), "", {}});
      if (opt_.capture && captured_ < opt_.capture_limit) capture(materialize());
    }
  }

  void append_limit_entry(const BlockCycle& cycle) {
    std::uint64_t s = cycle.start_index, len = cycle.length, e = extent();
    Ordinal lim = next_limit(stage_);

    LimitEntry entry;
    entry.stage = lim;
    entry.delta = left_diff(history_.empty() ? start_stage_ : history_.back().stage, lim);
    entry.level = 0;
    entry.kind = cycle.kind == BlockCycle::Kind::exact ? LeapKind::exact : LeapKind::translated;
    entry.config.state = p_.limit();
    entry.config.head = 0;

    // Window-start content, rebuilt by undo.
    std::vector<std::vector<std::uint8_t>> base;
    std::uint32_t st;
    std::uint64_t hd;
    reconstruct(s, base, st, hd);
    std::uint64_t h0 = hd, h1 = head_, d = cycle.displacement;

    EPReal zero = EPReal::zeros();
    for (std::uint32_t t = 0; t < p_.tape_count(); ++t) {
      const EPReal& orig = tapes_[t].original;

      if (cycle.kind == BlockCycle::Kind::exact) {
        // Limit value over the repeating window: its initial content
        // joined with every value written during it.
        std::vector<std::uint8_t> acc = base[t];
        for (std::uint64_t k = s; k < s + len; ++k) {
          const Rec& r = recs_[k];
          std::uint8_t v = std::uint8_t((r.new_bits >> t) & 1);
          if (opt_.limit_rule == LimitRule::limsup)
            acc[r.head_before] |= v;
          else
            acc[r.head_before] &= v;
        }
        entry.config.tapes.push_back(splice(acc, orig));
        entry.changed.push_back(splice(changed_bits_[t], zero));
      } else {
        // Final prefix below the later head, then the d-wide wake forever.
        Bits pref(tapes_[t].bytes.begin(), tapes_[t].bytes.begin() + std::ptrdiff_t(h1));
        Bits per(tapes_[t].bytes.begin() + std::ptrdiff_t(h0),
                 tapes_[t].bytes.begin() + std::ptrdiff_t(h1));
        entry.config.tapes.emplace_back(std::move(pref), std::move(per));

        // Cells flipped during one window, repeated at every drift offset.
        std::vector<std::uint8_t> flips(e, 0);
        for (std::uint64_t k = s; k < s + len; ++k) {
          const Rec& r = recs_[k];
          if (((r.old_bits ^ r.new_bits) >> t) & 1) flips[r.head_before] = 1;
        }
        entry.changed.push_back(bit_or(splice(changed_bits_[t], zero),
                                       periodic_shift_union(splice(flips, zero), d)));
      }

      // Ever-held masks. The tracked extent part covers the block so far;
      // beyond the extent the tape held its original bits throughout.
      std::vector<std::uint8_t> held1(e), held0(e);
      for (std::uint64_t i = 0; i < e; ++i) {
        held1[i] = ever_bits_[t][i] & 1;
        held0[i] = std::uint8_t((ever_bits_[t][i] >> 1) & 1);
      }
      EPReal ever1 = splice(held1, orig);
      EPReal ever0 = splice(held0, bit_minus(EPReal::ones(), orig));

      if (cycle.kind == BlockCycle::Kind::translated) {
        // Future windows replay the holdings of cells at or beyond the
        // window-start head shifted by every multiple of the drift; cells
        // below it stay frozen at values already counted.
        std::vector<std::uint8_t> w1(e, 0), w0(e, 0);
        for (std::uint64_t i = h0; i < e; ++i) {
          w1[i] = std::uint8_t(base[t][i] == 1);
          w0[i] = std::uint8_t(base[t][i] == 0);
        }
        for (std::uint64_t k = s; k < s + len; ++k) {
          const Rec& r = recs_[k];
          std::uint8_t v = std::uint8_t((r.new_bits >> t) & 1);
          (v ? w1 : w0)[r.head_before] = 1;
        }
        EPReal win1 = splice(w1, orig);
        EPReal win0 = splice(w0, bit_minus(EPReal::ones(), orig));
        ever1 = bit_or(ever1, periodic_shift_union(win1, d));
        ever0 = bit_or(ever0, periodic_shift_union(win0, d));
      }
      entry.ever1.push_back(std::move(ever1));
      entry.ever0.push_back(std::move(ever0));
    }

    history_.push_back(std::move(entry));
    emit_leap(history_.back());
  }

  void emit_leap(const LimitEntry& entry) {
    if (!opt_.trace) return;
    emit({TraceEvent::Kind::leap, entry.stage, p_.state_name(p_.limit()), 0, {},
          to_string(entry.kind), entry.config.tapes});
  }

  // After each new limit entry: certify divergence against an earlier
  // equal entry, or leap over a repeating segment of entries, repeating
  // until neither applies. Only pairs ending at the newest entry need
  // checking; older pairs were handled when their later entry arrived.
  std::optional<RunOutcome> analyze() {
    while (true) {
      size_t j = history_.size() - 1;
      std::optional<size_t> repeat;
      for (size_t i = 0; i < j && !repeat; ++i) {
        if (!(history_[i].config == history_[j].config)) continue;
        bool fixed = true;
        for (size_t t = 0; t < p_.tape_count() && fixed; ++t) {
          EPReal changed = EPReal::zeros();
          for (size_t k = i + 1; k <= j; ++k) changed = bit_or(changed, history_[k].changed[t]);
          const EPReal& tape = history_[i].config.tapes[t];
          fixed = opt_.limit_rule == LimitRule::limsup ? bit_minus(changed, tape).all_zero()
                                                       : bit_and(changed, tape).all_zero();
        }
        if (fixed) {
          RunOutcome out;
          out.kind = RunOutcome::Kind::diverges;
          out.first_limit = history_[i].stage;
          out.repeat_limit = history_[j].stage;
          out.history = history_;
          emit({TraceEvent::Kind::diverge, out.repeat_limit, p_.state_name(p_.limit()), 0, {},
                "repeats " + format(out.first_limit), {}});
          return out;
        }
        repeat = i;
      }
      if (!repeat) return std::nullopt;
      size_t i = *repeat;

      // The segment of limit entries after i repeats forever; leap over
      // omega-many rounds of it.
      Ordinal delta;
      int level = 0;
      for (size_t k = i + 1; k <= j; ++k) {
        delta = add(delta, history_[k].delta);
        level = std::max(level, history_[k].level);
      }
      level += 1;
      if (level > opt_.budgets.max_limit_depth)
        return undetermined(UndeterminedReason::limit_depth_budget, history_[j].stage,
                            "nested limit repetition deeper than the depth budget");
      if (++leaps_ > opt_.budgets.max_total_leaps)
        return undetermined(UndeterminedReason::block_budget, history_[j].stage,
                            "leap budget exhausted");

      LimitEntry entry;
      entry.stage = add(history_[j].stage, mul(delta, Ordinal::omega()));
      entry.delta = left_diff(history_[j].stage, entry.stage);
      entry.level = level;
      entry.kind = LeapKind::meta;
      entry.config.state = p_.limit();
      entry.config.head = 0;
      for (size_t t = 0; t < p_.tape_count(); ++t) {
        EPReal changed = EPReal::zeros(), ever1 = EPReal::zeros(), ever0 = EPReal::zeros();
        for (size_t k = i + 1; k <= j; ++k) {
          changed = bit_or(changed, history_[k].changed[t]);
          ever1 = bit_or(ever1, history_[k].ever1[t]);
          ever0 = bit_or(ever0, history_[k].ever0[t]);
        }
        entry.config.tapes.push_back(opt_.limit_rule == LimitRule::limsup
                                         ? ever1
                                         : bit_minus(EPReal::ones(), ever0));
        entry.changed.push_back(std::move(changed));
        entry.ever1.push_back(std::move(ever1));
        entry.ever0.push_back(std::move(ever0));
      }
      history_.push_back(std::move(entry));
      emit_leap(history_.back());
    }
  }
};

}  // namespace leap_detail

inline RunOutcome run_from(const Program& p, Configuration start, Ordinal start_stage,
                           const Oracle* oracle = nullptr, const RunOptions& opt = {}) {
  leap_detail::Engine engine(p, oracle, opt);
  return engine.run_from(std::move(start), std::move(start_stage));
}

inline RunOutcome run(const Program& p, const EPReal& input, const Oracle* oracle = nullptr,
                      const RunOptions& opt = {}) {
  return run_from(p, initial_configuration(p, input), Ordinal(), oracle, opt);
}

}  // namespace ittm
