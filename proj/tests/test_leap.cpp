#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "ittm/assembler.hpp"
#include "ittm/leap.hpp"
#include "naive_ref.hpp"

using namespace ittm;

namespace {

Ordinal ord(const std::string& s) { return parse_ordinal(s); }

// Flips a scratch flag forever; at the limit reports it on the output tape.
const char* kFlasher = R"(
tapes 3
state start:
  on *0* write *1* move S goto start
  on *1* write *0* move S goto start
state limit:
  on *1* write *11 move S goto halt
  on *0* write *00 move S goto halt
)";

// Sets the flag once, then idles; the limit reports the stabilized value.
const char* kStabilizer = R"(
tapes 3
state start:
  on *** write *1* move S goto idle
state idle:
  on *** write *** move S goto idle
state limit:
  on *1* write **1 move S goto halt
  on *0* write **0 move S goto halt
)";

// Marches right laying scratch ones; the limit sees the flooded tape and
// halts, so the whole run takes exactly omega stages.
const char* kMarcherClock = R"(
tapes 3
state start:
  on *** write *1* move R goto start
state limit:
  on *1* write *10 move S goto halt
  on *0* write *0* move S goto start
)";

// Idles forever; the implicit limit state idles too.
const char* kLooper = R"(
tapes 3
state start:
  on *** write *** move S goto start
)";

// Writes an irregular two-cell prefix, then marches ones rightward.
const char* kJunkMarcher = R"(
tapes 3
state start:
  on *** write *1* move R goto second
state second:
  on *** write *0* move R goto march
state march:
  on *** write *1* move R goto march
)";

// Blocks alternately set and clear the flag, so limit snapshots repeat
// without the changed cell being fixed: the engine must leap over limits
// of limits before certifying anything.
const char* kMetaFlip = R"(
tapes 3
state start:
  on *0* write *0* move S goto start
  on *1* write *0* move S goto start
state limit:
  on *0* write *1* move S goto start
  on *1* write *0* move S goto start
)";

// Grows a scratch run by one per round trip, rewinding to the marked
// origin in between. No exact repeat, and every translated anchor is
// invalidated by the return trip, so no block ever closes.
const char* kZigzag = R"(
tapes 3
state start:
  on 1** write 11* move R goto out
  on 0** write 0** move S goto start
state out:
  on *1* write *1* move R goto out
  on *0* write *1* move L goto back
state back:
  on 0** write 0** move L goto back
  on 1** write 1** move R goto out
)";

const char* kOracleProbe = R"(
tapes 4
state start:
  on **** write ***1 move S goto query
state yes:
  on **** write **1* move S goto halt
state no:
  on **** write **0* move S goto halt
)";

RunOutcome run_src(const char* src, const EPReal& input = EPReal::zeros(),
                   const RunOptions& opt = {}) {
  return run(assemble(src), input, nullptr, opt);
}

std::vector<Ordinal> stages_of(const std::vector<LimitEntry>& history) {
  std::vector<Ordinal> out;
  for (const auto& e : history) out.push_back(e.stage);
  return out;
}

}  // namespace

TEST_CASE("periodic shift union matches direct evaluation") {
  std::mt19937_64 rng(0x5151);
  std::uniform_int_distribution<int> bit(0, 1), plen(0, 6), qlen(1, 4), dd(1, 5);
  for (int round = 0; round < 300; ++round) {
    Bits pref, per;
    int np = plen(rng), nq = qlen(rng);
    for (int i = 0; i < np; ++i) pref.push_back(std::uint8_t(bit(rng)));
    for (int i = 0; i < nq; ++i) per.push_back(std::uint8_t(bit(rng)));
    EPReal w(pref, per);
    std::uint64_t d = std::uint64_t(dd(rng));
    EPReal u = periodic_shift_union(w, d);
    for (std::uint64_t x = 0; x < 180; ++x) {
      std::uint8_t want = 0;
      for (std::uint64_t k = 0; k * d <= x && !want; ++k) want = w.bit(x - k * d);
      if (u.bit(x) != want)
        FAIL("round " << round << " d " << d << " bit " << x << ": " << w.to_string());
    }
  }
}

TEST_CASE("clock advance") {
  CHECK(advance_clock(Ordinal(), false) == Ordinal(1));
  CHECK(advance_clock(Ordinal(5), false) == Ordinal(6));
  CHECK(advance_clock(Ordinal(5), true) == Ordinal::omega());
  CHECK(advance_clock(ord("w"), false) == ord("w+1"));
  CHECK(advance_clock(ord("w+3"), true) == ord("w*2"));
  CHECK(advance_clock(ord("w^2"), true) == ord("w^2+w"));
}

TEST_CASE("flasher reports limsup one at the first limit") {
  RunOutcome out = run_src(kFlasher);
  REQUIRE(out.kind == RunOutcome::Kind::halted);
  CHECK(out.stage == ord("w"));
  CHECK(out.output == EPReal::parse("1|0"));
  REQUIRE(out.history.size() == 1);
  const LimitEntry& e = out.history[0];
  CHECK(e.stage == ord("w"));
  CHECK(e.kind == LeapKind::exact);
  CHECK(e.level == 0);
  CHECK(e.config.head == 0);
  CHECK(e.config.tapes[1].bit(0) == 1);
  CHECK(e.changed[1].bit(0) == 1);
  CHECK(e.ever1[1].bit(0) == 1);
  CHECK(e.ever0[1].bit(0) == 1);

  RunOptions inf;
  inf.limit_rule = LimitRule::liminf;
  RunOutcome low = run_src(kFlasher, EPReal::zeros(), inf);
  REQUIRE(low.kind == RunOutcome::Kind::halted);
  CHECK(low.stage == ord("w"));
  CHECK(low.output == EPReal::zeros());
  CHECK(low.history[0].config.tapes[1].bit(0) == 0);
}

TEST_CASE("stabilized cell keeps its value under both limit rules") {
  for (LimitRule rule : {LimitRule::limsup, LimitRule::liminf}) {
    RunOptions opt;
    opt.limit_rule = rule;
    RunOutcome out = run_src(kStabilizer, EPReal::zeros(), opt);
    REQUIRE(out.kind == RunOutcome::Kind::halted);
    CHECK(out.stage == ord("w"));
    CHECK(out.output == EPReal::parse("1|0"));
    CHECK(out.history[0].config.tapes[1] == EPReal::parse("1|0"));
  }
}

TEST_CASE("marcher closes its block by translation and halts at omega") {
  RunOutcome out = run_src(kMarcherClock);
  REQUIRE(out.kind == RunOutcome::Kind::halted);
  CHECK(out.stage == ord("w"));
  CHECK(out.output == EPReal::zeros());
  REQUIRE(out.history.size() == 1);
  CHECK(out.history[0].kind == LeapKind::translated);
  CHECK(out.history[0].config.tapes[1] == EPReal::ones());
  CHECK(out.history[0].changed[1] == EPReal::ones());
  CHECK(out.history[0].ever0[1] == EPReal::ones());
  CHECK(out.history[0].ever1[1] == EPReal::ones());
}

TEST_CASE("junk marcher limit keeps the irregular prefix") {
  RunOutcome out = run_src(kJunkMarcher);
  REQUIRE(out.kind == RunOutcome::Kind::diverges);
  REQUIRE(out.history.size() >= 1);
  CHECK(out.history[0].kind == LeapKind::translated);
  CHECK(out.history[0].config.tapes[1] == EPReal::parse("10|1"));
  CHECK(out.first_limit == ord("w"));
  CHECK(out.repeat_limit == ord("w*2"));
}

TEST_CASE("looper diverges across its first two limits") {
  RunOutcome out = run_src(kLooper);
  REQUIRE(out.kind == RunOutcome::Kind::diverges);
  CHECK(out.first_limit == ord("w"));
  CHECK(out.repeat_limit == ord("w*2"));
  REQUIRE(out.history.size() == 2);
  CHECK(out.history[0].config == out.history[1].config);
  CHECK(out.history[1].changed[0].all_zero());
  CHECK(out.history[1].changed[1].all_zero());
  CHECK(out.history[1].changed[2].all_zero());
  // The reported pair satisfies the public fixed-point rule.
  auto again = detect_divergence(out.history, LimitRule::limsup);
  REQUIRE(again.has_value());
  CHECK(again->first == out.first_limit);
  CHECK(again->second == out.repeat_limit);
}

TEST_CASE("alternating limits force leaps over limits of limits") {
  RunOutcome out = run_src(kMetaFlip);
  REQUIRE(out.kind == RunOutcome::Kind::diverges);
  CHECK(out.first_limit == ord("w^2"));
  CHECK(out.repeat_limit == ord("w^3"));
  std::vector<Ordinal> want = {ord("w"), ord("w*2"), ord("w^2"), ord("w^2+w"), ord("w^3")};
  CHECK(stages_of(out.history) == want);
  CHECK(out.history[2].kind == LeapKind::meta);
  CHECK(out.history[2].level == 1);
  CHECK(out.history[4].kind == LeapKind::meta);
  CHECK(out.history[4].level == 2);
  CHECK(out.history[2].config.tapes[1].bit(0) == 1);
  CHECK(out.history[2].delta == ord("w^2"));
  auto again = detect_divergence(out.history, LimitRule::limsup);
  REQUIRE(again.has_value());
  CHECK(again->first == out.first_limit);
  CHECK(again->second == out.repeat_limit);
}

TEST_CASE("alternating limits diverge immediately under liminf") {
  RunOptions opt;
  opt.limit_rule = LimitRule::liminf;
  RunOutcome out = run_src(kMetaFlip, EPReal::zeros(), opt);
  REQUIRE(out.kind == RunOutcome::Kind::diverges);
  CHECK(out.first_limit == ord("w"));
  CHECK(out.repeat_limit == ord("w*2"));
}

TEST_CASE("zigzag growth exhausts the step budget honestly") {
  RunOptions opt;
  opt.budgets.max_steps_per_block = 500;
  RunOutcome out = run_src(kZigzag, EPReal::parse("1"), opt);
  REQUIRE(out.kind == RunOutcome::Kind::undetermined);
  CHECK(out.reason == UndeterminedReason::step_budget);
  CHECK(out.last_stage == Ordinal(500));
  CHECK(out.history.empty());
}

TEST_CASE("depth and leap budgets cut analysis off with a reason") {
  RunOptions depth;
  depth.budgets.max_limit_depth = 1;
  RunOutcome d = run_src(kMetaFlip, EPReal::zeros(), depth);
  REQUIRE(d.kind == RunOutcome::Kind::undetermined);
  CHECK(d.reason == UndeterminedReason::limit_depth_budget);
  CHECK(d.last_stage == ord("w^2+w"));

  RunOptions leaps;
  leaps.budgets.max_total_leaps = 2;
  RunOutcome l = run_src(kMetaFlip, EPReal::zeros(), leaps);
  REQUIRE(l.kind == RunOutcome::Kind::undetermined);
  CHECK(l.reason == UndeterminedReason::block_budget);
}

TEST_CASE("outcomes do not depend on generous budgets") {
  RunOptions small, large;
  small.budgets.max_steps_per_block = 10;
  large.budgets.max_steps_per_block = 5000;
  for (const char* src : {kFlasher, kStabilizer, kMarcherClock, kLooper, kMetaFlip}) {
    RunOutcome a = run_src(src, EPReal::zeros(), small);
    RunOutcome b = run_src(src, EPReal::zeros(), large);
    CHECK(a.kind == b.kind);
    CHECK(a.stage == b.stage);
    CHECK(a.output == b.output);
    CHECK(a.first_limit == b.first_limit);
    CHECK(a.repeat_limit == b.repeat_limit);
    CHECK(stages_of(a.history) == stages_of(b.history));
  }
}

TEST_CASE("runs resumed at a later stage report shifted stages") {
  Program p = assemble(kFlasher);
  Configuration c = initial_configuration(p, EPReal::zeros());
  RunOutcome out = run_from(p, c, ord("w*3"));
  REQUIRE(out.kind == RunOutcome::Kind::halted);
  CHECK(out.stage == ord("w*4"));
  REQUIRE(out.history.size() == 1);
  CHECK(out.history[0].stage == ord("w*4"));
  CHECK(out.history[0].delta == ord("w"));

  Configuration bad = c;
  bad.state = kHaltTarget;
  CHECK_THROWS_AS(run_from(p, bad, Ordinal()), std::invalid_argument);
}

TEST_CASE("queries resolve inline against the oracle") {
  Program p = assemble(kOracleProbe);
  Oracle in = Oracle::finite_set({EPReal::parse("1|0")});
  Oracle outp = Oracle::finite_set({EPReal::parse("01|0")});
  RunOutcome hit = run(p, EPReal::zeros(), &in);
  REQUIRE(hit.kind == RunOutcome::Kind::halted);
  CHECK(hit.stage == Ordinal(3));
  CHECK(hit.output == EPReal::parse("1|0"));
  RunOutcome miss = run(p, EPReal::zeros(), &outp);
  REQUIRE(miss.kind == RunOutcome::Kind::halted);
  CHECK(miss.output == EPReal::zeros());
  CHECK_THROWS_AS(run(p, EPReal::zeros(), nullptr), std::invalid_argument);
}

TEST_CASE("translated repeats are not certified across queries") {
  Program p = assemble(kOracleProbe);
  REQUIRE(p.query().has_value());
  // A hand-built trace marching right: with a query step inside every
  // candidate window nothing is certified, without one it is.
  std::vector<Configuration> trace;
  for (std::uint64_t t = 0; t < 4; ++t) {
    Configuration c;
    c.state = p.start();
    c.head = t;
    c.tapes.assign(4, EPReal::zeros());
    trace.push_back(c);
  }
  auto clean = detect_block_cycle(p, trace);
  REQUIRE(clean.has_value());
  CHECK(clean->kind == BlockCycle::Kind::translated);
  CHECK(clean->start_index == 0);
  CHECK(clean->displacement == 1);

  for (auto& c : trace) c.state = *p.query();
  CHECK(!detect_block_cycle(p, trace).has_value());

  trace[0].state = p.start();
  trace[3].state = p.start();
  CHECK(!detect_block_cycle(p, trace).has_value());
}

TEST_CASE("captured prefixes agree with the stepwise interpreter") {
  Program p = assemble(kMarcherClock);
  std::vector<Configuration> got;
  RunOptions opt;
  opt.capture = &got;
  opt.capture_limit = 24;
  RunOutcome with = run(p, EPReal::zeros(), nullptr, opt);
  RunOutcome without = run(p, EPReal::zeros());
  CHECK(with.kind == without.kind);
  CHECK(with.stage == without.stage);
  CHECK(stages_of(with.history) == stages_of(without.history));
  naive::StepTrace ref = naive::run_steps(p, initial_configuration(p, EPReal::zeros()), nullptr, 64);
  REQUIRE(got.size() == 24);
  for (size_t i = 0; i < got.size(); ++i) {
    if (!(got[i] == ref.trace[i])) FAIL("configuration " << i << " differs");
  }
}

TEST_CASE("engine limits agree with the reference detector on random programs") {
  std::mt19937_64 rng(0xA11CE);
  int first_limits = 0, translated_seen = 0, halts = 0, diverges = 0;
  for (int round = 0; round < 250; ++round) {
    Program p = naive::random_program(rng);
    std::vector<Configuration> captured;
    RunOptions opt;
    opt.capture = &captured;
    opt.capture_limit = 48;
    opt.budgets.max_steps_per_block = 4000;
    opt.budgets.max_total_leaps = 40;
    RunOutcome out = run(p, EPReal::zeros(), nullptr, opt);

    naive::StepTrace ref =
        naive::run_steps(p, initial_configuration(p, EPReal::zeros()), nullptr, 2048);
    for (size_t i = 0; i < captured.size() && i < ref.trace.size(); ++i) {
      if (!(captured[i] == ref.trace[i]))
        FAIL("round " << round << ": configuration " << i << " differs");
    }

    if (out.kind == RunOutcome::Kind::halted && out.stage.is_finite()) {
      ++halts;
      REQUIRE(ref.halted);
      CHECK(out.stage == Ordinal(ref.trace.size() - 1));
      CHECK(out.output == ref.trace.back().tapes[2]);
    }

    if (!out.history.empty() && out.history[0].stage == Ordinal::omega()) {
      auto cyc = detect_block_cycle(p, ref.trace);
      if (cyc && cyc->start_index + cyc->length < ref.trace.size()) {
        ++first_limits;
        if (cyc->kind == BlockCycle::Kind::translated) ++translated_seen;
        Configuration lim = limit_configuration(p, ref.trace, *cyc, LimitRule::limsup);
        if (!(lim == out.history[0].config))
          FAIL("round " << round << ": first limit configuration differs");
      }
    }

    if (out.kind == RunOutcome::Kind::diverges) {
      ++diverges;
      auto again = detect_divergence(out.history, LimitRule::limsup);
      REQUIRE(again.has_value());
      CHECK(again->first == out.first_limit);
      CHECK(again->second == out.repeat_limit);
    }
  }
  // The corpus must actually exercise every path.
  CHECK(first_limits > 50);
  CHECK(halts > 20);
  CHECK(diverges > 20);
  CHECK(translated_seen > 0);
}

TEST_CASE("liminf engine limits agree with the reference detector") {
  std::mt19937_64 rng(0xB0B);
  int checked = 0;
  for (int round = 0; round < 120; ++round) {
    Program p = naive::random_program(rng);
    RunOptions opt;
    opt.limit_rule = LimitRule::liminf;
    opt.budgets.max_steps_per_block = 4000;
    opt.budgets.max_total_leaps = 40;
    RunOutcome out = run(p, EPReal::zeros(), nullptr, opt);
    if (out.history.empty() || !(out.history[0].stage == Ordinal::omega())) continue;
    naive::StepTrace ref =
        naive::run_steps(p, initial_configuration(p, EPReal::zeros()), nullptr, 2048);
    auto cyc = detect_block_cycle(p, ref.trace);
    if (!cyc || cyc->start_index + cyc->length >= ref.trace.size()) continue;
    ++checked;
    Configuration lim = limit_configuration(p, ref.trace, *cyc, LimitRule::liminf);
    if (!(lim == out.history[0].config))
      FAIL("round " << round << ": first liminf limit configuration differs");
    if (out.kind == RunOutcome::Kind::diverges) {
      auto again = detect_divergence(out.history, LimitRule::liminf);
      REQUIRE(again.has_value());
    }
  }
  CHECK(checked > 30);
}

TEST_CASE("trace events carry stages states and leap kinds") {
  std::vector<TraceEvent> events;
  RunOptions opt;
  opt.trace = [&](const TraceEvent& ev) { events.push_back(ev); };
  RunOutcome out = run_src(kMarcherClock, EPReal::zeros(), opt);
  REQUIRE(out.kind == RunOutcome::Kind::halted);
  REQUIRE(!events.empty());
  CHECK(events.front().kind == TraceEvent::Kind::step);
  CHECK(events.front().stage == Ordinal(1));
  CHECK(events.front().changed_cells ==
        std::vector<std::pair<std::uint32_t, std::uint64_t>>{{1, 0}});
  bool saw_leap = false, saw_halt = false;
  for (const auto& ev : events) {
    if (ev.kind == TraceEvent::Kind::leap) {
      saw_leap = true;
      CHECK(ev.stage == Ordinal::omega());
      CHECK(ev.note == "translated");
      REQUIRE(ev.tapes.size() == 3);
      CHECK(ev.tapes[1] == EPReal::ones());
    }
    if (ev.kind == TraceEvent::Kind::halt) {
      saw_halt = true;
      CHECK(ev.stage == Ordinal::omega());
      CHECK(ev.state == "halt");
    }
  }
  CHECK(saw_leap);
  CHECK(saw_halt);

  events.clear();
  RunOutcome div = run_src(kLooper, EPReal::zeros(), opt);
  REQUIRE(div.kind == RunOutcome::Kind::diverges);
  CHECK(events.back().kind == TraceEvent::Kind::diverge);
  CHECK(events.back().stage == ord("w*2"));

  events.clear();
  Oracle member = Oracle::finite_set({EPReal::parse("1|0")});
  RunOutcome q = run(assemble(kOracleProbe), EPReal::zeros(), &member, opt);
  REQUIRE(q.kind == RunOutcome::Kind::halted);
  bool saw_query = false;
  for (const auto& ev : events)
    if (ev.kind == TraceEvent::Kind::query) {
      saw_query = true;
      CHECK(ev.note == "yes");
    }
  CHECK(saw_query);
}

TEST_CASE("runs are deterministic") {
  for (const char* src : {kFlasher, kMarcherClock, kMetaFlip, kLooper}) {
    RunOutcome a = run_src(src);
    RunOutcome b = run_src(src);
    CHECK(a.kind == b.kind);
    CHECK(format(a.stage) == format(b.stage));
    CHECK(a.output.to_string() == b.output.to_string());
    REQUIRE(a.history.size() == b.history.size());
    for (size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].stage == b.history[i].stage);
      CHECK(a.history[i].config == b.history[i].config);
    }
  }
}
