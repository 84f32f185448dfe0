// Clock compiler: exact halting stages, compositionality, envelope errors.
//
// Finite targets are checked against the step-counting reference simulator,
// which is the independent oracle for act counts. Transfinite targets are
// cross-checked two ways: the reported stage must equal the requested
// ordinal, and independently the stage of a left-folded composition of
// separately verified sub-clocks must land on the same ordinal.

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "ittm/clock.hpp"
#include "ittm/leap.hpp"
#include "naive_ref.hpp"

using namespace ittm;

namespace {

RunOutcome run_clock(const Clock& c) { return run(c.program, EPReal::zeros()); }

const std::vector<std::string> kGrid = {"1",   "2",   "3",     "4",   "5",     "6",
                                        "7",   "8",   "9",     "10",  "w",     "w+1",
                                        "w*2", "w*3+2", "w^2", "w^2+w", "w^2*2"};

}  // namespace

TEST_CASE("finite clocks halt after exactly n acts") {
  for (std::uint64_t n = 1; n <= 10; ++n) {
    Clock c = compile_clock(Ordinal(n));
    naive::StepTrace ref =
        naive::run_steps(c.program, initial_configuration(c.program, EPReal::zeros()), nullptr, 64);
    REQUIRE(ref.halted);
    CHECK(ref.trace.size() == n + 1);
    CHECK(ref.trace.back().halted());

    RunOutcome out = run_clock(c);
    REQUIRE(out.kind == RunOutcome::Kind::halted);
    CHECK(out.stage == Ordinal(n));
    CHECK(out.output == EPReal::zeros());
  }
}

TEST_CASE("grid targets halt at exactly the requested stage") {
  for (const auto& text : kGrid) {
    INFO("target " << text);
    Ordinal target = parse_ordinal(text);
    Clock c = compile_clock(target);
    RunOutcome out = run_clock(c);
    REQUIRE(out.kind == RunOutcome::Kind::halted);
    CHECK(out.stage == target);
    CHECK(format(out.stage) == text);
    CHECK(out.output == EPReal::zeros());
  }
}

TEST_CASE("w^2 units are closed by meta leaps") {
  RunOutcome out = run_clock(compile_clock(parse_ordinal("w^2")));
  REQUIRE(out.kind == RunOutcome::Kind::halted);
  bool meta_at_w2 = false;
  for (const auto& e : out.history)
    if (e.kind == LeapKind::meta && e.stage == parse_ordinal("w^2")) {
      meta_at_w2 = true;
      CHECK(e.level == 1);
    }
  CHECK(meta_at_w2);

  RunOutcome two = run_clock(compile_clock(parse_ordinal("w^2*2")));
  REQUIRE(two.kind == RunOutcome::Kind::halted);
  int metas = 0;
  for (const auto& e : two.history) metas += e.kind == LeapKind::meta;
  CHECK(metas == 2);
}

TEST_CASE("captured successor prefix matches the reference stepper") {
  Clock c = compile_clock(parse_ordinal("w*2+3"));
  std::vector<Configuration> got;
  RunOptions opt;
  opt.capture = &got;
  opt.capture_limit = 40;
  RunOutcome out = run(c.program, EPReal::zeros(), nullptr, opt);
  REQUIRE(out.kind == RunOutcome::Kind::halted);
  CHECK(out.stage == parse_ordinal("w*2+3"));

  naive::StepTrace ref =
      naive::run_steps(c.program, initial_configuration(c.program, EPReal::zeros()), nullptr, 40);
  REQUIRE(got.size() >= 40);
  for (size_t i = 0; i < 40; ++i) CHECK(got[i] == ref.trace[i]);
}

TEST_CASE("composition stage equals ordinal addition") {
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"3", "4"},      {"w", "1"},     {"1", "w"},       {"w", "w"},
      {"w*2+1", "w"},  {"w", "w*2+1"}, {"w^2", "w*3"},   {"w*3+2", "2"},
      {"2", "w^2+w"},  {"w+5", "w+5"}, {"w^2*2", "w^2"}, {"10", "10"},
  };
  for (const auto& [ta, tb] : pairs) {
    INFO("compose " << ta << " then " << tb);
    Ordinal a = parse_ordinal(ta), b = parse_ordinal(tb);
    Clock composed = compose_clocks(compile_clock(a), compile_clock(b));
    Ordinal want = add(a, b);
    CHECK(composed.target == want);
    RunOutcome out = run_clock(composed);
    REQUIRE(out.kind == RunOutcome::Kind::halted);
    CHECK(out.stage == want);

    RunOutcome direct = run_clock(compile_clock(want));
    REQUIRE(direct.kind == RunOutcome::Kind::halted);
    CHECK(direct.stage == want);
  }
}

TEST_CASE("folded sub-clock composition agrees with direct compilation") {
  // the spec grid's largest target, assembled from independently checked parts
  Clock folded = compose_clocks(
      compose_clocks(compile_clock(parse_ordinal("w^2")), compile_clock(parse_ordinal("w*3"))),
      compile_clock(Ordinal(2)));
  Ordinal want = parse_ordinal("w^2+w*3+2");
  CHECK(folded.target == want);
  RunOutcome via_parts = run_clock(folded);
  REQUIRE(via_parts.kind == RunOutcome::Kind::halted);
  CHECK(via_parts.stage == want);

  RunOutcome direct = run_clock(compile_clock(want));
  REQUIRE(direct.kind == RunOutcome::Kind::halted);
  CHECK(direct.stage == want);
}

TEST_CASE("random pairs below w^2 compose exactly") {
  std::mt19937_64 rng(0xC10C5EEDULL);
  int done = 0;
  while (done < 20) {
    std::uint64_t b1 = rng() % 6, c1 = rng() % 6, b2 = rng() % 6, c2 = rng() % 6;
    if ((b1 == 0 && c1 == 0) || (b2 == 0 && c2 == 0)) continue;
    ++done;
    Ordinal a = add(Ordinal::omega_power(1, b1 ? b1 : 1), Ordinal(c1));
    if (b1 == 0) a = Ordinal(c1);
    Ordinal b = add(Ordinal::omega_power(1, b2 ? b2 : 1), Ordinal(c2));
    if (b2 == 0) b = Ordinal(c2);
    Ordinal want = add(a, b);
    INFO("pair " << format(a) << " + " << format(b));

    RunOutcome composed = run_clock(compose_clocks(compile_clock(a), compile_clock(b)));
    REQUIRE(composed.kind == RunOutcome::Kind::halted);
    CHECK(composed.stage == want);

    RunOutcome direct = run_clock(compile_clock(want));
    REQUIRE(direct.kind == RunOutcome::Kind::halted);
    CHECK(direct.stage == want);
  }
}

TEST_CASE("composition chains fold to the left") {
  Clock w = compile_clock(parse_ordinal("w"));
  Clock left = compose_clocks(compose_clocks(w, w), w);
  RunOutcome out = run_clock(left);
  REQUIRE(out.kind == RunOutcome::Kind::halted);
  CHECK(out.stage == parse_ordinal("w*3"));

  CHECK_THROWS_AS(compose_clocks(w, compose_clocks(w, w)), std::invalid_argument);
}

TEST_CASE("targets outside the envelope are rejected") {
  CHECK_THROWS_AS(compile_clock(Ordinal()), std::invalid_argument);
  CHECK_THROWS_AS(compile_clock(Ordinal::omega_power(3)), std::invalid_argument);
  CHECK_THROWS_AS(compile_clock(Ordinal::omega_power(2, kMaxClockCoefficient + 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(compile_clock(Ordinal(kMaxClockCoefficient + 1)), std::invalid_argument);
  CHECK_NOTHROW(compile_clock(Ordinal(kMaxClockCoefficient)));
}

TEST_CASE("compilation and runs are deterministic") {
  Ordinal target = parse_ordinal("w^2+w");
  Clock a = compile_clock(target);
  Clock b = compile_clock(target);
  CHECK(a.program == b.program);
  RunOutcome r1 = run_clock(a);
  RunOutcome r2 = run_clock(b);
  REQUIRE(r1.kind == RunOutcome::Kind::halted);
  CHECK(r1.stage == r2.stage);
  CHECK(r1.output == r2.output);
}
