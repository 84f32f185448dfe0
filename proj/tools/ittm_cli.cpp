// Command line front end. Subcommands cover assembling programs, running
// them (or freshly compiled clocks), the census, the well-order and halting
// deciders, and the value encodings. Exit codes for run-like commands map
// onto outcomes: 0 halted, 2 diverges, 3 undetermined; 1 is usage or any
// load/assembly error. All output for fixed inputs is byte-deterministic.

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ittm/assembler.hpp"
#include "ittm/census.hpp"
#include "ittm/classical.hpp"
#include "ittm/clock.hpp"
#include "ittm/deciders.hpp"
#include "ittm/leap.hpp"
#include "ittm/serialize.hpp"
#include "ittm/wo.hpp"

namespace {

using namespace ittm;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// .json files hold serialized transition tables; anything else is source.
Program load_program(const std::string& path) {
  std::string text = slurp(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return program_from_json(Json::parse(text));
  return assemble(text);
}

std::uint64_t parse_nat(const std::string& text) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size())
    throw std::runtime_error("bad number '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    size_t a = cur.find_first_not_of(" \t");
    size_t b = cur.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
    cur.clear();
  };
  for (char c : text) {
    if (c == ',')
      flush();
    else
      cur += c;
  }
  flush();
  return out;
}

// "i<j" tokens, comma separated; the empty string is the empty relation.
std::vector<std::pair<std::uint64_t, std::uint64_t>> parse_pairs(const std::string& text) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (const std::string& tok : split_list(text)) {
    size_t lt = tok.find('<');
    if (lt == std::string::npos) throw std::runtime_error("bad pair '" + tok + "' (want i<j)");
    out.push_back({parse_nat(tok.substr(0, lt)), parse_nat(tok.substr(lt + 1))});
  }
  return out;
}

std::vector<EPReal> parse_reals(const std::string& text) {
  std::vector<EPReal> out;
  for (const std::string& tok : split_list(text)) out.push_back(EPReal::parse(tok));
  return out;
}

void write_text(const std::string& body, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << body;
}

int report_outcome(const RunOutcome& out, bool as_json) {
  if (as_json) {
    std::cout << outcome_to_json(out).dump(2) << "\n";
  } else {
    switch (out.kind) {
      case RunOutcome::Kind::halted:
        std::cout << "Halted stage=" << format(out.stage) << " output=" << real_text(out.output)
                  << "\n";
        break;
      case RunOutcome::Kind::diverges:
        std::cout << "Diverges first=" << format(out.first_limit)
                  << " repeat=" << format(out.repeat_limit) << "\n";
        break;
      case RunOutcome::Kind::undetermined:
        std::cout << "Undetermined reason=" << to_string(out.reason)
                  << " last=" << format(out.last_stage) << "\n";
        break;
    }
  }
  return out.kind == RunOutcome::Kind::halted     ? 0
         : out.kind == RunOutcome::Kind::diverges ? 2
                                                  : 3;
}

std::string census_text(const CensusReport& rep) {
  std::uint64_t halted = 0, diverges = 0;
  for (const auto& o : rep.outcomes) {
    halted += o.kind == RunOutcome::Kind::halted;
    diverges += o.kind == RunOutcome::Kind::diverges;
  }
  std::ostringstream os;
  os << "census states=" << rep.max_states << " programs=" << family_size(rep.max_states)
     << " halted=" << halted << " diverges=" << diverges << " undetermined=" << rep.undetermined
     << "\n\n";

  std::vector<std::pair<std::string, std::uint64_t>> rows;
  for (size_t i = 0; i < rep.stages.size();) {
    size_t k = i;
    while (k < rep.stages.size() && rep.stages[k] == rep.stages[i]) ++k;
    rows.push_back({format(rep.stages[i]), k - i});
    i = k;
  }
  size_t width = 5;
  for (const auto& [s, n] : rows) width = std::max(width, s.size());
  os << "stage" << std::string(width - 5, ' ') << "  count\n";
  for (const auto& [s, n] : rows) os << s << std::string(width - s.size(), ' ') << "  " << n << "\n";

  if (!rep.gaps.empty()) {
    os << "\n";
    for (const auto& [lo, hi] : rep.gaps) os << "gap [" << format(lo) << ", " << format(hi) << ")\n";
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"infinite time machine workbench"};
  app.require_subcommand(1);

  auto* asm_cmd = app.add_subcommand("assemble", "assemble source into a program table");
  std::string asm_src, asm_out;
  asm_cmd->add_option("source", asm_src, "program source file")->required();
  asm_cmd->add_option("-o,--out", asm_out, "output file (default stdout)");

  auto* clock_cmd = app.add_subcommand("clock", "compile a clock for a target stage");
  std::string clock_target, clock_out;
  clock_cmd->add_option("target", clock_target, "target stage, e.g. w^2+w*3+2")->required();
  clock_cmd->add_option("-o,--out", clock_out, "output file (default stdout)");

  auto* run_cmd = app.add_subcommand("run", "assemble and run a program");
  std::string run_src, run_clock, run_input = "0|0", run_oset, run_ocomp, run_trace;
  Budgets run_budgets;
  std::uint64_t run_window = 32;
  bool run_json = false, run_liminf = false;
  run_cmd->add_option("source", run_src, "program file, .json or source");
  run_cmd->add_option("--clock", run_clock, "run a freshly compiled clock instead of a file");
  run_cmd->add_option("--input", run_input, "input real as prefix|period (default 0|0)");
  auto* oset = run_cmd->add_option("--oracle-set", run_oset, "oracle: finite set of reals, comma separated");
  auto* ocomp = run_cmd->add_option("--oracle-complement", run_ocomp,
                                    "oracle: complement of a finite set of reals");
  oset->excludes(ocomp);
  run_cmd->add_option("--budget-steps", run_budgets.max_steps_per_block, "steps per block");
  run_cmd->add_option("--budget-depth", run_budgets.max_limit_depth, "nested leap levels");
  run_cmd->add_option("--budget-leaps", run_budgets.max_total_leaps, "total limit stages");
  run_cmd->add_option("--trace", run_trace, "write a JSON-lines trace to this file, - for stdout");
  run_cmd->add_option("--trace-window", run_window, "step events per block in the trace");
  run_cmd->add_flag("--liminf", run_liminf, "use liminf at limits instead of limsup");
  run_cmd->add_flag("--json", run_json, "print the outcome as JSON");

  auto* census_cmd = app.add_subcommand("census", "sweep the canonical program family");
  std::uint32_t census_states = 1;
  Budgets census_budgets = kCensusBudgets;
  unsigned census_jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string census_out;
  bool census_json = false;
  census_cmd->add_option("--states", census_states, "state bound")->required();
  census_cmd->add_option("--budget-steps", census_budgets.max_steps_per_block, "steps per block");
  census_cmd->add_option("--budget-depth", census_budgets.max_limit_depth, "nested leap levels");
  census_cmd->add_option("--budget-leaps", census_budgets.max_total_leaps, "total limit stages");
  census_cmd->add_option("--jobs", census_jobs, "worker threads");
  census_cmd->add_option("-o,--out", census_out, "output file (default stdout)");
  census_cmd->add_flag("--json", census_json, "emit the full report as JSON");

  auto* wo_cmd = app.add_subcommand("wo", "decide whether a finite order is a well-order");
  std::string wo_pairs;
  Budgets wo_budgets;
  wo_cmd->add_option("--pairs", wo_pairs, "relation as i<j tokens, comma separated")->required();
  wo_cmd->add_option("--budget-steps", wo_budgets.max_steps_per_block, "steps per block");
  wo_cmd->add_option("--budget-depth", wo_budgets.max_limit_depth, "nested leap levels");
  wo_cmd->add_option("--budget-leaps", wo_budgets.max_total_leaps, "total limit stages");

  auto* halt_cmd = app.add_subcommand("halt-decide", "decide classical halting at the first limit");
  std::string halt_src;
  std::uint64_t halt_input = 0;
  Budgets halt_budgets;
  bool halt_json = false;
  halt_cmd->add_option("machine", halt_src, "classical machine source file")->required();
  halt_cmd->add_option("--input", halt_input, "unary argument for the machine (default 0)");
  halt_cmd->add_option("--budget-steps", halt_budgets.max_steps_per_block, "steps per block");
  halt_cmd->add_option("--budget-depth", halt_budgets.max_limit_depth, "nested leap levels");
  halt_cmd->add_option("--budget-leaps", halt_budgets.max_total_leaps, "total limit stages");
  halt_cmd->add_flag("--json", halt_json, "print the raw outcome as JSON");

  auto* enc_cmd = app.add_subcommand("encode", "value encodings, one result line per option");
  std::uint64_t enc_natural = 0, enc_unpair = 0;
  std::vector<std::uint64_t> enc_pair;
  std::string enc_relation;
  enc_cmd->add_option("--natural", enc_natural, "natural as a real");
  enc_cmd->add_option("--pair", enc_pair, "pairing code of i j")->expected(2);
  enc_cmd->add_option("--unpair", enc_unpair, "split a pairing code back into i j");
  enc_cmd->add_option("--relation", enc_relation, "relation i<j,... as a real");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(asm_cmd)) {
      write_text(program_to_json(assemble(slurp(asm_src))).dump(2) + "\n", asm_out);
      return 0;
    }

    if (app.got_subcommand(clock_cmd)) {
      Clock c = compile_clock(parse_ordinal(clock_target));
      write_text(program_to_json(c.program).dump(2) + "\n", clock_out);
      return 0;
    }

    if (app.got_subcommand(run_cmd)) {
      if (run_src.empty() == run_clock.empty()) {
        std::cerr << "run: pass exactly one of a source file or --clock\n";
        return 1;
      }
      Program p = run_clock.empty() ? load_program(run_src)
                                    : compile_clock(parse_ordinal(run_clock)).program;
      std::optional<Oracle> oracle;
      if (oset->count()) oracle = Oracle::finite_set(parse_reals(run_oset));
      if (ocomp->count()) oracle = Oracle::complement_of(parse_reals(run_ocomp));

      RunOptions opt;
      opt.budgets = run_budgets;
      if (run_liminf) opt.limit_rule = LimitRule::liminf;
      opt.trace_step_window = run_window;
      std::ofstream trace_file;
      if (!run_trace.empty()) {
        std::ostream* sink = &std::cout;
        if (run_trace != "-") {
          trace_file.open(run_trace, std::ios::binary);
          if (!trace_file) throw std::runtime_error("cannot write " + run_trace);
          sink = &trace_file;
        }
        opt.trace = [sink](const TraceEvent& ev) { *sink << trace_to_json(ev).dump() << "\n"; };
      }
      RunOutcome out = run(p, EPReal::parse(run_input), oracle ? &*oracle : nullptr, opt);
      return report_outcome(out, run_json);
    }

    if (app.got_subcommand(census_cmd)) {
      CensusReport rep = census(census_states, census_budgets, census_jobs);
      write_text(census_json ? census_to_json(rep).dump(2) + "\n" : census_text(rep), census_out);
      return 0;
    }

    if (app.got_subcommand(wo_cmd)) {
      RunOutcome out = run(wo_decider(), encode_relation(parse_pairs(wo_pairs)).real, nullptr,
                           RunOptions{.budgets = wo_budgets});
      if (out.kind != RunOutcome::Kind::halted) return report_outcome(out, false);
      std::cout << "well-order: " << (out.output == encode_natural(1) ? "yes" : "no") << "\n";
      return 0;
    }

    if (app.got_subcommand(halt_cmd)) {
      Program d = halting_decider(parse_ctm(slurp(halt_src)), halt_input);
      RunOutcome out =
          run(d, EPReal::zeros(), nullptr, RunOptions{.budgets = halt_budgets});
      if (halt_json || out.kind != RunOutcome::Kind::halted) return report_outcome(out, halt_json);
      std::cout << "halts: " << (out.output == encode_natural(1) ? "yes" : "no")
                << " stage=" << format(out.stage) << "\n";
      return 0;
    }

    if (app.got_subcommand(enc_cmd)) {
      bool any = false;
      if (enc_cmd->count("--natural")) {
        std::cout << real_text(encode_natural(enc_natural)) << "\n";
        any = true;
      }
      if (enc_cmd->count("--pair")) {
        std::cout << ittm::pair(enc_pair[0], enc_pair[1]) << "\n";
        any = true;
      }
      if (enc_cmd->count("--unpair")) {
        auto [i, j] = unpair(enc_unpair);
        std::cout << i << " " << j << "\n";
        any = true;
      }
      if (enc_cmd->count("--relation")) {
        std::cout << real_text(encode_relation(parse_pairs(enc_relation)).real) << "\n";
        any = true;
      }
      if (!any) {
        std::cerr << "encode: pass at least one of --natural, --pair, --unpair, --relation\n";
        return 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
