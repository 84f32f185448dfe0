#pragma once

// Text assembler for machine programs.
//
// Grammar (line oriented, '#' starts a comment):
//   tapes <3|4>
//   macro <name>(<p1>,<p2>,...):   ... state blocks ...   endmacro
//   include <macro> as <prefix> [with p1=v1,p2=v2]
//   state <name>:
//     on <pat> write <pat> move <L|R|S> goto <target>
//
// Patterns carry one character per tape. In a read pattern '*' matches both
// bits; in a write pattern '*' writes back the bit that was read. Macro
// expansion renames the macro's own states to <prefix>.<name> and replaces
// $param tokens with the include's values; nothing else is rewritten.
//
// Reserved names: "start" must be declared; "halt" is a target only; a
// missing "limit" (or a referenced but undeclared "query") is filled in
// with idle self-loops. A program that mentions query becomes an oracle
// program and must declare yes and no. Declared states must be total over
// read vectors; every gap and every duplicate is reported.

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ittm/machine.hpp"

namespace ittm {

namespace detail {

struct RuleLine {
  std::string read, write, target;
  Move move = Move::stay;
  int line_no = 0;
};

struct StateBlock {
  std::string name;
  std::vector<RuleLine> rules;
  int line_no = 0;
};

struct MacroDef {
  std::vector<std::string> params;
  std::vector<std::pair<int, std::string>> body;  // (line number, text)
};

inline std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

inline std::string strip_comment(const std::string& line) {
  auto h = line.find('#');
  return h == std::string::npos ? line : line.substr(0, h);
}

[[noreturn]] inline void fail(int line_no, const std::string& what) {
  throw program_error("line " + std::to_string(line_no) + ": " + what);
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

inline Program assemble(const std::string& source) {
  using namespace detail;

  // Pass 1: collect macro bodies and top-level lines.
  std::map<std::string, MacroDef> macros;
  std::vector<std::pair<int, std::string>> top;
  {
    std::istringstream is(source);
    std::string raw;
    int line_no = 0;
    MacroDef* open_macro = nullptr;
    while (std::getline(is, raw)) {
      ++line_no;
      std::string line = strip_comment(raw);
      auto toks = tokens_of(line);
      if (toks.empty()) continue;
      if (toks[0] == "macro") {
        if (open_macro) fail(line_no, "macro inside macro");
        if (toks.size() != 2 || toks[1].back() != ':') fail(line_no, "bad macro header");
        std::string head = toks[1].substr(0, toks[1].size() - 1);
        std::string name = head;
        MacroDef def;
        auto paren = head.find('(');
        if (paren != std::string::npos) {
          if (head.back() != ')') fail(line_no, "bad macro parameter list");
          name = head.substr(0, paren);
          std::string plist = head.substr(paren + 1, head.size() - paren - 2);
          if (!plist.empty())
            for (auto& p : split_on(plist, ',')) {
              if (p.empty()) fail(line_no, "empty macro parameter");
              def.params.push_back(p);
            }
        }
        if (name.empty()) fail(line_no, "missing macro name");
        if (macros.count(name)) fail(line_no, "macro " + name + " redefined");
        open_macro = &macros.emplace(name, std::move(def)).first->second;
      } else if (toks[0] == "endmacro") {
        if (!open_macro) fail(line_no, "endmacro outside macro");
        open_macro = nullptr;
      } else if (open_macro) {
        if (toks[0] == "include") fail(line_no, "include inside macro");
        open_macro->body.push_back({line_no, line});
      } else {
        top.push_back({line_no, line});
      }
    }
    if (open_macro) throw program_error("unterminated macro");
  }

  // Pass 2: expand includes into a flat line list.
  std::vector<std::pair<int, std::string>> flat;
  for (auto& [line_no, line] : top) {
    auto toks = tokens_of(line);
    if (toks.empty() || toks[0] != "include") {
      flat.push_back({line_no, line});
      continue;
    }
    if (toks.size() < 4 || toks[2] != "as") fail(line_no, "usage: include <macro> as <prefix> [with a=b,...]");
    auto it = macros.find(toks[1]);
    if (it == macros.end()) fail(line_no, "unknown macro " + toks[1]);
    const MacroDef& def = it->second;
    std::string prefix = toks[3];
    std::map<std::string, std::string> args;
    if (toks.size() > 4) {
      if (toks[4] != "with" || toks.size() < 6) fail(line_no, "bad include arguments");
      std::string joined;
      for (size_t i = 5; i < toks.size(); ++i) joined += toks[i];
      for (auto& kv : split_on(joined, ',')) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) fail(line_no, "bad include argument " + kv);
        args[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
    }
    for (const auto& p : def.params)
      if (!args.count(p)) fail(line_no, "include misses parameter " + p);
    for (const auto& [k, v] : args) {
      bool known = false;
      for (const auto& p : def.params) known = known || p == k;
      if (!known) fail(line_no, "include passes unknown parameter " + k);
      (void)v;
    }

    // Names of states the macro itself declares, for prefixing.
    std::vector<std::string> local;
    for (const auto& [bl, btext] : def.body) {
      auto bt = tokens_of(btext);
      if (bt.size() == 2 && bt[0] == "state" && bt[1].back() == ':')
        local.push_back(bt[1].substr(0, bt[1].size() - 1));
      (void)bl;
    }
    auto is_local = [&](const std::string& n) {
      for (const auto& l : local)
        if (l == n) return true;
      return false;
    };

    for (const auto& [bl, btext] : def.body) {
      auto bt = tokens_of(btext);
      std::string rebuilt;
      for (size_t i = 0; i < bt.size(); ++i) {
        std::string tok = bt[i];
        bool substituted = false;
        if (tok.size() > 1 && tok[0] == '$') {
          auto a = args.find(tok.substr(1));
          if (a == args.end()) fail(bl, "unknown macro parameter " + tok);
          tok = a->second;
          substituted = true;
        }
        bool colon = !tok.empty() && tok.back() == ':';
        std::string bare = colon ? tok.substr(0, tok.size() - 1) : tok;
        bool renamable = (i > 0 && bt[0] == "state" && i == 1) ||
                         (i > 0 && bt[i - 1] == "goto");
        if (!substituted && renamable && is_local(bare)) tok = prefix + "." + bare + (colon ? ":" : "");
        rebuilt += tok;
        rebuilt += ' ';
      }
      flat.push_back({bl, rebuilt});
    }
  }

  // Pass 3: parse the flat program.
  std::uint32_t tape_count = 3;
  bool tapes_set = false;
  std::vector<StateBlock> blocks;
  StateBlock* open_block = nullptr;
  for (auto& [line_no, line] : flat) {
    auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (toks[0] == "tapes") {
      if (tapes_set) fail(line_no, "tapes declared twice");
      if (open_block) fail(line_no, "tapes must precede state blocks");
      if (toks.size() != 2 || (toks[1] != "3" && toks[1] != "4")) fail(line_no, "tapes must be 3 or 4");
      tape_count = std::uint32_t(toks[1][0] - '0');
      tapes_set = true;
    } else if (toks[0] == "state") {
      if (toks.size() != 2 || toks[1].back() != ':') fail(line_no, "usage: state <name>:");
      std::string name = toks[1].substr(0, toks[1].size() - 1);
      if (name.empty()) fail(line_no, "missing state name");
      if (name == "halt") fail(line_no, "halt cannot be declared");
      for (const auto& b : blocks)
        if (b.name == name) fail(line_no, "state " + name + " redeclared");
      blocks.push_back({name, {}, line_no});
      open_block = &blocks.back();
    } else if (toks[0] == "on") {
      if (!open_block) fail(line_no, "rule outside state block");
      if (toks.size() != 8 || toks[2] != "write" || toks[4] != "move" || toks[6] != "goto")
        fail(line_no, "usage: on <pat> write <pat> move <L|R|S> goto <state>");
      RuleLine r;
      r.read = toks[1];
      r.write = toks[3];
      if (toks[5].size() != 1) fail(line_no, "bad move " + toks[5]);
      try {
        r.move = move_from_letter(toks[5][0]);
      } catch (const std::invalid_argument&) {
        fail(line_no, "bad move " + toks[5]);
      }
      r.target = toks[7];
      r.line_no = line_no;
      open_block->rules.push_back(std::move(r));
    } else {
      fail(line_no, "unrecognized directive " + toks[0]);
    }
  }
  if (blocks.empty()) throw program_error("program declares no states");

  // Reserved states materialize on demand.
  auto declared = [&](const std::string& n) {
    for (const auto& b : blocks)
      if (b.name == n) return true;
    return false;
  };
  bool query_referenced = declared("query");
  for (const auto& b : blocks)
    for (const auto& r : b.rules) query_referenced = query_referenced || r.target == "query";
  auto add_idle_state = [&](const std::string& name) {
    blocks.push_back({name, {{std::string(tape_count, '*'), std::string(tape_count, '*'), name,
                              Move::stay, 0}},
                      0});
  };
  if (!declared("limit")) add_idle_state("limit");
  if (query_referenced && !declared("query")) add_idle_state("query");
  if (query_referenced) {
    if (!declared("yes") || !declared("no"))
      throw program_error("oracle program must declare yes and no states");
    if (tape_count != 4) throw program_error("oracle program needs tapes 4");
  }

  auto state_index = [&](const std::string& n) -> std::optional<std::uint32_t> {
    for (std::uint32_t i = 0; i < blocks.size(); ++i)
      if (blocks[i].name == n) return i;
    return std::nullopt;
  };
  if (!declared("start")) throw program_error("program must declare start");

  // Expand wildcard rules into dense tables, reporting every duplicate and
  // every missing read vector.
  size_t keys = size_t(1) << tape_count;
  std::vector<MachineState> states;
  std::vector<std::string> problems;
  for (const auto& b : blocks) {
    MachineState ms;
    ms.name = b.name;
    ms.rules.assign(keys, Rule{});
    std::vector<char> covered(keys, 0);
    for (const auto& r : b.rules) {
      if (r.read.size() != tape_count)
        fail(r.line_no, "read pattern needs " + std::to_string(tape_count) + " characters");
      if (r.write.size() != tape_count)
        fail(r.line_no, "write pattern needs " + std::to_string(tape_count) + " characters");
      for (char c : r.read)
        if (c != '0' && c != '1' && c != '*') fail(r.line_no, "bad read pattern " + r.read);
      for (char c : r.write)
        if (c != '0' && c != '1' && c != '*') fail(r.line_no, "bad write pattern " + r.write);
      std::optional<std::uint32_t> target;
      if (r.target == "halt") {
        target = kHaltTarget;
      } else {
        target = state_index(r.target);
        if (!target) fail(r.line_no, "undefined state " + r.target);
      }
      for (size_t key = 0; key < keys; ++key) {
        bool match = true;
        for (std::uint32_t t = 0; t < tape_count && match; ++t) {
          char c = r.read[t];
          if (c != '*' && std::uint8_t(c - '0') != ((key >> t) & 1)) match = false;
        }
        if (!match) continue;
        std::string bits;
        for (std::uint32_t t = 0; t < tape_count; ++t) bits += char('0' + ((key >> t) & 1));
        if (covered[key]) {
          problems.push_back("duplicate rule for state " + b.name + " on " + bits);
          continue;
        }
        covered[key] = 1;
        Rule rule;
        for (std::uint32_t t = 0; t < tape_count; ++t)
          rule.write[t] = r.write[t] == '*' ? std::uint8_t((key >> t) & 1) : std::uint8_t(r.write[t] - '0');
        rule.move = r.move;
        rule.next = *target;
        ms.rules[key] = rule;
      }
    }
    for (size_t key = 0; key < keys; ++key)
      if (!covered[key]) {
        std::string bits;
        for (std::uint32_t t = 0; t < tape_count; ++t) bits += char('0' + ((key >> t) & 1));
        problems.push_back("missing rule for state " + b.name + " on " + bits);
      }
    states.push_back(std::move(ms));
  }
  if (!problems.empty()) {
    std::string msg = "incomplete transition table:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw program_error(msg);
  }

  std::optional<std::uint32_t> query, yes, no;
  if (query_referenced) {
    query = state_index("query");
    yes = state_index("yes");
    no = state_index("no");
  }
  return Program(tape_count, std::move(states), *state_index("start"), *state_index("limit"),
                 query, yes, no);
}

// Canonical listing: states in table order, one rule per concrete read
// vector in ascending binary order. Reassembling the listing reproduces the
// program exactly.
inline std::string disassemble(const Program& p) {
  std::ostringstream os;
  os << "tapes " << p.tape_count() << "\n";
  size_t keys = size_t(1) << p.tape_count();
  for (const auto& s : p.states()) {
    os << "state " << s.name << ":\n";
    for (size_t key = 0; key < keys; ++key) {
      const Rule& r = s.rules[key];
      os << "  on ";
      for (std::uint32_t t = 0; t < p.tape_count(); ++t) os << char('0' + ((key >> t) & 1));
      os << " write ";
      for (std::uint32_t t = 0; t < p.tape_count(); ++t) os << char('0' + r.write[t]);
      os << " move " << move_letter(r.move) << " goto "
         << (r.next == kHaltTarget ? "halt" : p.states()[r.next].name) << "\n";
    }
  }
  return os.str();
}

}  // namespace ittm
