#pragma once

// JSON forms: program tables, trace events, census reports. Uses ordered
// JSON everywhere so emitted bytes are deterministic.

#include <json.hpp>

#include "ittm/census.hpp"
#include "ittm/leap.hpp"
#include "ittm/machine.hpp"
#include "ittm/ordinal.hpp"

namespace ittm {

using Json = nlohmann::ordered_json;

// Reals in display form: canonical "prefix|period" text except that an
// empty prefix is padded with one period copy, so the all-zero real reads
// "0|0" rather than "|0". Parses back to the same value.
inline std::string real_text(const EPReal& r) {
  std::string s = r.to_string();
  if (!s.empty() && s.front() == '|') s = s.substr(1) + s;
  return s;
}

inline std::string read_bits(std::uint32_t tape_count, size_t key) {
  std::string bits;
  for (std::uint32_t t = 0; t < tape_count; ++t) bits += char('0' + ((key >> t) & 1));
  return bits;
}

inline Json program_to_json(const Program& p) {
  Json j;
  j["tapes"] = p.tape_count();
  j["start"] = p.state_name(p.start());
  j["limit"] = p.state_name(p.limit());
  if (p.uses_oracle()) {
    j["query"] = p.state_name(*p.query());
    j["yes"] = p.state_name(*p.yes());
    j["no"] = p.state_name(*p.no());
  }
  Json states = Json::object();
  size_t keys = size_t(1) << p.tape_count();
  for (const auto& s : p.states()) {
    Json table = Json::object();
    for (size_t key = 0; key < keys; ++key) {
      const Rule& r = s.rules[key];
      Json rule;
      std::string w;
      for (std::uint32_t t = 0; t < p.tape_count(); ++t) w += char('0' + r.write[t]);
      rule["write"] = w;
      rule["move"] = std::string(1, move_letter(r.move));
      rule["next"] = r.next == kHaltTarget ? "halt" : p.states()[r.next].name;
      table[read_bits(p.tape_count(), key)] = rule;
    }
    states[s.name] = table;
  }
  j["states"] = states;
  return j;
}

inline Program program_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("tapes") || !j.contains("start") || !j.contains("states"))
    throw program_error("program json needs tapes, start and states");
  std::uint32_t tape_count = j.at("tapes").get<std::uint32_t>();
  if (tape_count != 3 && tape_count != 4) throw program_error("tapes must be 3 or 4");
  const Json& states_json = j.at("states");
  if (!states_json.is_object() || states_json.empty()) throw program_error("no states");

  std::vector<std::string> names;
  for (auto it = states_json.begin(); it != states_json.end(); ++it) names.push_back(it.key());
  auto index_of = [&](const std::string& n) -> std::optional<std::uint32_t> {
    for (std::uint32_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return i;
    return std::nullopt;
  };

  size_t keys = size_t(1) << tape_count;
  std::vector<MachineState> states;
  for (const auto& name : names) {
    const Json& table = states_json.at(name);
    MachineState ms;
    ms.name = name;
    ms.rules.assign(keys, Rule{});
    for (size_t key = 0; key < keys; ++key) {
      std::string bits = read_bits(tape_count, key);
      if (!table.contains(bits))
        throw program_error("state " + name + " misses read vector " + bits);
      const Json& rj = table.at(bits);
      Rule r;
      std::string w = rj.at("write").get<std::string>();
      if (w.size() != tape_count) throw program_error("bad write width in state " + name);
      for (std::uint32_t t = 0; t < tape_count; ++t) {
        if (w[t] != '0' && w[t] != '1') throw program_error("bad write bits in state " + name);
        r.write[t] = std::uint8_t(w[t] - '0');
      }
      std::string mv = rj.at("move").get<std::string>();
      if (mv.size() != 1) throw program_error("bad move in state " + name);
      r.move = move_from_letter(mv[0]);
      std::string next = rj.at("next").get<std::string>();
      if (next == "halt") {
        r.next = kHaltTarget;
      } else {
        auto idx = index_of(next);
        if (!idx) throw program_error("state " + name + " targets undefined state " + next);
        r.next = *idx;
      }
      ms.rules[key] = r;
    }
    states.push_back(std::move(ms));
  }

  auto required = [&](const char* field) {
    if (!j.contains(field)) throw program_error(std::string("program json misses ") + field);
    std::string n = j.at(field).get<std::string>();
    auto idx = index_of(n);
    if (!idx) throw program_error(std::string(field) + " names undefined state " + n);
    return *idx;
  };
  std::uint32_t start = required("start");
  std::uint32_t limit = required("limit");
  std::optional<std::uint32_t> query, yes, no;
  if (j.contains("query")) {
    query = required("query");
    yes = required("yes");
    no = required("no");
  }
  return Program(tape_count, std::move(states), start, limit, query, yes, no);
}

inline Json trace_to_json(const TraceEvent& ev) {
  static const char* const names[] = {"step", "leap", "query", "halt", "diverge", "undetermined"};
  Json j;
  j["event"] = names[size_t(ev.kind)];
  j["stage"] = format(ev.stage);
  j["state"] = ev.state;
  j["head"] = ev.head;
  Json cells = Json::array();
  for (auto [t, c] : ev.changed_cells) cells.push_back(Json::array({t, c}));
  j["changed_cells"] = cells;
  if (!ev.note.empty()) j["note"] = ev.note;
  if (!ev.tapes.empty()) {
    Json tapes = Json::array();
    for (const auto& r : ev.tapes) tapes.push_back(real_text(r));
    j["tapes"] = tapes;
  }
  return j;
}

inline Json outcome_to_json(const RunOutcome& out) {
  Json j;
  switch (out.kind) {
    case RunOutcome::Kind::halted:
      j["kind"] = "halted";
      j["stage"] = format(out.stage);
      j["output"] = real_text(out.output);
      break;
    case RunOutcome::Kind::diverges:
      j["kind"] = "diverges";
      j["first"] = format(out.first_limit);
      j["repeat"] = format(out.repeat_limit);
      break;
    case RunOutcome::Kind::undetermined:
      j["kind"] = "undetermined";
      j["reason"] = to_string(out.reason);
      j["last"] = format(out.last_stage);
      if (!out.diagnostics.empty()) j["diagnostics"] = out.diagnostics;
      break;
  }
  if (!out.history.empty()) {
    Json h = Json::array();
    for (const auto& e : out.history) {
      Json entry;
      entry["stage"] = format(e.stage);
      entry["delta"] = format(e.delta);
      entry["level"] = e.level;
      entry["kind"] = to_string(e.kind);
      h.push_back(entry);
    }
    j["history"] = h;
  }
  return j;
}

inline Json census_to_json(const CensusReport& rep) {
  Json j;
  j["states"] = rep.max_states;
  Json blocks = Json::array();
  for (std::uint32_t n = 1; n <= rep.max_states; ++n) {
    Json b;
    b["states"] = n;
    b["programs"] = family_block(n);
    blocks.push_back(std::move(b));
  }
  j["blocks"] = blocks;
  j["programs"] = family_size(rep.max_states);
  Json stages = Json::array();
  for (size_t i = 0; i < rep.stages.size();) {
    size_t k = i;
    while (k < rep.stages.size() && rep.stages[k] == rep.stages[i]) ++k;
    Json s;
    s["stage"] = format(rep.stages[i]);
    s["count"] = k - i;
    stages.push_back(std::move(s));
    i = k;
  }
  j["stages"] = stages;
  Json gaps = Json::array();
  for (const auto& [lo, hi] : rep.gaps) {
    Json g;
    g["lo"] = format(lo);
    g["hi"] = format(hi);
    gaps.push_back(std::move(g));
  }
  j["gaps"] = gaps;
  j["undetermined"] = rep.undetermined;
  Json outs = Json::array();
  for (const auto& o : rep.outcomes) outs.push_back(outcome_to_json(o));
  j["outcomes"] = outs;
  return j;
}

}  // namespace ittm
