#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "density.hpp"
#include "errors.hpp"
#include "pregroup.hpp"
#include "semantics.hpp"
#include "tensor.hpp"

namespace ddop {

// ------------------------------------------------------------------------
// Lexicon model
// ------------------------------------------------------------------------

enum class EntryKind { Mixture, Pure, Raw, Builtin };

/// One weighted sense vector, by basis labels.
struct SenseSpec {
  double weight = 1.0;
  std::vector<std::pair<std::string, double>> vector;  // [label, weight] pairs
};

/// One mixture component: a weighted list of senses.
struct GroupSpec {
  double weight = 1.0;
  std::vector<SenseSpec> senses;
};

/// One weighted basis tuple of a pure entry, one label per wire.
struct TupleSpec {
  double weight = 1.0;
  std::vector<std::string> labels;
};

/// A word entry: its grammatical type, how it was declared, and the
/// resolved meaning ready for composition. The declaration is kept so
/// that saving reproduces the file.
struct LexiconEntry {
  std::string name;
  PregroupType type;
  EntryKind kind = EntryKind::Mixture;
  std::vector<GroupSpec> groups;  // kind == Mixture
  std::vector<TupleSpec> tuples;  // kind == Pure
  std::string builtin;            // kind == Builtin
  LiftedMeaning meaning;          // kind == Raw keeps the tensor in factor 0
};

/// An immutable bag of word meanings over declared spaces. Entries stay in
/// declaration order; a name may appear several times, giving candidate
/// readings tried in order.
struct Lexicon {
  std::vector<SpacePtr> spaces;
  TypeAssignment assignment;  // basic grammatical type -> space
  std::vector<LexiconEntry> entries;

  [[nodiscard]] std::vector<const LexiconEntry*> candidates(const std::string& name) const {
    std::vector<const LexiconEntry*> out;
    for (const auto& e : entries)
      if (e.name == name) out.push_back(&e);
    return out;
  }
  [[nodiscard]] bool has(const std::string& name) const {
    return !candidates(name).empty();
  }
};

// ------------------------------------------------------------------------
// Construction helpers
// ------------------------------------------------------------------------

namespace detail {

inline const SpacePtr& space_for_base(const Lexicon& lex, const std::string& base,
                                      const std::string& where) {
  auto it = lex.assignment.spaces.find(base);
  if (it == lex.assignment.spaces.end())
    throw ValidationError(where + ": basic type '" + base +
                          "' is not bound to any space");
  return it->second;
}

inline std::size_t label_index(const SpacePtr& space, const std::string& label,
                               const std::string& where) {
  if (auto i = basis_index(*space, label)) return *i;
  throw ValidationError(where + ": unknown label '" + label + "' in space '" +
                        space->name + "'");
}

inline Tensor sense_vector(const SpacePtr& space, const SenseSpec& s,
                           const std::string& where) {
  Tensor v = Tensor::zeros({Wire{space, false}});
  for (const auto& [label, w] : s.vector) {
    if (w < 0.0)
      throw ValidationError(where + ": negative weight on label '" + label + "'");
    v.data[label_index(space, label, where)] += w;
  }
  return v;
}

}  // namespace detail

/// Resolve one entry's meaning from its declaration. `where` prefixes error
/// messages with the word name (and source path when loading a file).
inline LiftedMeaning resolve_entry(const Lexicon& lex, const LexiconEntry& e,
                                   const std::string& where) {
  switch (e.kind) {
    case EntryKind::Mixture: {
      if (e.type.simples.size() != 1 || e.type.simples[0].adjoint_order != 0)
        throw ValidationError(where + ": mixture entries need a single plain basic type");
      const SpacePtr& space =
          detail::space_for_base(lex, e.type.simples[0].base, where);
      std::vector<SenseGroup> groups;
      for (const auto& g : e.groups) {
        if (g.weight < 0.0) throw ValidationError(where + ": negative group weight");
        SenseGroup sg{g.weight, {}};
        for (const auto& s : g.senses) {
          if (s.weight < 0.0) throw ValidationError(where + ": negative sense weight");
          sg.senses.push_back(Sense{detail::sense_vector(space, s, where), s.weight});
        }
        groups.push_back(std::move(sg));
      }
      try {
        return LiftedMeaning::from_dual(
            dual_density_from_mixtures(groups, SenseChecks{false, false, 1e-9}));
      } catch (const Error& err) {
        throw ValidationError(where + ": " + err.what());
      }
    }
    case EntryKind::Pure: {
      std::vector<Wire> wires;
      for (const auto& st : e.type.simples)
        wires.push_back(
            Wire{detail::space_for_base(lex, st.base, where), st.adjoint_order % 2 != 0});
      Tensor v = Tensor::zeros(wires);
      const std::vector<std::size_t> strides = strides_of(v);
      for (const auto& t : e.tuples) {
        if (t.weight < 0.0) throw ValidationError(where + ": negative tuple weight");
        if (t.labels.size() != wires.size())
          throw ValidationError(where + ": tuple needs one label per wire of '" +
                                to_string(e.type) + "'");
        std::size_t flat = 0;
        for (std::size_t k = 0; k < t.labels.size(); ++k)
          flat += strides[k] * detail::label_index(wires[k].space, t.labels[k], where);
        v.data[flat] += t.weight;
      }
      return LiftedMeaning::from_pure(v);
    }
    case EntryKind::Raw: {
      LiftedMeaning m;
      try {
        m = LiftedMeaning::from_lifted_tensor(e.meaning.factors.at(0));
      } catch (const Error& err) {
        throw ValidationError(where + ": " + err.what());
      }
      if (m.level0_rank() != e.type.simples.size())
        throw ValidationError(where + ": raw layout has " +
                              std::to_string(m.level0_rank()) +
                              " wire groups but the type has " +
                              std::to_string(e.type.simples.size()) + " wires");
      for (std::size_t k = 0; k < m.level0_rank(); ++k) {
        const SimpleType& st = e.type.simples[k];
        const Wire& got = m.factors[0].wires[4 * k];
        if (!same_space(*got.space, *detail::space_for_base(lex, st.base, where)) ||
            got.conj != (st.adjoint_order % 2 != 0))
          throw ValidationError(where + ": raw layout wire " + std::to_string(k) +
                                " does not match type '" + to_string(e.type) + "'");
      }
      return m;
    }
    case EntryKind::Builtin: {
      LiftedMeaning m;
      try {
        if (e.builtin == "that_subj")
          m = that_subj(lex.assignment);
        else if (e.builtin == "that_obj")
          m = that_obj(lex.assignment);
        else
          throw ValidationError(where + ": unknown builtin '" + e.builtin + "'");
      } catch (const AssignmentGap& err) {
        throw ValidationError(where + ": " + err.what());
      }
      if (m.level0_rank() != e.type.simples.size())
        throw ValidationError(where + ": builtin '" + e.builtin +
                              "' does not fit type '" + to_string(e.type) + "'");
      for (std::size_t k = 0; k < m.level0_rank(); ++k) {
        const Wire got = m.factors[0].wires[k];
        const SimpleType& st = e.type.simples[k];
        if (!same_space(*got.space, *detail::space_for_base(lex, st.base, where)) ||
            got.conj != (st.adjoint_order % 2 != 0))
          throw ValidationError(where + ": builtin '" + e.builtin +
                                "' does not fit type '" + to_string(e.type) + "'");
      }
      return m;
    }
  }
  throw ValidationError(where + ": unknown entry kind");
}

/// Wire layout of a tensor as a space-name string, asterisk = conjugated,
/// e.g. "N N* N N*".
inline std::string layout_string(const Tensor& t) {
  std::string layout;
  for (std::size_t k = 0; k < t.rank(); ++k) {
    if (k) layout += ' ';
    layout += t.wires[k].space->name;
    if (t.wires[k].conj) layout += '*';
  }
  return layout;
}

/// Check a resolved lexicon: every single-wire word must be a well-formed
/// doubled state with both operator views positive semidefinite. Returns
/// one finding per violation; empty means clean.
inline std::vector<std::string> validate(const Lexicon& lex, double tol = 1e-10) {
  std::vector<std::string> findings;
  for (const auto& e : lex.entries) {
    if (e.meaning.level0_rank() != 1) continue;
    try {
      DualDensity d = as_dual(e.meaning.dense());
      if (!is_psd(phi1(d), tol))
        findings.push_back("word '" + e.name + "': first operator view is not PSD");
      if (!is_psd(phi2(d), tol))
        findings.push_back("word '" + e.name + "': second operator view is not PSD");
    } catch (const Error& err) {
      findings.push_back("word '" + e.name + "': " + err.what());
    }
  }
  return findings;
}

// ------------------------------------------------------------------------
// Built-in model
// ------------------------------------------------------------------------

/// The bundled showcase lexicon: an ambiguous proper noun over two sense
/// blocks (places A, M and performers Z, P), its single-sense and pure
/// restrictions, the verb connecting performers to the place A, and the
/// two relative pronouns.
inline Lexicon builtin_beirut() {
  Lexicon lex;
  lex.spaces = {make_space("N", {"A", "M", "Z", "P"}),
                make_space("S", {"bot", "top"})};
  lex.assignment.spaces = {{"n", lex.spaces[0]}, {"s", lex.spaces[1]}};

  auto label = [](const std::string& l) {
    return std::vector<std::pair<std::string, double>>{{l, 1.0}};
  };
  const GroupSpec city{1.0, {{1.0, label("A")}, {1.0, label("M")}}};
  const GroupSpec band{1.0, {{1.0, label("Z")}, {1.0, label("P")}}};

  auto add = [&lex](LexiconEntry e) {
    e.meaning = resolve_entry(lex, e, e.name);
    lex.entries.push_back(std::move(e));
  };

  LexiconEntry beirut{"Beirut", parse_type("n"), EntryKind::Mixture, {city, band}, {}, "", {}};
  add(beirut);
  add({"Beirut-city", parse_type("n"), EntryKind::Mixture, {city}, {}, "", {}});
  add({"Beirut-band", parse_type("n"), EntryKind::Mixture, {band}, {}, "", {}});
  for (const auto* p : {"A", "M"})
    add({std::string("Beirut-city-") + p, parse_type("n"), EntryKind::Pure,
         {}, {TupleSpec{1.0, {p}}}, "", {}});
  for (const auto* p : {"Z", "P"})
    add({std::string("Beirut-band-") + p, parse_type("n"), EntryKind::Pure,
         {}, {TupleSpec{1.0, {p}}}, "", {}});
  add({"play-at", parse_type("n^r s n^l"), EntryKind::Pure, {},
       {TupleSpec{1.0, {"Z", "top", "A"}}, TupleSpec{1.0, {"P", "top", "A"}}},
       "", {}});
  add({"that", parse_type("n^r n s^l n"), EntryKind::Builtin, {}, {}, "that_subj", {}});
  add({"that", parse_type("n^r n n^ll s^l"), EntryKind::Builtin, {}, {}, "that_obj", {}});
  return lex;
}

// ------------------------------------------------------------------------
// JSON serialization
// ------------------------------------------------------------------------

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline std::string json_type_name(const nlohmann::json& j) {
  return std::string(j.type_name());
}

/// Fetch a required field, reporting schema problems as parse errors.
inline const nlohmann::json& field(const nlohmann::json& j, const char* key,
                                   const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

inline double weight_or_one(const nlohmann::json& j, const std::string& where) {
  if (!j.contains("weight")) return 1.0;
  if (!j["weight"].is_number())
    throw ParseError(where + ": 'weight' must be a number");
  return j["weight"].get<double>();
}

inline SenseSpec parse_sense(const nlohmann::json& j, const std::string& where) {
  SenseSpec s;
  s.weight = weight_or_one(j, where);
  const auto& vec = field(j, "vector", where);
  if (!vec.is_array() || vec.empty())
    throw ParseError(where + ": 'vector' must be a non-empty array");
  for (const auto& item : vec) {
    if (item.is_string()) {
      s.vector.emplace_back(item.get<std::string>(), 1.0);
    } else if (item.is_array() && item.size() == 2 && item[0].is_string() &&
               item[1].is_number()) {
      s.vector.emplace_back(item[0].get<std::string>(), item[1].get<double>());
    } else {
      throw ParseError(where + ": vector items must be \"label\" or [\"label\", weight]");
    }
  }
  return s;
}

inline PregroupType parse_entry_type(const nlohmann::json& j, const std::string& where) {
  const auto& t = field(j, "type", where);
  if (!t.is_string()) throw ParseError(where + ": 'type' must be a string");
  try {
    return parse_type(t.get<std::string>());
  } catch (const SyntaxError& err) {
    throw ValidationError(where + ": " + err.what());
  }
}

inline LexiconEntry parse_word(const Lexicon& lex, const nlohmann::json& j,
                               const std::string& where0) {
  if (!j.is_object()) throw ParseError(where0 + ": word entries must be objects");
  const auto& name = field(j, "name", where0);
  if (!name.is_string()) throw ParseError(where0 + ": 'name' must be a string");
  LexiconEntry e;
  e.name = name.get<std::string>();
  const std::string where = where0 + " ('" + e.name + "')";
  e.type = parse_entry_type(j, where);

  const auto& kind = field(j, "kind", where);
  const std::string k = kind.is_string() ? kind.get<std::string>() : "";
  if (k == "mixture") {
    e.kind = EntryKind::Mixture;
    const auto& groups = field(j, "groups", where);
    if (!groups.is_array() || groups.empty())
      throw ParseError(where + ": 'groups' must be a non-empty array");
    for (const auto& gj : groups) {
      GroupSpec g;
      g.weight = weight_or_one(gj, where);
      const auto& senses = field(gj, "senses", where);
      if (!senses.is_array() || senses.empty())
        throw ParseError(where + ": 'senses' must be a non-empty array");
      for (const auto& sj : senses) g.senses.push_back(parse_sense(sj, where));
      e.groups.push_back(std::move(g));
    }
  } else if (k == "pure") {
    e.kind = EntryKind::Pure;
    const auto& tuples = field(j, "tuples", where);
    if (!tuples.is_array() || tuples.empty())
      throw ParseError(where + ": 'tuples' must be a non-empty array");
    for (const auto& tj : tuples) {
      TupleSpec t;
      t.weight = weight_or_one(tj, where);
      const auto& labels = field(tj, "labels", where);
      if (!labels.is_array())
        throw ParseError(where + ": 'labels' must be an array");
      for (const auto& lj : labels) {
        if (!lj.is_string()) throw ParseError(where + ": labels must be strings");
        t.labels.push_back(lj.get<std::string>());
      }
      e.tuples.push_back(std::move(t));
    }
  } else if (k == "raw") {
    e.kind = EntryKind::Raw;
    const auto& layout = field(j, "layout", where);
    if (!layout.is_string()) throw ParseError(where + ": 'layout' must be a string");
    std::vector<Wire> wires;
    std::istringstream tokens(layout.get<std::string>());
    std::string tok;
    while (tokens >> tok) {
      bool conj = false;
      if (!tok.empty() && tok.back() == '*') {
        conj = true;
        tok.pop_back();
      }
      const SpacePtr* found = nullptr;
      for (const auto& sp : lex.spaces)
        if (sp->name == tok) found = &sp;
      if (!found)
        throw ValidationError(where + ": layout names unknown space '" + tok + "'");
      wires.push_back(Wire{*found, conj});
    }
    const auto& data = field(j, "data", where);
    if (!data.is_array()) throw ParseError(where + ": 'data' must be an array");
    std::vector<double> values;
    for (const auto& x : data) {
      if (!x.is_number()) throw ParseError(where + ": data values must be numbers");
      values.push_back(x.get<double>());
    }
    try {
      e.meaning.factors.push_back(Tensor::build(wires, values));
    } catch (const Error& err) {
      throw ValidationError(where + ": " + err.what());
    }
  } else if (k == "builtin") {
    e.kind = EntryKind::Builtin;
    const auto& b = field(j, "builtin", where);
    if (!b.is_string()) throw ParseError(where + ": 'builtin' must be a string");
    e.builtin = b.get<std::string>();
  } else {
    throw ParseError(where + ": 'kind' must be one of mixture, pure, raw, builtin");
  }
  return e;
}

inline ordered_json sense_to_json(const SenseSpec& s) {
  ordered_json j;
  if (s.weight != 1.0) j["weight"] = s.weight;
  auto& vec = j["vector"] = ordered_json::array();
  for (const auto& [label, w] : s.vector) vec.push_back(ordered_json::array({label, w}));
  return j;
}

}  // namespace detail

/// Parse a lexicon from JSON text. `origin` labels error messages
/// (typically the file path).
inline Lexicon parse_lexicon(const std::string& text, const std::string& origin = "lexicon") {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(origin + ": " + err.what());
  }
  if (!root.is_object())
    throw ParseError(origin + ": top level must be an object");

  Lexicon lex;
  const auto& spaces = detail::field(root, "spaces", origin);
  if (!spaces.is_array() || spaces.empty())
    throw ParseError(origin + ": 'spaces' must be a non-empty array");
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    const std::string where = origin + ": spaces[" + std::to_string(i) + "]";
    const auto& sj = spaces[i];
    if (!sj.is_object()) throw ParseError(where + ": must be an object");
    const auto& name = detail::field(sj, "name", where);
    const auto& basis = detail::field(sj, "basis", where);
    if (!name.is_string() || !basis.is_array())
      throw ParseError(where + ": needs a string 'name' and an array 'basis'");
    std::vector<std::string> labels;
    for (const auto& lj : basis) {
      if (!lj.is_string()) throw ParseError(where + ": basis labels must be strings");
      labels.push_back(lj.get<std::string>());
    }
    for (const auto& sp : lex.spaces)
      if (sp->name == name.get<std::string>())
        throw ValidationError(where + ": duplicate space name '" +
                              name.get<std::string>() + "'");
    SpacePtr space;
    try {
      space = make_space(name.get<std::string>(), labels);
    } catch (const Error& err) {
      throw ValidationError(where + ": " + err.what());
    }
    if (sj.contains("type")) {
      if (!sj["type"].is_string())
        throw ParseError(where + ": 'type' must be a string");
      const std::string base = sj["type"].get<std::string>();
      if (lex.assignment.spaces.count(base))
        throw ValidationError(where + ": basic type '" + base +
                              "' is bound to two spaces");
      lex.assignment.spaces[base] = space;
    }
    lex.spaces.push_back(std::move(space));
  }

  const auto& words = detail::field(root, "words", origin);
  if (!words.is_array())
    throw ParseError(origin + ": 'words' must be an array");
  std::vector<std::string> findings;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string where = origin + ": words[" + std::to_string(i) + "]";
    LexiconEntry e = detail::parse_word(lex, words[i], where);
    try {
      e.meaning = resolve_entry(lex, e, where + " ('" + e.name + "')");
      lex.entries.push_back(std::move(e));
    } catch (const ValidationError& err) {
      findings.push_back(err.what());
    }
  }
  for (std::string& f : validate(lex)) findings.push_back(origin + ": " + f);
  if (!findings.empty()) {
    std::string msg;
    for (std::size_t i = 0; i < findings.size(); ++i) {
      if (i) msg += "\n";
      msg += findings[i];
    }
    throw ValidationError(msg);
  }
  return lex;
}

/// Load a lexicon file (.ddlex.json).
inline Lexicon load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read lexicon file '" + path + "'");
  return parse_lexicon(buf.str(), path);
}

/// Serialize a lexicon back to its declarative JSON form.
inline std::string to_json_text(const Lexicon& lex) {
  using detail::ordered_json;
  ordered_json root;
  auto& spaces = root["spaces"] = ordered_json::array();
  for (const auto& sp : lex.spaces) {
    ordered_json sj;
    sj["name"] = sp->name;
    for (const auto& [base, bound] : lex.assignment.spaces)
      if (bound == sp) sj["type"] = base;
    sj["basis"] = sp->basis;
    spaces.push_back(std::move(sj));
  }
  auto& words = root["words"] = ordered_json::array();
  for (const auto& e : lex.entries) {
    ordered_json wj;
    wj["name"] = e.name;
    wj["type"] = to_string(e.type);
    switch (e.kind) {
      case EntryKind::Mixture: {
        wj["kind"] = "mixture";
        auto& groups = wj["groups"] = ordered_json::array();
        for (const auto& g : e.groups) {
          ordered_json gj;
          if (g.weight != 1.0) gj["weight"] = g.weight;
          auto& senses = gj["senses"] = ordered_json::array();
          for (const auto& s : g.senses) senses.push_back(detail::sense_to_json(s));
          groups.push_back(std::move(gj));
        }
        break;
      }
      case EntryKind::Pure: {
        wj["kind"] = "pure";
        auto& tuples = wj["tuples"] = ordered_json::array();
        for (const auto& t : e.tuples) {
          ordered_json tj;
          if (t.weight != 1.0) tj["weight"] = t.weight;
          tj["labels"] = t.labels;
          tuples.push_back(std::move(tj));
        }
        break;
      }
      case EntryKind::Raw: {
        wj["kind"] = "raw";
        const Tensor& t = e.meaning.factors.at(0);
        wj["layout"] = layout_string(t);
        wj["data"] = t.data;
        break;
      }
      case EntryKind::Builtin:
        wj["kind"] = "builtin";
        wj["builtin"] = e.builtin;
        break;
    }
    words.push_back(std::move(wj));
  }
  return root.dump(2) + "\n";
}

/// Write a lexicon file.
inline void save(const Lexicon& lex, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_json_text(lex);
  if (!out) throw IoError("cannot write lexicon file '" + path + "'");
}

}  // namespace ddop
