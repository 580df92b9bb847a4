#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "density.hpp"
#include "errors.hpp"
#include "lexicon.hpp"
#include "pregroup.hpp"
#include "semantics.hpp"
#include "tensor.hpp"

namespace ddop::cli {

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline std::string error_kind(const Error& e) {
  if (dynamic_cast<const NotReducible*>(&e)) return "NotReducible";
  if (dynamic_cast<const SyntaxError*>(&e)) return "SyntaxError";
  if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const IoError*>(&e)) return "IoError";
  if (dynamic_cast<const AssignmentGap*>(&e)) return "AssignmentGap";
  if (dynamic_cast<const LayoutError*>(&e)) return "LayoutError";
  if (dynamic_cast<const NotPSD*>(&e)) return "NotPSD";
  if (dynamic_cast<const ZeroTrace*>(&e)) return "ZeroTrace";
  if (dynamic_cast<const NonSymmetric*>(&e)) return "NonSymmetric";
  if (dynamic_cast<const SpaceMismatch*>(&e)) return "SpaceMismatch";
  if (dynamic_cast<const FlagMismatch*>(&e)) return "FlagMismatch";
  if (dynamic_cast<const ShapeMismatch*>(&e)) return "ShapeMismatch";
  return "Error";
}

/// "beirut" means the bundled model; anything else is a file path.
inline Lexicon resolve_lexicon(const std::string& spec) {
  if (spec == "beirut") return builtin_beirut();
  return load(spec);
}

inline std::vector<PregroupType> parse_type_list(const std::string& text) {
  std::vector<PregroupType> types;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    types.push_back(parse_type(text.substr(start, comma - start)));
    start = comma + 1;
  }
  return types;
}

inline std::vector<std::string> split_words(const std::string& phrase) {
  std::istringstream in(phrase);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

inline ordered_json links_json(const ReductionDiagram& d) {
  auto out = ordered_json::array();
  for (const auto& [i, j] : d.links)
    out.push_back(ordered_json::array({i + 1, j + 1}));  // 1-based positions
  return out;
}

inline ordered_json tensor_json(const Tensor& t) {
  ordered_json j;
  j["layout"] = layout_string(t);
  j["data"] = t.data;
  return j;
}

inline ordered_json opt_json(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

/// First reading of a word that is a single doubled wire (a noun-like
/// entry), for the word-level entropy and entailment commands.
inline const LexiconEntry& noun_entry(const Lexicon& lex, const std::string& word) {
  const auto cands = lex.candidates(word);
  if (cands.empty()) throw ValidationError("unknown word '" + word + "'");
  for (const auto* e : cands)
    if (e->meaning.level0_rank() == 1) return *e;
  throw ValidationError("word '" + word + "' has no single-wire reading");
}

inline Operator noun_operator(const Lexicon& lex, const std::string& word) {
  return word_operator(as_dual(noun_entry(lex, word).meaning.dense()));
}

inline std::vector<std::vector<WordMeaning>> phrase_candidates(
    const Lexicon& lex, const std::vector<std::string>& words) {
  std::vector<std::vector<WordMeaning>> out;
  for (const auto& w : words) {
    std::vector<WordMeaning> cands;
    for (const auto* e : lex.candidates(w))
      cands.push_back(WordMeaning{e->name, e->type, e->meaning});
    if (cands.empty()) throw ValidationError("unknown word '" + w + "'");
    out.push_back(std::move(cands));
  }
  return out;
}

/// Compose one phrase and report everything the demo needs: links, the
/// result, entropies, and how strongly the result matches each listed
/// reference word (proportionality factor and graded entailment).
inline ordered_json phrase_report(const Lexicon& lex, const std::vector<std::string>& words,
                                  const PregroupType& target,
                                  const std::vector<std::string>& references,
                                  double tol) {
  ComposeResult r = compose_phrase(phrase_candidates(lex, words), target, lex.assignment);
  ordered_json j;
  std::string phrase;
  for (const auto& w : words) {
    if (!phrase.empty()) phrase += ' ';
    phrase += w;
  }
  j["phrase"] = phrase;
  auto& chosen = j["chosen_types"] = ordered_json::array();
  for (std::size_t w = 0; w < words.size(); ++w) {
    const auto cands = lex.candidates(words[w]);
    chosen.push_back(to_string(cands[r.chosen[w]]->type));
  }
  j["links"] = links_json(r.diagram);
  j["entropy1"] = opt_json(r.entropy1);
  j["entropy2"] = opt_json(r.entropy2);

  auto& prop = j["proportional_to"] = ordered_json::object();
  auto& entail = j["entails"] = ordered_json::object();
  std::string verdict;
  double best_k = -1.0;
  for (const auto& ref : references) {
    const LexiconEntry& entry = noun_entry(lex, ref);
    prop[ref] = opt_json(proportional_to(r.tensor, entry.meaning.dense(), tol));
    const double k =
        graded_entailment(word_operator(as_dual(r.tensor)), noun_operator(lex, ref));
    entail[ref] = k;
    if (k > best_k) {
      best_k = k;
      verdict = ref;
    }
  }
  if (!references.empty()) j["verdict"] = verdict;
  return j;
}

}  // namespace detail

/// Run one command line (without the program name). Machine-readable JSON
/// goes to `out`, a short human summary to `err`. Returns the exit code:
/// 0 success, 1 domain error, 2 usage error.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using detail::ordered_json;

  CLI::App app{"dual density operators: composition, entailment, entropy"};
  app.require_subcommand(1);

  std::string types_text, target_text = "s", lexicon_spec, phrase_text;
  std::string word, word_a, word_b, base_text = "2", demo_name;
  double tol = 1e-9;
  bool compact = false, pretty = false;

  auto add_output_flags = [&](CLI::App* sub) {
    sub->add_flag("--json", compact, "compact single-line JSON on stdout");
    sub->add_flag("--pretty", pretty, "indented JSON on stdout (default)");
    sub->add_option("--tol", tol, "numeric tolerance")->capture_default_str();
  };

  CLI::App* c_reduce = app.add_subcommand("reduce", "reduce pregroup types to a target");
  c_reduce->add_option("--types", types_text, "comma-separated word types")->required();
  c_reduce->add_option("--target", target_text, "target type")->required();
  add_output_flags(c_reduce);

  CLI::App* c_compose = app.add_subcommand("compose", "compose a phrase over a lexicon");
  c_compose->add_option("--lexicon", lexicon_spec, "lexicon file or 'beirut'")->required();
  c_compose->add_option("--phrase", phrase_text, "space-separated words")->required();
  c_compose->add_option("--target", target_text, "target type")->required();
  add_output_flags(c_compose);

  CLI::App* c_entail = app.add_subcommand("entail", "graded entailment between two words");
  c_entail->add_option("--lexicon", lexicon_spec, "lexicon file or 'beirut'")->required();
  c_entail->add_option("--word-a", word_a, "candidate hyponym")->required();
  c_entail->add_option("--word-b", word_b, "candidate hypernym")->required();
  add_output_flags(c_entail);

  CLI::App* c_entropy = app.add_subcommand("entropy", "the two entropies of a word");
  c_entropy->add_option("--lexicon", lexicon_spec, "lexicon file or 'beirut'")->required();
  c_entropy->add_option("--word", word, "word to analyze")->required();
  c_entropy->add_option("--base", base_text, "logarithm base")
      ->check(CLI::IsMember({"2", "e"}))
      ->capture_default_str();
  add_output_flags(c_entropy);

  CLI::App* c_demo = app.add_subcommand("demo", "run a bundled showcase");
  c_demo->add_option("name", demo_name, "demo name")
      ->required()
      ->check(CLI::IsMember({"beirut"}));
  add_output_flags(c_demo);

  CLI::App* c_validate = app.add_subcommand("validate", "check a lexicon file");
  c_validate->add_option("--lexicon", lexicon_spec, "lexicon file or 'beirut'")->required();
  add_output_flags(c_validate);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << app.help();
    return 2;
  }

  const auto emit = [&](const ordered_json& j) {
    out << (compact ? j.dump() : j.dump(2)) << "\n";
  };

  try {
    ordered_json j;

    if (c_reduce->parsed()) {
      const std::vector<PregroupType> types = detail::parse_type_list(types_text);
      const PregroupType target = parse_type(target_text);
      ReductionDiagram d = reduce(types, target);
      j["result"] = to_string(d.survivor_type());
      j["links"] = detail::links_json(d);
      ordered_json diag;
      auto& wt = diag["word_types"] = ordered_json::array();
      for (const auto& t : types) wt.push_back(to_string(t));
      auto& sv = diag["survivors"] = ordered_json::array();
      for (std::size_t s : d.survivors) sv.push_back(s + 1);
      j["diagnostics"] = std::move(diag);
      emit(j);
      err << "reduced to '" << to_string(d.survivor_type()) << "' with "
          << d.links.size() << " links\n";
      return 0;
    }

    if (c_compose->parsed()) {
      Lexicon lex = detail::resolve_lexicon(lexicon_spec);
      const std::vector<std::string> words = detail::split_words(phrase_text);
      const PregroupType target = parse_type(target_text);
      ComposeResult r =
          compose_phrase(detail::phrase_candidates(lex, words), target, lex.assignment);
      j["result"] = detail::tensor_json(r.tensor);
      j["links"] = detail::links_json(r.diagram);
      ordered_json diag;
      auto& chosen = diag["chosen_types"] = ordered_json::array();
      for (std::size_t w = 0; w < words.size(); ++w)
        chosen.push_back(to_string(lex.candidates(words[w])[r.chosen[w]]->type));
      diag["entropy1"] = detail::opt_json(r.entropy1);
      diag["entropy2"] = detail::opt_json(r.entropy2);
      diag["discard1"] = detail::opt_json(r.discard1_value);
      diag["discard2"] = detail::opt_json(r.discard2_value);
      j["diagnostics"] = std::move(diag);
      emit(j);
      err << "composed '" << phrase_text << "' to '" << to_string(target) << "'";
      if (r.entropy1) err << " (entropy1 " << *r.entropy1 << ")";
      err << "\n";
      return 0;
    }

    if (c_entail->parsed()) {
      Lexicon lex = detail::resolve_lexicon(lexicon_spec);
      const double k = graded_entailment(detail::noun_operator(lex, word_a),
                                         detail::noun_operator(lex, word_b));
      j["result"] = k;
      j["k"] = k;
      j["diagnostics"] = {{"word_a", word_a}, {"word_b", word_b}};
      emit(j);
      err << "graded entailment k = " << k << "\n";
      return 0;
    }

    if (c_entropy->parsed()) {
      Lexicon lex = detail::resolve_lexicon(lexicon_spec);
      const double base = base_text == "e" ? std::exp(1.0) : 2.0;
      DualDensity d = as_dual(detail::noun_entry(lex, word).meaning.dense());
      const double s1 = entropy(phi1(d), base);
      const double s2 = entropy(phi2(d), base);
      j["result"] = {{"entropy1", s1}, {"entropy2", s2}};
      j["entropies"] = ordered_json::array({s1, s2});
      j["diagnostics"] = {{"word", word}, {"base", base_text}};
      emit(j);
      err << "entropy1 = " << s1 << ", entropy2 = " << s2 << "\n";
      return 0;
    }

    if (c_demo->parsed()) {
      Lexicon lex = builtin_beirut();
      ordered_json result;
      {
        DualDensity d = as_dual(detail::noun_entry(lex, "Beirut").meaning.dense());
        result["ambiguous_word"] = {{"name", "Beirut"},
                                    {"entropy1", entropy(phi1(d))},
                                    {"entropy2", entropy(phi2(d))}};
      }
      const std::vector<std::string> refs = {"Beirut-band", "Beirut-city"};
      result["subject_phrase"] = detail::phrase_report(
          lex, {"Beirut", "that", "play-at", "Beirut"}, parse_type("n"), refs, tol);
      result["object_phrase"] = detail::phrase_report(
          lex, {"Beirut", "that", "Beirut", "play-at"}, parse_type("n"), refs, tol);
      j["result"] = std::move(result);
      j["diagnostics"] = {{"lexicon", "beirut"},
                          {"references", ordered_json(refs)}};
      emit(j);
      err << "subject phrase verdict: "
          << j["result"]["subject_phrase"]["verdict"].get<std::string>()
          << "; object phrase verdict: "
          << j["result"]["object_phrase"]["verdict"].get<std::string>() << "\n";
      return 0;
    }

    if (c_validate->parsed()) {
      Lexicon lex = detail::resolve_lexicon(lexicon_spec);
      const std::vector<std::string> findings = validate(lex);
      j["result"] = findings.empty() ? "ok" : "findings";
      j["findings"] = ordered_json(findings);
      j["diagnostics"] = {{"entries", lex.entries.size()},
                          {"spaces", lex.spaces.size()}};
      emit(j);
      err << "validated: " << lex.entries.size() << " entries, "
          << findings.size() << " findings\n";
      return findings.empty() ? 0 : 1;
    }
  } catch (const Error& e) {
    ordered_json j;
    j["error"] = {{"type", detail::error_kind(e)}, {"message", e.what()}};
    out << (compact ? j.dump() : j.dump(2)) << "\n";
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "usage error: no subcommand\n";
  return 2;
}

}  // namespace ddop::cli
