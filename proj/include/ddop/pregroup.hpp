#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace ddop {

// ------------------------------------------------------------------------
// Types
// ------------------------------------------------------------------------

/// One grammatical atom: a base identifier plus an adjoint order
/// (0 = plain, -1 = left adjoint, +1 = right adjoint, iterable).
struct SimpleType {
  std::string base;
  int adjoint_order = 0;

  friend bool operator==(const SimpleType&, const SimpleType&) = default;
};

/// A product of simple types; the empty list is the unit type, written "1".
struct PregroupType {
  std::vector<SimpleType> simples;

  friend bool operator==(const PregroupType&, const PregroupType&) = default;
};

inline std::string to_string(const SimpleType& t) {
  std::string s = t.base;
  if (t.adjoint_order != 0) {
    s += '^';
    s.append(static_cast<std::size_t>(t.adjoint_order < 0 ? -t.adjoint_order
                                                          : t.adjoint_order),
             t.adjoint_order < 0 ? 'l' : 'r');
  }
  return s;
}

inline std::string to_string(const PregroupType& t) {
  if (t.simples.empty()) return "1";
  std::string s;
  for (std::size_t k = 0; k < t.simples.size(); ++k) {
    if (k) s += ' ';
    s += to_string(t.simples[k]);
  }
  return s;
}

/// Parse "n^r s n^l" style text: space-separated simples, each a base
/// identifier with an optional adjoint suffix ^l / ^r (letters repeat to
/// iterate, e.g. ^ll). The lone token "1" denotes the unit type.
/// Throws SyntaxError carrying the byte offset of the problem.
inline PregroupType parse_type(const std::string& text) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto skip_ws = [&] {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };

  skip_ws();
  if (i == n) throw SyntaxError("empty type", 0);
  if (text[i] == '1') {
    std::size_t j = i + 1;
    while (j < n && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == n) return PregroupType{};
    throw SyntaxError("the unit type '1' cannot be multiplied", i + 1);
  }

  PregroupType out;
  while (true) {
    skip_ws();
    if (i == n) break;
    if (!std::isalpha(static_cast<unsigned char>(text[i])) && text[i] != '_')
      throw SyntaxError("expected a type name", i);
    const std::size_t start = i;
    while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
      ++i;
    SimpleType st{text.substr(start, i - start), 0};

    if (i < n && text[i] == '^') {
      ++i;
      if (i == n || (text[i] != 'l' && text[i] != 'r'))
        throw SyntaxError("expected 'l' or 'r' after '^'", i);
      const char c = text[i];
      int count = 0;
      while (i < n && text[i] == c) {
        ++count;
        ++i;
      }
      if (i < n && (text[i] == 'l' || text[i] == 'r'))
        throw SyntaxError("adjoint suffix mixes 'l' and 'r'", i);
      st.adjoint_order = (c == 'l') ? -count : count;
    }
    if (i < n && !std::isspace(static_cast<unsigned char>(text[i])))
      throw SyntaxError("unexpected character in type", i);
    out.simples.push_back(std::move(st));
  }
  return out;
}

// ------------------------------------------------------------------------
// Flattening and diagrams
// ------------------------------------------------------------------------

/// One simple type with the index of the word it came from.
struct FlatSimple {
  SimpleType type;
  std::size_t word = 0;
};

inline std::vector<FlatSimple> flatten(const std::vector<PregroupType>& seq) {
  std::vector<FlatSimple> out;
  for (std::size_t w = 0; w < seq.size(); ++w)
    for (const auto& st : seq[w].simples) out.push_back(FlatSimple{st, w});
  return out;
}

/// A grammatical reduction: a set of contraction links over the flattened
/// positions (0-based) plus the surviving positions in order.
struct ReductionDiagram {
  std::vector<PregroupType> word_types;
  std::vector<std::pair<std::size_t, std::size_t>> links;  // each i < j, sorted
  std::vector<std::size_t> survivors;                      // ascending

  [[nodiscard]] PregroupType survivor_type() const {
    const auto flat = flatten(word_types);
    PregroupType t;
    for (std::size_t p : survivors) t.simples.push_back(flat[p].type);
    return t;
  }
};

/// The single contraction rule: adjacent bases agree and the right-hand
/// adjoint order is one above the left-hand one.
inline bool contractible(const SimpleType& left, const SimpleType& right) {
  return left.base == right.base && right.adjoint_order == left.adjoint_order + 1;
}

/// Independent validator of every diagram invariant: links in range and
/// pairwise disjoint, non-crossing, each link contractible, nothing left
/// unmatched strictly underneath a link, and survivors exactly the unlinked
/// positions in ascending order.
inline bool check_diagram(const ReductionDiagram& d) {
  const auto flat = flatten(d.word_types);
  const std::size_t m = flat.size();
  std::vector<bool> linked(m, false);
  for (const auto& [i, j] : d.links) {
    if (i >= j || j >= m) return false;
    if (linked[i] || linked[j]) return false;
    linked[i] = linked[j] = true;
    if (!contractible(flat[i].type, flat[j].type)) return false;
  }
  for (const auto& [i, j] : d.links)
    for (const auto& [k, l] : d.links) {
      if (i < k && k < j && j < l) return false;  // crossing
    }
  // A link may not span an unlinked position: contractions happen between
  // neighbours, so everything under an arc must itself be matched away.
  for (const auto& [i, j] : d.links)
    for (std::size_t p = i + 1; p < j; ++p)
      if (!linked[p]) return false;
  std::vector<std::size_t> unlinked;
  for (std::size_t p = 0; p < m; ++p)
    if (!linked[p]) unlinked.push_back(p);
  return unlinked == d.survivors;
}

// ------------------------------------------------------------------------
// Reduction search
// ------------------------------------------------------------------------

/// Find a reduction of seq onto target: a non-crossing matching of
/// contractible pairs whose survivors spell the target. Deterministic:
/// scanning left to right, linking with the nearest partner is preferred
/// over surviving. Throws NotReducible when no witness exists.
inline ReductionDiagram reduce(const std::vector<PregroupType>& seq,
                               const PregroupType& target) {
  if (seq.empty()) throw NotReducible("reduce: empty word sequence");
  const auto flat = flatten(seq);
  const std::size_t m = flat.size();
  const auto& tgt = target.simples;
  const std::size_t tn = tgt.size();

  // closed[i][j]: the half-open span [i, j) matches away completely.
  std::vector<std::vector<char>> closed(m + 1, std::vector<char>(m + 1, 0));
  for (std::size_t i = 0; i <= m; ++i) closed[i][i] = 1;
  for (std::size_t len = 2; len <= m; len += 2)
    for (std::size_t i = 0; i + len <= m; ++i) {
      const std::size_t j = i + len;
      for (std::size_t k = i + 1; k < j; k += 2)
        if (contractible(flat[i].type, flat[k].type) && closed[i + 1][k] &&
            closed[k + 1][j]) {
          closed[i][j] = 1;
          break;
        }
    }

  // tail[i][t]: the span [i, m) reduces so its survivors spell tgt[t..).
  std::vector<std::vector<char>> tail(m + 1, std::vector<char>(tn + 1, 0));
  tail[m][tn] = 1;
  for (std::size_t i = m; i-- > 0;)
    for (std::size_t t = 0; t <= tn; ++t) {
      char ok = 0;
      if (t < tn && flat[i].type == tgt[t] && tail[i + 1][t + 1]) ok = 1;
      for (std::size_t k = i + 1; !ok && k < m; k += 2)
        if (contractible(flat[i].type, flat[k].type) && closed[i + 1][k] &&
            tail[k + 1][t])
          ok = 1;
      tail[i][t] = ok;
    }

  if (!tail[0][0]) {
    std::string msg = "cannot reduce '";
    for (std::size_t w = 0; w < seq.size(); ++w) {
      if (w) msg += " , ";
      msg += to_string(seq[w]);
    }
    msg += "' to '" + to_string(target) + "'";
    throw NotReducible(msg);
  }

  ReductionDiagram d;
  d.word_types = seq;

  // Rebuild the witness the tables promised, preferring links (nearest
  // partner first) over survival at every position.
  auto close_span = [&](auto&& self, std::size_t i, std::size_t j) -> void {
    if (i == j) return;
    for (std::size_t k = i + 1; k < j; k += 2)
      if (contractible(flat[i].type, flat[k].type) && closed[i + 1][k] &&
          closed[k + 1][j]) {
        d.links.emplace_back(i, k);
        self(self, i + 1, k);
        self(self, k + 1, j);
        return;
      }
  };
  std::size_t i = 0, t = 0;
  while (i < m) {
    bool advanced = false;
    for (std::size_t k = i + 1; k < m; k += 2)
      if (contractible(flat[i].type, flat[k].type) && closed[i + 1][k] &&
          tail[k + 1][t]) {
        d.links.emplace_back(i, k);
        close_span(close_span, i + 1, k);
        i = k + 1;
        advanced = true;
        break;
      }
    if (advanced) continue;
    d.survivors.push_back(i);  // tail[] guarantees flat[i] == tgt[t]
    ++i;
    ++t;
  }
  std::sort(d.links.begin(), d.links.end());
  return d;
}

}  // namespace ddop
