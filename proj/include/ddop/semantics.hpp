#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "density.hpp"
#include "errors.hpp"
#include "pregroup.hpp"
#include "tensor.hpp"

namespace ddop {

// ------------------------------------------------------------------------
// Grammar-to-tensor assignment
// ------------------------------------------------------------------------

/// Maps basic grammatical types to their meaning spaces (e.g. n -> N, s -> S).
struct TypeAssignment {
  std::map<std::string, SpacePtr> spaces;

  [[nodiscard]] const SpacePtr& at(const std::string& base) const {
    auto it = spaces.find(base);
    if (it == spaces.end())
      throw AssignmentGap("no space assigned to basic type '" + base + "'");
    return it->second;
  }
};

/// The functor on wires: a simple type lands on its base's space, with the
/// conjugation flag set by the parity of the adjoint order.
inline Wire wire_for(const SimpleType& st, const TypeAssignment& ta) {
  return Wire{ta.at(st.base), st.adjoint_order % 2 != 0};
}

// ------------------------------------------------------------------------
// Lifted meanings, kept factored
// ------------------------------------------------------------------------

/// Conjugate copy without wire reversal: flips every flag, keeps the data.
/// For the real tensors used here this is the slot-aligned conjugate.
inline Tensor conj_slot(const Tensor& t) {
  Tensor r = t;
  for (auto& w : r.wires) w.conj = !w.conj;
  return r;
}

/// A word meaning in the doubled-twice world. Each level-0 wire of the word
/// owns four slot wires [w, w-conj, w, w-conj]; they may live on one dense
/// tensor (doubled states) or across four pure copies, so the meaning is a
/// small tensor network rather than one huge dense tensor.
struct LiftedMeaning {
  std::vector<Tensor> factors;
  // slots[w][s] = (factor, wire) holding slot s of level-0 wire w.
  std::vector<std::array<std::pair<std::size_t, std::size_t>, 4>> slots;

  /// Lift a pure meaning: four factor copies with alternating conjugation.
  static LiftedMeaning from_pure(const Tensor& v) {
    LiftedMeaning m;
    m.factors = {v, conj_slot(v), v, conj_slot(v)};
    m.slots.resize(v.rank());
    for (std::size_t w = 0; w < v.rank(); ++w)
      for (std::size_t s = 0; s < 4; ++s) m.slots[w][s] = {s, w};
    return m;
  }

  /// Wrap an already-doubled single-wire state.
  static LiftedMeaning from_dual(const DualDensity& d) {
    check_dual_layout(d.tensor);
    LiftedMeaning m;
    m.factors = {d.tensor};
    m.slots.resize(1);
    for (std::size_t s = 0; s < 4; ++s) m.slots[0][s] = {0, s};
    return m;
  }

  /// Wrap a dense tensor already in slot-wise lifted layout
  /// [w0, w0-conj, w0, w0-conj, w1, ...].
  static LiftedMeaning from_lifted_tensor(Tensor t) {
    if (t.rank() % 4 != 0)
      throw LayoutError("lifted tensor must have a multiple of four wires");
    const std::size_t n = t.rank() / 4;
    for (std::size_t w = 0; w < n; ++w)
      for (std::size_t s = 0; s < 4; ++s) {
        const Wire& got = t.wires[4 * w + s];
        if (!same_space(*got.space, *t.wires[4 * w].space) ||
            got.conj != ((s % 2 == 1) != t.wires[4 * w].conj))
          throw LayoutError("lifted tensor slots must alternate flags per wire group");
      }
    LiftedMeaning m;
    m.slots.resize(n);
    for (std::size_t w = 0; w < n; ++w)
      for (std::size_t s = 0; s < 4; ++s) m.slots[w][s] = {0, 4 * w + s};
    m.factors = {std::move(t)};
    return m;
  }

  [[nodiscard]] std::size_t level0_rank() const { return slots.size(); }

  /// Materialize the meaning as one dense tensor in slot-wise layout.
  /// Exponential in the wire count — intended for single-wire words and
  /// small test fixtures, not for pronouns.
  [[nodiscard]] Tensor dense() const {
    Tensor prod = Tensor::scalar(1.0);
    std::vector<std::size_t> offset;
    for (const auto& f : factors) {
      offset.push_back(prod.rank());
      prod = tensor_product(prod, f);
    }
    std::vector<std::size_t> perm;
    for (std::size_t w = 0; w < slots.size(); ++w)
      for (std::size_t s = 0; s < 4; ++s)
        perm.push_back(offset[slots[w][s].first] + slots[w][s].second);
    return permute(prod, perm);
  }
};

// ------------------------------------------------------------------------
// Contraction plans
// ------------------------------------------------------------------------

/// One grammatical link, lifted: the four slot wires of one word wire cap
/// the four slot wires of another.
struct LiftedCap {
  std::size_t word_a = 0, wire_a = 0;
  std::size_t word_b = 0, wire_b = 0;
};

/// What execute needs to run a sentence: per-word expected level-0 wires,
/// the lifted caps (one per reduction link), and the surviving word wires
/// in output order.
struct ContractionPlan {
  std::vector<std::vector<Wire>> expected;
  std::vector<LiftedCap> caps;
  std::vector<std::pair<std::size_t, std::size_t>> outputs;
};

/// Turn a reduction diagram into a contraction plan under a type assignment.
inline ContractionPlan plan(const ReductionDiagram& d, const TypeAssignment& ta) {
  ContractionPlan p;
  p.expected.resize(d.word_types.size());
  std::vector<std::pair<std::size_t, std::size_t>> pos;  // flat -> (word, wire)
  for (std::size_t w = 0; w < d.word_types.size(); ++w)
    for (std::size_t k = 0; k < d.word_types[w].simples.size(); ++k) {
      p.expected[w].push_back(wire_for(d.word_types[w].simples[k], ta));
      pos.emplace_back(w, k);
    }
  for (const auto& [i, j] : d.links)
    p.caps.push_back(LiftedCap{pos[i].first, pos[i].second, pos[j].first, pos[j].second});
  for (std::size_t s : d.survivors) p.outputs.push_back(pos[s]);
  return p;
}

namespace detail {

inline Tensor execute_impl(const ContractionPlan& p,
                           const std::vector<LiftedMeaning>& meanings,
                           bool bruteforce) {
  if (meanings.size() != p.expected.size())
    throw LayoutError("execute: meaning count does not match the plan");

  std::vector<Tensor> factors;
  std::vector<std::size_t> base(meanings.size(), 0);
  for (std::size_t w = 0; w < meanings.size(); ++w) {
    const LiftedMeaning& m = meanings[w];
    if (m.level0_rank() != p.expected[w].size())
      throw LayoutError("execute: word " + std::to_string(w) +
                        " has the wrong number of wires");
    // Every factor wire must be claimed by exactly one slot.
    std::size_t total = 0;
    for (const auto& f : m.factors) total += f.rank();
    if (total != 4 * m.level0_rank())
      throw LayoutError("execute: word " + std::to_string(w) +
                        " has unclaimed factor wires");
    std::vector<std::vector<bool>> seen(m.factors.size());
    for (std::size_t f = 0; f < m.factors.size(); ++f)
      seen[f].assign(m.factors[f].rank(), false);
    for (std::size_t k = 0; k < m.level0_rank(); ++k)
      for (std::size_t s = 0; s < 4; ++s) {
        const auto [f, wi] = m.slots[k][s];
        if (f >= m.factors.size() || wi >= m.factors[f].rank() || seen[f][wi])
          throw LayoutError("execute: word " + std::to_string(w) +
                            " has an invalid slot table");
        seen[f][wi] = true;
        const Wire& got = m.factors[f].wires[wi];
        const Wire& want = p.expected[w][k];
        const bool flag = (s % 2 == 0) ? want.conj : !want.conj;
        if (!same_space(*got.space, *want.space) || got.conj != flag)
          throw LayoutError("execute: word " + std::to_string(w) + " wire " +
                            std::to_string(k) + " slot " + std::to_string(s) +
                            " does not match its grammatical type");
      }
    base[w] = factors.size();
    factors.insert(factors.end(), m.factors.begin(), m.factors.end());
  }

  std::vector<NetworkPair> pairs;
  for (const auto& c : p.caps)
    for (std::size_t s = 0; s < 4; ++s) {
      const auto [fa, wa] = meanings[c.word_a].slots[c.wire_a][s];
      const auto [fb, wb] = meanings[c.word_b].slots[c.wire_b][s];
      pairs.push_back(NetworkPair{base[c.word_a] + fa, wa, base[c.word_b] + fb, wb});
    }

  Tensor r = bruteforce ? contract_network_bruteforce(factors, pairs)
                        : contract_network(factors, pairs);

  // The network orders free wires by (factor, wire); reorder them into
  // survivor order, four slots per surviving word wire.
  std::vector<std::vector<bool>> used(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) used[f].assign(factors[f].rank(), false);
  for (const auto& q : pairs) {
    used[q.factor_a][q.wire_a] = true;
    used[q.factor_b][q.wire_b] = true;
  }
  std::vector<std::pair<std::size_t, std::size_t>> free_order;
  for (std::size_t f = 0; f < factors.size(); ++f)
    for (std::size_t wi = 0; wi < factors[f].rank(); ++wi)
      if (!used[f][wi]) free_order.emplace_back(f, wi);

  std::vector<std::size_t> perm;
  for (const auto& [w, k] : p.outputs)
    for (std::size_t s = 0; s < 4; ++s) {
      const auto [f, wi] = meanings[w].slots[k][s];
      const std::pair<std::size_t, std::size_t> id{base[w] + f, wi};
      const auto it = std::find(free_order.begin(), free_order.end(), id);
      if (it == free_order.end())
        throw LayoutError("execute: plan output wire was contracted away");
      perm.push_back(static_cast<std::size_t>(it - free_order.begin()));
    }
  if (perm.size() != r.rank())
    throw LayoutError("execute: plan outputs do not cover the free wires");
  return permute(r, perm);
}

}  // namespace detail

/// Contract the whole lifted sentence network (greedy pairwise order).
inline Tensor execute(const ContractionPlan& p, const std::vector<LiftedMeaning>& meanings) {
  return detail::execute_impl(p, meanings, false);
}

/// Same network, evaluated by brute-force index summation (oracle path).
inline Tensor execute_bruteforce(const ContractionPlan& p,
                                 const std::vector<LiftedMeaning>& meanings) {
  return detail::execute_impl(p, meanings, true);
}

// ------------------------------------------------------------------------
// Relative pronouns
// ------------------------------------------------------------------------

/// Subject relative pronoun before lifting, for grammatical type
/// n^r n s^l n: a three-legged noun spider (head, output, verb subject)
/// with an all-ones sentence leg that absorbs the verb's truth value.
inline Tensor that_subj_level0(const TypeAssignment& ta) {
  const SpacePtr n = ta.at("n"), s = ta.at("s");
  Tensor t = Tensor::zeros(
      {Wire{n, true}, Wire{n, false}, Wire{s, true}, Wire{n, false}});
  const std::size_t dn = n->dim, ds = s->dim;
  for (std::size_t i = 0; i < dn; ++i)
    for (std::size_t sig = 0; sig < ds; ++sig)
      t.data[((i * dn + i) * ds + sig) * dn + i] = 1.0;
  return t;
}

/// Object relative pronoun before lifting, for grammatical type
/// n^r n n^ll s^l: the same spider, but the copied noun feeds the verb's
/// object slot and the sentence leg comes last.
inline Tensor that_obj_level0(const TypeAssignment& ta) {
  const SpacePtr n = ta.at("n"), s = ta.at("s");
  Tensor t = Tensor::zeros(
      {Wire{n, true}, Wire{n, false}, Wire{n, false}, Wire{s, true}});
  const std::size_t dn = n->dim, ds = s->dim;
  for (std::size_t i = 0; i < dn; ++i)
    for (std::size_t sig = 0; sig < ds; ++sig)
      t.data[((i * dn + i) * dn + i) * ds + sig] = 1.0;
  return t;
}

inline LiftedMeaning that_subj(const TypeAssignment& ta) {
  return LiftedMeaning::from_pure(that_subj_level0(ta));
}

inline LiftedMeaning that_obj(const TypeAssignment& ta) {
  return LiftedMeaning::from_pure(that_obj_level0(ta));
}

// ------------------------------------------------------------------------
// Whole-phrase composition
// ------------------------------------------------------------------------

/// One candidate reading of a word: its grammatical type and lifted meaning.
struct WordMeaning {
  std::string name;
  PregroupType type;
  LiftedMeaning meaning;
};

struct ComposeResult {
  Tensor tensor;
  ReductionDiagram diagram;
  std::vector<std::size_t> chosen;  // candidate index per word
  // Filled when the result is a single doubled wire:
  std::optional<double> discard1_value;
  std::optional<double> discard2_value;
  std::optional<double> entropy1;
  std::optional<double> entropy2;
};

/// Reduce, plan and execute a phrase. Each word may carry several candidate
/// readings; candidate combinations are tried in lexicographic order (first
/// listed reading preferred) and the first grammatical one wins.
inline ComposeResult compose_phrase(const std::vector<std::vector<WordMeaning>>& words,
                                    const PregroupType& target,
                                    const TypeAssignment& ta) {
  if (words.empty()) throw NotReducible("compose: empty phrase");
  for (const auto& cands : words)
    if (cands.empty()) throw ValidationError("compose: word without candidate readings");

  std::vector<std::size_t> choice(words.size(), 0);
  while (true) {
    std::vector<PregroupType> types;
    types.reserve(words.size());
    for (std::size_t w = 0; w < words.size(); ++w)
      types.push_back(words[w][choice[w]].type);
    bool grammatical = true;
    ReductionDiagram d;
    try {
      d = reduce(types, target);
    } catch (const NotReducible&) {
      grammatical = false;
    }
    if (grammatical) {
      std::vector<LiftedMeaning> meanings;
      for (std::size_t w = 0; w < words.size(); ++w)
        meanings.push_back(words[w][choice[w]].meaning);
      ComposeResult out;
      out.tensor = execute(plan(d, ta), meanings);
      out.diagram = std::move(d);
      out.chosen = choice;
      if (out.tensor.rank() == 4) {
        try {
          DualDensity dual = as_dual(out.tensor);
          out.discard1_value = discard1(dual);
          out.discard2_value = discard2(dual);
          out.entropy1 = entropy(phi1(dual));
          out.entropy2 = entropy(phi2(dual));
        } catch (const LayoutError&) {
        } catch (const ZeroTrace&) {
        } catch (const NonSymmetric&) {
        }
      }
      return out;
    }
    // Next candidate combination, rightmost word fastest.
    std::size_t w = words.size();
    while (w-- > 0) {
      if (++choice[w] < words[w].size()) break;
      choice[w] = 0;
      if (w == 0) {
        std::string msg = "no candidate reading combination of [";
        for (std::size_t k = 0; k < words.size(); ++k) {
          if (k) msg += ' ';
          msg += words[k].front().name;
        }
        msg += "] reduces to '" + to_string(target) + "'";
        throw NotReducible(msg);
      }
    }
  }
}

}  // namespace ddop
