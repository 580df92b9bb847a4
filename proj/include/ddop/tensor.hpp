#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace ddop {

// ------------------------------------------------------------------------
// Spaces and wires
// ------------------------------------------------------------------------

/// A finite-dimensional real vector space with named basis vectors.
struct Space {
  std::string name;
  std::size_t dim = 0;
  std::vector<std::string> basis;  // dim unique labels, index = coordinate
};

using SpacePtr = std::shared_ptr<const Space>;

/// Create a space from its name and basis labels (dim = labels.size()).
/// Dimensions are capped at 64; labels must be pairwise distinct.
inline SpacePtr make_space(std::string name, std::vector<std::string> basis) {
  if (basis.empty() || basis.size() > 64)
    throw ShapeMismatch("space '" + name + "': dimension must lie in [1, 64]");
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i + 1; j < basis.size(); ++j)
      if (basis[i] == basis[j])
        throw ShapeMismatch("space '" + name + "': duplicate basis label '" + basis[i] + "'");
  auto s = std::make_shared<Space>();
  s->name = std::move(name);
  s->dim = basis.size();
  s->basis = std::move(basis);
  return s;
}

/// Structural equality: spaces match by name, dimension and basis labels.
inline bool same_space(const Space& a, const Space& b) {
  return a.name == b.name && a.dim == b.dim && a.basis == b.basis;
}

/// Index of a basis label within a space, or nullopt.
inline std::optional<std::size_t> basis_index(const Space& s, const std::string& label) {
  for (std::size_t i = 0; i < s.basis.size(); ++i)
    if (s.basis[i] == label) return i;
  return std::nullopt;
}

/// One tensor leg: a space together with a conjugation flag.
/// Contraction is only permitted between legs of the same space
/// carrying opposite flags.
struct Wire {
  SpacePtr space;
  bool conj = false;
};

inline bool same_wire(const Wire& a, const Wire& b) {
  return a.conj == b.conj && same_space(*a.space, *b.space);
}

inline Wire flipped(const Wire& w) { return Wire{w.space, !w.conj}; }

// ------------------------------------------------------------------------
// Dense tensors
// ------------------------------------------------------------------------

/// A dense real tensor over an ordered list of wires.
/// Data is row-major: the last wire's index varies fastest.
/// A tensor with no wires is a scalar (data holds one entry).
struct Tensor {
  std::vector<Wire> wires;
  std::vector<double> data{0.0};

  [[nodiscard]] std::size_t rank() const { return wires.size(); }
  [[nodiscard]] std::size_t size() const { return data.size(); }
  [[nodiscard]] std::size_t dim(std::size_t k) const { return wires[k].space->dim; }

  /// Validated construction: data length must equal the wire-dim product
  /// and every entry must be finite.
  static Tensor build(std::vector<Wire> wires, std::vector<double> data) {
    std::size_t want = 1;
    for (const auto& w : wires) want *= w.space->dim;
    if (data.size() != want)
      throw ShapeMismatch("tensor data length " + std::to_string(data.size()) +
                          " does not match wire dimensions (expected " +
                          std::to_string(want) + ")");
    for (double x : data)
      if (!std::isfinite(x)) throw ShapeMismatch("tensor entries must be finite");
    Tensor t;
    t.wires = std::move(wires);
    t.data = std::move(data);
    return t;
  }

  static Tensor scalar(double v) { return build({}, {v}); }

  static Tensor zeros(std::vector<Wire> wires) {
    std::size_t n = 1;
    for (const auto& w : wires) n *= w.space->dim;
    Tensor t;
    t.wires = std::move(wires);
    t.data.assign(n, 0.0);
    return t;
  }
};

/// Row-major strides of a tensor's wires.
inline std::vector<std::size_t> strides_of(const Tensor& t) {
  std::vector<std::size_t> s(t.rank(), 1);
  for (std::size_t k = t.rank(); k-- > 1;) s[k - 1] = s[k] * t.dim(k);
  return s;
}

/// Value of a rank-0 tensor.
inline double scalar_value(const Tensor& t) {
  if (!t.wires.empty()) throw ShapeMismatch("tensor is not a scalar");
  return t.data[0];
}

inline double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double x : t.data) m = std::max(m, std::abs(x));
  return m;
}

// ------------------------------------------------------------------------
// Core operations
// ------------------------------------------------------------------------

/// Tensor product: wires concatenate, data is the outer product.
/// Scalars simply multiply through.
inline Tensor tensor_product(const Tensor& a, const Tensor& b) {
  Tensor r;
  r.wires = a.wires;
  r.wires.insert(r.wires.end(), b.wires.begin(), b.wires.end());
  r.data.assign(a.size() * b.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double av = a.data[i];
    if (av == 0.0) continue;
    double* out = r.data.data() + i * b.size();
    for (std::size_t j = 0; j < b.size(); ++j) out[j] = av * b.data[j];
  }
  return r;
}

/// Contract wires i and j of t: they must live on the same space and carry
/// opposite conjugation flags. The shared index is summed; remaining wires
/// keep their relative order.
inline Tensor contract(const Tensor& t, std::size_t i, std::size_t j) {
  if (i == j || i >= t.rank() || j >= t.rank())
    throw ShapeMismatch("contract: wire indices out of range or equal");
  if (!same_space(*t.wires[i].space, *t.wires[j].space))
    throw SpaceMismatch("contract: wires " + std::to_string(i) + " and " + std::to_string(j) +
                        " live on different spaces ('" + t.wires[i].space->name + "' vs '" +
                        t.wires[j].space->name + "')");
  if (t.wires[i].conj == t.wires[j].conj)
    throw FlagMismatch("contract: wires " + std::to_string(i) + " and " + std::to_string(j) +
                       " carry the same conjugation flag");
  if (i > j) std::swap(i, j);

  const auto st = strides_of(t);
  const std::size_t d = t.dim(i);

  Tensor r;
  for (std::size_t k = 0; k < t.rank(); ++k)
    if (k != i && k != j) r.wires.push_back(t.wires[k]);
  std::size_t rsize = 1;
  for (const auto& w : r.wires) rsize *= w.space->dim;
  r.data.assign(rsize, 0.0);

  // Walk result indices with an odometer over the surviving wires.
  std::vector<std::size_t> idx(r.rank(), 0);
  std::vector<std::size_t> sur;  // original positions of surviving wires
  for (std::size_t k = 0; k < t.rank(); ++k)
    if (k != i && k != j) sur.push_back(k);

  for (std::size_t flat = 0; flat < rsize; ++flat) {
    std::size_t base = 0;
    for (std::size_t k = 0; k < sur.size(); ++k) base += idx[k] * st[sur[k]];
    double acc = 0.0;
    for (std::size_t m = 0; m < d; ++m) acc += t.data[base + m * (st[i] + st[j])];
    r.data[flat] = acc;
    for (std::size_t k = r.rank(); k-- > 0;) {
      if (++idx[k] < r.dim(k)) break;
      idx[k] = 0;
    }
  }
  return r;
}

/// Cup on s: the state over [s, s-conj] with entry 1 iff the indices agree.
inline Tensor cup(const SpacePtr& s) {
  Tensor t = Tensor::zeros({Wire{s, false}, Wire{s, true}});
  for (std::size_t i = 0; i < s->dim; ++i) t.data[i * s->dim + i] = 1.0;
  return t;
}

/// Cap on s: the effect consuming [s, s-conj] with entry 1 iff the indices
/// agree. Its own legs are flagged oppositely so that contraction against a
/// plain/conjugate wire pair is well-typed.
inline Tensor cap(const SpacePtr& s) {
  Tensor t = Tensor::zeros({Wire{s, true}, Wire{s, false}});
  for (std::size_t i = 0; i < s->dim; ++i) t.data[i * s->dim + i] = 1.0;
  return t;
}

/// Spider with m inputs (conjugate-flagged) followed by n outputs (plain);
/// entry 1 iff all m+n indices coincide. Requires m+n >= 1.
inline Tensor spider(std::size_t m, std::size_t n, const SpacePtr& s) {
  if (m + n == 0) throw ShapeMismatch("spider: needs at least one leg");
  std::vector<Wire> ws;
  ws.reserve(m + n);
  for (std::size_t k = 0; k < m; ++k) ws.push_back(Wire{s, true});
  for (std::size_t k = 0; k < n; ++k) ws.push_back(Wire{s, false});
  Tensor t = Tensor::zeros(std::move(ws));
  const std::size_t legs = m + n, d = s->dim;
  for (std::size_t i = 0; i < d; ++i) {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < legs; ++k) flat = flat * d + i;
    t.data[flat] = 1.0;
  }
  return t;
}

/// Conjugate: reverses the wire order, flips every conjugation flag and
/// re-indexes the data accordingly. An involution.
inline Tensor conjugate(const Tensor& t) {
  Tensor r;
  r.wires.reserve(t.rank());
  for (std::size_t k = t.rank(); k-- > 0;) r.wires.push_back(flipped(t.wires[k]));
  r.data.assign(t.size(), 0.0);

  const auto st = strides_of(t);
  std::vector<std::size_t> idx(t.rank(), 0);  // index in result order
  for (std::size_t flat = 0; flat < r.size(); ++flat) {
    std::size_t src = 0;
    for (std::size_t k = 0; k < t.rank(); ++k) src += idx[k] * st[t.rank() - 1 - k];
    r.data[flat] = t.data[src];
    for (std::size_t k = t.rank(); k-- > 0;) {
      if (++idx[k] < r.dim(k)) break;
      idx[k] = 0;
    }
  }
  return r;
}

/// Permute wires: result wire k is t's wire perm[k].
inline Tensor permute(const Tensor& t, const std::vector<std::size_t>& perm) {
  if (perm.size() != t.rank()) throw ShapeMismatch("permute: wrong permutation length");
  std::vector<bool> seen(t.rank(), false);
  for (std::size_t p : perm) {
    if (p >= t.rank() || seen[p]) throw ShapeMismatch("permute: not a permutation");
    seen[p] = true;
  }
  Tensor r;
  r.wires.reserve(t.rank());
  for (std::size_t p : perm) r.wires.push_back(t.wires[p]);
  r.data.assign(t.size(), 0.0);

  const auto st = strides_of(t);
  std::vector<std::size_t> idx(t.rank(), 0);
  for (std::size_t flat = 0; flat < r.size(); ++flat) {
    std::size_t src = 0;
    for (std::size_t k = 0; k < t.rank(); ++k) src += idx[k] * st[perm[k]];
    r.data[flat] = t.data[src];
    for (std::size_t k = t.rank(); k-- > 0;) {
      if (++idx[k] < r.dim(k)) break;
      idx[k] = 0;
    }
  }
  return r;
}

/// Exact wire-list match, then max-abs entry difference within tol.
inline bool equal_within(const Tensor& a, const Tensor& b, double tol = 1e-9) {
  if (a.rank() != b.rank()) throw ShapeMismatch("equal_within: wire lists differ in length");
  for (std::size_t k = 0; k < a.rank(); ++k)
    if (!same_wire(a.wires[k], b.wires[k]))
      throw ShapeMismatch("equal_within: wire " + std::to_string(k) + " differs");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a.data[i] - b.data[i]) > tol) return false;
  return true;
}

/// If a == lambda * b for a single positive scalar lambda (max-abs difference
/// within tol after scaling), return lambda; otherwise nullopt.
/// Pre: b is not the zero tensor.
inline std::optional<double> proportional_to(const Tensor& a, const Tensor& b,
                                             double tol = 1e-9) {
  if (a.rank() != b.rank()) throw ShapeMismatch("proportional_to: wire lists differ in length");
  for (std::size_t k = 0; k < a.rank(); ++k)
    if (!same_wire(a.wires[k], b.wires[k]))
      throw ShapeMismatch("proportional_to: wire " + std::to_string(k) + " differs");
  std::size_t pivot = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (std::abs(b.data[i]) > best) best = std::abs(b.data[i]), pivot = i;
  if (best == 0.0) throw ShapeMismatch("proportional_to: reference tensor is zero");
  const double lambda = a.data[pivot] / b.data[pivot];
  if (!(lambda > 0.0)) return std::nullopt;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a.data[i] - lambda * b.data[i]) > tol) return std::nullopt;
  return lambda;
}

// ------------------------------------------------------------------------
// Networks of tensors
// ------------------------------------------------------------------------

/// One contraction edge between two factor legs, addressed as
/// (factor index, wire index) pairs.
struct NetworkPair {
  std::size_t factor_a = 0, wire_a = 0;
  std::size_t factor_b = 0, wire_b = 0;
};

namespace detail {

inline void check_network(const std::vector<Tensor>& factors,
                          const std::vector<NetworkPair>& pairs) {
  std::vector<std::vector<bool>> used(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) used[f].assign(factors[f].rank(), false);
  auto touch = [&](std::size_t f, std::size_t w) {
    if (f >= factors.size() || w >= factors[f].rank())
      throw ShapeMismatch("network: endpoint out of range");
    if (used[f][w]) throw ShapeMismatch("network: wire used by two pairs");
    used[f][w] = true;
  };
  for (const auto& p : pairs) {
    touch(p.factor_a, p.wire_a);
    touch(p.factor_b, p.wire_b);
    const Wire& wa = factors[p.factor_a].wires[p.wire_a];
    const Wire& wb = factors[p.factor_b].wires[p.wire_b];
    if (!same_space(*wa.space, *wb.space))
      throw SpaceMismatch("network: paired wires live on different spaces");
    if (wa.conj == wb.conj) throw FlagMismatch("network: paired wires carry equal flags");
  }
}

}  // namespace detail

/// Contract a whole network pairwise, choosing merge order greedily by
/// smallest intermediate. Free wires come out sorted by (factor, wire).
inline Tensor contract_network(const std::vector<Tensor>& factors,
                               const std::vector<NetworkPair>& pairs) {
  detail::check_network(factors, pairs);

  struct Node {
    Tensor t;
    std::vector<std::pair<std::size_t, std::size_t>> ids;  // original (factor, wire)
    bool alive = true;
  };
  std::vector<Node> nodes(factors.size());
  std::vector<std::size_t> home(factors.size());  // factor -> node
  for (std::size_t f = 0; f < factors.size(); ++f) {
    nodes[f].t = factors[f];
    for (std::size_t w = 0; w < factors[f].rank(); ++w) nodes[f].ids.emplace_back(f, w);
    home[f] = f;
  }

  auto locate = [&](std::size_t f, std::size_t w) -> std::pair<std::size_t, std::size_t> {
    const Node& n = nodes[home[f]];
    for (std::size_t k = 0; k < n.ids.size(); ++k)
      if (n.ids[k] == std::make_pair(f, w)) return {home[f], k};
    throw ShapeMismatch("network: lost wire during contraction");
  };

  std::vector<NetworkPair> pending = pairs;
  auto contract_internal = [&](std::size_t ni) {
    // Resolve all pending pairs whose endpoints both sit in node ni.
    bool progressed = true;
    while (progressed) {
      progressed = false;
      for (std::size_t q = 0; q < pending.size(); ++q) {
        auto [na, ka] = locate(pending[q].factor_a, pending[q].wire_a);
        auto [nb, kb] = locate(pending[q].factor_b, pending[q].wire_b);
        if (na != ni || nb != ni) continue;
        Node& n = nodes[ni];
        n.t = contract(n.t, ka, kb);
        const auto hi = std::max(ka, kb), lo = std::min(ka, kb);
        n.ids.erase(n.ids.begin() + hi);
        n.ids.erase(n.ids.begin() + lo);
        pending.erase(pending.begin() + q);
        progressed = true;
        break;
      }
    }
  };

  for (std::size_t f = 0; f < factors.size(); ++f) contract_internal(f);

  while (!pending.empty()) {
    // Pick the pending pair whose merge yields the smallest intermediate.
    std::size_t best_q = 0;
    double best_cost = -1.0;
    for (std::size_t q = 0; q < pending.size(); ++q) {
      auto [na, ka] = locate(pending[q].factor_a, pending[q].wire_a);
      auto [nb, kb] = locate(pending[q].factor_b, pending[q].wire_b);
      (void)ka;
      (void)kb;
      double shared = 1.0;
      for (const auto& r : pending) {
        auto [ra, xa] = locate(r.factor_a, r.wire_a);
        auto [rb, xb] = locate(r.factor_b, r.wire_b);
        if ((ra == na && rb == nb) || (ra == nb && rb == na))
          shared *= double(nodes[ra].t.dim(xa)) * double(nodes[rb].t.dim(xb));
      }
      const double cost =
          double(nodes[na].t.size()) * double(nodes[nb].t.size()) / std::max(shared, 1.0);
      if (best_cost < 0.0 || cost < best_cost) best_cost = cost, best_q = q;
    }
    auto [na, ka] = locate(pending[best_q].factor_a, pending[best_q].wire_a);
    auto [nb, kb] = locate(pending[best_q].factor_b, pending[best_q].wire_b);
    (void)ka;
    (void)kb;
    if (na == nb) {
      contract_internal(na);
      continue;
    }
    Node merged;
    merged.t = tensor_product(nodes[na].t, nodes[nb].t);
    merged.ids = nodes[na].ids;
    merged.ids.insert(merged.ids.end(), nodes[nb].ids.begin(), nodes[nb].ids.end());
    nodes[nb].alive = false;
    nodes[na] = std::move(merged);
    for (auto& h : home)
      if (h == nb) h = na;
    contract_internal(na);
  }

  // Combine surviving nodes, then order free wires canonically.
  Tensor out = Tensor::scalar(1.0);
  std::vector<std::pair<std::size_t, std::size_t>> ids;
  for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
    if (!nodes[ni].alive || home[ni] != ni) continue;
    out = tensor_product(out, nodes[ni].t);
    ids.insert(ids.end(), nodes[ni].ids.begin(), nodes[ni].ids.end());
  }
  std::vector<std::size_t> order(ids.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return ids[x] < ids[y]; });
  return permute(out, order);
}

/// Independent check path: evaluate the same network by brute-force summation
/// over every bound and free index (zero partial products pruned). Uses only
/// raw index arithmetic; no pairwise contraction algebra.
inline Tensor contract_network_bruteforce(const std::vector<Tensor>& factors,
                                          const std::vector<NetworkPair>& pairs) {
  detail::check_network(factors, pairs);

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> var_of(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) var_of[f].assign(factors[f].rank(), kNone);

  std::size_t nvars = 0;
  std::vector<std::size_t> var_dim;
  for (const auto& p : pairs) {
    var_of[p.factor_a][p.wire_a] = nvars;
    var_of[p.factor_b][p.wire_b] = nvars;
    var_dim.push_back(factors[p.factor_a].dim(p.wire_a));
    ++nvars;
  }
  std::vector<Wire> free_wires;
  std::vector<std::size_t> free_vars;
  for (std::size_t f = 0; f < factors.size(); ++f)
    for (std::size_t w = 0; w < factors[f].rank(); ++w)
      if (var_of[f][w] == kNone) {
        var_of[f][w] = nvars;
        var_dim.push_back(factors[f].dim(w));
        free_wires.push_back(factors[f].wires[w]);
        free_vars.push_back(nvars);
        ++nvars;
      }

  Tensor out = Tensor::zeros(free_wires);
  std::vector<std::size_t> val(nvars, 0);
  std::vector<bool> bound(nvars, false);

  std::vector<std::vector<std::size_t>> fstrides;
  fstrides.reserve(factors.size());
  for (const auto& f : factors) fstrides.push_back(strides_of(f));

  auto emit = [&](double product) {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < free_vars.size(); ++k)
      flat = flat * var_dim[free_vars[k]] + val[free_vars[k]];
    out.data[flat] += product;
  };

  // Depth-first over factors; per factor, odometer over its unbound vars.
  auto rec = [&](auto&& self, std::size_t f, double product) -> void {
    if (product == 0.0) return;
    if (f == factors.size()) {
      emit(product);
      return;
    }
    std::vector<std::size_t> fresh;
    for (std::size_t w = 0; w < factors[f].rank(); ++w) {
      const std::size_t v = var_of[f][w];
      if (!bound[v]) {
        bound[v] = true;
        val[v] = 0;
        fresh.push_back(v);
      }
    }
    auto entry = [&]() {
      std::size_t flat = 0;
      for (std::size_t w = 0; w < factors[f].rank(); ++w)
        flat += val[var_of[f][w]] * fstrides[f][w];
      return factors[f].data[flat];
    };
    if (fresh.empty()) {
      self(self, f + 1, product * entry());
      return;
    }
    bool more = true;
    while (more) {
      self(self, f + 1, product * entry());
      more = false;
      for (std::size_t k = fresh.size(); k-- > 0;) {
        if (++val[fresh[k]] < var_dim[fresh[k]]) {
          more = true;
          break;
        }
        val[fresh[k]] = 0;
      }
    }
    for (std::size_t v : fresh) bound[v] = false;
  };
  rec(rec, 0, 1.0);
  return out;
}

}  // namespace ddop
