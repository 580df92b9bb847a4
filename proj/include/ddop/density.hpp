#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <random>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "tensor.hpp"

namespace ddop {

// ------------------------------------------------------------------------
// Domain types
// ------------------------------------------------------------------------

/// How a doubled state was built; some guarantees (PSD views, rank bounds)
/// only follow from the construction path.
enum class Provenance { FromMixtures, FromNormalForm, Raw };

/// A mixture of vectors stored as a vector over [H, H-conj]:
/// reshaped to an H x H matrix it is symmetric PSD.
struct DensityVector {
  Tensor tensor;
};

/// A twice-doubled state over [H, H-conj, H, H-conj]. Supports two
/// independent operator views (phi1 and phi2 below).
struct DualDensity {
  Tensor tensor;
  Provenance provenance = Provenance::Raw;
};

/// A linear operator stored as a tensor whose first row_rank wires index
/// rows and the rest index columns. Row and column dimensions must agree
/// slot by slot.
struct Operator {
  Tensor tensor;
  std::size_t row_rank = 0;

  [[nodiscard]] std::size_t col_rank() const { return tensor.rank() - row_rank; }
};

/// One weighted sense vector.
struct Sense {
  Tensor vector;  // single plain wire over the word's space
  double prob = 1.0;
};

/// One mixture component of a twice-doubled state.
struct SenseGroup {
  double prob = 1.0;
  std::vector<Sense> senses;
};

/// Which preconditions to enforce when building mixtures. The weightless
/// style (all probabilities 1, nothing summing to 1) is allowed by turning
/// probs_sum_to_one off.
struct SenseChecks {
  bool unit_vectors = true;
  bool probs_sum_to_one = true;
  double tol = 1e-9;
};

// ------------------------------------------------------------------------
// Construction
// ------------------------------------------------------------------------

namespace detail {

inline void check_sense_vector(const Tensor& v) {
  if (v.rank() != 1)
    throw ShapeMismatch("sense vector must have exactly one wire");
  if (v.wires[0].conj)
    throw ShapeMismatch("sense vector wire must be unconjugated");
}

inline double vector_norm(const Tensor& v) {
  double s = 0.0;
  for (double x : v.data) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

/// Mix weighted sense vectors into a density vector over [H, H-conj]:
/// sum of p_i * (phi_i tensor conj(phi_i)).
inline DensityVector density_vector(const std::vector<Sense>& senses,
                                    const SenseChecks& checks = {}) {
  if (senses.empty()) throw EmptySenseList("density_vector: no senses given");
  detail::check_sense_vector(senses.front().vector);
  const SpacePtr h = senses.front().vector.wires[0].space;

  double psum = 0.0;
  for (const auto& s : senses) {
    detail::check_sense_vector(s.vector);
    if (!same_space(*s.vector.wires[0].space, *h))
      throw ShapeMismatch("density_vector: senses live on different spaces");
    if (s.prob < 0.0) throw NegativeProbability("density_vector: negative probability");
    if (checks.unit_vectors && std::abs(detail::vector_norm(s.vector) - 1.0) > checks.tol)
      throw ValidationError("density_vector: sense vector is not normalized");
    psum += s.prob;
  }
  if (checks.probs_sum_to_one && std::abs(psum - 1.0) > checks.tol)
    throw ValidationError("density_vector: probabilities do not sum to 1");

  Tensor acc = Tensor::zeros({Wire{h, false}, Wire{h, true}});
  for (const auto& s : senses) {
    const Tensor term = tensor_product(s.vector, conjugate(s.vector));
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += s.prob * term.data[i];
  }
  return DensityVector{std::move(acc)};
}

/// Verify the twice-doubled wire layout [H, H-conj, H, H-conj].
inline void check_dual_layout(const Tensor& t) {
  if (t.rank() != 4) throw LayoutError("dual density must have four wires");
  const SpacePtr h = t.wires[0].space;
  const bool want[4] = {false, true, false, true};
  for (std::size_t k = 0; k < 4; ++k) {
    if (!same_space(*t.wires[k].space, *h))
      throw LayoutError("dual density wires must share one space");
    if (t.wires[k].conj != want[k])
      throw LayoutError("dual density flags must alternate plain/conjugate");
  }
}

/// Wrap a raw tensor as a dual density after validating its layout.
inline DualDensity as_dual(Tensor t, Provenance prov = Provenance::Raw) {
  check_dual_layout(t);
  return DualDensity{std::move(t), prov};
}

/// Double twice: mix density vectors rho_k into
/// sum of p'_k * (rho_k tensor conj(rho_k)) over [H, H-conj, H, H-conj].
inline DualDensity dual_density_from_mixtures(const std::vector<SenseGroup>& groups,
                                              const SenseChecks& checks = {}) {
  if (groups.empty()) throw EmptySenseList("dual_density_from_mixtures: no groups given");
  double psum = 0.0;
  Tensor acc;
  bool first = true;
  for (const auto& g : groups) {
    if (g.prob < 0.0)
      throw NegativeProbability("dual_density_from_mixtures: negative group probability");
    psum += g.prob;
    const DensityVector rho = density_vector(g.senses, checks);
    const Tensor term = tensor_product(rho.tensor, conjugate(rho.tensor));
    if (first) {
      acc = Tensor::zeros(term.wires);
      first = false;
    }
    if (!std::equal(acc.wires.begin(), acc.wires.end(), term.wires.begin(),
                    [](const Wire& a, const Wire& b) { return same_wire(a, b); }))
      throw ShapeMismatch("dual_density_from_mixtures: groups live on different spaces");
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += g.prob * term.data[i];
  }
  if (checks.probs_sum_to_one && std::abs(psum - 1.0) > checks.tol)
    throw ValidationError("dual_density_from_mixtures: group probabilities do not sum to 1");
  DualDensity d{std::move(acc), Provenance::FromMixtures};
  check_dual_layout(d.tensor);
  return d;
}

/// Lift a pure tensor v into the doubled-twice world:
/// v (x) conj(v) (x) v (x) conj(v), re-ordered slot-wise so each original
/// wire becomes four adjacent wires [w, w-conj, w, w-conj].
inline Tensor lift_pure(const Tensor& v) {
  const std::size_t n = v.rank();
  const Tensor cv = conjugate(v);
  Tensor q = tensor_product(tensor_product(v, cv), tensor_product(v, cv));
  if (n == 0) return q;  // scalar: value beats layout
  std::vector<std::size_t> perm;
  perm.reserve(4 * n);
  for (std::size_t t = 0; t < n; ++t) {
    perm.push_back(t);              // first plain copy
    perm.push_back(2 * n - 1 - t);  // first conjugate copy (stored reversed)
    perm.push_back(2 * n + t);      // second plain copy
    perm.push_back(4 * n - 1 - t);  // second conjugate copy
  }
  return permute(q, perm);
}

// ------------------------------------------------------------------------
// The two operator views
// ------------------------------------------------------------------------

/// Build an operator, checking the row/column dimension split.
inline Operator make_operator(Tensor t, std::size_t row_rank) {
  if (row_rank > t.rank()) throw LayoutError("operator row_rank exceeds wire count");
  const std::size_t cr = t.rank() - row_rank;
  if (row_rank != cr) throw LayoutError("operator must have equal row and column ranks");
  for (std::size_t k = 0; k < row_rank; ++k)
    if (t.dim(k) != t.dim(row_rank + k))
      throw LayoutError("operator row/column dimensions disagree");
  return Operator{std::move(t), row_rank};
}

/// First operator view: rows are wires (1,2), columns are wires (4,3) —
/// the column pair is taken in reversed order, matching conjugation.
inline Operator phi1(const DualDensity& d) {
  check_dual_layout(d.tensor);
  return make_operator(permute(d.tensor, {0, 1, 3, 2}), 2);
}

/// Exchange the second and fourth wires: swaps which of the two doubling
/// layers the operator views read. An involution.
inline DualDensity swap_sw_ne(const DualDensity& d) {
  check_dual_layout(d.tensor);
  return DualDensity{permute(d.tensor, {0, 3, 2, 1}), Provenance::Raw};
}

/// Second operator view: phi1 after swap_sw_ne.
inline Operator phi2(const DualDensity& d) {
  check_dual_layout(d.tensor);
  return make_operator(permute(d.tensor, {0, 3, 1, 2}), 2);
}

/// Flatten an operator into its dense matrix.
inline Eigen::MatrixXd op_matrix(const Operator& op) {
  std::size_t rows = 1, cols = 1;
  for (std::size_t k = 0; k < op.row_rank; ++k) rows *= op.tensor.dim(k);
  for (std::size_t k = op.row_rank; k < op.tensor.rank(); ++k) cols *= op.tensor.dim(k);
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          op.tensor.data[r * cols + c];
  return m;
}

/// View a density vector as the operator it reshapes to.
inline Operator density_operator_view(const DensityVector& rho) {
  return make_operator(rho.tensor, 1);
}

// ------------------------------------------------------------------------
// Spectral quantities
// ------------------------------------------------------------------------

namespace detail {

inline void check_square_symmetric(const Eigen::MatrixXd& m, const char* who) {
  if (m.rows() != m.cols()) throw NonSymmetric(std::string(who) + ": matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw NonSymmetric(std::string(who) + ": matrix is not symmetric");
}

inline Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& m, const char* who) {
  check_square_symmetric(m, who);
  const Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace detail

inline double op_trace(const Operator& op) {
  const Eigen::MatrixXd m = op_matrix(op);
  if (m.rows() != m.cols()) throw LayoutError("trace: operator is not square");
  return m.trace();
}

/// Scale an operator to unit trace.
inline Operator normalize(const Operator& op) {
  const double tr = op_trace(op);
  if (!(std::abs(tr) > 1e-12)) throw ZeroTrace("normalize: operator trace is zero");
  Operator r = op;
  for (auto& x : r.tensor.data) x /= tr;
  return r;
}

inline bool is_psd(const Operator& op, double tol = 1e-10) {
  const Eigen::VectorXd ev = detail::sym_eigenvalues(op_matrix(op), "is_psd");
  return ev.minCoeff() >= -tol;
}

/// Eigenvalues above cutoff count toward the rank.
inline std::size_t spectral_rank(const Operator& op, double cutoff = 1e-9) {
  const Eigen::VectorXd ev = detail::sym_eigenvalues(op_matrix(op), "spectral_rank");
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) r += (std::abs(ev[i]) > cutoff);
  return r;
}

/// Von Neumann entropy of the trace-normalized operator, in the given
/// logarithm base (2 = bits). Eigenvalues at or below the clip are skipped.
inline double entropy(const Operator& op, double base = 2.0, double clip = 1e-12) {
  Eigen::VectorXd ev = detail::sym_eigenvalues(op_matrix(op), "entropy");
  const double tr = ev.sum();
  if (!(tr > clip)) throw ZeroTrace("entropy: operator trace is not positive");
  double h = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double lam = ev[i] / tr;
    if (lam > clip) h -= lam * std::log(lam);
  }
  return h / std::log(base);
}

/// Purity of the trace-normalized operator: sum of squared eigenvalues,
/// in (0, 1], 1 for pure states.
inline double purity(const Operator& op) {
  Eigen::VectorXd ev = detail::sym_eigenvalues(op_matrix(op), "purity");
  const double tr = ev.sum();
  if (!(std::abs(tr) > 1e-12)) throw ZeroTrace("purity: operator trace is zero");
  double p = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) p += (ev[i] / tr) * (ev[i] / tr);
  return p;
}

// ------------------------------------------------------------------------
// Graded entailment
// ------------------------------------------------------------------------

/// Largest k in [0,1] such that sigma - k*rho stays PSD (bisection, 60
/// rounds). Inputs are trace-normalized first; k = 1 means full entailment.
inline double graded_entailment(const Operator& rho, const Operator& sigma,
                                double tol = 1e-10) {
  if (!is_psd(rho, tol)) throw NotPSD("graded_entailment: first operator is not PSD");
  if (!is_psd(sigma, tol)) throw NotPSD("graded_entailment: second operator is not PSD");
  Eigen::MatrixXd r = op_matrix(normalize(rho));
  Eigen::MatrixXd s = op_matrix(normalize(sigma));
  if (r.rows() != s.rows() || r.cols() != s.cols())
    throw LayoutError("graded_entailment: operator shapes differ");

  auto ok = [&](double k) {
    const Eigen::MatrixXd diff = s - k * r;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (diff + diff.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
  };
  if (ok(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

// ------------------------------------------------------------------------
// Discarding effects
// ------------------------------------------------------------------------

/// Trace out one subsystem: contracts row wire i against column wire i.
inline Operator partial_trace(const Operator& op, std::size_t subsystem) {
  if (subsystem >= op.row_rank) throw LayoutError("partial_trace: no such subsystem");
  Tensor t = contract(op.tensor, subsystem, op.row_rank + subsystem);
  return make_operator(std::move(t), op.row_rank - 1);
}

/// Fully discard via the first view: the trace of phi1.
inline double discard1(const DualDensity& d) { return op_trace(phi1(d)); }

/// Fully discard via the second view: the trace of phi2.
inline double discard2(const DualDensity& d) { return op_trace(phi2(d)); }

/// Discard one subsystem of the phi1 view (default: the second).
inline Operator partial_discard1(const DualDensity& d, std::size_t subsystem = 1) {
  return partial_trace(phi1(d), subsystem);
}

/// Discard one subsystem of the phi2 view (default: the second, which keeps
/// the state's leading wire pair).
inline Operator partial_discard2(const DualDensity& d, std::size_t subsystem = 1) {
  return partial_trace(phi2(d), subsystem);
}

/// The single-system operator summarizing a word for comparison purposes:
/// discard the outer doubling layer, then normalize the trace.
inline Operator word_operator(const DualDensity& d) {
  return normalize(partial_discard2(d, 1));
}

/// Probe for the vector case of preparation-state agreement: returns whether
/// "outer products agree" and "vectors agree up to sign" give the same
/// verdict for u, v. Over the reals the sign really is free, so the two
/// sides are compared as a biconditional.
inline bool check_preparation_state_agreement(const Tensor& u, const Tensor& v,
                                              double tol = 1e-9) {
  if (u.rank() != v.rank()) throw ShapeMismatch("agreement probe: wire lists differ");
  for (std::size_t k = 0; k < u.rank(); ++k)
    if (!same_wire(u.wires[k], v.wires[k]))
      throw ShapeMismatch("agreement probe: wire lists differ");
  const Tensor uu = tensor_product(u, conjugate(u));
  const Tensor vv = tensor_product(v, conjugate(v));
  const bool outer_equal = equal_within(uu, vv, tol);
  bool plus = true, minus = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (std::abs(u.data[i] - v.data[i]) > tol) plus = false;
    if (std::abs(u.data[i] + v.data[i]) > tol) minus = false;
  }
  return outer_equal == (plus || minus);
}

// ------------------------------------------------------------------------
// Normal-form construction
// ------------------------------------------------------------------------

/// Box data for the doubly-doubled normal form with both layers jointly
/// diagonal: orthonormal unit vectors u_c over H and a coefficient matrix
/// G (|C| rows by |D| columns) with pairwise-orthogonal rows. The state is
///   sum_d chi_d (x) conj(chi_d),  chi_d = sum_c G[c][d] * u_c u_c^T.
/// Under this family rank(phi2) <= |C| and rank(phi1) <= |D|.
struct NormalFormBox {
  std::vector<Tensor> units;                // |C| orthonormal vectors over H
  std::vector<std::vector<double>> coeffs;  // |C| x |D|, rows orthogonal
};

inline DualDensity dual_density_from_normal_form(const NormalFormBox& box,
                                                 double tol = 1e-9) {
  if (box.units.empty()) throw EmptySenseList("normal form: no unit vectors");
  const std::size_t nc = box.units.size();
  if (box.coeffs.size() != nc)
    throw ValidationError("normal form: coefficient rows must match unit count");
  const std::size_t nd = box.coeffs.front().size();
  if (nd == 0) throw ValidationError("normal form: no columns in coefficient matrix");
  for (const auto& row : box.coeffs)
    if (row.size() != nd) throw ValidationError("normal form: ragged coefficient matrix");

  for (const auto& u : box.units) {
    detail::check_sense_vector(u);
    if (!same_space(*u.wires[0].space, *box.units.front().wires[0].space))
      throw ValidationError("normal form: unit vectors live on different spaces");
  }

  // Orthonormality of the units and orthogonality of the coefficient rows.
  for (std::size_t a = 0; a < nc; ++a) {
    for (std::size_t b = a; b < nc; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < box.units[a].size(); ++i)
        dot += box.units[a].data[i] * box.units[b].data[i];
      const double want = (a == b) ? 1.0 : 0.0;
      if (std::abs(dot - want) > tol)
        throw ValidationError("normal form: unit vectors are not orthonormal");
      if (a != b) {
        double g = 0.0;
        for (std::size_t dcol = 0; dcol < nd; ++dcol)
          g += box.coeffs[a][dcol] * box.coeffs[b][dcol];
        if (std::abs(g) > tol)
          throw ValidationError("normal form: coefficient rows are not orthogonal");
      }
    }
  }

  const SpacePtr space = box.units.front().wires[0].space;
  Tensor acc = Tensor::zeros({Wire{space, false}, Wire{space, true}, Wire{space, false},
                              Wire{space, true}});
  for (std::size_t dcol = 0; dcol < nd; ++dcol) {
    Tensor chi = Tensor::zeros({Wire{space, false}, Wire{space, true}});
    for (std::size_t c = 0; c < nc; ++c) {
      const Tensor outer = tensor_product(box.units[c], conjugate(box.units[c]));
      for (std::size_t i = 0; i < chi.size(); ++i)
        chi.data[i] += box.coeffs[c][dcol] * outer.data[i];
    }
    const Tensor term = tensor_product(chi, conjugate(chi));
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += term.data[i];
  }
  return DualDensity{std::move(acc), Provenance::FromNormalForm};
}

/// Draw a random normal-form box: |C| orthonormal vectors from a QR of a
/// random matrix, and |C| pairwise-orthogonal coefficient rows (rows beyond
/// the |D|-dimensional capacity come out zero).
inline NormalFormBox random_normal_form(const SpacePtr& h, std::size_t nc, std::size_t nd,
                                        std::mt19937_64& rng) {
  if (nc > h->dim) throw ValidationError("random_normal_form: |C| exceeds dim H");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto dimi = static_cast<Eigen::Index>(h->dim);

  Eigen::MatrixXd a(dimi, dimi);
  for (Eigen::Index i = 0; i < dimi; ++i)
    for (Eigen::Index j = 0; j < dimi; ++j) a(i, j) = gauss(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();

  NormalFormBox box;
  for (std::size_t c = 0; c < nc; ++c) {
    Tensor u = Tensor::zeros({Wire{h, false}});
    for (std::size_t i = 0; i < h->dim; ++i)
      u.data[i] = q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    box.units.push_back(std::move(u));
  }

  const auto ndi = static_cast<Eigen::Index>(nd);
  Eigen::MatrixXd b(ndi, ndi);
  for (Eigen::Index i = 0; i < ndi; ++i)
    for (Eigen::Index j = 0; j < ndi; ++j) b(i, j) = gauss(rng);
  const Eigen::MatrixXd qg = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ();
  std::uniform_real_distribution<double> scale(0.25, 2.0);
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<double> row(nd, 0.0);
    if (c < nd) {
      const double s = scale(rng);
      for (std::size_t dcol = 0; dcol < nd; ++dcol)
        row[dcol] = s * qg(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(dcol));
    }
    box.coeffs.push_back(std::move(row));
  }
  return box;
}

}  // namespace ddop
