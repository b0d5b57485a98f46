#pragma once

#include <Eigen/Dense>

#include <vector>

#include "svagent/types.hpp"

namespace svagent {

/// Symmetric similarity matrix over n items, unit diagonal, entries in [0,1].
struct SimilarityMatrix {
  Eigen::MatrixXd values;

  int n() const { return static_cast<int>(values.rows()); }
};

/// Per-item relevance to a text anchor, each entry in [1e-6, 1].
struct RelevanceVector {
  Eigen::VectorXd values;

  int n() const { return static_cast<int>(values.size()); }
};

enum class RelevanceSource { query, evidence };

/// DPP kernel L = diag(r) * S * diag(r).
struct Kernel {
  Eigen::MatrixXd values;
  RelevanceSource provenance = RelevanceSource::query;

  int n() const { return static_cast<int>(values.rows()); }
};

/// Cosine similarity of the (renormalized) rows, mapped by s -> (s+1)/2 so
/// entries land in [0,1] with an exactly-unit diagonal. The map keeps the
/// matrix PSD: it is half the Gram matrix plus half the all-ones matrix.
SimilarityMatrix similarity_matrix(const Eigen::MatrixXd& embeddings);

/// r_i = (cos(anchor, row_i) + 1) / 2, clamped to [1e-6, 1].
RelevanceVector relevance_vector(const Eigen::VectorXd& anchor,
                                 const Eigen::MatrixXd& embeddings);

Kernel build_kernel(const SimilarityMatrix& S, const RelevanceVector& r,
                    RelevanceSource provenance = RelevanceSource::query);

/// Result of greedy MAP selection, in pick order with per-step marginal
/// gains d^2 (the conditional variance of the picked item).
struct GreedySelection {
  std::vector<int> order;     ///< items in the order they were picked
  std::vector<double> gains;  ///< d^2 at pick time, one per order entry
  std::size_t padded_from = 0;  ///< order position where low-gain padding began

  FrameIndexSet indices() const { return FrameIndexSet(order); }
};

/// Greedy MAP subset selection via incremental Cholesky-style updates: each
/// step adds the item with the largest remaining conditional variance d^2,
/// ties broken by lowest index. When every remaining gain drops to <= 1e-12
/// the selection is padded with the lowest-index unselected items so the
/// result always has min(k, n) elements. Throws DppError when a conditional
/// variance falls below -1e-8 (non-PSD kernel).
GreedySelection greedy_map_select(const Kernel& L, int k);

/// Exhaustive MAP oracle: the size-min(k,n) subset maximizing det(L_Y),
/// ties broken lexicographically. Guarded to n <= 15.
FrameIndexSet brute_force_map(const Kernel& L, int k);

/// |y_q ∩ y_e| / (|y_q| + |y_e|), always in [0, 0.5]. Throws on empty input.
double intersection_ratio(const FrameIndexSet& y_q, const FrameIndexSet& y_e);

enum class CombineMode { intersection, set_union };

/// mode=intersection returns y_q ∩ y_e but falls back to the union when the
/// intersection has fewer than min_size elements; mode=set_union returns the
/// union unconditionally.
FrameIndexSet combine_selections(const FrameIndexSet& y_q, const FrameIndexSet& y_e,
                                 CombineMode mode, int min_size);

/// Outcome of the query/evidence agreement gate for one iteration.
struct GateResult {
  FrameIndexSet y_q;
  FrameIndexSet y_e;
  FrameIndexSet intersection;
  double ratio = 0.0;
  bool passed = false;
};

}  // namespace svagent
