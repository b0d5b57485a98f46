#include "svagent/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svagent {

namespace {

constexpr double kRelevanceFloor = 1e-6;
constexpr double kGainFloor = 1e-12;
constexpr double kPsdTolerance = -1e-8;

}  // namespace

SimilarityMatrix similarity_matrix(const Eigen::MatrixXd& embeddings) {
  const Eigen::Index m = embeddings.rows();
  if (m == 0) throw DppError("similarity_matrix: no rows");

  // Renormalize in double so the Gram diagonal is exact; float-storage rows
  // arrive only approximately unit-norm.
  Eigen::MatrixXd rows = embeddings;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double norm = rows.row(i).norm();
    if (!(norm > 0.0)) throw DppError("similarity_matrix: zero-norm row " + std::to_string(i));
    rows.row(i) /= norm;
  }

  Eigen::MatrixXd gram = rows * rows.transpose();
  SimilarityMatrix out;
  // (cos+1)/2, symmetrized; the diagonal is exactly 1 by definition.
  out.values = (((gram + gram.transpose()) * 0.25).array() + 0.5).matrix();
  out.values.diagonal().setOnes();
  return out;
}

RelevanceVector relevance_vector(const Eigen::VectorXd& anchor,
                                 const Eigen::MatrixXd& embeddings) {
  if (embeddings.rows() == 0) throw DppError("relevance_vector: no rows");
  if (anchor.size() != embeddings.cols())
    throw DppError("relevance_vector: anchor dimension " + std::to_string(anchor.size()) +
                   " does not match embeddings dimension " + std::to_string(embeddings.cols()));

  const double anchor_norm = anchor.norm();
  if (!(anchor_norm > 0.0)) throw DppError("relevance_vector: zero-norm anchor");

  RelevanceVector out;
  out.values.resize(embeddings.rows());
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    const double row_norm = embeddings.row(i).norm();
    if (!(row_norm > 0.0)) throw DppError("relevance_vector: zero-norm row " + std::to_string(i));
    const double cos = embeddings.row(i).dot(anchor) / (row_norm * anchor_norm);
    out.values[i] = std::clamp((cos + 1.0) / 2.0, kRelevanceFloor, 1.0);
  }
  return out;
}

Kernel build_kernel(const SimilarityMatrix& S, const RelevanceVector& r,
                    RelevanceSource provenance) {
  if (S.n() != r.n())
    throw DppError("build_kernel: size mismatch, S is " + std::to_string(S.n()) + ", r is " +
                   std::to_string(r.n()));
  Kernel out;
  out.provenance = provenance;
  out.values.resize(S.values.rows(), S.values.cols());
  for (Eigen::Index i = 0; i < S.values.rows(); ++i)
    for (Eigen::Index j = 0; j < S.values.cols(); ++j)
      out.values(i, j) = r.values[i] * S.values(i, j) * r.values[j];
  return out;
}

GreedySelection greedy_map_select(const Kernel& L, int k) {
  const int n = L.n();
  if (n < 1) throw DppError("greedy_map_select: empty kernel");
  if (k < 1) throw DppError("greedy_map_select: k must be >= 1");
  const int target = std::min(k, n);

  // Incremental Cholesky of the selected principal submatrix: row i of `c`
  // accumulates the factor entries of item i against the selected items, and
  // gain[i] tracks its conditional variance d_i^2.
  std::vector<double> gain(n);
  for (int i = 0; i < n; ++i) gain[i] = L.values(i, i);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, target);
  std::vector<bool> selected(n, false);

  GreedySelection result;
  result.order.reserve(target);
  result.gains.reserve(target);

  int steps = 0;
  while (steps < target) {
    int best = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (selected[i]) continue;
      if (gain[i] < kPsdTolerance)
        throw DppError("greedy_map_select: negative conditional variance " +
                       std::to_string(gain[i]) + " at item " + std::to_string(i) +
                       " (kernel not PSD)");
      if (gain[i] > best_gain) {  // strict > keeps the lowest index on ties
        best_gain = gain[i];
        best = i;
      }
    }
    if (best < 0 || best_gain <= kGainFloor) break;  // pad the rest below

    selected[best] = true;
    result.order.push_back(best);
    result.gains.push_back(best_gain);
    ++steps;
    if (steps == target) break;

    const double d = std::sqrt(best_gain);
    for (int i = 0; i < n; ++i) {
      if (selected[i]) continue;
      const double e =
          (L.values(best, i) - c.row(best).head(steps - 1).dot(c.row(i).head(steps - 1))) / d;
      c(i, steps - 1) = e;
      gain[i] -= e * e;
    }
  }

  result.padded_from = result.order.size();
  for (int i = 0; i < n && static_cast<int>(result.order.size()) < target; ++i) {
    if (selected[i]) continue;
    selected[i] = true;
    result.order.push_back(i);
    result.gains.push_back(std::max(gain[i], 0.0));
  }
  return result;
}

FrameIndexSet brute_force_map(const Kernel& L, int k) {
  const int n = L.n();
  if (n < 1) throw DppError("brute_force_map: empty kernel");
  if (n > 15) throw DppError("brute_force_map: n = " + std::to_string(n) + " exceeds guard of 15");
  if (k < 1) throw DppError("brute_force_map: k must be >= 1");
  const int size = std::min(k, n);

  std::vector<int> subset(size);
  for (int i = 0; i < size; ++i) subset[i] = i;

  std::vector<int> best;
  double best_det = -std::numeric_limits<double>::infinity();

  // Lexicographic enumeration with strict improvement keeps the
  // lexicographically-first maximizer on ties.
  while (true) {
    Eigen::MatrixXd sub(size, size);
    for (int a = 0; a < size; ++a)
      for (int b = 0; b < size; ++b) sub(a, b) = L.values(subset[a], subset[b]);
    const double det = sub.determinant();
    if (det > best_det) {
      best_det = det;
      best = subset;
    }

    int pos = size - 1;
    while (pos >= 0 && subset[pos] == n - size + pos) --pos;
    if (pos < 0) break;
    ++subset[pos];
    for (int j = pos + 1; j < size; ++j) subset[j] = subset[j - 1] + 1;
  }
  return FrameIndexSet(std::move(best));
}

double intersection_ratio(const FrameIndexSet& y_q, const FrameIndexSet& y_e) {
  if (y_q.empty() || y_e.empty()) throw DppError("intersection_ratio: empty operand");
  const auto inter = set_intersection(y_q, y_e);
  return static_cast<double>(inter.size()) / static_cast<double>(y_q.size() + y_e.size());
}

FrameIndexSet combine_selections(const FrameIndexSet& y_q, const FrameIndexSet& y_e,
                                 CombineMode mode, int min_size) {
  if (mode == CombineMode::set_union) return set_union(y_q, y_e);
  auto inter = set_intersection(y_q, y_e);
  if (static_cast<int>(inter.size()) < min_size) return set_union(y_q, y_e);
  return inter;
}

}  // namespace svagent
