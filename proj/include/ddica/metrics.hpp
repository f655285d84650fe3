#pragma once

// Scoring estimated components against ground truth under the ICA
// ambiguity class (permutation and sign).

#include "ddica/common.hpp"
#include "ddica/io.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ddica {

struct MatchResult {
  // permutation[i] is the estimated row matched to ground-truth row i.
  std::vector<Index> permutation;
  std::vector<int> signs;
  std::vector<double> correlations;  // |r| per ground-truth component
  double mean_abs_corr = 0.0;
};

/// Pearson correlation of two equal-length vectors.
inline double pearson(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                      const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  if (a.size() != b.size()) throw DimensionError("pearson: length mismatch");
  const Eigen::RowVectorXd da = a.array() - a.mean();
  const Eigen::RowVectorXd db = b.array() - b.mean();
  const double na = da.norm();
  const double nb = db.norm();
  if (na == 0.0 || nb == 0.0) throw DegenerateError("pearson: constant component");
  return std::clamp(da.dot(db) / (na * nb), -1.0, 1.0);
}

/// Q x p matrix of Pearson correlations between ground-truth and estimated rows.
inline Matrix correlation_matrix(const Matrix& est, const Matrix& gt) {
  if (est.cols() != gt.cols()) {
    throw DimensionError("correlation_matrix: sample count mismatch " + shape_str(est) + " vs " +
                         shape_str(gt));
  }
  if (est.cols() < 2) throw DimensionError("correlation_matrix: need at least 2 samples");
  Matrix r(gt.rows(), est.rows());
  for (Index i = 0; i < est.rows(); ++i) {
    if (est.row(i).maxCoeff() == est.row(i).minCoeff()) {
      throw DegenerateError("estimated component " + std::to_string(i) + " is constant");
    }
  }
  for (Index i = 0; i < gt.rows(); ++i) {
    if (gt.row(i).maxCoeff() == gt.row(i).minCoeff()) {
      throw DegenerateError("ground-truth component " + std::to_string(i) + " is constant");
    }
    for (Index j = 0; j < est.rows(); ++j) r(i, j) = pearson(gt.row(i), est.row(j));
  }
  return r;
}

namespace detail {

inline MatchResult finish_match(const Matrix& r, std::vector<Index> perm) {
  MatchResult m;
  m.permutation = std::move(perm);
  double total = 0.0;
  for (std::size_t i = 0; i < m.permutation.size(); ++i) {
    const double v = r(static_cast<Index>(i), m.permutation[i]);
    m.signs.push_back(v < 0.0 ? -1 : 1);
    m.correlations.push_back(std::abs(v));
    total += std::abs(v);
  }
  m.mean_abs_corr = m.permutation.empty() ? 0.0 : total / static_cast<double>(m.permutation.size());
  return m;
}

inline void search_assignments(const Matrix& absr, Index gt_row, std::vector<Index>& current,
                               std::vector<bool>& used, double score, double& best_score,
                               std::vector<Index>& best) {
  if (gt_row == absr.rows()) {
    if (score > best_score) {
      best_score = score;
      best = current;
    }
    return;
  }
  for (Index j = 0; j < absr.cols(); ++j) {
    if (used[static_cast<std::size_t>(j)]) continue;
    used[static_cast<std::size_t>(j)] = true;
    current.push_back(j);
    search_assignments(absr, gt_row + 1, current, used, score + absr(gt_row, j), best_score, best);
    current.pop_back();
    used[static_cast<std::size_t>(j)] = false;
  }
}

}  // namespace detail

/// Greedy best-first matching on |r|; ties go to the lowest indices.
inline MatchResult match_components_greedy(const Matrix& est, const Matrix& gt) {
  if (est.rows() < gt.rows()) {
    throw DimensionError("match_components: fewer estimated (" + std::to_string(est.rows()) +
                         ") than ground-truth (" + std::to_string(gt.rows()) + ") components");
  }
  const Matrix r = correlation_matrix(est, gt);
  const Matrix absr = r.cwiseAbs();
  std::vector<Index> perm(static_cast<std::size_t>(gt.rows()), -1);
  std::vector<bool> gt_used(static_cast<std::size_t>(gt.rows()), false);
  std::vector<bool> est_used(static_cast<std::size_t>(est.rows()), false);
  for (Index k = 0; k < gt.rows(); ++k) {
    Index bi = -1, bj = -1;
    double best = -1.0;
    for (Index i = 0; i < gt.rows(); ++i) {
      if (gt_used[static_cast<std::size_t>(i)]) continue;
      for (Index j = 0; j < est.rows(); ++j) {
        if (est_used[static_cast<std::size_t>(j)]) continue;
        if (absr(i, j) > best) {
          best = absr(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    perm[static_cast<std::size_t>(bi)] = bj;
    gt_used[static_cast<std::size_t>(bi)] = true;
    est_used[static_cast<std::size_t>(bj)] = true;
  }
  return detail::finish_match(r, std::move(perm));
}

/// Assignment of estimated rows (p x V) to ground-truth rows (Q x V)
/// maximizing the summed |Pearson r|. Exhaustive for Q <= 8, greedy beyond.
/// Signs are chosen so every matched correlation is non-negative.
inline MatchResult match_components(const Matrix& est, const Matrix& gt) {
  if (est.rows() < gt.rows()) {
    throw DimensionError("match_components: fewer estimated (" + std::to_string(est.rows()) +
                         ") than ground-truth (" + std::to_string(gt.rows()) + ") components");
  }
  if (gt.rows() > 8) return match_components_greedy(est, gt);
  const Matrix r = correlation_matrix(est, gt);
  const Matrix absr = r.cwiseAbs();
  std::vector<Index> current, best;
  std::vector<bool> used(static_cast<std::size_t>(est.rows()), false);
  double best_score = -1.0;
  detail::search_assignments(absr, 0, current, used, 0.0, best_score, best);
  return detail::finish_match(r, std::move(best));
}

/// Mean squared difference of min-max normalized signals, taking the better
/// of the two orientations of the estimate (x or 1 - x). Lower is better.
inline double pmse(const Eigen::Ref<const Eigen::RowVectorXd>& est,
                   const Eigen::Ref<const Eigen::RowVectorXd>& gt) {
  if (est.size() != gt.size()) throw DimensionError("pmse: length mismatch");
  const double glo = gt.minCoeff(), ghi = gt.maxCoeff();
  if (!(ghi > glo)) throw DegenerateError("pmse: constant ground truth");
  const Eigen::RowVectorXd g = (gt.array() - glo) / (ghi - glo);
  const double elo = est.minCoeff(), ehi = est.maxCoeff();
  const Eigen::RowVectorXd e = ehi > elo ? Eigen::RowVectorXd((est.array() - elo) / (ehi - elo))
                                         : Eigen::RowVectorXd::Zero(est.size());
  const double n = static_cast<double>(gt.size());
  const double direct = (e - g).squaredNorm() / n;
  const double flipped = ((1.0 - e.array()).matrix() - g).squaredNorm() / n;
  return std::min(direct, flipped);
}

/// Amari index of P = W_est * A_true, normalized to [0, 1]; zero iff P is a
/// scaled permutation.
inline double amari_index(const Matrix& w_est, const Matrix& a_true) {
  if (w_est.cols() != a_true.rows()) {
    throw DimensionError("amari_index: cannot multiply " + shape_str(w_est) + " by " +
                         shape_str(a_true));
  }
  const Matrix p = (w_est * a_true).cwiseAbs();
  if (p.rows() != p.cols()) throw DimensionError("amari_index: product is not square: " + shape_str(p));
  const Index n = p.rows();
  if (n < 2) return 0.0;
  const Vector row_max = p.rowwise().maxCoeff();
  const Eigen::RowVectorXd col_max = p.colwise().maxCoeff();
  if (row_max.minCoeff() <= 0.0 || col_max.minCoeff() <= 0.0) {
    throw NumericError("amari_index: W*A has an all-zero row or column");
  }
  double rows = 0.0, cols = 0.0;
  for (Index i = 0; i < n; ++i) rows += p.row(i).sum() / row_max[i] - 1.0;
  for (Index j = 0; j < n; ++j) cols += p.col(j).sum() / col_max[j] - 1.0;
  return (rows + cols) / (2.0 * static_cast<double>(n) * static_cast<double>(n - 1));
}

/// Score report document written by `ddica eval`.
inline Json score_report(const MatchResult& m, const std::vector<double>& pmse_values,
                         const double* amari) {
  Json j;
  j["mean_abs_corr"] = m.mean_abs_corr;
  j["per_component"] = m.correlations;
  j["permutation"] = m.permutation;
  j["signs"] = m.signs;
  j["pmse"] = pmse_values;
  j["amari"] = amari ? Json(*amari) : Json(nullptr);
  return j;
}

}  // namespace ddica
