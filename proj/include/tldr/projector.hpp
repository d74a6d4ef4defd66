/*
 * Copyright 2026 The tldr Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Linear projector from the joint vision-language space into a classifier's
// feature space, fitted by ridge regression with the modality gap constrained
// to the nullspace of W^T.
//
// Conventions: one embedding per row. X is n x d_clip, Y is n x d_feat,
// W is d_clip x d_feat, and the projection of a row z is z W + b^T.

#ifndef TLDR_PROJECTOR_HPP_
#define TLDR_PROJECTOR_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "tldr/embedding_store.hpp"
#include "tldr/errors.hpp"

namespace tldr {

template <typename Scalar>
struct GapEstimate {
  Vector<Scalar> g;
  Eigen::Index pair_count = 0;
  // Population mean/stddev of the per-pair gap norms ||z_I - z_T||.
  Scalar magnitude_mean = 0;
  Scalar magnitude_std = 0;
  // Population mean/stddev of cos(z_I - z_T, g).
  Scalar direction_mean = 0;
  Scalar direction_std = 0;
};

template <typename Scalar>
struct Projector {
  Matrix<Scalar> W;  // d_clip x d_feat
  Vector<Scalar> b;  // d_feat
  Scalar lambda = 0;
  std::optional<Vector<Scalar>> gap_used;
  // ||W^T g||_1 / d_feat against gap_used (or a diagnostic gap).
  std::optional<Scalar> ortho_residual;

  Eigen::Index d_clip() const { return W.rows(); }
  Eigen::Index d_feat() const { return W.cols(); }
};

struct RidgeConfig {
  std::vector<double> lambda_grid;
  bool constrained = true;

  // Grid must be non-empty, non-negative and strictly increasing.
  void validate() const {
    if (lambda_grid.empty()) throw UsageError("lambda grid is empty");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
      if (!(lambda_grid[i] >= 0) || !std::isfinite(lambda_grid[i])) {
        throw UsageError("lambda grid entries must be finite and non-negative");
      }
      if (i && !(lambda_grid[i] > lambda_grid[i - 1])) {
        throw UsageError("lambda grid must be strictly increasing");
      }
    }
  }
};

template <typename DerivedI, typename DerivedT>
GapEstimate<typename DerivedI::Scalar> estimate_gap(const Eigen::MatrixBase<DerivedI>& images,
                                                    const Eigen::MatrixBase<DerivedT>& texts) {
  using Scalar = typename DerivedI::Scalar;
  if (images.rows() != texts.rows() || images.cols() != texts.cols()) {
    throw PairingError("gap estimation needs row-aligned pairs: images are " +
                       std::to_string(images.rows()) + "x" + std::to_string(images.cols()) +
                       ", texts are " + std::to_string(texts.rows()) + "x" +
                       std::to_string(texts.cols()));
  }
  if (images.rows() == 0) throw EmptyInputError("gap estimation needs at least one pair");

  const Matrix<Scalar> diffs = images - texts;
  const Eigen::Index n = diffs.rows();
  GapEstimate<Scalar> est;
  est.pair_count = n;
  est.g = diffs.colwise().mean().transpose();

  const Vector<Scalar> norms = diffs.rowwise().norm();
  est.magnitude_mean = norms.mean();
  est.magnitude_std = std::sqrt((norms.array() - est.magnitude_mean).square().mean());

  const Scalar g_norm = est.g.norm();
  Vector<Scalar> cosines(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar denom = norms[i] * g_norm;
    cosines[i] = denom > 0 ? diffs.row(i).dot(est.g) / denom : Scalar(0);
  }
  est.direction_mean = cosines.mean();
  est.direction_std = std::sqrt((cosines.array() - est.direction_mean).square().mean());
  return est;
}

// ||W^T g||_1 / d_feat and ||W^T g||_inf.
template <typename Scalar>
struct OrthoDiagnostics {
  Scalar l1_per_dim = 0;
  Scalar linf = 0;
};

template <typename DerivedW, typename DerivedG>
OrthoDiagnostics<typename DerivedW::Scalar> ortho_diagnostics(
    const Eigen::MatrixBase<DerivedW>& W, const Eigen::MatrixBase<DerivedG>& g) {
  if (W.rows() != g.size()) {
    throw ShapeError("gap has dim " + std::to_string(g.size()) + " but W has " +
                     std::to_string(W.rows()) + " rows");
  }
  const auto wtg = (W.transpose() * g).eval();
  OrthoDiagnostics<typename DerivedW::Scalar> d;
  d.l1_per_dim = W.cols() ? wtg.template lpNorm<1>() / W.cols() : 0;
  d.linf = W.cols() ? wtg.template lpNorm<Eigen::Infinity>() : 0;
  return d;
}

template <typename Scalar, typename DerivedG>
OrthoDiagnostics<Scalar> ortho_diagnostics(const Projector<Scalar>& p,
                                           const Eigen::MatrixBase<DerivedG>& g) {
  return ortho_diagnostics(p.W, g);
}

// Closed-form constrained ridge:
//   A = X^T X + lambda I,  W~ = A^{-1} X^T Y,
//   W* = W~ - A^{-1} g (g^T A^{-1} g)^{-1} g^T W~,  b* = mean of rows of (Y - X W*).
// Without a gap W* = W~.
template <typename DerivedX, typename DerivedY>
Projector<typename DerivedX::Scalar> fit_projector(
    const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedY>& Y,
    const std::optional<Vector<typename DerivedX::Scalar>>& gap, typename DerivedX::Scalar lambda) {
  using Scalar = typename DerivedX::Scalar;
  if (X.rows() != Y.rows()) {
    throw PairingError("X has " + std::to_string(X.rows()) + " rows but Y has " +
                       std::to_string(Y.rows()));
  }
  if (X.rows() == 0) throw EmptyInputError("projector fitting needs at least one row");
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw DomainError("lambda must be >= 0");
  const Eigen::Index d = X.cols();
  if (gap) {
    if (gap->size() != d) {
      throw ShapeError("gap has dim " + std::to_string(gap->size()) + " but X has " +
                       std::to_string(d) + " columns");
    }
    if (!(gap->norm() > Scalar(1e-12))) throw DegenerateGapError("||g|| <= 1e-12");
  }

  Matrix<Scalar> A = X.transpose() * X;
  A.diagonal().array() += lambda;
  const Eigen::LLT<Matrix<Scalar>> llt(A);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("X^T X + lambda I is not positive definite (lambda = " +
                              std::to_string(lambda) + ")");
  }
  const Scalar rcond = llt.rcond();
  if (!(rcond > std::numeric_limits<Scalar>::epsilon() * static_cast<Scalar>(std::max<Eigen::Index>(d, 1)))) {
    throw SingularMatrixError("X^T X + lambda I is numerically singular (rcond = " +
                              std::to_string(static_cast<double>(rcond)) + ")");
  }

  Projector<Scalar> p;
  p.lambda = lambda;
  p.W = llt.solve(X.transpose() * Y);
  if (gap) {
    const Vector<Scalar>& g = *gap;
    const Vector<Scalar> Ag = llt.solve(g);
    const Scalar pivot = g.dot(Ag);
    if (!(pivot > 0) || !std::isfinite(pivot)) {
      throw DegenerateGapError("pivot g^T (X^T X + lambda I)^{-1} g vanished");
    }
    p.W -= Ag * ((g.transpose() * p.W) / pivot);
    // Second pass of the same correction removes rounding left by the first.
    p.W -= Ag * ((g.transpose() * p.W) / pivot);
    p.gap_used = g;
    p.ortho_residual = ortho_diagnostics(p.W, g).l1_per_dim;
  }
  p.b = (Y - X * p.W).colwise().mean().transpose();
  return p;
}

template <typename Scalar, typename DerivedZ>
Matrix<Scalar> project(const Projector<Scalar>& p, const Eigen::MatrixBase<DerivedZ>& Z) {
  if (Z.cols() != p.d_clip()) {
    throw ShapeError("input has dim " + std::to_string(Z.cols()) + " but projector expects " +
                     std::to_string(p.d_clip()));
  }
  Matrix<Scalar> out = Z * p.W;
  out.rowwise() += p.b.transpose();
  return out;
}

// ||z - z_hat||^2 / ||z||^2
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar nmse(const Eigen::MatrixBase<DerivedA>& z,
                               const Eigen::MatrixBase<DerivedB>& z_hat) {
  if (z.size() != z_hat.size()) {
    throw ShapeError("nmse of vectors with dims " + std::to_string(z.size()) + " and " +
                     std::to_string(z_hat.size()));
  }
  const auto ref = z.squaredNorm();
  if (!(ref > 0)) throw DegenerateReferenceError("nmse reference vector is zero");
  return (z - z_hat).squaredNorm() / ref;
}

// Mean of row-wise nmse(Y_i, Y_hat_i).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mean_nmse(const Eigen::MatrixBase<DerivedA>& Y,
                                    const Eigen::MatrixBase<DerivedB>& Y_hat) {
  if (Y.rows() != Y_hat.rows() || Y.cols() != Y_hat.cols()) {
    throw ShapeError("mean_nmse operands differ in shape");
  }
  if (Y.rows() == 0) throw EmptyInputError("mean_nmse of zero rows");
  typename DerivedA::Scalar total = 0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) total += nmse(Y.row(i), Y_hat.row(i));
  return total / static_cast<typename DerivedA::Scalar>(Y.rows());
}

// ||X W - Y||_F^2 + lambda ||W||_F^2, the objective the closed form minimizes
// over W (the bias is fitted afterwards).
template <typename DerivedX, typename DerivedY, typename DerivedW>
typename DerivedX::Scalar ridge_objective(const Eigen::MatrixBase<DerivedX>& X,
                                          const Eigen::MatrixBase<DerivedY>& Y,
                                          const Eigen::MatrixBase<DerivedW>& W,
                                          typename DerivedX::Scalar lambda) {
  return (X * W - Y).squaredNorm() + lambda * W.squaredNorm();
}

template <typename Scalar>
struct LambdaScore {
  Scalar lambda = 0;
  std::optional<Scalar> mean_nmse;  // absent when the fit failed
  std::string error;
};

template <typename Scalar>
struct LambdaSearchResult {
  Projector<Scalar> best;
  std::vector<LambdaScore<Scalar>> table;  // ordered as the grid
};

// Fits one projector per grid value on the training split and keeps the one
// with the lowest mean validation nmse. Ties go to the larger lambda.
// Grid points may be evaluated on up to `threads` threads; the outcome does
// not depend on the thread count.
template <typename Scalar>
LambdaSearchResult<Scalar> search_lambda(const Matrix<Scalar>& train_X, const Matrix<Scalar>& train_Y,
                                         const Matrix<Scalar>& val_X, const Matrix<Scalar>& val_Y,
                                         const std::optional<Vector<Scalar>>& gap,
                                         const RidgeConfig& cfg, int threads = 1) {
  cfg.validate();
  if (val_X.rows() == 0) throw EmptyInputError("lambda search needs a non-empty validation split");
  if (val_X.rows() != val_Y.rows()) throw PairingError("validation X and Y row counts differ");

  const std::size_t k = cfg.lambda_grid.size();
  std::vector<LambdaScore<Scalar>> table(k);
  std::vector<std::optional<Projector<Scalar>>> fits(k);
  const std::optional<Vector<Scalar>> used_gap = cfg.constrained ? gap : std::nullopt;
  if (cfg.constrained && !gap) throw UsageError("constrained search requires a gap vector");

  auto run = [&](std::size_t i) {
    table[i].lambda = static_cast<Scalar>(cfg.lambda_grid[i]);
    try {
      Projector<Scalar> p = fit_projector(train_X, train_Y, used_gap, table[i].lambda);
      table[i].mean_nmse = mean_nmse(val_Y, project(p, val_X));
      fits[i] = std::move(p);
    } catch (const Error& e) {
      table[i].error = e.what();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads > 0 ? threads : 1, 1, k);
  if (workers == 1) {
    for (std::size_t i = 0; i < k; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < k; i += workers) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < k; ++i) {
    if (!table[i].mean_nmse) continue;
    if (!best || *table[i].mean_nmse <= *table[*best].mean_nmse) best = i;
  }
  if (!best) {
    std::string msg = "every lambda in the grid failed";
    if (!table.empty()) msg += "; first error: " + table.front().error;
    throw SearchFailedError(msg);
  }
  return {std::move(*fits[*best]), std::move(table)};
}

// Persistence: W.npy, b.npy, meta.json and (when constrained) gap.npy in `dir`.
void save_projector(const Projector<double>& p, const std::filesystem::path& dir);
Projector<double> load_projector(const std::filesystem::path& dir);

void save_gap(const GapEstimate<double>& est, const std::vector<std::string>& pair_ids,
              const std::filesystem::path& dir);

// Hex SHA-256 of the gap vector's little-endian f64 bytes.
std::string gap_digest(const VectorXr& g);

}  // namespace tldr

#endif  // TLDR_PROJECTOR_HPP_
