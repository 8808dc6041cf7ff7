#include "roylab/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include <Eigen/IterativeLinearSolvers>

#include "roylab/types.hpp"

namespace roylab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void append_row_key(std::string& key, const SparseRows& M, Eigen::Index row) {
  for (SparseRows::InnerIterator it(M, row); it; ++it) {
    if (it.value() == 0.0) continue;
    const auto col = static_cast<std::int32_t>(it.col());
    const double v = it.value();
    char buf[sizeof col + sizeof v];
    std::memcpy(buf, &col, sizeof col);
    std::memcpy(buf + sizeof col, &v, sizeof v);
    key.append(buf, sizeof buf);
  }
}

void scatter_row(Eigen::MatrixXd& dense, Eigen::Index cell, const SparseRows& M, Eigen::Index row) {
  for (SparseRows::InnerIterator it(M, row); it; ++it) dense(cell, it.col()) = it.value();
}

}  // namespace

LeastSquaresResult ordered_least_squares(Eigen::MatrixXd A, Eigen::VectorXd b, double tol) {
  const Eigen::Index m = A.rows(), n = A.cols();
  if (b.size() != m) throw EstimationError("least squares: response length mismatch");
  LeastSquaresResult out;
  out.coef = Eigen::VectorXd::Constant(n, kNaN);

  std::vector<Eigen::Index> kept;
  Eigen::VectorXd workspace(std::max<Eigen::Index>(n, 1));
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double original = A.col(j).norm();
    if (original == 0.0) {
      out.empty.push_back(static_cast<int>(j));
      continue;
    }
    if (r >= m || A.col(j).segment(r, m - r).norm() <= tol * original) {
      out.dropped.push_back(static_cast<int>(j));
      continue;
    }
    Eigen::VectorXd essential(m - r - 1);
    double tau = 0.0, beta = 0.0;
    A.col(j).segment(r, m - r).makeHouseholder(essential, tau, beta);
    if (j + 1 < n)
      A.block(r, j + 1, m - r, n - j - 1).applyHouseholderOnTheLeft(essential, tau, workspace.data());
    b.segment(r, m - r).applyHouseholderOnTheLeft(essential, tau, workspace.data());
    A(r, j) = beta;
    kept.push_back(j);
    ++r;
  }
  out.rank = static_cast<int>(r);
  out.ssr = r < m ? b.segment(r, m - r).squaredNorm() : 0.0;
  for (Eigen::Index l = r - 1; l >= 0; --l) {
    double acc = b(l);
    for (Eigen::Index l2 = l + 1; l2 < r; ++l2) acc -= A(l, kept[l2]) * out.coef(kept[l2]);
    out.coef(kept[l]) = acc / A(l, kept[l]);
  }
  return out;
}

CellData collapse_rows(const SparseRows& X, const Eigen::VectorXd& y, const SparseRows* Z) {
  const Eigen::Index n = X.rows();
  if (y.size() != n || (Z && Z->rows() != n)) throw EstimationError("design rows do not align");
  std::unordered_map<std::string, int> index;
  std::vector<Eigen::Index> first_row;
  std::vector<int> cell_of(n);
  std::string key;
  for (Eigen::Index i = 0; i < n; ++i) {
    key.clear();
    append_row_key(key, X, i);
    if (Z) {
      key.push_back('|');
      append_row_key(key, *Z, i);
    }
    auto [it, inserted] = index.try_emplace(key, static_cast<int>(first_row.size()));
    if (inserted) first_row.push_back(i);
    cell_of[i] = it->second;
  }

  const auto n_cells = static_cast<Eigen::Index>(first_row.size());
  CellData cells;
  cells.X = Eigen::MatrixXd::Zero(n_cells, X.cols());
  if (Z) cells.Z = Eigen::MatrixXd::Zero(n_cells, Z->cols());
  cells.weight = Eigen::VectorXd::Zero(n_cells);
  cells.mean_y = Eigen::VectorXd::Zero(n_cells);
  for (Eigen::Index c = 0; c < n_cells; ++c) {
    scatter_row(cells.X, c, X, first_row[c]);
    if (Z) scatter_row(cells.Z, c, *Z, first_row[c]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    cells.weight(cell_of[i]) += 1.0;
    cells.mean_y(cell_of[i]) += y(i);
  }
  cells.mean_y.array() /= cells.weight.array();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = y(i) - cells.mean_y(cell_of[i]);
    cells.within_ss += d * d;
  }
  return cells;
}

FitResult fit_ols(const SparseRows& X, const Eigen::VectorXd& y, double tol) {
  if (X.rows() == 0) throw EstimationError("no observations");
  const CellData cells = collapse_rows(X, y);
  const Eigen::VectorXd sw = cells.weight.cwiseSqrt();
  FitResult fit;
  fit.ls = ordered_least_squares(sw.asDiagonal() * cells.X, sw.cwiseProduct(cells.mean_y), tol);
  if (fit.ls.rank == 0) throw EstimationError("design has no estimable column");
  fit.n_obs = static_cast<std::size_t>(X.rows());
  const double ssr = fit.ls.ssr + cells.within_ss;
  const double dof = static_cast<double>(fit.n_obs) - fit.ls.rank;
  fit.residual_variance = dof > 0 ? ssr / dof : kNaN;
  return fit;
}

FitResult fit_2sls(const SparseRows& X, const SparseRows& Z, const Eigen::VectorXd& y,
                   double tol) {
  if (X.rows() == 0) throw EstimationError("no observations");
  const CellData cells = collapse_rows(X, y, &Z);
  const Eigen::VectorXd sw = cells.weight.cwiseSqrt();
  const Eigen::MatrixXd Zw = sw.asDiagonal() * cells.Z;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Zw.rows(), Zw.cols());
  qr.setThreshold(tol);
  qr.compute(Zw);
  const Eigen::Index r = qr.rank();
  if (r == 0) throw EstimationError("instrument matrix has rank zero");

  const Eigen::Index p = X.cols();
  Eigen::MatrixXd M(cells.X.rows(), p + 1);
  M.leftCols(p) = sw.asDiagonal() * cells.X;
  M.col(p) = sw.cwiseProduct(cells.mean_y);
  const Eigen::VectorXd col_ss = M.leftCols(p).colwise().squaredNorm().transpose();
  auto q = qr.householderQ();
  q.setLength(r);
  M.applyOnTheLeft(q.adjoint());

  FitResult fit;
  fit.ls = ordered_least_squares(M.topLeftCorner(r, p), M.col(p).head(r), tol);
  if (fit.ls.rank == 0) throw EstimationError("no column is identified by the instruments");
  fit.n_obs = static_cast<std::size_t>(X.rows());
  fit.first_stage_r2.resize(p);
  for (Eigen::Index j = 0; j < p; ++j)
    fit.first_stage_r2[j] = col_ss(j) > 0 ? M.col(j).head(r).squaredNorm() / col_ss(j) : kNaN;

  // structural residuals y - X b on the original rows
  Eigen::VectorXd b = fit.ls.coef;
  for (Eigen::Index j = 0; j < p; ++j)
    if (std::isnan(b(j))) b(j) = 0.0;
  const Eigen::VectorXd resid = cells.mean_y - cells.X * b;
  const double ssr = cells.weight.dot(resid.cwiseAbs2()) + cells.within_ss;
  const double dof = static_cast<double>(fit.n_obs) - fit.ls.rank;
  fit.residual_variance = dof > 0 ? ssr / dof : kNaN;
  return fit;
}

FitResult fit_within(const SparseRows& X, const Eigen::VectorXd& y, std::span<const int> groups,
                     double tol) {
  const Eigen::Index n = X.rows(), p = X.cols();
  if (y.size() != n || static_cast<Eigen::Index>(groups.size()) != n)
    throw EstimationError("design rows do not align");
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return groups[a] < groups[b]; });

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(p);
  double yy = 0.0;
  std::size_t used_rows = 0;
  int used_groups = 0;
  Eigen::VectorXd sx = Eigen::VectorXd::Zero(p);
  std::vector<Eigen::Index> touched;
  std::vector<char> is_touched(p, 0);

  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() && groups[order[end]] == groups[order[start]]) ++end;
    const auto count = static_cast<double>(end - start);
    if (end - start >= 2) {
      double ybar = 0.0;
      for (std::size_t i = start; i < end; ++i) ybar += y(order[i]);
      ybar /= count;
      for (std::size_t i = start; i < end; ++i) {
        const Eigen::Index row = order[i];
        const double yt = y(row) - ybar;
        yy += yt * yt;
        for (SparseRows::InnerIterator it(X, row); it; ++it) {
          const Eigen::Index j = it.col();
          h(j) += it.value() * yt;
          sx(j) += it.value();
          if (!is_touched[j]) {
            is_touched[j] = 1;
            touched.push_back(j);
          }
          for (SparseRows::InnerIterator it2(X, row); it2; ++it2)
            G(j, it2.col()) += it.value() * it2.value();
        }
      }
      for (Eigen::Index j : touched)
        for (Eigen::Index l : touched) G(j, l) -= sx(j) * sx(l) / count;
      used_rows += end - start;
      ++used_groups;
    }
    for (Eigen::Index j : touched) {
      sx(j) = 0.0;
      is_touched[j] = 0;
    }
    touched.clear();
    start = end;
  }
  if (used_groups == 0) throw EstimationError("no group has more than one observation");

  // in-order pivot check on the normal equations
  FitResult fit;
  fit.ls.coef = Eigen::VectorXd::Constant(p, kNaN);
  std::vector<Eigen::Index> kept;
  Eigen::MatrixXd Lk = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double gjj = G(j, j);
    if (!(gjj > tol)) {
      fit.ls.empty.push_back(static_cast<int>(j));
      continue;
    }
    const auto r = static_cast<Eigen::Index>(kept.size());
    Eigen::VectorXd w(r);
    for (Eigen::Index l = 0; l < r; ++l) {
      double acc = G(kept[l], j);
      for (Eigen::Index m = 0; m < l; ++m) acc -= Lk(l, m) * w(m);
      w(l) = acc / Lk(l, l);
    }
    const double pivot = gjj - w.squaredNorm();
    if (pivot <= tol * gjj) {
      fit.ls.dropped.push_back(static_cast<int>(j));
      continue;
    }
    Lk.row(r).head(r) = w.transpose();
    Lk(r, r) = std::sqrt(pivot);
    kept.push_back(j);
  }
  const auto r = static_cast<Eigen::Index>(kept.size());
  if (r == 0) throw EstimationError("no column varies within groups");
  Eigen::MatrixXd Gk(r, r);
  Eigen::VectorXd hk(r);
  for (Eigen::Index a = 0; a < r; ++a) {
    hk(a) = h(kept[a]);
    for (Eigen::Index b = 0; b < r; ++b) Gk(a, b) = G(kept[a], kept[b]);
  }
  Eigen::ConjugateGradient<Eigen::MatrixXd, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(1e-14);
  cg.setMaxIterations(static_cast<Eigen::Index>(20 * r));
  cg.compute(Gk);
  Eigen::VectorXd bk = cg.solve(hk);
  if (cg.info() != Eigen::Success || !bk.allFinite()) bk = Gk.ldlt().solve(hk);

  for (Eigen::Index a = 0; a < r; ++a) fit.ls.coef(kept[a]) = bk(a);
  fit.ls.rank = static_cast<int>(r);
  fit.ls.ssr = std::max(0.0, yy - bk.dot(hk));
  fit.n_obs = used_rows;
  fit.n_groups = used_groups;
  const double dof = static_cast<double>(used_rows) - used_groups - static_cast<double>(r);
  fit.residual_variance = dof > 0 ? fit.ls.ssr / dof : kNaN;
  return fit;
}

}  // namespace roylab
