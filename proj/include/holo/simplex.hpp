#pragma once

#include "holo/core.hpp"

#include <algorithm>

namespace holo {

/// min c^T x  subject to  A x = b, x >= 0.
struct LinearProgram {
  Mat A;
  Vec b;
  Vec c;
};

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline std::string to_string(LPStatus s) {
  switch (s) {
    case LPStatus::Optimal: return "optimal";
    case LPStatus::Infeasible: return "infeasible";
    case LPStatus::Unbounded: return "unbounded";
    case LPStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

struct LPResult {
  LPStatus status = LPStatus::Optimal;
  Vec x;            // primal solution
  Vec y;            // row duals: c - A^T y >= 0 at optimality
  double value = 0.0;
  double dual_value = 0.0;
  double duality_gap = 0.0;
  Vec farkas;       // when infeasible: A^T y <= 0 and b^T y > 0
  int iterations = 0;
  std::vector<Eigen::Index> basis;
};

struct SimplexOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-9;
  int max_iterations = 500000;
};

namespace detail {

class RevisedSimplex {
 public:
  RevisedSimplex(const LinearProgram& lp, const SimplexOptions& opt) : opt_(opt) {
    m_ = lp.A.rows();
    n_ = lp.A.cols();
    if (lp.b.size() != m_ || lp.c.size() != n_) throw InvalidInput("linear program has inconsistent sizes");
    sign_ = Vec::Ones(m_);
    for (Eigen::Index i = 0; i < m_; ++i)
      if (lp.b(i) < 0.0) sign_(i) = -1.0;
    A_.resize(m_, n_ + m_);
    A_.leftCols(n_) = sign_.asDiagonal() * lp.A;
    A_.rightCols(m_) = Mat::Identity(m_, m_);
    b_ = sign_.cwiseProduct(lp.b);
    c_ = lp.c;
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
  }

  LPResult solve() {
    LPResult res;
    // Phase 1
    Vec cost1 = Vec::Zero(n_ + m_);
    cost1.tail(m_).setOnes();
    const LPStatus s1 = iterate(cost1, n_ + m_, res.iterations);
    if (s1 == LPStatus::IterationLimit) return finish(res, s1);
    const double infeas = cost1.dot(full_x());
    if (infeas > opt_.feasibility_tol * (1.0 + b_.lpNorm<Eigen::Infinity>())) {
      res.status = LPStatus::Infeasible;
      res.farkas = sign_.cwiseProduct(duals(cost1));
      res.value = kInf;
      return res;
    }
    drive_out_artificials();
    // Phase 2
    Vec cost2 = Vec::Zero(n_ + m_);
    cost2.head(n_) = c_;
    const LPStatus s2 = iterate(cost2, n_, res.iterations);
    return finish(res, s2, &cost2);
  }

 private:
  Mat basis_matrix() const {
    Mat B(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) B.col(i) = A_.col(basis_[static_cast<std::size_t>(i)]);
    return B;
  }

  Vec basic_values() const { return basis_matrix().partialPivLu().solve(b_); }

  Vec full_x() const {
    Vec x = Vec::Zero(n_ + m_);
    const Vec xb = basic_values();
    for (Eigen::Index i = 0; i < m_; ++i) x(basis_[static_cast<std::size_t>(i)]) = xb(i);
    return x;
  }

  Vec duals(const Vec& cost) const {
    Vec cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
    return basis_matrix().transpose().partialPivLu().solve(cb);
  }

  // Bland's rule: lowest-index improving column enters, lowest-index tie leaves.
  LPStatus iterate(const Vec& cost, Eigen::Index allowed, int& iterations) {
    std::vector<bool> in_basis(static_cast<std::size_t>(n_ + m_), false);
    for (auto j : basis_) in_basis[static_cast<std::size_t>(j)] = true;
    while (true) {
      if (iterations >= opt_.max_iterations) return LPStatus::IterationLimit;
      const Mat B = basis_matrix();
      const Eigen::PartialPivLU<Mat> lu(B);
      const Vec xb = lu.solve(b_);
      Vec cb(m_);
      for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
      const Vec y = B.transpose().partialPivLu().solve(cb);
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (in_basis[static_cast<std::size_t>(j)]) continue;
        const double d = cost(j) - A_.col(j).dot(y);
        const double scale = 1.0 + std::abs(cost(j));
        if (d < -opt_.optimality_tol * scale) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LPStatus::Optimal;
      const Vec u = lu.solve(A_.col(enter));
      Eigen::Index leave = -1;
      double best = kInf;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (u(i) <= opt_.pivot_tol) continue;
        const double ratio = std::max(0.0, xb(i)) / u(i);
        if (leave < 0) {
          best = ratio;
          leave = i;
          continue;
        }
        const bool better = ratio < best - 1e-14 * (1.0 + best);
        const bool tie = !better && ratio <= best + 1e-14 * (1.0 + best);
        if (better || (tie && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
          if (better) best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return LPStatus::Unbounded;
      in_basis[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)])] = false;
      basis_[static_cast<std::size_t>(leave)] = enter;
      in_basis[static_cast<std::size_t>(enter)] = true;
      ++iterations;
    }
  }

  void drive_out_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      const Mat B = basis_matrix();
      Vec e = Vec::Zero(m_);
      e(i) = 1.0;
      const Vec row = B.transpose().partialPivLu().solve(e);
      const Vec r = A_.leftCols(n_).transpose() * row;
      Eigen::Index pick = -1;
      double best = opt_.pivot_tol;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::find(basis_.begin(), basis_.end(), j) != basis_.end()) continue;
        if (std::abs(r(j)) > best) best = std::abs(r(j)), pick = j;
      }
      if (pick >= 0) basis_[static_cast<std::size_t>(i)] = pick;
    }
  }

  LPResult& finish(LPResult& res, LPStatus status, const Vec* cost = nullptr) {
    res.status = status;
    const Vec x = full_x();
    res.x = x.head(n_).cwiseMax(0.0);
    res.basis = basis_;
    if (cost) {
      const Vec y = duals(*cost);
      res.y = sign_.cwiseProduct(y);
      res.value = c_.dot(res.x);
      res.dual_value = b_.dot(y);
      res.duality_gap = std::abs(res.value - res.dual_value);
    }
    return res;
  }

  SimplexOptions opt_;
  Eigen::Index m_ = 0, n_ = 0;
  Mat A_;
  Vec b_, c_, sign_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace detail

inline LPResult solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {}) {
  return detail::RevisedSimplex(lp, opt).solve();
}

}  // namespace holo
