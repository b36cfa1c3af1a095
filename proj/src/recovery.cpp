#include "rumorloc/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rumorloc/errors.hpp"
#include "rumorloc/format.hpp"

namespace rumorloc {

Eigen::MatrixXd SelectionMatrix::to_dense() const {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(rows, cols);
  for (int r = 0; r < rows; ++r) phi(r, kept_indices[static_cast<std::size_t>(r)]) = 1.0;
  return phi;
}

Eigen::VectorXd SelectionMatrix::apply(const Eigen::VectorXd& full) const {
  if (full.size() != cols) throw ArgumentError("SelectionMatrix::apply: length mismatch");
  Eigen::VectorXd out(rows);
  for (int r = 0; r < rows; ++r) out(r) = full(kept_indices[static_cast<std::size_t>(r)]);
  return out;
}

SelectionMatrix build_selection_matrix(const std::vector<char>& mask) {
  if (mask.empty()) throw ArgumentError("build_selection_matrix: empty mask");
  SelectionMatrix sel;
  sel.cols = static_cast<int>(mask.size());
  for (int i = 0; i < sel.cols; ++i) {
    if (mask[static_cast<std::size_t>(i)]) sel.kept_indices.push_back(i);
  }
  sel.rows = static_cast<int>(sel.kept_indices.size());
  if (sel.rows == 0) {
    throw ArgumentError("build_selection_matrix: no present entries, nothing to anchor recovery");
  }
  return sel;
}

double SparsifyingBasis::orthonormality_defect() const {
  const Eigen::MatrixXd gram = psi.transpose() * psi;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

SparsifyingBasis dct_basis(int K) {
  if (K < 1) throw ArgumentError("dct_basis: K must be at least 1");
  SparsifyingBasis b;
  b.psi.resize(K, K);
  const double pi = 3.14159265358979323846;
  for (int j = 0; j < K; ++j) {
    const double scale = j == 0 ? std::sqrt(1.0 / K) : std::sqrt(2.0 / K);
    for (int i = 0; i < K; ++i) {
      b.psi(i, j) = scale * std::cos(pi * (2.0 * i + 1.0) * j / (2.0 * K));
    }
  }
  return b;
}

SparsifyingBasis identity_basis(int K) {
  if (K < 1) throw ArgumentError("identity_basis: K must be at least 1");
  SparsifyingBasis b;
  b.psi = Eigen::MatrixXd::Identity(K, K);
  return b;
}

namespace {

// Dense two-phase simplex on min 1.z, A z = b, z >= 0 with Bland's rule
// (smallest eligible index), which cannot cycle. The tableau carries the
// cost row as its last row.
class SimplexTableau {
public:
  SimplexTableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
      : rows_(static_cast<int>(a.rows())), structural_(static_cast<int>(a.cols())) {
    tab_.resize(rows_ + 1, structural_ + rows_ + 1);
    tab_.setZero();
    tab_.block(0, 0, rows_, structural_) = a;
    tab_.col(structural_ + rows_).head(rows_) = b;
    // A row with negative rhs flips sign before the artificial identity is
    // attached, so every starting artificial has coefficient +1 and value
    // b_i >= 0; flipping afterwards would leave those artificials negative.
    for (int i = 0; i < rows_; ++i) {
      if (tab_(i, structural_ + rows_) < 0.0) tab_.row(i) = -tab_.row(i);
    }
    tab_.block(0, structural_, rows_, rows_) = Eigen::MatrixXd::Identity(rows_, rows_);
    basis_.resize(static_cast<std::size_t>(rows_));
    for (int i = 0; i < rows_; ++i) basis_[static_cast<std::size_t>(i)] = structural_ + i;
  }

  // Phase 1: minimize the sum of artificials. Returns the attained value.
  double phase1(int max_iter) {
    // cost = sum of artificial columns, priced out for the artificial basis
    tab_.row(rows_).setZero();
    for (int j = 0; j < structural_ + rows_ + 1; ++j) {
      double s = 0.0;
      for (int i = 0; i < rows_; ++i) s += tab_(i, j);
      if (j >= structural_ && j < structural_ + rows_) continue;  // artificial cols stay 0
      tab_(rows_, j) = -s;
    }
    iterate(structural_ + rows_, max_iter, "phase 1");
    return -tab_(rows_, structural_ + rows_);
  }

  // Pivot remaining artificial basics out; drops genuinely redundant rows.
  void purge_artificials() {
    std::vector<int> keep;
    for (int i = 0; i < rows_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < structural_) {
        keep.push_back(i);
        continue;
      }
      int enter = -1;
      for (int j = 0; j < structural_; ++j) {
        if (std::abs(tab_(i, j)) > kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter >= 0) {
        pivot(i, enter);
        keep.push_back(i);
      }
      // else: all-zero structural row with zero rhs -> redundant, drop
    }
    if (static_cast<int>(keep.size()) != rows_) {
      Eigen::MatrixXd next(static_cast<int>(keep.size()) + 1, tab_.cols());
      std::vector<int> next_basis;
      for (std::size_t r = 0; r < keep.size(); ++r) {
        next.row(static_cast<int>(r)) = tab_.row(keep[r]);
        next_basis.push_back(basis_[static_cast<std::size_t>(keep[r])]);
      }
      next.row(static_cast<int>(keep.size())) = tab_.row(rows_);
      tab_.swap(next);
      basis_.swap(next_basis);
      rows_ = static_cast<int>(keep.size());
    }
  }

  // Phase 2: minimize the unit-cost structural objective.
  void phase2(int max_iter) {
    tab_.row(rows_).setZero();
    for (int j = 0; j < structural_; ++j) tab_(rows_, j) = 1.0;
    for (int i = 0; i < rows_; ++i) {
      const int bj = basis_[static_cast<std::size_t>(i)];
      if (bj < structural_) tab_.row(rows_) -= tab_.row(i);  // c_b = 1 for all structurals
    }
    iterate(structural_, max_iter, "phase 2");
  }

  Eigen::VectorXd structural_solution() const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(structural_);
    for (int i = 0; i < rows_; ++i) {
      const int bj = basis_[static_cast<std::size_t>(i)];
      if (bj < structural_) z(bj) = tab_(i, structural_orig_cols());
    }
    return z;
  }

  const std::vector<int>& basis() const { return basis_; }
  int structural_count() const { return structural_; }

private:
  static constexpr double kCostEps = 1e-9;
  static constexpr double kPivotEps = 1e-11;

  int structural_orig_cols() const { return static_cast<int>(tab_.cols()) - 1; }

  void pivot(int row, int col) {
    tab_.row(row) /= tab_(row, col);
    for (int i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      const double f = tab_(i, col);
      if (f != 0.0) tab_.row(i) -= f * tab_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  void iterate(int eligible_cols, int max_iter, const char* phase) {
    const int rhs = structural_orig_cols();
    // Dantzig pricing (most negative reduced cost) moves fast; Bland's rule
    // (smallest eligible index) cannot cycle but crawls, so it only takes
    // over after a long run of degenerate pivots and hands back as soon as
    // the objective moves again.
    std::vector<char> shunned(static_cast<std::size_t>(eligible_cols), 0);
    const int stall_limit = 4 * (rows_ + 8);
    int stall = 0;
    for (int it = 0; it < max_iter; ++it) {
      const bool bland = stall >= stall_limit;
      int enter = -1;
      double most_negative = -kCostEps;
      double worst_shunned = 0.0;
      for (int j = 0; j < eligible_cols; ++j) {
        const double rc = tab_(rows_, j);
        if (shunned[static_cast<std::size_t>(j)]) {
          worst_shunned = std::min(worst_shunned, rc);
          continue;
        }
        if (rc < most_negative) {
          enter = j;
          if (bland) break;
          most_negative = rc;
        }
      }
      if (enter < 0) {
        // Every improving column was shunned since the last pivot. If the
        // best of them is priced at noise level this is optimality; if it is
        // strongly negative the solve is wedged short of the optimum, and
        // reporting the current vertex would hand back a silently wrong
        // answer.
        if (worst_shunned < -1e-6) {
          throw ConvergenceError(std::string("basis pursuit: no usable pivot in ") + phase);
        }
        return;  // optimal
      }

      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows_; ++i) {
        const double a = tab_(i, enter);
        if (a > kPivotEps) {
          const double ratio = tab_(i, rhs) / a;
          if (ratio < best_ratio - 1e-15 ||
              (std::abs(ratio - best_ratio) <= 1e-15 &&
               (leave < 0 || basis_[static_cast<std::size_t>(i)] <
                                 basis_[static_cast<std::size_t>(leave)]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) {
        // True unboundedness is impossible (both phase objectives are sums of
        // nonnegative variables), so a column with no usable pivot entry is a
        // casualty of the current basis representation. That is a transient
        // property: the next pivot can hand it usable entries again, so it is
        // only skipped until then, never retired outright.
        shunned[static_cast<std::size_t>(enter)] = 1;
        continue;
      }
      pivot(leave, enter);
      std::fill(shunned.begin(), shunned.end(), char{0});
      stall = best_ratio <= kPivotEps ? stall + 1 : 0;
    }
    throw ConvergenceError(std::string("basis pursuit: iteration cap reached in ") + phase);
  }

  Eigen::MatrixXd tab_;
  std::vector<int> basis_;
  int rows_;
  int structural_;
};

}  // namespace

Eigen::VectorXd basis_pursuit(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double tol,
                              int max_iter) {
  const int L = static_cast<int>(theta.rows());
  const int K = static_cast<int>(theta.cols());
  if (y.size() != L) throw ArgumentError("basis_pursuit: rhs length mismatch");
  if (L == 0 || K == 0) throw ArgumentError("basis_pursuit: empty system");
  if (!(tol > 0.0)) throw ArgumentError("basis_pursuit: tol must be positive");
  if (max_iter <= 0) max_iter = 200 * (L + 2 * K + 10);

  // Split x = u - w, u, w >= 0; minimize 1.u + 1.w.
  Eigen::MatrixXd a(L, 2 * K);
  a.leftCols(K) = theta;
  a.rightCols(K) = -theta;

  SimplexTableau tableau(a, y);
  const double infeas = tableau.phase1(max_iter);
  const double feas_scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if (infeas > tol * feas_scale) {
    throw InfeasibleError("basis pursuit: constraints are inconsistent (phase-1 gap " +
                          format_double(infeas) + ")");
  }
  tableau.purge_artificials();
  tableau.phase2(max_iter);

  // Re-solve the final basis against the original columns to shed the
  // round-off accumulated by tableau updates.
  const auto& basis = tableau.basis();
  const int rows_left = static_cast<int>(basis.size());
  Eigen::MatrixXd basis_cols(L, rows_left);
  for (int i = 0; i < rows_left; ++i) {
    basis_cols.col(i) = a.col(basis[static_cast<std::size_t>(i)]);
  }
  const Eigen::VectorXd zb = basis_cols.colPivHouseholderQr().solve(y);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(K);
  for (int i = 0; i < rows_left; ++i) {
    const int j = basis[static_cast<std::size_t>(i)];
    if (j < K) {
      x(j) += zb(i);
    } else {
      x(j - K) -= zb(i);
    }
  }

  const double residual = (theta * x - y).cwiseAbs().maxCoeff();
  if (residual > tol * feas_scale) {
    throw ConvergenceError("basis pursuit: residual " + format_double(residual) +
                           " above tolerance after refinement");
  }
  return x;
}

ObservationVector cs_recover(const ObservationVector& obs, const SparsifyingBasis& basis) {
  const int K = static_cast<int>(obs.values.size());
  if (K == 0) throw ArgumentError("cs_recover: empty observation");
  if (basis.size() != K) throw ArgumentError("cs_recover: basis size mismatch");
  if (obs.fully_present()) return obs;

  const SelectionMatrix sel = build_selection_matrix(obs.mask);
  Eigen::VectorXd y(sel.rows);
  Eigen::MatrixXd theta(sel.rows, K);
  for (int r = 0; r < sel.rows; ++r) {
    const int i = sel.kept_indices[static_cast<std::size_t>(r)];
    y(r) = obs.values[static_cast<std::size_t>(i)];
    theta.row(r) = basis.psi.row(i);
  }

  const Eigen::VectorXd x = basis_pursuit(theta, y);
  const Eigen::VectorXd full = basis.psi * x;

  ObservationVector out = obs;
  for (int i = 0; i < K; ++i) {
    if (!out.mask[static_cast<std::size_t>(i)]) {
      out.values[static_cast<std::size_t>(i)] = full(i);
      out.mask[static_cast<std::size_t>(i)] = 1;
    }
    // present entries stay bit-exact: they were constraints, not estimates
  }
  return out;
}

ObservationVector cs_recover(const ObservationVector& obs) {
  return cs_recover(obs, dct_basis(static_cast<int>(obs.values.size())));
}

void PartialDelayMatrix::validate() const {
  if (m < 1 || n < 1) throw ArgumentError("PartialDelayMatrix: m and n must be at least 1");
  if (A.rows() != m || A.cols() != m || B.rows() != n || B.cols() != n || c.size() != m ||
      d.size() != n) {
    throw ArgumentError("PartialDelayMatrix: block dimensions inconsistent");
  }
  if (!A.isApprox(A.transpose(), 1e-9) || !B.isApprox(B.transpose(), 1e-9)) {
    throw ValidationError("PartialDelayMatrix: A and B must be symmetric");
  }
  if ((A.array() < 0.0).any() || (B.array() < 0.0).any() || (c.array() < 0.0).any() ||
      (d.array() < 0.0).any() || e < 0.0) {
    throw ValidationError("PartialDelayMatrix: delays must be nonnegative");
  }
}

Eigen::MatrixXd PartialDelayMatrix::assemble(const Eigen::MatrixXd& X) const {
  if (X.rows() != m || X.cols() != n) throw ArgumentError("assemble: X block dimension mismatch");
  Eigen::MatrixXd full(m + 1 + n, m + 1 + n);
  full.block(0, 0, m, m) = A;
  full.block(0, m, m, 1) = c;
  full.block(0, m + 1, m, n) = X;
  full.block(m, 0, 1, m) = c.transpose();
  full(m, m) = e;
  full.block(m, m + 1, 1, n) = d.transpose();
  full.block(m + 1, 0, n, m) = X.transpose();
  full.block(m + 1, m, n, 1) = d;
  full.block(m + 1, m + 1, n, n) = B;
  return full;
}

DnCompletion dn_complete(const PartialDelayMatrix& p, const Eigen::MatrixXd& expected_delay,
                         double tol, int max_iter, DnMode mode) {
  p.validate();
  if (expected_delay.rows() != p.m || expected_delay.cols() != p.n) {
    throw ArgumentError("dn_complete: expected-delay matrix must be m x n");
  }
  if ((expected_delay.array() < 0.0).any()) {
    throw ArgumentError("dn_complete: expected delays must be nonnegative");
  }
  if ((p.c.array() <= 0.0).any() || (p.d.array() <= 0.0).any()) {
    throw ArgumentError("dn_complete: overlap delays c and d must be strictly positive");
  }
  if (!(tol > 0.0) || max_iter < 1) throw ArgumentError("dn_complete: bad tol or max_iter");

  Eigen::MatrixXd fit = expected_delay;
  if (mode == DnMode::normalized) {
    fit.array() /= (p.c * p.d.transpose()).array();
  }
  if (fit.norm() == 0.0) {
    throw DegenerateInputError("dn_complete: expected-delay matrix is zero");
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Constant(p.n, 1.0 / std::sqrt(static_cast<double>(p.n)));
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(p.m);
  int used = 0;
  double rel = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd alpha_next = fit * beta / beta.squaredNorm();
    if (alpha_next.norm() == 0.0) {
      throw DegenerateInputError("dn_complete: alpha collapsed to zero");
    }
    const Eigen::VectorXd beta_next = fit.transpose() * alpha_next / alpha_next.squaredNorm();
    if (beta_next.norm() == 0.0) {
      throw DegenerateInputError("dn_complete: beta collapsed to zero");
    }
    rel = std::max((alpha_next - alpha).norm() / alpha_next.norm(),
                   (beta_next - beta).norm() / beta_next.norm());
    alpha = alpha_next;
    beta = beta_next;
    used = it;
    if (it > 1 && rel < tol) break;
  }
  const double residual = (alpha * beta.transpose() - fit).norm() / fit.norm();
  if (rel >= tol) {
    throw ConvergenceError("dn_complete: no fixed point within " + std::to_string(max_iter) +
                           " iterations (residual " + format_double(residual) + ")");
  }

  DnCompletion out;
  out.alpha = alpha;
  out.beta = beta;
  out.iterations = used;
  out.residual = residual;
  out.X = (alpha.array() * p.c.array()).matrix() * (p.d.array() * beta.array()).matrix().transpose();
  return out;
}

ConditionLoad condition_check_and_load(const PartialDelayMatrix& p,
                                       const Eigen::MatrixXd& sample_cov) {
  p.validate();
  if (sample_cov.rows() != sample_cov.cols() || sample_cov.rows() < 1) {
    throw ArgumentError("condition_check_and_load: covariance must be square and nonempty");
  }
  if (!sample_cov.isApprox(sample_cov.transpose(), 1e-9)) {
    throw ArgumentError("condition_check_and_load: covariance must be symmetric");
  }
  const Eigen::MatrixXd sym = 0.5 * (sample_cov + sample_cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  double lmin = es.eigenvalues().minCoeff();
  if (lmin < -1e-9 * std::max(1.0, std::abs(lmax))) {
    throw ArgumentError("condition_check_and_load: covariance must be positive semidefinite");
  }
  lmin = std::max(lmin, 0.0);

  ConditionLoad out;
  out.cond_before = lmin > 0.0 ? lmax / lmin
                               : (lmax > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);

  // cond(cov + delta I) < 2  <=>  delta > lmax - 2 lmin; search the boundary.
  // This covers the all-zero covariance too: any positive load conditions it.
  double delta = 0.0;
  if (!(lmax < 2.0 * lmin)) {
    const auto feasible = [&](double candidate) {
      return lmax + candidate < 2.0 * (lmin + candidate);
    };
    double lo = 0.0;
    double hi = std::max(1.0, lmax);
    while (!feasible(hi)) hi *= 2.0;
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    delta = hi;
  }

  out.delta = delta;
  out.cond_after = (lmax + delta) / (lmin + delta);
  out.loaded = p;
  out.loaded.A.diagonal().array() += delta;
  out.loaded.e += delta;
  out.loaded.B.diagonal().array() += delta;
  return out;
}

void RenewalParams::validate() const {
  const auto rows = transit_mean.rows();
  const auto cols = transit_mean.cols();
  if (rows < 1 || cols < 1) throw ArgumentError("RenewalParams: empty transit moments");
  if (transit_var.rows() != rows || transit_var.cols() != cols || idle_mean.size() != rows ||
      idle_var.size() != rows) {
    throw ArgumentError("RenewalParams: moment dimensions inconsistent");
  }
  if ((transit_mean.array() <= 0.0).any()) {
    throw ArgumentError("RenewalParams: transit means must be positive");
  }
  if ((transit_var.array() < 0.0).any() || (idle_var.array() < 0.0).any() ||
      (idle_mean.array() < 0.0).any()) {
    throw ArgumentError("RenewalParams: idle means and all variances must be nonnegative");
  }
}

double mean_residual_life(double mean, double variance) {
  if (!(mean > 0.0)) throw ArgumentError("mean_residual_life: mean must be positive");
  if (variance < 0.0) throw ArgumentError("mean_residual_life: variance must be nonnegative");
  return 0.5 * mean * (1.0 + variance / (mean * mean));
}

double renewal_expected_residual(const RenewalParams& r, int i, int j) {
  r.validate();
  if (i < 0 || i >= r.transit_mean.rows() || j < 0 || j >= r.transit_mean.cols()) {
    throw ArgumentError("renewal_expected_residual: pair index out of range");
  }
  const double mean = r.transit_mean(i, j) + r.idle_mean(i);
  const double variance = r.transit_var(i, j) + r.idle_var(i);
  return mean_residual_life(mean, variance);
}

RenewalSim simulate_renewal_residual(const std::function<double(Rng&)>& lifetime, double horizon,
                                     std::uint64_t inspections, std::uint64_t seed) {
  if (!(horizon > 0.0)) throw ArgumentError("simulate_renewal_residual: horizon must be positive");
  if (inspections == 0) throw ArgumentError("simulate_renewal_residual: need inspections");

  Rng rng(seed);
  std::vector<double> epochs;
  double t = 0.0;
  while (t <= horizon) {
    const double x = lifetime(rng);
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw ArgumentError("simulate_renewal_residual: lifetimes must be positive and finite");
    }
    t += x;
    epochs.push_back(t);
  }

  RenewalSim out;
  out.renewals = epochs.size();
  out.inspections = inspections;
  out.short_horizon = epochs.size() < 100;

  double acc = 0.0;
  for (std::uint64_t i = 0; i < inspections; ++i) {
    const double u = rng.uniform01() * horizon;
    const auto it = std::upper_bound(epochs.begin(), epochs.end(), u);
    acc += *it - u;  // the path always extends past the horizon
  }
  out.expected_residual = acc / static_cast<double>(inspections);
  return out;
}

DnCompletion dn_complete_renewal(const PartialDelayMatrix& p, const RenewalParams& r, double tol,
                                 int max_iter, DnMode mode) {
  r.validate();
  if (r.transit_mean.rows() != p.m || r.transit_mean.cols() != p.n) {
    throw ArgumentError("dn_complete_renewal: moment dimensions must match the unknown block");
  }
  Eigen::MatrixXd ey(p.m, p.n);
  for (int i = 0; i < p.m; ++i) {
    for (int j = 0; j < p.n; ++j) {
      ey(i, j) = renewal_expected_residual(r, i, j);
    }
  }
  return dn_complete(p, ey, tol, max_iter, mode);
}

}  // namespace rumorloc
