#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "rumorloc/diffusion.hpp"
#include "rumorloc/rng.hpp"

namespace rumorloc {

// Row-selection operator: keeps the present entries of a length-K vector,
// one canonical unit row per kept index, in index order.
struct SelectionMatrix {
  int rows = 0;  // L
  int cols = 0;  // K
  std::vector<int> kept_indices;

  Eigen::MatrixXd to_dense() const;
  Eigen::VectorXd apply(const Eigen::VectorXd& full) const;
};

// mask[i] != 0 means entry i is present. Needs at least one present entry.
SelectionMatrix build_selection_matrix(const std::vector<char>& mask);

// K x K orthonormal transform; columns are the basis vectors.
struct SparsifyingBasis {
  Eigen::MatrixXd psi;

  int size() const { return static_cast<int>(psi.rows()); }
  // Largest deviation of psi^T psi from identity; must stay under 1e-10.
  double orthonormality_defect() const;
};

SparsifyingBasis dct_basis(int K);       // type-II DCT, orthonormal
SparsifyingBasis identity_basis(int K);  // trivial alternative basis

// min ||x||_1 subject to theta x = y, solved as a linear program (split
// positive/negative parts, two-phase simplex with Bland's rule). On return
// ||theta x - y||_inf <= tol. max_iter = 0 picks a cap from the problem size.
Eigen::VectorXd basis_pursuit(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                              double tol = 1e-8, int max_iter = 0);

// Fills the missing entries of obs from the basis-pursuit coefficient vector;
// present entries pass through bit-exactly. Suited to sporadic loss; bursty
// masks are accepted but recover less reliably (matrix completion below is
// the burst-oriented path).
ObservationVector cs_recover(const ObservationVector& obs, const SparsifyingBasis& basis);
ObservationVector cs_recover(const ObservationVector& obs);  // DCT basis of matching size

// Pairwise-delay matrix with a block-clique pattern of known entries:
//
//         [ A    c   X ]      A: m x m   first known group
//     D = [ c^T  e   d^T]     e: scalar  overlap row/column
//         [ X^T  d   B ]      B: n x n   second known group
//
// Only X (m x n) is unknown.
struct PartialDelayMatrix {
  int m = 0;
  int n = 0;
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
  double e = 0.0;
  Eigen::VectorXd d;
  Eigen::MatrixXd B;

  void validate() const;  // dims, symmetry of A/B, nonnegative entries
  Eigen::MatrixXd assemble(const Eigen::MatrixXd& X) const;
};

// literal:     fit alpha beta^T to expected_delay itself, X_ij = a_i c_i d_j b_j
// normalized:  fit to expected_delay ./ (c d^T) so the c_i d_j factors carry
//              the delay scale and alpha beta^T models the residual ratio
enum class DnMode { literal, normalized };

struct DnCompletion {
  Eigen::MatrixXd X;       // m x n filled block
  Eigen::VectorXd alpha;   // m
  Eigen::VectorXd beta;    // n
  int iterations = 0;
  double residual = 0.0;   // ||alpha beta^T - M||_F / ||M||_F for the fitted M
};

// Alternating updates alpha <- M beta / ||beta||^2, beta <- M^T alpha /
// ||alpha||^2 from beta0 = ones/sqrt(n); converges to the dominant rank-1
// component of M. Factors are gauge-free (alpha, beta) ~ (g alpha, beta / g);
// only the product is contractual.
DnCompletion dn_complete(const PartialDelayMatrix& p, const Eigen::MatrixXd& expected_delay,
                         double tol = 1e-9, int max_iter = 1000, DnMode mode = DnMode::literal);

// Minimal diagonal load delta such that cond(sample_cov + delta I) < 2,
// found by binary search to 1e-6 and applied to the diagonal of D.
struct ConditionLoad {
  PartialDelayMatrix loaded;
  double delta = 0.0;
  double cond_before = 0.0;  // infinity when the covariance is singular
  double cond_after = 0.0;
};

ConditionLoad condition_check_and_load(const PartialDelayMatrix& p,
                                       const Eigen::MatrixXd& sample_cov);

// First two moments of per-pair transmission lifetimes X_ij (rows i pair
// with columns j) and per-row-sensor idle periods S_i.
struct RenewalParams {
  Eigen::MatrixXd transit_mean;  // m x n, entrywise > 0
  Eigen::MatrixXd transit_var;   // m x n, entrywise >= 0
  Eigen::VectorXd idle_mean;     // m, entrywise >= 0
  Eigen::VectorXd idle_var;      // m, entrywise >= 0

  void validate() const;
};

// E(X)/2 * (1 + Var(X)/E(X)^2): mean residual life of a stationary renewal
// process with the given lifetime moments.
double mean_residual_life(double mean, double variance);

// Expected residual delay of pair (i, j) with the transmitter's idle period
// folded in: mean_residual_life(EX_ij + ES_i, VarX_ij + VarS_i).
double renewal_expected_residual(const RenewalParams& r, int i, int j);

struct RenewalSim {
  double expected_residual = 0.0;
  std::uint64_t renewals = 0;
  std::uint64_t inspections = 0;
  bool short_horizon = false;  // fewer than 100 renewals completed
};

// Monte Carlo oracle: builds one renewal path out to `horizon` (lifetime
// draws must be positive) and averages the residual time over uniformly
// random inspection epochs.
RenewalSim simulate_renewal_residual(const std::function<double(Rng&)>& lifetime, double horizon,
                                     std::uint64_t inspections, std::uint64_t seed);

// dn_complete with the expected-delay matrix replaced entrywise by
// renewal_expected_residual(r, i, j).
DnCompletion dn_complete_renewal(const PartialDelayMatrix& p, const RenewalParams& r,
                                 double tol = 1e-9, int max_iter = 1000,
                                 DnMode mode = DnMode::literal);

}  // namespace rumorloc
