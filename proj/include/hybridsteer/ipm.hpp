#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "hybridsteer/common.hpp"

// Primal-dual interior-point solver for the block-structured semidefinite
// programs arising in binary-outcome steering certification.
//
// Dual (solved) form over 2m Hermitian d x d variables F_j, j = 2t + s:
//
//   minimize   sum_j <F_j, sigma_j>
//   subject to sum_t F_{2t + lambda_t}  PSD   for every lambda in {0,1}^m
//              [bound_blocks]   1 - F_j PSD and 1 + F_j PSD  for every j
//              [trace_equality] sum_j Tr F_j = h
//
// <.,.> is the real inner product Re Tr[A B]. Hermitian blocks are treated
// through the standard 2x2 real symmetric embedding; all block computations
// are carried out in complex arithmetic, which is entrywise identical to the
// embedded real form up to an overall factor of two that cancels from the
// Newton system. Search direction: infeasible HKM with Mehrotra
// predictor-corrector; the Schur complement is assembled per block from
// closed-form kernels over the Hermitian matrix basis.

namespace hst::ipm {

struct SteeringProblem {
  int m = 0;  // number of measurement settings
  int d = 0;  // block dimension on the trusted side
  /// Objective members sigma_{a|theta}: [t][s], s = 0 for a=+1, 1 for a=-1.
  std::vector<std::array<Eigen::MatrixXcd, 2>> sigma;
  bool bound_blocks = true;
  bool trace_equality = false;
  double h = 0.0;
  double gap_tol = 1e-8;
  double feas_tol = 1e-7;
  int max_iter = 200;
};

enum class SolveStatus { Optimal, NumericalFailure };

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;       // b'y of the returned iterate
  double dual_objective = 0.0;  // <C,X> + h w
  double rel_gap = 1.0;
  double primal_inf = 1.0;
  double dual_inf = 1.0;
  int iterations = 0;
  /// Variables F_{a|theta} by [t][s].
  std::vector<std::array<Eigen::MatrixXcd, 2>> F;
  /// Primal strategy-block matrices X_lambda (LHS decompositions live here).
  std::vector<Eigen::MatrixXcd> X_strategy;
  double w = 0.0;  // multiplier of the trace equality
};

SolveResult solve_steering_sdp(const SteeringProblem& prob);

}  // namespace hst::ipm
