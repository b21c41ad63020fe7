// psd.hpp - small dense PSD-constrained programs solved by alternating
// projections between the affine set and the PSD cone, with a bisection
// line search on the objective level.
#pragma once

#include <limits>
#include <vector>

#include "qk/cancel.hpp"
#include "qk/matrix.hpp"
#include "qk/scalar.hpp"

namespace qk {

// One PSD constraint: constant + sum_i y_i * coeff[i]  >=  0 (PSD).
// All matrices Hermitian, coeff.size() == num_vars of the program.
struct PsdBlockMap {
    Mat<Cx<double>> constant;
    std::vector<Mat<Cx<double>>> coeff;
};

struct PsdProgram {
    std::size_t num_vars = 0;
    std::vector<double> objective;  // minimize objective . y (empty = feasibility)
    std::vector<PsdBlockMap> blocks;
    Mat<double> eq;  // eq * y = eq_rhs (may have zero rows)
    std::vector<double> eq_rhs;
    // Known lower bound on the objective (e.g. 0 for trace objectives);
    // accelerates and robustifies the level search when finite.
    double objective_lower_bound = -std::numeric_limits<double>::infinity();
};

enum class PsdStatus { solved, no_convergence };

struct PsdResult {
    PsdStatus status = PsdStatus::no_convergence;
    double value = 0.0;
    std::vector<double> y;
    double residual = 0.0;  // independent recheck: PSD + equality violation
    long iterations = 0;
};

struct PsdOptions {
    long max_iter = 400'000;  // total projection iterations across the solve
    double tol = 1e-7;        // objective accuracy and feasibility tolerance
    std::size_t dim_cap = 64;
    CancelToken cancel;
};

PsdResult solve_psd_program(const PsdProgram& prog, const PsdOptions& opts = {});

}  // namespace qk
