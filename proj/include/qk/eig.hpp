// eig.hpp - double-precision Hermitian eigendecomposition and helpers.
#pragma once

#include <vector>

#include "qk/matrix.hpp"
#include "qk/scalar.hpp"

namespace qk {

struct EigSym {
    std::vector<double> values;   // sorted descending
    Mat<Cx<double>> vectors;      // column i is the eigenvector for values[i]
};

// Eigendecomposition of a Hermitian (or real symmetric) matrix. Throws
// errc::not_hermitian when the input is asymmetric beyond the tolerance.
EigSym eig_herm(const Mat<Cx<double>>& m, double herm_tol = 1e-9);

std::vector<double> eigvals_herm(const Mat<Cx<double>>& m, double herm_tol = 1e-9);

double min_eigval_herm(const Mat<Cx<double>>& m, double herm_tol = 1e-9);

// Largest singular value of an arbitrary rectangular complex matrix.
double sv_max(const Mat<Cx<double>>& m);

// Projection onto the PSD cone: negative eigenvalues clamped to zero.
Mat<Cx<double>> clamp_psd(const Mat<Cx<double>>& m);

// V * diag(f(lambda)) * V^dagger for f = |.| (matrix absolute value).
Mat<Cx<double>> matrix_abs(const Mat<Cx<double>>& m);

// Max-norm of V diag(values) V^dagger minus m, used by reconstruction tests.
double reconstruction_residual(const EigSym& e, const Mat<Cx<double>>& m);

// Moore-Penrose pseudoinverse (SVD-based).
Mat<Cx<double>> pinv(const Mat<Cx<double>>& m, double rank_tol = 1e-12);

// A wave-family matrix Psi with Psi Psi^dagger = gram; zero modes trimmed.
Mat<Cx<double>> wave_factor(const Mat<Cx<double>>& gram, double rank_tol = 1e-12);

}  // namespace qk
