// eig.cpp - Hermitian eigendecomposition backed by Eigen.

#include "qk/eig.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace qk {

namespace {

Eigen::MatrixXcd to_eigen(const Mat<Cx<double>>& m) {
    Eigen::MatrixXcd r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::complex<double>(m(i, j).re, m(i, j).im);
    return r;
}

Mat<Cx<double>> from_eigen(const Eigen::MatrixXcd& m) {
    Mat<Cx<double>> r(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            r(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = {m(i, j).real(),
                                                                           m(i, j).imag()};
    return r;
}

void require_hermitian(const Mat<Cx<double>>& m, double tol) {
    if (m.rows() != m.cols()) throw error(errc::not_hermitian, "matrix not square");
    if (hermiticity_residual(m) > tol)
        throw error(errc::not_hermitian, "matrix not Hermitian within tolerance");
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> decompose(const Mat<Cx<double>>& m, double tol,
                                                          bool vectors) {
    require_hermitian(m, tol);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
    es.compute(to_eigen(m), vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw error(errc::solver_failure, "eigensolver failed");
    return es;
}

}  // namespace

EigSym eig_herm(const Mat<Cx<double>>& m, double herm_tol) {
    auto es = decompose(m, herm_tol, true);
    const auto n = m.rows();
    EigSym out;
    out.values.resize(n);
    out.vectors = Mat<Cx<double>>(n, n);
    // Eigen returns ascending order; report descending.
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = static_cast<Eigen::Index>(n - 1 - k);
        out.values[k] = es.eigenvalues()(src);
        for (std::size_t i = 0; i < n; ++i) {
            auto v = es.eigenvectors()(static_cast<Eigen::Index>(i), src);
            out.vectors(i, k) = {v.real(), v.imag()};
        }
    }
    return out;
}

std::vector<double> eigvals_herm(const Mat<Cx<double>>& m, double herm_tol) {
    auto es = decompose(m, herm_tol, false);
    const auto n = m.rows();
    std::vector<double> vals(n);
    for (std::size_t k = 0; k < n; ++k) vals[k] = es.eigenvalues()(static_cast<Eigen::Index>(n - 1 - k));
    return vals;
}

double min_eigval_herm(const Mat<Cx<double>>& m, double herm_tol) {
    auto vals = eigvals_herm(m, herm_tol);
    return vals.empty() ? 0.0 : vals.back();
}

double sv_max(const Mat<Cx<double>>& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m));
    return svd.singularValues()(0);
}

Mat<Cx<double>> clamp_psd(const Mat<Cx<double>>& m) {
    Eigen::MatrixXcd a = to_eigen(m);
    // symmetrize first so tiny drift does not accumulate
    a = 0.5 * (a + a.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXcd r = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
    return from_eigen(r);
}

Mat<Cx<double>> matrix_abs(const Mat<Cx<double>>& m) {
    auto a = to_eigen(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint().eval()));
    Eigen::VectorXd vals = es.eigenvalues().cwiseAbs();
    return from_eigen(es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint());
}

Mat<Cx<double>> pinv(const Mat<Cx<double>>& m, double rank_tol) {
    if (m.rows() == 0 || m.cols() == 0) return Mat<Cx<double>>(m.cols(), m.rows());
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cutoff = rank_tol * std::max(1.0, svd.singularValues()(0));
    Eigen::VectorXd inv = svd.singularValues();
    for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > cutoff ? 1.0 / inv(i) : 0.0;
    Eigen::MatrixXcd r = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
    return from_eigen(r);
}

Mat<Cx<double>> wave_factor(const Mat<Cx<double>>& gram, double rank_tol) {
    auto a = to_eigen(gram);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint().eval()));
    const double cutoff = rank_tol * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > cutoff) keep.push_back(i);
    Mat<Cx<double>> psi(gram.rows(), keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        const double s = std::sqrt(es.eigenvalues()(keep[k]));
        for (std::size_t i = 0; i < gram.rows(); ++i) {
            auto v = es.eigenvectors()(static_cast<Eigen::Index>(i), keep[k]);
            psi(i, k) = {s * v.real(), s * v.imag()};
        }
    }
    return psi;
}

double reconstruction_residual(const EigSym& e, const Mat<Cx<double>>& m) {
    const std::size_t n = m.rows();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Cx<double> acc{0.0, 0.0};
            for (std::size_t k = 0; k < n; ++k)
                acc += Cx<double>(e.values[k], 0.0) * e.vectors(i, k) * conj(e.vectors(j, k));
            Cx<double> d = acc - m(i, j);
            worst = std::max(worst, std::hypot(d.re, d.im));
        }
    return worst;
}

}  // namespace qk
