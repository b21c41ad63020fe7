// matrix.hpp - small dense row-major matrix used by the exact-arithmetic paths.
#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "qk/scalar.hpp"

namespace qk {

template <typename T>
class Mat {
   public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Mat(std::initializer_list<std::initializer_list<T>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw error(errc::dimension_mismatch, "ragged initializer");
            for (const auto& v : r) data_.push_back(v);
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    friend bool operator==(const Mat& a, const Mat& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    friend Mat operator+(const Mat& a, const Mat& b) {
        check_same_shape(a, b);
        Mat r(a.rows_, a.cols_);
        for (std::size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = a.data_[i] + b.data_[i];
        return r;
    }
    friend Mat operator-(const Mat& a, const Mat& b) {
        check_same_shape(a, b);
        Mat r(a.rows_, a.cols_);
        for (std::size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = a.data_[i] - b.data_[i];
        return r;
    }

    Mat& operator+=(const Mat& o) {
        check_same_shape(*this, o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    friend Mat operator*(const Mat& a, const Mat& b) {
        if (a.cols_ != b.rows_) throw error(errc::dimension_mismatch, "matmul shape");
        Mat r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T& av = a(i, k);
                for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += av * b(k, j);
            }
        return r;
    }

    static Mat identity(std::size_t n, T one = T{1}) {
        Mat r(n, n);
        for (std::size_t i = 0; i < n; ++i) r(i, i) = one;
        return r;
    }

   private:
    static void check_same_shape(const Mat& a, const Mat& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw error(errc::dimension_mismatch, "matrix shape mismatch");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

template <typename T>
Mat<Cx<T>> adjoint(const Mat<Cx<T>>& a) {
    Mat<Cx<T>> r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = conj(a(i, j));
    return r;
}

template <typename T>
Mat<T> transpose(const Mat<T>& a) {
    Mat<T> r(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
    return r;
}

template <typename T>
Mat<Cx<T>> scale(const T& s, const Mat<Cx<T>>& a) {
    Mat<Cx<T>> r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = s * a(i, j);
    return r;
}

// Largest |A - A^dagger| entry component, as a plain double.
template <typename T>
double hermiticity_residual(const Mat<Cx<T>>& a) {
    using st = scalar_traits<T>;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            Cx<T> d = a(i, j) - conj(a(j, i));
            worst = std::max(worst, std::fabs(st::to_double(d.re)));
            worst = std::max(worst, std::fabs(st::to_double(d.im)));
        }
    return worst;
}

// Exact PSD test for a Hermitian matrix over an exact field: LDL^T with
// symmetric (diagonal) pivoting. A Hermitian matrix is PSD iff the
// elimination never produces a negative pivot and every zero pivot has a
// fully zero row/column in the remaining block.
template <typename T>
bool is_psd_exact(Mat<Cx<T>> a) {
    static_assert(scalar_traits<T>::exact);
    const std::size_t n = a.rows();
    if (a.cols() != n) throw error(errc::dimension_mismatch, "is_psd_exact: square required");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        // pick the largest remaining diagonal entry as pivot
        std::size_t best = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (a(idx[i], idx[i]).re > a(idx[best], idx[best]).re) best = i;
        std::swap(idx[k], idx[best]);
        const std::size_t p = idx[k];
        const T piv = a(p, p).re;
        if (piv < 0) return false;
        if (piv == 0) {
            // zero pivot: remaining row must vanish, else indefinite
            for (std::size_t i = k + 1; i < n; ++i) {
                const Cx<T>& v = a(p, idx[i]);
                if (!(v.re == 0 && v.im == 0)) return false;
            }
            continue;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) {
                // a_ij -= a_ip * a_pj / piv
                Cx<T> upd = a(idx[i], p) * a(p, idx[j]);
                a(idx[i], idx[j]) = a(idx[i], idx[j]) - Cx<T>(upd.re / piv, upd.im / piv);
            }
    }
    return true;
}

}  // namespace qk
