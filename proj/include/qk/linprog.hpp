// linprog.hpp - dense two-phase tableau simplex, templated on the scalar.
//
// Rational instantiation pivots with Bland's rule and zero tolerance, so
// results are exact. The double instantiation uses steepest-edge pricing
// with Bland tie-breaking and a hard iteration cap.
#pragma once

#include <cstddef>
#include <vector>

#include "qk/cancel.hpp"
#include "qk/matrix.hpp"
#include "qk/scalar.hpp"

namespace qk {

template <typename T>
struct LinearProgram {
    bool maximize = true;
    std::vector<T> c;  // objective over the n structural variables
    Mat<T> a_eq;       // a_eq x = b_eq
    std::vector<T> b_eq;
    Mat<T> a_le;  // a_le x <= b_le
    std::vector<T> b_le;
    // per-variable lower bound: false -> x >= 0, true -> free. Empty means
    // all variables bounded below by 0.
    std::vector<bool> free_var;

    std::size_t num_vars() const { return c.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

inline const char* lp_status_name(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

template <typename T>
struct LpResult {
    LpStatus status = LpStatus::iteration_limit;
    T value{};
    std::vector<T> x;
    long iterations = 0;
};

struct LpOptions {
    long max_iter = 1'000'000;
    CancelToken cancel;
};

namespace detail {

template <typename T>
class SimplexTableau {
   public:
    SimplexTableau(const LinearProgram<T>& prog) : prog_(prog) {
        const std::size_t n = prog.num_vars();
        if (prog.a_eq.rows() != prog.b_eq.size() || prog.a_le.rows() != prog.b_le.size() ||
            (prog.a_eq.rows() && prog.a_eq.cols() != n) ||
            (prog.a_le.rows() && prog.a_le.cols() != n) ||
            (!prog.free_var.empty() && prog.free_var.size() != n))
            throw error(errc::dimension_mismatch, "linear program shape mismatch");

        // expand free variables into positive/negative parts
        col_of_var_.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            col_of_var_[j] = n_struct_;
            n_struct_ += is_free(j) ? 2 : 1;
        }

        const std::size_t me = prog.a_eq.rows(), mi = prog.a_le.rows();
        m_ = me + mi;
        slack_base_ = n_struct_;
        art_base_ = slack_base_ + mi;
        n_cols_ = art_base_ + m_;

        rows_.assign(m_, std::vector<T>(n_cols_, T{}));
        rhs_.assign(m_, T{});
        basis_.assign(m_, 0);
        alive_.assign(m_, true);

        for (std::size_t i = 0; i < m_; ++i) {
            const bool is_eq = i < me;
            const std::size_t src = is_eq ? i : i - me;
            const T& b = is_eq ? prog.b_eq[src] : prog.b_le[src];
            const bool flip = b < T{};
            for (std::size_t j = 0; j < n; ++j) {
                const T& a = is_eq ? prog.a_eq(src, j) : prog.a_le(src, j);
                T v = flip ? T(-a) : a;
                rows_[i][col_of_var_[j]] = v;
                if (is_free(j)) rows_[i][col_of_var_[j] + 1] = -v;
            }
            rhs_[i] = flip ? T(-b) : b;
            if (!is_eq) rows_[i][slack_base_ + src] = flip ? T(-1) : T(1);
            if (!is_eq && !flip) {
                basis_[i] = slack_base_ + src;
            } else {
                rows_[i][art_base_ + i] = T(1);
                basis_[i] = art_base_ + i;
                has_art_ = true;
            }
        }
    }

    LpResult<T> solve(const LpOptions& opts) {
        LpResult<T> res;

        if (has_art_) {
            std::vector<T> phase1(n_cols_, T{});
            for (std::size_t j = art_base_; j < n_cols_; ++j) phase1[j] = T(1);
            set_costs(phase1);
            if (!run(opts, /*allow_art=*/true, res)) return res;
            if (obj_value() > tol()) {
                res.status = LpStatus::infeasible;
                return res;
            }
            purge_artificials();
        }

        std::vector<T> phase2(n_cols_, T{});
        for (std::size_t j = 0; j < prog_.num_vars(); ++j) {
            T cj = prog_.maximize ? T(-prog_.c[j]) : prog_.c[j];
            phase2[col_of_var_[j]] = cj;
            if (is_free(j)) phase2[col_of_var_[j] + 1] = -cj;
        }
        set_costs(phase2);
        if (!run(opts, /*allow_art=*/false, res)) return res;

        res.status = LpStatus::optimal;
        res.x.assign(prog_.num_vars(), T{});
        std::vector<T> xs(n_struct_, T{});
        for (std::size_t i = 0; i < m_; ++i)
            if (alive_[i] && basis_[i] < n_struct_) xs[basis_[i]] = rhs_[i];
        for (std::size_t j = 0; j < prog_.num_vars(); ++j) {
            res.x[j] = xs[col_of_var_[j]];
            if (is_free(j)) res.x[j] = res.x[j] - xs[col_of_var_[j] + 1];
        }
        res.value = T{};
        for (std::size_t j = 0; j < prog_.num_vars(); ++j) res.value += prog_.c[j] * res.x[j];
        return res;
    }

    long iterations() const { return iters_; }

   private:
    bool is_free(std::size_t j) const { return !prog_.free_var.empty() && prog_.free_var[j]; }

    static T tol() { return scalar_traits<T>::tol(); }

    T obj_value() const { return -cost_rhs_; }

    void set_costs(const std::vector<T>& c) {
        cost_ = c;
        cost_rhs_ = T{};
        for (std::size_t i = 0; i < m_; ++i) {
            if (!alive_[i]) continue;
            const T& cb = c[basis_[i]];
            if (scalar_traits<T>::is_zero(cb)) continue;
            for (std::size_t j = 0; j < n_cols_; ++j) cost_[j] -= cb * rows_[i][j];
            cost_rhs_ -= cb * rhs_[i];
        }
    }

    // Pivot out basic artificials at zero level; drop redundant rows.
    void purge_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!alive_[i] || basis_[i] < art_base_) continue;
            std::size_t piv = n_cols_;
            for (std::size_t j = 0; j < art_base_ && piv == n_cols_; ++j)
                if (scalar_traits<T>::abs(rows_[i][j]) > tol()) piv = j;
            if (piv == n_cols_) {
                alive_[i] = false;
            } else {
                do_pivot(i, piv);
            }
        }
    }

    // Returns false when res was filled with a terminal non-optimal status.
    bool run(const LpOptions& opts, bool allow_art, LpResult<T>& res) {
        const std::size_t limit_col = allow_art ? n_cols_ : art_base_;
        while (true) {
            if (++iters_ > opts.max_iter || ((iters_ & 255) == 0 && opts.cancel.cancelled())) {
                res.status = LpStatus::iteration_limit;
                res.iterations = iters_;
                return false;
            }
            std::size_t enter = n_cols_;
            if constexpr (scalar_traits<T>::exact) {
                // Dantzig pricing while the objective moves; Bland's rule on
                // degenerate plateaus keeps the run cycle-free.
                if (degenerate_streak_ > 60) {
                    for (std::size_t j = 0; j < limit_col; ++j)
                        if (cost_[j] < T{}) {
                            enter = j;
                            break;
                        }
                } else {
                    for (std::size_t j = 0; j < limit_col; ++j)
                        if (cost_[j] < T{} && (enter == n_cols_ || cost_[j] < cost_[enter]))
                            enter = j;
                }
            } else {
                // steepest-edge pricing on the current tableau
                double best = 0.0;
                for (std::size_t j = 0; j < limit_col; ++j) {
                    if (!(cost_[j] < -tol())) continue;
                    double num = scalar_traits<T>::to_double(cost_[j]);
                    double den = 1.0;
                    for (std::size_t i = 0; i < m_; ++i) {
                        if (!alive_[i]) continue;
                        double v = scalar_traits<T>::to_double(rows_[i][j]);
                        den += v * v;
                    }
                    double score = num * num / den;
                    if (score > best) {
                        best = score;
                        enter = j;
                    }
                }
            }
            if (enter == n_cols_) {
                res.iterations = iters_;
                return true;  // current basis optimal for current costs
            }

            std::size_t leave = m_;
            for (std::size_t i = 0; i < m_; ++i) {
                if (!alive_[i] || !(rows_[i][enter] > tol())) continue;
                if (leave == m_) {
                    leave = i;
                    continue;
                }
                // ratio test; ties resolved toward the smallest basic index
                T lhs = rhs_[i] * rows_[leave][enter];
                T rhs = rhs_[leave] * rows_[i][enter];
                if (lhs < rhs || (lhs == rhs && basis_[i] < basis_[leave])) leave = i;
            }
            if (leave == m_) {
                res.status = LpStatus::unbounded;
                res.iterations = iters_;
                return false;
            }
            const T before = cost_rhs_;
            do_pivot(leave, enter);
            if (scalar_traits<T>::is_zero(T(cost_rhs_ - before)))
                ++degenerate_streak_;
            else
                degenerate_streak_ = 0;
        }
    }

    void do_pivot(std::size_t prow, std::size_t pcol) {
        const T piv = rows_[prow][pcol];
        for (std::size_t j = 0; j < n_cols_; ++j) rows_[prow][j] = rows_[prow][j] / piv;
        rhs_[prow] = rhs_[prow] / piv;
        rows_[prow][pcol] = T(1);
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == prow || !alive_[i]) continue;
            T f = rows_[i][pcol];
            if (scalar_traits<T>::is_zero(f)) continue;
            for (std::size_t j = 0; j < n_cols_; ++j) rows_[i][j] -= f * rows_[prow][j];
            rows_[i][pcol] = T{};
            rhs_[i] -= f * rhs_[prow];
        }
        T f = cost_[pcol];
        if (!scalar_traits<T>::is_zero(f)) {
            for (std::size_t j = 0; j < n_cols_; ++j) cost_[j] -= f * rows_[prow][j];
            cost_[pcol] = T{};
            cost_rhs_ -= f * rhs_[prow];
        }
        basis_[prow] = pcol;
    }

    const LinearProgram<T>& prog_;
    std::size_t n_struct_ = 0, m_ = 0, slack_base_ = 0, art_base_ = 0, n_cols_ = 0;
    std::vector<std::size_t> col_of_var_;
    std::vector<std::vector<T>> rows_;
    std::vector<T> rhs_;
    std::vector<T> cost_;
    T cost_rhs_{};
    std::vector<std::size_t> basis_;
    std::vector<bool> alive_;
    bool has_art_ = false;
    long iters_ = 0;
    long degenerate_streak_ = 0;
};

}  // namespace detail

template <typename T>
LpResult<T> solve_lp(const LinearProgram<T>& prog, const LpOptions& opts = {}) {
    detail::SimplexTableau<T> tab(prog);
    return tab.solve(opts);
}

}  // namespace qk
