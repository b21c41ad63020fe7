// order.hpp - decision procedures for the preorder, equivalence, and the
// quasi-order on states of knowledge, with checkable witness certificates.
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "qk/linprog.hpp"
#include "qk/sok.hpp"

namespace qk {

enum class WitnessKind { classical_substochastic, quantum_psd_report };

template <typename T>
struct Witness {
    WitnessKind kind = WitnessKind::classical_substochastic;
    Mat<T> t;                   // substochastic map (classical)
    T norm{};                   // max column sum (classical)
    std::vector<double> eigs;   // eigenvalue report (quantum), descending
};

template <typename T>
struct OrderVerdict {
    bool related = false;
    std::optional<Witness<T>> witness;
    double residual = 0.0;  // max violation found by the verification recheck
};

// Solve for a substochastic W with target = source * W^T, column sums <= 1.
// Returns nothing when no such W exists. Works on raw representative
// matrices so callers can pin bases.
template <typename T>
std::optional<Mat<T>> find_transport(const Mat<T>& target, const Mat<T>& source,
                                     const LpOptions& lp_opts = {}) {
    if (target.rows() != source.rows())
        throw error(errc::dimension_mismatch, "transport: row mismatch");
    const std::size_t e_dim = target.rows(), mt = target.cols(), ms = source.cols();
    if (mt == 0) return Mat<T>(0, ms);

    LinearProgram<T> lp;
    lp.c.assign(mt * ms, T{});
    lp.a_eq = Mat<T>(e_dim * mt, mt * ms);
    lp.b_eq.resize(e_dim * mt);
    for (std::size_t e = 0; e < e_dim; ++e)
        for (std::size_t t_col = 0; t_col < mt; ++t_col) {
            const std::size_t row = e * mt + t_col;
            for (std::size_t s_col = 0; s_col < ms; ++s_col)
                lp.a_eq(row, t_col * ms + s_col) = source(e, s_col);
            lp.b_eq[row] = target(e, t_col);
        }
    lp.a_le = Mat<T>(ms, mt * ms);
    lp.b_le.assign(ms, T(1));
    for (std::size_t s_col = 0; s_col < ms; ++s_col)
        for (std::size_t t_col = 0; t_col < mt; ++t_col)
            lp.a_le(s_col, t_col * ms + s_col) = T(1);

    auto res = solve_lp(lp, lp_opts);
    if (res.status == LpStatus::iteration_limit)
        throw error(errc::iteration_limit, "transport LP hit the iteration limit");
    if (res.status != LpStatus::optimal) return std::nullopt;
    Mat<T> w(mt, ms);
    for (std::size_t t_col = 0; t_col < mt; ++t_col)
        for (std::size_t s_col = 0; s_col < ms; ++s_col) w(t_col, s_col) = res.x[t_col * ms + s_col];
    return w;
}

// Residual of the claim target = source * W^T with W >= 0 substochastic.
template <typename T>
double transport_residual(const Mat<T>& target, const Mat<T>& source, const Mat<T>& w) {
    using st = scalar_traits<T>;
    double worst = 0.0;
    for (std::size_t e = 0; e < target.rows(); ++e)
        for (std::size_t t_col = 0; t_col < target.cols(); ++t_col) {
            T acc{};
            for (std::size_t s_col = 0; s_col < source.cols(); ++s_col)
                acc += source(e, s_col) * w(t_col, s_col);
            worst = std::max(worst, std::fabs(st::to_double(acc - target(e, t_col))));
        }
    for (std::size_t s_col = 0; s_col < source.cols(); ++s_col) {
        T colsum{};
        for (std::size_t t_col = 0; t_col < target.cols(); ++t_col) {
            if (w(t_col, s_col) < T{})
                worst = std::max(worst, -st::to_double(w(t_col, s_col)));
            colsum += w(t_col, s_col);
        }
        worst = std::max(worst, std::max(0.0, st::to_double(colsum) - 1.0));
    }
    return worst;
}

template <typename T>
T max_column_sum(const Mat<T>& w) {
    T best{};
    for (std::size_t j = 0; j < w.cols(); ++j) {
        T s{};
        for (std::size_t i = 0; i < w.rows(); ++i) s += w(i, j);
        if (s > best) best = s;
    }
    return best;
}

// a <= b iff a substochastic T exists with P_a = P_b T^T. The generated
// preorder is closed under composition, direct sums, and scaling, so the
// single-witness LP is complete.
template <typename T>
OrderVerdict<T> leq_classical(const ClassicalSok<T>& a, const ClassicalSok<T>& b,
                              const LpOptions& lp_opts = {}) {
    require_same_env(a.env(), b.env());
    const auto ca = canonicalize(a), cb = canonicalize(b);
    OrderVerdict<T> v;
    auto w = find_transport(ca.representative(), cb.representative(), lp_opts);
    if (!w) return v;
    v.related = true;
    Witness<T> wit;
    wit.kind = WitnessKind::classical_substochastic;
    wit.t = *w;
    wit.norm = max_column_sum(*w);
    v.residual = transport_residual(ca.representative(), cb.representative(), *w);
    v.witness = std::move(wit);
    return v;
}

// a <= b iff gram(b) - gram(a) is PSD; exact in rational mode, within the
// global tolerance in float mode. The witness carries the eigenvalue report.
template <typename T>
OrderVerdict<T> leq_quantum(const QuantumSok<T>& a, const QuantumSok<T>& b) {
    require_same_env(a.env(), b.env());
    Mat<Cx<T>> diff = b.gram() - a.gram();
    OrderVerdict<T> v;
    Witness<T> wit;
    wit.kind = WitnessKind::quantum_psd_report;
    wit.eigs = eigvals_herm(to_double_gram(diff), 1e-7);
    const double min_eig = wit.eigs.empty() ? 0.0 : wit.eigs.back();
    if constexpr (scalar_traits<T>::exact) {
        v.related = is_psd_exact(diff);
        v.residual = 0.0;
    } else {
        v.related = min_eig >= -float_eps();
        v.residual = std::max(0.0, -min_eig);
    }
    if (v.related) v.witness = std::move(wit);
    return v;
}

// (A - B) <= (C - D) iff A + D <= C + B.
template <typename T>
OrderVerdict<T> leq_quasi(const ClassicalQuasi<T>& x, const ClassicalQuasi<T>& y,
                          const LpOptions& lp_opts = {}) {
    return leq_classical(add(x.pos, y.neg), add(y.pos, x.neg), lp_opts);
}

template <typename T>
OrderVerdict<T> leq_quasi(const QuantumQuasi<T>& x, const QuantumQuasi<T>& y) {
    return leq_quantum(add(x.pos, y.neg), add(y.pos, x.neg));
}

template <typename T>
struct EquivalenceResult {
    bool equivalent = false;
    OrderVerdict<T> forward;   // a <= b
    OrderVerdict<T> backward;  // b <= a
    bool cross_check_ok = true;
};

// Classical equivalence is canonical-form equality; the two witness LPs are
// run as well and any disagreement is surfaced instead of silently resolved.
template <typename T>
EquivalenceResult<T> equivalent(const ClassicalSok<T>& a, const ClassicalSok<T>& b,
                                const LpOptions& lp_opts = {}) {
    require_same_env(a.env(), b.env());
    EquivalenceResult<T> r;
    const bool canon = canonical_equal(a, b);
    r.forward = leq_classical(a, b, lp_opts);
    r.backward = leq_classical(b, a, lp_opts);
    r.equivalent = canon;
    r.cross_check_ok = (canon == (r.forward.related && r.backward.related));
    return r;
}

template <typename T>
EquivalenceResult<T> equivalent(const QuantumSok<T>& a, const QuantumSok<T>& b) {
    require_same_env(a.env(), b.env());
    EquivalenceResult<T> r;
    r.forward = leq_quantum(a, b);
    r.backward = leq_quantum(b, a);
    r.equivalent = canonical_equal(a, b);
    r.cross_check_ok = (r.equivalent == (r.forward.related && r.backward.related));
    return r;
}

template <typename T>
bool quasi_equivalent(const ClassicalQuasi<T>& x, const ClassicalQuasi<T>& y) {
    return canonical_equal(add(x.pos, y.neg), add(y.pos, x.neg));
}

template <typename T>
bool quasi_equivalent(const QuantumQuasi<T>& x, const QuantumQuasi<T>& y) {
    return canonical_equal(add(x.pos, y.neg), add(y.pos, x.neg));
}

// Expected Shannon entropy (nats): sum over columns of weight * H(dist).
template <typename T>
double expected_entropy(const ClassicalSok<T>& s) {
    using st = scalar_traits<T>;
    double total = 0.0;
    for (const auto& c : s.columns()) {
        double h = 0.0;
        for (const auto& p : c.dist) {
            const double pd = st::to_double(p);
            if (pd > 0.0) h -= pd * std::log(pd);
        }
        total += st::to_double(c.weight) * h;
    }
    return total;
}

struct CancellationReport {
    bool with_third;     // s1 + s3 <= s2 + s3
    bool without_third;  // s1 <= s2
    bool agree;
};

template <typename T>
CancellationReport check_cancellation(const ClassicalSok<T>& s1, const ClassicalSok<T>& s2,
                                      const ClassicalSok<T>& s3, const LpOptions& lp_opts = {}) {
    const bool with3 = leq_classical(add(s1, s3), add(s2, s3), lp_opts).related;
    const bool without3 = leq_classical(s1, s2, lp_opts).related;
    return {with3, without3, with3 == without3};
}

template <typename T>
CancellationReport check_cancellation(const QuantumSok<T>& s1, const QuantumSok<T>& s2,
                                      const QuantumSok<T>& s3) {
    const bool with3 = leq_quantum(add(s1, s3), add(s2, s3)).related;
    const bool without3 = leq_quantum(s1, s2).related;
    return {with3, without3, with3 == without3};
}

}  // namespace qk
