// opt_tasks.hpp - output feasibility, measurement payoff programs, and the
// trace-distance programs over states of knowledge.
#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "qk/order.hpp"
#include "qk/psd.hpp"
#include "qk/sok.hpp"

namespace qk {

// --------------------------------------------------------------------------
// Output feasibility: candidate over E x X is reachable from s over E iff
// tracing X back into memory lands below s.

template <typename S>
auto output_feasible(const S& s, const S& candidate) {
    S reduced = candidate;
    // trace out every register the base state does not carry
    bool progress = true;
    while (progress && !(reduced.env() == s.env())) {
        progress = false;
        for (const auto& f : reduced.env().factors()) {
            bool in_base = false;
            for (const auto& g : s.env().factors())
                if (g.name == f.name) in_base = true;
            if (!in_base) {
                reduced = partial_trace(reduced, f.name);
                progress = true;
                break;
            }
        }
    }
    if (!(reduced.env() == s.env()))
        throw error(errc::env_mismatch, "candidate does not extend the base environment");
    if constexpr (requires { reduced.gram(); })
        return leq_quantum(reduced, s);
    else
        return leq_classical(reduced, s);
}

// --------------------------------------------------------------------------
// Measurement payoff

template <typename T>
struct PayoffSpec {
    EnvFactor outputs;  // C
    Mat<T> utility;     // E x C payoffs
};

template <typename T>
struct PayoffResult {
    T value{};
    Mat<T> kernel;  // C x M post-processing kernel, column sums <= 1
};

namespace detail {

template <typename T>
void check_payoff_spec(const ClassicalSok<T>& s, const PayoffSpec<T>& spec) {
    if (spec.utility.rows() != s.env().size() || spec.utility.cols() != spec.outputs.labels.size())
        throw error(errc::dimension_mismatch, "utility must be |E| x |C|");
}

}  // namespace detail

// Average-case payoff: the LP optimizes over post-processing kernels
// K : M -> C u {abstain}; any feasible output state's eval factors through
// such a kernel, so this is the full program.
template <typename T>
PayoffResult<T> payoff_average(const ClassicalSok<T>& s, const PayoffSpec<T>& spec,
                               const LpOptions& lp_opts = {}) {
    detail::check_payoff_spec(s, spec);
    const auto cs = canonicalize(s);
    const Mat<T> p = cs.representative();
    const std::size_t n_c = spec.outputs.labels.size(), n_m = p.cols(), n_e = p.rows();

    LinearProgram<T> lp;
    lp.maximize = true;
    lp.c.assign(n_c * n_m, T{});
    for (std::size_t c = 0; c < n_c; ++c)
        for (std::size_t m = 0; m < n_m; ++m)
            for (std::size_t e = 0; e < n_e; ++e)
                lp.c[c * n_m + m] += p(e, m) * spec.utility(e, c);
    lp.a_le = Mat<T>(n_m, n_c * n_m);
    lp.b_le.assign(n_m, T(1));
    for (std::size_t m = 0; m < n_m; ++m)
        for (std::size_t c = 0; c < n_c; ++c) lp.a_le(m, c * n_m + m) = T(1);

    auto res = solve_lp(lp, lp_opts);
    if (res.status != LpStatus::optimal)
        throw error(errc::solver_failure, std::string("payoff LP: ") + lp_status_name(res.status));
    PayoffResult<T> out;
    out.value = res.value;
    out.kernel = Mat<T>(n_c, n_m);
    for (std::size_t c = 0; c < n_c; ++c)
        for (std::size_t m = 0; m < n_m; ++m) out.kernel(c, m) = res.x[c * n_m + m];
    return out;
}

// Worst-case payoff: maximize lambda subject to lambda <= per-row payoff.
template <typename T>
PayoffResult<T> payoff_worstcase(const ClassicalSok<T>& s, const PayoffSpec<T>& spec,
                                 const LpOptions& lp_opts = {}) {
    detail::check_payoff_spec(s, spec);
    const auto cs = canonicalize(s);
    const Mat<T> p = cs.representative();
    const std::size_t n_c = spec.outputs.labels.size(), n_m = p.cols(), n_e = p.rows();
    const std::size_t n_k = n_c * n_m;

    LinearProgram<T> lp;
    lp.maximize = true;
    lp.c.assign(n_k + 1, T{});
    lp.c[n_k] = T(1);
    lp.free_var.assign(n_k + 1, false);
    lp.free_var[n_k] = true;
    lp.a_le = Mat<T>(n_m + n_e, n_k + 1);
    lp.b_le.assign(n_m + n_e, T{});
    for (std::size_t m = 0; m < n_m; ++m) {
        for (std::size_t c = 0; c < n_c; ++c) lp.a_le(m, c * n_m + m) = T(1);
        lp.b_le[m] = T(1);
    }
    for (std::size_t e = 0; e < n_e; ++e) {
        const std::size_t row = n_m + e;
        lp.a_le(row, n_k) = T(1);
        for (std::size_t c = 0; c < n_c; ++c)
            for (std::size_t m = 0; m < n_m; ++m)
                lp.a_le(row, c * n_m + m) = -(p(e, m) * spec.utility(e, c));
    }

    auto res = solve_lp(lp, lp_opts);
    if (res.status != LpStatus::optimal)
        throw error(errc::solver_failure, std::string("payoff LP: ") + lp_status_name(res.status));
    PayoffResult<T> out;
    out.value = res.value;
    out.kernel = Mat<T>(n_c, n_m);
    for (std::size_t c = 0; c < n_c; ++c)
        for (std::size_t m = 0; m < n_m; ++m) out.kernel(c, m) = res.x[c * n_m + m];
    return out;
}

// --------------------------------------------------------------------------
// Quantum payoff via block PSD programs (double precision)

struct QuantumPayoffResult {
    double value = 0.0;
    std::vector<Mat<Cx<double>>> blocks;  // one G_c per output
    double residual = 0.0;
};

namespace detail {

// Hermitian coordinates: diag entries, then (re, im) per i<j pair.
inline std::size_t herm_dim(std::size_t n) { return n * n; }

inline Mat<Cx<double>> herm_basis(std::size_t n, std::size_t which) {
    Mat<Cx<double>> b(n, n);
    if (which < n) {
        b(which, which) = {1.0, 0.0};
        return b;
    }
    std::size_t k = which - n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (k == 0) {
                b(i, j) = {1.0, 0.0};
                b(j, i) = {1.0, 0.0};
                return b;
            }
            if (k == 1) {
                b(i, j) = {0.0, 1.0};
                b(j, i) = {0.0, -1.0};
                return b;
            }
            k -= 2;
        }
    throw error(errc::dimension_mismatch, "hermitian basis index out of range");
}

inline Mat<Cx<double>> herm_from_vars(std::size_t n, const double* y) {
    Mat<Cx<double>> g(n, n);
    for (std::size_t i = 0; i < n; ++i) g(i, i) = {y[i], 0.0};
    std::size_t k = n;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            g(i, j) = {y[k], y[k + 1]};
            g(j, i) = {y[k], -y[k + 1]};
            k += 2;
        }
    return g;
}

}  // namespace detail

QuantumPayoffResult payoff_average(const QuantumSok<double>& s, const PayoffSpec<double>& spec,
                                   const PsdOptions& opts = {});
QuantumPayoffResult payoff_worstcase(const QuantumSok<double>& s, const PayoffSpec<double>& spec,
                                     const PsdOptions& opts = {});

// --------------------------------------------------------------------------
// Truncation dictionaries (classical programs)

template <typename T>
struct Dictionary {
    EnvSpace env;
    std::vector<std::vector<T>> columns;  // normalized, unique, sorted
    int closure_depth = 0;

    std::optional<std::size_t> find(const std::vector<T>& normalized) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (detail::dist_close(columns[j], normalized)) return j;
        return std::nullopt;
    }
};

namespace detail {

template <typename T>
std::optional<std::vector<T>> normalize_column(const std::vector<T>& raw) {
    T sum{};
    for (const auto& v : raw) sum += v;
    if (scalar_traits<T>::is_zero(sum)) return std::nullopt;
    std::vector<T> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / sum;
    return out;
}

template <typename T>
void dict_insert(Dictionary<T>& d, const std::vector<T>& raw) {
    auto norm = normalize_column(raw);
    if (!norm) return;
    if (!d.find(*norm)) d.columns.push_back(std::move(*norm));
}

template <typename T>
void dict_sort(Dictionary<T>& d) {
    std::sort(d.columns.begin(), d.columns.end(), [](const auto& a, const auto& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
}

}  // namespace detail

// Indicators, the uniform column, the columns of the given states, closed
// under pairwise sums to the requested depth (capped).
template <typename T>
Dictionary<T> build_dictionary(const EnvSpace& env,
                               const std::vector<const ClassicalSok<T>*>& seeds, int depth,
                               std::size_t cap = 64) {
    Dictionary<T> d;
    d.env = env;
    d.closure_depth = depth;
    const std::size_t n = env.size();
    for (std::size_t e = 0; e < n; ++e) {
        std::vector<T> ind(n, T{});
        ind[e] = T(1);
        detail::dict_insert(d, ind);
    }
    detail::dict_insert(d, std::vector<T>(n, T(1)));
    for (const auto* s : seeds) {
        if (!s) continue;
        const auto canon = canonicalize(*s);
        for (const auto& c : canon.columns()) detail::dict_insert(d, c.dist);
    }
    for (int round = 0; round < depth && d.columns.size() < cap; ++round) {
        const auto snapshot = d.columns;
        for (std::size_t a = 0; a < snapshot.size() && d.columns.size() < cap; ++a)
            for (std::size_t b = a + 1; b < snapshot.size() && d.columns.size() < cap; ++b) {
                std::vector<T> sum(n);
                for (std::size_t e = 0; e < n; ++e) sum[e] = snapshot[a][e] + snapshot[b][e];
                detail::dict_insert(d, sum);
            }
    }
    detail::dict_sort(d);
    return d;
}

// --------------------------------------------------------------------------
// Trace distance

struct QuantumDistanceResult {
    double value = 0.0;
    QuantumSok<double> delta;
};

// Closed form: tr|gram(s) - gram(t)|.
inline QuantumDistanceResult trace_distance(const QuantumSok<double>& s,
                                            const QuantumSok<double>& t) {
    require_same_env(s.env(), t.env());
    Mat<Cx<double>> diff = s.gram() - t.gram();
    auto vals = eigvals_herm(diff, 1e-7);
    double v = 0.0;
    for (double x : vals) v += std::fabs(x);
    return {v, QuantumSok<double>(s.env(), matrix_abs(diff), false)};
}

// Independent route for the same value: the PSD program
// minimize tr D subject to D >= X, D >= -X.
double trace_distance_psd(const Mat<Cx<double>>& diff, const PsdOptions& opts = {});

template <typename T>
struct ClassicalDistanceResult {
    T value{};
    ClassicalSok<T> delta;
    double residual = 0.0;  // recheck of both order constraints via witness LPs
};

// Upper bound on the trace-distance infimum with Delta restricted to the
// conic span of the dictionary; nonincreasing as the dictionary grows.
template <typename T>
ClassicalDistanceResult<T> trace_distance(const ClassicalSok<T>& s, const ClassicalSok<T>& t,
                                          std::optional<Dictionary<T>> truncation = std::nullopt,
                                          const LpOptions& lp_opts = {}) {
    require_same_env(s.env(), t.env());
    Dictionary<T> dict = truncation ? std::move(*truncation)
                                    : build_dictionary<T>(s.env(), {&s, &t}, 2);
    const auto cs = canonicalize(s), ct = canonicalize(t);
    const Mat<T> ps = cs.representative(), pt = ct.representative();
    const std::size_t n_e = s.env().size(), ms = ps.cols(), mt = pt.cols();
    const std::size_t j_n = dict.columns.size();

    // variables: mu (j_n) | W1 (ms x (mt + j_n)) | W2 (mt x (ms + j_n));
    // dictionary-facing witness entries are pre-scaled by mu, which keeps
    // the program linear: column sums of those parts are bounded by mu_j.
    const std::size_t w1_base = j_n, w1_cols = mt + j_n;
    const std::size_t w2_base = w1_base + ms * w1_cols, w2_cols = ms + j_n;
    const std::size_t total = w2_base + mt * w2_cols;

    LinearProgram<T> lp;
    lp.maximize = false;
    lp.c.assign(total, T{});
    for (std::size_t j = 0; j < j_n; ++j) lp.c[j] = T(1);

    lp.a_eq = Mat<T>(n_e * (ms + mt), total);
    lp.b_eq.resize(n_e * (ms + mt));
    // P_s = [P_t | D] W1^T
    for (std::size_t e = 0; e < n_e; ++e)
        for (std::size_t m = 0; m < ms; ++m) {
            const std::size_t row = e * ms + m;
            for (std::size_t k = 0; k < mt; ++k) lp.a_eq(row, w1_base + m * w1_cols + k) = pt(e, k);
            for (std::size_t j = 0; j < j_n; ++j)
                lp.a_eq(row, w1_base + m * w1_cols + mt + j) = dict.columns[j][e];
            lp.b_eq[row] = ps(e, m);
        }
    // P_t = [P_s | D] W2^T
    for (std::size_t e = 0; e < n_e; ++e)
        for (std::size_t m = 0; m < mt; ++m) {
            const std::size_t row = n_e * ms + e * mt + m;
            for (std::size_t k = 0; k < ms; ++k) lp.a_eq(row, w2_base + m * w2_cols + k) = ps(e, k);
            for (std::size_t j = 0; j < j_n; ++j)
                lp.a_eq(row, w2_base + m * w2_cols + ms + j) = dict.columns[j][e];
            lp.b_eq[row] = pt(e, m);
        }

    // column-sum constraints
    const std::size_t ineq = mt + ms + 2 * j_n;
    lp.a_le = Mat<T>(ineq, total);
    lp.b_le.assign(ineq, T{});
    std::size_t row = 0;
    for (std::size_t k = 0; k < mt; ++k, ++row) {
        for (std::size_t m = 0; m < ms; ++m) lp.a_le(row, w1_base + m * w1_cols + k) = T(1);
        lp.b_le[row] = T(1);
    }
    for (std::size_t j = 0; j < j_n; ++j, ++row) {
        for (std::size_t m = 0; m < ms; ++m) lp.a_le(row, w1_base + m * w1_cols + mt + j) = T(1);
        lp.a_le(row, j) = T(-1);
    }
    for (std::size_t k = 0; k < ms; ++k, ++row) {
        for (std::size_t m = 0; m < mt; ++m) lp.a_le(row, w2_base + m * w2_cols + k) = T(1);
        lp.b_le[row] = T(1);
    }
    for (std::size_t j = 0; j < j_n; ++j, ++row) {
        for (std::size_t m = 0; m < mt; ++m) lp.a_le(row, w2_base + m * w2_cols + ms + j) = T(1);
        lp.a_le(row, j) = T(-1);
    }

    auto res = solve_lp(lp, lp_opts);
    if (res.status != LpStatus::optimal)
        throw error(errc::solver_failure,
                    std::string("trace distance LP: ") + lp_status_name(res.status));

    ClassicalDistanceResult<T> out;
    out.value = res.value;
    std::vector<std::vector<T>> delta_cols;
    for (std::size_t j = 0; j < j_n; ++j) {
        if (scalar_traits<T>::is_zero(res.x[j])) continue;
        std::vector<T> col(n_e);
        for (std::size_t e = 0; e < n_e; ++e) col[e] = res.x[j] * dict.columns[j][e];
        delta_cols.push_back(std::move(col));
    }
    out.delta = canonicalize(ClassicalSok<T>::from_columns(s.env(), delta_cols));
    const auto chk1 = leq_classical(cs, add(ct, out.delta), lp_opts);
    const auto chk2 = leq_classical(ct, add(cs, out.delta), lp_opts);
    out.residual = std::max(chk1.related ? chk1.residual : 1.0, chk2.related ? chk2.residual : 1.0);
    return out;
}

}  // namespace qk
