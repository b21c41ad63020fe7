// adversary.hpp - the adversary bound (exact PSD program for quantum,
// dictionary-truncated LP for classical) and the constructive universal
// query algorithm with its certified error report.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qk/evolution.hpp"
#include "qk/opt_tasks.hpp"
#include "qk/order.hpp"
#include "qk/sok.hpp"

namespace qk {

enum class AdvSoundness { exact_program, truncated_estimate };

template <typename T, typename SokT>
struct AdversaryResult {
    T value{};
    SokT witness;  // the optimizing S-tilde over E x O
    double feasibility_residual = 0.0;
    AdvSoundness soundness = AdvSoundness::truncated_estimate;
};

template <typename T>
struct AdversaryOptions {
    std::optional<Dictionary<T>> dictionary;  // columns over E
    bool blockdiag_objective = false;         // the per-environment variant
    std::optional<ClassicalSok<T>> s0;        // required by blockdiag/strengthen
    bool strengthen = false;                  // add tr_O(S~) - S0 in S (off by default)
    std::size_t dict_cap = 32;
    LpOptions lp;
};

// Minimal step count implied by an adversary value.
template <typename T>
long adversary_step_bound(const T& value, const T& trace_s0) {
    const double v = scalar_traits<T>::to_double(value) / scalar_traits<T>::to_double(trace_s0);
    return static_cast<long>(std::ceil(v - 1e-12));
}

namespace detail {

// --- raw representative-matrix helpers (fixed bases) ---

template <typename T>
Mat<T> hcat(const Mat<T>& a, const Mat<T>& b) {
    if (a.cols() == 0) return b;
    if (b.cols() == 0) return a;
    if (a.rows() != b.rows()) throw error(errc::dimension_mismatch, "hcat rows");
    Mat<T> r(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) r(i, a.cols() + j) = b(i, j);
    }
    return r;
}

template <typename T>
Mat<T> submat(const Mat<T>& m, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
    Mat<T> r(r1 - r0, c1 - c0);
    for (std::size_t i = r0; i < r1; ++i)
        for (std::size_t j = c0; j < c1; ++j) r(i - r0, j - c0) = m(i, j);
    return r;
}

template <typename T>
Mat<T> scaled(const T& s, const Mat<T>& m) {
    Mat<T> r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = s * m(i, j);
    return r;
}

// (E*K) x m  ->  E x (m*K): column (j,k) holds the k-slice of column j.
template <typename T>
Mat<T> split_register(const Mat<T>& x, std::size_t e_dim, std::size_t k_dim) {
    Mat<T> r(e_dim, x.cols() * k_dim);
    for (std::size_t e = 0; e < e_dim; ++e)
        for (std::size_t j = 0; j < x.cols(); ++j)
            for (std::size_t k = 0; k < k_dim; ++k) r(e, j * k_dim + k) = x(e * k_dim + k, j);
    return r;
}

// inverse of split_register
template <typename T>
Mat<T> join_register(const Mat<T>& x, std::size_t e_dim, std::size_t k_dim) {
    Mat<T> r(e_dim * k_dim, x.cols() / k_dim);
    for (std::size_t e = 0; e < e_dim; ++e)
        for (std::size_t j = 0; j < r.cols(); ++j)
            for (std::size_t k = 0; k < k_dim; ++k) r(e * k_dim + k, j) = x(e, j * k_dim + k);
    return r;
}

// Place every target-block row of `block` into the assembled map.
template <typename T>
void add_block(Mat<T>& v, std::size_t row0, std::size_t col0, const Mat<T>& block) {
    for (std::size_t i = 0; i < block.rows(); ++i)
        for (std::size_t j = 0; j < block.cols(); ++j) v(row0 + i, col0 + j) += block(i, j);
}

}  // namespace detail

// --------------------------------------------------------------------------
// Classical adversary bound: LP over conic combinations of dictionary
// columns for S-tilde, the order constraint encoded by dictionary-restricted
// forgetting generators { [p], [p]+[q]-[p+q] : p, q, p+q in dictionary }.
// Truncation restricts a minimization, so the value is an estimate from
// above, never asserted as a proven bound.

namespace detail {

template <typename T>
struct GeneratorTriple {
    std::size_t a, b, c;
    T alpha, beta;  // alpha d_a + beta d_b = (alpha+beta) d_c
};

// mixing weights with alpha d_a + beta d_b = (alpha+beta) d_c, if they exist
template <typename T>
std::optional<std::pair<T, T>> merge_weights(const std::vector<T>& da, const std::vector<T>& db,
                                             const std::vector<T>& dc) {
    using st = scalar_traits<T>;
    T alpha{}, beta{};
    bool pinned = false;
    for (std::size_t e = 0; e < da.size() && !pinned; ++e) {
        T u = dc[e] - db[e];
        T v = da[e] - dc[e];
        if (!st::is_zero(u) && !st::is_zero(v)) {
            alpha = u;
            beta = v;
            pinned = true;
        }
    }
    if (!pinned) return std::nullopt;
    if (alpha < T{}) {
        alpha = -alpha;
        beta = -beta;
    }
    if (!(beta > st::tol())) return std::nullopt;
    // normalize to alpha + beta = 1 so LP coefficients stay bounded
    T denom = T(alpha + beta);
    alpha = T(alpha / denom);
    beta = T(beta / denom);
    if constexpr (!st::exact) {
        // drop ill-conditioned triples; they are numerically meaningless
        if (std::min(alpha, beta) < 1e-6) return std::nullopt;
    }
    for (std::size_t e = 0; e < da.size(); ++e) {
        T lhs = alpha * da[e] + beta * db[e];
        if constexpr (st::exact) {
            if (!(lhs == dc[e])) return std::nullopt;
        } else {
            if (std::fabs(lhs - dc[e]) > 1e-11) return std::nullopt;
        }
    }
    return std::pair<T, T>{alpha, beta};
}

// Adjacent collinear triples generate the full forgetting cone: a merge
// across a dictionary point decomposes into two shorter merges (the
// coefficient identities follow from the zeroth and first moments), so
// only triples with no dictionary point strictly inside either half are
// emitted. This keeps the LP column count linear in practice.
template <typename T>
std::vector<GeneratorTriple<T>> enumerate_generators(const std::vector<std::vector<T>>& cols) {
    std::vector<GeneratorTriple<T>> out;
    const std::size_t j_n = cols.size();
    // between[a][b] = some dictionary point strictly inside segment (a,b)
    std::vector<std::vector<std::size_t>> inner(j_n, std::vector<std::size_t>(j_n, j_n));
    for (std::size_t a = 0; a < j_n; ++a)
        for (std::size_t b = a + 1; b < j_n; ++b)
            for (std::size_t c = 0; c < j_n; ++c) {
                if (c == a || c == b) continue;
                if (merge_weights(cols[a], cols[b], cols[c])) {
                    inner[a][b] = c;
                    inner[b][a] = c;
                    break;
                }
            }
    for (std::size_t a = 0; a < j_n; ++a)
        for (std::size_t b = a + 1; b < j_n; ++b)
            for (std::size_t c = 0; c < j_n; ++c) {
                if (c == a || c == b) continue;
                if (inner[std::min(a, c)][std::max(a, c)] != j_n) continue;
                if (inner[std::min(c, b)][std::max(c, b)] != j_n) continue;
                if (auto w = merge_weights(cols[a], cols[b], cols[c]))
                    out.push_back({a, b, c, w->first, w->second});
            }
    return out;
}

}  // namespace detail

template <typename T>
Dictionary<T> build_adversary_dictionary(const ClassicalQuasi<T>& delta, const ClassicalLaw<T>& law,
                                         const ClassicalSok<T>* s0, int depth = 2,
                                         std::size_t cap = 64) {
    Dictionary<T> d = build_dictionary<T>(law.env(), {&delta.pos, &delta.neg, s0}, 0, cap);
    // one-step posteriors of every seed column, through every output choice
    const std::size_t n_e = law.env().size();
    const std::size_t n_o = law.output().labels.size(), n_i = law.input().labels.size();
    const auto snapshot = d.columns;
    for (const auto& p : snapshot)
        for (std::size_t o = 0; o < n_o; ++o) {
            std::vector<T> embedded(n_e * n_o, T{});
            for (std::size_t e = 0; e < n_e; ++e) embedded[e * n_o + o] = p[e];
            for (std::size_t i = 0; i < n_i; ++i) {
                std::vector<T> slice(n_e, T{});
                for (std::size_t e = 0; e < n_e; ++e)
                    for (std::size_t j = 0; j < embedded.size(); ++j)
                        slice[e] += law.matrix()(e * n_i + i, j) * embedded[j];
                detail::dict_insert(d, slice);
            }
        }
    for (int round = 0; round < depth && d.columns.size() < cap; ++round) {
        const auto snap = d.columns;
        for (std::size_t a = 0; a < snap.size() && d.columns.size() < cap; ++a)
            for (std::size_t b = a + 1; b < snap.size() && d.columns.size() < cap; ++b) {
                std::vector<T> sum(n_e);
                for (std::size_t e = 0; e < n_e; ++e) sum[e] = snap[a][e] + snap[b][e];
                detail::dict_insert(d, sum);
            }
    }
    d.closure_depth = depth;
    detail::dict_sort(d);
    return d;
}

template <typename T>
AdversaryResult<T, ClassicalSok<T>> adversary_bound(const ClassicalQuasi<T>& delta,
                                                    const ClassicalLaw<T>& law,
                                                    const AdversaryOptions<T>& opts = {}) {
    using st = scalar_traits<T>;
    require_same_env(delta.pos.env(), law.env());
    if (opts.blockdiag_objective) {
        if (!law.blockdiag_in_env())
            throw error(errc::blockdiag_violation, "blockdiag objective needs a blockdiagonal law");
        if (!opts.s0)
            throw error(errc::normalization_violation, "blockdiag objective needs s0");
        for (const auto& v : eval(*opts.s0))
            if (std::fabs(st::to_double(v) - 1.0) > (st::exact ? 0.0 : float_eps()))
                throw error(errc::normalization_violation, "blockdiag objective needs tr(e S0) = 1");
    }
    if (opts.strengthen && !opts.s0)
        throw error(errc::normalization_violation, "strengthened constraint needs s0");

    const std::size_t n_e = law.env().size();
    const std::size_t n_o = law.output().labels.size(), n_i = law.input().labels.size();

    Dictionary<T> dict_e = opts.dictionary
                               ? *opts.dictionary
                               : build_adversary_dictionary<T>(delta, law,
                                                               opts.s0 ? &*opts.s0 : nullptr, 2,
                                                               opts.dict_cap);

    // coordinates: dictionary columns plus every slice any program column
    // can produce, so the equality system is closed
    Dictionary<T> coords = dict_e;
    const ClassicalSok<T> dpos = canonicalize(delta.pos), dneg = canonicalize(delta.neg);
    for (const auto& c : dpos.columns()) detail::dict_insert(coords, c.dist);
    for (const auto& c : dneg.columns()) detail::dict_insert(coords, c.dist);
    if (opts.s0) {
        const auto s0_canon = canonicalize(*opts.s0);
        for (const auto& c : s0_canon.columns()) detail::dict_insert(coords, c.dist);
    }
    // slices of tr_I(T([d (x) e_o])) for every embedded dictionary column
    std::vector<std::vector<std::pair<std::size_t, T>>> lhs_map;  // per (p, o): coord weights
    for (std::size_t jp = 0; jp < dict_e.columns.size(); ++jp)
        for (std::size_t o = 0; o < n_o; ++o) {
            std::vector<T> embedded(n_e * n_o, T{});
            for (std::size_t e = 0; e < n_e; ++e) embedded[e * n_o + o] = dict_e.columns[jp][e];
            std::vector<std::pair<std::size_t, T>> entry;
            for (std::size_t i = 0; i < n_i; ++i) {
                std::vector<T> slice(n_e, T{});
                T mass{};
                for (std::size_t e = 0; e < n_e; ++e) {
                    for (std::size_t j = 0; j < embedded.size(); ++j)
                        slice[e] += law.matrix()(e * n_i + i, j) * embedded[j];
                    mass += slice[e];
                }
                if (st::is_zero(mass)) continue;
                auto norm = detail::normalize_column(slice);
                detail::dict_insert(coords, slice);
                entry.push_back({*coords.find(*norm), mass});
            }
            lhs_map.push_back(std::move(entry));
        }

    const std::size_t j_eo = dict_e.columns.size() * n_o;
    const std::size_t n_coord = coords.columns.size();
    const auto gens = detail::enumerate_generators(coords.columns);

    // variables: sigma (j_eo) | nu (gens) | [t]; the [p] generators are the
    // slack of the per-coordinate inequality rows
    const std::size_t nu_base = j_eo;
    std::size_t total = nu_base + gens.size();
    std::size_t t_var = 0;
    if (opts.blockdiag_objective) t_var = total++;

    LinearProgram<T> lp;
    lp.maximize = false;
    lp.c.assign(total, T{});
    if (opts.blockdiag_objective)
        lp.c[t_var] = T(1);
    else
        for (std::size_t j = 0; j < j_eo; ++j) lp.c[j] = T(1);

    // per coordinate p: sum_j sigma_j L_j[p] - sum_t nu_t g_t[p] >= delta_p
    const std::size_t extra_rows =
        (opts.strengthen ? n_coord : 0) + (opts.blockdiag_objective ? n_e : 0);
    lp.a_le = Mat<T>(n_coord + extra_rows, total);
    lp.b_le.assign(n_coord + extra_rows, T{});

    for (std::size_t jp = 0; jp < dict_e.columns.size(); ++jp) {
        auto self = coords.find(dict_e.columns[jp]);
        for (std::size_t o = 0; o < n_o; ++o) {
            const std::size_t var = jp * n_o + o;
            for (const auto& [coord, mass] : lhs_map[var]) lp.a_le(coord, var) -= mass;
            lp.a_le(*self, var) += T(1);  // tr_O of the embedded column
        }
    }
    for (std::size_t g = 0; g < gens.size(); ++g) {
        lp.a_le(gens[g].a, nu_base + g) += gens[g].alpha;
        lp.a_le(gens[g].b, nu_base + g) += gens[g].beta;
        lp.a_le(gens[g].c, nu_base + g) -= gens[g].alpha + gens[g].beta;
    }
    for (const auto& c : dpos.columns()) lp.b_le[*coords.find(c.dist)] -= c.weight;
    for (const auto& c : dneg.columns()) lp.b_le[*coords.find(c.dist)] += c.weight;

    if (opts.strengthen) {
        // tr_O(S~) - S0 expressible with nonnegative dictionary coordinates
        for (std::size_t jp = 0; jp < dict_e.columns.size(); ++jp) {
            auto self = coords.find(dict_e.columns[jp]);
            for (std::size_t o = 0; o < n_o; ++o)
                lp.a_le(n_coord + *self, jp * n_o + o) -= T(1);
        }
        const auto s0_canon = canonicalize(*opts.s0);
        for (const auto& c : s0_canon.columns())
            lp.b_le[n_coord + *coords.find(c.dist)] -= c.weight;
    }

    if (opts.blockdiag_objective) {
        const std::size_t row0 = n_coord + (opts.strengthen ? n_coord : 0);
        for (std::size_t e = 0; e < n_e; ++e) {
            lp.a_le(row0 + e, t_var) = T(-1);
            for (std::size_t jp = 0; jp < dict_e.columns.size(); ++jp)
                for (std::size_t o = 0; o < n_o; ++o)
                    lp.a_le(row0 + e, jp * n_o + o) += dict_e.columns[jp][e];
        }
    }

    auto res = solve_lp(lp, opts.lp);
    if (res.status != LpStatus::optimal)
        throw error(errc::solver_failure, std::string("adversary LP: ") + lp_status_name(res.status) +
                                              " (dictionary truncation may be too small)");

    AdversaryResult<T, ClassicalSok<T>> out;
    out.value = res.value;
    out.soundness = AdvSoundness::truncated_estimate;

    EnvSpace env_eo = law.output_env();
    std::vector<std::vector<T>> wit_cols;
    for (std::size_t jp = 0; jp < dict_e.columns.size(); ++jp)
        for (std::size_t o = 0; o < n_o; ++o) {
            const T& sigma = res.x[jp * n_o + o];
            if (st::is_zero(sigma)) continue;
            std::vector<T> col(n_e * n_o, T{});
            for (std::size_t e = 0; e < n_e; ++e) col[e * n_o + o] = sigma * dict_e.columns[jp][e];
            wit_cols.push_back(std::move(col));
        }
    out.witness = canonicalize(ClassicalSok<T>::from_columns(env_eo, wit_cols));

    // independent recheck through the witness-order LP
    auto lhs = make_quasi(partial_trace(apply_law(law, out.witness), law.input().name),
                          partial_trace(out.witness, law.output().name));
    auto verdict = leq_quasi(delta, lhs, opts.lp);
    out.feasibility_residual =
        verdict.related ? verdict.residual : std::numeric_limits<double>::infinity();
    return out;
}

// --------------------------------------------------------------------------
// Quantum adversary bound: exact PSD program over the gram of S-tilde.

struct QuantumAdversaryOptions {
    bool blockdiag_objective = false;
    std::optional<QuantumSok<double>> s0;
    bool strengthen = false;
    PsdOptions psd;
};

AdversaryResult<double, QuantumSok<double>> adversary_bound(const QuantumQuasi<double>& delta,
                                                            const QuantumLaw<double>& law,
                                                            const QuantumAdversaryOptions& opts = {});

// --------------------------------------------------------------------------
// Universal query algorithm

template <typename SokT, typename T>
struct UniversalResult {
    AlgorithmPlan<SokT> plan;  // initial = s_S + tr_O(S~)/N'
    T error{};                 // measured final deviation from the target
    T error_bound{};           // tr(S~)/N'
    SokT delta_certificate;    // classical: Delta with trace = error
    double max_step_residual = 0.0;
};

// Classical construction. The per-step witnesses are assembled from three
// one-time transports (idle-source, idle-target, feasibility); their column
// sums telescope to exactly one. The intended/actual coupled runs share
// every map, so the final gap is the exact propagated image of the missing
// S~/N' mass and certifies the trace-distance claim.
template <typename T>
UniversalResult<ClassicalSok<T>, T> build_universal_algorithm(
    const ClassicalSok<T>& s_tilde, const ClassicalSok<T>& s_s, const ClassicalSok<T>& s_r,
    const ClassicalLaw<T>& law, long n_steps, const ClassicalSok<T>& idle_s,
    const ClassicalSok<T>& idle_r, const LpOptions& lp = {}) {
    using st = scalar_traits<T>;
    namespace d = detail;
    if (n_steps < 1) throw error(errc::dimension_mismatch, "need at least one step");
    const std::string out_name = law.output().name, in_name = law.input().name;

    // idle-state contract
    for (const auto& [idle, target] : {std::pair{&idle_s, &s_s}, std::pair{&idle_r, &s_r}}) {
        if (!canonical_equal(partial_trace(*idle, out_name), *target) ||
            !canonical_equal(partial_trace(apply_law(law, *idle), in_name), *target))
            throw error(errc::idle_violation, "idle state does not reproduce its target");
    }
    // feasibility of the witness
    {
        auto lhs = make_quasi(partial_trace(apply_law(law, s_tilde), in_name),
                              partial_trace(s_tilde, out_name));
        if (!leq_quasi(make_quasi(s_r, s_s), lhs, lp).related)
            throw error(errc::infeasible_witness, "S~ does not satisfy the adversary constraint");
    }

    const std::size_t n_e = law.env().size();
    const std::size_t n_o = law.output().labels.size(), n_i = law.input().labels.size();
    const T n_prime = st::from_int(n_steps);

    const Mat<T> a_o = canonicalize(idle_s).representative();   // over (E*O)
    const Mat<T> b_o = canonicalize(idle_r).representative();
    const Mat<T> c_o = canonicalize(s_tilde).representative();
    const Mat<T> a_base = canonicalize(s_s).representative();   // over E
    const Mat<T> b_base = canonicalize(s_r).representative();

    auto evolve = [&](const Mat<T>& x) { return law.matrix() * x; };
    const Mat<T> f_a = d::split_register(evolve(a_o), n_e, n_i);
    const Mat<T> f_b = d::split_register(evolve(b_o), n_e, n_i);
    const Mat<T> f_c = d::split_register(evolve(c_o), n_e, n_i);
    const Mat<T> d_a = d::split_register(a_o, n_e, n_o);
    const Mat<T> d_b = d::split_register(b_o, n_e, n_o);
    const Mat<T> d_c = d::split_register(c_o, n_e, n_o);

    auto need = [&](std::optional<Mat<T>> w, const char* what) {
        if (!w) throw error(errc::solver_failure, std::string("transport missing: ") + what);
        return *w;
    };
    const Mat<T> w_a = need(find_transport(d_a, f_a, lp), "idle source");
    const Mat<T> w_b = need(find_transport(d_b, f_b, lp), "idle target");
    const Mat<T> w_emb = need(find_transport(d_b, b_base, lp), "target embedding");
    const Mat<T> w_fb = need(find_transport(b_base, f_b, lp), "final target");
    const Mat<T> w_a0 = need(find_transport(d_a, a_base, lp), "initial");
    const Mat<T> w_feas =
        need(find_transport(d::hcat(b_base, d_c), d::hcat(f_a, f_c), lp), "feasibility");

    const std::size_t mb0 = b_base.cols();
    const std::size_t fa_c = f_a.cols(), fb_c = f_b.cols(), fc_c = f_c.cols();
    const std::size_t da_c = d_a.cols(), db_c = d_b.cols(), dc_c = d_c.cols();
    const Mat<T> w_feas_ba = d::submat(w_feas, 0, mb0, 0, fa_c);
    const Mat<T> w_feas_bc = d::submat(w_feas, 0, mb0, fa_c, fa_c + fc_c);
    const Mat<T> w_feas_ca = d::submat(w_feas, mb0, mb0 + dc_c, 0, fa_c);
    const Mat<T> w_feas_cc = d::submat(w_feas, mb0, mb0 + dc_c, fa_c, fa_c + fc_c);

    const std::size_t d_cols = da_c + db_c + dc_c, f_cols = fa_c + fb_c + fc_c;

    // step map F_k -> D_{k+1} for 0 <= k < N'-1
    auto step_map = [&](long k) {
        const T alpha_k = T(st::from_int(n_steps - k) / n_prime);
        const T alpha_next = T(st::from_int(n_steps - k - 1) / n_prime);
        const T r_a = T(alpha_next / alpha_k);
        const T r_f = T(T(1) / T(n_prime * alpha_k));
        Mat<T> v(d_cols, f_cols);
        d::add_block(v, 0, 0, d::scaled(r_a, w_a));
        d::add_block(v, da_c, fa_c, w_b);
        d::add_block(v, da_c, 0, d::scaled(r_f, w_emb * w_feas_ba));
        d::add_block(v, da_c, fa_c + fb_c, w_emb * w_feas_bc);
        d::add_block(v, da_c + db_c, 0, d::scaled(r_f, w_feas_ca));
        d::add_block(v, da_c + db_c, fa_c + fb_c, w_feas_cc);
        return v;
    };

    // final extraction F_{N'-1} -> target representative
    Mat<T> w_fin(mb0, f_cols);
    {
        const T alpha_last = T(T(1) / n_prime);
        const T r_f = T(T(1) / T(n_prime * alpha_last));  // = 1
        d::add_block(w_fin, 0, 0, d::scaled(r_f, w_feas_ba));
        d::add_block(w_fin, 0, fa_c, w_fb);
        d::add_block(w_fin, 0, fa_c + fb_c, w_feas_bc);
    }

    const T inv_n = T(T(1) / n_prime);
    // intended initial representative [A | D_C/N'] and the actual one [A | 0]
    Mat<T> x_int = d::hcat(a_base, d::scaled(inv_n, d_c));
    Mat<T> x_act = d::hcat(a_base, d::scaled(T{}, d_c));

    // initial write: A-part via the transport, D_C-part by identity
    Mat<T> v_init(d_cols, x_int.cols());
    d::add_block(v_init, 0, 0, w_a0);
    for (std::size_t j = 0; j < dc_c; ++j) v_init(da_c + db_c + j, a_base.cols() + j) = T(1);

    UniversalResult<ClassicalSok<T>, T> out;
    out.error_bound = T(trace(s_tilde) / n_prime);

    auto apply_map = [](const Mat<T>& x, const Mat<T>& v) { return x * transpose(v); };
    auto expected_d = [&](long k) {
        const T ak = T(st::from_int(n_steps - k) / n_prime);
        const T bk = T(st::from_int(k) / n_prime);
        return d::hcat(d::hcat(d::scaled(ak, d_a), d::scaled(bk, d_b)), d::scaled(inv_n, d_c));
    };
    auto record_residual = [&](const Mat<T>& got, const Mat<T>& want) {
        double worst = 0.0;
        for (std::size_t i = 0; i < got.rows(); ++i)
            for (std::size_t j = 0; j < got.cols(); ++j)
                worst = std::max(worst, std::fabs(st::to_double(T(got(i, j) - want(i, j)))));
        out.max_step_residual = std::max(out.max_step_residual, worst);
    };

    Mat<T> y_int = apply_map(x_int, v_init);
    Mat<T> y_act = apply_map(x_act, v_init);
    record_residual(y_int, expected_d(0));
    for (long k = 0; k < n_steps; ++k) {
        const Mat<T> r_int = d::join_register(y_int, n_e, n_o);
        const Mat<T> r_act = d::join_register(y_act, n_e, n_o);
        const Mat<T> fi = d::split_register(evolve(r_int), n_e, n_i);
        const Mat<T> fa = d::split_register(evolve(r_act), n_e, n_i);
        if (k + 1 < n_steps) {
            const Mat<T> v = step_map(k);
            y_int = apply_map(fi, v);
            y_act = apply_map(fa, v);
            record_residual(y_int, expected_d(k + 1));
        } else {
            y_int = apply_map(fi, w_fin);
            y_act = apply_map(fa, w_fin);
            record_residual(y_int, b_base);
        }
    }

    // final gap: entrywise nonnegative, trace = error, certifies the bound
    Mat<T> gap(b_base.rows(), b_base.cols());
    T err{};
    for (std::size_t i = 0; i < gap.rows(); ++i)
        for (std::size_t j = 0; j < gap.cols(); ++j) {
            T g = b_base(i, j) - y_act(i, j);
            if (g < T{}) g = T{};  // float-mode drift only
            gap(i, j) = g;
            err += g;
        }
    out.error = err;
    out.delta_certificate = canonicalize(ClassicalSok<T>::from_matrix(s_r.env(), gap));

    out.plan.initial = canonicalize(add(s_s, scalar_mul(inv_n, partial_trace(s_tilde, out_name))));
    for (long k = 0; k < n_steps; ++k) {
        const T ak = T(st::from_int(n_steps - k) / n_prime);
        const T bk = T(st::from_int(k) / n_prime);
        out.plan.steps.push_back(canonicalize(
            add(add(scalar_mul(ak, idle_s), scalar_mul(bk, idle_r)), scalar_mul(inv_n, s_tilde))));
    }
    return out;
}

// Quantum construction (double precision): the same mixtures, with per-step
// contraction witnesses obtained from pseudoinverses at the wave level; the
// reported error is the squared L2 distance between the coupled runs.
UniversalResult<QuantumSok<double>, double> build_universal_algorithm(
    const QuantumSok<double>& s_tilde, const QuantumSok<double>& s_s, const QuantumSok<double>& s_r,
    const QuantumLaw<double>& law, long n_steps, const QuantumSok<double>& idle_s,
    const QuantumSok<double>& idle_r);

}  // namespace qk
