// adversary.cpp - quantum adversary bound and universal-algorithm paths.

#include "qk/adversary.hpp"

#include <cmath>

namespace qk {

namespace {

using CMat = Mat<Cx<double>>;

CMat partial_trace_flat(const CMat& x, std::size_t e_dim, std::size_t k_dim) {
    CMat r(e_dim, e_dim);
    for (std::size_t i = 0; i < e_dim; ++i)
        for (std::size_t j = 0; j < e_dim; ++j) {
            Cx<double> acc{0.0, 0.0};
            for (std::size_t k = 0; k < k_dim; ++k) acc += x(i * k_dim + k, j * k_dim + k);
            r(i, j) = acc;
        }
    return r;
}

CMat neg(const CMat& m) {
    CMat r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = -m(i, j);
    return r;
}

double fro_norm_sq(const CMat& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s += norm_sq(m(i, j));
    return s;
}

}  // namespace

AdversaryResult<double, QuantumSok<double>> adversary_bound(const QuantumQuasi<double>& delta,
                                                            const QuantumLaw<double>& law,
                                                            const QuantumAdversaryOptions& opts) {
    require_same_env(delta.pos.env(), law.env());
    if (opts.blockdiag_objective) {
        if (!law.blockdiag_in_env())
            throw error(errc::blockdiag_violation, "blockdiag objective needs a blockdiagonal law");
        if (!opts.s0) throw error(errc::normalization_violation, "blockdiag objective needs s0");
        for (const auto& v : eval(*opts.s0))
            if (std::fabs(v - 1.0) > float_eps())
                throw error(errc::normalization_violation, "blockdiag objective needs tr(e S0) = 1");
    }
    if (opts.strengthen && !opts.s0)
        throw error(errc::normalization_violation, "strengthened constraint needs s0");

    const std::size_t n_e = law.env().size();
    const std::size_t n_o = law.output().labels.size(), n_i = law.input().labels.size();
    const std::size_t n_eo = n_e * n_o;
    const std::size_t per = detail::herm_dim(n_eo);

    PsdProgram prog;
    prog.num_vars = per + (opts.blockdiag_objective ? 1 : 0);
    prog.objective.assign(prog.num_vars, 0.0);
    prog.objective_lower_bound = 0.0;

    // G~ >= 0
    {
        PsdBlockMap block;
        block.constant = CMat(n_eo, n_eo);
        block.coeff.assign(prog.num_vars, CMat(n_eo, n_eo));
        for (std::size_t k = 0; k < per; ++k) block.coeff[k] = detail::herm_basis(n_eo, k);
        prog.blocks.push_back(std::move(block));
    }
    // tr_I(T G~ T^dag) - tr_O(G~) - (G_pos - G_neg) >= 0
    {
        PsdBlockMap block;
        block.constant = delta.neg.gram() - delta.pos.gram();
        block.coeff.assign(prog.num_vars, CMat(n_e, n_e));
        for (std::size_t k = 0; k < per; ++k) {
            CMat basis = detail::herm_basis(n_eo, k);
            CMat evolved = law.matrix() * basis * adjoint(law.matrix());
            block.coeff[k] =
                partial_trace_flat(evolved, n_e, n_i) - partial_trace_flat(basis, n_e, n_o);
        }
        prog.blocks.push_back(std::move(block));
    }
    if (opts.strengthen) {
        PsdBlockMap block;  // tr_O(G~) - G_s0 >= 0
        block.constant = neg(opts.s0->gram());
        block.coeff.assign(prog.num_vars, CMat(n_e, n_e));
        for (std::size_t k = 0; k < per; ++k)
            block.coeff[k] = partial_trace_flat(detail::herm_basis(n_eo, k), n_e, n_o);
        prog.blocks.push_back(std::move(block));
    }

    if (opts.blockdiag_objective) {
        const std::size_t t_var = per;
        prog.objective[t_var] = 1.0;
        for (std::size_t e = 0; e < n_e; ++e) {
            PsdBlockMap row;  // t - (tr_O G~)[e,e] >= 0
            row.constant = CMat(1, 1);
            row.coeff.assign(prog.num_vars, CMat(1, 1));
            for (std::size_t o = 0; o < n_o; ++o) {
                const std::size_t diag_var = e * n_o + o;  // diag vars come first
                row.coeff[diag_var](0, 0) = {-1.0, 0.0};
            }
            row.coeff[t_var](0, 0) = {1.0, 0.0};
            prog.blocks.push_back(std::move(row));
        }
    } else {
        for (std::size_t d = 0; d < n_eo; ++d) prog.objective[d] = 1.0;  // tr G~
    }

    PsdResult res = solve_psd_program(prog, opts.psd);
    if (res.status != PsdStatus::solved)
        throw error(errc::solver_failure, "quantum adversary program did not converge");

    AdversaryResult<double, QuantumSok<double>> out;
    out.value = res.value;
    out.soundness = AdvSoundness::exact_program;
    CMat g = detail::herm_from_vars(n_eo, res.y.data());
    out.witness = QuantumSok<double>(law.output_env(), clamp_psd(g), false);

    // independent recheck on the reconstructed witness
    CMat evolved = law.matrix() * out.witness.gram() * adjoint(law.matrix());
    CMat lhs = partial_trace_flat(evolved, n_e, n_i) - partial_trace_flat(out.witness.gram(), n_e, n_o);
    CMat slack = lhs - (delta.pos.gram() - delta.neg.gram());
    out.feasibility_residual = std::max(0.0, -min_eigval_herm(slack, 1e-6));
    return out;
}

UniversalResult<QuantumSok<double>, double> build_universal_algorithm(
    const QuantumSok<double>& s_tilde, const QuantumSok<double>& s_s, const QuantumSok<double>& s_r,
    const QuantumLaw<double>& law, long n_steps, const QuantumSok<double>& idle_s,
    const QuantumSok<double>& idle_r) {
    namespace d = detail;
    if (n_steps < 1) throw error(errc::dimension_mismatch, "need at least one step");
    const std::string out_name = law.output().name, in_name = law.input().name;

    for (const auto& [idle, target] : {std::pair{&idle_s, &s_s}, std::pair{&idle_r, &s_r}}) {
        if (!canonical_equal(partial_trace(*idle, out_name), *target) ||
            !canonical_equal(partial_trace(apply_law(law, *idle), in_name), *target))
            throw error(errc::idle_violation, "idle state does not reproduce its target");
    }
    {
        auto lhs = make_quasi(partial_trace(apply_law(law, s_tilde), in_name),
                              partial_trace(s_tilde, out_name));
        if (!leq_quasi(make_quasi(s_r, s_s), lhs).related)
            throw error(errc::infeasible_witness, "S~ does not satisfy the adversary constraint");
    }

    const std::size_t n_e = law.env().size();
    const std::size_t n_o = law.output().labels.size(), n_i = law.input().labels.size();
    const double n_prime = static_cast<double>(n_steps);

    const CMat psi_a = wave_factor(idle_s.gram());
    const CMat psi_b = wave_factor(idle_r.gram());
    const CMat psi_c = wave_factor(s_tilde.gram());
    const CMat a_base = wave_factor(s_s.gram());
    const CMat b_base = wave_factor(s_r.gram());

    auto cx = [](double v) { return Cx<double>(v, 0.0); };
    auto evolve = [&](const CMat& x) { return law.matrix() * x; };
    const CMat f_a = d::split_register(evolve(psi_a), n_e, n_i);
    const CMat f_b = d::split_register(evolve(psi_b), n_e, n_i);
    const CMat f_c = d::split_register(evolve(psi_c), n_e, n_i);
    const CMat d_a = d::split_register(psi_a, n_e, n_o);
    const CMat d_b = d::split_register(psi_b, n_e, n_o);
    const CMat d_c = d::split_register(psi_c, n_e, n_o);

    UniversalResult<QuantumSok<double>, double> out;
    out.error_bound = trace(s_tilde) / n_prime;

    CMat x_int = d::hcat(a_base, d::scaled(cx(1.0 / std::sqrt(n_prime)), d_c));
    CMat x_act = d::hcat(a_base, d::scaled(cx(0.0), d_c));

    auto contract_onto = [&](const CMat& source, const CMat& target) {
        CMat k = pinv(source) * target;
        out.max_step_residual =
            std::max(out.max_step_residual, std::sqrt(fro_norm_sq(source * k - target)));
        out.max_step_residual = std::max(out.max_step_residual, std::max(0.0, sv_max(k) - 1.0));
        return k;
    };

    auto target_d = [&](long k) {
        const double ak = static_cast<double>(n_steps - k) / n_prime;
        const double bk = static_cast<double>(k) / n_prime;
        return d::hcat(d::hcat(d::scaled(cx(std::sqrt(ak)), d_a), d::scaled(cx(std::sqrt(bk)), d_b)),
                       d::scaled(cx(1.0 / std::sqrt(n_prime)), d_c));
    };

    CMat k0 = contract_onto(x_int, target_d(0));
    CMat y_int = x_int * k0;
    CMat y_act = x_act * k0;
    for (long k = 0; k < n_steps; ++k) {
        const CMat fi = d::split_register(evolve(d::join_register(y_int, n_e, n_o)), n_e, n_i);
        const CMat fa = d::split_register(evolve(d::join_register(y_act, n_e, n_o)), n_e, n_i);
        const CMat target = (k + 1 < n_steps) ? target_d(k + 1) : b_base;
        const CMat km = contract_onto(fi, target);
        y_int = fi * km;
        y_act = fa * km;
    }

    CMat diff = y_int - y_act;
    out.error = fro_norm_sq(diff);  // squared L2 deviation of representatives
    CMat gap_gram(n_e, n_e);
    for (std::size_t i = 0; i < n_e; ++i)
        for (std::size_t j = 0; j < n_e; ++j) {
            Cx<double> acc{0.0, 0.0};
            for (std::size_t m = 0; m < diff.cols(); ++m) acc += diff(i, m) * conj(diff(j, m));
            gap_gram(i, j) = acc;
        }
    out.delta_certificate = QuantumSok<double>(s_r.env(), clamp_psd(gap_gram), false);

    out.plan.initial = add(s_s, scalar_mul(1.0 / n_prime, partial_trace(s_tilde, out_name)));
    for (long k = 0; k < n_steps; ++k) {
        const double ak = static_cast<double>(n_steps - k) / n_prime;
        const double bk = static_cast<double>(k) / n_prime;
        out.plan.steps.push_back(add(add(scalar_mul(ak, idle_s), scalar_mul(bk, idle_r)),
                                     scalar_mul(1.0 / n_prime, s_tilde)));
    }
    return out;
}

}  // namespace qk
