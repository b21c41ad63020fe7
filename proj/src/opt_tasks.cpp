// opt_tasks.cpp - quantum payoff and trace-distance programs (double mode).

#include "qk/opt_tasks.hpp"

namespace qk {

namespace {

using detail::herm_basis;
using detail::herm_dim;
using detail::herm_from_vars;

// Blocks G_c >= 0 for each output plus gram - sum_c G_c >= 0; the objective
// rides on the diagonal variables.
PsdProgram payoff_program(const QuantumSok<double>& s, const PayoffSpec<double>& spec,
                          bool worstcase) {
    const std::size_t n = s.env().size();
    const std::size_t n_c = spec.outputs.labels.size();
    if (spec.utility.rows() != n || spec.utility.cols() != n_c)
        throw error(errc::dimension_mismatch, "utility must be |E| x |C|");
    const std::size_t per = herm_dim(n);
    const std::size_t n_vars = n_c * per + (worstcase ? 1 : 0);

    PsdProgram prog;
    prog.num_vars = n_vars;
    prog.objective.assign(n_vars, 0.0);

    for (std::size_t c = 0; c < n_c; ++c) {
        PsdBlockMap block;
        block.constant = Mat<Cx<double>>(n, n);
        block.coeff.assign(n_vars, Mat<Cx<double>>(n, n));
        for (std::size_t k = 0; k < per; ++k) block.coeff[c * per + k] = herm_basis(n, k);
        prog.blocks.push_back(std::move(block));
    }
    PsdBlockMap budget;
    budget.constant = s.gram();
    budget.coeff.assign(n_vars, Mat<Cx<double>>(n, n));
    for (std::size_t c = 0; c < n_c; ++c)
        for (std::size_t k = 0; k < per; ++k) {
            Mat<Cx<double>> b = herm_basis(n, k);
            Mat<Cx<double>> neg(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) neg(i, j) = -b(i, j);
            budget.coeff[c * per + k] = std::move(neg);
        }
    prog.blocks.push_back(std::move(budget));

    double payoff_cap = 1.0;
    for (std::size_t e = 0; e < n; ++e) {
        double vmax = 0.0;
        for (std::size_t c = 0; c < n_c; ++c) vmax = std::max(vmax, std::fabs(spec.utility(e, c)));
        payoff_cap += vmax * s.gram()(e, e).re;
    }

    if (!worstcase) {
        for (std::size_t c = 0; c < n_c; ++c)
            for (std::size_t e = 0; e < n; ++e) prog.objective[c * per + e] = -spec.utility(e, c);
        prog.objective_lower_bound = -payoff_cap;
    } else {
        const std::size_t lambda = n_vars - 1;
        prog.objective[lambda] = -1.0;
        prog.objective_lower_bound = -payoff_cap;
        for (std::size_t e = 0; e < n; ++e) {
            PsdBlockMap row;  // 1x1 block: sum_c V[e,c] G_c[e,e] - lambda >= 0
            row.constant = Mat<Cx<double>>(1, 1);
            row.coeff.assign(n_vars, Mat<Cx<double>>(1, 1));
            for (std::size_t c = 0; c < n_c; ++c)
                row.coeff[c * per + e](0, 0) = {spec.utility(e, c), 0.0};
            row.coeff[lambda](0, 0) = {-1.0, 0.0};
            prog.blocks.push_back(std::move(row));
        }
    }
    return prog;
}

QuantumPayoffResult run_payoff(const QuantumSok<double>& s, const PayoffSpec<double>& spec,
                               bool worstcase, const PsdOptions& opts) {
    PsdProgram prog = payoff_program(s, spec, worstcase);
    PsdResult res = solve_psd_program(prog, opts);
    if (res.status != PsdStatus::solved)
        throw error(errc::solver_failure, "quantum payoff program did not converge");
    const std::size_t n = s.env().size();
    const std::size_t per = herm_dim(n);
    QuantumPayoffResult out;
    out.value = -res.value;
    out.residual = res.residual;
    for (std::size_t c = 0; c < spec.outputs.labels.size(); ++c)
        out.blocks.push_back(herm_from_vars(n, res.y.data() + c * per));
    return out;
}

}  // namespace

QuantumPayoffResult payoff_average(const QuantumSok<double>& s, const PayoffSpec<double>& spec,
                                   const PsdOptions& opts) {
    return run_payoff(s, spec, false, opts);
}

QuantumPayoffResult payoff_worstcase(const QuantumSok<double>& s, const PayoffSpec<double>& spec,
                                     const PsdOptions& opts) {
    return run_payoff(s, spec, true, opts);
}

double trace_distance_psd(const Mat<Cx<double>>& diff, const PsdOptions& opts) {
    const std::size_t n = diff.rows();
    const std::size_t per = detail::herm_dim(n);
    PsdProgram prog;
    prog.num_vars = per;
    prog.objective.assign(per, 0.0);
    for (std::size_t e = 0; e < n; ++e) prog.objective[e] = 1.0;  // tr D
    prog.objective_lower_bound = 0.0;

    for (int sign : {+1, -1}) {
        PsdBlockMap block;  // D -+ diff >= 0
        block.constant = Mat<Cx<double>>(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                block.constant(i, j) = Cx<double>(-sign * diff(i, j).re, -sign * diff(i, j).im);
        block.coeff.reserve(per);
        for (std::size_t k = 0; k < per; ++k) block.coeff.push_back(detail::herm_basis(n, k));
        prog.blocks.push_back(std::move(block));
    }

    PsdResult res = solve_psd_program(prog, opts);
    if (res.status != PsdStatus::solved)
        throw error(errc::solver_failure, "trace-distance PSD program did not converge");
    return res.value;
}

}  // namespace qk
