// evolution.hpp - agent/environment dynamics: laws of nature, step evolution,
// plan simulation, lazy observation, the Poisson power series, and the
// coin-bias scenario with its golden data.
#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qk/eig.hpp"
#include "qk/order.hpp"
#include "qk/sok.hpp"

namespace qk {

// --------------------------------------------------------------------------
// Laws of nature

// Classical law: substochastic transition matrix over (E x I) x (E x O),
// row index e*|I|+i, column index e*|O|+o.
template <typename T>
class ClassicalLaw {
    using st = scalar_traits<T>;

   public:
    ClassicalLaw(EnvSpace env, EnvFactor input, EnvFactor output, Mat<T> t)
        : env_(std::move(env)), input_(std::move(input)), output_(std::move(output)), t_(std::move(t)) {
        const std::size_t rows = env_.size() * input_.labels.size();
        const std::size_t cols = env_.size() * output_.labels.size();
        if (t_.rows() != rows || t_.cols() != cols)
            throw error(errc::dimension_mismatch, "law matrix must be (E*I) x (E*O)");
        T worst{};
        for (std::size_t j = 0; j < cols; ++j) {
            T colsum{};
            for (std::size_t i = 0; i < rows; ++i) {
                if (t_(i, j) < -st::tol())
                    throw error(errc::negative_scalar, "law entries must be nonnegative");
                colsum += t_(i, j);
            }
            if (colsum > worst) worst = colsum;
        }
        if (st::to_double(worst) > 1.0 + st::to_double(st::tol()) + 1e-12)
            throw error(errc::normalization_violation, "law column sums must be <= 1");
        near_boundary_ = st::to_double(worst) > 1.0 - 1e-9;
        blockdiag_ = detect_blockdiag();
    }

    const EnvSpace& env() const { return env_; }
    const EnvFactor& input() const { return input_; }
    const EnvFactor& output() const { return output_; }
    const Mat<T>& matrix() const { return t_; }
    bool blockdiag_in_env() const { return blockdiag_; }
    bool near_boundary() const { return near_boundary_; }

    EnvSpace output_env() const { return EnvSpace::product(env_, EnvSpace::from_factors({output_})); }
    EnvSpace input_env() const { return EnvSpace::product(env_, EnvSpace::from_factors({input_})); }

   private:
    bool detect_blockdiag() const {
        const std::size_t ni = input_.labels.size(), no = output_.labels.size();
        for (std::size_t e = 0; e < env_.size(); ++e)
            for (std::size_t i = 0; i < ni; ++i)
                for (std::size_t e2 = 0; e2 < env_.size(); ++e2) {
                    if (e2 == e) continue;
                    for (std::size_t o = 0; o < no; ++o)
                        if (!st::is_zero(t_(e * ni + i, e2 * no + o))) return false;
                }
        return true;
    }

    EnvSpace env_;
    EnvFactor input_, output_;
    Mat<T> t_;
    bool blockdiag_ = false;
    bool near_boundary_ = false;
};

// Quantum law: 2-norm contraction over the same index layout. The norm check
// runs in double precision in both modes (singular values are not rational).
template <typename T>
class QuantumLaw {
   public:
    QuantumLaw(EnvSpace env, EnvFactor input, EnvFactor output, Mat<Cx<T>> t)
        : env_(std::move(env)), input_(std::move(input)), output_(std::move(output)), t_(std::move(t)) {
        const std::size_t rows = env_.size() * input_.labels.size();
        const std::size_t cols = env_.size() * output_.labels.size();
        if (t_.rows() != rows || t_.cols() != cols)
            throw error(errc::dimension_mismatch, "law matrix must be (E*I) x (E*O)");
        const double sv = sv_max(to_double_gram(t_));
        if (sv > 1.0 + 1e-7) throw error(errc::normalization_violation, "law must be a 2-norm contraction");
        near_boundary_ = sv > 1.0 - 1e-9;
        blockdiag_ = detect_blockdiag();
    }

    const EnvSpace& env() const { return env_; }
    const EnvFactor& input() const { return input_; }
    const EnvFactor& output() const { return output_; }
    const Mat<Cx<T>>& matrix() const { return t_; }
    bool blockdiag_in_env() const { return blockdiag_; }
    bool near_boundary() const { return near_boundary_; }

    EnvSpace output_env() const { return EnvSpace::product(env_, EnvSpace::from_factors({output_})); }
    EnvSpace input_env() const { return EnvSpace::product(env_, EnvSpace::from_factors({input_})); }

   private:
    bool detect_blockdiag() const {
        using st = scalar_traits<T>;
        const std::size_t ni = input_.labels.size(), no = output_.labels.size();
        for (std::size_t e = 0; e < env_.size(); ++e)
            for (std::size_t i = 0; i < ni; ++i)
                for (std::size_t e2 = 0; e2 < env_.size(); ++e2) {
                    if (e2 == e) continue;
                    for (std::size_t o = 0; o < no; ++o) {
                        const auto& v = t_(e * ni + i, e2 * no + o);
                        if (!(st::is_zero(v.re) && st::is_zero(v.im))) return false;
                    }
                }
        return true;
    }

    EnvSpace env_;
    EnvFactor input_, output_;
    Mat<Cx<T>> t_;
    bool blockdiag_ = false;
    bool near_boundary_ = false;
};

// --------------------------------------------------------------------------
// Evolution

template <typename T>
ClassicalSok<T> apply_law(const ClassicalLaw<T>& law, const ClassicalSok<T>& s_out) {
    if (!(s_out.env() == law.output_env()))
        throw error(errc::dimension_mismatch, "apply_law: state must live over E x O");
    std::vector<std::vector<T>> cols;
    const auto& t = law.matrix();
    for (const auto& c : s_out.columns()) {
        std::vector<T> v(t.rows(), T{});
        for (std::size_t i = 0; i < t.rows(); ++i)
            for (std::size_t j = 0; j < t.cols(); ++j)
                if (!scalar_traits<T>::is_zero(t(i, j))) v[i] += t(i, j) * (c.weight * c.dist[j]);
        cols.push_back(std::move(v));
    }
    return ClassicalSok<T>::from_columns(law.input_env(), cols);
}

template <typename T>
QuantumSok<T> apply_law(const QuantumLaw<T>& law, const QuantumSok<T>& s_out) {
    if (!(s_out.env() == law.output_env()))
        throw error(errc::dimension_mismatch, "apply_law: state must live over E x O");
    Mat<Cx<T>> g = law.matrix() * s_out.gram() * adjoint(law.matrix());
    return QuantumSok<T>(law.input_env(), std::move(g), false);
}

// One interaction round: verify tr_O(S_O) <= S, evolve, absorb the input.
template <typename T>
ClassicalSok<T> step(const ClassicalSok<T>& s, const ClassicalSok<T>& plan_output,
                     const ClassicalLaw<T>& law) {
    auto feas = leq_classical(partial_trace(plan_output, law.output().name), s);
    if (!feas.related)
        throw error(errc::infeasible_output, "step: tr_O(S_O) <= S fails (residual " +
                                                 std::to_string(feas.residual) + ")");
    return canonicalize(partial_trace(apply_law(law, plan_output), law.input().name));
}

template <typename T>
QuantumSok<T> step(const QuantumSok<T>& s, const QuantumSok<T>& plan_output,
                   const QuantumLaw<T>& law) {
    auto feas = leq_quantum(partial_trace(plan_output, law.output().name), s);
    if (!feas.related)
        throw error(errc::infeasible_output, "step: tr_O(S_O) <= S fails (residual " +
                                                 std::to_string(feas.residual) + ")");
    return partial_trace(apply_law(law, plan_output), law.input().name);
}

template <typename S>
struct AlgorithmPlan {
    S initial;             // declared S_0 over E
    std::vector<S> steps;  // outputs S_{O,k} over E x O
};

template <typename S>
struct SimulationTrace {
    std::vector<S> states;          // S_0 .. S_N over E
    std::vector<double> residuals;  // per-step feasibility recheck residuals
    S accumulated;                  // sum of the S_{O,k} over E x O
    bool accumulation_ok = false;   // tr(accumulated) <= N tr(S_0)
    bool per_env_ok = true;         // blockdiag laws: per-e accumulation inequality
    // the accumulated state satisfies the transformation constraint
    // tr_I(T(S~)) - tr_O(S~) >= S_N - S_0
    bool witness_constraint_ok = false;
};

template <typename T>
SimulationTrace<ClassicalSok<T>> simulate(const AlgorithmPlan<ClassicalSok<T>>& plan,
                                          const ClassicalLaw<T>& law, const ClassicalSok<T>& s0) {
    using st = scalar_traits<T>;
    SimulationTrace<ClassicalSok<T>> sim;
    sim.states.push_back(canonicalize(s0));
    ClassicalSok<T> acc = ClassicalSok<T>::zero(law.output_env());
    for (const auto& out : plan.steps) {
        auto feas = leq_classical(partial_trace(out, law.output().name), sim.states.back());
        if (!feas.related)
            throw error(errc::infeasible_output,
                        "simulate: infeasible output at step " + std::to_string(sim.residuals.size()));
        sim.residuals.push_back(feas.residual);
        sim.states.push_back(canonicalize(partial_trace(apply_law(law, out), law.input().name)));
        acc = canonicalize(add(acc, out));
    }
    sim.accumulated = acc;
    const T n = st::from_int(static_cast<long>(plan.steps.size()));
    const double tol = st::exact ? 0.0 : float_eps();
    sim.accumulation_ok = st::to_double(trace(acc)) <= st::to_double(T(n * trace(s0))) + tol;
    if (law.blockdiag_in_env()) {
        const auto acc_e = eval(partial_trace(acc, law.output().name));
        const auto s0_e = eval(s0);
        for (std::size_t e = 0; e < acc_e.size(); ++e)
            if (st::to_double(acc_e[e]) > st::to_double(T(n * s0_e[e])) + tol) sim.per_env_ok = false;
    }
    {
        auto lhs = make_quasi(partial_trace(apply_law(law, acc), law.input().name),
                              partial_trace(acc, law.output().name));
        auto achieved = make_quasi(sim.states.back(), sim.states.front());
        sim.witness_constraint_ok = leq_quasi(achieved, lhs).related;
    }
    return sim;
}

template <typename T>
SimulationTrace<QuantumSok<T>> simulate(const AlgorithmPlan<QuantumSok<T>>& plan,
                                        const QuantumLaw<T>& law, const QuantumSok<T>& s0) {
    using st = scalar_traits<T>;
    SimulationTrace<QuantumSok<T>> sim;
    sim.states.push_back(s0);
    QuantumSok<T> acc = QuantumSok<T>::zero(law.output_env());
    for (const auto& out : plan.steps) {
        auto feas = leq_quantum(partial_trace(out, law.output().name), sim.states.back());
        if (!feas.related)
            throw error(errc::infeasible_output,
                        "simulate: infeasible output at step " + std::to_string(sim.residuals.size()));
        sim.residuals.push_back(feas.residual);
        sim.states.push_back(partial_trace(apply_law(law, out), law.input().name));
        acc = add(acc, out);
    }
    sim.accumulated = acc;
    const T n = st::from_int(static_cast<long>(plan.steps.size()));
    const double tol = st::exact ? 0.0 : float_eps();
    sim.accumulation_ok = st::to_double(trace(acc)) <= st::to_double(T(n * trace(s0))) + tol;
    if (law.blockdiag_in_env()) {
        const auto acc_e = eval(partial_trace(acc, law.output().name));
        const auto s0_e = eval(s0);
        for (std::size_t e = 0; e < acc_e.size(); ++e)
            if (st::to_double(acc_e[e]) > st::to_double(T(n * s0_e[e])) + tol) sim.per_env_ok = false;
    }
    {
        auto lhs = make_quasi(partial_trace(apply_law(law, acc), law.input().name),
                              partial_trace(acc, law.output().name));
        auto achieved = make_quasi(sim.states.back(), sim.states.front());
        sim.witness_constraint_ok = leq_quasi(achieved, lhs).related;
    }
    return sim;
}

// --------------------------------------------------------------------------
// Lazy observation and the Poisson series (classical multipliers)

// p_obs * Q + (1 - p_obs) * 1
template <typename T>
ClassicalSok<T> lazy_observation(const ClassicalSok<T>& q, const T& p_obs) {
    if (p_obs < T{} || p_obs > T(1))
        throw error(errc::normalization_violation, "observation probability outside [0,1]");
    return add(scalar_mul(p_obs, q), scalar_mul(T(T(1) - p_obs), embed_real<T>(q.env(), T(1))));
}

struct SeriesTruncation {
    long max_power = 0;  // highest retained power K
};

template <typename T>
struct PoissonSeriesResult {
    // sum_{k<=K} (rt)^k/k! A^k S0, with the global prefactor e^{-rt} kept
    // symbolic (coefficients below are exact in rational mode).
    ClassicalSok<T> sum;
    std::vector<T> coefficients;  // (rt)^k / k!
    T rt{};
    double prefactor = 0.0;   // e^{-rt} as a double
    double tail_bound = 0.0;  // bound on the trace mass beyond K, prefactor applied
};

template <typename T>
PoissonSeriesResult<T> poisson_series(const ClassicalSok<T>& multiplier, const ClassicalSok<T>& s0,
                                      const T& rt, const SeriesTruncation& trunc,
                                      double tail_tolerance = std::numeric_limits<double>::infinity()) {
    using st = scalar_traits<T>;
    require_same_env(multiplier.env(), s0.env());
    if (rt < T{}) throw error(errc::negative_scalar, "rt must be nonnegative");
    if (trunc.max_power < 0) throw error(errc::truncation_too_small, "K must be >= 0");

    PoissonSeriesResult<T> out;
    out.rt = rt;
    out.prefactor = std::exp(-st::to_double(rt));

    ClassicalSok<T> power = s0;  // A^k S0
    ClassicalSok<T> acc = ClassicalSok<T>::zero(s0.env());
    T coeff = T(1);
    for (long k = 0; k <= trunc.max_power; ++k) {
        if (k > 0) {
            power = canonicalize(mul(multiplier, power));
            coeff = T(coeff * rt / T(k));
        }
        out.coefficients.push_back(coeff);
        acc = add(acc, scalar_mul(coeff, power));
    }
    out.sum = canonicalize(acc);

    // tail: tr(S0) e^{-rt} sum_{k>K} (g rt)^k / k!  <=  tr(S0) e^{-rt} (g rt)^{K+1}/(K+1)! e^{g rt}
    double g = 0.0;
    for (const auto& v : eval(multiplier)) g = std::max(g, st::to_double(v));
    const double x = g * st::to_double(rt);
    double lead = 1.0;
    for (long k = 1; k <= trunc.max_power + 1; ++k) lead *= x / static_cast<double>(k);
    out.tail_bound = st::to_double(trace(s0)) * out.prefactor * lead * std::exp(x);
    if (out.tail_bound > tail_tolerance)
        throw error(errc::truncation_too_small, "Poisson tail bound exceeds the requested tolerance");
    return out;
}

// --------------------------------------------------------------------------
// Coin-bias scenario

template <typename T>
struct CoinScenario {
    EnvSpace env;                 // {HeadsBiased, TailsBiased}
    ClassicalSok<T> q;            // observation multiplier
    ClassicalSok<T> s0;           // prior
    ClassicalLaw<T> observe_law;  // |O| = 1: always observe one flip
    ClassicalLaw<T> law;          // O = {idle, obs}: the agent chooses
};

template <typename T>
CoinScenario<T> coin_scenario(const T& bias, const std::vector<T>& prior) {
    if (bias < T{} || bias > T(1))
        throw error(errc::normalization_violation, "bias outside [0,1]");
    if (prior.size() != 2) throw error(errc::dimension_mismatch, "prior must have 2 entries");

    EnvSpace env = EnvSpace::simple({"HeadsBiased", "TailsBiased"});
    const T b = bias, nb = T(T(1) - bias);

    // columns h, t of the conditional observation matrix
    ClassicalSok<T> q = ClassicalSok<T>::from_columns(env, {{b, nb}, {nb, b}});
    ClassicalSok<T> s0 = ClassicalSok<T>::from_columns(env, {prior});

    EnvFactor obs_in{"I", {"h", "t"}};
    EnvFactor trivial_out{"O", {"go"}};
    Mat<T> t_obs(env.size() * 2, env.size() * 1);
    // column (e, go) -> rows (e, h), (e, t) with the conditional probabilities
    t_obs(0 * 2 + 0, 0) = b;   // heads-biased coin shows h
    t_obs(0 * 2 + 1, 0) = nb;  // heads-biased coin shows t
    t_obs(1 * 2 + 0, 1) = nb;
    t_obs(1 * 2 + 1, 1) = b;
    ClassicalLaw<T> observe_law(env, obs_in, trivial_out, std::move(t_obs));

    EnvFactor choice_in{"I", {"none", "h", "t"}};
    EnvFactor choice_out{"O", {"idle", "obs"}};
    Mat<T> t_choice(env.size() * 3, env.size() * 2);
    for (std::size_t e = 0; e < 2; ++e) {
        t_choice(e * 3 + 0, e * 2 + 0) = T(1);              // idle -> none
        t_choice(e * 3 + 1, e * 2 + 1) = e == 0 ? b : nb;   // obs -> h
        t_choice(e * 3 + 2, e * 2 + 1) = e == 0 ? nb : b;   // obs -> t
    }
    ClassicalLaw<T> law(env, choice_in, choice_out, std::move(t_choice));

    return CoinScenario<T>{std::move(env), std::move(q), std::move(s0), std::move(observe_law),
                           std::move(law)};
}

// Place a state over E into E x O, concentrated on one output label.
template <typename T>
ClassicalSok<T> at_output(const ClassicalSok<T>& s, const EnvFactor& out_reg,
                          const std::string& label) {
    EnvSpace big = EnvSpace::product(s.env(), EnvSpace::from_factors({out_reg}));
    std::size_t o = 0;
    while (o < out_reg.labels.size() && out_reg.labels[o] != label) ++o;
    if (o == out_reg.labels.size()) throw error(errc::unknown_label, "unknown output label: " + label);
    const std::size_t no = out_reg.labels.size();
    std::vector<std::vector<T>> cols;
    for (const auto& c : s.columns()) {
        std::vector<T> v(big.size(), T{});
        for (std::size_t e = 0; e < c.dist.size(); ++e) v[e * no + o] = c.weight * c.dist[e];
        cols.push_back(std::move(v));
    }
    return ClassicalSok<T>::from_columns(big, cols);
}

}  // namespace qk
