// qk_main.cpp - command-line surface for the quasiknowledge library.
//
// Exit codes: 0 success, 1 domain error, 2 malformed input, 130 interrupted.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <variant>

#include "CLI11.hpp"

#include "qk/adversary.hpp"
#include "qk/csv.hpp"
#include "qk/evolution.hpp"
#include "qk/json_io.hpp"
#include "qk/opt_tasks.hpp"
#include "qk/order.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

void handle_sigint(int) { g_interrupted.store(true); }

qk::LpOptions lp_options() {
    qk::LpOptions o;
    o.cancel = qk::CancelToken(&g_interrupted);
    return o;
}

qk::PsdOptions psd_options() {
    qk::PsdOptions o;
    o.cancel = qk::CancelToken(&g_interrupted);
    return o;
}

qk::SokVariant load_sok(const std::string& path) { return qk::parse_sok(qk::load_json_file(path)); }

// Pull two SOK files into a common kind/mode pair, promoting exact to float
// when the modes disagree.
template <typename Fn>
int with_sok_pair(const std::string& a_path, const std::string& b_path, Fn&& fn) {
    using namespace qk;
    SokVariant a = load_sok(a_path), b = load_sok(b_path);
    if (a.index() == b.index()) return std::visit(
        [&](auto& lhs) {
            using T = std::decay_t<decltype(lhs)>;
            return fn(lhs, std::get<T>(b));
        },
        a);
    // classical exact + classical float (either order) -> float
    if (std::holds_alternative<ClassicalSok<Rat>>(a) && std::holds_alternative<ClassicalSok<double>>(b))
        return fn(to_float(std::get<ClassicalSok<Rat>>(a)), std::get<ClassicalSok<double>>(b));
    if (std::holds_alternative<ClassicalSok<double>>(a) && std::holds_alternative<ClassicalSok<Rat>>(b))
        return fn(std::get<ClassicalSok<double>>(a), to_float(std::get<ClassicalSok<Rat>>(b)));
    if (std::holds_alternative<QuantumSok<Rat>>(a) && std::holds_alternative<QuantumSok<double>>(b))
        return fn(to_float(std::get<QuantumSok<Rat>>(a)), std::get<QuantumSok<double>>(b));
    if (std::holds_alternative<QuantumSok<double>>(a) && std::holds_alternative<QuantumSok<Rat>>(b))
        return fn(std::get<QuantumSok<double>>(a), to_float(std::get<QuantumSok<Rat>>(b)));
    throw qk::error(qk::errc::kind_mismatch, "inputs mix classical and quantum states");
}

void maybe_save(const std::optional<std::string>& path, const qk::json& j) {
    if (path) qk::save_json_file(*path, j);
}

template <typename T>
qk::PayoffSpec<T> load_payoff_spec(const std::string& path) {
    using namespace qk;
    json j = load_json_file(path);
    if (!j.contains("outputs") || !j.contains("V"))
        throw error(errc::parse_error, "utility file needs outputs and V");
    PayoffSpec<T> spec;
    spec.outputs.name = "C";
    spec.outputs.labels = j["outputs"].get<std::vector<std::string>>();
    const auto& vj = j["V"];
    spec.utility = Mat<T>(vj.size(), spec.outputs.labels.size());
    for (std::size_t e = 0; e < vj.size(); ++e)
        for (std::size_t c = 0; c < spec.outputs.labels.size(); ++c) {
            const auto& cell = vj[e][c];
            if constexpr (scalar_traits<T>::exact)
                spec.utility(e, c) = cell.is_string() ? parse_rat(cell.get<std::string>())
                                                      : [&] {
                                                            Rat r(cell.get<double>());
                                                            r.canonicalize();
                                                            return r;
                                                        }();
            else
                spec.utility(e, c) = cell.is_string() ? parse_rat(cell.get<std::string>()).get_d()
                                                      : cell.get<double>();
        }
    return spec;
}

template <typename T>
std::string fmt(const T& v) {
    if constexpr (qk::scalar_traits<T>::exact)
        return qk::format_rat(v);
    else
        return std::to_string(v);
}

// ---------------------------------------------------------------------------
// verb implementations

int run_canon(const std::string& in, const std::optional<std::string>& json_out) {
    using namespace qk;
    auto v = load_sok(in);
    return std::visit(
        [&](auto& s) {
            if constexpr (requires { s.columns(); }) {
                auto canon = canonicalize(s);
                const auto labels = canon.env().flat_labels();
                std::cout << "canonical columns: " << canon.columns().size() << "\n";
                for (const auto& c : canon.columns()) {
                    std::cout << "  weight " << fmt(c.weight) << " :";
                    for (std::size_t e = 0; e < c.dist.size(); ++e)
                        std::cout << " " << labels[e] << "=" << fmt(c.dist[e]);
                    std::cout << "\n";
                }
                std::cout << "trace " << fmt(trace(canon)) << "\n";
                maybe_save(json_out, emit_sok(canon));
            } else {
                std::cout << "gram is already canonical; trace " << fmt(trace(s)) << "\n";
                maybe_save(json_out, emit_sok(s));
            }
            return 0;
        },
        v);
}

int run_leq(const std::string& a, const std::string& b, const std::optional<std::string>& wit_out,
            const std::optional<std::string>& json_out) {
    using namespace qk;
    return with_sok_pair(a, b, [&](const auto& lhs, const auto& rhs) {
        auto verdict = [&] {
            if constexpr (requires { lhs.columns(); })
                return leq_classical(lhs, rhs, lp_options());
            else
                return leq_quantum(lhs, rhs);
        }();
        std::cout << (verdict.related ? "true" : "false") << "\n";
        if (verdict.related && verdict.witness) {
            std::cout << "residual " << verdict.residual << "\n";
            if (verdict.witness->kind == WitnessKind::classical_substochastic)
                std::cout << "witness max column sum " << fmt(verdict.witness->norm) << "\n";
            else if (!verdict.witness->eigs.empty())
                std::cout << "min eigenvalue " << verdict.witness->eigs.back() << "\n";
            if (wit_out) save_json_file(*wit_out, emit_witness(*verdict.witness, "a<=b"));
        }
        if (json_out) {
            json j;
            j["related"] = verdict.related;
            j["residual"] = verdict.residual;
            if (verdict.related && verdict.witness) j["witness"] = emit_witness(*verdict.witness, "a<=b");
            save_json_file(*json_out, j);
        }
        return 0;
    });
}

int run_equiv(const std::string& a, const std::string& b, const std::optional<std::string>& json_out) {
    using namespace qk;
    return with_sok_pair(a, b, [&](const auto& lhs, const auto& rhs) {
        auto r = [&] {
            if constexpr (requires { lhs.columns(); })
                return equivalent(lhs, rhs, lp_options());
            else
                return equivalent(lhs, rhs);
        }();
        std::cout << (r.equivalent ? "true" : "false") << "\n";
        if (!r.cross_check_ok)
            std::cout << "warning: canonical-form and witness-LP verdicts disagree\n";
        if (json_out) {
            json j;
            j["equivalent"] = r.equivalent;
            j["cross_check_ok"] = r.cross_check_ok;
            j["forward_related"] = r.forward.related;
            j["backward_related"] = r.backward.related;
            save_json_file(*json_out, j);
        }
        return 0;
    });
}

int run_entropy(const std::string& in) {
    using namespace qk;
    auto v = load_sok(in);
    return std::visit(
        [&](auto& s) {
            if constexpr (requires { s.columns(); }) {
                std::cout.precision(15);
                std::cout << expected_entropy(s) << "\n";
                return 0;
            } else {
                throw error(errc::kind_mismatch, "expected entropy is defined for classical states");
                return 1;
            }
        },
        v);
}

int run_dist(const std::string& a, const std::string& b, const std::optional<std::string>& json_out) {
    using namespace qk;
    return with_sok_pair(a, b, [&](const auto& lhs, const auto& rhs) {
        if constexpr (requires { lhs.columns(); }) {
            using TT = std::decay_t<decltype(trace(lhs))>;
            auto res = trace_distance(lhs, rhs, std::optional<Dictionary<TT>>{}, lp_options());
            std::cout << "upper bound " << fmt(res.value) << " (dictionary-truncated)\n";
            std::cout << "recheck residual " << res.residual << "\n";
            if (json_out) {
                json j;
                j["value"] = fmt(res.value);
                j["soundness"] = "upper-bound";
                j["delta"] = emit_sok(res.delta);
                save_json_file(*json_out, j);
            }
        } else {
            using S = std::decay_t<decltype(lhs)>;
            QuantumSok<double> qa = [&] {
                if constexpr (std::is_same_v<S, QuantumSok<Rat>>)
                    return to_float(lhs);
                else
                    return lhs;
            }();
            QuantumSok<double> qb = [&] {
                if constexpr (std::is_same_v<S, QuantumSok<Rat>>)
                    return to_float(rhs);
                else
                    return rhs;
            }();
            auto res = trace_distance(qa, qb);
            std::cout.precision(15);
            std::cout << res.value << "\n";
            double psd = trace_distance_psd(qa.gram() - qb.gram(), psd_options());
            std::cout << "psd-program cross-check " << psd << "\n";
            if (json_out) {
                json j;
                j["value"] = res.value;
                j["psd_value"] = psd;
                j["delta"] = emit_sok(res.delta);
                save_json_file(*json_out, j);
            }
        }
        return 0;
    });
}

int run_payoff(const std::string& s_path, const std::string& v_path, bool worst,
               const std::optional<std::string>& json_out) {
    using namespace qk;
    auto v = load_sok(s_path);
    return std::visit(
        [&](auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ClassicalSok<Rat>>) {
                auto spec = load_payoff_spec<Rat>(v_path);
                auto res = worst ? payoff_worstcase(s, spec, lp_options())
                                 : payoff_average(s, spec, lp_options());
                std::cout << "value " << format_rat(res.value) << "\n";
                if (json_out) {
                    json j;
                    j["value"] = format_rat(res.value);
                    save_json_file(*json_out, j);
                }
            } else if constexpr (std::is_same_v<S, ClassicalSok<double>>) {
                auto spec = load_payoff_spec<double>(v_path);
                auto res = worst ? payoff_worstcase(s, spec, lp_options())
                                 : payoff_average(s, spec, lp_options());
                std::cout << "value " << res.value << "\n";
                if (json_out) {
                    json j;
                    j["value"] = res.value;
                    save_json_file(*json_out, j);
                }
            } else {
                QuantumSok<double> qs = [&] {
                    if constexpr (std::is_same_v<S, QuantumSok<Rat>>)
                        return to_float(s);
                    else
                        return s;
                }();
                auto spec = load_payoff_spec<double>(v_path);
                auto res = worst ? payoff_worstcase(qs, spec, psd_options())
                                 : payoff_average(qs, spec, psd_options());
                std::cout << "value " << res.value << " (residual " << res.residual << ")\n";
                if (json_out) {
                    json j;
                    j["value"] = res.value;
                    j["residual"] = res.residual;
                    save_json_file(*json_out, j);
                }
            }
            return 0;
        },
        v);
}

int run_adv(const std::string& target_path, const std::string& start_path,
            const std::string& law_path, bool blockdiag, const std::optional<std::string>& s0_path,
            bool strengthen, const std::optional<std::string>& json_out) {
    using namespace qk;
    auto law_v = parse_law(load_json_file(law_path));
    return with_sok_pair(target_path, start_path, [&](const auto& target, const auto& start) {
        using S = std::decay_t<decltype(target)>;
        if constexpr (std::is_same_v<S, ClassicalSok<Rat>>) {
            AdversaryOptions<Rat> opts;
            opts.blockdiag_objective = blockdiag;
            opts.strengthen = strengthen;
            opts.lp = lp_options();
            if (s0_path) opts.s0 = std::get<ClassicalSok<Rat>>(load_sok(*s0_path));
            auto res = adversary_bound(make_quasi(target, start), std::get<ClassicalLaw<Rat>>(law_v),
                                       opts);
            std::cout << "value " << format_rat(res.value) << " (truncated estimate)\n";
            std::cout << "witness trace " << format_rat(trace(res.witness)) << ", recheck residual "
                      << res.feasibility_residual << "\n";
            std::cout << "implied steps >= " << adversary_step_bound(res.value, trace(start))
                      << " (estimate)\n";
            if (json_out) {
                json j;
                j["value"] = format_rat(res.value);
                j["soundness"] = "truncated";
                j["witness"] = emit_sok(res.witness);
                j["residual"] = res.feasibility_residual;
                save_json_file(*json_out, j);
            }
        } else if constexpr (std::is_same_v<S, QuantumSok<double>>) {
            QuantumAdversaryOptions opts;
            opts.blockdiag_objective = blockdiag;
            opts.strengthen = strengthen;
            opts.psd = psd_options();
            if (s0_path) opts.s0 = std::get<QuantumSok<double>>(load_sok(*s0_path));
            auto law = std::holds_alternative<QuantumLaw<double>>(law_v)
                           ? std::get<QuantumLaw<double>>(law_v)
                           : to_float(std::get<QuantumLaw<Rat>>(law_v));
            auto res = adversary_bound(make_quasi(target, start), law, opts);
            std::cout << "value " << res.value << " (exact program)\n";
            std::cout << "recheck residual " << res.feasibility_residual << "\n";
            if (json_out) {
                json j;
                j["value"] = res.value;
                j["soundness"] = "exact";
                j["witness"] = emit_sok(res.witness);
                j["residual"] = res.feasibility_residual;
                save_json_file(*json_out, j);
            }
        } else {
            throw error(errc::kind_mismatch,
                        "adversary bound: use exact classical or float quantum states");
        }
        return 0;
    });
}

int run_build_alg(const std::string& stilde, const std::string& start, const std::string& target,
                  const std::string& law_path, long steps, const std::string& idle_start,
                  const std::string& idle_target, const std::string& out_dir) {
    using namespace qk;
    namespace fs = std::filesystem;
    auto law_v = parse_law(load_json_file(law_path));
    auto w = load_sok(stilde);
    if (!std::holds_alternative<ClassicalSok<Rat>>(w))
        throw error(errc::kind_mismatch, "build-alg currently drives the exact classical path");
    auto s_tilde = std::get<ClassicalSok<Rat>>(w);
    auto s_s = std::get<ClassicalSok<Rat>>(load_sok(start));
    auto s_r = std::get<ClassicalSok<Rat>>(load_sok(target));
    auto i_s = std::get<ClassicalSok<Rat>>(load_sok(idle_start));
    auto i_r = std::get<ClassicalSok<Rat>>(load_sok(idle_target));
    const auto& law = std::get<ClassicalLaw<Rat>>(law_v);

    auto res = build_universal_algorithm(s_tilde, s_s, s_r, law, steps, i_s, i_r, lp_options());

    fs::create_directories(out_dir);
    json plan;
    plan["law"] = law_path;
    plan["initial"] = "initial.json";
    save_json_file(out_dir + "/initial.json", emit_sok(res.plan.initial));
    json step_list = json::array();
    for (std::size_t k = 0; k < res.plan.steps.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "step_%03zu.json", k);
        save_json_file(out_dir + "/" + name, emit_sok(res.plan.steps[k]));
        step_list.push_back(name);
    }
    plan["steps"] = std::move(step_list);
    plan["report"] = {{"error", format_rat(res.error)},
                      {"error_bound", format_rat(res.error_bound)},
                      {"max_step_residual", res.max_step_residual}};
    save_json_file(out_dir + "/plan.json", plan);
    save_json_file(out_dir + "/delta_certificate.json", emit_sok(res.delta_certificate));
    std::cout << "wrote " << res.plan.steps.size() << " steps to " << out_dir << "\n";
    std::cout << "error " << format_rat(res.error) << " <= bound " << format_rat(res.error_bound)
              << "\n";
    return 0;
}

int run_simulate(const std::string& plan_path, const std::optional<std::string>& s0_path,
                 const std::optional<std::string>& json_out, const std::optional<std::string>& csv_out) {
    using namespace qk;
    namespace fs = std::filesystem;
    json plan = load_json_file(plan_path);
    const fs::path base = fs::path(plan_path).parent_path();
    auto law_v = parse_law(load_json_file(plan.at("law").get<std::string>()));
    const auto& law = std::get<ClassicalLaw<Rat>>(law_v);

    auto resolve = [&](const std::string& name) {
        fs::path p(name);
        return p.is_absolute() || base.empty() ? name : (base / p).string();
    };
    AlgorithmPlan<ClassicalSok<Rat>> alg;
    alg.initial = std::get<ClassicalSok<Rat>>(load_sok(resolve(plan.at("initial").get<std::string>())));
    for (const auto& step_name : plan.at("steps"))
        alg.steps.push_back(
            std::get<ClassicalSok<Rat>>(load_sok(resolve(step_name.get<std::string>()))));
    auto s0 = s0_path ? std::get<ClassicalSok<Rat>>(load_sok(*s0_path)) : alg.initial;

    auto sim = simulate(alg, law, s0);
    std::cout << "steps " << alg.steps.size() << ", accumulation "
              << (sim.accumulation_ok ? "ok" : "VIOLATED") << ", per-environment "
              << (sim.per_env_ok ? "ok" : "VIOLATED") << ", constraint "
              << (sim.witness_constraint_ok ? "ok" : "VIOLATED") << "\n";
    std::cout << "accumulated trace " << format_rat(trace(sim.accumulated)) << "\n";
    for (std::size_t k = 0; k < sim.states.size(); ++k)
        std::cout << "  S_" << k << ": trace " << format_rat(trace(sim.states[k])) << ", columns "
                  << sim.states[k].columns().size() << "\n";
    if (json_out) {
        json j;
        j["accumulation_ok"] = sim.accumulation_ok;
        j["per_env_ok"] = sim.per_env_ok;
        j["witness_constraint_ok"] = sim.witness_constraint_ok;
        j["residuals"] = sim.residuals;
        j["accumulated"] = emit_sok(sim.accumulated);
        save_json_file(*json_out, j);
    }
    if (csv_out) {
        PlotTable t;
        t.header = {"step", "trace", "columns", "residual"};
        for (std::size_t k = 0; k + 1 < sim.states.size(); ++k)
            t.rows.push_back({static_cast<double>(k),
                              scalar_traits<Rat>::to_double(trace(sim.states[k])),
                              static_cast<double>(sim.states[k].columns().size()),
                              sim.residuals[k]});
        emit_plot_data(t, *csv_out);
    }
    return 0;
}

int run_poisson(const std::string& mult_path, const std::string& s0_path, const std::string& rt,
                long max_power, const std::optional<std::string>& json_out,
                const std::optional<std::string>& csv_out) {
    using namespace qk;
    auto mult = std::get<ClassicalSok<Rat>>(load_sok(mult_path));
    auto s0 = std::get<ClassicalSok<Rat>>(load_sok(s0_path));
    auto res = poisson_series(mult, s0, parse_rat(rt), SeriesTruncation{max_power});
    std::cout << "prefactor e^-" << format_rat(res.rt) << " (= " << res.prefactor << ")\n";
    std::cout << "k  coefficient (rt^k/k!)\n";
    for (std::size_t k = 0; k < res.coefficients.size(); ++k)
        std::cout << k << "  " << format_rat(res.coefficients[k]) << "\n";
    std::cout << "truncated trace (without prefactor) " << format_rat(trace(res.sum)) << "\n";
    std::cout << "tail bound " << res.tail_bound << "\n";
    if (json_out) {
        json j;
        j["rt"] = format_rat(res.rt);
        json coeffs = json::array();
        for (const auto& c : res.coefficients) coeffs.push_back(format_rat(c));
        j["coefficients"] = std::move(coeffs);
        j["tail_bound"] = res.tail_bound;
        j["sum"] = emit_sok(res.sum);
        save_json_file(*json_out, j);
    }
    if (csv_out) {
        PlotTable t;
        t.header = {"k", "coefficient", "with_prefactor"};
        for (std::size_t k = 0; k < res.coefficients.size(); ++k) {
            const double c = scalar_traits<Rat>::to_double(res.coefficients[k]);
            t.rows.push_back({static_cast<double>(k), c, c * res.prefactor});
        }
        emit_plot_data(t, *csv_out);
    }
    return 0;
}

int run_scenario(const std::string& name, const std::string& bias, const std::string& prior,
                 const std::string& out_dir, const std::optional<std::string>& plots_dir) {
    using namespace qk;
    namespace fs = std::filesystem;
    if (name != "coin") throw error(errc::parse_error, "unknown scenario: " + name);
    Rat b = parse_rat(bias);
    auto comma = prior.find(',');
    if (comma == std::string::npos) throw error(errc::parse_error, "prior must be 'p0,p1'");
    std::vector<Rat> pr{parse_rat(prior.substr(0, comma)), parse_rat(prior.substr(comma + 1))};
    auto scen = coin_scenario<Rat>(b, pr);

    fs::create_directories(out_dir);
    save_json_file(out_dir + "/s0.json", emit_sok(canonicalize(scen.s0)));
    save_json_file(out_dir + "/q.json", emit_sok(canonicalize(scen.q)));
    save_json_file(out_dir + "/law.json", emit_law(scen.law));
    save_json_file(out_dir + "/observe_law.json", emit_law(scen.observe_law));
    save_json_file(out_dir + "/lazy_quarter.json",
                   emit_sok(canonicalize(lazy_observation(scen.q, Rat(Rat(1) / Rat(4))))));
    auto p1 = canonicalize(mul(scen.q, scen.s0));
    auto p2 = mul(scen.q, mul(scen.q, scen.s0));
    save_json_file(out_dir + "/p1.json", emit_sok(p1));
    save_json_file(out_dir + "/p2.json", emit_sok(p2));
    save_json_file(out_dir + "/p2prime.json", emit_sok(canonicalize(p2)));
    auto fwd = leq_classical(canonicalize(p2), p2, lp_options());
    if (fwd.related && fwd.witness)
        save_json_file(out_dir + "/t2_witness.json", emit_witness(*fwd.witness, "p2prime<=p2"));
    auto bwd = leq_classical(p2, canonicalize(p2), lp_options());
    if (bwd.related && bwd.witness)
        save_json_file(out_dir + "/t2prime_witness.json", emit_witness(*bwd.witness, "p2<=p2prime"));
    // inputs for the universal-algorithm pipeline
    save_json_file(out_dir + "/idle_s0.json",
                   emit_sok(canonicalize(at_output(scen.s0, scen.law.output(), "idle"))));
    save_json_file(out_dir + "/idle_p1.json",
                   emit_sok(canonicalize(at_output(p1, scen.law.output(), "idle"))));
    save_json_file(out_dir + "/stilde_one_obs.json",
                   emit_sok(canonicalize(at_output(scen.s0, scen.law.output(), "obs"))));
    std::cout << "wrote coin scenario to " << out_dir << "\n";

    if (plots_dir) {
        fs::create_directories(*plots_dir);
        PayoffSpec<Rat> spec;
        spec.outputs = EnvFactor{"C", {"guessH", "guessT"}};
        spec.utility = Mat<Rat>{{Rat(1), Rat(0)}, {Rat(0), Rat(1)}};
        PlotTable payoff_t;
        payoff_t.header = {"flips", "payoff"};
        auto state = canonicalize(scen.s0);
        payoff_t.rows.push_back({0.0, scalar_traits<Rat>::to_double(payoff_average(state, spec).value)});
        for (int n = 1; n <= 6; ++n) {
            state = canonicalize(mul(scen.q, state));
            payoff_t.rows.push_back(
                {static_cast<double>(n),
                 scalar_traits<Rat>::to_double(payoff_average(state, spec, lp_options()).value)});
        }
        emit_plot_data(payoff_t, *plots_dir + "/payoff_vs_flips.csv");

        // universal-algorithm error against the step count
        auto idle_s = at_output(scen.s0, scen.law.output(), "idle");
        auto idle_r = at_output(p1, scen.law.output(), "idle");
        auto s_tilde = at_output(scen.s0, scen.law.output(), "obs");
        PlotTable err_t;
        err_t.header = {"steps", "error", "bound"};
        for (long n : {1L, 2L, 5L, 10L, 20L, 50L}) {
            auto res = build_universal_algorithm(s_tilde, scen.s0, p1, scen.law, n, idle_s, idle_r,
                                                 lp_options());
            err_t.rows.push_back({static_cast<double>(n),
                                  scalar_traits<Rat>::to_double(res.error),
                                  scalar_traits<Rat>::to_double(res.error_bound)});
        }
        emit_plot_data(err_t, *plots_dir + "/universal_error_vs_steps.csv");
        std::cout << "wrote plot data to " << *plots_dir << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, handle_sigint);
    if (const char* eps = std::getenv("QK_EPS")) {
        try {
            qk::float_eps() = std::stod(eps);
        } catch (...) {
            std::cerr << "bad QK_EPS value\n";
            return 2;
        }
    }

    CLI::App app{"states-of-knowledge toolbox"};
    app.require_subcommand(1);

    std::string in_a, in_b, law_path, utility_path, out_dir = "plan_out";
    std::string rt = "1", bias = "0.6", prior = "0.5,0.5", scenario_name = "coin";
    std::string stilde_path, idle_start, idle_target, plan_path;
    std::optional<std::string> json_out, witness_out, s0_path, csv_out, plots_dir;
    long steps = 10, max_power = 20;
    bool worst = false, blockdiag = false, strengthen = false;

    auto* canon = app.add_subcommand("canon", "canonicalize a SOK file");
    canon->add_option("input", in_a)->required();
    canon->add_option("--json", json_out);

    auto* leq = app.add_subcommand("leq", "decide a <= b and emit a witness");
    leq->add_option("a", in_a)->required();
    leq->add_option("b", in_b)->required();
    leq->add_option("--witness", witness_out);
    leq->add_option("--json", json_out);

    auto* equiv = app.add_subcommand("equiv", "decide equivalence");
    equiv->add_option("a", in_a)->required();
    equiv->add_option("b", in_b)->required();
    equiv->add_option("--json", json_out);

    auto* entropy = app.add_subcommand("entropy", "expected Shannon entropy");
    entropy->add_option("input", in_a)->required();

    auto* dist = app.add_subcommand("dist", "trace distance");
    dist->add_option("a", in_a)->required();
    dist->add_option("b", in_b)->required();
    dist->add_option("--json", json_out);

    auto* payoff = app.add_subcommand("payoff", "measurement payoff program");
    payoff->add_option("state", in_a)->required();
    payoff->add_option("--utility", utility_path)->required();
    payoff->add_flag("--worst", worst);
    payoff->add_option("--json", json_out);

    auto* adv = app.add_subcommand("adv", "adversary bound for target - start");
    adv->add_option("target", in_a)->required();
    adv->add_option("start", in_b)->required();
    adv->add_option("--law", law_path)->required();
    adv->add_flag("--blockdiag", blockdiag);
    adv->add_option("--s0", s0_path);
    adv->add_flag("--strengthen", strengthen);
    adv->add_option("--json", json_out);

    auto* build = app.add_subcommand("build-alg", "construct the universal algorithm");
    build->add_option("--stilde", stilde_path)->required();
    build->add_option("--start", in_a)->required();
    build->add_option("--target", in_b)->required();
    build->add_option("--law", law_path)->required();
    build->add_option("--steps", steps)->required();
    build->add_option("--idle-start", idle_start)->required();
    build->add_option("--idle-target", idle_target)->required();
    build->add_option("--out", out_dir);

    auto* sim = app.add_subcommand("simulate", "run and verify an algorithm plan");
    sim->add_option("--plan", plan_path)->required();
    sim->add_option("--s0", s0_path);
    sim->add_option("--json", json_out);
    sim->add_option("--csv", csv_out);

    auto* poisson = app.add_subcommand("poisson", "truncated Poisson knowledge series");
    poisson->add_option("multiplier", in_a)->required();
    poisson->add_option("s0", in_b)->required();
    poisson->add_option("--rt", rt);
    poisson->add_option("--K", max_power);
    poisson->add_option("--json", json_out);
    poisson->add_option("--csv", csv_out);

    auto* scen = app.add_subcommand("scenario", "emit a scenario bundle");
    scen->add_option("name", scenario_name);
    scen->add_option("--bias", bias);
    scen->add_option("--prior", prior);
    scen->add_option("--out", out_dir)->required();
    scen->add_option("--plots", plots_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    try {
        if (*canon) return run_canon(in_a, json_out);
        if (*leq) return run_leq(in_a, in_b, witness_out, json_out);
        if (*equiv) return run_equiv(in_a, in_b, json_out);
        if (*entropy) return run_entropy(in_a);
        if (*dist) return run_dist(in_a, in_b, json_out);
        if (*payoff) return run_payoff(in_a, utility_path, worst, json_out);
        if (*adv) return run_adv(in_a, in_b, law_path, blockdiag, s0_path, strengthen, json_out);
        if (*build)
            return run_build_alg(stilde_path, in_a, in_b, law_path, steps, idle_start, idle_target,
                                 out_dir);
        if (*sim) return run_simulate(plan_path, s0_path, json_out, csv_out);
        if (*poisson) return run_poisson(in_a, in_b, rt, max_power, json_out, csv_out);
        if (*scen) return run_scenario(scenario_name, bias, prior, out_dir, plots_dir);
    } catch (const qk::error& e) {
        if (g_interrupted.load()) {
            std::cerr << "interrupted\n";
            return 130;
        }
        std::cerr << "error [" << qk::errc_name(e.code) << "]: " << e.what() << "\n";
        return (e.code == qk::errc::parse_error || e.code == qk::errc::io_error) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
