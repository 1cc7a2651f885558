#include "ems/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "ems/parallel.hpp"

namespace ems::orch {

namespace {

using clock_t_ = std::chrono::steady_clock;

struct StepTimer {
    ProcedureReport& rep;
    const char* name;
    clock_t_::time_point start = clock_t_::now();
    StepTimer(ProcedureReport& r, const char* n) : rep(r), name(n) {}
    ~StepTimer() {
        double ms = std::chrono::duration<double, std::milli>(clock_t_::now() - start).count();
        rep.timings_ms.push_back({name, ms});
    }
};

// Case with the SCED dispatch applied: generator setpoints moved to the
// solved outputs and shed MW removed from the corresponding loads.
Case apply_dispatch(const Case& physical, const sced::ScedInput& in,
                    const sced::ScedSolution& sol) {
    Case out = physical;
    for (size_t g = 0; g < out.gens.size(); ++g) {
        int idx = in.grid.gen_index(out.gens[g].id);
        out.gens[g].p0 = sol.p_g[idx];
    }
    for (size_t d = 0; d < out.loads.size(); ++d) {
        int idx = in.grid.load_index(out.loads[d].id);
        if (sol.shed[idx] > 0) {
            out.loads[d].p -= sol.shed[idx];
            out.loads[d].p0 = out.loads[d].p;
        }
    }
    out.finalize();
    return out;
}

void evaluate_post(ProcedureReport& rep, const Case& physical,
                   const std::vector<acpf::Contingency>& ctgs, const Config& cfg) {
    StepTimer t(rep, "post_evaluation");
    Case post_case = apply_dispatch(physical, rep.input, rep.sced);
    acpf::SolveOptions opt;
    opt.participation = cfg.participation;
    opt.warm_start = &rep.base_ac;
    rep.post_ac = acpf::solve_ac_power_flow(post_case, opt);
    if (!rep.post_ac.converged) {
        // Reported, not fatal: the dispatch simply fails its AC evaluation.
        rep.failure = "post-SCED AC power flow did not converge: " + rep.post_ac.diagnostic;
        return;
    }
    rep.post_evaluated = true;
    rep.post_rtca = rtca::run_rtca(post_case, rep.post_ac, ctgs, cfg);
    for (size_t i = 0; i < rep.input.base_cons.size(); ++i) {
        const auto& rec = rep.input.base_cons[i];
        if (rec.target != rtca::NetworkConstraint::Target::Branch) continue;
        int k = post_case.branch_index(rec.element_id);
        AcDcGap g;
        g.branch_id = rec.element_id;
        g.sced_mw = rep.sced.record_flow_base[i];
        g.ac_mw = rtca::initial_flow(rep.post_ac.branch[k].p_from, rep.post_ac.branch[k].p_to);
        g.gap = g.ac_mw - g.sced_mw;
        rep.gaps.push_back(g);
    }
}

ProcedureReport run_common(const Case& c, const Config& cfg, sced::ModelKind kind,
                           Procedure proc, const std::vector<acpf::Contingency>* ctg_list) {
    cfg.validate();
    ProcedureReport rep;
    rep.procedure = proc;
    rep.kind = kind;
    rep.case_name = c.name;

    {
        StepTimer t(rep, "system_status_ac");
        rep.base_ac = acpf::solve_ac_power_flow(c, {.participation = cfg.participation});
    }
    if (!rep.base_ac.converged)
        throw Error("base-case AC power flow did not converge: " + rep.base_ac.diagnostic);

    std::vector<acpf::Contingency> ctgs =
        ctg_list ? *ctg_list : acpf::default_contingencies(c);
    {
        StepTimer t(rep, "rtca");
        rep.pre_rtca = rtca::run_rtca(c, rep.base_ac, ctgs, cfg);
    }
    bool any_gen = std::any_of(ctgs.begin(), ctgs.end(), [](const acpf::Contingency& x) {
        return x.kind == acpf::Contingency::Kind::Generator;
    });
    {
        StepTimer t(rep, "sced_input");
        rep.input = sced::make_sced_input(c, rep.base_ac, rep.pre_rtca, cfg, any_gen);
    }

    if (proc == Procedure::B) {
        StepTimer t(rep, "cts");
        for (const auto& ctg : rep.pre_rtca.critical_contingencies()) {
            CtsOutcome out;
            out.ctg = ctg;
            auto viols = rep.pre_rtca.violations_of(ctg);
            if (viols.empty()) continue;  // critical on MW limits but no MVA violation
            out.evaluations = cts::sweep_contingency(c, ctg, viols, cfg);
            if (const cts::CtsEvaluation* best = cts::select_best(out.evaluations)) {
                out.has_best = true;
                out.best = *best;
                auto recs = cts::pseudo_limits(c, *best, cfg);
                rep.pseudo.insert(rep.pseudo.end(), recs.begin(), recs.end());
            }
            rep.cts_outcomes.push_back(std::move(out));
        }
        // Substitute pseudo limits into the critical contingency records.
        for (const auto& pr : rep.pseudo) {
            for (auto& rec : rep.input.ctg_cons) {
                if (rec.target != rtca::NetworkConstraint::Target::Branch) continue;
                if (rec.ctg == pr.ctg && rec.element_id == pr.branch_id && rec.critical) {
                    rec.mw_limit = std::max(rec.mw_limit, pr.mw_limit);
                    rec.mw_limit_general = std::max(rec.mw_limit_general, pr.mw_limit);
                    rec.pseudo = true;
                    rec.pseudo_switch = pr.switch_branch;
                }
            }
        }
    }

    {
        StepTimer t(rep, proc == Procedure::B ? "esced" : "sced");
        rep.sced = sced::solve_sced(rep.input, kind);
    }
    if (rep.sced.status != lp::LpStatus::Optimal) {
        rep.ok = false;
        rep.failure = "SCED did not solve: " + rep.sced.diagnostic;
        return rep;
    }
    {
        StepTimer t(rep, "market");
        rep.market = market::compute_lmps(rep.input, rep.sced);
        market::settle(rep.market, rep.input, rep.sced);
        rep.cngst = market::congestion_cost(rep.input, kind);
    }
    evaluate_post(rep, c, ctgs, cfg);
    return rep;
}

}  // namespace

ProcedureReport run_procedure_a(const Case& c, const Config& cfg, sced::ModelKind kind,
                                const std::vector<acpf::Contingency>* contingencies) {
    return run_common(c, cfg, kind, Procedure::A, contingencies);
}

ProcedureReport run_procedure_b(const Case& c, const Config& cfg, sced::ModelKind kind,
                                const std::vector<acpf::Contingency>* contingencies) {
    ProcedureReport rep = run_common(c, cfg, kind, Procedure::B, contingencies);
    if (!rep.ok) return rep;

    // Congestion-cost comparison against the actual-limit SCED.
    {
        StepTimer t(rep, "congestion_compare");
        rep.cngst_cost_esced = rep.cngst.cost;
        // Actual-limit input: restore the pre-substitution limits from the
        // pre-SCED RTCA records.
        sced::ScedInput actual = rep.input;
        for (auto& rec : actual.ctg_cons) {
            if (!rec.pseudo) continue;
            for (const auto& orig : rep.pre_rtca.constraints) {
                if (orig.scope == rtca::NetworkConstraint::Scope::Ctg && orig.ctg == rec.ctg &&
                    orig.target == rec.target && orig.element_id == rec.element_id) {
                    rec.mw_limit = orig.mw_limit;
                    rec.mw_limit_general = orig.mw_limit_general;
                    rec.pseudo = false;
                    rec.pseudo_switch = 0;
                }
            }
        }
        rep.cngst_cost_sced = market::congestion_cost(actual, rep.kind).cost;
        rep.ccr_cts = market::ccr(rep.cngst_cost_esced, rep.cngst_cost_sced);
    }

    // Step 6: re-apply the stored switching action to any violation that
    // reappears on a pseudo-relaxed constraint and confirm it still relieves.
    if (rep.post_evaluated) {
        StepTimer t(rep, "step6_confirmation");
        Case post_case = apply_dispatch(c, rep.input, rep.sced);
        struct Pending {
            const rtca::Violation* v;
            const cts::PseudoLimitRecord* pr;
        };
        std::vector<Pending> todo;
        for (const auto& v : rep.post_rtca.violations) {
            if (v.base_scope) continue;
            for (const auto& rec : rep.pseudo)
                if (rec.ctg == v.ctg && rec.branch_id == v.branch_id) {
                    todo.push_back({&v, &rec});
                    break;
                }
        }
        rep.step6.resize(todo.size());
        parallel_for((int)todo.size(), [&](int i) {
            const auto& [v, pr] = todo[i];
            Step6Check& chk = rep.step6[i];
            chk.ctg = v->ctg;
            chk.branch_id = v->branch_id;
            chk.switch_branch = pr->switch_branch;
            chk.v_post = v->mva_over;
            chk.percent_step3 = pr->percent;
            try {
                Case sw = acpf::apply_outage(post_case, v->ctg, cfg.participation);
                sw = acpf::apply_outage(sw, {acpf::Contingency::Kind::Branch, pr->switch_branch},
                                        cfg.participation);
                acpf::SolveOptions opt;
                opt.participation = cfg.participation;
                acpf::AcSolution sol = acpf::solve_ac_power_flow(sw, opt);
                if (sol.converged) {
                    chk.solved = true;
                    int k = sw.branch_index(v->branch_id);
                    chk.v_post_cts =
                        std::max(0.0, sol.branch[k].max_s() - sw.branches[k].rate_c);
                    chk.percent_post = (chk.v_post - chk.v_post_cts) / chk.v_post;
                    chk.holds = chk.percent_post >= chk.percent_step3 - 0.10;
                }
            } catch (const Error&) {
                chk.solved = false;
            }
        });
    }
    return rep;
}

}  // namespace ems::orch
