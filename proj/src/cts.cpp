#include "ems/cts.hpp"

#include <algorithm>
#include <cmath>

#include "ems/parallel.hpp"

namespace ems::cts {

std::vector<int> enumerate_candidates(const Case& c, const acpf::Contingency& ctg,
                                      const std::vector<rtca::Violation>& viols) {
    Case outaged = acpf::apply_outage(c, ctg);
    std::vector<int> out;
    for (const auto& br : outaged.branches) {
        if (!br.in_service) continue;  // drops the contingency branch itself
        bool violated = std::any_of(viols.begin(), viols.end(),
                                    [&](const rtca::Violation& v) { return v.branch_id == br.id; });
        if (violated) continue;
        try {
            (void)acpf::apply_outage(outaged, {acpf::Contingency::Kind::Branch, br.id});
        } catch (const IslandingError&) {
            continue;
        }
        out.push_back(br.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

CtsEvaluation evaluate_candidate(const Case& c, const acpf::Contingency& ctg, int switch_branch,
                                 const std::vector<rtca::Violation>& viols, const Config& cfg) {
    CtsEvaluation ev;
    ev.ctg = ctg;
    ev.switch_branch = switch_branch;
    for (const auto& v : viols) {
        ev.relief.push_back({v.branch_id, v.mva_over, 0.0, v.q_from, v.q_to});
        ev.total_before += v.mva_over;
    }
    acpf::AcSolution sol;
    Case switched = [&] {
        Case outaged = acpf::apply_outage(c, ctg, cfg.participation);
        return acpf::apply_outage(outaged, {acpf::Contingency::Kind::Branch, switch_branch},
                                  cfg.participation);
    }();
    acpf::SolveOptions opt;
    opt.participation = cfg.participation;
    sol = acpf::solve_ac_power_flow(switched, opt);
    if (!sol.converged) {
        ev.feasible = false;
        return ev;
    }
    ev.feasible = true;
    // Post-switching violations against RateC, over every in-service branch.
    bool worse = false;
    for (size_t k = 0; k < switched.branches.size(); ++k) {
        const Branch& br = switched.branches[k];
        if (!br.in_service) continue;
        double over = sol.branch[k].max_s() - br.rate_c;
        if (over <= 0) continue;
        ev.total_after += over;
        auto it = std::find_if(ev.relief.begin(), ev.relief.end(),
                               [&](const BranchRelief& r) { return r.branch_id == br.id; });
        if (it == ev.relief.end())
            worse = true;  // a fresh violation appeared
        else {
            it->v_after = over;
            if (over > it->v_before + 1e-9) worse = true;
        }
    }
    ev.admissible = !worse && ev.total_after < ev.total_before - 1e-9;
    return ev;
}

const CtsEvaluation* select_best(const std::vector<CtsEvaluation>& evals) {
    const CtsEvaluation* best = nullptr;
    for (const auto& ev : evals) {
        if (!ev.admissible) continue;
        if (!best || ev.reduction() > best->reduction() + 1e-9 ||
            (std::abs(ev.reduction() - best->reduction()) <= 1e-9 &&
             ev.switch_branch < best->switch_branch))
            best = &ev;
    }
    return best;
}

std::vector<PseudoLimitRecord> pseudo_limits(const Case& c, const CtsEvaluation& best,
                                             const Config& cfg) {
    if (!best.admissible) throw Error("pseudo_limits: evaluation is not admissible");
    std::vector<PseudoLimitRecord> out;
    for (const auto& r : best.relief) {
        if (r.v_before <= 0) continue;  // division guard
        const Branch& br = c.branches[c.branch_index(r.branch_id)];
        PseudoLimitRecord rec;
        rec.ctg = best.ctg;
        rec.branch_id = r.branch_id;
        rec.rate_c = br.rate_c;
        rec.percent = (r.v_before - r.v_after) / r.v_before;
        rec.prate_c = br.rate_c + r.v_before * rec.percent;
        // MW conversion reuses the pre-switching contingency reactive flows.
        rtca::MwLimit lim = rtca::mw_limit(rec.prate_c, r.q_from, r.q_to);
        rec.mw_limit = lim.mw * cfg.limit_derate;
        rec.switch_branch = best.switch_branch;
        out.push_back(rec);
    }
    return out;
}

std::vector<CtsEvaluation> sweep_contingency(const Case& c, const acpf::Contingency& ctg,
                                             const std::vector<rtca::Violation>& viols,
                                             const Config& cfg) {
    std::vector<int> cands = enumerate_candidates(c, ctg, viols);
    std::vector<CtsEvaluation> evals(cands.size());
    parallel_for((int)cands.size(),
                 [&](int i) { evals[i] = evaluate_candidate(c, ctg, cands[i], viols, cfg); });
    return evals;
}

}  // namespace ems::cts
