#include "ems/report.hpp"

#include <cmath>

#include "ems/tabular.hpp"

namespace ems::report {

namespace {

const char* status_str(rtca::ContingencyResult::Status s) {
    switch (s) {
        case rtca::ContingencyResult::Status::Solved: return "solved";
        case rtca::ContingencyResult::Status::Unsolved: return "unsolved";
        default: return "islanding";
    }
}

std::string scope_str(const rtca::NetworkConstraint& nc) {
    return nc.scope == rtca::NetworkConstraint::Scope::Base ? "base" : nc.ctg.key();
}

void add_rtca_sections(tab::Document& doc, const rtca::RtcaReport& rep, const char* prefix) {
    auto& ctg = doc.add(std::string(prefix) + "contingency");
    for (const auto& cr : rep.contingencies)
        ctg.records.push_back({0,
                               {cr.ctg.key(), status_str(cr.status), cr.active ? "active" : "-",
                                cr.critical ? "critical" : "-",
                                strfmt("%.4f", cr.violation_mva)}});
    auto& cons = doc.add(std::string(prefix) + "constraint");
    for (const auto& nc : rep.constraints)
        cons.records.push_back(
            {0,
             {scope_str(nc),
              nc.target == rtca::NetworkConstraint::Target::Branch ? "branch" : "interface",
              std::to_string(nc.element_id), strfmt("%.4f", nc.initial_mw),
              strfmt("%.4f", nc.mw_limit), strfmt("%.4f", nc.loading),
              nc.critical ? "critical" : "active", nc.pseudo ? "pseudo" : "actual"}});
    auto& viol = doc.add(std::string(prefix) + "violation");
    for (const auto& v : rep.violations)
        viol.records.push_back({0,
                                {v.base_scope ? "base" : v.ctg.key(),
                                 std::to_string(v.branch_id), strfmt("%.4f", v.max_s),
                                 strfmt("%.4f", v.rate), strfmt("%.4f", v.mva_over)}});
}

tab::Document tabular_report(const orch::ProcedureReport& rep) {
    tab::Document doc;
    auto& meta = doc.add("meta");
    meta.records.push_back({0, {"procedure", rep.procedure == orch::Procedure::A ? "A" : "B"}});
    meta.records.push_back({0, {"model", sced::to_string(rep.kind)}});
    if (!rep.case_name.empty()) meta.records.push_back({0, {"case", rep.case_name}});
    meta.records.push_back({0, {"status", rep.ok ? "ok" : "failed"}});
    if (!rep.failure.empty()) meta.records.push_back({0, {"note", rep.failure}});

    auto& ac = doc.add("ac_base");
    ac.records.push_back({0, {"converged", rep.base_ac.converged ? "1" : "0"}});
    ac.records.push_back({0, {"iterations", std::to_string(rep.base_ac.iterations)}});
    ac.records.push_back({0, {"max_mismatch", strfmt("%.3e", rep.base_ac.max_mismatch)}});
    ac.records.push_back({0, {"loss_mw", strfmt("%.4f", rep.base_ac.total_loss_mw())}});

    add_rtca_sections(doc, rep.pre_rtca, "");
    if (!rep.ok) return doc;

    if (rep.procedure == orch::Procedure::B) {
        auto& ctssec = doc.add("cts");
        for (const auto& out : rep.cts_outcomes) {
            for (const auto& ev : out.evaluations)
                ctssec.records.push_back(
                    {0,
                     {ev.ctg.key(), std::to_string(ev.switch_branch),
                      ev.feasible ? "feasible" : "unsolved",
                      ev.admissible ? "admissible" : "-", strfmt("%.4f", ev.total_before),
                      strfmt("%.4f", ev.total_after)}});
        }
        auto& ps = doc.add("pseudo_limit");
        for (const auto& pr : rep.pseudo)
            ps.records.push_back({0,
                                  {pr.ctg.key(), std::to_string(pr.branch_id),
                                   strfmt("%.4f", pr.rate_c), strfmt("%.6f", pr.percent),
                                   strfmt("%.4f", pr.prate_c), strfmt("%.4f", pr.mw_limit),
                                   std::to_string(pr.switch_branch)}});
    }

    // Dispatch / reserve / shed / flows / duals from the SCED solution.
    tab::Document sol = tab::parse(sced::serialize_solution(rep.input, rep.sced));
    for (auto& s : sol.sections) doc.sections.push_back(std::move(s));
    tab::Document mkt = tab::parse(market::serialize_market(rep.input, rep.market));
    for (auto& s : mkt.sections) doc.sections.push_back(std::move(s));

    auto& cng = doc.add("congestion");
    cng.records.push_back({0, {"tcost1", strfmt("%.6f", rep.cngst.tcost1)}});
    cng.records.push_back({0, {"tcost2", strfmt("%.6f", rep.cngst.tcost2)}});
    cng.records.push_back({0, {"cngst_cost", strfmt("%.6f", rep.cngst.cost)}});
    if (rep.procedure == orch::Procedure::B) {
        cng.records.push_back({0, {"cngst_cost_sced", strfmt("%.6f", rep.cngst_cost_sced)}});
        cng.records.push_back({0, {"cngst_cost_esced", strfmt("%.6f", rep.cngst_cost_esced)}});
        cng.records.push_back({0, {"ccr_cts", strfmt("%.6f", rep.ccr_cts)}});
    }

    if (rep.post_evaluated) {
        auto& pac = doc.add("post_ac");
        pac.records.push_back({0, {"converged", rep.post_ac.converged ? "1" : "0"}});
        pac.records.push_back({0, {"iterations", std::to_string(rep.post_ac.iterations)}});
        pac.records.push_back({0, {"loss_mw", strfmt("%.4f", rep.post_ac.total_loss_mw())}});
        pac.records.push_back(
            {0, {"total_violation_mva", strfmt("%.4f", rep.post_rtca.total_violation_mva)}});
        add_rtca_sections(doc, rep.post_rtca, "post_");
        auto& gap = doc.add("acdc_gap");
        for (const auto& g : rep.gaps)
            gap.records.push_back({0,
                                   {std::to_string(g.branch_id), strfmt("%.4f", g.sced_mw),
                                    strfmt("%.4f", g.ac_mw), strfmt("%.4f", g.gap)}});
        if (rep.procedure == orch::Procedure::B) {
            auto& s6 = doc.add("step6");
            for (const auto& chk : rep.step6)
                s6.records.push_back(
                    {0,
                     {chk.ctg.key(), std::to_string(chk.branch_id),
                      std::to_string(chk.switch_branch), chk.solved ? "solved" : "unsolved",
                      strfmt("%.4f", chk.v_post), strfmt("%.4f", chk.v_post_cts),
                      strfmt("%.6f", chk.percent_step3), strfmt("%.6f", chk.percent_post),
                      chk.holds ? "holds" : "short"}});
        }
    } else if (!rep.failure.empty()) {
        auto& pac = doc.add("post_ac");
        pac.records.push_back({0, {"converged", "0"}});
        pac.records.push_back({0, {"note", rep.failure}});
    }
    return doc;
}

std::string text_report(const orch::ProcedureReport& rep) {
    std::string s;
    s += strfmt("procedure %s  model %s  case %s  [%s]\n",
                rep.procedure == orch::Procedure::A ? "A" : "B", sced::to_string(rep.kind),
                rep.case_name.empty() ? "-" : rep.case_name.c_str(), rep.ok ? "ok" : "FAILED");
    if (!rep.failure.empty()) s += "note: " + rep.failure + "\n";
    s += strfmt("base AC: %s in %d iterations, mismatch %.2e, losses %.3f MW\n",
                rep.base_ac.converged ? "converged" : "diverged", rep.base_ac.iterations,
                rep.base_ac.max_mismatch, rep.base_ac.total_loss_mw());
    int n_crit = 0, n_active = 0, n_skip = 0;
    for (const auto& cr : rep.pre_rtca.contingencies) {
        n_crit += cr.critical;
        n_active += cr.active;
        n_skip += cr.status != rtca::ContingencyResult::Status::Solved;
    }
    s += strfmt("RTCA: %zu contingencies, %d active, %d critical, %d skipped; "
                "violation %.3f MVA (base %.3f)\n",
                rep.pre_rtca.contingencies.size(), n_active, n_crit, n_skip,
                rep.pre_rtca.total_violation_mva, rep.pre_rtca.base_violation_mva);
    s += strfmt("constraints: %zu base, %zu contingency\n", rep.input.base_cons.size(),
                rep.input.ctg_cons.size());
    if (!rep.ok) return s;
    if (rep.procedure == orch::Procedure::B) {
        s += strfmt("CTS: %zu critical contingencies examined, %zu pseudo limits\n",
                    rep.cts_outcomes.size(), rep.pseudo.size());
        for (const auto& pr : rep.pseudo)
            s += strfmt("  %s branch %d: percent %.3f, prate %.2f MVA, pseudo limit %.2f MW, "
                        "switch %d\n",
                        pr.ctg.key().c_str(), pr.branch_id, pr.percent, pr.prate_c, pr.mw_limit,
                        pr.switch_branch);
    }
    s += strfmt("%sSCED: objective %.4f $ (energy %.4f, reserve %.4f, shed %.4f)\n",
                rep.procedure == orch::Procedure::B ? "E-" : "", rep.sced.objective,
                rep.sced.energy_cost, rep.sced.reserve_cost, rep.sced.shed_cost);
    for (size_t g = 0; g < rep.input.grid.gens.size(); ++g)
        s += strfmt("  gen %d: %.3f -> %.3f MW  (sr %.3f)\n", rep.input.grid.gens[g].id,
                    rep.input.grid.gens[g].p0, rep.sced.p_g[g], rep.sced.sr[g]);
    s += strfmt("market: LMP_s %.4f, AvgLMP %.4f, AvgLMP_cg %.4f, LdPaymt %.2f, GenRvn %.2f, "
                "GenRent %.2f, CngstRvn %.2f\n",
                rep.market.lmp_s, rep.market.avg_lmp, rep.market.avg_lmp_cg, rep.market.ld_paymt,
                rep.market.gen_rvn, rep.market.gen_rent, rep.market.cngst_rvn);
    s += strfmt("congestion cost: %.4f $ (tcost1 %.4f, tcost2 %.4f)\n", rep.cngst.cost,
                rep.cngst.tcost1, rep.cngst.tcost2);
    if (rep.procedure == orch::Procedure::B)
        s += strfmt("CCR_cts: %.4f $ (esced %.4f vs sced %.4f)\n", rep.ccr_cts,
                    rep.cngst_cost_esced, rep.cngst_cost_sced);
    if (rep.post_evaluated) {
        s += strfmt("post-SCED: losses %.3f MW, violation %.3f MVA (pre %.3f)\n",
                    rep.post_ac.total_loss_mw(), rep.post_rtca.total_violation_mva,
                    rep.pre_rtca.total_violation_mva);
        for (const auto& chk : rep.step6)
            s += strfmt("step6 %s branch %d switch %d: %.3f -> %.3f MVA (percent %.3f vs %.3f) "
                        "%s\n",
                        chk.ctg.key().c_str(), chk.branch_id, chk.switch_branch, chk.v_post,
                        chk.v_post_cts, chk.percent_post, chk.percent_step3,
                        chk.holds ? "holds" : "SHORT");
    }
    return s;
}

}  // namespace

std::string render(const orch::ProcedureReport& rep, Format fmt) {
    if (fmt == Format::Text) return text_report(rep);
    return tab::write(tabular_report(rep));
}

std::string render_compare(const orch::ProcedureReport& a, const orch::ProcedureReport& b,
                           Format fmt) {
    if (fmt == Format::Tabular) {
        tab::Document doc;
        auto& cmp = doc.add("compare");
        auto kv = [&](const char* k, double va, double vb) {
            cmp.records.push_back(
                {0, {k, strfmt("%.6f", va), strfmt("%.6f", vb), strfmt("%.6f", vb - va)}});
        };
        kv("objective", a.sced.objective, b.sced.objective);
        kv("avg_lmp", a.market.avg_lmp, b.market.avg_lmp);
        kv("avg_lmp_cg", a.market.avg_lmp_cg, b.market.avg_lmp_cg);
        kv("cngst_cost", a.cngst.cost, b.cngst.cost);
        kv("ld_paymt", a.market.ld_paymt, b.market.ld_paymt);
        cmp.records.push_back({0, {"ccr_cts", strfmt("%.6f", b.ccr_cts)}});
        std::string out = tab::write(doc);
        out += render(a, fmt);
        out += render(b, fmt);
        return out;
    }
    std::string s = "== Procedure A vs Procedure B ==\n";
    s += strfmt("objective:   %.4f -> %.4f  (delta %.4f)\n", a.sced.objective, b.sced.objective,
                b.sced.objective - a.sced.objective);
    s += strfmt("AvgLMP:      %.4f -> %.4f  (delta %.4f)\n", a.market.avg_lmp, b.market.avg_lmp,
                b.market.avg_lmp - a.market.avg_lmp);
    s += strfmt("AvgLMP_cg:   %.4f -> %.4f  (delta %.4f)\n", a.market.avg_lmp_cg,
                b.market.avg_lmp_cg, b.market.avg_lmp_cg - a.market.avg_lmp_cg);
    s += strfmt("CngstCost:   %.4f -> %.4f\n", a.cngst.cost, b.cngst.cost);
    s += strfmt("CCR_cts:     %.4f $\n", b.ccr_cts);
    s += "\n-- A --\n" + render(a, Format::Text);
    s += "\n-- B --\n" + render(b, Format::Text);
    return s;
}

std::string render_rtca(const Case& c, const rtca::RtcaReport& rep) {
    (void)c;
    tab::Document doc;
    add_rtca_sections(doc, rep, "");
    return tab::write(doc);
}

}  // namespace ems::report
