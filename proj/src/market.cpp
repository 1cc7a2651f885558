#include "ems/market.hpp"

#include <cmath>

#include "ems/tabular.hpp"

namespace ems::market {

namespace {

bool is_ptdf(sced::ModelKind k) {
    return k == sced::ModelKind::M1 || k == sced::ModelKind::M2 || k == sced::ModelKind::M3;
}

int interface_index(const Case& c, int id) {
    for (size_t i = 0; i < c.interfaces.size(); ++i)
        if (c.interfaces[i].id == id) return (int)i;
    throw Error(strfmt("unknown interface %d", id));
}

// Congestion component assembled from the limit-constraint duals, weighted by
// PTDF (base records) and OTDF (contingency records); interfaces contribute
// through their member branches with orientation signs.
std::vector<double> assemble_congestion(const sced::ScedInput& in,
                                        const sced::ScedSolution& sol) {
    const Case& grid = in.grid;
    size_t nb = grid.buses.size();
    if (in.sens.ptdf.m.rows() != (long)nb)
        throw Error("compute_lmps: sensitivity set missing or stale");
    std::vector<double> cg(nb, 0.0);
    auto apply = [&](const rtca::NetworkConstraint& rec, const sced::LimitDuals& d) {
        double fd = d.f_diff();
        if (fd == 0.0) return;
        int outage = rec.scope == rtca::NetworkConstraint::Scope::Ctg
                         ? grid.branch_index(rec.ctg.element)
                         : -1;
        auto weight = [&](int bus, int k) {
            return outage < 0 ? in.sens.ptdf.m(bus, k) : in.sens.otdf(bus, k, outage);
        };
        if (rec.target == rtca::NetworkConstraint::Target::Branch) {
            int k = grid.branch_index(rec.element_id);
            if (k == outage) return;
            for (size_t n = 0; n < nb; ++n) cg[n] += weight((int)n, k) * fd;
        } else {
            const Interface& f = grid.interfaces[interface_index(grid, rec.element_id)];
            for (const auto& m : f.members) {
                int k = grid.branch_index(m.branch_id);
                if (!grid.branches[k].in_service || k == outage) continue;
                for (size_t n = 0; n < nb; ++n) cg[n] += m.sign * weight((int)n, k) * fd;
            }
        }
    };
    for (size_t i = 0; i < in.base_cons.size(); ++i)
        apply(in.base_cons[i], sol.record_dual_base[i]);
    for (size_t i = 0; i < in.ctg_cons.size(); ++i)
        apply(in.ctg_cons[i], sol.record_dual_ctg[i]);
    return cg;
}

}  // namespace

MarketResults compute_lmps(const sced::ScedInput& in, const sced::ScedSolution& sol) {
    if (sol.status != lp::LpStatus::Optimal)
        throw Error("compute_lmps: SCED solution is not optimal");
    const Case& grid = in.grid;
    size_t nb = grid.buses.size();
    MarketResults r;
    r.lmp.assign(nb, 0.0);
    r.lmp_cg.assign(nb, 0.0);
    r.duality_residual.assign(nb, 0.0);
    std::vector<double> cg = assemble_congestion(in, sol);

    if (is_ptdf(sol.kind)) {
        r.lmp_s = sol.system_balance_dual;
        for (size_t n = 0; n < nb; ++n) {
            r.lmp_cg[n] = cg[n];
            r.lmp[n] = r.lmp_s + cg[n];
        }
        // Independent route through the flow-definition duals: the marginal
        // cost of load at n is the balance dual minus the factor-weighted
        // definition-row duals.
        for (size_t n = 0; n < nb; ++n) {
            double v = r.lmp_s;
            for (const auto& fe : sol.flow_eqs) {
                double w = fe.base ? in.sens.ptdf.m((int)n, fe.branch_idx)
                                   : in.sens.otdf((int)n, fe.branch_idx, fe.ctg_branch_idx);
                v -= w * fe.dual;
            }
            r.duality_residual[n] = r.lmp[n] - v;
        }
    } else {
        if (sol.nodal_dual.size() != nb) throw Error("compute_lmps: missing nodal duals");
        r.lmp_s = sol.nodal_dual[in.model.ref];
        for (size_t n = 0; n < nb; ++n) {
            r.lmp[n] = sol.nodal_dual[n];
            r.lmp_cg[n] = r.lmp[n] - r.lmp_s;
            r.duality_residual[n] = r.lmp_cg[n] - cg[n];
        }
    }
    for (size_t n = 0; n < nb; ++n) {
        r.avg_lmp += r.lmp[n] / (double)nb;
        r.avg_lmp_cg += r.lmp_cg[n] / (double)nb;
        r.max_duality_residual = std::max(r.max_duality_residual,
                                          std::abs(r.duality_residual[n]));
    }
    return r;
}

void settle(MarketResults& r, const sced::ScedInput& in, const sced::ScedSolution& sol) {
    const Case& grid = in.grid;
    r.ld_paymt = 0;
    r.gen_rvn = 0;
    for (size_t n = 0; n < grid.buses.size(); ++n) {
        double pd = 0, pg = 0;
        for (int di : grid.loads_at_bus[n]) {
            const Load& d = grid.loads[di];
            if (in.config.settle_physical_loads_only && d.kind != LoadKind::Positive) continue;
            pd += d.p;
        }
        for (int gi : grid.gens_at_bus[n]) pg += sol.p_g[gi];
        r.ld_paymt += r.lmp[n] * pd;
        r.gen_rvn += r.lmp[n] * pg;
    }
    r.gen_cost = sol.energy_cost;
    r.gen_rent = r.gen_rvn - r.gen_cost;
    r.cngst_rvn = r.ld_paymt - r.gen_rvn;
}

CongestionCost congestion_cost(const sced::ScedInput& in, sced::ModelKind kind) {
    CongestionCost cc;
    sced::ScedSolution with = sced::solve_sced(in, kind);
    if (with.status != lp::LpStatus::Optimal)
        throw Error("congestion_cost: constrained SCED did not solve: " + with.diagnostic);
    cc.tcost1 = with.objective;
    lp::LinearProgram relaxed = sced::build_sced(in, kind, /*include_network_limits=*/false);
    lp::LpSolution free_sol = lp::solve(relaxed);
    if (free_sol.status != lp::LpStatus::Optimal)
        throw Error("congestion_cost: unconstrained SCED did not solve: " + free_sol.diagnostic);
    cc.tcost2 = free_sol.objective;
    cc.cost = cc.tcost1 - cc.tcost2;
    return cc;
}

double ccr(double cngst_esced, double cngst_sced) {
    return cngst_esced - cngst_sced;
}

std::string serialize_market(const sced::ScedInput& in, const MarketResults& r) {
    tab::Document doc;
    auto& lmp = doc.add("lmp");
    for (size_t n = 0; n < in.grid.buses.size(); ++n)
        lmp.records.push_back({0,
                               {std::to_string(in.grid.buses[n].id), strfmt("%.6f", r.lmp[n]),
                                strfmt("%.6f", r.lmp_cg[n])}});
    auto& st = doc.add("settlement");
    auto kv = [&](const char* k, double v) {
        st.records.push_back({0, {k, strfmt("%.6f", v)}});
    };
    kv("lmp_s", r.lmp_s);
    kv("avg_lmp", r.avg_lmp);
    kv("avg_lmp_cg", r.avg_lmp_cg);
    kv("ld_paymt", r.ld_paymt);
    kv("gen_rvn", r.gen_rvn);
    kv("gen_cost", r.gen_cost);
    kv("gen_rent", r.gen_rent);
    kv("cngst_rvn", r.cngst_rvn);
    kv("max_duality_residual", r.max_duality_residual);
    return tab::write(doc);
}

}  // namespace ems::market
