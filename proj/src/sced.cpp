#include "ems/sced.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "ems/tabular.hpp"

namespace ems::sced {

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::M1: return "M1";
        case ModelKind::M2: return "M2";
        case ModelKind::M3: return "M3";
        case ModelKind::M4: return "M4";
        default: return "M5";
    }
}

std::optional<ModelKind> model_from_string(const std::string& s) {
    if (s == "M1" || s == "m1") return ModelKind::M1;
    if (s == "M2" || s == "m2") return ModelKind::M2;
    if (s == "M3" || s == "m3") return ModelKind::M3;
    if (s == "M4" || s == "m4") return ModelKind::M4;
    if (s == "M5" || s == "m5") return ModelKind::M5;
    return std::nullopt;
}

static int interface_index(const Case& c, int id) {
    for (size_t i = 0; i < c.interfaces.size(); ++i)
        if (c.interfaces[i].id == id) return (int)i;
    throw Error(strfmt("unknown interface %d", id));
}

namespace {

bool is_ptdf(ModelKind k) {
    return k == ModelKind::M1 || k == ModelKind::M2 || k == ModelKind::M3;
}
bool uses_custom_ctg_limits(ModelKind k) {
    return k == ModelKind::M1 || k == ModelKind::M4;
}
bool is_hot_or_warm(ModelKind k) {
    return k == ModelKind::M1 || k == ModelKind::M2;
}

struct Assembly {
    lp::LinearProgram lp;
    std::vector<int> v_pg, v_sr;
    std::vector<std::vector<int>> v_seg;  // per gen
    std::vector<int> v_shed;              // per load
    // Flow variables and definition rows keyed by (group, branch index);
    // group -1 is the base case.
    std::map<std::pair<int, int>, int> v_flow;
    std::map<std::pair<int, int>, int> r_floweq;
    std::vector<std::array<int, 2>> r_lim_base, r_lim_ctg;  // {up,lo}, -1 when absent
    int r_balance = -1;
    std::vector<int> r_nodal;                 // per bus (base case), B-theta
    std::vector<std::vector<int>> r_nodal_g;  // per group, per bus
    std::vector<acpf::Contingency> groups;
    std::vector<int> group_branch;  // outaged branch case index per group
    std::vector<int> collapsed;
};

// Contingency groups in first-appearance order over the record list.
void collect_groups(const ScedInput& in, Assembly& a) {
    for (const auto& rec : in.ctg_cons) {
        if (rec.ctg.kind != acpf::Contingency::Kind::Branch)
            throw Error("sced: contingency constraints must reference branch contingencies");
        bool seen = false;
        for (const auto& g : a.groups) seen |= g == rec.ctg;
        if (!seen) {
            a.groups.push_back(rec.ctg);
            a.group_branch.push_back(in.grid.branch_index(rec.ctg.element));
        }
    }
}

int group_of(const Assembly& a, const acpf::Contingency& c) {
    for (size_t i = 0; i < a.groups.size(); ++i)
        if (a.groups[i] == c) return (int)i;
    throw Error("sced: record references an unknown contingency group");
}

Assembly assemble(const ScedInput& in, ModelKind kind, bool include_limits) {
    const Case& grid = in.grid;
    const Config& cfg = in.config;
    cfg.validate();
    if (is_hot_or_warm(kind) && !in.base_flow_mw)
        throw Error(strfmt("sced: %s needs initial base-case branch flows", to_string(kind)));
    if (in.base_flow_mw && in.base_flow_mw->size() != grid.branches.size())
        throw Error("sced: base flow vector does not match the branch list");
    if (is_ptdf(kind) && in.sens.ptdf.stamp != in.model.stamp)
        throw Error("sced: sensitivity set does not match the model snapshot");

    Assembly a;
    collect_groups(in, a);

    // --- variables -------------------------------------------------------
    a.v_pg.resize(grid.gens.size());
    a.v_sr.resize(grid.gens.size());
    a.v_seg.resize(grid.gens.size());
    for (size_t g = 0; g < grid.gens.size(); ++g) {
        const Generator& gen = grid.gens[g];
        double lo, hi;
        if (gen.dispatchable) {
            lo = std::max(gen.p0 - gen.energy_ramp * cfg.t_ed, gen.p_min);
            hi = std::min(gen.p0 + gen.energy_ramp * cfg.t_ed, gen.p_max);
            if (lo > hi) {
                // Empty ramp/capacity window: pin to the nearest capacity point.
                lo = hi = gen.p0 + gen.energy_ramp * cfg.t_ed < gen.p_min ? gen.p_min : gen.p_max;
                a.collapsed.push_back((int)g);
            }
        } else {
            lo = hi = gen.p0;
        }
        a.v_pg[g] = a.lp.add_variable(strfmt("pg.%d", gen.id), lo, hi);
        a.v_sr[g] = a.lp.add_variable(strfmt("sr.%d", gen.id), 0.0, gen.spin_ramp * cfg.t_sr,
                                      gen.reserve_price);
        if (!gen.dispatchable) continue;
        auto blocks = gen.dispatch_blocks();
        std::vector<std::pair<int, double>> link{{a.v_pg[g], 1.0}};
        for (size_t i = 0; i < blocks.size(); ++i) {
            int v = a.lp.add_variable(strfmt("seg.%d.%zu", gen.id, i), 0.0, blocks[i].breadth,
                                      blocks[i].price);
            a.v_seg[g].push_back(v);
            link.push_back({v, -1.0});
        }
        a.lp.add_constraint(strfmt("seg.%d", gen.id), std::move(link), lp::Rel::Eq, 0.0);
    }
    a.v_shed.resize(grid.loads.size());
    for (size_t d = 0; d < grid.loads.size(); ++d) {
        const Load& ld = grid.loads[d];
        double hi = ld.kind == LoadKind::Positive ? ld.p : 0.0;
        a.v_shed[d] = a.lp.add_variable(strfmt("sh.%d", ld.id), 0.0, hi, cfg.shed_penalty);
    }

    // --- generation & reserve coupling ------------------------------------
    for (size_t g = 0; g < grid.gens.size(); ++g)
        a.lp.add_constraint(strfmt("cap.%d", grid.gens[g].id),
                            {{a.v_pg[g], 1.0}, {a.v_sr[g], 1.0}}, lp::Rel::LessEq,
                            grid.gens[g].p_max);
    if (in.enforce_reserve_requirement) {
        // Largest-generator rule: the other units' reserve covers any single
        // unit's output.
        for (size_t g = 0; g < grid.gens.size(); ++g) {
            std::vector<std::pair<int, double>> co{{a.v_pg[g], -1.0}};
            for (size_t m = 0; m < grid.gens.size(); ++m)
                if (m != g) co.push_back({a.v_sr[m], 1.0});
            a.lp.add_constraint(strfmt("res.%d", grid.gens[g].id), std::move(co),
                                lp::Rel::GreaterEq, 0.0);
        }
    }

    // Per-bus constants
    size_t nb = grid.buses.size();
    std::vector<double> gen0(nb, 0.0), pd(nb, 0.0), pd0(nb, 0.0);
    for (const auto& g : grid.gens) gen0[grid.bus_index(g.bus)] += g.p0;
    for (const auto& d : grid.loads) {
        pd[grid.bus_index(d.bus)] += d.p;
        pd0[grid.bus_index(d.bus)] += d.p0;
    }
    double total_pd = 0;
    for (double v : pd) total_pd += v;

    // --- power balance -----------------------------------------------------
    if (is_ptdf(kind)) {
        std::vector<std::pair<int, double>> co;
        for (size_t g = 0; g < grid.gens.size(); ++g) co.push_back({a.v_pg[g], 1.0});
        for (size_t d = 0; d < grid.loads.size(); ++d) co.push_back({a.v_shed[d], 1.0});
        a.r_balance = a.lp.add_constraint("bal", std::move(co), lp::Rel::Eq, total_pd);
    }

    // --- flow variables and definitions -------------------------------------
    auto flow_var = [&](int group, int k) {
        auto key = std::make_pair(group, k);
        auto it = a.v_flow.find(key);
        if (it != a.v_flow.end()) return it->second;
        std::string name = group < 0 ? strfmt("pk.b.%d", grid.branches[k].id)
                                     : strfmt("pk.%s.%d", a.groups[group].key().c_str(),
                                              grid.branches[k].id);
        bool zero_fixed = group >= 0 && a.group_branch[group] == k;
        int v = a.lp.add_variable(name, zero_fixed ? 0.0 : -lp::kInf,
                                  zero_fixed ? 0.0 : lp::kInf);
        a.v_flow[key] = v;
        return v;
    };

    if (is_ptdf(kind)) {
        // One definition row per monitored flow; created once, hot-start
        // constants applied only on creation.
        auto add_ptdf_row = [&](int group, int k, double hot_init) {
            auto key = std::make_pair(group, k);
            if (a.r_floweq.count(key)) return;
            int vk = flow_var(group, k);
            std::vector<std::pair<int, double>> co{{vk, 1.0}};
            double rhs = 0.0;
            for (size_t n = 0; n < nb; ++n) {
                double f = group < 0 ? in.sens.ptdf.m((int)n, k)
                                     : in.sens.otdf((int)n, k, a.group_branch[group]);
                if (f == 0.0) continue;
                for (int gi : grid.gens_at_bus[n]) co.push_back({a.v_pg[gi], -f});
                for (int di : grid.loads_at_bus[n]) co.push_back({a.v_shed[di], -f});
                if (kind == ModelKind::M3)
                    rhs -= f * pd[n];
                else
                    rhs -= f * (gen0[n] + pd[n] - pd0[n]);
            }
            if (kind != ModelKind::M3) rhs += hot_init;
            std::string name = group < 0 ? strfmt("def.b.%d", grid.branches[k].id)
                                         : strfmt("def.%s.%d", a.groups[group].key().c_str(),
                                                  grid.branches[k].id);
            a.r_floweq[key] = a.lp.add_constraint(name, std::move(co), lp::Rel::Eq, rhs);
        };
        auto warm_ctg_init = [&](int group, int k) {
            int c = a.group_branch[group];
            return (*in.base_flow_mw)[k] + in.sens.lodf_for(c).col(k) * (*in.base_flow_mw)[c];
        };
        auto base_init = [&](int k) {
            return kind == ModelKind::M3 ? 0.0 : (*in.base_flow_mw)[k];
        };
        for (const auto& rec : in.base_cons) {
            if (rec.target == rtca::NetworkConstraint::Target::Branch) {
                int k = grid.branch_index(rec.element_id);
                add_ptdf_row(-1, k, base_init(k));
            } else {
                for (const auto& m :
                     grid.interfaces[interface_index(grid, rec.element_id)].members) {
                    int k = grid.branch_index(m.branch_id);
                    if (grid.branches[k].in_service) add_ptdf_row(-1, k, base_init(k));
                }
            }
        }
        for (const auto& rec : in.ctg_cons) {
            int grp = group_of(a, rec.ctg);
            if (rec.target == rtca::NetworkConstraint::Target::Branch) {
                int k = grid.branch_index(rec.element_id);
                if (k == a.group_branch[grp]) continue;
                double init = kind == ModelKind::M3 ? 0.0
                              : kind == ModelKind::M1 ? rec.initial_mw
                                                      : warm_ctg_init(grp, k);
                add_ptdf_row(grp, k, init);
            } else {
                // Interface members get contingency flow rows too; M1 has no
                // per-member hot-start record, so they use the warm form.
                for (const auto& m :
                     grid.interfaces[interface_index(grid, rec.element_id)].members) {
                    int k = grid.branch_index(m.branch_id);
                    if (k == a.group_branch[grp] || !grid.branches[k].in_service) continue;
                    double init = kind == ModelKind::M3 ? 0.0 : warm_ctg_init(grp, k);
                    add_ptdf_row(grp, k, init);
                }
            }
        }
    } else {
        // B-theta: angles and flow equations for every in-service branch, in
        // the base case and in every contingency group. The outaged branch
        // keeps a variable fixed at zero.
        int ref = in.model.ref;
        auto make_block = [&](int group) {
            std::vector<int> th(nb, -1);
            for (size_t n = 0; n < nb; ++n) {
                std::string name = group < 0 ? strfmt("th.b.%d", grid.buses[n].id)
                                             : strfmt("th.%s.%d", a.groups[group].key().c_str(),
                                                      grid.buses[n].id);
                bool is_ref = (int)n == ref;
                th[n] =
                    a.lp.add_variable(name, is_ref ? 0.0 : -lp::kInf, is_ref ? 0.0 : lp::kInf);
            }
            for (size_t k = 0; k < grid.branches.size(); ++k) {
                const Branch& br = grid.branches[k];
                if (!br.in_service) continue;
                int vk = flow_var(group, (int)k);
                if (group >= 0 && a.group_branch[group] == (int)k) continue;
                double w = grid.base_mva / br.x;
                int f = grid.bus_index(br.from_bus), t = grid.bus_index(br.to_bus);
                std::string name = group < 0 ? strfmt("def.b.%d", br.id)
                                             : strfmt("def.%s.%d", a.groups[group].key().c_str(),
                                                      br.id);
                a.r_floweq[{group, (int)k}] = a.lp.add_constraint(
                    name, {{vk, 1.0}, {th[f], -w}, {th[t], w}}, lp::Rel::Eq, w * br.alpha);
            }
            std::vector<int> rows(nb, -1);
            for (size_t n = 0; n < nb; ++n) {
                std::vector<std::pair<int, double>> co;
                for (int gi : grid.gens_at_bus[n]) co.push_back({a.v_pg[gi], 1.0});
                for (int di : grid.loads_at_bus[n]) co.push_back({a.v_shed[di], 1.0});
                for (int k : grid.branches_to[n])
                    if (!(group >= 0 && a.group_branch[group] == k))
                        co.push_back({flow_var(group, k), 1.0});
                for (int k : grid.branches_from[n])
                    if (!(group >= 0 && a.group_branch[group] == k))
                        co.push_back({flow_var(group, k), -1.0});
                std::string name = group < 0 ? strfmt("nod.b.%d", grid.buses[n].id)
                                             : strfmt("nod.%s.%d", a.groups[group].key().c_str(),
                                                      grid.buses[n].id);
                rows[n] = a.lp.add_constraint(name, std::move(co), lp::Rel::Eq, pd[n]);
            }
            return rows;
        };
        a.r_nodal = make_block(-1);
        for (size_t grp = 0; grp < a.groups.size(); ++grp)
            a.r_nodal_g.push_back(make_block((int)grp));
    }

    // --- limits --------------------------------------------------------------
    a.r_lim_base.assign(in.base_cons.size(), {-1, -1});
    a.r_lim_ctg.assign(in.ctg_cons.size(), {-1, -1});
    auto add_limit_pair = [&](const std::string& tag, std::vector<std::pair<int, double>> co,
                              double lim) {
        int up = a.lp.add_constraint(tag + ".up", co, lp::Rel::LessEq, lim);
        int lo = a.lp.add_constraint(tag + ".lo", std::move(co), lp::Rel::GreaterEq, -lim);
        return std::array<int, 2>{up, lo};
    };
    if (include_limits) {
        for (size_t i = 0; i < in.base_cons.size(); ++i) {
            const auto& rec = in.base_cons[i];
            if (rec.target == rtca::NetworkConstraint::Target::Branch) {
                int k = grid.branch_index(rec.element_id);
                a.r_lim_base[i] = add_limit_pair(strfmt("lim.b.%d", rec.element_id),
                                                 {{flow_var(-1, k), 1.0}}, rec.mw_limit);
            } else {
                const Interface& f = grid.interfaces[interface_index(grid, rec.element_id)];
                std::vector<std::pair<int, double>> co;
                for (const auto& m : f.members) {
                    int k = grid.branch_index(m.branch_id);
                    if (!grid.branches[k].in_service) continue;
                    co.push_back({flow_var(-1, k), (double)m.sign});
                }
                a.r_lim_base[i] =
                    add_limit_pair(strfmt("ifc.b.%d", rec.element_id), std::move(co),
                                   rec.mw_limit);
            }
        }
        for (size_t i = 0; i < in.ctg_cons.size(); ++i) {
            const auto& rec = in.ctg_cons[i];
            int grp = group_of(a, rec.ctg);
            double lim = uses_custom_ctg_limits(kind) ? rec.mw_limit : rec.mw_limit_general;
            if (rec.target == rtca::NetworkConstraint::Target::Branch) {
                int k = grid.branch_index(rec.element_id);
                if (k == a.group_branch[grp]) continue;  // forced to zero anyway
                a.r_lim_ctg[i] =
                    add_limit_pair(strfmt("lim.%s.%d", rec.ctg.key().c_str(), rec.element_id),
                                   {{flow_var(grp, k), 1.0}}, lim);
            } else {
                const Interface& f = grid.interfaces[interface_index(grid, rec.element_id)];
                std::vector<std::pair<int, double>> co;
                for (const auto& m : f.members) {
                    int k = grid.branch_index(m.branch_id);
                    if (!grid.branches[k].in_service || k == a.group_branch[grp]) continue;
                    co.push_back({flow_var(grp, k), (double)m.sign});
                }
                if (co.empty()) continue;
                a.r_lim_ctg[i] = add_limit_pair(
                    strfmt("ifc.%s.%d", rec.ctg.key().c_str(), rec.element_id), std::move(co),
                    rec.mw_limit);
            }
        }
    }
    return a;
}

}  // namespace

lp::LinearProgram build_sced(const ScedInput& in, ModelKind kind, bool include_network_limits) {
    return assemble(in, kind, include_network_limits).lp;
}

ScedSolution solve_sced(const ScedInput& in, ModelKind kind) {
    Assembly a = assemble(in, kind, true);
    lp::LpSolution ls = lp::solve(a.lp);
    const Case& grid = in.grid;

    ScedSolution sol;
    sol.kind = kind;
    sol.status = ls.status;
    sol.diagnostic = ls.diagnostic;
    sol.lp_iterations = ls.iterations;
    sol.collapsed_gens = a.collapsed;
    if (ls.status != lp::LpStatus::Optimal) {
        bool sheddable = false;
        for (const auto& d : grid.loads) sheddable |= d.kind == LoadKind::Positive && d.p > 0;
        if (ls.status == lp::LpStatus::Infeasible && !sheddable)
            sol.diagnostic = "infeasible with no sheddable positive load: " + ls.diagnostic;
        return sol;
    }
    sol.duality_gap = ls.duality_gap;
    sol.max_primal_residual = ls.max_primal_residual;
    sol.objective = ls.objective;

    sol.p_g.resize(grid.gens.size());
    sol.sr.resize(grid.gens.size());
    sol.p_seg.resize(grid.gens.size());
    for (size_t g = 0; g < grid.gens.size(); ++g) {
        sol.p_g[g] = ls.x[a.v_pg[g]];
        sol.sr[g] = ls.x[a.v_sr[g]];
        sol.reserve_cost += grid.gens[g].reserve_price * sol.sr[g];
        if (!grid.gens[g].dispatchable) continue;
        auto blocks = grid.gens[g].dispatch_blocks();
        for (size_t i = 0; i < a.v_seg[g].size(); ++i) {
            double x = ls.x[a.v_seg[g][i]];
            sol.p_seg[g].push_back(x);
            sol.energy_cost += blocks[i].price * x;
        }
    }
    sol.shed.resize(grid.loads.size());
    for (size_t d = 0; d < grid.loads.size(); ++d) {
        sol.shed[d] = ls.x[a.v_shed[d]];
        sol.shed_cost += in.config.shed_penalty * sol.shed[d];
    }

    auto flow_value = [&](int group, const rtca::NetworkConstraint& rec) {
        if (rec.target == rtca::NetworkConstraint::Target::Branch) {
            int k = grid.branch_index(rec.element_id);
            auto it = a.v_flow.find({group, k});
            return it == a.v_flow.end() ? 0.0 : ls.x[it->second];
        }
        const Interface& f = grid.interfaces[interface_index(grid, rec.element_id)];
        double s = 0;
        for (const auto& m : f.members) {
            auto it = a.v_flow.find({group, grid.branch_index(m.branch_id)});
            if (it != a.v_flow.end()) s += m.sign * ls.x[it->second];
        }
        return s;
    };
    for (size_t i = 0; i < in.base_cons.size(); ++i) {
        sol.record_flow_base.push_back(flow_value(-1, in.base_cons[i]));
        LimitDuals d;
        if (a.r_lim_base[i][0] >= 0) {
            d.up = ls.dual[a.r_lim_base[i][0]];
            d.lo = ls.dual[a.r_lim_base[i][1]];
        }
        sol.record_dual_base.push_back(d);
    }
    for (size_t i = 0; i < in.ctg_cons.size(); ++i) {
        int grp = group_of(a, in.ctg_cons[i].ctg);
        sol.record_flow_ctg.push_back(flow_value(grp, in.ctg_cons[i]));
        LimitDuals d;
        if (a.r_lim_ctg[i][0] >= 0) {
            d.up = ls.dual[a.r_lim_ctg[i][0]];
            d.lo = ls.dual[a.r_lim_ctg[i][1]];
        }
        sol.record_dual_ctg.push_back(d);
    }

    if (is_ptdf(kind)) {
        sol.system_balance_dual = ls.dual[a.r_balance];
    } else {
        sol.nodal_dual.assign(grid.buses.size(), 0.0);
        for (size_t n = 0; n < grid.buses.size(); ++n) {
            sol.nodal_dual[n] = ls.dual[a.r_nodal[n]];
            for (const auto& rows : a.r_nodal_g) sol.nodal_dual[n] += ls.dual[rows[n]];
        }
    }
    for (const auto& [key, row] : a.r_floweq) {
        ScedSolution::FlowEq fe;
        fe.base = key.first < 0;
        fe.ctg_branch_idx = key.first < 0 ? -1 : a.group_branch[key.first];
        fe.branch_idx = key.second;
        fe.dual = ls.dual[row];
        auto it = a.v_flow.find(key);
        fe.value = it == a.v_flow.end() ? 0.0 : ls.x[it->second];
        sol.flow_eqs.push_back(fe);
    }
    return sol;
}

BusDeltas deltas(const ScedSolution& sol, const ScedInput& in) {
    const Case& grid = in.grid;
    BusDeltas d;
    d.dp_g.assign(grid.buses.size(), 0.0);
    d.dp_d.assign(grid.buses.size(), 0.0);
    for (size_t g = 0; g < grid.gens.size(); ++g)
        d.dp_g[grid.bus_index(grid.gens[g].bus)] += sol.p_g[g] - grid.gens[g].p0;
    for (size_t l = 0; l < grid.loads.size(); ++l)
        d.dp_d[grid.bus_index(grid.loads[l].bus)] +=
            grid.loads[l].p - grid.loads[l].p0 - sol.shed[l];
    return d;
}

ScedInput make_sced_input(const Case& physical, const acpf::AcSolution& base_ac,
                          const rtca::RtcaReport& rtca_rep, const Config& cfg,
                          bool any_gen_contingency) {
    ScedInput in;
    in.config = cfg;
    in.grid = losses_to_virtual_loads(physical, base_ac);
    for (auto& g : in.grid.gens)
        if (g.curve_kind == CurveKind::Slope) g = linearize_slope_curve(g, cfg.price_increment);
    if (cfg.load_growth != 1.0)
        for (auto& d : in.grid.loads)
            if (d.kind != LoadKind::Virtual) d.p *= cfg.load_growth;
    in.grid.finalize();

    for (const auto& rec : rtca_rep.constraints) {
        if (rec.scope == rtca::NetworkConstraint::Scope::Base)
            in.base_cons.push_back(rec);
        else if (rec.ctg.kind == acpf::Contingency::Kind::Branch)
            in.ctg_cons.push_back(rec);
    }
    in.base_flow_mw = rtca_rep.base_flow_mw;
    in.limit_c_general = rtca_rep.limit_c_general;
    in.model = dc::build_dc_model(in.grid);
    std::vector<int> outages;
    for (const auto& rec : in.ctg_cons) {
        int k = in.grid.branch_index(rec.ctg.element);
        if (!std::count(outages.begin(), outages.end(), k)) outages.push_back(k);
    }
    in.sens = dc::build_sensitivities(in.model, outages);
    in.enforce_reserve_requirement = any_gen_contingency;
    return in;
}

std::string serialize_solution(const ScedInput& in, const ScedSolution& sol) {
    tab::Document doc;
    auto& disp = doc.add("dispatch");
    for (size_t g = 0; g < in.grid.gens.size(); ++g)
        disp.records.push_back({0,
                                {std::to_string(in.grid.gens[g].id),
                                 std::to_string(in.grid.gens[g].bus),
                                 strfmt("%.4f", in.grid.gens[g].p0), strfmt("%.4f", sol.p_g[g])}});
    auto& resv = doc.add("reserve");
    for (size_t g = 0; g < in.grid.gens.size(); ++g)
        resv.records.push_back(
            {0, {std::to_string(in.grid.gens[g].id), strfmt("%.4f", sol.sr[g])}});
    auto& shed = doc.add("shed");
    for (size_t d = 0; d < in.grid.loads.size(); ++d)
        shed.records.push_back({0,
                                {std::to_string(in.grid.loads[d].id),
                                 strfmt("%.4f", in.grid.loads[d].p),
                                 strfmt("%.4f", sol.shed[d])}});
    auto& flows = doc.add("flows");
    auto emit_flow = [&](const rtca::NetworkConstraint& rec, double flow) {
        flows.records.push_back(
            {0,
             {rec.scope == rtca::NetworkConstraint::Scope::Base ? "base" : rec.ctg.key(),
              rec.target == rtca::NetworkConstraint::Target::Branch ? "branch" : "interface",
              std::to_string(rec.element_id), strfmt("%.4f", flow), strfmt("%.4f", rec.mw_limit),
              rec.pseudo ? "pseudo" : "actual"}});
    };
    for (size_t i = 0; i < in.base_cons.size(); ++i)
        emit_flow(in.base_cons[i], sol.record_flow_base[i]);
    for (size_t i = 0; i < in.ctg_cons.size(); ++i)
        emit_flow(in.ctg_cons[i], sol.record_flow_ctg[i]);
    auto& duals = doc.add("duals");
    duals.records.push_back({0, {"objective", strfmt("%.6f", sol.objective)}});
    duals.records.push_back({0, {"energy_cost", strfmt("%.6f", sol.energy_cost)}});
    duals.records.push_back({0, {"reserve_cost", strfmt("%.6f", sol.reserve_cost)}});
    duals.records.push_back({0, {"shed_cost", strfmt("%.6f", sol.shed_cost)}});
    duals.records.push_back({0, {"balance", strfmt("%.6f", sol.system_balance_dual)}});
    auto emit_duals = [&](const rtca::NetworkConstraint& rec, const LimitDuals& d) {
        if (d.up == 0.0 && d.lo == 0.0) return;
        duals.records.push_back(
            {0,
             {"limit", rec.scope == rtca::NetworkConstraint::Scope::Base ? "base" : rec.ctg.key(),
              std::to_string(rec.element_id), strfmt("%.6f", d.up), strfmt("%.6f", d.lo)}});
    };
    for (size_t i = 0; i < in.base_cons.size(); ++i)
        emit_duals(in.base_cons[i], sol.record_dual_base[i]);
    for (size_t i = 0; i < in.ctg_cons.size(); ++i)
        emit_duals(in.ctg_cons[i], sol.record_dual_ctg[i]);
    return tab::write(doc);
}

}  // namespace ems::sced
