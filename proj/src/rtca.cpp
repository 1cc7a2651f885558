#include "ems/rtca.hpp"

#include <algorithm>
#include <cmath>

#include "ems/parallel.hpp"

namespace ems::rtca {

MwLimit mw_limit(double rate_mva, double q_from, double q_to) {
    double q = std::max(std::abs(q_from), std::abs(q_to));
    double rad = rate_mva * rate_mva - q * q;
    if (rad <= 0) return {0.0, true};
    return {std::sqrt(rad), false};
}

double loading_level(double s_from, double s_to, double rate_mva) {
    return std::max(s_from, s_to) / rate_mva;
}

double initial_flow(double p_from, double p_to) {
    double mag = std::max(std::abs(p_from), std::abs(p_to));
    return p_from < 0 ? -mag : mag;
}

bool RtcaReport::base_critical() const {
    for (const auto& nc : constraints)
        if (nc.scope == NetworkConstraint::Scope::Base && nc.critical) return true;
    return false;
}

std::vector<acpf::Contingency> RtcaReport::critical_contingencies() const {
    std::vector<acpf::Contingency> out;
    for (const auto& cr : contingencies)
        if (cr.critical) out.push_back(cr.ctg);
    return out;
}

const std::vector<Violation> RtcaReport::violations_of(const acpf::Contingency& c) const {
    std::vector<Violation> out;
    for (const auto& v : violations)
        if (!v.base_scope && v.ctg == c) out.push_back(v);
    return out;
}

namespace {

// Screens one solved state against rates. Base case screens against RateA
// with tolerance pct; contingency cases against RateC with pctc. Threshold
// comparisons are inclusive so exactly-at-limit branches stay monitored.
struct ScreenResult {
    std::vector<NetworkConstraint> constraints;
    std::vector<Violation> violations;
    bool critical = false;
    bool active = false;
    double violation_mva = 0.0;
};

ScreenResult screen_state(const Case& c, const acpf::AcSolution& ac, bool base_scope,
                          const acpf::Contingency& ctg, const Config& cfg,
                          const std::vector<double>& limit_c_general,
                          const std::vector<char>& limit_c_sat) {
    ScreenResult out;
    double tol = base_scope ? cfg.pct : cfg.pctc;
    std::vector<double> flow_mw(c.branches.size(), 0.0);
    for (size_t k = 0; k < c.branches.size(); ++k) {
        const Branch& br = c.branches[k];
        if (!br.in_service) continue;
        const auto& f = ac.branch[k];
        flow_mw[k] = initial_flow(f.p_from, f.p_to);
        double rate = base_scope ? br.rate_a : br.rate_c;
        double ll = loading_level(f.s_from, f.s_to, rate);
        if (f.max_s() > rate) {
            Violation v;
            v.base_scope = base_scope;
            v.ctg = ctg;
            v.branch_id = br.id;
            v.max_s = f.max_s();
            v.rate = rate;
            v.mva_over = f.max_s() - rate;
            v.q_from = f.q_from;
            v.q_to = f.q_to;
            out.violations.push_back(v);
            out.violation_mva += v.mva_over;
        }
        if (ll < tol) continue;
        NetworkConstraint nc;
        nc.scope = base_scope ? NetworkConstraint::Scope::Base : NetworkConstraint::Scope::Ctg;
        nc.target = NetworkConstraint::Target::Branch;
        nc.ctg = ctg;
        nc.element_id = br.id;
        nc.initial_mw = flow_mw[k];
        MwLimit lim = mw_limit(rate, f.q_from, f.q_to);
        nc.mw_limit = lim.mw * cfg.limit_derate;
        nc.saturated = lim.saturated;
        nc.mw_limit_general = base_scope ? nc.mw_limit : limit_c_general[k];
        if (!base_scope && limit_c_sat[k]) nc.saturated = true;
        nc.loading = ll;
        nc.critical = std::abs(nc.initial_mw) > nc.mw_limit;
        nc.q_from = f.q_from;
        nc.q_to = f.q_to;
        out.constraints.push_back(nc);
        out.active = true;
        out.critical |= nc.critical;
    }
    for (const auto& ifc : c.interfaces) {
        double flow = 0.0;
        bool any = false;
        for (const auto& m : ifc.members) {
            int k = c.branch_index(m.branch_id);
            if (!c.branches[k].in_service) continue;
            flow += m.sign * flow_mw[k];
            any = true;
        }
        if (!any) continue;
        double limit = base_scope ? ifc.limit_base : ifc.limit_for(ctg.key());
        double ll = std::abs(flow) / limit;
        if (ll < tol) continue;
        NetworkConstraint nc;
        nc.scope = base_scope ? NetworkConstraint::Scope::Base : NetworkConstraint::Scope::Ctg;
        nc.target = NetworkConstraint::Target::Interface;
        nc.ctg = ctg;
        nc.element_id = ifc.id;
        nc.initial_mw = flow;
        nc.mw_limit = limit * cfg.limit_derate;
        nc.mw_limit_general = nc.mw_limit;
        nc.loading = ll;
        nc.critical = std::abs(flow) > nc.mw_limit;
        out.constraints.push_back(nc);
        out.active = true;
        out.critical |= nc.critical;
    }
    return out;
}

}  // namespace

RtcaReport run_rtca(const Case& c, const acpf::AcSolution& base,
                    const std::vector<acpf::Contingency>& ctgs, const Config& cfg) {
    cfg.validate();
    if (!base.converged) throw Error("run_rtca: base-case AC solution is unsolved");
    RtcaReport rep;

    // Base-case flows, general emergency limits, base screening.
    rep.base_flow_mw.assign(c.branches.size(), 0.0);
    rep.limit_c_general.assign(c.branches.size(), 0.0);
    rep.limit_c_saturated.assign(c.branches.size(), 0);
    for (size_t k = 0; k < c.branches.size(); ++k) {
        const Branch& br = c.branches[k];
        if (!br.in_service) continue;
        const auto& f = base.branch[k];
        rep.base_flow_mw[k] = initial_flow(f.p_from, f.p_to);
        MwLimit lim = mw_limit(br.rate_c, f.q_from, f.q_to);
        rep.limit_c_general[k] = lim.mw * cfg.limit_derate;
        rep.limit_c_saturated[k] = lim.saturated ? 1 : 0;
    }
    acpf::Contingency none;
    ScreenResult base_screen =
        screen_state(c, base, true, none, cfg, rep.limit_c_general, rep.limit_c_saturated);
    rep.constraints = base_screen.constraints;
    rep.violations = base_screen.violations;
    rep.base_violation_mva = base_screen.violation_mva;
    rep.total_violation_mva = base_screen.violation_mva;

    // Contingency sweep; each index fills only its own slot, so the report is
    // a deterministic ordered reduction.
    std::vector<ContingencyResult> results(ctgs.size());
    std::vector<ScreenResult> screens(ctgs.size());
    parallel_for((int)ctgs.size(), [&](int i) {
        ContingencyResult& cr = results[i];
        cr.ctg = ctgs[i];
        try {
            Case outaged = acpf::apply_outage(c, ctgs[i], cfg.participation);
            acpf::SolveOptions opt;
            opt.participation = cfg.participation;
            opt.warm_start = &base;
            acpf::AcSolution sol = acpf::solve_ac_power_flow(outaged, opt);
            cr.iterations = sol.iterations;
            if (!sol.converged) {
                cr.status = ContingencyResult::Status::Unsolved;
                cr.diagnostic = sol.diagnostic;
                return;
            }
            screens[i] = screen_state(outaged, sol, false, ctgs[i], cfg, rep.limit_c_general,
                                      rep.limit_c_saturated);
            cr.status = ContingencyResult::Status::Solved;
            cr.active = screens[i].active;
            cr.critical = screens[i].critical;
            cr.violation_mva = screens[i].violation_mva;
        } catch (const IslandingError& e) {
            cr.status = ContingencyResult::Status::Islanding;
            cr.diagnostic = e.what();
        } catch (const Error& e) {
            cr.status = ContingencyResult::Status::Unsolved;
            cr.diagnostic = e.what();
        }
    });
    for (size_t i = 0; i < ctgs.size(); ++i) {
        rep.contingencies.push_back(results[i]);
        rep.constraints.insert(rep.constraints.end(), screens[i].constraints.begin(),
                               screens[i].constraints.end());
        rep.violations.insert(rep.violations.end(), screens[i].violations.begin(),
                              screens[i].violations.end());
        rep.total_violation_mva += screens[i].violation_mva;
    }
    return rep;
}

}  // namespace ems::rtca
