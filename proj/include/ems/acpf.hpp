#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ems/common.hpp"
#include "ems/netmodel.hpp"

namespace ems::acpf {

struct BranchFlow {
    double p_from = 0, q_from = 0;  // MW / MVAr out of the from bus
    double p_to = 0, q_to = 0;      // MW / MVAr out of the to bus
    double s_from = 0, s_to = 0;    // MVA
    double loss_mw = 0;             // p_from + p_to
    double max_s() const { return s_from > s_to ? s_from : s_to; }
    double max_abs_q() const;
};

struct AcSolution {
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0;  // p.u.
    std::string diagnostic;

    std::vector<double> v_mag;    // per bus, p.u.
    std::vector<double> v_ang;    // per bus, rad
    std::vector<BranchFlow> branch;   // aligned with case.branches (zeros when out)
    std::vector<double> gen_p;    // per generator, MW (schedule + slack share)
    std::vector<double> gen_q;    // per generator, MVAr

    double total_loss_mw() const;
    double total_gen_mw() const;
};

struct Contingency {
    enum class Kind { Branch, Generator };
    Kind kind = Kind::Branch;
    int element = 0;

    std::string key() const {
        return (kind == Kind::Branch ? "branch:" : "gen:") + std::to_string(element);
    }
    bool operator==(const Contingency&) const = default;
};

struct SolveOptions {
    double tol = 1e-10;  // p.u. mismatch
    int max_iter = 20;
    ParticipationRule participation = ParticipationRule::HeadroomProportional;
    const AcSolution* warm_start = nullptr;
};

/// Full Newton-Raphson AC power flow. MW imbalance (losses, redispatch error)
/// is absorbed by dispatchable units in proportion to the participation rule
/// rather than by a single slack unit. Non-convergence is reported in the
/// solution, not thrown.
AcSolution solve_ac_power_flow(const Case& c, const SolveOptions& opt = {});

/// Returns a copy of the case with the contingency applied. Branch outages
/// leave all injections unchanged; generator outages redistribute the lost MW
/// over the remaining dispatchable units by participation factor, respecting
/// p_max. Throws IslandingError when a branch outage splits the network.
Case apply_outage(const Case& c, const Contingency& ctg,
                  ParticipationRule rule = ParticipationRule::HeadroomProportional);

/// Default N-1 scan list: every in-service branch whose outage keeps the
/// network connected is listed as a branch contingency (islanding ones are
/// excluded), plus every generator.
std::vector<Contingency> default_contingencies(const Case& c);

}  // namespace ems::acpf
