#pragma once

#include <vector>

#include "ems/sced.hpp"

namespace ems::market {

struct MarketResults {
    double lmp_s = 0.0;             // system (energy) component
    std::vector<double> lmp;        // per bus
    std::vector<double> lmp_cg;     // congestion component per bus
    double avg_lmp = 0.0;
    double avg_lmp_cg = 0.0;

    double ld_paymt = 0.0;
    double gen_rvn = 0.0;
    double gen_cost = 0.0;  // energy only
    double gen_rent = 0.0;
    double cngst_rvn = 0.0;

    // Duality-identity residual per bus: the congestion component assembled
    // from branch/interface limit duals against the LMP extracted through the
    // balance/flow-equation duals. Near zero for a consistent optimal basis.
    std::vector<double> duality_residual;
    double max_duality_residual = 0.0;
};

/// LMP extraction. PTDF models: LMP_s is the system-balance dual and the
/// congestion component is assembled from limit duals weighted by PTDF/OTDF.
/// B-theta models: nodal duals are read directly and the assembled identity
/// becomes the consistency check.
MarketResults compute_lmps(const sced::ScedInput& in, const sced::ScedSolution& sol);

/// Settlement quantities (load payment, revenues, rents, congestion revenue).
void settle(MarketResults& r, const sced::ScedInput& in, const sced::ScedSolution& sol);

struct CongestionCost {
    double tcost1 = 0.0;  // objective with network constraints
    double tcost2 = 0.0;  // objective of the same LP without them
    double cost = 0.0;    // tcost1 - tcost2
};

/// Solves the model twice (with and without branch/interface limits).
CongestionCost congestion_cost(const sced::ScedInput& in, sced::ModelKind kind);

/// Congestion cost reduction of E-SCED relative to SCED.
double ccr(double cngst_esced, double cngst_sced);

/// [lmp] and [settlement] report sections.
std::string serialize_market(const sced::ScedInput& in, const MarketResults& r);

}  // namespace ems::market
