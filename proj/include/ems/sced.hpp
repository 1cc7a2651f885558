#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ems/dcsens.hpp"
#include "ems/lpcore.hpp"
#include "ems/netmodel.hpp"
#include "ems/rtca.hpp"

namespace ems::sced {

enum class ModelKind { M1, M2, M3, M4, M5 };
const char* to_string(ModelKind k);
std::optional<ModelKind> model_from_string(const std::string& s);

/// Everything one SCED solve needs. Constraint lists are rtca records;
/// contingency records must reference branch contingencies only (generator
/// outages are covered by the reserve requirement).
struct ScedInput {
    Case grid;  // with virtual loads; gen curves linearized to blocks
    std::vector<rtca::NetworkConstraint> base_cons;
    std::vector<rtca::NetworkConstraint> ctg_cons;

    // Hot/warm-start data (optional; required by M1/M2).
    std::optional<std::vector<double>> base_flow_mw;  // P_k0 per branch
    std::optional<std::vector<double>> limit_c_general;  // LimitC_k per branch

    dc::DcModel model;        // topology snapshot the factors belong to
    dc::SensitivitySet sens;  // PTDF + LODF for every contingency branch used
    Config config;
    bool enforce_reserve_requirement = true;
};

/// Builds a complete ScedInput from RTCA results: converts losses to virtual
/// loads, linearizes slope offers, filters contingency records to branch
/// contingencies, applies the load-growth forecast, and computes sensitivity
/// factors on the in-service topology.
ScedInput make_sced_input(const Case& physical, const acpf::AcSolution& base_ac,
                          const rtca::RtcaReport& rtca, const Config& cfg,
                          bool any_gen_contingency);

struct LimitDuals {
    double up = 0.0;  // dual of  flow <= +limit  (non-positive)
    double lo = 0.0;  // dual of  flow >= -limit  (non-negative)
    // Paper-convention pair: F+ = up, F- = -lo, both non-positive.
    double f_diff() const { return up + lo; }  // F+ - F-
};

struct ScedSolution {
    ModelKind kind = ModelKind::M1;
    lp::LpStatus status = lp::LpStatus::IterLimit;
    std::string diagnostic;
    int lp_iterations = 0;
    double duality_gap = 0.0;
    double max_primal_residual = 0.0;

    double objective = 0.0;
    double energy_cost = 0.0;   // EC
    double reserve_cost = 0.0;  // RC
    double shed_cost = 0.0;

    std::vector<double> p_g;                  // per gen, MW
    std::vector<std::vector<double>> p_seg;   // per gen, per dispatch block
    std::vector<double> sr;                   // per gen
    std::vector<double> shed;                 // per load

    std::vector<double> record_flow_base;     // aligned with input.base_cons
    std::vector<double> record_flow_ctg;      // aligned with input.ctg_cons
    std::vector<LimitDuals> record_dual_base;
    std::vector<LimitDuals> record_dual_ctg;

    double system_balance_dual = 0.0;   // PTDF models: dual of the system balance
    std::vector<double> nodal_dual;     // B-theta models: summed nodal duals per bus

    // Flow-definition equality rows (for the LMP duality identity).
    struct FlowEq {
        bool base = true;
        int ctg_branch_idx = -1;  // outaged branch (case index) for ctg rows
        int branch_idx = 0;       // monitored branch (case index)
        double dual = 0.0;
        double value = 0.0;
    };
    std::vector<FlowEq> flow_eqs;

    // Units whose ramp/capacity window was empty and got collapsed.
    std::vector<int> collapsed_gens;
};

/// Assembles the LP for the requested model kind, with exactly the constraint
/// families of that model. Throws on kind/input mismatches.
lp::LinearProgram build_sced(const ScedInput& in, ModelKind kind,
                             bool include_network_limits = true);

ScedSolution solve_sced(const ScedInput& in, ModelKind kind);

struct BusDeltas {
    std::vector<double> dp_g;  // per bus
    std::vector<double> dp_d;  // per bus (shedding included)
};
BusDeltas deltas(const ScedSolution& sol, const ScedInput& in);

/// Tabular serialization of a solution ([dispatch], [reserve], [shed],
/// [flows], [duals] sections).
std::string serialize_solution(const ScedInput& in, const ScedSolution& sol);

}  // namespace ems::sced
