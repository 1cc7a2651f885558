#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ems/acpf.hpp"
#include "ems/cts.hpp"
#include "ems/market.hpp"
#include "ems/netmodel.hpp"
#include "ems/rtca.hpp"
#include "ems/sced.hpp"

namespace ems::orch {

enum class Procedure { A, B };

struct CtsOutcome {
    acpf::Contingency ctg;
    std::vector<cts::CtsEvaluation> evaluations;  // one per candidate, by branch id
    bool has_best = false;
    cts::CtsEvaluation best;
};

struct Step6Check {
    acpf::Contingency ctg;
    int branch_id = 0;
    int switch_branch = 0;
    bool solved = false;
    double v_post = 0.0;       // residual violation after E-SCED, MVA
    double v_post_cts = 0.0;   // after re-applying the stored switch
    double percent_step3 = 0.0;
    double percent_post = 0.0;
    bool holds = false;  // percent_post >= percent_step3 - 0.10
};

struct AcDcGap {
    int branch_id = 0;
    double sced_mw = 0.0;
    double ac_mw = 0.0;
    double gap = 0.0;
};

struct ProcedureReport {
    Procedure procedure = Procedure::A;
    sced::ModelKind kind = sced::ModelKind::M1;
    std::string case_name;
    bool ok = true;
    std::string failure;

    acpf::AcSolution base_ac;
    rtca::RtcaReport pre_rtca;
    sced::ScedInput input;  // pseudo limits substituted for Procedure-B
    sced::ScedSolution sced;
    market::MarketResults market;
    market::CongestionCost cngst;

    bool post_evaluated = false;
    acpf::AcSolution post_ac;
    rtca::RtcaReport post_rtca;
    std::vector<AcDcGap> gaps;  // SCED DC flow vs post-SCED AC flow, monitored base branches

    // Procedure-B extras
    std::vector<CtsOutcome> cts_outcomes;
    std::vector<cts::PseudoLimitRecord> pseudo;
    double cngst_cost_sced = 0.0;
    double cngst_cost_esced = 0.0;
    double ccr_cts = 0.0;
    std::vector<Step6Check> step6;

    std::vector<std::pair<std::string, double>> timings_ms;  // reporting to stderr only
};

ProcedureReport run_procedure_a(const Case& c, const Config& cfg, sced::ModelKind kind,
                                const std::vector<acpf::Contingency>* contingencies = nullptr);

ProcedureReport run_procedure_b(const Case& c, const Config& cfg, sced::ModelKind kind,
                                const std::vector<acpf::Contingency>* contingencies = nullptr);

}  // namespace ems::orch
