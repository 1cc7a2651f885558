#pragma once

#include <string>
#include <vector>

#include "ems/acpf.hpp"
#include "ems/netmodel.hpp"

namespace ems::rtca {

// MW limit from an MVA rate and the reactive flows at both ends. A radicand
// at or below zero clamps to 0 MW and marks the limit reactive-saturated.
struct MwLimit {
    double mw = 0.0;
    bool saturated = false;
};
MwLimit mw_limit(double rate_mva, double q_from, double q_to);

/// Loading level: worse-end apparent power over the applicable rate.
double loading_level(double s_from, double s_to, double rate_mva);

/// Signed initial MW flow: magnitude of the worse end, sign of the from end
/// (sign(0) counts as +).
double initial_flow(double p_from, double p_to);

struct NetworkConstraint {
    enum class Scope { Base, Ctg };
    enum class Target { Branch, Interface };
    Scope scope = Scope::Base;
    Target target = Target::Branch;
    acpf::Contingency ctg;  // meaningful when scope == Ctg
    int element_id = 0;     // branch or interface id
    double initial_mw = 0.0;
    double mw_limit = 0.0;          // LimitA_k / LimitC_kc / Limit_i / Limit_ic (derated)
    double mw_limit_general = 0.0;  // LimitC_k fallback for contingency branch records
    double loading = 0.0;
    bool critical = false;
    bool saturated = false;
    bool pseudo = false;  // mw_limit replaced by a CTS pseudo limit
    int pseudo_switch = 0;
    double q_from = 0.0, q_to = 0.0;  // reactive flows behind the MW conversion
};

struct Violation {
    bool base_scope = true;
    acpf::Contingency ctg;  // meaningful when !base_scope
    int branch_id = 0;
    double mva_over = 0.0;  // worse-end MVA above the applicable rate
    double max_s = 0.0;
    double rate = 0.0;
    double q_from = 0.0, q_to = 0.0;
};

struct ContingencyResult {
    acpf::Contingency ctg;
    enum class Status { Solved, Unsolved, Islanding };
    Status status = Status::Solved;
    std::string diagnostic;
    int iterations = 0;
    bool active = false;
    bool critical = false;
    double violation_mva = 0.0;
};

struct RtcaReport {
    std::vector<ContingencyResult> contingencies;
    std::vector<NetworkConstraint> constraints;
    std::vector<Violation> violations;

    // Base-case quantities SCED consumes for every branch (case order):
    std::vector<double> base_flow_mw;       // signed worse-end MW flow per branch
    std::vector<double> limit_c_general;    // general emergency MW limit, derated
    std::vector<char> limit_c_saturated;

    double base_violation_mva = 0.0;
    double total_violation_mva = 0.0;  // base + contingency

    bool base_critical() const;
    std::vector<acpf::Contingency> critical_contingencies() const;
    const std::vector<Violation> violations_of(const acpf::Contingency& c) const;
};

/// N-1 sweep: solves every contingency AC (warm-started from the base
/// solution), screens branch and interface loadings against the monitoring
/// tolerances, and classifies active/critical constraints. Islanding branch
/// outages are flagged and skipped; diverged solves are reported unsolved.
RtcaReport run_rtca(const Case& c, const acpf::AcSolution& base,
                    const std::vector<acpf::Contingency>& ctgs, const Config& cfg);

}  // namespace ems::rtca
