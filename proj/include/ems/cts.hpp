#pragma once

#include <vector>

#include "ems/acpf.hpp"
#include "ems/netmodel.hpp"
#include "ems/rtca.hpp"

namespace ems::cts {

struct BranchRelief {
    int branch_id = 0;
    double v_before = 0.0;  // MVA over RateC pre-switching
    double v_after = 0.0;   // MVA over RateC post-switching
    double q_from = 0.0, q_to = 0.0;  // pre-switching contingency reactive flows
};

struct CtsEvaluation {
    acpf::Contingency ctg;
    int switch_branch = 0;
    bool feasible = false;    // post-switching AC solved, no islanding
    bool admissible = false;  // total drops and no branch is worse off
    double total_before = 0.0;
    double total_after = 0.0;
    std::vector<BranchRelief> relief;  // one entry per pre-switching violation

    double reduction() const { return total_before - total_after; }
};

struct PseudoLimitRecord {
    acpf::Contingency ctg;
    int branch_id = 0;
    double rate_c = 0.0;
    double percent = 0.0;       // violation reduction fraction
    double prate_c = 0.0;       // pseudo MVA rate
    double mw_limit = 0.0;      // pseudo MW limit (derated like the actual ones)
    int switch_branch = 0;
};

/// Switching candidates for one critical contingency: every in-service branch
/// except the contingency element, the violated branches themselves, and any
/// branch whose removal (jointly with the contingency) islands the network.
std::vector<int> enumerate_candidates(const Case& c, const acpf::Contingency& ctg,
                                      const std::vector<rtca::Violation>& viols);

/// AC evaluation of one switching action under one contingency.
CtsEvaluation evaluate_candidate(const Case& c, const acpf::Contingency& ctg, int switch_branch,
                                 const std::vector<rtca::Violation>& viols,
                                 const Config& cfg);

/// Best admissible evaluation: maximum total reduction, ties to the lowest
/// switched branch id. Returns nullptr-like empty optional semantics via the
/// feasible flag when nothing is admissible.
const CtsEvaluation* select_best(const std::vector<CtsEvaluation>& evals);

/// Pseudo limits for the relieved constraints of one admissible evaluation.
/// Records with zero pre-switching violation are skipped.
std::vector<PseudoLimitRecord> pseudo_limits(const Case& c, const CtsEvaluation& best,
                                             const Config& cfg);

/// Full sweep: evaluates all candidates (concurrently) for one critical
/// contingency and returns every evaluation, deterministically ordered by
/// switch branch id.
std::vector<CtsEvaluation> sweep_contingency(const Case& c, const acpf::Contingency& ctg,
                                             const std::vector<rtca::Violation>& viols,
                                             const Config& cfg);

}  // namespace ems::cts
