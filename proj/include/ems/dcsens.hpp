#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ems/common.hpp"
#include "ems/netmodel.hpp"

namespace ems::dc {

/// Linearized network model over the in-service topology. Flows follow
/// p_k = (th_f - th_t + alpha_k) / x_k (p.u.), scaled to MW by base_mva.
struct DcModel {
    uint64_t stamp = 0;  // identity for factor/model consistency checks
    double base_mva = 100.0;
    int n_bus = 0;
    int ref = 0;  // reference bus index
    // Per case branch (parallel to Case::branches):
    std::vector<int> from, to;        // bus indices
    std::vector<double> weight;       // 1/x, zero for out-of-service branches
    std::vector<double> alpha;
    std::vector<char> in_service;

    Eigen::MatrixXd b_reduced;        // p.u. susceptance, reference removed
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    std::vector<int> red_of;          // bus index -> reduced row, -1 for ref
    Eigen::VectorXd shift_inj;        // p.u. equivalent injections from phase shifts

    int n_branch() const { return (int)from.size(); }
};

struct PtdfMatrix {
    uint64_t stamp = 0;
    Eigen::MatrixXd m;  // bus x branch; reference row is zero
};

struct LodfColumn {
    uint64_t stamp = 0;
    int outage = -1;        // branch index
    Eigen::VectorXd col;    // per branch; -1 at the outaged branch itself
};

/// Builds the reduced susceptance model. Throws on a disconnected network,
/// listing the islands.
DcModel build_dc_model(const Case& c);

/// Branch MW flows for a bus injection vector (MW, indexed per case bus).
/// Any injection imbalance is absorbed at the reference bus.
std::vector<double> dc_flow(const DcModel& m, const std::vector<double>& inj_mw);

PtdfMatrix compute_ptdf(const DcModel& m);

/// Throws IslandingError when the outage disconnects the network.
LodfColumn compute_lodf(const DcModel& m, const PtdfMatrix& ptdf, int outage_branch_idx);

/// OTDF_{n,k,c} = PTDF_{n,k} + LODF_{k,c} * PTDF_{n,c}, as a bus x branch
/// matrix for one outage. Throws on mismatched model stamps.
Eigen::MatrixXd compute_otdf(const PtdfMatrix& ptdf, const LodfColumn& lodf);

struct SensitivitySet {
    uint64_t stamp = 0;
    PtdfMatrix ptdf;
    std::map<int, LodfColumn> lodf;  // by outaged branch index

    double otdf(int bus, int branch, int outage_branch) const;
    const LodfColumn& lodf_for(int outage_branch) const;
};

/// PTDF plus LODF columns for the given outages (branch indices).
SensitivitySet build_sensitivities(const DcModel& m, const std::vector<int>& outages);

/// Factor dump in the tabular text format ([ptdf] and [lodf] sections).
std::string write_sensitivities(const Case& c, const SensitivitySet& s);

}  // namespace ems::dc
