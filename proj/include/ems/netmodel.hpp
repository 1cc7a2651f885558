#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ems {

namespace acpf {
struct AcSolution;
}

struct Bus {
    int id = 0;
    double base_kv = 0.0;
    bool is_reference = false;
};

struct Branch {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    double x = 0.0;       // series reactance, p.u.
    double alpha = 0.0;   // phase shift, rad; flow convention p = (th_f - th_t + alpha)/x
    double rate_a = 0.0;  // normal limit, MVA
    double rate_c = 0.0;  // emergency limit, MVA
    bool in_service = true;
    // AC extension columns (optional in the case file, default 0)
    double r = 0.0;         // series resistance, p.u.
    double b_charge = 0.0;  // total line charging susceptance, p.u.
};

struct CostSegment {
    double breadth = 0.0;  // MW
    double price = 0.0;    // $/MWh
};

// Breakpoint of a slope (piecewise-affine marginal cost) curve.
struct SlopePoint {
    double mw = 0.0;
    double price = 0.0;
};

enum class CurveKind { Block, Slope };

struct Generator {
    int id = 0;
    int bus = 0;
    double p_min = 0.0;
    double p_max = 0.0;
    double p0 = 0.0;           // initial output, MW
    double energy_ramp = 0.0;  // MRR, MW/min
    double spin_ramp = 0.0;    // SRR, MW/min
    double reserve_price = 0.0;
    bool dispatchable = true;
    double v_set = 1.0;  // AC voltage setpoint, p.u. (optional column)

    CurveKind curve_kind = CurveKind::Block;
    double econ_min = 0.0;       // economic minimum, first flat segment breadth
    double no_load_price = 0.0;  // price of the first flat segment
    std::vector<CostSegment> blocks;     // block curves: segments above econ_min
    std::vector<SlopePoint> slope_pts;   // slope curves: breakpoints above econ_min

    // Full block ladder the LP dispatches: flat first segment then the offer
    // blocks. Only valid for block curves.
    std::vector<CostSegment> dispatch_blocks() const;
    // Exact energy cost of output p under this curve (block: ladder sum,
    // slope: integral of the piecewise-affine marginal price).
    double energy_cost(double p) const;
};

enum class LoadKind { Positive, Negative, Virtual };

struct Load {
    int id = 0;
    int bus = 0;
    double p = 0.0;   // forecast P_d, MW
    double p0 = 0.0;  // initial P_d0, MW
    LoadKind kind = LoadKind::Positive;
    double q = 0.0;  // reactive demand, MVAr (optional column)
};

struct InterfaceMember {
    int branch_id = 0;
    int sign = 1;  // orientation relative to branch from->to
};

struct Interface {
    int id = 0;
    double limit_base = 0.0;
    double limit_ctg = 0.0;  // default contingency limit (= limit_base unless given)
    std::vector<InterfaceMember> members;
    // per-contingency overrides: key "branch:<id>" or "gen:<id>"
    std::unordered_map<std::string, double> ctg_limits;

    double limit_for(const std::string& ctg_key) const;
};

enum class ParticipationRule { HeadroomProportional, Equal };

struct Config {
    double pct = 1.0;             // base-case monitoring tolerance
    double pctc = 1.0;            // contingency monitoring tolerance
    double t_ed = 10.0;           // SCED look-ahead, min
    double t_sr = 10.0;           // spinning reserve response time, min
    double shed_penalty = 5000.0; // $/MWh
    double price_increment = 1.0; // dC for slope-curve linearization
    ParticipationRule participation = ParticipationRule::HeadroomProportional;
    double limit_derate = 1.0;    // operator derating of reported limits
    double load_growth = 1.0;     // P_d = load_growth * P_d0 when forecast not given
    bool settle_physical_loads_only = false;

    void validate() const;
};

struct Case {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> gens;
    std::vector<Load> loads;
    std::vector<Interface> interfaces;

    // Built by finalize(): id lookups and bus-membership caches (indices).
    std::unordered_map<int, int> bus_idx_of;
    std::unordered_map<int, int> branch_idx_of;
    std::unordered_map<int, int> gen_idx_of;
    std::unordered_map<int, int> load_idx_of;
    std::vector<std::vector<int>> gens_at_bus;
    std::vector<std::vector<int>> loads_at_bus;
    std::vector<std::vector<int>> branches_from;  // k with from_bus = n (in service)
    std::vector<std::vector<int>> branches_to;
    std::vector<int> island_of;  // per bus, over in-service branches
    int n_islands = 0;

    int bus_index(int id) const;
    int branch_index(int id) const;
    int gen_index(int id) const;
    int load_index(int id) const;

    // Validates invariants and rebuilds the lookup caches. Throws ems::Error.
    void finalize();

    double total_load_p() const;
    double total_gen_p0() const;
};

Case parse_case(const std::string& text);
std::string serialize_case(const Case& c);

/// Converts per-branch AC losses into fixed virtual loads, half at each
/// terminal bus. Returns a new case; the input is untouched.
Case losses_to_virtual_loads(const Case& c, const acpf::AcSolution& ac);

/// Replaces the slope segments of a generator offer with equal-breadth block
/// sub-segments priced at their midpoints. Block-curve generators pass through
/// unchanged.
Generator linearize_slope_curve(const Generator& g, double price_increment);

}  // namespace ems
