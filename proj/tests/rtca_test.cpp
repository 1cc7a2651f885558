#include "doctest.h"

#include <cmath>

#include "ems/report.hpp"
#include "ems/rtca.hpp"
#include "support.hpp"

using namespace ems;
using namespace ems::rtca;

// Parallel pair sized so losing one line pushes the survivor a few percent
// over its emergency rating.
static Case parallel_pair_case() {
    Case c;
    c.base_mva = 100;
    c.buses = {{1, 230, true}, {2, 230, false}};
    for (int id : {1, 2}) {
        Branch br;
        br.id = id;
        br.from_bus = 1;
        br.to_bus = 2;
        br.x = 0.1;
        br.r = 0.003;
        br.rate_a = 100;
        br.rate_c = 115;
        c.branches.push_back(br);
    }
    Generator g;
    g.id = 1;
    g.bus = 1;
    g.p_min = 0;
    g.p_max = 200;
    g.p0 = 121;
    g.energy_ramp = 30;
    g.spin_ramp = 30;
    g.no_load_price = 10;
    g.blocks = {{200, 10}};
    c.gens = {g};
    Generator g2 = g;
    g2.id = 2;
    g2.bus = 2;
    g2.p_max = 150;
    g2.p0 = 0;
    g2.no_load_price = 30;
    g2.blocks = {{150, 30}};
    c.gens.push_back(g2);
    Load d;
    d.id = 1;
    d.bus = 2;
    d.p = d.p0 = 120;
    d.q = 10;
    c.loads = {d};
    c.finalize();
    return c;
}

TEST_CASE("mw limit conversion") {
    SUBCASE("worked base-case value") {
        MwLimit l = mw_limit(100, 60, -80);
        CHECK_FALSE(l.saturated);
        CHECK(l.mw == doctest::Approx(60.0));
    }
    SUBCASE("pure active flow keeps the full rate") {
        MwLimit l = mw_limit(100, 0, 0);
        CHECK(l.mw == doctest::Approx(100.0));
    }
    SUBCASE("worked emergency value") {
        MwLimit l = mw_limit(125, 35, -20);
        CHECK(l.mw == doctest::Approx(120.0));
    }
    SUBCASE("reactive saturation clamps to zero") {
        MwLimit l = mw_limit(100, 0, 110);
        CHECK(l.saturated);
        CHECK(l.mw == 0.0);
        CHECK(mw_limit(100, 100, 0).saturated);  // radicand exactly zero
    }
}

TEST_CASE("loading level") {
    CHECK(loading_level(100, 98, 110) == doctest::Approx(100.0 / 110.0));
    CHECK(loading_level(0, 0, 50) == 0.0);
    CHECK(loading_level(120, 119, 120) == doctest::Approx(1.0));
}

TEST_CASE("initial flow sign convention") {
    CHECK(initial_flow(-50, 52) == doctest::Approx(-52.0));
    CHECK(initial_flow(40, -40) == doctest::Approx(40.0));
    CHECK(initial_flow(0, 3) == doctest::Approx(3.0));  // sign(0) counts as +
}

TEST_CASE("quiet system produces empty monitor sets") {
    Case c = test::load_fixture("triangle.grid");
    auto ac = acpf::solve_ac_power_flow(c);
    REQUIRE(ac.converged);
    Config cfg;
    RtcaReport rep = run_rtca(c, ac, acpf::default_contingencies(c), cfg);
    CHECK(rep.constraints.empty());
    CHECK(rep.violations.empty());
    CHECK(rep.total_violation_mva == 0.0);
    for (const auto& cr : rep.contingencies) CHECK_FALSE(cr.critical);
}

TEST_CASE("parallel-pair outage rises to a critical constraint") {
    Case c = parallel_pair_case();
    auto ac = acpf::solve_ac_power_flow(c);
    REQUIRE(ac.converged);
    Config cfg;
    auto ctgs = acpf::default_contingencies(c);
    RtcaReport rep = run_rtca(c, ac, ctgs, cfg);

    int critical_ctgs = 0;
    for (const auto& cr : rep.contingencies) critical_ctgs += cr.critical;
    CHECK(critical_ctgs >= 2);  // either line outage overloads the survivor

    // Violation magnitudes match an independent outage re-solve.
    acpf::Contingency ctg{acpf::Contingency::Kind::Branch, 1};
    auto viols = rep.violations_of(ctg);
    REQUIRE(viols.size() == 1);
    Case outaged = acpf::apply_outage(c, ctg);
    auto sol = acpf::solve_ac_power_flow(outaged);
    REQUIRE(sol.converged);
    int k = outaged.branch_index(2);
    CHECK(viols[0].branch_id == 2);
    CHECK(viols[0].mva_over == doctest::Approx(sol.branch[k].max_s() - 115.0).epsilon(1e-6));
    CHECK(viols[0].mva_over > 0.02 * 115.0);

    // The record carries the customized limit and the general fallback from
    // base-case reactive flows.
    bool found = false;
    for (const auto& nc : rep.constraints) {
        if (nc.scope != NetworkConstraint::Scope::Ctg || !(nc.ctg == ctg)) continue;
        REQUIRE(nc.element_id == 2);
        found = true;
        CHECK(nc.critical);
        MwLimit kc = mw_limit(115.0, sol.branch[k].q_from, sol.branch[k].q_to);
        CHECK(nc.mw_limit == doctest::Approx(kc.mw).epsilon(1e-9));
        int kb = c.branch_index(2);
        MwLimit gen_lim = mw_limit(115.0, ac.branch[kb].q_from, ac.branch[kb].q_to);
        CHECK(nc.mw_limit_general == doctest::Approx(gen_lim.mw).epsilon(1e-9));
        CHECK(std::abs(nc.initial_mw) > nc.mw_limit);
    }
    CHECK(found);
}

TEST_CASE("generator contingency screening matches the outage oracle") {
    Case c = parallel_pair_case();
    auto ac = acpf::solve_ac_power_flow(c);
    Config cfg;
    acpf::Contingency ctg{acpf::Contingency::Kind::Generator, 1};
    RtcaReport rep = run_rtca(c, ac, {ctg}, cfg);
    REQUIRE(rep.contingencies.size() == 1);
    CHECK(rep.contingencies[0].status == ContingencyResult::Status::Solved);
    Case outaged = acpf::apply_outage(c, ctg);
    auto sol = acpf::solve_ac_power_flow(outaged);
    REQUIRE(sol.converged);
    CHECK(rep.contingencies[0].violation_mva ==
          doctest::Approx(std::max(0.0, sol.branch[0].max_s() - 115.0) +
                          std::max(0.0, sol.branch[1].max_s() - 115.0))
              .epsilon(1e-9));
}

TEST_CASE("screening is monotone in the tolerances") {
    Case c = test::load_fixture("case14.grid");
    auto ac = acpf::solve_ac_power_flow(c);
    auto ctgs = acpf::default_contingencies(c);
    Config tight;
    Config loose;
    loose.pct = 0.5;
    loose.pctc = 0.5;
    RtcaReport a = run_rtca(c, ac, ctgs, tight);
    RtcaReport b = run_rtca(c, ac, ctgs, loose);
    CHECK(b.constraints.size() >= a.constraints.size());
    for (const auto& nc : a.constraints) {
        bool present = false;
        for (const auto& mc : b.constraints)
            present |= mc.scope == nc.scope && mc.target == nc.target &&
                       mc.element_id == nc.element_id && mc.ctg == nc.ctg;
        CHECK(present);
    }
    for (const auto& nc : b.constraints)
        if (nc.critical && !nc.saturated) CHECK(nc.loading >= 1.0 - 1e-9);
}

TEST_CASE("islanding contingencies are reported, not fatal") {
    Case c = test::make_case2();
    auto ac = acpf::solve_ac_power_flow(c);
    Config cfg;
    acpf::Contingency island{acpf::Contingency::Kind::Branch, 1};
    RtcaReport rep = run_rtca(c, ac, {island}, cfg);
    REQUIRE(rep.contingencies.size() == 1);
    CHECK(rep.contingencies[0].status == ContingencyResult::Status::Islanding);
}

TEST_CASE("report is deterministic") {
    Case c = parallel_pair_case();
    auto ac = acpf::solve_ac_power_flow(c);
    Config cfg;
    auto ctgs = acpf::default_contingencies(c);
    std::string r1 = report::render_rtca(c, run_rtca(c, ac, ctgs, cfg));
    std::string r2 = report::render_rtca(c, run_rtca(c, ac, ctgs, cfg));
    CHECK(r1 == r2);
    CHECK(r1.find("[violation]") != std::string::npos);
    CHECK(r1.find("[constraint]") != std::string::npos);
    CHECK(r1.find("[contingency]") != std::string::npos);
}

TEST_CASE("interface screening uses signed member sums") {
    Case c = parallel_pair_case();
    Interface f;
    f.id = 1;
    f.limit_base = 110;
    f.limit_ctg = 115;
    f.members = {{1, 1}, {2, 1}};
    c.interfaces = {f};
    c.finalize();
    auto ac = acpf::solve_ac_power_flow(c);
    Config cfg;
    RtcaReport rep = run_rtca(c, ac, {}, cfg);
    bool found = false;
    for (const auto& nc : rep.constraints)
        if (nc.target == NetworkConstraint::Target::Interface) {
            found = true;
            CHECK(nc.initial_mw > 110.0);  // both lines flow toward the load
            CHECK(nc.critical);
            CHECK(nc.loading >= 1.0);
        }
    CHECK(found);
}

TEST_CASE("derating scales reported limits") {
    Case c = parallel_pair_case();
    auto ac = acpf::solve_ac_power_flow(c);
    Config cfg;
    Config derated = cfg;
    derated.limit_derate = 0.95;
    auto ctgs = acpf::default_contingencies(c);
    RtcaReport a = run_rtca(c, ac, ctgs, cfg);
    RtcaReport b = run_rtca(c, ac, ctgs, derated);
    REQUIRE(!a.constraints.empty());
    REQUIRE(a.constraints.size() <= b.constraints.size());
    for (const auto& nb : b.constraints)
        for (const auto& na : a.constraints)
            if (na.scope == nb.scope && na.ctg == nb.ctg && na.element_id == nb.element_id &&
                na.target == nb.target)
                CHECK(nb.mw_limit == doctest::Approx(0.95 * na.mw_limit));
}
