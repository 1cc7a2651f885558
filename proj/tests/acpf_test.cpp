#include "doctest.h"

#include <cmath>
#include <complex>

#include "ems/acpf.hpp"
#include "support.hpp"

using namespace ems;
using namespace ems::acpf;

// Direct nodal complex-power balance recomputation from the solved flows;
// independent of the solver's internal mismatch bookkeeping.
static double max_power_residual(const Case& c, const AcSolution& sol) {
    size_t nb = c.buses.size();
    std::vector<std::complex<double>> inj(nb, 0.0);
    for (size_t k = 0; k < c.branches.size(); ++k) {
        if (!c.branches[k].in_service) continue;
        const auto& f = sol.branch[k];
        inj[c.bus_index(c.branches[k].from_bus)] += std::complex<double>(f.p_from, f.q_from);
        inj[c.bus_index(c.branches[k].to_bus)] += std::complex<double>(f.p_to, f.q_to);
    }
    double worst = 0;
    for (size_t n = 0; n < nb; ++n) {
        std::complex<double> s = -inj[n];
        for (int gi : c.gens_at_bus[n]) s += std::complex<double>(sol.gen_p[gi], sol.gen_q[gi]);
        for (int di : c.loads_at_bus[n]) s -= std::complex<double>(c.loads[di].p, c.loads[di].q);
        worst = std::max(worst, std::abs(s) / c.base_mva);
    }
    return worst;
}

TEST_CASE("two-bus lossless line delivers the scheduled load") {
    Case c = test::make_case2(100.0, 0.1, 0.0);
    c.loads[0].q = 0;
    c.gens[0].p0 = 100;
    c.gens[1].p0 = 0;
    c.gens[1].p_max = 0;  // hold the receiving unit at zero
    c.gens[1].blocks = {{0, 30}};
    c.finalize();
    AcSolution sol = solve_ac_power_flow(c);
    REQUIRE(sol.converged);
    CHECK(sol.branch[0].p_from == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(sol.branch[0].p_to == doctest::Approx(-100.0).epsilon(1e-6));
    CHECK(sol.branch[0].loss_mw == 0.0);
    // small-angle separation: p = sin(dth)/x on the lossless line
    double dth = sol.v_ang[0] - sol.v_ang[1];
    CHECK(std::sin(dth) / 0.1 * 100.0 == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("zero-load case solves flat") {
    Case c = test::make_case2(0.0);
    c.loads[0].q = 0;
    c.gens[0].p0 = 0;
    c.gens[1].p0 = 0;
    c.finalize();
    AcSolution sol = solve_ac_power_flow(c);
    REQUIRE(sol.converged);
    CHECK(sol.iterations <= 2);
    for (double v : sol.v_mag) CHECK(v == doctest::Approx(1.0));
    CHECK(sol.branch[0].s_from == doctest::Approx(0.0).scale(1).epsilon(1e-9));
}

TEST_CASE("14-bus fixture converges tightly and balances") {
    Case c = test::load_fixture("case14.grid");
    AcSolution sol = solve_ac_power_flow(c);
    REQUIRE(sol.converged);
    CHECK(sol.iterations <= 10);
    CHECK(sol.max_mismatch < 1e-8);
    CHECK(max_power_residual(c, sol) < 1e-8);
    double gen = sol.total_gen_mw(), load = c.total_load_p(), loss = sol.total_loss_mw();
    CHECK(std::abs(gen - load - loss) < 1e-6);
}

TEST_CASE("warm start reuses the previous solution") {
    Case c = test::load_fixture("case14.grid");
    AcSolution cold = solve_ac_power_flow(c);
    REQUIRE(cold.converged);
    SolveOptions opt;
    opt.warm_start = &cold;
    AcSolution warm = solve_ac_power_flow(c, opt);
    REQUIRE(warm.converged);
    CHECK(warm.iterations <= cold.iterations);
}

TEST_CASE("branch outage keeps injections, removes the element") {
    Case c = test::make_triangle();
    Case out = apply_outage(c, {Contingency::Kind::Branch, 2});
    CHECK_FALSE(out.branches[1].in_service);
    CHECK(out.gens[0].p0 == c.gens[0].p0);
    CHECK(out.loads[0].p == c.loads[0].p);
    // input untouched
    CHECK(c.branches[1].in_service);
    CHECK_THROWS_AS(apply_outage(out, {Contingency::Kind::Branch, 2}), Error);
}

TEST_CASE("generator outage splits over remaining headroom") {
    Case c = test::make_triangle();
    Generator g2 = c.gens[0];
    g2.id = 2;
    g2.bus = 2;
    g2.p_max = 100;
    g2.p0 = 50;
    g2.blocks = {{100, 12}};
    Generator g3 = g2;
    g3.id = 3;
    g3.bus = 3;
    g3.blocks = {{100, 14}};
    Generator lost = g2;
    lost.id = 4;
    lost.bus = 1;
    lost.p0 = 40;
    lost.p_max = 40;
    lost.no_load_price = 9;
    lost.blocks = {{40, 9}};
    c.gens[0].p0 = 0;
    c.gens[0].p_max = 0;
    c.gens[0].blocks = {{0, 10}};
    c.gens[0].dispatchable = false;
    c.gens.push_back(g2);
    c.gens.push_back(g3);
    c.gens.push_back(lost);
    c.finalize();
    Case out = apply_outage(c, {Contingency::Kind::Generator, 4});
    CHECK(out.gens.size() == 3);
    CHECK(out.gens[out.gen_index(2)].p0 == doctest::Approx(70.0));
    CHECK(out.gens[out.gen_index(3)].p0 == doctest::Approx(70.0));
}

TEST_CASE("radial cut is flagged as islanding") {
    Case c = test::make_case2();
    CHECK_THROWS_AS(apply_outage(c, {Contingency::Kind::Branch, 1}), IslandingError);
}

TEST_CASE("default contingency list excludes islanding branches") {
    Case c = test::make_case2();
    auto list = default_contingencies(c);
    REQUIRE(list.size() == 2);  // the single line islands; two gen outages remain
    CHECK(list[0].kind == Contingency::Kind::Generator);

    Case t = test::make_triangle();
    auto list3 = default_contingencies(t);
    CHECK(list3.size() == 3 + 1);
}

TEST_CASE("island without a source is rejected") {
    Case c = test::make_triangle();
    c.buses.push_back({4, 138, true});
    c.buses.push_back({5, 138, false});
    Branch br;
    br.id = 9;
    br.from_bus = 4;
    br.to_bus = 5;
    br.x = 0.1;
    br.rate_a = br.rate_c = 100;
    c.branches.push_back(br);
    Load d;
    d.id = 9;
    d.bus = 5;
    d.p = d.p0 = 10;
    c.loads.push_back(d);
    c.finalize();
    CHECK(c.n_islands == 2);
    CHECK_THROWS_WITH_AS(solve_ac_power_flow(c), doctest::Contains("no generation source"),
                         Error);
}

TEST_CASE("phase shifter circulates loop flow per its angle") {
    Case c = test::make_triangle();
    c.loads.clear();
    c.gens[0].p0 = 0;
    c.branches[0].alpha = 0.05;
    c.finalize();
    AcSolution sol = solve_ac_power_flow(c);
    REQUIRE(sol.converged);
    CHECK(sol.branch[0].p_from > 1.0);
}
