#include "doctest.h"

#include <cmath>

#include "ems/acpf.hpp"
#include "ems/netmodel.hpp"
#include "support.hpp"

using namespace ems;

static const char* kMinimalCase = R"(
[meta]
base_mva 100
name mini
[bus]
1 230 1
2 230 0
[branch]
# id from to x alpha rate_a rate_c in_service r b
1 1 2 0.1 0 100 120 1
[gen]
1 1 0 150 100 20 10 0 1
[gencost]
1 block 0 10 1 150 10
[load]
1 2 100 100 positive
)";

TEST_CASE("parse minimal two-bus case") {
    Case c = parse_case(kMinimalCase);
    CHECK(c.buses.size() == 2);
    CHECK(c.branches.size() == 1);
    CHECK(c.gens.size() == 1);
    CHECK(c.loads.size() == 1);
    CHECK(c.base_mva == 100.0);
    CHECK(c.name == "mini");
    CHECK(c.branches[0].r == 0.0);  // optional columns default
    CHECK(c.gens[0].v_set == 1.0);
}

TEST_CASE("parse errors carry line numbers") {
    SUBCASE("unknown bus") {
        std::string doc = kMinimalCase;
        auto pos = doc.find("1 1 2 0.1");
        doc.replace(pos, 9, "1 1 99 0.1");
        CHECK_THROWS_WITH_AS(parse_case(doc), doctest::Contains("unknown bus"), Error);
        try {
            parse_case(doc);
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("line") != std::string::npos);
        }
    }
    SUBCASE("duplicate bus id") {
        std::string doc = kMinimalCase;
        doc.replace(doc.find("2 230 0"), 7, "1 230 0");
        CHECK_THROWS_WITH_AS(parse_case(doc), doctest::Contains("duplicate bus id"), Error);
    }
    SUBCASE("non-positive reactance") {
        std::string doc = kMinimalCase;
        doc.replace(doc.find("1 1 2 0.1"), 9, "1 1 2 0.0");
        CHECK_THROWS_WITH_AS(parse_case(doc), doctest::Contains("non-positive reactance"),
                             Error);
    }
    SUBCASE("malformed section") {
        CHECK_THROWS_AS(parse_case("[bus\n1 230 1\n"), Error);
        CHECK_THROWS_AS(parse_case("[nonsense]\n1 2 3\n"), Error);
    }
}

TEST_CASE("14-bus fixture loads with expected element counts") {
    Case c = test::load_fixture("case14.grid");
    CHECK(c.buses.size() == 14);
    CHECK(c.branches.size() == 20);
    CHECK(c.gens.size() == 5);
    CHECK(c.n_islands == 1);
}

TEST_CASE("serialize/parse round trip is byte-identical") {
    for (const char* name : {"case2.grid", "triangle.grid", "case14.grid", "overload.grid",
                             "ctsdemo.grid"}) {
        Case c = test::load_fixture(name);
        std::string s1 = serialize_case(c);
        Case c2 = parse_case(s1);
        std::string s2 = serialize_case(c2);
        CHECK(s1 == s2);
    }
}

TEST_CASE("losses convert to paired virtual loads") {
    Case c = test::make_triangle();
    acpf::AcSolution ac;
    ac.converged = true;
    ac.branch.resize(3);
    SUBCASE("four-mw loss splits evenly") {
        ac.branch[0].loss_mw = 4.0;
        Case out = losses_to_virtual_loads(c, ac);
        REQUIRE(out.loads.size() == 4);  // 2 original + 2 virtual
        const Load& va = out.loads[2];
        const Load& vb = out.loads[3];
        CHECK(va.kind == LoadKind::Virtual);
        CHECK(va.p == 2.0);
        CHECK(va.p0 == 2.0);
        CHECK(vb.p == 2.0);
        CHECK(((va.bus == 1 && vb.bus == 2) || (va.bus == 2 && vb.bus == 1)));
    }
    SUBCASE("lossless branches add nothing") {
        Case out = losses_to_virtual_loads(c, ac);
        CHECK(out.loads.size() == 2);
    }
    SUBCASE("mixed losses sum exactly") {
        ac.branch[0].loss_mw = 4.0;
        ac.branch[1].loss_mw = 2.0;
        Case out = losses_to_virtual_loads(c, ac);
        int n_virtual = 0;
        double total = 0;
        for (const auto& d : out.loads)
            if (d.kind == LoadKind::Virtual) {
                ++n_virtual;
                total += d.p;
            }
        CHECK(n_virtual == 4);
        CHECK(total == doctest::Approx(6.0).epsilon(1e-12));
    }
    SUBCASE("unsolved solution rejected") {
        ac.converged = false;
        CHECK_THROWS_AS(losses_to_virtual_loads(c, ac), Error);
    }
}

TEST_CASE("virtual load total matches AC losses on the 14-bus fixture") {
    Case c = test::load_fixture("case14.grid");
    acpf::AcSolution ac = acpf::solve_ac_power_flow(c);
    REQUIRE(ac.converged);
    Case out = losses_to_virtual_loads(c, ac);
    double vtotal = 0;
    for (const auto& d : out.loads)
        if (d.kind == LoadKind::Virtual) vtotal += d.p;
    CHECK(vtotal == doctest::Approx(ac.total_loss_mw()).epsilon(0).scale(1).epsilon(1e-12));
    CHECK(std::abs(vtotal - ac.total_loss_mw()) < 1e-9);
}

static Generator slope_gen() {
    Generator g;
    g.id = 7;
    g.bus = 1;
    g.p_min = 0;
    g.p_max = 100;
    g.p0 = 50;
    g.dispatchable = true;
    g.curve_kind = CurveKind::Slope;
    g.econ_min = 50;
    g.no_load_price = 10;
    g.slope_pts = {{100, 20}};
    return g;
}

TEST_CASE("slope linearization reproduces the worked sub-segment prices") {
    Generator g = slope_gen();
    Generator lin = linearize_slope_curve(g, 2.0);
    CHECK(lin.curve_kind == CurveKind::Block);
    REQUIRE(lin.blocks.size() == 5);
    for (size_t i = 0; i < 5; ++i) {
        CHECK(lin.blocks[i].breadth == doctest::Approx(10.0));
        CHECK(lin.blocks[i].price == doctest::Approx(11.0 + 2.0 * (double)i));
    }
    CHECK(lin.econ_min == 50);
    CHECK(lin.no_load_price == 10);
}

TEST_CASE("flat slope segment degenerates to one block") {
    Generator g = slope_gen();
    g.slope_pts = {{100, 10}};  // flat at the no-load price
    Generator lin = linearize_slope_curve(g, 2.0);
    REQUIRE(lin.blocks.size() == 1);
    CHECK(lin.blocks[0].breadth == doctest::Approx(50.0));
    CHECK(lin.blocks[0].price == doctest::Approx(10.0));
}

TEST_CASE("non-convex slope offers are rejected") {
    Generator g = slope_gen();
    g.slope_pts = {{80, 20}, {100, 15}};
    CHECK_THROWS_WITH_AS(linearize_slope_curve(g, 2.0), doctest::Contains("non-convex"), Error);
    // and at validation time through a case
    Case c = test::make_case2();
    c.gens[0] = g;
    c.gens[0].bus = 1;
    CHECK_THROWS_AS(c.finalize(), Error);
}

TEST_CASE("linearized curves stay convex and within the error bound") {
    Generator g = slope_gen();
    g.slope_pts = {{70, 14}, {100, 26}};
    for (double dc : {0.5, 1.0, 2.0, 4.0}) {
        Generator lin = linearize_slope_curve(g, dc);
        double prev = lin.no_load_price;
        for (const auto& b : lin.blocks) {
            CHECK(b.price >= prev - 1e-12);
            prev = b.price;
        }
        // per-segment bound: |cost_lin - cost_exact| <= dC_seg * ds / 2
        test::Lcg rng(42);
        double bound = 0;
        {
            double a = lin.econ_min;
            double ca = g.no_load_price;
            for (const auto& pt : g.slope_pts) {
                long nss = std::max(1L, std::lround((pt.price - ca) / dc));
                bound += (pt.price - ca) * ((pt.mw - a) / (double)nss) / 2.0;
                a = pt.mw;
                ca = pt.price;
            }
        }
        for (int t = 0; t < 50; ++t) {
            double p = rng.uniform(0, 100);
            double err = std::abs(lin.energy_cost(p) - g.energy_cost(p));
            CHECK(err <= bound + 1e-9);
        }
    }
}

TEST_CASE("block curve breadth mismatch is rejected") {
    Case c = test::make_case2();
    c.gens[0].blocks = {{120, 10}};  // should span 150
    CHECK_THROWS_WITH_AS(c.finalize(), doctest::Contains("breadths"), Error);
}

TEST_CASE("interface validation") {
    Case c = test::make_triangle();
    Interface f;
    f.id = 1;
    f.limit_base = 100;
    f.limit_ctg = 110;
    f.members = {{1, 1}, {3, -1}};
    c.interfaces = {f};
    c.finalize();
    CHECK(c.interfaces[0].limit_for("branch:2") == 110.0);
    c.interfaces[0].ctg_limits["branch:2"] = 90;
    CHECK(c.interfaces[0].limit_for("branch:2") == 90.0);
    c.interfaces[0].members.push_back({1, 1});
    CHECK_THROWS_WITH_AS(c.finalize(), doctest::Contains("duplicate member"), Error);
}
