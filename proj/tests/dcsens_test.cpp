#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "ems/dcsens.hpp"
#include "support.hpp"

using namespace ems;
using namespace ems::dc;

static std::vector<double> net_injections(const Case& c) {
    std::vector<double> inj(c.buses.size(), 0.0);
    for (const auto& g : c.gens) inj[c.bus_index(g.bus)] += g.p0;
    for (const auto& d : c.loads) inj[c.bus_index(d.bus)] -= d.p;
    return inj;
}

TEST_CASE("two-bus reduced matrix is the p.u. susceptance") {
    Case c = test::make_case2();
    DcModel m = build_dc_model(c);
    REQUIRE(m.b_reduced.rows() == 1);
    CHECK(m.b_reduced(0, 0) == doctest::Approx(10.0));
    CHECK(m.ref == 0);
}

TEST_CASE("triangle reduced matrix is positive definite") {
    Case c = test::make_triangle();
    DcModel m = build_dc_model(c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.b_reduced);
    for (int i = 0; i < es.eigenvalues().size(); ++i) CHECK(es.eigenvalues()(i) > 0);
}

TEST_CASE("disconnected network is rejected with island listing") {
    Case c = test::make_triangle();
    c.buses.push_back({4, 138, true});
    Generator g = c.gens[0];
    g.id = 9;
    g.bus = 4;
    g.p0 = 0;
    c.gens.push_back(g);
    c.finalize();
    CHECK_THROWS_WITH_AS(build_dc_model(c), doctest::Contains("islands"), Error);
}

TEST_CASE("dc_flow basics") {
    Case c = test::make_case2();
    DcModel m = build_dc_model(c);
    SUBCASE("zero injections give zero flows") {
        auto f = dc_flow(m, {0, 0});
        CHECK(f[0] == doctest::Approx(0.0));
    }
    SUBCASE("a 100 MW transfer flows fully") {
        auto f = dc_flow(m, {100, -100});
        CHECK(f[0] == doctest::Approx(100.0));
    }
}

TEST_CASE("phase shift alone circulates flow in a loop") {
    Case c = test::make_triangle();
    c.branches[0].alpha = 0.02;
    c.finalize();
    DcModel m = build_dc_model(c);
    auto f = dc_flow(m, {0, 0, 0});
    // circulating flow around the loop: alpha over the loop reactance
    double expect = 0.02 / (3 * 0.1) * 100.0;
    CHECK(f[0] == doctest::Approx(expect));
    CHECK(f[1] == doctest::Approx(expect));   // 1->2->3 continues the loop
    CHECK(f[2] == doctest::Approx(-expect));  // 1->3 carries it back
    // loop voltage law: angle drops around the loop cancel
    double loop = (f[0] / 100 * 0.1 - 0.02) + f[1] / 100 * 0.1 - f[2] / 100 * 0.1;
    CHECK(loop == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("ptdf worked values") {
    SUBCASE("single line transfer") {
        Case c = test::make_case2();
        PtdfMatrix p = compute_ptdf(build_dc_model(c));
        CHECK(p.m(1, 0) == doctest::Approx(-1.0));  // inject at bus 2, flow 1->2 drops
        CHECK(p.m(0, 0) == doctest::Approx(0.0));   // reference row is zero
    }
    SUBCASE("triangle with reference at bus 2") {
        Case c = test::make_triangle(2);
        PtdfMatrix p = compute_ptdf(build_dc_model(c));
        // inject at bus 1, withdraw at the bus-2 reference: the direct 1-2
        // line carries two thirds
        CHECK(p.m(0, 0) == doctest::Approx(2.0 / 3.0));
        CHECK(p.m(0, 2) == doctest::Approx(1.0 / 3.0));
        for (int k = 0; k < 3; ++k) CHECK(p.m(1, k) == doctest::Approx(0.0));
    }
}

TEST_CASE("ptdf predictions match dc_flow for random injections") {
    for (int ref : {1, 3}) {
        Case c = test::make_triangle(ref);
        DcModel m = build_dc_model(c);
        PtdfMatrix p = compute_ptdf(m);
        test::Lcg rng(99);
        for (int t = 0; t < 100; ++t) {
            std::vector<double> inj(3);
            inj[0] = rng.uniform(-120, 120);
            inj[1] = rng.uniform(-120, 120);
            inj[2] = -(inj[0] + inj[1]);
            auto truth = dc_flow(m, inj);
            for (int k = 0; k < 3; ++k) {
                double pred = 0;
                for (int n = 0; n < 3; ++n) pred += p.m(n, k) * inj[n];
                CHECK(std::abs(pred - truth[k]) < 1e-8);
            }
        }
    }
}

TEST_CASE("reference choice shifts ptdf rows but not flow predictions") {
    Case a = test::make_triangle(1);
    Case b = test::make_triangle(2);
    PtdfMatrix pa = compute_ptdf(build_dc_model(a));
    PtdfMatrix pb = compute_ptdf(build_dc_model(b));
    // rows differ by a per-branch constant; balanced injections predict alike
    test::Lcg rng(5);
    for (int t = 0; t < 20; ++t) {
        double i0 = rng.uniform(-50, 50), i1 = rng.uniform(-50, 50);
        std::vector<double> inj{i0, i1, -(i0 + i1)};
        for (int k = 0; k < 3; ++k) {
            double fa = 0, fb = 0;
            for (int n = 0; n < 3; ++n) {
                fa += pa.m(n, k) * inj[n];
                fb += pb.m(n, k) * inj[n];
            }
            CHECK(fa == doctest::Approx(fb).epsilon(1e-10));
        }
    }
}

TEST_CASE("lodf on a triangle reroutes the outaged flow fully") {
    Case c = test::make_triangle();
    DcModel m = build_dc_model(c);
    PtdfMatrix p = compute_ptdf(m);
    LodfColumn l = compute_lodf(m, p, 0);  // outage line 1-2
    CHECK(l.col(0) == doctest::Approx(-1.0));
    CHECK(std::abs(l.col(1)) == doctest::Approx(1.0));
    CHECK(std::abs(l.col(2)) == doctest::Approx(1.0));
}

TEST_CASE("lodf predictions match the re-solved outage flows") {
    Case c = test::make_triangle();
    DcModel m = build_dc_model(c);
    PtdfMatrix p = compute_ptdf(m);
    auto inj = net_injections(c);
    auto base = dc_flow(m, inj);
    for (int outage = 0; outage < 3; ++outage) {
        LodfColumn l = compute_lodf(m, p, outage);
        Case out = c;
        out.branches[outage].in_service = false;
        out.finalize();
        auto truth = dc_flow(build_dc_model(out), inj);
        for (int k = 0; k < 3; ++k) {
            if (k == outage) continue;
            double pred = base[k] + l.col(k) * base[outage];
            CHECK(std::abs(pred - truth[k]) < 1e-8);
        }
    }
}

TEST_CASE("islanding outage refuses factors") {
    Case c = test::make_case2();
    DcModel m = build_dc_model(c);
    PtdfMatrix p = compute_ptdf(m);
    CHECK_THROWS_AS(compute_lodf(m, p, 0), IslandingError);
}

TEST_CASE("otdf composition and brute-force cross-check") {
    Case c = test::make_triangle();
    DcModel m = build_dc_model(c);
    SensitivitySet s = build_sensitivities(m, {0});
    SUBCASE("composition identity holds entry-wise") {
        Eigen::MatrixXd o = compute_otdf(s.ptdf, s.lodf_for(0));
        for (int n = 0; n < 3; ++n)
            for (int k = 1; k < 3; ++k) {
                double manual = s.ptdf.m(n, k) + s.lodf_for(0).col(k) * s.ptdf.m(n, 0);
                CHECK(std::abs(o(n, k) - manual) < 1e-12);
                CHECK(std::abs(s.otdf(n, k, 0) - manual) < 1e-12);
            }
    }
    SUBCASE("equals the ptdf of the outaged topology") {
        Case out = c;
        out.branches[0].in_service = false;
        out.finalize();
        PtdfMatrix po = compute_ptdf(build_dc_model(out));
        for (int n = 0; n < 3; ++n)
            for (int k = 1; k < 3; ++k)
                CHECK(s.otdf(n, k, 0) == doctest::Approx(po.m(n, k)).epsilon(1e-10));
    }
    SUBCASE("reference bus rows vanish") {
        for (int k = 1; k < 3; ++k) CHECK(s.otdf(0, k, 0) == doctest::Approx(0.0));
    }
    SUBCASE("mismatched stamps are rejected") {
        Case c2 = test::make_triangle();
        DcModel m2 = build_dc_model(c2);
        PtdfMatrix p2 = compute_ptdf(m2);
        CHECK_THROWS_WITH_AS(compute_otdf(p2, s.lodf_for(0)), doctest::Contains("stamp"), Error);
    }
}

TEST_CASE("14-bus dc flows are mutually consistent") {
    Case c = test::load_fixture("case14.grid");
    DcModel m = build_dc_model(c);
    auto inj = net_injections(c);
    auto flows = dc_flow(m, inj);
    PtdfMatrix p = compute_ptdf(m);
    for (size_t k = 0; k < flows.size(); ++k) {
        double pred = 0;
        for (size_t n = 0; n < c.buses.size(); ++n) pred += p.m((int)n, (int)k) * inj[n];
        CHECK(std::abs(pred - flows[k]) < 1e-10 * (1 + std::abs(flows[k])));
    }
    // nodal balance of the dc flows
    std::vector<double> bal = inj;
    for (size_t k = 0; k < flows.size(); ++k) {
        bal[c.bus_index(c.branches[k].from_bus)] -= flows[k];
        bal[c.bus_index(c.branches[k].to_bus)] += flows[k];
    }
    double slack_resid = 0;
    for (size_t n = 0; n < bal.size(); ++n)
        if ((int)n != m.ref)
            CHECK(std::abs(bal[n]) < 1e-9);
        else
            slack_resid = bal[n];
    // reference absorbs only the injection imbalance
    double total = 0;
    for (double v : inj) total += v;
    CHECK(slack_resid == doctest::Approx(total).epsilon(1e-9).scale(1));
}

TEST_CASE("factor dump renders both sections") {
    Case c = test::make_triangle();
    DcModel m = build_dc_model(c);
    SensitivitySet s = build_sensitivities(m, {0, 1});
    std::string dump = write_sensitivities(c, s);
    CHECK(dump.find("[ptdf]") != std::string::npos);
    CHECK(dump.find("[lodf]") != std::string::npos);
}
