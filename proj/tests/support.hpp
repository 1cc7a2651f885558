#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ems/lpcore.hpp"
#include "ems/netmodel.hpp"

namespace test {

inline std::string fixture_path(const std::string& name) {
    return std::string(EMS_FIXTURE_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline ems::Case load_fixture(const std::string& name) {
    return ems::parse_case(slurp(fixture_path(name)));
}

// Two-bus teaching system: cheap unit at bus 1 (reference), expensive unit and
// the load at bus 2, one line.
inline ems::Case make_case2(double load = 120.0, double line_x = 0.1, double line_r = 0.0) {
    ems::Case c;
    c.name = "case2";
    c.base_mva = 100.0;
    c.buses = {{1, 230.0, true}, {2, 230.0, false}};
    ems::Branch br;
    br.id = 1;
    br.from_bus = 1;
    br.to_bus = 2;
    br.x = line_x;
    br.r = line_r;
    br.rate_a = 100.0;
    br.rate_c = 120.0;
    c.branches = {br};
    ems::Generator g1;
    g1.id = 1;
    g1.bus = 1;
    g1.p_min = 0;
    g1.p_max = 150;
    g1.p0 = 100;
    g1.energy_ramp = 100;
    g1.spin_ramp = 20;
    g1.reserve_price = 0;
    g1.econ_min = 0;
    g1.no_load_price = 10;
    g1.blocks = {{150, 10}};
    ems::Generator g2 = g1;
    g2.id = 2;
    g2.bus = 2;
    g2.p_max = 100;
    g2.p0 = 20;
    g2.no_load_price = 30;
    g2.blocks = {{100, 30}};
    c.gens = {g1, g2};
    ems::Load d;
    d.id = 1;
    d.bus = 2;
    d.p = d.p0 = load;
    c.loads = {d};
    c.finalize();
    return c;
}

// Equal-reactance triangle; generation at bus 1, loads at buses 2 and 3.
inline ems::Case make_triangle(int ref_bus = 1, double x = 0.1) {
    ems::Case c;
    c.name = "triangle";
    c.base_mva = 100.0;
    for (int b = 1; b <= 3; ++b) c.buses.push_back({b, 138.0, b == ref_bus});
    auto mk = [&](int id, int f, int t) {
        ems::Branch br;
        br.id = id;
        br.from_bus = f;
        br.to_bus = t;
        br.x = x;
        br.rate_a = 200;
        br.rate_c = 220;
        return br;
    };
    c.branches = {mk(1, 1, 2), mk(2, 2, 3), mk(3, 1, 3)};
    ems::Generator g;
    g.id = 1;
    g.bus = 1;
    g.p_min = 0;
    g.p_max = 300;
    g.p0 = 100;
    g.energy_ramp = 100;
    g.spin_ramp = 30;
    g.econ_min = 0;
    g.no_load_price = 10;
    g.blocks = {{300, 10}};
    c.gens = {g};
    ems::Load d1;
    d1.id = 1;
    d1.bus = 2;
    d1.p = d1.p0 = 60;
    ems::Load d2;
    d2.id = 2;
    d2.bus = 3;
    d2.p = d2.p0 = 40;
    c.loads = {d1, d2};
    c.finalize();
    return c;
}

// Deterministic pseudo-random stream for property tests.
class Lcg {
public:
    explicit Lcg(uint64_t seed) : s_(seed) {}
    double uniform(double lo, double hi) {
        s_ = s_ * 6364136223846793005ULL + 1442695040888963407ULL;
        double u = (double)(s_ >> 11) / (double)(1ULL << 53);
        return lo + (hi - lo) * u;
    }

private:
    uint64_t s_;
};

// Brute-force vertex enumeration for small LPs (n <= 4 structural variables).
// Intersects every combination of n tight hyperplanes drawn from constraint
// boundaries and finite variable bounds, keeps the feasible ones, and returns
// the best objective. Independent of the simplex implementation.
inline double vertex_enumeration_min(const ems::lp::LinearProgram& lp, bool* found = nullptr) {
    using namespace ems::lp;
    int n = (int)lp.vars.size();
    REQUIRE(n <= 4);
    struct Plane {
        std::vector<double> a;
        double b;
    };
    std::vector<Plane> planes;
    for (const auto& con : lp.cons) {
        Plane p{std::vector<double>(n, 0.0), con.rhs};
        for (auto [j, a] : con.coeffs) p.a[j] += a;
        planes.push_back(p);
        if (con.rel == Rel::Eq) continue;
    }
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(lp.vars[j].lb)) {
            Plane p{std::vector<double>(n, 0.0), lp.vars[j].lb};
            p.a[j] = 1;
            planes.push_back(p);
        }
        if (std::isfinite(lp.vars[j].ub)) {
            Plane p{std::vector<double>(n, 0.0), lp.vars[j].ub};
            p.a[j] = 1;
            planes.push_back(p);
        }
    }
    int m = (int)planes.size();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(n, 0);
    // iterate combinations of n planes
    std::vector<int> comb(n);
    for (int i = 0; i < n; ++i) comb[i] = i;
    auto feasible = [&](const Eigen::VectorXd& x) {
        for (int j = 0; j < n; ++j)
            if (x(j) < lp.vars[j].lb - 1e-7 || x(j) > lp.vars[j].ub + 1e-7) return false;
        for (const auto& con : lp.cons) {
            double ax = 0;
            for (auto [j, a] : con.coeffs) ax += a * x(j);
            if (con.rel == Rel::LessEq && ax > con.rhs + 1e-7) return false;
            if (con.rel == Rel::GreaterEq && ax < con.rhs - 1e-7) return false;
            if (con.rel == Rel::Eq && std::abs(ax - con.rhs) > 1e-7) return false;
        }
        return true;
    };
    bool any = false;
    while (true) {
        Eigen::MatrixXd A(n, n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) A(i, j) = planes[comb[i]].a[j];
            b(i) = planes[comb[i]].b;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.isInvertible()) {
            Eigen::VectorXd x = lu.solve(b);
            if (feasible(x)) {
                double obj = lp.obj_constant;
                for (int j = 0; j < n; ++j) obj += lp.obj[j] * x(j);
                best = std::min(best, obj);
                any = true;
            }
        }
        // next combination
        int i = n - 1;
        while (i >= 0 && comb[i] == m - n + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int k = i + 1; k < n; ++k) comb[k] = comb[k - 1] + 1;
    }
    if (found) *found = any;
    (void)idx;
    return best;
}

}  // namespace test
