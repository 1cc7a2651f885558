#include "ems/lpcore.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ems/common.hpp"

namespace ems::lp {

int LinearProgram::add_variable(const std::string& name, double lb, double ub, double cost) {
    if (lb > ub) throw Error(strfmt("variable %s: lower bound above upper bound", name.c_str()));
    vars.push_back({name, lb, ub});
    obj.push_back(cost);
    return (int)vars.size() - 1;
}

int LinearProgram::add_constraint(const std::string& name,
                                  std::vector<std::pair<int, double>> coeffs, Rel rel,
                                  double rhs) {
    for (auto& [j, a] : coeffs)
        if (j < 0 || j >= (int)vars.size())
            throw Error(strfmt("constraint %s references unknown variable %d", name.c_str(), j));
    cons.push_back({name, std::move(coeffs), rel, rhs});
    return (int)cons.size() - 1;
}

void LinearProgram::set_cost(int var, double cost) {
    obj.at(var) = cost;
}

namespace {

enum VarState : char { kBasic, kAtLower, kAtUpper, kFreeZero };

// Computational form: [structural | slack | artificial] columns, Ax = b.
struct Tableau {
    int m = 0, n_struct = 0, n_total = 0;
    std::vector<std::vector<std::pair<int, double>>> cols;
    std::vector<double> lb, ub, cost1, cost2;
    std::vector<double> b;
};

class Simplex {
public:
    Simplex(const LinearProgram& lp, const SolverOptions& opt) : lp_(lp), opt_(opt) { build(); }

    LpSolution run();

private:
    void build();
    void refactor();
    void compute_xb();
    double nonbasic_value(int j) const {
        return state_[j] == kAtLower ? t_.lb[j] : state_[j] == kAtUpper ? t_.ub[j] : 0.0;
    }
    // One simplex phase; returns true when optimal for `cost`, false on
    // unbounded direction or iteration cap (status_ is set).
    bool iterate(const std::vector<double>& cost);
    double col_dot(int j, const Eigen::VectorXd& y) const {
        double s = 0;
        for (const auto& [i, a] : t_.cols[j]) s += a * y(i);
        return s;
    }

    const LinearProgram& lp_;
    SolverOptions opt_;
    Tableau t_;
    std::vector<int> basis_;      // row -> column
    std::vector<char> state_;     // per column
    Eigen::MatrixXd binv_;
    Eigen::VectorXd xb_;
    int iters_ = 0, pivots_since_refactor_ = 0;
    LpStatus status_ = LpStatus::IterLimit;
    std::string diag_;
};

void Simplex::build() {
    t_.m = (int)lp_.cons.size();
    t_.n_struct = (int)lp_.vars.size();
    t_.n_total = t_.n_struct + 2 * t_.m;
    t_.cols.resize(t_.n_total);
    t_.lb.assign(t_.n_total, 0.0);
    t_.ub.assign(t_.n_total, 0.0);
    t_.cost1.assign(t_.n_total, 0.0);
    t_.cost2.assign(t_.n_total, 0.0);
    t_.b.assign(t_.m, 0.0);

    for (int j = 0; j < t_.n_struct; ++j) {
        t_.lb[j] = lp_.vars[j].lb;
        t_.ub[j] = lp_.vars[j].ub;
        t_.cost2[j] = lp_.obj[j];
    }
    for (int i = 0; i < t_.m; ++i) {
        const auto& row = lp_.cons[i];
        t_.b[i] = row.rhs;
        for (const auto& [j, a] : row.coeffs)
            if (a != 0.0) t_.cols[j].push_back({i, a});
        int s = t_.n_struct + i;
        t_.cols[s] = {{i, 1.0}};
        switch (row.rel) {
            case Rel::LessEq: t_.lb[s] = 0, t_.ub[s] = kInf; break;
            case Rel::Eq: t_.lb[s] = 0, t_.ub[s] = 0; break;
            case Rel::GreaterEq: t_.lb[s] = -kInf, t_.ub[s] = 0; break;
        }
    }

    state_.assign(t_.n_total, kAtLower);
    for (int j = 0; j < t_.n_struct; ++j) {
        if (std::isfinite(t_.lb[j]))
            state_[j] = kAtLower;
        else if (std::isfinite(t_.ub[j]))
            state_[j] = kAtUpper;
        else
            state_[j] = kFreeZero;
    }
    for (int i = 0; i < t_.m; ++i) {
        int s = t_.n_struct + i;
        state_[s] = lp_.cons[i].rel == Rel::GreaterEq ? kAtUpper : kAtLower;
    }

    // Artificial basis: one identity column per row, signed to keep the
    // artificial within [0,inf) or (-inf,0], with phase-1 cost +-1.
    basis_.resize(t_.m);
    std::vector<double> resid(t_.m, 0.0);
    for (int i = 0; i < t_.m; ++i) resid[i] = t_.b[i];
    for (int j = 0; j < t_.n_struct + t_.m; ++j) {
        double v = nonbasic_value(j);
        if (v == 0.0) continue;
        for (const auto& [i, a] : t_.cols[j]) resid[i] -= a * v;
    }
    for (int i = 0; i < t_.m; ++i) {
        int z = t_.n_struct + t_.m + i;
        t_.cols[z] = {{i, 1.0}};
        if (resid[i] >= 0) {
            t_.lb[z] = 0, t_.ub[z] = kInf;
            t_.cost1[z] = 1.0;
        } else {
            t_.lb[z] = -kInf, t_.ub[z] = 0;
            t_.cost1[z] = -1.0;
        }
        basis_[i] = z;
        state_[z] = kBasic;
    }
    binv_ = Eigen::MatrixXd::Identity(t_.m, t_.m);
    compute_xb();
}

void Simplex::compute_xb() {
    Eigen::VectorXd rhs(t_.m);
    for (int i = 0; i < t_.m; ++i) rhs(i) = t_.b[i];
    for (int j = 0; j < t_.n_total; ++j) {
        if (state_[j] == kBasic) continue;
        double v = nonbasic_value(j);
        if (v == 0.0) continue;
        for (const auto& [i, a] : t_.cols[j]) rhs(i) -= a * v;
    }
    xb_ = binv_ * rhs;
}

void Simplex::refactor() {
    Eigen::MatrixXd ab = Eigen::MatrixXd::Zero(t_.m, t_.m);
    for (int r = 0; r < t_.m; ++r)
        for (const auto& [i, a] : t_.cols[basis_[r]]) ab(i, r) = a;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ab);
    binv_ = lu.inverse();
    pivots_since_refactor_ = 0;
    compute_xb();
}

bool Simplex::iterate(const std::vector<double>& cost) {
    bool bland = false;
    int stall = 0;
    double last_obj = kInf;
    while (true) {
        if (iters_++ > opt_.max_iterations) {
            status_ = LpStatus::IterLimit;
            diag_ = "iteration limit reached";
            return false;
        }
        Eigen::VectorXd cb(t_.m);
        for (int r = 0; r < t_.m; ++r) cb(r) = cost[basis_[r]];
        Eigen::VectorXd y = binv_.transpose() * cb;

        // Pricing
        int enter = -1, dir = 0;
        double best = opt_.tol;
        for (int j = 0; j < t_.n_total; ++j) {
            if (state_[j] == kBasic || t_.lb[j] == t_.ub[j]) continue;
            double d = cost[j] - col_dot(j, y);
            int cand_dir = 0;
            if ((state_[j] == kAtLower || state_[j] == kFreeZero) && d < -opt_.tol)
                cand_dir = +1;
            else if ((state_[j] == kAtUpper || state_[j] == kFreeZero) && d > opt_.tol)
                cand_dir = -1;
            if (!cand_dir) continue;
            if (bland) {
                enter = j;
                dir = cand_dir;
                break;
            }
            if (std::abs(d) > best) {
                best = std::abs(d);
                enter = j;
                dir = cand_dir;
            }
        }
        if (enter < 0) {
            status_ = LpStatus::Optimal;
            return true;
        }

        Eigen::VectorXd w = Eigen::VectorXd::Zero(t_.m);
        {
            Eigen::VectorXd aj = Eigen::VectorXd::Zero(t_.m);
            for (const auto& [i, a] : t_.cols[enter]) aj(i) = a;
            w = binv_ * aj;
        }

        // Ratio test. Basic r moves by -dir*t*w_r; entering moves by dir*t.
        double span = t_.ub[enter] - t_.lb[enter];  // may be inf
        double t_best = span;
        int leave = -1;  // -1: bound flip
        double leave_piv = 0.0;
        for (int r = 0; r < t_.m; ++r) {
            double step = -dir * w(r);
            if (std::abs(step) < 1e-11) continue;
            int jb = basis_[r];
            double lim;
            if (step < 0)
                lim = std::isfinite(t_.lb[jb]) ? (xb_(r) - t_.lb[jb]) / -step : kInf;
            else
                lim = std::isfinite(t_.ub[jb]) ? (t_.ub[jb] - xb_(r)) / step : kInf;
            if (lim < -1e-9) lim = 0;  // slight infeasibility: leave immediately
            if (lim == kInf) continue;
            bool better;
            if (bland)
                better = lim < t_best - 1e-12 ||
                         (lim <= t_best + 1e-12 && (leave < 0 || jb < basis_[leave]));
            else
                better = lim < t_best - 1e-9 ||
                         (lim <= t_best + 1e-9 &&
                          (leave < 0 || std::abs(w(r)) > std::abs(leave_piv)));
            if (better) {
                t_best = std::min(lim, t_best);
                leave = r;
                leave_piv = w(r);
            }
        }
        if (!std::isfinite(t_best) && leave < 0) {
            status_ = LpStatus::Unbounded;
            diag_ = strfmt("unbounded in direction of %s",
                           enter < t_.n_struct ? lp_.vars[enter].name.c_str() : "slack");
            return false;
        }
        double t = std::max(0.0, t_best);

        xb_ -= dir * t * w;
        if (leave < 0) {
            // entering flips to its opposite bound
            state_[enter] = dir > 0 ? kAtUpper : kAtLower;
        } else {
            int jb = basis_[leave];
            double step = -dir * leave_piv;
            state_[jb] = step < 0 ? kAtLower : kAtUpper;
            if (!std::isfinite(step < 0 ? t_.lb[jb] : t_.ub[jb]))
                state_[jb] = kFreeZero;  // numerically should not happen
            double enter_val = nonbasic_value(enter) + dir * t;
            basis_[leave] = enter;
            state_[enter] = kBasic;
            // product-form update of binv_
            double piv = w(leave);
            if (std::abs(piv) < 1e-11) {
                refactor();
            } else {
                binv_.row(leave) /= piv;
                for (int r = 0; r < t_.m; ++r) {
                    if (r == leave) continue;
                    double f = w(r);
                    if (f != 0.0) binv_.row(r) -= f * binv_.row(leave);
                }
                xb_(leave) = enter_val;
            }
            if (++pivots_since_refactor_ >= opt_.refactor_every) refactor();
        }

        // Stall detection drives the switch to Bland pivoting.
        double obj = 0;
        for (int r = 0; r < t_.m; ++r) obj += cost[basis_[r]] * xb_(r);
        for (int j = 0; j < t_.n_total; ++j)
            if (state_[j] != kBasic && cost[j] != 0.0) obj += cost[j] * nonbasic_value(j);
        if (obj < last_obj - 1e-12) {
            last_obj = obj;
            stall = 0;
        } else if (++stall > opt_.stall_limit) {
            bland = true;
        }
    }
}

LpSolution Simplex::run() {
    LpSolution sol;
    // Phase 1: drive artificial infeasibility to zero.
    bool ok = iterate(t_.cost1);
    if (!ok) {
        sol.status = status_ == LpStatus::Unbounded ? LpStatus::Infeasible : status_;
        sol.diagnostic = diag_.empty() ? "phase-1 failure" : diag_;
        sol.iterations = iters_;
        return sol;
    }
    double infeas = 0;
    for (int r = 0; r < t_.m; ++r)
        if (basis_[r] >= t_.n_struct + t_.m) infeas += std::abs(xb_(r));
    for (int j = t_.n_struct + t_.m; j < t_.n_total; ++j)
        if (state_[j] != kBasic) infeas += std::abs(nonbasic_value(j));
    if (infeas > opt_.feas_tol) {
        sol.status = LpStatus::Infeasible;
        sol.diagnostic = strfmt("infeasible (residual %.3e)", infeas);
        sol.iterations = iters_;
        return sol;
    }
    // Lock artificials at zero for phase 2.
    for (int j = t_.n_struct + t_.m; j < t_.n_total; ++j) {
        t_.lb[j] = t_.ub[j] = 0.0;
        if (state_[j] != kBasic) state_[j] = kAtLower;
    }
    ok = iterate(t_.cost2);
    sol.iterations = iters_;
    if (!ok) {
        sol.status = status_;
        sol.diagnostic = diag_;
        return sol;
    }

    sol.status = LpStatus::Optimal;
    sol.x.assign(t_.n_struct, 0.0);
    std::vector<double> full(t_.n_total, 0.0);
    for (int j = 0; j < t_.n_total; ++j)
        if (state_[j] != kBasic) full[j] = nonbasic_value(j);
    for (int r = 0; r < t_.m; ++r) full[basis_[r]] = xb_(r);
    for (int j = 0; j < t_.n_struct; ++j) sol.x[j] = full[j];

    Eigen::VectorXd cb(t_.m);
    for (int r = 0; r < t_.m; ++r) cb(r) = t_.cost2[basis_[r]];
    Eigen::VectorXd y = binv_.transpose() * cb;
    sol.dual.assign(t_.m, 0.0);
    for (int i = 0; i < t_.m; ++i) sol.dual[i] = y(i);
    sol.reduced_cost.assign(t_.n_struct, 0.0);
    for (int j = 0; j < t_.n_struct; ++j) sol.reduced_cost[j] = t_.cost2[j] - col_dot(j, y);

    sol.objective = lp_.obj_constant;
    for (int j = 0; j < t_.n_struct; ++j) sol.objective += lp_.obj[j] * sol.x[j];

    // Self-checks: primal feasibility, strong duality, complementary slackness.
    double dual_obj = lp_.obj_constant;
    for (int i = 0; i < t_.m; ++i) dual_obj += sol.dual[i] * lp_.cons[i].rhs;
    for (int j = 0; j < t_.n_struct; ++j) {
        double d = sol.reduced_cost[j];
        if (std::abs(d) < 1e-11) continue;
        if (d > 0 && std::isfinite(lp_.vars[j].lb))
            dual_obj += d * lp_.vars[j].lb;
        else if (d < 0 && std::isfinite(lp_.vars[j].ub))
            dual_obj += d * lp_.vars[j].ub;
        else
            dual_obj += d * sol.x[j];  // interior/free: contributes its residual
    }
    sol.duality_gap = std::abs(sol.objective - dual_obj);
    for (int i = 0; i < t_.m; ++i) {
        double ax = 0;
        for (const auto& [j, a] : lp_.cons[i].coeffs) ax += a * sol.x[j];
        double resid;
        switch (lp_.cons[i].rel) {
            case Rel::LessEq: resid = std::max(0.0, ax - lp_.cons[i].rhs); break;
            case Rel::GreaterEq: resid = std::max(0.0, lp_.cons[i].rhs - ax); break;
            default: resid = std::abs(ax - lp_.cons[i].rhs);
        }
        sol.max_primal_residual = std::max(sol.max_primal_residual, resid);
        sol.complementarity += std::abs(sol.dual[i] * (ax - lp_.cons[i].rhs));
    }
    for (int j = 0; j < t_.n_struct; ++j) {
        const auto& v = lp_.vars[j];
        sol.max_primal_residual =
            std::max({sol.max_primal_residual, v.lb - sol.x[j], sol.x[j] - v.ub});
        double d = sol.reduced_cost[j];
        if (d > 1e-11 && std::isfinite(v.lb))
            sol.complementarity += std::abs(d * (sol.x[j] - v.lb));
        else if (d < -1e-11 && std::isfinite(v.ub))
            sol.complementarity += std::abs(d * (v.ub - sol.x[j]));
    }
    return sol;
}

}  // namespace

LpSolution SimplexSolver::solve(const LinearProgram& lp) const {
    if (lp.cons.empty()) {
        // Pure bound problem: each variable sits at its cheaper bound.
        LpSolution sol;
        sol.status = LpStatus::Optimal;
        sol.objective = lp.obj_constant;
        sol.x.assign(lp.vars.size(), 0.0);
        sol.reduced_cost = lp.obj;
        for (size_t j = 0; j < lp.vars.size(); ++j) {
            const auto& v = lp.vars[j];
            double c = lp.obj[j];
            double pick = c > 0 ? v.lb : c < 0 ? v.ub : (std::isfinite(v.lb) ? v.lb : 0.0);
            if (!std::isfinite(pick)) {
                sol.status = c == 0 ? LpStatus::Optimal : LpStatus::Unbounded;
                pick = 0.0;
            }
            sol.x[j] = pick;
            sol.objective += c * pick;
        }
        return sol;
    }
    Simplex s(lp, opt_);
    return s.run();
}

LpSolution solve(const LinearProgram& lp, const SolverOptions& opt) {
    return SimplexSolver(opt).solve(lp);
}

std::string write_mps(const LinearProgram& lp, const std::string& name) {
    std::string out = "NAME          " + name + "\nROWS\n N  COST\n";
    for (size_t i = 0; i < lp.cons.size(); ++i) {
        char t = lp.cons[i].rel == Rel::LessEq ? 'L' : lp.cons[i].rel == Rel::Eq ? 'E' : 'G';
        out += strfmt(" %c  R%zu\n", t, i);
    }
    out += "COLUMNS\n";
    for (size_t j = 0; j < lp.vars.size(); ++j) {
        if (lp.obj[j] != 0.0) out += strfmt("    X%-8zu COST      %.12g\n", j, lp.obj[j]);
        for (size_t i = 0; i < lp.cons.size(); ++i)
            for (const auto& [v, a] : lp.cons[i].coeffs)
                if (v == (int)j && a != 0.0) out += strfmt("    X%-8zu R%-8zu %.12g\n", j, i, a);
    }
    out += "RHS\n";
    for (size_t i = 0; i < lp.cons.size(); ++i)
        if (lp.cons[i].rhs != 0.0) out += strfmt("    RHS       R%-8zu %.12g\n", i, lp.cons[i].rhs);
    out += "BOUNDS\n";
    for (size_t j = 0; j < lp.vars.size(); ++j) {
        const auto& v = lp.vars[j];
        if (!std::isfinite(v.lb) && !std::isfinite(v.ub)) {
            out += strfmt(" FR BND       X%zu\n", j);
            continue;
        }
        if (std::isfinite(v.lb) && v.lb != 0.0) out += strfmt(" LO BND       X%-8zu %.12g\n", j, v.lb);
        if (!std::isfinite(v.lb)) out += strfmt(" MI BND       X%zu\n", j);
        if (std::isfinite(v.ub)) out += strfmt(" UP BND       X%-8zu %.12g\n", j, v.ub);
    }
    out += "ENDATA\n";
    return out;
}

}  // namespace ems::lp
