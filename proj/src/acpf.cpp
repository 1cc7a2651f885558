#include "ems/acpf.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <queue>

namespace ems::acpf {

using cplx = std::complex<double>;

double BranchFlow::max_abs_q() const {
    return std::max(std::abs(q_from), std::abs(q_to));
}

double AcSolution::total_loss_mw() const {
    double s = 0;
    for (const auto& b : branch) s += b.loss_mw;
    return s;
}

double AcSolution::total_gen_mw() const {
    double s = 0;
    for (double p : gen_p) s += p;
    return s;
}

namespace {

// Primitive branch admittances; flow convention p ~ (th_f - th_t + alpha)/x,
// realized with an ideal phase shifter of angle -alpha at the from side.
struct BranchAdmittance {
    cplx yff, yft, ytf, ytt;
};

BranchAdmittance branch_admittance(const Branch& k) {
    cplx ys = 1.0 / cplx(k.r, k.x);
    cplx sh(0.0, k.b_charge / 2.0);
    cplx shift = std::polar(1.0, -k.alpha);
    return {ys + sh, -ys / std::conj(shift), -ys / shift, ys + sh};
}

int count_islands(const Case& c, int skip_branch_idx) {
    size_t nb = c.buses.size();
    std::vector<std::vector<int>> adj(nb);
    for (size_t k = 0; k < c.branches.size(); ++k) {
        if (!c.branches[k].in_service || (int)k == skip_branch_idx) continue;
        int f = c.bus_index(c.branches[k].from_bus);
        int t = c.bus_index(c.branches[k].to_bus);
        adj[f].push_back(t);
        adj[t].push_back(f);
    }
    std::vector<char> seen(nb, 0);
    int islands = 0;
    for (size_t s = 0; s < nb; ++s) {
        if (seen[s]) continue;
        ++islands;
        std::queue<int> q;
        q.push((int)s);
        seen[s] = 1;
        while (!q.empty()) {
            int n = q.front();
            q.pop();
            for (int m : adj[n])
                if (!seen[m]) {
                    seen[m] = 1;
                    q.push(m);
                }
        }
    }
    return islands;
}

// Normalized participation weight per generator over a set of gens.
std::vector<double> participation_weights(const Case& c, const std::vector<int>& gen_idx,
                                          ParticipationRule rule) {
    std::vector<double> w(gen_idx.size(), 0.0);
    double sum = 0;
    for (size_t i = 0; i < gen_idx.size(); ++i) {
        const Generator& g = c.gens[gen_idx[i]];
        if (!g.dispatchable) continue;
        w[i] = rule == ParticipationRule::Equal ? 1.0 : std::max(g.p_max - g.p0, 0.0);
        sum += w[i];
    }
    if (sum <= 0) {  // nothing dispatchable with headroom: spread over everything
        for (size_t i = 0; i < gen_idx.size(); ++i) w[i] = 1.0;
        sum = (double)gen_idx.size();
    }
    for (auto& v : w) v /= sum;
    return w;
}

struct IslandProblem {
    std::vector<int> buses;       // case bus indices
    std::vector<int> local_of;    // case bus index -> local index or -1
    std::vector<int> branches;    // case branch indices inside the island
    std::vector<int> gens;        // case gen indices
    int slack_local = -1;
    std::vector<char> is_pv;      // local, includes slack
};

void solve_island(const Case& c, const IslandProblem& isl, const SolveOptions& opt,
                  AcSolution& sol) {
    const int n = (int)isl.buses.size();
    const double base = c.base_mva;

    bool has_load = false;
    for (int b : isl.buses)
        for (int d : c.loads_at_bus[b]) has_load |= c.loads[d].p != 0 || c.loads[d].q != 0;
    if (isl.gens.empty() && has_load)
        throw Error(strfmt("island of bus %d has load but no generation source",
                           c.buses[isl.buses[0]].id));

    // Ybus
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
    for (int k : isl.branches) {
        const Branch& br = c.branches[k];
        auto a = branch_admittance(br);
        int f = isl.local_of[c.bus_index(br.from_bus)];
        int t = isl.local_of[c.bus_index(br.to_bus)];
        Y(f, f) += a.yff;
        Y(f, t) += a.yft;
        Y(t, f) += a.ytf;
        Y(t, t) += a.ytt;
    }

    // Schedules (p.u.)
    Eigen::VectorXd p_sched = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd q_sched = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        int b = isl.buses[i];
        for (int gi : c.gens_at_bus[b]) p_sched(i) += c.gens[gi].p0 / base;
        for (int di : c.loads_at_bus[b]) {
            p_sched(i) -= c.loads[di].p / base;
            q_sched(i) -= c.loads[di].q / base;
        }
    }
    std::vector<double> w = participation_weights(c, isl.gens, opt.participation);
    Eigen::VectorXd w_bus = Eigen::VectorXd::Zero(n);
    for (size_t i = 0; i < isl.gens.size(); ++i)
        w_bus(isl.local_of[c.bus_index(c.gens[isl.gens[i]].bus)]) += w[i];

    // State
    Eigen::VectorXd vm = Eigen::VectorXd::Ones(n), va = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        int b = isl.buses[i];
        if (opt.warm_start && opt.warm_start->converged) {
            vm(i) = opt.warm_start->v_mag[b];
            va(i) = opt.warm_start->v_ang[b];
        }
        if (isl.is_pv[i]) {
            // PV magnitude pinned to the setpoint of the bus's generators
            vm(i) = c.gens[c.gens_at_bus[b].front()].v_set;
        }
    }
    va(isl.slack_local) = 0.0;
    double gamma = 0.0;

    // Unknown layout: theta(all but slack), v(PQ), gamma
    std::vector<int> th_pos(n, -1), v_pos(n, -1);
    int nx = 0;
    for (int i = 0; i < n; ++i)
        if (i != isl.slack_local) th_pos[i] = nx++;
    for (int i = 0; i < n; ++i)
        if (!isl.is_pv[i]) v_pos[i] = nx++;
    const int gamma_pos = nx++;
    const int npq = nx - 1 - (n - 1);
    const int neq = n + npq;  // P everywhere, Q at PQ

    auto calc_power = [&](Eigen::VectorXd& pc, Eigen::VectorXd& qc) {
        pc.setZero(n);
        qc.setZero(n);
        for (int i = 0; i < n; ++i) {
            cplx vi = std::polar(vm(i), va(i));
            cplx s = 0;
            for (int j = 0; j < n; ++j) {
                if (Y(i, j) == cplx(0.0, 0.0)) continue;
                s += vi * std::conj(Y(i, j) * std::polar(vm(j), va(j)));
            }
            pc(i) = s.real();
            qc(i) = s.imag();
        }
    };

    Eigen::VectorXd pc(n), qc(n);
    bool converged = false;
    int iter = 0;
    double max_mis = 0;
    for (; iter <= opt.max_iter; ++iter) {
        calc_power(pc, qc);
        Eigen::VectorXd mis(neq);
        for (int i = 0; i < n; ++i) mis(i) = p_sched(i) + gamma * w_bus(i) - pc(i);
        {
            int row = n;
            for (int i = 0; i < n; ++i)
                if (!isl.is_pv[i]) mis(row++) = q_sched(i) - qc(i);
        }
        max_mis = mis.size() ? mis.cwiseAbs().maxCoeff() : 0.0;
        if (max_mis < opt.tol) {
            converged = true;
            break;
        }
        if (!std::isfinite(max_mis) || max_mis > 1e6) {
            sol.diagnostic = "diverged";
            break;
        }
        if (iter == opt.max_iter) break;

        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(neq, nx);
        const Eigen::MatrixXd G = Y.real(), B = Y.imag();
        auto fill_row = [&](int row, int i, bool is_p) {
            for (int j = 0; j < n; ++j) {
                if (i != j && Y(i, j) == cplx(0.0, 0.0)) continue;
                double tij = va(i) - va(j);
                double ct = std::cos(tij), st = std::sin(tij);
                double dp_dth, dp_dv;
                if (is_p) {
                    if (i == j) {
                        dp_dth = -qc(i) - B(i, i) * vm(i) * vm(i);
                        dp_dv = pc(i) / vm(i) + G(i, i) * vm(i);
                    } else {
                        dp_dth = vm(i) * vm(j) * (G(i, j) * st - B(i, j) * ct);
                        dp_dv = vm(i) * (G(i, j) * ct + B(i, j) * st);
                    }
                } else {
                    if (i == j) {
                        dp_dth = pc(i) - G(i, i) * vm(i) * vm(i);
                        dp_dv = qc(i) / vm(i) - B(i, i) * vm(i);
                    } else {
                        dp_dth = -vm(i) * vm(j) * (G(i, j) * ct + B(i, j) * st);
                        dp_dv = vm(i) * (G(i, j) * st - B(i, j) * ct);
                    }
                }
                if (th_pos[j] >= 0) J(row, th_pos[j]) = dp_dth;
                if (v_pos[j] >= 0) J(row, v_pos[j]) = dp_dv;
            }
            if (is_p) J(row, gamma_pos) = -w_bus(i);
        };
        for (int i = 0; i < n; ++i) fill_row(i, i, true);
        {
            int row = n;
            for (int i = 0; i < n; ++i)
                if (!isl.is_pv[i]) fill_row(row++, i, false);
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible()) {
            sol.diagnostic = "singular jacobian";
            break;
        }
        Eigen::VectorXd dx = lu.solve(mis);
        for (int i = 0; i < n; ++i) {
            if (th_pos[i] >= 0) va(i) += dx(th_pos[i]);
            if (v_pos[i] >= 0) vm(i) += dx(v_pos[i]);
        }
        gamma += dx(gamma_pos);
    }

    sol.iterations = std::max(sol.iterations, iter);
    sol.max_mismatch = std::max(sol.max_mismatch, max_mis);
    if (!converged) {
        sol.converged = false;
        if (sol.diagnostic.empty())
            sol.diagnostic = strfmt("no convergence after %d iterations", iter);
        return;
    }

    calc_power(pc, qc);
    for (int i = 0; i < n; ++i) {
        int b = isl.buses[i];
        sol.v_mag[b] = vm(i);
        sol.v_ang[b] = va(i);
    }
    // Generator outputs: scheduled P plus slack share; Q split evenly over the
    // units at a PV/slack bus.
    for (size_t i = 0; i < isl.gens.size(); ++i) {
        int gi = isl.gens[i];
        sol.gen_p[gi] = c.gens[gi].p0 + gamma * w[i] * base;
    }
    for (int i = 0; i < n; ++i) {
        int b = isl.buses[i];
        const auto& gens_here = c.gens_at_bus[b];
        if (gens_here.empty()) continue;
        double q_load = 0;
        for (int di : c.loads_at_bus[b]) q_load += c.loads[di].q;
        double q_gen = qc(i) * base + q_load;
        for (int gi : gens_here) sol.gen_q[gi] = q_gen / (double)gens_here.size();
    }
    for (int k : isl.branches) {
        const Branch& br = c.branches[k];
        auto a = branch_admittance(br);
        int f = isl.local_of[c.bus_index(br.from_bus)];
        int t = isl.local_of[c.bus_index(br.to_bus)];
        cplx vf = std::polar(vm(f), va(f)), vt = std::polar(vm(t), va(t));
        cplx sf = vf * std::conj(a.yff * vf + a.yft * vt) * base;
        cplx st = vt * std::conj(a.ytf * vf + a.ytt * vt) * base;
        BranchFlow& bf = sol.branch[k];
        bf.p_from = sf.real();
        bf.q_from = sf.imag();
        bf.p_to = st.real();
        bf.q_to = st.imag();
        bf.s_from = std::abs(sf);
        bf.s_to = std::abs(st);
        bf.loss_mw = bf.p_from + bf.p_to;
        if (std::abs(bf.loss_mw) < 1e-9) bf.loss_mw = 0.0;
    }
}

}  // namespace

AcSolution solve_ac_power_flow(const Case& c, const SolveOptions& opt) {
    AcSolution sol;
    sol.converged = true;
    sol.v_mag.assign(c.buses.size(), 1.0);
    sol.v_ang.assign(c.buses.size(), 0.0);
    sol.branch.assign(c.branches.size(), {});
    sol.gen_p.assign(c.gens.size(), 0.0);
    sol.gen_q.assign(c.gens.size(), 0.0);

    for (int isl_id = 0; isl_id < c.n_islands; ++isl_id) {
        IslandProblem isl;
        isl.local_of.assign(c.buses.size(), -1);
        for (size_t b = 0; b < c.buses.size(); ++b) {
            if (c.island_of[b] != isl_id) continue;
            isl.local_of[b] = (int)isl.buses.size();
            isl.buses.push_back((int)b);
        }
        for (size_t k = 0; k < c.branches.size(); ++k)
            if (c.branches[k].in_service &&
                c.island_of[c.bus_index(c.branches[k].from_bus)] == isl_id)
                isl.branches.push_back((int)k);
        for (size_t g = 0; g < c.gens.size(); ++g)
            if (c.island_of[c.bus_index(c.gens[g].bus)] == isl_id) isl.gens.push_back((int)g);
        isl.is_pv.assign(isl.buses.size(), 0);
        for (size_t i = 0; i < isl.buses.size(); ++i) {
            int b = isl.buses[i];
            if (!c.gens_at_bus[b].empty()) isl.is_pv[i] = 1;
            if (c.buses[b].is_reference) isl.slack_local = (int)i;
        }
        if (isl.slack_local < 0) throw Error("island without reference bus");
        isl.is_pv[isl.slack_local] = 1;  // slack magnitude is pinned too
        solve_island(c, isl, opt, sol);
        if (!sol.converged) break;
    }
    return sol;
}

Case apply_outage(const Case& c, const Contingency& ctg, ParticipationRule rule) {
    Case out = c;
    if (ctg.kind == Contingency::Kind::Branch) {
        int k = c.branch_index(ctg.element);
        if (!c.branches[k].in_service)
            throw Error(strfmt("branch %d is already out of service", ctg.element));
        if (count_islands(c, k) > c.n_islands)
            throw IslandingError(strfmt("outage of branch %d islands the network", ctg.element));
        out.branches[k].in_service = false;
        out.finalize();
        return out;
    }
    int gi = c.gen_index(ctg.element);
    double lost = c.gens[gi].p0;
    int island = c.island_of[c.bus_index(c.gens[gi].bus)];
    out.gens.erase(out.gens.begin() + gi);
    // Headroom-limited proportional pickup by the remaining dispatchable units
    // in the same island.
    std::vector<size_t> pool;
    for (size_t i = 0; i < out.gens.size(); ++i)
        if (out.gens[i].dispatchable &&
            c.island_of[c.bus_index(out.gens[i].bus)] == island)
            pool.push_back(i);
    double rem = lost;
    for (int round = 0; round < 64 && std::abs(rem) > 1e-12 && !pool.empty(); ++round) {
        double sum_w = 0;
        std::vector<double> w(pool.size(), 0.0);
        for (size_t i = 0; i < pool.size(); ++i) {
            const Generator& g = out.gens[pool[i]];
            w[i] = rule == ParticipationRule::Equal
                       ? (rem > 0 ? (g.p_max - g.p0 > 1e-12 ? 1.0 : 0.0)
                                  : (g.p0 - g.p_min > 1e-12 ? 1.0 : 0.0))
                       : std::max(rem > 0 ? g.p_max - g.p0 : g.p0 - g.p_min, 0.0);
            sum_w += w[i];
        }
        if (sum_w <= 0) break;  // no headroom left; residual goes to the AC slack
        double assigned = 0;
        for (size_t i = 0; i < pool.size(); ++i) {
            Generator& g = out.gens[pool[i]];
            double share = rem * w[i] / sum_w;
            double capped = rem > 0 ? std::min(share, g.p_max - g.p0)
                                    : std::max(share, g.p_min - g.p0);
            g.p0 += capped;
            assigned += capped;
        }
        rem -= assigned;
    }
    out.finalize();
    return out;
}

std::vector<Contingency> default_contingencies(const Case& c) {
    std::vector<Contingency> list;
    std::vector<int> branch_ids, gen_ids;
    for (const auto& k : c.branches)
        if (k.in_service) branch_ids.push_back(k.id);
    for (const auto& g : c.gens) gen_ids.push_back(g.id);
    std::sort(branch_ids.begin(), branch_ids.end());
    std::sort(gen_ids.begin(), gen_ids.end());
    for (int id : branch_ids)
        if (count_islands(c, c.branch_index(id)) == c.n_islands)
            list.push_back({Contingency::Kind::Branch, id});
    for (int id : gen_ids) list.push_back({Contingency::Kind::Generator, id});
    return list;
}

}  // namespace ems::acpf
