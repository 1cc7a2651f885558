#include "ems/dcsens.hpp"

#include <atomic>
#include <queue>

#include "ems/tabular.hpp"

namespace ems::dc {

namespace {
std::atomic<uint64_t> next_stamp{1};
}

DcModel build_dc_model(const Case& c) {
    if (c.n_islands != 1) {
        std::string msg = strfmt("disconnected network (%d islands):", c.n_islands);
        for (int isl = 0; isl < c.n_islands; ++isl) {
            msg += strfmt(" island %d = {", isl);
            bool first = true;
            for (size_t b = 0; b < c.buses.size(); ++b)
                if (c.island_of[b] == isl) {
                    msg += (first ? "" : ",") + std::to_string(c.buses[b].id);
                    first = false;
                }
            msg += "}";
        }
        throw Error(msg);
    }
    DcModel m;
    m.stamp = next_stamp.fetch_add(1);
    m.base_mva = c.base_mva;
    m.n_bus = (int)c.buses.size();
    for (size_t b = 0; b < c.buses.size(); ++b)
        if (c.buses[b].is_reference) m.ref = (int)b;

    m.red_of.assign(m.n_bus, -1);
    int nred = 0;
    for (int b = 0; b < m.n_bus; ++b)
        if (b != m.ref) m.red_of[b] = nred++;

    m.b_reduced = Eigen::MatrixXd::Zero(nred, nred);
    m.shift_inj = Eigen::VectorXd::Zero(m.n_bus);
    for (const auto& k : c.branches) {
        int f = c.bus_index(k.from_bus), t = c.bus_index(k.to_bus);
        m.from.push_back(f);
        m.to.push_back(t);
        m.in_service.push_back(k.in_service ? 1 : 0);
        m.alpha.push_back(k.alpha);
        double w = k.in_service ? 1.0 / k.x : 0.0;
        m.weight.push_back(w);
        if (!k.in_service) continue;
        int rf = m.red_of[f], rt = m.red_of[t];
        if (rf >= 0) m.b_reduced(rf, rf) += w;
        if (rt >= 0) m.b_reduced(rt, rt) += w;
        if (rf >= 0 && rt >= 0) {
            m.b_reduced(rf, rt) -= w;
            m.b_reduced(rt, rf) -= w;
        }
        m.shift_inj(f) += k.alpha * w;
        m.shift_inj(t) -= k.alpha * w;
    }
    m.lu = Eigen::PartialPivLU<Eigen::MatrixXd>(m.b_reduced);
    return m;
}

static Eigen::VectorXd solve_angles(const DcModel& m, const Eigen::VectorXd& inj_pu) {
    int nred = (int)m.b_reduced.rows();
    Eigen::VectorXd rhs(nred);
    for (int b = 0; b < m.n_bus; ++b)
        if (m.red_of[b] >= 0) rhs(m.red_of[b]) = inj_pu(b);
    Eigen::VectorXd th_red = m.lu.solve(rhs);
    Eigen::VectorXd th = Eigen::VectorXd::Zero(m.n_bus);
    for (int b = 0; b < m.n_bus; ++b)
        if (m.red_of[b] >= 0) th(b) = th_red(m.red_of[b]);
    return th;
}

std::vector<double> dc_flow(const DcModel& m, const std::vector<double>& inj_mw) {
    if ((int)inj_mw.size() != m.n_bus) throw Error("dc_flow: injection vector size mismatch");
    Eigen::VectorXd inj(m.n_bus);
    for (int b = 0; b < m.n_bus; ++b) inj(b) = inj_mw[b] / m.base_mva - m.shift_inj(b);
    Eigen::VectorXd th = solve_angles(m, inj);
    std::vector<double> flow(m.n_branch(), 0.0);
    for (int k = 0; k < m.n_branch(); ++k)
        if (m.in_service[k])
            flow[k] = m.weight[k] * (th(m.from[k]) - th(m.to[k]) + m.alpha[k]) * m.base_mva;
    return flow;
}

PtdfMatrix compute_ptdf(const DcModel& m) {
    int nred = (int)m.b_reduced.rows();
    // Theta response to a unit injection at each non-reference bus.
    Eigen::MatrixXd th = m.lu.solve(Eigen::MatrixXd::Identity(nred, nred));
    PtdfMatrix p;
    p.stamp = m.stamp;
    p.m = Eigen::MatrixXd::Zero(m.n_bus, m.n_branch());
    for (int b = 0; b < m.n_bus; ++b) {
        int rb = m.red_of[b];
        if (rb < 0) continue;  // reference row stays zero
        for (int k = 0; k < m.n_branch(); ++k) {
            if (!m.in_service[k]) continue;
            double tf = m.red_of[m.from[k]] >= 0 ? th(m.red_of[m.from[k]], rb) : 0.0;
            double tt = m.red_of[m.to[k]] >= 0 ? th(m.red_of[m.to[k]], rb) : 0.0;
            p.m(b, k) = m.weight[k] * (tf - tt);
        }
    }
    return p;
}

static bool outage_islands(const DcModel& m, int outage) {
    std::vector<std::vector<int>> adj(m.n_bus);
    for (int k = 0; k < m.n_branch(); ++k) {
        if (!m.in_service[k] || k == outage) continue;
        adj[m.from[k]].push_back(m.to[k]);
        adj[m.to[k]].push_back(m.from[k]);
    }
    std::vector<char> seen(m.n_bus, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int n = q.front();
        q.pop();
        for (int o : adj[n])
            if (!seen[o]) {
                seen[o] = 1;
                ++count;
                q.push(o);
            }
    }
    return count != m.n_bus;
}

LodfColumn compute_lodf(const DcModel& m, const PtdfMatrix& ptdf, int outage) {
    if (ptdf.stamp != m.stamp) throw Error("compute_lodf: PTDF from a different model");
    if (outage < 0 || outage >= m.n_branch() || !m.in_service[outage])
        throw Error("compute_lodf: outage branch not in service");
    if (outage_islands(m, outage))
        throw IslandingError(strfmt("outage of branch index %d islands the network", outage));

    // Transfer from the outaged branch's from-bus to its to-bus.
    auto transfer = [&](int k) { return ptdf.m(m.from[outage], k) - ptdf.m(m.to[outage], k); };
    double denom = 1.0 - transfer(outage);
    if (std::abs(denom) < 1e-9)
        throw IslandingError(strfmt("branch index %d carries the full transfer (radial)", outage));
    LodfColumn l;
    l.stamp = m.stamp;
    l.outage = outage;
    l.col = Eigen::VectorXd::Zero(m.n_branch());
    for (int k = 0; k < m.n_branch(); ++k) {
        if (!m.in_service[k]) continue;
        l.col(k) = k == outage ? -1.0 : transfer(k) / denom;
    }
    return l;
}

Eigen::MatrixXd compute_otdf(const PtdfMatrix& ptdf, const LodfColumn& lodf) {
    if (ptdf.stamp != lodf.stamp) throw Error("compute_otdf: mismatched model stamps");
    Eigen::MatrixXd o = ptdf.m;
    o += ptdf.m.col(lodf.outage) * lodf.col.transpose();
    o.col(lodf.outage).setZero();  // flow on the outaged branch itself is gone
    return o;
}

double SensitivitySet::otdf(int bus, int branch, int outage_branch) const {
    const LodfColumn& l = lodf_for(outage_branch);
    if (branch == outage_branch) return 0.0;
    return ptdf.m(bus, branch) + l.col(branch) * ptdf.m(bus, outage_branch);
}

const LodfColumn& SensitivitySet::lodf_for(int outage_branch) const {
    auto it = lodf.find(outage_branch);
    if (it == lodf.end())
        throw Error(strfmt("no LODF column for outage branch index %d", outage_branch));
    return it->second;
}

SensitivitySet build_sensitivities(const DcModel& m, const std::vector<int>& outages) {
    SensitivitySet s;
    s.stamp = m.stamp;
    s.ptdf = compute_ptdf(m);
    for (int o : outages)
        if (!s.lodf.count(o)) s.lodf.emplace(o, compute_lodf(m, s.ptdf, o));
    return s;
}

std::string write_sensitivities(const Case& c, const SensitivitySet& s) {
    tab::Document doc;
    auto& p = doc.add("ptdf");
    for (size_t b = 0; b < c.buses.size(); ++b) {
        for (size_t k = 0; k < c.branches.size(); ++k) {
            if (!c.branches[k].in_service) continue;
            p.records.push_back({0,
                                 {std::to_string(c.buses[b].id), std::to_string(c.branches[k].id),
                                  strfmt("%.12g", s.ptdf.m((int)b, (int)k))}});
        }
    }
    auto& l = doc.add("lodf");
    for (const auto& [outage, col] : s.lodf)
        for (size_t k = 0; k < c.branches.size(); ++k) {
            if (!c.branches[k].in_service) continue;
            l.records.push_back({0,
                                 {std::to_string(c.branches[k].id),
                                  std::to_string(c.branches[outage].id),
                                  strfmt("%.12g", col.col((int)k))}});
        }
    return tab::write(doc);
}

}  // namespace ems::dc
