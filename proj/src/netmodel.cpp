#include "ems/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "ems/acpf.hpp"
#include "ems/common.hpp"
#include "ems/tabular.hpp"

namespace ems {

static constexpr double kEps = 1e-9;
static constexpr double kCurveTol = 1e-6;

std::vector<CostSegment> Generator::dispatch_blocks() const {
    if (curve_kind != CurveKind::Block)
        throw Error(strfmt("gen %d: slope curve must be linearized before dispatch", id));
    std::vector<CostSegment> out;
    if (econ_min > 0) out.push_back({econ_min, no_load_price});
    for (const auto& b : blocks)
        if (b.breadth > 0) out.push_back(b);
    return out;
}

double Generator::energy_cost(double p) const {
    double cost = 0.0, used = std::min(p, econ_min);
    cost += used * no_load_price;
    double rem = p - used;
    if (curve_kind == CurveKind::Block) {
        for (const auto& b : blocks) {
            if (rem <= 0) break;
            double take = std::min(rem, b.breadth);
            cost += take * b.price;
            rem -= take;
        }
    } else {
        double a = econ_min, ca = no_load_price;
        for (const auto& pt : slope_pts) {
            if (rem <= 0) break;
            double width = pt.mw - a;
            double take = std::min(rem, width);
            double cb = ca + (pt.price - ca) * take / width;  // marginal price at a+take
            cost += take * (ca + cb) / 2.0;
            rem -= take;
            a = pt.mw;
            ca = pt.price;
        }
    }
    return cost;
}

double Interface::limit_for(const std::string& ctg_key) const {
    auto it = ctg_limits.find(ctg_key);
    return it == ctg_limits.end() ? limit_ctg : it->second;
}

void Config::validate() const {
    if (pct <= 0 || pctc <= 0) throw Error("config: monitoring tolerances must be positive");
    if (t_ed <= 0 || t_sr <= 0) throw Error("config: look-ahead and reserve times must be positive");
    if (shed_penalty <= 0) throw Error("config: shed penalty must be positive");
    if (price_increment <= 0) throw Error("config: price increment must be positive");
    if (limit_derate <= 0 || limit_derate > 1.0) throw Error("config: derate must be in (0, 1]");
    if (load_growth <= 0) throw Error("config: load growth must be positive");
}

int Case::bus_index(int id) const {
    auto it = bus_idx_of.find(id);
    if (it == bus_idx_of.end()) throw Error(strfmt("unknown bus %d", id));
    return it->second;
}

int Case::branch_index(int id) const {
    auto it = branch_idx_of.find(id);
    if (it == branch_idx_of.end()) throw Error(strfmt("unknown branch %d", id));
    return it->second;
}

int Case::gen_index(int id) const {
    auto it = gen_idx_of.find(id);
    if (it == gen_idx_of.end()) throw Error(strfmt("unknown generator %d", id));
    return it->second;
}

int Case::load_index(int id) const {
    auto it = load_idx_of.find(id);
    if (it == load_idx_of.end()) throw Error(strfmt("unknown load %d", id));
    return it->second;
}

double Case::total_load_p() const {
    double s = 0;
    for (const auto& d : loads) s += d.p;
    return s;
}

double Case::total_gen_p0() const {
    double s = 0;
    for (const auto& g : gens) s += g.p0;
    return s;
}

static void validate_curve(const Generator& g) {
    if (g.econ_min < 0) throw Error(strfmt("gen %d: economic minimum must be >= 0", g.id));
    if (g.curve_kind == CurveKind::Block) {
        double prev = g.no_load_price, sum = 0;
        for (const auto& b : g.blocks) {
            if (b.breadth < 0) throw Error(strfmt("gen %d: negative segment breadth", g.id));
            if (b.price < prev - kEps)
                throw Error(strfmt("gen %d: non-convex offer (decreasing block prices)", g.id));
            prev = b.price;
            sum += b.breadth;
        }
        if (g.dispatchable && std::abs(sum - (g.p_max - g.econ_min)) > kCurveTol)
            throw Error(strfmt("gen %d: block breadths sum to %.6f, expected p_max - econ_min = %.6f",
                               g.id, sum, g.p_max - g.econ_min));
    } else {
        double mw = g.econ_min, price = g.no_load_price;
        if (g.slope_pts.empty()) throw Error(strfmt("gen %d: slope curve without breakpoints", g.id));
        for (const auto& pt : g.slope_pts) {
            if (pt.mw <= mw + kEps)
                throw Error(strfmt("gen %d: slope breakpoints must be increasing in MW", g.id));
            if (pt.price < price - kEps)
                throw Error(strfmt("gen %d: non-convex offer (decreasing slope prices)", g.id));
            mw = pt.mw;
            price = pt.price;
        }
        if (g.dispatchable && std::abs(mw - g.p_max) > kCurveTol)
            throw Error(strfmt("gen %d: slope curve ends at %.6f, expected p_max = %.6f", g.id, mw,
                               g.p_max));
    }
}

void Case::finalize() {
    if (base_mva <= 0) throw Error("base_mva must be positive");
    bus_idx_of.clear();
    branch_idx_of.clear();
    gen_idx_of.clear();
    load_idx_of.clear();
    for (size_t i = 0; i < buses.size(); ++i)
        if (!bus_idx_of.emplace(buses[i].id, (int)i).second)
            throw Error(strfmt("duplicate bus id %d", buses[i].id));
    for (size_t i = 0; i < branches.size(); ++i) {
        const Branch& k = branches[i];
        if (!branch_idx_of.emplace(k.id, (int)i).second)
            throw Error(strfmt("duplicate branch id %d", k.id));
        if (k.x <= 0) throw Error(strfmt("branch %d: non-positive reactance", k.id));
        if (k.r < 0) throw Error(strfmt("branch %d: negative resistance", k.id));
        if (k.from_bus == k.to_bus) throw Error(strfmt("branch %d: from and to bus coincide", k.id));
        if (!(k.rate_c >= k.rate_a && k.rate_a > 0))
            throw Error(strfmt("branch %d: rates must satisfy rate_c >= rate_a > 0", k.id));
        bus_index(k.from_bus);
        bus_index(k.to_bus);
    }
    for (size_t i = 0; i < gens.size(); ++i) {
        const Generator& g = gens[i];
        if (!gen_idx_of.emplace(g.id, (int)i).second)
            throw Error(strfmt("duplicate generator id %d", g.id));
        bus_index(g.bus);
        if (!(g.p_min <= g.p0 + kEps && g.p0 <= g.p_max + kEps))
            throw Error(strfmt("gen %d: p0 outside [p_min, p_max]", g.id));
        if (g.energy_ramp < 0 || g.spin_ramp < 0)
            throw Error(strfmt("gen %d: negative ramp rate", g.id));
        if (g.dispatchable || !g.blocks.empty() || !g.slope_pts.empty()) validate_curve(g);
    }
    for (size_t i = 0; i < loads.size(); ++i) {
        const Load& d = loads[i];
        if (!load_idx_of.emplace(d.id, (int)i).second)
            throw Error(strfmt("duplicate load id %d", d.id));
        bus_index(d.bus);
        if (d.kind == LoadKind::Negative && d.p >= 0)
            throw Error(strfmt("load %d: negative load must have p < 0", d.id));
        if (d.kind != LoadKind::Negative && d.p < 0)
            throw Error(strfmt("load %d: %s load must have p >= 0", d.id,
                               d.kind == LoadKind::Virtual ? "virtual" : "positive"));
    }
    std::vector<int> seen_iface;
    for (const auto& f : interfaces) {
        if (std::count(seen_iface.begin(), seen_iface.end(), f.id))
            throw Error(strfmt("duplicate interface id %d", f.id));
        seen_iface.push_back(f.id);
        if (f.limit_base <= 0 || f.limit_ctg <= 0)
            throw Error(strfmt("interface %d: limits must be positive", f.id));
        std::vector<int> members;
        for (const auto& m : f.members) {
            branch_index(m.branch_id);
            if (m.sign != 1 && m.sign != -1)
                throw Error(strfmt("interface %d: member sign must be +-1", f.id));
            if (std::count(members.begin(), members.end(), m.branch_id))
                throw Error(strfmt("interface %d: duplicate member branch %d", f.id, m.branch_id));
            members.push_back(m.branch_id);
        }
        if (members.empty()) throw Error(strfmt("interface %d: no member branches", f.id));
    }

    size_t nb = buses.size();
    gens_at_bus.assign(nb, {});
    loads_at_bus.assign(nb, {});
    branches_from.assign(nb, {});
    branches_to.assign(nb, {});
    for (size_t i = 0; i < gens.size(); ++i) gens_at_bus[bus_index(gens[i].bus)].push_back((int)i);
    for (size_t i = 0; i < loads.size(); ++i) loads_at_bus[bus_index(loads[i].bus)].push_back((int)i);
    for (size_t i = 0; i < branches.size(); ++i) {
        if (!branches[i].in_service) continue;
        branches_from[bus_index(branches[i].from_bus)].push_back((int)i);
        branches_to[bus_index(branches[i].to_bus)].push_back((int)i);
    }

    // Island scan over in-service branches; every island needs exactly one
    // reference bus.
    island_of.assign(nb, -1);
    n_islands = 0;
    for (size_t s = 0; s < nb; ++s) {
        if (island_of[s] >= 0) continue;
        int isl = n_islands++;
        std::queue<int> q;
        q.push((int)s);
        island_of[s] = isl;
        while (!q.empty()) {
            int n = q.front();
            q.pop();
            auto visit = [&](int other) {
                if (island_of[other] < 0) {
                    island_of[other] = isl;
                    q.push(other);
                }
            };
            for (int k : branches_from[n]) visit(bus_index(branches[k].to_bus));
            for (int k : branches_to[n]) visit(bus_index(branches[k].from_bus));
        }
    }
    std::vector<int> refs(n_islands, 0);
    for (size_t i = 0; i < nb; ++i)
        if (buses[i].is_reference) refs[island_of[i]]++;
    for (int isl = 0; isl < n_islands; ++isl)
        if (refs[isl] != 1)
            throw Error(strfmt("island %d has %d reference buses, expected exactly one", isl,
                               refs[isl]));
}

// ---------------------------------------------------------------------------
// Case file ingestion

namespace {

LoadKind load_kind_from(const std::string& s, int line) {
    if (s == "positive") return LoadKind::Positive;
    if (s == "negative") return LoadKind::Negative;
    if (s == "virtual") return LoadKind::Virtual;
    throw Error(strfmt("line %d: unknown load kind '%s'", line, s.c_str()));
}

const char* load_kind_str(LoadKind k) {
    switch (k) {
        case LoadKind::Positive: return "positive";
        case LoadKind::Negative: return "negative";
        default: return "virtual";
    }
}

}  // namespace

Case parse_case(const std::string& text) {
    tab::Document doc = tab::parse(text);
    Case c;
    std::unordered_map<int, int> line_of_bus, line_of_branch, line_of_gen, line_of_load;

    for (const auto& sec : doc.sections) {
        if (sec.name == "meta") {
            for (const auto& r : sec.records) {
                const std::string& key = tab::as_str(r, 0, "meta key");
                if (key == "base_mva")
                    c.base_mva = tab::as_real(r, 1, "base_mva");
                else if (key == "name")
                    c.name = tab::as_str(r, 1, "name");
                else
                    throw Error(strfmt("line %d: unknown meta key '%s'", r.line, key.c_str()));
            }
        } else if (sec.name == "bus") {
            for (const auto& r : sec.records) {
                Bus b;
                b.id = (int)tab::as_int(r, 0, "bus id");
                b.base_kv = tab::as_real(r, 1, "base_kv");
                b.is_reference = tab::as_flag(r, 2, "is_reference");
                if (line_of_bus.count(b.id))
                    throw Error(strfmt("line %d: duplicate bus id %d", r.line, b.id));
                line_of_bus[b.id] = r.line;
                c.buses.push_back(b);
            }
        } else if (sec.name == "branch") {
            for (const auto& r : sec.records) {
                Branch k;
                k.id = (int)tab::as_int(r, 0, "branch id");
                k.from_bus = (int)tab::as_int(r, 1, "from_bus");
                k.to_bus = (int)tab::as_int(r, 2, "to_bus");
                k.x = tab::as_real(r, 3, "reactance");
                k.alpha = tab::as_real(r, 4, "phase shift");
                k.rate_a = tab::as_real(r, 5, "rate_a");
                k.rate_c = tab::as_real(r, 6, "rate_c");
                k.in_service = tab::as_flag(r, 7, "in_service");
                if (r.fields.size() > 8) k.r = tab::as_real(r, 8, "resistance");
                if (r.fields.size() > 9) k.b_charge = tab::as_real(r, 9, "charging");
                if (k.x <= 0)
                    throw Error(strfmt("line %d: branch %d: non-positive reactance", r.line, k.id));
                if (line_of_branch.count(k.id))
                    throw Error(strfmt("line %d: duplicate branch id %d", r.line, k.id));
                line_of_branch[k.id] = r.line;
                c.branches.push_back(k);
            }
        } else if (sec.name == "gen") {
            for (const auto& r : sec.records) {
                Generator g;
                g.id = (int)tab::as_int(r, 0, "gen id");
                g.bus = (int)tab::as_int(r, 1, "gen bus");
                g.p_min = tab::as_real(r, 2, "p_min");
                g.p_max = tab::as_real(r, 3, "p_max");
                g.p0 = tab::as_real(r, 4, "p0");
                g.energy_ramp = tab::as_real(r, 5, "energy ramp");
                g.spin_ramp = tab::as_real(r, 6, "spin ramp");
                g.reserve_price = tab::as_real(r, 7, "reserve price");
                g.dispatchable = tab::as_flag(r, 8, "dispatchable");
                if (r.fields.size() > 9) g.v_set = tab::as_real(r, 9, "v_set");
                if (line_of_gen.count(g.id))
                    throw Error(strfmt("line %d: duplicate generator id %d", r.line, g.id));
                line_of_gen[g.id] = r.line;
                c.gens.push_back(g);
            }
        } else if (sec.name == "gencost") {
            for (const auto& r : sec.records) {
                int gid = (int)tab::as_int(r, 0, "gencost gen id");
                auto it = std::find_if(c.gens.begin(), c.gens.end(),
                                       [&](const Generator& g) { return g.id == gid; });
                if (it == c.gens.end())
                    throw Error(strfmt("line %d: gencost for unknown generator %d", r.line, gid));
                const std::string& kind = tab::as_str(r, 1, "curve kind");
                if (kind == "block")
                    it->curve_kind = CurveKind::Block;
                else if (kind == "slope")
                    it->curve_kind = CurveKind::Slope;
                else
                    throw Error(strfmt("line %d: unknown curve kind '%s'", r.line, kind.c_str()));
                it->econ_min = tab::as_real(r, 2, "econ_min");
                it->no_load_price = tab::as_real(r, 3, "no-load price");
                int nseg = (int)tab::as_int(r, 4, "segment count");
                if (nseg < 0 || r.fields.size() != 5 + 2 * (size_t)nseg)
                    throw Error(strfmt("line %d: gencost expects %d value pairs", r.line, nseg));
                for (int i = 0; i < nseg; ++i) {
                    double a = tab::as_real(r, 5 + 2 * i, "segment mw");
                    double b = tab::as_real(r, 6 + 2 * i, "segment price");
                    if (it->curve_kind == CurveKind::Block)
                        it->blocks.push_back({a, b});
                    else
                        it->slope_pts.push_back({a, b});
                }
            }
        } else if (sec.name == "load") {
            for (const auto& r : sec.records) {
                Load d;
                d.id = (int)tab::as_int(r, 0, "load id");
                d.bus = (int)tab::as_int(r, 1, "load bus");
                d.p = tab::as_real(r, 2, "load p");
                d.p0 = tab::as_real(r, 3, "load p0");
                d.kind = load_kind_from(tab::as_str(r, 4, "load kind"), r.line);
                if (r.fields.size() > 5) d.q = tab::as_real(r, 5, "load q");
                if (line_of_load.count(d.id))
                    throw Error(strfmt("line %d: duplicate load id %d", r.line, d.id));
                line_of_load[d.id] = r.line;
                c.loads.push_back(d);
            }
        } else if (sec.name == "interface") {
            for (const auto& r : sec.records) {
                Interface f;
                f.id = (int)tab::as_int(r, 0, "interface id");
                f.limit_base = tab::as_real(r, 1, "interface base limit");
                f.limit_ctg = tab::as_real(r, 2, "interface ctg limit");
                int n = (int)tab::as_int(r, 3, "member count");
                if (n <= 0 || r.fields.size() != 4 + 2 * (size_t)n)
                    throw Error(strfmt("line %d: interface expects %d member pairs", r.line, n));
                for (int i = 0; i < n; ++i) {
                    InterfaceMember m;
                    m.branch_id = (int)tab::as_int(r, 4 + 2 * i, "member branch");
                    m.sign = (int)tab::as_int(r, 5 + 2 * i, "member sign");
                    f.members.push_back(m);
                }
                c.interfaces.push_back(f);
            }
        } else if (sec.name == "interface_limit") {
            for (const auto& r : sec.records) {
                int fid = (int)tab::as_int(r, 0, "interface id");
                auto it = std::find_if(c.interfaces.begin(), c.interfaces.end(),
                                       [&](const Interface& f) { return f.id == fid; });
                if (it == c.interfaces.end())
                    throw Error(strfmt("line %d: limit for unknown interface %d", r.line, fid));
                std::string key = tab::as_str(r, 1, "ctg kind") + ":" +
                                  tab::as_str(r, 2, "ctg element");
                it->ctg_limits[key] = tab::as_real(r, 3, "limit");
            }
        } else {
            throw Error(strfmt("unknown section [%s]", sec.name.c_str()));
        }
    }

    // Cross-reference checks with source line numbers before full validation.
    for (size_t i = 0; i < c.branches.size(); ++i) {
        const Branch& k = c.branches[i];
        int line = line_of_branch[k.id];
        if (!line_of_bus.count(k.from_bus))
            throw Error(strfmt("line %d: branch %d: unknown bus %d", line, k.id, k.from_bus));
        if (!line_of_bus.count(k.to_bus))
            throw Error(strfmt("line %d: branch %d: unknown bus %d", line, k.id, k.to_bus));
    }
    for (const auto& g : c.gens)
        if (!line_of_bus.count(g.bus))
            throw Error(strfmt("line %d: gen %d: unknown bus %d", line_of_gen[g.id], g.id, g.bus));
    for (const auto& d : c.loads)
        if (!line_of_bus.count(d.bus))
            throw Error(strfmt("line %d: load %d: unknown bus %d", line_of_load[d.id], d.id, d.bus));

    c.finalize();
    return c;
}

std::string serialize_case(const Case& c) {
    tab::Document doc;
    auto& meta = doc.add("meta");
    meta.records.push_back({0, {"base_mva", round_trip_str(c.base_mva)}});
    if (!c.name.empty()) meta.records.push_back({0, {"name", c.name}});
    auto& bus = doc.add("bus");
    for (const auto& b : c.buses)
        bus.records.push_back(
            {0, {std::to_string(b.id), round_trip_str(b.base_kv), b.is_reference ? "1" : "0"}});
    auto& br = doc.add("branch");
    for (const auto& k : c.branches)
        br.records.push_back({0,
                              {std::to_string(k.id), std::to_string(k.from_bus),
                               std::to_string(k.to_bus), round_trip_str(k.x),
                               round_trip_str(k.alpha), round_trip_str(k.rate_a),
                               round_trip_str(k.rate_c), k.in_service ? "1" : "0",
                               round_trip_str(k.r), round_trip_str(k.b_charge)}});
    auto& gen = doc.add("gen");
    auto& gencost = doc.add("gencost");
    for (const auto& g : c.gens) {
        gen.records.push_back({0,
                               {std::to_string(g.id), std::to_string(g.bus),
                                round_trip_str(g.p_min), round_trip_str(g.p_max),
                                round_trip_str(g.p0), round_trip_str(g.energy_ramp),
                                round_trip_str(g.spin_ramp), round_trip_str(g.reserve_price),
                                g.dispatchable ? "1" : "0", round_trip_str(g.v_set)}});
        if (g.blocks.empty() && g.slope_pts.empty() && g.econ_min == 0 && g.no_load_price == 0)
            continue;
        tab::Record r;
        bool block = g.curve_kind == CurveKind::Block;
        size_t nseg = block ? g.blocks.size() : g.slope_pts.size();
        r.fields = {std::to_string(g.id), block ? "block" : "slope", round_trip_str(g.econ_min),
                    round_trip_str(g.no_load_price), std::to_string(nseg)};
        if (block)
            for (const auto& s : g.blocks) {
                r.fields.push_back(round_trip_str(s.breadth));
                r.fields.push_back(round_trip_str(s.price));
            }
        else
            for (const auto& s : g.slope_pts) {
                r.fields.push_back(round_trip_str(s.mw));
                r.fields.push_back(round_trip_str(s.price));
            }
        gencost.records.push_back(std::move(r));
    }
    auto& load = doc.add("load");
    for (const auto& d : c.loads)
        load.records.push_back({0,
                                {std::to_string(d.id), std::to_string(d.bus), round_trip_str(d.p),
                                 round_trip_str(d.p0), load_kind_str(d.kind),
                                 round_trip_str(d.q)}});
    if (!c.interfaces.empty()) {
        auto& ifc = doc.add("interface");
        for (const auto& f : c.interfaces) {
            tab::Record r;
            r.fields = {std::to_string(f.id), round_trip_str(f.limit_base),
                        round_trip_str(f.limit_ctg), std::to_string(f.members.size())};
            for (const auto& m : f.members) {
                r.fields.push_back(std::to_string(m.branch_id));
                r.fields.push_back(std::to_string(m.sign));
            }
            ifc.records.push_back(std::move(r));
        }
        bool any_override = false;
        for (const auto& f : c.interfaces) any_override |= !f.ctg_limits.empty();
        if (any_override) {
            auto& sec = doc.add("interface_limit");
            for (const auto& f : c.interfaces) {
                std::vector<std::pair<std::string, double>> sorted(f.ctg_limits.begin(),
                                                                   f.ctg_limits.end());
                std::sort(sorted.begin(), sorted.end());
                for (const auto& [key, lim] : sorted) {
                    auto colon = key.find(':');
                    sec.records.push_back({0,
                                           {std::to_string(f.id), key.substr(0, colon),
                                            key.substr(colon + 1), round_trip_str(lim)}});
                }
            }
        }
    }
    return tab::write(doc);
}

Case losses_to_virtual_loads(const Case& c, const acpf::AcSolution& ac) {
    if (!ac.converged) throw Error("losses_to_virtual_loads: AC solution is unsolved");
    if (ac.branch.size() != c.branches.size())
        throw Error("losses_to_virtual_loads: AC solution does not match the case");
    Case out = c;
    int next_id = 0;
    for (const auto& d : c.loads) next_id = std::max(next_id, d.id);
    for (size_t k = 0; k < c.branches.size(); ++k) {
        if (!c.branches[k].in_service) continue;
        double loss = ac.branch[k].loss_mw;
        if (loss == 0.0) continue;
        for (int bus : {c.branches[k].from_bus, c.branches[k].to_bus}) {
            Load v;
            v.id = ++next_id;
            v.bus = bus;
            v.p = v.p0 = loss / 2.0;
            v.kind = LoadKind::Virtual;
            out.loads.push_back(v);
        }
    }
    out.finalize();
    return out;
}

Generator linearize_slope_curve(const Generator& g, double price_increment) {
    if (g.curve_kind != CurveKind::Slope) return g;
    if (price_increment <= 0) throw Error("linearize_slope_curve: price increment must be positive");
    Generator out = g;
    out.curve_kind = CurveKind::Block;
    out.blocks.clear();
    out.slope_pts.clear();
    double a = g.econ_min, ca = g.no_load_price;
    for (const auto& pt : g.slope_pts) {
        double width = pt.mw - a, cb = pt.price;
        if (cb < ca - kEps)
            throw Error(strfmt("gen %d: non-convex offer (decreasing slope prices)", g.id));
        long n = std::max(1L, std::lround((cb - ca) / price_increment));
        double ds = width / (double)n;
        for (long i = 1; i <= n; ++i)
            out.blocks.push_back({ds, ca + ((double)i - 0.5) * (cb - ca) / (double)n});
        a = pt.mw;
        ca = cb;
    }
    return out;
}

}  // namespace ems
