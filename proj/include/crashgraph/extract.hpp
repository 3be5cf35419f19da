#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "crashgraph/bundle.hpp"
#include "crashgraph/errors.hpp"
#include "crashgraph/geometry.hpp"
#include "crashgraph/graph.hpp"

namespace crashgraph {

struct ExtractionConfig {
    double tlv = 10.0; // max box gap (length units) at which two components connect
    Method method = Method::Mpbg;

    void validate() const {
        if (tlv < 0.0) throw ConfigError("tlv must be >= 0");
    }
};

// Direct an edge between two located vertices: along the positive inner product
// with the impact direction, and by ascending id when the projection ties so
// laterally adjacent pairs still get a deterministic edge.
inline std::pair<int, int> orient(const Vec3& a_center, int a_id, const Vec3& b_center,
                                  int b_id, const Vec3& x) {
    const double d = (b_center - a_center).dot(x);
    if (d > 0.0) return {a_id, b_id};
    if (d < 0.0) return {b_id, a_id};
    return a_id < b_id ? std::make_pair(a_id, b_id) : std::make_pair(b_id, a_id);
}

struct AdjacencyResult {
    std::vector<std::pair<int, int>> pairs; // directed (src cid, dst cid)
    bool no_adjacency = false;
};

// Connect every pair of components whose box gap is below the threshold,
// sweeping them sorted along the impact direction. Duplicate free.
inline AdjacencyResult component_adjacency(const std::vector<Component>& components,
                                           const Vec3& impact_direction,
                                           const ExtractionConfig& cfg) {
    cfg.validate();
    if (components.empty()) throw ValidationError("component_adjacency: no components");

    std::vector<int> order(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double pa = components[a].center.dot(impact_direction);
        const double pb = components[b].center.dot(impact_direction);
        if (pa != pb) return pa < pb;
        return components[a].cid < components[b].cid;
    });

    AdjacencyResult res;
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const Component& a = components[order[i]];
            const Component& b = components[order[j]];
            if (gap_distance(a.box, b.box) >= cfg.tlv) continue;
            auto e = orient(a.center, a.cid, b.center, b.cid, impact_direction);
            if (seen.insert(e).second) res.pairs.push_back(e);
        }
    }
    std::sort(res.pairs.begin(), res.pairs.end());
    res.no_adjacency = res.pairs.empty();
    return res;
}

namespace detail {

inline const PartRecord& part_by_pid(const SimulationBundle& b, int pid) {
    const PartRecord* p = b.find_part(pid);
    if (!p) throw ValidationError("component names unknown pid " + std::to_string(pid));
    return *p;
}

// Largest-volume member, pid ties toward the smaller pid.
inline int representative_pid(const SimulationBundle& b, const Component& c) {
    int best = c.member_pids.front();
    double best_vol = part_by_pid(b, best).box.volume();
    for (int pid : c.member_pids) {
        const double v = part_by_pid(b, pid).box.volume();
        if (v > best_vol || (v == best_vol && pid < best)) {
            best = pid;
            best_vol = v;
        }
    }
    return best;
}

inline void add_unique_edge(StructureGraph& g, std::set<std::pair<int, int>>& seen, int src,
                            int dst, EdgeProvenance prov) {
    if (!seen.insert({src, dst}).second) return;
    Edge e;
    e.src = src;
    e.dst = dst;
    e.provenance = prov;
    g.edges.push_back(e);
}

} // namespace detail

// Component-based graph: one vertex per component at its box center; edges from
// component adjacency. Features are aggregated over the member parts later.
inline StructureGraph build_cbg(const SimulationBundle& bundle,
                                const std::vector<Component>& components,
                                const ExtractionConfig& cfg) {
    StructureGraph g;
    g.sim_id = bundle.sim_id;
    g.method = Method::Cbg;
    g.impact_direction = bundle.impact_direction;

    for (const Component& c : components) {
        Vertex v;
        v.vid = c.cid;
        v.kind = VertexKind::ComponentNode;
        v.cid = c.cid;
        v.member_pids = c.member_pids;
        v.center = c.center;
        v.name = detail::part_by_pid(bundle, detail::representative_pid(bundle, c)).name;
        g.vertices.push_back(std::move(v));
    }

    AdjacencyResult adj = component_adjacency(components, bundle.impact_direction, cfg);
    if (adj.no_adjacency) g.warnings.push_back("NoAdjacency: graph has no edges");
    std::set<std::pair<int, int>> seen;
    for (auto [src, dst] : adj.pairs)
        detail::add_unique_edge(g, seen, src, dst, EdgeProvenance::ComponentLink);

    g.sort_edges();
    validate_structure(g);
    return g;
}

namespace detail {

// Shared part-vertex scaffolding for the two part-based graphs. Adds one vertex
// per part in bundle order plus the intra-component star onto each
// representative.
struct PartGraphBase {
    StructureGraph g;
    std::vector<int> vid_of_pid_key; // sorted pids
    std::vector<int> vid_of_pid_val;
    std::vector<int> rep_of_component;
    AdjacencyResult adj;
    std::set<std::pair<int, int>> seen;

    int vid_of(int pid) const {
        auto it = std::lower_bound(vid_of_pid_key.begin(), vid_of_pid_key.end(), pid);
        return vid_of_pid_val[static_cast<std::size_t>(it - vid_of_pid_key.begin())];
    }
};

inline PartGraphBase build_part_base(const SimulationBundle& bundle,
                                     const std::vector<Component>& components,
                                     const ExtractionConfig& cfg) {
    PartGraphBase base;
    StructureGraph& g = base.g;
    g.sim_id = bundle.sim_id;
    g.impact_direction = bundle.impact_direction;

    for (std::size_t i = 0; i < bundle.parts.size(); ++i) {
        const PartRecord& p = bundle.parts[i];
        Vertex v;
        v.vid = static_cast<int>(i);
        v.kind = VertexKind::Part;
        v.pid = p.pid;
        v.name = p.name;
        v.center = p.box.center();
        g.vertices.push_back(std::move(v));
    }
    {
        std::vector<std::pair<int, int>> m;
        for (std::size_t i = 0; i < bundle.parts.size(); ++i)
            m.emplace_back(bundle.parts[i].pid, static_cast<int>(i));
        std::sort(m.begin(), m.end());
        for (auto [pid, vid] : m) {
            base.vid_of_pid_key.push_back(pid);
            base.vid_of_pid_val.push_back(vid);
        }
    }

    base.rep_of_component.resize(components.size());
    for (const Component& c : components)
        base.rep_of_component[c.cid] = representative_pid(bundle, c);

    base.adj = component_adjacency(components, bundle.impact_direction, cfg);
    if (base.adj.no_adjacency)
        g.warnings.push_back("NoAdjacency: graph has no component edges");

    // Star inside each component: every other member connects to the representative.
    for (const Component& c : components) {
        const int rep = base.rep_of_component[c.cid];
        const Vertex& vr = g.vertices[base.vid_of(rep)];
        for (int pid : c.member_pids) {
            if (pid == rep) continue;
            const Vertex& vm = g.vertices[base.vid_of(pid)];
            auto [s, d] = orient(vm.center, vm.vid, vr.center, vr.vid, g.impact_direction);
            add_unique_edge(g, base.seen, s, d, EdgeProvenance::IntraComponent);
        }
    }
    return base;
}

} // namespace detail

// Single-part-based graph: parts are the vertices; each component's incident
// component edges are re-anchored at its largest member part.
inline StructureGraph build_spbg(const SimulationBundle& bundle,
                                 const std::vector<Component>& components,
                                 const ExtractionConfig& cfg) {
    detail::PartGraphBase base = detail::build_part_base(bundle, components, cfg);
    StructureGraph& g = base.g;
    g.method = Method::Spbg;

    for (auto [ca, cb] : base.adj.pairs) {
        const Vertex& va = g.vertices[base.vid_of(base.rep_of_component[ca])];
        const Vertex& vb = g.vertices[base.vid_of(base.rep_of_component[cb])];
        auto [s, d] = orient(va.center, va.vid, vb.center, vb.vid, g.impact_direction);
        detail::add_unique_edge(g, base.seen, s, d, EdgeProvenance::ComponentLink);
    }

    g.sort_edges();
    validate_structure(g);
    return g;
}

// Multi-part-based graph: the sPBG edge set plus, for every component edge, a
// branch to every partial-overlap representative of either component. Parts
// merged by full overlap keep only their sPBG attachment.
inline StructureGraph build_mpbg(const SimulationBundle& bundle,
                                 const std::vector<Component>& components,
                                 const ExtractionConfig& cfg) {
    detail::PartGraphBase base = detail::build_part_base(bundle, components, cfg);
    StructureGraph& g = base.g;
    g.method = Method::Mpbg;

    // Representatives for branching: the largest part plus all partial-merge
    // participants of the component.
    std::vector<std::vector<int>> reps(components.size());
    for (const Component& c : components) {
        std::vector<int> r = partial_participants(c);
        r.push_back(base.rep_of_component[c.cid]);
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        reps[c.cid] = std::move(r);
    }

    for (auto [ca, cb] : base.adj.pairs) {
        for (int pa : reps[ca]) {
            for (int pb : reps[cb]) {
                const Vertex& va = g.vertices[base.vid_of(pa)];
                const Vertex& vb = g.vertices[base.vid_of(pb)];
                auto [s, d] = orient(va.center, va.vid, vb.center, vb.vid, g.impact_direction);
                detail::add_unique_edge(g, base.seen, s, d, EdgeProvenance::ComponentLink);
            }
        }
    }

    g.sort_edges();
    validate_structure(g);
    return g;
}

inline StructureGraph build_graph(const SimulationBundle& bundle,
                                  const std::vector<Component>& components,
                                  const ExtractionConfig& cfg) {
    switch (cfg.method) {
        case Method::Cbg: return build_cbg(bundle, components, cfg);
        case Method::Spbg: return build_spbg(bundle, components, cfg);
        case Method::Mpbg: return build_mpbg(bundle, components, cfg);
    }
    throw ConfigError("unknown extraction method");
}

} // namespace crashgraph
