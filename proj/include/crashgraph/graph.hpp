#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crashgraph/errors.hpp"
#include "crashgraph/geometry.hpp"

namespace crashgraph {

enum class Method : std::uint8_t { Cbg, Spbg, Mpbg };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::Cbg: return "cbg";
        case Method::Spbg: return "spbg";
        case Method::Mpbg: return "mpbg";
    }
    return "?";
}

inline Method method_from_name(const std::string& s) {
    if (s == "cbg") return Method::Cbg;
    if (s == "spbg") return Method::Spbg;
    if (s == "mpbg") return Method::Mpbg;
    throw ConfigError("unknown method '" + s + "' (expected cbg, spbg or mpbg)");
}

enum class WeightKind : std::uint8_t { FIe, FIeDt, STime, SPe };

inline const char* weight_kind_name(WeightKind k) {
    switch (k) {
        case WeightKind::FIe: return "f_ie";
        case WeightKind::FIeDt: return "f_iedt";
        case WeightKind::STime: return "s_t";
        case WeightKind::SPe: return "s_pe";
    }
    return "?";
}

inline WeightKind weight_kind_from_name(const std::string& s) {
    if (s == "f_ie") return WeightKind::FIe;
    if (s == "f_iedt") return WeightKind::FIeDt;
    if (s == "s_t") return WeightKind::STime;
    if (s == "s_pe") return WeightKind::SPe;
    throw ConfigError("unknown weight kind '" + s + "' (expected f_ie, f_iedt, s_t or s_pe)");
}

enum class VertexKind : std::uint8_t { Part, ComponentNode, Segment };

enum class EdgeProvenance : std::uint8_t { ComponentLink, IntraComponent, SegmentLink };

// Scalar features distilled from one IE curve (or aggregated per component).
struct AbsorptionFeatures {
    double ie_max = 0.0;
    double t_i = 0.0;
    double t_n = 0.0;
    std::optional<double> ie_dt; // time-weighted combination, set on demand

    bool operator==(const AbsorptionFeatures&) const = default;
};

// Extra data carried by segment vertices: which vertex was split, the 1-based
// segment index, and the time slice [t_start, t_end] this segment stands for.
// The segment's own timing (its cut time) is t_end.
struct SegmentInfo {
    int origin_vid = 0;
    int index = 0;
    double t_start = 0.0;
    double t_end = 0.0;

    bool operator==(const SegmentInfo&) const = default;
};

struct Vertex {
    int vid = 0;
    VertexKind kind = VertexKind::Part;
    std::string name;
    Vec3 center;
    std::optional<int> pid;               // Part vertices
    std::optional<int> cid;               // ComponentNode vertices
    std::vector<int> member_pids;         // ComponentNode vertices
    std::optional<AbsorptionFeatures> features;
    std::optional<SegmentInfo> seg;       // Segment vertices

    bool operator==(const Vertex&) const = default;
};

struct Edge {
    int src = 0;
    int dst = 0;
    EdgeProvenance provenance = EdgeProvenance::ComponentLink;
    std::optional<double> f_ie;
    std::optional<double> f_iedt;
    std::optional<double> s_t;
    std::optional<double> s_pe;
    bool zero_duration = false;

    std::optional<double> weight(WeightKind k) const {
        switch (k) {
            case WeightKind::FIe: return f_ie;
            case WeightKind::FIeDt: return f_iedt;
            case WeightKind::STime: return s_t;
            case WeightKind::SPe: return s_pe;
        }
        return std::nullopt;
    }
    void set_weight(WeightKind k, double v) {
        switch (k) {
            case WeightKind::FIe: f_ie = v; break;
            case WeightKind::FIeDt: f_iedt = v; break;
            case WeightKind::STime: s_t = v; break;
            case WeightKind::SPe: s_pe = v; break;
        }
    }

    bool operator==(const Edge&) const = default;
};

// Directed acyclic structure graph. Vertices are stored with vid == index;
// edges are kept sorted by (src, dst) so identical builds serialize identically.
struct StructureGraph {
    std::string sim_id;
    Method method = Method::Cbg;
    bool segmented = false;
    Vec3 impact_direction{1.0, 0.0, 0.0};
    std::vector<Vertex> vertices;
    std::vector<Edge> edges;
    std::vector<std::string> warnings; // not serialized

    bool operator==(const StructureGraph& o) const {
        return sim_id == o.sim_id && method == o.method && segmented == o.segmented &&
               impact_direction == o.impact_direction && vertices == o.vertices &&
               edges == o.edges;
    }

    const Vertex& vertex(int vid) const {
        if (vid < 0 || static_cast<std::size_t>(vid) >= vertices.size() ||
            vertices[vid].vid != vid)
            throw PathNotInGraph("vertex vid " + std::to_string(vid) + " not in graph");
        return vertices[vid];
    }
    bool has_vertex(int vid) const {
        return vid >= 0 && static_cast<std::size_t>(vid) < vertices.size() &&
               vertices[vid].vid == vid;
    }
    bool has_edge(int src, int dst) const {
        return std::any_of(edges.begin(), edges.end(),
                           [&](const Edge& e) { return e.src == src && e.dst == dst; });
    }
    const Edge* find_edge(int src, int dst) const {
        for (const Edge& e : edges)
            if (e.src == src && e.dst == dst) return &e;
        return nullptr;
    }

    // Projection of a vertex center on the impact direction; edges always point
    // from lower to higher (projection, vid) on unsegmented graphs.
    std::pair<double, int> order_key(const Vertex& v) const {
        return {v.center.dot(impact_direction), v.vid};
    }

    void sort_edges() {
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            if (a.src != b.src) return a.src < b.src;
            return a.dst < b.dst;
        });
    }
};

struct Adjacency {
    std::vector<std::vector<int>> out; // vertex index -> edge indices
    std::vector<std::vector<int>> in;
};

inline Adjacency make_adjacency(const StructureGraph& g) {
    Adjacency a;
    a.out.resize(g.vertices.size());
    a.in.resize(g.vertices.size());
    for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
        a.out[g.edges[ei].src].push_back(static_cast<int>(ei));
        a.in[g.edges[ei].dst].push_back(static_cast<int>(ei));
    }
    return a;
}

// Kahn's algorithm; vids out in topological order, smallest vid first among ready
// vertices so the order is deterministic. Throws CyclicGraph on a cycle.
inline std::vector<int> topological_order(const StructureGraph& g) {
    const std::size_t n = g.vertices.size();
    std::vector<int> indeg(n, 0);
    for (const Edge& e : g.edges) ++indeg[e.dst];
    Adjacency adj = make_adjacency(g);

    std::vector<int> ready;
    for (std::size_t v = 0; v < n; ++v)
        if (indeg[v] == 0) ready.push_back(static_cast<int>(v));
    std::sort(ready.begin(), ready.end(), std::greater<int>());

    std::vector<int> order;
    order.reserve(n);
    while (!ready.empty()) {
        int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (int ei : adj.out[v]) {
            int w = g.edges[ei].dst;
            if (--indeg[w] == 0) {
                auto it = std::lower_bound(ready.begin(), ready.end(), w, std::greater<int>());
                ready.insert(it, w);
            }
        }
    }
    if (order.size() != n)
        throw CyclicGraph("graph of sim '" + g.sim_id + "' contains a cycle");
    return order;
}

// Structural invariants: vid == index, no self loops, no duplicate edges,
// acyclic; on unsegmented graphs every edge additionally respects the
// (projection, vid) total order.
inline void validate_structure(const StructureGraph& g) {
    for (std::size_t i = 0; i < g.vertices.size(); ++i)
        if (g.vertices[i].vid != static_cast<int>(i))
            throw ValidationError("graph vertices not numbered 0..n-1");
    std::vector<std::pair<int, int>> seen;
    for (const Edge& e : g.edges) {
        if (!g.has_vertex(e.src) || !g.has_vertex(e.dst))
            throw ValidationError("edge endpoint not in graph");
        if (e.src == e.dst)
            throw ValidationError("self loop on vid " + std::to_string(e.src));
        seen.emplace_back(e.src, e.dst);
        for (auto w : {e.f_ie, e.f_iedt, e.s_t, e.s_pe})
            if (w && !std::isfinite(*w))
                throw ValidationError("non-finite weight on edge " + std::to_string(e.src) +
                                      "->" + std::to_string(e.dst));
        if (!g.segmented &&
            !(g.order_key(g.vertices[e.src]) < g.order_key(g.vertices[e.dst])))
            throw ValidationError("edge " + std::to_string(e.src) + "->" +
                                  std::to_string(e.dst) + " violates the impact-order rule");
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw ValidationError("duplicate edge");
    topological_order(g);
}

} // namespace crashgraph
