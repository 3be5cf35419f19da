#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "crashgraph/energy.hpp"
#include "crashgraph/errors.hpp"
#include "crashgraph/graph.hpp"

namespace crashgraph {

// Timing of a vertex on the segmented timeline: parts and components start
// absorbing at t_i, a segment vertex stands at the end of its time slice.
inline double vertex_timing(const Vertex& v) {
    if (v.kind == VertexKind::Segment) return v.seg->t_end;
    if (!v.features)
        throw MissingTiming("vertex vid " + std::to_string(v.vid) + " has no timing features");
    return v.features->t_i;
}

// Split every vertex's absorption interval [t_i, t_n] at the initial absorption
// times of its successors. Each interior cut adds one segment vertex, plus one
// terminal segment ending at t_n for the total absorption; the vertex chains
// through them in time order. Successors re-attach at the segment standing at
// their own t_i (directly at the vertex when they start no later than it, at
// the terminal when they start after t_n), and the original edges are deleted.
// Every edge m->n then carries s_t = max(0, timing(n) - timing(m)).
inline StructureGraph segment_graph(const StructureGraph& input) {
    if (input.segmented) throw ConfigError("segment_graph: graph is already segmented");
    for (const Vertex& v : input.vertices) {
        if (!v.features)
            throw MissingTiming("vertex vid " + std::to_string(v.vid) +
                                " has no timing features");
        if (v.features->t_n < v.features->t_i)
            throw MissingTiming("vertex vid " + std::to_string(v.vid) + " has t_n < t_i");
    }

    StructureGraph g;
    g.sim_id = input.sim_id;
    g.method = input.method;
    g.segmented = true;
    g.impact_direction = input.impact_direction;
    g.vertices = input.vertices;

    const Adjacency adj = make_adjacency(input);
    std::vector<Edge> edges;

    for (const Vertex& j : input.vertices) {
        const double t_i = j.features->t_i;
        const double t_n = j.features->t_n;

        // Interior cuts from the successors' initial absorption times.
        std::set<double> cut_set;
        for (int ei : adj.out[j.vid]) {
            const double t_s = input.vertices[input.edges[ei].dst].features->t_i;
            if (t_s > t_i && t_s < t_n) cut_set.insert(t_s);
        }
        std::vector<double> cuts(cut_set.begin(), cut_set.end());

        // Chain of segment vertices; a degenerate interval gets none.
        std::vector<int> chain; // vids, starting with j itself
        chain.push_back(j.vid);
        if (t_n > t_i) {
            std::vector<double> bounds;
            bounds.push_back(t_i);
            bounds.insert(bounds.end(), cuts.begin(), cuts.end());
            bounds.push_back(t_n);
            for (std::size_t k = 1; k < bounds.size(); ++k) {
                Vertex s;
                s.vid = static_cast<int>(g.vertices.size());
                s.kind = VertexKind::Segment;
                s.name = j.name + "#s" + std::to_string(k);
                s.center = j.center;
                s.seg = SegmentInfo{j.vid, static_cast<int>(k), bounds[k - 1], bounds[k]};
                g.vertices.push_back(s);
                chain.push_back(s.vid);
            }
            for (std::size_t k = 1; k < chain.size(); ++k) {
                Edge e;
                e.src = chain[k - 1];
                e.dst = chain[k];
                e.provenance = EdgeProvenance::SegmentLink;
                edges.push_back(e);
            }
        }

        // Re-attach each successor at the segment standing at its t_i.
        for (int ei : adj.out[j.vid]) {
            const Edge& old = input.edges[ei];
            const double t_s = input.vertices[old.dst].features->t_i;
            int src = j.vid;
            if (t_s > t_i && t_s < t_n) {
                const std::size_t pos = static_cast<std::size_t>(
                    std::lower_bound(cuts.begin(), cuts.end(), t_s) - cuts.begin());
                src = chain[pos + 1];
            } else if (t_s >= t_n && chain.size() > 1) {
                src = chain.back();
            }
            Edge e;
            e.src = src;
            e.dst = old.dst;
            e.provenance = old.provenance;
            edges.push_back(e);
        }
    }

    for (Edge& e : edges) {
        const double dt = vertex_timing(g.vertices[e.dst]) - vertex_timing(g.vertices[e.src]);
        e.s_t = std::max(0.0, dt);
        e.zero_duration = (*e.s_t == 0.0);
    }
    g.edges = std::move(edges);
    g.sort_edges();
    validate_structure(g);
    return g;
}

// Energy absorption efficiency P_e = flow / duration per edge; instantaneous
// relays (s_t = 0) get 0 and keep their zero-duration flag.
inline StructureGraph attach_spe(const StructureGraph& segmented, const FlowReport& flows) {
    if (!segmented.segmented) throw ConfigError("attach_spe: expected a segmented graph");
    if (flows.edge_flows.size() != segmented.edges.size())
        throw MissingWeight("attach_spe: flow report does not match the graph's edges");
    StructureGraph g = segmented;
    for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
        Edge& e = g.edges[ei];
        if (!e.s_t) throw MissingWeight("attach_spe: edge " + std::to_string(e.src) + "->" +
                                        std::to_string(e.dst) + " has no s_t weight");
        e.f_ie = flows.edge_flows[ei];
        if (*e.s_t > 0.0) {
            e.s_pe = flows.edge_flows[ei] / *e.s_t;
        } else {
            e.s_pe = 0.0;
            e.zero_duration = true;
        }
    }
    return g;
}

} // namespace crashgraph
