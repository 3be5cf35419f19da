#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "crashgraph/bundle.hpp"
#include "crashgraph/errors.hpp"
#include "crashgraph/graph.hpp"

namespace crashgraph {

struct FeatureConfig {
    double alpha = 0.02; // onset threshold, fraction of ie_max
    double beta = 0.95;  // saturation threshold, fraction of ie_max

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0) || alpha > beta)
            throw ConfigError("feature thresholds need 0 < alpha <= beta < 1");
    }
};

namespace detail {

// First time the curve reaches `thr`, linearly interpolated between samples.
inline double first_crossing(const EnergyCurve& c, double thr) {
    for (std::size_t k = 0; k < c.values.size(); ++k) {
        if (c.values[k] >= thr) {
            if (k == 0) return c.times[0];
            const double v0 = c.values[k - 1], v1 = c.values[k];
            const double t0 = c.times[k - 1], t1 = c.times[k];
            if (v1 <= v0) return t1;
            return t0 + (thr - v0) / (v1 - v0) * (t1 - t0);
        }
    }
    return c.times.back();
}

} // namespace detail

// ie_max together with the times at which absorption passes alpha and beta of
// it. A flat zero curve degenerates to t_i = t_n = first sample time.
inline AbsorptionFeatures extract_features(const EnergyCurve& curve,
                                           const FeatureConfig& cfg = {}) {
    cfg.validate();
    AbsorptionFeatures f;
    f.ie_max = curve.max_value();
    if (f.ie_max <= 0.0) {
        f.t_i = f.t_n = curve.times.front();
        return f;
    }
    f.t_i = detail::first_crossing(curve, cfg.alpha * f.ie_max);
    f.t_n = detail::first_crossing(curve, cfg.beta * f.ie_max);
    if (f.t_n < f.t_i) f.t_n = f.t_i;
    return f;
}

// Component feature roll-up: energies add, the absorption window spans the members.
inline AbsorptionFeatures aggregate(const Component& component,
                                    const std::map<int, AbsorptionFeatures>& per_pid) {
    AbsorptionFeatures out;
    bool first = true;
    for (int pid : component.member_pids) {
        auto it = per_pid.find(pid);
        if (it == per_pid.end())
            throw MissingFeature("aggregate: no features for pid " + std::to_string(pid));
        const AbsorptionFeatures& f = it->second;
        out.ie_max += f.ie_max;
        if (first) {
            out.t_i = f.t_i;
            out.t_n = f.t_n;
            first = false;
        } else {
            out.t_i = std::min(out.t_i, f.t_i);
            out.t_n = std::max(out.t_n, f.t_n);
        }
    }
    return out;
}

// Fill vertex features from the bundle curves: part vertices take their own
// part's features, component vertices the aggregate over their members.
inline void attach_features(StructureGraph& g, const SimulationBundle& bundle,
                            const std::vector<Component>& components,
                            const FeatureConfig& cfg = {}) {
    std::map<int, AbsorptionFeatures> per_pid;
    for (const PartRecord& p : bundle.parts) per_pid[p.pid] = extract_features(p.ie_curve, cfg);

    for (Vertex& v : g.vertices) {
        switch (v.kind) {
            case VertexKind::Part: {
                auto it = per_pid.find(*v.pid);
                if (it == per_pid.end())
                    throw MissingFeature("vertex vid " + std::to_string(v.vid) +
                                         ": bundle has no part pid " + std::to_string(*v.pid));
                v.features = it->second;
                break;
            }
            case VertexKind::ComponentNode: {
                if (!v.cid || static_cast<std::size_t>(*v.cid) >= components.size())
                    throw MissingFeature("component vertex vid " + std::to_string(v.vid) +
                                         " lacks a component id");
                v.features = aggregate(components[*v.cid], per_pid);
                break;
            }
            case VertexKind::Segment:
                break; // segments carry timing, not curve features
        }
    }
}

enum class FlowFeature : std::uint8_t { IeMax, IeDt };

// Per-edge energy flows plus the conservation residual of the balance equations.
struct FlowReport {
    std::vector<double> edge_flows; // aligned with graph.edges
    double rmse = 0.0;
    std::vector<int> excluded_sources;             // vids with in-degree 0
    std::vector<std::pair<int, int>> negative_edges; // flows below zero, kept as-is
};

namespace detail {

inline double flow_feature_value(const Vertex& v, FlowFeature which) {
    if (v.kind == VertexKind::Segment) return 0.0;
    if (!v.features)
        throw MissingFeature("vertex vid " + std::to_string(v.vid) + " has no features");
    if (which == FlowFeature::IeMax) return v.features->ie_max;
    if (!v.features->ie_dt)
        throw MissingFeature("vertex vid " + std::to_string(v.vid) + " has no ie_dt feature");
    return *v.features->ie_dt;
}

} // namespace detail

// Backward sweep of the vertex balance IE_j = inflow(j) - outflow(j): starting
// from the dead ends, a vertex becomes active once all its outflows are known,
// and its total inflow IE_j + outflow is split equally across its in-edges.
// In-degree-0 vertices are where the impact enters; they get no balance
// equation and are reported as excluded sources. The residual over all other
// vertices is returned as an RMSE.
inline FlowReport compute_flow(const StructureGraph& g, FlowFeature which) {
    const std::vector<int> topo = topological_order(g); // throws CyclicGraph
    const Adjacency adj = make_adjacency(g);

    FlowReport rep;
    rep.edge_flows.assign(g.edges.size(), std::numeric_limits<double>::quiet_NaN());

    std::vector<char> activated(g.vertices.size(), 0);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        const int v = *it;
        if (adj.in[v].empty()) {
            rep.excluded_sources.push_back(g.vertices[v].vid);
            continue;
        }
        double inflow = detail::flow_feature_value(g.vertices[v], which);
        for (int ei : adj.out[v]) {
            if (std::isnan(rep.edge_flows[ei]))
                throw UnreachedVertex("flow sweep reached vid " + std::to_string(v) +
                                      " before its outflows were known");
            inflow += rep.edge_flows[ei];
        }
        const double per_edge = inflow / static_cast<double>(adj.in[v].size());
        for (int ei : adj.in[v]) rep.edge_flows[ei] = per_edge;
        activated[v] = 1;
    }
    std::sort(rep.excluded_sources.begin(), rep.excluded_sources.end());

    for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
        if (std::isnan(rep.edge_flows[ei]))
            throw UnreachedVertex("flow sweep left edge " + std::to_string(g.edges[ei].src) +
                                  "->" + std::to_string(g.edges[ei].dst) + " unassigned");
        if (rep.edge_flows[ei] < 0.0)
            rep.negative_edges.emplace_back(g.edges[ei].src, g.edges[ei].dst);
    }

    // RMSE of the balance residuals over the activated (non-source) vertices.
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        if (!activated[v]) continue;
        double net = 0.0;
        for (int ei : adj.in[v]) net += rep.edge_flows[ei];
        for (int ei : adj.out[v]) net -= rep.edge_flows[ei];
        const double r = detail::flow_feature_value(g.vertices[v], which) - net;
        sq += r * r;
        ++n;
    }
    rep.rmse = n ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
    return rep;
}

// Store a flow result on the edges as f_ie or f_iedt.
inline void apply_flow(StructureGraph& g, const FlowReport& rep, WeightKind kind) {
    if (kind != WeightKind::FIe && kind != WeightKind::FIeDt)
        throw ConfigError("apply_flow stores f_ie or f_iedt only");
    if (rep.edge_flows.size() != g.edges.size())
        throw MissingWeight("flow report does not match the graph's edges");
    for (std::size_t ei = 0; ei < g.edges.size(); ++ei)
        g.edges[ei].set_weight(kind, rep.edge_flows[ei]);
}

// Time-weighted energy feature: the area under the IE curve split into the
// unload (0), absorption (triangle) and saturated (rectangle) zones.
inline double combine_ie_dt(const AbsorptionFeatures& f, double t_i_min, double t_n_max) {
    if (!(t_i_min <= f.t_i && f.t_i <= f.t_n && f.t_n <= t_n_max))
        throw OrderingViolation("combine_ie_dt: need t_i_min <= t_i <= t_n <= t_n_max");
    const double a2 = f.ie_max * (f.t_n - f.t_i) * 0.5;
    const double a3 = f.ie_max * (t_n_max - f.t_n);
    return a2 + a3;
}

// Absorption-time extremes over the graph's featured vertices.
inline std::pair<double, double> global_time_bounds(const StructureGraph& g) {
    bool first = true;
    double t_i_min = 0.0, t_n_max = 0.0;
    for (const Vertex& v : g.vertices) {
        if (v.kind == VertexKind::Segment || !v.features) continue;
        if (first) {
            t_i_min = v.features->t_i;
            t_n_max = v.features->t_n;
            first = false;
        } else {
            t_i_min = std::min(t_i_min, v.features->t_i);
            t_n_max = std::max(t_n_max, v.features->t_n);
        }
    }
    if (first) throw MissingFeature("global_time_bounds: no featured vertices");
    return {t_i_min, t_n_max};
}

inline void set_ie_dt(StructureGraph& g, double t_i_min, double t_n_max) {
    for (Vertex& v : g.vertices) {
        if (v.kind == VertexKind::Segment || !v.features) continue;
        v.features->ie_dt = combine_ie_dt(*v.features, t_i_min, t_n_max);
    }
}

} // namespace crashgraph
