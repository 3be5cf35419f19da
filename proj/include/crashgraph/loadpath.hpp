#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crashgraph/bundle.hpp"
#include "crashgraph/energy.hpp"
#include "crashgraph/errors.hpp"
#include "crashgraph/extract.hpp"
#include "crashgraph/graph.hpp"
#include "crashgraph/segmentation.hpp"

namespace crashgraph {

// A detected load-path: the vertex walk, its part-name signature (segment
// vertices collapse onto their origin part) and the accumulated weight.
struct LoadPath {
    std::string sim_id;
    Method method = Method::Mpbg;
    bool segmented = false;
    WeightKind weight_kind = WeightKind::FIe;
    std::vector<int> vertex_sequence;
    std::vector<std::string> signature;
    double total_weight = 0.0;
    bool symmetric = false; // weight ties decided the side (mirror-symmetric input)

    bool operator==(const LoadPath&) const = default;
};

// Name of the part a path step stands for; segments report their origin.
inline const std::string& path_step_name(const StructureGraph& g, int vid) {
    const Vertex& v = g.vertex(vid);
    if (v.kind == VertexKind::Segment) return g.vertex(v.seg->origin_vid).name;
    return v.name;
}

inline std::vector<std::string> path_signature(const StructureGraph& g,
                                               const std::vector<int>& sequence) {
    std::vector<std::string> sig;
    for (int vid : sequence) {
        const std::string& n = path_step_name(g, vid);
        if (sig.empty() || sig.back() != n) sig.push_back(n);
    }
    return sig;
}

// Maximum-total-weight path in the DAG by dynamic programming over the
// topological order. Among equal-weight paths the lexicographically smallest
// vid sequence wins, so a path never tacks on zero-gain edges.
inline LoadPath longest_path(const StructureGraph& g, WeightKind kind) {
    if (g.vertices.empty()) throw ValidationError("longest_path: empty graph");
    for (const Edge& e : g.edges)
        if (!e.weight(kind))
            throw MissingWeight(std::string("edge ") + std::to_string(e.src) + "->" +
                                std::to_string(e.dst) + " has no " + weight_kind_name(kind) +
                                " weight");

    const std::vector<int> topo = topological_order(g); // throws CyclicGraph
    const Adjacency adj = make_adjacency(g);

    // best[v]: heaviest path starting at v (stopping at v counts as 0).
    std::vector<double> best(g.vertices.size(), 0.0);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        const int v = *it;
        for (int ei : adj.out[v])
            best[v] = std::max(best[v], *g.edges[ei].weight(kind) + best[g.edges[ei].dst]);
    }

    int start = 0;
    for (std::size_t v = 1; v < g.vertices.size(); ++v)
        if (best[v] > best[start]) start = static_cast<int>(v);
    // smallest starting vid among ties
    for (std::size_t v = 0; v < g.vertices.size(); ++v)
        if (best[v] == best[start]) {
            start = static_cast<int>(v);
            break;
        }

    LoadPath p;
    p.sim_id = g.sim_id;
    p.method = g.method;
    p.segmented = g.segmented;
    p.weight_kind = kind;
    p.total_weight = best[start];

    int v = start;
    p.vertex_sequence.push_back(v);
    while (best[v] > 0.0) {
        int next = -1;
        for (int ei : adj.out[v]) {
            const Edge& e = g.edges[ei];
            if (*e.weight(kind) + best[e.dst] == best[v] && (next < 0 || e.dst < next))
                next = e.dst;
        }
        if (next < 0)
            throw UnreachedVertex("longest_path: no continuation matches the optimum");
        p.vertex_sequence.push_back(next);
        v = next;
    }
    p.signature = path_signature(g, p.vertex_sequence);
    return p;
}

struct DetectConfig {
    GroupingConfig grouping;
    ExtractionConfig extraction;
    FeatureConfig feature;
};

struct DetectResult {
    StructureGraph graph; // the graph the path lives in (segmented for s_t / s_pe)
    LoadPath path;
    std::optional<FlowReport> flow;
};

namespace detail {

template <class Fn>
auto pipeline_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw PipelineError(stage, e.what());
    }
}

} // namespace detail

// End-to-end: group parts, extract the requested graph, attach features, derive
// the requested edge weight (segmenting for the time-based kinds) and return
// the weighted longest path.
inline DetectResult detect(const SimulationBundle& bundle, Method method, WeightKind kind,
                           const DetectConfig& cfg = {}) {
    DetectConfig c = cfg;
    c.extraction.method = method;

    const auto components = detail::pipeline_stage(
        "group", [&] { return group_components(bundle.parts, c.grouping); });
    StructureGraph graph = detail::pipeline_stage(
        "extract", [&] { return build_graph(bundle, components, c.extraction); });
    detail::pipeline_stage("features", [&] {
        attach_features(graph, bundle, components, c.feature);
        return 0;
    });

    DetectResult res;
    switch (kind) {
        case WeightKind::FIe: {
            res.flow = detail::pipeline_stage("flow", [&] { return compute_flow(graph, FlowFeature::IeMax); });
            apply_flow(graph, *res.flow, WeightKind::FIe);
            res.graph = std::move(graph);
            break;
        }
        case WeightKind::FIeDt: {
            detail::pipeline_stage("features", [&] {
                auto [t_i_min, t_n_max] = global_time_bounds(graph);
                set_ie_dt(graph, t_i_min, t_n_max);
                return 0;
            });
            res.flow = detail::pipeline_stage("flow", [&] { return compute_flow(graph, FlowFeature::IeDt); });
            apply_flow(graph, *res.flow, WeightKind::FIeDt);
            res.graph = std::move(graph);
            break;
        }
        case WeightKind::STime: {
            res.graph = detail::pipeline_stage("segment", [&] { return segment_graph(graph); });
            break;
        }
        case WeightKind::SPe: {
            StructureGraph seg = detail::pipeline_stage("segment", [&] { return segment_graph(graph); });
            res.flow = detail::pipeline_stage("flow", [&] { return compute_flow(seg, FlowFeature::IeMax); });
            res.graph = detail::pipeline_stage("segment", [&] { return attach_spe(seg, *res.flow); });
            break;
        }
    }

    res.path = detail::pipeline_stage("path", [&] { return longest_path(res.graph, kind); });
    res.path.symmetric = detail::pipeline_stage("path", [&] {
        if (!bundle.symmetry_map && derive_symmetry_map(bundle).empty()) return false;
        return mirror_bundle(bundle) == bundle;
    });
    return res;
}

// One group of simulations whose load-paths match exactly.
struct Cluster {
    std::string label;
    std::vector<std::string> signature;
    std::vector<std::string> member_sim_ids;
    int n_left = 0;
    int n_right = 0;
    std::string paired_with; // label of the mirrored cluster, if any
};

struct ClusterReport {
    std::vector<Cluster> clusters;
    std::vector<std::pair<std::string, std::string>> pairing;
};

// Mirror map on part names: (left name, right name) per symmetric pair.
using NameMirror = std::vector<std::pair<std::string, std::string>>;

inline NameMirror name_mirror_from_bundle(const SimulationBundle& b) {
    const auto pairs = b.symmetry_map ? *b.symmetry_map : derive_symmetry_map(b);
    NameMirror m;
    for (auto [l, r] : pairs) {
        const PartRecord* pl = b.find_part(l);
        const PartRecord* pr = b.find_part(r);
        if (!pl || !pr) throw ValidationError("symmetry_map names unknown pid");
        m.emplace_back(pl->name, pr->name);
    }
    return m;
}

namespace detail {

inline std::string cluster_label(std::size_t i) {
    std::string s;
    do {
        s.insert(s.begin(), static_cast<char>('A' + i % 26));
        i = i / 26;
    } while (i-- > 0);
    return s;
}

inline std::vector<std::string> mirror_signature(const std::vector<std::string>& sig,
                                                 const NameMirror& mirror) {
    std::vector<std::string> out;
    out.reserve(sig.size());
    for (const std::string& n : sig) {
        std::string m = n;
        for (const auto& [l, r] : mirror) {
            if (n == l) { m = r; break; }
            if (n == r) { m = l; break; }
        }
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace detail

// Exact-match grouping on path signatures. With a mirror map, clusters whose
// signatures are reflections of each other are paired and the members counted
// per side.
inline ClusterReport cluster(const std::vector<LoadPath>& paths,
                             const NameMirror* mirror = nullptr) {
    if (paths.empty()) throw ValidationError("cluster: no paths given");
    for (const LoadPath& p : paths)
        if (p.weight_kind != paths.front().weight_kind || p.method != paths.front().method ||
            p.segmented != paths.front().segmented)
            throw MixedWeightKinds("cluster: path '" + p.sim_id +
                                   "' has a different weight kind or method");

    std::map<std::vector<std::string>, std::vector<std::string>> groups;
    for (const LoadPath& p : paths) groups[p.signature].push_back(p.sim_id);

    ClusterReport rep;
    for (auto& [sig, members] : groups) {
        Cluster c;
        c.signature = sig;
        std::sort(members.begin(), members.end());
        c.member_sim_ids = members;
        rep.clusters.push_back(std::move(c));
    }
    std::sort(rep.clusters.begin(), rep.clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.member_sim_ids.size() != b.member_sim_ids.size())
            return a.member_sim_ids.size() > b.member_sim_ids.size();
        return a.signature < b.signature;
    });
    for (std::size_t i = 0; i < rep.clusters.size(); ++i)
        rep.clusters[i].label = detail::cluster_label(i);

    if (mirror) {
        for (Cluster& c : rep.clusters) {
            int left = 0, right = 0;
            for (const std::string& n : c.signature) {
                for (const auto& [l, r] : *mirror) {
                    if (n == l) { ++left; break; }
                    if (n == r) { ++right; break; }
                }
            }
            const int size = static_cast<int>(c.member_sim_ids.size());
            if (left > right)
                c.n_left = size;
            else if (right > left)
                c.n_right = size;
        }
        for (std::size_t i = 0; i < rep.clusters.size(); ++i) {
            const auto want = detail::mirror_signature(rep.clusters[i].signature, *mirror);
            if (want == rep.clusters[i].signature) continue;
            for (std::size_t j = 0; j < rep.clusters.size(); ++j) {
                if (rep.clusters[j].signature != want) continue;
                rep.clusters[i].paired_with = rep.clusters[j].label;
                if (i < j)
                    rep.pairing.emplace_back(rep.clusters[i].label, rep.clusters[j].label);
                break;
            }
        }
    }
    return rep;
}

} // namespace crashgraph
