#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crashgraph/bundle.hpp"
#include "crashgraph/errors.hpp"
#include "crashgraph/graph.hpp"
#include "crashgraph/loadpath.hpp"

namespace crashgraph {

using json = nlohmann::ordered_json;

inline constexpr const char* kGraphSchemaVersion = "v1";

// ---------------------------------------------------------------------------
// files

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Write via a sibling temp file and rename, so readers never see half a file.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string());
}

inline json parse_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

namespace io_detail {

inline json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 vec_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw ParseError(where + ": expected a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <class T>
T get_field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(where + " field '" + key + "': " + e.what());
    }
}

} // namespace io_detail

// ---------------------------------------------------------------------------
// simulation bundles

inline json bundle_to_json(const SimulationBundle& b) {
    json j;
    j["sim_id"] = b.sim_id;
    j["impact_direction"] = io_detail::vec_to_json(b.impact_direction);
    j["units"] = {{"length", b.length_unit}, {"time", b.time_unit}, {"energy", b.energy_unit}};
    j["parts"] = json::array();
    for (const PartRecord& p : b.parts) {
        json jp;
        jp["pid"] = p.pid;
        jp["name"] = p.name;
        jp["box"] = {{"min", io_detail::vec_to_json(p.box.min)},
                     {"max", io_detail::vec_to_json(p.box.max)}};
        jp["ie_curve"] = {{"times", p.ie_curve.times}, {"values", p.ie_curve.values}};
        j["parts"].push_back(std::move(jp));
    }
    if (b.symmetry_map) {
        json jm = json::array();
        for (auto [l, r] : *b.symmetry_map) jm.push_back(json::array({l, r}));
        j["symmetry_map"] = std::move(jm);
    }
    return j;
}

inline SimulationBundle bundle_from_json(const json& j) {
    using io_detail::get_field;
    SimulationBundle b;
    b.sim_id = get_field<std::string>(j, "sim_id", "bundle");
    b.impact_direction = io_detail::vec_from_json(
        j.contains("impact_direction") ? j.at("impact_direction") : json(), "impact_direction");
    if (j.contains("units")) {
        const json& u = j.at("units");
        b.length_unit = get_field<std::string>(u, "length", "units");
        b.time_unit = get_field<std::string>(u, "time", "units");
        b.energy_unit = get_field<std::string>(u, "energy", "units");
    }
    if (!j.contains("parts") || !j.at("parts").is_array())
        throw ParseError("bundle: missing 'parts' array");
    for (const json& jp : j.at("parts")) {
        PartRecord p;
        p.pid = get_field<int>(jp, "pid", "part");
        const std::string where = "part pid " + std::to_string(p.pid);
        p.name = get_field<std::string>(jp, "name", where);
        if (jp.contains("nodes")) {
            // point cloud given instead of (or besides) a box: reduce to bounds
            const json& jn = jp.at("nodes");
            if (!jn.is_array() || jn.empty())
                throw ParseError(where + ": 'nodes' must be a non-empty array");
            Vec3 first = io_detail::vec_from_json(jn[0], where + " nodes[0]");
            p.box = {first, first};
            for (std::size_t i = 1; i < jn.size(); ++i) {
                const Vec3 v = io_detail::vec_from_json(jn[i], where + " nodes");
                for (int k = 0; k < 3; ++k) {
                    p.box.min[k] = std::min(p.box.min[k], v[k]);
                    p.box.max[k] = std::max(p.box.max[k], v[k]);
                }
            }
        } else {
            if (!jp.contains("box")) throw ParseError(where + ": missing 'box' or 'nodes'");
            const json& jb = jp.at("box");
            p.box.min = io_detail::vec_from_json(jb.contains("min") ? jb.at("min") : json(),
                                                 where + " box.min");
            p.box.max = io_detail::vec_from_json(jb.contains("max") ? jb.at("max") : json(),
                                                 where + " box.max");
        }
        if (!jp.contains("ie_curve")) throw ParseError(where + ": missing 'ie_curve'");
        const json& jc = jp.at("ie_curve");
        p.ie_curve.times = get_field<std::vector<double>>(jc, "times", where + " ie_curve");
        p.ie_curve.values = get_field<std::vector<double>>(jc, "values", where + " ie_curve");
        b.parts.push_back(std::move(p));
    }
    if (j.contains("symmetry_map") && !j.at("symmetry_map").is_null()) {
        std::vector<std::pair<int, int>> map;
        for (const json& jp : j.at("symmetry_map")) {
            if (!jp.is_array() || jp.size() != 2)
                throw ParseError("symmetry_map: entries must be [pid, pid]");
            map.emplace_back(jp[0].get<int>(), jp[1].get<int>());
        }
        b.symmetry_map = std::move(map);
    }
    b.validate();
    return b;
}

inline void save_bundle(const SimulationBundle& b, const std::filesystem::path& path) {
    b.validate();
    atomic_write_text(path, bundle_to_json(b).dump(2) + "\n");
}

inline SimulationBundle load_bundle(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    return bundle_from_json(parse_json_file(path));
}

// ---------------------------------------------------------------------------
// structure graphs

inline const char* vertex_kind_name(VertexKind k) {
    switch (k) {
        case VertexKind::Part: return "part";
        case VertexKind::ComponentNode: return "component";
        case VertexKind::Segment: return "segment";
    }
    return "?";
}

inline VertexKind vertex_kind_from_name(const std::string& s) {
    if (s == "part") return VertexKind::Part;
    if (s == "component") return VertexKind::ComponentNode;
    if (s == "segment") return VertexKind::Segment;
    throw ParseError("unknown vertex kind '" + s + "'");
}

inline const char* provenance_name(EdgeProvenance p) {
    switch (p) {
        case EdgeProvenance::ComponentLink: return "component_link";
        case EdgeProvenance::IntraComponent: return "intra_component";
        case EdgeProvenance::SegmentLink: return "segment_link";
    }
    return "?";
}

inline EdgeProvenance provenance_from_name(const std::string& s) {
    if (s == "component_link") return EdgeProvenance::ComponentLink;
    if (s == "intra_component") return EdgeProvenance::IntraComponent;
    if (s == "segment_link") return EdgeProvenance::SegmentLink;
    throw ParseError("unknown edge provenance '" + s + "'");
}

inline json graph_to_json(const StructureGraph& g) {
    json j;
    j["version"] = kGraphSchemaVersion;
    j["sim_id"] = g.sim_id;
    j["method"] = method_name(g.method);
    j["segmented"] = g.segmented;
    j["impact_direction"] = io_detail::vec_to_json(g.impact_direction);
    j["vertices"] = json::array();
    for (const Vertex& v : g.vertices) {
        json jv;
        jv["vid"] = v.vid;
        jv["kind"] = vertex_kind_name(v.kind);
        if (v.pid) jv["pid"] = *v.pid;
        if (v.cid) jv["cid"] = *v.cid;
        jv["name"] = v.name;
        jv["center"] = io_detail::vec_to_json(v.center);
        if (!v.member_pids.empty()) jv["members"] = v.member_pids;
        json jf = json::object();
        if (v.features) {
            jf["ie_max"] = v.features->ie_max;
            jf["t_i"] = v.features->t_i;
            jf["t_n"] = v.features->t_n;
            if (v.features->ie_dt) jf["ie_dt"] = *v.features->ie_dt;
        }
        jv["features"] = std::move(jf);
        if (v.seg) {
            jv["origin_vid"] = v.seg->origin_vid;
            jv["seg_index"] = v.seg->index;
            jv["t_start"] = v.seg->t_start;
            jv["t_end"] = v.seg->t_end;
        }
        j["vertices"].push_back(std::move(jv));
    }
    j["edges"] = json::array();
    for (const Edge& e : g.edges) {
        json je;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["kind"] = provenance_name(e.provenance);
        json jw = json::object();
        if (e.f_ie) jw["f_ie"] = *e.f_ie;
        if (e.f_iedt) jw["f_iedt"] = *e.f_iedt;
        if (e.s_t) jw["s_t"] = *e.s_t;
        if (e.s_pe) jw["s_pe"] = *e.s_pe;
        je["weights"] = std::move(jw);
        if (e.zero_duration) je["zero_duration"] = true;
        j["edges"].push_back(std::move(je));
    }
    return j;
}

inline StructureGraph graph_from_json(const json& j) {
    using io_detail::get_field;
    const std::string version = get_field<std::string>(j, "version", "graph");
    if (version != kGraphSchemaVersion)
        throw SchemaVersionError("unknown graph format version '" + version + "' (expected '" +
                                 kGraphSchemaVersion + "')");
    StructureGraph g;
    g.sim_id = get_field<std::string>(j, "sim_id", "graph");
    g.method = method_from_name(get_field<std::string>(j, "method", "graph"));
    g.segmented = j.value("segmented", false);
    g.impact_direction = io_detail::vec_from_json(
        j.contains("impact_direction") ? j.at("impact_direction") : json(), "impact_direction");
    for (const json& jv : j.at("vertices")) {
        Vertex v;
        v.vid = get_field<int>(jv, "vid", "vertex");
        const std::string where = "vertex vid " + std::to_string(v.vid);
        v.kind = vertex_kind_from_name(get_field<std::string>(jv, "kind", where));
        if (jv.contains("pid")) v.pid = jv.at("pid").get<int>();
        if (jv.contains("cid")) v.cid = jv.at("cid").get<int>();
        v.name = jv.value("name", std::string());
        v.center = io_detail::vec_from_json(jv.contains("center") ? jv.at("center") : json(),
                                            where + " center");
        if (jv.contains("members")) v.member_pids = jv.at("members").get<std::vector<int>>();
        if (jv.contains("features") && !jv.at("features").empty()) {
            const json& jf = jv.at("features");
            AbsorptionFeatures f;
            f.ie_max = get_field<double>(jf, "ie_max", where + " features");
            f.t_i = get_field<double>(jf, "t_i", where + " features");
            f.t_n = get_field<double>(jf, "t_n", where + " features");
            if (jf.contains("ie_dt")) f.ie_dt = jf.at("ie_dt").get<double>();
            v.features = f;
        }
        if (v.kind == VertexKind::Segment) {
            SegmentInfo s;
            s.origin_vid = get_field<int>(jv, "origin_vid", where);
            s.index = get_field<int>(jv, "seg_index", where);
            s.t_start = get_field<double>(jv, "t_start", where);
            s.t_end = get_field<double>(jv, "t_end", where);
            v.seg = s;
        }
        g.vertices.push_back(std::move(v));
    }
    for (const json& je : j.at("edges")) {
        Edge e;
        e.src = get_field<int>(je, "src", "edge");
        e.dst = get_field<int>(je, "dst", "edge");
        if (je.contains("kind")) e.provenance = provenance_from_name(je.at("kind"));
        if (je.contains("weights")) {
            const json& jw = je.at("weights");
            if (jw.contains("f_ie")) e.f_ie = jw.at("f_ie").get<double>();
            if (jw.contains("f_iedt")) e.f_iedt = jw.at("f_iedt").get<double>();
            if (jw.contains("s_t")) e.s_t = jw.at("s_t").get<double>();
            if (jw.contains("s_pe")) e.s_pe = jw.at("s_pe").get<double>();
        }
        e.zero_duration = je.value("zero_duration", false);
        g.edges.push_back(std::move(e));
    }
    validate_structure(g);
    return g;
}

inline void save_graph(const StructureGraph& g, const std::filesystem::path& path) {
    validate_structure(g);
    atomic_write_text(path, graph_to_json(g).dump(2) + "\n");
}

inline StructureGraph load_graph(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    return graph_from_json(parse_json_file(path));
}

// ---------------------------------------------------------------------------
// DOT export

// Graphviz digraph with vertices pinned at their box centers projected onto the
// x-y plane; the highlighted path, when given, is drawn in red.
inline std::string graph_to_dot(const StructureGraph& g, const LoadPath* highlight = nullptr) {
    std::set<std::pair<int, int>> hot;
    if (highlight) {
        const auto& seq = highlight->vertex_sequence;
        for (int vid : seq)
            if (!g.has_vertex(vid))
                throw PathNotInGraph("highlight path names vid " + std::to_string(vid) +
                                     " which is not in the graph");
        for (std::size_t i = 1; i < seq.size(); ++i) {
            if (!g.has_edge(seq[i - 1], seq[i]))
                throw PathNotInGraph("highlight path uses missing edge " +
                                     std::to_string(seq[i - 1]) + "->" +
                                     std::to_string(seq[i]));
            hot.insert({seq[i - 1], seq[i]});
        }
    }

    std::ostringstream out;
    out.precision(17);
    out << "digraph \"" << g.sim_id << "\" {\n";
    out << "  node [shape=box, fontsize=10];\n";
    for (const Vertex& v : g.vertices) {
        out << "  v" << v.vid << " [label=\"" << v.name << "\", pos=\"" << v.center.x / 25.0
            << "," << v.center.y / 25.0 << "!\"";
        if (v.kind == VertexKind::Segment) out << ", style=dotted";
        out << "];\n";
    }
    for (const Edge& e : g.edges) {
        out << "  v" << e.src << " -> v" << e.dst;
        if (hot.count({e.src, e.dst})) out << " [color=red, penwidth=2.0]";
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

inline void export_dot(const StructureGraph& g, const LoadPath* highlight,
                       const std::filesystem::path& path) {
    atomic_write_text(path, graph_to_dot(g, highlight));
}

// ---------------------------------------------------------------------------
// load-paths, flow reports, cluster tables

inline json path_to_json(const LoadPath& p) {
    json j;
    j["sim_id"] = p.sim_id;
    j["method"] = method_name(p.method);
    j["segmented"] = p.segmented;
    j["weight_kind"] = weight_kind_name(p.weight_kind);
    j["vertex_sequence"] = p.vertex_sequence;
    j["signature"] = p.signature;
    j["total_weight"] = p.total_weight;
    j["symmetric"] = p.symmetric;
    return j;
}

inline LoadPath path_from_json(const json& j) {
    using io_detail::get_field;
    LoadPath p;
    p.sim_id = get_field<std::string>(j, "sim_id", "path");
    p.method = method_from_name(get_field<std::string>(j, "method", "path"));
    p.segmented = j.value("segmented", false);
    p.weight_kind = weight_kind_from_name(get_field<std::string>(j, "weight_kind", "path"));
    p.vertex_sequence = get_field<std::vector<int>>(j, "vertex_sequence", "path");
    p.signature = get_field<std::vector<std::string>>(j, "signature", "path");
    p.total_weight = get_field<double>(j, "total_weight", "path");
    p.symmetric = j.value("symmetric", false);
    return p;
}

inline void save_path(const LoadPath& p, const std::filesystem::path& path) {
    atomic_write_text(path, path_to_json(p).dump(2) + "\n");
}

inline LoadPath load_path(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    return path_from_json(parse_json_file(path));
}

inline json flow_report_to_json(const std::string& sim_id, WeightKind kind,
                                const FlowReport& rep) {
    json j;
    j["sim_id"] = sim_id;
    j["weight_kind"] = weight_kind_name(kind);
    j["rmse"] = rep.rmse;
    j["excluded_sources"] = rep.excluded_sources;
    json jn = json::array();
    for (auto [s, d] : rep.negative_edges) jn.push_back(json::array({s, d}));
    j["negative_edges"] = std::move(jn);
    return j;
}

inline json cluster_report_to_json(const ClusterReport& rep) {
    json j;
    j["clusters"] = json::array();
    for (const Cluster& c : rep.clusters) {
        json jc;
        jc["label"] = c.label;
        jc["signature"] = c.signature;
        jc["member_sim_ids"] = c.member_sim_ids;
        jc["n_L"] = c.n_left;
        jc["n_R"] = c.n_right;
        jc["paired_with"] = c.paired_with;
        j["clusters"].push_back(std::move(jc));
    }
    json jp = json::array();
    for (const auto& [a, b] : rep.pairing) jp.push_back(json::array({a, b}));
    j["pairing"] = std::move(jp);
    return j;
}

inline std::string cluster_report_to_csv(const ClusterReport& rep) {
    std::ostringstream out;
    out << "signature,member_ids,n_L,n_R,paired_with\n";
    for (const Cluster& c : rep.clusters) {
        for (std::size_t i = 0; i < c.signature.size(); ++i)
            out << (i ? ">" : "") << c.signature[i];
        out << ",";
        for (std::size_t i = 0; i < c.member_sim_ids.size(); ++i)
            out << (i ? ";" : "") << c.member_sim_ids[i];
        out << "," << c.n_left << "," << c.n_right << "," << c.paired_with << "\n";
    }
    return out.str();
}

} // namespace crashgraph
