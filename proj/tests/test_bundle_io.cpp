#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "crashgraph/crashgraph.hpp"

using namespace crashgraph;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() /
              ("crashgraph-test-" + std::to_string(::getpid()) + "-" +
               std::to_string(counter++));
        fs::create_directories(dir);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    fs::path operator/(const std::string& name) const { return dir / name; }
    static inline int counter = 0;
};

json minimal_bundle_json() {
    return json::parse(R"({
      "sim_id": "mini",
      "impact_direction": [1.0, 0.0, 0.0],
      "units": {"length": "mm", "time": "ms", "energy": "kJ"},
      "parts": [
        {"pid": 1, "name": "a", "box": {"min": [0,0,0], "max": [10,10,10]},
         "ie_curve": {"times": [0,1,2], "values": [0,1,2]}},
        {"pid": 2, "name": "b", "box": {"min": [12,0,0], "max": [20,10,10]},
         "ie_curve": {"times": [0,1,2], "values": [0,2,4]}}
      ]
    })");
}

} // namespace

TEST_CASE("load_bundle accepts the minimal two-part document") {
    TempDir t;
    atomic_write_text(t / "b.json", minimal_bundle_json().dump());
    const SimulationBundle b = load_bundle(t / "b.json");
    CHECK(b.sim_id == "mini");
    CHECK(b.parts.size() == 2);
    CHECK(b.parts[1].box.max == Vec3{20, 10, 10});
    CHECK_FALSE(b.symmetry_map.has_value());
}

TEST_CASE("load_bundle validation failures carry the pid and field") {
    TempDir t;
    SUBCASE("duplicate pid") {
        json j = minimal_bundle_json();
        j["parts"][1]["pid"] = 5;
        j["parts"][0]["pid"] = 5;
        atomic_write_text(t / "b.json", j.dump());
        try {
            load_bundle(t / "b.json");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("pid 5") != std::string::npos);
        }
    }
    SUBCASE("non-unit impact direction") {
        json j = minimal_bundle_json();
        j["impact_direction"] = {1.0, 1.0, 0.0};
        atomic_write_text(t / "b.json", j.dump());
        CHECK_THROWS_AS(load_bundle(t / "b.json"), ValidationError);
    }
    SUBCASE("inverted box") {
        json j = minimal_bundle_json();
        j["parts"][0]["box"]["min"] = {11, 0, 0};
        atomic_write_text(t / "b.json", j.dump());
        try {
            load_bundle(t / "b.json");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("pid 1") != std::string::npos);
            CHECK(msg.find("box") != std::string::npos);
        }
    }
    SUBCASE("decreasing energy values") {
        json j = minimal_bundle_json();
        j["parts"][0]["ie_curve"]["values"] = {0.0, 2.0, 1.0};
        atomic_write_text(t / "b.json", j.dump());
        try {
            load_bundle(t / "b.json");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("ie_curve") != std::string::npos);
        }
    }
    SUBCASE("solver-noise dips within the relative tolerance pass") {
        json j = minimal_bundle_json();
        j["parts"][0]["ie_curve"]["values"] = {0.0, 2.0, 2.0 - 1e-7, 2.5};
        j["parts"][0]["ie_curve"]["times"] = {0.0, 1.0, 2.0, 3.0};
        atomic_write_text(t / "b.json", j.dump());
        CHECK_NOTHROW(load_bundle(t / "b.json"));
    }
    SUBCASE("malformed json is a ParseError") {
        atomic_write_text(t / "b.json", "{not json");
        CHECK_THROWS_AS(load_bundle(t / "b.json"), ParseError);
    }
    SUBCASE("missing file is an IoError") {
        CHECK_THROWS_AS(load_bundle(t / "nope.json"), IoError);
    }
}

TEST_CASE("a nodes array is reduced to its bounding box") {
    TempDir t;
    json j = minimal_bundle_json();
    j["parts"][0].erase("box");
    j["parts"][0]["nodes"] = {{1, 2, 3}, {-4, 7, 0}, {2, -3, 9}};
    atomic_write_text(t / "b.json", j.dump());
    const SimulationBundle b = load_bundle(t / "b.json");
    CHECK(b.parts[0].box.min == Vec3{-4, -3, 0});
    CHECK(b.parts[0].box.max == Vec3{2, 7, 9});
}

TEST_CASE("bundle save/load round-trips generator output exactly") {
    TempDir t;
    SynthConfig cfg;
    cfg.n_sims = 3;
    const auto sims = generate(cfg);
    for (const auto& b : sims) {
        const fs::path p = t / (b.sim_id + ".json");
        save_bundle(b, p);
        const SimulationBundle loaded = load_bundle(p);
        CHECK(loaded == b);
        // byte-stable rewrite
        const std::string once = read_text(p);
        save_bundle(loaded, p);
        CHECK(read_text(p) == once);
    }
}

TEST_CASE("graph save/load round-trips") {
    TempDir t;
    SUBCASE("three vertices, no edges") {
        StructureGraph g;
        g.sim_id = "empty-edges";
        for (int i = 0; i < 3; ++i) {
            Vertex v;
            v.vid = i;
            v.kind = VertexKind::Part;
            v.pid = i + 1;
            v.name = "p" + std::to_string(i);
            v.center = {double(i), 0, 0};
            g.vertices.push_back(v);
        }
        save_graph(g, t / "g.json");
        CHECK(load_graph(t / "g.json") == g);
    }
    SUBCASE("weighted mpbg graph of a synthetic sim, segmented too") {
        SynthConfig cfg;
        cfg.n_sims = 1;
        const auto bundle = generate(cfg)[0];
        const auto comps = group_components(bundle.parts);
        ExtractionConfig ec;
        ec.method = Method::Mpbg;
        StructureGraph g = build_mpbg(bundle, comps, ec);
        attach_features(g, bundle, comps);
        apply_flow(g, compute_flow(g, FlowFeature::IeMax), WeightKind::FIe);
        save_graph(g, t / "g.json");
        CHECK(load_graph(t / "g.json") == g);

        StructureGraph seg = segment_graph(g);
        seg = attach_spe(seg, compute_flow(seg, FlowFeature::IeMax));
        save_graph(seg, t / "seg.json");
        CHECK(load_graph(t / "seg.json") == seg);
    }
    SUBCASE("unknown schema version") {
        json j;
        j["version"] = "v99";
        j["sim_id"] = "x";
        j["method"] = "cbg";
        j["vertices"] = json::array();
        j["edges"] = json::array();
        atomic_write_text(t / "g.json", j.dump());
        CHECK_THROWS_AS(load_graph(t / "g.json"), SchemaVersionError);
    }
}

TEST_CASE("dot export") {
    StructureGraph g;
    g.sim_id = "dot";
    for (int i = 0; i < 2; ++i) {
        Vertex v;
        v.vid = i;
        v.kind = VertexKind::Part;
        v.pid = i + 1;
        v.name = "p" + std::to_string(i);
        v.center = {double(i), 0, 0};
        g.vertices.push_back(v);
    }
    Edge e;
    e.src = 0;
    e.dst = 1;
    g.edges.push_back(e);

    SUBCASE("plain digraph has exactly one arrow") {
        const std::string dot = graph_to_dot(g);
        std::size_t arrows = 0;
        for (std::size_t pos = dot.find("->"); pos != std::string::npos;
             pos = dot.find("->", pos + 2))
            ++arrows;
        CHECK(arrows == 1);
        CHECK(dot.find("digraph") != std::string::npos);
    }
    SUBCASE("highlighted path edges turn red") {
        LoadPath p;
        p.vertex_sequence = {0, 1};
        const std::string dot = graph_to_dot(g, &p);
        CHECK(dot.find("color=red") != std::string::npos);
    }
    SUBCASE("foreign vertex in the highlight is rejected") {
        LoadPath p;
        p.vertex_sequence = {0, 9};
        CHECK_THROWS_AS(graph_to_dot(g, &p), PathNotInGraph);
    }
    SUBCASE("non-edges in the highlight are rejected") {
        LoadPath p;
        p.vertex_sequence = {1, 0};
        CHECK_THROWS_AS(graph_to_dot(g, &p), PathNotInGraph);
    }
}

TEST_CASE("path and cluster serialization round-trip") {
    TempDir t;
    LoadPath p;
    p.sim_id = "analog_1";
    p.method = Method::Mpbg;
    p.segmented = true;
    p.weight_kind = WeightKind::STime;
    p.vertex_sequence = {0, 27, 4};
    p.signature = {"impactor", "crashbox-outer-L"};
    p.total_weight = 12.5;
    save_path(p, t / "p.json");
    CHECK(load_path(t / "p.json") == p);

    ClusterReport rep;
    Cluster c;
    c.label = "A";
    c.signature = {"impactor", "crashbox-outer-L"};
    c.member_sim_ids = {"analog_1", "analog_4"};
    c.n_left = 2;
    c.paired_with = "B";
    rep.clusters.push_back(c);
    rep.pairing.emplace_back("A", "B");
    const std::string csv = cluster_report_to_csv(rep);
    CHECK(csv.find("signature,member_ids,n_L,n_R,paired_with") == 0);
    CHECK(csv.find("impactor>crashbox-outer-L,analog_1;analog_4,2,0,B") != std::string::npos);
    const json jr = cluster_report_to_json(rep);
    CHECK(jr["clusters"][0]["label"] == "A");
    CHECK(jr["pairing"][0][1] == "B");
}
