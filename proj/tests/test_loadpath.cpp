#include <doctest.h>

#include <algorithm>
#include <random>

#include "crashgraph/loadpath.hpp"
#include "crashgraph/synth.hpp"

using namespace crashgraph;

namespace {

StructureGraph weighted_graph(int n, const std::vector<std::tuple<int, int, double>>& edges) {
    StructureGraph g;
    g.sim_id = "w";
    for (int i = 0; i < n; ++i) {
        Vertex v;
        v.vid = i;
        v.kind = VertexKind::Part;
        v.pid = i + 1;
        v.name = "p" + std::to_string(i);
        v.center = {double(i), 0, 0};
        g.vertices.push_back(v);
    }
    for (auto [s, d, w] : edges) {
        Edge e;
        e.src = s;
        e.dst = d;
        e.f_ie = w;
        g.edges.push_back(e);
    }
    g.sort_edges();
    return g;
}

// Exhaustive reference: every path (any start), max weight, then the
// lexicographically smallest vertex sequence.
struct BrutePath {
    double weight = 0.0;
    std::vector<int> seq;
};

void brute_walk(const StructureGraph& g, const Adjacency& adj, std::vector<int>& cur,
                double w, BrutePath& best) {
    if (w > best.weight || (w == best.weight && (best.seq.empty() || cur < best.seq))) {
        best.weight = w;
        best.seq = cur;
    }
    const int v = cur.back();
    for (int ei : adj.out[v]) {
        cur.push_back(g.edges[ei].dst);
        brute_walk(g, adj, cur, w + *g.edges[ei].f_ie, best);
        cur.pop_back();
    }
}

BrutePath brute_longest(const StructureGraph& g) {
    const Adjacency adj = make_adjacency(g);
    BrutePath best;
    best.weight = -1e300;
    for (std::size_t v = 0; v < g.vertices.size(); ++v) {
        std::vector<int> cur{static_cast<int>(v)};
        brute_walk(g, adj, cur, 0.0, best);
    }
    return best;
}

} // namespace

TEST_CASE("longest_path picks the heaviest route") {
    // a->b (3), b->c (1), a->c (5): the direct edge wins
    auto g = weighted_graph(3, {{0, 1, 3.0}, {1, 2, 1.0}, {0, 2, 5.0}});
    const BrutePath want = brute_longest(g);
    CHECK(want.weight == 5.0);
    CHECK(want.seq == std::vector<int>{0, 2});

    const LoadPath p = longest_path(g, WeightKind::FIe);
    CHECK(p.total_weight == want.weight);
    CHECK(p.vertex_sequence == want.seq);
    CHECK(p.signature == std::vector<std::string>{"p0", "p2"});
}

TEST_CASE("longest_path trivial cases") {
    SUBCASE("single vertex") {
        auto g = weighted_graph(1, {});
        const LoadPath p = longest_path(g, WeightKind::FIe);
        CHECK(p.vertex_sequence == std::vector<int>{0});
        CHECK(p.total_weight == 0.0);
    }
    SUBCASE("uniform chain takes every edge") {
        auto g = weighted_graph(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
        const LoadPath p = longest_path(g, WeightKind::FIe);
        CHECK(p.vertex_sequence == std::vector<int>{0, 1, 2, 3});
        CHECK(p.total_weight == doctest::Approx(3.0));
    }
    SUBCASE("missing weight") {
        auto g = weighted_graph(2, {{0, 1, 1.0}});
        g.edges[0].f_ie.reset();
        CHECK_THROWS_AS(longest_path(g, WeightKind::FIe), MissingWeight);
    }
    SUBCASE("zero-gain edges are not tacked on") {
        auto g = weighted_graph(3, {{0, 1, 2.0}, {1, 2, 0.0}});
        const LoadPath p = longest_path(g, WeightKind::FIe);
        CHECK(p.vertex_sequence == std::vector<int>{0, 1});
    }
}

TEST_CASE("longest_path equals exhaustive enumeration on 100 random DAGs") {
    std::mt19937 rng(20240811);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 11); // up to 12 vertices
        std::vector<std::tuple<int, int, double>> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng() % 100 < 35) {
                    const double w = 0.25 * (1 + rng() % 40);
                    edges.emplace_back(i, j, w);
                }
        auto g = weighted_graph(n, edges);
        const BrutePath want = brute_longest(g);
        const LoadPath got = longest_path(g, WeightKind::FIe);
        CHECK(got.total_weight == want.weight);
        CHECK(got.vertex_sequence == want.seq);
    }
}

TEST_CASE("argmax is invariant under positive weight scaling") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 8);
        std::vector<std::tuple<int, int, double>> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng() % 100 < 40) edges.emplace_back(i, j, 0.5 * (1 + rng() % 16));
        auto g = weighted_graph(n, edges);
        const LoadPath p1 = longest_path(g, WeightKind::FIe);
        for (Edge& e : g.edges) e.f_ie = *e.f_ie * 4.0; // exact in binary floating point
        const LoadPath p2 = longest_path(g, WeightKind::FIe);
        CHECK(p1.vertex_sequence == p2.vertex_sequence);
    }
}

TEST_CASE("detect runs the full pipeline per weight kind") {
    SynthConfig cfg;
    cfg.n_sims = 66;
    const auto sims = generate(cfg);

    SUBCASE("soft-side energy path, stiff-side timing path") {
        // analog_30 is soft on the right
        const DetectResult fie = detect(sims[30], Method::Mpbg, WeightKind::FIe);
        CHECK_FALSE(fie.graph.segmented);
        bool has_right = false, has_left = false;
        for (const std::string& s : fie.path.signature) {
            if (s.size() >= 2 && s.substr(s.size() - 2) == "-R") has_right = true;
            if (s.size() >= 2 && s.substr(s.size() - 2) == "-L") has_left = true;
        }
        CHECK(has_right);
        CHECK_FALSE(has_left);

        const DetectResult st = detect(sims[30], Method::Mpbg, WeightKind::STime);
        CHECK(st.graph.segmented);
        bool st_left = false, st_right = false;
        for (const std::string& s : st.path.signature) {
            if (s.size() >= 2 && s.substr(s.size() - 2) == "-L") st_left = true;
            if (s.size() >= 2 && s.substr(s.size() - 2) == "-R") st_right = true;
        }
        CHECK(st_left);
        CHECK_FALSE(st_right);
    }

    SUBCASE("paths are edge-connected in their graph") {
        for (WeightKind k :
             {WeightKind::FIe, WeightKind::FIeDt, WeightKind::STime, WeightKind::SPe}) {
            const DetectResult r = detect(sims[5], Method::Mpbg, k);
            for (std::size_t i = 1; i < r.path.vertex_sequence.size(); ++i)
                CHECK(r.graph.has_edge(r.path.vertex_sequence[i - 1],
                                       r.path.vertex_sequence[i]));
        }
    }

    SUBCASE("symmetric bundle is flagged") {
        CHECK(detect(sims[3], Method::Mpbg, WeightKind::FIe).path.symmetric);
        CHECK_FALSE(detect(sims[30], Method::Mpbg, WeightKind::FIe).path.symmetric);
    }

    SUBCASE("mirror equivariance on an asymmetric bundle") {
        const SimulationBundle mirrored = mirror_bundle(sims[30]);
        const LoadPath p = detect(sims[30], Method::Mpbg, WeightKind::FIe).path;
        const LoadPath pm = detect(mirrored, Method::Mpbg, WeightKind::FIe).path;
        const NameMirror mirror = name_mirror_from_bundle(sims[30]);
        CHECK(pm.signature == detail::mirror_signature(p.signature, mirror));
    }
}

TEST_CASE("cluster groups identical signatures and pairs mirrors") {
    auto mk_path = [](const std::string& sim, std::vector<std::string> sig) {
        LoadPath p;
        p.sim_id = sim;
        p.method = Method::Mpbg;
        p.segmented = true;
        p.weight_kind = WeightKind::STime;
        p.signature = std::move(sig);
        return p;
    };
    const NameMirror mirror = {{"cb-L", "cb-R"}};

    SUBCASE("identical signatures share a cluster") {
        auto rep = cluster({mk_path("a", {"bumper", "cb-L"}), mk_path("b", {"bumper", "cb-L"})},
                           &mirror);
        REQUIRE(rep.clusters.size() == 1);
        CHECK(rep.clusters[0].member_sim_ids == std::vector<std::string>{"a", "b"});
        CHECK(rep.clusters[0].n_left == 2);
        CHECK(rep.clusters[0].n_right == 0);
    }
    SUBCASE("mirrored signatures form a pair") {
        auto rep = cluster({mk_path("a", {"bumper", "cb-L"}), mk_path("b", {"bumper", "cb-R"})},
                           &mirror);
        REQUIRE(rep.clusters.size() == 2);
        CHECK(rep.pairing.size() == 1);
        CHECK(rep.clusters[0].paired_with == rep.clusters[1].label);
        CHECK(rep.clusters[0].n_left + rep.clusters[1].n_left == 1);
        CHECK(rep.clusters[0].n_right + rep.clusters[1].n_right == 1);
    }
    SUBCASE("mixed weight kinds are rejected") {
        auto a = mk_path("a", {"x"});
        auto b = mk_path("b", {"x"});
        b.weight_kind = WeightKind::FIe;
        CHECK_THROWS_AS(cluster({a, b}, &mirror), MixedWeightKinds);
    }
}
