// crashgraph command line: synthesize bundles, extract structure graphs,
// compute flow weights, segment, detect load-paths and cluster them.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 pipeline failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crashgraph/crashgraph.hpp"

namespace fs = std::filesystem;
using namespace crashgraph;

namespace {

int log_level() {
    const char* env = std::getenv("CRASHGRAPH_LOG");
    if (!env) return 1; // warn
    const std::string s = env;
    if (s == "error") return 0;
    if (s == "warn") return 1;
    if (s == "info") return 2;
    if (s == "debug") return 3;
    return 1;
}

void log_at(int level, const std::string& msg) {
    static const int enabled = log_level();
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (level <= enabled) std::cerr << "crashgraph [" << names[level] << "] " << msg << "\n";
}

struct ManifestWriter {
    json entry;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    ManifestWriter(const std::string& command, json config) {
        entry["command"] = command;
        entry["tool_version"] = kToolVersion;
        entry["config"] = std::move(config);
        entry["inputs"] = json::array();
        entry["outputs"] = json::array();
    }
    void input(const fs::path& p) { entry["inputs"].push_back(p.string()); }
    void output(const fs::path& p) { entry["outputs"].push_back(p.string()); }
    void write(const fs::path& where) {
        const auto dt = std::chrono::steady_clock::now() - t0;
        entry["wall_time_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(dt).count();
        atomic_write_text(where, entry.dump(2) + "\n");
    }
};

fs::path manifest_path(const fs::path& primary_output) {
    if (fs::is_directory(primary_output)) return primary_output / "run_manifest.json";
    return primary_output.string() + ".manifest.json";
}

std::vector<fs::path> bundle_files(const fs::path& input) {
    std::vector<fs::path> files;
    if (fs::is_directory(input)) {
        for (const auto& e : fs::directory_iterator(input))
            if (e.is_regular_file() && e.path().extension() == ".json" &&
                e.path().filename() != "run_manifest.json" &&
                e.path().string().find(".manifest.") == std::string::npos)
                files.push_back(e.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(input);
    }
    if (files.empty()) throw IoError("no .json inputs under " + input.string());
    return files;
}

struct CommonFlags {
    std::string method = "mpbg";
    double tlv = 10.0;
    double full_threshold = 0.99;
    double partial_threshold = 0.05;
    double alpha = 0.02;
    double beta = 0.95;

    DetectConfig detect_config() const {
        DetectConfig c;
        c.grouping.full_threshold = full_threshold;
        c.grouping.partial_threshold = partial_threshold;
        c.extraction.tlv = tlv;
        c.extraction.method = method_from_name(method);
        c.feature.alpha = alpha;
        c.feature.beta = beta;
        return c;
    }
    void add_grouping_flags(CLI::App* cmd) {
        cmd->add_option("--method", method, "graph extraction method: cbg, spbg or mpbg")
            ->check(CLI::IsMember({"cbg", "spbg", "mpbg"}));
        cmd->add_option("--tlv", tlv, "max component box gap for an edge (length units)");
        cmd->add_option("--full-threshold", full_threshold, "overlap ratio for a full merge");
        cmd->add_option("--partial-threshold", partial_threshold,
                        "overlap ratio for a partial merge");
    }
    void add_feature_flags(CLI::App* cmd) {
        cmd->add_option("--alpha", alpha, "onset threshold as a fraction of ie_max");
        cmd->add_option("--beta", beta, "saturation threshold as a fraction of ie_max");
    }
};

// ---------------------------------------------------------------------------

int cmd_synth(const std::string& layout, int n, unsigned seed, double lhs, double rhs,
              const fs::path& out_dir) {
    SynthConfig cfg;
    cfg.layout = layout_from_name(layout);
    cfg.n_sims = n;
    cfg.seed = seed;
    cfg.lhs_stiffness = lhs;
    cfg.rhs_stiffness = rhs;

    ManifestWriter mf("synth", {{"layout", layout},
                                {"n", n},
                                {"seed", seed},
                                {"lhs", lhs},
                                {"rhs", rhs},
                                {"out", out_dir.string()}});
    fs::create_directories(out_dir);
    for (const SimulationBundle& b : generate(cfg)) {
        const fs::path p = out_dir / (b.sim_id + ".json");
        save_bundle(b, p);
        mf.output(p);
        log_at(2, "wrote " + p.string());
    }
    mf.write(manifest_path(out_dir));
    return 0;
}

int cmd_extract(const fs::path& input, const CommonFlags& flags, const fs::path& out) {
    ManifestWriter mf("extract",
                      {{"method", flags.method},
                       {"tlv", flags.tlv},
                       {"full_threshold", flags.full_threshold},
                       {"partial_threshold", flags.partial_threshold}});
    const DetectConfig cfg = flags.detect_config();
    const auto inputs = bundle_files(input);
    const bool batch = inputs.size() > 1 || fs::is_directory(input);
    if (batch) fs::create_directories(out);

    std::size_t failures = 0;
    bool edgeless = false;
    for (const fs::path& in : inputs) {
        try {
            mf.input(in);
            const SimulationBundle bundle = load_bundle(in);
            const auto comps = group_components(bundle.parts, cfg.grouping);
            const StructureGraph g = build_graph(bundle, comps, cfg.extraction);
            if (!g.warnings.empty()) {
                for (const std::string& w : g.warnings) log_at(1, in.string() + ": " + w);
                edgeless = true;
            }
            const fs::path dst =
                batch ? out / (in.stem().string() + ".graph.json") : out;
            save_graph(g, dst);
            mf.output(dst);
        } catch (const Error& e) {
            ++failures;
            std::cerr << "crashgraph: error [extract] " << in.string() << ": " << e.what()
                      << "\n";
        }
    }
    if (failures == inputs.size()) return 2;
    mf.write(manifest_path(out));
    if (edgeless) {
        std::cerr << "crashgraph: error [extract] NoAdjacency: no component pair within "
                     "tlv, graph has no edges\n";
        return 2;
    }
    return 0;
}

int cmd_flow(const fs::path& graph_file, const fs::path& bundle_file,
             const std::string& feature, const CommonFlags& flags, const fs::path& out) {
    ManifestWriter mf("flow", {{"feature", feature},
                               {"alpha", flags.alpha},
                               {"beta", flags.beta}});
    mf.input(graph_file);
    mf.input(bundle_file);

    const WeightKind kind = weight_kind_from_name(feature);
    if (kind != WeightKind::FIe && kind != WeightKind::FIeDt)
        throw ConfigError("flow computes f_ie or f_iedt (use 'segment' for s_t / s_pe)");

    StructureGraph g = load_graph(graph_file);
    const SimulationBundle bundle = load_bundle(bundle_file);
    const auto comps = group_components(bundle.parts, flags.detect_config().grouping);
    attach_features(g, bundle, comps, flags.detect_config().feature);

    FlowReport rep;
    if (kind == WeightKind::FIe) {
        rep = compute_flow(g, FlowFeature::IeMax);
    } else {
        const auto [t_i_min, t_n_max] = global_time_bounds(g);
        set_ie_dt(g, t_i_min, t_n_max);
        rep = compute_flow(g, FlowFeature::IeDt);
    }
    apply_flow(g, rep, kind);
    save_graph(g, out);
    mf.output(out);

    const fs::path report = out.parent_path() / (out.stem().string() + ".flow_report.json");
    atomic_write_text(report, flow_report_to_json(g.sim_id, kind, rep).dump(2) + "\n");
    mf.output(report);
    log_at(2, "rmse " + std::to_string(rep.rmse));
    mf.write(manifest_path(out));
    return 0;
}

int cmd_segment(const fs::path& graph_file, const fs::path& out) {
    ManifestWriter mf("segment", json::object());
    mf.input(graph_file);
    StructureGraph g = load_graph(graph_file);
    StructureGraph seg = segment_graph(g);
    seg = attach_spe(seg, compute_flow(seg, FlowFeature::IeMax));
    save_graph(seg, out);
    mf.output(out);
    mf.write(manifest_path(out));
    return 0;
}

int cmd_detect(const fs::path& input, const std::string& weight, const CommonFlags& flags,
               const fs::path& out, bool dot) {
    ManifestWriter mf("detect", {{"method", flags.method},
                                 {"weight", weight},
                                 {"tlv", flags.tlv},
                                 {"alpha", flags.alpha},
                                 {"beta", flags.beta}});
    const WeightKind kind = weight_kind_from_name(weight);
    const DetectConfig cfg = flags.detect_config();
    const Method method = method_from_name(flags.method);

    const auto inputs = bundle_files(input);
    const bool batch = inputs.size() > 1 || fs::is_directory(input);
    if (batch) fs::create_directories(out);

    std::size_t failures = 0;
    bool any_pipeline_error = false;
    for (const fs::path& in : inputs) {
        try {
            mf.input(in);
            const SimulationBundle bundle = load_bundle(in);
            const DetectResult res = detect(bundle, method, kind, cfg);
            const fs::path dst = batch ? out / (in.stem().string() + ".path.json") : out;
            save_path(res.path, dst);
            mf.output(dst);
            if (dot) {
                const fs::path dp = dst.parent_path() / (dst.stem().string() + ".dot");
                export_dot(res.graph, &res.path, dp);
                mf.output(dp);
            }
            log_at(2, in.string() + " -> " + dst.string());
        } catch (const Error& e) {
            ++failures;
            any_pipeline_error |= !is_input_error(e);
            std::cerr << "crashgraph: error [detect] " << in.string() << ": " << e.what()
                      << "\n";
        }
    }
    if (failures == inputs.size()) return any_pipeline_error ? 3 : 2;
    mf.write(manifest_path(out));
    return 0;
}

int cmd_cluster(const fs::path& paths_dir, const fs::path& symmetry_bundle,
                const fs::path& out_prefix) {
    ManifestWriter mf("cluster", {{"paths", paths_dir.string()}});
    std::vector<LoadPath> paths;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(paths_dir))
        if (e.is_regular_file() && e.path().extension() == ".json" &&
            e.path().filename() != "run_manifest.json" &&
            e.path().string().find(".manifest.") == std::string::npos &&
            e.path().string().find(".flow_report.") == std::string::npos)
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
        paths.push_back(load_path(f));
        mf.input(f);
    }

    NameMirror mirror;
    const NameMirror* mirror_ptr = nullptr;
    if (!symmetry_bundle.empty()) {
        mirror = name_mirror_from_bundle(load_bundle(symmetry_bundle));
        mirror_ptr = &mirror;
        mf.input(symmetry_bundle);
    }
    const ClusterReport rep = cluster(paths, mirror_ptr);

    const fs::path csv = out_prefix.string() + ".csv";
    const fs::path js = out_prefix.string() + ".json";
    atomic_write_text(csv, cluster_report_to_csv(rep));
    atomic_write_text(js, cluster_report_to_json(rep).dump(2) + "\n");
    mf.output(csv);
    mf.output(js);
    mf.write(fs::path(out_prefix.string() + ".manifest.json"));
    std::cout << rep.clusters.size() << " clusters over " << paths.size() << " paths\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"crash-structure graphs: extraction, energy flow and load-path detection"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a parametric bundle fleet");
    std::string layout = "frontal27";
    int n = 66;
    unsigned seed = 7;
    double lhs = 1.0, rhs = 1.0;
    fs::path synth_out;
    synth->add_option("--layout", layout)->check(CLI::IsMember({"frontal27", "mini8"}));
    synth->add_option("--n", n, "number of simulations");
    synth->add_option("--seed", seed);
    synth->add_option("--lhs", lhs, "global left-side stiffness multiplier");
    synth->add_option("--rhs", rhs, "global right-side stiffness multiplier");
    synth->add_option("-o,--out", synth_out, "output directory")->required();

    // extract
    auto* extract = app.add_subcommand("extract", "build a structure graph from a bundle");
    CommonFlags exf;
    fs::path ex_in, ex_out;
    extract->add_option("input", ex_in, "bundle file or directory")->required();
    exf.add_grouping_flags(extract);
    extract->add_option("-o,--out", ex_out, "graph file (or directory for batches)")
        ->required();

    // flow
    auto* flow = app.add_subcommand("flow", "attach features and compute flow weights");
    CommonFlags flf;
    fs::path fl_graph, fl_bundle, fl_out;
    std::string feature = "f_ie";
    flow->add_option("graph", fl_graph, "graph file")->required();
    flow->add_option("--bundle", fl_bundle, "bundle the graph was extracted from")
        ->required();
    flow->add_option("--feature", feature)->check(CLI::IsMember({"f_ie", "f_iedt"}));
    flf.add_feature_flags(flow);
    flow->add_option("-o,--out", fl_out, "weighted graph file")->required();

    // segment
    auto* segment = app.add_subcommand("segment", "time-segment a weighted graph");
    fs::path sg_graph, sg_out;
    segment->add_option("graph", sg_graph, "featured graph file")->required();
    segment->add_option("-o,--out", sg_out, "segmented graph file")->required();

    // detect
    auto* det = app.add_subcommand("detect", "detect the load-path of a bundle");
    CommonFlags dtf;
    fs::path dt_in, dt_out;
    std::string weight = "f_ie";
    bool dt_dot = false;
    det->add_option("input", dt_in, "bundle file or directory")->required();
    dtf.add_grouping_flags(det);
    dtf.add_feature_flags(det);
    det->add_option("--weight", weight)
        ->check(CLI::IsMember({"f_ie", "f_iedt", "s_t", "s_pe"}));
    det->add_flag("--dot", dt_dot, "also write a DOT file with the path in red");
    det->add_option("-o,--out", dt_out, "path file (or directory for batches)")->required();

    // cluster
    auto* clu = app.add_subcommand("cluster", "group detected paths by signature");
    fs::path cl_dir, cl_bundle, cl_out;
    clu->add_option("paths", cl_dir, "directory of path .json files")->required();
    clu->add_option("--bundle", cl_bundle, "reference bundle for the symmetry map");
    clu->add_option("-o,--out", cl_out, "output prefix (.csv and .json)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(layout, n, seed, lhs, rhs, synth_out);
        if (extract->parsed()) return cmd_extract(ex_in, exf, ex_out);
        if (flow->parsed()) return cmd_flow(fl_graph, fl_bundle, feature, flf, fl_out);
        if (segment->parsed()) return cmd_segment(sg_graph, sg_out);
        if (det->parsed()) return cmd_detect(dt_in, weight, dtf, dt_out, dt_dot);
        if (clu->parsed()) return cmd_cluster(cl_dir, cl_bundle, cl_out);
    } catch (const PipelineError& e) {
        std::cerr << "crashgraph: error " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "crashgraph: error: " << e.what() << "\n";
        return is_input_error(e) ? 2 : 3;
    }
    return 1;
}
