#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "crashgraph/bundle.hpp"
#include "crashgraph/errors.hpp"

namespace crashgraph {

enum class Layout : std::uint8_t { Frontal27, Mini8 };

inline const char* layout_name(Layout l) {
    return l == Layout::Frontal27 ? "frontal27" : "mini8";
}
inline Layout layout_from_name(const std::string& s) {
    if (s == "frontal27") return Layout::Frontal27;
    if (s == "mini8") return Layout::Mini8;
    throw ConfigError("unknown layout '" + s + "' (expected frontal27 or mini8)");
}

struct SynthConfig {
    int n_sims = 66;
    std::uint32_t seed = 7;
    Layout layout = Layout::Frontal27;
    double lhs_stiffness = 1.0; // extra multiplier on top of the sweep grid
    double rhs_stiffness = 1.0;

    void validate() const {
        if (n_sims < 1) throw ConfigError("n_sims must be >= 1");
        if (lhs_stiffness <= 0.0 || rhs_stiffness <= 0.0)
            throw ConfigError("stiffness multipliers must be > 0");
    }
};

namespace synth_detail {

constexpr double kPulseSpeed = 100.0; // mm/ms, nominal crash pulse propagation
constexpr double kSampleDt = 0.25;    // ms

enum class Side : std::uint8_t { Center, Left, Right };

struct PartSpec {
    int pid;
    const char* name;
    Box3 box;
    Side side;
    double energy;   // kJ at multiplier 1; scales with 1/stiffness
    double duration; // ms at multiplier 1; scales with stiffness
};

inline Box3 box(double x0, double x1, double y0, double y1, double z0, double z1) {
    return Box3{{x0, y0, z0}, {x1, y1, z1}};
}

// Mirror of a +y (left) box across y = 0.
inline Box3 ymirror(const Box3& b) {
    return Box3{{b.min.x, -b.max.y, b.min.z}, {b.max.x, -b.min.y, b.max.z}};
}

// Frontal structure: impactor proxy, three-part bumper, per side a crash-box,
// a two-plate-plus-reinforcement side-member front and rear, and a rail with a
// drop bracket; one cross-member brace with side pads under the side-members.
inline std::vector<PartSpec> frontal27_specs() {
    std::vector<PartSpec> s;
    auto add = [&](int pid, const char* name, const Box3& b, Side side, double e, double d) {
        s.push_back({pid, name, b, side, e, d});
    };
    auto add_lr = [&](int pid_l, int pid_r, const char* name_l, const char* name_r,
                      const Box3& left, double e, double d) {
        add(pid_l, name_l, left, Side::Left, e, d);
        add(pid_r, name_r, ymirror(left), Side::Right, e, d);
    };

    // The bumper stage saturates before any crash-box engages, and the
    // cross-member brace is a rigid relay (no measurable absorption), so the
    // absorption windows of the two sides never interleave with fixed central
    // timings.
    add(101, "impactor", box(-60, -5, -600, 600, 0, 300), Side::Center, 0.0, 1.0);
    add(201, "bumper-beam", box(0, 60, -550, 550, 50, 250), Side::Center, 18.0, 1.5);
    add(202, "bumper-absorber", box(30, 90, -520, 520, 60, 240), Side::Center, 26.0, 1.2);
    add(203, "bumper-rib", box(61, 89, -500, 500, 70, 230), Side::Center, 7.0, 1.0);
    add_lr(301, 351, "crashbox-outer-L", "crashbox-outer-R",
           box(95, 250, 250, 400, 80, 220), 42.0, 8.0);
    add_lr(302, 352, "crashbox-insert-L", "crashbox-insert-R",
           box(140, 230, 270, 380, 90, 210), 16.0, 8.0);
    add_lr(401, 451, "sidemember-front-lower-L", "sidemember-front-lower-R",
           box(255, 520, 260, 390, 80, 200), 30.0, 13.0);
    add_lr(402, 452, "sidemember-front-upper-L", "sidemember-front-upper-R",
           box(255, 520, 260, 390, 150, 205), 21.0, 12.0);
    add_lr(403, 453, "sidemember-front-reinf-L", "sidemember-front-reinf-R",
           box(256, 520, 280, 370, 90, 140), 9.0, 10.0);
    add_lr(501, 551, "sidemember-rear-lower-L", "sidemember-rear-lower-R",
           box(525, 790, 260, 390, 80, 200), 17.0, 17.0);
    add_lr(502, 552, "sidemember-rear-upper-L", "sidemember-rear-upper-R",
           box(525, 790, 260, 390, 150, 205), 12.0, 15.0);
    add_lr(503, 553, "sidemember-rear-reinf-L", "sidemember-rear-reinf-R",
           box(570, 760, 280, 370, 90, 140), 6.0, 11.0);
    add(601, "crossmember-main", box(400, 450, -390, 390, 0, 75), Side::Center, 0.0, 1.0);
    add_lr(602, 603, "crossmember-pad-L", "crossmember-pad-R",
           box(405, 445, 330, 450, 5, 70), 0.0, 1.0);
    add_lr(701, 751, "rail-main-L", "rail-main-R",
           box(105, 520, 300, 430, 225, 305), 13.0, 15.0);
    add_lr(702, 752, "rail-bracket-L", "rail-bracket-R",
           box(480, 560, 390, 500, 140, 310), 6.0, 14.0);
    return s;
}

// Desk-scale sketch: a chain of four components built from eight parts.
inline std::vector<PartSpec> mini8_specs() {
    std::vector<PartSpec> s;
    auto add = [&](int pid, const char* name, const Box3& b, double e, double d) {
        s.push_back({pid, name, b, Side::Center, e, d});
    };
    add(1, "head", box(0, 100, 0, 200, 0, 100), 12.0, 4.0);
    add(2, "body-main", box(105, 205, 0, 200, 0, 100), 20.0, 7.0);
    add(3, "body-insert", box(120, 180, 20, 180, 10, 90), 8.0, 6.0);
    add(4, "body-wing", box(150, 205, -80, 15, 0, 100), 10.0, 6.0);
    add(5, "mid-main", box(210, 310, 0, 200, 0, 100), 16.0, 9.0);
    add(6, "mid-insert", box(225, 285, 20, 180, 10, 90), 6.0, 8.0);
    add(7, "mid-wing", box(255, 310, 185, 280, 0, 100), 8.0, 8.0);
    add(8, "tail", box(315, 415, 0, 200, 0, 100), 9.0, 12.0);
    return s;
}

// Smooth saturating ramp: ie(t) = e_max * clamp((t - onset)/duration, 0, 1)^2,
// sampled on a fixed grid covering every part's saturation.
inline EnergyCurve sample_curve(double e_max, double onset, double duration, double t_end) {
    EnergyCurve c;
    const int n = static_cast<int>(std::ceil(t_end / kSampleDt)) + 1;
    c.times.reserve(n);
    c.values.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double t = k * kSampleDt;
        double u = duration > 0.0 ? (t - onset) / duration : (t >= onset ? 1.0 : 0.0);
        u = std::clamp(u, 0.0, 1.0);
        c.times.push_back(t);
        c.values.push_back(e_max * u * u);
    }
    return c;
}

inline SimulationBundle make_bundle(const std::string& sim_id,
                                    const std::vector<PartSpec>& specs, double m_left,
                                    double m_right, bool with_symmetry_map) {
    SimulationBundle b;
    b.sim_id = sim_id;
    b.impact_direction = {1.0, 0.0, 0.0};
    b.length_unit = "mm";
    b.time_unit = "ms";
    b.energy_unit = "kJ";

    double t_end = 0.0;
    auto mult_of = [&](Side s) {
        return s == Side::Left ? m_left : (s == Side::Right ? m_right : 1.0);
    };
    for (const PartSpec& ps : specs) {
        const double onset = std::max(0.0, ps.box.min.x) / kPulseSpeed;
        t_end = std::max(t_end, onset + ps.duration * mult_of(ps.side));
    }
    t_end = std::ceil(t_end) + 1.0;

    for (const PartSpec& ps : specs) {
        const double m = mult_of(ps.side);
        PartRecord p;
        p.pid = ps.pid;
        p.name = ps.name;
        p.box = ps.box;
        const double onset = std::max(0.0, ps.box.min.x) / kPulseSpeed;
        p.ie_curve = sample_curve(ps.energy / m, onset, ps.duration * m, t_end);
        b.parts.push_back(std::move(p));
    }

    if (with_symmetry_map) {
        std::vector<std::pair<int, int>> map;
        for (std::size_t i = 0; i < specs.size(); ++i) {
            if (specs[i].side != Side::Left) continue;
            // the mirrored right part is emitted immediately after its left twin
            map.emplace_back(specs[i].pid, specs[i + 1].pid);
        }
        std::sort(map.begin(), map.end());
        b.symmetry_map = std::move(map);
    }
    return b;
}

// Stiffness multiplier pairs for the sweep: sims 2p and 2p+1 are mirror images
// of each other. Pair 1 is the symmetric reference, pair 15 the soft-right and
// pair 30 the stiff-left one, so analog_3, analog_30/31 and analog_60/61 match
// the reference set semantics.
inline std::vector<std::pair<double, double>> sweep_pairs(int n_pairs, std::uint32_t seed) {
    static const double quant[] = {0.75, 0.85, 0.95, 1.0, 1.1, 1.25};
    std::mt19937 rng(seed);
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(n_pairs);
    for (int p = 0; p < n_pairs; ++p) {
        if (p == 1) {
            pairs.emplace_back(1.0, 1.0);
        } else if (p == 15) {
            pairs.emplace_back(1.0, 0.75);
        } else if (p == 30) {
            pairs.emplace_back(1.25, 1.0);
        } else {
            const double l = quant[rng() % std::size(quant)];
            const double r = quant[rng() % std::size(quant)];
            pairs.emplace_back(l, r);
        }
    }
    return pairs;
}

} // namespace synth_detail

// Deterministic parametric fleet: fixed geometry per layout, per-part IE ramps
// whose peak scales with 1/stiffness and absorption time with stiffness, onset
// growing with the distance from the impact face.
inline std::vector<SimulationBundle> generate(const SynthConfig& cfg) {
    cfg.validate();
    const auto specs = cfg.layout == Layout::Frontal27 ? synth_detail::frontal27_specs()
                                                       : synth_detail::mini8_specs();
    const bool sym = cfg.layout == Layout::Frontal27;

    const int n_pairs = (cfg.n_sims + 1) / 2;
    const auto pairs = synth_detail::sweep_pairs(n_pairs, cfg.seed);

    std::vector<SimulationBundle> out;
    out.reserve(cfg.n_sims);
    for (int i = 0; i < cfg.n_sims; ++i) {
        const auto [l, r] = pairs[i / 2];
        const bool mirrored = (i % 2) == 1;
        const double m_left = (mirrored ? r : l) * cfg.lhs_stiffness;
        const double m_right = (mirrored ? l : r) * cfg.rhs_stiffness;
        SimulationBundle b = synth_detail::make_bundle("analog_" + std::to_string(i), specs,
                                                       m_left, m_right, sym);
        b.validate();
        out.push_back(std::move(b));
    }
    return out;
}

} // namespace crashgraph
