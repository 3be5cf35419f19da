#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crashgraph/errors.hpp"
#include "crashgraph/geometry.hpp"

namespace crashgraph {

// Cumulative internal-energy history of one part. Times strictly increase,
// values accumulate (non-decreasing up to a small relative tolerance).
struct EnergyCurve {
    std::vector<double> times;
    std::vector<double> values;

    bool operator==(const EnergyCurve&) const = default;

    double max_value() const {
        return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    }

    void validate(int pid) const {
        const std::string where = "part pid " + std::to_string(pid) + " field ie_curve";
        if (times.size() < 2)
            throw ValidationError(where + ".times: need at least 2 samples");
        if (times.size() != values.size())
            throw ValidationError(where + ": times and values differ in length");
        for (std::size_t i = 1; i < times.size(); ++i)
            if (!(times[i] > times[i - 1]))
                throw ValidationError(where + ".times: not strictly increasing at index " +
                                      std::to_string(i));
        const double tol = 1e-6 * max_value();
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] < 0.0)
                throw ValidationError(where + ".values: negative value at index " +
                                      std::to_string(i));
            if (i > 0 && values[i] < values[i - 1] - tol)
                throw ValidationError(where + ".values: decreasing beyond tolerance at index " +
                                      std::to_string(i));
        }
    }
};

struct PartRecord {
    int pid = 0;
    std::string name;
    Box3 box;
    EnergyCurve ie_curve;

    bool operator==(const PartRecord&) const = default;

    void validate() const {
        const std::string where = "part pid " + std::to_string(pid);
        if (pid <= 0) throw ValidationError(where + " field pid: must be positive");
        if (name.empty()) throw ValidationError(where + " field name: empty");
        if (!box.valid()) throw ValidationError(where + " field box: min exceeds max");
        ie_curve.validate(pid);
    }
};

// One simulation: parts with boxes and energy curves, plus the impact direction
// that orients every extracted edge.
struct SimulationBundle {
    std::string sim_id;
    Vec3 impact_direction{1.0, 0.0, 0.0};
    std::string length_unit = "mm";
    std::string time_unit = "ms";
    std::string energy_unit = "kJ";
    std::vector<PartRecord> parts;
    std::optional<std::vector<std::pair<int, int>>> symmetry_map; // (lhs pid, rhs pid)

    bool operator==(const SimulationBundle&) const = default;

    const PartRecord* find_part(int pid) const {
        for (const PartRecord& p : parts)
            if (p.pid == pid) return &p;
        return nullptr;
    }

    void validate() const {
        if (std::abs(impact_direction.norm() - 1.0) > 1e-9)
            throw ValidationError("impact_direction: norm differs from 1 by more than 1e-9");
        if (parts.size() < 2)
            throw ValidationError("parts: need at least 2, got " + std::to_string(parts.size()));
        std::vector<int> pids;
        for (const PartRecord& p : parts) {
            p.validate();
            pids.push_back(p.pid);
        }
        std::sort(pids.begin(), pids.end());
        for (std::size_t i = 1; i < pids.size(); ++i)
            if (pids[i] == pids[i - 1])
                throw ValidationError("parts: duplicate pid " + std::to_string(pids[i]));
        if (symmetry_map) {
            std::vector<int> seen;
            for (auto [l, r] : *symmetry_map) {
                if (l == r)
                    throw ValidationError("symmetry_map: pid " + std::to_string(l) +
                                          " paired with itself");
                for (int pid : {l, r}) {
                    if (!std::binary_search(pids.begin(), pids.end(), pid))
                        throw ValidationError("symmetry_map: unknown pid " + std::to_string(pid));
                    seen.push_back(pid);
                }
            }
            std::sort(seen.begin(), seen.end());
            for (std::size_t i = 1; i < seen.size(); ++i)
                if (seen[i] == seen[i - 1])
                    throw ValidationError("symmetry_map: pid " + std::to_string(seen[i]) +
                                          " appears in more than one pair");
        }
    }
};

// Lateral axis index used for mirroring; y by convention (x is the impact axis).
inline constexpr int kLateralAxis = 1;

// Midpoint of the model extent along the lateral axis; the mirror plane.
inline double lateral_midplane(const SimulationBundle& b, int axis = kLateralAxis) {
    double lo = b.parts.front().box.min[axis];
    double hi = b.parts.front().box.max[axis];
    for (const PartRecord& p : b.parts) {
        lo = std::min(lo, p.box.min[axis]);
        hi = std::max(hi, p.box.max[axis]);
    }
    return 0.5 * (lo + hi);
}

inline Box3 mirror_box(const Box3& box, double plane, int axis = kLateralAxis) {
    Box3 m = box;
    m.min[axis] = 2.0 * plane - box.max[axis];
    m.max[axis] = 2.0 * plane - box.min[axis];
    return m;
}

// Build a (lhs pid, rhs pid) map by matching mirrored box corners within
// tol_rel times the model extent. Parts whose mirror image is themselves
// (central parts) are not paired. The +lateral side is called "left".
inline std::vector<std::pair<int, int>> derive_symmetry_map(const SimulationBundle& b,
                                                            double tol_rel = 1e-6,
                                                            int axis = kLateralAxis) {
    const double plane = lateral_midplane(b, axis);
    double extent = 0.0;
    for (const PartRecord& p : b.parts)
        extent = std::max({extent, p.box.max[axis] - p.box.min[axis],
                           std::abs(p.box.max[axis] - plane), std::abs(p.box.min[axis] - plane)});
    const double tol = tol_rel * std::max(1.0, 2.0 * extent);

    auto close = [&](const Box3& a, const Box3& c) {
        for (int k = 0; k < 3; ++k)
            if (std::abs(a.min[k] - c.min[k]) > tol || std::abs(a.max[k] - c.max[k]) > tol)
                return false;
        return true;
    };

    std::vector<std::pair<int, int>> map;
    for (const PartRecord& p : b.parts) {
        if (p.box.center()[axis] <= plane + tol) continue; // pair from the +side only
        const Box3 want = mirror_box(p.box, plane, axis);
        for (const PartRecord& q : b.parts) {
            if (q.pid == p.pid) continue;
            if (close(q.box, want)) {
                map.emplace_back(p.pid, q.pid);
                break;
            }
        }
    }
    std::sort(map.begin(), map.end());
    return map;
}

// Reflect the geometry across the lateral midplane and swap the curves of
// mirrored part pairs. Part pids, names and ordering stay put, so for a
// geometrically symmetric model the boxes come back bit-identical.
inline SimulationBundle mirror_bundle(const SimulationBundle& b, int axis = kLateralAxis) {
    SimulationBundle m = b;
    const double plane = lateral_midplane(b, axis);
    const auto pairs = b.symmetry_map ? *b.symmetry_map : derive_symmetry_map(b, 1e-6, axis);

    auto index_of = [&](int pid) -> std::size_t {
        for (std::size_t i = 0; i < b.parts.size(); ++i)
            if (b.parts[i].pid == pid) return i;
        throw ValidationError("mirror_bundle: symmetry_map names unknown pid " +
                              std::to_string(pid));
    };

    for (std::size_t i = 0; i < m.parts.size(); ++i)
        m.parts[i].box = mirror_box(b.parts[i].box, plane, axis);
    for (auto [l, r] : pairs) {
        const std::size_t il = index_of(l), ir = index_of(r);
        m.parts[il].box = mirror_box(b.parts[ir].box, plane, axis);
        m.parts[ir].box = mirror_box(b.parts[il].box, plane, axis);
        m.parts[il].ie_curve = b.parts[ir].ie_curve;
        m.parts[ir].ie_curve = b.parts[il].ie_curve;
    }
    return m;
}

} // namespace crashgraph
