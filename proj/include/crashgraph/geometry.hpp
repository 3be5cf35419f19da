#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "crashgraph/errors.hpp"

namespace crashgraph {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    double operator[](int k) const { return k == 0 ? x : (k == 1 ? y : z); }
    double& operator[](int k) { return k == 0 ? x : (k == 1 ? y : z); }

    bool operator==(const Vec3&) const = default;
};

// Axis-aligned box, min[k] <= max[k].
struct Box3 {
    Vec3 min;
    Vec3 max;

    bool valid() const {
        return min.x <= max.x && min.y <= max.y && min.z <= max.z;
    }
    double volume() const {
        return (max.x - min.x) * (max.y - min.y) * (max.z - min.z);
    }
    Vec3 center() const {
        return {(min.x + max.x) * 0.5, (min.y + max.y) * 0.5, (min.z + max.z) * 0.5};
    }
    bool contains(const Box3& b) const {
        for (int k = 0; k < 3; ++k)
            if (b.min[k] < min[k] || b.max[k] > max[k]) return false;
        return true;
    }
    Box3& unite(const Box3& b) {
        for (int k = 0; k < 3; ++k) {
            min[k] = std::min(min[k], b.min[k]);
            max[k] = std::max(max[k], b.max[k]);
        }
        return *this;
    }

    bool operator==(const Box3&) const = default;
};

// Volume of a ∩ b, 0 when disjoint. Symmetric.
inline double intersection_volume(const Box3& a, const Box3& b) {
    double v = 1.0;
    for (int k = 0; k < 3; ++k) {
        double lo = std::max(a.min[k], b.min[k]);
        double hi = std::min(a.max[k], b.max[k]);
        if (hi <= lo) return 0.0;
        v *= hi - lo;
    }
    return v;
}

// Euclidean length of the componentwise gap vector; 0 iff the boxes touch or overlap.
inline double gap_distance(const Box3& a, const Box3& b) {
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
        double g = std::max(a.min[k], b.min[k]) - std::min(a.max[k], b.max[k]);
        if (g > 0.0) s += g * g;
    }
    return std::sqrt(s);
}

enum class MergeKind : std::uint8_t { Full, Partial };

struct MergeEvent {
    int child_pid = 0;
    int parent_pid = 0;
    MergeKind kind = MergeKind::Full;

    bool operator==(const MergeEvent&) const = default;
};

// A group of parts merged by box overlap. box is the tight bound of the members,
// center its midpoint.
struct Component {
    int cid = 0;
    std::vector<int> member_pids; // sorted
    Box3 box;
    Vec3 center;
    std::vector<MergeEvent> merge_log;

    bool contains_pid(int pid) const {
        return std::binary_search(member_pids.begin(), member_pids.end(), pid);
    }
};

struct GroupingConfig {
    double full_threshold = 0.99;
    double partial_threshold = 0.05;
    double epsilon_volume = 1e-9; // lower clamp for the ratio denominator
    bool forbid_degenerate = false;

    void validate() const {
        if (!(full_threshold >= 0.0 && full_threshold <= 1.0) ||
            !(partial_threshold >= 0.0 && partial_threshold <= 1.0))
            throw ConfigError("grouping thresholds must lie in [0,1]");
        if (partial_threshold > full_threshold)
            throw ConfigError("partial_threshold must not exceed full_threshold");
    }
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace detail

// Partition parts into components by pairwise box overlap. For each pair the
// ratio r = vol(a ∩ b) / min(vol(a), vol(b)) decides: r >= full_threshold is a
// Full merge (containment), r >= partial_threshold a Partial merge. The parent
// of a merge is the larger box, ties broken by smaller pid. Components are
// numbered by ascending smallest member pid; the result is independent of the
// input part order.
//
// PartLike needs .pid and .box members.
template <class PartLike>
std::vector<Component> group_components(const std::vector<PartLike>& parts,
                                        const GroupingConfig& cfg = {}) {
    cfg.validate();
    if (parts.empty()) throw ValidationError("group_components: no parts given");

    const std::size_t n = parts.size();
    std::vector<double> vol(n);
    for (std::size_t i = 0; i < n; ++i) {
        vol[i] = parts[i].box.volume();
        if (cfg.forbid_degenerate && vol[i] < cfg.epsilon_volume)
            throw DegenerateGeometry("part pid " + std::to_string(parts[i].pid) +
                                     ": box volume below epsilon_volume");
    }

    // Scan pairs over parts sorted by descending volume (pid ties ascending).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (vol[a] != vol[b]) return vol[a] > vol[b];
        return parts[a].pid < parts[b].pid;
    });

    detail::UnionFind uf(n);
    std::vector<std::vector<MergeEvent>> events_of(n); // keyed by smaller sorted index

    for (std::size_t oi = 0; oi < n; ++oi) {
        for (std::size_t oj = oi + 1; oj < n; ++oj) {
            const std::size_t i = order[oi], j = order[oj];
            const double inter = intersection_volume(parts[i].box, parts[j].box);
            if (inter <= 0.0) continue;
            const double denom = std::max(cfg.epsilon_volume, std::min(vol[i], vol[j]));
            const double r = inter / denom;
            MergeKind kind;
            if (r >= cfg.full_threshold)
                kind = MergeKind::Full;
            else if (r >= cfg.partial_threshold)
                kind = MergeKind::Partial;
            else
                continue;
            // parent = larger volume, tie-break smaller pid
            std::size_t parent = i, child = j;
            if (vol[j] > vol[i] ||
                (vol[j] == vol[i] && parts[j].pid < parts[i].pid)) {
                parent = j;
                child = i;
            }
            events_of[i].push_back(
                {parts[child].pid, parts[parent].pid, kind});
            uf.unite(static_cast<int>(i), static_cast<int>(j));
        }
    }

    // Collect members per union-find root.
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[uf.find(static_cast<int>(i))].push_back(i);

    std::vector<Component> components;
    components.reserve(groups.size());
    for (auto& [root, members] : groups) {
        Component c;
        c.box = parts[members.front()].box;
        for (std::size_t i : members) {
            c.member_pids.push_back(parts[i].pid);
            c.box.unite(parts[i].box);
            for (const MergeEvent& ev : events_of[i]) c.merge_log.push_back(ev);
        }
        std::sort(c.member_pids.begin(), c.member_pids.end());
        std::sort(c.merge_log.begin(), c.merge_log.end(),
                  [](const MergeEvent& a, const MergeEvent& b) {
                      if (a.child_pid != b.child_pid) return a.child_pid < b.child_pid;
                      return a.parent_pid < b.parent_pid;
                  });
        c.center = c.box.center();
        components.push_back(std::move(c));
    }
    std::sort(components.begin(), components.end(),
              [](const Component& a, const Component& b) {
                  return a.member_pids.front() < b.member_pids.front();
              });
    for (std::size_t i = 0; i < components.size(); ++i)
        components[i].cid = static_cast<int>(i);
    return components;
}

// Parts that took part in a Partial merge (as child or parent) represent their
// component alongside the largest member.
inline std::vector<int> partial_participants(const Component& c) {
    std::vector<int> pids;
    for (const MergeEvent& ev : c.merge_log) {
        if (ev.kind != MergeKind::Partial) continue;
        pids.push_back(ev.child_pid);
        pids.push_back(ev.parent_pid);
    }
    std::sort(pids.begin(), pids.end());
    pids.erase(std::unique(pids.begin(), pids.end()), pids.end());
    return pids;
}

} // namespace crashgraph
