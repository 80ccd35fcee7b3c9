#pragma once

#include "errors.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace apesim {

using NodeId = std::uint32_t;

struct Coord3 {
    int x = 0;
    int y = 0;
    int z = 0;
    bool operator==(const Coord3&) const = default;
};

// 3D torus geometry. Dimensions of size 1 make the corresponding links
// self-loops; size 2 gives two parallel links to the same neighbor. Both occur
// on deployed machines (the reference platform is 4x4x1).
struct TorusSpec {
    int x = 4;
    int y = 4;
    int z = 1;

    int node_count() const { return x * y * z; }
    void validate() const {
        if (x < 1 || y < 1 || z < 1) {
            throw ConfigError("torus dims must be >= 1, got " + std::to_string(x) + "x" + std::to_string(y) + "x" +
                              std::to_string(z));
        }
    }
    bool operator==(const TorusSpec&) const = default;
};

enum class Direction : std::uint8_t { xp = 0, xm = 1, yp = 2, ym = 3, zp = 4, zm = 5 };

inline constexpr std::array<Direction, 6> all_directions = {Direction::xp, Direction::xm, Direction::yp,
                                                            Direction::ym, Direction::zp, Direction::zm};

constexpr Direction reverse(Direction d) {
    switch (d) {
    case Direction::xp: return Direction::xm;
    case Direction::xm: return Direction::xp;
    case Direction::yp: return Direction::ym;
    case Direction::ym: return Direction::yp;
    case Direction::zp: return Direction::zm;
    case Direction::zm: return Direction::zp;
    }
    return Direction::xp;
}

constexpr int axis_of(Direction d) { return static_cast<int>(d) / 2; }
constexpr int sign_of(Direction d) { return (static_cast<int>(d) % 2 == 0) ? +1 : -1; }

inline const char* to_string(Direction d) {
    switch (d) {
    case Direction::xp: return "+x";
    case Direction::xm: return "-x";
    case Direction::yp: return "+y";
    case Direction::ym: return "-y";
    case Direction::zp: return "+z";
    case Direction::zm: return "-z";
    }
    return "?";
}

inline Direction direction_from_string(const std::string& s) {
    for (const Direction d : all_directions) {
        if (s == to_string(d)) return d;
    }
    throw ConfigError("unknown direction '" + s + "'");
}

using Route = std::vector<Direction>;

inline Coord3 coord_of(NodeId n, const TorusSpec& spec) {
    if (static_cast<int>(n) >= spec.node_count()) {
        throw ConfigError("node id " + std::to_string(n) + " out of range for " + std::to_string(spec.node_count()) +
                          "-node torus");
    }
    const int i = static_cast<int>(n);
    return Coord3{i % spec.x, (i / spec.x) % spec.y, i / (spec.x * spec.y)};
}

inline NodeId node_of(const Coord3& c, const TorusSpec& spec) {
    if (c.x < 0 || c.x >= spec.x || c.y < 0 || c.y >= spec.y || c.z < 0 || c.z >= spec.z) {
        throw ConfigError("coordinate out of range");
    }
    return static_cast<NodeId>(c.x + spec.x * (c.y + spec.y * c.z));
}

inline NodeId neighbor(NodeId n, Direction d, const TorusSpec& spec) {
    Coord3 c = coord_of(n, spec);
    const int dims[3] = {spec.x, spec.y, spec.z};
    int* comps[3] = {&c.x, &c.y, &c.z};
    const int a = axis_of(d);
    *comps[a] = (*comps[a] + sign_of(d) + dims[a]) % dims[a];
    return node_of(c, spec);
}

inline std::array<NodeId, 6> neighbors(NodeId n, const TorusSpec& spec) {
    std::array<NodeId, 6> out{};
    for (const Direction d : all_directions) out[static_cast<int>(d)] = neighbor(n, d, spec);
    return out;
}

// Dimension-order (e-cube) route: resolve x, then y, then z. In each dimension
// take the shorter wrap direction; exact ties go the positive way. The result
// is minimal and deterministic.
inline Route route(NodeId src, NodeId dst, const TorusSpec& spec) {
    const Coord3 a = coord_of(src, spec);
    const Coord3 b = coord_of(dst, spec);
    const int dims[3] = {spec.x, spec.y, spec.z};
    const int from[3] = {a.x, a.y, a.z};
    const int to[3] = {b.x, b.y, b.z};
    static constexpr Direction plus[3] = {Direction::xp, Direction::yp, Direction::zp};
    static constexpr Direction minus[3] = {Direction::xm, Direction::ym, Direction::zm};

    Route r;
    for (int axis = 0; axis < 3; ++axis) {
        const int n = dims[axis];
        const int fwd = ((to[axis] - from[axis]) % n + n) % n;
        if (fwd == 0) continue;
        const int back = n - fwd;
        if (fwd <= back) {
            r.insert(r.end(), static_cast<std::size_t>(fwd), plus[axis]);
        } else {
            r.insert(r.end(), static_cast<std::size_t>(back), minus[axis]);
        }
    }
    return r;
}

// Minimal hop count on the torus (sum of per-dimension shortest wraps).
inline int torus_distance(NodeId src, NodeId dst, const TorusSpec& spec) {
    const Coord3 a = coord_of(src, spec);
    const Coord3 b = coord_of(dst, spec);
    const int dims[3] = {spec.x, spec.y, spec.z};
    const int from[3] = {a.x, a.y, a.z};
    const int to[3] = {b.x, b.y, b.z};
    int dist = 0;
    for (int axis = 0; axis < 3; ++axis) {
        const int n = dims[axis];
        const int fwd = ((to[axis] - from[axis]) % n + n) % n;
        dist += (fwd <= n - fwd) ? fwd : n - fwd;
    }
    return dist;
}

} // namespace apesim
