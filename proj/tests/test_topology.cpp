#include <apesim/topology.hpp>

#include <catch2/catch.hpp>

#include <queue>
#include <vector>

using namespace apesim;

namespace {

// Reference shortest-path distances by breadth-first search over the torus
// graph, independent of the dimension-order routing under test.
std::vector<int> bfs_distances(NodeId src, const TorusSpec& spec) {
    std::vector<int> dist(static_cast<std::size_t>(spec.node_count()), -1);
    std::queue<NodeId> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
        const NodeId n = q.front();
        q.pop();
        for (const Direction d : all_directions) {
            const NodeId m = neighbor(n, d, spec);
            if (dist[m] < 0) {
                dist[m] = dist[n] + 1;
                q.push(m);
            }
        }
    }
    return dist;
}

NodeId apply_route(NodeId src, const Route& r, const TorusSpec& spec) {
    NodeId cur = src;
    for (const Direction d : r) cur = neighbor(cur, d, spec);
    return cur;
}

} // namespace

TEST_CASE("coordinate arithmetic on the 4x4x1 machine") {
    const TorusSpec spec{4, 4, 1};
    CHECK(coord_of(0, spec) == Coord3{0, 0, 0});
    CHECK(coord_of(7, spec) == Coord3{3, 1, 0});
    CHECK_THROWS_AS(coord_of(16, spec), ConfigError);
}

TEST_CASE("coord/node round-trip is the identity") {
    const TorusSpec spec{4, 4, 1};
    for (NodeId n = 0; n < 16; ++n) CHECK(node_of(coord_of(n, spec), spec) == n);
}

TEST_CASE("wraparound neighbours") {
    const TorusSpec spec{4, 4, 1};
    CHECK(neighbor(node_of({0, 0, 0}, spec), Direction::xm, spec) == node_of({3, 0, 0}, spec));
    for (NodeId n = 0; n < 16; ++n) {
        // size-1 dimension: the z links are self-loops
        CHECK(neighbor(n, Direction::zp, spec) == n);
        CHECK(neighbor(n, Direction::zm, spec) == n);
    }
}

TEST_CASE("neighbour symmetry over every directed link") {
    const TorusSpec spec{4, 4, 1};
    for (NodeId n = 0; n < 16; ++n) {
        for (const Direction d : all_directions) {
            const NodeId m = neighbor(n, d, spec);
            CHECK(neighbor(m, reverse(d), spec) == n);
        }
    }
}

TEST_CASE("size-2 dimensions give parallel links to the same neighbour") {
    const TorusSpec spec{2, 1, 1};
    CHECK(neighbor(0, Direction::xp, spec) == 1);
    CHECK(neighbor(0, Direction::xm, spec) == 1);
}

TEST_CASE("route basics") {
    const TorusSpec spec{4, 4, 1};
    CHECK(route(5, 5, spec).empty());
    const Route r = route(node_of({0, 0, 0}, spec), node_of({3, 1, 0}, spec), spec);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == Direction::xm); // the wrap is shorter than three +x hops
    CHECK(r[1] == Direction::yp);
}

TEST_CASE("ties in even dimensions break toward the positive direction") {
    const TorusSpec spec{4, 1, 1};
    const Route r = route(0, 2, spec);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == Direction::xp);
    CHECK(r[1] == Direction::xp);
}

TEST_CASE("routes are minimal, reach their destination and respect per-dimension bounds") {
    for (int x = 1; x <= 5; ++x) {
        for (int y = 1; y <= 5; ++y) {
            for (int z = 1; z <= 5; ++z) {
                const TorusSpec spec{x, y, z};
                const int n = spec.node_count();
                for (NodeId src = 0; src < static_cast<NodeId>(n); ++src) {
                    const std::vector<int> dist = bfs_distances(src, spec);
                    for (NodeId dst = 0; dst < static_cast<NodeId>(n); ++dst) {
                        const Route r = route(src, dst, spec);
                        REQUIRE(static_cast<int>(r.size()) == dist[dst]);
                        REQUIRE(static_cast<int>(r.size()) == torus_distance(src, dst, spec));
                        REQUIRE(apply_route(src, r, spec) == dst);
                        int per_axis[3] = {0, 0, 0};
                        for (const Direction d : r) ++per_axis[axis_of(d)];
                        const int dims[3] = {x, y, z};
                        for (int a = 0; a < 3; ++a) CHECK(per_axis[a] <= dims[a] / 2);
                    }
                }
            }
        }
    }
}

TEST_CASE("degenerate dimensions are rejected") {
    CHECK_THROWS_AS(TorusSpec(0, 4, 1).validate(), ConfigError);
    CHECK_THROWS_AS(TorusSpec(4, -1, 1).validate(), ConfigError);
}
