#include <doctest.h>

#include <algorithm>
#include <set>

#include "hdl/errors.hpp"
#include "hdl/graph.hpp"

using namespace hdl;

namespace {

Dag chain3() { return Dag(3, {{1, 2}, {2, 3}}); }

// Brute-force reachability by repeated edge relaxation, independent of the
// library's DFS.
std::set<int> reachable_from(const Dag& dag, int start) {
    std::set<int> out;
    bool grew = true;
    out.insert(start);
    while (grew) {
        grew = false;
        for (const auto& [u, v] : dag.edges()) {
            if (out.count(u) && !out.count(v)) {
                out.insert(v);
                grew = true;
            }
        }
    }
    out.erase(start);
    return out;
}

}  // namespace

TEST_CASE("parents") {
    const Dag chain = chain3();
    CHECK(chain.parents(2) == std::vector<int>{1});
    CHECK(chain.parents(1).empty());
    const Dag collider(3, {{1, 2}, {3, 2}});
    CHECK(collider.parents(2) == std::vector<int>{1, 3});
    CHECK_THROWS_AS(chain.parents(4), input_error);
    CHECK_THROWS_AS(chain.parents(0), input_error);
}

TEST_CASE("ancestors and descendants") {
    const Dag chain = chain3();
    CHECK(chain.ancestors(3) == std::vector<int>{1, 2});
    CHECK(chain.ancestors(1).empty());
    CHECK(chain.descendants(1) == std::vector<int>{2, 3});
    CHECK(chain.descendants(3).empty());

    const Dag square(4, {{1, 3}, {1, 4}, {2, 3}, {2, 4}});
    CHECK(square.ancestors(4) == std::vector<int>{1, 2});

    // Hub: node 1 feeds every other node directly.
    const Dag star(5, {{1, 2}, {1, 3}, {1, 4}, {1, 5}});
    CHECK(star.descendants(1) == std::vector<int>{2, 3, 4, 5});
    CHECK_THROWS_AS(chain.ancestors(9), input_error);
}

TEST_CASE("topological sort is deterministic") {
    CHECK(chain3().topological_sort() == Ordering{1, 2, 3});
    CHECK(Dag(3, {}).topological_sort() == Ordering{1, 2, 3});
    CHECK(Dag(3, {{2, 1}, {2, 3}}).topological_sort() == Ordering{2, 1, 3});
}

TEST_CASE("cycles are rejected at construction") {
    CHECK_THROWS_AS(Dag(3, {{1, 2}, {2, 3}, {3, 1}}), structure_error);
    CHECK_THROWS_AS(Dag(2, {{1, 2}, {1, 2}}), structure_error);
    CHECK_THROWS_AS(Dag(2, {{1, 1}}), structure_error);
    CHECK_THROWS_AS(Dag(2, {{1, 3}}), input_error);
}

TEST_CASE("ordering consistency") {
    const Dag chain = chain3();
    CHECK(chain.is_consistent_ordering({1, 2, 3}));
    CHECK_FALSE(chain.is_consistent_ordering({3, 2, 1}));
    const Dag empty(3, {});
    CHECK(empty.is_consistent_ordering({2, 3, 1}));
    CHECK_THROWS_AS(chain.is_consistent_ordering({1, 1, 2}), input_error);
}

TEST_CASE("ancestor/descendant duality on random graphs") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const WeightedDag wdag = random_dag(2 + seed % 7, 3, seed);
        const Dag& dag = wdag.dag();
        const int p = dag.node_count();
        for (int v = 1; v <= p; ++v) {
            const auto desc = dag.descendants(v);
            CHECK(std::set<int>(desc.begin(), desc.end()) == reachable_from(dag, v));
            for (int u = 1; u <= p; ++u) {
                if (u == v) continue;
                const auto anc_u = dag.ancestors(u);
                const bool v_above_u =
                    std::binary_search(anc_u.begin(), anc_u.end(), v);
                const bool u_below_v =
                    std::binary_search(desc.begin(), desc.end(), u);
                CHECK(v_above_u == u_below_v);
            }
        }
        CHECK(dag.is_consistent_ordering(dag.topological_sort()));
    }
}

TEST_CASE("weighted dag validates support") {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(WeightedDag(Dag(2, {{1, 2}}), b), structure_error);
    b(1, 0) = 0.7;
    const WeightedDag ok(Dag(2, {{1, 2}}), b);
    CHECK(ok.coeff(2, 1) == 0.7);
    b(0, 1) = 0.1;
    CHECK_THROWS_AS(WeightedDag(Dag(2, {{1, 2}}), b), structure_error);
}

TEST_CASE("random_dag generation rule") {
    CHECK_THROWS_AS(random_dag(1, 3, std::uint64_t{0}), input_error);

    const WeightedDag pair = random_dag(2, 3, std::uint64_t{11});
    CHECK(pair.dag().edges() == std::vector<std::pair<int, int>>{{1, 2}});
    const double w = pair.coeff(2, 1);
    CHECK(std::abs(w) > 0.5);
    CHECK(std::abs(w) < 1.0);

    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const WeightedDag wdag = random_dag(9, 3, seed);
        const Dag& dag = wdag.dag();
        Ordering natural(9);
        for (int v = 1; v <= 9; ++v) natural[v - 1] = v;
        CHECK(dag.is_consistent_ordering(natural));
        for (int v = 2; v <= 9; ++v) {
            CHECK(dag.parents(v).size() <= 3);
            CHECK(dag.has_edge(v - 1, v));
            const double backbone = wdag.coeff(v, v - 1);
            CHECK(std::abs(backbone) > 0.5);
            CHECK(std::abs(backbone) < 1.0);
            for (int u : dag.parents(v)) {
                if (u == v - 1) continue;
                CHECK(std::abs(wdag.coeff(v, u)) == doctest::Approx(0.2));
            }
        }
        CHECK(dag.has_unique_topological_order());
    }
}

TEST_CASE("generators are deterministic in the seed") {
    const WeightedDag a = random_dag(12, 3, std::uint64_t{42});
    const WeightedDag b = random_dag(12, 3, std::uint64_t{42});
    CHECK(a.dag().edges() == b.dag().edges());
    CHECK(a.coeffs() == b.coeffs());
    const WeightedDag c = random_dag(12, 3, std::uint64_t{43});
    CHECK(a.dag().edges() != c.dag().edges());

    const WeightedDag h1 = hub_dag(30, 3, std::uint64_t{7});
    const WeightedDag h2 = hub_dag(30, 3, std::uint64_t{7});
    CHECK(h1.dag().edges() == h2.dag().edges());
    CHECK(h1.coeffs() == h2.coeffs());
}

TEST_CASE("hub_dag structure") {
    CHECK_THROWS_AS(hub_dag(3, 3, std::uint64_t{0}), input_error);

    const WeightedDag wdag = hub_dag(100, 3, std::uint64_t{5});
    const Dag& dag = wdag.dag();
    int hub_out = 0;
    for (int h = 1; h <= 3; ++h) hub_out += static_cast<int>(dag.children(h).size());
    CHECK(hub_out >= 97);

    for (int v = 1; v <= 100; ++v) CHECK(dag.parents(v).size() <= 2);
    // Non-hub nodes beyond the first hub successor always gain a second edge.
    for (int v = 5; v <= 100; ++v) CHECK(dag.parents(v).size() == 2);
    for (int v = 2; v <= 100; ++v) {
        CHECK(dag.has_edge(v - 1, v));
        const double backbone = wdag.coeff(v, v - 1);
        CHECK(std::abs(backbone) > 0.65);
        CHECK(std::abs(backbone) < 1.0);
    }
    CHECK(dag.topological_sort().front() == 1);
    CHECK(dag.has_unique_topological_order());
}
