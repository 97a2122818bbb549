#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "kazhdan/chevalley.hpp"

using namespace kazhdan;

namespace {

IntMatrix delta(int d, int i, int j) {
    IntMatrix m = IntMatrix::Zero(d, d);
    m(i, j) = 1;
    return m;
}

int root_index(const RootSystem& om, std::initializer_list<std::int64_t> c) {
    IntVector v(static_cast<Eigen::Index>(c.size()));
    int k = 0;
    for (auto x : c) v(k++) = x;
    return om.find(v);
}

std::string key(const IntMatrix& m) {
    std::string s;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) s += std::to_string(m(i, j)) + ",";
    return s;
}

// Independent BFS over string keys.
std::vector<std::size_t> oracle_levels(const std::vector<IntMatrix>& gens, int R) {
    const auto d = gens[0].rows();
    std::set<std::string> seen{key(IntMatrix::Identity(d, d))};
    std::vector<IntMatrix> frontier{IntMatrix::Identity(d, d)};
    std::vector<std::size_t> out{1};
    for (int r = 1; r <= R; ++r) {
        std::vector<IntMatrix> next;
        for (const auto& g : frontier)
            for (const auto& s : gens) {
                IntMatrix h = g * s;
                if (seen.insert(key(h)).second) next.push_back(h);
            }
        frontier = std::move(next);
        out.push_back(seen.size());
    }
    return out;
}

}  // namespace

TEST_CASE("type A generators") {
    const auto g = steinberg_generators('A', 2);
    CHECK(g.size() == 12);
    CHECK(g.dim == 3);
    const int a = root_index(g.system, {1, -1, 0});
    REQUIRE(a >= 0);
    CHECK(g.plus[a] == IntMatrix(IntMatrix::Identity(3, 3) + delta(3, 0, 1)));
    CHECK(g.minus[a] == IntMatrix(IntMatrix::Identity(3, 3) - delta(3, 0, 1)));
}

TEST_CASE("type C generators") {
    const auto g = steinberg_generators('C', 2);
    CHECK(g.size() == 16);
    CHECK(g.dim == 4);
    const int l = root_index(g.system, {2, 0});
    CHECK(g.plus[l] == IntMatrix(IntMatrix::Identity(4, 4) + delta(4, 0, 2)));
    const int s = root_index(g.system, {1, 1});
    const IntMatrix off = g.plus[s] - IntMatrix::Identity(4, 4);
    CHECK(off.cwiseAbs().sum() == 2);
    CHECK(off(0, 3) == 1);
    CHECK(off(1, 2) == 1);
    const IntMatrix j = symplectic_form(2);
    for (std::size_t k = 0; k < g.plus.size(); ++k) {
        CHECK(IntMatrix(g.plus[k].transpose() * j * g.plus[k]) == j);
        CHECK(determinant(g.plus[k]) == 1);
        CHECK(IntMatrix(g.plus[k] * g.minus[k]) == IntMatrix::Identity(4, 4));
    }
}

TEST_CASE("unsupported realizations") {
    for (char f : {'B', 'D', 'E', 'F', 'G'}) CHECK_THROWS_AS(steinberg_generators(f, f == 'E' ? 6 : 4), UnsupportedRealization);
    CHECK_THROWS_AS(steinberg_generators('C', 1), DomainError);
}

TEST_CASE("generator invariants") {
    for (auto [f, r] : std::vector<std::pair<char, int>>{{'A', 2}, {'A', 3}, {'C', 2}, {'C', 3}}) {
        const auto g = steinberg_generators(f, r);
        const auto& om = g.system;
        const int n = static_cast<int>(om.size());
        std::set<std::string> all;
        for (const auto& m : g.elements()) all.insert(key(m));
        CHECK(all.size() == g.size());
        for (int a = 0; a < n; ++a) {
            CHECK(g.plus[a].transpose() == g.plus[om.negative(a)]);
            for (int b = 0; b < n; ++b) {
                if (om.inner(a, b) != 0) continue;
                const bool sum_is_root = om.find(om.roots[a].coords + om.roots[b].coords) >= 0;
                for (const auto* x : {&g.plus[a], &g.minus[a]})
                    for (const auto* y : {&g.plus[b], &g.minus[b]})
                        CHECK((IntMatrix(*x * *y) == IntMatrix(*y * *x)) == !sum_is_root);
            }
        }
    }
}

TEST_CASE("Steinberg relation in type A") {
    // w = x_a(1) x_{-a}(-1) x_a(1) has order 4
    const auto g = steinberg_generators('A', 3);
    for (int a = 0; a < static_cast<int>(g.system.size()); ++a) {
        const IntMatrix w = g.plus[a] * g.minus[g.system.negative(a)] * g.plus[a];
        const IntMatrix w2 = w * w;
        const auto d = g.dim;
        CHECK(w2 != IntMatrix::Identity(d, d));
        CHECK(IntMatrix(w2 * w2) == IntMatrix::Identity(d, d));
    }
}

TEST_CASE("subsystem embedding C2 in C3") {
    const auto g2 = steinberg_generators('C', 2);
    const auto g3 = steinberg_generators('C', 3);
    for (int a = 0; a < static_cast<int>(g2.system.size()); ++a) {
        IntVector v = IntVector::Zero(3);
        v.head(2) = g2.system.roots[a].coords;
        const int b = g3.system.find(v);
        REQUIRE(b >= 0);
        // rows/cols {0,1,3,4} of the 6x6 matrix
        const std::array<int, 4> idx{0, 1, 3, 4};
        IntMatrix sub(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) sub(i, j) = g3.plus[b](idx[i], idx[j]);
        CHECK(sub == g2.plus[a]);
        CHECK(g3.plus[b](2, 2) == 1);
        CHECK(g3.plus[b](5, 5) == 1);
    }
}

TEST_CASE("ball sizes") {
    const auto a2 = steinberg_generators('A', 2);
    CHECK(enumerate_ball(a2, 0).size() == 1);
    CHECK(enumerate_ball(a2, 1).size() == 13);
    const auto b = enumerate_ball(a2, 4);
    CHECK(b.level_sizes() == std::vector<std::size_t>{1, 13, 121, 883, 5455});
    CHECK(oracle_levels(a2.elements(), 3) == std::vector<std::size_t>{1, 13, 121, 883});
    const auto c2 = steinberg_generators('C', 2);
    const auto bc = enumerate_ball(c2, 4);
    CHECK(bc.level_sizes() == std::vector<std::size_t>{1, 17, 209, 2073, 18313});
    CHECK(oracle_levels(c2.elements(), 3) == std::vector<std::size_t>{1, 17, 209, 2073});
    CHECK(enumerate_ball(steinberg_generators('C', 3), 2).size() == 961);
    CHECK_THROWS_AS(enumerate_ball(a2, 4, 1000), ResourceError);
}

TEST_CASE("ball structure") {
    const auto c2 = steinberg_generators('C', 2);
    const auto b = enumerate_ball(c2, 3);
    CHECK(b.element(0) == IntMatrix::Identity(4, 4));
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto inv = b.inverse(i);
        CHECK(b.word_length(inv) == b.word_length(i));
        CHECK(b.inverse(inv) == i);
        CHECK(IntMatrix(b.element(i) * b.element(inv)) == IntMatrix::Identity(4, 4));
        CHECK(b.find(b.element(i)) == std::optional<std::uint32_t>(static_cast<std::uint32_t>(i)));
    }
    // determinism
    const auto b2 = enumerate_ball(c2, 3);
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.element(i) == b2.element(i));
}

TEST_CASE("product table") {
    const auto a2 = steinberg_generators('A', 2);
    const auto big = enumerate_ball(a2, 4);
    const auto t = product_table(big, 2);
    CHECK(t.n == 121);
    for (std::size_t j = 0; j < t.n; ++j) CHECK(t(0, j) == j);
    for (std::size_t i = 0; i < t.n; ++i) CHECK(t(i, big.inverse(i)) == 0);
    const int a = root_index(a2.system, {1, -1, 0});
    const int c = root_index(a2.system, {0, 1, -1});
    const auto ia = *big.find(a2.plus[a]);
    const auto ic = *big.find(a2.plus[c]);
    const IntMatrix prod = a2.plus[a] * a2.plus[c];
    CHECK(big.element(t(ia, ic)) == prod);
    for (std::size_t i = 0; i < t.n; i += 7)
        for (std::size_t j = 0; j < t.n; j += 5) CHECK(big.element(t(i, j)) == IntMatrix(big.element(i) * big.element(j)));
    const auto small = enumerate_ball(a2, 2);
    const auto t2 = product_table(small, big);
    CHECK(t2.table == t.table);
}

TEST_CASE("cache round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "kazhdan_test_cache";
    std::filesystem::remove_all(dir);
    const auto a2 = steinberg_generators('A', 2);
    const auto first = ball_with_table(a2.elements(), "A2", 1, dir);
    const auto second = ball_with_table(a2.elements(), "A2", 1, dir);
    REQUIRE(first.ball.size() == second.ball.size());
    for (std::size_t i = 0; i < first.ball.size(); ++i) CHECK(first.ball.element(i) == second.ball.element(i));
    CHECK(first.table.table == second.table.table);
    CHECK(!std::filesystem::is_empty(dir));
    // a different generating set must not reuse the files
    const auto c2 = steinberg_generators('C', 2);
    const auto other = ball_with_table(c2.elements(), "A2", 1, dir);
    CHECK(other.ball.dim == 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("matrix serialization") {
    IntMatrix m(2, 2);
    m << 1, -2, 3, 4;
    CHECK(parse_matrix(serialize_matrix(m)) == m);
    CHECK_THROWS(parse_matrix("garbage"));
}

TEST_CASE("overflow is detected") {
    IntMatrix m = IntMatrix::Identity(2, 2);
    m(0, 1) = std::int64_t{1} << 62;
    CHECK_THROWS_AS(checked_product(m, m), ResourceError);
}
