#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kazhdan/rootsys.hpp"
#include "kazhdan/types.hpp"

namespace kazhdan {

using GroupElement = IntMatrix;

// Product with overflow checking; throws ResourceError on overflow.
IntMatrix checked_product(const IntMatrix& a, const IntMatrix& b);
// Exact determinant (fraction-free elimination).
std::int64_t determinant(const IntMatrix& m);
// J = [[0, I], [-I, 0]], pairing index i with i + n.
IntMatrix symplectic_form(int n);
bool is_symplectic(const IntMatrix& m);

struct GeneratorSet {
    RootSystem system;
    int dim = 0;
    std::vector<IntMatrix> plus;   // x_α(1), indexed like system.roots
    std::vector<IntMatrix> minus;  // x_α(−1)

    std::size_t size() const { return 2 * plus.size(); }
    // Generating tuple in grading order: x_α0(1), x_α0(−1), x_α1(1), ...
    std::vector<IntMatrix> elements() const;
};

IntMatrix steinberg_element(const RootSystem& omega, int root, std::int64_t t);
GeneratorSet steinberg_generators(char family, int rank);

// Word-metric ball, stored flat (row-major entries, element after element).
class Ball {
public:
    int radius = 0;
    int dim = 0;

    std::size_t size() const { return word_length_.size(); }
    IntMatrix element(std::size_t i) const;
    const std::int64_t* data(std::size_t i) const { return data_.data() + i * stride(); }
    int word_length(std::size_t i) const { return word_length_[i]; }
    std::uint32_t inverse(std::size_t i) const { return inverse_[i]; }
    // Number of elements of word length <= r.
    std::size_t count_within(int r) const;
    std::vector<std::size_t> level_sizes() const;
    std::optional<std::uint32_t> find(const std::int64_t* entries) const;
    std::optional<std::uint32_t> find(const IntMatrix& m) const;

    std::size_t stride() const { return static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim); }

    friend Ball enumerate_ball(const std::vector<IntMatrix>& gens, int R, std::size_t cap);
    friend void save_ball(const Ball& ball, const std::filesystem::path& path, std::uint64_t fingerprint);
    friend std::optional<Ball> load_ball(const std::filesystem::path& path, std::uint64_t fingerprint);

private:
    std::vector<std::int64_t> data_;
    std::vector<std::uint8_t> word_length_;
    std::vector<std::uint32_t> inverse_;
    std::vector<std::size_t> level_end_;
    std::vector<std::uint32_t> slots_;

    void rebuild_index();
    std::uint32_t insert_or_find(const std::int64_t* entries, bool& inserted);
};

inline constexpr std::size_t default_ball_cap = 5000000;

// The generating tuple must be closed under inverses.
Ball enumerate_ball(const std::vector<IntMatrix>& gens, int R, std::size_t cap = default_ball_cap);
Ball enumerate_ball(const GeneratorSet& gens, int R, std::size_t cap = default_ball_cap);

struct ProductTable {
    int domain_radius = 0;
    std::size_t n = 0;  // |Ball(domain_radius)|
    std::vector<std::uint32_t> table;

    std::uint32_t operator()(std::size_t i, std::size_t j) const { return table[i * n + j]; }
};

// Table of products of the first |Ball(r)| elements of ball_2r, r = domain_radius.
ProductTable product_table(const Ball& ball_2r, int domain_radius);
ProductTable product_table(const Ball& ball_r, const Ball& ball_2r);

std::uint64_t fingerprint(const std::vector<IntMatrix>& gens);
void save_ball(const Ball& ball, const std::filesystem::path& path, std::uint64_t fingerprint);
std::optional<Ball> load_ball(const std::filesystem::path& path, std::uint64_t fingerprint);
void save_table(const ProductTable& t, const std::filesystem::path& path, std::uint64_t fingerprint);
std::optional<ProductTable> load_table(const std::filesystem::path& path, std::uint64_t fingerprint);

// Cache directory from an explicit path, else $KAZHDAN_CACHE_DIR, else none.
std::optional<std::filesystem::path> resolve_cache_dir(const std::string& explicit_dir);

struct CachedBall {
    Ball ball;
    ProductTable table;
};

// Ball(2R) and the Ball(R) product table, using `cache_dir` when given.
CachedBall ball_with_table(const std::vector<IntMatrix>& gens, const std::string& key, int R,
                           const std::optional<std::filesystem::path>& cache_dir,
                           std::size_t cap = default_ball_cap);

std::string serialize_matrix(const IntMatrix& m);
IntMatrix parse_matrix(const std::string& s);

}  // namespace kazhdan
