#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kazhdan/types.hpp"

namespace kazhdan {

struct Root {
    IntVector coords;
    std::int64_t squared_length = 0;
};

struct RootSystem {
    char family = 'A';
    int rank = 0;
    int ambient_dim = 0;
    std::vector<Root> roots;

    std::size_t size() const { return roots.size(); }
    // Index of a root with the given coordinates, or -1.
    int find(const IntVector& coords) const;
    int negative(int i) const;
    bool is_long(int i) const;
    bool proportional(int i, int j) const;
    std::int64_t inner(int i, int j) const;
    std::string name() const;
};

enum class PlaneType { A1xA1, A1xC1, A2, C2, G2 };

const char* to_string(PlaneType t);
PlaneType plane_type_from_string(const std::string& s);
inline bool irreducible(PlaneType t) {
    return t == PlaneType::A2 || t == PlaneType::C2 || t == PlaneType::G2;
}

struct AdmissiblePlane {
    std::vector<int> member_roots;  // sorted
    PlaneType plane_type = PlaneType::A1xA1;
    std::pair<int, int> basis_pair{0, 0};
};

// Linear map on the ambient space (matrix / denominator) together with
// the permutation it induces on the root list.
struct WeylElement {
    IntMatrix matrix;
    std::int64_t denominator = 1;
    std::vector<int> root_perm;

    int operator()(int root) const { return root_perm[static_cast<std::size_t>(root)]; }
};

RootSystem build_root_system(char family, int rank);

std::vector<AdmissiblePlane> admissible_planes(const RootSystem& omega);
// Only the planes containing root `alpha`; O(|Ω|²) instead of O(|Ω|³).
std::vector<AdmissiblePlane> planes_through(const RootSystem& omega, int alpha);

// Row-major n×n table: entry (a, b) is the index of the plane containing
// both roots, or -1 when they are proportional.
std::vector<int> pair_plane_table(const RootSystem& omega, const std::vector<AdmissiblePlane>& planes);

int gamma(const RootSystem& omega);
// The same quantity counted as distinct spans of non-proportional,
// non-orthogonal pairs.
int gamma_by_spans(const RootSystem& omega);

std::map<PlaneType, int> plane_incidence(const RootSystem& omega, const Root& alpha);
std::map<PlaneType, int> plane_incidence(const RootSystem& omega,
                                         const std::vector<AdmissiblePlane>& planes, int alpha);

std::vector<int> simple_roots(const RootSystem& omega);

std::vector<WeylElement> weyl_group(const RootSystem& omega, std::size_t cap = 1000000);

// Coroot system α ↦ 2α/⟨α,α⟩, rescaled to integers; swaps Bₙ and Cₙ.
RootSystem dual_root_system(const RootSystem& omega);

nlohmann::json to_json(const RootSystem& omega);

}  // namespace kazhdan
