#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kazhdan/groupring.hpp"
#include "kazhdan/rootsys.hpp"

namespace kazhdan {

// Formal integer combination of ordered root pairs (α, β), standing for Δ_α Δ_β.
struct PairTensor {
    std::map<std::pair<int, int>, std::int64_t> terms;

    void add(int a, int b, std::int64_t mult = 1);
    std::int64_t operator()(int a, int b) const;
    std::size_t size() const { return terms.size(); }
    bool empty() const { return terms.empty(); }
    bool operator==(const PairTensor& o) const { return terms == o.terms; }
    PairTensor& operator+=(const PairTensor& o);
    PairTensor& operator-=(const PairTensor& o);
};

PairTensor operator+(PairTensor a, const PairTensor& b);
PairTensor operator-(PairTensor a, const PairTensor& b);
PairTensor operator*(std::int64_t c, const PairTensor& t);
bool disjoint(const PairTensor& a, const PairTensor& b);
bool star_symmetric(const PairTensor& t);

enum class LengthClass { all, long_roots, short_roots };

// Δ_α Δ_α over roots of the given length class.
PairTensor sq_tensor(const RootSystem& omega, LengthClass lengths = LengthClass::all);
// The pairs (α, −α) over roots of the given length class.
PairTensor opposite_tensor(const RootSystem& omega, LengthClass lengths = LengthClass::all);
// Σ_α Δ_α Σ_{β∼α} Δ_β = Σ over root lines of (Δ_α + Δ_{−α})²; the square
// part of Δ² complementary to Adj_V.
PairTensor line_sq_tensor(const RootSystem& omega, LengthClass lengths = LengthClass::all);
// Non-proportional pairs inside one plane.
PairTensor adj_tensor(const RootSystem& omega, const AdmissiblePlane& plane);
// Non-proportional pairs spanning a plane of the given type.
PairTensor adj_tensor(const RootSystem& omega, PlaneType type);
// All non-proportional pairs (Adj_V).
PairTensor adj_tensor(const RootSystem& omega);
// All ordered pairs: expands Δ².
PairTensor square_tensor(const RootSystem& omega);

struct LevelDecomposition {
    std::array<PairTensor, 4> lev;

    const PairTensor& operator[](int i) const { return lev.at(static_cast<std::size_t>(i - 1)); }
    PairTensor sum() const { return lev[0] + lev[1] + lev[2] + lev[3]; }
};

LevelDecomposition levels(const RootSystem& omega);

RingElement delta_root(const GeneratorSet& gens, const ContextPtr& ctx, int root);
RingElement delta_subspace(const GeneratorSet& gens, const ContextPtr& ctx, const std::vector<int>& roots);
RingElement delta_subspace(const GeneratorSet& gens, const ContextPtr& ctx, const AdmissiblePlane& plane);
// Δ_V, the group Laplacian.
RingElement delta_full(const GeneratorSet& gens, const ContextPtr& ctx);

RingElement evaluate(const PairTensor& t, const GeneratorSet& gens, const ContextPtr& ctx);

// Image of a tensor over C_m (or any system) under coordinate padding into `to`.
PairTensor embed(const PairTensor& t, const RootSystem& from, const RootSystem& to);
PairTensor act(const PairTensor& t, const WeylElement& w);
PairTensor weyl_sum(const PairTensor& t, const std::vector<WeylElement>& group);
// 2^n m! (n-i)! / (m-i)!
std::int64_t lemma_constant(int n, int m, int i);

enum class Target { delta_sq, adj, levels23 };

const char* to_string(Target t);
Target target_from_string(const std::string& s);
// Δ², Adj_V, or Lev₂ⁿ + Lev₃ⁿ as a ring element.
RingElement target_element(Target t, const GeneratorSet& gens, const ContextPtr& ctx);

nlohmann::json to_json(const PairTensor& t);
PairTensor pair_tensor_from_json(const nlohmann::json& j);

}  // namespace kazhdan
