#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kazhdan/certify.hpp"
#include "kazhdan/groupring.hpp"
#include "kazhdan/rootsys.hpp"

namespace kazhdan {

// Accepts "0.158606", "-2", "3/4".
Rational rational_from_decimal(const std::string& s);

// Adj_W − λ Δ_W ⩾_R 0 for the Chevalley group of one plane type.
struct PlaneConstant {
    PlaneType plane_type = PlaneType::A2;
    Rational lambda;
    int R = 0;
    std::string source;  // "published" or "certificate:<hash>"
};

// x − λ Δ ⩾_R 0 for a whole group, x the named target (delta_sq, adj, levels23).
struct GroupConstant {
    std::string group;  // "A2", "C3", ...
    std::string target;
    Rational lambda;
    int R = 0;
    std::string source;
};

// A published family bound λ = slope · γ(Ω) used as is.
struct CitedFamily {
    char family = 'A';
    int min_rank = 0;
    int R = 0;
    Rational slope;
    std::string source;
};

// One printed table entry: λ = l0 + l1 n, |S| = s0 + s1 n + s2 n².
struct PrintedEntry {
    int table = 1;
    std::string types;  // e.g. "BC"
    int n = 0;          // 0: family row valid for n ⩾ min_n
    int min_n = 0;
    int R = 0;
    Rational l0, l1, s0, s1, s2;

    bool matches(int table_, char family, int n_, int R_) const;
    double kappa(int n_) const;
};

struct Constants {
    std::string version;
    std::vector<PlaneConstant> planes;
    std::vector<GroupConstant> groups;
    std::vector<CitedFamily> cited;
    std::vector<PrintedEntry> printed;

    std::optional<PlaneConstant> plane(PlaneType t, int R) const;
    std::optional<GroupConstant> group(const std::string& name, const std::string& target, int R) const;
};

std::filesystem::path default_constants_path();
// Throws IoError on unreadable or malformed files.
Constants load_constants(const std::filesystem::path& path = default_constants_path());

// Replaces (or adds) the constant a certificate speaks about when its certified λ
// is smaller than the current one, or always with `force`. Returns whether it did.
bool apply_certificate(Constants& c, const Certificate& cert, const std::string& hash, bool force = false);
// Every cert-*.json in `dir` that re-verifies; returns the hashes applied.
std::vector<std::string> apply_certificates(Constants& c, const std::filesystem::path& dir, bool force = false);

enum class Method { main_thm, corollary, levels, direct, cited };
enum class Annotation { reproduced_certified, paper_constant, formula };

const char* to_string(Method m);
const char* to_string(Annotation a);

struct FamilyBound {
    char family = 'A';
    int n = 0;
    int R = 0;
    Rational lambda;
    std::int64_t s_size = 0;
    double kappa_lb = 0.0;
    Method method = Method::direct;
    std::vector<std::string> sources;
    nlohmann::json trace = nlohmann::json::object();
    int table = 1;
    std::string row;  // table row label, e.g. "B_n, C_n"

    Annotation annotation() const;
};

// λ = min over roots α of Σ_{W ∋ α} λ_{type(W)}, R = max R_W over the types used.
// Roots are taken one per length class; the Weyl group is transitive on each.
FamilyBound assemble_main(const RootSystem& omega, const std::map<PlaneType, PlaneConstant>& constants);
// γ(Ω)·λ_min for irreducible Ω of rank ⩾ 2.
FamilyBound assemble_corollary(const RootSystem& omega, const Rational& lambda_min, int R,
                               std::vector<std::string> sources = {});
// Cₙ from the C₃ level constant (group "C3", target levels23), n ⩾ 3.
FamilyBound assemble_levels(int n, const std::optional<GroupConstant>& c3);

// min over roots of the number of irreducible planes through it, by length class.
int gamma_fast(const RootSystem& omega);

// Inequality (*): the Weyl sum over W(Cₙ) of Lev₂³ + Lev₃³ − λΔ_{V₃}, divided by
// 3·2ⁿ·(n−3)!, has these coefficients. Exact for any n ⩾ 3.
struct StarReplay {
    int n = 0;
    Rational divisor;
    Rational lev2, lev3;                 // printed: 2(n−2), 2
    Rational delta_long, delta_short;    // printed: (n−2)(n−1), 2(n−2)
    Rational delta;                      // min of the two: printed 2(n−2)
    bool matches_printed = false;
};
StarReplay replay_star(int n);

// Σ_{W∈𝒜} λ_W Δ_W == Σ_α λ_α Δ_α as coefficient vectors over the roots.
bool rearrangement_identity(const RootSystem& omega, const std::map<PlaneType, Rational>& lambda);

struct TableOptions {
    int n_max = 20;
    std::optional<char> only;  // family filter; 'B' and 'C' select each other's rows too
};

std::vector<FamilyBound> table_bounds(const Constants& c, const TableOptions& opt = {});

struct Report {
    nlohmann::json json;
    std::string text;
};

Report render_tables(const std::vector<FamilyBound>& bounds, const Constants& c);

}  // namespace kazhdan
