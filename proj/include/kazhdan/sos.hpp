#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kazhdan/groupring.hpp"

namespace kazhdan {

// max λ subject to x − λ m = Σ_{i,j} P_ij g_i⁻¹ g_j, P ⪰ 0, g_i ∈ Ball(R).
struct SOSProblem {
    ContextPtr ctx;
    RingElement target;
    RingElement order_element;
    int R = 0;
    std::size_t n = 0;              // |Ball(R)|
    std::size_t n_constraints = 0;  // |Ball(2R)|
    // pair_element[i * n + j] = index of g_i⁻¹ g_j in Ball(2R)
    std::vector<std::uint32_t> pair_element;
    // pairs of each g ∈ Ball(2R), CSR layout
    std::vector<std::size_t> pair_offsets;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;

    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_of(std::uint32_t g) const;
};

SOSProblem formulate(const RingElement& x, const RingElement& m, int R);

nlohmann::json problem_summary(const SOSProblem& p);

// Sparse SDP in the standard interchange layout: one constraint per inverse
// class {g, g⁻¹}; block 1 is P (n×n), block 2 diagonal holds λ = λ⁺ − λ⁻.
struct SdpaEntry {
    int matrix = 0;  // 0 is the objective
    int block = 1;
    int row = 1;
    int col = 1;
    double value = 0.0;

    bool operator==(const SdpaEntry& o) const = default;
};

struct SdpaData {
    int m = 0;
    std::vector<int> block_struct;
    std::vector<double> c;
    std::vector<SdpaEntry> entries;

    bool operator==(const SdpaData& o) const = default;
};

SdpaData sdpa_data(const SOSProblem& p);
void write_sdpa(const SdpaData& d, std::ostream& out);
SdpaData read_sdpa(std::istream& in);
void export_problem(const SOSProblem& p, const std::filesystem::path& path);

enum class SolverStatus { optimal, near_optimal, infeasible, failed };

const char* to_string(SolverStatus s);
SolverStatus solver_status_from_string(const std::string& s);

struct IterationLog {
    int iteration = 0;
    double lambda = 0.0;
    double dual_objective = 0.0;
    double mu = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double step_primal = 0.0;
    double step_dual = 0.0;
    double seconds = 0.0;
};

struct SolverConfig {
    double tol = 1e-9;      // relative primal/dual feasibility
    double gap_tol = 1e-8;  // relative duality gap
    int max_iter = 100000;
    double time_limit_sec = 0.0;  // 0 disables the limit
    bool use_symmetry = true;
    int jobs = 1;
    std::optional<std::filesystem::path> checkpoint;
    double checkpoint_interval_sec = 300.0;
    std::optional<std::filesystem::path> resume;
    std::function<void(const IterationLog&)> on_iteration;
};

struct SolverStats {
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    double dual_objective = 0.0;
    double seconds = 0.0;
    std::size_t classes = 0;
    std::size_t symmetry_order = 1;
    std::string message;
};

struct NumericSolution {
    double lambda = 0.0;
    Matrix<double> gram;  // indexed by Ball(R)
    SolverStatus status = SolverStatus::failed;
    SolverStats stats;
    // Dual iterate, kept for resuming.
    Vector<double> y;
    Matrix<double> dual_slack;
};

// Automorphisms of the group that fix S, x and m, as permutations of Ball(2R).
struct Symmetry {
    std::vector<std::vector<std::uint32_t>> generators;
    std::size_t order = 1;
};

Symmetry find_symmetries(const SOSProblem& p, bool enabled = true);

NumericSolution solve(const SOSProblem& p, const SolverConfig& config = {});

// JSON metadata at `path`, float matrices in `path` + ".bin".
void save_solution(const NumericSolution& s, const std::filesystem::path& path);
NumericSolution load_solution(const std::filesystem::path& path);

// Σ_g |Σ_{pairs(g)} P_ij − (x_g − λ m_g)| in floating point.
double reconstruction_residual(const SOSProblem& p, const Matrix<double>& gram, double lambda);

}  // namespace kazhdan
