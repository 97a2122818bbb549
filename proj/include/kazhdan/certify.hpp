#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kazhdan/groupring.hpp"
#include "kazhdan/interval.hpp"
#include "kazhdan/sos.hpp"

namespace kazhdan {

// num / 2^k, entrywise.
struct DyadicMatrix {
    IntMatrix num;
    int k = 0;

    Eigen::Index rows() const { return num.rows(); }
    Rational entry(Eigen::Index i, Eigen::Index j) const;
    // Exact as long as |num| < 2^53.
    Matrix<double> to_double() const;
    bool operator==(const DyadicMatrix& o) const { return k == o.k && num == o.num; }
};

// Rigorous lower bound on λ_min(a), or nullopt. Floating Cholesky A − σI = LLᵀ + E,
// with ‖E‖₂ ⩽ ‖E‖_∞ bounded through the γ_n dot-product error bound in interval
// arithmetic; then λ_min(A) ⩾ σ − ‖E‖₂. σ = 2^sigma_exp must be a multiple of 2^-k.
std::optional<double> verified_min_eigenvalue(const DyadicMatrix& a, int sigma_exp);
// Tries σ = 2^e just below half the (given or computed) float estimate of λ_min.
bool verified_positive_definite(const DyadicMatrix& a, std::optional<double> estimate = std::nullopt);

struct CertifyConfig {
    int k = 30;                // Gram denominators 2^k
    int eps_cap_exp = 10;      // PSD repair gives up beyond ε = 2^-eps_cap_exp
    int lambda_k = 30;         // λ is rounded down to a multiple of 2^-lambda_k
    // c_R; defaults to default_domination_constant(R)
    std::optional<Rational> domination_constant;
};

struct Rationalized {
    DyadicMatrix matrix;  // includes ε·I
    Rational epsilon;
};

// Round to 2^-k, symmetrize, then add the smallest dyadic ε·I (ε ∈ {0, 2^-k, 2^-k+1, …})
// for which verified_positive_definite succeeds. Throws CertificationError past the cap.
Rationalized rationalize(const Matrix<double>& a, const CertifyConfig& config = {});

// The Gram matrix in the augmentation basis {g_i − e : i ⩾ 1}: for X with zero
// row sums, X = T X[1:,1:] Tᵀ with T = [−1ᵀ; I].
Matrix<double> augmentation_block(const Matrix<double>& gram);

// r = (x − λ m) − Σ_g (Σ_{pairs(g)} P_ij) g, exactly, where P = T C Tᵀ.
RingElement residual(const SOSProblem& p, const Rational& lambda, const DyadicMatrix& c);

// 4R²: for self-adjoint r with augmentation 0 on Ball(2R), r + c_R ‖r‖₁ Δ ⩾ 0.
Rational default_domination_constant(int R);
// c_R · ‖r‖₁, after checking r is self-adjoint, augmentation 0, and on Ball(2R).
Rational dominate(const RingElement& r, int R, const Rational& c_R);

// √(2λ/|S|) rounded down.
double kappa_lower_bound(const Rational& lambda, int s_size);

struct Certificate {
    std::string target_name;
    std::string group;
    char family = '?';  // '?' for groups given only by generators
    int rank = 0;
    int R = 0;
    ContextPtr ctx;
    RingElement target;
    RingElement order_element;
    Rational lambda_rounded;
    Rational lambda_certified;
    Rational residual_l1;
    Rational domination_constant;
    Rational epsilon;
    DyadicMatrix gram;  // augmentation basis, ε·I included
    int s_size = 0;
    double kappa_lb = 0.0;
    nlohmann::json provenance;
};

// Full pipeline on a solved problem. The order element must be the Laplacian.
Certificate certify(const SOSProblem& p, const NumericSolution& sol, const std::string& target_name,
                    const CertifyConfig& config = {}, nlohmann::json provenance = nlohmann::json::object());

std::string sha256_hex(const std::string& bytes);

// Writes the Gram attachment and the JSON envelope into `dir`, both named by
// content hash; returns the envelope path.
std::filesystem::path write_certificate(const Certificate& cert, const std::filesystem::path& dir);
Certificate read_certificate(const std::filesystem::path& path,
                             const std::optional<std::filesystem::path>& cache_dir = std::nullopt);
// Hash of the envelope, as used in its file name.
std::string certificate_hash(const std::filesystem::path& path);

struct VerifyReport {
    bool ok = true;
    std::vector<std::pair<std::string, bool>> checks;

    void check(const std::string& name, bool pass) {
        checks.emplace_back(name, pass);
        ok = ok && pass;
    }
};

// Replays a certificate from its own data: PSD check, exact residual, arithmetic.
VerifyReport verify(const Certificate& cert);

}  // namespace kazhdan
