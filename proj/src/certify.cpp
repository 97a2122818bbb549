#include "kazhdan/certify.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include <openssl/evp.h>

#include "kazhdan/elements.hpp"

namespace kazhdan {

namespace {

using Int128 = __int128;

mpz_class to_mpz(Int128 v) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    mpz_class hi(static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64)));
    mpz_class lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
    mpz_class out = (hi << 64) + lo;
    return neg ? mpz_class(-out) : out;
}

Rational pow2(int e) {
    Rational q = 1;
    if (e >= 0) {
        mpz_mul_2exp(q.get_num_mpz_t(), q.get_num_mpz_t(), static_cast<mp_bitcnt_t>(e));
    } else {
        mpz_mul_2exp(q.get_den_mpz_t(), q.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-e));
    }
    return q;
}

}  // namespace

Rational DyadicMatrix::entry(Eigen::Index i, Eigen::Index j) const {
    Rational q(static_cast<long>(num(i, j)));
    q *= pow2(-k);
    q.canonicalize();
    return q;
}

Matrix<double> DyadicMatrix::to_double() const { return num.cast<double>() * std::ldexp(1.0, -k); }

std::optional<double> verified_min_eigenvalue(const DyadicMatrix& a, int sigma_exp) {
    const Eigen::Index n = a.rows();
    if (sigma_exp < -a.k || sigma_exp + a.k > 52) throw DomainError("σ must be a dyadic multiple of 2^-k below 2^52");
    IntMatrix shifted = a.num;
    shifted.diagonal().array() -= std::int64_t{1} << (sigma_exp + a.k);
    if (shifted.cwiseAbs().maxCoeff() >= (std::int64_t{1} << 53)) return std::nullopt;
    const Matrix<double> at = DyadicMatrix{shifted, a.k}.to_double();  // exact
    const Eigen::LLT<Matrix<double>> llt(at);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Matrix<double> l = llt.matrixL();
    const Matrix<double> s = l * l.transpose();
    const Matrix<double> t = l.cwiseAbs() * l.cwiseAbs().transpose();
    // |fl(Σ_k l_ik l_jk) − Σ_k l_ik l_jk| ⩽ γ_n Σ_k |l_ik l_jk|, γ_n = nu/(1 − nu)
    const Interval nu = Interval(static_cast<double>(n)) * Interval(std::ldexp(1.0, -53));
    const Interval gamma = nu / (Interval(1.0) - nu);
    const Interval slack = gamma / (Interval(1.0) - gamma);
    const Interval one_up(1.0, 1.0 + std::ldexp(1.0, -51));
    const double tiny = 2.0 * static_cast<double>(n) * std::numeric_limits<double>::denorm_min();
    double norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Interval row = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            row += Interval(std::abs(at(i, j) - s(i, j))) * one_up + slack * Interval(t(i, j)) + Interval(tiny);
        }
        norm = std::max(norm, row.hi);
    }
    const Interval bound = Interval(std::ldexp(1.0, sigma_exp)) - Interval(norm);
    if (!bound.positive()) return std::nullopt;
    return bound.lo;
}

bool verified_positive_definite(const DyadicMatrix& a, std::optional<double> estimate) {
    if (a.rows() == 0) return true;
    const double lmin = estimate ? *estimate
                                 : Eigen::SelfAdjointEigenSolver<Matrix<double>>(a.to_double(), Eigen::EigenvaluesOnly)
                                       .eigenvalues()(0);
    if (!(lmin > 0)) return false;
    int e = std::min(static_cast<int>(std::floor(std::log2(lmin / 2))), 52 - a.k);
    for (int tries = 0; tries < 4 && e >= -a.k; ++tries, --e) {
        if (verified_min_eigenvalue(a, e)) return true;
    }
    return false;
}

Rationalized rationalize(const Matrix<double>& a, const CertifyConfig& config) {
    if (a.rows() != a.cols()) throw DomainError("rationalize needs a square matrix");
    if (config.k < 0 || config.k > 52) throw DomainError("denominator exponent must lie in [0, 52]");
    const Eigen::Index n = a.rows();
    const double limit = std::ldexp(1.0, 52);
    DyadicMatrix d{IntMatrix(n, n), config.k};
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double v = std::ldexp(0.5 * (a(i, j) + a(j, i)), config.k);
            if (!std::isfinite(v) || std::abs(v) >= limit) {
                throw CertificationError("Gram entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                         ") does not fit the dyadic range");
            }
            d.num(i, j) = d.num(j, i) = std::llround(v);
        }
    }
    if (n == 0) return {d, 0};

    // Rungs below the float estimate of the smallest eigenvalue cannot succeed.
    const double lmin = Eigen::SelfAdjointEigenSolver<Matrix<double>>(d.to_double(), Eigen::EigenvaluesOnly).eigenvalues()(0);
    int e = -config.k;
    while (lmin < 0 && std::ldexp(1.0, e) < -lmin && e < 0) ++e;
    if (lmin > 0 && verified_positive_definite(d, lmin)) return {d, 0};
    for (; e <= -config.eps_cap_exp; ++e) {
        DyadicMatrix trial = d;
        trial.num.diagonal().array() += std::int64_t{1} << (e + config.k);
        if (verified_positive_definite(trial, lmin + std::ldexp(1.0, e))) return {trial, pow2(e)};
    }
    throw CertificationError("PSD repair failed: ε would exceed 2^-" + std::to_string(config.eps_cap_exp) +
                             " (smallest eigenvalue estimate " + std::to_string(lmin) + ")");
}

Matrix<double> augmentation_block(const Matrix<double>& gram) {
    if (gram.rows() != gram.cols() || gram.rows() < 1) throw DomainError("Gram matrix must be square and nonempty");
    const Eigen::Index n = gram.rows() - 1;
    return gram.bottomRightCorner(n, n);
}

RingElement residual(const SOSProblem& p, const Rational& lambda, const DyadicMatrix& c) {
    const std::size_t n = p.n;
    if (static_cast<std::size_t>(c.rows()) + 1 != n) throw DomainError("Gram block does not match the problem size");
    std::vector<Int128> colsum(n - 1, 0);
    Int128 total = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        for (std::size_t i = 0; i + 1 < n; ++i) colsum[j] += c.num(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        total += colsum[j];
    }
    auto entry = [&](std::size_t i, std::size_t j) -> Int128 {
        if (i == 0 && j == 0) return total;
        if (i == 0) return -colsum[j - 1];
        if (j == 0) return -colsum[i - 1];
        return c.num(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
    };
    std::vector<Int128> sums(p.n_constraints, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sums[p.pair_element[i * n + j]] += entry(i, j);

    const Rational unit = pow2(-c.k);
    RingElement r(p.ctx);
    for (std::uint32_t g = 0; g < p.n_constraints; ++g) {
        Rational v = p.target.coeff(g) - lambda * p.order_element.coeff(g);
        if (sums[g] != 0) v -= Rational(to_mpz(sums[g])) * unit;
        v.canonicalize();
        if (v != 0) r.add_term(g, v);
    }
    return r;
}

Rational default_domination_constant(int R) {
    if (R < 1) throw DomainError("radius must be positive");
    return Rational(4 * R * R);
}

Rational dominate(const RingElement& r, int R, const Rational& c_R) {
    if (augmentation(r) != 0) throw DomainError("domination needs a residual with augmentation 0");
    if (star(r) != r) throw DomainError("domination needs a self-adjoint residual");
    if (r.support_radius() > 2 * R) throw DomainError("residual support escapes Ball(2R)");
    if (c_R < 0) throw DomainError("negative domination constant");
    return c_R * l1_norm(r);
}

double kappa_lower_bound(const Rational& lambda, int s_size) {
    if (lambda < 0) throw DomainError("κ bound needs λ ⩾ 0");
    if (s_size <= 0) throw DomainError("κ bound needs a nonempty generating set");
    const Rational q = Rational(2 * lambda / s_size);
    double s = std::sqrt(q.get_d());
    while (s > 0 && Rational(s) * Rational(s) > q) s = std::nextafter(s, 0.0);
    return s;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw ConsistencyError("SHA-256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

namespace {

// A name like "C3" only counts if the generators are those of that Steinberg group.
void parse_group_name(Certificate& c) {
    static const std::regex re("([AC])([0-9]+)");
    std::smatch m;
    if (!std::regex_match(c.group, m, re)) return;
    try {
        const char family = m[1].str()[0];
        const int rank = std::stoi(m[2].str());
        const auto expected = steinberg_generators(family, rank).elements();
        const auto& have = c.ctx->generators;
        const bool same = expected.size() == have.size() &&
                          std::equal(expected.begin(), expected.end(), have.begin(), [](const IntMatrix& a, const IntMatrix& b) {
                              return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
                          });
        if (same) {
            c.family = family;
            c.rank = rank;
        }
    } catch (const DomainError&) {
    }
}

}  // namespace

Certificate certify(const SOSProblem& p, const NumericSolution& sol, const std::string& target_name,
                    const CertifyConfig& config, nlohmann::json provenance) {
    if (sol.status != SolverStatus::optimal && sol.status != SolverStatus::near_optimal) {
        throw CertificationError(std::string("solution status is ") + to_string(sol.status));
    }
    if (!std::isfinite(sol.lambda)) throw CertificationError("solution λ is not finite");
    if (static_cast<std::size_t>(sol.gram.rows()) != p.n) throw CertificationError("Gram size does not match the problem");
    if (p.order_element != laplacian(p.ctx)) throw CertificationError("domination needs the order element to be Δ");

    Certificate c;
    c.target_name = target_name;
    c.group = p.ctx->name;
    c.R = p.R;
    c.ctx = p.ctx;
    parse_group_name(c);
    c.target = p.target;
    c.order_element = p.order_element;

    const Rationalized rz = rationalize(augmentation_block(sol.gram), config);
    c.gram = rz.matrix;
    c.epsilon = rz.epsilon;
    c.lambda_rounded = Rational(std::floor(std::ldexp(sol.lambda, config.lambda_k))) * pow2(-config.lambda_k);
    c.lambda_rounded.canonicalize();

    const RingElement r = residual(p, c.lambda_rounded, c.gram);
    if (augmentation(r) != 0) throw ConsistencyError("residual has nonzero augmentation");
    c.domination_constant = config.domination_constant.value_or(default_domination_constant(p.R));
    c.residual_l1 = l1_norm(r);
    c.lambda_certified = c.lambda_rounded - dominate(r, p.R, c.domination_constant);
    c.lambda_certified.canonicalize();
    if (c.lambda_certified < 0) {
        throw CertificationError("certified λ is negative: λ_rounded = " + to_string(c.lambda_rounded) +
                                 ", ‖r‖₁ ≈ " + std::to_string(c.residual_l1.get_d()) +
                                 ", ε = " + to_string(c.epsilon));
    }
    c.s_size = static_cast<int>(p.ctx->generators.size());
    c.kappa_lb = kappa_lower_bound(c.lambda_certified, c.s_size);

    provenance["code_version"] = code_version;
    provenance["solver"] = {{"status", to_string(sol.status)},
                            {"lambda", sol.lambda},
                            {"iterations", sol.stats.iterations},
                            {"primal_residual", sol.stats.primal_residual},
                            {"dual_residual", sol.stats.dual_residual},
                            {"gap", sol.stats.gap},
                            {"seconds", sol.stats.seconds},
                            {"message", sol.stats.message}};
    provenance["certify"] = {{"k", config.k}, {"eps_cap_exp", config.eps_cap_exp}, {"lambda_k", config.lambda_k}};
    if (provenance.contains("config")) provenance["config_hash"] = sha256_hex(provenance["config"].dump());
    c.provenance = std::move(provenance);
    return c;
}

namespace {

constexpr char gram_magic[8] = {'K', 'Z', 'G', 'R', 'A', 'M', '0', '1'};

std::string gram_bytes(const DyadicMatrix& g) {
    std::ostringstream out(std::ios::binary);
    out.write(gram_magic, sizeof gram_magic);
    const std::int64_t n = g.rows();
    const std::int32_t k = g.k;
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&k), sizeof k);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            const std::int64_t v = g.num(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
    return out.str();
}

DyadicMatrix gram_from_bytes(const std::string& bytes) {
    std::istringstream in(bytes, std::ios::binary);
    char magic[8];
    std::int64_t n = 0;
    std::int32_t k = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&k), sizeof k);
    if (!in || std::memcmp(magic, gram_magic, sizeof magic) != 0 || n < 0) throw IoError("bad Gram attachment header");
    DyadicMatrix g{IntMatrix(n, n), k};
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            std::int64_t v = 0;
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            g.num(i, j) = g.num(j, i) = v;
        }
    if (!in) throw IoError("truncated Gram attachment");
    return g;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

std::filesystem::path write_certificate(const Certificate& cert, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const std::string bytes = gram_bytes(cert.gram);
    const std::string gram_hash = sha256_hex(bytes);
    const std::string gram_name = "gram-" + gram_hash.substr(0, 16) + ".bin";
    write_file(dir / gram_name, bytes);

    nlohmann::json gens = nlohmann::json::array();
    for (const auto& g : cert.ctx->generators) gens.push_back(serialize_matrix(g));
    nlohmann::json j = {
        {"format", "kazhdan-certificate/1"},
        {"meta",
         {{"target", cert.target_name},
          {"group", cert.group},
          {"R", cert.R},
          {"generators", gens},
          {"provenance", cert.provenance}}},
        {"lambda_rounded", to_string(cert.lambda_rounded)},
        {"lambda_certified", to_string(cert.lambda_certified)},
        {"residual_l1", to_string(cert.residual_l1)},
        {"domination_constant", to_string(cert.domination_constant)},
        {"epsilon", to_string(cert.epsilon)},
        {"S_size", cert.s_size},
        {"kappa_lower_bound", cert.kappa_lb},
        {"target_element", to_json(cert.target)},
        {"order_element", to_json(cert.order_element)},
        {"gram", {{"path", gram_name}, {"sha256", gram_hash}, {"size", cert.gram.rows()}, {"k", cert.gram.k}}},
    };
    const std::string text = j.dump(1) + "\n";
    const auto path = dir / ("cert-" + sha256_hex(text).substr(0, 16) + ".json");
    write_file(path, text);
    return path;
}

std::string certificate_hash(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

Certificate read_certificate(const std::filesystem::path& path, const std::optional<std::filesystem::path>& cache_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed certificate " + path.string() + ": " + e.what());
    }
    try {
        if (j.at("format") != "kazhdan-certificate/1") throw IoError("unknown certificate format");
        Certificate c;
        const auto& meta = j.at("meta");
        c.target_name = meta.at("target").get<std::string>();
        c.group = meta.at("group").get<std::string>();
        c.R = meta.at("R").get<int>();
        c.provenance = meta.at("provenance");
        std::vector<IntMatrix> gens;
        for (const auto& g : meta.at("generators")) gens.push_back(parse_matrix(g.get<std::string>()));
        c.ctx = make_context(std::move(gens), c.R, c.group, cache_dir);
        parse_group_name(c);
        c.target = element_from_json(c.ctx, j.at("target_element"));
        c.order_element = element_from_json(c.ctx, j.at("order_element"));
        c.lambda_rounded = rational_from_string(j.at("lambda_rounded").get<std::string>());
        c.lambda_certified = rational_from_string(j.at("lambda_certified").get<std::string>());
        c.residual_l1 = rational_from_string(j.at("residual_l1").get<std::string>());
        c.domination_constant = rational_from_string(j.at("domination_constant").get<std::string>());
        c.epsilon = rational_from_string(j.at("epsilon").get<std::string>());
        c.s_size = j.at("S_size").get<int>();
        c.kappa_lb = j.at("kappa_lower_bound").get<double>();
        const auto& gram = j.at("gram");
        const std::string bytes = read_file(path.parent_path() / gram.at("path").get<std::string>());
        if (sha256_hex(bytes) != gram.at("sha256").get<std::string>()) {
            throw CertificationError("Gram attachment does not match its recorded hash");
        }
        c.gram = gram_from_bytes(bytes);
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed certificate " + path.string() + ": " + e.what());
    }
}

VerifyReport verify(const Certificate& cert) {
    VerifyReport rep;
    rep.check("Gram matrix positive definite (verified Cholesky)", verified_positive_definite(cert.gram));
    rep.check("order element is the group Laplacian", cert.order_element == laplacian(cert.ctx));
    rep.check("domination constant at least 4R²", cert.domination_constant >= default_domination_constant(cert.R));

    if (cert.family == 'A' || cert.family == 'C') {
        bool same = false;
        try {
            const auto gens = steinberg_generators(cert.family, cert.rank);
            same = target_element(target_from_string(cert.target_name), gens, cert.ctx) == cert.target;
        } catch (const DomainError&) {
            same = false;
        }
        rep.check("target element matches " + cert.target_name + " on " + cert.group, same);
    }

    RingElement r;
    try {
        const SOSProblem p = formulate(cert.target, cert.order_element, cert.R);
        r = residual(p, cert.lambda_rounded, cert.gram);
    } catch (const std::exception& e) {
        rep.check(std::string("residual recomputation (") + e.what() + ")", false);
        return rep;
    }
    rep.check("residual has augmentation 0", augmentation(r) == 0);
    rep.check("residual is self-adjoint", star(r) == r);
    rep.check("residual ℓ¹ norm matches", l1_norm(r) == cert.residual_l1);
    const Rational lam = cert.lambda_rounded - cert.domination_constant * l1_norm(r);
    rep.check("λ_certified = λ_rounded − c_R‖r‖₁", lam == cert.lambda_certified);
    rep.check("λ_certified ⩾ 0", cert.lambda_certified >= 0);
    rep.check("generating set size matches", cert.s_size == static_cast<int>(cert.ctx->generators.size()));
    rep.check("κ bound matches", cert.lambda_certified >= 0 &&
                                     kappa_lower_bound(cert.lambda_certified, cert.s_size) == cert.kappa_lb);
    return rep;
}

}  // namespace kazhdan
