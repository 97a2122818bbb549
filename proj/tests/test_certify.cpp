#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "kazhdan/certify.hpp"
#include "kazhdan/elements.hpp"

using namespace kazhdan;

namespace {

IntMatrix perm_matrix(const std::vector<int>& p) {
    const int n = static_cast<int>(p.size());
    IntMatrix m = IntMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) m(p[static_cast<std::size_t>(i)], i) = 1;
    return m;
}

std::vector<IntMatrix> cyclic(int k) {
    std::vector<int> f(static_cast<std::size_t>(k)), b(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        f[static_cast<std::size_t>(i)] = (i + 1) % k;
        b[static_cast<std::size_t>(i)] = (i + k - 1) % k;
    }
    return {perm_matrix(f), perm_matrix(b)};
}

// All 20 three-cycles of S₅, generating A₅.
std::vector<IntMatrix> three_cycles() {
    std::vector<IntMatrix> out;
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
            for (int c = 0; c < 5; ++c) {
                if (a == b || b == c || a == c || a > b || a > c) continue;
                std::vector<int> p{0, 1, 2, 3, 4};
                p[static_cast<std::size_t>(a)] = b;
                p[static_cast<std::size_t>(b)] = c;
                p[static_cast<std::size_t>(c)] = a;
                out.push_back(perm_matrix(p));
            }
    return out;
}

// Left-regular representation of a finite group, by brute-force closure.
struct Regular {
    Ball group;
    explicit Regular(const std::vector<IntMatrix>& gens) : group(enumerate_ball(gens, 64)) {}

    Matrix<double> rep(const RingElement& x) const {
        const auto n = static_cast<Eigen::Index>(group.size());
        Matrix<double> m = Matrix<double>::Zero(n, n);
        const auto& ball = x.context()->ball;
        for (const auto& [g, c] : x.coeffs()) {
            const IntMatrix mg = ball.element(g);
            for (Eigen::Index h = 0; h < n; ++h) {
                const IntMatrix gh = mg * group.element(static_cast<std::size_t>(h));
                m(static_cast<Eigen::Index>(*group.find(gh)), h) += c.get_d();
            }
        }
        return m;
    }

    double min_eigenvalue(const RingElement& x) const {
        return Eigen::SelfAdjointEigenSolver<Matrix<double>>(rep(x), Eigen::EigenvaluesOnly).eigenvalues()(0);
    }

    // Smallest nonzero eigenvalue of the Laplacian.
    double spectral_gap(const RingElement& delta) const {
        const auto ev = Eigen::SelfAdjointEigenSolver<Matrix<double>>(rep(delta), Eigen::EigenvaluesOnly).eigenvalues();
        double gap = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            if (ev(i) > 1e-9) gap = std::min(gap, ev(i));
        return gap;
    }
};

struct Solved {
    GeneratorSet gens;
    ContextPtr ctx;
    SOSProblem problem;
    NumericSolution sol;
};

// A₂, Δ² − λΔ on radius 2, solved once.
const Solved& a2_delta_sq() {
    static const Solved s = [] {
        Solved out;
        out.gens = steinberg_generators('A', 2);
        out.ctx = make_context(out.gens, 2);
        const auto d = delta_full(out.gens, out.ctx);
        out.problem = formulate(mul(d, d), d, 2);
        out.sol = solve(out.problem);
        return out;
    }();
    return s;
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "kazhdan_test_certify" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("interval arithmetic encloses the exact result") {
    const Interval a(0.1), b(0.2);
    const Interval s = a + b;
    CHECK(Rational(s.lo) <= Rational(0.1) + Rational(0.2));
    CHECK(Rational(s.hi) >= Rational(0.1) + Rational(0.2));
    const Interval p = a * b;
    CHECK(Rational(p.lo) <= Rational(0.1) * Rational(0.2));
    CHECK(Rational(p.hi) >= Rational(0.1) * Rational(0.2));
    const Interval q = Interval(1.0) / Interval(3.0);
    CHECK(Rational(q.lo) <= Rational(1, 3));
    CHECK(Rational(q.hi) >= Rational(1, 3));
    const Interval r = sqrt(Interval(2.0));
    CHECK(Rational(r.lo) * Rational(r.lo) <= 2);
    CHECK(Rational(r.hi) * Rational(r.hi) >= 2);
    CHECK_THROWS_AS(Interval(1.0) / Interval(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(sqrt(Interval(-1.0, 1.0)), DomainError);
}

TEST_CASE("verified positive definiteness") {
    auto dyadic = [](const Matrix<double>& m, int k) {
        return DyadicMatrix{(m * std::ldexp(1.0, k)).array().round().cast<std::int64_t>().matrix(), k};
    };
    CHECK(verified_positive_definite(dyadic(Matrix<double>::Identity(5, 5), 30)));
    CHECK(*verified_min_eigenvalue(dyadic(Matrix<double>::Identity(5, 5), 30), -1) == doctest::Approx(0.5));
    Matrix<double> indef(2, 2);
    indef << 1, 2, 2, 1;
    CHECK(!verified_positive_definite(dyadic(indef, 30)));
    CHECK(!verified_positive_definite(dyadic(Matrix<double>::Ones(3, 3), 30)));
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    for (int n : {8, 60, 200}) {
        Matrix<double> b(n, n);
        for (auto& v : b.reshaped()) v = nd(rng);
        const auto spd = dyadic(b * b.transpose() / n + 1e-3 * Matrix<double>::Identity(n, n), 30);
        const double lmin = Eigen::SelfAdjointEigenSolver<Matrix<double>>(spd.to_double()).eigenvalues()(0);
        CHECK(verified_positive_definite(spd));
        for (int e = -30; e < 4; ++e) {
            const auto lb = verified_min_eigenvalue(spd, e);
            if (lb) CHECK(*lb <= lmin);
        }
        // pushed just below zero: must be refused
        DyadicMatrix shifted = spd;
        shifted.num.diagonal().array() -= static_cast<std::int64_t>(std::ldexp(lmin + 1e-6, 30));
        CHECK(!verified_positive_definite(shifted));
    }
}

TEST_CASE("rationalize") {
    const auto id = rationalize(Matrix<double>::Identity(4, 4));
    CHECK(id.epsilon == 0);
    CHECK(id.matrix.num == IntMatrix::Identity(4, 4) * (std::int64_t{1} << 30));
    CHECK(id.matrix.entry(0, 0) == 1);

    // eigenvalue −1e-9 from rounding
    std::mt19937 rng(3);
    std::normal_distribution<double> nd;
    Matrix<double> b(6, 6);
    for (auto& v : b.reshaped()) v = nd(rng);
    const Eigen::HouseholderQR<Matrix<double>> qr(b);
    const Matrix<double> q = qr.householderQ();
    Vector<double> ev(6);
    ev << -1e-9, 0.5, 1, 2, 3, 4;
    const Matrix<double> a = q * ev.asDiagonal() * q.transpose();
    const auto rz = rationalize(a);
    CHECK(rz.epsilon > 0);
    CHECK(rz.epsilon <= Rational(1, 1 << 20));
    CHECK(verified_positive_definite(rz.matrix));
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j) CHECK(rz.matrix.num(i, j) == rz.matrix.num(j, i));

    ev(0) = -1.0;
    CHECK_THROWS_AS(rationalize(q * ev.asDiagonal() * q.transpose()), CertificationError);
    Matrix<double> huge = Matrix<double>::Identity(2, 2) * 1e30;
    CHECK_THROWS_AS(rationalize(huge), CertificationError);
}

TEST_CASE("exact residual") {
    const auto g = steinberg_generators('A', 2);
    const auto ctx = make_context(g, 1);
    const auto d = delta_full(g, ctx);
    const int alpha = 0;
    const auto da = delta_root(g, ctx, alpha);
    const auto p = formulate(mul(da, da), d, 1);
    // ξ = Δ_α = −(s − e) − (s⁻¹ − e) in the augmentation basis
    const auto is = *ctx->ball.find(g.plus[alpha]) - 1;
    const auto isi = *ctx->ball.find(g.minus[alpha]) - 1;
    DyadicMatrix c{IntMatrix::Zero(static_cast<Eigen::Index>(p.n) - 1, static_cast<Eigen::Index>(p.n) - 1), 0};
    c.num(is, is) = c.num(isi, isi) = c.num(is, isi) = c.num(isi, is) = 1;
    CHECK(residual(p, 0, c).is_zero());
    CHECK(residual(p, Rational(1, 2), c) == scale(Rational(-1, 2), d));

    // perturb one off-diagonal pair by 2^-10
    DyadicMatrix c2{c.num * 1024, 10};
    const Eigen::Index a = 2, b = 5;
    c2.num(a, b) += 1;
    c2.num(b, a) += 1;
    const Rational delta(1, 1024);
    const auto xa = RingElement::basis(ctx, static_cast<std::uint32_t>(a + 1)) - RingElement::identity(ctx);
    const auto xb = RingElement::basis(ctx, static_cast<std::uint32_t>(b + 1)) - RingElement::identity(ctx);
    const auto expected = scale(-delta, mul(star(xa), xb) + mul(star(xb), xa));
    const auto r = residual(p, 0, c2);
    CHECK(r == expected);
    CHECK(l1_norm(r) == 8 * delta);
    CHECK(augmentation(r) == 0);
    CHECK_THROWS_AS(residual(p, 0, DyadicMatrix{IntMatrix::Zero(3, 3), 0}), DomainError);
}

TEST_CASE("domination constant") {
    const auto g = steinberg_generators('A', 2);
    const auto ctx = make_context(g, 1);
    CHECK(dominate(RingElement(ctx), 1, 4) == 0);
    const auto da = delta_root(g, ctx, 0);
    CHECK(default_domination_constant(1) == 4);
    CHECK(default_domination_constant(2) == 16);
    CHECK(dominate(da, 1, default_domination_constant(1)) == 16);
    CHECK_THROWS_AS(dominate(RingElement::identity(ctx), 1, 4), DomainError);
    CHECK_THROWS_AS(dominate(RingElement::of(ctx, g.plus[0]) - RingElement::identity(ctx), 1, 4), DomainError);
    CHECK_THROWS_AS(dominate(da, 0, 4), DomainError);
}

TEST_CASE("domination lemma against the regular representation") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> coef(-20, 20);
    struct Case {
        std::vector<IntMatrix> gens;
        int R;
    };
    std::vector<Case> cases{{cyclic(5), 1}, {cyclic(7), 1}, {cyclic(9), 2}, {three_cycles(), 1}};
    for (const auto& cs : cases) {
        const auto ctx = make_context(cs.gens, cs.R, "finite");
        const Regular reg(cs.gens);
        const auto delta = laplacian(ctx);
        const Rational c = default_domination_constant(cs.R);
        for (int t = 0; t < 25; ++t) {
            RingElement r(ctx);
            for (std::uint32_t e = 1; e < ctx->ball.size(); ++e) {
                const std::uint32_t ei = ctx->ball.inverse(e);
                if (ei < e || (t % 2 && coef(rng) % 3)) continue;
                const Rational v(coef(rng), 7);
                r.add_term(e, v);
                if (ei != e) r.add_term(ei, v);
            }
            r.add_term(0, -augmentation(r));
            const auto shifted = scale(dominate(r, cs.R, c), delta) + r;
            CHECK(reg.min_eigenvalue(shifted) >= -1e-9);
        }
        // Δ_s alone: r = Δ_s needs nothing, −Δ_s needs c‖Δ_s‖₁ ⩾ 1/4, which 4R²·4 covers.
        const auto ds = scale(2, RingElement::identity(ctx)) - RingElement::of(ctx, cs.gens[0]) -
                        RingElement::of(ctx, IntMatrix(cs.gens[0].transpose()));
        CHECK(reg.min_eigenvalue(scale(dominate(-ds, cs.R, c), delta) - ds) >= -1e-9);
    }
}

TEST_CASE("kappa lower bound") {
    CHECK(kappa_lower_bound(0, 12) == 0.0);
    CHECK(kappa_lower_bound(6, 12) == 1.0);
    CHECK(kappa_lower_bound(Rational(1, 2), 1) == 1.0);
    for (int n = 3; n <= 8; ++n) {
        const Rational lam = rational_from_string("2417393/1000000");
        const double k = kappa_lower_bound(lam, 4 * n * n);
        CHECK(Rational(k) * Rational(k) <= 2 * lam / (4 * n * n));
        CHECK(k == doctest::Approx(std::sqrt((2.417393 / 2) / (n * n))).epsilon(1e-14));
    }
    CHECK(kappa_lower_bound(2, 1) == std::sqrt(4.0));
    CHECK_THROWS_AS(kappa_lower_bound(-1, 12), DomainError);
    CHECK_THROWS_AS(kappa_lower_bound(1, 0), DomainError);
}

TEST_CASE("finite-group pipeline soundness") {
    const auto gens = three_cycles();
    const auto ctx = make_context(gens, 1, "A5");
    CHECK(ctx->ball.size() == 60);
    const Regular reg(gens);
    const auto delta = laplacian(ctx);
    const double gap = reg.spectral_gap(delta);
    CHECK(gap == doctest::Approx(15.0));
    const auto x = mul(delta, delta);
    const auto p = formulate(x, delta, 1);
    const auto sol = solve(p);
    REQUIRE(sol.status != SolverStatus::failed);
    const auto cert = certify(p, sol, "delta_sq");
    CHECK(cert.lambda_certified > 0);
    CHECK(cert.lambda_certified.get_d() <= gap + 1e-9);
    CHECK(reg.min_eigenvalue(x - scale(cert.lambda_certified, delta)) >= -1e-9);
    const auto report = verify(cert);
    for (const auto& [name, pass] : report.checks) INFO(name << ": " << pass);
    for (const auto& [name, pass] : report.checks) CHECK_MESSAGE(pass, name);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    int violations = 0, certified = 0;
    for (int t = 0; t < 20; ++t) {
        NumericSolution s = sol;
        // λ moved by up to ±10^-6 … ±1, Gram noise 10^-12 … 10^-6
        s.lambda += (t % 2 ? 1 : -1) * std::pow(10.0, -6 + 6 * u(rng));
        const double scale_noise = std::pow(10.0, -12 + 6 * u(rng));
        Matrix<double> noise(s.gram.rows(), s.gram.cols());
        for (auto& v : noise.reshaped()) v = scale_noise * (2 * u(rng) - 1);
        s.gram += noise + noise.transpose();
        try {
            const auto c = certify(p, s, "delta_sq");
            ++certified;
            if (c.lambda_certified.get_d() > gap + 1e-9) ++violations;
            if (reg.min_eigenvalue(x - scale(c.lambda_certified, delta)) < -1e-9) ++violations;
        } catch (const CertificationError&) {
        }
    }
    CHECK(violations == 0);
    CHECK(certified >= 5);
    MESSAGE("certified " << certified << " of 20 perturbed solutions");
}

TEST_CASE("monotone safety: a smaller λ keeps the residual") {
    const auto& [g, ctx, p, sol] = a2_delta_sq();
    const auto cert = certify(p, sol, "delta_sq");
    // Δ = ½ Σ_s (1 − s)*(1 − s): lowering λ by δ adds δ/2 on each generator's diagonal
    DyadicMatrix lower = cert.gram;
    const std::int64_t half_delta = std::int64_t{1} << (cert.gram.k - 6);
    for (const auto& s : ctx->generators) lower.num(*ctx->ball.find(s) - 1, *ctx->ball.find(s) - 1) += half_delta;
    const Rational delta(1, 32);
    CHECK(residual(p, cert.lambda_rounded - delta, lower) == residual(p, cert.lambda_rounded, cert.gram));
    CHECK(verified_positive_definite(lower));
}

TEST_CASE("certificate file round trip and replay") {
    const auto g = steinberg_generators('A', 2);
    const auto ctx = make_context(g, 2);
    const auto p = formulate(target_element(Target::adj, g, ctx), delta_full(g, ctx), 2);
    const auto sol = solve(p);
    nlohmann::json prov = {{"config", {{"tol", 1e-9}}}};
    const auto cert = certify(p, sol, "adj", {}, prov);
    CHECK(cert.family == 'A');
    CHECK(cert.rank == 2);
    CHECK(cert.lambda_certified.get_d() >= 0.9 * 0.158606);
    CHECK(cert.residual_l1 < Rational(1, 100));
    CHECK(cert.provenance.contains("config_hash"));

    const auto dir = scratch("roundtrip");
    const auto path = write_certificate(cert, dir);
    CHECK(path.filename().string().rfind("cert-", 0) == 0);
    CHECK(path.filename().string().substr(5, 16) == certificate_hash(path).substr(0, 16));
    CHECK(write_certificate(cert, dir) == path);

    const auto back = read_certificate(path);
    CHECK(back.lambda_certified == cert.lambda_certified);
    CHECK(back.gram == cert.gram);
    CHECK(back.target_name == "adj");
    const auto rep = verify(back);
    for (const auto& [name, pass] : rep.checks) {
        CAPTURE(name);
        CHECK(pass);
    }
    CHECK(rep.ok);

    // tampering with λ breaks the arithmetic check
    Certificate bad = back;
    bad.lambda_certified += Rational(1, 1000);
    CHECK(!verify(bad).ok);
    bad = back;
    bad.domination_constant = 1;
    CHECK(!verify(bad).ok);
    bad = back;
    bad.target = scale(2, bad.target);
    CHECK(!verify(bad).ok);
    bad = back;
    bad.gram.num(0, 0) -= std::int64_t{1} << 40;
    CHECK(!verify(bad).ok);

    // a corrupted attachment is refused on read
    for (const auto& f : std::filesystem::directory_iterator(dir)) {
        if (f.path().extension() == ".bin") {
            std::fstream io(f.path(), std::ios::in | std::ios::out | std::ios::binary);
            io.seekp(40);
            io.put('\x7f');
        }
    }
    CHECK_THROWS_AS(read_certificate(path), CertificationError);
}

TEST_CASE("certify preconditions") {
    const auto& [g, ctx, p, s] = a2_delta_sq();
    NumericSolution failed = s;
    failed.status = SolverStatus::failed;
    CHECK_THROWS_AS(certify(p, failed, "delta_sq"), CertificationError);
    const auto d = delta_full(g, ctx);
    const auto p2 = formulate(mul(d, d), scale(2, d), 2);
    CHECK_THROWS_AS(certify(p2, s, "delta_sq"), CertificationError);
    NumericSolution worse = s;
    worse.lambda += 5;
    CHECK_THROWS_AS(certify(p, worse, "delta_sq"), CertificationError);
    const auto cert = certify(p, s, "delta_sq");
    CHECK(cert.lambda_certified.get_d() >= 0.9 * 0.280406);
    CHECK(cert.kappa_lb == doctest::Approx(std::sqrt(2 * cert.lambda_certified.get_d() / 12)));
}
