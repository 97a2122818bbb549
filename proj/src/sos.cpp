#include "kazhdan/sos.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace kazhdan {

std::vector<std::pair<std::uint32_t, std::uint32_t>> SOSProblem::pairs_of(std::uint32_t g) const {
    if (g >= n_constraints) throw DomainError("element outside Ball(2R)");
    return {pairs.begin() + static_cast<std::ptrdiff_t>(pair_offsets[g]),
            pairs.begin() + static_cast<std::ptrdiff_t>(pair_offsets[g + 1])};
}

SOSProblem formulate(const RingElement& x, const RingElement& m, int R) {
    if (!x.context() || x.context() != m.context()) throw ContextMismatch("target and order element need one context");
    const ContextPtr& ctx = x.context();
    if (R < 0 || R > ctx->radius()) {
        throw ResourceError("radius " + std::to_string(R) + " exceeds the context radius " +
                            std::to_string(ctx->radius()));
    }
    if (x.support_radius() > 2 * R) throw DomainError("target support escapes Ball(2R) for R = " + std::to_string(R));
    if (m.support_radius() > 2 * R) {
        throw DomainError("order element support escapes Ball(2R) for R = " + std::to_string(R));
    }
    if (augmentation(x) != 0) throw DomainError("target is not in the augmentation ideal");
    if (augmentation(m) != 0) throw DomainError("order element is not in the augmentation ideal");
    if (m.is_zero()) throw DomainError("order element is zero");
    if (star(x) != x || star(m) != m) throw DomainError("target and order element must be self-adjoint");

    SOSProblem p;
    p.ctx = ctx;
    p.target = x;
    p.order_element = m;
    p.R = R;
    p.n = ctx->ball.count_within(R);
    p.n_constraints = ctx->ball.count_within(2 * R);
    const std::size_t n = p.n;
    p.pair_element.resize(n * n);
    std::vector<std::size_t> counts(p.n_constraints + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t inv = ctx->ball.inverse(i);
        for (std::size_t j = 0; j < n; ++j) {
            const std::uint32_t g = ctx->table(inv, j);
            p.pair_element[i * n + j] = g;
            ++counts[g + 1];
        }
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    p.pair_offsets = counts;
    p.pairs.resize(n * n);
    std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            p.pairs[fill[p.pair_element[i * n + j]]++] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
        }
    }
    return p;
}

nlohmann::json problem_summary(const SOSProblem& p) {
    return {{"group", p.ctx->name},
            {"R", p.R},
            {"basis_size", p.n},
            {"constraints", p.n_constraints},
            {"target_support", p.target.support_size()},
            {"order_support", p.order_element.support_size()}};
}

// ---------------------------------------------------------------- SDPA

SdpaData sdpa_data(const SOSProblem& p) {
    SdpaData d;
    const auto& ball = p.ctx->ball;
    d.block_struct = {static_cast<int>(p.n), -2};
    d.entries.push_back({0, 2, 1, 1, 1.0});
    d.entries.push_back({0, 2, 2, 2, -1.0});
    int k = 0;
    for (std::uint32_t g = 0; g < p.n_constraints; ++g) {
        const std::uint32_t gi = ball.inverse(g);
        if (gi < g) continue;
        ++k;
        d.c.push_back(p.target.coeff(g).get_d());
        std::vector<SdpaEntry> block;
        const double off = gi == g ? 1.0 : 0.5;
        for (std::uint32_t h : {g, gi}) {
            for (const auto& [i, j] : p.pairs_of(h)) {
                if (i > j) continue;
                block.push_back({k, 1, static_cast<int>(i) + 1, static_cast<int>(j) + 1, i == j ? 1.0 : off});
            }
            if (gi == g) break;
        }
        std::sort(block.begin(), block.end(), [](const SdpaEntry& a, const SdpaEntry& b) {
            return std::tie(a.row, a.col) < std::tie(b.row, b.col);
        });
        d.entries.insert(d.entries.end(), block.begin(), block.end());
        const double mg = p.order_element.coeff(g).get_d();
        if (mg != 0.0) {
            d.entries.push_back({k, 2, 1, 1, mg});
            d.entries.push_back({k, 2, 2, 2, -mg});
        }
    }
    d.m = k;
    return d;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_sdpa(const SdpaData& d, std::ostream& out) {
    out << "\"max lambda s.t. x - lambda m = sum_g (sum_{pairs(g)} P_ij) g, P psd\"\n";
    out << d.m << " = mDIM\n" << d.block_struct.size() << " = nBLOCK\n";
    for (std::size_t b = 0; b < d.block_struct.size(); ++b) out << (b ? " " : "") << d.block_struct[b];
    out << " = bLOCKsTRUCT\n";
    for (std::size_t i = 0; i < d.c.size(); ++i) out << (i ? " " : "") << fmt(d.c[i]);
    out << "\n";
    for (const auto& e : d.entries) {
        out << e.matrix << ' ' << e.block << ' ' << e.row << ' ' << e.col << ' ' << fmt(e.value) << '\n';
    }
}

SdpaData read_sdpa(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '"' || line[0] == '*') continue;
        for (char& ch : line) {
            if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
        }
        lines.push_back(line);
    }
    if (lines.size() < 4) throw IoError("truncated SDPA file");
    SdpaData d;
    int nblocks = 0;
    std::istringstream(lines[0]) >> d.m;
    std::istringstream(lines[1]) >> nblocks;
    {
        std::istringstream s(lines[2]);
        for (int b = 0; b < nblocks; ++b) {
            int v = 0;
            if (!(s >> v)) throw IoError("malformed block structure");
            d.block_struct.push_back(v);
        }
    }
    std::size_t li = 3;
    {
        std::istringstream s;
        while (static_cast<int>(d.c.size()) < d.m) {
            if (li >= lines.size()) throw IoError("truncated objective vector");
            s.clear();
            s.str(lines[li++]);
            double v;
            while (static_cast<int>(d.c.size()) < d.m && s >> v) d.c.push_back(v);
        }
    }
    for (; li < lines.size(); ++li) {
        std::istringstream s(lines[li]);
        SdpaEntry e;
        if (!(s >> e.matrix >> e.block >> e.row >> e.col >> e.value)) {
            if (lines[li].find_first_not_of(" \t\r") == std::string::npos) continue;
            throw IoError("malformed SDPA entry: " + lines[li]);
        }
        d.entries.push_back(e);
    }
    return d;
}

void export_problem(const SOSProblem& p, const std::filesystem::path& path) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write " + tmp);
        write_sdpa(sdpa_data(p), out);
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------- symmetry

namespace {

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

struct Automorphism {
    IntMatrix matrix;  // signed permutation, first nonzero of column 0 positive
    bool transpose_inverse = false;
};

std::string auto_key(const Automorphism& a) {
    std::string s(a.transpose_inverse ? "t" : "n");
    for (Eigen::Index k = 0; k < a.matrix.size(); ++k) s += static_cast<char>('1' + a.matrix.data()[k]);
    return s;
}

Automorphism normalized(IntMatrix m, bool ti) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (m(r, 0) != 0) {
            if (m(r, 0) < 0) m = -m;
            break;
        }
    }
    return {std::move(m), ti};
}

Automorphism compose(const Automorphism& a, const Automorphism& b) {
    return normalized(a.matrix * b.matrix, a.transpose_inverse != b.transpose_inverse);
}

constexpr int max_symmetry_dim = 6;

}  // namespace

Symmetry find_symmetries(const SOSProblem& p, bool enabled) {
    Symmetry sym;
    const Ball& ball = p.ctx->ball;
    const int d = ball.dim;
    if (!enabled || d > max_symmetry_dim) return sym;

    const std::size_t ngen = p.ctx->generators.size();
    std::set<std::string> gen_keys;
    std::vector<std::uint32_t> gen_index;
    for (const auto& s : p.ctx->generators) {
        gen_keys.insert(serialize_matrix(s));
        gen_index.push_back(*ball.find(s));
    }
    auto image = [&](const Automorphism& a, std::uint32_t g) -> IntMatrix {
        const IntMatrix h = a.transpose_inverse ? IntMatrix(ball.element(ball.inverse(g)).transpose()) : ball.element(g);
        return a.matrix * h * a.matrix.transpose();
    };

    std::vector<Automorphism> autos;
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    do {
        for (int signs = 0; signs < (1 << (d - 1)); ++signs) {
            IntMatrix m = IntMatrix::Zero(d, d);
            for (int i = 0; i < d; ++i) m(perm[static_cast<std::size_t>(i)], i) = (i > 0 && (signs >> (i - 1)) & 1) ? -1 : 1;
            for (bool ti : {false, true}) {
                Automorphism a = normalized(m, ti);
                bool ok = true;
                for (std::size_t k = 0; k < ngen && ok; ++k) ok = gen_keys.count(serialize_matrix(image(a, gen_index[k]))) > 0;
                if (ok) autos.push_back(std::move(a));
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    auto invariant = [&](const std::vector<std::uint32_t>& pm) {
        for (const RingElement* e : {&p.target, &p.order_element}) {
            for (const auto& [g, v] : e->coeffs()) {
                if (e->coeff(pm[g]) != v) return false;
            }
        }
        return true;
    };
    auto ball_perm = [&](const Automorphism& a) -> std::optional<std::vector<std::uint32_t>> {
        std::vector<std::uint32_t> pm(ball.size());
        for (std::uint32_t g = 0; g < ball.size(); ++g) {
            const auto f = ball.find(image(a, g));
            if (!f) return std::nullopt;
            pm[g] = *f;
        }
        return pm;
    };

    // Keep the automorphisms fixing x and m, then pick a generating subset.
    std::map<std::string, Automorphism> group;
    std::vector<Automorphism> chosen;
    const Automorphism identity = normalized(IntMatrix::Identity(d, d), false);
    group.emplace(auto_key(identity), identity);
    std::set<std::string> rejected;
    for (const auto& a : autos) {
        const std::string key = auto_key(a);
        if (group.count(key) || rejected.count(key)) continue;
        auto pm = ball_perm(a);
        if (!pm || !invariant(*pm)) {
            rejected.insert(key);
            continue;
        }
        chosen.push_back(a);
        sym.generators.push_back(std::move(*pm));
        std::vector<Automorphism> frontier;
        for (const auto& [k, g] : group) frontier.push_back(g);
        while (!frontier.empty()) {
            std::vector<Automorphism> next;
            for (const auto& g : frontier) {
                for (const auto& c : chosen) {
                    Automorphism h = compose(c, g);
                    if (group.emplace(auto_key(h), h).second) next.push_back(h);
                }
            }
            frontier = std::move(next);
        }
    }
    sym.order = group.size();
    return sym;
}

// ---------------------------------------------------------------- solver

const char* to_string(SolverStatus s) {
    switch (s) {
        case SolverStatus::optimal: return "optimal";
        case SolverStatus::near_optimal: return "near_optimal";
        case SolverStatus::infeasible: return "infeasible";
        case SolverStatus::failed: return "failed";
    }
    return "failed";
}

SolverStatus solver_status_from_string(const std::string& s) {
    if (s == "optimal") return SolverStatus::optimal;
    if (s == "near_optimal") return SolverStatus::near_optimal;
    if (s == "infeasible") return SolverStatus::infeasible;
    if (s == "failed") return SolverStatus::failed;
    throw DomainError("unknown solver status " + s);
}

namespace {

// Constraints aggregated over orbits of (symmetry group, inversion); pair
// orbits additionally closed under (i, j) ↦ (j, i).
struct Reduction {
    std::size_t K = 0;
    std::vector<std::int32_t> pair_class;  // n×n, row-major
    std::vector<std::pair<std::uint32_t, std::uint32_t>> reps;
    std::vector<double> weight;
    Vector<double> b, m;
    int drop = 0;
};

Reduction reduce(const SOSProblem& p, const Symmetry& sym) {
    const std::size_t n = p.n, n2 = p.n_constraints;
    const Ball& ball = p.ctx->ball;
    Reduction red;

    UnionFind cls(n2);
    for (std::uint32_t g = 0; g < n2; ++g) {
        cls.unite(g, ball.inverse(g));
        for (const auto& pm : sym.generators) cls.unite(g, pm[g]);
    }
    std::vector<std::int32_t> label(n2, -1);
    std::vector<std::int32_t> class_of(n2);
    for (std::uint32_t g = 0; g < n2; ++g) {
        const auto r = cls.find(g);
        if (label[r] < 0) label[r] = static_cast<std::int32_t>(red.K++);
        class_of[g] = label[r];
    }
    if (red.K < 2) throw DomainError("problem has a single constraint class");
    red.pair_class.resize(n * n);
    for (std::size_t k = 0; k < n * n; ++k) red.pair_class[k] = class_of[p.pair_element[k]];

    UnionFind po(n * n);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < n; ++j) {
            const auto id = static_cast<std::uint32_t>(i * n + j);
            po.unite(id, static_cast<std::uint32_t>(j * n + i));
            for (const auto& pm : sym.generators) po.unite(id, static_cast<std::uint32_t>(pm[i] * n + pm[j]));
        }
    }
    std::vector<std::uint32_t> size(n * n, 0);
    for (std::uint32_t id = 0; id < n * n; ++id) ++size[po.find(id)];
    for (std::uint32_t id = 0; id < n * n; ++id) {
        if (po.find(id) == id) {
            red.reps.emplace_back(id / n, id % n);
            red.weight.push_back(static_cast<double>(size[id]));
        }
    }

    red.b = Vector<double>::Zero(static_cast<Eigen::Index>(red.K));
    red.m = Vector<double>::Zero(static_cast<Eigen::Index>(red.K));
    for (const auto& [g, v] : p.target.coeffs()) red.b(class_of[g]) += v.get_d();
    for (const auto& [g, v] : p.order_element.coeffs()) red.m(class_of[g]) += v.get_d();
    red.drop = static_cast<int>(red.K) - 1;
    if (red.drop == class_of[0]) --red.drop;
    return red;
}

class Ipm {
public:
    Ipm(const SOSProblem& p, const Reduction& red, const SolverConfig& cfg)
        : p_(p), red_(red), cfg_(cfg), n_(static_cast<Eigen::Index>(p.n)), K_(static_cast<Eigen::Index>(red.K)) {}

    NumericSolution run();

private:
    const SOSProblem& p_;
    const Reduction& red_;
    const SolverConfig& cfg_;
    Eigen::Index n_, K_;

    void project(Matrix<double>& Y) const {
        const Vector<double> r = Y.rowwise().mean();
        const Eigen::RowVectorXd c = Y.colwise().mean();
        const double t = Y.mean();
        Y.colwise() -= r;
        Y.rowwise() -= c;
        Y.array() += t;
    }

    static void symmetrize(Matrix<double>& Y) { Y = 0.5 * (Y + Y.transpose()).eval(); }

    Vector<double> aop(const Matrix<double>& Y) const {
        Vector<double> out = Vector<double>::Zero(K_);
        const auto& pc = red_.pair_class;
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index j = 0; j < n_; ++j) out(pc[static_cast<std::size_t>(i * n_ + j)]) += Y(i, j);
        }
        return out;
    }

    Matrix<double> astar(const Vector<double>& y) const {
        Matrix<double> Y(n_, n_);
        const auto& pc = red_.pair_class;
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index j = 0; j < n_; ++j) Y(i, j) = y(pc[static_cast<std::size_t>(i * n_ + j)]);
        }
        project(Y);
        return Y;
    }

    // (ΠZΠ + J)⁻¹ − J with J = 11ᵀ/n; false when Z is not positive on 1⊥.
    bool pinv(const Matrix<double>& Z, Matrix<double>& out) const {
        Matrix<double> A = Z;
        A.array() += 1.0 / static_cast<double>(n_);
        Eigen::LLT<Matrix<double>> llt(A);
        if (llt.info() != Eigen::Success) return false;
        out = llt.solve(Matrix<double>::Identity(n_, n_));
        out.array() -= 1.0 / static_cast<double>(n_);
        symmetrize(out);
        return true;
    }

    double max_step(const Matrix<double>& X, const Matrix<double>& dX) const {
        Matrix<double> A = X;
        A.array() += 1.0 / static_cast<double>(n_);
        Eigen::LLT<Matrix<double>> llt(A);
        if (llt.info() != Eigen::Success) return 0.0;
        Matrix<double> W = llt.matrixL().solve(dX);
        W = llt.matrixL().solve(W.transpose()).eval();
        symmetrize(W);
        Eigen::SelfAdjointEigenSolver<Matrix<double>> es(W, Eigen::EigenvaluesOnly);
        const double mn = es.eigenvalues().minCoeff();
        return mn >= 0 ? 1.0 : std::min(1.0, -1.0 / mn);
    }

    Matrix<double> schur(const Matrix<double>& X, const Matrix<double>& Zi) const;

public:
    // Least-norm move of X onto the affine constraints at fixed λ; kept only
    // when X stays positive definite on 1⊥.
    bool polish(Matrix<double>& X, double lam) const {
        Matrix<double> rows = Matrix<double>::Zero(n_, K_);
        Vector<double> sizes = Vector<double>::Zero(K_);
        const auto& pc = red_.pair_class;
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index j = 0; j < n_; ++j) rows(i, pc[static_cast<std::size_t>(i * n_ + j)]) += 1.0;
        }
        sizes = rows.colwise().sum().transpose();
        const double nn = static_cast<double>(n_);
        Matrix<double> N = -(2.0 / nn) * rows.transpose() * rows + sizes * sizes.transpose() / (nn * nn);
        N.diagonal() += sizes;
        const int drop = red_.drop;
        N.row(drop).setZero();
        N.col(drop).setZero();
        N(drop, drop) = 1.0;
        Vector<double> r = red_.b - aop(X) - red_.m * lam;
        r(drop) = 0.0;
        const Eigen::PartialPivLU<Matrix<double>> lu(N);
        Vector<double> w = lu.solve(r);
        w += lu.solve(r - N * w);
        Matrix<double> Xp = X + astar(w);
        symmetrize(Xp);
        Matrix<double> A = Xp;
        A.array() += 1.0 / nn;
        Eigen::LLT<Matrix<double>> llt(A);
        if (llt.info() != Eigen::Success) return false;
        X = std::move(Xp);
        return true;
    }
};

Matrix<double> Ipm::schur(const Matrix<double>& X, const Matrix<double>& Zi) const {
    const std::size_t nreps = red_.reps.size();
    const int jobs = std::max(1, std::min<int>(cfg_.jobs, static_cast<int>(nreps)));
    std::vector<Matrix<double>> parts(static_cast<std::size_t>(jobs), Matrix<double>::Zero(K_, K_));
    auto work = [&](int t) {
        Matrix<double>& M = parts[static_cast<std::size_t>(t)];
        Vector<double> row(K_);
        const auto& pc = red_.pair_class;
        for (std::size_t r = static_cast<std::size_t>(t); r < nreps; r += static_cast<std::size_t>(jobs)) {
            const auto [i, j] = red_.reps[r];
            row.setZero();
            const double* xi = X.col(i).data();
            const double* xj = X.col(j).data();
            const double* u = Zi.col(j).data();
            const double* v = Zi.col(i).data();
            for (Eigen::Index k = 0; k < n_; ++k) {
                const double a = xi[k], b = xj[k];
                const std::int32_t* pck = pc.data() + k * n_;
                for (Eigen::Index l = 0; l < n_; ++l) row(pck[l]) += a * u[l] + b * v[l];
            }
            M.row(pc[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + j]) += (0.5 * red_.weight[r]) * row.transpose();
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < jobs; ++t) threads.emplace_back(work, t);
        for (auto& th : threads) th.join();
    }
    for (int t = 1; t < jobs; ++t) parts[0] += parts[static_cast<std::size_t>(t)];
    return std::move(parts[0]);
}

NumericSolution Ipm::run() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };
    const double nn = static_cast<double>(n_);
    const Vector<double>& b = red_.b;
    const int drop = red_.drop;
    Vector<double> mm = red_.m;
    mm(drop) = 0.0;
    const int eclass = red_.pair_class[0];
    if (red_.m(eclass) <= 0) throw DomainError("order element needs a positive identity coefficient");

    Matrix<double> X = Matrix<double>::Identity(n_, n_);
    X.array() -= 1.0 / nn;
    Vector<double> y = Vector<double>::Zero(K_);
    y(eclass) = 1.0 / red_.m(eclass);
    Matrix<double> Z = astar(y);
    double lam = 0.0;

    NumericSolution out;
    out.stats.classes = red_.K;

    if (cfg_.resume) {
        NumericSolution prev = load_solution(*cfg_.resume);
        if (prev.gram.rows() != n_ || prev.y.size() != K_ || prev.dual_slack.rows() != n_) {
            throw DomainError("checkpoint does not match this problem");
        }
        X = prev.gram;
        Z = prev.dual_slack;
        y = prev.y;
        lam = prev.lambda;
    }

    const double bnorm = 1.0 + b.norm();
    const double mnorm = red_.m.norm();
    struct Best {
        double merit = std::numeric_limits<double>::infinity();
        Matrix<double> X, Z;
        Vector<double> y;
        double lam = 0, pinf = 0, dinf = 0, gap = 0, dual = 0;
        int iter = 0;
    } best;

    auto measure = [&](double& pinf, double& dinf, double& gap, double& dual) {
        pinf = (b - aop(X) - red_.m * lam).norm() / bnorm;
        dinf = (astar(y) - Z).norm() / (1.0 + Z.norm()) + std::abs(1.0 - red_.m.dot(y));
        dual = b.dot(y);
        gap = std::abs(dual - lam) / (1.0 + std::abs(lam));
    };

    std::string message = "iteration limit";
    SolverStatus status = SolverStatus::failed;
    double last_checkpoint = 0.0;
    int stalled = 0;
    int it = 0;
    for (; it < cfg_.max_iter; ++it) {
        if (cfg_.time_limit_sec > 0 && elapsed() > cfg_.time_limit_sec) {
            message = "time limit";
            break;
        }
        Matrix<double> Zi;
        if (!pinv(Z, Zi)) {
            message = "dual slack lost positivity";
            break;
        }
        const Vector<double> Rp = b - aop(X) - red_.m * lam;
        const Matrix<double> Rd = astar(y) - Z;
        const double rf = 1.0 - red_.m.dot(y);
        const double mu = X.cwiseProduct(Z).sum() / (nn - 1.0);

        Matrix<double> M = schur(X, Zi);
        M.row(drop).setZero();
        M.col(drop).setZero();
        M(drop, drop) = 1.0;
        const Eigen::PartialPivLU<Matrix<double>> lu(M);
        auto msolve = [&](const Vector<double>& v) {
            Vector<double> s = lu.solve(v);
            s += lu.solve(v - M * s);
            return s;
        };
        const Vector<double> Mm = msolve(mm);
        const double mMm = mm.dot(Mm);
        if (!std::isfinite(mMm) || std::abs(mMm) < 1e-300) {
            message = "degenerate order element";
            break;
        }

        auto direction = [&](Matrix<double> T, Matrix<double>& dX, Vector<double>& dy, Matrix<double>& dZ, double& dl) {
            project(T);
            symmetrize(T);
            Vector<double> r1 = aop(T) - Rp;
            r1(drop) = 0.0;
            const Vector<double> Mr = msolve(r1);
            dl = (rf - mm.dot(Mr)) / mMm;
            dy = Mr + Mm * dl;
            const Matrix<double> Ady = astar(dy);
            dZ = Ady + Rd;
            dX = T - X * Ady * Zi;
            symmetrize(dX);
            project(dX);
        };

        const Matrix<double> XRdZi = X * Rd * Zi;
        Matrix<double> dXa, dZa, dX, dZ;
        Vector<double> dya, dy;
        double dla = 0, dl = 0;
        direction(-X - XRdZi, dXa, dya, dZa, dla);
        double ap = max_step(X, dXa), ad = max_step(Z, dZa);
        const double mua = (X + ap * dXa).cwiseProduct(Z + ad * dZa).sum() / (nn - 1.0);
        const double sigma = std::pow(std::max(mua, 0.0) / mu, 3);
        direction(sigma * mu * Zi - X - XRdZi - dXa * dZa * Zi, dX, dy, dZ, dl);
        ap = std::min(1.0, 0.95 * max_step(X, dX));
        ad = std::min(1.0, 0.95 * max_step(Z, dZ));

        X += ap * dX;
        lam += ap * dl;
        y += ad * dy;
        Z += ad * dZ;
        symmetrize(X);
        symmetrize(Z);

        double pinf, dinf, gap, dual;
        measure(pinf, dinf, gap, dual);
        if (cfg_.on_iteration) cfg_.on_iteration({it + 1, lam, dual, mu, pinf, dinf, ap, ad, elapsed()});
        const double merit = std::max({pinf, dinf, gap});
        if (std::isfinite(merit) && merit <= best.merit) {
            best = {merit, X, Z, y, lam, pinf, dinf, gap, dual, it + 1};
            stalled = 0;
        } else {
            ++stalled;
        }
        if (cfg_.checkpoint && elapsed() - last_checkpoint > cfg_.checkpoint_interval_sec) {
            NumericSolution cp;
            cp.lambda = lam;
            cp.gram = X;
            cp.y = y;
            cp.dual_slack = Z;
            cp.status = SolverStatus::near_optimal;
            cp.stats.iterations = it + 1;
            cp.stats.message = "checkpoint";
            save_solution(cp, *cfg_.checkpoint);
            last_checkpoint = elapsed();
        }
        if (gap < cfg_.gap_tol && pinf < cfg_.tol && dinf < cfg_.tol) {
            status = SolverStatus::optimal;
            message = "converged";
            ++it;
            break;
        }
        // y/|b·y| is then a Farkas ray: A*y ⪰ 0 up to dinf, relative m-defect ⩽ 1e-3
        if (dual * mnorm < -1e3 * std::max(b.norm(), mnorm) && dinf < 1e-6) {
            status = SolverStatus::infeasible;
            message = "dual objective unbounded below";
            ++it;
            break;
        }
        if (!std::isfinite(lam) || !std::isfinite(dual)) {
            message = "iterates diverged";
            ++it;
            break;
        }
        if (stalled >= 5) {
            message = "no progress in 5 iterations";
            ++it;
            break;
        }
        if (ap < 1e-9 && ad < 1e-9) {
            message = "step length collapsed";
            ++it;
            break;
        }
    }

    if (status != SolverStatus::optimal && status != SolverStatus::infeasible && std::isfinite(best.merit)) {
        if (best.pinf < 1e-6 && best.gap < 1e-4 && best.dinf < 1e-6) status = SolverStatus::near_optimal;
    }
    if (status == SolverStatus::infeasible || !std::isfinite(best.merit)) {
        best.X = X;
        best.Z = Z;
        best.y = y;
        best.lam = lam;
        measure(best.pinf, best.dinf, best.gap, best.dual);
        best.iter = it;
    }
    if (status == SolverStatus::optimal || status == SolverStatus::near_optimal) {
        if (polish(best.X, best.lam)) {
            X = best.X;
            lam = best.lam;
            best.pinf = (b - aop(X) - red_.m * lam).norm() / bnorm;
        }
    }
    out.lambda = best.lam;
    out.gram = std::move(best.X);
    out.dual_slack = std::move(best.Z);
    out.y = std::move(best.y);
    out.status = status;
    out.stats.iterations = it;
    out.stats.primal_residual = best.pinf;
    out.stats.dual_residual = best.dinf;
    out.stats.gap = best.gap;
    out.stats.dual_objective = best.dual;
    out.stats.seconds = elapsed();
    out.stats.message = message;
    return out;
}

}  // namespace

NumericSolution solve(const SOSProblem& p, const SolverConfig& config) {
    const Symmetry sym = find_symmetries(p, config.use_symmetry);
    const Reduction red = reduce(p, sym);
    Ipm ipm(p, red, config);
    NumericSolution s = ipm.run();
    s.stats.symmetry_order = sym.order;
    return s;
}

double reconstruction_residual(const SOSProblem& p, const Matrix<double>& gram, double lambda) {
    std::vector<double> acc(p.n_constraints, 0.0);
    for (std::size_t i = 0; i < p.n; ++i) {
        for (std::size_t j = 0; j < p.n; ++j) {
            acc[p.pair_element[i * p.n + j]] += gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    double total = 0.0;
    for (std::uint32_t g = 0; g < p.n_constraints; ++g) {
        total += std::abs(acc[g] - (p.target.coeff(g).get_d() - lambda * p.order_element.coeff(g).get_d()));
    }
    return total;
}

// ---------------------------------------------------------------- persistence

namespace {

constexpr char solution_magic[8] = {'K', 'Z', 'S', 'O', 'L', '0', '0', '1'};

void write_matrix(std::ofstream& out, const Matrix<double>& m) {
    const std::int64_t r = m.rows(), c = m.cols();
    out.write(reinterpret_cast<const char*>(&r), sizeof r);
    out.write(reinterpret_cast<const char*>(&c), sizeof c);
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Matrix<double> read_matrix(std::ifstream& in) {
    std::int64_t r = 0, c = 0;
    in.read(reinterpret_cast<char*>(&r), sizeof r);
    in.read(reinterpret_cast<char*>(&c), sizeof c);
    if (!in || r < 0 || c < 0 || r > (1 << 20) || c > (1 << 20)) throw IoError("corrupt solution matrix header");
    Matrix<double> m(r, c);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw IoError("truncated solution matrix");
    return m;
}

}  // namespace

void save_solution(const NumericSolution& s, const std::filesystem::path& path) {
    const std::string bin = path.string() + ".bin";
    {
        std::ofstream out(bin + ".tmp", std::ios::binary);
        if (!out) throw IoError("cannot write " + bin);
        out.write(solution_magic, sizeof solution_magic);
        write_matrix(out, s.gram);
        write_matrix(out, s.dual_slack);
        if (!out) throw IoError("write failed: " + bin);
    }
    std::filesystem::rename(bin + ".tmp", bin);
    nlohmann::json j = {{"lambda", s.lambda},
                        {"status", to_string(s.status)},
                        {"basis_size", s.gram.rows()},
                        {"matrices", path.filename().string() + ".bin"},
                        {"y", std::vector<double>(s.y.data(), s.y.data() + s.y.size())},
                        {"stats",
                         {{"iterations", s.stats.iterations},
                          {"primal_residual", s.stats.primal_residual},
                          {"dual_residual", s.stats.dual_residual},
                          {"gap", s.stats.gap},
                          {"dual_objective", s.stats.dual_objective},
                          {"seconds", s.stats.seconds},
                          {"classes", s.stats.classes},
                          {"symmetry_order", s.stats.symmetry_order},
                          {"message", s.stats.message}}}};
    const std::string tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write " + path.string());
        out << j.dump(1) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

NumericSolution load_solution(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed solution file: " + std::string(e.what()));
    }
    NumericSolution s;
    s.lambda = j.at("lambda").get<double>();
    s.status = solver_status_from_string(j.at("status").get<std::string>());
    const auto y = j.at("y").get<std::vector<double>>();
    s.y = Eigen::Map<const Vector<double>>(y.data(), static_cast<Eigen::Index>(y.size()));
    const auto& st = j.at("stats");
    s.stats.iterations = st.at("iterations").get<int>();
    s.stats.primal_residual = st.at("primal_residual").get<double>();
    s.stats.dual_residual = st.at("dual_residual").get<double>();
    s.stats.gap = st.at("gap").get<double>();
    s.stats.dual_objective = st.at("dual_objective").get<double>();
    s.stats.seconds = st.at("seconds").get<double>();
    s.stats.classes = st.at("classes").get<std::size_t>();
    s.stats.symmetry_order = st.at("symmetry_order").get<std::size_t>();
    s.stats.message = st.at("message").get<std::string>();
    std::ifstream bin(path.parent_path() / j.at("matrices").get<std::string>(), std::ios::binary);
    if (!bin) throw IoError("missing solution matrices for " + path.string());
    char magic[8];
    bin.read(magic, sizeof magic);
    if (!bin || !std::equal(magic, magic + 8, solution_magic)) throw IoError("bad solution matrix file");
    s.gram = read_matrix(bin);
    s.dual_slack = read_matrix(bin);
    if (s.gram.rows() != j.at("basis_size").get<Eigen::Index>()) throw IoError("solution size mismatch");
    return s;
}

}  // namespace kazhdan
