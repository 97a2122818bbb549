#include "kazhdan/chevalley.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace kazhdan {

namespace {

using RowMajor = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void mul_raw(const std::int64_t* a, const std::int64_t* b, std::int64_t* c, int d) {
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            std::int64_t acc = 0;
            for (int k = 0; k < d; ++k) {
                const std::int64_t x = a[i * d + k], y = b[k * d + j];
                if (x == 0 || y == 0) continue;
                std::int64_t p;
                if (__builtin_mul_overflow(x, y, &p) || __builtin_add_overflow(acc, p, &acc)) {
                    throw ResourceError("64-bit overflow in integer matrix product");
                }
            }
            c[i * d + j] = acc;
        }
    }
}

std::vector<std::int64_t> row_major(const IntMatrix& m) {
    std::vector<std::int64_t> out(static_cast<std::size_t>(m.size()));
    Eigen::Map<RowMajor>(out.data(), m.rows(), m.cols()) = m;
    return out;
}

std::uint64_t hash_entries(const std::int64_t* p, std::size_t k) {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    for (std::size_t i = 0; i < k; ++i) {
        std::uint64_t x = static_cast<std::uint64_t>(p[i]) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
        h ^= x;
    }
    h ^= h >> 30;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 27;
    h *= 0x94D049BB133111EBULL;
    h ^= h >> 31;
    return h;
}

constexpr std::uint32_t empty_slot = 0xFFFFFFFFu;

}  // namespace

IntMatrix checked_product(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols() != b.rows()) throw DomainError("matrix dimensions do not match");
    if (a.rows() != a.cols() || b.rows() != b.cols()) throw DomainError("group elements must be square");
    const int d = static_cast<int>(a.rows());
    const auto ra = row_major(a), rb = row_major(b);
    std::vector<std::int64_t> rc(ra.size());
    mul_raw(ra.data(), rb.data(), rc.data(), d);
    return Eigen::Map<RowMajor>(rc.data(), d, d);
}

std::int64_t determinant(const IntMatrix& m) {
    const Eigen::Index n = m.rows();
    if (n != m.cols()) throw DomainError("determinant of a non-square matrix");
    Matrix<__int128> a = m.cast<__int128>();
    __int128 prev = 1;
    int sign = 1;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (a(k, k) == 0) {
            Eigen::Index p = k + 1;
            while (p < n && a(p, k) == 0) ++p;
            if (p == n) return 0;
            a.row(k).swap(a.row(p));
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < n; ++i) {
            for (Eigen::Index j = k + 1; j < n; ++j) {
                a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
            }
        }
        prev = a(k, k);
    }
    return static_cast<std::int64_t>(sign * a(n - 1, n - 1));
}

IntMatrix symplectic_form(int n) {
    IntMatrix j = IntMatrix::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = IntMatrix::Identity(n, n);
    j.bottomLeftCorner(n, n) = -IntMatrix::Identity(n, n);
    return j;
}

bool is_symplectic(const IntMatrix& m) {
    if (m.rows() % 2 != 0) return false;
    const IntMatrix j = symplectic_form(static_cast<int>(m.rows() / 2));
    return m.transpose() * j * m == j;
}

std::vector<IntMatrix> GeneratorSet::elements() const {
    std::vector<IntMatrix> out;
    for (std::size_t a = 0; a < plus.size(); ++a) {
        out.push_back(plus[a]);
        out.push_back(minus[a]);
    }
    return out;
}

IntMatrix steinberg_element(const RootSystem& omega, int root, std::int64_t t) {
    const IntVector& v = omega.roots[static_cast<std::size_t>(root)].coords;
    if (omega.family == 'A') {
        const int d = omega.ambient_dim;
        IntMatrix x = IntMatrix::Identity(d, d);
        int i = -1, j = -1;
        for (int k = 0; k < d; ++k) {
            if (v(k) == 1) i = k;
            if (v(k) == -1) j = k;
        }
        x(i, j) = t;
        return x;
    }
    if (omega.family != 'C') {
        throw UnsupportedRealization(std::string("no Steinberg matrices for type ") + omega.family +
                                     "; family bounds for this type come from the replicate module");
    }
    const int n = omega.rank;
    IntMatrix x = IntMatrix::Identity(2 * n, 2 * n);
    std::vector<int> pos, neg;
    int two = -1, minus_two = -1;
    for (int k = 0; k < n; ++k) {
        if (v(k) == 1) pos.push_back(k);
        if (v(k) == -1) neg.push_back(k);
        if (v(k) == 2) two = k;
        if (v(k) == -2) minus_two = k;
    }
    if (two >= 0) {
        x(two, two + n) += t;
    } else if (minus_two >= 0) {
        x(minus_two + n, minus_two) += t;
    } else if (pos.size() == 1 && neg.size() == 1) {
        const int i = pos[0], j = neg[0];
        x(i, j) += t;
        x(n + j, n + i) -= t;
    } else if (pos.size() == 2) {
        const int i = pos[0], j = pos[1];
        x(i, j + n) += t;
        x(j, i + n) += t;
    } else {
        const int i = neg[0], j = neg[1];
        x(i + n, j) += t;
        x(j + n, i) += t;
    }
    return x;
}

GeneratorSet steinberg_generators(char family, int rank) {
    if (family != 'A' && family != 'C') {
        throw UnsupportedRealization(std::string("no Steinberg matrices for type ") + family +
                                     "; family bounds for this type come from the replicate module");
    }
    GeneratorSet gens;
    gens.system = build_root_system(family, rank);
    const RootSystem& omega = gens.system;
    gens.dim = family == 'A' ? rank + 1 : 2 * rank;
    for (std::size_t a = 0; a < omega.size(); ++a) {
        gens.plus.push_back(steinberg_element(omega, static_cast<int>(a), 1));
        gens.minus.push_back(steinberg_element(omega, static_cast<int>(a), -1));
    }
    const IntMatrix id = IntMatrix::Identity(gens.dim, gens.dim);
    const auto all = gens.elements();
    for (std::size_t a = 0; a < omega.size(); ++a) {
        const IntMatrix& x = gens.plus[a];
        if (checked_product(x, gens.minus[a]) != id) throw ConsistencyError("x_a(-1) is not the inverse of x_a(1)");
        const int na = omega.negative(static_cast<int>(a));
        if (gens.plus[static_cast<std::size_t>(na)] != x.transpose()) {
            throw ConsistencyError("x_{-a}(1) is not the transpose of x_a(1) for root " + std::to_string(a));
        }
        if (determinant(x) != 1) throw ConsistencyError("generator with determinant != 1");
        if (family == 'C' && (!is_symplectic(x) || !is_symplectic(gens.minus[a]))) {
            throw ConsistencyError("generator does not preserve the symplectic form");
        }
    }
    for (std::size_t p = 0; p < all.size(); ++p) {
        for (std::size_t q = p + 1; q < all.size(); ++q) {
            if (all[p] == all[q]) throw ConsistencyError("generating sets of distinct roots intersect");
        }
    }
    for (std::size_t a = 0; a < omega.size(); ++a) {
        for (std::size_t b = 0; b < omega.size(); ++b) {
            if (omega.inner(static_cast<int>(a), static_cast<int>(b)) != 0) continue;
            // e_i - e_j and e_i + e_j are orthogonal in type C but their sum is a root
            const IntVector& ca = omega.roots[a].coords;
            const IntVector& cb = omega.roots[b].coords;
            if (omega.find(ca + cb) >= 0 || omega.find(ca - cb) >= 0) continue;
            for (const IntMatrix* x : {&gens.plus[a], &gens.minus[a]}) {
                for (const IntMatrix* y : {&gens.plus[b], &gens.minus[b]}) {
                    if (checked_product(*x, *y) != checked_product(*y, *x)) {
                        throw ConsistencyError("generators of orthogonal roots do not commute");
                    }
                }
            }
        }
    }
    return gens;
}

IntMatrix Ball::element(std::size_t i) const {
    return Eigen::Map<const RowMajor>(data(i), dim, dim);
}

std::size_t Ball::count_within(int r) const {
    if (r < 0) return 0;
    if (r >= static_cast<int>(level_end_.size())) return size();
    return level_end_[static_cast<std::size_t>(r)];
}

std::vector<std::size_t> Ball::level_sizes() const { return level_end_; }

std::optional<std::uint32_t> Ball::find(const std::int64_t* entries) const {
    if (slots_.empty()) return std::nullopt;
    const std::size_t mask = slots_.size() - 1;
    std::size_t h = hash_entries(entries, stride()) & mask;
    while (slots_[h] != empty_slot) {
        if (std::memcmp(data(slots_[h]), entries, stride() * sizeof(std::int64_t)) == 0) return slots_[h];
        h = (h + 1) & mask;
    }
    return std::nullopt;
}

std::optional<std::uint32_t> Ball::find(const IntMatrix& m) const {
    if (m.rows() != dim || m.cols() != dim) return std::nullopt;
    const auto rm = row_major(m);
    return find(rm.data());
}

void Ball::rebuild_index() {
    std::size_t cap = 16;
    while (cap < 4 * size() + 4) cap <<= 1;
    slots_.assign(cap, empty_slot);
    const std::size_t mask = cap - 1;
    for (std::size_t i = 0; i < size(); ++i) {
        std::size_t h = hash_entries(data(i), stride()) & mask;
        while (slots_[h] != empty_slot) h = (h + 1) & mask;
        slots_[h] = static_cast<std::uint32_t>(i);
    }
}

std::uint32_t Ball::insert_or_find(const std::int64_t* entries, bool& inserted) {
    if (2 * (size() + 1) > slots_.size()) rebuild_index();
    if (auto found = find(entries)) {
        inserted = false;
        return *found;
    }
    const std::size_t mask = slots_.size() - 1;
    std::size_t h = hash_entries(entries, stride()) & mask;
    while (slots_[h] != empty_slot) h = (h + 1) & mask;
    const auto idx = static_cast<std::uint32_t>(size());
    slots_[h] = idx;
    data_.insert(data_.end(), entries, entries + stride());
    word_length_.push_back(0);
    inserted = true;
    return idx;
}

Ball enumerate_ball(const std::vector<IntMatrix>& gens, int R, std::size_t cap) {
    if (R < 0) throw DomainError("ball radius must be non-negative");
    if (gens.empty()) throw DomainError("empty generating tuple");
    if (R > 255) throw DomainError("ball radius too large");
    Ball ball;
    ball.radius = R;
    ball.dim = static_cast<int>(gens.front().rows());
    const std::size_t st = ball.stride();
    std::vector<std::vector<std::int64_t>> g;
    for (const auto& m : gens) g.push_back(row_major(m));

    std::vector<std::uint32_t> parent{0};
    std::vector<std::uint16_t> via{0};
    bool inserted = false;
    const auto id = row_major(IntMatrix::Identity(ball.dim, ball.dim));
    ball.insert_or_find(id.data(), inserted);
    ball.level_end_.push_back(1);
    std::vector<std::int64_t> prod(st);
    for (int r = 1; r <= R; ++r) {
        const std::size_t lo = r == 1 ? 0 : ball.level_end_[static_cast<std::size_t>(r - 2)];
        const std::size_t hi = ball.level_end_[static_cast<std::size_t>(r - 1)];
        for (std::size_t p = lo; p < hi; ++p) {
            for (std::size_t s = 0; s < g.size(); ++s) {
                mul_raw(ball.data(p), g[s].data(), prod.data(), ball.dim);
                if (ball.find(prod.data())) continue;
                if (ball.size() >= cap) {
                    throw ResourceError("ball enumeration exceeded the cap of " + std::to_string(cap) +
                                        " elements while building level " + std::to_string(r) + " (levels 0.." +
                                        std::to_string(r - 1) + " complete)");
                }
                const std::uint32_t idx = ball.insert_or_find(prod.data(), inserted);
                ball.word_length_[idx] = static_cast<std::uint8_t>(r);
                parent.push_back(static_cast<std::uint32_t>(p));
                via.push_back(static_cast<std::uint16_t>(s));
            }
        }
        ball.level_end_.push_back(ball.size());
    }

    std::vector<std::size_t> inv_gen(g.size());
    for (std::size_t s = 0; s < g.size(); ++s) {
        bool found = false;
        for (std::size_t t = 0; t < g.size() && !found; ++t) {
            mul_raw(g[s].data(), g[t].data(), prod.data(), ball.dim);
            if (prod == id) {
                inv_gen[s] = t;
                found = true;
            }
        }
        if (!found) throw DomainError("generating tuple is not closed under inverses");
    }
    ball.inverse_.assign(ball.size(), 0);
    for (std::size_t k = 1; k < ball.size(); ++k) {
        mul_raw(g[inv_gen[via[k]]].data(), ball.data(ball.inverse_[parent[k]]), prod.data(), ball.dim);
        const auto j = ball.find(prod.data());
        if (!j) throw ConsistencyError("inverse of a ball element is missing from the ball");
        ball.inverse_[k] = *j;
    }
    return ball;
}

Ball enumerate_ball(const GeneratorSet& gens, int R, std::size_t cap) {
    return enumerate_ball(gens.elements(), R, cap);
}

ProductTable product_table(const Ball& ball_2r, int domain_radius) {
    if (2 * domain_radius > ball_2r.radius) {
        throw ResourceError("product table over radius " + std::to_string(domain_radius) + " needs a ball of radius " +
                            std::to_string(2 * domain_radius));
    }
    ProductTable t;
    t.domain_radius = domain_radius;
    t.n = ball_2r.count_within(domain_radius);
    t.table.resize(t.n * t.n);
    std::vector<std::int64_t> prod(ball_2r.stride());
    for (std::size_t i = 0; i < t.n; ++i) {
        for (std::size_t j = 0; j < t.n; ++j) {
            mul_raw(ball_2r.data(i), ball_2r.data(j), prod.data(), ball_2r.dim);
            const auto k = ball_2r.find(prod.data());
            if (!k) throw ConsistencyError("product of two ball elements is missing from the doubled ball");
            t.table[i * t.n + j] = *k;
        }
    }
    return t;
}

ProductTable product_table(const Ball& ball_r, const Ball& ball_2r) {
    if (ball_2r.radius != 2 * ball_r.radius) throw DomainError("product_table needs balls of radius r and 2r");
    if (ball_r.size() != ball_2r.count_within(ball_r.radius) || ball_r.dim != ball_2r.dim) {
        throw DomainError("balls come from different generating tuples");
    }
    for (std::size_t i = 0; i < ball_r.size(); ++i) {
        if (std::memcmp(ball_r.data(i), ball_2r.data(i), ball_r.stride() * sizeof(std::int64_t)) != 0) {
            throw DomainError("balls come from different generating tuples");
        }
    }
    return product_table(ball_2r, ball_r.radius);
}

std::uint64_t fingerprint(const std::vector<IntMatrix>& gens) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](std::uint64_t x) {
        for (int b = 0; b < 8; ++b) {
            h ^= (x >> (8 * b)) & 0xFF;
            h *= 1099511628211ULL;
        }
    };
    for (const char* c = code_version; *c; ++c) mix(static_cast<std::uint64_t>(*c));
    mix(gens.size());
    for (const auto& m : gens) {
        mix(static_cast<std::uint64_t>(m.rows()));
        for (std::int64_t x : row_major(m)) mix(static_cast<std::uint64_t>(x));
    }
    return h;
}

namespace {

constexpr char ball_magic[8] = {'K', 'Z', 'B', 'A', 'L', 'L', '0', '1'};
constexpr char table_magic[8] = {'K', 'Z', 'T', 'A', 'B', 'L', '0', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void put_vec(std::ofstream& out, const std::vector<T>& v) {
    put<std::uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}
template <typename T>
bool get(std::ifstream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}
template <typename T>
bool get_vec(std::ifstream& in, std::vector<T>& v) {
    std::uint64_t n = 0;
    if (!get(in, n)) return false;
    v.resize(n);
    return static_cast<bool>(in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T))));
}

}  // namespace

void save_ball(const Ball& ball, const std::filesystem::path& path, std::uint64_t fp) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp);
        out.write(ball_magic, 8);
        put(out, fp);
        put<std::int32_t>(out, ball.radius);
        put<std::int32_t>(out, ball.dim);
        std::vector<std::uint64_t> ends(ball.level_end_.begin(), ball.level_end_.end());
        put_vec(out, ends);
        put_vec(out, ball.data_);
        put_vec(out, ball.word_length_);
        put_vec(out, ball.inverse_);
        if (!out) throw IoError("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::optional<Ball> load_ball(const std::filesystem::path& path, std::uint64_t fp) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    std::uint64_t stored = 0;
    Ball ball;
    std::int32_t radius = 0, dim = 0;
    std::vector<std::uint64_t> ends;
    if (!in.read(magic, 8) || std::memcmp(magic, ball_magic, 8) != 0) return std::nullopt;
    if (!get(in, stored) || stored != fp) return std::nullopt;
    if (!get(in, radius) || !get(in, dim) || !get_vec(in, ends)) return std::nullopt;
    if (!get_vec(in, ball.data_) || !get_vec(in, ball.word_length_) || !get_vec(in, ball.inverse_)) return std::nullopt;
    ball.radius = radius;
    ball.dim = dim;
    ball.level_end_.assign(ends.begin(), ends.end());
    if (ball.data_.size() != ball.size() * ball.stride() || ball.inverse_.size() != ball.size()) return std::nullopt;
    ball.rebuild_index();
    return ball;
}

void save_table(const ProductTable& t, const std::filesystem::path& path, std::uint64_t fp) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp);
        out.write(table_magic, 8);
        put(out, fp);
        put<std::int32_t>(out, t.domain_radius);
        put<std::uint64_t>(out, t.n);
        put_vec(out, t.table);
        if (!out) throw IoError("cannot write " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::optional<ProductTable> load_table(const std::filesystem::path& path, std::uint64_t fp) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    std::uint64_t stored = 0, n = 0;
    std::int32_t r = 0;
    ProductTable t;
    if (!in.read(magic, 8) || std::memcmp(magic, table_magic, 8) != 0) return std::nullopt;
    if (!get(in, stored) || stored != fp) return std::nullopt;
    if (!get(in, r) || !get(in, n) || !get_vec(in, t.table)) return std::nullopt;
    t.domain_radius = r;
    t.n = n;
    if (t.table.size() != n * n) return std::nullopt;
    return t;
}

std::optional<std::filesystem::path> resolve_cache_dir(const std::string& explicit_dir) {
    if (!explicit_dir.empty()) return std::filesystem::path(explicit_dir);
    if (const char* env = std::getenv("KAZHDAN_CACHE_DIR"); env && *env) return std::filesystem::path(env);
    return std::nullopt;
}

CachedBall ball_with_table(const std::vector<IntMatrix>& gens, const std::string& key, int R,
                           const std::optional<std::filesystem::path>& cache_dir, std::size_t cap) {
    const std::uint64_t fp = fingerprint(gens);
    std::optional<std::filesystem::path> ball_path, table_path;
    if (cache_dir) {
        std::filesystem::create_directories(*cache_dir);
        std::ostringstream stem;
        stem << key << "_R" << R << "_" << std::hex << fp;
        ball_path = *cache_dir / (stem.str() + ".ball");
        table_path = *cache_dir / (stem.str() + ".table");
    }
    std::optional<Ball> ball;
    if (ball_path) ball = load_ball(*ball_path, fp);
    if (!ball) {
        ball = enumerate_ball(gens, 2 * R, cap);
        if (ball_path) save_ball(*ball, *ball_path, fp);
    }
    std::optional<ProductTable> table;
    if (table_path) table = load_table(*table_path, fp);
    if (!table || table->n != ball->count_within(R)) {
        table = product_table(*ball, R);
        if (table_path) save_table(*table, *table_path, fp);
    }
    return {std::move(*ball), std::move(*table)};
}

std::string serialize_matrix(const IntMatrix& m) {
    std::ostringstream os;
    os << m.rows() << ':';
    const auto rm = row_major(m);
    for (std::size_t i = 0; i < rm.size(); ++i) os << (i ? "," : "") << rm[i];
    return os.str();
}

IntMatrix parse_matrix(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw DomainError("malformed matrix serialization: " + s);
    const int d = std::stoi(s.substr(0, colon));
    std::vector<std::int64_t> entries;
    std::stringstream ss(s.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) entries.push_back(std::stoll(tok));
    if (static_cast<int>(entries.size()) != d * d) throw DomainError("malformed matrix serialization: " + s);
    return Eigen::Map<RowMajor>(entries.data(), d, d);
}

}  // namespace kazhdan
