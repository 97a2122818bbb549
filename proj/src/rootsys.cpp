#include "kazhdan/rootsys.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

namespace kazhdan {

namespace {

IntVector unit(int dim, int i, std::int64_t scale = 1) {
    IntVector v = IntVector::Zero(dim);
    v(i) = scale;
    return v;
}

bool lex_less(const IntVector& a, const IntVector& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

bool lex_positive(const IntVector& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (v(k) != 0) return v(k) > 0;
    }
    return false;
}

// Gram determinant of three vectors; zero iff they are linearly dependent.
std::int64_t gram3(const IntVector& a, const IntVector& b, const IntVector& c) {
    const std::int64_t aa = a.dot(a), ab = a.dot(b), ac = a.dot(c);
    const std::int64_t bb = b.dot(b), bc = b.dot(c), cc = c.dot(c);
    return aa * (bb * cc - bc * bc) - ab * (ab * cc - bc * ac) + ac * (ab * bc - bb * ac);
}

std::vector<IntVector> e8_scaled() {
    std::vector<IntVector> out;
    for (int i = 0; i < 8; ++i) {
        for (int j = i + 1; j < 8; ++j) {
            for (int si : {-2, 2}) {
                for (int sj : {-2, 2}) {
                    IntVector v = IntVector::Zero(8);
                    v(i) = si;
                    v(j) = sj;
                    out.push_back(v);
                }
            }
        }
    }
    for (int mask = 0; mask < 256; ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) % 2 != 0) continue;
        IntVector v(8);
        for (int k = 0; k < 8; ++k) v(k) = (mask >> k) & 1 ? -1 : 1;
        out.push_back(v);
    }
    return out;
}

std::vector<IntVector> raw_roots(char family, int n) {
    std::vector<IntVector> out;
    auto pm_pairs = [&](int dim, std::int64_t scale) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                for (int si : {-1, 1}) {
                    for (int sj : {-1, 1}) {
                        IntVector v = IntVector::Zero(dim);
                        v(i) = si * scale;
                        v(j) = sj * scale;
                        out.push_back(v);
                    }
                }
            }
        }
    };
    switch (family) {
        case 'A':
            for (int i = 0; i <= n; ++i) {
                for (int j = 0; j <= n; ++j) {
                    if (i != j) out.push_back(unit(n + 1, i) - unit(n + 1, j));
                }
            }
            break;
        case 'B':
            pm_pairs(n, 1);
            for (int i = 0; i < n; ++i) {
                out.push_back(unit(n, i));
                out.push_back(unit(n, i, -1));
            }
            break;
        case 'C':
            pm_pairs(n, 1);
            for (int i = 0; i < n; ++i) {
                out.push_back(unit(n, i, 2));
                out.push_back(unit(n, i, -2));
            }
            break;
        case 'D':
            pm_pairs(n, 1);
            break;
        case 'E': {
            const IntVector t1 = IntVector::Ones(8);
            IntVector t2 = IntVector::Zero(8);
            t2(0) = 2;
            t2(1) = 2;
            for (const IntVector& v : e8_scaled()) {
                if (n <= 7 && v.dot(t1) != 0) continue;
                if (n == 6 && v.dot(t2) != 0) continue;
                out.push_back(v);
            }
            break;
        }
        case 'F':
            for (int i = 0; i < 4; ++i) {
                out.push_back(unit(4, i, 2));
                out.push_back(unit(4, i, -2));
            }
            pm_pairs(4, 2);
            for (int mask = 0; mask < 16; ++mask) {
                IntVector v(4);
                for (int k = 0; k < 4; ++k) v(k) = (mask >> k) & 1 ? -1 : 1;
                out.push_back(v);
            }
            break;
        case 'G':
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    if (i == j) continue;
                    out.push_back(unit(3, i) - unit(3, j));
                    const int k = 3 - i - j;
                    const IntVector l = unit(3, i, 2) - unit(3, j) - unit(3, k);
                    out.push_back(l);
                    out.push_back(-l);
                }
            }
            // each long root appears once per ordering of the other two indices
            std::sort(out.begin(), out.end(), lex_less);
            out.erase(std::unique(out.begin(), out.end()), out.end());
            break;
        default:
            break;
    }
    return out;
}

void check_family_rank(char family, int rank) {
    const auto fail = [&](const std::string& why) {
        throw DomainError(std::string("invalid root system ") + family + std::to_string(rank) + ": " + why);
    };
    switch (family) {
        case 'A':
            if (rank < 1) fail("type A requires rank >= 1");
            break;
        case 'B':
            if (rank < 2) fail("type B requires rank >= 2");
            break;
        case 'C':
            if (rank < 2) fail("type C requires rank >= 2");
            break;
        case 'D':
            if (rank < 4) fail("type D requires rank >= 4");
            break;
        case 'E':
            if (rank < 6 || rank > 8) fail("type E requires rank in {6, 7, 8}");
            break;
        case 'F':
            if (rank != 4) fail("type F requires rank 4");
            break;
        case 'G':
            if (rank != 2) fail("type G requires rank 2");
            break;
        default:
            fail("family must be one of A, B, C, D, E, F, G");
    }
}

RootSystem assemble(char family, int rank, std::vector<IntVector> coords) {
    std::sort(coords.begin(), coords.end(), lex_less);
    RootSystem omega;
    omega.family = family;
    omega.rank = rank;
    omega.ambient_dim = coords.empty() ? 0 : static_cast<int>(coords.front().size());
    for (IntVector& v : coords) {
        Root r;
        r.squared_length = v.dot(v);
        r.coords = std::move(v);
        omega.roots.push_back(std::move(r));
    }
    return omega;
}

}  // namespace

int RootSystem::find(const IntVector& coords) const {
    auto it = std::lower_bound(roots.begin(), roots.end(), coords,
                               [](const Root& r, const IntVector& v) { return lex_less(r.coords, v); });
    if (it != roots.end() && it->coords == coords) return static_cast<int>(it - roots.begin());
    return -1;
}

int RootSystem::negative(int i) const { return find(-roots[static_cast<std::size_t>(i)].coords); }

bool RootSystem::is_long(int i) const {
    std::int64_t lo = roots.front().squared_length, hi = lo;
    for (const Root& r : roots) {
        lo = std::min(lo, r.squared_length);
        hi = std::max(hi, r.squared_length);
    }
    return hi != lo && roots[static_cast<std::size_t>(i)].squared_length == hi;
}

bool RootSystem::proportional(int i, int j) const {
    const IntVector& a = roots[static_cast<std::size_t>(i)].coords;
    const IntVector& b = roots[static_cast<std::size_t>(j)].coords;
    return a == b || a == -b;
}

std::int64_t RootSystem::inner(int i, int j) const {
    return roots[static_cast<std::size_t>(i)].coords.dot(roots[static_cast<std::size_t>(j)].coords);
}

std::string RootSystem::name() const { return std::string(1, family) + std::to_string(rank); }

const char* to_string(PlaneType t) {
    switch (t) {
        case PlaneType::A1xA1: return "A1xA1";
        case PlaneType::A1xC1: return "A1xC1";
        case PlaneType::A2: return "A2";
        case PlaneType::C2: return "C2";
        case PlaneType::G2: return "G2";
    }
    return "?";
}

PlaneType plane_type_from_string(const std::string& s) {
    for (PlaneType t : {PlaneType::A1xA1, PlaneType::A1xC1, PlaneType::A2, PlaneType::C2, PlaneType::G2}) {
        if (s == to_string(t)) return t;
    }
    throw DomainError("unknown plane type: " + s);
}

RootSystem build_root_system(char family, int rank) {
    check_family_rank(family, rank);
    return assemble(family, rank, raw_roots(family, rank));
}

namespace {

AdmissiblePlane span_plane(const RootSystem& omega, int a, int b) {
    AdmissiblePlane p;
    const int n = static_cast<int>(omega.size());
    const IntVector& va = omega.roots[static_cast<std::size_t>(a)].coords;
    const IntVector& vb = omega.roots[static_cast<std::size_t>(b)].coords;
    for (int c = 0; c < n; ++c) {
        if (gram3(va, vb, omega.roots[static_cast<std::size_t>(c)].coords) == 0) p.member_roots.push_back(c);
    }
    p.basis_pair = {a, b};
    const auto& m = p.member_roots;
    std::set<std::int64_t> lengths;
    for (int x : m) lengths.insert(omega.roots[static_cast<std::size_t>(x)].squared_length);
    switch (m.size()) {
        case 4:
            p.plane_type = lengths.size() == 1 ? PlaneType::A1xA1 : PlaneType::A1xC1;
            break;
        case 6:
            if (lengths.size() != 1) throw ConsistencyError("six-root plane with two root lengths");
            p.plane_type = PlaneType::A2;
            break;
        case 8: p.plane_type = PlaneType::C2; break;
        case 12: p.plane_type = PlaneType::G2; break;
        default:
            throw ConsistencyError("plane with " + std::to_string(m.size()) + " roots");
    }
    return p;
}

}  // namespace

std::vector<AdmissiblePlane> admissible_planes(const RootSystem& omega) {
    const int n = static_cast<int>(omega.size());
    std::vector<char> assigned(static_cast<std::size_t>(n) * n, 0);
    std::vector<AdmissiblePlane> planes;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (omega.proportional(a, b) || assigned[static_cast<std::size_t>(a) * n + b]) continue;
            AdmissiblePlane p = span_plane(omega, a, b);
            for (int x : p.member_roots) {
                for (int y : p.member_roots) assigned[static_cast<std::size_t>(x) * n + y] = 1;
            }
            planes.push_back(std::move(p));
        }
    }
    std::sort(planes.begin(), planes.end(),
              [](const AdmissiblePlane& x, const AdmissiblePlane& y) { return x.member_roots < y.member_roots; });
    return planes;
}

std::vector<AdmissiblePlane> planes_through(const RootSystem& omega, int alpha) {
    const int n = static_cast<int>(omega.size());
    if (alpha < 0 || alpha >= n) throw DomainError("root index out of range");
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<AdmissiblePlane> planes;
    for (int b = 0; b < n; ++b) {
        if (omega.proportional(alpha, b) || seen[static_cast<std::size_t>(b)]) continue;
        AdmissiblePlane p = span_plane(omega, alpha, b);
        for (int x : p.member_roots) seen[static_cast<std::size_t>(x)] = 1;
        planes.push_back(std::move(p));
    }
    std::sort(planes.begin(), planes.end(),
              [](const AdmissiblePlane& x, const AdmissiblePlane& y) { return x.member_roots < y.member_roots; });
    return planes;
}

std::vector<int> pair_plane_table(const RootSystem& omega, const std::vector<AdmissiblePlane>& planes) {
    const std::size_t n = omega.size();
    std::vector<int> table(n * n, -1);
    for (std::size_t p = 0; p < planes.size(); ++p) {
        const auto& m = planes[p].member_roots;
        for (int x : m) {
            for (int y : m) {
                if (!omega.proportional(x, y)) table[static_cast<std::size_t>(x) * n + static_cast<std::size_t>(y)] = static_cast<int>(p);
            }
        }
    }
    return table;
}

std::map<PlaneType, int> plane_incidence(const RootSystem& omega, const std::vector<AdmissiblePlane>& planes,
                                         int alpha) {
    if (alpha < 0 || alpha >= static_cast<int>(omega.size())) throw DomainError("root index out of range");
    std::map<PlaneType, int> out;
    for (PlaneType t : {PlaneType::A1xA1, PlaneType::A1xC1, PlaneType::A2, PlaneType::C2, PlaneType::G2}) out[t] = 0;
    for (const auto& p : planes) {
        if (std::binary_search(p.member_roots.begin(), p.member_roots.end(), alpha)) ++out[p.plane_type];
    }
    return out;
}

std::map<PlaneType, int> plane_incidence(const RootSystem& omega, const Root& alpha) {
    const int i = omega.find(alpha.coords);
    if (i < 0) throw DomainError("root is not in " + omega.name());
    return plane_incidence(omega, planes_through(omega, i), i);
}

int gamma(const RootSystem& omega) {
    const auto planes = admissible_planes(omega);
    std::vector<int> count(omega.size(), 0);
    for (const auto& p : planes) {
        if (!irreducible(p.plane_type)) continue;
        for (int x : p.member_roots) ++count[static_cast<std::size_t>(x)];
    }
    return count.empty() ? 0 : *std::min_element(count.begin(), count.end());
}

int gamma_by_spans(const RootSystem& omega) {
    const int n = static_cast<int>(omega.size());
    int best = -1;
    for (int a = 0; a < n; ++a) {
        std::set<std::vector<int>> spans;
        for (int b = 0; b < n; ++b) {
            if (omega.proportional(a, b) || omega.inner(a, b) == 0) continue;
            std::vector<int> span;
            for (int c = 0; c < n; ++c) {
                if (gram3(omega.roots[static_cast<std::size_t>(a)].coords, omega.roots[static_cast<std::size_t>(b)].coords,
                          omega.roots[static_cast<std::size_t>(c)].coords) == 0) {
                    span.push_back(c);
                }
            }
            spans.insert(std::move(span));
        }
        const int k = static_cast<int>(spans.size());
        best = best < 0 ? k : std::min(best, k);
    }
    return std::max(best, 0);
}

std::vector<int> simple_roots(const RootSystem& omega) {
    const int n = static_cast<int>(omega.size());
    std::vector<int> positive;
    for (int i = 0; i < n; ++i) {
        if (lex_positive(omega.roots[static_cast<std::size_t>(i)].coords)) positive.push_back(i);
    }
    std::vector<int> simple;
    for (int a : positive) {
        bool decomposable = false;
        for (int b : positive) {
            const IntVector rest = omega.roots[static_cast<std::size_t>(a)].coords - omega.roots[static_cast<std::size_t>(b)].coords;
            const int c = omega.find(rest);
            if (c >= 0 && lex_positive(rest)) {
                decomposable = true;
                break;
            }
        }
        if (!decomposable) simple.push_back(a);
    }
    return simple;
}

namespace {

struct PermHash {
    std::size_t operator()(const std::vector<int>& p) const {
        std::size_t h = 1469598103934665603ULL;
        for (int x : p) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ULL;
        return h;
    }
};

WeylElement reflection(const RootSystem& omega, int a) {
    const IntVector& v = omega.roots[static_cast<std::size_t>(a)].coords;
    const std::int64_t nn = omega.roots[static_cast<std::size_t>(a)].squared_length;
    WeylElement w;
    w.denominator = nn;
    w.matrix = nn * IntMatrix::Identity(omega.ambient_dim, omega.ambient_dim) - 2 * v * v.transpose();
    w.root_perm.resize(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) {
        const IntVector& u = omega.roots[i].coords;
        const std::int64_t c = 2 * v.dot(u);
        if (c % nn != 0) throw ConsistencyError("non-integral Cartan pairing in " + omega.name());
        const int j = omega.find(u - (c / nn) * v);
        if (j < 0) throw ConsistencyError("reflection does not preserve " + omega.name());
        w.root_perm[i] = j;
    }
    return w;
}

WeylElement compose(const WeylElement& w, const WeylElement& s) {
    WeylElement out;
    out.matrix = w.matrix * s.matrix;
    out.denominator = w.denominator * s.denominator;
    std::int64_t g = out.denominator;
    for (Eigen::Index k = 0; k < out.matrix.size(); ++k) g = std::gcd(g, out.matrix.data()[k]);
    if (g > 1) {
        out.matrix /= g;
        out.denominator /= g;
    }
    out.root_perm.resize(s.root_perm.size());
    for (std::size_t i = 0; i < s.root_perm.size(); ++i) {
        out.root_perm[i] = w.root_perm[static_cast<std::size_t>(s.root_perm[i])];
    }
    return out;
}

}  // namespace

std::vector<WeylElement> weyl_group(const RootSystem& omega, std::size_t cap) {
    std::vector<WeylElement> gens;
    for (int a : simple_roots(omega)) gens.push_back(reflection(omega, a));
    WeylElement id;
    id.matrix = IntMatrix::Identity(omega.ambient_dim, omega.ambient_dim);
    id.root_perm.resize(omega.size());
    std::iota(id.root_perm.begin(), id.root_perm.end(), 0);
    std::vector<WeylElement> elems{id};
    std::unordered_map<std::vector<int>, std::size_t, PermHash> seen{{id.root_perm, 0}};
    for (std::size_t k = 0; k < elems.size(); ++k) {
        for (const auto& s : gens) {
            WeylElement w = compose(elems[k], s);
            if (seen.count(w.root_perm)) continue;
            if (elems.size() >= cap) {
                throw ResourceError("Weyl group of " + omega.name() + " exceeds the enumeration cap of " +
                                    std::to_string(cap) + " elements; use orbit-based counting instead");
            }
            seen.emplace(w.root_perm, elems.size());
            elems.push_back(std::move(w));
        }
    }
    return elems;
}

RootSystem dual_root_system(const RootSystem& omega) {
    std::int64_t hi = 0;
    for (const Root& r : omega.roots) hi = std::max(hi, r.squared_length);
    std::vector<IntVector> coords;
    std::int64_t g = 0;
    for (const Root& r : omega.roots) {
        IntVector v = r.coords * (hi / r.squared_length);
        for (Eigen::Index k = 0; k < v.size(); ++k) g = std::gcd(g, v(k));
        coords.push_back(std::move(v));
    }
    for (IntVector& v : coords) v /= g;
    char family = omega.family;
    if (family == 'B') family = 'C';
    else if (family == 'C') family = 'B';
    return assemble(family, omega.rank, std::move(coords));
}

nlohmann::json to_json(const RootSystem& omega) {
    nlohmann::json roots = nlohmann::json::array();
    for (const Root& r : omega.roots) {
        roots.push_back(std::vector<std::int64_t>(r.coords.data(), r.coords.data() + r.coords.size()));
    }
    return {{"family", std::string(1, omega.family)}, {"rank", omega.rank}, {"roots", roots}};
}

}  // namespace kazhdan
