#include "kazhdan/replicate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "kazhdan/elements.hpp"

namespace kazhdan {

Rational rational_from_decimal(const std::string& s) {
    static const std::regex dec(R"(([+-]?)([0-9]+)(?:\.([0-9]+))?)");
    std::smatch m;
    if (std::regex_match(s, m, dec)) {
        const std::string frac = m[3].str();
        mpz_class num(m[2].str() + frac, 10);
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
        Rational q(num, den);
        q.canonicalize();
        return m[1].str() == "-" ? Rational(-q) : q;
    }
    return rational_from_string(s);
}

namespace {

Rational factorial(int k) {
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(k));
    return Rational(f);
}

Rational pow2(int e) {
    mpz_class p = 1;
    p <<= e;
    return Rational(p);
}

std::string str(const Rational& q) { return q.get_str(); }

std::vector<int> length_representatives(const RootSystem& omega) {
    std::map<std::int64_t, int> first;
    for (int i = 0; i < static_cast<int>(omega.size()); ++i) first.emplace(omega.roots[static_cast<std::size_t>(i)].squared_length, i);
    std::vector<int> out;
    for (const auto& [len, i] : first) out.push_back(i);
    return out;
}

std::string coords(const Root& r) {
    std::string s = "(";
    for (Eigen::Index i = 0; i < r.coords.size(); ++i) s += (i ? "," : "") + std::to_string(r.coords(i));
    return s + ")";
}

std::int64_t s_size(const RootSystem& omega) { return 2 * static_cast<std::int64_t>(omega.size()); }

const nlohmann::json& at(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw IoError(std::string("constants file: missing key '") + key + "'");
    return j.at(key);
}

Rational poly(const std::vector<Rational>& c, int n) {
    Rational v = 0, p = 1;
    for (const auto& x : c) {
        v += x * p;
        p *= n;
    }
    return v;
}

}  // namespace

bool PrintedEntry::matches(int table_, char family, int n_, int R_) const {
    if (table != table_ || R != R_ || types.find(family) == std::string::npos) return false;
    return n ? n == n_ : n_ >= min_n;
}

double PrintedEntry::kappa(int n_) const {
    const Rational lam = poly({l0, l1}, n_);
    const Rational s = poly({s0, s1, s2}, n_);
    return std::sqrt(Rational(2 * lam / s).get_d());
}

std::optional<PlaneConstant> Constants::plane(PlaneType t, int R) const {
    for (const auto& p : planes)
        if (p.plane_type == t && p.R == R) return p;
    return std::nullopt;
}

std::optional<GroupConstant> Constants::group(const std::string& name, const std::string& target, int R) const {
    for (const auto& g : groups)
        if (g.group == name && g.target == target && g.R == R) return g;
    return std::nullopt;
}

std::filesystem::path default_constants_path() { return std::filesystem::path(KAZHDAN_DATA_DIR) / "constants.json"; }

Constants load_constants(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read constants file " + path.string());
    Constants c;
    try {
        const auto j = nlohmann::json::parse(in);
        if (at(j, "format") != "kazhdan-constants/1") throw IoError("constants file: unknown format");
        c.version = at(j, "version").get<std::string>();
        for (const auto& p : at(j, "plane_constants")) {
            c.planes.push_back({plane_type_from_string(at(p, "plane_type").get<std::string>()),
                                rational_from_decimal(at(p, "lambda").get<std::string>()), at(p, "R").get<int>(),
                                "published"});
        }
        for (const auto& g : at(j, "group_constants")) {
            c.groups.push_back({at(g, "group").get<std::string>(), at(g, "target").get<std::string>(),
                                rational_from_decimal(at(g, "lambda").get<std::string>()), at(g, "R").get<int>(),
                                "published"});
        }
        for (const auto& f : at(j, "cited_families")) {
            c.cited.push_back({at(f, "family").get<std::string>().at(0), at(f, "min_rank").get<int>(), at(f, "R").get<int>(),
                               rational_from_decimal(at(f, "lambda_per_gamma").get<std::string>()), "published"});
        }
        for (const auto& e : at(at(j, "printed"), "entries")) {
            PrintedEntry p;
            p.table = at(e, "table").get<int>();
            p.types = at(e, "types").get<std::string>();
            p.n = at(e, "n").get<int>();
            p.min_n = e.value("min_n", 0);
            p.R = at(e, "R").get<int>();
            std::vector<Rational> l, s;
            for (const auto& x : at(e, "lambda")) l.push_back(rational_from_decimal(x.get<std::string>()));
            for (const auto& x : at(e, "S")) s.push_back(rational_from_decimal(x.get<std::string>()));
            l.resize(2, 0);
            s.resize(3, 0);
            p.l0 = l[0], p.l1 = l[1], p.s0 = s[0], p.s1 = s[1], p.s2 = s[2];
            c.printed.push_back(p);
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed constants file " + path.string() + ": " + e.what());
    } catch (const DomainError& e) {
        throw IoError("malformed constants file " + path.string() + ": " + e.what());
    }
    return c;
}

bool apply_certificate(Constants& c, const Certificate& cert, const std::string& hash, bool force) {
    if (cert.family == '?') return false;
    const std::string source = "certificate:" + hash;
    const Rational& lam = cert.lambda_certified;
    auto better = [&](const Rational& old) { return force || lam < old; };
    if (cert.target_name == "adj" && cert.rank == 2 && (cert.family == 'A' || cert.family == 'C')) {
        const PlaneType t = cert.family == 'A' ? PlaneType::A2 : PlaneType::C2;
        for (auto& p : c.planes) {
            if (p.plane_type == t && p.R == cert.R) {
                if (!better(p.lambda)) return false;
                p = {t, lam, cert.R, source};
                return true;
            }
        }
        c.planes.push_back({t, lam, cert.R, source});
        return true;
    }
    for (auto& g : c.groups) {
        if (g.group == cert.group && g.target == cert.target_name && g.R == cert.R) {
            if (!better(g.lambda)) return false;
            g = {cert.group, cert.target_name, lam, cert.R, source};
            return true;
        }
    }
    c.groups.push_back({cert.group, cert.target_name, lam, cert.R, source});
    return true;
}

std::vector<std::string> apply_certificates(Constants& c, const std::filesystem::path& dir, bool force) {
    std::vector<std::string> applied;
    if (!std::filesystem::is_directory(dir)) return applied;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("cert-", 0) == 0 && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const Certificate cert = read_certificate(f, dir);
        if (!verify(cert).ok) continue;
        const std::string h = certificate_hash(f);
        if (apply_certificate(c, cert, h, force)) applied.push_back(h);
    }
    return applied;
}

const char* to_string(Method m) {
    switch (m) {
        case Method::main_thm: return "main_thm";
        case Method::corollary: return "corollary";
        case Method::levels: return "levels";
        case Method::direct: return "direct";
        case Method::cited: return "cited";
    }
    return "?";
}

const char* to_string(Annotation a) {
    switch (a) {
        case Annotation::reproduced_certified: return "reproduced-certified";
        case Annotation::paper_constant: return "paper-constant";
        case Annotation::formula: return "formula";
    }
    return "?";
}

Annotation FamilyBound::annotation() const {
    for (const auto& s : sources)
        if (s.find("certificate:") != std::string::npos) return Annotation::reproduced_certified;
    if (method == Method::direct || method == Method::cited) return Annotation::paper_constant;
    return Annotation::formula;
}

int gamma_fast(const RootSystem& omega) {
    int best = -1;
    for (int a : length_representatives(omega)) {
        int k = 0;
        for (const auto& p : planes_through(omega, a)) k += irreducible(p.plane_type);
        best = best < 0 ? k : std::min(best, k);
    }
    return std::max(best, 0);
}

FamilyBound assemble_main(const RootSystem& omega, const std::map<PlaneType, PlaneConstant>& constants) {
    FamilyBound b;
    b.family = omega.family;
    b.n = omega.rank;
    b.method = Method::main_thm;
    b.s_size = s_size(omega);
    std::optional<Rational> best;
    std::set<PlaneType> used;
    nlohmann::json classes = nlohmann::json::array();
    for (int a : length_representatives(omega)) {
        const auto planes = planes_through(omega, a);
        const auto inc = plane_incidence(omega, planes, a);
        Rational sum = 0;
        nlohmann::json terms = nlohmann::json::object();
        for (const auto& [t, count] : inc) {
            if (!irreducible(t) || count == 0) continue;
            terms[to_string(t)] = count;
            const auto it = constants.find(t);
            if (it == constants.end() || it->second.lambda <= 0) continue;
            sum += count * it->second.lambda;
            used.insert(t);
        }
        const Root& r = omega.roots[static_cast<std::size_t>(a)];
        if (sum <= 0) {
            throw DomainError("hypothesis violated: root " + coords(r) + " of " + omega.name() +
                              " lies in no plane with a positive constant");
        }
        classes.push_back({{"root", coords(r)}, {"squared_length", r.squared_length}, {"irreducible_planes", terms},
                           {"lambda_alpha", str(sum)}});
        if (!best || sum < *best) best = sum;
    }
    if (!best) throw DomainError(omega.name() + " has no roots");
    for (PlaneType t : used) {
        const auto& pc = constants.at(t);
        b.R = std::max(b.R, pc.R);
        b.sources.push_back(std::string(to_string(t)) + " adj R=" + std::to_string(pc.R) + " " + pc.source);
    }
    b.lambda = *best;
    b.kappa_lb = kappa_lower_bound(b.lambda, static_cast<int>(b.s_size));
    b.trace = {{"rule", "lambda = min over roots a of sum over irreducible planes W containing a of lambda_type(W)"},
               {"root_classes", classes},
               {"lambda", str(b.lambda)}};
    return b;
}

FamilyBound assemble_corollary(const RootSystem& omega, const Rational& lambda_min, int R, std::vector<std::string> sources) {
    if (omega.rank < 2) throw DomainError("corollary needs an irreducible root system of rank at least 2");
    if (lambda_min < 0) throw DomainError("corollary needs lambda_min >= 0");
    FamilyBound b;
    b.family = omega.family;
    b.n = omega.rank;
    b.R = R;
    b.method = Method::corollary;
    b.s_size = s_size(omega);
    const int g = gamma_fast(omega);
    b.lambda = g * lambda_min;
    b.kappa_lb = kappa_lower_bound(b.lambda, static_cast<int>(b.s_size));
    b.sources = std::move(sources);
    b.trace = {{"rule", "lambda = gamma(Omega) * lambda_min"}, {"gamma", g}, {"lambda_min", str(lambda_min)},
               {"lambda", str(b.lambda)}};
    return b;
}

StarReplay replay_star(int n) {
    if (n < 3) throw DomainError("inequality (*) needs n >= 3");
    StarReplay s;
    s.n = n;
    // Lemma: Σ_w (Lev_i^m)^w = 2ⁿ m! (n−i)!/(m−i)! Lev_iⁿ, here m = 3.
    auto lemma = [&](int i) -> Rational { return pow2(n) * factorial(3) * factorial(n - i) / factorial(3 - i); };
    s.divisor = 3 * pow2(n) * factorial(n - 3);
    s.lev2 = lemma(2) / s.divisor;
    s.lev3 = lemma(3) / s.divisor;
    // Δ_{V₃} = Σ over the roots of C₃; the orbit sum of one root α is |W|/|Wα| Σ_{β∈Wα} Δ_β.
    const RootSystem c3 = build_root_system('C', 3);
    const RootSystem cn = build_root_system('C', n);
    auto count = [](const RootSystem& om, bool want_long) {
        int k = 0;
        for (int i = 0; i < static_cast<int>(om.size()); ++i) k += om.is_long(i) == want_long;
        return k;
    };
    const Rational w = pow2(n) * factorial(n);
    s.delta_long = count(c3, true) * w / count(cn, true) / s.divisor;
    s.delta_short = count(c3, false) * w / count(cn, false) / s.divisor;
    s.delta = std::min(s.delta_long, s.delta_short);
    s.matches_printed = s.lev2 == 2 * (n - 2) && s.lev3 == 2 && s.delta_long == (n - 2) * (n - 1) &&
                        s.delta_short == 2 * (n - 2) && s.delta == 2 * (n - 2);
    return s;
}

FamilyBound assemble_levels(int n, const std::optional<GroupConstant>& c3) {
    if (n < 3) throw DomainError("the levels bound needs n >= 3");
    if (!c3 || c3->group != "C3" || c3->target != "levels23") {
        throw DomainError("missing C3 certificate for Lev2 + Lev3 - lambda Delta");
    }
    const StarReplay s = replay_star(n);
    if (!s.matches_printed) throw ConsistencyError("inequality (*) coefficients differ from the closed forms");
    FamilyBound b;
    b.family = 'C';
    b.n = n;
    b.R = c3->R;
    b.method = Method::levels;
    b.lambda = c3->lambda;
    b.s_size = 4 * static_cast<std::int64_t>(n) * n;
    b.kappa_lb = kappa_lower_bound(b.lambda, static_cast<int>(b.s_size));
    b.sources = {"C3 levels23 R=" + std::to_string(c3->R) + " " + c3->source};
    const std::string L = str(b.lambda);
    b.trace = {
        {"steps",
         {
             "C3: Lev2^3 + Lev3^3 - " + L + " Delta_V3 >=_" + std::to_string(b.R) + " 0",
             "sum over W(C" + std::to_string(n) + ") and divide by 3*2^n*(n-3)! = " + str(s.divisor),
             "Weyl-sum constants: Lev2 -> " + str(s.lev2) + " = 2(n-2), Lev3 -> " + str(s.lev3) +
                 " = 2, long Delta_a -> " + str(s.delta_long) + " = (n-2)(n-1), short Delta_a -> " + str(s.delta_short) +
                 " = 2(n-2)",
             "every Delta_a >=_1 0, so lower both to " + str(s.delta) + ": (*) " + str(s.lev2) + " Lev2 + " +
                 str(s.lev3) + " Lev3 - " + str(s.delta * b.lambda) + " Delta >=_" + std::to_string(b.R) + " 0",
             "Lev3 is a sum of Hermitian squares (orthogonal root subgroups commute; Adj_A2 is SOS), so adding "
             "a multiple of it and dividing by 2(n-2) gives Lev2 + Lev3 - lambda Delta >=_R 0",
             "Lev1 (long line squares) and Lev4 (commuting orthogonal pairs) are sums of Hermitian squares, hence "
             "Delta^2 - lambda Delta = sum_i Lev_i - lambda Delta >=_R 0",
         }},
        {"weyl_sum_constants",
         {{"divisor", str(s.divisor)},
          {"lev2", str(s.lev2)},
          {"lev3", str(s.lev3)},
          {"delta_long", str(s.delta_long)},
          {"delta_short", str(s.delta_short)}}},
        {"matches_printed", s.matches_printed},
        {"lambda", L}};
    return b;
}

bool rearrangement_identity(const RootSystem& omega, const std::map<PlaneType, Rational>& lambda) {
    const std::size_t n = omega.size();
    auto lam = [&](PlaneType t) {
        const auto it = lambda.find(t);
        return it == lambda.end() ? Rational(0) : it->second;
    };
    std::vector<Rational> lhs(n, 0), rhs(n, 0);
    for (const auto& p : admissible_planes(omega))
        for (int a : p.member_roots) lhs[static_cast<std::size_t>(a)] += lam(p.plane_type);
    for (int a = 0; a < static_cast<int>(n); ++a)
        for (const auto& [t, count] : plane_incidence(omega, planes_through(omega, a), a)) rhs[static_cast<std::size_t>(a)] += count * lam(t);
    return lhs == rhs;
}

namespace {

FamilyBound as_direct(const GroupConstant& g, const RootSystem& omega) {
    FamilyBound b;
    b.family = omega.family;
    b.n = omega.rank;
    b.R = g.R;
    b.method = Method::direct;
    b.lambda = g.lambda;
    b.s_size = s_size(omega);
    b.kappa_lb = kappa_lower_bound(b.lambda, static_cast<int>(b.s_size));
    b.sources = {g.group + " " + g.target + " R=" + std::to_string(g.R) + " " + g.source};
    b.trace = {{"rule", "direct computation on the group itself"}, {"lambda", str(b.lambda)}};
    return b;
}

// Bₙ: the incidence counts are taken on the dual system, where long and short swap.
FamilyBound dualize(FamilyBound b, const RootSystem& b_system) {
    b.family = b_system.family;
    b.s_size = s_size(b_system);
    b.kappa_lb = kappa_lower_bound(b.lambda, static_cast<int>(b.s_size));
    b.trace["dualized_from"] = "C" + std::to_string(b.n);
    return b;
}

bool wanted(const TableOptions& opt, char family) {
    if (!opt.only) return true;
    const char f = *opt.only;
    if (f == 'B' || f == 'C') return family == 'B' || family == 'C';
    return f == family;
}

}  // namespace

std::vector<FamilyBound> table_bounds(const Constants& c, const TableOptions& opt) {
    std::vector<FamilyBound> out;
    auto push = [&](FamilyBound b, int table, const std::string& row) {
        b.table = table;
        b.row = row;
        out.push_back(std::move(b));
    };
    auto direct = [&](char family, int n, int R, const std::string& row) {
        const std::string name = std::string(1, family) + std::to_string(n);
        if (const auto g = c.group(name, "delta_sq", R)) push(as_direct(*g, build_root_system(family, n)), 1, row);
    };
    auto corollary = [&](char family, int n, int R, int table, const std::string& row) {
        const auto a2 = c.plane(PlaneType::A2, R);
        if (!a2) return;
        push(assemble_corollary(build_root_system(family, n), a2->lambda, R,
                                {"A2 adj R=" + std::to_string(R) + " " + a2->source}),
             table, row);
    };

    // Table 1
    if (wanted(opt, 'A')) {
        direct('A', 2, 2, "A_2");
        direct('A', 2, 3, "A_2");
        direct('A', 3, 2, "A_3");
        direct('A', 4, 2, "A_4");
        for (const auto& f : c.cited) {
            if (f.family != 'A') continue;
            for (int n = std::max(f.min_rank, 2); n <= opt.n_max; ++n) {
                const auto omega = build_root_system('A', n);
                FamilyBound b = assemble_corollary(omega, f.slope, f.R, {"A_n family R=" + std::to_string(f.R) + " " + f.source});
                b.method = Method::cited;
                push(std::move(b), 1, "A_n");
            }
        }
    }
    if (wanted(opt, 'D'))
        for (int n = 4; n <= opt.n_max; ++n) corollary('D', n, 3, 1, "D_n");
    if (wanted(opt, 'E'))
        for (int n : {6, 7, 8}) corollary('E', n, 3, 1, "E_" + std::to_string(n));
    if (wanted(opt, 'C')) {
        direct('C', 2, 2, "B_2=C_2");
        direct('C', 2, 3, "B_2=C_2");
        const auto c3 = c.group("C3", "levels23", 2);
        std::map<PlaneType, PlaneConstant> r3;
        if (const auto p = c.plane(PlaneType::A2, 3)) r3[PlaneType::A2] = *p;
        if (const auto p = c.plane(PlaneType::C2, 3)) r3[PlaneType::C2] = *p;
        for (int n = 3; n <= opt.n_max; ++n) {
            const auto bn = build_root_system('B', n);
            if (c3) {
                const FamilyBound lv = assemble_levels(n, c3);
                push(lv, 1, "B_n, C_n");
                push(dualize(lv, bn), 1, "B_n, C_n");
            }
            if (r3.count(PlaneType::C2)) {
                push(assemble_main(build_root_system('C', n), r3), 1, "B_n, C_n");
                push(dualize(assemble_main(dual_root_system(bn), r3), bn), 1, "B_n, C_n");
            }
        }
    }
    if (wanted(opt, 'F')) {
        std::map<PlaneType, PlaneConstant> r3;
        if (const auto p = c.plane(PlaneType::A2, 3)) r3[PlaneType::A2] = *p;
        if (const auto p = c.plane(PlaneType::C2, 3)) r3[PlaneType::C2] = *p;
        if (r3.size() == 2) push(assemble_main(build_root_system('F', 4), r3), 1, "F_4");
    }
    if (wanted(opt, 'G')) direct('G', 2, 2, "G_2");

    // Table 2
    for (int R : {2, 3}) {
        if (wanted(opt, 'A'))
            for (int n = 2; n <= opt.n_max; ++n) corollary('A', n, R, 2, "A_n");
        if (wanted(opt, 'D'))
            for (int n = 4; n <= opt.n_max; ++n) corollary('D', n, R, 2, "D_n");
    }
    if (wanted(opt, 'E'))
        for (int n : {6, 7, 8}) corollary('E', n, 3, 2, "E_" + std::to_string(n));
    return out;
}

namespace {

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t w) {
    // Column widths count code points, not bytes.
    std::size_t len = 0;
    for (unsigned char ch : s) len += (ch & 0xC0) != 0x80;
    return s + std::string(w > len ? w - len : 1, ' ');
}

}  // namespace

Report render_tables(const std::vector<FamilyBound>& bounds, const Constants& c) {
    Report rep;
    nlohmann::json rows = nlohmann::json::array();
    std::ostringstream txt;
    int mismatches = 0;
    for (int table : {1, 2}) {
        txt << (table == 1 ? "Table 1: lower bounds for Kazhdan constants\n"
                           : "\nTable 2: lower bounds from the simply laced corollary\n");
        txt << pad("row", 10) << pad("type", 5) << pad("R", 3) << pad("lambda", 14) << pad("|S|", 7) << pad("kappa >=", 11)
            << pad("printed", 11) << pad("method", 11) << "annotation\n";
        for (const auto& b : bounds) {
            if (b.table != table) continue;
            std::optional<double> printed;
            for (const auto& e : c.printed)
                if (e.matches(b.table, b.family, b.n, b.R)) printed = e.kappa(b.n);
            const bool match = printed && std::abs(*printed - b.kappa_lb) <= 1e-6;
            if (printed && !match) ++mismatches;
            nlohmann::json row = {{"table", b.table},
                                  {"row", b.row},
                                  {"type", std::string(1, b.family)},
                                  {"n", b.n},
                                  {"R", b.R},
                                  {"lambda", str(b.lambda)},
                                  {"lambda_decimal", b.lambda.get_d()},
                                  {"S_size", b.s_size},
                                  {"kappa_lb", b.kappa_lb},
                                  {"method", to_string(b.method)},
                                  {"annotation", to_string(b.annotation())},
                                  {"sources", b.sources},
                                  {"trace", b.trace}};
            if (printed) {
                row["printed_kappa"] = *printed;
                row["matches_printed"] = match;
            }
            rows.push_back(row);
            txt << pad(b.row, 10) << pad(std::string(1, b.family) + std::to_string(b.n), 5)
                << pad(std::to_string(b.R), 3) << pad(fixed(b.lambda.get_d()), 14) << pad(std::to_string(b.s_size), 7)
                << pad(fixed(b.kappa_lb), 11) << pad(printed ? fixed(*printed) + (match ? "" : "*") : "-", 11)
                << pad(to_string(b.method), 11) << to_string(b.annotation()) << "\n";
        }
    }

    // Cₙ: the radius-2 levels bound against the radius-3 bound.
    nlohmann::json cmp = nlohmann::json::array();
    int last_r2 = 0;
    for (const auto& l : bounds) {
        if (l.table != 1 || l.family != 'C' || l.method != Method::levels) continue;
        for (const auto& m : bounds) {
            if (m.table != 1 || m.family != 'C' || m.method != Method::main_thm || m.n != l.n) continue;
            // same |S|, so compare λ exactly
            const bool r2 = l.lambda > m.lambda;
            if (r2) last_r2 = std::max(last_r2, l.n);
            cmp.push_back({{"n", l.n}, {"levels_kappa", l.kappa_lb}, {"main_thm_kappa", m.kappa_lb},
                           {"better", r2 ? "levels" : "main_thm"}});
        }
    }
    txt << "\nC_n: levels (R=2) vs main theorem (R=3)\n";
    for (const auto& e : cmp) {
        txt << "  n=" << pad(std::to_string(e["n"].get<int>()), 4) << fixed(e["levels_kappa"].get<double>()) << " vs "
            << fixed(e["main_thm_kappa"].get<double>()) << "  better: " << e["better"].get<std::string>() << "\n";
    }
    if (!cmp.empty()) txt << "  levels bound is larger up to n = " << last_r2 << "\n";
    txt << "\n* differs from the printed entry by more than 1e-6\n";
    txt << "Upper bound for comparison: kappa(SL_n(Z), S_n) <= sqrt(2/n).\n";

    rep.json = {{"constants_version", c.version},
                {"rows", rows},
                {"printed_mismatches", mismatches},
                {"c_n_comparison", {{"rows", cmp}, {"levels_better_up_to", last_r2}}},
                {"footnotes", {"upper bound for SL_n(Z) with elementary generators: sqrt(2/n)"}}};
    rep.text = txt.str();
    return rep;
}

}  // namespace kazhdan
