#include "kazhdan/elements.hpp"

namespace kazhdan {

void PairTensor::add(int a, int b, std::int64_t mult) {
    if (mult == 0) return;
    auto [it, fresh] = terms.try_emplace({a, b}, mult);
    if (!fresh) {
        it->second += mult;
        if (it->second == 0) terms.erase(it);
    }
}

std::int64_t PairTensor::operator()(int a, int b) const {
    auto it = terms.find({a, b});
    return it == terms.end() ? 0 : it->second;
}

PairTensor& PairTensor::operator+=(const PairTensor& o) {
    for (const auto& [k, v] : o.terms) add(k.first, k.second, v);
    return *this;
}

PairTensor& PairTensor::operator-=(const PairTensor& o) {
    for (const auto& [k, v] : o.terms) add(k.first, k.second, -v);
    return *this;
}

PairTensor operator+(PairTensor a, const PairTensor& b) { return a += b; }
PairTensor operator-(PairTensor a, const PairTensor& b) { return a -= b; }

PairTensor operator*(std::int64_t c, const PairTensor& t) {
    PairTensor out;
    for (const auto& [k, v] : t.terms) out.add(k.first, k.second, c * v);
    return out;
}

bool disjoint(const PairTensor& a, const PairTensor& b) {
    for (const auto& [k, v] : a.terms) {
        if (b.terms.count(k)) return false;
    }
    return true;
}

bool star_symmetric(const PairTensor& t) {
    for (const auto& [k, v] : t.terms) {
        if (t(k.second, k.first) != v) return false;
    }
    return true;
}

namespace {

bool in_class(const RootSystem& omega, int a, LengthClass lengths) {
    const bool lng = omega.is_long(a);
    if (lengths == LengthClass::long_roots) return lng;
    if (lengths == LengthClass::short_roots) return !lng;
    return true;
}

}  // namespace

PairTensor sq_tensor(const RootSystem& omega, LengthClass lengths) {
    PairTensor t;
    for (int a = 0; a < static_cast<int>(omega.size()); ++a) {
        if (in_class(omega, a, lengths)) t.add(a, a);
    }
    return t;
}

PairTensor opposite_tensor(const RootSystem& omega, LengthClass lengths) {
    PairTensor t;
    for (int a = 0; a < static_cast<int>(omega.size()); ++a) {
        if (in_class(omega, a, lengths)) t.add(a, omega.negative(a));
    }
    return t;
}

PairTensor line_sq_tensor(const RootSystem& omega, LengthClass lengths) {
    return sq_tensor(omega, lengths) + opposite_tensor(omega, lengths);
}

PairTensor adj_tensor(const RootSystem& omega, const AdmissiblePlane& plane) {
    PairTensor t;
    for (int a : plane.member_roots) {
        for (int b : plane.member_roots) {
            if (!omega.proportional(a, b)) t.add(a, b);
        }
    }
    return t;
}

PairTensor adj_tensor(const RootSystem& omega, PlaneType type) {
    PairTensor t;
    for (const auto& p : admissible_planes(omega)) {
        if (p.plane_type == type) t += adj_tensor(omega, p);
    }
    return t;
}

PairTensor adj_tensor(const RootSystem& omega) {
    PairTensor t;
    const int n = static_cast<int>(omega.size());
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (!omega.proportional(a, b)) t.add(a, b);
        }
    }
    return t;
}

PairTensor square_tensor(const RootSystem& omega) {
    PairTensor t;
    const int n = static_cast<int>(omega.size());
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) t.add(a, b);
    }
    return t;
}

LevelDecomposition levels(const RootSystem& omega) {
    if (omega.family != 'C') throw DomainError("level elements are defined for type C only");
    LevelDecomposition d;
    const auto planes = admissible_planes(omega);
    auto by_type = [&](PlaneType type) {
        PairTensor t;
        for (const auto& p : planes) {
            if (p.plane_type == type) t += adj_tensor(omega, p);
        }
        return t;
    };
    d.lev[0] = line_sq_tensor(omega, LengthClass::long_roots);
    d.lev[1] = line_sq_tensor(omega, LengthClass::short_roots) + by_type(PlaneType::C2);
    d.lev[2] = by_type(PlaneType::A1xC1) + by_type(PlaneType::A2);
    d.lev[3] = by_type(PlaneType::A1xA1);
    return d;
}

RingElement delta_root(const GeneratorSet& gens, const ContextPtr& ctx, int root) {
    if (root < 0 || root >= static_cast<int>(gens.plus.size())) throw DomainError("unknown root index");
    RingElement d = RingElement::identity(ctx);
    d = scale(2, d);
    d -= RingElement::of(ctx, gens.plus[static_cast<std::size_t>(root)]);
    d -= RingElement::of(ctx, gens.minus[static_cast<std::size_t>(root)]);
    return d;
}

RingElement delta_subspace(const GeneratorSet& gens, const ContextPtr& ctx, const std::vector<int>& roots) {
    RingElement d(ctx);
    for (int a : roots) d += delta_root(gens, ctx, a);
    return d;
}

RingElement delta_subspace(const GeneratorSet& gens, const ContextPtr& ctx, const AdmissiblePlane& plane) {
    return delta_subspace(gens, ctx, plane.member_roots);
}

RingElement delta_full(const GeneratorSet& gens, const ContextPtr& ctx) {
    std::vector<int> all(gens.plus.size());
    for (std::size_t a = 0; a < all.size(); ++a) all[a] = static_cast<int>(a);
    return delta_subspace(gens, ctx, all);
}

RingElement evaluate(const PairTensor& t, const GeneratorSet& gens, const ContextPtr& ctx) {
    std::map<int, RingElement> deltas;
    auto get = [&](int a) -> const RingElement& {
        auto it = deltas.find(a);
        if (it == deltas.end()) it = deltas.emplace(a, delta_root(gens, ctx, a)).first;
        return it->second;
    };
    RingElement out(ctx);
    for (const auto& [k, v] : t.terms) out += scale(v, mul(get(k.first), get(k.second)));
    return out;
}

PairTensor embed(const PairTensor& t, const RootSystem& from, const RootSystem& to) {
    if (from.ambient_dim > to.ambient_dim) throw DomainError("cannot embed into a smaller ambient space");
    std::vector<int> image(from.size());
    for (std::size_t a = 0; a < from.size(); ++a) {
        IntVector v = IntVector::Zero(to.ambient_dim);
        v.head(from.ambient_dim) = from.roots[a].coords;
        image[a] = to.find(v);
        if (image[a] < 0) throw DomainError("root " + std::to_string(a) + " has no image under the embedding");
    }
    PairTensor out;
    for (const auto& [k, v] : t.terms) {
        out.add(image[static_cast<std::size_t>(k.first)], image[static_cast<std::size_t>(k.second)], v);
    }
    return out;
}

PairTensor act(const PairTensor& t, const WeylElement& w) {
    PairTensor out;
    for (const auto& [k, v] : t.terms) out.add(w(k.first), w(k.second), v);
    return out;
}

PairTensor weyl_sum(const PairTensor& t, const std::vector<WeylElement>& group) {
    PairTensor out;
    for (const auto& w : group) out += act(t, w);
    return out;
}

std::int64_t lemma_constant(int n, int m, int i) {
    if (!(1 <= i && i <= m && m <= n)) throw DomainError("lemma constant needs 1 <= i <= m <= n");
    auto fact = [](int k) {
        std::int64_t f = 1;
        for (int j = 2; j <= k; ++j) f *= j;
        return f;
    };
    return (std::int64_t{1} << n) * fact(m) * fact(n - i) / fact(m - i);
}

const char* to_string(Target t) {
    switch (t) {
        case Target::delta_sq: return "delta_sq";
        case Target::adj: return "adj";
        case Target::levels23: return "levels23";
    }
    return "?";
}

Target target_from_string(const std::string& s) {
    if (s == "delta_sq") return Target::delta_sq;
    if (s == "adj") return Target::adj;
    if (s == "levels23") return Target::levels23;
    throw DomainError("unknown target '" + s + "' (expected delta_sq, adj or levels23)");
}

RingElement target_element(Target t, const GeneratorSet& gens, const ContextPtr& ctx) {
    switch (t) {
        case Target::delta_sq: {
            const RingElement d = delta_full(gens, ctx);
            return mul(d, d);
        }
        case Target::adj:
            return evaluate(adj_tensor(gens.system), gens, ctx);
        case Target::levels23: {
            const auto lev = levels(gens.system);
            return evaluate(lev[2] + lev[3], gens, ctx);
        }
    }
    throw DomainError("unknown target");
}

nlohmann::json to_json(const PairTensor& t) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [k, v] : t.terms) out.push_back({k.first, k.second, v});
    return out;
}

PairTensor pair_tensor_from_json(const nlohmann::json& j) {
    PairTensor t;
    for (const auto& e : j) t.add(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<std::int64_t>());
    return t;
}

}  // namespace kazhdan
