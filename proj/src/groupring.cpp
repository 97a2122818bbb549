#include "kazhdan/groupring.hpp"

namespace kazhdan {

ContextPtr make_context(std::vector<IntMatrix> generators, int R, std::string name,
                        const std::optional<std::filesystem::path>& cache_dir, std::size_t cap) {
    if (R < 0) throw DomainError("radius must be non-negative");
    auto cached = ball_with_table(generators, name, R, cache_dir, cap);
    auto ctx = std::make_shared<RingContext>();
    ctx->name = std::move(name);
    ctx->generators = std::move(generators);
    ctx->ball = std::move(cached.ball);
    ctx->table = std::move(cached.table);
    return ctx;
}

ContextPtr make_context(const GeneratorSet& gens, int R, const std::optional<std::filesystem::path>& cache_dir,
                        std::size_t cap) {
    return make_context(gens.elements(), R, gens.system.name(), cache_dir, cap);
}

RingElement RingElement::identity(ContextPtr ctx) { return basis(std::move(ctx), 0, 1); }

RingElement RingElement::basis(ContextPtr ctx, std::uint32_t index, const Rational& c) {
    if (index >= ctx->ball.size()) throw DomainError("basis index outside the ball");
    RingElement e(std::move(ctx));
    e.add_term(index, c);
    return e;
}

RingElement RingElement::of(ContextPtr ctx, const IntMatrix& g, const Rational& c) {
    const auto idx = ctx->ball.find(g);
    if (!idx) {
        throw ResourceError("group element lies outside the enumerated ball of radius " +
                            std::to_string(ctx->ball.radius));
    }
    return basis(std::move(ctx), *idx, c);
}

Rational RingElement::coeff(std::uint32_t index) const {
    auto it = coeffs_.find(index);
    return it == coeffs_.end() ? Rational(0) : it->second;
}

void RingElement::add_term(std::uint32_t index, const Rational& c) {
    if (c == 0) return;
    Rational q = c;
    q.canonicalize();
    auto [it, fresh] = coeffs_.try_emplace(index, q);
    if (!fresh) {
        it->second += q;
        if (it->second == 0) coeffs_.erase(it);
    }
}

int RingElement::support_radius() const {
    int r = 0;
    for (const auto& [k, v] : coeffs_) r = std::max(r, ctx_->ball.word_length(k));
    return r;
}

RingElement& RingElement::operator+=(const RingElement& o) {
    if (!ctx_) ctx_ = o.ctx_;
    if (o.ctx_ && o.ctx_ != ctx_) throw ContextMismatch("ring elements live in different contexts");
    for (const auto& [k, v] : o.coeffs_) add_term(k, v);
    return *this;
}

RingElement& RingElement::operator-=(const RingElement& o) {
    if (!ctx_) ctx_ = o.ctx_;
    if (o.ctx_ && o.ctx_ != ctx_) throw ContextMismatch("ring elements live in different contexts");
    for (const auto& [k, v] : o.coeffs_) add_term(k, -v);
    return *this;
}

RingElement add(const RingElement& a, const RingElement& b) {
    RingElement out = a;
    out += b;
    return out;
}

RingElement scale(const Rational& c, const RingElement& a) {
    RingElement out(a.context());
    if (c == 0) return out;
    for (const auto& [k, v] : a.coeffs()) out.add_term(k, c * v);
    return out;
}

RingElement mul(const RingElement& a, const RingElement& b) {
    if (a.context() != b.context()) throw ContextMismatch("ring elements live in different contexts");
    RingElement out(a.context());
    if (!a.context()) return out;
    const RingContext& ctx = *a.context();
    const Ball& ball = ctx.ball;
    const std::size_t tn = ctx.table.n;
    std::map<std::uint32_t, Rational> acc;
    for (const auto& [i, ci] : a.coeffs()) {
        for (const auto& [j, cj] : b.coeffs()) {
            std::uint32_t k;
            if (i < tn && j < tn) {
                k = ctx.table(i, j);
            } else {
                const IntMatrix p = checked_product(ball.element(i), ball.element(j));
                const auto found = ball.find(p);
                if (!found) {
                    throw ResourceError("product needs radius " + std::to_string(a.support_radius() + b.support_radius()) +
                                        " but the context ball has radius " + std::to_string(ball.radius));
                }
                k = *found;
            }
            acc[k] += ci * cj;
        }
    }
    for (auto& [k, v] : acc) out.add_term(k, v);
    return out;
}

RingElement star(const RingElement& a) {
    RingElement out(a.context());
    for (const auto& [k, v] : a.coeffs()) out.add_term(a.context()->ball.inverse(k), v);
    return out;
}

Rational l1_norm(const RingElement& a) {
    Rational s = 0;
    for (const auto& [k, v] : a.coeffs()) s += abs(v);
    return s;
}

Rational augmentation(const RingElement& a) {
    Rational s = 0;
    for (const auto& [k, v] : a.coeffs()) s += v;
    return s;
}

RingElement laplacian(const ContextPtr& ctx) {
    RingElement d = RingElement::identity(ctx);
    d = scale(static_cast<long>(ctx->generators.size()), d);
    for (const auto& s : ctx->generators) d.add_term(*ctx->ball.find(s), -1);
    return d;
}

std::string to_string(const Rational& q) { return q.get_str(); }

Rational rational_from_string(const std::string& s) {
    Rational q;
    if (q.set_str(s, 10) != 0) throw DomainError("malformed rational: " + s);
    q.canonicalize();
    return q;
}

nlohmann::json to_json(const RingElement& a) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [k, v] : a.coeffs()) {
        out.push_back({a.context()->ball.word_length(k), serialize_matrix(a.context()->ball.element(k)),
                       v.get_num().get_str(), v.get_den().get_str()});
    }
    return out;
}

RingElement element_from_json(const ContextPtr& ctx, const nlohmann::json& j) {
    RingElement out(ctx);
    for (const auto& term : j) {
        const IntMatrix g = parse_matrix(term.at(1).get<std::string>());
        const auto idx = ctx->ball.find(g);
        if (!idx) throw DomainError("serialized element lies outside the context ball");
        if (ctx->ball.word_length(*idx) != term.at(0).get<int>()) throw DomainError("word length mismatch in element");
        Rational q(mpz_class(term.at(2).get<std::string>()), mpz_class(term.at(3).get<std::string>()));
        q.canonicalize();
        out.add_term(*idx, q);
    }
    return out;
}

}  // namespace kazhdan
