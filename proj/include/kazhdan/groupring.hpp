#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "kazhdan/chevalley.hpp"

namespace kazhdan {

using Rational = mpq_class;

// Ball(2R) with the product table of Ball(R): the arena for ring elements.
struct RingContext {
    std::string name;
    std::vector<IntMatrix> generators;
    Ball ball;
    ProductTable table;

    int radius() const { return table.domain_radius; }
    std::size_t basis_size() const { return table.n; }
};

using ContextPtr = std::shared_ptr<const RingContext>;

ContextPtr make_context(std::vector<IntMatrix> generators, int R, std::string name = "custom",
                        const std::optional<std::filesystem::path>& cache_dir = std::nullopt,
                        std::size_t cap = default_ball_cap);
ContextPtr make_context(const GeneratorSet& gens, int R,
                        const std::optional<std::filesystem::path>& cache_dir = std::nullopt,
                        std::size_t cap = default_ball_cap);

class RingElement {
public:
    using Coeffs = std::map<std::uint32_t, Rational>;

    RingElement() = default;
    explicit RingElement(ContextPtr ctx) : ctx_(std::move(ctx)) {}

    static RingElement identity(ContextPtr ctx);
    static RingElement basis(ContextPtr ctx, std::uint32_t index, const Rational& c = 1);
    // Element supported at the ball element equal to `g`.
    static RingElement of(ContextPtr ctx, const IntMatrix& g, const Rational& c = 1);

    const ContextPtr& context() const { return ctx_; }
    const Coeffs& coeffs() const { return coeffs_; }
    Rational coeff(std::uint32_t index) const;
    void add_term(std::uint32_t index, const Rational& c);
    bool is_zero() const { return coeffs_.empty(); }
    std::size_t support_size() const { return coeffs_.size(); }
    int support_radius() const;

    bool operator==(const RingElement& o) const { return ctx_ == o.ctx_ && coeffs_ == o.coeffs_; }
    bool operator!=(const RingElement& o) const { return !(*this == o); }

    RingElement& operator+=(const RingElement& o);
    RingElement& operator-=(const RingElement& o);

private:
    ContextPtr ctx_;
    Coeffs coeffs_;
};

RingElement add(const RingElement& a, const RingElement& b);
RingElement scale(const Rational& c, const RingElement& a);
RingElement mul(const RingElement& a, const RingElement& b);
RingElement star(const RingElement& a);
Rational l1_norm(const RingElement& a);
Rational augmentation(const RingElement& a);

inline RingElement operator+(const RingElement& a, const RingElement& b) { return add(a, b); }
inline RingElement operator-(const RingElement& a, const RingElement& b) { return add(a, scale(-1, b)); }
inline RingElement operator-(const RingElement& a) { return scale(-1, a); }
inline RingElement operator*(const Rational& c, const RingElement& a) { return scale(c, a); }
inline RingElement operator*(const RingElement& a, const RingElement& b) { return mul(a, b); }

// Group Laplacian |S| − Σ s over the context's generating tuple.
RingElement laplacian(const ContextPtr& ctx);

nlohmann::json to_json(const RingElement& a);
RingElement element_from_json(const ContextPtr& ctx, const nlohmann::json& j);

std::string to_string(const Rational& q);
Rational rational_from_string(const std::string& s);

}  // namespace kazhdan
