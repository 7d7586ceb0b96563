#pragma once
// Dirichlet characters via the cyclic decomposition of (Z/q)^*, with values
// taken from an exact root table so character identities can be tested as
// integer statements about phase indices.
//
// Components: one cyclic factor per odd prime power (generated by a
// primitive root), one factor for 4, and the pair {+-1} x <3> for 2^e with
// e >= 3.  A character is an exponent vector against those generators; its
// value at n is e(k / D) where D is the group exponent and k is assembled
// from discrete logarithms.

#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "heckelab/common.hpp"
#include "heckelab/expsum.hpp"
#include "heckelab/hecke.hpp"
#include "heckelab/numeric.hpp"
#include "heckelab/sieves.hpp"

namespace heckelab {

namespace detail {

inline u64 powmod(u64 base, u64 exp, u64 mod) {
    if (mod == 1) return 0;
    u64 r = 1;
    base %= mod;
    while (exp) {
        if (exp & 1) r = u64((u128(r) * base) % mod);
        base = u64((u128(base) * base) % mod);
        exp >>= 1;
    }
    return r;
}

inline std::vector<u64> prime_factors(u64 n) {
    std::vector<u64> ps;
    for (u64 p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            ps.push_back(p);
            while (n % p == 0) n /= p;
        }
    if (n > 1) ps.push_back(n);
    return ps;
}

// Smallest primitive root mod an odd prime p.
inline u64 primitive_root_mod_prime(u64 p) {
    auto qs = prime_factors(p - 1);
    for (u64 g = 2; g < p; ++g) {
        bool ok = true;
        for (u64 r : qs)
            if (powmod(g, (p - 1) / r, p) == 1) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
    throw std::logic_error("no primitive root found; p was not prime");
}

}  // namespace detail

// One cyclic factor of (Z/q)^*: a generator of known order modulo one prime
// power, plus the discrete-log table for that prime power.
struct CyclicComponent {
    u64 modulus = 1;    // the p^a this component lives in
    u64 generator = 1;
    u64 order = 1;
    std::vector<std::uint32_t> dlog;  // dlog[r] for r coprime to modulus, else sentinel

    static constexpr std::uint32_t kNotCoprime = 0xFFFFFFFFu;
};

class CharacterGroup;

// A character is a view into its group; keep the group alive while using it.
class DirichletCharacter {
  public:
    DirichletCharacter(const CharacterGroup* group, std::vector<u64> exps, u64 index)
        : group_(group), exps_(std::move(exps)), index_(index) {}

    cplx operator()(u64 n) const;
    // k with chi(n) = e(k / D), or nothing when gcd(n, q) > 1.
    std::optional<u64> phase_index(u64 n) const;

    u64 modulus() const;
    u64 index() const { return index_; }
    const std::vector<u64>& exponents() const { return exps_; }
    bool is_principal() const {
        for (u64 e : exps_)
            if (e) return false;
        return true;
    }
    u64 order() const;
    bool is_real() const { return order() <= 2; }
    bool is_even() const;  // chi(-1) = 1
    u64 conductor() const;
    bool is_primitive() const { return conductor() == modulus(); }

  private:
    const CharacterGroup* group_;
    std::vector<u64> exps_;
    u64 index_;
};

class CharacterGroup {
  public:
    explicit CharacterGroup(u64 q) : q_(q) {
        if (q < 1) throw std::invalid_argument("modulus must be >= 1");
        if (q > 1'000'000) throw std::invalid_argument("modulus above 10^6 not supported");
        u64 m = q;
        u64 two = 0;
        while (m % 2 == 0) {
            m /= 2;
            ++two;
        }
        if (two == 2) add_two_power_components(4);
        if (two >= 3) add_two_power_components(u64(1) << two);
        for (u64 p = 3; p * p <= m; p += 2)
            if (m % p == 0) {
                u64 pa = 1;
                while (m % p == 0) {
                    m /= p;
                    pa *= p;
                }
                add_odd_component(p, pa);
            }
        if (m > 1) add_odd_component(m, m);

        phi_ = 1;
        exponent_ = 1;
        for (const auto& c : components_) {
            phi_ *= c.order;
            exponent_ = std::lcm(exponent_, c.order);
        }
        root_ = std::make_unique<RootTable>(i64(exponent_));
    }

    u64 modulus() const { return q_; }
    u64 size() const { return phi_; }  // phi(q), the number of characters
    u64 exponent() const { return exponent_; }
    const std::vector<CyclicComponent>& components() const { return components_; }
    const RootTable& root() const { return *root_; }

    // Characters indexed 0 .. phi(q)-1 in mixed radix over component orders;
    // index 0 is the principal character.
    DirichletCharacter character(u64 index) const {
        if (index >= phi_) throw std::invalid_argument("character index out of range");
        std::vector<u64> exps(components_.size());
        u64 rest = index;
        for (size_t i = 0; i < components_.size(); ++i) {
            exps[i] = rest % components_[i].order;
            rest /= components_[i].order;
        }
        return DirichletCharacter(this, std::move(exps), index);
    }

    std::vector<DirichletCharacter> characters() const {
        std::vector<DirichletCharacter> out;
        out.reserve(phi_);
        for (u64 i = 0; i < phi_; ++i) out.push_back(character(i));
        return out;
    }

    std::optional<u64> phase_index(const std::vector<u64>& exps, u64 n) const {
        u64 r = n % q_;
        if (std::gcd(r, q_) != 1) return std::nullopt;
        u64 k = 0;
        for (size_t i = 0; i < components_.size(); ++i) {
            const auto& c = components_[i];
            std::uint32_t t = c.dlog[r % c.modulus];
            if (t == CyclicComponent::kNotCoprime)
                throw std::logic_error("discrete log missing for a coprime residue");
            k = (k + u64((u128(exps[i]) * t % c.order) * (exponent_ / c.order))) % exponent_;
        }
        return k;
    }

  private:
    void add_odd_component(u64 p, u64 pa) {
        CyclicComponent c;
        c.modulus = pa;
        c.order = pa / p * (p - 1);  // phi(p^a)
        u64 g = detail::primitive_root_mod_prime(p);
        if (pa > p && detail::powmod(g, p - 1, p * p) == 1) g += p;
        c.generator = g;
        c.dlog.assign(pa, CyclicComponent::kNotCoprime);
        u64 v = 1;
        for (u64 t = 0; t < c.order; ++t) {
            c.dlog[v] = std::uint32_t(t);
            v = u64((u128(v) * g) % pa);
        }
        if (v != 1) throw std::logic_error("generator order mismatch for odd prime power");
        components_.push_back(std::move(c));
    }

    void add_two_power_components(u64 m) {
        if (m == 4) {
            CyclicComponent c;
            c.modulus = 4;
            c.generator = 3;
            c.order = 2;
            c.dlog.assign(4, CyclicComponent::kNotCoprime);
            c.dlog[1] = 0;
            c.dlog[3] = 1;
            components_.push_back(std::move(c));
            return;
        }
        // m = 2^e, e >= 3: (Z/m)^* = {+-1} x <3>.
        CyclicComponent sign;
        sign.modulus = m;
        sign.generator = m - 1;
        sign.order = 2;
        sign.dlog.assign(m, CyclicComponent::kNotCoprime);
        CyclicComponent three;
        three.modulus = m;
        three.generator = 3;
        three.order = m / 4;
        three.dlog.assign(m, CyclicComponent::kNotCoprime);
        u64 v = 1;
        for (u64 t = 0; t < three.order; ++t) {
            sign.dlog[v] = 0;
            three.dlog[v] = std::uint32_t(t);
            u64 w = m - v;  // -v has sign exponent 1, same <3> exponent
            sign.dlog[w] = 1;
            three.dlog[w] = std::uint32_t(t);
            v = u64((u128(v) * 3) % m);
        }
        if (v != 1) throw std::logic_error("order of 3 mismatch modulo 2^e");
        components_.push_back(std::move(sign));
        components_.push_back(std::move(three));
    }

    u64 q_;
    u64 phi_ = 1;
    u64 exponent_ = 1;
    std::vector<CyclicComponent> components_;
    std::unique_ptr<RootTable> root_;
};

inline CharacterGroup character_group(u64 q) { return CharacterGroup(q); }

inline std::optional<u64> DirichletCharacter::phase_index(u64 n) const {
    return group_->phase_index(exps_, n);
}

inline cplx DirichletCharacter::operator()(u64 n) const {
    auto k = phase_index(n);
    if (!k) return {0.0, 0.0};
    return group_->root().phase(i64(*k));
}

inline u64 DirichletCharacter::modulus() const { return group_->modulus(); }

inline u64 DirichletCharacter::order() const {
    u64 ord = 1;
    const auto& comps = group_->components();
    for (size_t i = 0; i < comps.size(); ++i)
        ord = std::lcm(ord, comps[i].order / std::gcd(comps[i].order, exps_[i]));
    return ord;
}

inline bool DirichletCharacter::is_even() const {
    u64 q = modulus();
    if (q <= 2) return true;
    auto k = phase_index(q - 1);
    return k && *k == 0;
}

inline u64 DirichletCharacter::conductor() const {
    u64 q = modulus();
    for (u64 d = 1; d <= q; ++d) {
        if (q % d != 0) continue;
        bool trivial_on_class = true;
        for (u64 n = 1 + d; n <= q && trivial_on_class; n += d) {
            if (std::gcd(n, q) != 1) continue;
            auto k = phase_index(n);
            if (!k || *k != 0) trivial_on_class = false;
        }
        if (trivial_on_class) return d;
    }
    return q;
}

// ---------------------------------------------------------------------------
// Twisted sums.

struct TwistedCharSum {
    cplx value{0, 0};
    double abs_sum = 0;
    u64 terms = 0;
};

// sum over p <= X of lambda(p) chi(p) log p.
inline TwistedCharSum twisted_prime_sum(const HeckeFn& fn, const SieveTables& sv,
                                        const DirichletCharacter& chi, u64 x,
                                        const BlockOptions& opt = {}) {
    if (x < 1 || x > fn.limit() || x > sv.limit())
        throw std::invalid_argument("twisted prime sum range outside tables");
    const auto& primes = sv.primes();
    auto leaf = [&](i64 lo, i64 hi) {
        NeumaierCplx val;
        NeumaierSum abs;
        u64 terms = 0;
        auto it = std::upper_bound(primes.begin(), primes.end(), u64(lo));
        for (; it != primes.end() && *it <= u64(hi); ++it) {
            u64 p = *it;
            cplx c = fn.values[p] * std::log(double(p)) * chi(p);
            if (c != cplx{0.0, 0.0}) {
                val.add(c);
                abs.add(std::abs(c));
                ++terms;
            }
        }
        return detail::LeafSum{val.value(), abs.value(), terms};
    };
    auto total = block_tree_sum<detail::LeafSum>(i64(x), opt, leaf);
    return {total.value, total.abs, total.terms};
}

// sum over n <= X of mu(n) lambda(n) chi(n).
inline TwistedCharSum twisted_moebius_sum(const HeckeFn& fn, const SieveTables& sv,
                                          const DirichletCharacter& chi, u64 x,
                                          const BlockOptions& opt = {}) {
    if (x < 1 || x > fn.limit() || x > sv.limit())
        throw std::invalid_argument("twisted Moebius sum range outside tables");
    auto leaf = [&](i64 lo, i64 hi) {
        NeumaierCplx val;
        NeumaierSum abs;
        u64 terms = 0;
        for (i64 n = lo + 1; n <= hi; ++n) {
            int mu = sv.mobius(u64(n));
            if (mu == 0) continue;
            cplx c = double(mu) * fn.values[u64(n)] * chi(u64(n));
            if (c != cplx{0.0, 0.0}) {
                val.add(c);
                abs.add(std::abs(c));
                ++terms;
            }
        }
        return detail::LeafSum{val.value(), abs.value(), terms};
    };
    auto total = block_tree_sum<detail::LeafSum>(i64(x), opt, leaf);
    return {total.value, total.abs, total.terms};
}

// ---------------------------------------------------------------------------
// Three-route evaluation of T(x, a/q) = sum mu(n) lambda(n) e(n a / q).

struct ResidueDecomposition {
    cplx direct{0, 0};
    cplx residue_route{0, 0};    // split by residue class b mod q
    cplx character_route{0, 0};  // split by d = (n, q) and characters mod q/d
    double diff_residue = 0;
    double diff_character = 0;
    bool ok = false;  // both within 1e-8 (1 + |direct|)
};

inline ResidueDecomposition residue_decomposition_check(const HeckeFn& fn,
                                                        const SieveTables& sv, u64 x,
                                                        u64 a, u64 q) {
    if (q < 1) throw std::invalid_argument("modulus must be >= 1");
    if (x < 1 || x > fn.limit() || x > sv.limit())
        throw std::invalid_argument("decomposition range outside tables");
    RootTable rt{i64(q)};
    ResidueDecomposition out;

    // Route A: exact rational phases, one pass.
    NeumaierCplx direct;
    for (u64 n = 1; n <= x; ++n) {
        int mu = sv.mobius(n);
        if (mu) direct.add(double(mu) * fn.values[n] * rt.phase(i64(n), i64(a)));
    }
    out.direct = direct.value();

    // Route B: residue classes first.
    std::vector<NeumaierSum> classes(q);
    for (u64 n = 1; n <= x; ++n) {
        int mu = sv.mobius(n);
        if (mu) classes[n % q].add(double(mu) * fn.values[n]);
    }
    NeumaierCplx residue;
    for (u64 b = 0; b < q; ++b) residue.add(classes[b].value() * rt.phase(i64(b), i64(a)));
    out.residue_route = residue.value();

    // Route C: group classes by d = (n, q), then expand the coprime indicator
    // modulo q/d in characters.
    NeumaierCplx char_route;
    for (u64 d = 1; d <= q; ++d) {
        if (q % d != 0) continue;
        u64 qd = q / d;
        CharacterGroup group(qd);
        for (u64 ci = 0; ci < group.size(); ++ci) {
            auto chi = group.character(ci);
            NeumaierCplx coeff;
            for (u64 b = 1; b <= qd; ++b) {
                if (std::gcd(b, qd) != 1) continue;
                coeff.add(rt.phase(i64(d * b), i64(a)) * std::conj(chi(b)));
            }
            NeumaierCplx w;
            for (u64 m = 1; m * d <= x; ++m) {
                int mu = sv.mobius(m * d);
                if (mu) w.add(double(mu) * fn.values[m * d] * chi(m));
            }
            char_route.add(coeff.value() * w.value() / double(group.size()));
        }
    }
    out.character_route = char_route.value();

    double scale = 1.0 + std::abs(out.direct);
    out.diff_residue = std::abs(out.residue_route - out.direct);
    out.diff_character = std::abs(out.character_route - out.direct);
    out.ok = out.diff_residue <= 1e-8 * scale && out.diff_character <= 1e-8 * scale;
    return out;
}

// ---------------------------------------------------------------------------
// Local factor certificate: G(u, z) = 1 - 2uz + z^2 on the compact set
// K = { |u| <= 2^{7/64}, |z| <= 2^{-99/100} } with u real and z complex.

struct LocalFactorCertificate {
    double u_bound = 0;       // 2^{7/64}
    double z_bound = 0;       // 2^{-99/100}
    double root_margin = 0;   // min |zero of G(u, .)| minus z_bound, over u
    double grid_min = 0;      // min |G| on the boundary grid |z| = z_bound
    double slack = 0;         // Lipschitz correction subtracted from grid_min
    double certified_min = 0;
    double u_zero_bound = 0;  // 1 - 2^{-99/50}, the exact u = 0 floor
    double margin_p3 = 0;     // 1 - 2 * 3^{-1409/1600} - 3^{-99/50}
    bool conclusive = false;
    double grid_step = 0;
};

// For fixed real u the zeros of G are u +- sqrt(u^2 - 1): on the unit circle
// for |u| <= 1 and real with smaller magnitude u - sqrt(u^2 - 1) otherwise,
// decreasing in u.  If even the worst zero stays outside |z| <= z_bound, G
// has no zero on the disk and min |G| is attained on the boundary circle,
// which the grid covers with an explicit Lipschitz correction.
inline LocalFactorCertificate local_factor_certificate(double step = 1e-3) {
    if (!(step > 0) || step > 1e-2)
        throw std::invalid_argument("grid step must lie in (0, 1e-2]");
    LocalFactorCertificate cert;
    cert.grid_step = step;
    const double ub = std::exp2(7.0 / 64.0);
    const double rho = std::exp2(-99.0 / 100.0);
    cert.u_bound = ub;
    cert.z_bound = rho;
    cert.root_margin = (ub - std::sqrt(ub * ub - 1.0)) - rho;
    cert.u_zero_bound = 1.0 - std::exp2(-99.0 / 50.0);
    cert.margin_p3 =
        1.0 - 2.0 * std::pow(3.0, -1409.0 / 1600.0) - std::pow(3.0, -99.0 / 50.0);

    // Even u-grid count keeps u = 0 on the grid.
    const double two_pi = 2.0 * std::acos(-1.0);
    u64 nu = 2 * u64(std::ceil(ub / step));
    u64 nphi = u64(std::ceil(two_pi / step));
    double du = 2.0 * ub / double(nu);
    double dphi = two_pi / double(nphi);
    double min_sq = INFINITY;
    for (u64 j = 0; j < nphi; ++j) {
        cplx z = rho * unit_phase(double(j) / double(nphi) - 0.5);
        cplx w = 1.0 + z * z;
        for (u64 i = 0; i <= nu; ++i) {
            double u = -ub + double(i) * du;
            double re = w.real() - 2.0 * u * z.real();
            double im = w.imag() - 2.0 * u * z.imag();
            double s = re * re + im * im;
            if (s < min_sq) min_sq = s;
        }
    }
    cert.grid_min = std::sqrt(min_sq);
    double lip_u = 2.0 * rho;
    double lip_phi = 2.0 * rho * (ub + rho);
    cert.slack = 0.5 * (lip_u * du + lip_phi * dphi);
    cert.certified_min = cert.grid_min - cert.slack;
    cert.conclusive = cert.root_margin > 0 && cert.certified_min > 0;
    return cert;
}

}  // namespace heckelab
