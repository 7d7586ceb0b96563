#pragma once
// Hecke-multiplicative functions as tabulated objects.
//
// A real arithmetic function lambda with lambda(1) = 1 is Hecke multiplicative
// when
//   (H1)  lambda(m) lambda(n) = sum_{d | gcd(m,n)} lambda(mn / d^2),
// equivalently (Moebius inversion across the gcd)
//   (H2)  lambda(mn) = sum_{d | gcd(m,n)} mu(d) lambda(m/d) lambda(n/d).
// Normalized eigenvalue systems of holomorphic eigenforms satisfy these; so
// does any multiplicative function whose prime-power values obey the forced
// recursion lambda(p^{j+1}) = lambda(p) lambda(p^j) - lambda(p^{j-1}).
//
// The companion majorant
//   lambda*(n) = ( sum_{d|n} lambda(d)^2 )^{1/2}
// satisfies a chain of inequalities exercised by check_star_inequalities:
//   (a) lambda*(n) >= 1
//   (b) |lambda(m)| <= lambda*(m)
//   (c) m | n  =>  lambda*(m) <= lambda*(n)
//   (d) gcd(m,n) = 1  =>  lambda*(mn) = lambda*(m) lambda*(n)
//   (e) |lambda(mn)| <= lambda*(m) lambda*(n)
//   (f) lambda*(mn) <= sqrt(d(m) d(n)) lambda*(m) lambda*(n)
//   (g) |lambda(m) lambda(n)| <= sqrt(d(gcd(m,n))) lambda*(mn)

#include <cmath>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "heckelab/common.hpp"
#include "heckelab/numeric.hpp"
#include "heckelab/sieves.hpp"

namespace heckelab {

enum class HeckeSource { Form, Synthetic };

struct HeckeFn {
    std::string label;
    HeckeSource source = HeckeSource::Synthetic;
    std::vector<double> values;  // index 0 unused; values[n] = lambda(n)

    u64 limit() const { return values.empty() ? 0 : values.size() - 1; }
    double operator()(u64 n) const {
        assert(n >= 1 && n <= limit());
        return values[n];
    }
};

struct LambdaStar {
    std::vector<double> values;  // index 0 unused

    u64 limit() const { return values.empty() ? 0 : values.size() - 1; }
    double operator()(u64 n) const {
        assert(n >= 1 && n <= limit());
        return values[n];
    }
};

// ---------------------------------------------------------------------------
// Construction.

// lambda(p^j) for j = 0..jmax from lambda(p), via the recursion forced by (H1).
inline std::vector<double> prime_power_values(double lambda_p, unsigned jmax) {
    std::vector<double> v(jmax + 1);
    v[0] = 1.0;
    if (jmax >= 1) v[1] = lambda_p;
    for (unsigned j = 1; j < jmax; ++j) v[j + 1] = lambda_p * v[j] - v[j - 1];
    return v;
}

// Multiplicative extension from supplied prime-power values lambda(p^j), keyed
// by p^j, to all n <= limit.  Throws if a needed prime power is missing.
inline HeckeFn hecke_extend_from_primes(const SieveTables& sv, u64 limit,
                                        const std::unordered_map<u64, double>& at_prime_powers,
                                        std::string label,
                                        HeckeSource source = HeckeSource::Synthetic) {
    if (limit < 1 || limit > sv.limit())
        throw std::invalid_argument("extension limit outside sieve range");
    HeckeFn fn;
    fn.label = std::move(label);
    fn.source = source;
    fn.values.assign(limit + 1, 0.0);
    fn.values[1] = 1.0;
    for (u64 n = 2; n <= limit; ++n) {
        u64 p = sv.smallest_prime_factor(n);
        u64 m = n, pe = 1;
        while (m % p == 0) {
            m /= p;
            pe *= p;
        }
        if (m == 1) {
            auto it = at_prime_powers.find(pe);
            if (it == at_prime_powers.end())
                throw std::invalid_argument("missing prime-power value at " + std::to_string(pe));
            fn.values[n] = it->second;
        } else {
            fn.values[n] = fn.values[pe] * fn.values[m];
        }
    }
    return fn;
}

// Builds the full prime-power value map for limit from lambda(p) alone.
template <class PrimeFn>
std::unordered_map<u64, double> prime_power_table(const SieveTables& sv, u64 limit,
                                                  PrimeFn&& lambda_at_prime) {
    std::unordered_map<u64, double> map;
    for (u64 p : sv.primes()) {
        if (p > limit) break;
        unsigned jmax = 0;
        u64 pe = 1;
        while (pe <= limit / p) {
            pe *= p;
            ++jmax;
        }
        auto seq = prime_power_values(lambda_at_prime(p), jmax);
        pe = 1;
        for (unsigned j = 1; j <= jmax; ++j) {
            pe *= p;
            map[pe] = seq[j];
        }
    }
    return map;
}

// Synthetic Hecke function: lambda(p) drawn uniformly from [-2,2] per prime
// (seeded, in ascending prime order, so tables are reproducible).
inline HeckeFn synthetic_hecke(const SieveTables& sv, u64 limit, u64 seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    std::unordered_map<u64, double> at_p;
    for (u64 p : sv.primes()) {
        if (p > limit) break;
        at_p[p] = unif(rng);
    }
    auto map = prime_power_table(sv, limit, [&](u64 p) { return at_p.at(p); });
    return hecke_extend_from_primes(sv, limit, map, "synthetic-" + std::to_string(seed));
}

// lambda = d (the divisor function): lambda(p) = 2, whence lambda(p^j) = j+1.
inline HeckeFn divisor_hecke(const SieveTables& sv, u64 limit) {
    auto map = prime_power_table(sv, limit, [](u64) { return 2.0; });
    return hecke_extend_from_primes(sv, limit, map, "divisor");
}

// The constant function 1 (not Hecke multiplicative; used for classical sums
// and for the lambda* = sqrt(d) identity).
inline HeckeFn one_fn(u64 limit) {
    HeckeFn fn;
    fn.label = "one";
    fn.values.assign(limit + 1, 1.0);
    return fn;
}

inline HeckeFn hecke_from_table(std::string label, std::vector<double> lambda_1_to_x) {
    HeckeFn fn;
    fn.label = std::move(label);
    fn.source = HeckeSource::Form;
    fn.values = std::move(lambda_1_to_x);
    if (fn.values.empty() || fn.values.size() < 2 || fn.values[1] != 1.0)
        throw std::invalid_argument("lambda table must start with lambda(1) = 1 at index 1");
    return fn;
}

// ---------------------------------------------------------------------------
// The two Hecke relations.

// (H1) right-hand side: sum_{d | gcd(m,n)} lambda(mn / d^2).
inline double hecke_product_formula(const HeckeFn& fn, const SieveTables& sv, u64 m, u64 n) {
    if (m < 1 || n < 1 || m * n > fn.limit())
        throw std::invalid_argument("hecke_product_formula needs mn <= limit");
    double s = 0;
    for (u64 d : sv.divisors(std::gcd(m, n))) s += fn(m * n / (d * d));
    return s;
}

// (H2) right-hand side: sum_{d | gcd(m,n)} mu(d) lambda(m/d) lambda(n/d).
inline double dual_formula(const HeckeFn& fn, const SieveTables& sv, u64 m, u64 n) {
    if (m < 1 || n < 1 || m * n > fn.limit())
        throw std::invalid_argument("dual_formula needs mn <= limit");
    double s = 0;
    for (u64 d : sv.divisors(std::gcd(m, n))) {
        int mu = sv.mobius(d);
        if (mu != 0) s += mu * fn(m / d) * fn(n / d);
    }
    return s;
}

struct RelationReport {
    u64 pairs_checked = 0;
    u64 failures = 0;
    double max_err = 0;  // worst |lhs-rhs| / (1+|lhs|+|rhs|)
    u64 worst_m = 0, worst_n = 0;
    bool ok() const { return failures == 0; }
};

// Checks (H1) and (H2) on `pairs` random pairs with mn <= limit.
inline RelationReport hecke_relation_check(const HeckeFn& fn, const SieveTables& sv, u64 pairs,
                                           u64 seed, double tol = 1e-9) {
    RelationReport rep;
    std::mt19937_64 rng(seed);
    u64 x = fn.limit();
    std::uniform_int_distribution<u64> pick_m(1, std::max<u64>(1, u64(std::sqrt(double(x)))));
    for (u64 i = 0; i < pairs; ++i) {
        u64 m = pick_m(rng);
        std::uniform_int_distribution<u64> pick_n(1, x / m);
        u64 n = pick_n(rng);
        double h1_lhs = fn(m) * fn(n);
        double h1_rhs = hecke_product_formula(fn, sv, m, n);
        double h2_lhs = fn(m * n);
        double h2_rhs = dual_formula(fn, sv, m, n);
        double e1 = std::abs(h1_lhs - h1_rhs) / (1.0 + std::abs(h1_lhs) + std::abs(h1_rhs));
        double e2 = std::abs(h2_lhs - h2_rhs) / (1.0 + std::abs(h2_lhs) + std::abs(h2_rhs));
        double e = std::max(e1, e2);
        ++rep.pairs_checked;
        if (e > rep.max_err) {
            rep.max_err = e;
            rep.worst_m = m;
            rep.worst_n = n;
        }
        if (e > tol) ++rep.failures;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// lambda* and its inequality suite.

// Divisor-sum sweep: for each d, add lambda(d)^2 to every multiple. O(X log X).
inline LambdaStar lambda_star(const HeckeFn& fn) {
    u64 x = fn.limit();
    LambdaStar star;
    star.values.assign(x + 1, 0.0);
    for (u64 d = 1; d <= x; ++d) {
        double s = fn.values[d] * fn.values[d];
        for (u64 m = d; m <= x; m += d) star.values[m] += s;
    }
    for (u64 n = 1; n <= x; ++n) star.values[n] = std::sqrt(star.values[n]);
    return star;
}

struct StarCheckReport {
    u64 pairs_checked = 0;
    u64 divisor_pairs = 0;   // pairs with m | n (property (c))
    u64 coprime_pairs = 0;   // pairs with gcd(m,n) = 1 (property (d))
    u64 failures = 0;
    char worst_property = '-';
    u64 worst_m = 0, worst_n = 0;
    double worst_margin = 0;  // most negative slack seen
    bool ok() const { return failures == 0; }
};

namespace detail {
// lhs <= rhs with additive slack tol * (1 + |rhs|).
inline bool le_slack(double lhs, double rhs, double tol) {
    return lhs <= rhs + tol * (1.0 + std::abs(rhs));
}
}  // namespace detail

// Verifies properties (a)-(g) of the header comment on random pairs with
// mn <= limit, plus dedicated divisor pairs for the monotonicity law (c).
inline StarCheckReport check_star_inequalities(const HeckeFn& fn, const LambdaStar& star,
                                               const SieveTables& sv, u64 pairs, u64 seed,
                                               double tol = 1e-9) {
    StarCheckReport rep;
    std::mt19937_64 rng(seed);
    u64 x = fn.limit();
    std::uniform_int_distribution<u64> pick_m(1, std::max<u64>(1, u64(std::sqrt(double(x)))));
    auto fail = [&](char prop, u64 m, u64 n, double margin) {
        ++rep.failures;
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_property = prop;
            rep.worst_m = m;
            rep.worst_n = n;
        }
    };
    auto check_le = [&](char prop, u64 m, u64 n, double lhs, double rhs) {
        if (!detail::le_slack(lhs, rhs, tol)) fail(prop, m, n, rhs - lhs);
    };
    for (u64 i = 0; i < pairs; ++i) {
        u64 m = pick_m(rng);
        std::uniform_int_distribution<u64> pick_n(1, x / m);
        u64 n = pick_n(rng);
        ++rep.pairs_checked;
        u64 g = std::gcd(m, n);
        check_le('a', m, n, 1.0, star(n));
        check_le('b', m, n, std::abs(fn(m)), star(m));
        if (n % m == 0) {
            ++rep.divisor_pairs;
            check_le('c', m, n, star(m), star(n));
        }
        if (g == 1) {
            ++rep.coprime_pairs;
            double lhs = star(m * n), rhs = star(m) * star(n);
            if (!approx_eq(lhs, rhs, tol)) fail('d', m, n, -std::abs(lhs - rhs));
        }
        check_le('e', m, n, std::abs(fn(m * n)), star(m) * star(n));
        check_le('f', m, n, star(m * n),
                 std::sqrt(double(sv.num_divisors(m)) * double(sv.num_divisors(n))) * star(m) *
                     star(n));
        check_le('g', m, n, std::abs(fn(m) * fn(n)),
                 std::sqrt(double(sv.num_divisors(g))) * star(m * n));
    }
    // Divisor pairs drawn on purpose: random (m,n) rarely satisfy m | n.
    for (u64 i = 0; i < pairs / 10 + 1; ++i) {
        std::uniform_int_distribution<u64> pick(1, x);
        u64 n = pick(rng);
        auto divs = sv.divisors(n);
        std::uniform_int_distribution<size_t> pick_d(0, divs.size() - 1);
        u64 m = divs[pick_d(rng)];
        ++rep.divisor_pairs;
        check_le('c', m, n, star(m), star(n));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Moments.

struct MomentSpec {
    enum Kind { LambdaSquared, LambdaPower2J, AbsLambda, DivisorStar4 } kind = LambdaSquared;
    unsigned j = 1;       // for LambdaPower2J: weight lambda^(2j)
    unsigned a = 1;       // for DivisorStar4: weight d(n)^a * lambda*(n)^4
    double log_power = 0; // exponent used in the normalized column
};

struct MomentResult {
    double sum = 0;
    double over_x = 0;        // sum / X
    double normalized = 0;    // sum / (X log^log_power X)
};

inline MomentResult moment_sum(const HeckeFn& fn, const MomentSpec& spec, u64 x,
                               const SieveTables* sv = nullptr, const LambdaStar* star = nullptr) {
    if (x < 2 || x > fn.limit()) throw std::invalid_argument("moment range outside table");
    if (spec.kind == MomentSpec::DivisorStar4 && (!sv || !star || x > star->limit()))
        throw std::invalid_argument("divisor-star moment needs sieve and lambda* tables");
    NeumaierSum acc;
    for (u64 n = 1; n <= x; ++n) {
        double l = fn(n);
        double w = 0;
        switch (spec.kind) {
            case MomentSpec::LambdaSquared: w = l * l; break;
            case MomentSpec::LambdaPower2J: {
                double l2 = l * l;
                w = 1.0;
                for (unsigned i = 0; i < spec.j; ++i) w *= l2;
                break;
            }
            case MomentSpec::AbsLambda: w = std::abs(l); break;
            case MomentSpec::DivisorStar4: {
                double d = double(sv->num_divisors(n));
                double da = 1.0;
                for (unsigned i = 0; i < spec.a; ++i) da *= d;
                double s = (*star)(n);
                w = da * s * s * s * s;
                break;
            }
        }
        acc.add(w);
    }
    MomentResult r;
    r.sum = acc.value();
    r.over_x = r.sum / double(x);
    r.normalized = r.sum / (double(x) * std::pow(std::log(double(x)), spec.log_power));
    return r;
}

// ---------------------------------------------------------------------------
// Prime sums and the minorant polynomial.

// f(x) = 0.01 + 0.09 (x^2 - 1) + 0.1 (x^4 - 2) - 0.05 (x^6 - 5); f(x) <= |x|
// for all real x, which turns the prime sums of lambda(p^j) into a lower
// bound for sum_p |lambda(p)|.
inline double minorant_value(double x) {
    double x2 = x * x, x4 = x2 * x2, x6 = x4 * x2;
    return 0.01 + 0.09 * (x2 - 1.0) + 0.1 * (x4 - 2.0) - 0.05 * (x6 - 5.0);
}

struct PrimeSums {
    double abs_log_sum = 0;           // sum_{p<=X} |lambda(p)| log p
    double abs_sum = 0;               // sum_{p<=X} |lambda(p)|
    double power_sum[9] = {0};        // power_sum[j] = sum_{p<=X} lambda(p^j), j = 1..8
    double minorant_sum = 0;          // sum_{p<=X} f(lambda(p))
    u64 prime_count = 0;
    bool minorant_below_abs = false;  // minorant_sum <= abs_sum
};

// lambda(p^j) is generated by the forced recursion from the tabulated
// lambda(p), so j can exceed the table range.
inline PrimeSums prime_sums(const HeckeFn& fn, const SieveTables& sv, u64 x) {
    if (x < 2 || x > fn.limit()) throw std::invalid_argument("prime sum range outside table");
    PrimeSums out;
    NeumaierSum s_abslog, s_abs, s_minorant, s_pow[9];
    for (u64 p : sv.primes()) {
        if (p > x) break;
        ++out.prime_count;
        double lp = fn(p);
        s_abs.add(std::abs(lp));
        s_abslog.add(std::abs(lp) * std::log(double(p)));
        s_minorant.add(minorant_value(lp));
        auto seq = prime_power_values(lp, 8);
        for (int j = 1; j <= 8; ++j) s_pow[j].add(seq[unsigned(j)]);
    }
    out.abs_log_sum = s_abslog.value();
    out.abs_sum = s_abs.value();
    out.minorant_sum = s_minorant.value();
    for (int j = 1; j <= 8; ++j) out.power_sum[j] = s_pow[j].value();
    out.minorant_below_abs = out.minorant_sum <= out.abs_sum + 1e-9 * (1.0 + std::abs(out.abs_sum));
    return out;
}

struct MinorantCertificate {
    bool grid_ok = false;       // f(x) <= |x| on the sampled grid
    bool tail_ok = false;       // degree-6 domination certificate for |x| >= 3
    double max_violation = 0;   // max over grid of f(x) - |x| (expected < 0)
    double tail_margin = 0;
    bool ok() const { return grid_ok && tail_ok; }
};

// Grid check of f(x) <= |x| on [-B, B] plus the closed-form tail argument:
// for |x| >= 3,  f(x) = -0.05 x^6 + 0.1 x^4 + 0.09 x^2 - 0.03
//              <= (0.1 - 0.05 * 9) x^4 + 0.09 x^2 - 0.03
//              <= (0.09 - 0.35 * 9) x^2 - 0.03  <  0 <= |x|.
inline MinorantCertificate minorant_check(double b, double step) {
    if (b < 3.0 || step <= 0) throw std::invalid_argument("minorant grid needs B >= 3, step > 0");
    MinorantCertificate cert;
    cert.max_violation = -1e300;
    cert.grid_ok = true;
    for (double x = -b; x <= b + step / 2; x += step) {
        double v = minorant_value(x) - std::abs(x);
        if (v > cert.max_violation) cert.max_violation = v;
        if (v > 0) cert.grid_ok = false;
    }
    double c4 = 0.1 - 0.05 * 9.0;    // x^6 coefficient absorbed at |x| >= 3
    double c2 = 0.09 + c4 * 9.0;     // then the x^4 term absorbed likewise
    cert.tail_margin = -c2;          // f <= c2 x^2 - 0.03 with c2 < 0
    cert.tail_ok = c4 < 0 && c2 < 0;
    return cert;
}

}  // namespace heckelab
