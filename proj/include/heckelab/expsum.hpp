#pragma once
// Finite exponential sums with Hecke coefficients:
//
//   linear    sum_{n<=X} lambda(n) e(n alpha)
//   moebius   sum_{n<=X} mu(n) lambda(n) e(n alpha)
//   prime     sum_{p<=X} lambda(p) e(p alpha), optionally weighted by log p
//   twisted-N sum_{n<=X} lambda(Nn) e(n alpha)
//   square-A  sum_{n<=T} lambda(A n^2) e(n alpha)
//
// plus the exact structural identities tying them together (square-sum
// Moebius inversion, the squarefree-twist expansion) and the discrete
// Parseval equality.
//
// Every sum is evaluated over fixed 2^16-term blocks combined along a fixed
// binary tree (see numeric.hpp), with a fresh phase stream per block and
// compensated accumulation inside blocks.  Results are therefore bitwise
// identical for a given input no matter how many worker threads run, and a
// sum over (0, X] equals the sum over (0, X/2] plus the sum over (X/2, X]
// bitwise whenever the split point is block-aligned.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "heckelab/common.hpp"
#include "heckelab/hecke.hpp"
#include "heckelab/numeric.hpp"
#include "heckelab/sieves.hpp"

namespace heckelab {

struct ExpSumResult {
    cplx value{0.0, 0.0};
    u64 x = 0;             // range bound
    double alpha = 0;      // canonical representative in [0,1)
    std::string variant;   // linear | moebius | prime | prime-log | twisted-N | square-A
    u64 terms = 0;         // nonzero coefficients actually summed
    double abs_sum = 0;    // sum of |coefficients|

    // |value| <= abs_sum up to accumulation rounding.
    bool triangle_ok() const {
        return std::abs(value) <= abs_sum + 1e-9 * (1.0 + abs_sum);
    }
};

namespace detail {

struct LeafSum {
    cplx value{0.0, 0.0};
    double abs = 0;
    u64 terms = 0;
    LeafSum operator+(const LeafSum& o) const {
        return {value + o.value, abs + o.abs, terms + o.terms};
    }
};

inline double alpha_in_unit(double alpha) {
    double a = canonical_alpha(alpha);
    return a < 0 ? a + 1.0 : a;
}

inline ExpSumResult finish(LeafSum total, u64 x, double alpha, std::string variant) {
    ExpSumResult r;
    r.value = total.value;
    r.x = x;
    r.alpha = alpha_in_unit(alpha);
    r.variant = std::move(variant);
    r.terms = total.terms;
    r.abs_sum = total.abs;
    if (!r.triangle_ok())
        throw std::logic_error("exponential sum exceeded its triangle bound: " + r.variant);
    return r;
}

}  // namespace detail

// Core evaluator: sum_{n<=X} coeff(n) e((stride*n) alpha).  coeff(n) == 0
// skips the multiply but still advances the phase.
template <class CoeffFn>
ExpSumResult dense_exp_sum(u64 x, double alpha, CoeffFn&& coeff, std::string variant,
                           const BlockOptions& opt = {}, i64 phase_stride = 1) {
    if (x < 1) throw std::invalid_argument("exponential sum needs X >= 1");
    auto leaf = [&](i64 lo, i64 hi) {
        PhaseStream ps(phase_stride * (lo + 1), alpha, phase_stride);
        NeumaierCplx val;
        NeumaierSum abs;
        u64 terms = 0;
        for (i64 n = lo + 1; n <= hi; ++n, ps.advance()) {
            double c = coeff(u64(n));
            if (c != 0.0) {
                val.add(c * ps.current());
                abs.add(std::abs(c));
                ++terms;
            }
        }
        return detail::LeafSum{val.value(), abs.value(), terms};
    };
    auto total = block_tree_sum<detail::LeafSum>(i64(x), opt, leaf);
    return detail::finish(total, x, alpha, std::move(variant));
}

inline ExpSumResult linear_sum(const HeckeFn& fn, u64 x, double alpha,
                               const BlockOptions& opt = {}) {
    if (x > fn.limit()) throw std::invalid_argument("linear_sum range outside table");
    return dense_exp_sum(
        x, alpha, [&](u64 n) { return fn.values[n]; }, "linear", opt);
}

inline ExpSumResult moebius_sum(const HeckeFn& fn, const SieveTables& sv, u64 x, double alpha,
                                const BlockOptions& opt = {}) {
    if (x > fn.limit() || x > sv.limit())
        throw std::invalid_argument("moebius_sum range outside tables");
    return dense_exp_sum(
        x, alpha, [&](u64 n) { return double(sv.mobius(n)) * fn.values[n]; }, "moebius", opt);
}

// Sum over primes only; points are sparse, so phases come from per-point
// argument reduction instead of a stream.  Blocks and the reduction tree are
// the same as in the dense case, so determinism guarantees carry over.
inline ExpSumResult prime_sum(const HeckeFn& fn, const SieveTables& sv, u64 x, double alpha,
                              bool log_weighted = false, const BlockOptions& opt = {}) {
    if (x < 1 || x > fn.limit() || x > sv.limit())
        throw std::invalid_argument("prime_sum range outside tables");
    double a = canonical_alpha(alpha);
    const auto& primes = sv.primes();
    auto leaf = [&](i64 lo, i64 hi) {
        NeumaierCplx val;
        NeumaierSum abs;
        u64 terms = 0;
        auto it = std::upper_bound(primes.begin(), primes.end(), u64(lo));
        for (; it != primes.end() && *it <= u64(hi); ++it) {
            u64 p = *it;
            double c = fn.values[p];
            if (log_weighted) c *= std::log(double(p));
            if (c != 0.0) {
                val.add(c * unit_phase(reduced_mod1(i64(p), a)));
                abs.add(std::abs(c));
                ++terms;
            }
        }
        return detail::LeafSum{val.value(), abs.value(), terms};
    };
    auto total = block_tree_sum<detail::LeafSum>(i64(x), opt, leaf);
    return detail::finish(total, x, alpha, log_weighted ? "prime-log" : "prime");
}

struct TwistedSum {
    ExpSumResult sum;
    // Comparison magnitude sqrt(X) log(2X) d(N)^(1/2) lambda*(N) used when
    // fitting Type I sums; reported, never asserted.
    double comparison = 0;
};

inline TwistedSum twisted_linear_sum(const HeckeFn& fn, const LambdaStar& star,
                                     const SieveTables& sv, u64 big_n, u64 x, double alpha,
                                     const BlockOptions& opt = {}) {
    if (big_n < 1 || x < 1) throw std::invalid_argument("twisted_linear_sum needs N, X >= 1");
    if (i128(big_n) * x > i128(fn.limit()))
        throw std::invalid_argument("twisted_linear_sum needs N*X within table");
    if (big_n > star.limit() || big_n > sv.limit())
        throw std::invalid_argument("twisted_linear_sum twist outside tables");
    TwistedSum out;
    out.sum = dense_exp_sum(
        x, alpha, [&](u64 n) { return fn.values[big_n * n]; },
        "twisted-" + std::to_string(big_n), opt);
    out.comparison = std::sqrt(double(x)) * std::log(2.0 * double(x)) *
                     std::sqrt(double(sv.num_divisors(big_n))) * star(big_n);
    return out;
}

inline ExpSumResult square_sum(const HeckeFn& fn, u64 t, u64 a, double alpha,
                               const BlockOptions& opt = {}) {
    if (a < 1 || t < 1) throw std::invalid_argument("square_sum needs A, T >= 1");
    if (i128(a) * t * t > i128(fn.limit()))
        throw std::invalid_argument("square_sum needs A*T^2 within table");
    return dense_exp_sum(
        t, alpha, [&](u64 n) { return fn.values[a * n * n]; }, "square-" + std::to_string(a),
        opt);
}

// ---------------------------------------------------------------------------
// Exact identities, each evaluated on both sides by independent routes.

struct IdentityReport {
    cplx lhs{0.0, 0.0};
    cplx rhs{0.0, 0.0};
    double abs_diff = 0;
    double tol = 0;
    bool ok = false;
};

// Moebius inversion across square scalings:
//   sum_{n<=T} lambda(n^2) e(n alpha)
//     = sum_{r^2<=T} mu(r) M(floor(T/r^2), r^2 alpha),
//   M(Y, beta) = sum_{n<=Y} ( sum_{n = m d^2} lambda(m^2) ) e(n beta).
// The right side is evaluated with the phase index scaled by r^2 so both
// sides use the same argument-reduction path.
inline IdentityReport verify_square_inversion(const HeckeFn& fn, const SieveTables& sv, u64 t,
                                              double alpha, const BlockOptions& opt = {}) {
    if (t < 1 || i128(t) * t > i128(fn.limit()))
        throw std::invalid_argument("square inversion needs T^2 within table");
    IdentityReport rep;
    rep.lhs = square_sum(fn, t, 1, alpha, opt).value;
    NeumaierCplx rhs;
    for (u64 r = 1; r * r <= t; ++r) {
        int mu = sv.mobius(r);
        if (mu == 0) continue;
        u64 y = t / (r * r);
        auto inner = dense_exp_sum(
            y, alpha,
            [&](u64 n) {
                double b = 0;
                for (u64 d = 1; d * d <= n; ++d)
                    if (n % (d * d) == 0) {
                        u64 m = n / (d * d);
                        b += fn.values[m * m];
                    }
                return b;
            },
            "square-inversion-inner", opt, i64(r * r));
        rhs.add(double(mu) * inner.value);
    }
    rep.rhs = rhs.value();
    rep.abs_diff = std::abs(rep.lhs - rep.rhs);
    rep.tol = 1e-8 * (1.0 + std::abs(rep.lhs));
    rep.ok = rep.abs_diff <= rep.tol;
    return rep;
}

// Squarefree-twist expansion:
//   S(T, A, alpha) = sum_{l | A} mu(l) lambda(A/l) S(floor(T/l), l, l*alpha)
// for squarefree A, where S(T, A, alpha) = sum_{n<=T} lambda(A n^2) e(n alpha).
// Follows from lambda(p n^2) = lambda(p) lambda(n^2) - [p | n] lambda(p (n/p)^2)
// one prime at a time.
inline IdentityReport verify_square_twist(const HeckeFn& fn, const SieveTables& sv, u64 t, u64 a,
                                          double alpha, const BlockOptions& opt = {}) {
    if (a < 1 || sv.mobius(a) == 0)
        throw std::invalid_argument("square twist expansion needs squarefree A");
    IdentityReport rep;
    rep.lhs = square_sum(fn, t, a, alpha, opt).value;
    NeumaierCplx rhs;
    for (u64 l : sv.divisors(a)) {
        u64 inner_t = t / l;
        if (inner_t < 1) continue;
        auto inner = dense_exp_sum(
            inner_t, alpha, [&](u64 n) { return fn.values[l * n * n]; },
            "square-twist-inner", opt, i64(l));
        rhs.add(double(sv.mobius(l)) * fn.values[a / l] * inner.value);
    }
    rep.rhs = rhs.value();
    rep.abs_diff = std::abs(rep.lhs - rep.rhs);
    rep.tol = 1e-8 * (1.0 + std::abs(rep.lhs));
    rep.ok = rep.abs_diff <= rep.tol;
    return rep;
}

// Discrete Parseval: for c supported on 1..X and any R >= X+1,
//   (1/R) sum_{j=0}^{R-1} | sum_{n<=X} c(n) e(nj/R) |^2 = sum_{n<=X} |c(n)|^2.
// Phases are exact roots of unity, so this is a finite-Fourier identity.
struct ParsevalReport {
    double mean_square = 0;   // left side
    double coeff_energy = 0;  // right side
    double rel_err = 0;
    bool ok = false;
};

inline ParsevalReport parseval_check(const std::vector<double>& c, i64 r_samples) {
    i64 x = i64(c.size());
    if (r_samples < x + 1)
        throw std::invalid_argument("parseval check needs sampling count R >= X+1");
    RootTable rt(r_samples);
    NeumaierSum lhs;
    for (i64 j = 0; j < r_samples; ++j) {
        NeumaierCplx f;
        for (i64 n = 1; n <= x; ++n) {
            double cn = c[size_t(n - 1)];
            if (cn != 0.0) f.add(cn * rt.phase(n, j));
        }
        lhs.add(std::norm(f.value()));
    }
    ParsevalReport rep;
    rep.mean_square = lhs.value() / double(r_samples);
    NeumaierSum rhs;
    for (double cn : c) rhs.add(cn * cn);
    rep.coeff_energy = rhs.value();
    rep.rel_err = std::abs(rep.mean_square - rep.coeff_energy) /
                  std::max(rep.coeff_energy, 1e-300);
    rep.ok = rep.rel_err <= 1e-6;
    return rep;
}

// ---------------------------------------------------------------------------
// Decay profiles.

enum class SumVariant { Linear, Moebius, Prime, PrimeLog };

inline ExpSumResult evaluate_variant(SumVariant v, const HeckeFn& fn, const SieveTables& sv,
                                     u64 x, double alpha, const BlockOptions& opt = {}) {
    switch (v) {
        case SumVariant::Linear: return linear_sum(fn, x, alpha, opt);
        case SumVariant::Moebius: return moebius_sum(fn, sv, x, alpha, opt);
        case SumVariant::Prime: return prime_sum(fn, sv, x, alpha, false, opt);
        case SumVariant::PrimeLog: return prime_sum(fn, sv, x, alpha, true, opt);
    }
    throw std::invalid_argument("unknown sum variant");
}

inline SumVariant variant_from_name(const std::string& name) {
    if (name == "linear") return SumVariant::Linear;
    if (name == "moebius") return SumVariant::Moebius;
    if (name == "prime") return SumVariant::Prime;
    if (name == "prime-log") return SumVariant::PrimeLog;
    throw std::invalid_argument("unknown sum variant: " + name);
}

struct DecayRow {
    u64 x = 0;
    double abs_value = 0;
    double over_x = 0;       // |value| / X
    double normalized = 0;   // |value| / (X exp(-c0 sqrt(log X)))
};

// Measures |sum| along a grid of ranges; reports the savings against X and
// against X exp(-c0 sqrt(log X)).  Measurement only: nothing is asserted
// about the true decay rate.
inline std::vector<DecayRow> decay_profile(SumVariant v, const HeckeFn& fn, const SieveTables& sv,
                                           const std::vector<u64>& xs, double alpha, double c0,
                                           const BlockOptions& opt = {}) {
    std::vector<DecayRow> rows;
    rows.reserve(xs.size());
    for (u64 x : xs) {
        DecayRow row;
        row.x = x;
        row.abs_value = std::abs(evaluate_variant(v, fn, sv, x, alpha, opt).value);
        row.over_x = row.abs_value / double(x);
        row.normalized =
            row.abs_value / (double(x) * std::exp(-c0 * std::sqrt(std::log(double(x)))));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace heckelab
