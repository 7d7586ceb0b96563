#pragma once
// Mu-splitting machinery: the two-parameter identity for mu(m), the induced
// decomposition of twisted Moebius sums into boundary, type I, and type II
// pieces, the beta coefficients, and the bilinear block sums.
//
// Two variants of the type I piece are kept: the restricted one (inner index
// kept above max(y, z)) reconstructs the direct sum exactly, and the
// unrestricted one differs by a short sum over n <= max(y, z) that is
// computed independently and matched against the observed residual.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "heckelab/common.hpp"
#include "heckelab/diophantine.hpp"
#include "heckelab/expsum.hpp"
#include "heckelab/hecke.hpp"
#include "heckelab/numeric.hpp"
#include "heckelab/sieves.hpp"

namespace heckelab {

struct VaughanParams {
    double y = 2;
    double z = 2;
};

inline VaughanParams vaughan_auto_params(double x) {
    if (x < 32) throw std::invalid_argument("auto parameters need X >= 32");
    double v = std::pow(x, 0.2);
    return {v, v};
}

// ---------------------------------------------------------------------------
// The identity itself, checked in exact integers.

struct IdentitySplit {
    i64 mu = 0;  // mu(m)
    i64 s1 = 0;  // sum over bc | m, b <= y, c <= z of mu(b) mu(c)
    i64 s2 = 0;  // sum over bc | m, b > y, c > z of mu(b) mu(c)
    bool ok = false;
};

// mu(m) = -s1 + s2 for every m > max(y, z).
inline IdentitySplit vaughan_identity_check(const SieveTables& sv, u64 m, double y, double z) {
    if (y < 1 || z < 1) throw std::invalid_argument("need y >= 1 and z >= 1");
    if (double(m) <= std::max(y, z))
        throw std::invalid_argument("identity requires m > max(y, z)");
    IdentitySplit out;
    out.mu = sv.mobius(m);
    for (u64 d : sv.divisors(m)) {
        for (u64 b : sv.divisors(d)) {
            u64 c = d / b;
            i64 term = i64(sv.mobius(b)) * sv.mobius(c);
            if (term == 0) continue;
            if (double(b) <= y && double(c) <= z) out.s1 += term;
            if (double(b) > y && double(c) > z) out.s2 += term;
        }
    }
    out.ok = out.mu == -out.s1 + out.s2;
    return out;
}

// ---------------------------------------------------------------------------
// Beta coefficients: beta_l = sum over b | l, b > y of mu(b).

inline i64 beta_coeff(const SieveTables& sv, u64 l, double y) {
    if (l < 1) throw std::invalid_argument("need l >= 1");
    i64 beta = 0;
    for (u64 b : sv.divisors(l))
        if (double(b) > y) beta += sv.mobius(b);
    if (std::abs(beta) > i64(sv.num_divisors(l)))
        throw std::logic_error("beta coefficient exceeded the divisor bound");
    return beta;
}

// beta_l for l in the dyadic range (L, 2L].
inline std::vector<i64> beta_range(const SieveTables& sv, u64 big_l, double y) {
    if (2 * big_l > sv.limit()) throw std::invalid_argument("beta range exceeds sieve limit");
    std::vector<i64> out;
    out.reserve(big_l);
    for (u64 l = big_l + 1; l <= 2 * big_l; ++l) out.push_back(beta_coeff(sv, l, y));
    return out;
}

struct BetaMoment {
    u64 big_l = 0;
    double sum_sq = 0;      // sum over l ~ L of beta_l^2
    double normalized = 0;  // sum_sq / (L log^3 2L)
};

inline BetaMoment beta_moment(const SieveTables& sv, u64 big_l, double y) {
    BetaMoment out;
    out.big_l = big_l;
    NeumaierSum acc;
    for (i64 b : beta_range(sv, big_l, y)) acc.add(double(b) * double(b));
    out.sum_sq = acc.value();
    double lg = std::log(2.0 * double(big_l));
    out.normalized = out.sum_sq / (double(big_l) * lg * lg * lg);
    return out;
}

// ---------------------------------------------------------------------------
// Type I piece.

struct Type1Report {
    cplx value{0, 0};
    double abs_sum = 0;      // sum over (b, c) of |inner sum|
    u64 pairs = 0;           // (b, c) pairs with mu(b) mu(c) != 0
    double comparison = 0;   // (X y z)^{1/2 + eps}
    bool restricted = true;  // inner index kept above max(y, z)
};

// sum over b <= y, c <= z of mu(b) mu(c) sum over k of lambda(kbc) e(kbc alpha),
// with kbc <= X and (if restricted) kbc > max(y, z).
inline Type1Report type1_sum(const HeckeFn& fn, const SieveTables& sv, u64 x, double alpha,
                             double y, double z, bool restricted = true,
                             const BlockOptions& opt = {}, double eps = 0.05) {
    if (y < 1 || z < 1) throw std::invalid_argument("need y >= 1 and z >= 1");
    if (x > fn.limit() || x > sv.limit())
        throw std::invalid_argument("type I range exceeds table limits");
    double w = std::max(y, z);
    Type1Report out;
    out.restricted = restricted;
    out.comparison = std::pow(double(x) * y * z, 0.5 + eps);
    NeumaierCplx acc;
    NeumaierSum abs_acc;
    for (u64 b = 1; double(b) <= y; ++b) {
        if (sv.mobius(b) == 0) continue;
        for (u64 c = 1; double(c) <= z; ++c) {
            if (sv.mobius(c) == 0) continue;
            u64 bc = b * c;
            u64 kmax = x / bc;
            if (kmax == 0) continue;
            u64 kmin = restricted ? u64(std::floor(w / double(bc))) + 1 : 1;
            if (kmin > kmax) continue;
            double sign = double(sv.mobius(b) * sv.mobius(c));
            auto part = dense_exp_sum(
                kmax, alpha,
                [&](u64 k) { return k < kmin ? 0.0 : fn(k * bc); },
                "type1-part", opt, i64(bc));
            acc.add(sign * part.value);
            abs_acc.add(std::abs(part.value));
            ++out.pairs;
        }
    }
    out.value = acc.value();
    out.abs_sum = abs_acc.value();
    return out;
}

// ---------------------------------------------------------------------------
// Full decomposition.

struct VaughanDecomposition {
    cplx t_direct{0, 0};   // sum_{n <= X} mu(n) lambda(n) e(n alpha)
    cplx boundary{0, 0};   // the n <= max(y, z) part, summed directly
    cplx t1{0, 0};         // restricted type I piece
    cplx t2{0, 0};         // type II piece (its index restriction is vacuous)
    cplx t1_unrestricted{0, 0};
    cplx spurious{0, 0};   // exact value of t1_unrestricted - t1
    double residual = 0;   // |t_direct - (boundary - t1 + t2)|
    double residual_unrestricted = 0;
    double spurious_gap = 0;  // residual of the unrestricted route after
                              // adding back the spurious short sum
    bool ok = false;          // residual <= 1e-8 (1 + |t_direct|)
    double y = 0, z = 0;
    u64 x = 0;
};

inline VaughanDecomposition vaughan_decompose(const HeckeFn& fn, const SieveTables& sv, u64 x,
                                              double alpha, double y, double z,
                                              const BlockOptions& opt = {}) {
    if (y < 1 || z < 1) throw std::invalid_argument("need y >= 1 and z >= 1");
    if (x > fn.limit() || x > sv.limit())
        throw std::invalid_argument("decomposition range exceeds table limits");
    double w = std::max(y, z);
    VaughanDecomposition out;
    out.x = x;
    out.y = y;
    out.z = z;
    out.t_direct = moebius_sum(fn, sv, x, alpha, opt).value;

    u64 wfloor = std::min(x, u64(std::floor(w)));
    if (wfloor >= 1)
        out.boundary = dense_exp_sum(
                           wfloor, alpha,
                           [&](u64 n) { return double(sv.mobius(n)) * fn(n); },
                           "boundary", opt)
                           .value;

    out.t1 = type1_sum(fn, sv, x, alpha, y, z, true, opt).value;
    out.t1_unrestricted = type1_sum(fn, sv, x, alpha, y, z, false, opt).value;

    // Type II: b > y, c > z, bc <= X.  Here kbc >= bc > yz >= max(y, z), so
    // the index restriction holds automatically.
    NeumaierCplx t2_acc;
    u64 b0 = u64(std::floor(y)) + 1;  // floor(y) + 1 > y for every y >= 1
    u64 c0 = u64(std::floor(z)) + 1;
    for (u64 b = b0; b * c0 <= x; ++b) {
        if (sv.mobius(b) == 0) continue;
        u64 cmax = x / b;
        for (u64 c = c0; c <= cmax; ++c) {
            if (sv.mobius(c) == 0) continue;
            u64 bc = b * c;
            double sign = double(sv.mobius(b) * sv.mobius(c));
            auto part = dense_exp_sum(
                x / bc, alpha, [&](u64 k) { return fn(k * bc); }, "type2-part", opt, i64(bc));
            t2_acc.add(sign * part.value);
        }
    }
    out.t2 = t2_acc.value();

    // The unrestricted type I picks up exactly the terms n = kbc <= max(y,z);
    // recompute that short sum independently.
    NeumaierCplx spur;
    for (u64 n = 1; n <= wfloor; ++n) {
        i64 c1 = 0;
        for (u64 b : sv.divisors(n)) {
            if (double(b) > y || sv.mobius(b) == 0) continue;
            for (u64 c : sv.divisors(n / b)) {
                if (double(c) > z) continue;
                c1 += i64(sv.mobius(b)) * sv.mobius(c);
            }
        }
        if (c1 != 0) spur.add(double(c1) * fn(n) * unit_phase(reduced_mod1(i64(n), alpha)));
    }
    out.spurious = spur.value();

    cplx recon = out.boundary - out.t1 + out.t2;
    cplx recon_un = out.boundary - out.t1_unrestricted + out.t2;
    out.residual = std::abs(out.t_direct - recon);
    out.residual_unrestricted = std::abs(out.t_direct - recon_un);
    out.spurious_gap = std::abs(out.t_direct - recon_un - out.spurious);
    out.ok = out.residual <= 1e-8 * (1.0 + std::abs(out.t_direct));
    return out;
}

// ---------------------------------------------------------------------------
// Bilinear block sums.

struct BilinearBlock {
    double a_value = 0;     // definition route: sum over l ~ L of |inner(l)|^2
    double a_expanded = 0;  // expanded double-sum route
    double diag = 0;        // c1 = c2 part of the expansion
    cplx offdiag{0, 0};
    double rel_gap = 0;  // |a_value - a_expanded| / (1 + a_value)
    bool ok = false;     // rel_gap <= 1e-8
    cplx t2_block{0, 0};  // sum over l ~ L of beta_l inner(l)
    double beta_sq_sum = 0;
    bool cauchy_schwarz_ok = false;
    u64 truncated_pairs = 0;  // (c, l) pairs dropped by the cl <= X constraint
    u64 q_used = 0;           // Dirichlet denominator entering the comparison
    double trivial_bound = 0;    // C^2 L log^2(2CL)
    double theorem_shape = 0;    // (C^{3/2} L + C^2 L / sqrt(q) + C^{3/2} sqrt(Lq)) log^2(2CL)
    double power_saving_shape = 0;  // C^2 L^{5/6} (CL)^{0.05}
    double ratio_trivial = 0;
    double ratio_theorem = 0;
};

// A(C, L, alpha) = sum over l in (L, 2L] of
//   | sum over c in (C, 2C], cl <= X, of mu(c) lambda(cl) e(cl alpha) |^2,
// evaluated both from the definition and by expanding the square.  The
// Cauchy-Schwarz bound |sum beta_l inner(l)|^2 <= (sum beta_l^2) A is
// asserted on every call.
inline BilinearBlock bilinear_block(const HeckeFn& fn, const SieveTables& sv, u64 big_c,
                                    u64 big_l, double alpha, u64 x, double y) {
    if (big_c < 1 || big_l < 1) throw std::invalid_argument("need C >= 1 and L >= 1");
    if (checked_mul(checked_mul(i128(4), i128(big_c)), i128(big_l)) > i128(fn.limit()) ||
        4 * big_c * big_l > sv.limit())
        throw std::invalid_argument("bilinear block exceeds table limits");
    BilinearBlock out;

    // Definition route; inner sums are reused for the type II block.
    NeumaierSum a_acc;
    NeumaierCplx t2_acc;
    NeumaierSum beta_acc;
    for (u64 l = big_l + 1; l <= 2 * big_l; ++l) {
        NeumaierCplx inner;
        for (u64 c = big_c + 1; c <= 2 * big_c; ++c) {
            if (sv.mobius(c) == 0) continue;
            u64 cl = c * l;
            if (cl > x) {
                ++out.truncated_pairs;
                continue;
            }
            inner.add(double(sv.mobius(c)) * fn(cl) * unit_phase(reduced_mod1(i64(cl), alpha)));
        }
        cplx v = inner.value();
        a_acc.add(std::norm(v));
        double beta = double(beta_coeff(sv, l, y));
        t2_acc.add(beta * v);
        beta_acc.add(beta * beta);
    }
    out.a_value = a_acc.value();
    out.t2_block = t2_acc.value();
    out.beta_sq_sum = beta_acc.value();

    // Expanded route: diagonal plus conjugate-symmetric off-diagonal pairs.
    NeumaierSum diag_acc;
    NeumaierCplx off_acc;
    for (u64 c1 = big_c + 1; c1 <= 2 * big_c; ++c1) {
        if (sv.mobius(c1) == 0) continue;
        for (u64 l = big_l + 1; l <= 2 * big_l; ++l)
            if (c1 * l <= x) diag_acc.add(fn(c1 * l) * fn(c1 * l));
        for (u64 c2 = c1 + 1; c2 <= 2 * big_c; ++c2) {
            if (sv.mobius(c2) == 0) continue;
            double sign = double(sv.mobius(c1) * sv.mobius(c2));
            // e(alpha (c1 - c2) l) with c1 < c2: phase index (c1 - c2) l < 0.
            NeumaierCplx cross;
            for (u64 l = big_l + 1; l <= 2 * big_l; ++l) {
                if (c1 * l > x || c2 * l > x) continue;
                cross.add(fn(c1 * l) * fn(c2 * l) *
                          unit_phase(reduced_mod1(-i64(c2 - c1) * i64(l), alpha)));
            }
            // Adding z + conj(z) keeps the expansion exactly real.
            cplx z = sign * cross.value();
            off_acc.add(z + std::conj(z));
        }
    }
    out.diag = diag_acc.value();
    out.offdiag = off_acc.value();
    out.a_expanded = out.diag + out.offdiag.real();
    out.rel_gap = std::abs(out.a_value - out.a_expanded) / (1.0 + std::abs(out.a_value));
    out.ok = out.rel_gap <= 1e-8;

    double cs_rhs = out.beta_sq_sum * out.a_value;
    out.cauchy_schwarz_ok = std::norm(out.t2_block) <= cs_rhs + 1e-9 * (1.0 + cs_rhs);
    if (!out.cauchy_schwarz_ok)
        throw std::logic_error("Cauchy-Schwarz failed on a bilinear block");

    double n_total = 4.0 * double(big_c) * double(big_l);
    out.q_used = dirichlet_approx(alpha, std::min(n_total, 1e7)).q;
    double cc = double(big_c), ll = double(big_l), qq = double(out.q_used);
    double lg = std::log(2.0 * cc * ll);
    out.trivial_bound = cc * cc * ll * lg * lg;
    out.theorem_shape =
        (std::pow(cc, 1.5) * ll + cc * cc * ll / std::sqrt(qq) + std::pow(cc, 1.5) * std::sqrt(ll * qq)) *
        lg * lg;
    out.power_saving_shape = cc * cc * std::pow(ll, 5.0 / 6.0) * std::pow(cc * ll, 0.05);
    out.ratio_trivial = out.a_value / out.trivial_bound;
    out.ratio_theorem = out.a_value / out.theorem_shape;
    return out;
}

}  // namespace heckelab
