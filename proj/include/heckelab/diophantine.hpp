#pragma once
// Continued fractions, Dirichlet approximation, major/minor arc labels, and
// the min(N, 1/||alpha m||) sum bound.
//
// A double is an exact dyadic rational, so continued fractions run as exact
// integer Euclid on its mantissa.  The expansion of the underlying real and
// of its double image agree only while q_k^2 stays below 1/ulp(alpha);
// emission stops there (or at an exact termination, or at `depth`).

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "heckelab/common.hpp"
#include "heckelab/numeric.hpp"

namespace heckelab {

struct Convergent {
    i64 a = 0;   // numerator (may be negative for alpha < 0)
    u64 q = 1;   // denominator
    double value() const { return double(a) / double(q); }
};

struct RationalApprox {
    i64 a = 0;
    u64 q = 1;
    double err = 0;    // |alpha - a/q|
    double bound = 0;  // the Q used
};

enum class ArcKind { Major, Minor };

struct ArcLabel {
    ArcKind kind = ArcKind::Major;
    RationalApprox approx;
    double c1 = 1.0;
    double big_q = 0;      // Q = X exp(-(c1/3) sqrt(log X))
    double threshold = 0;  // exp((c1/3) sqrt(log X)) = X / Q
};

// Distance to the nearest integer.  Exactly even and 1-periodic for inputs
// where x + 1 is representable.
inline double norm_distance(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("norm distance needs finite input");
    return std::abs(x - std::nearbyint(x));
}

// ||m * alpha|| with the product reduced in double-double, so the result is
// accurate even when m * alpha is far outside [0,1).
inline double norm_distance_scaled(i64 m, double alpha) {
    return std::abs(reduced_mod1(m, alpha));
}

// ---------------------------------------------------------------------------
// Continued fractions.

namespace detail {

// Convergents of num/den (den > 0) by integer Euclid, at most `depth` of
// them, with an optional emission cap on q_k (0 = none).
inline std::vector<Convergent> cf_from_ratio(i128 num, i128 den, int depth, double q_cap) {
    std::vector<Convergent> out;
    // Recurrence seeds: (p_{-2}, p_{-1}) = (0, 1), (q_{-2}, q_{-1}) = (1, 0),
    // then p_k = a_k p_{k-1} + p_{k-2} after absorbing partial quotient a_k.
    i128 p_prev2 = 0, p_prev1 = 1;
    i128 q_prev2 = 1, q_prev1 = 0;
    while (den != 0 && int(out.size()) < depth) {
        i128 ak = num / den;
        i128 rem = num % den;
        if (rem < 0) {  // floor division for a possibly negative lead term
            ak -= 1;
            rem += den;
        }
        i128 p = ak * p_prev1 + p_prev2;
        i128 q = ak * q_prev1 + q_prev2;
        p_prev2 = p_prev1;
        q_prev2 = q_prev1;
        p_prev1 = p;
        q_prev1 = q;
        num = den;
        den = rem;
        if (q_cap > 0 && to_double(q) * to_double(q) > q_cap && !out.empty())
            break;  // beyond this point the double's own expansion is noise
        out.push_back({i64(p), u64(q)});
    }
    return out;
}

}  // namespace detail

// Convergents a_k/q_k of an exact rational; terminates at the fraction
// itself.
inline std::vector<Convergent> continued_fraction_exact(i64 num, u64 den, int depth = 64) {
    if (den == 0) throw std::invalid_argument("denominator must be positive");
    if (depth < 1 || depth > 64) throw std::invalid_argument("depth must be in [1, 64]");
    return detail::cf_from_ratio(i128(num), i128(den), depth, 0.0);
}

// Convergents of the dyadic rational exactly equal to `alpha`, emitted only
// while q_k^2 <= 1/ulp(alpha).
inline std::vector<Convergent> continued_fraction(double alpha, int depth = 64) {
    if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
    if (depth < 1 || depth > 64) throw std::invalid_argument("depth must be in [1, 64]");
    if (alpha == 0.0) return {{0, 1}};
    int e = 0;
    double f = std::frexp(alpha, &e);      // alpha = f * 2^e
    i128 mant = i128(std::ldexp(f, 53));   // exact 53-bit mantissa
    int shift = 53 - e;
    if (shift <= 0) {
        // |alpha| is an even integer beyond 2^53: a single convergent.
        if (std::abs(alpha) > 9e18) throw std::invalid_argument("|alpha| too large");
        return {{i64(std::llrint(alpha)), 1}};
    }
    if (shift > 120) return {{0, 1}};  // |alpha| below ~2^-67: rounds to 0/1
    double u = std::nextafter(std::abs(alpha), INFINITY) - std::abs(alpha);
    return detail::cf_from_ratio(mant, i128(1) << shift, depth, 1.0 / u);
}

// ---------------------------------------------------------------------------
// Dirichlet approximation and arc classification.

// Best rational a/q with q <= Q and |alpha - a/q| <= 1/(qQ): the last
// continued-fraction convergent with q_k <= Q.  Both invariants are checked
// on every call.
inline RationalApprox dirichlet_approx(double alpha, double big_q) {
    if (big_q < 1) throw std::invalid_argument("Dirichlet bound Q must be >= 1");
    if (big_q > 1e8)
        throw std::invalid_argument("Q above 1e8 exceeds double-input approximation accuracy");
    auto cf = continued_fraction(alpha, 64);
    RationalApprox best;
    bool found = false;
    for (const auto& c : cf) {
        if (double(c.q) > big_q) break;
        best.a = c.a;
        best.q = c.q;
        found = true;
    }
    if (!found) throw std::logic_error("no convergent with q <= Q; Q >= 1 should force q = 1");
    best.err = std::abs(alpha - double(best.a) / double(best.q));
    best.bound = big_q;
    if (double(best.q) > big_q || best.err > 1.0 / (double(best.q) * big_q) + 1e-15)
        throw std::logic_error("Dirichlet invariant violated for alpha = " +
                               format_double(alpha));
    return best;
}

inline ArcLabel classify_arc(double alpha, double x, double c1 = 1.0) {
    if (x < 16) throw std::invalid_argument("arc classification needs X >= 16");
    if (c1 <= 0) throw std::invalid_argument("c1 must be positive");
    ArcLabel label;
    label.c1 = c1;
    label.threshold = std::exp((c1 / 3.0) * std::sqrt(std::log(x)));
    label.big_q = x / label.threshold;
    label.approx = dirichlet_approx(alpha, label.big_q);
    label.kind = double(label.approx.q) <= label.threshold ? ArcKind::Major : ArcKind::Minor;
    return label;
}

// ---------------------------------------------------------------------------
// The min(N, 1/||alpha m||) sum.

struct MinNormSum {
    double lhs = 0;    // sum_{0 < |m| <= M} min(N, 1/||alpha m||)
    double rhs = 0;    // (M + N + MN/q + q) log 2q
    double ratio = 0;  // lhs / rhs
};

// approx must satisfy |alpha - a/q| <= 1/q^2; terms with alpha m integral
// are capped by N like every other term.
inline MinNormSum min_norm_sum(double alpha, u64 m_bound, double n_cap,
                               const RationalApprox& approx) {
    if (m_bound < 1 || n_cap < 1) throw std::invalid_argument("need M >= 1 and N >= 1");
    double q = double(approx.q);
    if (std::abs(alpha - double(approx.a) / q) > 1.0 / (q * q) + 1e-15)
        throw std::invalid_argument("approximation does not satisfy |alpha - a/q| <= 1/q^2");
    NeumaierSum acc;
    for (i64 m = 1; m <= i64(m_bound); ++m) {
        double d = norm_distance_scaled(m, alpha);
        double term = d == 0.0 ? n_cap : std::min(n_cap, 1.0 / d);
        acc.add(term);
        d = norm_distance_scaled(-m, alpha);
        term = d == 0.0 ? n_cap : std::min(n_cap, 1.0 / d);
        acc.add(term);
    }
    MinNormSum out;
    out.lhs = acc.value();
    out.rhs = (double(m_bound) + n_cap + double(m_bound) * n_cap / q + q) * std::log(2.0 * q);
    out.ratio = out.lhs / out.rhs;
    return out;
}

inline std::string arc_kind_name(ArcKind k) { return k == ArcKind::Major ? "Major" : "Minor"; }

}  // namespace heckelab
