#pragma once
// Floating-point primitives for reproducible exponential sums:
//
//  * error-free transforms (two_sum, two_prod) and a minimal double-double,
//  * Neumaier compensated accumulators for real and complex series,
//  * exact-as-possible reduction of n*alpha mod 1 to the symmetric interval
//    [-1/2, 1/2), using the fma trick so the product n*alpha is represented
//    exactly as a double-double before reduction,
//  * an incremental phase stream e(n*alpha) that multiplies by a fixed
//    rotation and resynchronizes from the reduced argument every block,
//  * a fixed binary-tree block reduction, so results are bitwise identical
//    for any thread count, and sums over (0,X] split exactly at block-aligned
//    midpoints: sum(0,X] = sum(0,X/2] + sum(X/2,X] as the same float ops.
//
// Angles live in [-1/2, 1/2) rather than [0,1): every IEEE operation used
// here commutes with negation, so conjugation symmetry sum(-alpha) =
// conj(sum(alpha)) holds bitwise, not just approximately.

#include <atomic>
#include <cassert>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

#include "heckelab/common.hpp"

namespace heckelab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// ---------------------------------------------------------------------------
// Error-free transforms.

struct TwoSum {
    double s;
    double e;
};

// Knuth's branch-free two_sum: s + e == a + b exactly.
inline TwoSum two_sum(double a, double b) {
    double s = a + b;
    double ap = s - b;
    double bp = s - ap;
    return {s, (a - ap) + (b - bp)};
}

// p + e == a * b exactly (requires hardware fma).
inline TwoSum two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

// ---------------------------------------------------------------------------
// Compensated accumulation.

class NeumaierSum {
public:
    void add(double x) {
        TwoSum t = two_sum(sum_, x);
        sum_ = t.s;
        comp_ += t.e;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class NeumaierCplx {
public:
    void add(cplx z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    cplx value() const { return {re_.value(), im_.value()}; }

private:
    NeumaierSum re_;
    NeumaierSum im_;
};

// ---------------------------------------------------------------------------
// Argument reduction.

// Map alpha to the symmetric fundamental domain [-1/2, 1/2).  e(n*alpha) is
// 1-periodic, so sums are unchanged; the symmetric interval makes negation
// exact (round is odd) and therefore conjugation exact.
inline double canonical_alpha(double alpha) {
    if (!std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite");
    double a = alpha - std::nearbyint(alpha);
    if (a >= 0.5) a -= 1.0;
    if (a < -0.5) a += 1.0;
    return a;
}

// Fractional part of n*alpha in [-1/2, 1/2), accurate to ~2^-80 absolute:
// two_prod represents n*alpha exactly as hi+lo, the integer part of hi
// subtracts off exactly, and the lo correction is folded back in.
inline double reduced_mod1(i64 n, double alpha) {
    TwoSum p = two_prod(double(n), alpha);
    double r = p.s - std::nearbyint(p.s);  // exact: same binade cancellation
    TwoSum f = two_sum(r, p.e);
    double x = f.s - std::nearbyint(f.s);
    x += f.e;
    if (x >= 0.5) x -= 1.0;
    if (x < -0.5) x += 1.0;
    return x;
}

// e(x) = exp(2*pi*i*x) for x in [-1/2, 1/2).
inline cplx unit_phase(double x) {
    double t = kTwoPi * x;
    return {std::cos(t), std::sin(t)};
}

// ---------------------------------------------------------------------------
// Incremental phase stream.

// Yields e((start + k*stride)*alpha) for k = 0, 1, ... by complex rotation.
// Each multiply contributes at most ~2 ulp of drift, so a caller that
// resynchronizes every 2^16 steps (the block evaluator below does) keeps the
// accumulated phase error under ~1e-11 per block.  The step angle
// stride*alpha is reduced mod 1 exactly like every resync point, so a stream
// with stride s matches pointwise phases e((sn)*alpha) without ever rounding
// the product s*alpha to a single double.
class PhaseStream {
public:
    PhaseStream(i64 start, double alpha, i64 stride = 1)
        : step_(unit_phase(reduced_mod1(stride, canonical_alpha(alpha)))),
          cur_(unit_phase(reduced_mod1(start, canonical_alpha(alpha)))) {}

    cplx current() const { return cur_; }
    void advance() { cur_ *= step_; }

private:
    cplx step_;
    cplx cur_;
};

// ---------------------------------------------------------------------------
// Roots of unity for exact rational phases e(k/q).

class RootTable {
public:
    explicit RootTable(i64 q) : q_(q) {
        if (q < 1) throw std::invalid_argument("root table order must be >= 1");
        roots_.resize(size_t(q));
        for (i64 k = 0; k < q; ++k) {
            if (i64((i128(4) * k) % q) == 0) {
                // Quarter-period roots are exact; sin/cos would leave
                // residues like sin(pi) ~ 1e-16 on the axes.
                static const cplx quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
                roots_[size_t(k)] = quarter[size_t((i128(4) * k) / q)];
                continue;
            }
            double x = double(k) / double(q);
            x -= std::nearbyint(x);
            roots_[size_t(k)] = unit_phase(x);
        }
    }

    i64 order() const { return q_; }

    // e(n*a/q) for any integers n, a (reduced mod q first).
    cplx phase(i64 n, i64 a = 1) const {
        i64 r = i64((i128(n) * a) % q_);
        if (r < 0) r += q_;
        return roots_[size_t(r)];
    }

private:
    i64 q_;
    std::vector<cplx> roots_;
};

// ---------------------------------------------------------------------------
// Deterministic block-tree reduction.

struct BlockOptions {
    // Leaf size; also the phase resynchronization interval.
    i64 leaf_size = 1 << 16;
    int threads = 1;
};

namespace detail {

// Pairwise fold of leaf values over a power-of-two span of absolute block
// indices.  Empty right subtrees are skipped (never "+ 0.0"), which is what
// makes block-aligned prefix sums reproduce the exact same operation tree.
template <class T>
T tree_fold(const std::vector<T>& leaves, size_t lo, size_t span) {
    if (span == 1) return leaves[lo];
    size_t half = span / 2;
    T left = tree_fold(leaves, lo, half);
    if (lo + half >= leaves.size()) return left;
    T right = tree_fold(leaves, lo + half, half);
    return left + right;
}

inline size_t pow2_at_least(size_t m) {
    size_t s = 1;
    while (s < m) s <<= 1;
    return s;
}

}  // namespace detail

// Evaluates sum over blocks of (lo, hi] ranges: fn(block_lo, block_hi) must
// return the block's contribution; blocks are (k*B, (k+1)*B] clipped to X.
// Combination order is a fixed binary tree over absolute block indices.
template <class T, class Fn>
T block_tree_sum(i64 x, const BlockOptions& opt, Fn&& fn) {
    if (x <= 0) return T{};
    i64 b = opt.leaf_size;
    size_t nblocks = size_t((x + b - 1) / b);
    std::vector<T> leaves(nblocks);
    int nthreads = std::max(1, std::min<int>(opt.threads, int(nblocks)));
    if (nthreads == 1) {
        for (size_t k = 0; k < nblocks; ++k)
            leaves[k] = fn(i64(k) * b, std::min(x, (i64(k) + 1) * b));
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (;;) {
                size_t k = next.fetch_add(1);
                if (k >= nblocks) break;
                leaves[k] = fn(i64(k) * b, std::min(x, (i64(k) + 1) * b));
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return detail::tree_fold(leaves, 0, detail::pow2_at_least(nblocks));
}

}  // namespace heckelab
