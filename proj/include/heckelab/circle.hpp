#pragma once
// Ternary additive counts over primes by direct convolution (no FFT), with
// coefficient weights riding along, plus the generic bilinear variant where
// two of the three summands range over arbitrary integer sets.
//
// All triple counts are ordered: r3(N) counts (p1, p2, p3) with each
// permutation separate, matching the weighted sums which attach lambda to a
// fixed coordinate.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "heckelab/common.hpp"
#include "heckelab/hecke.hpp"
#include "heckelab/numeric.hpp"
#include "heckelab/sieves.hpp"

namespace heckelab {

struct TernaryReport {
    u64 n = 0;
    u64 r2 = 0;         // ordered prime pairs summing to n
    u64 r3 = 0;         // ordered prime triples summing to n
    double weighted = 0;   // sum over triples of lambda(p1)
    double weighted3 = 0;  // sum over triples of lambda(p1) lambda(p2) lambda(p3)
    bool parity_flagged = false;  // even n: dominated by the single even prime
};

// Reports for every n <= n_max.  Internally r2 and the pair weights come
// from one double loop over primes, and the triple quantities from one more
// convolution with the prime row.
inline std::vector<TernaryReport> ternary_weighted(const HeckeFn& fn, const SieveTables& sv,
                                                   u64 n_max) {
    if (n_max < 1 || n_max > 100'000)
        throw std::invalid_argument("ternary table needs 1 <= n_max <= 1e5");
    if (n_max > fn.limit() || n_max > sv.limit())
        throw std::invalid_argument("ternary table exceeds coefficient range");

    std::vector<std::uint32_t> r2(n_max + 1, 0);
    std::vector<double> w2(n_max + 1, 0.0);  // sum lambda(p1) lambda(p2) over pairs
    const auto& primes = sv.primes();
    double max_abs = 0;
    for (u64 p : primes) {
        if (p > n_max) break;
        max_abs = std::max(max_abs, std::abs(fn.values[p]));
        double lp = fn.values[p];
        for (u64 q : primes) {
            u64 s = p + q;
            if (q > n_max || s > n_max) break;
            r2[s] += 1;
            w2[s] += lp * fn.values[q];
        }
    }

    std::vector<TernaryReport> out(n_max + 1);
    std::vector<double> w1(n_max + 1, 0.0);
    std::vector<double> w3(n_max + 1, 0.0);
    std::vector<u64> r3(n_max + 1, 0);
    for (u64 p : primes) {
        if (p + 4 > n_max) break;
        double lp = fn.values[p];
        for (u64 m = 4; m + p <= n_max; ++m) {
            if (!r2[m]) continue;
            r3[m + p] += r2[m];
            w1[m + p] += lp * double(r2[m]);
            w3[m + p] += lp * w2[m];
        }
    }

    for (u64 n = 0; n <= n_max; ++n) {
        auto& rep = out[n];
        rep.n = n;
        rep.r2 = r2[n];
        rep.r3 = r3[n];
        rep.weighted = w1[n];
        rep.weighted3 = w3[n];
        rep.parity_flagged = n % 2 == 0;
        if (n < 6 && rep.r3 != 0) throw std::logic_error("triple count below 6 must vanish");
        if (std::abs(rep.weighted) > max_abs * double(rep.r3) + 1e-9)
            throw std::logic_error("weighted triple sum exceeded its coefficient bound");
    }
    return out;
}

struct BilinearCircle {
    double value = 0;  // sum over p + a + b = n of lambda(p)
    u64 triples = 0;
    double a_norm = 0;  // sqrt(#{a in A : a <= n})
    double b_norm = 0;
};

// Two free summand sets; lambda rides on the prime coordinate.
inline BilinearCircle bilinear_circle(const HeckeFn& fn, const SieveTables& sv, u64 n,
                                      const std::vector<u64>& set_a,
                                      const std::vector<u64>& set_b) {
    if (n < 1) throw std::invalid_argument("need n >= 1");
    if (n > fn.limit() || n > sv.limit())
        throw std::invalid_argument("bilinear circle sum exceeds coefficient range");
    BilinearCircle out;
    u64 count_a = 0, count_b = 0;
    for (u64 a : set_a)
        if (a >= 1 && a <= n) ++count_a;
    for (u64 b : set_b)
        if (b >= 1 && b <= n) ++count_b;
    out.a_norm = std::sqrt(double(count_a));
    out.b_norm = std::sqrt(double(count_b));
    NeumaierSum acc;
    for (u64 a : set_a) {
        if (a < 1 || a + 2 > n) continue;
        for (u64 b : set_b) {
            if (b < 1 || a + b + 2 > n) continue;
            u64 p = n - a - b;
            if (sv.is_prime(p)) {
                acc.add(fn.values[p]);
                ++out.triples;
            }
        }
    }
    out.value = acc.value();
    return out;
}

}  // namespace heckelab
