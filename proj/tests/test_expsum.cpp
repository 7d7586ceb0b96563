#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "heckelab/expsum.hpp"

using namespace heckelab;

namespace {

const double kGolden = 0.6180339887498949;

const SieveTables& sieve1m() {
    static SieveTables sv(1'000'000);
    return sv;
}

const HeckeFn& synth300k() {
    static HeckeFn f = synthetic_hecke(sieve1m(), 300'000, 271828);
    return f;
}

// Straight per-point evaluation, no blocks, no phase stream.
cplx naive_sum(const std::vector<double>& coeff, double alpha) {
    double a = canonical_alpha(alpha);
    NeumaierCplx s;
    for (size_t i = 0; i < coeff.size(); ++i)
        if (coeff[i] != 0.0) s.add(coeff[i] * unit_phase(reduced_mod1(i64(i + 1), a)));
    return s.value();
}

}  // namespace

TEST_CASE("linear sum: closed-form cases") {
    HeckeFn one = one_fn(200'000);
    auto full = linear_sum(one, 100'000, 0.0);
    REQUIRE(full.value == cplx(100'000.0, 0.0));  // e(0) = 1 exactly
    REQUIRE(full.terms == 100'000);
    REQUIRE(full.abs_sum == 100'000.0);
    REQUIRE(full.alpha == 0.0);
    REQUIRE(full.variant == "linear");
    REQUIRE(full.triangle_ok());

    // Alternating sum cancels for even ranges.
    auto alt = linear_sum(one, 10'000, 0.5);
    REQUIRE(std::abs(alt.value) < 1e-10);
    REQUIRE(alt.alpha == 0.5);

    REQUIRE_THROWS_AS(linear_sum(one, 300'000, 0.0), std::invalid_argument);
}

TEST_CASE("block evaluation matches naive per-point evaluation") {
    const auto& f = synth300k();
    const u64 x = (1 << 16) + 500;
    std::vector<double> coeff(x);
    for (u64 n = 1; n <= x; ++n) coeff[n - 1] = f(n);
    cplx naive = naive_sum(coeff, kGolden);
    cplx blocked = linear_sum(f, x, kGolden).value;
    REQUIRE(std::abs(blocked - naive) < 1e-8);  // measured ~8e-10 at this range
}

TEST_CASE("moebius sum: single term and naive cross-check") {
    const auto& sv = sieve1m();
    const auto& f = synth300k();

    auto single = moebius_sum(f, sv, 1, 0.3);
    REQUIRE(std::abs(single.value - unit_phase(reduced_mod1(1, 0.3))) < 1e-15);
    REQUIRE(single.terms == 1);
    REQUIRE(single.variant == "moebius");

    std::vector<double> coeff(1000);
    for (u64 n = 1; n <= 1000; ++n) coeff[n - 1] = double(sv.mobius(n)) * f(n);
    auto direct = naive_sum(coeff, 0.0);
    auto fast = moebius_sum(f, sv, 1000, 0.0);
    REQUIRE(std::abs(fast.value - direct) < 1e-11);
    // Squarefull indices contribute nothing.
    u64 squarefree = 0;
    for (u64 n = 1; n <= 1000; ++n)
        if (sv.mobius(n) != 0) ++squarefree;
    REQUIRE(fast.terms == squarefree);
}

TEST_CASE("prime sum: counting, weights, small cases") {
    const auto& sv = sieve1m();
    const auto& f = synth300k();

    auto two = prime_sum(f, sv, 2, 0.37);
    REQUIRE(std::abs(two.value - f(2) * unit_phase(reduced_mod1(2, 0.37))) < 1e-15);
    REQUIRE(two.terms == 1);

    HeckeFn one = one_fn(200'000);
    auto pi = prime_sum(one, sv, 100'000, 0.0);
    REQUIRE(pi.value == cplx(9592.0, 0.0));  // pi(10^5) primes, each with phase 1
    REQUIRE(pi.variant == "prime");

    auto theta = prime_sum(one, sv, 10, 0.0, true);
    REQUIRE(theta.value.real() == Catch::Approx(std::log(210.0)).epsilon(1e-14));
    REQUIRE(theta.variant == "prime-log");

    // Triangle bound with reported margin.
    auto p = prime_sum(f, sv, 100'000, 1.0 / 3.0);
    REQUIRE(std::abs(p.value) <= p.abs_sum);
}

TEST_CASE("twisted sum: identity twist, naive oracle, dual-relation expansion") {
    const auto& sv = sieve1m();
    const auto& f = synth300k();
    LambdaStar star = lambda_star(f);

    auto plain = linear_sum(f, 5000, kGolden);
    auto twist1 = twisted_linear_sum(f, star, sv, 1, 5000, kGolden);
    REQUIRE(twist1.sum.value == plain.value);  // same blocks, same phases, bitwise
    REQUIRE(twist1.sum.variant == "twisted-1");

    std::vector<double> coeff(100);
    for (u64 n = 1; n <= 100; ++n) coeff[n - 1] = f(2 * n);
    auto direct = naive_sum(coeff, 0.0);
    auto twist2 = twisted_linear_sum(f, star, sv, 2, 100, 0.0);
    REQUIRE(std::abs(twist2.sum.value - direct) < 1e-12);
    REQUIRE(twist2.comparison > 0.0);

    // Expand lambda(6n) by the dual Hecke relation over d | gcd(6, n) and
    // re-sum: must agree with the direct twisted evaluation.
    const u64 x = 500;
    NeumaierCplx expanded;
    for (u64 n = 1; n <= x; ++n) {
        double c = 0;
        for (u64 d : sv.divisors(std::gcd<u64>(6, n)))
            c += sv.mobius(d) * f(6 / d) * f(n / d);
        expanded.add(c * unit_phase(reduced_mod1(i64(n), canonical_alpha(0.37))));
    }
    auto twist6 = twisted_linear_sum(f, star, sv, 6, x, 0.37);
    REQUIRE(std::abs(twist6.sum.value - expanded.value()) < 1e-10);

    REQUIRE_THROWS_AS(twisted_linear_sum(f, star, sv, 7, 100'000, 0.0),
                      std::invalid_argument);
}

TEST_CASE("square sum: base case and range guard") {
    const auto& f = synth300k();
    auto base = square_sum(f, 1, 1, 0.3);
    REQUIRE(std::abs(base.value - unit_phase(reduced_mod1(1, 0.3))) < 1e-15);
    REQUIRE(base.variant == "square-1");

    auto s = square_sum(f, 100, 5, 0.25);
    REQUIRE(s.terms <= 100);
    REQUIRE(s.triangle_ok());
    REQUIRE_THROWS_AS(square_sum(f, 1000, 5, 0.25), std::invalid_argument);
}

TEST_CASE("square-scaling Moebius inversion holds by double evaluation") {
    const auto& sv = sieve1m();
    const auto& f = synth300k();

    auto t1 = verify_square_inversion(f, sv, 1, 0.77);
    REQUIRE(t1.ok);
    REQUIRE(std::abs(t1.lhs - unit_phase(reduced_mod1(1, 0.77))) < 1e-15);

    REQUIRE(verify_square_inversion(f, sv, 10, 0.3).ok);
    REQUIRE(verify_square_inversion(f, sv, 50, kGolden).ok);

    HeckeFn d = divisor_hecke(sv, 1000);
    REQUIRE(verify_square_inversion(d, sv, 25, 0.3).ok);
}

TEST_CASE("squarefree twist expansion holds for A in {2, 6, 30}") {
    const auto& sv = sieve1m();
    const auto& f = synth300k();
    for (u64 a : {u64(2), u64(6), u64(30)}) {
        auto rep = verify_square_twist(f, sv, 50, a, kGolden);
        INFO("A = " << a << " diff " << rep.abs_diff);
        REQUIRE(rep.ok);
    }
    REQUIRE_THROWS_AS(verify_square_twist(f, sv, 50, 4, kGolden), std::invalid_argument);
}

TEST_CASE("discrete Parseval equality") {
    SECTION("indicator of 1") {
        auto rep = parseval_check({1.0}, 2);
        REQUIRE(rep.ok);
        REQUIRE(rep.mean_square == Catch::Approx(1.0).epsilon(1e-12));
        REQUIRE(rep.coeff_energy == 1.0);
    }
    SECTION("moebius-twisted coefficients, power-of-two sampling") {
        const auto& sv = sieve1m();
        const auto& f = synth300k();
        std::vector<double> c(512);
        for (u64 n = 1; n <= 512; ++n) c[n - 1] = double(sv.mobius(n)) * f(n);
        auto rep = parseval_check(c, 1024);
        REQUIRE(rep.ok);
        REQUIRE(rep.rel_err < 1e-9);
    }
    SECTION("raw coefficients, minimal odd sampling count") {
        const auto& f = synth300k();
        std::vector<double> c(300);
        for (u64 n = 1; n <= 300; ++n) c[n - 1] = f(n);
        auto rep = parseval_check(c, 301);
        REQUIRE(rep.ok);
    }
    SECTION("coefficient energy agrees with the second moment") {
        const auto& f = synth300k();
        std::vector<double> c(1000);
        for (u64 n = 1; n <= 1000; ++n) c[n - 1] = f(n);
        auto rep = parseval_check(c, 1024);
        MomentSpec sq;
        auto m = moment_sum(f, sq, 1000);
        REQUIRE(rep.coeff_energy == Catch::Approx(m.sum).epsilon(1e-13));
        REQUIRE(rep.ok);
    }
    REQUIRE_THROWS_AS(parseval_check({1.0, 2.0}, 2), std::invalid_argument);
}

TEST_CASE("periodicity: alpha and alpha + 1 give the same sum") {
    const auto& f = synth300k();
    // Dyadic shift is bitwise exact.
    auto a = linear_sum(f, 30'000, 0.25);
    auto b = linear_sum(f, 30'000, 1.25);
    REQUIRE(a.value == b.value);
    REQUIRE(a.alpha == b.alpha);
    // Generic shift agrees to the rounding of alpha + 1 itself.
    auto c = linear_sum(f, 30'000, kGolden);
    auto d = linear_sum(f, 30'000, kGolden + 1.0);
    REQUIRE(std::abs(c.value - d.value) < 1e-10);
}

TEST_CASE("conjugation: negating alpha conjugates the sum bitwise") {
    const auto& sv = sieve1m();
    const auto& f = synth300k();
    const u64 x = 3 * (1 << 16) + 1234;

    auto plus = linear_sum(f, x, kGolden);
    auto minus = linear_sum(f, x, -kGolden);
    REQUIRE(minus.value == std::conj(plus.value));

    auto mplus = moebius_sum(f, sv, x, 0.3141592653589793);
    auto mminus = moebius_sum(f, sv, x, -0.3141592653589793);
    REQUIRE(mminus.value == std::conj(mplus.value));

    auto pplus = prime_sum(f, sv, x, kGolden, true);
    auto pminus = prime_sum(f, sv, x, -kGolden, true);
    REQUIRE(pminus.value == std::conj(pplus.value));

    // The half-integer edge maps both signs to the same phase table; there
    // the identity holds to rounding rather than bitwise.
    auto hplus = linear_sum(f, 10'000, 0.5);
    auto hminus = linear_sum(f, 10'000, -0.5);
    REQUIRE(std::abs(hminus.value - std::conj(hplus.value)) < 1e-10);
}

TEST_CASE("splitting: block-aligned prefix plus tail reproduces the sum bitwise") {
    const auto& f = synth300k();
    const u64 x = 4 * (1 << 16);
    const u64 half = 2 * (1 << 16);

    auto full = linear_sum(f, x, kGolden);
    auto prefix = linear_sum(f, half, kGolden);
    auto tail = dense_exp_sum(
        x, kGolden, [&](u64 n) { return n > half ? f.values[n] : 0.0; }, "linear-tail");
    REQUIRE(full.value == prefix.value + tail.value);
    REQUIRE(full.terms == prefix.terms + tail.terms);
    REQUIRE(full.abs_sum == prefix.abs_sum + tail.abs_sum);
}

TEST_CASE("results are bitwise identical across thread counts") {
    const auto& sv = sieve1m();
    const auto& f = synth300k();
    BlockOptions one;
    one.threads = 1;
    BlockOptions four;
    four.threads = 4;
    const u64 x = 300'000;

    REQUIRE(moebius_sum(f, sv, x, kGolden, one).value ==
            moebius_sum(f, sv, x, kGolden, four).value);
    REQUIRE(linear_sum(f, x, 0.123456789, one).value ==
            linear_sum(f, x, 0.123456789, four).value);
    REQUIRE(prime_sum(f, sv, x, kGolden, true, one).value ==
            prime_sum(f, sv, x, kGolden, true, four).value);
}

TEST_CASE("decay profile: Mertens-type cancellation for constant coefficients") {
    const auto& sv = sieve1m();
    HeckeFn one = one_fn(1'000'000);
    auto rows = decay_profile(SumVariant::Moebius, one, sv, {1000, 10'000, 100'000, 1'000'000},
                              0.0, 0.1);
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) REQUIRE(r.over_x < 0.01);
    REQUIRE(rows.back().over_x < rows.front().over_x);
    for (const auto& r : rows) {
        REQUIRE((r.normalized > 0) == (r.abs_value > 0));
        REQUIRE(std::isfinite(r.normalized));
    }
    REQUIRE_THROWS_AS(variant_from_name("nonsense"), std::invalid_argument);
    REQUIRE(variant_from_name("prime-log") == SumVariant::PrimeLog);
}
