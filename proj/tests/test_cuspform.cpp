#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "heckelab/cuspform.hpp"
#include "heckelab/hecke.hpp"
#include "heckelab/sieves.hpp"

using namespace heckelab;

namespace {

const SieveTables& sieve100k() {
    static SieveTables sv(100'000);
    return sv;
}

const CuspFormSeries& delta10k() {
    static CuspFormSeries d = delta_series(10'000);
    return d;
}

const CuspFormSeries& w16_10k() {
    static CuspFormSeries f = weight16_series(10'000);
    return f;
}

}  // namespace

TEST_CASE("tau: first values from the pentagonal expansion") {
    CuspFormSeries d = delta_series(6);
    REQUIRE(d.weight == 12);
    REQUIRE(d.a(1) == 1);
    REQUIRE(d.a(2) == -24);
    REQUIRE(d.a(3) == 252);
    REQUIRE(d.a(4) == -1472);
    REQUIRE(d.a(5) == 4830);
    REQUIRE(d.a(6) == -6048);
    // tau(2)^2 = tau(4) + 2^11 and tau(6) = tau(2) tau(3).
    REQUIRE(d.a(2) * d.a(2) == d.a(4) + 2048);
    REQUIRE(d.a(6) == d.a(2) * d.a(3));
}

TEST_CASE("tau: pentagonal route equals the Eisenstein route up to 2000") {
    auto oracle = delta_from_eisenstein(2000);
    const auto& d = delta10k();
    for (u64 n = 1; n <= 2000; ++n) REQUIRE(d.a(n) == oracle[n]);
}

TEST_CASE("Eisenstein series: hand-checked coefficients") {
    auto e4 = eisenstein_series(4, 10);
    auto e6 = eisenstein_series(6, 10);
    REQUIRE(e4[0] == 1);
    REQUIRE(e4[1] == 240);           // sigma_3(1) = 1
    REQUIRE(e4[2] == 240 * 9);       // sigma_3(2) = 9
    REQUIRE(e6[0] == 1);
    REQUIRE(e6[1] == -504);
    REQUIRE(e6[2] == -504 * 33);     // sigma_5(2) = 33, so -16632
    REQUIRE(e6[2] == -16632);
    REQUIRE_THROWS_AS(eisenstein_series(8, 10), std::invalid_argument);
}

TEST_CASE("weight 16: series product values and exact Hecke relation") {
    const auto& f = w16_10k();
    REQUIRE(f.weight == 16);
    REQUIRE(f.a(1) == 1);
    REQUIRE(f.a(2) == 216);  // tau(2) + 240 tau(1)
    REQUIRE(f.a(4) == 13888);
    REQUIRE(f.a(2) * f.a(2) == f.a(4) + (i128(1) << 15));

    auto rep = verify_hecke_integral(f, 100);
    REQUIRE(rep.pairs_checked == 10'000);
    INFO("first failure at (" << rep.first_m << "," << rep.first_n << "): " << rep.first_lhs
                              << " vs " << rep.first_rhs);
    REQUIRE(rep.ok);
}

TEST_CASE("weight 12: exact Hecke relation for all m, n <= 100") {
    auto rep = verify_hecke_integral(delta10k(), 100);
    REQUIRE(rep.pairs_checked == 10'000);
    REQUIRE(rep.ok);
}

TEST_CASE("the relation checker detects a corrupted coefficient") {
    CuspFormSeries bad = delta_series(100);
    bad.coeffs[6] += 1;
    auto rep = verify_hecke_integral(bad, 10);
    REQUIRE_FALSE(rep.ok);
    REQUIRE(rep.first_m >= 1);
    REQUIRE_FALSE(rep.first_lhs.empty());
    REQUIRE(rep.first_lhs != rep.first_rhs);
}

TEST_CASE("normalization: explicit values and eigenvalue bounds") {
    NormalizedForm delta = normalize(delta10k());
    REQUIRE(delta.weight == 12);
    REQUIRE(delta.fn.label == "delta");
    REQUIRE(delta.fn.source == HeckeSource::Form);
    REQUIRE(delta.fn(1) == 1.0);
    REQUIRE(delta.fn(2) == Catch::Approx(-24.0 / std::pow(2.0, 5.5)).epsilon(1e-14));
    REQUIRE(delta.fn(2) == Catch::Approx(-0.5303300858899106).epsilon(1e-12));

    // Eigenvalue bound at primes, and |lambda(n)| <= d(n) everywhere.
    const auto& sv = sieve100k();
    auto [worst_p, worst] = max_prime_lambda(delta.fn, sv, 10'000);
    INFO("worst prime " << worst_p << " with |lambda| = " << worst);
    REQUIRE(worst <= 2.0);
    for (u64 n = 1; n <= 10'000; ++n)
        REQUIRE(std::abs(delta.fn(n)) <= double(sv.num_divisors(n)) + 1e-9);

    // Sign variation among small primes.
    REQUIRE(delta.fn(2) < 0.0);
    REQUIRE(delta.fn(3) > 0.0);

    NormalizedForm w16 = normalize(w16_10k());
    REQUIRE(w16.fn.label == "weight16");
    REQUIRE(w16.fn(2) == Catch::Approx(216.0 / std::pow(2.0, 7.5)).epsilon(1e-14));
    REQUIRE(max_prime_lambda(w16.fn, sv, 10'000).second <= 2.0);

    CuspFormSeries broken = delta_series(10);
    broken.coeffs[1] = 2;
    REQUIRE_THROWS_AS(normalize(broken), std::invalid_argument);
}

TEST_CASE("normalized eigenvalues satisfy the Hecke relations numerically") {
    const auto& sv = sieve100k();
    NormalizedForm delta = normalize(delta10k());
    auto rep = hecke_relation_check(delta.fn, sv, 10'000, 2024);
    INFO("worst (" << rep.worst_m << "," << rep.worst_n << ") err " << rep.max_err);
    REQUIRE(rep.ok());
    REQUIRE(rep.max_err < 1e-9);

    NormalizedForm w16 = normalize(w16_10k());
    REQUIRE(hecke_relation_check(w16.fn, sv, 10'000, 2025).ok());
}

TEST_CASE("lambda* inequality suite holds for both concrete forms") {
    const auto& sv = sieve100k();
    for (const CuspFormSeries* series : {&delta10k(), &w16_10k()}) {
        NormalizedForm form = normalize(*series);
        LambdaStar star = lambda_star(form.fn);
        auto rep = check_star_inequalities(form.fn, star, sv, 2000, 555);
        INFO(form.fn.label << ": worst property " << rep.worst_property << " margin "
                           << rep.worst_margin);
        REQUIRE(rep.ok());
    }
}

TEST_CASE("weight-16 prime scan agrees with the dense route") {
    const auto& sv = sieve100k();
    auto scan = weight16_prime_lambdas(sv, 20'000);
    REQUIRE(!scan.empty());
    REQUIRE(scan.back().p <= 20'000);

    NormalizedForm dense = normalize(w16_10k());
    size_t checked = 0;
    for (const auto& [p, lambda] : scan) {
        if (p > 10'000) break;
        REQUIRE(lambda == dense.fn(p));  // same integer, same division
        ++checked;
    }
    REQUIRE(checked == 1229);  // primes up to 10^4

    for (const auto& [p, lambda] : scan) REQUIRE(std::abs(lambda) <= 2.0);
}

TEST_CASE("range caps and guards") {
    REQUIRE_THROWS_AS(delta_series(200'000), capacity_error);
    REQUIRE_THROWS_AS(delta_series(0), std::invalid_argument);
    REQUIRE_THROWS_AS(weight16_series(20'000), capacity_error);
    REQUIRE_THROWS_AS(delta_from_eisenstein(6000), capacity_error);
    REQUIRE_THROWS_AS(verify_hecke_integral(delta10k(), 200), std::invalid_argument);
    REQUIRE_THROWS_AS(weight16_prime_lambdas(sieve100k(), 200'000), std::invalid_argument);
}

TEST_CASE("coefficient cache round-trips exactly") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "heckelab-test-cache";
    fs::create_directories(dir);
    fs::path file = dir / "w12-500.form";

    CuspFormSeries d = delta_series(500);
    save_form_cache(d, file);
    auto loaded = load_form_cache(file);
    REQUIRE(loaded.has_value());
    REQUIRE(loaded->weight == 12);
    REQUIRE(loaded->limit == 500);
    for (u64 n = 1; n <= 500; ++n) REQUIRE(loaded->a(n) == d.a(n));

    REQUIRE_FALSE(load_form_cache(dir / "missing.form").has_value());

    // Corrupt the magic: loader must reject, not crash.
    std::FILE* f = std::fopen(file.c_str(), "r+b");
    REQUIRE(f != nullptr);
    std::fputc('X', f);
    std::fclose(f);
    REQUIRE_FALSE(load_form_cache(file).has_value());
    fs::remove_all(dir);
}
