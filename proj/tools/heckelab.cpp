// Command-line driver for the heckelab library.  Subcommands either emit
// measurement tables (CSV or JSON) or run check batteries.  Exit status:
// 0 on success, 1 when a verification check fails, 2 on usage errors.
//
// Output is deterministic for a fixed configuration: the thread count only
// changes how block sums are scheduled, never their value, so it is excluded
// from the configuration digest that every table carries in its metadata.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heckelab/characters.hpp"
#include "heckelab/circle.hpp"
#include "heckelab/common.hpp"
#include "heckelab/cuspform.hpp"
#include "heckelab/diophantine.hpp"
#include "heckelab/expsum.hpp"
#include "heckelab/hecke.hpp"
#include "heckelab/numeric.hpp"
#include "heckelab/sieves.hpp"
#include "heckelab/vaughan.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace heckelab;

namespace {

// ---------------------------------------------------------------------------
// Configuration shared across subcommands.

struct Options {
    std::string form = "delta";
    double limit = 1e4;
    std::string alpha_text = "golden";
    double c1 = 1.0;
    std::string y_text = "auto";
    std::string z_text = "auto";
    std::string format;  // per-command default filled in below
    std::string variant = "moebius";
    double c0 = 1.0;
    double step = 1e-3;
    u64 modulus = 5;
    u64 seed = 1;
    int threads = 1;
};

// Digest of everything that can influence output bytes.  Thread count is
// deliberately absent: block sums are summed over a fixed tree, so results
// must be identical for every schedule, and the digest pins that promise.
u64 config_digest(const std::string& command, const Options& o) {
    std::ostringstream s;
    s << "cmd=" << command << ";form=" << o.form << ";limit=" << format_double(o.limit)
      << ";alpha=" << o.alpha_text << ";c1=" << format_double(o.c1) << ";y=" << o.y_text
      << ";z=" << o.z_text << ";format=" << o.format << ";variant=" << o.variant
      << ";c0=" << format_double(o.c0) << ";step=" << format_double(o.step)
      << ";q=" << o.modulus << ";seed=" << o.seed;
    return fnv1a64(s.str());
}

std::string digest_hex(u64 h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

// "golden" and "sqrt2-1" name the two staple badly-approximable numbers;
// "a/q" is an exact rational; anything else must parse as a decimal.
double parse_alpha(const std::string& text) {
    if (text == "golden") return (std::sqrt(5.0) - 1.0) / 2.0;
    if (text == "sqrt2-1") return std::sqrt(2.0) - 1.0;
    auto bad = [&]() { throw std::invalid_argument("unusable alpha: " + text); };
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        std::size_t pa = 0, pq = 0;
        long long a = 0, q = 0;
        try {
            a = std::stoll(text.substr(0, slash), &pa);
            q = std::stoll(text.substr(slash + 1), &pq);
        } catch (const std::exception&) {
            bad();
        }
        if (pa != slash || pq != text.size() - slash - 1 || q <= 0) bad();
        return double(a) / double(q);
    }
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        bad();
    }
    if (pos != text.size() || !std::isfinite(v)) bad();
    return v;
}

u64 to_count(double limit, u64 lo, u64 hi, const char* what) {
    if (!std::isfinite(limit) || limit < double(lo) || limit > double(hi)) {
        std::ostringstream s;
        s << what << " must lie in [" << lo << ", " << hi << "]";
        throw std::invalid_argument(s.str());
    }
    return u64(std::llround(limit));
}

// ---------------------------------------------------------------------------
// Cached table construction.  HECKELAB_CACHE_DIR, when set, holds sieve and
// coefficient caches; every cache miss or failure falls back to recomputing.

std::optional<fs::path> cache_dir() {
    const char* env = std::getenv("HECKELAB_CACHE_DIR");
    if (!env || !*env) return std::nullopt;
    std::error_code ec;
    fs::create_directories(env, ec);
    return fs::path(env);
}

SieveTables make_sieve(u64 limit) {
    auto dir = cache_dir();
    fs::path path;
    if (dir) {
        path = *dir / ("sieve-" + std::to_string(limit) + ".bin");
        if (auto sv = SieveTables::load_cache(path.string()); sv && sv->limit() == limit)
            return std::move(*sv);
    }
    SieveTables sv(limit);
    if (dir) sv.save_cache(path.string());
    return sv;
}

CuspFormSeries make_series(const std::string& name, u64 limit) {
    if (name != "delta" && name != "weight16")
        throw std::invalid_argument("unknown form: " + name);
    auto dir = cache_dir();
    fs::path path;
    if (dir) {
        path = *dir / (name + "-" + std::to_string(limit) + ".bin");
        if (auto form = load_form_cache(path); form && form->limit == limit) return *form;
    }
    CuspFormSeries series = name == "delta" ? delta_series(limit) : weight16_series(limit);
    if (dir) {
        try {
            save_form_cache(series, path);
        } catch (const std::exception&) {
        }
    }
    return series;
}

HeckeFn make_form(const Options& o, u64 limit, const SieveTables& sv) {
    if (o.form == "synthetic") return synthetic_hecke(sv, limit, o.seed);
    if (o.form != "delta" && o.form != "weight16")
        throw std::invalid_argument("unknown form: " + o.form);
    return normalize(make_series(o.form, limit)).fn;
}

// ---------------------------------------------------------------------------
// Output helpers.  CSV tables carry a trailing metadata comment; JSON
// documents carry the same version and digest as fields.

void csv_footer(u64 digest) {
    std::cout << "# heckelab " << kVersion << " config=" << digest_hex(digest) << "\n";
}

json json_root(const std::string& command, u64 digest) {
    json j;
    j["schema_version"] = 1;
    j["tool_version"] = std::string(kVersion);
    j["command"] = command;
    j["config"] = digest_hex(digest);
    return j;
}

void emit_json(const json& j) { std::cout << j.dump(2) << "\n"; }

json cplx_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

// ---------------------------------------------------------------------------
// form: tabulate coefficients and normalized eigenvalues.

int run_form(const Options& o) {
    u64 digest = config_digest("form", o);
    u64 cap = o.form == "weight16" ? 10'000 : 100'000;
    u64 x = to_count(o.limit, 1, cap, "limit");
    if (o.form == "synthetic") {
        SieveTables sv = make_sieve(x);
        HeckeFn fn = synthetic_hecke(sv, x, o.seed);
        if (o.format == "json") {
            json j = json_root("form", digest);
            j["form"] = o.form;
            json rows = json::array();
            for (u64 n = 1; n <= x; ++n) rows.push_back({{"n", n}, {"lambda", fn(n)}});
            j["rows"] = std::move(rows);
            emit_json(j);
            return 0;
        }
        std::cout << "n,lambda\n";
        for (u64 n = 1; n <= x; ++n)
            std::cout << n << "," << format_double(fn(n)) << "\n";
        csv_footer(digest);
        return 0;
    }
    CuspFormSeries series = make_series(o.form, x);
    NormalizedForm nf = normalize(series);
    if (o.format == "json") {
        json j = json_root("form", digest);
        j["form"] = o.form;
        j["weight"] = series.weight;
        json rows = json::array();
        for (u64 n = 1; n <= x; ++n)
            rows.push_back({{"n", n}, {"coeff", to_string(series.a(n))}, {"lambda", nf.fn(n)}});
        j["rows"] = std::move(rows);
        emit_json(j);
        return 0;
    }
    std::cout << "n,coeff,lambda\n";
    for (u64 n = 1; n <= x; ++n)
        std::cout << n << "," << to_string(series.a(n)) << "," << format_double(nf.fn(n)) << "\n";
    csv_footer(digest);
    return 0;
}

// ---------------------------------------------------------------------------
// moments: the standard battery of mean-value measurements.

int run_moments(const Options& o) {
    u64 digest = config_digest("moments", o);
    u64 cap = o.form == "weight16" ? 10'000 : 100'000;
    u64 x = to_count(o.limit, 2, cap, "limit");
    SieveTables sv = make_sieve(x);
    HeckeFn fn = make_form(o, x, sv);
    LambdaStar star = lambda_star(fn);

    struct RowSpec {
        const char* name;
        MomentSpec spec;
    };
    // log_power records the normalization each mean is measured against.
    std::vector<RowSpec> specs;
    specs.push_back({"lambda2", {MomentSpec::LambdaSquared, 1, 1, 0.0}});
    specs.push_back({"lambda4", {MomentSpec::LambdaPower2J, 2, 1, 1.0}});
    specs.push_back({"lambda6", {MomentSpec::LambdaPower2J, 3, 1, 4.0}});
    specs.push_back({"abs-lambda", {MomentSpec::AbsLambda, 1, 1, 0.0}});
    specs.push_back({"d-star4", {MomentSpec::DivisorStar4, 1, 1, 4.0}});

    if (o.format == "json") {
        json j = json_root("moments", digest);
        j["form"] = o.form;
        j["x"] = x;
        json rows = json::array();
        for (const auto& rs : specs) {
            MomentResult r = moment_sum(fn, rs.spec, x, &sv, &star);
            rows.push_back({{"kind", rs.name},
                            {"sum", r.sum},
                            {"over_x", r.over_x},
                            {"log_power", rs.spec.log_power},
                            {"normalized", r.normalized}});
        }
        j["rows"] = std::move(rows);
        emit_json(j);
        return 0;
    }
    std::cout << "kind,x,sum,over_x,log_power,normalized\n";
    for (const auto& rs : specs) {
        MomentResult r = moment_sum(fn, rs.spec, x, &sv, &star);
        std::cout << rs.name << "," << x << "," << format_double(r.sum) << ","
                  << format_double(r.over_x) << "," << format_double(rs.spec.log_power) << ","
                  << format_double(r.normalized) << "\n";
    }
    csv_footer(digest);
    return 0;
}

// ---------------------------------------------------------------------------
// sum: decay profile of a twisted sum along a doubling grid of ranges.

int run_sum(const Options& o) {
    u64 digest = config_digest("sum", o);
    u64 cap = o.form == "weight16" ? 10'000 : 100'000;
    u64 x = to_count(o.limit, 16, cap, "limit");
    double alpha = parse_alpha(o.alpha_text);
    SumVariant v = variant_from_name(o.variant);
    SieveTables sv = make_sieve(x);
    HeckeFn fn = make_form(o, x, sv);
    BlockOptions opt;
    opt.threads = o.threads;

    std::vector<u64> xs;
    for (u64 t = x; t >= 256 && xs.size() < 12; t /= 2) xs.push_back(t);
    if (xs.empty()) xs.push_back(x);
    std::reverse(xs.begin(), xs.end());
    auto rows = decay_profile(v, fn, sv, xs, alpha, o.c0, opt);

    if (o.format == "json") {
        json j = json_root("sum", digest);
        j["form"] = o.form;
        j["variant"] = o.variant;
        j["alpha"] = o.alpha_text;
        j["c0"] = o.c0;
        json out = json::array();
        for (const auto& r : rows)
            out.push_back({{"x", r.x},
                           {"abs_value", r.abs_value},
                           {"over_x", r.over_x},
                           {"normalized", r.normalized}});
        j["rows"] = std::move(out);
        emit_json(j);
        return 0;
    }
    std::cout << "x,abs_value,over_x,normalized\n";
    for (const auto& r : rows)
        std::cout << r.x << "," << format_double(r.abs_value) << "," << format_double(r.over_x)
                  << "," << format_double(r.normalized) << "\n";
    csv_footer(digest);
    return 0;
}

// ---------------------------------------------------------------------------
// arcs: rational approximation and major/minor classification of one alpha.

int run_arcs(const Options& o) {
    u64 digest = config_digest("arcs", o);
    double alpha = parse_alpha(o.alpha_text);
    if (!std::isfinite(o.limit) || o.limit < 16 || o.limit > 1e12)
        throw std::invalid_argument("limit must lie in [16, 1e12]");
    ArcLabel label = classify_arc(alpha, o.limit, o.c1);
    if (o.format == "csv") {
        std::cout << "kind,a,q,err,threshold,big_q\n";
        std::cout << arc_kind_name(label.kind) << "," << label.approx.a << "," << label.approx.q
                  << "," << format_double(label.approx.err) << ","
                  << format_double(label.threshold) << "," << format_double(label.big_q) << "\n";
        csv_footer(digest);
        return 0;
    }
    json j = json_root("arcs", digest);
    j["alpha"] = o.alpha_text;
    j["x"] = o.limit;
    j["c1"] = o.c1;
    j["kind"] = arc_kind_name(label.kind);
    j["a"] = label.approx.a;
    j["q"] = label.approx.q;
    j["err"] = label.approx.err;
    j["threshold"] = label.threshold;
    j["big_q"] = label.big_q;
    emit_json(j);
    return 0;
}

// ---------------------------------------------------------------------------
// vaughan: run the bilinear decomposition once and report every piece.

double parse_cut(const std::string& text, double auto_value, const char* what) {
    if (text == "auto") return auto_value;
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != text.size() || !(v >= 1))
        throw std::invalid_argument(std::string(what) + " must be \"auto\" or a number >= 1");
    return v;
}

int run_vaughan(const Options& o) {
    u64 digest = config_digest("vaughan", o);
    u64 cap = o.form == "weight16" ? 10'000 : 100'000;
    u64 x = to_count(o.limit, 32, cap, "limit");
    double alpha = parse_alpha(o.alpha_text);
    VaughanParams auto_p = vaughan_auto_params(double(x));
    double y = parse_cut(o.y_text, auto_p.y, "y");
    double z = parse_cut(o.z_text, auto_p.z, "z");
    SieveTables sv = make_sieve(x);
    HeckeFn fn = make_form(o, x, sv);
    BlockOptions opt;
    opt.threads = o.threads;
    VaughanDecomposition dec = vaughan_decompose(fn, sv, x, alpha, y, z, opt);

    if (o.format == "csv") {
        std::cout << "x,y,z,t_direct_re,t_direct_im,boundary_re,boundary_im,t1_re,t1_im,"
                     "t2_re,t2_im,spurious_re,spurious_im,residual,spurious_gap,ok\n";
        std::cout << dec.x << "," << format_double(dec.y) << "," << format_double(dec.z) << ","
                  << format_double(dec.t_direct.real()) << ","
                  << format_double(dec.t_direct.imag()) << ","
                  << format_double(dec.boundary.real()) << ","
                  << format_double(dec.boundary.imag()) << "," << format_double(dec.t1.real())
                  << "," << format_double(dec.t1.imag()) << "," << format_double(dec.t2.real())
                  << "," << format_double(dec.t2.imag()) << ","
                  << format_double(dec.spurious.real()) << ","
                  << format_double(dec.spurious.imag()) << "," << format_double(dec.residual)
                  << "," << format_double(dec.spurious_gap) << "," << (dec.ok ? 1 : 0) << "\n";
        csv_footer(digest);
        return dec.ok ? 0 : 1;
    }

    json j = json_root("vaughan", digest);
    j["form"] = o.form;
    j["alpha"] = o.alpha_text;
    j["x"] = dec.x;
    j["y"] = dec.y;
    j["z"] = dec.z;
    j["t_direct"] = cplx_json(dec.t_direct);
    j["boundary"] = cplx_json(dec.boundary);
    j["t1"] = cplx_json(dec.t1);
    j["t2"] = cplx_json(dec.t2);
    j["t1_unrestricted"] = cplx_json(dec.t1_unrestricted);
    j["spurious"] = cplx_json(dec.spurious);
    j["residual"] = dec.residual;
    j["residual_unrestricted"] = dec.residual_unrestricted;
    j["spurious_gap"] = dec.spurious_gap;
    j["ok"] = dec.ok;
    emit_json(j);
    return dec.ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// pnt: character-twisted prime sums for every character mod q.

int run_pnt(const Options& o) {
    u64 digest = config_digest("pnt", o);
    u64 cap = o.form == "weight16" ? 10'000 : 100'000;
    u64 x = to_count(o.limit, 2, cap, "limit");
    if (o.modulus < 1 || o.modulus > 2000)
        throw std::invalid_argument("modulus must lie in [1, 2000]");
    SieveTables sv = make_sieve(x);
    HeckeFn fn = make_form(o, x, sv);
    BlockOptions opt;
    opt.threads = o.threads;
    CharacterGroup group = character_group(o.modulus);

    if (o.format == "json") {
        json j = json_root("pnt", digest);
        j["form"] = o.form;
        j["q"] = o.modulus;
        j["x"] = x;
        json rows = json::array();
        for (const auto& chi : group.characters()) {
            TwistedCharSum s = twisted_prime_sum(fn, sv, chi, x, opt);
            rows.push_back({{"index", chi.index()},
                            {"order", chi.order()},
                            {"conductor", chi.conductor()},
                            {"primitive", chi.is_primitive()},
                            {"even", chi.is_even()},
                            {"value", cplx_json(s.value)},
                            {"abs", std::abs(s.value)},
                            {"terms", s.terms}});
        }
        j["rows"] = std::move(rows);
        emit_json(j);
        return 0;
    }
    std::cout << "index,order,conductor,primitive,even,re,im,abs,terms\n";
    for (const auto& chi : group.characters()) {
        TwistedCharSum s = twisted_prime_sum(fn, sv, chi, x, opt);
        std::cout << chi.index() << "," << chi.order() << "," << chi.conductor() << ","
                  << (chi.is_primitive() ? 1 : 0) << "," << (chi.is_even() ? 1 : 0) << ","
                  << format_double(s.value.real()) << "," << format_double(s.value.imag()) << ","
                  << format_double(std::abs(s.value)) << "," << s.terms << "\n";
    }
    csv_footer(digest);
    return 0;
}

// ---------------------------------------------------------------------------
// certify-localfactor: grid certificate for the local factor's minimum.

int run_certify(const Options& o) {
    u64 digest = config_digest("certify-localfactor", o);
    LocalFactorCertificate cert = local_factor_certificate(o.step);
    if (o.format == "csv") {
        std::cout << "grid_step,u_bound,z_bound,root_margin,grid_min,slack,certified_min,"
                     "u_zero_bound,margin_p3,conclusive\n";
        std::cout << format_double(cert.grid_step) << "," << format_double(cert.u_bound) << ","
                  << format_double(cert.z_bound) << "," << format_double(cert.root_margin) << ","
                  << format_double(cert.grid_min) << "," << format_double(cert.slack) << ","
                  << format_double(cert.certified_min) << ","
                  << format_double(cert.u_zero_bound) << "," << format_double(cert.margin_p3)
                  << "," << (cert.conclusive ? 1 : 0) << "\n";
        csv_footer(digest);
        return cert.conclusive ? 0 : 1;
    }
    json j = json_root("certify-localfactor", digest);
    j["grid_step"] = cert.grid_step;
    j["u_bound"] = cert.u_bound;
    j["z_bound"] = cert.z_bound;
    j["root_margin"] = cert.root_margin;
    j["grid_min"] = cert.grid_min;
    j["slack"] = cert.slack;
    j["certified_min"] = cert.certified_min;
    j["u_zero_bound"] = cert.u_zero_bound;
    j["margin_p3"] = cert.margin_p3;
    j["conclusive"] = cert.conclusive;
    emit_json(j);
    return cert.conclusive ? 0 : 1;
}

// ---------------------------------------------------------------------------
// circle: ternary representation counts with eigenvalue weights.

int run_circle(const Options& o) {
    u64 digest = config_digest("circle", o);
    u64 cap = o.form == "weight16" ? 10'000 : 100'000;
    u64 x = to_count(o.limit, 6, std::min<u64>(cap, 100'000), "limit");
    SieveTables sv = make_sieve(x);
    HeckeFn fn = make_form(o, x, sv);
    auto reports = ternary_weighted(fn, sv, x);

    if (o.format == "json") {
        json j = json_root("circle", digest);
        j["form"] = o.form;
        j["n_max"] = x;
        json rows = json::array();
        for (u64 n = 4; n <= x; ++n) {
            const auto& r = reports[n];
            rows.push_back({{"n", r.n},
                            {"r2", r.r2},
                            {"r3", r.r3},
                            {"weighted", r.weighted},
                            {"weighted3", r.weighted3},
                            {"parity_flagged", r.parity_flagged}});
        }
        j["rows"] = std::move(rows);
        emit_json(j);
        return 0;
    }
    std::cout << "n,r2,r3,weighted,weighted3,parity_flagged\n";
    for (u64 n = 4; n <= x; ++n) {
        const auto& r = reports[n];
        std::cout << r.n << "," << r.r2 << "," << r.r3 << "," << format_double(r.weighted) << ","
                  << format_double(r.weighted3) << "," << (r.parity_flagged ? 1 : 0) << "\n";
    }
    csv_footer(digest);
    return 0;
}

// ---------------------------------------------------------------------------
// verify-all: the deterministic check battery.  One line per check, then a
// summary line; output never mentions timing or scheduling, so runs with
// different thread counts must agree byte for byte.

struct CheckResult {
    std::string name;
    bool ok = false;
    std::string detail;
};

class Battery {
  public:
    void report(const std::string& name, bool ok, const std::string& detail = "") {
        results_.push_back({name, ok, detail});
    }

    template <typename F>
    void run(const std::string& name, F&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            report(name, false, std::string("exception: ") + e.what());
        }
    }

    const std::vector<CheckResult>& results() const { return results_; }

  private:
    std::vector<CheckResult> results_;
};

int run_verify_all(const Options& o) {
    u64 cap = o.form == "weight16" ? 10'000 : 100'000;
    u64 x = to_count(o.limit, 2000, cap, "limit");
    BlockOptions opt;
    opt.threads = o.threads;
    Battery bat;

    SieveTables sv = make_sieve(std::max<u64>(x, 10'000));
    HeckeFn fn = make_form(o, x, sv);

    // Coefficient oracle: the recursive product expansion must match the
    // Eisenstein-series route coefficient by coefficient.
    bat.run("tau-oracle", [&] {
        CuspFormSeries delta = make_series("delta", 500);
        auto wide = delta_from_eisenstein(500);
        static const long long first[7] = {0, 1, -24, 252, -1472, 4830, -6048};
        u64 bad = 0;
        for (u64 n = 1; n <= 500 && bad == 0; ++n)
            if (delta.a(n) != wide[n]) bad = n;
        for (u64 n = 1; n <= 6 && bad == 0; ++n)
            if (delta.a(n) != i128(first[n])) bad = n;
        bat.report("tau-oracle", bad == 0,
                   bad == 0 ? "coefficients agree to 500" : "mismatch at n=" + std::to_string(bad));
    });

    // Exact integral multiplicativity for both eigenforms.
    bat.run("hecke-integral", [&] {
        auto r12 = verify_hecke_integral(make_series("delta", 2500), 50);
        auto r16 = verify_hecke_integral(make_series("weight16", 2500), 50);
        bat.report("hecke-integral", r12.ok && r16.ok,
                   "pairs=" + std::to_string(r12.pairs_checked + r16.pairs_checked));
    });

    bat.run("hecke-relations", [&] {
        auto rep = hecke_relation_check(fn, sv, 2000, o.seed);
        bat.report("hecke-relations", rep.ok(), "max_err=" + format_double(rep.max_err));
    });

    bat.run("star-inequalities", [&] {
        LambdaStar star = lambda_star(fn);
        auto rep = check_star_inequalities(fn, star, sv, 2000, o.seed + 1);
        bat.report("star-inequalities", rep.ok(),
                   "pairs=" + std::to_string(rep.pairs_checked));
    });

    bat.run("eigenvalue-bound", [&] {
        auto [p, worst] = max_prime_lambda(fn, sv, x);
        bool ok = worst <= 2.0 + 1e-12;
        bat.report("eigenvalue-bound", ok,
                   "max=" + format_double(worst) + " at p=" + std::to_string(p));
    });

    bat.run("vaughan-identity", [&] {
        u64 bad = 0;
        u64 top = std::min<u64>(x, 2000);
        for (u64 m = 3; m <= top && bad == 0; ++m)
            if (!vaughan_identity_check(sv, m, 2, 2).ok) bad = m;
        for (u64 m = 11; m <= top && bad == 0; ++m)
            if (!vaughan_identity_check(sv, m, 10, 10).ok) bad = m;
        bat.report("vaughan-identity", bad == 0,
                   bad == 0 ? "m<=" + std::to_string(top) : "fails at m=" + std::to_string(bad));
    });

    bat.run("vaughan-decomposition", [&] {
        std::mt19937_64 rng(o.seed + 2);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double worst = 0;
        bool ok = true;
        for (int i = 0; i < 3; ++i) {
            double alpha = unif(rng);
            u64 xv = 1000 + rng() % (std::min<u64>(x, 20'000) - 999);
            VaughanParams p = vaughan_auto_params(double(xv));
            auto dec = vaughan_decompose(fn, sv, xv, alpha, p.y, p.z, opt);
            ok = ok && dec.ok && dec.spurious_gap <= 1e-8 * (1.0 + std::abs(dec.t_direct));
            worst = std::max(worst, dec.residual);
        }
        bat.report("vaughan-decomposition", ok, "max_residual=" + format_double(worst));
    });

    bat.run("square-inversion", [&] {
        std::mt19937_64 rng(o.seed + 3);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        u64 t = std::min<u64>(30, u64(std::sqrt(double(x))));
        bool ok = true;
        double worst = 0;
        for (int i = 0; i < 3; ++i) {
            auto rep = verify_square_inversion(fn, sv, t, unif(rng), opt);
            ok = ok && rep.ok;
            worst = std::max(worst, rep.abs_diff);
        }
        bat.report("square-inversion", ok, "max_diff=" + format_double(worst));
    });

    bat.run("square-twist", [&] {
        std::mt19937_64 rng(o.seed + 4);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        bool ok = true;
        double worst = 0;
        for (u64 a : {1, 2, 6, 30}) {
            u64 t = std::min<u64>(30, u64(std::sqrt(double(x) / double(a))));
            auto rep = verify_square_twist(fn, sv, t, a, unif(rng), opt);
            ok = ok && rep.ok;
            worst = std::max(worst, rep.abs_diff);
        }
        bat.report("square-twist", ok, "max_diff=" + format_double(worst));
    });

    bat.run("parseval", [&] {
        std::vector<double> c(512);
        for (u64 n = 1; n <= 512; ++n) c[n - 1] = double(sv.mobius(n)) * fn(n);
        auto rep = parseval_check(c, 1024);
        bat.report("parseval", rep.ok, "rel_err=" + format_double(rep.rel_err));
    });

    bat.run("min-norm-bound", [&] {
        std::mt19937_64 rng(o.seed + 5);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        int accepted = 0;
        int rounds = 0;
        bool ok = true;
        double worst_ratio = 0;
        while (accepted < 20 && rounds < 400) {
            ++rounds;
            double alpha = unif(rng);
            RationalApprox approx;
            bool found = false;
            for (const auto& conv : continued_fraction(alpha))
                if (conv.q >= 10 && conv.q <= 1000) {
                    approx.a = conv.a;
                    approx.q = conv.q;
                    found = true;
                }
            if (!found) continue;
            ++accepted;
            auto m = min_norm_sum(alpha, 1000, 1000, approx);
            ok = ok && m.lhs <= 10.0 * m.rhs;
            worst_ratio = std::max(worst_ratio, m.ratio);
        }
        ok = ok && accepted == 20;
        bat.report("min-norm-bound", ok, "worst_ratio=" + format_double(worst_ratio));
    });

    bat.run("local-factor", [&] {
        auto cert = local_factor_certificate(1e-3);
        bool ok = cert.conclusive && cert.certified_min >= 0.01 && cert.margin_p3 > 0.125;
        bat.report("local-factor", ok,
                   "certified_min=" + format_double(cert.certified_min) +
                       " margin_p3=" + format_double(cert.margin_p3));
    });

    bat.run("residue-decomposition", [&] {
        u64 xv = std::min<u64>(x, 10'000);
        bool ok = true;
        double worst = 0;
        for (u64 q : {1, 4, 5, 6, 12})
            for (u64 a : {1, 3}) {
                auto rep = residue_decomposition_check(fn, sv, xv, a, q);
                ok = ok && rep.ok;
                worst = std::max({worst, rep.diff_residue, rep.diff_character});
            }
        bat.report("residue-decomposition", ok, "max_diff=" + format_double(worst));
    });

    bat.run("circle-frozen", [&] {
        auto reports = ternary_weighted(fn, sv, std::min<u64>(x, 500));
        static const u64 frozen[5][2] = {{6, 1}, {7, 3}, {8, 3}, {9, 4}, {10, 6}};
        bool ok = true;
        for (const auto& f : frozen) ok = ok && reports[f[0]].r3 == f[1];
        for (const auto& r : reports)
            ok = ok && std::abs(r.weighted) <= 2.0 * double(r.r3) + 1e-9;
        bat.report("circle-frozen", ok, "r3(9)=" + std::to_string(reports[9].r3));
    });

    bat.run("continued-fractions", [&] {
        std::mt19937_64 rng(o.seed + 6);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        bool ok = true;
        for (int i = 0; i < 50; ++i) {
            double alpha = unif(rng);
            auto approx = dirichlet_approx(alpha, 1e6);
            ok = ok && approx.q <= 1'000'000 &&
                 approx.err <= 1.0 / (double(approx.q) * 1e6) + 1e-15;
            classify_arc(alpha, std::max<double>(16.0, double(x)), o.c1);
        }
        bat.report("continued-fractions", ok, "samples=50");
    });

    bat.run("block-determinism", [&] {
        BlockOptions one, four;
        one.threads = 1;
        four.threads = 4;
        double alpha = parse_alpha("golden");
        bool ok = true;
        for (SumVariant v : {SumVariant::Linear, SumVariant::Moebius, SumVariant::PrimeLog}) {
            cplx a = evaluate_variant(v, fn, sv, x, alpha, one).value;
            cplx b = evaluate_variant(v, fn, sv, x, alpha, four).value;
            ok = ok && std::memcmp(&a, &b, sizeof a) == 0;
        }
        bat.report("block-determinism", ok, "variants=3");
    });

    u64 pass = 0, fail = 0;
    for (const auto& r : bat.results()) {
        if (r.ok) {
            ++pass;
            std::cout << "PASS " << r.name;
        } else {
            ++fail;
            std::cout << "FAIL " << r.name;
        }
        if (!r.detail.empty()) std::cout << " " << r.detail;
        std::cout << "\n";
    }
    std::cout << "SUMMARY pass=" << pass << " fail=" << fail << "\n";
    return fail == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    std::string command;

    CLI::App app{"verification laboratory for Hecke eigenvalue exponential sums"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    auto add_form = [&](CLI::App* cmd) {
        cmd->add_option("--form", o.form, "eigenvalue source: delta, weight16, synthetic")
            ->check(CLI::IsMember({"delta", "weight16", "synthetic"}));
        cmd->add_option("--seed", o.seed, "seed for synthetic forms and randomized checks");
    };
    // The effective default is per command (tables default to CSV, single
    // reports to JSON) and is resolved after parsing.
    auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", o.format, "output format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    };
    auto add_threads = [&](CLI::App* cmd) {
        cmd->add_option("--threads", o.threads, "worker threads for block sums")
            ->check(CLI::Range(1, 64));
    };

    CLI::App* form = app.add_subcommand("form", "tabulate coefficients and eigenvalues");
    add_form(form);
    form->add_option("--limit", o.limit, "largest index tabulated");
    add_format(form);
    form->callback([&] { command = "form"; });

    CLI::App* moments = app.add_subcommand("moments", "mean values of eigenvalue powers");
    add_form(moments);
    moments->add_option("--limit", o.limit, "summation range X");
    add_format(moments);
    moments->callback([&] { command = "moments"; });

    CLI::App* sum = app.add_subcommand("sum", "decay profile of a twisted sum");
    add_form(sum);
    sum->add_option("--variant", o.variant, "linear, moebius, prime, or prime-log");
    sum->add_option("--alpha", o.alpha_text, "phase: decimal, a/q, golden, sqrt2-1");
    sum->add_option("--limit", o.limit, "largest summation range X");
    sum->add_option("--c0", o.c0, "constant in the reference decay rate");
    add_threads(sum);
    add_format(sum);
    sum->callback([&] { command = "sum"; });

    CLI::App* arcs = app.add_subcommand("arcs", "classify alpha as major or minor arc");
    arcs->add_option("--alpha", o.alpha_text, "phase: decimal, a/q, golden, sqrt2-1");
    arcs->add_option("--limit", o.limit, "range X controlling the arc cutoff");
    arcs->add_option("--c1", o.c1, "cutoff constant");
    add_format(arcs);
    arcs->callback([&] { command = "arcs"; });

    CLI::App* vaughan = app.add_subcommand("vaughan", "bilinear decomposition of one sum");
    add_form(vaughan);
    vaughan->add_option("--limit", o.limit, "summation range X");
    vaughan->add_option("--alpha", o.alpha_text, "phase: decimal, a/q, golden, sqrt2-1");
    vaughan->add_option("--y", o.y_text, "type I cut; \"auto\" uses X^(1/5)");
    vaughan->add_option("--z", o.z_text, "type II cut; \"auto\" uses X^(1/5)");
    add_threads(vaughan);
    add_format(vaughan);
    vaughan->callback([&] { command = "vaughan"; });

    CLI::App* pnt = app.add_subcommand("pnt", "character-twisted prime sums mod q");
    add_form(pnt);
    pnt->add_option("--q", o.modulus, "modulus of the character group");
    pnt->add_option("--limit", o.limit, "summation range X");
    add_threads(pnt);
    add_format(pnt);
    pnt->callback([&] { command = "pnt"; });

    CLI::App* certify = app.add_subcommand("certify-localfactor",
                                           "grid certificate for the local factor minimum");
    certify->add_option("--step", o.step, "grid step in (0, 1e-2]");
    add_format(certify);
    certify->callback([&] { command = "certify-localfactor"; });

    CLI::App* circle = app.add_subcommand("circle", "weighted ternary representation counts");
    add_form(circle);
    circle->add_option("--limit", o.limit, "largest n tabulated");
    add_format(circle);
    circle->callback([&] { command = "circle"; });

    CLI::App* verify = app.add_subcommand("verify-all", "run the deterministic check battery");
    add_form(verify);
    verify->add_option("--limit", o.limit, "table range X for the battery");
    verify->add_option("--c1", o.c1, "arc cutoff constant used in sampling checks");
    add_threads(verify);
    verify->callback([&] { command = "verify-all"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (o.format.empty())
        o.format = command == "arcs" || command == "vaughan" || command == "certify-localfactor"
                       ? "json"
                       : "csv";

    try {
        if (command == "form") return run_form(o);
        if (command == "moments") return run_moments(o);
        if (command == "sum") return run_sum(o);
        if (command == "arcs") return run_arcs(o);
        if (command == "vaughan") return run_vaughan(o);
        if (command == "pnt") return run_pnt(o);
        if (command == "certify-localfactor") return run_certify(o);
        if (command == "circle") return run_circle(o);
        if (command == "verify-all") return run_verify_all(o);
        std::cerr << "error: no subcommand selected\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const capacity_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
