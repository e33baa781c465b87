#include "paralab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "paralab/arithmetic.hpp"
#include "paralab/dyadic.hpp"
#include "paralab/incidence.hpp"
#include "paralab/psi.hpp"

namespace paralab::runner {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hexf(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

class Params {
public:
    Params(const PipelineInfo& info, const std::map<std::string, std::string>& given) : info_(info) {
        for (const auto& p : info.params) values_[p.key] = p.fallback;
        for (const auto& [k, v] : given) {
            if (!values_.count(k)) {
                std::string keys;
                for (const auto& p : info.params) keys += (keys.empty() ? "" : ", ") + p.key;
                throw Error("unknown parameter '" + k + "' for pipeline " + info.name + " (expected one of: " + keys + ")");
            }
            values_[k] = v;
        }
    }

    const std::map<std::string, std::string>& values() const { return values_; }
    const std::string& str(const std::string& k) const { return values_.at(k); }

    double real(const std::string& k) const {
        const auto& s = str(k);
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0' || !std::isfinite(v)) bad(k, "a number");
        return v;
    }

    int integer(const std::string& k) const {
        double v = real(k);
        if (v != std::floor(v) || std::abs(v) > 1e9) bad(k, "an integer");
        return static_cast<int>(v);
    }

    // "a:b" or "a,b,c"
    std::vector<int> ints(const std::string& k) const {
        const auto& s = str(k);
        std::vector<int> out;
        try {
            if (auto c = s.find(':'); c != std::string::npos) {
                int a = std::stoi(s.substr(0, c)), b = std::stoi(s.substr(c + 1));
                if (b < a) bad(k, "an increasing range a:b");
                for (int i = a; i <= b; ++i) out.push_back(i);
            } else {
                std::stringstream ss(s);
                std::string tok;
                while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
            }
        } catch (const std::logic_error&) {
            bad(k, "an integer range a:b or a list a,b,c");
        }
        if (out.empty()) bad(k, "a non-empty list");
        return out;
    }

    void require(bool ok, const std::string& k, const std::string& what) const {
        if (!ok) throw Error("parameter '" + k + "' = " + str(k) + " invalid for pipeline " + info_.name + ": " + what);
    }

private:
    [[noreturn]] void bad(const std::string& k, const std::string& what) const {
        throw Error("parameter '" + k + "' of pipeline " + info_.name + " expects " + what + ", got '" + str(k) + "'");
    }

    const PipelineInfo& info_;
    std::map<std::string, std::string> values_;
};

Verdict verdict(const std::string& check, double measured, const std::string& rel, double ref, double tol) {
    Verdict v{check, measured, ref, tol, rel, false};
    if (rel == "<=")
        v.pass = measured <= ref + tol;
    else if (rel == ">=")
        v.pass = measured >= ref - tol;
    else
        v.pass = std::abs(measured - ref) <= tol;
    return v;
}

struct Context {
    const Params& p;
    ExperimentRecord& rec;
    std::uint64_t seed;
};

void add_row(ExperimentRecord& rec, std::initializer_list<std::string> cells) { rec.rows.emplace_back(cells); }

void fit_into(ExperimentRecord& rec, ScalingSeries& ser, const std::string& name) {
    fit_exponent(ser);
    rec.fitted[name] = ser.slope;
    rec.fitted[name + "_residual"] = ser.residual;
    for (const auto& [d, v] : ser.rows) rec.plot.emplace_back(std::log2(1.0 / d), std::log2(v));
}

// ---- pipelines ------------------------------------------------------------------------------

void fourier_decay(Context& c) {
    const auto& p = c.p;
    const std::string kind = p.str("measure");
    p.require(kind == "arc" || kind == "lattice", "measure", "use arc or lattice");
    const double s = kind == "arc" ? 1.0 : p.real("s");
    const double pw = p.real("p");
    p.require(pw >= 1.0, "p", "p >= 1");
    const double t = decay_exponent(s) - p.real("margin");
    const double predicted = (2.0 - t) / pw;
    c.rec.predicted["decay_exponent"] = decay_exponent(s);
    c.rec.predicted["t"] = t;
    c.rec.predicted["slope"] = predicted;
    ScalingSeries ser;
    for (int k : p.ints("log2_R")) {
        p.require(k >= 0, "log2_R", "R >= 1");
        const double R = std::ldexp(1.0, k), delta = 1.0 / R;
        auto m = kind == "arc" ? arc_measure(delta) : lattice_parabola_measure(delta, s);
        double v = fourier_lp_norm(m, pw, R);
        ser.rows.push_back({delta, v});
        add_row(c.rec, {num(R), num(static_cast<double>(m.size())), num(v), num(k), num(std::log2(v))});
    }
    fit_into(c.rec, ser, "slope");
    c.rec.verdicts.push_back(verdict("log-log slope of the L^p norm in R", ser.slope, "<=", predicted, p.real("tol")));
}

void sharpness(Context& c) {
    const auto& p = c.p;
    const double s = p.real("s");
    const int n = p.integer("n");
    p.require(n == 3, "n", "the lattice example is measured against the p = 6 exponent, so n = 3");
    const double predicted = 2.0 - decay_exponent(s);
    c.rec.predicted["slope"] = predicted;
    ScalingSeries ser;
    for (int k : p.ints("levels")) {
        const double delta = std::ldexp(1.0, -k);
        auto m = lattice_parabola_measure(delta, s);
        double v = l2_norm_sq_power_exact(m, n, delta);
        ser.rows.push_back({delta, v});
        add_row(c.rec, {num(delta), num(static_cast<double>(m.size())), num(v), num(k), num(std::log2(v))});
    }
    fit_into(c.rec, ser, "slope");
    c.rec.verdicts.push_back(verdict("slope of log ||sigma^n_delta||^2 in log(1/delta)", ser.slope, "within", predicted, p.real("tol")));
}

std::vector<int> digit_list(const Params& p, const std::string& key, int base) {
    std::vector<int> d = p.ints(key);
    for (int x : d) p.require(x >= 0 && x < base, key, "digits lie in [0, base)");
    return d;
}

void sumset_growth(Context& c) {
    const auto& p = c.p;
    const int base = p.integer("base");
    p.require(base >= 2 && (base & (base - 1)) == 0, "base", "a power of two, so that base^-m is dyadic");
    const auto digits = digit_list(p, "digits", base);
    const int n = p.integer("n");
    p.require(n >= 1, "n", "n >= 1");
    const double s = cantor_dimension(digits, base);
    const double predicted = sumset_exponent(std::min(s, 1.0), n);
    c.rec.predicted["s"] = s;
    c.rec.predicted["slope"] = predicted;
    SumsetOptions opt;
    opt.budget = p.real("budget");
    ScalingSeries ser;
    for (int m : p.ints("digits_depth")) {
        const double delta = std::pow(static_cast<double>(base), -m);
        auto P = cantor_parabola_measure(delta, digits, base);
        auto C = sumset_cover(P, n, delta, opt);
        auto count = static_cast<double>(C.squares.size());
        ser.rows.push_back({delta, count});
        add_row(c.rec, {num(delta), num(static_cast<double>(P.size())), num(count), num(C.exact ? 1 : 0),
                        num(std::log2(1.0 / delta)), num(std::log2(count))});
    }
    fit_into(c.rec, ser, "slope");
    c.rec.verdicts.push_back(verdict("box-count slope of nK", ser.slope, ">=", predicted, p.real("tol")));
}

std::vector<Vec2> oracle_points(std::mt19937_64& rng, std::size_t count, bool coarse) {
    // coarse: x on the 1/16 grid, which makes many sums coincide exactly
    std::set<std::int64_t> ks;
    const std::int64_t span = coarse ? 16 : 1024;
    std::uniform_int_distribution<std::int64_t> pick(-span, span);
    while (ks.size() < count) ks.insert(pick(rng));
    std::vector<Vec2> P;
    for (auto k : ks) {
        double x = static_cast<double>(k) / static_cast<double>(span);
        P.push_back({x, x * x});
    }
    return P;
}

void vinogradov(Context& c) {
    const auto& p = c.p;
    const double s = p.real("s"), t = p.real("t"), bound = p.real("bound");
    const int n = p.integer("n");
    c.rec.predicted["decay_exponent"] = decay_exponent(s);
    c.rec.predicted["t"] = t;
    c.rec.verdicts.push_back(verdict("t below min{3s, s+1}", t, "<=", decay_exponent(s), 0.0));
    ScalingSeries ser;
    double last_ratio = 0.0;
    for (int k : p.ints("levels")) {
        const double delta = std::ldexp(1.0, -k);
        auto P = lattice_parabola_measure(delta, s);
        auto count = static_cast<double>(vinogradov_count(P, n, delta, p.real("budget")));
        const double N2n = std::pow(static_cast<double>(P.size()), 2.0 * n);
        const double normalized = count / N2n;
        last_ratio = normalized / std::pow(delta, t);
        ser.rows.push_back({delta, normalized});
        add_row(c.rec, {num(delta), num(static_cast<double>(P.size())), num(count), num(normalized), num(last_ratio),
                        num(k), num(std::log2(normalized))});
    }
    fit_into(c.rec, ser, "slope");
    c.rec.fitted["exponent"] = -ser.slope;
    c.rec.verdicts.push_back(verdict("count / (delta^t |P|^2n) at the finest scale", last_ratio, "<=", bound, 0.0));

    // oracle agreement on random small instances
    std::mt19937_64 rng(c.seed);
    const int instances = p.integer("oracle_instances");
    const double limit = p.real("oracle_limit");
    int mismatches = 0;
    for (int i = 0; i < instances; ++i) {
        const int m = 1 + static_cast<int>(rng() % 3);
        const auto cap = static_cast<std::size_t>(std::floor(std::pow(limit, 1.0 / (2.0 * m)) + 1e-9));
        const std::size_t size = 2 + rng() % std::max<std::size_t>(1, std::min<std::size_t>(cap, 24) - 1);
        const double delta = std::ldexp(1.0, -5 - static_cast<int>(rng() % 4));
        auto pts = oracle_points(rng, size, i % 2 == 0);
        if (!is_separated(pts, delta)) continue;
        auto fast = vinogradov_count(custom_measure(pts, std::vector<double>(pts.size(), 1.0)), m, delta);
        auto slow = vinogradov_bruteforce(pts, m, delta);
        mismatches += fast != slow;
    }
    c.rec.fitted["oracle_mismatches"] = mismatches;
    c.rec.verdicts.push_back(verdict("exact counter vs brute-force mismatches", mismatches, "<=", 0.0, 0.0));
}

AtomicMeasure mu_conv_sigma(const std::vector<DyadicSquare>& mu_support, const AtomicMeasure& sigma) {
    std::vector<Vec2> pts;
    std::vector<double> w;
    const double mm = 1.0 / static_cast<double>(mu_support.size());
    for (const auto& q : mu_support)
        for (const auto& a : sigma.atoms) {
            pts.push_back(q.center() + a.p);
            w.push_back(mm * a.mass);
        }
    return custom_measure(pts, w, "mu*sigma");
}

void smoothing(Context& c) {
    const auto& p = c.p;
    const double s = p.real("s"), t = p.real("t");
    p.require(s > 0.5 && s <= 1.0, "s", "s in (1/2, 1]");
    p.require(t > 0.0 && t < 2.0, "t", "t in (0, 2)");
    const double predicted = 2.0 - zeta_exponent(s, t);
    c.rec.predicted["zeta"] = zeta_exponent(s, t);
    c.rec.predicted["slope"] = predicted;
    ScalingSeries ser;
    for (int k : p.ints("levels")) {
        const double delta = std::ldexp(1.0, -k);
        auto mu = random_katz_tao_squares(t, delta, 1.0, c.seed + static_cast<std::uint64_t>(k));
        auto nu = mu_conv_sigma(mu, lattice_parabola_measure(delta, s));
        double v = l2_norm_sq_power_exact(nu, 1, delta);
        ser.rows.push_back({delta, v});
        add_row(c.rec, {num(delta), num(static_cast<double>(mu.size())), num(static_cast<double>(nu.size())), num(v), num(k),
                        num(std::log2(v))});
    }
    fit_into(c.rec, ser, "slope");
    c.rec.verdicts.push_back(verdict("slope of log ||(mu*sigma)_delta||^2 in log(1/delta)", ser.slope, "<=", predicted, p.real("tol")));
}

AnchorKind anchor_kind(const Params& p) {
    const auto& k = p.str("kind");
    p.require(k == "parabola" || k == "tube", "kind", "use parabola or tube");
    return k == "tube" ? AnchorKind::Tube : AnchorKind::Parabola;
}

void furstenberg(Context& c) {
    const auto& p = c.p;
    const double s = p.real("s"), t = p.real("t"), kappa = p.real("kappa");
    const double g = gamma_exponent(s, t);
    c.rec.predicted["gamma"] = g;
    ScalingSeries ser;
    int failures = 0;
    for (int k : p.ints("levels")) {
        InstanceOptions o;
        o.kind = anchor_kind(p);
        o.s = s;
        o.t = t;
        o.delta = std::ldexp(1.0, -k);
        o.seed = c.seed + static_cast<std::uint64_t>(k);
        auto inst = random_instance(o);
        auto rep = furstenberg_check(inst, s, t, kappa, p.real("audit_limit"));
        failures += !rep.pass;
        auto u = static_cast<double>(rep.union_size);
        ser.rows.push_back({o.delta, u});
        add_row(c.rec, {num(o.delta), num(static_cast<double>(inst.anchors.size())), num(u), num(rep.threshold),
                        num(rep.anchor_constant), num(rep.family_constant), num(k), num(std::log2(u))});
    }
    fit_into(c.rec, ser, "slope");
    c.rec.verdicts.push_back(verdict("scales with |F| below delta^{-gamma+kappa}", failures, "<=", 0.0, 0.0));
}

void fu_ren(Context& c) {
    const auto& p = c.p;
    const auto levels = p.ints("levels");
    const int count = p.integer("instances");
    const double eps = p.real("eps"), K = p.real("constant"), smin = p.real("s_min");
    p.require(smin >= 0.0 && smin <= 1.0, "s_min", "in [0,1]");
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
        InstanceOptions o;
        o.kind = i % 2 ? AnchorKind::Tube : AnchorKind::Parabola;
        o.s = smin + (1.0 - smin) * U(rng);
        o.t = (2.0 - o.s) * U(rng);
        const int k = levels[static_cast<std::size_t>(i) % levels.size()];
        o.delta = std::ldexp(1.0, -k);
        o.seed = rng();
        auto inst = random_instance(o);
        auto inc = count_incidences(inst);
        std::set<DyadicSquare> F;
        for (const auto& f : inst.families) F.insert(f.begin(), f.end());
        const double rhs = K * fu_ren_rhs(inst.C1, inst.C2, static_cast<double>(F.size()),
                                          static_cast<double>(inst.anchors.size()), o.delta, eps);
        const double ratio = static_cast<double>(inc.total) / rhs;
        worst = std::max(worst, ratio);
        c.rec.plot.emplace_back(std::log2(rhs), std::log2(static_cast<double>(inc.total)));
        add_row(c.rec, {num(i), i % 2 ? "tube" : "parabola", num(o.s), num(o.t), num(o.delta),
                        num(static_cast<double>(inst.anchors.size())), num(static_cast<double>(F.size())),
                        num(static_cast<double>(inc.total)), num(inst.C1), num(inst.C2), num(rhs), num(ratio)});
    }
    c.rec.fitted["worst_ratio"] = worst;
    c.rec.verdicts.push_back(verdict("worst incidences / (K delta^-eps sqrt(delta^-1 C1 C2 |F||P|))", worst, "<=", 1.0, 0.0));
}

struct SandwichCounts {
    std::size_t lower = 0, upper_zero = 0, upper_rest = 0, nodes = 0;
};

// Pi_r <= sum 2^j 1_{A_j} <= C Pi_{8r}, the upper side checked against the max of Pi_{8r} over the
// surrounding r-cells (one cell of slack). A_0 is taken on the support of Pi_r.
SandwichCounts sandwich(const GridField& f, const GridField& g, double r, double C) {
    auto L = dyadic_level_sets(f, r);
    const auto cell = static_cast<std::int64_t>(L.cell);
    const auto nx = static_cast<std::int64_t>(f.nx), ny = static_cast<std::int64_t>(f.ny);
    // max of Pi_{8r} per r-cell, then over 3x3 cells
    const std::int64_t cx = nx / cell, cy = ny / cell;
    std::vector<double> cm(static_cast<std::size_t>(cx * cy), 0.0), nb(cm.size(), 0.0);
    for (std::int64_t j = 0; j < ny; ++j)
        for (std::int64_t i = 0; i < nx; ++i) {
            auto& v = cm[static_cast<std::size_t>((j / cell) * cx + i / cell)];
            v = std::max(v, g.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
        }
    for (std::int64_t j = 0; j < cy; ++j)
        for (std::int64_t i = 0; i < cx; ++i) {
            double m = 0.0;
            for (std::int64_t dj = -1; dj <= 1; ++dj)
                for (std::int64_t di = -1; di <= 1; ++di) {
                    std::int64_t a = i + di, b = j + dj;
                    if (a >= 0 && b >= 0 && a < cx && b < cy) m = std::max(m, cm[static_cast<std::size_t>(b * cx + a)]);
                }
            nb[static_cast<std::size_t>(j * cx + i)] = m;
        }
    SandwichCounts sc;
    for (std::int64_t j = 0; j < ny; ++j)
        for (std::int64_t i = 0; i < nx; ++i) {
            const auto idx = static_cast<std::size_t>(j * nx + i);
            const double u = L.upper[idx], v = f.values[idx];
            ++sc.nodes;
            if (v > u * (1.0 + 1e-12) + 1e-300) ++sc.lower;
            if (u == 0.0) continue;
            if (u > C * nb[static_cast<std::size_t>((j / cell) * cx + i / cell)] * (1.0 + 1e-9)) ++(u <= 1.0 ? sc.upper_zero : sc.upper_rest);
        }
    return sc;
}

void flattening(Context& c) {
    const auto& p = c.p;
    const int kmax = p.integer("kmax");
    p.require(kmax >= 0 && kmax <= 3, "kmax", "in [0, 3]");
    const double slack = p.real("slack"), C = p.real("sandwich_constant");
    const auto max_side = static_cast<std::size_t>(p.integer("max_side"));
    std::size_t mono_fail = 0, lower = 0, upper_zero = 0, upper_rest = 0;
    for (int lv : p.ints("r_levels")) {
        const double r = std::ldexp(1.0, -lv);
        auto arc = arc_measure(r);
        double prev = 0.0;
        for (int k = 0; k <= kmax + 1; ++k) {
            const int n = 2 << k;  // Pi^{2^k} = arc^{2^{k+1}}
            ConvolveOptions o;
            o.h = r / 4.0;
            if (power_frame(arc, n, 8.0 * r, o.h, r).nx > max_side) o.h = r / 2.0;
            const bool need_sandwich = k <= kmax;
            GridField g;
            if (need_sandwich) {
                o.frame = power_frame(arc, n, 8.0 * r, o.h, r);
                g = cached_convolve_power(arc, n, 8.0 * r, o);
                o.frame = g.spec();
            }
            auto f = cached_convolve_power(arc, n, r, o);
            const double J = std::sqrt(l2_norm_sq(f));
            SandwichCounts sc;
            if (need_sandwich) sc = sandwich(f, g, r, C);
            const double ratio = k > 0 ? J / prev : 0.0;
            if (k > 0 && J > prev * (1.0 + slack)) ++mono_fail;
            lower += sc.lower;
            upper_zero += sc.upper_zero;
            upper_rest += sc.upper_rest;
            add_row(c.rec, {num(r), num(k), num(o.h), num(static_cast<double>(f.nx)), num(J), num(ratio),
                            num(static_cast<double>(sc.lower)), num(static_cast<double>(sc.upper_zero)),
                            num(static_cast<double>(sc.upper_rest))});
            c.rec.plot.emplace_back(k, std::log2(J));
            prev = J;
        }
    }
    c.rec.predicted["sandwich_constant"] = C;
    c.rec.verdicts.push_back(verdict("J_r(k+1) > J_r(k)(1+slack) occurrences", static_cast<double>(mono_fail), "<=", 0.0, 0.0));
    c.rec.verdicts.push_back(verdict("nodes with Pi_r above sum 2^j 1_{A_j}", static_cast<double>(lower), "<=", 0.0, 0.0));
    c.rec.verdicts.push_back(verdict("nodes with 2^j > C Pi_{8r}, j >= 1", static_cast<double>(upper_rest), "<=", 0.0, 0.0));
    c.rec.verdicts.push_back(verdict("nodes with 1_{A_0} > C Pi_{8r}", static_cast<double>(upper_zero), "<=", 0.0, 0.0));
}

void psi_audit(Context& c) {
    const auto& p = c.p;
    const auto samples = static_cast<std::size_t>(p.integer("samples"));
    const double k = p.real("box"), tol = p.real("tol");
    p.require(k > 0.0, "box", "positive");
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> U(-k, k), V(-1.0, 1.0);
    auto sample = [&] { return Vec2{U(rng), U(rng)}; };

    double inv = 0.0, par = 0.0, tan = 0.0, lo = 1e300, hi = 0.0, mlo = 1e300, mhi = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        Vec2 z = sample(), q = psi(psi(z));
        inv = std::max(inv, std::max(std::abs(q.x - z.x), std::abs(q.y - z.y)));

        double x = U(rng);
        Vec2 w = z + Vec2{x, x * x}, pw = psi(w);
        auto l = line_of_translated_parabola(z);
        par = std::max(par, std::abs(pw.y - (l.a * pw.x + l.b)) / (1.0 + std::abs(pw.y)));

        auto lz = tangent_line(z);
        Vec2 on = {x, lz.a * x + lz.b};
        Vec2 d = psi(on) - psi(z);
        tan = std::max(tan, std::abs(d.y - d.x * d.x) / (1.0 + std::abs(d.y)));

        Vec2 a = sample(), b = sample();
        double ratio = dist(psi(a), psi(b)) / dist(a, b);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);

        Vec2 z1{V(rng), V(rng)}, z2{V(rng), V(rng)};
        double mr = line_metric(line_of_translated_parabola(z1), line_of_translated_parabola(z2)) / dist(z1, z2);
        mlo = std::min(mlo, mr);
        mhi = std::max(mhi, mr);
    }
    const double lip = 1.0 + 2.0 * k, mc = p.real("metric_constant");
    const auto n = static_cast<double>(samples);
    add_row(c.rec, {"involution", num(n), num(inv), num(tol)});
    add_row(c.rec, {"parabola_to_line", num(n), num(par), num(tol)});
    add_row(c.rec, {"tangent_line_image", num(n), num(tan), num(tol)});
    add_row(c.rec, {"bilipschitz_upper", num(n), num(hi), num(lip)});
    add_row(c.rec, {"bilipschitz_lower", num(n), num(lo), num(1.0 / lip)});
    add_row(c.rec, {"metric_upper", num(n), num(mhi), num(mc)});
    add_row(c.rec, {"metric_lower", num(n), num(mlo), num(1.0 / mc)});
    c.rec.verdicts.push_back(verdict("psi(psi(z)) = z", inv, "<=", 0.0, tol));
    c.rec.verdicts.push_back(verdict("psi(z + P) lies on line_of_translated_parabola(z)", par, "<=", 0.0, tol));
    c.rec.verdicts.push_back(verdict("psi(tangent line) lies on psi(z) + P", tan, "<=", 0.0, tol));
    c.rec.verdicts.push_back(verdict("bi-Lipschitz upper ratio", hi, "<=", lip, 0.0));
    c.rec.verdicts.push_back(verdict("bi-Lipschitz lower ratio", lo, ">=", 1.0 / lip, 0.0));
    c.rec.verdicts.push_back(verdict("line metric / |z1 - z2| upper", mhi, "<=", mc, 0.0));
    c.rec.verdicts.push_back(verdict("line metric / |z1 - z2| lower", mlo, ">=", 1.0 / mc, 0.0));

    const double delta = std::ldexp(1.0, -p.integer("level"));
    const Box B{-k, -k, k, k};
    std::size_t outside = 0;
    double worstC = 0.0;
    const int transfers = p.integer("transfers");
    for (int i = 0; i < transfers; ++i) {
        Vec2 z = i == 0 ? Vec2{0.0, 0.0} : Vec2{V(rng), V(rng)};
        auto rep = transfer_neighbourhood(z, delta, B, 10000, rng());
        outside += rep.outside;
        worstC = std::max(worstC, rep.distortion);
        if (i == 0) add_row(c.rec, {"transfer_C_origin", num(10000), num(rep.C), num(p.real("transfer_C_max"))});
    }
    add_row(c.rec, {"transfer_outside", num(transfers * 10000.0), num(static_cast<double>(outside)), num(0)});
    add_row(c.rec, {"transfer_distortion", num(transfers * 10000.0), num(worstC), num(p.real("transfer_C_max"))});
    c.rec.verdicts.push_back(verdict("sampled points leaving the transfer tube", static_cast<double>(outside), "<=", 0.0, 0.0));
    c.rec.verdicts.push_back(verdict("sampled transfer distortion", worstC, "<=", p.real("transfer_C_max"), 0.0));
}

struct Entry {
    PipelineInfo info;
    std::function<void(Context&)> fn;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> r = {
        {{"fourier-decay",
          "Fourier decay on the parabola: ||sigma^||_{L^p(B(R))} <= C R^{(2-t)/p} for t < min{3s, s+1}",
          false,
          {{"measure", "arc", "arc or lattice"},
           {"s", "1", "lattice exponent (ignored for arc, which has s = 1)"},
           {"p", "6", "Lebesgue exponent"},
           {"log2_R", "4:9", "radii R = 2^k"},
           {"margin", "0.2", "t = min{3s, s+1} - margin"},
           {"tol", "0.1", "slope tolerance"}},
          {"R", "atoms", "lp_norm", "log2_R", "log2_lp_norm"}},
         fourier_decay},
        {{"sharpness",
          "Sharpness of min{3s, s+1}: the lattice x in (delta^s Z) cap [-1,1] on the parabola",
          false,
          {{"s", "0.5", "lattice exponent"}, {"n", "3", "convolution power"}, {"levels", "6:11", "delta = 2^-k"}, {"tol", "0.15", "slope tolerance"}},
          {"delta", "atoms", "l2_sq", "log2_inv_delta", "log2_l2_sq"}},
         sharpness},
        {{"sumset-growth",
          "Sumset growth: |nK|_delta grows like delta^{-min{3s - s 2^{-(n-2)}, s+1}}",
          false,
          {{"base", "4", "Cantor base (a power of two)"},
           {"digits", "0,3", "kept digits"},
           {"n", "2", "number of summands"},
           {"digits_depth", "2:6", "delta = base^-m"},
           {"budget", "1e8", "enumeration budget before the doubling route"},
           {"tol", "0.15", "slope tolerance"}},
          {"delta", "points", "cover_count", "exact", "log2_inv_delta", "log2_cover_count"}},
         sumset_growth},
        {{"vinogradov",
          "Vinogradov-type count: |{(p,q) in P^2n : |sum p - sum q| <= delta}| <= delta^t |P|^2n",
          true,
          {{"s", "0.5", "lattice exponent"},
           {"n", "3", "block length"},
           {"levels", "5:8", "delta = 2^-k"},
           {"t", "1.3", "tested exponent, below min{3s, s+1}"},
           {"bound", "10", "allowed count / (delta^t |P|^2n) at the finest scale"},
           {"budget", "1e8", "|P|^n budget"},
           {"oracle_instances", "20", "random instances checked against brute force"},
           {"oracle_limit", "1e7", "largest |P|^2n for the brute-force oracle"}},
          {"delta", "points", "count", "normalized", "ratio_t", "log2_inv_delta", "log2_normalized"}},
         vinogradov},
        {{"smoothing",
          "Smoothing by parabolic measures: ||(mu * sigma)_delta||_2^2 <= delta^{zeta(s,t) - 2 - eps}",
          true,
          {{"s", "0.75", "lattice exponent of sigma, in (1/2, 1]"},
           {"t", "1", "dimension of mu"},
           {"levels", "5:8", "delta = 2^-k"},
           {"tol", "0.15", "slope tolerance"}},
          {"delta", "mu_atoms", "atoms", "l2_sq", "log2_inv_delta", "log2_l2_sq"}},
         smoothing},
        {{"furstenberg",
          "Furstenberg-type lower bound: |F|_delta >= delta^{-gamma(s,t) + kappa}",
          true,
          {{"kind", "parabola", "parabola or tube"},
           {"s", "0.5", "family exponent"},
           {"t", "1", "anchor exponent"},
           {"kappa", "0.1", "loss in the exponent"},
           {"levels", "6:10", "delta = 2^-k"},
           {"audit_limit", "16", "largest accepted audited constant"}},
          {"delta", "anchors", "union", "threshold", "anchor_constant", "family_constant", "log2_inv_delta", "log2_union"}},
         furstenberg},
        {{"fu-ren",
          "Fu-Ren incidence bound for parabola and tube anchors: sum |F(p)| <= delta^-eps sqrt(delta^-1 C1 C2 |F||P|)",
          true,
          {{"instances", "50", "number of random instances"},
           {"levels", "6:10", "delta = 2^-k, cycled over instances"},
           {"eps", "0.1", "epsilon of the bound"},
           {"constant", "10", "implicit constant K"},
           {"s_min", "0.1", "smallest family exponent"}},
          {"instance", "kind", "s", "t", "delta", "anchors", "union", "incidences", "C1", "C2", "rhs", "ratio"}},
         fu_ren},
        {{"flattening-monotone",
          "Flattening: J_r(k) = ||Pi_r^{2^k}||_2 is decreasing in k, and the dyadic discretization sandwich of Pi_r^{2^k}",
          false,
          {{"r_levels", "4,6", "r = 2^-k"},
           {"kmax", "2", "largest k checked"},
           {"slack", "1e-6", "relative slack of the monotonicity check"},
           {"sandwich_constant", "64", "constant of the upper sandwich"},
           {"max_side", "4096", "grid side above which the spacing r/4 is relaxed to r/2"}},
          {"r", "k", "h", "grid", "J", "J_ratio", "lower_violations", "upper_A0_violations", "upper_Aj_violations"}},
         flattening},
        {{"psi-audit",
          "Psi(x,y) = (x, x^2 - y) is an involution exchanging translated parabolas and lines, locally bi-Lipschitz",
          false,
          {{"samples", "100000", "random samples per identity"},
           {"box", "2", "samples drawn from [-box, box]^2"},
           {"tol", "1e-12", "identity tolerance"},
           {"metric_constant", "10", "allowed distortion of the line metric on [-1,1]^2"},
           {"level", "8", "delta = 2^-level for the transfer audit"},
           {"transfers", "20", "transfer neighbourhoods audited"},
           {"transfer_C_max", "12", "largest accepted transfer constant"}},
          {"check", "samples", "measured", "bound"}},
         psi_audit},
    };
    return r;
}

const Entry& find_entry(const std::string& name) {
    for (const auto& e : registry())
        if (e.info.name == name) return e;
    std::string names;
    for (const auto& e : registry()) names += (names.empty() ? "" : ", ") + e.info.name;
    throw Error("unknown pipeline '" + name + "' (available: " + names + ")");
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

const std::vector<PipelineInfo>& list_pipelines() {
    static const std::vector<PipelineInfo> v = [] {
        std::vector<PipelineInfo> out;
        for (const auto& e : registry()) out.push_back(e.info);
        return out;
    }();
    return v;
}

const PipelineInfo& pipeline_info(const std::string& name) { return find_entry(name).info; }

ExperimentSpec spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error("config must be a JSON object");
    ExperimentSpec s;
    if (j.contains("pipeline")) s.name = j["pipeline"].get<std::string>();
    if (j.contains("out")) s.out_dir = j["out"].get<std::string>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("params")) {
        for (const auto& [k, v] : j["params"].items()) {
            if (v.is_string())
                s.params[k] = v.get<std::string>();
            else if (v.is_number_integer())
                s.params[k] = std::to_string(v.get<long long>());
            else if (v.is_number())
                s.params[k] = num(v.get<double>());
            else
                throw Error("parameter '" + k + "' must be a string or a number");
        }
    }
    return s;
}

void apply_override(ExperimentSpec& spec, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("override '" + assignment + "' is not of the form key=value");
    spec.params[assignment.substr(0, eq)] = assignment.substr(eq + 1);
}

bool ExperimentRecord::pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

ExperimentRecord run(const ExperimentSpec& spec) {
    const auto& entry = find_entry(spec.name);
    Params params(entry.info, spec.params);
    if (entry.info.needs_seed && !spec.seed)
        throw Error("pipeline " + spec.name + " is randomized; pass --seed N or \"seed\" in the config");
    ExperimentRecord rec;
    rec.spec = spec;
    rec.claim = entry.info.claim;
    rec.resolved = params.values();
    rec.columns = entry.info.columns;
    Context ctx{params, rec, spec.seed.value_or(1)};
    const auto t0 = Clock::now();
    entry.fn(ctx);
    rec.timings["total_s"] = seconds_since(t0);
    for (const auto& row : rec.rows)
        if (row.size() != rec.columns.size()) throw Error("internal: row width differs from the header of " + spec.name);
    if (!spec.out_dir.empty()) write_outputs(rec, spec.out_dir);
    return rec;
}

std::string record_csv(const ExperimentRecord& rec) {
    std::ostringstream out;
    for (std::size_t i = 0; i < rec.columns.size(); ++i) out << (i ? "," : "") << rec.columns[i];
    out << '\n';
    for (const auto& row : rec.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
    return out.str();
}

std::string record_json(const ExperimentRecord& rec) {
    json j;
    j["pipeline"] = rec.spec.name;
    j["claim"] = rec.claim;
    j["params"] = rec.resolved;
    if (rec.spec.seed) j["seed"] = *rec.spec.seed;
    j["columns"] = rec.columns;
    json rows = json::array();
    for (const auto& row : rec.rows) {
        json r = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            char* end = nullptr;
            double v = std::strtod(row[i].c_str(), &end);
            if (!row[i].empty() && *end == '\0')
                r[rec.columns[i]] = v;
            else
                r[rec.columns[i]] = row[i];
        }
        rows.push_back(r);
    }
    j["rows"] = rows;
    j["fitted"] = rec.fitted;
    j["predicted"] = rec.predicted;
    json vs = json::array();
    for (const auto& v : rec.verdicts)
        vs.push_back({{"check", v.check},
                      {"measured", v.measured},
                      {"reference", v.reference},
                      {"tolerance", v.tolerance},
                      {"relation", v.relation},
                      {"pass", v.pass}});
    j["verdicts"] = vs;
    j["pass"] = rec.pass();
    j["timings"] = rec.timings;
    return j.dump(2) + "\n";
}

std::string record_plotdata(const ExperimentRecord& rec) {
    std::ostringstream out;
    for (const auto& [x, y] : rec.plot) out << num(x) << ' ' << num(y) << '\n';
    return out.str();
}

void write_outputs(const ExperimentRecord& rec, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
    auto put = [&](const std::string& ext, const std::string& text) {
        auto path = fs::path(dir) / (rec.spec.name + ext);
        std::ofstream f(path, std::ios::binary);
        if (!(f << text)) throw Error("cannot write " + path.string());
    };
    put(".csv", record_csv(rec));
    put(".json", record_json(rec));
    put(".plotdata", record_plotdata(rec));
}

std::string cache_key(const AtomicMeasure& m, int n, double delta, const ConvolveOptions& opt) {
    std::string text = to_json(m) + "|n=" + std::to_string(n) + "|delta=" + hexf(delta) + "|h=" + hexf(opt.h);
    if (opt.frame)
        text += "|frame=" + hexf(opt.frame->origin.x) + "," + hexf(opt.frame->origin.y) + "," + hexf(opt.frame->h) + "," +
                std::to_string(opt.frame->nx) + "x" + std::to_string(opt.frame->ny);
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
    return buf;
}

GridField cached_convolve_power(const AtomicMeasure& m, int n, double delta, const ConvolveOptions& opt) {
    const char* dir = std::getenv("PARALAB_CACHE");
    if (!dir || !*dir) return convolve_power(m, n, delta, opt);
    namespace fs = std::filesystem;
    auto path = fs::path(dir) / (cache_key(m, n, delta, opt) + ".plgrid");
    if (fs::exists(path)) return load_grid(path.string());
    auto f = convolve_power(m, n, delta, opt);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!ec) dump_grid(f, path.string());
    return f;
}

}  // namespace paralab::runner
