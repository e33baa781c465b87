// Desk-scale acceptance: one PASS/FAIL line per criterion, runtime limits included.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "paralab/arithmetic.hpp"
#include "paralab/fourier.hpp"
#include "paralab/runner.hpp"

using namespace paralab;
namespace rn = paralab::runner;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

rn::ExperimentRecord run(const std::string& name, std::map<std::string, std::string> params,
                         std::optional<std::uint64_t> seed = std::nullopt) {
    rn::ExperimentSpec s;
    s.name = name;
    s.params = std::move(params);
    s.seed = seed;
    return rn::run(s);
}

// names of the failing verdicts, or the measured values when all pass
std::string summarize(const rn::ExperimentRecord& r) {
    std::string out;
    for (const auto& v : r.verdicts) {
        if (!out.empty()) out += "; ";
        out += (v.pass ? "" : "FAILED ") + v.check + " = " + fmt("%.4g", v.measured);
    }
    return out;
}

Outcome c1() {
    auto r = run("psi-audit", {});
    return {r.pass(), summarize(r)};
}

Outcome c2() {
    auto sig = lattice_parabola_measure(0x1p-6, 0.5);
    const double R = 64.0;
    double worst = 0.0;
    for (int n : {2, 3}) {
        double lhs = fourier_lp_integral(sig, 2.0 * n, R);
        ConvolveOptions o;
        o.want_spectrum = true;
        o.spectrum_radius = R;
        auto res = convolve_power_full(sig, n, 0x1p-6, o);
        double rhs = spectrum_l2_sq_on_disk(res.spectrum, R);
        worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    }
    return {worst <= 1e-4, fmt("worst relative error %.3g", worst)};
}

Outcome c3() {
    Outcome o{true, ""};
    for (const char* s : {"0.4", "0.5", "0.7"}) {
        auto r = run("sharpness", {{"s", s}});
        o.pass = o.pass && r.pass();
        o.detail += fmt("s=%.1f slope %.3f vs %.3f  ", std::stod(s), r.fitted.at("slope"), r.predicted.at("slope"));
    }
    return o;
}

Outcome c4() {
    Outcome o{true, ""};
    for (const char* n : {"2", "3"}) {
        auto r = run("sumset-growth", {{"n", n}});
        o.pass = o.pass && r.pass();
        o.detail += fmt("n=%.0f slope %.3f >= %.3f - 0.15  ", std::stod(n), r.fitted.at("slope"), r.predicted.at("slope"));
    }
    return o;
}

Outcome c5() {
    auto r = run("vinogradov", {{"s", "0.5"}, {"n", "3"}, {"levels", "5:8"}, {"oracle_instances", "20"}}, 5);
    return {r.pass(), summarize(r)};
}

Outcome c6() {
    struct Case {
        const char* name;
        std::function<AtomicMeasure(double)> make;
        int n;
    };
    const std::vector<Case> cases = {
        {"lattice s=0.5", [](double d) { return lattice_parabola_measure(d, 0.5); }, 2},
        {"lattice s=0.5", [](double d) { return lattice_parabola_measure(d, 0.5); }, 3},
        {"lattice s=0.7", [](double d) { return lattice_parabola_measure(d, 0.7); }, 3},
        {"arc", [](double d) { return arc_measure(d); }, 2},
    };
    Outcome o{true, ""};
    for (const auto& c : cases) {
        ScalingSeries L, Rs;
        double worst = 0.0;
        for (int k = 5; k <= 8; ++k) {
            double d = std::ldexp(1.0, -k);
            auto rep = count_energy_check(c.make(d), c.n, d);
            o.pass = o.pass && rep.pass;
            worst = std::max(worst, rep.ratio);
            L.rows.push_back({d, rep.lhs});
            Rs.rows.push_back({d, rep.rhs});
        }
        fit_exponent(L);
        fit_exponent(Rs);
        double gap = std::abs(L.slope - Rs.slope);
        o.pass = o.pass && gap <= 0.2;
        o.detail += std::string(c.name) + fmt(" n=%.0f: max ratio %.3g, slope gap %.3f  ", c.n, worst, gap);
    }
    return o;
}

Outcome c7() {
    auto r = run("fu-ren", {{"instances", "50"}, {"levels", "6:10"}}, 7);
    return {r.pass(), summarize(r)};
}

Outcome c8() {
    auto r = run("flattening-monotone", {{"r_levels", "4,6"}, {"kmax", "2"}});
    return {r.pass(), summarize(r)};
}

Outcome c9() {
    const double u = 1.0;
    std::vector<AtomicMeasure> ms = {scale_measure(arc_measure(0x1p-4), 0.25),
                                     scale_measure(lattice_parabola_measure(0x1p-6, 0.5), 0.25)};
    Outcome o{true, ""};
    for (const auto& m : ms) {
        auto bb = m.bbox();
        double reach = std::max({std::abs(bb[0]), std::abs(bb[1]), std::abs(bb[2]), std::abs(bb[3])});
        std::vector<double> ratios, spatial;
        for (int k = 5; k <= 8; ++k) {
            double d = std::ldexp(1.0, -k);
            auto F = riesz_energy_fourier(m, u, d);
            double I = spatial_energy_grid(mollify(m, d, reach + 2 * d), u);
            ratios.push_back(F.value / I);
            spatial.push_back(I);
        }
        auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        double spread = *hi / *lo - 1.0;
        o.pass = o.pass && spread <= 0.15;

        bool mono = true;
        double prev = INFINITY;
        for (int p = 1; p <= 3; ++p) {
            FourierEnergyOptions fo;
            fo.power = p;
            double v = riesz_energy_fourier(m, u, 0x1p-6, fo).value;
            mono = mono && v <= prev * (1 + 1e-6);
            prev = v;
        }
        o.pass = o.pass && mono;

        // spatial[i] is I^{2^-(5+i)}: coarse against every finer scale
        bool coarse = true;
        for (std::size_t i = 0; i < spatial.size(); ++i)
            for (std::size_t j = i; j < spatial.size(); ++j) coarse = coarse && spatial[i] <= 64.0 * spatial[j];
        o.pass = o.pass && coarse;
        o.detail += m.tag + fmt(": ratio %.4g..%.4g (spread %.3f)", *lo, *hi, spread) +
                    (mono ? ", powers monotone" : ", powers NOT monotone") + (coarse ? ", coarse<=64 fine  " : ", coarse>64 fine  ");
    }
    return o;
}

Outcome c10() {
    double worst = 0.0;
    for (int i = 1; i <= 10; ++i)
        for (int n = 1; n <= 12; ++n) {
            double s = 0.1 * i;
            worst = std::max(worst, std::abs(iterate_gamma(s, n) - sumset_exponent(s, n)));
        }
    bool ok = worst <= 1e-12;
    ok = ok && gamma_exponent(1.0, 2.0) == 2.0 && gamma_exponent(0.5, 0.5) == 1.0;
    ok = ok && std::abs(zeta_exponent(0.75, 1.0) - 1.5) <= 1e-12;
    ok = ok && std::abs(zeta_exponent(2.0 / 3, 4.0 / 3) - 5.0 / 3) <= 1e-12;
    double zworst = 0.0;
    // t = 2s must stay below 2, so s runs over [2/3, 1)
    for (int i = 0; i < 20; ++i) {
        double s = 2.0 / 3 + (1.0 - 2.0 / 3) * i / 20;
        zworst = std::max(zworst, std::abs(zeta_exponent(s, 2 * s) - (s + 1)));
    }
    ok = ok && zworst <= 1e-12;
    return {ok, fmt("iterate vs closed form %.3g, zeta(s,2s) vs s+1 %.3g", worst, zworst)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        double limit_s;
        Outcome (*fn)();
    };
    const Criterion all[] = {{1, 1, c1},    {2, 60, c2},   {3, 300, c3},  {4, 300, c4},  {5, 180, c5},
                             {6, 180, c6},  {7, 300, c7},  {8, 120, c8},  {9, 120, c9},  {10, 1, c10}};
    int failed = 0;
    for (const auto& c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = dt < c.limit_s;
        bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("criterion %d: %s  (%.2f s of %.0f s%s)  %s\n", c.id, pass ? "PASS" : "FAIL", dt, c.limit_s,
                    in_time ? "" : ", over time", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of 10 criteria failed\n", failed);
    return failed ? 1 : 0;
}
