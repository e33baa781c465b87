#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "paralab/fourier.hpp"
#include "quadrature.hpp"

namespace paralab {

namespace {

constexpr double kPi = std::numbers::pi;

double trapezoid_mass(double a, double rho) {
    double w = rho - a;
    return kPi * a * a + 2.0 * kPi / w * (rho * rho * rho / 6.0 - rho * a * a / 2.0 + a * a * a / 3.0);
}

// psi^ tabulated on [0, kHatMax] with step 1/kHatSteps
constexpr double kHatMax = 16.0;
constexpr int kHatSteps = 256;

// Phi tabulated on [0, 2 rho]
constexpr int kPhiIntervals = 2048;

double hat_direct(double k, const MollifierSpec& ms, const detail::GaussRule& g) {
    double a = ms.inner, rho = ms.outer;
    double core = k == 0.0 ? kPi * a * a : a * std::cyl_bessel_j(1.0, 2.0 * kPi * k * a) / k;
    double ramp = detail::integrate(g, a, rho, [&](double r) {
        return (rho - r) / (rho - a) * std::cyl_bessel_j(0.0, 2.0 * kPi * k * r) * r;
    });
    return core + 2.0 * kPi * ramp;
}

const std::vector<double>& hat_table() {
    static const std::vector<double> t = [] {
        const auto& ms = mollifier();
        auto g = detail::gauss_legendre(48);
        std::vector<double> v(static_cast<std::size_t>(kHatMax * kHatSteps) + 2);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = hat_direct(static_cast<double>(i) / kHatSteps, ms, g);
        return v;
    }();
    return t;
}

struct PhiTable {
    std::vector<double> phi;
    double phi_step = 0.0;
};

const PhiTable& phi_table() {
    static std::once_flag once;
    static PhiTable t;
    std::call_once(once, [] {
        const auto& ms = mollifier();

        // Phi(r) = int_0^rho psi(t) t int_0^{2pi} psi(|t e^{i th} - r|) dth dt, the angular integral
        // split where |t e^{i th} - r| crosses the profile's kinks.
        const double a = ms.inner, rho = ms.outer;
        auto gt = detail::gauss_legendre(40);
        auto gth = detail::gauss_legendre(24);
        t.phi_step = 2.0 * rho / kPhiIntervals;
        t.phi.resize(kPhiIntervals + 1);
        for (int i = 0; i <= kPhiIntervals; ++i) {
            double r = i * t.phi_step;
            auto angular = [&](double tt) {
                if (r == 0.0 || tt == 0.0) return 2.0 * kPi * ms(std::max(r, tt));
                std::vector<double> cuts{0.0, kPi};
                for (double d : {a, rho}) {
                    double c = (tt * tt + r * r - d * d) / (2.0 * tt * r);
                    if (c > -1.0 && c < 1.0) cuts.push_back(std::acos(c));
                }
                std::sort(cuts.begin(), cuts.end());
                double s = 0.0;
                for (std::size_t k = 1; k < cuts.size(); ++k)
                    s += detail::integrate(gth, cuts[k - 1], cuts[k], [&](double th) {
                        return ms(std::sqrt(std::max(0.0, tt * tt + r * r - 2.0 * tt * r * std::cos(th))));
                    });
                return 2.0 * s;
            };
            auto radial = [&](double tt) { return ms(tt) * tt * angular(tt); };
            // the angular integral has kinks in t where the cut set changes
            std::vector<double> knots{0.0, a, rho};
            for (double d : {a, rho})
                for (double k : {std::abs(r - d), r + d})
                    if (k > 0.0 && k < rho) knots.push_back(k);
            std::sort(knots.begin(), knots.end());
            double acc = 0.0;
            for (std::size_t k = 1; k < knots.size(); ++k)
                if (knots[k] > knots[k - 1]) acc += detail::integrate(gt, knots[k - 1], knots[k], radial);
            t.phi[i] = acc;
        }
        t.phi[kPhiIntervals] = 0.0;
    });
    return t;
}

}  // namespace

double MollifierSpec::operator()(double r) const {
    if (r <= inner) return height;
    if (r >= outer) return 0.0;
    return height * (outer - r) / (outer - inner);
}

double solve_mollifier_outer(double inner) {
    // integral grows from pi inner^2 (< 1) as the outer radius increases
    if (kPi * inner * inner >= 1.0) throw Error("inner radius too large for unit mass");
    double lo = inner + 1e-12, hi = inner + 1.0;
    while (trapezoid_mass(inner, hi) < 1.0) hi += 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (trapezoid_mass(inner, mid) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

const MollifierSpec& mollifier() {
    static const MollifierSpec spec = [] {
        MollifierSpec s;
        s.outer = solve_mollifier_outer(s.inner);
        s.normalization = trapezoid_mass(s.inner, s.outer);
        return s;
    }();
    return spec;
}

double mollifier_hat(double k) {
    k = std::abs(k);
    if (k >= kHatMax) {
        static const auto g = detail::gauss_legendre(96);
        return hat_direct(k, mollifier(), g);
    }
    const auto& t = hat_table();
    double x = k * kHatSteps;
    auto i = static_cast<std::size_t>(x);
    double f = x - static_cast<double>(i);
    return t[i] + f * (t[i + 1] - t[i]);
}

double mollifier_autocorrelation(double r) {
    const auto& t = phi_table();
    r = std::abs(r);
    double x = r / t.phi_step;
    if (x >= kPhiIntervals) return 0.0;
    auto i = static_cast<std::size_t>(x);
    double f = x - static_cast<double>(i);
    return t.phi[i] + f * (t.phi[i + 1] - t.phi[i]);
}

double mollifier_l2_sq() {
    const auto& ms = mollifier();
    double a = ms.inner, rho = ms.outer, w = rho - a;
    // 2 pi int_a^rho ((rho - r)/w)^2 r dr in closed form
    auto prim = [&](double r) {
        return (rho * rho * r * r / 2.0 - 2.0 * rho * r * r * r / 3.0 + r * r * r * r / 4.0) / (w * w);
    };
    return kPi * a * a + 2.0 * kPi * (prim(rho) - prim(a));
}

}  // namespace paralab
