#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "paralab/dyadic.hpp"
#include "paralab/measures.hpp"
#include "paralab/psi.hpp"

using namespace paralab;

namespace {

bool on_line(const GrassmannLine& l, Vec2 p, double tol = 1e-12) {
    return std::abs(p.y - (l.a * p.x + l.b)) <= tol * std::max(1.0, std::abs(p.y));
}

}  // namespace

TEST_CASE("psi map") {
    CHECK(psi({0, 0}).x == 0.0);
    CHECK(psi({0, 0}).y == 0.0);
    auto a = psi({1, 1});
    CHECK(a.x == 1.0);
    CHECK(a.y == 0.0);
    auto b = psi({1, 0});
    CHECK(b.y == 1.0);
    for (double x : {-1.0, 0.3, 1.0}) {
        auto p = psi({x, x * x});
        CHECK(p.x == x);
        CHECK(p.y == 0.0);
    }
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    for (int t = 0; t < 100000; ++t) {
        Vec2 p{u(rng), u(rng)};
        auto q = psi(psi(p));
        CHECK(q.x == p.x);
        worst = std::max(worst, std::abs(q.y - p.y));
    }
    CHECK(worst <= 1e-12);
    // on the dyadic grid the round trip is exact
    for (int i = -64; i <= 64; ++i) {
        Vec2 p{i / 32.0, -i / 16.0};
        CHECK(psi(psi(p)).y == p.y);
    }
}

TEST_CASE("translated parabolas and tangent lines") {
    auto l0 = line_of_translated_parabola({0, 0});
    CHECK(l0.a == 0.0);
    CHECK(l0.b == 0.0);
    auto l1 = line_of_translated_parabola({1, 0});
    CHECK(l1.a == 2.0);
    CHECK(l1.b == -1.0);
    auto t1 = tangent_line({1, 1});
    CHECK(t1.a == 2.0);
    CHECK(t1.b == -1.0);
    auto t0 = tangent_line({0, 0});
    CHECK(t0.a == 0.0);
    CHECK(t0.b == 0.0);

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        Vec2 z{u(rng), u(rng)};
        auto l = line_of_translated_parabola(z);
        auto tz = tangent_line(z);
        auto w = psi(z);
        for (int i = 0; i < 20; ++i) {
            double x = u(rng);
            Vec2 onp{z.x + x, z.y + x * x};  // z + P-bar
            CHECK(on_line(l, psi(onp)));
            Vec2 ont{x, tz.a * x + tz.b};  // tangent line at z
            auto img = psi(ont);
            CHECK(std::abs(img.y - (w.y + (img.x - w.x) * (img.x - w.x))) <= 1e-12);
        }
        // the two descriptions agree: the line of the parabola through Psi(z) is the tangent at z
        auto back = line_of_translated_parabola(w);
        CHECK(back.a == doctest::Approx(tz.a));
        CHECK(back.b == doctest::Approx(tz.b));
    }
}

TEST_CASE("local bi-Lipschitz bounds") {
    std::mt19937_64 rng(8);
    for (double k : {1.0, 2.0}) {
        std::uniform_real_distribution<double> u(-k / std::sqrt(2.0), k / std::sqrt(2.0));
        for (int t = 0; t < 5000; ++t) {
            Vec2 p{u(rng), u(rng)}, q{u(rng), u(rng)};
            double d = dist(p, q), e = dist(psi(p), psi(q));
            CHECK(e <= (1 + 2 * k) * d * (1 + 1e-12));
            CHECK(e >= d / (1 + 2 * k) * (1 - 1e-12));
        }
    }
}

TEST_CASE("line metric is comparable to the point distance") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 5000; ++t) {
        Vec2 p{u(rng), u(rng)}, q{u(rng), u(rng)};
        double d = dist(p, q);
        double m = line_metric(line_of_translated_parabola(p), line_of_translated_parabola(q));
        CHECK(m <= 10.0 * d);
        CHECK(m >= d / 10.0);
    }
}

TEST_CASE("transfer neighbourhood") {
    Box B{-2, -2, 2, 2};
    auto rep = transfer_neighbourhood({0, 0}, 0x1p-8, B, 10000, 3);
    CHECK(rep.samples == 10000);
    CHECK(rep.contained());
    CHECK(rep.C <= 12.0);
    CHECK(rep.distortion <= rep.C);
    CHECK(rep.tube.core.a == 0.0);
    CHECK(rep.tube.core.b == 0.0);

    // for z = Psi(w) the tube core is the line of the translated parabola through w
    Vec2 w{0.4, -0.3};
    auto r2 = transfer_neighbourhood(psi(w), 0x1p-8, B, 2000, 5);
    auto l = line_of_translated_parabola(w);
    CHECK(r2.tube.core.a == doctest::Approx(l.a));
    CHECK(r2.tube.core.b == doctest::Approx(l.b));
    CHECK(r2.contained());

    // a tube built for a small box leaks once the samples leave it
    Box small{-0.25, -0.25, 0.25, 0.25};
    auto tight = transfer_neighbourhood({0, 0}, 0x1p-6, small, 100, 1);
    Tube t(tight.tube.core, tight.tube.width);
    std::size_t outside = 0;
    for (double x = -2.0; x <= 2.0; x += 0.01) {
        Vec2 q{x + 2 * 0x1p-6, x * x};  // within 2 delta of the parabola; Psi stretches this by ~2|x|
        if (!t.contains(psi(q))) ++outside;
    }
    CHECK(outside > 0);

    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_WITH_AS(transfer_neighbourhood({0, 0}, 0.01, Box{-inf, -1, 1, 1}), "bounding box must be bounded", Error);
    CHECK_THROWS_AS(Tube(GrassmannLine{}, 0.0), Error);
}

TEST_CASE("parabolic rescaling") {
    auto m = custom_measure({{2, 4}, {-1, 1}}, {0.5, 0.5});
    auto same = parabolic_rescale(m, 1.0);
    CHECK(same.atoms[0].p.x == 2.0);
    CHECK(same.atoms[0].p.y == 4.0);
    auto r = parabolic_rescale(m, 2.0);
    CHECK(r.atoms[0].p.x == 1.0);
    CHECK(r.atoms[0].p.y == 1.0);
    CHECK(r.atoms[1].p.y == doctest::Approx(r.atoms[1].p.x * r.atoms[1].p.x));
    CHECK(r.atoms[1].mass == 0.5);
    CHECK_THROWS_AS(parabolic_rescale(m, 0.5), Error);

    // Frostman constant at t = 1 changes by at most R^{2t + O(1)}
    auto arc = arc_measure(0x1p-6);
    auto F = parabolic_rescale(arc, 2.0);
    double before = frostman_constant(to_dyadic(arc, 8), 1.0, 0x1p-8);
    double after = frostman_constant(to_dyadic(F, 8), 1.0, 0x1p-8);
    CHECK(after <= std::pow(2.0, 2.0 + 4.0) * before);
    CHECK(before <= std::pow(2.0, 2.0 + 4.0) * after);
}
