#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "paralab/arithmetic.hpp"
#include "paralab/fourier.hpp"

using namespace paralab;

TEST_CASE("sumset covers") {
    SUBCASE("single point") {
        auto P = custom_measure({{0.3, 0.09}}, {1.0});
        for (int n = 1; n <= 4; ++n) CHECK(sumset_cover(P, n, 0x1p-6).squares.size() == 1);
    }
    SUBCASE("n = 1 covers the point set itself") {
        auto P = cantor_parabola_measure(std::pow(4.0, -4), {0, 3}, 4);
        auto C = sumset_cover(P, 1, 0x1p-8);
        std::set<DyadicSquare> expect;
        for (const auto& p : P.points()) expect.insert(square_containing(p, 8));
        CHECK(std::set<DyadicSquare>(C.squares.begin(), C.squares.end()) == expect);
        CHECK(C.exact);
        CHECK(C.level == 8);
    }
    SUBCASE("the 2-fold sumset of a net is two-dimensional") {
        std::vector<std::pair<double, double>> rows;
        ScalingSeries ser;
        for (int k = 4; k <= 7; ++k) {
            double d = std::ldexp(1.0, -k);
            ser.rows.push_back({d, static_cast<double>(sumset_cover(arc_measure(d), 2, d).squares.size())});
        }
        fit_exponent(ser);
        CHECK(ser.slope == doctest::Approx(2.0).epsilon(0.1));
    }
    SUBCASE("enumeration and doubling routes agree within 10%") {
        auto P = cantor_parabola_measure(std::pow(4.0, -4), {0, 3}, 4);  // 16 points
        auto Q = cantor_parabola_measure(std::pow(3.0, -4), {0, 2}, 3);  // 16 points
        for (const auto* m : {&P, &Q})
            for (int n : {2, 3, 4}) {
                double d = 0x1p-7;
                auto exact = sumset_cover(*m, n, d);
                SumsetOptions o;
                o.force_doubling = true;
                auto dbl = sumset_cover(*m, n, d, o);
                CHECK_FALSE(dbl.exact);
                CHECK(dbl.slack_squares <= n);
                double a = static_cast<double>(exact.squares.size()), b = static_cast<double>(dbl.squares.size());
                CHECK(std::abs(a - b) <= 0.1 * a);
            }
    }
    SUBCASE("budget") {
        auto P = arc_measure(0x1p-6);
        SumsetOptions o;
        o.budget = 1000;
        o.allow_doubling = false;
        CHECK_THROWS_WITH_AS(sumset_cover(P, 3, 0x1p-6, o), doctest::Contains("budget"), Error);
        o.allow_doubling = true;
        CHECK_FALSE(sumset_cover(P, 3, 0x1p-6, o).exact);
        CHECK_THROWS_AS(sumset_cover(P, 0, 0x1p-6), Error);
    }
    SUBCASE("covers grow with n once 0 is in P") {
        auto P = translate_atom_to_origin(cantor_parabola_measure(std::pow(4.0, -4), {0, 3}, 4), 0);
        std::size_t prev = 0;
        for (int n = 1; n <= 4; ++n) {
            auto sz = sumset_cover(P, n, 0x1p-8).squares.size();
            CHECK(sz >= prev);
            prev = sz;
        }
    }
}

TEST_CASE("box counting") {
    CoveringSet one;
    one.delta = 0x1p-6;
    one.level = 6;
    one.squares = {{6, 17, 40}};
    for (int l = 0; l <= 6; ++l) CHECK(box_count(one, std::ldexp(1.0, -l)) == 1);

    CoveringSet full;
    full.delta = 0x1p-5;
    full.level = 5;
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) full.squares.push_back({5, i, j});
    for (int l = 0; l <= 5; ++l) CHECK(box_count(full, std::ldexp(1.0, -l)) == (std::int64_t{1} << (2 * l)));

    auto arc = sumset_cover(arc_measure(0x1p-8), 1, 0x1p-8);
    auto c = box_count(arc, 0x1p-4);
    CHECK(c == 59);  // oracle: distinct (floor(16x), floor(16x^2)) over x = k/256

    std::int64_t prev = INT64_MAX;
    for (int l = 8; l >= 0; --l) {
        auto v = box_count(arc, std::ldexp(1.0, -l));
        CHECK(v <= prev);
        prev = v;
    }
    CHECK_THROWS_AS(box_count(arc, 0x1p-9), Error);
}

TEST_CASE("vinogradov counts") {
    SUBCASE("n = 1 is the diagonal") {
        auto P = lattice_parabola_measure(0x1p-8, 0.5);
        CHECK(vinogradov_count(P, 1, 0x1p-8) == static_cast<std::int64_t>(P.size()));
    }
    SUBCASE("two-point example") {
        auto P = custom_measure({{0, 0}, {0.5, 0.25}}, {0.5, 0.5});
        CHECK(vinogradov_count(P, 2, 0.01) == 6);
        CHECK(vinogradov_bruteforce(P.points(), 2, 0.01) == 6);
    }
    SUBCASE("agrees with the brute-force oracle") {
        std::mt19937_64 rng(21);
        int checked = 0;
        for (int trial = 0; trial < 12; ++trial) {
            std::uniform_int_distribution<int> size(2, 9), k(-32, 32);
            int m = size(rng), n = 1 + trial % 3;
            if (std::pow(m, 2 * n) > 1e7) m = static_cast<int>(std::floor(std::pow(1e7, 1.0 / (2 * n))));
            std::set<int> xs;
            while (static_cast<int>(xs.size()) < m) xs.insert(k(rng));
            std::vector<Vec2> pts;
            for (int x : xs) pts.push_back({x / 32.0, (x / 32.0) * (x / 32.0)});
            auto P = uniform_measure(pts);
            double delta = 1.0 / 64;
            CHECK(vinogradov_count(P, n, delta) == vinogradov_bruteforce(pts, n, delta));
            ++checked;
        }
        CHECK(checked == 12);
    }
    SUBCASE("translation invariance and block symmetry") {
        auto P = cantor_parabola_measure(std::pow(4.0, -3), {0, 3}, 4);
        double d = 0x1p-7;
        auto base = vinogradov_count(P, 3, d);
        CHECK(vinogradov_count(translate(P, {0.25, -0.75}), 3, d) == base);
        // swapping the blocks is the point reflection p -> -p
        std::vector<Vec2> neg;
        for (const auto& p : P.points()) neg.push_back(-1.0 * p);
        CHECK(vinogradov_count(uniform_measure(neg), 3, d) == base);
    }
    SUBCASE("errors") {
        auto P = custom_measure({{0, 0}, {0.005, 0}}, {0.5, 0.5});
        CHECK_THROWS_WITH_AS(vinogradov_count(P, 2, 0.01), "separation violated", Error);
        auto big = arc_measure(0x1p-10);
        CHECK_THROWS_WITH_AS(vinogradov_count(big, 3, 0x1p-12, 1e6), doctest::Contains("budget exceeded"), Error);
    }
    CHECK(is_separated({{0, 0}, {0.02, 0}}, 0.01));
    CHECK_FALSE(is_separated({{0, 0}, {0.01, 0}}, 0.01));
}

TEST_CASE("count versus energy") {
    SUBCASE("two-point example") {
        auto P = custom_measure({{0, 0}, {0.5, 0.25}}, {0.5, 0.5});
        auto rep = count_energy_check(P, 2, 0.01);
        CHECK(rep.count == 6);
        CHECK(rep.lhs == doctest::Approx(6.0 / 16));
        CHECK(rep.ratio >= 1e-3);
        CHECK(rep.ratio <= 1e3);
        CHECK(rep.pass);
    }
    SUBCASE("single point") {
        auto P = custom_measure({{0.25, 0.0625}}, {1.0});
        for (double d : {0x1p-5, 0x1p-7}) {
            auto rep = count_energy_check(P, 2, d);
            CHECK(rep.lhs == 1.0);
            // oracle: delta^2 ||psi_{4 delta}||^2 = ||psi||^2 / 16
            CHECK(rep.rhs == doctest::Approx(0.0578558639098865).epsilon(0.02));
            CHECK(rep.pass);
        }
    }
    SUBCASE("arc net, n = 2") {
        auto rep = count_energy_check(arc_measure(0x1p-6), 2, 0x1p-6);
        CHECK(rep.pass);
        CHECK(rep.ratio <= kCountEnergyConstant);
    }
}

TEST_CASE("exponent fits") {
    ScalingSeries exact;
    for (int k = 3; k <= 8; ++k) {
        double d = std::ldexp(1.0, -k);
        exact.rows.push_back({d, std::pow(d, -1.5)});
    }
    auto [slope, res] = fit_exponent(exact);
    CHECK(slope == doctest::Approx(1.5));
    CHECK(res < 1e-12);
    CHECK(exact.slope == slope);

    ScalingSeries logs;
    for (int k = 4; k <= 10; ++k) {
        double d = std::ldexp(1.0, -k);
        logs.rows.push_back({d, std::log(1.0 / d) / d});
    }
    fit_exponent(logs);
    CHECK(logs.slope == doctest::Approx(1.217029128466101).epsilon(1e-10));
    CHECK(logs.slope >= 1.0);

    SUBCASE("cantor sumset, n = 2") {
        ScalingSeries ser;
        for (int k = 2; k <= 5; ++k) {
            double d = std::pow(4.0, -k);
            auto P = cantor_parabola_measure(d, {0, 3}, 4);
            ser.rows.push_back({d, static_cast<double>(sumset_cover(P, 2, d).squares.size())});
        }
        fit_exponent(ser);
        CHECK(ser.slope >= sumset_exponent(0.5, 2) - 0.15);
    }

    ScalingSeries few;
    few.rows = {{0.5, 1.0}, {0.25, 2.0}};
    CHECK_THROWS_WITH_AS(fit_exponent(few), "fit needs at least 3 scales", Error);
    ScalingSeries unordered;
    unordered.rows = {{0.25, 1.0}, {0.5, 2.0}, {0.125, 3.0}};
    CHECK_THROWS_AS(fit_exponent(unordered), Error);
    ScalingSeries nonpow;
    nonpow.rows = {{0.5, 1.0}, {0.3, 2.0}, {0.125, 3.0}};
    CHECK_THROWS_AS(fit_exponent(nonpow), Error);

    auto csv = series_csv(exact);
    CHECK(csv.rfind("delta,value,log2_inv_delta,log2_value\n", 0) == 0);
}
