#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "paralab/common.hpp"

namespace paralab {

struct DyadicSquare {
    int level = 0;
    std::int64_t ix = 0;
    std::int64_t iy = 0;

    double side() const { return std::ldexp(1.0, -level); }
    Vec2 center() const { return {(ix + 0.5) * side(), (iy + 0.5) * side()}; }
    Vec2 lower_left() const { return {ix * side(), iy * side()}; }
    // ancestor at a coarser level (arithmetic shift is a floor for negative indices)
    DyadicSquare parent(int coarser_level) const;

    auto operator<=>(const DyadicSquare&) const = default;
};

// Square of side 2^-level containing the point.
DyadicSquare square_containing(Vec2 p, int level);

struct DyadicMeasure {
    int level = 0;
    std::map<std::pair<std::int64_t, std::int64_t>, double> weights;

    double total_mass() const;
    void add(std::int64_t ix, std::int64_t iy, double w);
    std::vector<DyadicSquare> squares() const;
};

std::string to_json(const DyadicMeasure& m);
DyadicMeasure dyadic_measure_from_json(const std::string& text);

// Slope-intercept line y = a x + b.
struct GrassmannLine {
    double a = 0.0;
    double b = 0.0;

    Vec2 direction() const;
    // orthogonal projection onto the direction subspace, row-major 2x2
    std::array<double, 4> projection() const;
    // the point of the line closest to the origin
    Vec2 offset() const;
    double distance_to(Vec2 p) const;
};

double frostman_constant(const DyadicMeasure& m, double s, double min_scale);

// Ball version over centres in P and dyadic radii r >= delta; requires strict delta-separation.
double katz_tao_constant(const std::vector<Vec2>& P, double s, double delta);
// |P ∩ B(x, r)| * (delta/r)^s at a single radius, maximised over centres x in P.
double katz_tao_ratio_at(const std::vector<Vec2>& P, double s, double delta, double r);
// Dyadic-square version for families of delta-squares: sup over dyadic Q of |P ∩ Q| (delta/l(Q))^s.
double katz_tao_constant_dyadic(const std::vector<DyadicSquare>& P, double s);
// Relative (delta,s,C)-set constant: sup over dyadic Q of |P ∩ Q| / (l(Q)^s |P|).
double delta_set_constant(const std::vector<DyadicSquare>& P, double s);

double riesz_energy_discrete(const DyadicMeasure& m, double s);
double line_metric(const GrassmannLine& l1, const GrassmannLine& l2);

struct LevelSetResult {
    std::vector<DyadicSquare> squares;
    double energy = 0.0;        // I_s(m), the constant C of the extraction
    double threshold = 0.0;     // A * C * delta^-eps
    double removed_mass = 0.0;
    double bucket_mass = 0.0;
    int bucket = 0;             // weights in (2^-bucket-1, 2^-bucket]
};

inline constexpr double kChebyshevA = 4.0;

LevelSetResult level_set_extract(const DyadicMeasure& m, double s, double delta, double eps);

double gamma_exponent(double s, double t);
double zeta_exponent(double s, double t);
double sumset_exponent(double s, int n);
double iterate_gamma(double s, int n);
// min{3s, s+1}: the L^p decay exponent of s-dimensional measures on the parabola (n -> infinity
// limit of sumset_exponent).
double decay_exponent(double s);

}  // namespace paralab
