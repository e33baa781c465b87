#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace paralab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

// floor(v) that treats values within a relative 1e-9 of an integer as that integer;
// used when mapping exact lattice sums onto dyadic grids.
inline std::int64_t snap_floor(double v) {
    double r = std::nearbyint(v);
    if (std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v))) return static_cast<std::int64_t>(r);
    return static_cast<std::int64_t>(std::floor(v));
}

// Exponent of a power of two, or throws.
int log2_exact(double x, const char* what);

}  // namespace paralab
