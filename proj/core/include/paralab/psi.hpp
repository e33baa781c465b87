#pragma once

#include <cstdint>

#include "paralab/common.hpp"
#include "paralab/dyadic.hpp"
#include "paralab/measures.hpp"

namespace paralab {

// The width-w tube around `core`, i.e. the w/2-neighbourhood.
struct Tube {
    GrassmannLine core;
    double width = 0.0;

    Tube() = default;
    Tube(GrassmannLine l, double w);
    bool contains(Vec2 p) const { return core.distance_to(p) <= 0.5 * width; }
};

struct Box {
    double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;
    double max_abs_x() const { return std::max(std::abs(xmin), std::abs(xmax)); }
};

inline Vec2 psi(Vec2 p) { return {p.x, p.x * p.x - p.y}; }

GrassmannLine line_of_translated_parabola(Vec2 z);
GrassmannLine tangent_line(Vec2 z);

struct TransferReport {
    Tube tube;
    double C = 0.0;             // tube is [l_z]_{C delta}
    double distortion = 0.0;    // sampled max dist(Psi(q), l_z) / delta
    std::size_t samples = 0;
    std::size_t outside = 0;    // sampled points that left the tube
    bool contained() const { return outside == 0; }
};

TransferReport transfer_neighbourhood(Vec2 z, double delta, const Box& B, std::size_t samples = 10000,
                                      std::uint64_t seed = 1);

AtomicMeasure parabolic_rescale(const AtomicMeasure& m, double R);

}  // namespace paralab
