#include "paralab/psi.hpp"

#include <cmath>
#include <random>

namespace paralab {

Tube::Tube(GrassmannLine l, double w) : core(l), width(w) {
    if (!(w > 0.0)) throw Error("tube width must be positive");
}

GrassmannLine line_of_translated_parabola(Vec2 z) { return {2.0 * z.x, -z.x * z.x - z.y}; }

GrassmannLine tangent_line(Vec2 z) { return {2.0 * z.x, z.y - 2.0 * z.x * z.x}; }

TransferReport transfer_neighbourhood(Vec2 z, double delta, const Box& B, std::size_t samples, std::uint64_t seed) {
    for (double v : {B.xmin, B.ymin, B.xmax, B.ymax})
        if (!std::isfinite(v)) throw Error("bounding box must be bounded");
    if (!(B.xmax > B.xmin && B.ymax > B.ymin)) throw Error("degenerate bounding box");
    TransferReport rep;
    // Psi is (1 + 2 max|x|)-Lipschitz on B; the 2 delta neighbourhood maps into that many delta
    rep.C = 2.0 * (1.0 + 2.0 * B.max_abs_x()) + 1.0;
    auto line = tangent_line(z);
    rep.tube = Tube(line, 2.0 * rep.C * delta);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(B.xmin, B.xmax), unit(0.0, 1.0);
    const Vec2 w = psi(z);
    while (rep.samples < samples) {
        // a point within 2 delta of the curve w + P-bar, kept if it lies in B
        double x = ux(rng);
        double rad = 2.0 * delta * std::sqrt(unit(rng)), ang = 2.0 * M_PI * unit(rng);
        Vec2 q{x + rad * std::cos(ang), w.y + (x - w.x) * (x - w.x) + rad * std::sin(ang)};
        if (q.x < B.xmin || q.x > B.xmax || q.y < B.ymin || q.y > B.ymax) continue;
        ++rep.samples;
        double d = line.distance_to(psi(q));
        rep.distortion = std::max(rep.distortion, d / delta);
        if (!rep.tube.contains(psi(q))) ++rep.outside;
    }
    return rep;
}

AtomicMeasure parabolic_rescale(const AtomicMeasure& m, double R) {
    if (!(R >= 1.0)) throw Error("R must be at least 1");
    AtomicMeasure out = m;
    out.hx = m.hx / R;
    out.hy = m.hy / (R * R);
    for (auto& a : out.atoms) a.p = {a.p.x / R, a.p.y / (R * R)};
    out.separation = m.separation / (R * R);
    return out;
}

}  // namespace paralab
