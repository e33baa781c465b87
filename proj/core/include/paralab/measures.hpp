#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paralab/common.hpp"
#include "paralab/dyadic.hpp"

namespace paralab {

struct Atom {
    Vec2 p;
    double mass = 0.0;
};

// Weighted point set. Every atom also carries integer coordinates (ia, ib) on the lattice
// hx Z x hy Z, so sums of atoms can be formed without rounding.
struct AtomicMeasure {
    std::string tag = "custom";
    double separation = 0.0;
    std::vector<Atom> atoms;
    double hx = 0.0;
    double hy = 0.0;
    std::vector<std::int64_t> ia;
    std::vector<std::int64_t> ib;

    std::size_t size() const { return atoms.size(); }
    double total_mass() const;
    std::vector<Vec2> points() const;
    // smallest axis-parallel box containing the atoms: {xmin, ymin, xmax, ymax}
    std::array<double, 4> bbox() const;
    double diameter() const;
};

inline constexpr double kCustomQuantum = 0x1p-40;

AtomicMeasure lattice_parabola_measure(double delta, double s);
AtomicMeasure cantor_parabola_measure(double delta, const std::vector<int>& kept_digits, int base);
double cantor_dimension(const std::vector<int>& kept_digits, int base);
AtomicMeasure arc_measure(double delta);

// Arbitrary atoms; coordinates are snapped to the 2^-40 lattice.
AtomicMeasure custom_measure(const std::vector<Vec2>& points, const std::vector<double>& masses,
                             const std::string& tag = "custom");
// Uniform probability measure on P.
AtomicMeasure uniform_measure(const std::vector<Vec2>& P);

AtomicMeasure translate(const AtomicMeasure& m, Vec2 v);
// Shift so that atom i sits at the origin (exact on the lattice).
AtomicMeasure translate_atom_to_origin(const AtomicMeasure& m, std::size_t i);
AtomicMeasure scale_measure(const AtomicMeasure& m, double lambda);

DyadicMeasure to_dyadic(const AtomicMeasure& m, int level);

std::string to_json(const AtomicMeasure& m);
AtomicMeasure atomic_measure_from_json(const std::string& text);

}  // namespace paralab
