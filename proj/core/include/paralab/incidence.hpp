#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "paralab/dyadic.hpp"
#include "paralab/psi.hpp"

namespace paralab {

enum class AnchorKind { Tube, Parabola };

struct Anchor {
    AnchorKind kind = AnchorKind::Parabola;
    Vec2 center;           // parabola version: the translate p + P
    Tube tube;             // tube version
    DyadicSquare square;   // the delta-square the anchor is attached to
};

Anchor parabola_anchor(Vec2 center);
Anchor tube_anchor(const GrassmannLine& core, double width);
// Anchor of the tube variant attached to a delta-square with centre (a, b): [l(a,b)]_{delta/2}.
Anchor tube_anchor_for_square(const DyadicSquare& p);

// Square vs tube / parabola-neighbourhood test with the square's half-diagonal added.
bool square_meets_anchor(const Anchor& a, const DyadicSquare& q, double delta);

struct IncidenceInstance {
    double delta = 0.0;
    int level = 0;
    std::vector<Anchor> anchors;
    std::vector<std::vector<DyadicSquare>> families;
    double C1 = 0.0;  // audited Katz-Tao constant of the anchors
    double C2 = 0.0;  // largest audited Katz-Tao constant over the families
    double s = 0.0;
    double t = 0.0;
};

std::vector<DyadicSquare> random_katz_tao_squares(double s, double delta, double C, std::uint64_t seed);

struct InstanceOptions {
    AnchorKind kind = AnchorKind::Parabola;
    double s = 0.5;  // family exponent, in [0, 1]
    double t = 1.0;  // anchor exponent, in [0, 2]
    double delta = 0x1p-6;
    std::uint64_t seed = 1;
};

// Random anchors from the branching generator; each family is a 1-dimensional branching selection
// of columns, one square per column on the anchor's curve.
IncidenceInstance random_instance(const InstanceOptions& opt);
// Anchors at (k delta^t, 0) and family columns at x = j delta^s (both exponents at most 1).
IncidenceInstance lattice_instance(AnchorKind kind, double s, double t, double delta);
// Every delta-square of [0,1)^2 as anchor, families of all columns.
IncidenceInstance full_grid_instance(AnchorKind kind, double delta);
// Single anchor, family of delta^-s columns.
IncidenceInstance single_anchor_instance(double s, double delta);
// Recomputes C1 and C2.
void audit_constants(IncidenceInstance& inst);

struct IncidenceCount {
    std::int64_t total = 0;
    std::vector<std::int64_t> per_anchor;
};

IncidenceCount count_incidences(const IncidenceInstance& inst);
// Scans every square of [0,1) x [ylo, yhi) against every anchor.
IncidenceCount count_incidences_full_scan(const IncidenceInstance& inst, double ylo, double yhi);

double fu_ren_rhs(double C1, double C2, double F_count, double anchor_count, double delta, double eps);

struct RichnessHistogram {
    std::map<std::int64_t, std::vector<DyadicSquare>> levels;  // r -> squares with richness in [r, 2r)
    std::map<DyadicSquare, std::int64_t> richness;
    double lebesgue_proxy = 0.0;                               // sum_r r^2 delta^2 |F_r|
    std::int64_t union_size() const { return static_cast<std::int64_t>(richness.size()); }
};

RichnessHistogram richness_histogram(const IncidenceInstance& inst);
std::string histogram_csv(const RichnessHistogram& h, double delta);

struct FurstenbergReport {
    std::int64_t union_size = 0;
    double threshold = 0.0;      // delta^{-gamma(s,t) + kappa}
    double gamma = 0.0;
    bool pass = false;
    double anchor_constant = 0.0;  // (delta, t, C)-set constant of the anchors
    double family_constant = 0.0;  // worst (delta, s, C)-set constant of the families
};

inline constexpr double kFurstenbergAuditLimit = 16.0;
FurstenbergReport furstenberg_check(const IncidenceInstance& inst, double s, double t, double kappa,
                                    double audit_limit = kFurstenbergAuditLimit);

// Pushes a parabola instance through Psi: anchors become tubes around Psi(p + P), squares move to
// the square containing Psi(centre). Tube width is the Psi-distortion bound for the window.
IncidenceInstance transfer_instance(const IncidenceInstance& inst);

std::string to_json(const IncidenceInstance& inst);

}  // namespace paralab
