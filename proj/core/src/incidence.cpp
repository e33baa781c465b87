#include "paralab/incidence.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace paralab {

namespace {

// Curve traced by the anchor over x.
double anchor_curve(const Anchor& a, double x) {
    if (a.kind == AnchorKind::Parabola) return (x - a.center.x) * (x - a.center.x) + a.center.y;
    return a.tube.core.a * x + a.tube.core.b;
}

// Subset of {0, ..., 2^m - 1} by binary branching with about 2^s children per node (s in [0,1]).
std::vector<std::int64_t> branching_columns(double s, int m, std::mt19937_64& rng) {
    std::vector<std::int64_t> cur{0};
    for (int lvl = 1; lvl <= m; ++lvl) {
        auto target = std::min<std::int64_t>(std::llround(std::pow(2.0, s * lvl)), std::int64_t{1} << lvl);
        target = std::max<std::int64_t>(target, static_cast<std::int64_t>(cur.size()));
        auto c = static_cast<std::int64_t>(cur.size());
        std::int64_t base = target / c, extra = target % c;
        std::vector<std::size_t> order(cur.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::int64_t> next;
        for (std::size_t k = 0; k < order.size(); ++k) {
            std::int64_t q = base + (static_cast<std::int64_t>(k) < extra ? 1 : 0);
            std::int64_t parent = cur[order[k]];
            if (q >= 2) {
                next.push_back(2 * parent);
                next.push_back(2 * parent + 1);
            } else {
                next.push_back(2 * parent + static_cast<std::int64_t>(rng() & 1));
            }
        }
        std::sort(next.begin(), next.end());
        cur.swap(next);
    }
    return cur;
}

std::vector<DyadicSquare> family_on_columns(const Anchor& a, const std::vector<std::int64_t>& cols, int level,
                                            double delta) {
    std::vector<DyadicSquare> fam;
    for (auto ix : cols) {
        double x = (static_cast<double>(ix) + 0.5) * delta;
        DyadicSquare q{level, ix, static_cast<std::int64_t>(std::floor(anchor_curve(a, x) / delta))};
        fam.push_back(q);
    }
    std::sort(fam.begin(), fam.end());
    fam.erase(std::unique(fam.begin(), fam.end()), fam.end());
    return fam;
}

Anchor anchor_for_square(AnchorKind kind, const DyadicSquare& p) {
    Anchor a = kind == AnchorKind::Parabola ? parabola_anchor(p.center()) : tube_anchor_for_square(p);
    a.square = p;
    return a;
}

std::vector<std::int64_t> all_columns(int m) {
    std::vector<std::int64_t> c(std::size_t{1} << m);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<std::int64_t>(i);
    return c;
}

const char* kind_name(AnchorKind k) { return k == AnchorKind::Parabola ? "parabola" : "tube"; }

}  // namespace

Anchor parabola_anchor(Vec2 center) {
    Anchor a;
    a.kind = AnchorKind::Parabola;
    a.center = center;
    return a;
}

Anchor tube_anchor(const GrassmannLine& core, double width) {
    Anchor a;
    a.kind = AnchorKind::Tube;
    a.tube = Tube(core, width);
    return a;
}

Anchor tube_anchor_for_square(const DyadicSquare& p) {
    Vec2 c = p.center();
    Anchor a = tube_anchor({c.x, c.y}, p.side());
    a.square = p;
    return a;
}

bool square_meets_anchor(const Anchor& a, const DyadicSquare& q, double delta) {
    Vec2 c = q.center();
    double hs = 0.5 * q.side(), rad = hs * std::sqrt(2.0);
    if (a.kind == AnchorKind::Tube) return a.tube.core.distance_to(c) <= 0.5 * a.tube.width + rad;
    // range of (x - px)^2 + py over the square's x-range
    double x0 = c.x - hs - a.center.x, x1 = c.x + hs - a.center.x;
    double gmax = std::max(x0 * x0, x1 * x1) + a.center.y;
    double gmin = (x0 <= 0.0 && x1 >= 0.0 ? 0.0 : std::min(x0 * x0, x1 * x1)) + a.center.y;
    double gap = c.y < gmin ? gmin - c.y : (c.y > gmax ? c.y - gmax : 0.0);
    return gap <= delta + rad;
}

std::vector<DyadicSquare> random_katz_tao_squares(double s, double delta, double C, std::uint64_t seed) {
    if (!(s >= 0.0 && s <= 2.0)) throw Error("s must lie in [0,2]");
    if (!(C >= 1.0)) throw Error("infeasible Katz-Tao target: C must be at least 1");
    int m = log2_exact(1.0 / delta, "1/delta");
    std::mt19937_64 rng(seed);
    std::vector<DyadicSquare> cur{{0, 0, 0}};
    for (int lvl = 1; lvl <= m; ++lvl) {
        auto cap = std::int64_t{1} << (2 * lvl);
        auto target = std::min<std::int64_t>(std::llround(std::pow(2.0, s * lvl)), cap);
        target = std::max<std::int64_t>(target, static_cast<std::int64_t>(cur.size()));
        auto c = static_cast<std::int64_t>(cur.size());
        std::int64_t base = target / c, extra = target % c;
        std::vector<std::size_t> order(cur.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<DyadicSquare> next;
        for (std::size_t k = 0; k < order.size(); ++k) {
            std::int64_t q = std::min<std::int64_t>(4, base + (static_cast<std::int64_t>(k) < extra ? 1 : 0));
            const auto& p = cur[order[k]];
            std::array<int, 4> kids{0, 1, 2, 3};
            std::shuffle(kids.begin(), kids.end(), rng);
            for (std::int64_t u = 0; u < q; ++u)
                next.push_back({lvl, 2 * p.ix + (kids[u] & 1), 2 * p.iy + (kids[u] >> 1)});
        }
        cur.swap(next);
    }
    std::sort(cur.begin(), cur.end());
    double audit = katz_tao_constant_dyadic(cur, s);
    if (audit > 4.0 * C) throw Error("generator audit failed: constant " + std::to_string(audit));
    return cur;
}

void audit_constants(IncidenceInstance& inst) {
    std::vector<DyadicSquare> anchors;
    for (const auto& a : inst.anchors) anchors.push_back(a.square);
    std::sort(anchors.begin(), anchors.end());
    anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
    inst.C1 = std::max(1.0, katz_tao_constant_dyadic(anchors, inst.t));
    inst.C2 = 1.0;
    for (const auto& f : inst.families)
        if (!f.empty()) inst.C2 = std::max(inst.C2, katz_tao_constant_dyadic(f, inst.s));
}

IncidenceInstance random_instance(const InstanceOptions& opt) {
    if (!(opt.s >= 0.0 && opt.s <= 1.0)) throw Error("family exponent s must lie in [0,1]");
    if (!(opt.t >= 0.0 && opt.t <= 2.0)) throw Error("anchor exponent t must lie in [0,2]");
    IncidenceInstance inst;
    inst.delta = opt.delta;
    inst.level = log2_exact(1.0 / opt.delta, "1/delta");
    inst.s = opt.s;
    inst.t = opt.t;
    auto squares = random_katz_tao_squares(opt.t, opt.delta, 1.0, opt.seed);
    std::mt19937_64 rng(opt.seed ^ 0xA5A5A5A5DEADBEEFULL);
    for (const auto& p : squares) {
        inst.anchors.push_back(anchor_for_square(opt.kind, p));
        auto cols = branching_columns(opt.s, inst.level, rng);
        inst.families.push_back(family_on_columns(inst.anchors.back(), cols, inst.level, opt.delta));
    }
    audit_constants(inst);
    return inst;
}

IncidenceInstance lattice_instance(AnchorKind kind, double s, double t, double delta) {
    if (!(s > 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0)) throw Error("lattice instance needs s in (0,1], t in [0,1]");
    IncidenceInstance inst;
    inst.delta = delta;
    inst.level = log2_exact(1.0 / delta, "1/delta");
    inst.s = s;
    inst.t = t;
    const double ha = std::pow(delta, t), hs = std::pow(delta, s);
    std::vector<std::int64_t> cols;
    for (std::int64_t j = 0; j * hs < 1.0 - 1e-12; ++j) cols.push_back(static_cast<std::int64_t>(std::floor(j * hs / delta)));
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    for (std::int64_t k = 0; k * ha < 1.0 - 1e-12; ++k) {
        auto p = square_containing({k * ha, 0.0}, inst.level);
        if (!inst.anchors.empty() && inst.anchors.back().square == p) continue;
        inst.anchors.push_back(anchor_for_square(kind, p));
        inst.families.push_back(family_on_columns(inst.anchors.back(), cols, inst.level, delta));
    }
    audit_constants(inst);
    return inst;
}

IncidenceInstance full_grid_instance(AnchorKind kind, double delta) {
    IncidenceInstance inst;
    inst.delta = delta;
    inst.level = log2_exact(1.0 / delta, "1/delta");
    inst.s = 1.0;
    inst.t = 2.0;
    auto cols = all_columns(inst.level);
    const std::int64_t n = std::int64_t{1} << inst.level;
    for (std::int64_t iy = 0; iy < n; ++iy)
        for (std::int64_t ix = 0; ix < n; ++ix) {
            inst.anchors.push_back(anchor_for_square(kind, {inst.level, ix, iy}));
            inst.families.push_back(family_on_columns(inst.anchors.back(), cols, inst.level, delta));
        }
    audit_constants(inst);
    return inst;
}

IncidenceInstance single_anchor_instance(double s, double delta) {
    IncidenceInstance inst;
    inst.delta = delta;
    inst.level = log2_exact(1.0 / delta, "1/delta");
    inst.s = s;
    inst.t = 0.0;
    std::mt19937_64 rng(7);
    inst.anchors.push_back(anchor_for_square(AnchorKind::Parabola, {inst.level, 0, 0}));
    inst.families.push_back(family_on_columns(inst.anchors.back(), branching_columns(s, inst.level, rng), inst.level, delta));
    audit_constants(inst);
    return inst;
}

IncidenceCount count_incidences(const IncidenceInstance& inst) {
    if (inst.anchors.size() != inst.families.size()) throw Error("anchors and families differ in number");
    IncidenceCount c;
    c.per_anchor.resize(inst.anchors.size());
    for (std::size_t i = 0; i < inst.anchors.size(); ++i) {
        for (const auto& q : inst.families[i])
            if (!square_meets_anchor(inst.anchors[i], q, inst.delta))
                throw Error("invariant violation: anchor " + std::to_string(i) + " does not meet square (" +
                            std::to_string(q.ix) + "," + std::to_string(q.iy) + ")");
        c.per_anchor[i] = static_cast<std::int64_t>(inst.families[i].size());
        c.total += c.per_anchor[i];
    }
    return c;
}

IncidenceCount count_incidences_full_scan(const IncidenceInstance& inst, double ylo, double yhi) {
    IncidenceCount c;
    c.per_anchor.resize(inst.anchors.size());
    const std::int64_t n = std::int64_t{1} << inst.level;
    auto j0 = static_cast<std::int64_t>(std::floor(ylo / inst.delta)), j1 = static_cast<std::int64_t>(std::ceil(yhi / inst.delta));
    for (std::size_t i = 0; i < inst.anchors.size(); ++i) {
        std::set<DyadicSquare> fam(inst.families[i].begin(), inst.families[i].end());
        for (std::int64_t iy = j0; iy < j1; ++iy)
            for (std::int64_t ix = 0; ix < n; ++ix) {
                DyadicSquare q{inst.level, ix, iy};
                if (square_meets_anchor(inst.anchors[i], q, inst.delta) && fam.count(q)) ++c.per_anchor[i];
            }
        c.total += c.per_anchor[i];
    }
    return c;
}

double fu_ren_rhs(double C1, double C2, double F_count, double anchor_count, double delta, double eps) {
    for (double v : {C1, C2, F_count, anchor_count, delta})
        if (!(v > 0.0)) throw Error("fu_ren_rhs arguments must be positive");
    return std::pow(delta, -eps) * std::sqrt(C1 * C2 * F_count * anchor_count / delta);
}

RichnessHistogram richness_histogram(const IncidenceInstance& inst) {
    RichnessHistogram h;
    for (const auto& fam : inst.families)
        for (const auto& q : fam) ++h.richness[q];
    for (const auto& [q, r] : h.richness) {
        std::int64_t lvl = 1;
        while (2 * lvl <= r) lvl *= 2;
        h.levels[lvl].push_back(q);
    }
    const double d2 = inst.delta * inst.delta;
    for (const auto& [r, sq] : h.levels) h.lebesgue_proxy += static_cast<double>(r * r) * d2 * static_cast<double>(sq.size());
    return h;
}

std::string histogram_csv(const RichnessHistogram& h, double delta) {
    std::ostringstream out;
    out.precision(17);
    out << "r,count,lebesgue_proxy\n";
    for (const auto& [r, sq] : h.levels)
        out << r << ',' << sq.size() << ',' << static_cast<double>(r * r) * delta * delta * static_cast<double>(sq.size())
            << '\n';
    return out.str();
}

FurstenbergReport furstenberg_check(const IncidenceInstance& inst, double s, double t, double kappa, double audit_limit) {
    FurstenbergReport rep;
    std::vector<DyadicSquare> anchors;
    for (const auto& a : inst.anchors) anchors.push_back(a.square);
    std::sort(anchors.begin(), anchors.end());
    anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
    rep.anchor_constant = delta_set_constant(anchors, t);
    for (const auto& f : inst.families)
        if (!f.empty()) rep.family_constant = std::max(rep.family_constant, delta_set_constant(f, s));
    if (rep.anchor_constant > audit_limit)
        throw Error("audit failed: anchor (delta,t)-set constant " + std::to_string(rep.anchor_constant));
    if (rep.family_constant > audit_limit)
        throw Error("audit failed: family (delta,s)-set constant " + std::to_string(rep.family_constant));
    std::set<DyadicSquare> u;
    for (const auto& f : inst.families) u.insert(f.begin(), f.end());
    rep.union_size = static_cast<std::int64_t>(u.size());
    rep.gamma = gamma_exponent(s, t);
    rep.threshold = std::pow(inst.delta, -rep.gamma + kappa);
    rep.pass = static_cast<double>(rep.union_size) >= rep.threshold;
    return rep;
}

IncidenceInstance transfer_instance(const IncidenceInstance& inst) {
    IncidenceInstance out;
    out.delta = inst.delta;
    out.level = inst.level;
    out.s = inst.s;
    out.t = inst.t;
    double xmax = 0.0;
    for (const auto& a : inst.anchors) {
        if (a.kind != AnchorKind::Parabola) throw Error("transfer expects parabola anchors");
        xmax = std::max(xmax, std::abs(a.center.x));
    }
    for (const auto& f : inst.families)
        for (const auto& q : f) xmax = std::max(xmax, std::abs(q.center().x) + q.side());
    // a hit square's centre lies within 2 delta of the curve; Psi stretches that by (1 + 2|x|)
    const double C = 2.0 * (1.0 + 2.0 * xmax) + 1.0;
    for (std::size_t i = 0; i < inst.anchors.size(); ++i) {
        Anchor a = tube_anchor(line_of_translated_parabola(inst.anchors[i].center), 2.0 * C * inst.delta);
        a.square = inst.anchors[i].square;
        out.anchors.push_back(a);
        std::vector<DyadicSquare> fam;
        for (const auto& q : inst.families[i]) fam.push_back(square_containing(psi(q.center()), inst.level));
        std::sort(fam.begin(), fam.end());
        fam.erase(std::unique(fam.begin(), fam.end()), fam.end());
        out.families.push_back(std::move(fam));
    }
    audit_constants(out);
    return out;
}

std::string to_json(const IncidenceInstance& inst) {
    nlohmann::json j;
    j["delta"] = inst.delta;
    j["level"] = inst.level;
    j["s"] = inst.s;
    j["t"] = inst.t;
    j["C1"] = inst.C1;
    j["C2"] = inst.C2;
    auto& an = j["anchors"] = nlohmann::json::array();
    for (const auto& a : inst.anchors) {
        nlohmann::json e{{"kind", kind_name(a.kind)}, {"square", {a.square.ix, a.square.iy}}};
        if (a.kind == AnchorKind::Parabola)
            e["center"] = {a.center.x, a.center.y};
        else {
            e["line"] = {a.tube.core.a, a.tube.core.b};
            e["width"] = a.tube.width;
        }
        an.push_back(e);
    }
    auto& fams = j["families"] = nlohmann::json::array();
    for (const auto& f : inst.families) {
        auto arr = nlohmann::json::array();
        for (const auto& q : f) arr.push_back({q.ix, q.iy});
        fams.push_back(arr);
    }
    return j.dump();
}

}  // namespace paralab
