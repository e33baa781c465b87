#include "paralab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace paralab {

namespace {

double min_consecutive_gap(const std::vector<Atom>& atoms) {
    std::vector<Vec2> p;
    for (const auto& a : atoms) p.push_back(a.p);
    std::sort(p.begin(), p.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < p.size(); ++i) g = std::min(g, dist(p[i - 1], p[i]));
    return g;
}

// Atoms (k hx, k^2 hx^2) for k in [kmin, kmax], equal masses.
AtomicMeasure parabola_lattice(std::int64_t kmin, std::int64_t kmax, double hx, std::string tag) {
    AtomicMeasure m;
    m.tag = std::move(tag);
    m.hx = hx;
    m.hy = hx * hx;
    double w = 1.0 / static_cast<double>(kmax - kmin + 1);
    for (std::int64_t k = kmin; k <= kmax; ++k) {
        double x = static_cast<double>(k) * hx;
        m.atoms.push_back({{x, x * x}, w});
        m.ia.push_back(k);
        m.ib.push_back(k * k);
    }
    m.separation = hx;
    return m;
}

}  // namespace

double AtomicMeasure::total_mass() const {
    double t = 0.0;
    for (const auto& a : atoms) t += a.mass;
    return t;
}

std::vector<Vec2> AtomicMeasure::points() const {
    std::vector<Vec2> p;
    p.reserve(atoms.size());
    for (const auto& a : atoms) p.push_back(a.p);
    return p;
}

std::array<double, 4> AtomicMeasure::bbox() const {
    if (atoms.empty()) throw Error("empty measure");
    std::array<double, 4> b{atoms[0].p.x, atoms[0].p.y, atoms[0].p.x, atoms[0].p.y};
    for (const auto& a : atoms) {
        b[0] = std::min(b[0], a.p.x);
        b[1] = std::min(b[1], a.p.y);
        b[2] = std::max(b[2], a.p.x);
        b[3] = std::max(b[3], a.p.y);
    }
    return b;
}

double AtomicMeasure::diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        for (std::size_t j = i + 1; j < atoms.size(); ++j) d = std::max(d, dist(atoms[i].p, atoms[j].p));
    return d;
}

AtomicMeasure lattice_parabola_measure(double delta, double s) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0,1)");
    if (!(s > 0.0 && s <= 1.0)) throw Error("s must lie in (0,1]");
    double h = std::pow(delta, s);
    if (h > 2.0) throw Error("lattice spacing exceeds 2: no atoms");
    std::int64_t K = snap_floor(1.0 / h);
    return parabola_lattice(-K, K, h, "lattice");
}

double cantor_dimension(const std::vector<int>& kept_digits, int base) {
    return std::log(static_cast<double>(kept_digits.size())) / std::log(static_cast<double>(base));
}

AtomicMeasure cantor_parabola_measure(double delta, const std::vector<int>& kept_digits, int base) {
    if (base < 2) throw Error("base must be at least 2");
    if (kept_digits.empty() || kept_digits.size() > static_cast<std::size_t>(base)) throw Error("bad digit set");
    std::vector<int> digits = kept_digits;
    std::sort(digits.begin(), digits.end());
    if (std::adjacent_find(digits.begin(), digits.end()) != digits.end() || digits.front() < 0 || digits.back() >= base)
        throw Error("digits must be distinct and in [0, base)");
    int m = static_cast<int>(std::lround(std::log(1.0 / delta) / std::log(static_cast<double>(base))));
    if (m < 0 || std::abs(std::pow(static_cast<double>(base), -m) - delta) > 1e-12 * delta)
        throw Error("delta is not a power of 1/base");
    double scale_bits = 2.0 * m * std::log2(static_cast<double>(base));
    if (scale_bits > 62.0) throw Error("cantor level too deep for exact lattice coordinates");

    std::vector<std::int64_t> X{0};
    for (int j = 0; j < m; ++j) {
        std::vector<std::int64_t> next;
        for (auto x : X)
            for (int d : digits) next.push_back(x * base + d);
        X.swap(next);
    }
    std::sort(X.begin(), X.end());
    AtomicMeasure out;
    out.tag = "cantor";
    out.hx = std::pow(static_cast<double>(base), -m);
    out.hy = out.hx * out.hx;
    double w = 1.0 / static_cast<double>(X.size());
    for (auto k : X) {
        double x = static_cast<double>(k) * out.hx;
        out.atoms.push_back({{x, x * x}, w});
        out.ia.push_back(k);
        out.ib.push_back(k * k);
    }
    out.separation = X.size() > 1 ? min_consecutive_gap(out.atoms) * (1.0 - 1e-12) : 1.0;
    return out;
}

AtomicMeasure arc_measure(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0,1)");
    std::int64_t K = snap_floor(1.0 / delta);
    return parabola_lattice(-K, K, delta, "arc");
}

AtomicMeasure custom_measure(const std::vector<Vec2>& points, const std::vector<double>& masses,
                             const std::string& tag) {
    if (points.size() != masses.size()) throw Error("points and masses differ in length");
    AtomicMeasure m;
    m.tag = tag;
    m.hx = m.hy = kCustomQuantum;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(masses[i] >= 0.0)) throw Error("negative mass");
        auto a = static_cast<std::int64_t>(std::llround(points[i].x / kCustomQuantum));
        auto b = static_cast<std::int64_t>(std::llround(points[i].y / kCustomQuantum));
        m.ia.push_back(a);
        m.ib.push_back(b);
        m.atoms.push_back({{a * kCustomQuantum, b * kCustomQuantum}, masses[i]});
    }
    m.separation = m.atoms.size() > 1 ? min_consecutive_gap(m.atoms) : 1.0;
    // consecutive-in-x gaps bound the pairwise distance only from above; do the full pass
    for (std::size_t i = 0; i < m.atoms.size() && m.atoms.size() <= 5000; ++i)
        for (std::size_t j = i + 1; j < m.atoms.size(); ++j)
            m.separation = std::min(m.separation, dist(m.atoms[i].p, m.atoms[j].p));
    m.separation *= (1.0 - 1e-12);
    return m;
}

AtomicMeasure uniform_measure(const std::vector<Vec2>& P) {
    if (P.empty()) throw Error("empty point set");
    return custom_measure(P, std::vector<double>(P.size(), 1.0 / static_cast<double>(P.size())));
}

AtomicMeasure translate(const AtomicMeasure& m, Vec2 v) {
    double fa = v.x / m.hx, fb = v.y / m.hy;
    if (std::abs(fa - std::nearbyint(fa)) < 1e-9 && std::abs(fb - std::nearbyint(fb)) < 1e-9) {
        AtomicMeasure out = m;
        auto da = static_cast<std::int64_t>(std::nearbyint(fa));
        auto db = static_cast<std::int64_t>(std::nearbyint(fb));
        for (std::size_t i = 0; i < out.atoms.size(); ++i) {
            out.ia[i] += da;
            out.ib[i] += db;
            out.atoms[i].p = {out.ia[i] * out.hx, out.ib[i] * out.hy};
        }
        return out;
    }
    std::vector<Vec2> p;
    std::vector<double> w;
    for (const auto& a : m.atoms) {
        p.push_back(a.p + v);
        w.push_back(a.mass);
    }
    return custom_measure(p, w, m.tag);
}

AtomicMeasure translate_atom_to_origin(const AtomicMeasure& m, std::size_t i) {
    if (i >= m.size()) throw Error("atom index out of range");
    AtomicMeasure out = m;
    for (std::size_t j = 0; j < out.atoms.size(); ++j) {
        out.ia[j] -= m.ia[i];
        out.ib[j] -= m.ib[i];
        out.atoms[j].p = {out.ia[j] * out.hx, out.ib[j] * out.hy};
    }
    return out;
}

AtomicMeasure scale_measure(const AtomicMeasure& m, double lambda) {
    AtomicMeasure out = m;
    out.hx *= lambda;
    out.hy *= lambda;
    out.separation *= lambda;
    for (auto& a : out.atoms) a.p = lambda * a.p;
    return out;
}

DyadicMeasure to_dyadic(const AtomicMeasure& m, int level) {
    DyadicMeasure d;
    d.level = level;
    for (const auto& a : m.atoms) {
        auto q = square_containing(a.p, level);
        d.add(q.ix, q.iy, a.mass);
    }
    return d;
}

std::string to_json(const AtomicMeasure& m) {
    nlohmann::json j;
    j["tag"] = m.tag;
    j["separation"] = m.separation;
    auto& arr = j["atoms"] = nlohmann::json::array();
    for (const auto& a : m.atoms) arr.push_back({a.p.x, a.p.y, a.mass});
    return j.dump();
}

AtomicMeasure atomic_measure_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    std::vector<Vec2> p;
    std::vector<double> w;
    for (const auto& a : j.at("atoms")) {
        p.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
        w.push_back(a.at(2).get<double>());
    }
    auto m = custom_measure(p, w, j.value("tag", std::string("custom")));
    m.separation = j.value("separation", m.separation);
    return m;
}

}  // namespace paralab
