#include "paralab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <json.hpp>

namespace paralab {

namespace {

std::int64_t shift_floor(std::int64_t v, int bits) {
    // arithmetic right shift is floor division by 2^bits
    return bits >= 63 ? (v < 0 ? -1 : 0) : (v >> bits);
}

struct PairHash {
    std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& p) const {
        std::uint64_t h = static_cast<std::uint64_t>(p.first) * 0x9E3779B97F4A7C15ULL;
        h ^= static_cast<std::uint64_t>(p.second) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

using CellMap = std::unordered_map<std::pair<std::int64_t, std::int64_t>, double, PairHash>;

void check_exponent(double v, double lo, double hi, bool lo_open, bool hi_open, const char* name) {
    if (std::isnan(v)) throw Error(std::string(name) + " is NaN");
    bool bad = lo_open ? v <= lo : v < lo;
    bad = bad || (hi_open ? v >= hi : v > hi);
    if (bad) throw Error(std::string(name) + " out of range: " + std::to_string(v));
}

}  // namespace

int log2_exact(double x, const char* what) {
    int e = 0;
    double m = std::frexp(x, &e);
    if (!(x > 0) || m != 0.5) throw Error(std::string(what) + " must be a power of two");
    return e - 1;
}

DyadicSquare DyadicSquare::parent(int coarser_level) const {
    int bits = level - coarser_level;
    if (bits < 0) throw Error("parent level finer than square");
    return {coarser_level, shift_floor(ix, bits), shift_floor(iy, bits)};
}

DyadicSquare square_containing(Vec2 p, int level) {
    double scale = std::ldexp(1.0, level);
    return {level, static_cast<std::int64_t>(std::floor(p.x * scale)),
            static_cast<std::int64_t>(std::floor(p.y * scale))};
}

double DyadicMeasure::total_mass() const {
    double t = 0.0;
    for (const auto& [k, w] : weights) t += w;
    return t;
}

void DyadicMeasure::add(std::int64_t ix, std::int64_t iy, double w) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("weights must be finite and nonnegative");
    weights[{ix, iy}] += w;
}

std::vector<DyadicSquare> DyadicMeasure::squares() const {
    std::vector<DyadicSquare> out;
    out.reserve(weights.size());
    for (const auto& [k, w] : weights) out.push_back({level, k.first, k.second});
    return out;
}

std::string to_json(const DyadicMeasure& m) {
    nlohmann::json j;
    j["level"] = m.level;
    auto& e = j["entries"] = nlohmann::json::array();
    for (const auto& [k, w] : m.weights) e.push_back({k.first, k.second, w});
    return j.dump();
}

DyadicMeasure dyadic_measure_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    DyadicMeasure m;
    m.level = j.at("level").get<int>();
    for (const auto& e : j.at("entries"))
        m.add(e.at(0).get<std::int64_t>(), e.at(1).get<std::int64_t>(), e.at(2).get<double>());
    return m;
}

Vec2 GrassmannLine::direction() const {
    double n = std::hypot(1.0, a);
    return {1.0 / n, a / n};
}

std::array<double, 4> GrassmannLine::projection() const {
    Vec2 u = direction();
    return {u.x * u.x, u.x * u.y, u.x * u.y, u.y * u.y};
}

Vec2 GrassmannLine::offset() const {
    Vec2 u = direction();
    double t = b * u.y;  // (0,b)·u
    return {-t * u.x, b - t * u.y};
}

double GrassmannLine::distance_to(Vec2 p) const {
    return std::abs(a * p.x - p.y + b) / std::hypot(a, 1.0);
}

double frostman_constant(const DyadicMeasure& m, double s, double min_scale) {
    if (m.weights.empty()) throw Error("empty measure");
    int top = log2_exact(1.0 / min_scale, "1/min_scale");
    if (top > m.level) throw Error("min_scale finer than the measure's level");
    double best = 0.0;
    for (int lvl = top; lvl >= 0; --lvl) {
        CellMap cells;
        int bits = m.level - lvl;
        for (const auto& [k, w] : m.weights) cells[{shift_floor(k.first, bits), shift_floor(k.second, bits)}] += w;
        double side_s = std::pow(std::ldexp(1.0, -lvl), s);
        for (const auto& [k, w] : cells) best = std::max(best, w / side_s);
    }
    return best;
}

double katz_tao_ratio_at(const std::vector<Vec2>& P, double s, double delta, double r) {
    double best = 0.0;
    for (const auto& c : P) {
        std::size_t cnt = 0;
        for (const auto& q : P) cnt += dist(c, q) <= r;
        best = std::max(best, cnt * std::pow(delta / r, s));
    }
    return best;
}

double katz_tao_constant(const std::vector<Vec2>& P, double s, double delta) {
    if (P.empty()) throw Error("empty point set");
    // separation check through a delta-grid hash
    std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>, PairHash> grid;
    for (std::size_t i = 0; i < P.size(); ++i)
        grid[{static_cast<std::int64_t>(std::floor(P[i].x / delta)), static_cast<std::int64_t>(std::floor(P[i].y / delta))}]
            .push_back(i);
    for (const auto& [cell, idx] : grid)
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = grid.find({cell.first + dx, cell.second + dy});
                if (it == grid.end()) continue;
                for (auto i : idx)
                    for (auto j : it->second)
                        if (i < j && dist(P[i], P[j]) <= delta) throw Error("separation violated");
            }
    // histogram of the smallest dyadic radius delta*2^k capturing each point
    std::vector<std::size_t> hist;
    double best = 0.0;
    for (const auto& c : P) {
        hist.assign(hist.size(), 0);
        for (const auto& q : P) {
            double d = dist(c, q);
            std::size_t k = d <= delta ? 0 : static_cast<std::size_t>(std::ceil(std::log2(d / delta) - 1e-12));
            while (k > 0 && d <= delta * std::ldexp(1.0, static_cast<int>(k) - 1)) --k;
            while (d > delta * std::ldexp(1.0, static_cast<int>(k))) ++k;
            if (k >= hist.size()) hist.resize(k + 1, 0);
            ++hist[k];
        }
        std::size_t cum = 0;
        for (std::size_t k = 0; k < hist.size(); ++k) {
            cum += hist[k];
            best = std::max(best, cum * std::pow(std::ldexp(1.0, -static_cast<int>(k)), s));
        }
    }
    return best;
}

double katz_tao_constant_dyadic(const std::vector<DyadicSquare>& P, double s) {
    if (P.empty()) throw Error("empty family");
    int L = P.front().level;
    double best = 0.0;
    for (int lvl = L;; --lvl) {
        std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::size_t, PairHash> cells;
        for (const auto& q : P) {
            if (q.level != L) throw Error("mixed levels in square family");
            auto a = q.parent(lvl);
            ++cells[{a.ix, a.iy}];
        }
        double ratio = std::pow(std::ldexp(1.0, lvl - L), s);
        std::int64_t x0 = INT64_MAX, x1 = INT64_MIN, y0 = INT64_MAX, y1 = INT64_MIN;
        for (const auto& [k, c] : cells) {
            best = std::max(best, c * ratio);
            x0 = std::min(x0, k.first), x1 = std::max(x1, k.first);
            y0 = std::min(y0, k.second), y1 = std::max(y1, k.second);
        }
        if (cells.size() == 1) break;
        // cells straddling a dyadic boundary (e.g. -1 and 0) never merge; a square of twice the side
        // holds them all and coarser levels only lower the ratio
        if (x1 - x0 <= 1 && y1 - y0 <= 1) {
            best = std::max(best, static_cast<double>(P.size()) * std::pow(std::ldexp(1.0, lvl - 1 - L), s));
            break;
        }
    }
    return best;
}

double delta_set_constant(const std::vector<DyadicSquare>& P, double s) {
    if (P.empty()) throw Error("empty family");
    int L = P.front().level;
    double best = 0.0;
    for (int lvl = L; lvl >= 0; --lvl) {
        std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::size_t, PairHash> cells;
        for (const auto& q : P) {
            auto a = q.parent(lvl);
            ++cells[{a.ix, a.iy}];
        }
        double denom = std::pow(std::ldexp(1.0, -lvl), s) * static_cast<double>(P.size());
        for (const auto& [k, c] : cells) best = std::max(best, c / denom);
    }
    return best;
}

double riesz_energy_discrete(const DyadicMeasure& m, double s) {
    if (!(s > 0)) throw Error("riesz exponent must be positive");
    std::vector<Vec2> c;
    std::vector<double> w;
    for (const auto& sq : m.squares()) c.push_back(sq.center());
    for (const auto& [k, v] : m.weights) w.push_back(v);
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) sum += w[i] * w[j] / std::pow(dist(c[i], c[j]), s);
    return 1.0 + 2.0 * sum;
}

double line_metric(const GrassmannLine& l1, const GrassmannLine& l2) {
    auto p = l1.projection();
    auto q = l2.projection();
    // difference is symmetric: operator norm = largest |eigenvalue|
    double a = p[0] - q[0], b = p[1] - q[1], d = p[3] - q[3];
    double mid = 0.5 * (a + d), rad = std::hypot(0.5 * (a - d), b);
    double op = std::max(std::abs(mid + rad), std::abs(mid - rad));
    return op + dist(l1.offset(), l2.offset());
}

LevelSetResult level_set_extract(const DyadicMeasure& m, double s, double delta, double eps) {
    if (m.weights.empty()) throw Error("empty measure");
    if (std::abs(std::ldexp(1.0, -m.level) - delta) > 1e-15 * delta) throw Error("measure level does not match delta");
    LevelSetResult res;
    res.energy = riesz_energy_discrete(m, s);
    res.threshold = kChebyshevA * res.energy * std::pow(delta, -eps);

    auto sq = m.squares();
    std::vector<double> w;
    for (const auto& [k, v] : m.weights) w.push_back(v);
    std::vector<Vec2> c;
    for (const auto& q : sq) c.push_back(q.center());

    std::map<int, std::pair<double, std::vector<DyadicSquare>>> buckets;
    for (std::size_t i = 0; i < sq.size(); ++i) {
        if (w[i] <= 0.0) continue;
        double pot = 0.0;
        for (std::size_t j = 0; j < sq.size(); ++j)
            if (j != i) pot += w[j] / std::pow(dist(c[i], c[j]), s);
        if (pot > res.threshold) {
            res.removed_mass += w[i];
            continue;
        }
        int b = static_cast<int>(std::floor(-std::log2(w[i])));
        if (std::ldexp(1.0, -b) < w[i]) --b;
        if (std::ldexp(1.0, -b - 1) >= w[i]) ++b;
        auto& bucket = buckets[b];
        bucket.first += w[i];
        bucket.second.push_back(sq[i]);
    }
    if (buckets.empty()) throw Error("energy too concentrated");
    auto best = buckets.begin();
    // equal masses: the more spread-out bucket wins
    for (auto it = buckets.begin(); it != buckets.end(); ++it) {
        double a = it->second.first, b = best->second.first;
        bool tie = std::abs(a - b) <= 1e-12 * std::max(a, b);
        if ((!tie && a > b) || (tie && it->second.second.size() > best->second.second.size())) best = it;
    }
    res.bucket = best->first;
    res.bucket_mass = best->second.first;
    res.squares = std::move(best->second.second);
    return res;
}

double gamma_exponent(double s, double t) {
    check_exponent(s, 0.0, 1.0, true, false, "s");
    check_exponent(t, 0.0, 2.0, false, false, "t");
    return std::min({s + t, (3.0 * s + t) / 2.0, s + 1.0});
}

double zeta_exponent(double s, double t) {
    check_exponent(s, 0.5, 1.0, true, false, "s");
    check_exponent(t, 0.0, 2.0, true, true, "t");
    return std::min(t + 2.0 * s - 1.0, s + 1.0);
}

double sumset_exponent(double s, int n) {
    check_exponent(s, 0.0, 1.0, false, false, "s");
    if (n < 1) throw Error("n must be at least 1");
    return std::min(3.0 * s - s * std::ldexp(1.0, -(n - 2)), s + 1.0);
}

double decay_exponent(double s) {
    check_exponent(s, 0.0, 1.0, false, false, "s");
    return std::min(3.0 * s, s + 1.0);
}

double iterate_gamma(double s, int n) {
    check_exponent(s, 0.0, 1.0, true, false, "s");
    if (n < 1) throw Error("n must be at least 1");
    double t = s;
    for (int j = 1; j < n; ++j) t = std::min((3.0 * s + t) / 2.0, s + 1.0);
    return t;
}

}  // namespace paralab
