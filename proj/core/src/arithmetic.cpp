#include "paralab/arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "paralab/fourier.hpp"
#include "paralab/sums.hpp"

namespace paralab {

namespace {

void require_lattice(const AtomicMeasure& P) {
    if (P.ia.size() != P.atoms.size() || P.ib.size() != P.atoms.size() || !(P.hx > 0.0) || !(P.hy > 0.0))
        throw Error("point set carries no lattice coordinates");
}

LatticeAtoms<std::int64_t> counting_atoms(const AtomicMeasure& P) {
    require_lattice(P);
    return {P.ia, P.ib, std::vector<std::int64_t>(P.size(), 1)};
}

double power_count(std::size_t base, int n) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v *= static_cast<double>(base);
    return v;
}

void normalize(std::vector<DyadicSquare>& sq) {
    std::sort(sq.begin(), sq.end());
    sq.erase(std::unique(sq.begin(), sq.end()), sq.end());
}

}  // namespace

bool is_separated(const std::vector<Vec2>& P, double delta) {
    std::vector<Vec2> p = P;
    std::sort(p.begin(), p.end(), [](Vec2 a, Vec2 b) { return a.x < b.x; });
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = i + 1; j < p.size() && p[j].x - p[i].x <= delta; ++j)
            if (dist(p[i], p[j]) <= delta) return false;
    return true;
}

CoveringSet sumset_cover(const AtomicMeasure& P, int n, double delta, const SumsetOptions& opt) {
    if (n < 1) throw Error("n must be at least 1");
    require_lattice(P);
    CoveringSet C;
    C.delta = delta;
    C.level = log2_exact(1.0 / delta, "1/delta");
    const long double qx = static_cast<long double>(P.hx) / delta, qy = static_cast<long double>(P.hy) / delta;
    auto index = [](std::int64_t k, long double q) { return snap_floor(static_cast<double>(static_cast<long double>(k) * q)); };

    bool enumerate = power_count(P.size(), n) <= opt.budget && !opt.force_doubling;
    if (!enumerate && !opt.allow_doubling) throw Error("sumset budget exceeded and the doubling route is disabled");
    if (enumerate || n == 1) {
        for_each_sum_column<std::int64_t>(counting_atoms(P), n,
                                          [&](std::int64_t A, std::span<const std::int64_t> bs, std::span<const std::int64_t>) {
                                              auto ix = index(A, qx);
                                              for (auto b : bs) C.squares.push_back({C.level, ix, index(b, qy)});
                                          });
        normalize(C.squares);
        return C;
    }
    // doubling route: one representative sum per delta-square, added to the representatives of K and
    // re-covered; each step moves a sum by at most one square
    std::map<std::pair<std::int64_t, std::int64_t>, Vec2> base;
    for (const auto& p : P.points()) {
        auto q = square_containing(p, C.level);
        base.emplace(std::pair{q.ix, q.iy}, p);
    }
    auto cur = base;
    for (int k = 2; k <= n; ++k) {
        std::map<std::pair<std::int64_t, std::int64_t>, Vec2> next;
        for (const auto& [ka, a] : cur)
            for (const auto& [kb, b] : base) {
                Vec2 c = a + b;
                auto q = square_containing(c, C.level);
                next.emplace(std::pair{q.ix, q.iy}, c);
            }
        cur.swap(next);
    }
    for (const auto& [k, v] : cur) C.squares.push_back({C.level, k.first, k.second});
    C.exact = false;
    C.slack_squares = n - 1;
    return C;
}

std::int64_t box_count(const CoveringSet& C, double Delta) {
    int lvl = log2_exact(1.0 / Delta, "1/Delta");
    if (lvl > C.level) throw Error("Delta must be at least delta");
    std::set<std::pair<std::int64_t, std::int64_t>> cells;
    for (const auto& q : C.squares) {
        auto p = q.parent(lvl);
        cells.insert({p.ix, p.iy});
    }
    return static_cast<std::int64_t>(cells.size());
}

std::int64_t vinogradov_count(const AtomicMeasure& P, int n, double delta, double budget) {
    if (n < 1) throw Error("n must be at least 1");
    if (power_count(P.size(), n) > budget)
        throw Error("vinogradov budget exceeded: |P|^n = " + std::to_string(power_count(P.size(), n)) +
                    "; use a smaller n or fewer points");
    if (!is_separated(P.points(), delta)) throw Error("separation violated");
    return pair_kernel_sum<std::int64_t, std::int64_t>(counting_atoms(P), n, P.hx, P.hy, delta,
                                                       [](double, double, std::int64_t a, std::int64_t b) { return a * b; });
}

std::int64_t vinogradov_bruteforce(const std::vector<Vec2>& P, int n, double delta) {
    if (power_count(P.size(), 2 * n) > 1e8) throw Error("brute force limited to |P|^{2n} <= 1e8");
    std::vector<Vec2> sums{{0.0, 0.0}};
    for (int k = 0; k < n; ++k) {
        std::vector<Vec2> next;
        for (const auto& s : sums)
            for (const auto& p : P) next.push_back({s.x + p.x, s.y + p.y});
        sums.swap(next);
    }
    std::int64_t count = 0;
    for (const auto& a : sums)
        for (const auto& b : sums) count += within_radius(a.x - b.x, a.y - b.y, delta);
    return count;
}

CountEnergyReport count_energy_check(const AtomicMeasure& P, int n, double delta) {
    CountEnergyReport rep;
    rep.count = vinogradov_count(P, n, delta);
    rep.lhs = static_cast<double>(rep.count) / power_count(P.size(), 2 * n);
    AtomicMeasure u = P;
    for (auto& a : u.atoms) a.mass = 1.0 / static_cast<double>(P.size());
    rep.rhs = delta * delta * l2_norm_sq(convolve_power(u, n, 4.0 * delta));
    rep.ratio = rep.lhs / rep.rhs;
    rep.pass = rep.lhs <= kCountEnergyConstant * rep.rhs;
    return rep;
}

std::pair<double, double> fit_exponent(ScalingSeries& series) {
    const auto& r = series.rows;
    if (r.size() < 3) throw Error("fit needs at least 3 scales");
    for (std::size_t i = 0; i < r.size(); ++i) {
        log2_exact(1.0 / r[i].first, "1/delta");
        if (i > 0 && !(r[i].first < r[i - 1].first)) throw Error("scales must be strictly decreasing");
        if (!(r[i].second > 0.0)) throw Error("values must be positive for a log fit");
    }
    double n = static_cast<double>(r.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [d, v] : r) {
        double x = std::log2(1.0 / d), y = std::log2(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double icpt = (sy - slope * sx) / n;
    double res = 0.0;
    for (const auto& [d, v] : r) res = std::max(res, std::abs(std::log2(v) - (icpt + slope * std::log2(1.0 / d))));
    series.slope = slope;
    series.residual = res;
    return {slope, res};
}

std::string series_csv(const ScalingSeries& series) {
    std::ostringstream out;
    out.precision(17);
    out << "delta,value,log2_inv_delta,log2_value\n";
    for (const auto& [d, v] : series.rows) out << d << ',' << v << ',' << std::log2(1.0 / d) << ',' << std::log2(v) << '\n';
    return out.str();
}

}  // namespace paralab
