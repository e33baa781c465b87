#pragma once

// n-fold sums of lattice atoms, built exactly on integer coordinates, and a pair-kernel
// engine over the resulting multiset. Shared by the Vinogradov counter and the exact
// L2 norm of mollified convolution powers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "paralab/common.hpp"

namespace paralab {

// |(dx,dy)| <= r with a relative slack of 1e-12 so that exact ties survive rounding.
inline bool within_radius(double dx, double dy, double r) {
    return dx * dx + dy * dy <= r * r * (1.0 + 1e-12);
}

template <class T>
struct SumMultiset {
    std::vector<std::int64_t> a;
    std::vector<std::int64_t> b;
    std::vector<T> w;

    std::size_t size() const { return a.size(); }
};

template <class T>
struct LatticeAtoms {
    std::vector<std::int64_t> a;
    std::vector<std::int64_t> b;
    std::vector<T> w;
};

namespace detail {

template <class T>
void sort_combine(std::vector<std::pair<std::int64_t, T>>& buf, std::vector<std::int64_t>& bs, std::vector<T>& ws) {
    std::sort(buf.begin(), buf.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    bs.clear();
    ws.clear();
    for (const auto& [b, w] : buf) {
        if (!bs.empty() && bs.back() == b)
            ws.back() += w;
        else {
            bs.push_back(b);
            ws.push_back(w);
        }
    }
}

// Column index: [start[i], start[i+1]) holds entries with a == keys[i].
struct Columns {
    std::vector<std::int64_t> keys;
    std::vector<std::size_t> start;
};

template <class V>
Columns columns_of(const V& a) {
    Columns c;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (i == 0 || a[i] != a[i - 1]) {
            c.keys.push_back(a[i]);
            c.start.push_back(i);
        }
    c.start.push_back(a.size());
    return c;
}

template <class T>
LatticeAtoms<T> sorted_atoms(const LatticeAtoms<T>& in) {
    std::vector<std::size_t> idx(in.a.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return in.a[i] < in.a[j] || (in.a[i] == in.a[j] && in.b[i] < in.b[j]);
    });
    LatticeAtoms<T> out;
    for (auto i : idx) {
        out.a.push_back(in.a[i]);
        out.b.push_back(in.b[i]);
        out.w.push_back(in.w[i]);
    }
    return out;
}

}  // namespace detail

// Streams the columns (fixed first coordinate) of the n-fold sum multiset in increasing order.
// Only the (n-1)-fold multiset is held in memory.
template <class T>
void for_each_sum_column(const LatticeAtoms<T>& atoms_in, int n,
                         const std::function<void(std::int64_t, std::span<const std::int64_t>, std::span<const T>)>& fn);

template <class T>
SumMultiset<T> nfold_sums(const LatticeAtoms<T>& atoms, int n) {
    SumMultiset<T> out;
    for_each_sum_column<T>(atoms, n, [&](std::int64_t A, std::span<const std::int64_t> bs, std::span<const T> ws) {
        for (std::size_t i = 0; i < bs.size(); ++i) {
            out.a.push_back(A);
            out.b.push_back(bs[i]);
            out.w.push_back(ws[i]);
        }
    });
    return out;
}

template <class T>
void for_each_sum_column(const LatticeAtoms<T>& atoms_in, int n,
                         const std::function<void(std::int64_t, std::span<const std::int64_t>, std::span<const T>)>& fn) {
    if (n < 1) throw Error("n must be at least 1");
    auto atoms = detail::sorted_atoms(atoms_in);
    SumMultiset<T> prev;
    if (n == 1) {
        prev.a = {0};
        prev.b = {0};
        prev.w = {T(1)};
    } else {
        prev = nfold_sums<T>(atoms, n - 1);
    }
    auto pc = detail::columns_of(prev.a);
    auto ac = detail::columns_of(atoms.a);

    std::vector<std::int64_t> targets;
    targets.reserve(pc.keys.size() * ac.keys.size());
    for (auto x : pc.keys)
        for (auto y : ac.keys) targets.push_back(x + y);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    std::vector<std::pair<std::int64_t, T>> buf;
    std::vector<std::int64_t> bs;
    std::vector<T> ws;
    for (auto A : targets) {
        buf.clear();
        for (std::size_t j = 0; j < ac.keys.size(); ++j) {
            auto it = std::lower_bound(pc.keys.begin(), pc.keys.end(), A - ac.keys[j]);
            if (it == pc.keys.end() || *it != A - ac.keys[j]) continue;
            std::size_t c = static_cast<std::size_t>(it - pc.keys.begin());
            for (std::size_t u = ac.start[j]; u < ac.start[j + 1]; ++u)
                for (std::size_t v = pc.start[c]; v < pc.start[c + 1]; ++v)
                    buf.emplace_back(prev.b[v] + atoms.b[u], prev.w[v] * atoms.w[u]);
        }
        detail::sort_combine(buf, bs, ws);
        fn(A, bs, ws);
    }
}

// Sum over ordered pairs (c, c') of the n-fold sum multiset with |c - c'| <= r of
// w(c) w(c') kernel(|c - c'|). Coordinates are (a hx, b hy).
template <class T, class Acc, class Kernel>
Acc pair_kernel_sum(const LatticeAtoms<T>& atoms, int n, double hx, double hy, double r, Kernel kernel) {
    struct Col {
        std::int64_t a;
        std::vector<std::int64_t> b;
        std::vector<T> w;
    };
    std::deque<Col> window;
    Acc total{};
    auto cross = [&](const Col& cur, const Col& other, bool self) {
        double dx = static_cast<double>(cur.a - other.a) * hx;
        if (std::abs(dx) > r * (1.0 + 1e-12)) return Acc{};
        double rem = std::sqrt(std::max(0.0, r * r * (1.0 + 1e-12) - dx * dx));
        auto reach = static_cast<std::int64_t>(std::floor(rem / hy)) + 1;
        Acc acc{};
        std::size_t lo = 0, hi = 0;
        for (std::size_t i = 0; i < cur.b.size(); ++i) {
            std::int64_t b = cur.b[i];
            while (lo < other.b.size() && other.b[lo] < b - reach) ++lo;
            if (hi < lo) hi = lo;
            while (hi < other.b.size() && other.b[hi] <= b + reach) ++hi;
            for (std::size_t j = lo; j < hi; ++j) {
                double dy = static_cast<double>(b - other.b[j]) * hy;
                if (!within_radius(dx, dy, r)) continue;
                acc += kernel(dx, dy, cur.w[i], other.w[j]);
            }
        }
        if (!self) acc += acc;  // the mirrored ordered pairs
        return acc;
    };
    for_each_sum_column<T>(atoms, n, [&](std::int64_t A, std::span<const std::int64_t> bs, std::span<const T> ws) {
        while (!window.empty() && static_cast<double>(A - window.front().a) * hx > r * (1.0 + 1e-12)) window.pop_front();
        Col cur{A, {bs.begin(), bs.end()}, {ws.begin(), ws.end()}};
        for (const auto& other : window) total += cross(cur, other, false);
        total += cross(cur, cur, true);
        window.push_back(std::move(cur));
    });
    return total;
}

}  // namespace paralab
