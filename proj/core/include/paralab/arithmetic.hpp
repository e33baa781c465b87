#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "paralab/dyadic.hpp"
#include "paralab/measures.hpp"

namespace paralab {

struct CoveringSet {
    double delta = 0.0;
    int level = 0;
    std::vector<DyadicSquare> squares;  // sorted, unique
    bool exact = true;                  // false for the doubling route
    int slack_squares = 0;              // accumulated one-square dilations of the doubling route
};

inline constexpr double kDefaultSumBudget = 1e8;

struct SumsetOptions {
    double budget = kDefaultSumBudget;
    bool allow_doubling = true;
    bool force_doubling = false;
};

// delta-squares meeting n P = {p_1 + ... + p_n}; P given with lattice coordinates.
CoveringSet sumset_cover(const AtomicMeasure& P, int n, double delta, const SumsetOptions& opt = {});
std::int64_t box_count(const CoveringSet& C, double Delta);

// Ordered 2n-tuples with |sum p - sum q| <= delta.
std::int64_t vinogradov_count(const AtomicMeasure& P, int n, double delta, double budget = kDefaultSumBudget);
// Plain enumeration of all |P|^{2n} tuples on floating-point coordinates.
std::int64_t vinogradov_bruteforce(const std::vector<Vec2>& P, int n, double delta);

bool is_separated(const std::vector<Vec2>& P, double delta);

struct CountEnergyReport {
    std::int64_t count = 0;
    double lhs = 0.0;    // count / |P|^{2n}
    double rhs = 0.0;    // delta^2 ||sigma^n_{4 delta}||_2^2
    double ratio = 0.0;  // lhs / rhs
    bool pass = false;   // lhs <= K rhs
};

inline constexpr double kCountEnergyConstant = 1e3;
CountEnergyReport count_energy_check(const AtomicMeasure& P, int n, double delta);

struct ScalingSeries {
    std::vector<std::pair<double, double>> rows;  // (delta, value)
    double slope = 0.0;
    double residual = 0.0;
};

// Least-squares slope of log2(value) against log2(1/delta); fills series.slope and residual.
std::pair<double, double> fit_exponent(ScalingSeries& series);
std::string series_csv(const ScalingSeries& series);

}  // namespace paralab
