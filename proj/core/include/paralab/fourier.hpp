#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "paralab/common.hpp"
#include "paralab/measures.hpp"

namespace paralab {

// Radial trapezoid: 1 on B(inner), linear down to 0 at `outer`, with `outer` chosen so the
// integral is 1.
struct MollifierSpec {
    double inner = 0.5;
    double outer = 0.0;
    double height = 1.0;
    double normalization = 1.0;  // integral of the profile

    double operator()(double r) const;
};

const MollifierSpec& mollifier();
// Solves for the outer radius making the integral equal to 1.
double solve_mollifier_outer(double inner);
// Radial Fourier transform of psi (convention e^{-2 pi i x.xi}), |xi| = k.
double mollifier_hat(double k);
// Autocorrelation Phi(r) = int psi(y) psi(y - r e1) dy; vanishes for r >= 2 * outer.
double mollifier_autocorrelation(double r);
double mollifier_l2_sq();

struct GridSpec {
    Vec2 origin;  // coordinates of node (0,0)
    double h = 0.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
};

// Sampled density at nodes origin + (i h, j h), row-major in j.
struct GridField {
    Vec2 origin;
    double h = 0.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> values;

    double S() const { return 0.5 * h * static_cast<double>(nx); }
    double& at(std::size_t i, std::size_t j) { return values[j * nx + i]; }
    double at(std::size_t i, std::size_t j) const { return values[j * nx + i]; }
    Vec2 node(std::size_t i, std::size_t j) const { return {origin.x + h * i, origin.y + h * j}; }
    double mass() const;
    GridSpec spec() const { return {origin, h, nx, ny}; }
};

void dump_grid(const GridField& f, const std::string& path);
GridField load_grid(const std::string& path);

// Values on the centred grid xi = (k1, k2) * freq_spacing, k in [-K, K].
struct SpectrumField {
    double freq_spacing = 0.0;
    std::int64_t K = 0;
    std::vector<std::complex<double>> values;

    std::size_t side() const { return static_cast<std::size_t>(2 * K + 1); }
    std::complex<double> at(std::int64_t k1, std::int64_t k2) const {
        return values[static_cast<std::size_t>(k2 + K) * side() + static_cast<std::size_t>(k1 + K)];
    }
};

GridField mollify(const AtomicMeasure& m, double delta, double S, double h = 0.0);

struct ConvolveOptions {
    double h = 0.0;                   // grid spacing; defaults to delta / 4
    std::optional<GridSpec> frame;    // explicit output grid
    bool want_spectrum = false;       // keep (sigma^n)^ on the DFT grid
    double spectrum_radius = 0.0;     // restrict the stored spectrum to |xi| <= radius (0: Nyquist box)
};

struct ConvolveResult {
    GridField field;
    SpectrumField spectrum;  // unmollified (sigma^n)^, filled when requested
};

// Square power-of-two frame holding the n-fold support plus a delta-mollifier, with the origin a
// multiple of `align` (0: of h).
GridSpec power_frame(const AtomicMeasure& m, int n, double delta, double h, double align = 0.0);

ConvolveResult convolve_power_full(const AtomicMeasure& m, int n, double delta, const ConvolveOptions& opt = {});
GridField convolve_power(const AtomicMeasure& m, int n, double delta, const ConvolveOptions& opt = {});

double l2_norm_sq(const GridField& f);

// ||(sigma^n) * psi_delta||_2^2 through the exact n-fold sum multiset and the tabulated Phi.
double l2_norm_sq_power_exact(const AtomicMeasure& m, int n, double delta);

// Largest power of two not exceeding 1/(4 diam), capped at 1/4.
double default_freq_spacing(const AtomicMeasure& m);

SpectrumField fourier_transform_atomic(const AtomicMeasure& m, double R, double freq_spacing);

// Integral of |sigma^|^p over the disk B(R) on the grid of the given spacing (0: default).
double fourier_lp_integral(const AtomicMeasure& m, double p, double R, double freq_spacing = 0.0);
double fourier_lp_norm(const AtomicMeasure& m, double p, double R, double freq_spacing = 0.0);
// Same integral computed from a stored spectrum of sigma^n: sum of |.|^2 over B(R).
double spectrum_l2_sq_on_disk(const SpectrumField& s, double R);

struct FourierEnergyOptions {
    int power = 1;              // energy of sigma^power
    double extent = 0.0;        // frequency radius; default 8 / delta
    double freq_spacing = 0.0;  // default as fourier_lp_norm
};

struct FourierEnergy {
    double value = 0.0;
    double outer_shell_share = 0.0;  // fraction contributed by extent/2 <= |xi| <= extent
    bool divergent = false;          // outer share above 10%
};

FourierEnergy riesz_energy_fourier(const AtomicMeasure& m, double u, double delta, const FourierEnergyOptions& opt = {});

// c(u) = int_{[0,1]^2} int_{[0,1]^2} |x - y|^{-u} dx dy
double unit_cell_self_energy(double u);

inline constexpr std::size_t kDirectEnergyMaxSide = 256;
double spatial_energy_grid(const GridField& f, double u, bool allow_fft = true);

// Dyadic level-set decomposition of a field rasterized at cell size r (cells of
// `cell` nodes per side): value 2^j on cells whose sup lies in (2^{j-1}, 2^j], 1 for 0 < sup <= 1.
struct LevelSetDecomposition {
    std::vector<double> upper;  // per node
    std::size_t cell = 0;
};
LevelSetDecomposition dyadic_level_sets(const GridField& f, double r);

}  // namespace paralab
