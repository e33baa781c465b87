#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <numbers>

#include <fftw3.h>

#include "paralab/fourier.hpp"
#include "paralab/sums.hpp"
#include "quadrature.hpp"

static_assert(std::endian::native == std::endian::little, "grid dumps assume a little-endian host");

namespace paralab {

namespace {

constexpr double kPi = std::numbers::pi;
using cplx = std::complex<double>;

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuf = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuf<T> fftw_buffer(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p) throw Error("fftw allocation failed");
    return FftwBuf<T>(p);
}

struct Plan {
    fftw_plan p = nullptr;
    explicit Plan(fftw_plan q) : p(q) {}
    ~Plan() {
        if (p) fftw_destroy_plan(p);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void run() const { fftw_execute(p); }
};

std::size_t next_pow2(double v) {
    std::size_t n = 1;
    while (static_cast<double>(n) < v) n <<= 1;
    return n;
}

double psi_delta(double r, double delta) { return mollifier()(r / delta) / (delta * delta); }

// e^{-2 pi i k q} for integer k and q = 1/M (M a power of two) or a generic real.
struct PhaseStep {
    bool dyadic = false;
    std::int64_t M = 0;
    long double q = 0.0L;

    explicit PhaseStep(double qv) : q(qv) {
        if (qv > 0.0) {
            double inv = 1.0 / qv;
            double r = std::nearbyint(inv);
            if (std::abs(inv - r) <= 1e-9 * inv && r >= 1.0 && r <= 0x1p62) {
                auto m = static_cast<std::uint64_t>(r);
                if (std::has_single_bit(m)) {
                    dyadic = true;
                    M = static_cast<std::int64_t>(m);
                }
            }
        }
    }
    // fractional part of k * q in [0,1)
    double frac(std::int64_t k) const {
        if (dyadic) {
            auto r = static_cast<std::uint64_t>(k) & static_cast<std::uint64_t>(M - 1);
            return static_cast<double>(r) / static_cast<double>(M);
        }
        long double v = static_cast<long double>(k) * q;
        v -= std::floor(v);
        return static_cast<double>(v);
    }
    cplx phase(std::int64_t k) const {
        double f = frac(k);
        return {std::cos(2.0 * kPi * f), -std::sin(2.0 * kPi * f)};
    }
};

bool in_disk(std::int64_t k1, std::int64_t k2, double radius_in_steps) {
    double r2 = radius_in_steps * radius_in_steps * (1.0 + 1e-12);
    return static_cast<double>(k1 * k1 + k2 * k2) <= r2;
}

// Evaluates sigma^ on rows xi2 = k2 * step, xi1 = k1 * step, k1 in [-K, K].
class RowEvaluator {
public:
    RowEvaluator(const AtomicMeasure& m, std::int64_t K, double step)
        : m_(m), K_(K), xs_(m.hx * step), ys_(m.hy * step) {
        if (m.atoms.empty()) throw Error("empty measure");
        if (xs_.dyadic && xs_.M <= (std::int64_t{1} << 22)) {
            M_ = static_cast<std::size_t>(xs_.M);
            buf_ = fftw_buffer<fftw_complex>(M_);
            plan_ = std::make_unique<Plan>(fftw_plan_dft_1d(static_cast<int>(M_), buf_.get(), buf_.get(), FFTW_FORWARD,
                                                            FFTW_ESTIMATE));
        } else {
            // tabulate the x-phases when affordable
            std::size_t n = m.atoms.size() * static_cast<std::size_t>(2 * K + 1);
            if (n <= 8'000'000) {
                table_.resize(n);
                for (std::size_t a = 0; a < m.atoms.size(); ++a)
                    for (std::int64_t k1 = -K; k1 <= K; ++k1)
                        table_[a * (2 * K + 1) + static_cast<std::size_t>(k1 + K)] = xs_.phase(m.ia[a] * k1);
            }
        }
        coef_.resize(m.atoms.size());
    }

    void row(std::int64_t k2, cplx* out) {
        const std::size_t W = static_cast<std::size_t>(2 * K_ + 1);
        for (std::size_t a = 0; a < m_.atoms.size(); ++a) coef_[a] = m_.atoms[a].mass * ys_.phase(m_.ib[a] * k2);
        if (plan_) {
            std::memset(buf_.get(), 0, sizeof(fftw_complex) * M_);
            for (std::size_t a = 0; a < m_.atoms.size(); ++a) {
                auto idx = static_cast<std::size_t>(static_cast<std::uint64_t>(m_.ia[a]) & (M_ - 1));
                buf_[idx][0] += coef_[a].real();
                buf_[idx][1] += coef_[a].imag();
            }
            plan_->run();
            for (std::int64_t k1 = -K_; k1 <= K_; ++k1) {
                auto idx = static_cast<std::size_t>(static_cast<std::uint64_t>(k1) & (M_ - 1));
                out[k1 + K_] = {buf_[idx][0], buf_[idx][1]};
            }
            return;
        }
        std::fill(out, out + W, cplx{});
        if (!table_.empty()) {
            for (std::size_t a = 0; a < m_.atoms.size(); ++a) {
                const cplx* t = &table_[a * W];
                cplx c = coef_[a];
                for (std::size_t j = 0; j < W; ++j) out[j] += c * t[j];
            }
            return;
        }
        for (std::size_t a = 0; a < m_.atoms.size(); ++a) {
            cplx step = xs_.phase(m_.ia[a]);
            cplx z;
            for (std::int64_t k1 = -K_; k1 <= K_; ++k1) {
                if ((k1 + K_) % 64 == 0) z = coef_[a] * xs_.phase(m_.ia[a] * k1);
                out[k1 + K_] += z;
                z *= step;
            }
        }
    }

private:
    const AtomicMeasure& m_;
    std::int64_t K_;
    PhaseStep xs_, ys_;
    std::size_t M_ = 0;
    FftwBuf<fftw_complex> buf_;
    std::unique_ptr<Plan> plan_;
    std::vector<cplx> table_;
    std::vector<cplx> coef_;
};

double true_diameter(const AtomicMeasure& m) {
    if (m.atoms.size() > 6000) {
        auto b = m.bbox();
        return std::hypot(b[2] - b[0], b[3] - b[1]);
    }
    return m.diameter();
}

}  // namespace

double GridField::mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * h * h;
}

namespace {
constexpr char kGridMagic[8] = {'P', 'L', 'G', 'R', 'I', 'D', '1', '\0'};
}

void dump_grid(const GridField& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    double hdr[4] = {f.origin.x, f.origin.y, f.h, f.S()};
    std::uint64_t dims[2] = {f.nx, f.ny};
    out.write(kGridMagic, 8);
    out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    out.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!out) throw Error("short write to " + path);
}

GridField load_grid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    char magic[8];
    double hdr[4];
    std::uint64_t dims[2];
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    if (!in || std::memcmp(magic, kGridMagic, 8) != 0) throw Error("not a grid dump: " + path);
    GridField f;
    f.origin = {hdr[0], hdr[1]};
    f.h = hdr[2];
    f.nx = dims[0];
    f.ny = dims[1];
    f.values.resize(f.nx * f.ny);
    in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!in) throw Error("truncated grid dump: " + path);
    return f;
}

GridField mollify(const AtomicMeasure& m, double delta, double S, double h) {
    if (h <= 0.0) h = delta / 4.0;
    if (h > delta / 4.0 * (1.0 + 1e-12)) throw Error("grid spacing must be at most delta/4");
    for (const auto& a : m.atoms)
        if (std::abs(a.p.x) > S - delta || std::abs(a.p.y) > S - delta) throw Error("support escapes domain");
    GridField f;
    f.origin = {-S, -S};
    f.h = h;
    f.nx = f.ny = static_cast<std::size_t>(std::ceil(2.0 * S / h - 1e-9));
    f.values.assign(f.nx * f.ny, 0.0);
    const double R = mollifier().outer * delta;
    std::vector<double> stamp;
    for (const auto& a : m.atoms) {
        if (a.mass == 0.0) continue;
        auto i0 = static_cast<std::int64_t>(std::ceil((a.p.x - R - f.origin.x) / h));
        auto i1 = static_cast<std::int64_t>(std::floor((a.p.x + R - f.origin.x) / h));
        auto j0 = static_cast<std::int64_t>(std::ceil((a.p.y - R - f.origin.y) / h));
        auto j1 = static_cast<std::int64_t>(std::floor((a.p.y + R - f.origin.y) / h));
        double z = 0.0;
        stamp.clear();
        for (auto j = j0; j <= j1; ++j)
            for (auto i = i0; i <= i1; ++i) {
                double v = psi_delta(std::hypot(f.origin.x + i * h - a.p.x, f.origin.y + j * h - a.p.y), delta);
                stamp.push_back(v);
                z += v;
            }
        z *= h * h;
        if (z <= 0.0) {
            // psi_delta falls between nodes: deposit on the nearest node
            auto i = static_cast<std::size_t>(std::lround((a.p.x - f.origin.x) / h));
            auto j = static_cast<std::size_t>(std::lround((a.p.y - f.origin.y) / h));
            f.at(i, j) += a.mass / (h * h);
            continue;
        }
        std::size_t k = 0;
        for (auto j = j0; j <= j1; ++j)
            for (auto i = i0; i <= i1; ++i, ++k)
                f.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) += a.mass * stamp[k] / z;
    }
    return f;
}

GridSpec power_frame(const AtomicMeasure& m, int n, double delta, double h, double align) {
    if (n < 1) throw Error("n must be at least 1");
    if (m.atoms.empty()) throw Error("empty measure");
    if (align <= 0.0) align = h;
    const double margin = (std::ceil(mollifier().outer * delta / h) + 3.0) * h;
    auto bb = m.bbox();
    GridSpec g;
    g.h = h;
    g.origin = {std::floor((n * bb[0] - margin) / align) * align, std::floor((n * bb[1] - margin) / align) * align};
    double w = std::max(n * bb[2] + margin - g.origin.x, n * bb[3] + margin - g.origin.y) / h + n + 2.0;
    g.nx = g.ny = next_pow2(w);
    return g;
}

ConvolveResult convolve_power_full(const AtomicMeasure& m, int n, double delta, const ConvolveOptions& opt) {
    if (n < 1) throw Error("n must be at least 1");
    if (m.atoms.empty()) throw Error("empty measure");
    const double h = opt.h > 0.0 ? opt.h : delta / 4.0;
    const double Rs = mollifier().outer * delta;
    const double pad = Rs + 2.0 * h;
    auto bb = m.bbox();

    Vec2 o1;  // origin of the raster of sigma; sigma^n lives on origin n * o1
    std::size_t Mx = 0, My = 0;
    if (opt.frame) {
        o1 = (1.0 / n) * opt.frame->origin;
        Mx = opt.frame->nx;
        My = opt.frame->ny;
        if (std::abs(opt.frame->h - h) > 1e-15 * h) throw Error("frame spacing differs from requested spacing");
    } else {
        double c = std::ceil(pad / (n * h)) + 1.0;
        o1 = {(std::floor(bb[0] / h) - c) * h, (std::floor(bb[1] / h) - c) * h};
        double wx = (n * bb[2] + pad - n * o1.x) / h + 2.0;
        double wy = (n * bb[3] + pad - n * o1.y) / h + 2.0;
        Mx = My = next_pow2(std::max(wx, wy));
    }

    // wraparound audit: sigma^n plus the stamp must fit inside the periodic box
    const double stamp_cells = std::ceil(Rs / h) + 1.0;
    double lo_x = n * (bb[0] - o1.x) / h - stamp_cells, hi_x = n * (bb[2] - o1.x) / h + stamp_cells + n;
    double lo_y = n * (bb[1] - o1.y) / h - stamp_cells, hi_y = n * (bb[3] - o1.y) / h + stamp_cells + n;
    if (lo_x < 0 || lo_y < 0 || hi_x >= static_cast<double>(Mx) || hi_y >= static_cast<double>(My) ||
        (bb[0] - o1.x) < 0 || (bb[1] - o1.y) < 0)
        throw Error("wraparound risk: grid too small for the n-fold support");

    const std::size_t N = Mx * My, Nc = My * (Mx / 2 + 1);
    auto real = fftw_buffer<double>(N);
    auto A = fftw_buffer<fftw_complex>(Nc);
    std::fill(real.get(), real.get() + N, 0.0);

    // cloud-in-cell deposit of atom masses
    for (const auto& a : m.atoms) {
        double fx = (a.p.x - o1.x) / h, fy = (a.p.y - o1.y) / h;
        double ix = std::floor(fx), iy = std::floor(fy);
        double tx = fx - ix, ty = fy - iy;
        if (tx < 1e-9) tx = 0.0;
        if (tx > 1.0 - 1e-9) { ix += 1.0; tx = 0.0; }
        if (ty < 1e-9) ty = 0.0;
        if (ty > 1.0 - 1e-9) { iy += 1.0; ty = 0.0; }
        auto i = static_cast<std::size_t>(ix), j = static_cast<std::size_t>(iy);
        real[j * Mx + i] += a.mass * (1 - tx) * (1 - ty);
        if (tx > 0) real[j * Mx + i + 1] += a.mass * tx * (1 - ty);
        if (ty > 0) real[(j + 1) * Mx + i] += a.mass * (1 - tx) * ty;
        if (tx > 0 && ty > 0) real[(j + 1) * Mx + i + 1] += a.mass * tx * ty;
    }
    {
        Plan p(fftw_plan_dft_r2c_2d(static_cast<int>(My), static_cast<int>(Mx), real.get(), A.get(), FFTW_ESTIMATE));
        p.run();
    }

    ConvolveResult res;
    if (opt.want_spectrum) {
        if (Mx != My) throw Error("spectrum requires a square grid");
        const std::size_t M = Mx;
        const double step = 1.0 / (static_cast<double>(M) * h);
        std::int64_t K = static_cast<std::int64_t>(M / 2) - 1;
        if (opt.spectrum_radius > 0.0)
            K = std::min<std::int64_t>(K, static_cast<std::int64_t>(std::floor(opt.spectrum_radius / step + 1e-9)));
        res.spectrum.freq_spacing = step;
        res.spectrum.K = K;
        res.spectrum.values.resize(res.spectrum.side() * res.spectrum.side());
        // phase of the raster origin: x = o1 + j h
        const auto half = static_cast<std::int64_t>(M / 2 + 1);
        for (std::int64_t k2 = -K; k2 <= K; ++k2)
            for (std::int64_t k1 = -K; k1 <= K; ++k1) {
                std::int64_t r1 = k1, r2 = k2;
                bool conj = false;
                if (r1 < 0) {
                    r1 = -r1;
                    r2 = -r2;
                    conj = true;
                }
                auto row = static_cast<std::size_t>((r2 % static_cast<std::int64_t>(M) + static_cast<std::int64_t>(M)) %
                                                    static_cast<std::int64_t>(M));
                const auto& c = A[row * static_cast<std::size_t>(half) + static_cast<std::size_t>(r1)];
                cplx v{c[0], conj ? -c[1] : c[1]};
                cplx vn = 1.0;
                for (int t = 0; t < n; ++t) vn *= v;
                double f = std::fmod(o1.x * n * step * k1 + o1.y * n * step * k2, 1.0);
                res.spectrum.values[static_cast<std::size_t>(k2 + K) * res.spectrum.side() + static_cast<std::size_t>(k1 + K)] =
                    vn * cplx{std::cos(2 * kPi * f), -std::sin(2 * kPi * f)};
            }
    }

    // stamp of psi_delta, wrapped around the origin, normalized to unit discrete mass
    std::fill(real.get(), real.get() + N, 0.0);
    {
        auto reach = static_cast<std::int64_t>(std::floor(Rs / h));
        double z = 0.0;
        for (std::int64_t dj = -reach; dj <= reach; ++dj)
            for (std::int64_t di = -reach; di <= reach; ++di) {
                double v = psi_delta(std::hypot(di * h, dj * h), delta);
                if (v == 0.0) continue;
                auto i = static_cast<std::size_t>((di + static_cast<std::int64_t>(Mx)) % static_cast<std::int64_t>(Mx));
                auto j = static_cast<std::size_t>((dj + static_cast<std::int64_t>(My)) % static_cast<std::int64_t>(My));
                real[j * Mx + i] = v;
                z += v;
            }
        if (z == 0.0) {
            real[0] = 1.0 / (h * h);
        } else {
            z *= h * h;
            for (std::size_t k = 0; k < N; ++k) real[k] /= z;
        }
    }
    {
        auto G = fftw_buffer<fftw_complex>(Nc);
        {
            Plan p(fftw_plan_dft_r2c_2d(static_cast<int>(My), static_cast<int>(Mx), real.get(), G.get(), FFTW_ESTIMATE));
            p.run();
        }
        const double scale = 1.0 / static_cast<double>(N);
        for (std::size_t k = 0; k < Nc; ++k) {
            cplx v{A[k][0], A[k][1]};
            cplx vn = 1.0;
            for (int t = 0; t < n; ++t) vn *= v;
            vn *= cplx{G[k][0], G[k][1]} * scale;
            A[k][0] = vn.real();
            A[k][1] = vn.imag();
        }
    }
    {
        Plan p(fftw_plan_dft_c2r_2d(static_cast<int>(My), static_cast<int>(Mx), A.get(), real.get(), FFTW_ESTIMATE));
        p.run();
    }
    A.reset();

    GridField& f = res.field;
    f.origin = static_cast<double>(n) * o1;
    f.h = h;
    f.nx = Mx;
    f.ny = My;
    f.values.assign(real.get(), real.get() + N);
    // transform round-off shows up as tiny values of either sign away from the support
    double vmax = *std::max_element(f.values.begin(), f.values.end());
    for (auto& v : f.values)
        if (v < 1e-11 * vmax) v = 0.0;
    return res;
}

GridField convolve_power(const AtomicMeasure& m, int n, double delta, const ConvolveOptions& opt) {
    return convolve_power_full(m, n, delta, opt).field;
}

double l2_norm_sq(const GridField& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return s * f.h * f.h;
}

double l2_norm_sq_power_exact(const AtomicMeasure& m, int n, double delta) {
    LatticeAtoms<double> at{m.ia, m.ib, {}};
    for (const auto& a : m.atoms) at.w.push_back(a.mass);
    const double r = 2.0 * mollifier().outer * delta;
    double s = pair_kernel_sum<double, double>(at, n, m.hx, m.hy, r, [&](double dx, double dy, double wi, double wj) {
        return wi * wj * mollifier_autocorrelation(std::hypot(dx, dy) / delta);
    });
    return s / (delta * delta);
}

double default_freq_spacing(const AtomicMeasure& m) {
    double d = true_diameter(m);
    if (d <= 0.0) return 0.25;
    double step = std::ldexp(1.0, -static_cast<int>(std::ceil(std::log2(4.0 * d) - 1e-12)));
    return std::min(step, 0.25);
}

SpectrumField fourier_transform_atomic(const AtomicMeasure& m, double R, double freq_spacing) {
    if (!(freq_spacing > 0.0)) throw Error("frequency spacing must be positive");
    SpectrumField s;
    s.freq_spacing = freq_spacing;
    s.K = static_cast<std::int64_t>(std::floor(R / freq_spacing + 1e-9));
    s.values.resize(s.side() * s.side());
    RowEvaluator ev(m, s.K, freq_spacing);
    for (std::int64_t k2 = -s.K; k2 <= s.K; ++k2) ev.row(k2, &s.values[static_cast<std::size_t>(k2 + s.K) * s.side()]);
    return s;
}

double fourier_lp_integral(const AtomicMeasure& m, double p, double R, double freq_spacing) {
    if (!(p >= 1.0)) throw Error("p must be at least 1");
    if (!(R >= 1.0)) throw Error("R must be at least 1");
    const double step = freq_spacing > 0.0 ? freq_spacing : default_freq_spacing(m);
    const auto K = static_cast<std::int64_t>(std::floor(R / step + 1e-9));
    const double rs = R / step;
    const bool even = std::abs(p / 2.0 - std::nearbyint(p / 2.0)) < 1e-12;
    const int half_p = static_cast<int>(std::nearbyint(p / 2.0));
    RowEvaluator ev(m, K, step);
    std::vector<cplx> row(static_cast<std::size_t>(2 * K + 1));
    double total = 0.0;
    // |sigma^(-xi)| = |sigma^(xi)|: rows k2 and -k2 contribute equally
    for (std::int64_t k2 = 0; k2 <= K; ++k2) {
        ev.row(k2, row.data());
        double rowsum = 0.0;
        for (std::int64_t k1 = -K; k1 <= K; ++k1) {
            if (!in_disk(k1, k2, rs)) continue;
            double a2 = std::norm(row[static_cast<std::size_t>(k1 + K)]);
            if (even) {
                double v = 1.0;
                for (int t = 0; t < half_p; ++t) v *= a2;
                rowsum += v;
            } else {
                rowsum += std::pow(a2, p / 2.0);
            }
        }
        total += (k2 == 0 ? 1.0 : 2.0) * rowsum;
    }
    return total * step * step;
}

double fourier_lp_norm(const AtomicMeasure& m, double p, double R, double freq_spacing) {
    return std::pow(fourier_lp_integral(m, p, R, freq_spacing), 1.0 / p);
}

double spectrum_l2_sq_on_disk(const SpectrumField& s, double R) {
    const double rs = R / s.freq_spacing;
    double total = 0.0;
    for (std::int64_t k2 = -s.K; k2 <= s.K; ++k2)
        for (std::int64_t k1 = -s.K; k1 <= s.K; ++k1)
            if (in_disk(k1, k2, rs)) total += std::norm(s.at(k1, k2));
    if (static_cast<double>(s.K) < std::floor(rs + 1e-9)) throw Error("stored spectrum does not cover the disk");
    return total * s.freq_spacing * s.freq_spacing;
}

FourierEnergy riesz_energy_fourier(const AtomicMeasure& m, double u, double delta, const FourierEnergyOptions& opt) {
    if (!(u > 0.0 && u < 2.0)) throw Error("u must lie in (0,2)");
    if (opt.power < 1) throw Error("power must be at least 1");
    const double extent = opt.extent > 0.0 ? opt.extent : 8.0 / delta;
    const double step = opt.freq_spacing > 0.0 ? opt.freq_spacing : default_freq_spacing(m);
    const auto K = static_cast<std::int64_t>(std::floor(extent / step + 1e-9));
    const double rs = extent / step;
    RowEvaluator ev(m, K, step);
    std::vector<cplx> row(static_cast<std::size_t>(2 * K + 1));

    // cell at the origin: int over [-step/2, step/2]^2 of |xi|^{u-2}
    static const auto g = detail::gauss_legendre(64);
    const double c0 = 8.0 * detail::integrate(g, 0.0, kPi / 4.0, [&](double th) {
                          return std::pow(0.5 / std::cos(th), u) / u;
                      });

    double total = 0.0, shell = 0.0;
    for (std::int64_t k2 = 0; k2 <= K; ++k2) {
        ev.row(k2, row.data());
        double rowsum = 0.0, rowshell = 0.0;
        for (std::int64_t k1 = -K; k1 <= K; ++k1) {
            if (!in_disk(k1, k2, rs)) continue;
            double a2 = std::norm(row[static_cast<std::size_t>(k1 + K)]);
            double v = 1.0;
            for (int t = 0; t < opt.power; ++t) v *= a2;
            double r = step * std::sqrt(static_cast<double>(k1 * k1 + k2 * k2));
            double hat = mollifier_hat(delta * r);
            double cell;
            if (k1 == 0 && k2 == 0)
                cell = v * hat * hat * std::pow(step, u) * c0;
            else
                cell = v * hat * hat * std::pow(r, u - 2.0) * step * step;
            rowsum += cell;
            if (r >= 0.5 * extent) rowshell += cell;
        }
        double wgt = k2 == 0 ? 1.0 : 2.0;
        total += wgt * rowsum;
        shell += wgt * rowshell;
    }
    FourierEnergy e;
    e.value = total;
    e.outer_shell_share = total > 0.0 ? shell / total : 0.0;
    e.divergent = e.outer_shell_share > 0.1;
    return e;
}

double unit_cell_self_energy(double u) {
    if (!(u >= 0.0 && u < 2.0)) throw Error("u must lie in [0,2)");
    static const auto g = detail::gauss_legendre(64);
    return 8.0 * detail::integrate(g, 0.0, kPi / 4.0, [&](double th) {
               double c = std::cos(th), s = std::sin(th), L = 1.0 / c;
               return std::pow(L, 2.0 - u) / (2.0 - u) - (c + s) * std::pow(L, 3.0 - u) / (3.0 - u) +
                      c * s * std::pow(L, 4.0 - u) / (4.0 - u);
           });
}

double spatial_energy_grid(const GridField& f, double u, bool allow_fft) {
    if (!(u > 0.0 && u < 2.0)) throw Error("u must lie in (0,2)");
    const double h = f.h;
    const double diag = unit_cell_self_energy(u) * std::pow(h, -u);
    if (f.nx <= kDirectEnergyMaxSide && f.ny <= kDirectEnergyMaxSide) {
        std::vector<std::pair<Vec2, double>> pts;
        for (std::size_t j = 0; j < f.ny; ++j)
            for (std::size_t i = 0; i < f.nx; ++i)
                if (f.at(i, j) != 0.0) pts.push_back({{i * h, j * h}, f.at(i, j)});
        double s = 0.0;
        for (std::size_t a = 0; a < pts.size(); ++a) {
            s += pts[a].second * pts[a].second * diag;
            double row = 0.0;
            for (std::size_t b = a + 1; b < pts.size(); ++b)
                row += pts[b].second * std::pow(dist(pts[a].first, pts[b].first), -u);
            s += 2.0 * pts[a].second * row;
        }
        return s * h * h * h * h;
    }
    if (!allow_fft) throw Error("grid too large for the direct energy route");
    const std::size_t Px = 2 * f.nx, Py = 2 * f.ny, N = Px * Py, Nc = Py * (Px / 2 + 1);
    auto buf = fftw_buffer<double>(N);
    auto F = fftw_buffer<fftw_complex>(Nc);
    auto Kh = fftw_buffer<fftw_complex>(Nc);
    std::fill(buf.get(), buf.get() + N, 0.0);
    for (std::size_t j = 0; j < Py; ++j) {
        auto dj = static_cast<double>(static_cast<std::int64_t>(j) - (j < f.ny ? 0 : static_cast<std::int64_t>(Py)));
        for (std::size_t i = 0; i < Px; ++i) {
            auto di = static_cast<double>(static_cast<std::int64_t>(i) - (i < f.nx ? 0 : static_cast<std::int64_t>(Px)));
            if (j == f.ny || i == f.nx) continue;
            buf[j * Px + i] = (i == 0 && j == 0) ? diag : std::pow(h * std::hypot(di, dj), -u);
        }
    }
    {
        Plan p(fftw_plan_dft_r2c_2d(static_cast<int>(Py), static_cast<int>(Px), buf.get(), Kh.get(), FFTW_ESTIMATE));
        p.run();
    }
    std::fill(buf.get(), buf.get() + N, 0.0);
    for (std::size_t j = 0; j < f.ny; ++j)
        for (std::size_t i = 0; i < f.nx; ++i) buf[j * Px + i] = f.at(i, j);
    {
        Plan p(fftw_plan_dft_r2c_2d(static_cast<int>(Py), static_cast<int>(Px), buf.get(), F.get(), FFTW_ESTIMATE));
        p.run();
    }
    for (std::size_t k = 0; k < Nc; ++k) {
        cplx v = cplx{F[k][0], F[k][1]} * cplx{Kh[k][0], Kh[k][1]};
        F[k][0] = v.real();
        F[k][1] = v.imag();
    }
    auto conv = fftw_buffer<double>(N);
    {
        Plan p(fftw_plan_dft_c2r_2d(static_cast<int>(Py), static_cast<int>(Px), F.get(), conv.get(), FFTW_ESTIMATE));
        p.run();
    }
    double s = 0.0;
    for (std::size_t j = 0; j < f.ny; ++j)
        for (std::size_t i = 0; i < f.nx; ++i) s += f.at(i, j) * conv[j * Px + i];
    return s / static_cast<double>(N) * h * h * h * h;
}

LevelSetDecomposition dyadic_level_sets(const GridField& f, double r) {
    double c = r / f.h;
    if (std::abs(c - std::nearbyint(c)) > 1e-9 || c < 1.0) throw Error("cell size must be a multiple of the grid spacing");
    auto cell = static_cast<std::size_t>(std::nearbyint(c));
    double ox = f.origin.x / r, oy = f.origin.y / r;
    if (std::abs(ox - std::nearbyint(ox)) > 1e-9 || std::abs(oy - std::nearbyint(oy)) > 1e-9)
        throw Error("grid origin is not aligned with the dyadic r-grid");
    if (f.nx % cell || f.ny % cell) throw Error("grid extent is not a whole number of cells");
    LevelSetDecomposition d;
    d.cell = cell;
    d.upper.assign(f.values.size(), 0.0);
    for (std::size_t cj = 0; cj < f.ny / cell; ++cj)
        for (std::size_t ci = 0; ci < f.nx / cell; ++ci) {
            double sup = 0.0;
            for (std::size_t j = cj * cell; j < (cj + 1) * cell; ++j)
                for (std::size_t i = ci * cell; i < (ci + 1) * cell; ++i) sup = std::max(sup, f.at(i, j));
            double level = 0.0;
            if (sup > 0.0) {
                level = 1.0;
                while (level < sup) level *= 2.0;
            }
            for (std::size_t j = cj * cell; j < (cj + 1) * cell; ++j)
                for (std::size_t i = ci * cell; i < (ci + 1) * cell; ++i) d.upper[j * f.nx + i] = level;
        }
    return d;
}

}  // namespace paralab
