#pragma once

// Independent reference implementations used only by the tests. None of
// these share code with the library beyond the filter taps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "sramlet/random.hpp"
#include "sramlet/wavelet.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>; // row-major

inline Dense identity(std::size_t n)
{
    Dense m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        m[i][i] = 1.0;
    return m;
}

inline Dense multiply(const Dense& a, const Dense& b)
{
    const std::size_t r = a.size(), k = b.size(), c = b.front().size();
    Dense out(r, std::vector<double>(c, 0.0));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t j = 0; j < c; ++j)
                out[i][j] += a[i][l] * b[l][j];
    return out;
}

inline Dense transpose(const Dense& a)
{
    Dense out(a.front().size(), std::vector<double>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j)
            out[j][i] = a[i][j];
    return out;
}

inline std::vector<double> apply(const Dense& a, std::span<const double> v)
{
    std::vector<double> out(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j)
            out[i] += a[i][j] * v[j];
    return out;
}

/// One analysis stage of length m as an explicit matrix: rows [0, m/2) are
/// periodic lowpass outputs, rows [m/2, m) highpass, with output k reading
/// inputs 2k + i (mod m).
inline Dense stage_matrix(std::span<const double> h, std::span<const double> g, std::size_t m)
{
    Dense s(m, std::vector<double>(m, 0.0));
    for (std::size_t k = 0; k < m / 2; ++k)
        for (std::size_t i = 0; i < h.size(); ++i) {
            s[k][(2 * k + i) % m] += h[i];
            s[m / 2 + k][(2 * k + i) % m] += g[i];
        }
    return s;
}

/// Full analysis operator down to 2^coarsest approximation coefficients.
inline Dense analysis_matrix(const sramlet::FilterPair& filters, std::size_t n, unsigned coarsest)
{
    const std::vector<double> h = filters.lowpass;
    const std::vector<double> g = filters.highpass();
    Dense total = identity(n);
    for (std::size_t m = n; m > (std::size_t{1} << coarsest); m /= 2) {
        Dense stage = identity(n);
        const Dense local = stage_matrix(h, g, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                stage[i][j] = local[i][j];
        total = multiply(stage, total);
    }
    return total;
}

/// Explicit orthonormal Haar matrix from the box-function definition.
inline Dense haar_matrix(std::size_t n)
{
    Dense m;
    m.push_back(std::vector<double>(n, 1.0 / std::sqrt(static_cast<double>(n))));
    for (std::size_t count = 1; count < n; count *= 2) {
        const std::size_t support = n / count;
        const double amp = 1.0 / std::sqrt(static_cast<double>(support));
        for (std::size_t k = 0; k < count; ++k) {
            std::vector<double> row(n, 0.0);
            for (std::size_t i = 0; i < support / 2; ++i) {
                row[k * support + i] = amp;
                row[k * support + support / 2 + i] = -amp;
            }
            m.push_back(row);
        }
    }
    return m;
}

inline double l1(std::span<const double> v)
{
    double acc = 0.0;
    for (double x : v)
        acc += std::abs(x);
    return acc;
}

inline double norm2(std::span<const double> v)
{
    double acc = 0.0;
    for (double x : v)
        acc += x * x;
    return std::sqrt(acc);
}

/// sqrt(rho^2 + ||z - beta||^2) + lambda ||beta||_1
inline double srsw_cost(std::span<const double> z, double rho, double lambda, std::span<const double> beta)
{
    double rss = rho * rho;
    for (std::size_t i = 0; i < z.size(); ++i)
        rss += (z[i] - beta[i]) * (z[i] - beta[i]);
    return std::sqrt(rss) + lambda * l1(beta);
}

struct SrswOracle
{
    std::vector<double> beta;
    double cost = 0.0;
};

/// Enumerates every kept set S. For fixed S the minimizer shrinks S by a
/// common amount t and zeroes the rest; the cost is convex in t, so the
/// stationary point clamped to [0, min_S |z|] is optimal for that S.
inline SrswOracle srsw_enumerate(std::span<const double> z, double rho, double lambda)
{
    const std::size_t m = z.size();
    SrswOracle best;
    best.beta.assign(m, 0.0);
    best.cost = srsw_cost(z, rho, lambda, best.beta);
    std::vector<double> beta(m);
    for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
        double rest = rho * rho, smallest = std::numeric_limits<double>::infinity();
        std::size_t kept = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (mask >> i & 1) {
                ++kept;
                smallest = std::min(smallest, std::abs(z[i]));
            } else {
                rest += z[i] * z[i];
            }
        }
        const double k = static_cast<double>(kept);
        double t = smallest;
        if (lambda * lambda * k < 1.0)
            t = std::min(smallest, lambda * std::sqrt(rest / (1.0 - lambda * lambda * k)));
        for (std::size_t i = 0; i < m; ++i)
            beta[i] = (mask >> i & 1) ? z[i] - std::copysign(t, z[i]) : 0.0;
        const double cost = srsw_cost(z, rho, lambda, beta);
        if (cost < best.cost) {
            best.cost = cost;
            best.beta = beta;
        }
    }
    return best;
}

inline double soft(double v, double t)
{
    return std::copysign(std::max(std::abs(v) - t, 0.0), v);
}

/// Square-root lasso through sqrt(q) = min_s q/(2s) + s/2. For fixed s the
/// inner problem is soft thresholding at lambda*s; the outer optimum solves
/// s = ||(rho, z - soft(z, lambda*s))||, and s - R(s) is non-decreasing, so
/// bisection pins it down to rounding.
inline std::vector<double> srsw_variational(std::span<const double> z, double rho, double lambda)
{
    auto shrunk = [&](double s) {
        std::vector<double> b(z.size());
        for (std::size_t i = 0; i < z.size(); ++i)
            b[i] = soft(z[i], lambda * s);
        return b;
    };
    auto residual = [&](double s) {
        const auto b = shrunk(s);
        double r2 = rho * rho;
        for (std::size_t i = 0; i < z.size(); ++i)
            r2 += (z[i] - b[i]) * (z[i] - b[i]);
        return std::sqrt(r2);
    };
    double lo = 0.0, hi = residual(std::numeric_limits<double>::infinity()) * (1.0 + 1e-12) + 1e-300;
    for (int it = 0; it < 2000 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        (mid - residual(mid) < 0.0 ? lo : hi) = mid;
    }
    return shrunk(hi);
}

/// Explicit additive dictionary in original row order: one list of columns per
/// block, blocks ordered as covariate-major {linear, daub4, haar} in composite
/// mode or a single wavelet block per covariate. Wavelet blocks drop the
/// constant father of a full-depth transform.
struct DenseDesign
{
    std::vector<Dense> blocks; // blocks[k][col] is a length-n column
};

inline std::vector<std::size_t> ranks_of(std::span<const double> x)
{
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<std::size_t> rank(x.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        rank[order[r]] = r;
    return rank;
}

inline DenseDesign dense_design(const std::vector<std::vector<double>>& covariates, bool composite,
                                sramlet::WaveletFamily family = sramlet::WaveletFamily::DaubExPhase4)
{
    using sramlet::WaveletFamily;
    const std::size_t n = covariates.front().size();
    auto wavelet_block = [&](const std::vector<std::size_t>& rank, WaveletFamily f) {
        const Dense rows = analysis_matrix(sramlet::build_filter(f), n, 0);
        Dense cols;
        for (std::size_t m = 1; m < n; ++m) {
            std::vector<double> c(n);
            for (std::size_t i = 0; i < n; ++i)
                c[i] = rows[m][rank[i]];
            cols.push_back(c);
        }
        return cols;
    };
    DenseDesign d;
    for (const auto& x : covariates) {
        const auto rank = ranks_of(x);
        if (!composite) {
            d.blocks.push_back(wavelet_block(rank, family));
            continue;
        }
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
        std::vector<double> lin(n);
        for (std::size_t i = 0; i < n; ++i)
            lin[i] = x[i] - mean;
        const double norm = norm2(lin);
        for (double& v : lin)
            v /= norm;
        d.blocks.push_back(Dense{lin});
        d.blocks.push_back(wavelet_block(rank, WaveletFamily::DaubExPhase4));
        d.blocks.push_back(wavelet_block(rank, WaveletFamily::Haar));
    }
    return d;
}

/// min over (c, beta) of sqrt(||y - c - W beta||^2) + lambda ||beta||_1 (or
/// 0.5 ||.||^2 + lambda ||beta||_1), W the concatenated dense columns. The
/// square root comes from sqrt(q) = min_s q/(2s) + s/2: for fixed s the inner
/// problem is a lasso at penalty lambda*s, solved by cyclic scalar coordinate
/// descent; the outer minimum over s is found by golden-section search on a
/// convex function.
struct DenseFit
{
    double intercept = 0.0;
    std::vector<double> beta; // concatenated over blocks
    double cost = 0.0;
};

inline DenseFit dense_lasso(const Dense& cols, std::span<const double> y, double penalty, std::size_t sweeps,
                            std::vector<double> warm = {})
{
    const std::size_t n = y.size(), q = cols.size();
    DenseFit fit;
    fit.beta = warm.empty() ? std::vector<double>(q, 0.0) : warm;
    std::vector<double> r(y.begin(), y.end());
    for (std::size_t k = 0; k < q; ++k)
        for (std::size_t i = 0; i < n; ++i)
            r[i] -= cols[k][i] * fit.beta[k];
    std::vector<double> sq(q);
    for (std::size_t k = 0; k < q; ++k)
        sq[k] = std::pow(norm2(cols[k]), 2);
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
        const double shift = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
        fit.intercept += shift;
        for (double& v : r)
            v -= shift;
        double moved = 0.0;
        for (std::size_t k = 0; k < q; ++k) {
            double g = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                g += cols[k][i] * r[i];
            const double next = soft(fit.beta[k] + g / sq[k], penalty / sq[k]);
            const double delta = next - fit.beta[k];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i)
                    r[i] -= cols[k][i] * delta;
                fit.beta[k] = next;
                moved = std::max(moved, std::abs(delta));
            }
        }
        if (moved < 1e-15)
            break;
    }
    fit.cost = 0.5 * std::pow(norm2(r), 2) + penalty * l1(fit.beta);
    return fit;
}

inline double dense_residual_norm(const Dense& cols, std::span<const double> y, const DenseFit& fit)
{
    std::vector<double> r(y.begin(), y.end());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] -= fit.intercept;
    for (std::size_t k = 0; k < cols.size(); ++k)
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] -= cols[k][i] * fit.beta[k];
    return norm2(r);
}

inline DenseFit dense_sqrt_lasso(const Dense& cols, std::span<const double> y, double lambda,
                                 std::size_t sweeps = 20000)
{
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double spread = 0.0;
    for (double v : y)
        spread += (v - mean) * (v - mean);
    std::vector<double> warm;
    auto outer = [&](double s, DenseFit* out) {
        DenseFit f = dense_lasso(cols, y, lambda * s, sweeps, warm);
        warm = f.beta;
        const double rn = dense_residual_norm(cols, y, f);
        f.cost = rn * rn / (2.0 * s) + s / 2.0 + lambda * l1(f.beta);
        if (out)
            *out = f;
        return f.cost;
    };
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 1e-9 * std::sqrt(spread), b = std::sqrt(spread);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = outer(c, nullptr), fd = outer(d, nullptr);
    for (int it = 0; it < 120; ++it) {
        if (fc < fd) {
            b = d, d = c, fd = fc;
            c = b - phi * (b - a);
            fc = outer(c, nullptr);
        } else {
            a = c, c = d, fc = fd;
            d = a + phi * (b - a);
            fd = outer(d, nullptr);
        }
    }
    DenseFit best;
    outer(0.5 * (a + b), &best);
    best.cost = dense_residual_norm(cols, y, best) + lambda * l1(best.beta);
    return best;
}

/// Second transcription of the Donoho-Johnstone test signals.
inline double dj_blocks(double x)
{
    static const double pos[] = {.1, .13, .15, .23, .25, .4, .44, .65, .76, .78, .81};
    static const double hgt[] = {4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2};
    double f = 0;
    for (int i = 0; i < 11; ++i)
        f += hgt[i] * (x > pos[i] ? 1.0 : (x == pos[i] ? 0.5 : 0.0));
    return f;
}

inline double dj_bumps(double x)
{
    static const double pos[] = {.1, .13, .15, .23, .25, .4, .44, .65, .76, .78, .81};
    static const double hgt[] = {4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2};
    static const double wth[] = {.005, .005, .006, .01, .01, .03, .01, .01, .005, .008, .005};
    double f = 0;
    for (int i = 0; i < 11; ++i) {
        const double u = 1.0 + std::fabs(x - pos[i]) / wth[i];
        f += hgt[i] / (u * u * u * u);
    }
    return f;
}

inline double dj_heavisine(double x)
{
    auto sgn = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
    return 4 * std::sin(4 * std::numbers::pi * x) - sgn(x - .3) - sgn(.72 - x);
}

inline double dj_doppler(double x)
{
    return std::sqrt(x * (1 - x)) * std::sin(2.1 * std::numbers::pi / (x + .05));
}

inline std::vector<double> normals(sramlet::Rng& rng, std::size_t n, double scale = 1.0)
{
    std::vector<double> v(n);
    for (double& x : v)
        x = scale * rng.normal();
    return v;
}

} // namespace oracle
