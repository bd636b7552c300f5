#include "sramlet/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sramlet/error.hpp"

namespace sramlet {

namespace {

// Daubechies extremal phase, N = 4 vanishing moments (same taps as
// WaveThresh's DaubExPhase filter.number = 4).
constexpr double kDaub4[8] = {
    0.2303778133088965,   0.7148465705529157,  0.6308807679298589, -0.027983769416859854,
    -0.18703481171909309, 0.030841381835560764, 0.0328830116668852, -0.010597401785069032,
};

// One analysis step on the first m entries: approx -> out[0, m/2),
// detail -> out[m/2, m).
void forward_step(const double* in, double* out, std::size_t m, std::span<const double> h,
                  std::span<const double> g)
{
    const std::size_t half = m / 2;
    const std::size_t taps = h.size();
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t base = 2 * i;
        double a = 0.0;
        double d = 0.0;
        if (base + taps <= m) {
            const double* x = in + base;
            for (std::size_t k = 0; k < taps; ++k) {
                a += h[k] * x[k];
                d += g[k] * x[k];
            }
        } else {
            for (std::size_t k = 0; k < taps; ++k) {
                const double v = in[(base + k) % m];
                a += h[k] * v;
                d += g[k] * v;
            }
        }
        out[i] = a;
        out[half + i] = d;
    }
}

// Adjoint of forward_step.
void inverse_step(const double* in, double* out, std::size_t m, std::span<const double> h,
                  std::span<const double> g)
{
    const std::size_t half = m / 2;
    const std::size_t taps = h.size();
    std::fill(out, out + m, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        const double a = in[i];
        const double d = in[half + i];
        const std::size_t base = 2 * i;
        if (base + taps <= m) {
            double* x = out + base;
            for (std::size_t k = 0; k < taps; ++k)
                x[k] += h[k] * a + g[k] * d;
        } else {
            for (std::size_t k = 0; k < taps; ++k)
                out[(base + k) % m] += h[k] * a + g[k] * d;
        }
    }
}

} // namespace

std::string_view to_string(WaveletFamily family)
{
    switch (family) {
    case WaveletFamily::Haar: return "haar";
    case WaveletFamily::DaubExPhase4: return "daub4";
    }
    return "unknown";
}

WaveletFamily parse_family(std::string_view name)
{
    if (name == "haar")
        return WaveletFamily::Haar;
    if (name == "daub4")
        return WaveletFamily::DaubExPhase4;
    throw Error("unknown wavelet family '" + std::string(name) + "' (expected haar or daub4)");
}

std::vector<double> FilterPair::highpass() const
{
    const std::size_t taps = lowpass.size();
    std::vector<double> g(taps);
    for (std::size_t k = 0; k < taps; ++k)
        g[k] = (k % 2 == 0 ? 1.0 : -1.0) * lowpass[taps - 1 - k];
    return g;
}

FilterPair build_filter(WaveletFamily family)
{
    FilterPair filters{family, {}};
    switch (family) {
    case WaveletFamily::Haar:
        filters.lowpass = {M_SQRT1_2, M_SQRT1_2};
        break;
    case WaveletFamily::DaubExPhase4:
        filters.lowpass.assign(std::begin(kDaub4), std::end(kDaub4));
        break;
    }
    if (!satisfies_qmf(filters, 1e-12))
        throw Error("filter taps fail the orthonormality conditions");
    return filters;
}

bool satisfies_qmf(const FilterPair& filters, double tol)
{
    const auto& h = filters.lowpass;
    if (h.size() < 2 || h.size() % 2 != 0)
        return false;
    const double sum = std::accumulate(h.begin(), h.end(), 0.0);
    if (std::abs(sum - M_SQRT2) > tol)
        return false;
    for (std::size_t shift = 0; shift < h.size(); shift += 2) {
        double acc = 0.0;
        for (std::size_t k = 0; k + shift < h.size(); ++k)
            acc += h[k] * h[k + shift];
        const double expected = shift == 0 ? 1.0 : 0.0;
        if (std::abs(acc - expected) > tol)
            return false;
    }
    return true;
}

WaveletBasis::WaveletBasis(WaveletFamily family, std::size_t n, unsigned coarsest_level)
    : filters_(build_filter(family))
    , highpass_(filters_.highpass())
    , n_(n)
    , levels_(0)
    , coarsest_(coarsest_level)
{
    if (!is_power_of_two(n))
        throw Error("signal length " + std::to_string(n) + " is not a power of two");
    while ((std::size_t{1} << levels_) < n)
        ++levels_;
    if (coarsest_ > levels_)
        throw Error("coarsest level " + std::to_string(coarsest_) + " exceeds log2(n) = " +
                    std::to_string(levels_));
}

void analyze_inplace(std::span<double> data, const WaveletBasis& basis, std::span<double> scratch)
{
    if (data.size() != basis.size())
        throw Error("signal length " + std::to_string(data.size()) + " does not match basis length " +
                    std::to_string(basis.size()));
    const auto h = basis.lowpass();
    const auto g = basis.highpass();
    for (std::size_t m = basis.size(); m > basis.father_count(); m /= 2) {
        forward_step(data.data(), scratch.data(), m, h, g);
        std::copy_n(scratch.data(), m, data.data());
    }
}

void synthesize_inplace(std::span<double> data, const WaveletBasis& basis, std::span<double> scratch)
{
    if (data.size() != basis.size())
        throw Error("coefficient length " + std::to_string(data.size()) +
                    " does not match basis length " + std::to_string(basis.size()));
    const auto h = basis.lowpass();
    const auto g = basis.highpass();
    for (std::size_t m = 2 * basis.father_count(); m <= basis.size(); m *= 2) {
        inverse_step(data.data(), scratch.data(), m, h, g);
        std::copy_n(scratch.data(), m, data.data());
    }
}

CoefVector analyze(std::span<const double> signal, const WaveletBasis& basis)
{
    CoefVector coefs{basis.father_count(), {signal.begin(), signal.end()}};
    std::vector<double> scratch(signal.size());
    analyze_inplace(coefs.values, basis, scratch);
    return coefs;
}

std::vector<double> synthesize(const CoefVector& coefs, const WaveletBasis& basis)
{
    if (coefs.father_count != basis.father_count())
        throw Error("coefficient father count does not match basis");
    std::vector<double> out = coefs.values;
    std::vector<double> scratch(out.size());
    synthesize_inplace(out, basis, scratch);
    return out;
}

Permutation::Permutation(std::vector<std::uint32_t> order)
    : order_(std::move(order))
{
    std::vector<bool> seen(order_.size(), false);
    for (auto row : order_) {
        if (row >= order_.size() || seen[row])
            throw Error("permutation is not a bijection");
        seen[row] = true;
    }
}

Permutation Permutation::identity(std::size_t n)
{
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    return Permutation(std::move(order));
}

Permutation Permutation::inverse() const
{
    std::vector<std::uint32_t> inv(order_.size());
    for (std::size_t r = 0; r < order_.size(); ++r)
        inv[order_[r]] = static_cast<std::uint32_t>(r);
    return Permutation(std::move(inv));
}

void Permutation::gather(std::span<const double> in, std::span<double> out) const
{
    for (std::size_t r = 0; r < order_.size(); ++r)
        out[r] = in[order_[r]];
}

void Permutation::scatter(std::span<const double> in, std::span<double> out) const
{
    for (std::size_t r = 0; r < order_.size(); ++r)
        out[order_[r]] = in[r];
}

std::vector<double> Permutation::gather(std::span<const double> in) const
{
    std::vector<double> out(order_.size());
    gather(in, out);
    return out;
}

std::vector<double> Permutation::scatter(std::span<const double> in) const
{
    std::vector<double> out(order_.size());
    scatter(in, out);
    return out;
}

Permutation permutation_of(std::span<const double> column)
{
    for (std::size_t i = 0; i < column.size(); ++i)
        if (std::isnan(column[i]))
            throw Error("NaN in covariate at row " + std::to_string(i + 1));
    std::vector<std::uint32_t> order(column.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return column[a] < column[b]; });
    return Permutation(std::move(order));
}

} // namespace sramlet
