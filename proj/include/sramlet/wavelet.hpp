#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sramlet {

enum class WaveletFamily
{
    Haar,
    DaubExPhase4, // Daubechies extremal phase, 4 vanishing moments, 8 taps
};

std::string_view to_string(WaveletFamily family);

/// Accepts "haar" and "daub4" (the CLI spellings).
WaveletFamily parse_family(std::string_view name);

struct FilterPair
{
    WaveletFamily family;
    std::vector<double> lowpass;

    /// Quadrature mirror of the lowpass: g_k = (-1)^k h_{L-1-k}.
    std::vector<double> highpass() const;
};

FilterPair build_filter(WaveletFamily family);

/// Checks sum h = sqrt(2), sum h^2 = 1 and even-shift orthogonality.
bool satisfies_qmf(const FilterPair& filters, double tol);

constexpr bool is_power_of_two(std::size_t n) noexcept
{
    return n != 0 && (n & (n - 1)) == 0;
}

/// One orthonormal periodic wavelet basis Phi = [Phi_0, Psi] of R^n.
///
/// Coefficients are laid out father block first (2^j0 entries), then the
/// detail levels coarse to fine; detail level j occupies [2^j, 2^{j+1}) and
/// the finest level is the last n/2 slots.
class WaveletBasis
{
public:
    WaveletBasis(WaveletFamily family, std::size_t n, unsigned coarsest_level = 0);

    WaveletFamily family() const noexcept { return filters_.family; }
    const FilterPair& filters() const noexcept { return filters_; }
    std::span<const double> lowpass() const noexcept { return filters_.lowpass; }
    std::span<const double> highpass() const noexcept { return highpass_; }

    std::size_t size() const noexcept { return n_; }
    unsigned levels() const noexcept { return levels_; }
    unsigned coarsest_level() const noexcept { return coarsest_; }
    std::size_t father_count() const noexcept { return std::size_t{1} << coarsest_; }
    std::size_t mother_count() const noexcept { return n_ - father_count(); }

    std::size_t level_offset(unsigned level) const noexcept { return std::size_t{1} << level; }
    std::size_t level_size(unsigned level) const noexcept { return std::size_t{1} << level; }

private:
    FilterPair filters_;
    std::vector<double> highpass_;
    std::size_t n_;
    unsigned levels_;
    unsigned coarsest_;
};

struct CoefVector
{
    std::size_t father_count = 0;
    std::vector<double> values;

    std::span<const double> father() const { return std::span(values).first(father_count); }
    std::span<const double> mother() const { return std::span(values).subspan(father_count); }
    std::span<double> father() { return std::span(values).first(father_count); }
    std::span<double> mother() { return std::span(values).subspan(father_count); }

    /// Finest detail level (length n/2).
    std::span<const double> finest() const { return std::span(values).subspan(values.size() / 2); }
};

// In-place pyramid steps; scratch must hold at least basis.size() doubles.
void analyze_inplace(std::span<double> data, const WaveletBasis& basis, std::span<double> scratch);
void synthesize_inplace(std::span<double> data, const WaveletBasis& basis, std::span<double> scratch);

/// Phi^T signal.
CoefVector analyze(std::span<const double> signal, const WaveletBasis& basis);

/// Phi coefs.
std::vector<double> synthesize(const CoefVector& coefs, const WaveletBasis& basis);

/// Rank -> original row mapping of an ordered covariate.
class Permutation
{
public:
    Permutation() = default;

    /// Throws if order is not a bijection on {0..n-1}.
    explicit Permutation(std::vector<std::uint32_t> order);

    static Permutation identity(std::size_t n);

    std::size_t size() const noexcept { return order_.size(); }
    std::uint32_t operator[](std::size_t rank) const noexcept { return order_[rank]; }
    std::span<const std::uint32_t> order() const noexcept { return order_; }

    Permutation inverse() const;

    /// out[rank] = in[order[rank]]  (P x)
    void gather(std::span<const double> in, std::span<double> out) const;
    /// out[order[rank]] = in[rank]  (P^T x)
    void scatter(std::span<const double> in, std::span<double> out) const;

    std::vector<double> gather(std::span<const double> in) const;
    std::vector<double> scatter(std::span<const double> in) const;

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::uint32_t> order_;
};

/// Stable ascending sort order of a column; NaN is rejected.
Permutation permutation_of(std::span<const double> column);

} // namespace sramlet
