#include "sramlet/design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sramlet/error.hpp"

namespace sramlet {

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const
{
    Matrix out(rows.size(), cols_);
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t i = 0; i < rows.size(); ++i)
            out(i, j) = (*this)(rows[i], j);
    return out;
}

void Dataset::validate() const
{
    if (y.empty() || X.cols() == 0)
        throw Error("dataset needs n >= 1 rows and p >= 1 covariates");
    if (X.rows() != y.size())
        throw Error("covariate matrix has " + std::to_string(X.rows()) + " rows but response has " +
                    std::to_string(y.size()));
    if (!is_power_of_two(y.size()))
        throw Error("sample size " + std::to_string(y.size()) + " is not a power of two");
    if (!names.empty() && names.size() != X.cols())
        throw Error("covariate name count does not match column count");
    for (std::size_t i = 0; i < y.size(); ++i)
        if (std::isnan(y[i]))
            throw Error("NaN response at row " + std::to_string(i + 1));
    for (std::size_t j = 0; j < X.cols(); ++j)
        for (std::size_t i = 0; i < X.rows(); ++i)
            if (std::isnan(X(i, j)))
                throw Error("NaN covariate at row " + std::to_string(i + 1) + ", column " +
                            std::to_string(j + 1));
}

std::string_view to_string(DesignMode mode)
{
    return mode == DesignMode::Composite ? "composite" : "wavelet";
}

DesignMode parse_mode(std::string_view name)
{
    if (name == "wavelet")
        return DesignMode::PureWavelet;
    if (name == "composite")
        return DesignMode::Composite;
    throw Error("unknown design mode '" + std::string(name) + "' (expected wavelet or composite)");
}

namespace {

std::vector<double> unit_centered(std::span<const double> sorted)
{
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    std::vector<double> u(sorted.size());
    double norm2 = 0.0;
    for (std::size_t r = 0; r < sorted.size(); ++r) {
        u[r] = sorted[r] - mean;
        norm2 += u[r] * u[r];
    }
    if (!(norm2 > 0.0))
        return {};
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : u)
        v *= inv;
    return u;
}

} // namespace

BlockDesign::BlockDesign(const Matrix& X, const DesignOptions& options)
    : n_(X.rows())
    , p_(X.cols())
    , options_(options)
{
    if (!is_power_of_two(n_))
        throw Error("sample size " + std::to_string(n_) + " is not a power of two");
    if (p_ == 0)
        throw Error("design needs at least one covariate");
    perms_.resize(p_);
    sorted_x_.resize(p_);
    linear_.resize(p_);
    for (std::size_t j = 0; j < p_; ++j) {
        perms_[j] = permutation_of(X.col(j));
        sorted_x_[j] = perms_[j].gather(X.col(j));
        add_covariate_blocks(j);
    }
}

BlockDesign BlockDesign::from_sorted_values(std::size_t n, std::size_t p,
                                            std::vector<std::optional<std::vector<double>>> sorted,
                                            const DesignOptions& options)
{
    if (!is_power_of_two(n))
        throw Error("sample size " + std::to_string(n) + " is not a power of two");
    if (sorted.size() != p)
        throw Error("sorted value list does not match covariate count");
    BlockDesign design;
    design.n_ = n;
    design.p_ = p;
    design.options_ = options;
    design.perms_.resize(p);
    design.sorted_x_.resize(p);
    design.linear_.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        if (!sorted[j])
            continue;
        if (sorted[j]->size() != n)
            throw Error("covariate " + std::to_string(j) + " has the wrong number of training values");
        if (!std::is_sorted(sorted[j]->begin(), sorted[j]->end()))
            throw Error("covariate " + std::to_string(j) + " training values are not sorted");
        design.perms_[j] = Permutation::identity(n);
        design.sorted_x_[j] = std::move(*sorted[j]);
        design.add_covariate_blocks(j);
    }
    return design;
}

void BlockDesign::add_covariate_blocks(std::size_t j)
{
    auto ensure = [&](std::optional<WaveletBasis>& slot, WaveletFamily family) {
        if (!slot)
            slot.emplace(family, n_, 0);
    };
    if (options_.mode == DesignMode::PureWavelet) {
        ensure(options_.family == WaveletFamily::Haar ? haar_ : daub_, options_.family);
        blocks_.push_back({j, BlockKind::Wavelet, options_.family});
        return;
    }
    linear_[j] = unit_centered(sorted_x_[j]);
    ensure(daub_, WaveletFamily::DaubExPhase4);
    ensure(haar_, WaveletFamily::Haar);
    blocks_.push_back({j, BlockKind::Linear, WaveletFamily::DaubExPhase4});
    blocks_.push_back({j, BlockKind::Wavelet, WaveletFamily::DaubExPhase4});
    blocks_.push_back({j, BlockKind::Wavelet, WaveletFamily::Haar});
}

std::size_t BlockDesign::block_size(std::size_t k) const
{
    return blocks_[k].kind == BlockKind::Linear ? 1 : n_ - 1;
}

const WaveletBasis& BlockDesign::basis(WaveletFamily family) const
{
    const auto& slot = family == WaveletFamily::Haar ? haar_ : daub_;
    if (!slot)
        throw Error("design has no " + std::string(to_string(family)) + " blocks");
    return *slot;
}

std::vector<double> BlockDesign::block_contribution(std::size_t k, std::span<const double> beta) const
{
    const Block& blk = blocks_[k];
    if (beta.size() != block_size(k))
        throw Error("block coefficient length mismatch");
    if (blk.kind == BlockKind::Linear) {
        const auto u = linear_[blk.covariate];
        std::vector<double> out(n_, 0.0);
        if (!u.empty())
            for (std::size_t r = 0; r < n_; ++r)
                out[r] = beta[0] * u[r];
        return out;
    }
    const WaveletBasis& wb = basis(blk.family);
    std::vector<double> out(n_);
    out[0] = 0.0;
    std::copy(beta.begin(), beta.end(), out.begin() + 1);
    std::vector<double> scratch(n_);
    synthesize_inplace(out, wb, scratch);
    return out;
}

} // namespace sramlet
