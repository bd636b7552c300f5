#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sramlet/wavelet.hpp"

namespace sramlet {

/// Dense column-major matrix; covariates are accessed a column at a time.
class Matrix
{
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows)
        , cols_(cols)
        , data_(rows * cols, fill)
    {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * rows_ + i]; }

    std::span<double> col(std::size_t j) noexcept { return std::span(data_).subspan(j * rows_, rows_); }
    std::span<const double> col(std::size_t j) const noexcept
    {
        return std::span(data_).subspan(j * rows_, rows_);
    }

    /// Rows selected (in the given order) into a new matrix.
    Matrix select_rows(std::span<const std::size_t> rows) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Dataset
{
    Matrix X;
    std::vector<double> y;
    std::vector<std::string> names; // covariate names, one per column of X

    std::size_t n() const noexcept { return y.size(); }
    std::size_t p() const noexcept { return X.cols(); }

    /// n = 2^J, n, p >= 1, X is n x p and nothing is NaN.
    void validate() const;
};

enum class DesignMode
{
    PureWavelet,
    Composite, // linear + DaubExPhase4 + Haar term per covariate
};

std::string_view to_string(DesignMode mode);
DesignMode parse_mode(std::string_view name);

enum class BlockKind
{
    Wavelet,
    Linear,
};

struct Block
{
    std::size_t covariate = 0;
    BlockKind kind = BlockKind::Wavelet;
    WaveletFamily family = WaveletFamily::DaubExPhase4; // wavelet blocks only
};

struct DesignOptions
{
    WaveletFamily family = WaveletFamily::DaubExPhase4;
    DesignMode mode = DesignMode::PureWavelet;
};

/// The implicit block matrix [P_1^T Psi ... P_p^T Psi] (plus linear columns in
/// composite mode). Wavelet blocks are full depth: the only father is the
/// constant, which the intercept carries.
class BlockDesign
{
public:
    BlockDesign(const Matrix& X, const DesignOptions& options = {});

    /// Rebuilds a design from per-covariate sorted training values; used when
    /// loading a saved model. Covariates without values get no blocks.
    static BlockDesign from_sorted_values(std::size_t n, std::size_t p,
                                          std::vector<std::optional<std::vector<double>>> sorted,
                                          const DesignOptions& options);

    std::size_t n() const noexcept { return n_; }
    std::size_t p() const noexcept { return p_; }
    const DesignOptions& options() const noexcept { return options_; }

    std::span<const Block> blocks() const noexcept { return blocks_; }
    const Block& block(std::size_t k) const { return blocks_[k]; }

    /// Number of penalized coefficients in block k.
    std::size_t block_size(std::size_t k) const;

    bool has_covariate(std::size_t j) const { return !sorted_x_[j].empty(); }
    const Permutation& permutation(std::size_t j) const { return perms_[j]; }
    std::span<const double> sorted_values(std::size_t j) const { return sorted_x_[j]; }

    /// Unit-norm centered covariate in rank order; empty for a constant column.
    std::span<const double> linear_column(std::size_t j) const { return linear_[j]; }

    const WaveletBasis& basis(WaveletFamily family) const;

    /// Fitted values of block k (rank order of its covariate) for dense coefficients.
    std::vector<double> block_contribution(std::size_t k, std::span<const double> beta) const;

private:
    BlockDesign() = default;
    void add_covariate_blocks(std::size_t j);

    std::size_t n_ = 0;
    std::size_t p_ = 0;
    DesignOptions options_;
    std::vector<Block> blocks_;
    std::vector<Permutation> perms_;
    std::vector<std::vector<double>> sorted_x_;
    std::vector<std::vector<double>> linear_;
    std::optional<WaveletBasis> haar_;
    std::optional<WaveletBasis> daub_;
};

} // namespace sramlet
