#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sramlet/design.hpp"

namespace sramlet {

enum class LossMode
{
    SquareRoot,   // SRAMlet: ||r||_2 + lambda ||beta||_1
    LeastSquares, // AMlet: 0.5 ||r||_2^2 + lambda ||beta||_1
};

std::string_view to_string(LossMode mode);
LossMode parse_loss(std::string_view name);

/// Nonzero coefficients of one block, indices ascending. Wavelet indices
/// count mother coefficients (slot 0 of the transform is the father).
struct SparseCoefs
{
    std::vector<std::uint32_t> index;
    std::vector<double> value;

    bool empty() const noexcept { return index.empty(); }
    std::vector<double> dense(std::size_t size) const;
    double l1() const noexcept;
};

enum class SigmaEstimator
{
    RootMeanSquare, // ||r||_2 / sqrt(n)
    Mad,            // median |r - median(r)| / 0.6745
};

struct FitOptions
{
    std::size_t max_sweeps = 200;
    double tol = 1e-8; // relative objective change between sweeps
    /// LeastSquares only: threshold = lambda * sigma_hat, sigma_hat re-estimated
    /// as ||r|| / sqrt(n) after every sweep. Not a convex problem.
    bool iterate_sigma = false;
    SigmaEstimator sigma_estimator = SigmaEstimator::RootMeanSquare;
    /// Record the objective after every block and intercept update.
    bool record_trace = false;
};

struct AdditiveFit
{
    double intercept = 0.0;
    std::vector<SparseCoefs> coefs; // one per design block
    double lambda = 0.0;
    LossMode loss = LossMode::SquareRoot;
    std::size_t sweeps = 0;
    double objective = 0.0;
    bool converged = false;
    double sigma_hat = 0.0;           // final residual sigma (the iterated estimator if any)
    double effective_threshold = 0.0; // lambda, or lambda * sigma_hat when iterating sigma
    std::vector<double> trace;
};

/// ||W^T (y - ybar)||_inf / ||y - ybar||_2 over all penalized columns (mother
/// coefficients and linear columns). The LeastSquares statistic omits the
/// denominator. Throws for a constant response.
double zero_threshold(std::span<const double> y, const BlockDesign& design,
                      LossMode statistic = LossMode::SquareRoot);
double zero_threshold(const Dataset& data, const BlockDesign& design,
                      LossMode statistic = LossMode::SquareRoot);

/// Both null statistics from one pass over the blocks.
struct ZeroThresholds
{
    double square_root = 0.0;
    double least_squares = 0.0;
};
ZeroThresholds zero_thresholds(std::span<const double> y, const BlockDesign& design);

/// Block coordinate relaxation: exact update of each block in turn via the
/// square-root soft-waveshrink closed form (or plain soft thresholding for
/// LeastSquares), then the intercept, until the objective settles.
AdditiveFit fit_bcr(const Dataset& data, const BlockDesign& design, double lambda, LossMode loss,
                    const FitOptions& options = {});

struct SupportSet
{
    std::vector<std::size_t> indices; // covariates, ascending, 0-based
    bool empty() const noexcept { return indices.empty(); }
    std::size_t size() const noexcept { return indices.size(); }
};

SupportSet support_of(const AdditiveFit& fit, const BlockDesign& design);

/// Sum of a covariate's block contributions at its sorted training values.
struct CovariateTerm
{
    std::size_t covariate = 0;
    std::vector<double> sorted_x;
    std::vector<double> values;
};

struct AdditivePredictor
{
    double intercept = 0.0;
    std::size_t p = 0;
    std::vector<CovariateTerm> terms; // active covariates only
};

AdditivePredictor make_predictor(const AdditiveFit& fit, const BlockDesign& design);

/// Linear interpolation between neighbouring training values, clamped to the
/// end values outside the training range.
double evaluate_term(const CovariateTerm& term, double x);

std::vector<double> predict(const AdditivePredictor& predictor, const Matrix& X);
std::vector<double> predict(const AdditiveFit& fit, const BlockDesign& design, const Matrix& X);

/// c + sum of block contributions at the training rows.
std::vector<double> fitted_values(const AdditiveFit& fit, const BlockDesign& design);

/// Cost recomputed from scratch for fit.loss at penalty weight lambda.
double objective(const AdditiveFit& fit, const Dataset& data, const BlockDesign& design, double lambda);

} // namespace sramlet
