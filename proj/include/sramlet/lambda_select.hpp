#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sramlet/shrinkage.hpp"
#include "sramlet/solver.hpp"
#include "sramlet/wavelet.hpp"

namespace sramlet {

struct QutConfig
{
    double alpha = 0.05;
    std::size_t mc_samples = 1000;
    std::uint64_t seed = 0;
    /// Null statistic: SquareRoot is pivotal; LeastSquares (used by AMlet and
    /// plain soft-waveshrink) drops the denominator and must be scaled by a
    /// sigma estimate.
    LossMode statistic = LossMode::SquareRoot;
    unsigned threads = 0; // 0: THREADS env or hardware concurrency

    void validate() const;
};

struct QutResult
{
    double lambda_qut = 0.0;
    std::vector<double> samples; // Lambda for each draw, in draw order
    double alpha = 0.0;
    std::uint64_t seed = 0;
    LossMode statistic = LossMode::SquareRoot;
    std::string generator;
};

/// Order statistic of index ceil((1 - alpha) M) (1-based), no interpolation.
double upper_quantile(std::span<const double> samples, double alpha);

/// Quantile universal threshold conditional on the design: Lambda =
/// zero_threshold(Y0) for Y0 ~ N(0, I_n), draw i from substream i.
QutResult qut(const BlockDesign& design, const QutConfig& config);

/// Square-root and least-squares thresholds from the same draws
/// (config.statistic is ignored).
struct QutPair
{
    QutResult square_root;
    QutResult least_squares;
};
QutPair qut_pair(const BlockDesign& design, const QutConfig& config);
QutPair qut_univariate_pair(const WaveletBasis& basis, const QutConfig& config);

/// Same for univariate square-root soft-waveshrink with fathers unpenalized:
/// Lambda = ||Psi^T Y0||_inf / ||Psi^T Y0||_2 (or the numerator alone).
QutResult qut_univariate(const WaveletBasis& basis, const QutConfig& config);

/// ||z||_inf / ||z||_2 with z the mother coefficients of y (y in covariate
/// order); the smallest lambda for which square-root soft-waveshrink is null.
double univariate_zero_threshold(std::span<const double> y_ordered, const WaveletBasis& basis);

/// count points, geometrically spaced from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

struct SureSelection
{
    double lambda = 0.0;
    double sigma = 0.0;
    SureCurve curve;
};

/// Minimizes SURE over a 100-point log grid on [1/(2 sqrt(n_m)), ||z||_inf/||z||_2];
/// sigma defaults to mad_sigma.
SureSelection select_sure(std::span<const double> x, std::span<const double> y, const WaveletBasis& basis,
                          std::optional<double> sigma = std::nullopt);

/// Standard grid used by the SURE and oracle rules.
std::vector<double> sure_lambda_grid(std::span<const double> y_ordered, const WaveletBasis& basis,
                                     std::size_t count = 100);

} // namespace sramlet
