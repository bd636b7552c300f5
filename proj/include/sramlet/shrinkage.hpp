#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sramlet/wavelet.hpp"

namespace sramlet {

double soft_threshold(double z, double t) noexcept;

/// Componentwise sign(z) max(|z| - t, 0); throws on negative t.
std::vector<double> soft_threshold(std::span<const double> z, double t);

enum class Regime
{
    FullFit,  // beta = z (rho = 0 only)
    Interior, // beta = soft(z, threshold)
    Null,     // beta = 0
};

/// min_beta sqrt(rho^2 + ||z - beta||^2) + lambda ||beta||_1
///
/// rho is the residual energy outside the penalized coordinates; rho = 0 is
/// the plain square-root soft-waveshrink problem on mother coefficients.
struct ShrinkProblem
{
    std::span<const double> z;
    double rho = 0.0;
    double lambda = 0.0;
};

struct ShrinkSummary
{
    Regime regime = Regime::Null;
    double threshold = 0.0; // implicit threshold lambda * residual norm
    std::size_t zeros = 0;  // number of zeroed coefficients
    double objective = 0.0;
};

struct ShrinkResult : ShrinkSummary
{
    std::vector<double> beta;
};

ShrinkResult srsw_solve(const ShrinkProblem& problem);

/// Allocation-free variant for the block solver: beta must have z.size()
/// entries, sort_buffer is resized as needed.
ShrinkSummary srsw_solve(const ShrinkProblem& problem, std::span<double> beta,
                         std::vector<double>& sort_buffer);

/// Every j that satisfies the fixed-point condition |{i : |z_i| <= phi_j}| = j
/// (ascending). Diagnostic only; the solver returns the first.
std::vector<std::size_t> srsw_fixed_points(const ShrinkProblem& problem);

/// sigma_hat = threshold / (sqrt(n) lambda). Only defined in the Interior regime.
double implicit_sigma(const ShrinkSummary& result, std::size_t n, double lambda);

/// median(|d|) / 0.6745 over the finest detail level of analyze(y).
double mad_sigma(std::span<const double> y, const WaveletBasis& basis);

struct SureTerms
{
    double rss = 0.0;
    std::size_t dof = 0; // n_f + number of nonzero mothers
    double sure = 0.0;
    ShrinkResult shrink;
};

/// SURE of square-root soft-waveshrink at lambda for y already in covariate order.
SureTerms sure_terms(std::span<const double> y, const WaveletBasis& basis, double lambda, double sigma);
double sure(std::span<const double> y, const WaveletBasis& basis, double lambda, double sigma);

struct SureCurve
{
    std::vector<double> lambdas;
    std::vector<double> rss;
    std::vector<std::size_t> dof;
    std::vector<double> sure;
    double argmin_lambda = 0.0;
};

} // namespace sramlet
