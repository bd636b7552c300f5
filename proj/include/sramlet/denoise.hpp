#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "sramlet/shrinkage.hpp"
#include "sramlet/wavelet.hpp"

namespace sramlet {

namespace rule {

struct Qut
{
    double alpha = 0.05;
    std::size_t mc_samples = 1000;
    std::uint64_t seed = 0;
};

struct Sure
{
    std::optional<double> sigma; // defaults to the MAD estimate
};

struct Fixed
{
    double lambda = 0.0;
};

/// Minimizes the true l2 loss against mu (original row order) over the SURE
/// grid plus any extra candidates.
struct Oracle
{
    std::vector<double> mu;
    std::vector<double> extra_lambdas;
};

} // namespace rule

using DenoiseRule = std::variant<rule::Qut, rule::Sure, rule::Fixed, rule::Oracle>;

struct DenoiseResult
{
    std::vector<double> fitted; // original row order
    ShrinkResult shrink;
    double lambda = 0.0;
    CoefVector coefs; // fitted wavelet coefficients (fathers unpenalized)
};

/// Square-root soft-waveshrink of y against the ordered x at a fixed lambda.
DenoiseResult denoise_at(std::span<const double> x, std::span<const double> y, const WaveletBasis& basis,
                         double lambda);

DenoiseResult denoise_univariate(std::span<const double> x, std::span<const double> y,
                                 const WaveletBasis& basis, const DenoiseRule& rule);

} // namespace sramlet
