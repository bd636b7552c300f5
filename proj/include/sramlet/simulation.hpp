#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sramlet/solver.hpp"
#include "sramlet/wavelet.hpp"

namespace sramlet {

enum class TestFunction
{
    Blocks,
    Bumps,
    HeaviSine,
    Doppler,
};

std::string_view to_string(TestFunction f);
TestFunction parse_test_function(std::string_view name);

/// Donoho-Johnstone test functions on [0, 1].
double test_function(TestFunction f, double x);
std::vector<double> test_function(TestFunction f, std::span<const double> x);

/// Rescales so that the population sd over the given points equals snr * sigma.
std::vector<double> scale_to_snr(std::span<const double> values, double snr, double sigma);

/// Mother coefficient indices of analyze(mu_ordered) with |coef| > 1e-10 ||mu||_2.
std::vector<std::size_t> needles_of(std::span<const double> mu_ordered, const WaveletBasis& basis);

struct Rates
{
    double fdr = 0.0;
    double tpr = 0.0;
};

/// Single-run FDR |S^c n S_hat| / (|S_hat| v 1) and TPR |S n S_hat| / (|S| v 1).
/// Both sets are sorted and duplicate-free.
Rates fdr_tpr(std::span<const std::size_t> truth, std::span<const std::size_t> estimate);

enum class Method
{
    SramletQut, // additive, square-root loss, lambda by QUT
    AmletQut,   // additive, least squares with iterated sigma, lambda by QUT
    SrswQut,    // univariate square-root soft-waveshrink
    SrswSure,
    SrswOracle,
    SoftQut, // univariate soft-waveshrink with MAD sigma
    SoftSure,
    SoftOracle,
};

std::string_view to_string(Method m);
Method parse_method(std::string_view name);
bool is_univariate(Method m);

struct SimulationSpec
{
    std::size_t n = 1024;
    std::size_t p = 1;
    std::size_t s = 1;
    double snr = 3.0;
    double sigma = 1.0;
    std::size_t runs = 100;
    std::uint64_t seed = 0;
    std::vector<Method> methods;
    WaveletFamily family = WaveletFamily::Haar;
    unsigned coarsest_level = 3; // univariate methods; additive blocks are full depth
    double alpha = 0.05;
    std::size_t mc_samples = 1000;
    FitOptions fit;
    /// Noise estimate re-computed by AMlet between sweeps.
    SigmaEstimator amlet_sigma = SigmaEstimator::Mad;
    unsigned threads = 0;

    void validate() const;
};

/// Univariate blocks study: n = 2^10, Haar, n_f = 2^3, snr 3, all six
/// univariate methods.
SimulationSpec univariate_study(std::size_t runs, std::uint64_t seed);

/// High-dimensional additive study: s = 4, DaubExPhase4, SRAMlet and AMlet.
SimulationSpec additive_study(std::size_t n, std::size_t p, std::size_t runs, std::uint64_t seed);

struct RunMetrics
{
    std::size_t run = 0;
    Method method = Method::SramletQut;
    double fdr = 0.0;
    double tpr = 0.0;
    double mse = 0.0; // sum over training points of (mu_hat - mu)^2
    double sigma_hat = 0.0;
    std::size_t support_size = 0;
    std::size_t true_support_size = 0;
    double lambda = 0.0;
    double seconds = 0.0;
};

/// One row per (run, method), ordered by run then method. Deterministic in
/// spec.seed regardless of the thread count (timings aside).
std::vector<RunMetrics> run_study(const SimulationSpec& spec);

} // namespace sramlet
