#include "sramlet/lambda_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sramlet/error.hpp"
#include "sramlet/parallel.hpp"
#include "sramlet/random.hpp"

namespace sramlet {

void QutConfig::validate() const
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error("alpha must lie in (0, 1)");
    if (mc_samples == 0)
        throw Error("Monte Carlo sample count must be positive");
}

double upper_quantile(std::span<const double> samples, double alpha)
{
    if (samples.empty())
        throw Error("no samples for quantile");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * m - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

namespace {

QutResult finish(std::vector<double> samples, const QutConfig& config)
{
    QutResult result;
    result.lambda_qut = upper_quantile(samples, config.alpha);
    result.samples = std::move(samples);
    result.alpha = config.alpha;
    result.seed = config.seed;
    result.statistic = config.statistic;
    result.generator = std::string(Rng::generator_name);
    return result;
}

} // namespace

QutResult qut(const BlockDesign& design, const QutConfig& config)
{
    config.validate();
    std::vector<double> samples(config.mc_samples);
    parallel_for(config.mc_samples, config.threads, [&](std::size_t i) {
        Rng rng(config.seed, i);
        std::vector<double> y0(design.n());
        for (double& v : y0)
            v = rng.normal();
        samples[i] = zero_threshold(y0, design, config.statistic);
    });
    return finish(std::move(samples), config);
}

QutPair qut_pair(const BlockDesign& design, const QutConfig& config)
{
    config.validate();
    std::vector<double> sqrt_samples(config.mc_samples), ls_samples(config.mc_samples);
    parallel_for(config.mc_samples, config.threads, [&](std::size_t i) {
        Rng rng(config.seed, i);
        std::vector<double> y0(design.n());
        for (double& v : y0)
            v = rng.normal();
        const ZeroThresholds both = zero_thresholds(y0, design);
        sqrt_samples[i] = both.square_root;
        ls_samples[i] = both.least_squares;
    });
    QutConfig sqrt_config = config;
    sqrt_config.statistic = LossMode::SquareRoot;
    QutConfig ls_config = config;
    ls_config.statistic = LossMode::LeastSquares;
    return {finish(std::move(sqrt_samples), sqrt_config), finish(std::move(ls_samples), ls_config)};
}

namespace {

// (sup, norm) of the mother coefficients of a standard normal draw.
std::pair<double, double> univariate_null_draw(const WaveletBasis& basis, std::uint64_t seed, std::size_t i)
{
    Rng rng(seed, i);
    std::vector<double> y0(basis.size());
    for (double& v : y0)
        v = rng.normal();
    const CoefVector coefs = analyze(y0, basis);
    double sup = 0.0;
    double norm2 = 0.0;
    for (double v : coefs.mother()) {
        sup = std::max(sup, std::abs(v));
        norm2 += v * v;
    }
    return {sup, std::sqrt(norm2)};
}

} // namespace

QutPair qut_univariate_pair(const WaveletBasis& basis, const QutConfig& config)
{
    config.validate();
    std::vector<double> sqrt_samples(config.mc_samples), ls_samples(config.mc_samples);
    parallel_for(config.mc_samples, config.threads, [&](std::size_t i) {
        const auto [sup, norm] = univariate_null_draw(basis, config.seed, i);
        sqrt_samples[i] = sup / norm;
        ls_samples[i] = sup;
    });
    QutConfig sqrt_config = config;
    sqrt_config.statistic = LossMode::SquareRoot;
    QutConfig ls_config = config;
    ls_config.statistic = LossMode::LeastSquares;
    return {finish(std::move(sqrt_samples), sqrt_config), finish(std::move(ls_samples), ls_config)};
}

QutResult qut_univariate(const WaveletBasis& basis, const QutConfig& config)
{
    config.validate();
    std::vector<double> samples(config.mc_samples);
    parallel_for(config.mc_samples, config.threads, [&](std::size_t i) {
        const auto [sup, norm] = univariate_null_draw(basis, config.seed, i);
        samples[i] = config.statistic == LossMode::SquareRoot ? sup / norm : sup;
    });
    return finish(std::move(samples), config);
}

double univariate_zero_threshold(std::span<const double> y_ordered, const WaveletBasis& basis)
{
    const CoefVector coefs = analyze(y_ordered, basis);
    double sup = 0.0;
    double norm2 = 0.0;
    for (double v : coefs.mother()) {
        sup = std::max(sup, std::abs(v));
        norm2 += v * v;
    }
    if (!(norm2 > 0.0))
        throw Error("degenerate response: all mother coefficients are zero");
    return sup / std::sqrt(norm2);
}

std::vector<double> log_grid(double lo, double hi, std::size_t count)
{
    if (!(lo > 0.0) || !(hi >= lo) || count == 0)
        throw Error("invalid log grid bounds");
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = hi;
        return grid;
    }
    const double step = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = lo * std::exp(step * static_cast<double>(i));
    grid.back() = hi;
    return grid;
}

std::vector<double> sure_lambda_grid(std::span<const double> y_ordered, const WaveletBasis& basis,
                                     std::size_t count)
{
    const double hi = univariate_zero_threshold(y_ordered, basis);
    double lo = 0.5 / std::sqrt(static_cast<double>(basis.mother_count()));
    lo = std::min(lo, 0.5 * hi);
    return log_grid(lo, hi, count);
}

SureSelection select_sure(std::span<const double> x, std::span<const double> y, const WaveletBasis& basis,
                          std::optional<double> sigma)
{
    if (x.size() != y.size() || y.size() != basis.size())
        throw Error("select_sure: x, y and basis lengths differ");
    const Permutation perm = permutation_of(x);
    const std::vector<double> yo = perm.gather(y);

    SureSelection out;
    out.sigma = sigma ? *sigma : mad_sigma(yo, basis);
    if (!(out.sigma > 0.0))
        throw Error("select_sure: sigma estimate is zero");
    auto& curve = out.curve;
    curve.lambdas = sure_lambda_grid(yo, basis);
    double best = std::numeric_limits<double>::infinity();
    for (double lambda : curve.lambdas) {
        const SureTerms terms = sure_terms(yo, basis, lambda, out.sigma);
        curve.rss.push_back(terms.rss);
        curve.dof.push_back(terms.dof);
        curve.sure.push_back(terms.sure);
        if (terms.sure < best) {
            best = terms.sure;
            curve.argmin_lambda = lambda;
        }
    }
    out.lambda = curve.argmin_lambda;
    return out;
}

} // namespace sramlet
