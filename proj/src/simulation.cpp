#include "sramlet/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sramlet/error.hpp"
#include "sramlet/lambda_select.hpp"
#include "sramlet/parallel.hpp"
#include "sramlet/random.hpp"
#include "sramlet/shrinkage.hpp"

namespace sramlet {

std::vector<double> scale_to_snr(std::span<const double> values, double snr, double sigma)
{
    if (values.empty())
        throw Error("scale_to_snr: no values");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double var = 0.0;
    for (double v : values)
        var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 0.0))
        throw Error("scale_to_snr: constant input");
    const double factor = snr * sigma / sd;
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = values[i] * factor;
    return out;
}

std::vector<std::size_t> needles_of(std::span<const double> mu_ordered, const WaveletBasis& basis)
{
    double norm2 = 0.0;
    for (double v : mu_ordered)
        norm2 += v * v;
    const double tol = 1e-10 * std::sqrt(norm2);
    const CoefVector coefs = analyze(mu_ordered, basis);
    std::vector<std::size_t> needles;
    const auto mothers = coefs.mother();
    for (std::size_t i = 0; i < mothers.size(); ++i)
        if (std::abs(mothers[i]) > tol)
            needles.push_back(i);
    return needles;
}

Rates fdr_tpr(std::span<const std::size_t> truth, std::span<const std::size_t> estimate)
{
    std::vector<std::size_t> common;
    std::set_intersection(truth.begin(), truth.end(), estimate.begin(), estimate.end(),
                          std::back_inserter(common));
    const double hits = static_cast<double>(common.size());
    const double selected = static_cast<double>(estimate.size());
    Rates rates;
    rates.fdr = (selected - hits) / std::max(selected, 1.0);
    rates.tpr = hits / std::max(static_cast<double>(truth.size()), 1.0);
    return rates;
}

std::string_view to_string(Method m)
{
    switch (m) {
    case Method::SramletQut: return "sramlet-qut";
    case Method::AmletQut: return "amlet-qut";
    case Method::SrswQut: return "srsw-qut";
    case Method::SrswSure: return "srsw-sure";
    case Method::SrswOracle: return "srsw-oracle";
    case Method::SoftQut: return "soft-qut";
    case Method::SoftSure: return "soft-sure";
    case Method::SoftOracle: return "soft-oracle";
    }
    return "unknown";
}

Method parse_method(std::string_view name)
{
    for (auto m : {Method::SramletQut, Method::AmletQut, Method::SrswQut, Method::SrswSure, Method::SrswOracle,
                   Method::SoftQut, Method::SoftSure, Method::SoftOracle})
        if (name == to_string(m))
            return m;
    throw Error("unknown method '" + std::string(name) + "'");
}

bool is_univariate(Method m)
{
    return m != Method::SramletQut && m != Method::AmletQut;
}

void SimulationSpec::validate() const
{
    if (!is_power_of_two(n) || n < 8)
        throw Error("simulation n must be a power of two >= 8");
    if (p == 0 || s > p)
        throw Error("simulation needs 1 <= p and s <= p");
    if (runs == 0)
        throw Error("simulation needs at least one run");
    if (!(snr > 0.0) || !(sigma > 0.0))
        throw Error("snr and sigma must be positive");
    if (methods.empty())
        throw Error("no methods selected");
    for (Method m : methods)
        if (is_univariate(m) && p != 1)
            throw Error(std::string(to_string(m)) + " is a univariate method and needs p = 1");
    if (!(alpha > 0.0 && alpha < 1.0) || mc_samples == 0)
        throw Error("invalid QUT settings");
}

SimulationSpec univariate_study(std::size_t runs, std::uint64_t seed)
{
    SimulationSpec spec;
    spec.n = 1024;
    spec.p = 1;
    spec.s = 1;
    spec.runs = runs;
    spec.seed = seed;
    spec.family = WaveletFamily::Haar;
    spec.coarsest_level = 3;
    spec.methods = {Method::SrswQut, Method::SrswSure, Method::SrswOracle,
                    Method::SoftQut, Method::SoftSure, Method::SoftOracle};
    return spec;
}

SimulationSpec additive_study(std::size_t n, std::size_t p, std::size_t runs, std::uint64_t seed)
{
    SimulationSpec spec;
    spec.n = n;
    spec.p = p;
    spec.s = std::min<std::size_t>(4, p);
    spec.runs = runs;
    spec.seed = seed;
    spec.family = WaveletFamily::DaubExPhase4;
    spec.coarsest_level = 0;
    spec.methods = {Method::SramletQut, Method::AmletQut};
    return spec;
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr TestFunction kNeedleOrder[4] = {TestFunction::Blocks, TestFunction::Bumps, TestFunction::HeaviSine,
                                          TestFunction::Doppler};

std::uint64_t qut_seed(std::uint64_t seed, std::uint64_t run)
{
    std::uint64_t state = seed ^ 0x5DEECE66DULL;
    const std::uint64_t a = splitmix64(state);
    state = a ^ (run * 0x9E3779B97F4A7C15ULL);
    return splitmix64(state);
}

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Per-estimate quantities in the coefficient domain of the ordered data.
struct CoefFit
{
    std::vector<double> mothers;
    double lambda = 0.0;
    double sigma_hat = 0.0;
};

struct UnivariateRun
{
    std::vector<double> father_y;   // fitted fathers (unpenalized)
    std::vector<double> father_mu;
    std::vector<double> z;          // mother coefficients of y
    std::vector<double> theta;      // mother coefficients of mu
    std::vector<std::size_t> truth; // needles
    std::size_t n = 0;

    double loss(std::span<const double> mothers) const
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < father_y.size(); ++i)
            acc += (father_y[i] - father_mu[i]) * (father_y[i] - father_mu[i]);
        for (std::size_t i = 0; i < theta.size(); ++i)
            acc += (mothers[i] - theta[i]) * (mothers[i] - theta[i]);
        return acc;
    }
};

double residual_sigma(std::span<const double> z, std::span<const double> beta, std::size_t n)
{
    double rss = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        rss += (z[i] - beta[i]) * (z[i] - beta[i]);
    return std::sqrt(rss / static_cast<double>(n));
}

CoefFit srsw_at(const UnivariateRun& run, double lambda)
{
    const ShrinkResult res = srsw_solve({run.z, 0.0, lambda});
    CoefFit fit{res.beta, lambda, 0.0};
    fit.sigma_hat = res.regime == Regime::Interior ? implicit_sigma(res, run.n, lambda)
                                                   : residual_sigma(run.z, res.beta, run.n);
    return fit;
}

CoefFit soft_at(const UnivariateRun& run, double t, double sigma)
{
    return {soft_threshold(run.z, t), t, sigma};
}

std::size_t nonzero(std::span<const double> v)
{
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return x != 0.0; }));
}

double srsw_sure_value(const UnivariateRun& run, const CoefFit& fit, double sigma, std::size_t fathers)
{
    double rss = 0.0;
    for (std::size_t i = 0; i < run.z.size(); ++i)
        rss += (run.z[i] - fit.mothers[i]) * (run.z[i] - fit.mothers[i]);
    const double n = static_cast<double>(run.n);
    return rss + 2.0 * sigma * sigma * static_cast<double>(fathers + nonzero(fit.mothers)) - n * sigma * sigma;
}

struct UnivariateContext
{
    const SimulationSpec& spec;
    const WaveletBasis& basis;
    double qut_sqrt;
    double qut_ls;
};

std::vector<RunMetrics> univariate_run(const UnivariateContext& ctx, std::size_t run_index)
{
    const SimulationSpec& spec = ctx.spec;
    const WaveletBasis& basis = ctx.basis;
    Rng rng(spec.seed, run_index);
    std::vector<double> x(spec.n);
    for (double& v : x)
        v = rng.uniform();
    std::vector<double> mu(spec.n, 0.0);
    for (std::size_t f = 0; f < spec.s; ++f) {
        const auto term = scale_to_snr(test_function(kNeedleOrder[f % 4], x), spec.snr, spec.sigma);
        for (std::size_t i = 0; i < spec.n; ++i)
            mu[i] += term[i];
    }
    std::vector<double> y(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i)
        y[i] = mu[i] + spec.sigma * rng.normal();

    const Permutation perm = permutation_of(x);
    const auto mu_o = perm.gather(mu);
    const auto y_o = perm.gather(y);
    const CoefVector cy = analyze(y_o, basis);
    const CoefVector cmu = analyze(mu_o, basis);
    UnivariateRun data;
    data.n = spec.n;
    data.father_y.assign(cy.father().begin(), cy.father().end());
    data.father_mu.assign(cmu.father().begin(), cmu.father().end());
    data.z.assign(cy.mother().begin(), cy.mother().end());
    data.theta.assign(cmu.mother().begin(), cmu.mother().end());
    data.truth = needles_of(mu_o, basis);

    const double mad = mad_sigma(y_o, basis);
    const std::size_t fathers = basis.father_count();
    double sup = 0.0;
    for (double v : data.z)
        sup = std::max(sup, std::abs(v));

    std::vector<RunMetrics> rows;
    for (Method method : spec.methods) {
        const auto start = Clock::now();
        CoefFit fit;
        switch (method) {
        case Method::SrswQut: fit = srsw_at(data, ctx.qut_sqrt); break;
        case Method::SrswSure: {
            double best = std::numeric_limits<double>::infinity();
            for (double lambda : sure_lambda_grid(y_o, basis)) {
                CoefFit candidate = srsw_at(data, lambda);
                const double value = srsw_sure_value(data, candidate, mad, fathers);
                if (value < best) {
                    best = value;
                    fit = std::move(candidate);
                }
            }
            break;
        }
        case Method::SrswOracle: {
            auto grid = sure_lambda_grid(y_o, basis);
            grid.push_back(ctx.qut_sqrt);
            double best = std::numeric_limits<double>::infinity();
            for (double lambda : grid) {
                CoefFit candidate = srsw_at(data, lambda);
                const double loss = data.loss(candidate.mothers);
                if (loss < best) {
                    best = loss;
                    fit = std::move(candidate);
                }
            }
            break;
        }
        case Method::SoftQut: fit = soft_at(data, mad * ctx.qut_ls, mad); break;
        case Method::SoftSure:
        case Method::SoftOracle: {
            auto grid = log_grid(1e-3 * sup, sup, 100);
            if (method == Method::SoftOracle)
                grid.push_back(mad * ctx.qut_ls);
            double best = std::numeric_limits<double>::infinity();
            for (double t : grid) {
                CoefFit candidate = soft_at(data, t, mad);
                const double score = method == Method::SoftOracle
                                         ? data.loss(candidate.mothers)
                                         : srsw_sure_value(data, candidate, mad, fathers);
                if (score < best) {
                    best = score;
                    fit = std::move(candidate);
                }
            }
            break;
        }
        default: throw Error("additive method in univariate study");
        }

        std::vector<std::size_t> estimate;
        for (std::size_t i = 0; i < fit.mothers.size(); ++i)
            if (fit.mothers[i] != 0.0)
                estimate.push_back(i);
        const Rates rates = fdr_tpr(data.truth, estimate);
        RunMetrics m;
        m.run = run_index;
        m.method = method;
        m.fdr = rates.fdr;
        m.tpr = rates.tpr;
        m.mse = data.loss(fit.mothers);
        m.sigma_hat = fit.sigma_hat;
        m.support_size = estimate.size();
        m.true_support_size = data.truth.size();
        m.lambda = fit.lambda;
        m.seconds = seconds_since(start);
        rows.push_back(m);
    }
    return rows;
}

std::vector<RunMetrics> additive_run(const SimulationSpec& spec, std::size_t run_index)
{
    Rng rng(spec.seed, run_index);
    Dataset data;
    data.X = Matrix(spec.n, spec.p);
    for (std::size_t j = 0; j < spec.p; ++j)
        for (double& v : data.X.col(j))
            v = rng.uniform();
    std::vector<double> mu(spec.n, 0.0);
    for (std::size_t j = 0; j < spec.s; ++j) {
        const auto term = scale_to_snr(test_function(kNeedleOrder[j % 4], data.X.col(j)), spec.snr, spec.sigma);
        for (std::size_t i = 0; i < spec.n; ++i)
            mu[i] += term[i];
    }
    data.y.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i)
        data.y[i] = mu[i] + spec.sigma * rng.normal();

    const BlockDesign design(data.X, {spec.family, DesignMode::PureWavelet});
    std::vector<std::size_t> truth(spec.s);
    std::iota(truth.begin(), truth.end(), std::size_t{0});

    const auto qut_start = Clock::now();
    QutConfig config;
    config.alpha = spec.alpha;
    config.mc_samples = spec.mc_samples;
    config.seed = qut_seed(spec.seed, run_index);
    config.threads = 1;
    const QutPair thresholds = qut_pair(design, config);
    const double qut_seconds = seconds_since(qut_start);

    std::vector<RunMetrics> rows;
    for (Method method : spec.methods) {
        if (is_univariate(method))
            throw Error("univariate method in additive study");
        const auto start = Clock::now();
        FitOptions options = spec.fit;
        AdditiveFit fit;
        if (method == Method::SramletQut) {
            fit = fit_bcr(data, design, thresholds.square_root.lambda_qut, LossMode::SquareRoot, options);
        } else {
            options.iterate_sigma = true;
            options.sigma_estimator = spec.amlet_sigma;
            fit = fit_bcr(data, design, thresholds.least_squares.lambda_qut, LossMode::LeastSquares, options);
        }
        const SupportSet support = support_of(fit, design);
        const auto fitted = fitted_values(fit, design);
        double loss = 0.0;
        for (std::size_t i = 0; i < spec.n; ++i)
            loss += (fitted[i] - mu[i]) * (fitted[i] - mu[i]);
        const Rates rates = fdr_tpr(truth, support.indices);
        RunMetrics m;
        m.run = run_index;
        m.method = method;
        m.fdr = rates.fdr;
        m.tpr = rates.tpr;
        m.mse = loss;
        m.sigma_hat = fit.sigma_hat;
        m.support_size = support.size();
        m.true_support_size = truth.size();
        m.lambda = fit.lambda;
        m.seconds = seconds_since(start) + qut_seconds;
        rows.push_back(m);
    }
    return rows;
}

} // namespace

std::vector<RunMetrics> run_study(const SimulationSpec& spec)
{
    spec.validate();
    const bool univariate = std::all_of(spec.methods.begin(), spec.methods.end(), is_univariate);
    const bool additive = std::none_of(spec.methods.begin(), spec.methods.end(), is_univariate);
    if (!univariate && !additive)
        throw Error("cannot mix univariate and additive methods in one study");

    std::vector<std::vector<RunMetrics>> per_run(spec.runs);
    if (univariate) {
        const WaveletBasis basis(spec.family, spec.n, spec.coarsest_level);
        QutConfig config;
        config.alpha = spec.alpha;
        config.mc_samples = spec.mc_samples;
        config.seed = qut_seed(spec.seed, std::numeric_limits<std::uint64_t>::max());
        config.threads = spec.threads;
        // The univariate null statistic does not depend on the sampled x.
        const QutPair thresholds = qut_univariate_pair(basis, config);
        const UnivariateContext ctx{spec, basis, thresholds.square_root.lambda_qut,
                                    thresholds.least_squares.lambda_qut};
        parallel_for(spec.runs, spec.threads, [&](std::size_t r) { per_run[r] = univariate_run(ctx, r); });
    } else {
        parallel_for(spec.runs, spec.threads, [&](std::size_t r) { per_run[r] = additive_run(spec, r); });
    }

    std::vector<RunMetrics> rows;
    for (auto& chunk : per_run)
        rows.insert(rows.end(), chunk.begin(), chunk.end());
    return rows;
}

} // namespace sramlet
