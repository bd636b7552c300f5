#include "sramlet/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sramlet/denoise.hpp"
#include "sramlet/error.hpp"
#include "sramlet/io.hpp"
#include "sramlet/lambda_select.hpp"
#include "sramlet/random.hpp"
#include "sramlet/simulation.hpp"
#include "sramlet/solver.hpp"

namespace sramlet {

namespace {

double parse_number(const std::string& text, const std::string& what)
{
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(value))
        throw Error("invalid " + what + " '" + text + "'");
    return value;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            items.push_back(item);
    return items;
}

SigmaEstimator parse_sigma_estimator(const std::string& name)
{
    if (name == "mad")
        return SigmaEstimator::Mad;
    if (name == "rms")
        return SigmaEstimator::RootMeanSquare;
    throw Error("unknown sigma estimator '" + name + "' (expected mad or rms)");
}

struct FitArgs
{
    std::string data, response, out;
    std::string lambda = "qut";
    double alpha = 0.05;
    std::string basis = "daub4", mode = "wavelet", loss = "sqrt";
    std::size_t mc = 1000;
    std::uint64_t seed = 0;
    bool subsample = false;
    std::size_t max_sweeps = 200;
    double tol = 1e-8;
    unsigned threads = 0;
};

struct PredictArgs
{
    std::string model, data, out;
};

struct QutArgs
{
    std::string data, response, out;
    double alpha = 0.05;
    std::size_t mc = 1000;
    std::uint64_t seed = 0;
    std::string basis = "daub4", mode = "wavelet", loss = "sqrt";
    bool subsample = false;
    unsigned threads = 0;
};

struct DenoiseArgs
{
    std::string data, out;
    std::string x = "x", y = "y";
    std::string rule = "qut";
    std::string basis = "haar";
    unsigned coarsest = 3;
    double alpha = 0.05;
    std::size_t mc = 1000;
    std::uint64_t seed = 0;
};

struct SimulateArgs
{
    std::size_t n = 1024, p = 1;
    std::size_t s = 0; // 0: min(4, p)
    double snr = 3.0, sigma = 1.0;
    std::size_t runs = 100;
    std::uint64_t seed = 0;
    std::string methods;
    std::string basis;
    unsigned coarsest = 3;
    double alpha = 0.05;
    std::size_t mc = 1000;
    std::string out;
    bool timing = false;
    std::string amlet_sigma = "mad";
    unsigned threads = 0;
};

int run_fit(const FitArgs& a, std::ostream& out, std::ostream& err)
{
    const Dataset data = load_csv(a.data, a.response, {a.subsample, a.seed});
    const DesignOptions options{parse_family(a.basis), parse_mode(a.mode)};
    const BlockDesign design(data.X, options);
    const LossMode loss = parse_loss(a.loss);
    const ZeroThresholds zero = zero_thresholds(data.y, design);
    const double lambda_zero = loss == LossMode::SquareRoot ? zero.square_root : zero.least_squares;

    FitOptions fit_options;
    fit_options.max_sweeps = a.max_sweeps;
    fit_options.tol = a.tol;
    ModelInfo info;
    info.lambda_zero = lambda_zero;
    double lambda = 0.0;
    if (a.lambda == "qut") {
        QutConfig config;
        config.alpha = a.alpha;
        config.mc_samples = a.mc;
        config.seed = a.seed;
        config.statistic = loss;
        config.threads = a.threads;
        const QutResult res = qut(design, config);
        lambda = res.lambda_qut;
        // the least-squares quantile is in units of sigma
        fit_options.iterate_sigma = loss == LossMode::LeastSquares;
        info.rule = "qut";
        info.alpha = a.alpha;
        info.mc_samples = a.mc;
        info.seed = a.seed;
        info.generator = res.generator;
    } else if (a.lambda == "sure") {
        throw Error("the sure rule is only available for univariate denoising; use --lambda qut or a number");
    } else {
        lambda = parse_number(a.lambda, "lambda");
        if (lambda < 0.0)
            throw Error("lambda must be non-negative");
    }

    const AdditiveFit fit = fit_bcr(data, design, lambda, loss, fit_options);
    const SupportSet support = support_of(fit, design);
    if (!fit_options.iterate_sigma && lambda >= lambda_zero)
        err << "warning: lambda " << format_double(lambda) << " >= zero threshold " << format_double(lambda_zero)
            << "; the fitted model is empty\n";
    save_model(a.out, fit, design, data.names, info);

    out << "lambda " << format_double(lambda) << "\n";
    out << "lambda_zero " << format_double(lambda_zero) << "\n";
    out << "intercept " << format_double(fit.intercept) << "\n";
    out << "sweeps " << fit.sweeps << (fit.converged ? " (converged)" : " (not converged)") << "\n";
    out << "objective " << format_double(fit.objective) << "\n";
    out << "sigma_hat " << format_double(fit.sigma_hat) << "\n";
    out << "support";
    for (std::size_t j : support.indices)
        out << ' ' << data.names[j];
    out << "\n";
    return 0;
}

int run_predict(const PredictArgs& a, std::ostream& out)
{
    const ModelFile model = load_model(a.model);
    const CsvTable table = read_csv(a.data);
    const std::size_t p = model.names.size();
    Matrix X(table.rows(), p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto it = std::find(table.header.begin(), table.header.end(), model.names[j]);
        if (it == table.header.end()) {
            if (model.design->has_covariate(j))
                throw Error("column '" + model.names[j] + "' used by the model is missing from '" + a.data + "'");
            continue; // inactive covariate: never evaluated
        }
        const auto& col = table.columns[static_cast<std::size_t>(it - table.header.begin())];
        std::copy(col.begin(), col.end(), X.col(j).begin());
    }
    const std::vector<std::vector<double>> columns{predict(model.fit, *model.design, X)};
    const std::vector<std::string> header{"prediction"};
    write_csv(a.out, header, columns);
    out << "wrote " << table.rows() << " predictions to " << a.out << "\n";
    return 0;
}

int run_qut(const QutArgs& a, std::ostream& out)
{
    const Dataset data = load_csv(a.data, a.response, {a.subsample, a.seed});
    const BlockDesign design(data.X, {parse_family(a.basis), parse_mode(a.mode)});
    QutConfig config;
    config.alpha = a.alpha;
    config.mc_samples = a.mc;
    config.seed = a.seed;
    config.statistic = parse_loss(a.loss);
    config.threads = a.threads;
    const QutResult res = qut(design, config);
    const double observed = zero_threshold(data, design, config.statistic);
    if (!a.out.empty()) {
        const std::vector<std::vector<double>> columns{res.samples};
        const std::vector<std::string> header{"lambda_zero"};
        write_csv(a.out, header, columns);
    }
    out << "lambda_qut " << format_double(res.lambda_qut) << "\n";
    out << "lambda_zero_observed " << format_double(observed) << "\n";
    out << "alpha " << format_double(res.alpha) << "\n";
    out << "mc " << res.samples.size() << "\n";
    out << "seed " << res.seed << "\n";
    out << "generator " << res.generator << "\n";
    return 0;
}

DenoiseRule parse_denoise_rule(const DenoiseArgs& a)
{
    if (a.rule == "qut")
        return rule::Qut{a.alpha, a.mc, a.seed};
    if (a.rule == "sure")
        return rule::Sure{};
    if (a.rule.rfind("lambda=", 0) == 0) {
        const double lambda = parse_number(a.rule.substr(7), "lambda");
        if (lambda < 0.0)
            throw Error("lambda must be non-negative");
        return rule::Fixed{lambda};
    }
    throw Error("unknown rule '" + a.rule + "' (expected qut, sure or lambda=<value>)");
}

int run_denoise(const DenoiseArgs& a, std::ostream& out)
{
    const CsvTable table = read_csv(a.data);
    const auto& x = table.columns[table.column_index(a.x)];
    const auto& y = table.columns[table.column_index(a.y)];
    if (!is_power_of_two(x.size()))
        throw Error("'" + a.data + "' has " + std::to_string(x.size()) + " rows; the sample size must be a power of two");
    const WaveletBasis basis(parse_family(a.basis), x.size(), a.coarsest);
    const DenoiseResult res = denoise_univariate(x, y, basis, parse_denoise_rule(a));

    const std::vector<std::vector<double>> columns{x, y, res.fitted};
    const std::vector<std::string> header{"x", "y", "fitted"};
    write_csv(a.out, header, columns);

    std::size_t nonzero = 0;
    for (double v : res.coefs.mother())
        nonzero += v != 0.0;
    out << "lambda " << format_double(res.lambda) << "\n";
    out << "regime "
        << (res.shrink.regime == Regime::Null ? "null" : res.shrink.regime == Regime::FullFit ? "full" : "interior")
        << "\n";
    out << "threshold " << format_double(res.shrink.threshold) << "\n";
    out << "fathers " << basis.father_count() << "\n";
    out << "nonzero_mothers " << nonzero << " of " << basis.mother_count() << "\n";
    if (res.shrink.regime == Regime::Interior)
        out << "sigma_hat " << format_double(implicit_sigma(res.shrink, x.size(), res.lambda)) << "\n";
    const auto fathers = res.coefs.father();
    out << "father_coefficients";
    for (double v : fathers)
        out << ' ' << format_double(v);
    out << "\n";
    return 0;
}

int run_simulate(const SimulateArgs& a, std::ostream& out)
{
    SimulationSpec spec = a.p > 1 ? additive_study(a.n, a.p, a.runs, a.seed) : univariate_study(a.runs, a.seed);
    spec.n = a.n;
    spec.p = a.p;
    spec.s = a.s ? a.s : std::min<std::size_t>(4, a.p);
    spec.snr = a.snr;
    spec.sigma = a.sigma;
    spec.alpha = a.alpha;
    spec.mc_samples = a.mc;
    spec.coarsest_level = a.p > 1 ? 0 : a.coarsest;
    spec.threads = a.threads;
    spec.amlet_sigma = parse_sigma_estimator(a.amlet_sigma);
    if (!a.basis.empty())
        spec.family = parse_family(a.basis);
    if (!a.methods.empty()) {
        spec.methods.clear();
        for (const auto& name : split_list(a.methods))
            spec.methods.push_back(parse_method(name));
    }
    const auto rows = run_study(spec);

    std::ofstream file(a.out);
    if (!file)
        throw Error("cannot write '" + a.out + "'");
    file << "run,method,fdr,tpr,mse,sigma_hat,support_size,seconds\n";
    for (const RunMetrics& m : rows)
        file << m.run << ',' << to_string(m.method) << ',' << format_double(m.fdr) << ',' << format_double(m.tpr)
             << ',' << format_double(m.mse) << ',' << format_double(m.sigma_hat) << ',' << m.support_size << ','
             << format_double(a.timing ? m.seconds : 0.0) << '\n';
    if (!file)
        throw Error("write to '" + a.out + "' failed");

    for (Method method : spec.methods) {
        double fdr = 0.0, tpr = 0.0, mse = 0.0;
        std::size_t count = 0;
        for (const RunMetrics& m : rows)
            if (m.method == method) {
                fdr += m.fdr;
                tpr += m.tpr;
                mse += m.mse;
                ++count;
            }
        const double k = static_cast<double>(count);
        out << to_string(method) << " mean_fdr " << format_double(fdr / k) << " mean_tpr "
            << format_double(tpr / k) << " mean_mse " << format_double(mse / k) << "\n";
    }
    return 0;
}

} // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Sparse additive wavelet regression with square-root penalties", "sramlet"};
    app.require_subcommand(1);

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit an additive model and save it");
    fit_cmd->add_option("--data", fit.data, "CSV file with a header row")->required();
    fit_cmd->add_option("--response", fit.response, "response column name")->required();
    fit_cmd->add_option("--lambda", fit.lambda, "qut or a positive number")->capture_default_str();
    fit_cmd->add_option("--alpha", fit.alpha, "QUT level")->capture_default_str();
    fit_cmd->add_option("--basis", fit.basis, "daub4 or haar")->capture_default_str();
    fit_cmd->add_option("--mode", fit.mode, "wavelet or composite")->capture_default_str();
    fit_cmd->add_option("--loss", fit.loss, "sqrt or ls")->capture_default_str();
    fit_cmd->add_option("--mc", fit.mc, "Monte Carlo draws for QUT")->capture_default_str();
    fit_cmd->add_option("--seed", fit.seed, "seed for QUT and --subsample")->capture_default_str();
    fit_cmd->add_flag("--subsample", fit.subsample, "use a random subset of largest power-of-two size");
    fit_cmd->add_option("--max-sweeps", fit.max_sweeps, "sweep limit")->capture_default_str();
    fit_cmd->add_option("--tol", fit.tol, "relative objective tolerance")->capture_default_str();
    fit_cmd->add_option("--threads", fit.threads, "0: THREADS env or all cores");
    fit_cmd->add_option("--out", fit.out, "model file to write")->required();

    PredictArgs pred;
    auto* pred_cmd = app.add_subcommand("predict", "evaluate a saved model on new rows");
    pred_cmd->add_option("--model", pred.model, "model file")->required();
    pred_cmd->add_option("--data", pred.data, "CSV with the model's covariate columns")->required();
    pred_cmd->add_option("--out", pred.out, "predictions CSV")->required();

    QutArgs q;
    auto* qut_cmd = app.add_subcommand("qut", "quantile universal threshold for a design");
    qut_cmd->add_option("--data", q.data, "CSV file with a header row")->required();
    qut_cmd->add_option("--response", q.response, "response column name")->required();
    qut_cmd->add_option("--alpha", q.alpha, "QUT level")->capture_default_str();
    qut_cmd->add_option("--mc", q.mc, "Monte Carlo draws")->capture_default_str();
    qut_cmd->add_option("--seed", q.seed, "seed")->capture_default_str();
    qut_cmd->add_option("--basis", q.basis, "daub4 or haar")->capture_default_str();
    qut_cmd->add_option("--mode", q.mode, "wavelet or composite")->capture_default_str();
    qut_cmd->add_option("--loss", q.loss, "null statistic: sqrt or ls")->capture_default_str();
    qut_cmd->add_flag("--subsample", q.subsample, "use a random subset of largest power-of-two size");
    qut_cmd->add_option("--threads", q.threads, "0: THREADS env or all cores");
    qut_cmd->add_option("--out", q.out, "CSV of the simulated zero thresholds");

    DenoiseArgs d;
    auto* den_cmd = app.add_subcommand("denoise", "univariate square-root soft-waveshrink");
    den_cmd->add_option("--data", d.data, "CSV with x and y columns")->required();
    den_cmd->add_option("--x", d.x, "covariate column")->capture_default_str();
    den_cmd->add_option("--y", d.y, "response column")->capture_default_str();
    den_cmd->add_option("--rule", d.rule, "qut, sure or lambda=<value>")->capture_default_str();
    den_cmd->add_option("--basis", d.basis, "haar or daub4")->capture_default_str();
    den_cmd->add_option("--coarsest", d.coarsest, "coarsest level j0 (2^j0 fathers)")->capture_default_str();
    den_cmd->add_option("--alpha", d.alpha, "QUT level")->capture_default_str();
    den_cmd->add_option("--mc", d.mc, "Monte Carlo draws for QUT")->capture_default_str();
    den_cmd->add_option("--seed", d.seed, "seed")->capture_default_str();
    den_cmd->add_option("--out", d.out, "fitted CSV")->required();

    SimulateArgs s;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study");
    sim_cmd->add_option("--n", s.n, "sample size (power of two)")->capture_default_str();
    sim_cmd->add_option("--p", s.p, "covariates; 1 runs the univariate study")->capture_default_str();
    sim_cmd->add_option("--s", s.s, "active covariates (default min(4, p))");
    sim_cmd->add_option("--snr", s.snr, "signal to noise ratio")->capture_default_str();
    sim_cmd->add_option("--sigma", s.sigma, "noise sd")->capture_default_str();
    sim_cmd->add_option("--runs", s.runs, "replicates")->capture_default_str();
    sim_cmd->add_option("--seed", s.seed, "seed")->capture_default_str();
    sim_cmd->add_option("--methods", s.methods, "comma-separated method list");
    sim_cmd->add_option("--basis", s.basis, "override the wavelet family");
    sim_cmd->add_option("--coarsest", s.coarsest, "coarsest level for univariate methods")->capture_default_str();
    sim_cmd->add_option("--alpha", s.alpha, "QUT level")->capture_default_str();
    sim_cmd->add_option("--mc", s.mc, "Monte Carlo draws for QUT")->capture_default_str();
    sim_cmd->add_option("--amlet-sigma", s.amlet_sigma, "AMlet noise estimate: mad or rms")->capture_default_str();
    sim_cmd->add_flag("--timing", s.timing, "record wall-clock seconds (output is then not reproducible)");
    sim_cmd->add_option("--threads", s.threads, "0: THREADS env or all cores");
    sim_cmd->add_option("--out", s.out, "results CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (fit_cmd->parsed())
            return run_fit(fit, out, err);
        if (pred_cmd->parsed())
            return run_predict(pred, out);
        if (qut_cmd->parsed())
            return run_qut(q, out);
        if (den_cmd->parsed())
            return run_denoise(d, out);
        if (sim_cmd->parsed())
            return run_simulate(s, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace sramlet
