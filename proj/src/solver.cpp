#include "sramlet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sramlet/error.hpp"
#include "sramlet/shrinkage.hpp"

namespace sramlet {

std::string_view to_string(LossMode mode)
{
    return mode == LossMode::LeastSquares ? "ls" : "sqrt";
}

LossMode parse_loss(std::string_view name)
{
    if (name == "sqrt")
        return LossMode::SquareRoot;
    if (name == "ls")
        return LossMode::LeastSquares;
    throw Error("unknown loss '" + std::string(name) + "' (expected sqrt or ls)");
}

std::vector<double> SparseCoefs::dense(std::size_t size) const
{
    std::vector<double> out(size, 0.0);
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= size)
            throw Error("coefficient index out of range");
        out[index[i]] = value[i];
    }
    return out;
}

double SparseCoefs::l1() const noexcept
{
    double acc = 0.0;
    for (double v : value)
        acc += std::abs(v);
    return acc;
}

namespace {

double squared_norm(std::span<const double> v)
{
    double acc = 0.0;
    for (double x : v)
        acc += x * x;
    return acc;
}

double mean_of(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_inplace(std::vector<double>& v)
{
    const auto half = static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), v.begin() + half, v.end());
    double median = v[static_cast<std::size_t>(half)];
    if (v.size() % 2 == 0)
        median = 0.5 * (median + *std::max_element(v.begin(), v.begin() + half));
    return median;
}

void check_design(const Dataset& data, const BlockDesign& design)
{
    data.validate();
    if (design.n() != data.n() || design.p() != data.p())
        throw Error("design shape does not match dataset");
}

SparseCoefs sparsify(std::span<const double> beta)
{
    SparseCoefs out;
    for (std::size_t i = 0; i < beta.size(); ++i) {
        if (beta[i] != 0.0) {
            out.index.push_back(static_cast<std::uint32_t>(i));
            out.value.push_back(beta[i]);
        }
    }
    return out;
}

struct BlockState
{
    std::vector<double> beta; // empty means all zero
    double l1 = 0.0;
};

class BcrRunner
{
public:
    BcrRunner(const Dataset& data, const BlockDesign& design, double lambda, LossMode loss,
              const FitOptions& options)
        : data_(data)
        , design_(design)
        , lambda_(lambda)
        , loss_(loss)
        , options_(options)
        , n_(data.n())
        , resid_(data.y)
        , states_(design.blocks().size())
        , ordered_(n_)
        , scratch_(n_)
        , z_(n_)
        , beta_new_(n_)
    {}

    AdditiveFit run()
    {
        AdditiveFit fit;
        fit.lambda = lambda_;
        fit.loss = loss_;

        // Intercept first, then sweeps of (all blocks, intercept).
        intercept_ = 0.0;
        update_intercept();
        const bool iterate = loss_ == LossMode::LeastSquares && options_.iterate_sigma;
        double sigma = residual_sigma();
        threshold_ = iterate ? lambda_ * sigma : lambda_;

        double previous = current_objective();
        record(fit, previous);
        for (std::size_t sweep = 1; sweep <= options_.max_sweeps; ++sweep) {
            for (std::size_t k = 0; k < states_.size(); ++k) {
                update_block(k);
                if (options_.record_trace)
                    record(fit, current_objective());
            }
            update_intercept();
            l1_ = 0.0;
            for (const auto& s : states_)
                l1_ += s.l1;
            double current = current_objective();
            record(fit, current);
            fit.sweeps = sweep;

            double sigma_change = 0.0;
            if (iterate) {
                const double next_sigma = residual_sigma();
                sigma_change = std::abs(next_sigma - sigma) / std::max(next_sigma, tiny());
                sigma = next_sigma;
                threshold_ = lambda_ * sigma;
                current = current_objective();
            }
            const double change = std::abs(previous - current) / std::max(std::abs(current), tiny());
            previous = current;
            if (change < options_.tol && sigma_change < options_.tol) {
                fit.converged = true;
                break;
            }
        }

        fit.intercept = intercept_;
        fit.coefs.reserve(states_.size());
        for (const auto& s : states_)
            fit.coefs.push_back(s.beta.empty() ? SparseCoefs{} : sparsify(s.beta));
        fit.objective = previous;
        fit.sigma_hat = iterate ? residual_sigma() : std::sqrt(squared_norm(resid_) / static_cast<double>(n_));
        fit.effective_threshold = threshold_;
        return fit;
    }

private:
    static double tiny() { return std::numeric_limits<double>::min(); }

    void record(AdditiveFit& fit, double value) const
    {
        if (options_.record_trace)
            fit.trace.push_back(value);
    }

    double residual_sigma() const
    {
        if (options_.sigma_estimator == SigmaEstimator::RootMeanSquare)
            return std::sqrt(squared_norm(resid_) / static_cast<double>(n_));
        std::vector<double> dev(resid_);
        const double center = median_inplace(dev);
        for (double& d : dev)
            d = std::abs(d - center);
        return median_inplace(dev) / 0.6745;
    }

    double current_objective() const
    {
        const double r2 = squared_norm(resid_);
        if (loss_ == LossMode::SquareRoot)
            return std::sqrt(r2) + lambda_ * l1_;
        return 0.5 * r2 + threshold_ * l1_;
    }

    void update_intercept()
    {
        const double shift = mean_of(resid_);
        intercept_ += shift;
        for (double& r : resid_)
            r -= shift;
    }

    // Solves the block subproblem for (z, rho) into beta_new_[0, size).
    void solve_block(std::size_t size, double rho2)
    {
        const std::span<const double> z(z_.data(), size);
        const std::span<double> beta(beta_new_.data(), size);
        if (loss_ == LossMode::SquareRoot) {
            srsw_solve({z, std::sqrt(std::max(0.0, rho2)), lambda_}, beta, sort_buffer_);
        } else {
            for (std::size_t i = 0; i < size; ++i)
                beta[i] = soft_threshold(z[i], threshold_);
        }
    }

    void update_block(std::size_t k)
    {
        const Block& blk = design_.block(k);
        const Permutation& perm = design_.permutation(blk.covariate);
        BlockState& state = states_[k];
        const std::size_t size = design_.block_size(k);

        if (blk.kind == BlockKind::Linear) {
            const auto u = design_.linear_column(blk.covariate);
            if (u.empty())
                return;
            double zr = 0.0;
            for (std::size_t r = 0; r < n_; ++r)
                zr += u[r] * resid_[perm[r]];
            const double old = state.beta.empty() ? 0.0 : state.beta[0];
            z_[0] = zr + old;
            const double rj2 = squared_norm(resid_) + 2.0 * old * zr + old * old;
            solve_block(1, rj2 - z_[0] * z_[0]);
            const double delta = beta_new_[0] - old;
            if (delta != 0.0) {
                for (std::size_t r = 0; r < n_; ++r)
                    resid_[perm[r]] -= delta * u[r];
            }
            store(state, 1);
            return;
        }

        const WaveletBasis& basis = design_.basis(blk.family);
        perm.gather(resid_, ordered_);
        analyze_inplace(ordered_, basis, scratch_);
        const std::size_t fathers = basis.father_count();
        double rho2 = 0.0;
        for (std::size_t i = 0; i < fathers; ++i)
            rho2 += ordered_[i] * ordered_[i];
        for (std::size_t i = 0; i < size; ++i)
            z_[i] = ordered_[fathers + i] + (state.beta.empty() ? 0.0 : state.beta[i]);
        solve_block(size, rho2);

        bool changed = false;
        std::fill_n(ordered_.begin(), fathers, 0.0);
        for (std::size_t i = 0; i < size; ++i) {
            const double delta = beta_new_[i] - (state.beta.empty() ? 0.0 : state.beta[i]);
            ordered_[fathers + i] = delta;
            changed |= delta != 0.0;
        }
        if (changed) {
            synthesize_inplace(ordered_, basis, scratch_);
            for (std::size_t r = 0; r < n_; ++r)
                resid_[perm[r]] -= ordered_[r];
        }
        store(state, size);
    }

    void store(BlockState& state, std::size_t size)
    {
        double l1 = 0.0;
        for (std::size_t i = 0; i < size; ++i)
            l1 += std::abs(beta_new_[i]);
        if (l1 == 0.0) {
            state.beta.clear();
        } else {
            state.beta.assign(beta_new_.begin(), beta_new_.begin() + static_cast<std::ptrdiff_t>(size));
        }
        l1_ += l1 - state.l1;
        state.l1 = l1;
    }

    const Dataset& data_;
    const BlockDesign& design_;
    double lambda_;
    LossMode loss_;
    FitOptions options_;
    std::size_t n_;

    double intercept_ = 0.0;
    double threshold_ = 0.0;
    double l1_ = 0.0;
    std::vector<double> resid_;
    std::vector<BlockState> states_;
    std::vector<double> ordered_;
    std::vector<double> scratch_;
    std::vector<double> z_;
    std::vector<double> beta_new_;
    std::vector<double> sort_buffer_;
};

} // namespace

ZeroThresholds zero_thresholds(std::span<const double> y, const BlockDesign& design)
{
    const std::size_t n = design.n();
    if (y.size() != n)
        throw Error("response length does not match design");
    const double ybar = mean_of(y);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i)
        centered[i] = y[i] - ybar;
    const double denom = std::sqrt(squared_norm(centered));
    const double scale = std::sqrt(squared_norm(y));
    if (!(denom > 1e-14 * scale))
        throw Error("degenerate response: y is constant");

    std::vector<double> ordered(n), coefs(n), scratch(n);
    std::size_t gathered = std::numeric_limits<std::size_t>::max();
    double sup = 0.0;
    for (std::size_t k = 0; k < design.blocks().size(); ++k) {
        const Block& blk = design.block(k);
        if (blk.covariate != gathered) {
            design.permutation(blk.covariate).gather(centered, ordered);
            gathered = blk.covariate;
        }
        if (blk.kind == BlockKind::Linear) {
            const auto u = design.linear_column(blk.covariate);
            double dot = 0.0;
            for (std::size_t r = 0; r < u.size(); ++r)
                dot += u[r] * ordered[r];
            sup = std::max(sup, std::abs(dot));
            continue;
        }
        const WaveletBasis& basis = design.basis(blk.family);
        std::copy(ordered.begin(), ordered.end(), coefs.begin());
        analyze_inplace(coefs, basis, scratch);
        for (std::size_t i = basis.father_count(); i < n; ++i)
            sup = std::max(sup, std::abs(coefs[i]));
    }
    return {sup / denom, sup};
}

double zero_threshold(std::span<const double> y, const BlockDesign& design, LossMode statistic)
{
    const ZeroThresholds both = zero_thresholds(y, design);
    return statistic == LossMode::SquareRoot ? both.square_root : both.least_squares;
}

double zero_threshold(const Dataset& data, const BlockDesign& design, LossMode statistic)
{
    check_design(data, design);
    return zero_threshold(data.y, design, statistic);
}

AdditiveFit fit_bcr(const Dataset& data, const BlockDesign& design, double lambda, LossMode loss,
                    const FitOptions& options)
{
    check_design(data, design);
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error("penalty must be positive, got " + std::to_string(lambda));
    if (options.max_sweeps == 0)
        throw Error("max_sweeps must be at least 1");
    return BcrRunner(data, design, lambda, loss, options).run();
}

SupportSet support_of(const AdditiveFit& fit, const BlockDesign& design)
{
    if (fit.coefs.size() != design.blocks().size())
        throw Error("fit does not match design");
    std::vector<bool> active(design.p(), false);
    for (std::size_t k = 0; k < fit.coefs.size(); ++k)
        if (!fit.coefs[k].empty())
            active[design.block(k).covariate] = true;
    SupportSet support;
    for (std::size_t j = 0; j < active.size(); ++j)
        if (active[j])
            support.indices.push_back(j);
    return support;
}

AdditivePredictor make_predictor(const AdditiveFit& fit, const BlockDesign& design)
{
    if (fit.coefs.size() != design.blocks().size())
        throw Error("fit does not match design");
    AdditivePredictor predictor;
    predictor.intercept = fit.intercept;
    predictor.p = design.p();
    std::size_t k = 0;
    const auto blocks = design.blocks();
    while (k < blocks.size()) {
        const std::size_t covariate = blocks[k].covariate;
        CovariateTerm term;
        term.covariate = covariate;
        for (; k < blocks.size() && blocks[k].covariate == covariate; ++k) {
            if (fit.coefs[k].empty())
                continue;
            const auto contribution = design.block_contribution(k, fit.coefs[k].dense(design.block_size(k)));
            if (term.values.empty()) {
                term.values = contribution;
            } else {
                for (std::size_t r = 0; r < contribution.size(); ++r)
                    term.values[r] += contribution[r];
            }
        }
        if (!term.values.empty()) {
            const auto xs = design.sorted_values(covariate);
            term.sorted_x.assign(xs.begin(), xs.end());
            predictor.terms.push_back(std::move(term));
        }
    }
    return predictor;
}

double evaluate_term(const CovariateTerm& term, double x)
{
    const auto& xs = term.sorted_x;
    const auto& v = term.values;
    if (x <= xs.front())
        return v.front();
    if (x >= xs.back())
        return v.back();
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    if (xs[hi] == x)
        return v[hi];
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return v[lo] + w * (v[hi] - v[lo]);
}

std::vector<double> predict(const AdditivePredictor& predictor, const Matrix& X)
{
    if (X.cols() != predictor.p)
        throw Error("prediction matrix has " + std::to_string(X.cols()) + " columns, model expects " +
                    std::to_string(predictor.p));
    std::vector<double> out(X.rows(), predictor.intercept);
    for (std::size_t i = 0; i < X.rows(); ++i)
        for (const auto& term : predictor.terms)
            out[i] += evaluate_term(term, X(i, term.covariate));
    return out;
}

std::vector<double> predict(const AdditiveFit& fit, const BlockDesign& design, const Matrix& X)
{
    return predict(make_predictor(fit, design), X);
}

std::vector<double> fitted_values(const AdditiveFit& fit, const BlockDesign& design)
{
    const AdditivePredictor predictor = make_predictor(fit, design);
    std::vector<double> out(design.n(), predictor.intercept);
    for (const auto& term : predictor.terms) {
        const Permutation& perm = design.permutation(term.covariate);
        for (std::size_t r = 0; r < term.values.size(); ++r)
            out[perm[r]] += term.values[r];
    }
    return out;
}

double objective(const AdditiveFit& fit, const Dataset& data, const BlockDesign& design, double lambda)
{
    check_design(data, design);
    const auto fitted = fitted_values(fit, design);
    double r2 = 0.0;
    for (std::size_t i = 0; i < fitted.size(); ++i) {
        const double r = data.y[i] - fitted[i];
        r2 += r * r;
    }
    double l1 = 0.0;
    for (const auto& c : fit.coefs)
        l1 += c.l1();
    if (fit.loss == LossMode::SquareRoot)
        return std::sqrt(r2) + lambda * l1;
    return 0.5 * r2 + lambda * l1;
}

} // namespace sramlet
