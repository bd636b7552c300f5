#include "sramlet/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sramlet/error.hpp"
#include "sramlet/lambda_select.hpp"

namespace sramlet {

namespace {

struct Ordered
{
    Permutation perm;
    std::vector<double> y;
    CoefVector coefs;
};

Ordered prepare(std::span<const double> x, std::span<const double> y, const WaveletBasis& basis)
{
    if (x.size() != y.size())
        throw Error("x and y lengths differ");
    if (y.size() != basis.size())
        throw Error("data length " + std::to_string(y.size()) + " does not match basis length " +
                    std::to_string(basis.size()));
    Ordered o{permutation_of(x), {}, {}};
    o.y = o.perm.gather(y);
    o.coefs = analyze(o.y, basis);
    return o;
}

DenoiseResult reconstruct(const Ordered& o, const WaveletBasis& basis, double lambda)
{
    DenoiseResult out;
    out.lambda = lambda;
    out.shrink = srsw_solve({o.coefs.mother(), 0.0, lambda});
    out.coefs = o.coefs;
    std::copy(out.shrink.beta.begin(), out.shrink.beta.end(), out.coefs.mother().begin());
    out.fitted = o.perm.scatter(synthesize(out.coefs, basis));
    return out;
}

} // namespace

DenoiseResult denoise_at(std::span<const double> x, std::span<const double> y, const WaveletBasis& basis,
                         double lambda)
{
    return reconstruct(prepare(x, y, basis), basis, lambda);
}

DenoiseResult denoise_univariate(std::span<const double> x, std::span<const double> y,
                                 const WaveletBasis& basis, const DenoiseRule& rule)
{
    const Ordered o = prepare(x, y, basis);
    if (const auto* fixed = std::get_if<rule::Fixed>(&rule))
        return reconstruct(o, basis, fixed->lambda);
    if (const auto* q = std::get_if<rule::Qut>(&rule)) {
        const QutResult res = qut_univariate(basis, {q->alpha, q->mc_samples, q->seed});
        return reconstruct(o, basis, res.lambda_qut);
    }
    if (const auto* s = std::get_if<rule::Sure>(&rule)) {
        const SureSelection sel = select_sure(x, y, basis, s->sigma);
        return reconstruct(o, basis, sel.lambda);
    }
    const auto& oracle = std::get<rule::Oracle>(rule);
    if (oracle.mu.size() != y.size())
        throw Error("oracle mean has the wrong length");
    std::vector<double> grid = sure_lambda_grid(o.y, basis);
    grid.insert(grid.end(), oracle.extra_lambdas.begin(), oracle.extra_lambdas.end());
    DenoiseResult best;
    double best_loss = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        DenoiseResult candidate = reconstruct(o, basis, lambda);
        double loss = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double d = candidate.fitted[i] - oracle.mu[i];
            loss += d * d;
        }
        if (loss < best_loss) {
            best_loss = loss;
            best = std::move(candidate);
        }
    }
    return best;
}

} // namespace sramlet
