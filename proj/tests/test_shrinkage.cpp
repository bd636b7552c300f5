#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "sramlet/denoise.hpp"
#include "sramlet/error.hpp"
#include "sramlet/lambda_select.hpp"
#include "sramlet/random.hpp"
#include "sramlet/shrinkage.hpp"

using namespace sramlet;

namespace {

double sup_norm(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::size_t nonzeros(std::span<const double> v)
{
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return x != 0.0; }));
}

/// Largest violation of 0 in d/dbeta: (beta - z)/R + lambda * sign(beta),
/// |z_i| / R <= lambda where beta_i = 0, with R the residual norm.
double kkt_violation(std::span<const double> z, double rho, double lambda, std::span<const double> beta)
{
    double r2 = rho * rho;
    for (std::size_t i = 0; i < z.size(); ++i)
        r2 += (z[i] - beta[i]) * (z[i] - beta[i]);
    const double r = std::sqrt(r2);
    if (r == 0.0)
        return 0.0; // full fit: the subdifferential of the norm is the unit ball
    double worst = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double g = (z[i] - beta[i]) / r;
        if (beta[i] != 0.0)
            worst = std::max(worst, std::abs(g - lambda * std::copysign(1.0, beta[i])));
        else
            worst = std::max(worst, std::abs(g) - lambda);
    }
    return worst;
}

} // namespace

TEST_CASE("soft threshold examples")
{
    CHECK(soft_threshold(std::vector<double>{3, -1, 0.5}, 1.0) == std::vector<double>{2, 0, 0});
    const std::vector<double> z{1.5, -2, 0.25};
    CHECK(soft_threshold(z, 0.0) == z);
    CHECK(soft_threshold(z, 2.0) == std::vector<double>{0, 0, 0});
    CHECK(soft_threshold(-3.0, 1.0) == -2.0);
    CHECK_THROWS_AS(soft_threshold(z, -0.1), Error);
}

TEST_CASE("frozen four-coefficient fixture")
{
    // Frozen after agreement of the enumeration and variational oracles.
    const std::vector<double> z{3.0, 1.0, 0.5, 0.1};
    const double kThreshold = 0.5781744669956589;
    const std::vector<double> kBeta{2.4218255330043412, 0.4218255330043411, 0.0, 0.0};
    const double kCost = 2.669814751264641;

    const auto enumerated = oracle::srsw_enumerate(z, 0.0, 0.6);
    const auto variational = oracle::srsw_variational(z, 0.0, 0.6);
    CHECK(max_abs_diff(enumerated.beta, kBeta) < 1e-12);
    CHECK(max_abs_diff(variational, kBeta) < 1e-6);
    CHECK(std::abs(enumerated.cost - kCost) < 1e-12);

    const ShrinkResult r = srsw_solve({z, 0.0, 0.6});
    CHECK(r.regime == Regime::Interior);
    CHECK(r.zeros == 2);
    CHECK(r.threshold == doctest::Approx(kThreshold).epsilon(1e-14));
    CHECK(max_abs_diff(r.beta, kBeta) < 1e-14);
    CHECK(r.objective == doctest::Approx(kCost).epsilon(1e-14));
    CHECK(implicit_sigma(r, 4, 0.6) == doctest::Approx(0.48181205582971576).epsilon(1e-14));
}

TEST_CASE("null and full-fit regimes")
{
    Rng rng(21);
    for (int rep = 0; rep < 50; ++rep) {
        const auto z = oracle::normals(rng, 12);
        const double lambda0 = sup_norm(z) / oracle::norm2(z);
        const ShrinkResult null_fit = srsw_solve({z, 0.0, lambda0 * (1 + 1e-12)});
        CHECK(null_fit.regime == Regime::Null);
        CHECK(nonzeros(null_fit.beta) == 0);
        const ShrinkResult full = srsw_solve({z, 0.0, 1.0 / std::sqrt(12.0)});
        CHECK(full.regime == Regime::FullFit);
        CHECK(full.beta == z);
    }
    const std::vector<double> zero(5, 0.0);
    CHECK(srsw_solve({zero, 0.0, 0.3}).regime == Regime::Null);
    CHECK(srsw_solve({zero, 1.0, 0.3}).regime == Regime::Null);
    // rho > 0 excludes the full fit
    const std::vector<double> z{2.0, -1.0};
    CHECK(srsw_solve({z, 0.5, 0.1}).regime == Regime::Interior);
}

TEST_CASE("invalid problems raise")
{
    const std::vector<double> z{1.0, 2.0};
    CHECK_THROWS_AS(srsw_solve({z, 0.0, 0.0}), Error);
    CHECK_THROWS_AS(srsw_solve({z, 0.0, -1.0}), Error);
    CHECK_THROWS_AS(srsw_solve({z, -0.5, 0.2}), Error);
    const ShrinkResult null_fit = srsw_solve({z, 0.0, 5.0});
    CHECK_THROWS_AS(implicit_sigma(null_fit, 2, 5.0), Error);
}

TEST_CASE("single coefficient with residual energy")
{
    Rng rng(8);
    for (int rep = 0; rep < 200; ++rep) {
        const double rho = 0.1 + 3.0 * rng.uniform();
        const double lambda = 0.05 + 0.9 * rng.uniform();
        const double t = 10.0 * (rng.uniform() - 0.5);
        const std::vector<double> z{t};
        const ShrinkResult r = srsw_solve({z, rho, lambda});
        const double shift = lambda * rho / std::sqrt(1.0 - lambda * lambda);
        const double expected = std::abs(t) > shift ? t - std::copysign(shift, t) : 0.0;
        CHECK(std::abs(r.beta[0] - expected) < 1e-12 * (1.0 + std::abs(t)));
        const auto ref = oracle::srsw_variational(z, rho, lambda);
        CHECK(std::abs(ref[0] - expected) < 1e-8);
    }
}

TEST_CASE("matches the enumeration oracle over all regimes")
{
    Rng rng(31);
    int regimes[3] = {0, 0, 0};
    for (int rep = 0; rep < 150; ++rep) {
        const std::size_t m = 1 + rng.below(10);
        const double rho = std::array<double, 3>{0.0, 0.5, 2.0}[rep % 3];
        auto z = oracle::normals(rng, m, 0.5 + 2.0 * rng.uniform());
        const double lambda0 = sup_norm(z) / std::sqrt(rho * rho + std::pow(oracle::norm2(z), 2));
        const double lambda = lambda0 * (0.05 + 1.1 * rng.uniform());
        const ShrinkResult r = srsw_solve({z, rho, lambda});
        regimes[static_cast<int>(r.regime)]++;
        const auto ref = oracle::srsw_enumerate(z, rho, lambda);
        CHECK(r.objective <= ref.cost + 1e-10);
        CHECK(std::abs(r.objective - oracle::srsw_cost(z, rho, lambda, r.beta)) < 1e-12 * (1 + r.objective));
        CHECK(max_abs_diff(r.beta, ref.beta) < 1e-7);
        CHECK(kkt_violation(z, rho, lambda, r.beta) < 1e-8);
    }
    CHECK(regimes[0] > 0);
    CHECK(regimes[1] > 0);
    CHECK(regimes[2] > 0);
}

TEST_CASE("agrees with the variational oracle")
{
    Rng rng(32);
    for (int rep = 0; rep < 30; ++rep) {
        const auto z = oracle::normals(rng, 8, 2.0);
        const double rho = rep % 2 ? 1.0 : 0.0;
        const double lambda0 = sup_norm(z) / std::sqrt(rho * rho + std::pow(oracle::norm2(z), 2));
        const double lambda = lambda0 * (0.4 + 0.5 * rng.uniform());
        const ShrinkResult r = srsw_solve({z, rho, lambda});
        const auto ref = oracle::srsw_variational(z, rho, lambda);
        CHECK(r.objective <= oracle::srsw_cost(z, rho, lambda, ref) + 1e-9);
        CHECK(max_abs_diff(r.beta, ref) < 1e-5);
    }
}

TEST_CASE("interior solutions are consistent fixed points")
{
    Rng rng(33);
    for (int rep = 0; rep < 300; ++rep) {
        const auto z = oracle::normals(rng, 64);
        const double rho = rep % 2 ? 0.0 : 1.5;
        const double lambda = (0.2 + 0.7 * rng.uniform()) * sup_norm(z) / std::sqrt(rho * rho + std::pow(oracle::norm2(z), 2));
        const ShrinkProblem problem{z, rho, lambda};
        const ShrinkResult r = srsw_solve(problem);
        if (r.regime != Regime::Interior)
            continue;
        const auto zeroed = static_cast<std::size_t>(
            std::count_if(z.begin(), z.end(), [&](double v) { return std::abs(v) <= r.threshold; }));
        CHECK(zeroed == r.zeros);
        CHECK(r.beta == soft_threshold(z, r.threshold));
        const auto points = srsw_fixed_points(problem);
        REQUIRE_FALSE(points.empty());
        CHECK(points.front() == r.zeros);
        if (points.size() > 1)
            MESSAGE("several fixed points for one problem: " << points.size());
        // sigma_hat^2 = RSS / n with RSS over all n coordinates
        double rss = rho * rho;
        for (std::size_t i = 0; i < z.size(); ++i)
            rss += (z[i] - r.beta[i]) * (z[i] - r.beta[i]);
        CHECK(implicit_sigma(r, 80, lambda) == doctest::Approx(std::sqrt(rss / 80.0)).epsilon(1e-10));
    }
}

TEST_CASE("continuity across the null boundary")
{
    Rng rng(34);
    for (int rep = 0; rep < 50; ++rep) {
        const auto z = oracle::normals(rng, 16);
        const double lambda0 = sup_norm(z) / oracle::norm2(z);
        const ShrinkResult below = srsw_solve({z, 0.0, lambda0 * (1 - 1e-9)});
        const ShrinkResult above = srsw_solve({z, 0.0, lambda0 * (1 + 1e-9)});
        CHECK(sup_norm(below.beta) < 1e-8 * oracle::norm2(z));
        CHECK(sup_norm(above.beta) == 0.0);
        CHECK(std::abs(below.objective - above.objective) < 1e-8 * oracle::norm2(z));
    }
}

TEST_CASE("scaling z scales the solution and the implicit sigma")
{
    Rng rng(35);
    const auto z = oracle::normals(rng, 32);
    const double lambda = 0.6 * sup_norm(z) / oracle::norm2(z);
    const ShrinkResult r = srsw_solve({z, 0.0, lambda});
    REQUIRE(r.regime == Regime::Interior);
    std::vector<double> scaled(z);
    for (double& v : scaled)
        v *= 3.5;
    const ShrinkResult s = srsw_solve({scaled, 0.0, lambda});
    CHECK(s.zeros == r.zeros);
    for (std::size_t i = 0; i < z.size(); ++i)
        CHECK(std::abs(s.beta[i] - 3.5 * r.beta[i]) < 1e-12);
    CHECK(implicit_sigma(s, 32, lambda) == doctest::Approx(3.5 * implicit_sigma(r, 32, lambda)).epsilon(1e-12));
}

TEST_CASE("number of zeros is non-decreasing in lambda")
{
    Rng rng(36);
    const auto z = oracle::normals(rng, 100);
    std::size_t previous = 0;
    for (double lambda : log_grid(0.01, 0.4, 60)) {
        const ShrinkResult r = srsw_solve({z, 0.0, lambda});
        const std::size_t zeros = z.size() - nonzeros(r.beta);
        CHECK(zeros >= previous);
        previous = zeros;
    }
}

TEST_CASE("soft-threshold map is Lipschitz in (z, beta)")
{
    Rng rng(37);
    for (int rep = 0; rep < 2000; ++rep) {
        const std::size_t m = 1 + rng.below(20);
        const double lambda = 0.05 + rng.uniform();
        const auto z1 = oracle::normals(rng, m), b1 = oracle::normals(rng, m);
        auto z2 = z1, b2 = b1;
        const double eps = std::pow(10.0, -3.0 * rng.uniform());
        for (std::size_t i = 0; i < m; ++i) {
            z2[i] += eps * rng.normal();
            b2[i] += eps * rng.normal();
        }
        auto map = [&](const std::vector<double>& z, const std::vector<double>& b) {
            std::vector<double> d(m);
            for (std::size_t i = 0; i < m; ++i)
                d[i] = b[i] - z[i];
            return soft_threshold(z, lambda * oracle::norm2(d));
        };
        const auto e1 = map(z1, b1), e2 = map(z2, b2);
        std::vector<double> lhs(m), rhs(2 * m);
        for (std::size_t i = 0; i < m; ++i) {
            lhs[i] = e1[i] - e2[i];
            rhs[i] = z1[i] - z2[i];
            rhs[m + i] = b1[i] - b2[i];
        }
        const double bound = (2.0 + 2.0 * lambda) * std::sqrt(static_cast<double>(m));
        CHECK(oracle::norm2(lhs) <= bound * oracle::norm2(rhs) * (1 + 1e-12));
    }
}

TEST_CASE("group penalty on an orthonormal design is degenerate")
{
    const oracle::Dense X = oracle::haar_matrix(8);
    Rng rng(38);
    for (int rep = 0; rep < 20; ++rep) {
        const auto y = oracle::normals(rng, 8);
        const auto ls = oracle::apply(X, y); // X is its own analysis operator
        const oracle::Dense Xt = oracle::transpose(X);
        const double ny = oracle::norm2(y);
        auto cost = [&](std::span<const double> beta, double lambda) {
            const auto fit = oracle::apply(Xt, beta);
            std::vector<double> r(8);
            for (int i = 0; i < 8; ++i)
                r[i] = y[i] - fit[i];
            return oracle::norm2(r) + lambda * oracle::norm2(beta);
        };
        for (double lambda : {0.5, 1.0, 2.0}) {
            CHECK(std::abs(cost(ls, lambda) - lambda * ny) < 1e-10);
            CHECK(std::abs(cost(std::vector<double>(8, 0.0), lambda) - ny) < 1e-10);
            // random candidates never beat min(1, lambda) ||y||
            for (int k = 0; k < 200; ++k) {
                auto beta = oracle::normals(rng, 8, rng.uniform());
                CHECK(cost(beta, lambda) >= std::min(1.0, lambda) * ny - 1e-10);
            }
        }
        for (double k : {0.1, 0.37, 0.5, 0.9}) {
            std::vector<double> mix(ls);
            for (double& v : mix)
                v *= k;
            CHECK(std::abs(cost(mix, 1.0) - ny) < 1e-10);
            CHECK(cost(mix, 0.5) > 0.5 * ny + 1e-3);
            CHECK(cost(mix, 2.0) > ny + 1e-3);
        }
    }
}

TEST_CASE("MAD sigma")
{
    Rng rng(39);
    const WaveletBasis b(WaveletFamily::Haar, 1024, 3);
    double acc = 0.0;
    for (int rep = 0; rep < 100; ++rep)
        acc += mad_sigma(oracle::normals(rng, 1024, 2.0), b);
    CHECK(std::abs(acc / 100.0 - 2.0) < 0.2);

    auto y = oracle::normals(rng, 1024);
    const double base = mad_sigma(y, b);
    std::vector<double> scaled(y), shifted(y);
    for (double& v : scaled)
        v *= 4.0;
    for (double& v : shifted)
        v += 7.0;
    CHECK(mad_sigma(scaled, b) == doctest::Approx(4.0 * base).epsilon(1e-12));
    CHECK(mad_sigma(shifted, b) == doctest::Approx(base).epsilon(1e-10));
    CHECK_THROWS_AS(mad_sigma(std::vector<double>(4, 1.0), WaveletBasis(WaveletFamily::Haar, 4)), Error);
}

TEST_CASE("SURE at the extremes of the penalty")
{
    Rng rng(40);
    const WaveletBasis b(WaveletFamily::Haar, 64, 3);
    const auto y = oracle::normals(rng, 64);
    const CoefVector c = analyze(y, b);
    const double sigma = 1.3;
    const double nz = oracle::norm2(c.mother());

    const SureTerms full = sure_terms(y, b, 1.0 / std::sqrt(56.0) * 0.999, sigma);
    CHECK(full.shrink.regime == Regime::FullFit);
    CHECK(full.rss < 1e-20);
    CHECK(full.dof == 64);
    CHECK(full.sure == doctest::Approx(64 * sigma * sigma).epsilon(1e-12));

    const double lambda0 = sup_norm(c.mother()) / nz;
    const SureTerms null_fit = sure_terms(y, b, lambda0 * 1.0001, sigma);
    CHECK(null_fit.dof == 8);
    CHECK(null_fit.sure == doctest::Approx(nz * nz + 2 * sigma * sigma * 8 - 64 * sigma * sigma).epsilon(1e-12));
    CHECK(sure(y, b, lambda0 * 1.0001, sigma) == null_fit.sure);
    CHECK_THROWS_AS(sure(y, b, 0.1, 0.0), Error);
}

TEST_CASE("SURE curve degrees of freedom")
{
    Rng rng(41);
    const WaveletBasis b(WaveletFamily::Haar, 256, 3);
    std::vector<double> x(256), y(256);
    for (std::size_t i = 0; i < 256; ++i) {
        x[i] = rng.uniform();
        y[i] = (x[i] > 0.4 ? 3.0 : 0.0) + rng.normal();
    }
    const SureSelection sel = select_sure(x, y, b);
    const SureCurve& curve = sel.curve;
    REQUIRE(curve.lambdas.size() == 100);
    CHECK(curve.rss.size() == 100);
    CHECK(curve.sure.size() == 100);
    const auto yo = permutation_of(x).gather(y);
    for (std::size_t k = 0; k < curve.lambdas.size(); ++k) {
        if (k > 0)
            CHECK(curve.dof[k] <= curve.dof[k - 1]);
        const SureTerms t = sure_terms(yo, b, curve.lambdas[k], sel.sigma);
        CHECK(curve.dof[k] == b.father_count() + nonzeros(t.shrink.beta));
        CHECK(curve.sure[k] == doctest::Approx(t.sure));
    }
    const auto best = std::min_element(curve.sure.begin(), curve.sure.end()) - curve.sure.begin();
    CHECK(sel.lambda == curve.lambdas[static_cast<std::size_t>(best)]);
    CHECK(curve.argmin_lambda == sel.lambda);
    CHECK(sel.sigma == doctest::Approx(mad_sigma(yo, b)));
}

TEST_CASE("denoise at a penalty above the null threshold keeps only fathers")
{
    Rng rng(42);
    const WaveletBasis b(WaveletFamily::Haar, 128, 3);
    std::vector<double> x(128), y(128);
    for (std::size_t i = 0; i < 128; ++i) {
        x[i] = rng.uniform();
        y[i] = std::sin(6 * x[i]) + rng.normal();
    }
    const auto perm = permutation_of(x);
    const double lambda0 = univariate_zero_threshold(perm.gather(y), b);
    const DenoiseResult res = denoise_univariate(x, y, b, rule::Fixed{lambda0 * 1.01});
    CoefVector fathers = analyze(perm.gather(y), b);
    std::fill(fathers.mother().begin(), fathers.mother().end(), 0.0);
    const auto expected = perm.scatter(synthesize(fathers, b));
    CHECK(max_abs_diff(res.fitted, expected) < 1e-12);
    CHECK(res.shrink.regime == Regime::Null);
}

TEST_CASE("sparse signal in faint noise recovers its support")
{
    Rng rng(17);
    const WaveletBasis b(WaveletFamily::Haar, 256, 3);
    CoefVector truth{8, std::vector<double>(256, 0.0)};
    truth.values[0] = 5.0;
    for (std::size_t k : {9u, 20u, 77u, 130u, 201u})
        truth.values[k] = (k % 2 ? 4.0 : -3.0);
    auto signal = synthesize(truth, b);
    std::vector<double> x(256);
    for (std::size_t i = 0; i < 256; ++i) {
        x[i] = (static_cast<double>(i) + 0.5) / 256.0;
        signal[i] += 0.01 * rng.normal();
    }
    // exact data has zero residual and every subset fits it
    const double lambda = 1.5 * std::sqrt(2.0 * std::log(256.0)) / 16.0;
    const DenoiseResult res = denoise_univariate(x, signal, b, rule::Fixed{lambda});
    for (std::size_t k = 8; k < 256; ++k)
        CHECK((res.coefs.values[k] != 0.0) == (truth.values[k] != 0.0));
}

TEST_CASE("oracle rule never loses to the candidates it scans")
{
    Rng rng(43);
    const WaveletBasis b(WaveletFamily::Haar, 256, 3);
    std::vector<double> x(256), mu(256), y(256);
    for (std::size_t i = 0; i < 256; ++i) {
        x[i] = rng.uniform();
        mu[i] = x[i] > 0.3 ? 2.0 : -1.0;
        y[i] = mu[i] + rng.normal();
    }
    const double extra = 0.12345;
    const DenoiseResult best = denoise_univariate(x, y, b, rule::Oracle{mu, {extra}});
    auto loss = [&](const DenoiseResult& r) {
        double acc = 0.0;
        for (std::size_t i = 0; i < 256; ++i)
            acc += (r.fitted[i] - mu[i]) * (r.fitted[i] - mu[i]);
        return acc;
    };
    CHECK(loss(best) <= loss(denoise_at(x, y, b, extra)));
    CHECK(loss(best) <= loss(denoise_univariate(x, y, b, rule::Sure{})) + 1e-12);
}
