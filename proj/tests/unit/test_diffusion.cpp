#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <sausage/diffusion.hpp>
#include <sausage/numerics.hpp>

using namespace sausage;

namespace {

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size())
    {
        double const x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST(BrownianPath, ShapeAndReproducibility)
{
    auto const p = sample_bm_path<3>(1.0, 1.0, RngSpec{42, 0});
    ASSERT_EQ(p.points.size(), 2u);
    EXPECT_EQ(p.points[0], (Point<3>{0, 0, 0}));
    auto const q = sample_bm_path<3>(1.0, 1.0, RngSpec{42, 0});
    EXPECT_EQ(p.points, q.points);
    // increments are the engine's standard normals scaled by sqrt(dt)
    Rng rng(RngSpec{42, 0});
    for (int k = 0; k < 3; ++k)
        EXPECT_EQ(p.points[1][k], 0.0 + rng.normal());
    auto const other = sample_bm_path<3>(1.0, 1.0, RngSpec{42, 1});
    EXPECT_NE(p.points, other.points);
}

TEST(BrownianPath, RejectsBadTimes)
{
    EXPECT_THROW(sample_bm_path<2>(0.0, 0.1, RngSpec{1, 0}), PreconditionError);
    EXPECT_THROW(sample_bm_path<2>(1.0, 0.0, RngSpec{1, 0}), PreconditionError);
    EXPECT_THROW(sample_bm_path<2>(1.0, -0.1, RngSpec{1, 0}), PreconditionError);
}

TEST(BrownianPath, SecondMomentIsDimTimesT)
{
    numerics::RunningStats s;
    for (std::uint64_t i = 0; i < 10000; ++i)
    {
        auto const p = sample_bm_path<3>(1.0, 0.1, RngSpec{3, i});
        s.add(norm_sq<3>(p.points.back()));
    }
    EXPECT_NEAR(s.mean(), 3.0, 3 * s.stderr_mean());
}

TEST(RadialPath, ConstantOneIsBitwiseBrownian)
{
    auto const one = RadialMetricProfile::constant(1.0);
    auto const a = sample_radial_path<3>(one, 2.0, 0.01, RngSpec{9, 4}, {0.5, 0, 0});
    auto const b = sample_bm_path<3>(2.0, 0.01, RngSpec{9, 4}, {0.5, 0, 0});
    EXPECT_EQ(a.points, b.points);
}

TEST(RadialPath, ConstantFourQuartersTheSecondMoment)
{
    auto const four = RadialMetricProfile::constant(4.0);
    numerics::RunningStats s;
    for (std::uint64_t i = 0; i < 10000; ++i)
    {
        auto const p = sample_radial_path<3>(four, 1.0, 0.1, RngSpec{5, i});
        s.add(norm_sq<3>(p.points.back()));
    }
    EXPECT_NEAR(s.mean(), 0.75, 3 * s.stderr_mean());
}

TEST(RadialPath, ConstantFourMatchesBrownianAtQuarterTime)
{
    auto const four = RadialMetricProfile::constant(4.0);
    std::vector<double> a, b;
    std::size_t const n = 5000;
    for (std::uint64_t i = 0; i < n; ++i)
    {
        auto const p = sample_radial_path<3>(four, 1.0, 0.01, RngSpec{6, i});
        a.push_back(std::sqrt(norm_sq<3>(p.points.back())));
        auto const q = sample_bm_path<3>(0.25, 0.01, RngSpec{7, i});
        b.push_back(std::sqrt(norm_sq<3>(q.points.back())));
    }
    // critical value at the 1% level
    double const crit = 1.628 * std::sqrt(2.0 / static_cast<double>(n));
    EXPECT_LT(ks_statistic(a, b), crit);
}

TEST(RadialPath, DriftVanishesOnPlateausAndMatchesFormula)
{
    RadialMetricProfile const p({10.0, 20.0});
    RadialStepper<3> const s(p, 0.01);
    EXPECT_EQ(s.drift(0.0), 0.0);
    EXPECT_EQ(s.drift(5.0), 0.0);
    EXPECT_EQ(s.drift(15.0), 0.0);
    EXPECT_EQ(s.drift(25.0), 0.0);
    for (double r : {9.2, 9.5, 19.7})
    {
        double const h = 1e-6;
        double const g = p.value(r);
        double const dg = (p.value(r + h) - p.value(r - h)) / (2 * h);
        EXPECT_NEAR(s.drift(r), dg / (4 * g * g), 1e-7);
    }
    RadialStepper<2> const s2(p, 0.01);
    EXPECT_EQ(s2.drift(9.5), 0.0);
}

TEST(RadialPath, PlateauStepIsScaledBrownian)
{
    RadialMetricProfile const p({10.0, 20.0});
    RadialStepper<3> const s(p, 0.04);
    Point<3> x{15.0, 0.0, 0.0};
    Rng rng(RngSpec{8, 0});
    s.advance(x, rng);
    Rng ref(RngSpec{8, 0});
    double const dx = 0.5 * (0.2 * ref.normal());
    EXPECT_DOUBLE_EQ(x[0], 15.0 + dx);
}

TEST(GasketWalk, ValidDeterministicVertices)
{
    GasketGraph const g;
    auto const w = sample_gasket_walk(g, 5000, RngSpec{1, 2});
    auto const v = sample_gasket_walk(g, 5000, RngSpec{1, 2});
    EXPECT_EQ(w.vertices, v.vertices);
    ASSERT_EQ(w.steps(), 5000u);
    for (std::size_t i = 0; i + 1 < w.vertices.size(); ++i)
    {
        auto const nb = g.neighbors(w.vertices[i]);
        EXPECT_NE(std::find(nb.begin(), nb.end(), w.vertices[i + 1]), nb.end());
    }
    EXPECT_THROW(sample_gasket_walk(g, 0, RngSpec{1, 2}), PreconditionError);
}

TEST(GasketWalk, StepIsUniformOverNeighbors)
{
    GasketGraph const g;
    GasketVertex const v{1, 0};
    auto const nb = g.neighbors(v);
    ASSERT_EQ(nb.count, 4);
    std::vector<int> counts(4, 0);
    int const n = 8000;
    Rng rng(RngSpec{77, 0});
    for (int i = 0; i < n; ++i)
    {
        auto const w = gasket_step(g, v, rng);
        counts[static_cast<std::size_t>(std::find(nb.begin(), nb.end(), w) - nb.begin())]++;
    }
    double chi2 = 0.0;
    for (int c : counts)
        chi2 += (c - n / 4.0) * (c - n / 4.0) / (n / 4.0);
    EXPECT_LT(chi2, 16.27);  // 3 dof at 0.1%
}

TEST(GasketWalk, DisplacementExponent)
{
    GasketGraph const g;
    std::vector<double> logn, logr;
    std::vector<numerics::RunningStats> stats(6);
    std::size_t const walks = 300;
    std::vector<std::size_t> marks;
    for (int k = 0; k < 6; ++k)
        marks.push_back(std::size_t{1} << (6 + 2 * k));
    for (std::uint64_t i = 0; i < walks; ++i)
    {
        Rng rng(RngSpec{2024, i});
        GasketVertex v = GasketGraph::origin();
        std::size_t m = 0;
        for (std::size_t n = 1; n <= marks.back(); ++n)
        {
            v = gasket_step(g, v, rng);
            if (n == marks[m])
                stats[m++].add(v.euclidean_norm() * v.euclidean_norm());
        }
    }
    for (std::size_t m = 0; m < marks.size(); ++m)
    {
        logn.push_back(std::log(static_cast<double>(marks[m])));
        logr.push_back(0.5 * std::log(stats[m].mean()));
    }
    auto const fit = numerics::weighted_line_fit(logn, logr, {});
    EXPECT_NEAR(fit.b, std::log(2.0) / std::log(5.0), 0.05);
}

TEST(HittingTime, InclusiveStrictAndCrossing)
{
    SampledPath<2> p;
    p.step = 0.5;
    p.points = {{0, 0}, {3, 0}, {1, 0}, {0.2, 0}};
    EXPECT_EQ(hitting_time<2>(p, {0, 0}, 1.0), 0.0);
    EXPECT_EQ(hitting_time<2>(p, {0, 0}, 1.0, HittingMode::strict), 1.5);
    EXPECT_EQ(hitting_time<2>(p, {3, 0.5}, 1.0), 0.5);
    EXPECT_FALSE(hitting_time<2>(p, {10, 10}, 1.0).has_value());
    EXPECT_THROW(hitting_time<2>(p, {0, 0}, 0.0), PreconditionError);
}

TEST(ExitTime, GridCases)
{
    SampledPath<3> p;
    p.step = 0.25;
    p.points = {{0, 0, 0}, {0.5, 0, 0}, {2, 0, 0}};
    EXPECT_EQ(exit_time<3>(p, 1.0), 0.5);
    EXPECT_FALSE(exit_time<3>(p, 5.0).has_value());
    SampledPath<3> jump{SpaceDescriptor::euclidean(3), 0.1, {{0, 0, 0}, {3, 0, 0}}};
    EXPECT_EQ(exit_time<3>(jump, 1.0), 0.1);
}

TEST(ExitTime, MeanFromBallAgreesWithFineOracle)
{
    // Oracle: E tau = E|B_tau|^2 / d = R^2 / d by optional stopping, checked
    // against a fine time step that shrinks the overshoot bias.
    auto mean_exit = [](double dt, std::uint64_t seed, std::size_t n) {
        BrownianStepper<3> const s(dt);
        numerics::RunningStats stats;
        for (std::uint64_t i = 0; i < n; ++i)
        {
            Rng rng(RngSpec{seed, i});
            Point<3> x{};
            std::size_t k = 0;
            while (norm_sq<3>(x) < 1.0)
            {
                s.advance(x, rng);
                ++k;
            }
            stats.add(static_cast<double>(k) * dt);
        }
        return stats;
    };
    auto const fine = mean_exit(1e-4, 31, 2000);
    auto const coarse = mean_exit(1e-3, 32, 2000);
    EXPECT_NEAR(fine.mean(), 1.0 / 3.0, 3 * fine.stderr_mean() + 0.02);
    double const se = std::hypot(fine.stderr_mean(), coarse.stderr_mean());
    EXPECT_NEAR(coarse.mean(), fine.mean(), 3 * se + 0.03);
}

TEST(StepCount, RoundsAndValidates)
{
    EXPECT_EQ(step_count(1.0, 0.1), 10u);
    EXPECT_EQ(step_count(0.3, 0.1), 3u);
    EXPECT_THROW(step_count(0.05, 0.1), PreconditionError);
}
