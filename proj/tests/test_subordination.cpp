#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ipn/errors.hpp"
#include "ipn/subordination.hpp"
#include "models.hpp"
#include "oracles.hpp"

using namespace ipn;

TEST(ModelParams, Validation)
{
    EXPECT_THROW((ModelParams{0.0, 1.0, MeasureSpec::point_mass(1.0)}.validate()), ValidationError);
    EXPECT_NO_THROW((ModelParams{0.0, 1.0, MeasureSpec::point_mass(1.0)}.validate(true)));
    EXPECT_THROW((ModelParams{-1.0, 1.0, MeasureSpec::point_mass(1.0)}.validate()), ValidationError);
    EXPECT_THROW((ModelParams{1.0, 0.0, MeasureSpec::point_mass(1.0)}.validate()), ValidationError);
    EXPECT_THROW((ModelParams{1.0, 1.5, MeasureSpec::point_mass(1.0)}.validate()), ValidationError);
    EXPECT_THROW(SubordinationMap(ModelParams{1.0, 1.0, MeasureSpec{}}), ValidationError);
}

TEST(Phi, ClosedFormValues)
{
    EXPECT_NEAR(phi(models::delta2_half(), 0.5), 5.0 / 9.0, 1e-15);
    EXPECT_NEAR(phi(models::delta1(), 4.0), 64.0 / 9.0, 1e-14);
    for (double x : {-3.0, -0.5, 0.3, 3.5, 10.0}) EXPECT_NEAR(phi(models::delta1(), x), oracle::phi_delta1(x), 1e-12 * std::max(1.0, std::abs(x)));
    const ModelParams noiseless{0.0, 0.5, MeasureSpec::point_mass(2.0)};
    EXPECT_EQ(phi(noiseless, 0.7), 0.7);
    EXPECT_THROW((void)phi(models::delta1(), 1.0), DomainError);
}

TEST(Phi, DerivativeValues)
{
    EXPECT_NEAR(phi_prime(models::delta2_half(), 0.5), 5.0 / 27.0, 1e-15);
    EXPECT_NEAR(phi_prime(models::delta1(), 2.0), -4.0, 1e-14);
    for (double x : {-3.0, 0.3, 2.5, 3.5, 10.0}) EXPECT_NEAR(phi_prime(models::delta1(), x), oracle::phi_prime_delta1(x), 1e-12 * std::max(1.0, x * x));
}

TEST(Phi, DerivativeMatchesFiniteDifferences)
{
    for (const auto& [name, p] : models::all()) {
        const SubordinationMap map(p);
        for (double x : models::outside_grid(map.support(), 40)) {
            const double u = map.omega(x);
            const double h = 1e-6;
            const double fd = (phi(p, u + h) - phi(p, u - h)) / (2 * h);
            EXPECT_NEAR(phi_prime(p, u), fd, 1e-6 * std::max(1.0, std::abs(fd))) << name << " u=" << u;
        }
    }
}

TEST(AdmissibleSet, PointMassUnitNoise)
{
    const auto e = admissible_set(models::delta1());
    ASSERT_EQ(e.p(), 1u);
    EXPECT_NEAR(e.u[0], 0.0, 1e-10);
    EXPECT_NEAR(e.v[0], 3.0, 1e-10);
}

TEST(AdmissibleSet, GConditionCrossing)
{
    const auto p = models::delta2_half();
    EXPECT_NEAR(g_condition_crossing(p, -std::numeric_limits<double>::infinity(), 2.0), 1.5, 1e-10);
    const auto e = admissible_set(p);
    ASSERT_EQ(e.p(), 1u);
    EXPECT_LE(e.u[0], 1.5);
    EXPECT_GE(e.u[0], 0.6);
}

TEST(AdmissibleSet, PointMassHalfRatioMatchesOracle)
{
    const oracle::PointMix d2{{1.0}, {2.0}};
    auto f = [&](long double x) { return oracle::phi_prime_atoms(d2, 1.0, 0.5, x); };
    const double u1 = oracle::bisect(f, 0.6L, 1.5L - 1e-9L);
    const double v1 = oracle::bisect(f, 2.0L + 1e-6L, 10.0L);
    // A dense sign grid confirms a single sign change on each side.
    int changes_left = 0, changes_right = 0;
    for (int i = 0; i < 100000; ++i) {
        const long double a = -1.0L + 2.5L * i / 100000.0L, b = a + 2.5L / 100000.0L;
        if (b < 1.5L && (f(a) > 0) != (f(b) > 0)) ++changes_left;
        const long double c = 2.0001L + 8.0L * i / 100000.0L, d = c + 8.0L / 100000.0L;
        if ((f(c) > 0) != (f(d) > 0)) ++changes_right;
    }
    EXPECT_EQ(changes_left, 1);
    EXPECT_EQ(changes_right, 1);

    const auto e = admissible_set(models::delta2_half());
    EXPECT_NEAR(e.u[0], u1, 1e-10);
    EXPECT_NEAR(e.v[0], v1, 1e-10);
    EXPECT_NEAR(e.u[0], 0.679988266556706, 1e-10);
    EXPECT_NEAR(e.v[0], 3.75233217679821, 1e-10);
}

TEST(AdmissibleSet, SmallNoiseHugsTheAtoms)
{
    const auto e = admissible_set(models::two_atoms_half(1e-4));
    ASSERT_EQ(e.p(), 2u);
    EXPECT_LT(e.u[0], 1.0);
    EXPECT_GT(e.v[0], 1.0);
    EXPECT_LT(e.u[1], 5.0);
    EXPECT_GT(e.v[1], 5.0);
    for (std::size_t l = 0; l < 2; ++l) EXPECT_LT(e.v[l] - e.u[l], 1e-3);
}

TEST(AdmissibleSet, BoundaryStructure)
{
    for (const auto& [name, p] : models::all()) {
        const auto e = admissible_set(p);
        const auto& comps = p.nu.support().intervals;
        for (std::size_t l = 0; l < e.p(); ++l) {
            EXPECT_LT(e.u[l], e.v[l]) << name;
            if (l > 0) EXPECT_LT(e.v[l - 1], e.u[l]) << name;
            const bool meets = std::any_of(comps.begin(), comps.end(), [&](const Interval& iv) { return iv.lo <= e.v[l] && e.u[l] <= iv.hi; });
            EXPECT_TRUE(meets) << name << " component " << l;
        }
        for (const auto& iv : comps) {
            EXPECT_FALSE(e.contains(iv.lo)) << name;
            EXPECT_FALSE(e.contains(iv.hi)) << name;
        }
    }
}

TEST(AdmissibleSet, AgreesWithPointwiseDefinition)
{
    std::mt19937_64 rng(5);
    for (const auto& [name, p] : models::all()) {
        const auto e = admissible_set(p);
        std::uniform_real_distribution<double> pick(e.u.front() - 3.0, e.v.back() + 3.0);
        for (int i = 0; i < 2000; ++i) {
            const double u = pick(rng);
            if (e.boundary_distance(u) < 1e-6 || p.nu.support().distance(u) < 1e-9) continue;
            EXPECT_EQ(e.contains(u), satisfies_admissibility(p, u)) << name << " u=" << u;
        }
    }
}

TEST(Support, PointMassUnitNoise)
{
    const auto s = support(models::delta1());
    ASSERT_EQ(s.intervals.size(), 1u);
    EXPECT_NEAR(s.intervals[0].lo, 0.0, 1e-8);
    EXPECT_NEAR(s.intervals[0].hi, 27.0 / 4.0, 1e-8);
    EXPECT_TRUE(s.zero_in_support);
}

TEST(Support, ZeroMembership)
{
    EXPECT_FALSE(zero_in_support({1.0, 1.0, MeasureSpec::point_mass(2.0)}));
    EXPECT_TRUE(zero_in_support(models::delta1()));
    EXPECT_TRUE(zero_in_support(models::zero_and_segment()));
    EXPECT_FALSE(zero_in_support({1.0, 0.5, MeasureSpec::point_mass(1.0)}));
    EXPECT_FALSE(support({1.0, 1.0, MeasureSpec::point_mass(2.0)}).zero_in_support);
    for (const auto& [name, p] : models::all())
        if (p.c < 1.0) EXPECT_FALSE(support(p).zero_in_support) << name;
}

TEST(Support, TwoAtomsSplitIntoTwoIntervals)
{
    const auto s = support(models::two_atoms_half());
    ASSERT_EQ(s.intervals.size(), 2u);
    EXPECT_LT(s.intervals[0].hi, s.intervals[1].lo);
    EXPECT_FALSE(s.zero_in_support);
}

TEST(Support, IntervalsAreSeparatedAndPositiveWhenRatioBelowOne)
{
    for (const auto& [name, p] : models::all()) {
        const auto s = support(p);
        ASSERT_EQ(s.intervals.size(), s.boundaries.p()) << name;
        for (std::size_t l = 0; l < s.intervals.size(); ++l) {
            EXPECT_LT(s.intervals[l].lo, s.intervals[l].hi) << name;
            if (l > 0) EXPECT_LT(s.intervals[l - 1].hi, s.intervals[l].lo) << name;
        }
        if (p.c < 1.0) EXPECT_GT(s.intervals[0].lo, 0.0) << name;
    }
}

TEST(Omega, ClosedFormValues)
{
    const SubordinationMap d1(models::delta1());
    EXPECT_NEAR(d1.omega(8.0), 3.0 + std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(d1.omega(64.0 / 9.0), 4.0, 1e-11);
    const SubordinationMap d2(models::delta2_half());
    EXPECT_NEAR(d2.omega(5.0 / 9.0), 0.5, 1e-12);
    EXPECT_NEAR(omega(models::delta2_half(), 5.0 / 9.0), 0.5, 1e-12);
}

TEST(Omega, RejectsPointsInsideSupport)
{
    const SubordinationMap d1(models::delta1());
    EXPECT_THROW((void)d1.omega(3.0), DomainError);
    EXPECT_THROW((void)d1.omega(0.0), DomainError);
    EXPECT_NO_THROW((void)d1.omega(-0.1));
}

TEST(SubordinationProperties, InversePairAndMonotoneOmega)
{
    for (const auto& [name, p] : models::all()) {
        const SubordinationMap map(p);
        double prev = -std::numeric_limits<double>::infinity();
        for (double x : models::outside_grid(map.support(), 40)) {
            const double w = map.omega(x);
            EXPECT_TRUE(map.admissible().contains(w)) << name;
            EXPECT_LE(std::abs(map.phi(w) - x), 1e-9 * std::max(1.0, std::abs(x))) << name << " x=" << x;
            EXPECT_GT(w, prev) << name;
            prev = w;
        }
    }
}

TEST(SubordinationProperties, PhiIncreasesAcrossComponentsOfE)
{
    for (const auto& [name, p] : models::all()) {
        const SubordinationMap map(p);
        double prev = -std::numeric_limits<double>::infinity();
        for (double u : models::sample_admissible(map.admissible(), 30)) {
            const double v = map.phi(u);
            EXPECT_GT(v, prev) << name << " u=" << u;
            EXPECT_GT(map.support().distance(v), 0.0) << name;
            prev = v;
        }
    }
}

TEST(SubordinationProperties, SmallerNoiseEnlargesE)
{
    for (const auto& [name, p] : models::all()) {
        const auto e = admissible_set(p);
        ModelParams half = p;
        half.sigma = p.sigma / 2.0;
        for (double u : models::sample_admissible(e, 40))
            EXPECT_TRUE(satisfies_admissibility(half, u)) << name << " u=" << u;
    }
}

TEST(KTransform, IdentityWithAuxiliaryModel)
{
    const auto p = models::delta2_half();
    const KTransform k(p);
    const SubordinationMap map(p);
    EXPECT_NEAR(k(k.auxiliary().phi(0.5)), 5.0 / 9.0, 1e-7);
    for (double u : models::sample_admissible(map.admissible(), 10, 1e-2)) {
        if (!k.auxiliary().admissible().contains(u)) continue;
        EXPECT_NEAR(k(k.auxiliary().phi(u)), map.phi(u), 1e-7 * std::max(1.0, std::abs(map.phi(u)))) << u;
    }
}

TEST(KTransform, AsymptoteAndDomain)
{
    const KTransform k(models::delta2_half());
    EXPECT_NEAR(k(1e6) / 1e6, 1.0, 1e-4);
    EXPECT_NEAR(k_transform(models::uniform_thin(), 1e6) / 1e6, 1.0, 1e-4);
    const double inside = 0.5 * (k.auxiliary().support().intervals[0].lo + k.auxiliary().support().intervals[0].hi);
    EXPECT_THROW((void)k(inside), DomainError);
    EXPECT_THROW(KTransform(models::delta1()), DomainError);
}
