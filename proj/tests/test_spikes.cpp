#include <gtest/gtest.h>

#include <cmath>

#include "ipn/errors.hpp"
#include "ipn/spikes.hpp"
#include "models.hpp"
#include "oracles.hpp"

using namespace ipn;

namespace {

SpikeSpec spikes(std::vector<double> thetas)
{
    return SpikeSpec{thetas, std::vector<std::size_t>(thetas.size(), 1)};
}

}  // namespace

TEST(SpikeSpec, Validation)
{
    const auto nu = MeasureSpec::point_mass(1.0);
    EXPECT_NO_THROW(spikes({4.0, 2.0}).validate(nu));
    EXPECT_THROW(spikes({2.0, 4.0}).validate(nu), DomainError);
    EXPECT_THROW(spikes({4.0, 4.0}).validate(nu), DomainError);
    EXPECT_THROW(spikes({1.0}).validate(nu), DomainError);
    EXPECT_THROW(spikes({-1.0}).validate(nu), DomainError);
    EXPECT_THROW((SpikeSpec{{4.0}, {0}}.validate(nu)), DomainError);
    EXPECT_THROW((SpikeSpec{{4.0}, {1, 2}}.validate(nu)), DomainError);
    EXPECT_EQ((SpikeSpec{{4.0, 2.0}, {2, 3}}.r()), 5u);
}

TEST(Classify, OutlierAboveThePointMassModel)
{
    const auto out = classify(models::delta1(), spikes({4.0}), 1000);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].case_tag, SpikeCase::Outlier);
    EXPECT_NEAR(out[0].limit, 64.0 / 9.0, 1e-12);
    EXPECT_NEAR(out[0].limit, oracle::phi_delta1(4.0), 1e-12);
    EXPECT_EQ(out[0].rank_start, 1u);
    EXPECT_EQ(out[0].rank_end(), 1u);
    EXPECT_FALSE(out[0].alpha);
}

TEST(Classify, StickingToTheRightEdge)
{
    const auto out = classify(models::delta1(), spikes({2.0}), 1000);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].case_tag, SpikeCase::RightEdge);
    EXPECT_NEAR(out[0].limit, 6.75, 1e-8);
}

TEST(Classify, StickingToZero)
{
    const auto out = classify(models::delta1(), spikes({0.5}), 1000);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].case_tag, SpikeCase::Zero);
    EXPECT_EQ(out[0].limit, 0.0);
    EXPECT_EQ(out[0].rank_start, 1000u);
}

TEST(Classify, MixedPacketsAndRanks)
{
    const SpikeSpec s{{4.0, 2.0, 0.5}, {2, 1, 3}};
    const auto out = classify(models::delta1(), s, 1000);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].rank_start, 1u);
    EXPECT_EQ(out[0].rank_end(), 2u);
    EXPECT_EQ(out[1].rank_start, 3u);
    EXPECT_EQ(out[2].rank_start, 998u);
    EXPECT_EQ(out[2].rank_end(), 1000u);
}

TEST(Classify, LeftEdgeOfTheUpperInterval)
{
    const SubordinationMap map(models::two_atoms_half());
    const auto& e = map.admissible();
    ASSERT_EQ(e.p(), 2u);
    const double theta = 0.5 * (e.u[1] + 5.0);
    const auto out = classify(map, spikes({theta}), 1000);
    EXPECT_EQ(out[0].case_tag, SpikeCase::LeftEdge);
    EXPECT_EQ(out[0].limit, map.support().intervals[1].lo);
    // 499 entries at 5 sit above theta.
    EXPECT_EQ(out[0].rank_start, 1u + 499u);
}

TEST(Classify, QuantileBetweenTwoAtoms)
{
    const auto p = models::two_atoms_half(1.2);
    const auto map = std::make_shared<const SubordinationMap>(p);
    ASSERT_EQ(map->support().intervals.size(), 1u);
    const SpectralDistribution dist(map);
    const auto out = classify(*map, spikes({3.0}), 1001, &dist);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].case_tag, SpikeCase::Quantile);
    ASSERT_TRUE(out[0].alpha);
    EXPECT_DOUBLE_EQ(*out[0].alpha, 0.5);
    EXPECT_NEAR(dist.cdf(out[0].limit), 0.5, 1e-4);
    const auto& iv = map->support().intervals[0];
    EXPECT_GT(out[0].limit, iv.lo);
    EXPECT_LT(out[0].limit, iv.hi);
    EXPECT_EQ(out[0].rank_start, 501u);
}

TEST(Classify, AmbiguousNearABoundaryOfE)
{
    const auto e = admissible_set(models::delta1());
    EXPECT_THROW((void)classify(models::delta1(), spikes({e.v[0]}), 100), AmbiguousSpike);
    EXPECT_THROW((void)classify(models::delta1(), spikes({e.v[0] + 5e-10}), 100), AmbiguousSpike);
    EXPECT_NO_THROW((void)classify(models::delta1(), spikes({e.v[0] + 1e-6}), 100));
}

TEST(Classify, RejectsTooManySpikes)
{
    EXPECT_THROW((void)classify(models::delta1(), SpikeSpec{{4.0}, {5}}, 3), DomainError);
    EXPECT_THROW((void)classify(models::delta1(), spikes({2.0, 4.0}), 100), DomainError);
}

TEST(SpikeProperties, EdgeLimitsAreSupportBoundariesBitForBit)
{
    for (const auto& [name, p] : models::all()) {
        const auto map = std::make_shared<const SubordinationMap>(p);
        const auto& e = map->admissible();
        std::vector<double> thetas;
        for (std::size_t l = 0; l < e.p(); ++l) {
            // Just inside each end of [u_l, v_l], away from supp(nu).
            for (double t : {e.u[l] + 1e-4 * (e.v[l] - e.u[l]), e.v[l] - 1e-4 * (e.v[l] - e.u[l])})
                if (t > 0.0 && p.nu.support().distance(t) > 0.0) thetas.push_back(t);
        }
        std::sort(thetas.rbegin(), thetas.rend());
        if (thetas.empty()) continue;
        const SpectralDistribution dist(map);
        const auto out = classify(*map, spikes(thetas), 1000, &dist);
        for (const auto& o : out) {
            const auto l = static_cast<std::size_t>(std::ranges::upper_bound(e.u, o.theta) - e.u.begin()) - 1;
            const auto& iv = map->support().intervals[l];
            switch (o.case_tag) {
                case SpikeCase::RightEdge: EXPECT_EQ(o.limit, iv.hi) << name; break;
                case SpikeCase::LeftEdge: EXPECT_EQ(o.limit, iv.lo) << name; break;
                case SpikeCase::Zero: EXPECT_EQ(o.limit, 0.0) << name; break;
                case SpikeCase::Quantile:
                    EXPECT_GT(o.limit, iv.lo) << name;
                    EXPECT_LT(o.limit, iv.hi) << name;
                    EXPECT_NEAR(dist.cdf(o.limit), *o.alpha, 1e-4) << name;
                    break;
                case SpikeCase::Outlier: ADD_FAILURE() << name << " theta " << o.theta << " is inside [u, v]"; break;
            }
        }
    }
}

TEST(SpikeProperties, OutliersAreOutsideTheSupportAndIncreasing)
{
    for (const auto& [name, p] : models::all()) {
        const SubordinationMap map(p);
        std::vector<double> thetas;
        for (double u : models::sample_admissible(map.admissible(), 12, 1e-2))
            if (u > 0.0) thetas.push_back(u);
        std::sort(thetas.rbegin(), thetas.rend());
        const auto out = classify(map, spikes(thetas), 2000);
        for (std::size_t i = 0; i < out.size(); ++i) {
            EXPECT_EQ(out[i].case_tag, SpikeCase::Outlier) << name;
            EXPECT_GT(map.support().distance(out[i].limit), 0.0) << name;
            if (i > 0) EXPECT_LT(out[i].limit, out[i - 1].limit) << name;
        }
    }
}

TEST(Summary, SingleOutlier)
{
    const SubordinationMap map(models::delta1());
    const auto s = predicted_spectrum_summary(map, spikes({4.0}), 1000);
    ASSERT_GE(s.size(), 2u);
    EXPECT_EQ(s[0].rank_first, 1u);
    EXPECT_EQ(s[0].rank_last, 1u);
    EXPECT_NEAR(s[0].limit, 64.0 / 9.0, 1e-12);
    EXPECT_EQ(s[0].kind, "OUTLIER");
    EXPECT_EQ(s[1].rank_first, 2u);
    EXPECT_FALSE(s[1].rank_last);
    EXPECT_NEAR(s[1].limit, 6.75, 1e-8);
    EXPECT_EQ(s[1].kind, "BULK_RIGHT_EDGE");
}

TEST(Summary, NoSpikes)
{
    const SubordinationMap map(models::delta1());
    const auto s = predicted_spectrum_summary(map, SpikeSpec{}, 1000);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].rank_first, 1u);
    EXPECT_NEAR(s[0].limit, 6.75, 1e-8);
    EXPECT_EQ(s[1].rank_first, 1000u);
    EXPECT_EQ(s[1].limit, 0.0);
    EXPECT_EQ(s[1].kind, "BULK_LEFT_EDGE");
}

TEST(Summary, TooSmallMatrix)
{
    const SubordinationMap map(models::delta1());
    EXPECT_THROW((void)predicted_spectrum_summary(map, SpikeSpec{{4.0}, {3}}, 2), DomainError);
}

TEST(CaseNames, Strings)
{
    EXPECT_EQ(to_string(SpikeCase::Outlier), "OUTLIER");
    EXPECT_EQ(to_string(SpikeCase::RightEdge), "RIGHT_EDGE");
    EXPECT_EQ(to_string(SpikeCase::LeftEdge), "LEFT_EDGE");
    EXPECT_EQ(to_string(SpikeCase::Zero), "ZERO");
    EXPECT_EQ(to_string(SpikeCase::Quantile), "QUANTILE");
}
