#include "ipn/spikes.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "ipn/errors.hpp"

namespace ipn {

std::string to_string(SpikeCase c)
{
    switch (c) {
    case SpikeCase::Outlier: return "OUTLIER";
    case SpikeCase::RightEdge: return "RIGHT_EDGE";
    case SpikeCase::LeftEdge: return "LEFT_EDGE";
    case SpikeCase::Zero: return "ZERO";
    case SpikeCase::Quantile: return "QUANTILE";
    }
    return "UNKNOWN";
}

std::size_t SpikeSpec::r() const
{
    std::size_t total = 0;
    for (auto k : multiplicities) total += k;
    return total;
}

void SpikeSpec::validate(const MeasureSpec& nu) const
{
    if (thetas.size() != multiplicities.size()) throw DomainError("spikes: thetas and multiplicities differ in length");
    for (std::size_t j = 0; j < thetas.size(); ++j) {
        const double t = thetas[j];
        if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("spikes: theta must be a positive finite real");
        if (multiplicities[j] == 0) throw DomainError("spikes: multiplicity must be >= 1");
        if (j > 0 && !(t < thetas[j - 1])) throw DomainError("spikes: thetas must be strictly descending");
        if (nu.support().distance(t) <= kSupportTolerance) {
            std::ostringstream os;
            os.precision(17);
            os << "spikes: theta " << t << " lies in the support of nu";
            throw DomainError(os.str());
        }
    }
}

namespace {

std::size_t betas_above(const std::vector<double>& betas, double theta)
{
    return static_cast<std::size_t>(betas.end() - std::upper_bound(betas.begin(), betas.end(), theta));
}

}  // namespace

std::vector<SpikeOutcome> classify(const SubordinationMap& map, const SpikeSpec& spikes, std::size_t n,
                                   const SpectralDistribution* dist)
{
    const auto& p = map.params();
    spikes.validate(p.nu);
    const std::size_t r = spikes.r();
    if (n < r) throw DomainError("spikes: n must be >= r");

    const auto& sup = map.support();
    const auto& e = sup.boundaries;
    const auto& comps = p.nu.support().intervals;
    const auto betas = p.nu.quantile_grid(n - r);

    std::unique_ptr<SpectralDistribution> owned;
    std::vector<SpikeOutcome> out;
    std::size_t preceding = 0;
    for (std::size_t j = 0; j < spikes.thetas.size(); ++j) {
        const double theta = spikes.thetas[j];
        if (e.boundary_distance(theta) <= kSpikeBoundaryTolerance) {
            std::ostringstream os;
            os.precision(17);
            os << "spike " << theta << " is within " << kSpikeBoundaryTolerance << " of a boundary of E";
            throw AmbiguousSpike(os.str());
        }

        SpikeOutcome o;
        o.theta = theta;
        o.multiplicity = spikes.multiplicities[j];
        o.rank_start = 1 + preceding + betas_above(betas, theta);
        preceding += o.multiplicity;

        const auto l = e.component_of(theta);
        if (!l) {
            o.case_tag = SpikeCase::Outlier;
            o.limit = map.phi(theta);
            out.push_back(o);
            continue;
        }

        bool left_of_all = true;
        bool right_of_all = true;
        for (const auto& comp : comps) {
            if (comp.hi < e.u[*l] || comp.lo > e.v[*l]) continue;
            if (theta > comp.lo) left_of_all = false;
            if (theta < comp.hi) right_of_all = false;
        }

        if (right_of_all) {
            o.case_tag = SpikeCase::RightEdge;
            o.limit = sup.intervals[*l].hi;
        } else if (left_of_all) {
            if (*l == 0 && sup.zero_in_support) {
                o.case_tag = SpikeCase::Zero;
                o.limit = 0.0;
            } else {
                o.case_tag = SpikeCase::LeftEdge;
                o.limit = sup.intervals[*l].lo;
            }
        } else {
            if (!dist) {
                if (!owned) owned = std::make_unique<SpectralDistribution>(std::make_shared<const SubordinationMap>(map));
                dist = owned.get();
            }
            o.case_tag = SpikeCase::Quantile;
            o.alpha = p.nu.cdf(theta);
            o.limit = dist->quantile(*o.alpha);
        }
        out.push_back(o);
    }
    return out;
}

std::vector<SpikeOutcome> classify(const ModelParams& p, const SpikeSpec& spikes, std::size_t n)
{
    return classify(SubordinationMap(p), spikes, n);
}

std::vector<SpectrumEntry> predicted_spectrum_summary(const SubordinationMap& map, const SpikeSpec& spikes,
                                                      std::size_t n, const SpectralDistribution* dist)
{
    const auto outcomes = classify(map, spikes, n, dist);
    const auto& sup = map.support();
    const auto betas = map.params().nu.quantile_grid(n - spikes.r());

    std::vector<SpectrumEntry> out;
    std::size_t above_bulk = 0;
    std::size_t below_bulk = 0;
    for (const auto& o : outcomes) {
        out.push_back({o.rank_start, o.rank_end(), o.limit, to_string(o.case_tag)});
        if (betas_above(betas, o.theta) == 0) above_bulk += o.multiplicity;
        if (betas_above(betas, o.theta) == betas.size()) below_bulk += o.multiplicity;
    }
    if (betas.empty()) return out;
    out.push_back({above_bulk + 1, std::nullopt, sup.intervals.back().hi, "BULK_RIGHT_EDGE"});
    out.push_back({n - below_bulk, std::nullopt, sup.intervals.front().lo, "BULK_LEFT_EDGE"});
    return out;
}

}  // namespace ipn
