#pragma once

/**
 * @file spikes.hpp
 * @brief Limits of the eigenvalues of M generated by spikes theta_j of A A^*.
 *
 * A spike inside the admissible set E produces an outlier at Phi(theta).
 * Otherwise theta lies in some [u_l, v_l] and its eigenvalues stick to the
 * right edge Phi(v_l^+), the left edge Phi(u_l^-), zero, or the alpha-quantile
 * of the limit law with alpha = nu((-inf, theta]).
 */

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ipn/stieltjes.hpp"
#include "ipn/subordination.hpp"

namespace ipn {

enum class SpikeCase { Outlier, RightEdge, LeftEdge, Zero, Quantile };

std::string to_string(SpikeCase c);

/// Distance to an E-boundary below which a spike is reported as ambiguous.
inline constexpr double kSpikeBoundaryTolerance = 1e-9;

struct SpikeSpec {
    std::vector<double> thetas;                 ///< strictly descending
    std::vector<std::size_t> multiplicities;    ///< k_j >= 1

    [[nodiscard]] bool empty() const { return thetas.empty(); }
    [[nodiscard]] std::size_t r() const;

    /// Throws DomainError on a violated invariant.
    void validate(const MeasureSpec& nu) const;
};

struct SpikeOutcome {
    double theta = 0.0;
    SpikeCase case_tag = SpikeCase::Outlier;
    double limit = 0.0;
    std::size_t multiplicity = 1;
    std::size_t rank_start = 0;  ///< 1-based descending rank of the first eigenvalue in the packet
    std::optional<double> alpha;

    [[nodiscard]] std::size_t rank_end() const { return rank_start + multiplicity - 1; }
};

/**
 * Classifies every spike. Ranks are resolved against an n x N model whose
 * remaining n - r diagonal entries are the nu-quantiles at levels
 * (i - 1/2)/(n - r). Throws AmbiguousSpike, DomainError (n < r).
 * dist is only consulted for QUANTILE spikes; it is built on demand when null.
 */
std::vector<SpikeOutcome> classify(const SubordinationMap& map, const SpikeSpec& spikes, std::size_t n,
                                   const SpectralDistribution* dist = nullptr);
std::vector<SpikeOutcome> classify(const ModelParams& p, const SpikeSpec& spikes, std::size_t n);

struct SpectrumEntry {
    std::size_t rank_first = 0;
    std::optional<std::size_t> rank_last;  ///< empty for an open-ended bulk range
    double limit = 0.0;
    std::string kind;                      ///< OUTLIER, ..., BULK_RIGHT_EDGE, BULK_LEFT_EDGE
};

/// Spike packets followed by the bulk edges for the extreme non-spiked ranks.
std::vector<SpectrumEntry> predicted_spectrum_summary(const SubordinationMap& map, const SpikeSpec& spikes,
                                                      std::size_t n, const SpectralDistribution* dist = nullptr);

}  // namespace ipn
