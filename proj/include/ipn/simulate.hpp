#pragma once

/**
 * @file simulate.hpp
 * @brief Monte Carlo sampling of M = (sigma X / sqrt(N) + A)(sigma X / sqrt(N) + A)^*
 *        and empirical checks against the limit law.
 *
 * A is n x N with a diagonal: sqrt(theta_j) repeated k_j times, then
 * sqrt(beta_i) with beta_i the nu-quantiles at levels (i - 1/2)/(n - r).
 * Eigenvalues are the squared singular values of sigma X / sqrt(N) + A.
 */

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ipn/spikes.hpp"
#include "ipn/stieltjes.hpp"
#include "ipn/subordination.hpp"

namespace ipn {

enum class EntryDist { ComplexGaussian, RealGaussian, RademacherComplex };

std::string to_string(EntryDist d);
/// Accepts "complex-gaussian", "real-gaussian", "rademacher-complex"; throws ValidationError.
EntryDist parse_entry_dist(const std::string& name);

struct SimConfig {
    std::size_t n = 0;
    std::size_t N = 0;
    EntryDist entry_dist = EntryDist::ComplexGaussian;
    ModelParams model;
    SpikeSpec spikes;
    std::uint64_t seed = 0;
    std::size_t trials = 1;

    /// Throws ValidationError. sigma = 0 is allowed here.
    void validate() const;
};

struct DiagonalMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> diagonal;  ///< length rows, rows <= cols
};

/// Throws DomainError when r > n.
DiagonalMatrix build_A(const MeasureSpec& nu, const SpikeSpec& spikes, std::size_t n, std::size_t N);

struct EigenSample {
    std::vector<double> eigenvalues;    ///< descending
    std::vector<double> a_eigenvalues;  ///< descending
    std::size_t trial_index = 0;
    std::uint64_t seed_used = 0;
};

/// Deterministic in (cfg, trial). Throws LinAlgError.
EigenSample sample_eigenvalues(const SimConfig& cfg, std::size_t trial);

/// All trials, in trial order; runs on up to IPN_THREADS worker threads.
std::vector<EigenSample> sample_all(const SimConfig& cfg);

/// Worker count: hardware concurrency capped by IPN_THREADS when set.
std::size_t worker_count(std::size_t jobs);

/// One entry of X for (seed, trial, index); exposed for testing the generator.
std::complex<double> noise_entry(EntryDist d, std::uint64_t seed, std::uint64_t trial, std::uint64_t index);

struct SeparationReport {
    Interval gap;
    Interval omega_gap;
    std::vector<std::size_t> i_N;
    std::vector<bool> a_count_ok;
    std::vector<bool> m_count_ok;
    double pass_fraction = 0.0;
};

/**
 * Checks, per trial, that the counts of eigenvalues of A A^* above omega(b)
 * and of M above b agree. Throws PreconditionError when [a, b] meets the
 * support or omega(a) <= 0 with c < 1.
 */
SeparationReport verify_separation(const SimConfig& cfg, Interval gap, const std::vector<EigenSample>& samples);
SeparationReport verify_separation(const SimConfig& cfg, Interval gap);

struct InclusionReport {
    double epsilon = 0.0;
    std::vector<double> targets;                  ///< isolated points of S (outliers, zero)
    std::vector<std::vector<double>> offenders;   ///< per trial
    double pass_fraction = 0.0;                   ///< trials without offenders
};

/// Flags eigenvalues farther than epsilon from supp(mu), the outlier limits, and 0 unless u_1 > 0.
InclusionReport verify_inclusion(const SimConfig& cfg, double epsilon, const std::vector<EigenSample>& samples);
InclusionReport verify_inclusion(const SimConfig& cfg, double epsilon);

/// sup |F_emp - F| over pooled eigenvalues.
double ks_distance(std::vector<double> eigenvalues, const SpectralDistribution& dist);

/// KS distance of the pooled spectra; NaN when sigma = 0.
double empirical_cdf_distance(const SimConfig& cfg, const std::vector<EigenSample>& samples);
double empirical_cdf_distance(const SimConfig& cfg);

}  // namespace ipn
