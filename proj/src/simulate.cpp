#include "ipn/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "ipn/errors.hpp"

namespace ipn {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z)
{
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform in (0, 1), never 0.
double to_unit(std::uint64_t h) { return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53; }

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t trial) { return mix64(seed ^ mix64(trial * kGolden + 1)); }

}  // namespace

std::string to_string(EntryDist d)
{
    switch (d) {
    case EntryDist::ComplexGaussian: return "complex-gaussian";
    case EntryDist::RealGaussian: return "real-gaussian";
    case EntryDist::RademacherComplex: return "rademacher-complex";
    }
    return "unknown";
}

EntryDist parse_entry_dist(const std::string& name)
{
    if (name == "complex-gaussian") return EntryDist::ComplexGaussian;
    if (name == "real-gaussian") return EntryDist::RealGaussian;
    if (name == "rademacher-complex") return EntryDist::RademacherComplex;
    throw ValidationError("unknown entry distribution '" + name + "'");
}

void SimConfig::validate() const
{
    if (n == 0 || N == 0) throw ValidationError("n and N must be positive");
    if (n > N) throw ValidationError("n must not exceed N");
    if (trials == 0) throw ValidationError("trials must be positive");
    model.validate(/*allow_noiseless=*/true);
    try {
        spikes.validate(model.nu);
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
    if (spikes.r() > n) throw ValidationError("total spike multiplicity exceeds n");
}

DiagonalMatrix build_A(const MeasureSpec& nu, const SpikeSpec& spikes, std::size_t n, std::size_t N)
{
    const std::size_t r = spikes.r();
    if (r > n) throw DomainError("build_A: spike multiplicities exceed n");
    DiagonalMatrix a{n, N, {}};
    a.diagonal.reserve(n);
    for (std::size_t j = 0; j < spikes.thetas.size(); ++j)
        for (std::size_t k = 0; k < spikes.multiplicities[j]; ++k) a.diagonal.push_back(std::sqrt(spikes.thetas[j]));
    for (double beta : nu.quantile_grid(n - r)) a.diagonal.push_back(std::sqrt(beta));
    return a;
}

std::complex<double> noise_entry(EntryDist d, std::uint64_t seed, std::uint64_t trial, std::uint64_t index)
{
    const std::uint64_t key = stream_key(seed, trial);
    const std::uint64_t h1 = mix64(key ^ mix64(2 * index));
    const std::uint64_t h2 = mix64(key ^ mix64(2 * index + 1));
    const double angle = 2.0 * std::numbers::pi * to_unit(h2);
    switch (d) {
    case EntryDist::ComplexGaussian: {
        // Real and imaginary parts N(0, 1/2).
        const double rad = std::sqrt(-std::log(to_unit(h1)));
        return {rad * std::cos(angle), rad * std::sin(angle)};
    }
    case EntryDist::RealGaussian:
        return {std::sqrt(-2.0 * std::log(to_unit(h1))) * std::cos(angle), 0.0};
    case EntryDist::RademacherComplex: {
        const double re = (h1 & 1) ? 1.0 : -1.0;
        const double im = (h1 & 2) ? 1.0 : -1.0;
        const double h = 1.0 / std::numbers::sqrt2;
        return {re * h, im * h};
    }
    }
    return {};
}

EigenSample sample_eigenvalues(const SimConfig& cfg, std::size_t trial)
{
    cfg.validate();
    const auto a = build_A(cfg.model.nu, cfg.spikes, cfg.n, cfg.N);

    EigenSample out;
    out.trial_index = trial;
    out.seed_used = cfg.seed;
    out.a_eigenvalues.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) out.a_eigenvalues[i] = a.diagonal[i] * a.diagonal[i];
    std::ranges::sort(out.a_eigenvalues, std::greater<>());

    if (cfg.model.sigma == 0.0) {
        out.eigenvalues = out.a_eigenvalues;
        return out;
    }

    const auto n = static_cast<lapack_int>(cfg.n);
    const auto N = static_cast<lapack_int>(cfg.N);
    const double scale = cfg.model.sigma / std::sqrt(static_cast<double>(cfg.N));
    std::vector<double> s(cfg.n);

    // Real entries also go through the complex routine: the real driver in some
    // OpenBLAS builds returns wrong singular values on AVX-512 kernels.
    std::vector<std::complex<double>> y(cfg.n * cfg.N);
    for (std::size_t j = 0; j < cfg.N; ++j)
        for (std::size_t i = 0; i < cfg.n; ++i) {
            const std::size_t idx = i + cfg.n * j;
            y[idx] = scale * noise_entry(cfg.entry_dist, cfg.seed, trial, idx);
        }
    for (std::size_t i = 0; i < cfg.n; ++i) y[i + cfg.n * i] += a.diagonal[i];
    const lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', n, N, y.data(), n, s.data(), nullptr, 1, nullptr, 1);
    if (info != 0) {
        std::ostringstream os;
        os << "singular value routine failed in trial " << trial << " (info " << info << ")";
        throw LinAlgError(os.str());
    }

    out.eigenvalues.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) out.eigenvalues[i] = s[i] * s[i];
    std::ranges::sort(out.eigenvalues, std::greater<>());
    return out;
}

std::size_t worker_count(std::size_t jobs)
{
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("IPN_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) workers = std::min(workers, static_cast<std::size_t>(cap));
    }
    return std::max<std::size_t>(1, std::min(workers, jobs));
}

std::vector<EigenSample> sample_all(const SimConfig& cfg)
{
    cfg.validate();
    std::vector<EigenSample> out(cfg.trials);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        for (std::size_t t = next++; t < cfg.trials; t = next++) {
            try {
                out[t] = sample_eigenvalues(cfg, t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    const std::size_t workers = worker_count(cfg.trials);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

SeparationReport verify_separation(const SimConfig& cfg, Interval gap, const std::vector<EigenSample>& samples)
{
    cfg.validate();
    if (!(gap.lo < gap.hi)) throw PreconditionError("separation gap requires a < b");

    SeparationReport rep;
    rep.gap = gap;
    auto overlaps = [&](const std::vector<Interval>& ivs) {
        return std::ranges::any_of(ivs, [&](const Interval& iv) { return iv.lo <= gap.hi && gap.lo <= iv.hi; });
    };

    if (cfg.model.sigma == 0.0) {
        if (overlaps(cfg.model.nu.support().intervals)) throw PreconditionError("separation gap meets the support");
        rep.omega_gap = gap;
    } else {
        const SubordinationMap map(cfg.model);
        if (overlaps(map.support().intervals)) throw PreconditionError("separation gap meets the support");
        rep.omega_gap = {map.omega(gap.lo), map.omega(gap.hi)};
        if (cfg.model.c < 1.0 && !(rep.omega_gap.lo > 0.0))
            throw PreconditionError("separation requires omega(a) > 0 when c < 1");
    }

    std::size_t passed = 0;
    for (const auto& s : samples) {
        const auto& ae = s.a_eigenvalues;
        const auto& me = s.eigenvalues;
        const auto i_n = static_cast<std::size_t>(
            std::ranges::count_if(ae, [&](double x) { return x > rep.omega_gap.hi; }));
        // Descending 1-based ranks with lambda_0 = +inf and lambda_{n+1} = -inf.
        const bool a_ok = i_n == ae.size() || ae[i_n] < rep.omega_gap.lo;
        const bool m_ok = (i_n == me.size() || me[i_n] < gap.lo) && (i_n == 0 || me[i_n - 1] > gap.hi);
        rep.i_N.push_back(i_n);
        rep.a_count_ok.push_back(a_ok);
        rep.m_count_ok.push_back(m_ok);
        if (a_ok && m_ok) ++passed;
    }
    rep.pass_fraction = samples.empty() ? 0.0 : static_cast<double>(passed) / static_cast<double>(samples.size());
    return rep;
}

SeparationReport verify_separation(const SimConfig& cfg, Interval gap)
{
    return verify_separation(cfg, gap, sample_all(cfg));
}

InclusionReport verify_inclusion(const SimConfig& cfg, double epsilon, const std::vector<EigenSample>& samples)
{
    cfg.validate();
    InclusionReport rep;
    rep.epsilon = epsilon;

    std::vector<Interval> intervals;
    if (cfg.model.sigma == 0.0) {
        intervals = cfg.model.nu.support().intervals;
        rep.targets = cfg.spikes.thetas;
    } else {
        const SubordinationMap map(cfg.model);
        intervals = map.support().intervals;
        for (double theta : cfg.spikes.thetas)
            if (map.admissible().contains(theta)) rep.targets.push_back(map.phi(theta));
        if (!(map.admissible().u.front() > 0.0)) rep.targets.push_back(0.0);
    }

    auto distance = [&](double x) {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& iv : intervals) d = std::min(d, iv.contains(x) ? 0.0 : std::min(std::abs(x - iv.lo), std::abs(x - iv.hi)));
        for (double t : rep.targets) d = std::min(d, std::abs(x - t));
        return d;
    };

    std::size_t clean = 0;
    for (const auto& s : samples) {
        std::vector<double> bad;
        for (double x : s.eigenvalues)
            if (distance(x) > epsilon) bad.push_back(x);
        if (bad.empty()) ++clean;
        rep.offenders.push_back(std::move(bad));
    }
    rep.pass_fraction = samples.empty() ? 0.0 : static_cast<double>(clean) / static_cast<double>(samples.size());
    return rep;
}

InclusionReport verify_inclusion(const SimConfig& cfg, double epsilon)
{
    return verify_inclusion(cfg, epsilon, sample_all(cfg));
}

double ks_distance(std::vector<double> eigenvalues, const SpectralDistribution& dist)
{
    std::ranges::sort(eigenvalues);
    const double m = static_cast<double>(eigenvalues.size());
    double d = 0.0;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        const double f = dist.cdf(eigenvalues[i]);
        d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    return d;
}

double empirical_cdf_distance(const SimConfig& cfg, const std::vector<EigenSample>& samples)
{
    if (cfg.model.sigma == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const SpectralDistribution dist(cfg.model);
    std::vector<double> pooled;
    for (const auto& s : samples) pooled.insert(pooled.end(), s.eigenvalues.begin(), s.eigenvalues.end());
    return ks_distance(std::move(pooled), dist);
}

double empirical_cdf_distance(const SimConfig& cfg) { return empirical_cdf_distance(cfg, sample_all(cfg)); }

}  // namespace ipn
