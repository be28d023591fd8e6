#include "ipn/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "ipn/errors.hpp"

namespace ipn {

namespace {

const std::vector<std::string> kCommands{"support", "density", "spikes", "simulate", "separation", "verify-all"};

constexpr double kInversePairTol = 1e-9;
constexpr double kChainTol = 1e-7;
constexpr double kHResidualTol = 1e-6;
constexpr double kMassTol = 1e-3;
constexpr double kSeparationMin = 0.95;
constexpr double kSpikeTol = 0.15;
constexpr double kInclusionMin = 0.9;
constexpr double kKsMax = 0.05;

void require_keys(const json& j, const std::string& what, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ValidationError(what + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            throw ValidationError(what + ": unknown field '" + key + "'");
}

template <class T>
T field(const json& j, const char* key, const std::string& what)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(what + ": bad field '" + key + "': " + e.what());
    }
}

std::size_t count_field(const json& j, const char* key, const std::string& what)
{
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ValidationError(what + ": field '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

double median(std::vector<double> v)
{
    std::ranges::sort(v);
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Points outside the support: inside every gap and beyond both ends.
std::vector<double> check_grid(const SupportResult& s)
{
    const auto& ivs = s.intervals;
    const double span = ivs.back().hi - ivs.front().lo;
    std::vector<double> xs;
    for (double f : {2.0, 1.0, 0.6, 0.3, 0.1}) xs.push_back(ivs.front().lo - f * span);
    if (ivs.front().lo > 0.0)
        for (double f : {0.2, 0.5, 0.8}) xs.push_back(f * ivs.front().lo);
    for (std::size_t l = 0; l + 1 < ivs.size(); ++l)
        for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) xs.push_back(ivs[l].hi + f * (ivs[l + 1].lo - ivs[l].hi));
    for (double f : {0.1, 0.3, 0.6, 1.0, 2.0}) xs.push_back(ivs.back().hi + f * span);
    std::ranges::sort(xs);
    return xs;
}

CheckResult check(std::string name, double value, double threshold, bool pass, std::string detail = {})
{
    return {std::move(name), pass ? "pass" : "fail", value, threshold, std::move(detail)};
}

CheckResult skipped(std::string name, double threshold, std::string detail)
{
    return {std::move(name), "skipped", std::nan(""), threshold, std::move(detail)};
}

SimConfig& ensure_sim(RunConfig& cfg)
{
    if (!cfg.sim) cfg.sim = SimConfig{};
    return *cfg.sim;
}

void sync_sim(RunConfig& cfg)
{
    if (!cfg.sim) return;
    cfg.sim->model = cfg.model;
    cfg.sim->spikes = cfg.spikes.value_or(SpikeSpec{});
    if (cfg.sim->N == 0 && cfg.sim->n > 0 && cfg.model.c > 0.0)
        cfg.sim->N = static_cast<std::size_t>(std::llround(static_cast<double>(cfg.sim->n) / cfg.model.c));
}

void write_output(const RunConfig& cfg, std::ostream& out, const std::string& text)
{
    if (cfg.output.path.empty() || cfg.output.path == "-") {
        out << text;
        return;
    }
    std::ofstream file(cfg.output.path, std::ios::binary);
    if (!file) throw ValidationError("cannot open output file '" + cfg.output.path + "'");
    file << text;
}

std::string dump(json j, const RunConfig& cfg)
{
    if (cfg.timestamp && j.is_object()) j["timestamp"] = utc_timestamp();
    return j.dump(2) + "\n";
}

std::string cmd_support(const RunConfig& cfg)
{
    const SubordinationMap map(cfg.model);
    return dump(to_json(map.support()), cfg);
}

std::string cmd_density(const RunConfig& cfg)
{
    const SubordinationMap map(cfg.model);
    const auto xs = density_grid_points(map.support(), cfg.density_points);
    const auto grid = density(cfg.model, xs);
    if (cfg.output.format == "csv") {
        std::ostringstream os;
        write_csv(os, grid, cfg.output.header);
        return os.str();
    }
    return dump(to_json(grid), cfg);
}

std::string cmd_spikes(const RunConfig& cfg)
{
    const std::size_t n = cfg.sim ? cfg.sim->n : cfg.spike_n;
    const auto outcomes = classify(cfg.model, cfg.spikes.value_or(SpikeSpec{}), n);
    return to_json(outcomes).dump(2) + "\n";
}

std::string cmd_simulate(const RunConfig& cfg)
{
    std::string text;
    for (const auto& s : sample_all(*cfg.sim)) text += to_json(s).dump() + "\n";
    return text;
}

struct SeparationOutcome {
    std::string text;
    bool passed;
};

SeparationOutcome cmd_separation(const RunConfig& cfg)
{
    std::optional<Interval> gap = cfg.gap;
    if (!gap) gap = default_separation_gap(SubordinationMap(cfg.model).support());
    if (!gap) throw PreconditionError("the support has a single interval; pass --gap explicitly");
    const auto rep = verify_separation(*cfg.sim, *gap);
    return {dump(to_json(rep), cfg), rep.pass_fraction >= kSeparationMin};
}

void print_table(std::ostream& err, const VerifyReport& rep)
{
    for (const auto& c : rep.checks) {
        err << std::left << std::setw(20) << c.name << ' ' << std::setw(8) << c.status;
        if (std::isfinite(c.value)) err << " value=" << c.value;
        err << " threshold=" << c.threshold;
        if (!c.detail.empty()) err << "  " << c.detail;
        err << '\n';
    }
}

}  // namespace

void RunConfig::validate() const
{
    if (std::ranges::find(kCommands, command) == kCommands.end())
        throw ValidationError("unknown command '" + command + "'");
    model.validate();
    if (spikes) spikes->validate(model.nu);
    if (output.format != "json" && output.format != "csv") throw ValidationError("format must be json or csv");
    if (output.format == "csv" && command != "density") throw ValidationError("csv output is only available for density");
    if (density_points < 2) throw ValidationError("density needs at least two points");
    if (!(epsilon > 0.0)) throw ValidationError("inclusion epsilon must be > 0");
    if (gap && !(gap->lo < gap->hi)) throw ValidationError("gap requires a < b");

    const bool needs_sim = command == "simulate" || command == "separation" || command == "verify-all";
    if (needs_sim && !sim) throw ValidationError("command '" + command + "' requires a sim section");
    if (sim) {
        sim->validate();
        const double ratio = static_cast<double>(sim->n) / static_cast<double>(sim->N);
        if (std::abs(ratio - model.c) > 1e-2) throw ValidationError("sim n/N does not match model c");
    }
}

RunConfig config_from_json(const json& j)
{
    require_keys(j, "config", {"command", "model", "spikes", "sim", "density", "separation", "inclusion", "output"});
    RunConfig cfg;
    if (j.contains("command")) cfg.command = field<std::string>(j, "command", "config");
    if (j.contains("model")) cfg.model = model_from_json(j["model"]);
    if (j.contains("spikes")) cfg.spikes = spikes_from_json(j["spikes"]);
    if (j.contains("sim")) {
        const auto& s = j["sim"];
        require_keys(s, "sim", {"n", "N", "entry_dist", "seed", "trials"});
        auto& sim = ensure_sim(cfg);
        if (s.contains("n")) sim.n = count_field(s, "n", "sim");
        if (s.contains("N")) sim.N = count_field(s, "N", "sim");
        if (s.contains("entry_dist")) sim.entry_dist = parse_entry_dist(field<std::string>(s, "entry_dist", "sim"));
        if (s.contains("seed")) sim.seed = field<std::uint64_t>(s, "seed", "sim");
        if (s.contains("trials")) sim.trials = count_field(s, "trials", "sim");
    }
    if (j.contains("density")) {
        require_keys(j["density"], "density", {"points"});
        if (j["density"].contains("points")) cfg.density_points = count_field(j["density"], "points", "density");
    }
    if (j.contains("separation")) {
        require_keys(j["separation"], "separation", {"gap"});
        if (j["separation"].contains("gap")) {
            const auto g = field<std::vector<double>>(j["separation"], "gap", "separation");
            if (g.size() != 2) throw ValidationError("separation: gap must be [a, b]");
            cfg.gap = Interval{g[0], g[1]};
        }
    }
    if (j.contains("inclusion")) {
        require_keys(j["inclusion"], "inclusion", {"epsilon"});
        if (j["inclusion"].contains("epsilon")) cfg.epsilon = field<double>(j["inclusion"], "epsilon", "inclusion");
    }
    if (j.contains("output")) {
        require_keys(j["output"], "output", {"path", "format", "header"});
        const auto& o = j["output"];
        if (o.contains("path")) cfg.output.path = field<std::string>(o, "path", "output");
        if (o.contains("format")) cfg.output.format = field<std::string>(o, "format", "output");
        if (o.contains("header")) cfg.output.header = field<bool>(o, "header", "output");
    }
    sync_sim(cfg);
    return cfg;
}

std::optional<Interval> default_separation_gap(const SupportResult& s)
{
    if (s.intervals.size() < 2) return std::nullopt;
    const double a = s.intervals[0].hi;
    const double b = s.intervals[1].lo;
    const double mid = 0.5 * (a + b);
    const double half = 0.05 * (b - a);
    return Interval{mid - half, mid + half};
}

bool VerifyReport::passed() const
{
    return std::ranges::none_of(checks, [](const CheckResult& c) { return c.status == "fail"; });
}

VerifyReport verify_all(const RunConfig& cfg)
{
    cfg.validate();
    if (!cfg.sim) throw ValidationError("verify-all requires a sim section");
    const auto& sim = *cfg.sim;
    auto map = std::make_shared<const SubordinationMap>(cfg.model);
    const auto& sup = map->support();
    VerifyReport rep;

    const auto xs = check_grid(sup);
    double inverse = 0.0;
    double chain = 0.0;
    double h = 0.0;
    double min_step = std::numeric_limits<double>::infinity();
    double prev_omega = -std::numeric_limits<double>::infinity();
    for (double x : xs) {
        const double w = map->omega(x);
        inverse = std::max(inverse, std::abs(map->phi(w) - x) / std::max(1.0, std::abs(x)));
        min_step = std::min(min_step, w - prev_omega);
        prev_omega = w;
        chain = std::max(chain, chain_residual(*map, x));
        h = std::max(h, h_residual(*map, x));
    }
    const std::string grid_note = std::to_string(xs.size()) + " points outside the support";
    rep.checks.push_back(check("inverse_pair", inverse, kInversePairTol, inverse <= kInversePairTol, grid_note));
    rep.checks.push_back(check("omega_monotone", min_step, 0.0, min_step > 0.0, grid_note));
    rep.checks.push_back(check("subordination_chain", chain, kChainTol, chain <= kChainTol, grid_note));
    rep.checks.push_back(check("h_residual", h, kHResidualTol, h <= kHResidualTol, grid_note));

    const SpectralDistribution dist(map);
    double mass_err = 0.0;
    for (std::size_t l = 0; l < dist.raw_masses().size(); ++l)
        mass_err = std::max(mass_err, std::abs(dist.raw_masses()[l] - dist.target_masses()[l]));
    rep.checks.push_back(check("mass_equality", mass_err, kMassTol, mass_err <= kMassTol,
                               std::to_string(sup.intervals.size()) + " support intervals"));

    const auto samples = sample_all(sim);

    std::optional<Interval> gap = cfg.gap;
    if (!gap) gap = default_separation_gap(sup);
    if (gap) {
        const auto sep = verify_separation(sim, *gap, samples);
        rep.checks.push_back(check("separation", sep.pass_fraction, kSeparationMin, sep.pass_fraction >= kSeparationMin));
    } else {
        rep.checks.push_back(skipped("separation", kSeparationMin, "support has no gap"));
    }

    const auto& spikes = sim.spikes;
    if (spikes.empty()) {
        rep.checks.push_back(skipped("spike_limits", kSpikeTol, "no spikes"));
    } else {
        const auto outcomes = classify(*map, spikes, sim.n, &dist);
        double worst = 0.0;
        for (const auto& o : outcomes)
            for (std::size_t rank = o.rank_start; rank <= o.rank_end(); ++rank) {
                std::vector<double> values;
                for (const auto& s : samples) values.push_back(s.eigenvalues[rank - 1]);
                worst = std::max(worst, std::abs(median(values) - o.limit));
            }
        rep.checks.push_back(check("spike_limits", worst, kSpikeTol, worst <= kSpikeTol, "median over trials"));
    }

    const auto inc = verify_inclusion(sim, cfg.epsilon, samples);
    std::ostringstream eps;
    eps << "epsilon " << cfg.epsilon;
    rep.checks.push_back(check("inclusion", inc.pass_fraction, kInclusionMin, inc.pass_fraction >= kInclusionMin, eps.str()));

    std::vector<double> pooled;
    for (const auto& s : samples) pooled.insert(pooled.end(), s.eigenvalues.begin(), s.eigenvalues.end());
    const double ks = ks_distance(std::move(pooled), dist);
    rep.checks.push_back(check("ks_distance", ks, kKsMax, ks <= kKsMax));
    return rep;
}

json to_json(const VerifyReport& r)
{
    json checks = json::array();
    for (const auto& c : r.checks) {
        json j = {{"name", c.name}, {"status", c.status}, {"threshold", c.threshold}};
        j["value"] = std::isfinite(c.value) ? json(c.value) : json(nullptr);
        if (!c.detail.empty()) j["detail"] = c.detail;
        checks.push_back(j);
    }
    return {{"checks", checks}, {"passed", r.passed()}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Information-plus-noise spectra: supports, densities, spikes and simulation", "ipn"};
    std::string command;
    std::string config_path;
    std::optional<double> sigma, c, epsilon;
    std::optional<std::string> nu_text, entry_dist, output_path, format;
    std::vector<double> thetas, gap;
    std::vector<std::size_t> ks;
    std::optional<std::size_t> n, N, trials, points;
    std::optional<std::uint64_t> seed;
    bool header = false;
    bool no_timestamp = false;

    app.add_option("command", command, "support | density | spikes | simulate | separation | verify-all")
        ->check(CLI::IsMember(kCommands));
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--sigma", sigma, "noise scale");
    app.add_option("--c", c, "dimension ratio n/N in (0, 1]");
    app.add_option("--nu", nu_text, "measure as JSON");
    app.add_option("--theta", thetas, "spikes, descending")->delimiter(',');
    app.add_option("--k", ks, "spike multiplicities")->delimiter(',');
    app.add_option("--n", n, "rows");
    app.add_option("--N", N, "columns");
    app.add_option("--trials", trials, "Monte Carlo trials");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--entry-dist", entry_dist, "complex-gaussian | real-gaussian | rademacher-complex");
    app.add_option("--points", points, "density grid size");
    app.add_option("--gap", gap, "separation gap a,b")->delimiter(',')->expected(2);
    app.add_option("--epsilon", epsilon, "inclusion tolerance");
    app.add_option("-o,--output", output_path, "output path, - for stdout");
    app.add_option("--format", format, "json | csv");
    app.add_flag("--header", header, "column names in csv output");
    app.add_flag("--no-timestamp", no_timestamp, "omit the timestamp field");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream file(config_path);
            if (!file) throw ValidationError("cannot read config file '" + config_path + "'");
            std::stringstream buf;
            buf << file.rdbuf();
            cfg = config_from_json(parse_json(buf.str(), "config"));
        }
        if (!command.empty()) cfg.command = command;
        if (cfg.command.empty()) throw ValidationError("no command given");
        if (nu_text) cfg.model.nu = measure_from_json(parse_json(*nu_text, "--nu"));
        if (sigma) cfg.model.sigma = *sigma;
        if (c) cfg.model.c = *c;
        if (!thetas.empty()) {
            SpikeSpec s{thetas, ks};
            if (ks.empty()) s.multiplicities.assign(thetas.size(), 1);
            if (s.multiplicities.size() != s.thetas.size())
                throw ValidationError("--theta and --k differ in length");
            cfg.spikes = s;
        } else if (!ks.empty()) {
            throw ValidationError("--k requires --theta");
        }
        if (n) ensure_sim(cfg).n = *n;
        if (N) ensure_sim(cfg).N = *N;
        if (trials) ensure_sim(cfg).trials = *trials;
        if (seed) ensure_sim(cfg).seed = *seed;
        if (entry_dist) ensure_sim(cfg).entry_dist = parse_entry_dist(*entry_dist);
        if (points) cfg.density_points = *points;
        if (!gap.empty()) cfg.gap = Interval{gap[0], gap[1]};
        if (epsilon) cfg.epsilon = *epsilon;
        if (output_path) cfg.output.path = *output_path;
        if (format) cfg.output.format = *format;
        if (header) cfg.output.header = true;
        if (no_timestamp) cfg.timestamp = false;
        if (cfg.model.nu.atoms().empty() && cfg.model.nu.segments().empty())
            throw ValidationError("no measure nu given");
        sync_sim(cfg);
        cfg.validate();

        if (cfg.command == "support") {
            write_output(cfg, out, cmd_support(cfg));
        } else if (cfg.command == "density") {
            write_output(cfg, out, cmd_density(cfg));
        } else if (cfg.command == "spikes") {
            write_output(cfg, out, cmd_spikes(cfg));
        } else if (cfg.command == "simulate") {
            write_output(cfg, out, cmd_simulate(cfg));
        } else if (cfg.command == "separation") {
            const auto res = cmd_separation(cfg);
            write_output(cfg, out, res.text);
            if (!res.passed) {
                err << "separation: pass fraction below " << kSeparationMin << '\n';
                return kExitVerification;
            }
        } else {
            const auto rep = verify_all(cfg);
            json j = to_json(rep);
            j["model"] = to_json(cfg.model);
            write_output(cfg, out, dump(j, cfg));
            print_table(err, rep);
            if (!rep.passed()) return kExitVerification;
        }
        return kExitOk;
    } catch (const ConvergenceError& e) {
        err << "convergence error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const LinAlgError& e) {
        err << "linear algebra error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const AmbiguousSpike& e) {
        err << "ambiguous spike: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const PreconditionError& e) {
        err << "precondition violated: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return kExitInvalid;
    }
}

}  // namespace ipn
