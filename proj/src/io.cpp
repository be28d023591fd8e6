#include "ipn/io.hpp"

#include <cmath>
#include <initializer_list>
#include <ostream>
#include <sstream>

#include "ipn/errors.hpp"

namespace ipn {

namespace {

void require_object(const json& j, const std::string& what, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ValidationError(what + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ValidationError(what + ": unknown field '" + key + "'");
    }
}

double number(const json& j, const char* key, const std::string& what)
{
    if (!j.contains(key)) throw ValidationError(what + ": missing field '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number()) throw ValidationError(what + ": field '" + key + "' must be a number");
    return v.get<double>();
}

json real(double x)
{
    if (std::isnan(x)) return nullptr;
    return x;
}

json intervals(const std::vector<Interval>& ivs)
{
    json out = json::array();
    for (const auto& iv : ivs) out.push_back({iv.lo, iv.hi});
    return out;
}

}  // namespace

json parse_json(const std::string& text, const std::string& what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(what + " is not valid JSON: " + e.what());
    }
}

MeasureSpec measure_from_json(const json& j)
{
    require_object(j, "nu", {"atoms", "segments"});
    std::vector<Atom> atoms;
    std::vector<Segment> segments;
    if (j.contains("atoms")) {
        if (!j["atoms"].is_array()) throw ValidationError("nu: atoms must be an array");
        for (const auto& a : j["atoms"]) {
            require_object(a, "nu atom", {"w", "t"});
            atoms.push_back({number(a, "w", "nu atom"), number(a, "t", "nu atom")});
        }
    }
    if (j.contains("segments")) {
        if (!j["segments"].is_array()) throw ValidationError("nu: segments must be an array");
        for (const auto& s : j["segments"]) {
            require_object(s, "nu segment", {"w", "lo", "hi"});
            segments.push_back({number(s, "w", "nu segment"), number(s, "lo", "nu segment"), number(s, "hi", "nu segment")});
        }
    }
    return MeasureSpec(std::move(atoms), std::move(segments));
}

json to_json(const MeasureSpec& m)
{
    json atoms = json::array();
    for (const auto& a : m.atoms()) atoms.push_back({{"w", a.weight}, {"t", a.location}});
    json segments = json::array();
    for (const auto& s : m.segments()) segments.push_back({{"w", s.weight}, {"lo", s.lo}, {"hi", s.hi}});
    return {{"atoms", atoms}, {"segments", segments}};
}

ModelParams model_from_json(const json& j)
{
    require_object(j, "model", {"sigma", "c", "nu"});
    ModelParams p;
    if (j.contains("sigma")) p.sigma = number(j, "sigma", "model");
    if (j.contains("c")) p.c = number(j, "c", "model");
    if (!j.contains("nu")) throw ValidationError("model: missing field 'nu'");
    p.nu = measure_from_json(j["nu"]);
    return p;
}

json to_json(const ModelParams& p) { return {{"sigma", p.sigma}, {"c", p.c}, {"nu", to_json(p.nu)}}; }

SpikeSpec spikes_from_json(const json& j)
{
    require_object(j, "spikes", {"thetas", "multiplicities"});
    SpikeSpec s;
    if (j.contains("thetas")) {
        if (!j["thetas"].is_array()) throw ValidationError("spikes: thetas must be an array");
        for (const auto& t : j["thetas"]) {
            if (!t.is_number()) throw ValidationError("spikes: thetas must be numbers");
            s.thetas.push_back(t.get<double>());
        }
    }
    if (j.contains("multiplicities")) {
        if (!j["multiplicities"].is_array()) throw ValidationError("spikes: multiplicities must be an array");
        for (const auto& k : j["multiplicities"]) {
            if (!k.is_number_integer() || k.get<long long>() < 1)
                throw ValidationError("spikes: multiplicities must be positive integers");
            s.multiplicities.push_back(k.get<std::size_t>());
        }
    } else {
        s.multiplicities.assign(s.thetas.size(), 1);
    }
    if (s.multiplicities.size() != s.thetas.size())
        throw ValidationError("spikes: thetas and multiplicities differ in length");
    return s;
}

json to_json(const SpikeSpec& s) { return {{"thetas", s.thetas}, {"multiplicities", s.multiplicities}}; }

json to_json(const SupportResult& s)
{
    return {{"intervals", intervals(s.intervals)},
            {"zero_in_support", s.zero_in_support},
            {"boundaries", {{"u", s.boundaries.u}, {"v", s.boundaries.v}}}};
}

json to_json(const SpikeOutcome& o)
{
    json j = {{"theta", o.theta},
              {"case", to_string(o.case_tag)},
              {"limit", o.limit},
              {"ranks", {o.rank_start, o.rank_end()}}};
    if (o.alpha) j["alpha"] = *o.alpha;
    return j;
}

json to_json(const std::vector<SpikeOutcome>& outcomes)
{
    json out = json::array();
    for (const auto& o : outcomes) out.push_back(to_json(o));
    return out;
}

json to_json(const SpectrumEntry& e)
{
    json ranks = {e.rank_first, e.rank_last ? json(*e.rank_last) : json(nullptr)};
    return {{"ranks", ranks}, {"limit", e.limit}, {"kind", e.kind}};
}

json to_json(const DensityGrid& g)
{
    json fs = json::array();
    for (std::size_t i = 0; i < g.size(); ++i) fs.push_back(g.valid[i] ? json(g.fs[i]) : json(nullptr));
    return {{"xs", g.xs}, {"fs", fs}, {"eps_used", g.eps_used}};
}

json to_json(const EigenSample& s)
{
    return {{"trial_index", s.trial_index}, {"seed_used", s.seed_used}, {"eigenvalues", s.eigenvalues},
            {"a_eigenvalues", s.a_eigenvalues}};
}

json to_json(const SeparationReport& r)
{
    json a_ok = json::array();
    json m_ok = json::array();
    for (bool b : r.a_count_ok) a_ok.push_back(b);
    for (bool b : r.m_count_ok) m_ok.push_back(b);
    return {{"gap", {r.gap.lo, r.gap.hi}},
            {"omega_gap", {r.omega_gap.lo, r.omega_gap.hi}},
            {"i_N", r.i_N},
            {"a_count_ok", a_ok},
            {"m_count_ok", m_ok},
            {"pass_fraction", real(r.pass_fraction)}};
}

json to_json(const InclusionReport& r)
{
    json counts = json::array();
    for (const auto& o : r.offenders) counts.push_back(o.size());
    return {{"epsilon", r.epsilon},
            {"targets", r.targets},
            {"offender_counts", counts},
            {"offenders", r.offenders},
            {"pass_fraction", real(r.pass_fraction)}};
}

void write_csv(std::ostream& os, const DensityGrid& g, bool header)
{
    std::ostringstream line;
    line.precision(17);
    if (header) os << "x,f\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
        line.str("");
        line << g.xs[i] << ',';
        if (g.valid[i])
            line << g.fs[i];
        else
            line << "nan";
        os << line.str() << '\n';
    }
}

}  // namespace ipn
