#pragma once

/**
 * @file io.hpp
 * @brief JSON and CSV encodings of inputs and reports.
 *
 * Parsers reject unknown keys and wrong types with ValidationError.
 */

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipn/simulate.hpp"
#include "ipn/spikes.hpp"
#include "ipn/stieltjes.hpp"
#include "ipn/subordination.hpp"

namespace ipn {

using json = nlohmann::json;

/// {"atoms":[{"w":0.5,"t":1.0}],"segments":[{"w":0.5,"lo":2.0,"hi":4.0}]}
MeasureSpec measure_from_json(const json& j);
json to_json(const MeasureSpec& m);

/// {"sigma":1,"c":1,"nu":{...}}
ModelParams model_from_json(const json& j);
json to_json(const ModelParams& p);

/// {"thetas":[4],"multiplicities":[1]}; multiplicities default to 1.
SpikeSpec spikes_from_json(const json& j);
json to_json(const SpikeSpec& s);

json to_json(const SupportResult& s);
json to_json(const SpikeOutcome& o);
json to_json(const std::vector<SpikeOutcome>& outcomes);
json to_json(const SpectrumEntry& e);
json to_json(const DensityGrid& g);
json to_json(const EigenSample& s);
json to_json(const SeparationReport& r);
json to_json(const InclusionReport& r);

/// Two columns x,f; invalid points are written as nan.
void write_csv(std::ostream& os, const DensityGrid& g, bool header);

/// Parses text as JSON, mapping syntax errors to ValidationError.
json parse_json(const std::string& text, const std::string& what);

}  // namespace ipn
