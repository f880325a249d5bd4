#pragma once

// Byte-stable text output: numbers carry at most 10 significant digits and
// JSON objects keep insertion order.

#include <string>
#include <vector>

#include <json.hpp>

#include "lsv/harness.hpp"
#include "lsv/structure.hpp"
#include "lsv/witness.hpp"

namespace lsv {

using OrderedJson = nlohmann::ordered_json;

/// printf("%.10g").
std::string format_number(double x);
/// x rounded to 10 significant digits, so JSON dumps it in at most 10.
double round_sig10(double x);

OrderedJson to_json(const WitnessReport& r);
OrderedJson to_json(const LcdResult& r, const LcdQuery& q);
OrderedJson to_json(const SmallBallEstimate& e, Ensemble ensemble);
OrderedJson to_json(const DistanceTailReport& r);
OrderedJson to_json(const TailFit& fit);

/// 64-bit FNV-1a over the bytes.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace lsv
