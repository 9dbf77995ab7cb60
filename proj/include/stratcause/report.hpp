#pragma once

// JSON renderings of analysis results. Field sets are fixed: an entry that
// does not apply is written as null rather than omitted.

#include "json.hpp"
#include "stratcause/bounds.hpp"
#include "stratcause/covselect.hpp"
#include "stratcause/identify.hpp"
#include "stratcause/oracle.hpp"

namespace stratcause {

nlohmann::json to_json(const Interval& iv);
nlohmann::json to_json(const Estimate& est);
nlohmann::json to_json(const MonotonicityReport& report);
nlohmann::json to_json(const CIVerdict& verdict);
nlohmann::json to_json(const SelectionReport& report);
nlohmann::json to_json(const oracle::VerificationReport& report);
nlohmann::json to_json(const CompatibilityReport& report);

}  // namespace stratcause
