#pragma once

// Text formats: the count CSV and the JSON mirrors of StratifiedJoint and
// ExperimentalQuantities.
//
// CSV: header `<covariate columns...>,x,y,count` (column order free, the
// three fixed names are located by name). x and y take 1 or 0; 1 means
// exposed / event. Blank lines and lines starting with '#' are skipped.

#include <istream>
#include <string>

#include "json.hpp"
#include "stratcause/model.hpp"

namespace stratcause {

/// `source` is only used in error messages ("file.csv:12: ...").
CountTable load_counts(std::istream& in, const std::string& source = "<input>");
CountTable load_counts_file(const std::string& path);

/// Inverse of load_counts; one row per aggregated cell.
std::string render_counts(const CountTable& counts);

nlohmann::json to_json(const StratumKey& key);
StratumKey stratum_key_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StratifiedJoint& joint);
StratifiedJoint joint_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExperimentalQuantities& exp);
/// Reads `{"strata": [{"key": {...}, "p_y_do_x": .., "p_y_do_xprime": ..}]}`.
/// The marginal is recomputed from `joint`.
ExperimentalQuantities experimental_from_json(const nlohmann::json& j, const StratifiedJoint& joint);

nlohmann::json read_json_file(const std::string& path);

}  // namespace stratcause
