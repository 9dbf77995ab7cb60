#include "stratcause/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace stratcause {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

CountTable load_counts(std::istream& in, const std::string& source) {
  std::string raw;
  int line_no = 0;
  std::vector<std::string> header;
  int x_col = -1, y_col = -1, count_col = -1;
  std::vector<std::pair<int, std::string>> covariate_cols;
  std::vector<CountCell> rows;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_fields(line);

    if (header.empty()) {
      header = fields;
      for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        const std::string& name = header[i];
        if (name.empty()) fail(source, line_no, "empty column name in header");
        if (name == "x") {
          x_col = i;
        } else if (name == "y") {
          y_col = i;
        } else if (name == "count") {
          count_col = i;
        } else {
          for (const auto& [col, existing] : covariate_cols) {
            if (existing == name) fail(source, line_no, "duplicate column '" + name + "'");
          }
          covariate_cols.emplace_back(i, name);
        }
      }
      if (x_col < 0 || y_col < 0 || count_col < 0) {
        fail(source, line_no, "header must contain the columns x, y and count");
      }
      continue;
    }

    if (fields.size() != header.size()) {
      fail(source, line_no,
           "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    CountCell cell;
    const std::string& xs = fields[x_col];
    const std::string& ys = fields[y_col];
    if (xs == "1") {
      cell.x = ExposureLevel::kExposed;
    } else if (xs == "0") {
      cell.x = ExposureLevel::kUnexposed;
    } else {
      fail(source, line_no, "unknown x level '" + xs + "' (expected 1 or 0)");
    }
    if (ys == "1") {
      cell.y = OutcomeLevel::kEvent;
    } else if (ys == "0") {
      cell.y = OutcomeLevel::kNoEvent;
    } else {
      fail(source, line_no, "unknown y level '" + ys + "' (expected 1 or 0)");
    }
    const std::string& cs = fields[count_col];
    const auto [ptr, ec] = std::from_chars(cs.data(), cs.data() + cs.size(), cell.count);
    if (ec != std::errc() || ptr != cs.data() + cs.size()) fail(source, line_no, "malformed count '" + cs + "'");
    if (cell.count < 0) fail(source, line_no, "negative count " + cs);

    std::vector<StratumKey::Label> labels;
    for (const auto& [col, name] : covariate_cols) {
      if (fields[col].empty()) fail(source, line_no, "empty level for covariate '" + name + "'");
      labels.emplace_back(name, fields[col]);
    }
    cell.key = StratumKey(std::move(labels));
    rows.push_back(std::move(cell));
  }
  if (header.empty()) fail(source, line_no, "no header row");

  std::vector<std::string> covariates;
  for (const auto& [col, name] : covariate_cols) covariates.push_back(name);
  try {
    return CountTable(std::move(covariates), rows);
  } catch (const ValidationError& e) {
    throw ParseError(source + ": " + e.what());
  }
}

CountTable load_counts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return load_counts(in, path);
}

std::string render_counts(const CountTable& counts) {
  std::ostringstream out;
  for (const auto& name : counts.covariates()) out << name << ',';
  out << "x,y,count\n";
  for (const auto& row : counts.rows()) {
    for (const auto& [name, level] : row.key.labels()) out << level << ',';
    out << (row.x == ExposureLevel::kExposed ? 1 : 0) << ',' << (row.y == OutcomeLevel::kEvent ? 1 : 0) << ','
        << row.count << '\n';
  }
  return out.str();
}

json to_json(const StratumKey& key) {
  json j = json::object();
  for (const auto& [name, level] : key.labels()) j[name] = level;
  return j;
}

StratumKey stratum_key_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("stratum key must be a JSON object");
  std::vector<StratumKey::Label> labels;
  for (const auto& [name, level] : j.items()) {
    if (!level.is_string()) throw ParseError("level of covariate '" + name + "' must be a string");
    labels.emplace_back(name, level.get<std::string>());
  }
  return StratumKey(std::move(labels));
}

json to_json(const StratifiedJoint& joint) {
  json strata = json::array();
  for (const auto& [key, t] : joint.strata()) {
    strata.push_back({{"key", to_json(key)},
                      {"p_xy", t.p_xy},
                      {"p_xyprime", t.p_xyp},
                      {"p_xprime_y", t.p_xpy},
                      {"p_xprime_yprime", t.p_xpyp},
                      {"weight", t.weight}});
  }
  json j = {{"covariates", joint.covariates()}, {"strata", std::move(strata)}};
  j["total_n"] = joint.total_n() ? json(*joint.total_n()) : json(nullptr);
  return j;
}

StratifiedJoint joint_from_json(const json& j) {
  try {
    StratifiedJoint::Strata strata;
    for (const auto& s : j.at("strata")) {
      StratumTable t{.p_xy = s.at("p_xy").get<double>(),
                     .p_xyp = s.at("p_xyprime").get<double>(),
                     .p_xpy = s.at("p_xprime_y").get<double>(),
                     .p_xpyp = s.at("p_xprime_yprime").get<double>(),
                     .weight = s.at("weight").get<double>()};
      if (!strata.emplace(stratum_key_from_json(s.at("key")), t).second) {
        throw ParseError("duplicate stratum key in joint JSON");
      }
    }
    std::optional<std::int64_t> n;
    if (j.contains("total_n") && !j["total_n"].is_null()) n = j["total_n"].get<std::int64_t>();
    return StratifiedJoint(j.at("covariates").get<std::vector<std::string>>(), std::move(strata), n);
  } catch (const json::exception& e) {
    throw ParseError(std::string("joint JSON: ") + e.what());
  }
}

json to_json(const ExperimentalQuantities& exp) {
  json strata = json::array();
  for (const auto& [key, e] : exp.per_stratum()) {
    strata.push_back({{"key", to_json(key)}, {"p_y_do_x", e.p_y_do_x}, {"p_y_do_xprime", e.p_y_do_xp}});
  }
  return {{"strata", std::move(strata)},
          {"marginal", {{"p_y_do_x", exp.marginal().p_y_do_x}, {"p_y_do_xprime", exp.marginal().p_y_do_xp}}},
          {"provenance", to_string(exp.provenance())}};
}

ExperimentalQuantities experimental_from_json(const json& j, const StratifiedJoint& joint) {
  try {
    std::map<StratumKey, ExperimentalPair> per;
    for (const auto& s : j.at("strata")) {
      ExperimentalPair pair{s.at("p_y_do_x").get<double>(), s.at("p_y_do_xprime").get<double>()};
      if (!per.emplace(stratum_key_from_json(s.at("key")), pair).second) {
        throw ParseError("duplicate stratum key in experimental JSON");
      }
    }
    return ExperimentalQuantities(joint, std::move(per), Provenance::kMeasuredExperimental);
  } catch (const json::exception& e) {
    throw ParseError(std::string("experimental JSON: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace stratcause
