#include "slateval/jsonl.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "slateval/errors.hpp"

namespace slateval {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line,
                       const std::string& what) {
  throw ValidationError(source + " line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> string_array(const nlohmann::json& j,
                                      const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array()) {
    throw std::runtime_error(std::string("'") + key +
                             "' must be an array of strings");
  }
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_string()) {
      throw std::runtime_error(std::string("'") + key +
                               "' must be an array of strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<double> number_array(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array()) {
    throw std::runtime_error(std::string("'") + key +
                             "' must be an array of numbers");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) {
      throw std::runtime_error(std::string("'") + key +
                               "' must be an array of numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

Dataset load_jsonl(std::istream& in, const std::string& source_name) {
  std::vector<LoggedImpression> impressions;
  std::unordered_map<std::string, std::vector<std::string>> candidates_of;
  std::size_t slate_size = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(source_name, line_no, std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
      fail(source_name, line_no, "record must be a JSON object");
    }
    LoggedImpression imp;
    try {
      imp.context_id = j.at("context_id").get<std::string>();
      imp.candidate_set = string_array(j, "candidates");
      imp.actions = string_array(j, "actions");
      imp.logging_propensities = number_array(j, "logging_propensities");
      imp.rewards = number_array(j, "rewards");
    } catch (const std::exception& e) {
      fail(source_name, line_no, e.what());
    }
    try {
      validate_impression(imp);
    } catch (const ValidationError& e) {
      fail(source_name, line_no, e.what());
    }
    if (impressions.empty()) {
      slate_size = imp.actions.size();
    } else if (imp.actions.size() != slate_size) {
      fail(source_name, line_no,
           "slate size " + std::to_string(imp.actions.size()) +
               " differs from the first record's " +
               std::to_string(slate_size));
    }
    auto [it, inserted] =
        candidates_of.try_emplace(imp.context_id, imp.candidate_set);
    if (!inserted && it->second != imp.candidate_set) {
      fail(source_name, line_no,
           "context '" + imp.context_id +
               "' appears with a different candidate set");
    }
    impressions.push_back(std::move(imp));
  }
  if (impressions.empty()) {
    throw ValidationError(source_name + ": no impressions");
  }
  return Dataset(impressions);
}

Dataset load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open logs file '" + path.string() + "'");
  }
  return load_jsonl(in, path.string());
}

void save_jsonl(const Dataset& dataset, std::ostream& out) {
  for (std::size_t n = 0; n < dataset.size(); ++n) {
    const LoggedImpression imp = dataset.impression(n);
    nlohmann::json j;
    j["context_id"] = imp.context_id;
    j["candidates"] = imp.candidate_set;
    j["actions"] = imp.actions;
    j["logging_propensities"] = imp.logging_propensities;
    j["rewards"] = imp.rewards;
    out << j.dump() << "\n";
  }
}

void save_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot write logs file '" + path.string() + "'");
  }
  save_jsonl(dataset, out);
}

}  // namespace slateval
