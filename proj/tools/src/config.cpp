#include "lrca/cli/cli.hpp"

#include "lrca/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace lrca::cli {

namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "dgp",          "n",           "replications",  "master_seed",      "levels",
      "tests",        "workers",     "parameters",    "arch_start",       "arch_info",
      "arch_curvature", "shape_restricted", "null_beta0", "moment",       "weibull_info",
      "correlation",  "variance_ratio", "quadratic_info", "check_identity", "grid",
      "calibrate_test", "calibrate_df", "formats"};
  return keys;
}

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw UsageError("config field '" + field + "': " + why);
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) bad(field, "expected a number");
  return v.get<double>();
}

std::uint64_t count(const json& v, const std::string& field) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    bad(field, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

bool boolean(const json& v, const std::string& field) {
  if (!v.is_boolean()) bad(field, "expected true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& field) {
  if (!v.is_string()) bad(field, "expected a string");
  return v.get<std::string>();
}

template <class E>
E choice(const json& v, const std::string& field, const std::vector<std::pair<std::string, E>>& options) {
  const std::string s = text(v, field);
  std::string names;
  for (const auto& [name, value] : options) {
    if (name == s) return value;
    names += (names.empty() ? "" : ", ") + name;
  }
  bad(field, "'" + s + "' is not one of " + names);
}

const std::vector<std::pair<std::string, InfoEstimator>> kInfo{
    {"opg", InfoEstimator::OuterProduct},
    {"centered-opg", InfoEstimator::CenteredOuterProduct},
    {"hessian", InfoEstimator::Hessian}};

}  // namespace

FileConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!known_keys().count(key)) bad(key, "unknown field");
  }

  FileConfig out;
  ExperimentConfig& c = out.experiment;
  if (doc.contains("dgp")) c.dgp = text(doc["dgp"], "dgp");
  if (doc.contains("n")) c.n = count(doc["n"], "n");
  if (doc.contains("replications")) c.replications = count(doc["replications"], "replications");
  if (doc.contains("master_seed")) c.master_seed = count(doc["master_seed"], "master_seed");
  if (doc.contains("workers")) c.workers = static_cast<unsigned>(count(doc["workers"], "workers"));
  if (doc.contains("levels")) {
    const json& v = doc["levels"];
    if (!v.is_array() || v.empty()) bad("levels", "expected a nonempty array of numbers");
    c.levels.clear();
    for (const auto& x : v) c.levels.push_back(number(x, "levels"));
  }
  if (doc.contains("tests")) {
    const json& v = doc["tests"];
    if (!v.is_array()) bad("tests", "expected an array of test names");
    c.tests.clear();
    for (const auto& x : v) {
      try {
        c.tests.push_back(parse_test_kind(text(x, "tests")));
      } catch (const Error& e) {
        bad("tests", e.what());
      }
    }
  }
  if (doc.contains("parameters")) {
    const json& v = doc["parameters"];
    if (!v.is_array() || v.empty()) bad("parameters", "expected a nonempty array of numbers");
    Vector p(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<Eigen::Index>(i)] = number(v[i], "parameters");
    c.parameters = p;
  }
  if (doc.contains("arch_start")) {
    c.arch_start = choice<ArchStart>(doc["arch_start"], "arch_start",
                                     {{"restricted-olse", ArchStart::RestrictedOlse},
                                      {"unrestricted-olse", ArchStart::UnrestrictedOlse}});
  }
  if (doc.contains("arch_info")) c.arch_info = choice(doc["arch_info"], "arch_info", kInfo);
  if (doc.contains("arch_curvature")) {
    c.arch_curvature = choice<models::ArchCurvature>(
        doc["arch_curvature"], "arch_curvature",
        {{"observed", models::ArchCurvature::Observed}, {"expected", models::ArchCurvature::Expected}});
  }
  if (doc.contains("shape_restricted")) c.shape_restricted = boolean(doc["shape_restricted"], "shape_restricted");
  if (doc.contains("null_beta0")) c.null_beta0 = number(doc["null_beta0"], "null_beta0");
  if (doc.contains("moment")) {
    c.moment = choice<models::MomentConvention>(
        doc["moment"], "moment",
        {{"consistent", models::MomentConvention::Consistent},
         {"flipped-sign", models::MomentConvention::FlippedSign}});
  }
  if (doc.contains("weibull_info")) c.weibull_info = choice(doc["weibull_info"], "weibull_info", kInfo);
  if (doc.contains("correlation")) c.correlation = number(doc["correlation"], "correlation");
  if (doc.contains("variance_ratio")) c.variance_ratio = number(doc["variance_ratio"], "variance_ratio");
  if (doc.contains("quadratic_info")) {
    c.quadratic_info = choice<models::MeanInfo>(
        doc["quadratic_info"], "quadratic_info",
        {{"population", models::MeanInfo::Population},
         {"opg", models::MeanInfo::OuterProduct},
         {"centered-opg", models::MeanInfo::CenteredOuterProduct},
         {"working", models::MeanInfo::Working}});
  }
  if (doc.contains("check_identity")) c.check_identity = boolean(doc["check_identity"], "check_identity");

  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    if (!g.is_object()) bad("grid", "expected an object with from, to, step");
    PowerGrid grid;
    for (const auto& [key, v] : g.items()) {
      if (key == "from") grid.from = number(v, "grid.from");
      else if (key == "to") grid.to = number(v, "grid.to");
      else if (key == "step") grid.step = number(v, "grid.step");
      else bad("grid." + key, "unknown field");
    }
    if (!(grid.step > 0.0) || !(grid.to > grid.from)) bad("grid", "need from < to and step > 0");
    out.grid = grid;
  }
  if (doc.contains("calibrate_test")) {
    try {
      out.calibrate_test = parse_test_kind(text(doc["calibrate_test"], "calibrate_test"));
    } catch (const Error& e) {
      bad("calibrate_test", e.what());
    }
  }
  if (doc.contains("calibrate_df")) {
    const auto df = count(doc["calibrate_df"], "calibrate_df");
    if (df < 1 || df > 1000) bad("calibrate_df", "expected an integer in 1..1000");
    out.calibrate_df = static_cast<int>(df);
  }
  if (doc.contains("formats")) {
    const json& v = doc["formats"];
    if (!v.is_array() || v.empty()) bad("formats", "expected a nonempty array of \"csv\" / \"md\"");
    out.formats.clear();
    for (const auto& x : v) {
      const std::string f = text(x, "formats");
      if (f != "csv" && f != "md") bad("formats", "'" + f + "' is not csv or md");
      out.formats.push_back(f);
    }
  }

  try {
    c.validate();
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return out;
}

FileConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace lrca::cli
