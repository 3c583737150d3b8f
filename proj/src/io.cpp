#include "glmdopt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace glmdopt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& field) {
  const std::string t = trim(field);
  if (t.empty()) return std::nullopt;
  double v = 0;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::optional<std::vector<double>> parse_row(const std::string& line) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    auto v = parse_number(field);
    if (!v) return std::nullopt;
    row.push_back(*v);
  }
  if (!line.empty() && line.back() == ',') return std::nullopt;
  return row;
}

Matrix<double> to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw ConfigError("design matrix has no rows");
  const auto d = rows.front().size();
  if (d == 0) throw ConfigError("design matrix has no columns");
  Matrix<double> X(static_cast<Index>(rows.size()), static_cast<Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d)
      throw ConfigError("design row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                        " columns, expected " + std::to_string(d));
    for (std::size_t j = 0; j < d; ++j) X(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  if (!X.allFinite()) throw ConfigError("design matrix has non-finite entries");
  if (X.rows() < X.cols())
    throw ConfigError("design has " + std::to_string(X.rows()) + " rows but " + std::to_string(X.cols()) +
                      " columns; need m >= d");
  return X;
}

double number_at(const nlohmann::json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

Vector<double> vector_from_json(const nlohmann::json& arr, const std::string& what) {
  if (!arr.is_array() || arr.empty()) throw ConfigError(what + " must be a non-empty array of numbers");
  Vector<double> v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i)
    v(static_cast<Index>(i)) = number_at(arr[i], what + "[" + std::to_string(i) + "]");
  return v;
}

PriorSpec<double> prior_from_json(const nlohmann::json& arr) {
  if (!arr.is_array() || arr.empty()) throw ConfigError("prior must be a non-empty array");
  PriorSpec<double> prior;
  for (std::size_t j = 0; j < arr.size(); ++j) {
    const auto& c = arr[j];
    const std::string where = "prior[" + std::to_string(j) + "]";
    if (!c.is_object() || !c.contains("dist") || !c.contains("params"))
      throw ConfigError(where + " needs \"dist\" and \"params\"");
    const auto dist = c.at("dist").get<std::string>();
    const auto params = vector_from_json(c.at("params"), where + ".params");
    if (dist == "uniform") {
      if (params.size() != 2) throw ConfigError(where + ": uniform takes [lo, hi]");
      if (!(params(0) < params(1)))
        throw ConfigError(where + ": uniform needs lo < hi (use \"point\" for a fixed value)");
      prior.components.push_back(UniformPrior<double>{params(0), params(1)});
    } else if (dist == "point") {
      if (params.size() != 1) throw ConfigError(where + ": point takes [value]");
      prior.components.push_back(PointPrior<double>{params(0)});
    } else {
      throw ConfigError(where + ": unknown dist \"" + dist + "\" (expected uniform or point)");
    }
  }
  return prior;
}

template <typename T>
T positive_int(const nlohmann::json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError(what + " must be a positive integer");
  return static_cast<T>(v.get<long long>());
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Matrix<double> parse_design_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto row = parse_row(trim(line));
    if (!row) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ConfigError("CSV line " + std::to_string(line_no) + " is not a list of numbers");
    }
    first = false;
    rows.push_back(std::move(*row));
  }
  return to_matrix(rows);
}

Matrix<double> read_design_csv(const std::filesystem::path& path) {
  try {
    return parse_design_csv(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Matrix<double> design_from_json(const nlohmann::json& rows) {
  if (!rows.is_array()) throw ConfigError("design must be an array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array()) throw ConfigError("design row " + std::to_string(i) + " is not an array");
    std::vector<double> r;
    for (const auto& v : rows[i]) r.push_back(number_at(v, "design entry"));
    out.push_back(std::move(r));
  }
  return to_matrix(out);
}

Vector<double> read_allocation_file(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto v = parse_number(t);
    if (!v) throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected a number");
    values.push_back(*v);
  }
  if (values.empty()) throw ConfigError(path.string() + ": no values");
  return Eigen::Map<const Vector<double>>(values.data(), static_cast<Index>(values.size()));
}

Counts read_counts_file(const std::filesystem::path& path) {
  const Vector<double> v = read_allocation_file(path);
  Counts n(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i) < 0 || v(i) != std::floor(v(i)))
      throw ConfigError(path.string() + ": entry " + std::to_string(i) + " is not a nonnegative integer");
    n(i) = static_cast<long long>(v(i));
  }
  return n;
}

namespace {

const char* const kConfigKeys[] = {"design", "design_csv", "family", "shape", "variance", "beta",
                                   "prior",  "total",      "seed",   "options"};

ProblemConfig parse_config_object(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (std::find(std::begin(kConfigKeys), std::end(kConfigKeys), key) == std::end(kConfigKeys))
      throw ConfigError("unknown config key \"" + key + "\"");
  }
  ProblemConfig cfg;

  const bool inline_design = doc.contains("design");
  const bool csv_design = doc.contains("design_csv");
  if (inline_design == csv_design) throw ConfigError("give exactly one of \"design\" or \"design_csv\"");
  if (inline_design) {
    cfg.design = design_from_json(doc.at("design"));
  } else {
    std::filesystem::path p = doc.at("design_csv").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    cfg.design = read_design_csv(p);
  }
  const Index d = cfg.design.cols();

  if (!doc.contains("family")) throw ConfigError("missing \"family\"");
  const auto family_name = doc.at("family").get<std::string>();
  const auto family = parse_family_link(family_name);
  if (!family) throw ConfigError("unknown family \"" + family_name + "\"");
  cfg.model.family_link = *family;
  if (doc.contains("shape")) cfg.model.shape = number_at(doc.at("shape"), "shape");
  if (doc.contains("variance")) cfg.model.variance = number_at(doc.at("variance"), "variance");
  if (*family == FamilyLink::GammaInverse && !(cfg.model.shape > 0))
    throw ConfigError("gamma-inverse needs \"shape\" > 0");
  if (*family == FamilyLink::NormalIdentity && !(cfg.model.variance > 0))
    throw ConfigError("normal-identity needs \"variance\" > 0");

  const bool has_beta = doc.contains("beta");
  const bool has_prior = doc.contains("prior");
  if (has_beta == has_prior) throw ConfigError("give exactly one of \"beta\" or \"prior\"");
  if (has_beta) {
    cfg.model.beta = vector_from_json(doc.at("beta"), "beta");
    if (cfg.model.beta.size() != d)
      throw ConfigError("beta has " + std::to_string(cfg.model.beta.size()) + " entries but the design has " +
                        std::to_string(d) + " columns");
  } else {
    cfg.prior = prior_from_json(doc.at("prior"));
    if (cfg.prior->size() != d)
      throw ConfigError("prior has " + std::to_string(cfg.prior->size()) + " entries but the design has " +
                        std::to_string(d) + " columns");
  }

  if (doc.contains("total")) {
    cfg.total = positive_int<long long>(doc.at("total"), "total");
    if (*cfg.total < d) throw ConfigError("total must be at least the number of parameters d");
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }

  if (doc.contains("options")) {
    const auto& o = doc.at("options");
    if (!o.is_object()) throw ConfigError("options must be an object");
    for (const auto& [key, v] : o.items()) {
      if (key == "max_rounds") {
        cfg.lift.max_rounds = positive_int<int>(v, key);
        cfg.exchange.max_rounds = cfg.lift.max_rounds;
      } else if (key == "tol") {
        cfg.lift.tol = number_at(v, key);
        if (!(cfg.lift.tol > 0)) throw ConfigError("tol must be > 0");
      } else if (key == "safeguard_period") {
        cfg.lift.safeguard_period = positive_int<int>(v, key);
      } else if (key == "certify_tol") {
        cfg.lift.certify_tol = number_at(v, key);
        if (!(cfg.lift.certify_tol > 0)) throw ConfigError("certify_tol must be > 0");
      } else if (key == "starts") {
        cfg.exchange.starts = positive_int<int>(v, key);
      } else if (key == "mc_samples") {
        cfg.mc_samples = positive_int<std::uint64_t>(v, key);
      } else if (key == "ew_method") {
        const auto m = v.get<std::string>();
        if (m == "closed-form") cfg.ew_method = EwMethodChoice::ClosedForm;
        else if (m == "monte-carlo") cfg.ew_method = EwMethodChoice::MonteCarlo;
        else throw ConfigError("ew_method must be \"closed-form\" or \"monte-carlo\"");
      } else {
        throw ConfigError("unknown option \"" + key + "\"");
      }
    }
  }
  return cfg;
}

}  // namespace

ProblemConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  try {
    return parse_config_object(doc, base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ProblemConfig load_config(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace glmdopt
