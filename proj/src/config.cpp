#include "ucv/config.hpp"

#include <fstream>
#include <sstream>

#include "ucv/csv.hpp"
#include "ucv/errors.hpp"

namespace ucv {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

[[noreturn]] void bad(int line, const std::string& what) {
  fail(ErrorCode::ConfigError, "line " + std::to_string(line) + ": " + what);
}

double num(const std::string& value, int line, const std::string& key) {
  try {
    return parse_number(value, key);
  } catch (const Error& err) {
    bad(line, err.what());
  }
}

long integer(const std::string& value, int line, const std::string& key) {
  const double v = num(value, line, key);
  const long i = static_cast<long>(v);
  if (static_cast<double>(i) != v) bad(line, key + ": expected an integer");
  return i;
}

bool boolean(const std::string& value, int line, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad(line, key + ": expected true/false");
}

// "7", "1,3,5" or "1..13".
std::vector<int> treated_list(const std::string& value, int line) {
  std::vector<int> out;
  const auto dots = value.find("..");
  if (dots != std::string::npos) {
    const int lo = static_cast<int>(
        integer(trim(value.substr(0, dots)), line, "treated"));
    const int hi = static_cast<int>(
        integer(trim(value.substr(dots + 2)), line, "treated"));
    if (hi < lo) bad(line, "treated: empty range");
    for (int c = lo; c <= hi; ++c) out.push_back(c);
    return out;
  }
  for (const auto& tok : split(value, ','))
    out.push_back(static_cast<int>(integer(tok, line, "treated")));
  return out;
}

}  // namespace

SimulationConfig parse_study_config_string(const std::string& text) {
  SimulationConfig config;
  bool methods_given = false;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) bad(line_no, key + ": empty value");

    if (key == "clusters") {
      config.num_clusters = static_cast<int>(integer(value, line_no, key));
    } else if (key == "observations") {
      config.n = static_cast<int>(integer(value, line_no, key));
    } else if (key == "balance") {
      if (value == "balanced") config.balance.kind = BalanceKind::Balanced;
      else if (value == "unbalanced") config.balance.kind = BalanceKind::Unbalanced;
      else bad(line_no, "balance: expected balanced or unbalanced");
    } else if (key == "imbalance_gamma") {
      config.balance.gamma = num(value, line_no, key);
    } else if (key == "design") {
      if (value == "sv1") config.design.kind = DesignKind::SV1;
      else if (value == "sv2") config.design.kind = DesignKind::SV2;
      else if (value == "sv3") config.design.kind = DesignKind::SV3;
      else bad(line_no, "design: expected sv1, sv2 or sv3");
    } else if (key == "sigma2") {
      config.design.sigma2 = num(value, line_no, key);
    } else if (key == "tau2") {
      config.design.tau2 = num(value, line_no, key);
    } else if (key == "rho") {
      config.design.rho = num(value, line_no, key);
    } else if (key == "delta") {
      config.design.delta = num(value, line_no, key);
    } else if (key == "treated") {
      config.treated_counts = treated_list(value, line_no);
    } else if (key == "alpha") {
      config.alpha = num(value, line_no, key);
    } else if (key == "beta") {
      config.beta = num(value, line_no, key);
    } else if (key == "gamma") {
      config.gamma_coef = num(value, line_no, key);
    } else if (key == "replications") {
      config.replications = integer(value, line_no, key);
    } else if (key == "levels") {
      config.levels.clear();
      for (const auto& tok : split(value, ','))
        config.levels.push_back(num(tok, line_no, key));
    } else if (key == "seed") {
      config.seed = static_cast<uint64_t>(integer(value, line_no, key));
    } else if (key == "methods") {
      config.methods.clear();
      methods_given = true;
      for (const auto& tok : split(value, ',')) {
        try {
          config.methods.push_back(method_from_name(tok));
        } catch (const Error& err) {
          bad(line_no, std::string("methods: ") + err.what());
        }
      }
    } else if (key == "redraw_x") {
      config.redraw_x = boolean(value, line_no, key);
    } else {
      bad(line_no, "unknown key '" + key + "'");
    }
  }
  (void)methods_given;
  config.validate();
  return config;
}

SimulationConfig parse_study_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_study_config_string(buf.str());
}

}  // namespace ucv
