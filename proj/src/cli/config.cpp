#include "gravnet/cli/config.hpp"

#include <fstream>
#include <map>
#include <set>

#include "gravnet/core/errors.hpp"
#include "gravnet/core/factor.hpp"

namespace gravnet::cli {

namespace {

const std::set<std::string> kKeys{"title",   "family",  "data",    "attributes", "outcome",
                                  "terms",   "deciles", "factors", "cluster"};

std::string trim(std::string s) {
  const char* ws = " \t\r";
  s.erase(0, s.find_first_not_of(ws));
  const auto last = s.find_last_not_of(ws);
  s.erase(last == std::string::npos ? 0 : last + 1);
  return s;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  int depth = 0;
  for (char c : value) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      if (!trim(item).empty()) out.push_back(trim(item));
      item.clear();
    } else {
      item += c;
    }
  }
  if (!trim(item).empty()) out.push_back(trim(item));
  return out;
}

using Section = std::map<std::string, std::pair<std::string, std::size_t>>;

ColumnConfig make_column(const std::string& name, const Section& defaults,
                         const Section& overrides, const std::string& source,
                         const std::filesystem::path& base_dir) {
  Section merged = defaults;
  for (const auto& [k, v] : overrides) merged[k] = v;
  auto at = [&](const std::string& key) {
    auto it = merged.find(key);
    return source + ":" + (it == merged.end() ? std::string("?") : std::to_string(it->second.second));
  };
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = merged.find(key);
    if (it == merged.end() || it->second.first.empty()) return std::nullopt;
    return it->second.first;
  };

  ColumnConfig col;
  col.name = name;
  if (auto d = get("data")) col.data = base_dir / *d;
  if (auto a = get("attributes")) col.attributes = base_dir / *a;
  if (!col.data && !col.attributes) {
    throw ValidationError(source + ": column '" + name + "' names no data or attributes file");
  }
  auto& spec = col.spec;
  auto outcome = get("outcome");
  if (!outcome) throw ValidationError(source + ": column '" + name + "' has no outcome");
  spec.outcome = *outcome;
  const std::string family = get("family").value_or("ols");
  if (family == "ols") {
    spec.family = regress::Family::ols;
  } else if (family == "ppml") {
    spec.family = regress::Family::ppml;
  } else {
    throw ValidationError(at("family") + ": unknown family '" + family + "' (ols, ppml)");
  }
  try {
    for (const auto& t : split_list(get("terms").value_or(""))) {
      spec.continuous_terms.push_back(regress::parse_term(t));
    }
    spec.decile_terms = split_list(get("deciles").value_or(""));
    for (const auto& f : split_list(get("factors").value_or(""))) {
      spec.factors.push_back(parse_factor(f));
    }
    for (const auto& f : split_list(get("cluster").value_or(""))) {
      spec.cluster_dims.push_back(parse_factor(f));
    }
    spec.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(source + ": column '" + name + "': " + e.what());
  }
  if (spec.continuous_terms.empty() && spec.decile_terms.empty()) {
    throw ValidationError(source + ": column '" + name + "' has no terms or deciles");
  }
  return col;
}

}  // namespace

FitConfig parse_fit_config(std::istream& in, const std::string& source,
                           const std::filesystem::path& base_dir) {
  Section defaults;
  std::vector<std::pair<std::string, Section>> sections;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(where + ": unterminated section header");
      std::string header = trim(line.substr(1, line.size() - 2));
      if (header.rfind("column", 0) != 0) {
        throw ValidationError(where + ": unknown section '" + header + "'");
      }
      std::string name = trim(header.substr(6));
      if (name.empty()) name = std::to_string(sections.size() + 1);
      for (const auto& s : sections) {
        if (s.first == name) throw ValidationError(where + ": duplicate column '" + name + "'");
      }
      sections.emplace_back(name, Section{});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!kKeys.contains(key)) throw ValidationError(where + ": unknown key '" + key + "'");
    Section& target = sections.empty() ? defaults : sections.back().second;
    if (target.contains(key)) throw ValidationError(where + ": duplicate key '" + key + "'");
    target[key] = {value, line_no};
  }

  FitConfig cfg;
  if (auto it = defaults.find("title"); it != defaults.end()) cfg.title = it->second.first;
  if (sections.empty()) {
    cfg.columns.push_back(make_column("(1)", defaults, {}, source, base_dir));
  }
  for (const auto& [name, section] : sections) {
    if (section.contains("title")) {
      throw ValidationError(source + ":" + std::to_string(section.at("title").second) +
                            ": title belongs before the first column");
    }
    cfg.columns.push_back(make_column(name, defaults, section, source, base_dir));
  }
  return cfg;
}

FitConfig read_fit_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_fit_config(in, path.string(), path.parent_path());
}

}  // namespace gravnet::cli
