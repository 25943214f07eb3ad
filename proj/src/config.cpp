#include "epmc/config.hpp"

#include <fstream>
#include <sstream>

#include "epmc/errors.hpp"

namespace epmc {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.hash_ = fnv1a(text);
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: " + origin + ":" + std::to_string(number) +
                          ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config: " + origin + ":" + std::to_string(number) +
                          ": empty section name");
      cfg.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: " + origin + ":" + std::to_string(number) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    const auto hash_pos = value.find('#');
    if (hash_pos != std::string::npos) value = trim(value.substr(0, hash_pos));
    if (key.empty())
      throw ConfigError("config: " + origin + ":" + std::to_string(number) + ": empty key");
    if (section.empty())
      throw ConfigError("config: " + origin + ":" + std::to_string(number) +
                        ": key outside any [section]");
    if (cfg.data_[section].count(key))
      throw ConfigError("config: " + origin + ":" + std::to_string(number) + ": duplicate key '" +
                        key + "' in [" + section + "]");
    cfg.data_[section][key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto it = data_.find(section);
  return it != data_.end() && it->second.count(key) > 0;
}

std::vector<std::string> Config::keys(const std::string& section) const {
  std::vector<std::string> out;
  const auto it = data_.find(section);
  if (it == data_.end()) return out;
  for (const auto& [k, v] : it->second) out.push_back(k);
  return out;
}

std::vector<std::string> Config::sections() const {
  std::vector<std::string> out;
  for (const auto& [s, kv] : data_) out.push_back(s);
  return out;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               std::optional<std::string> fallback) const {
  if (!has(section, key)) {
    if (fallback) return *fallback;
    throw ConfigError("config: missing key '" + key + "' in [" + section + "]");
  }
  return data_.at(section).at(key);
}

double Config::get_double(const std::string& section, const std::string& key,
                          std::optional<double> fallback) const {
  if (!has(section, key)) {
    if (fallback) return *fallback;
    throw ConfigError("config: missing key '" + key + "' in [" + section + "]");
  }
  const std::string v = data_.at(section).at(key);
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' in [" + section + "]: '" + v +
                      "' is not a number");
  }
}

int Config::get_int(const std::string& section, const std::string& key,
                    std::optional<int> fallback) const {
  const double v = get_double(section, key,
                              fallback ? std::optional<double>(*fallback) : std::nullopt);
  const int out = static_cast<int>(v);
  if (static_cast<double>(out) != v)
    throw ConfigError("config: key '" + key + "' in [" + section + "] must be an integer");
  return out;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key,
                              std::optional<std::uint64_t> fallback) const {
  if (!has(section, key)) {
    if (fallback) return *fallback;
    throw ConfigError("config: missing key '" + key + "' in [" + section + "]");
  }
  const std::string v = data_.at(section).at(key);
  try {
    std::size_t pos = 0;
    const unsigned long long out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' in [" + section + "]: '" + v +
                      "' is not an unsigned integer");
  }
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      std::optional<bool> fallback) const {
  if (!has(section, key)) {
    if (fallback) return *fallback;
    throw ConfigError("config: missing key '" + key + "' in [" + section + "]");
  }
  const std::string v = data_.at(section).at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: key '" + key + "' in [" + section + "] must be a boolean");
}

std::vector<double> Config::get_vector(const std::string& section, const std::string& key,
                                       int length, std::optional<double> fallback) const {
  std::vector<double> out;
  if (!has(section, key)) {
    if (!fallback)
      throw ConfigError("config: missing key '" + key + "' in [" + section + "]");
    out.assign(length, *fallback);
    return out;
  }
  const std::string v = data_.at(section).at(key);
  std::string cell;
  std::istringstream ss(v);
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(cell, &pos));
      if (pos != cell.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' in [" + section + "]: '" + cell +
                        "' is not a number");
    }
  }
  if (static_cast<int>(out.size()) == 1 && length > 1) out.assign(length, out[0]);
  if (static_cast<int>(out.size()) != length)
    throw ConfigError("config: key '" + key + "' in [" + section + "] needs 1 or " +
                      std::to_string(length) + " values");
  return out;
}

}  // namespace epmc
