#ifndef EPMC_CONFIG_HPP
#define EPMC_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace epmc {

// Key-value configuration with [section] headers, '#' comments and
// comma-separated vector values. Unknown sections or keys are rejected by
// the CLI against its schema (see docs/config.md).
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  std::vector<std::string> keys(const std::string& section) const;
  std::vector<std::string> sections() const;

  std::string get_string(const std::string& section, const std::string& key,
                         std::optional<std::string> fallback = std::nullopt) const;
  double get_double(const std::string& section, const std::string& key,
                    std::optional<double> fallback = std::nullopt) const;
  int get_int(const std::string& section, const std::string& key,
              std::optional<int> fallback = std::nullopt) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::optional<std::uint64_t> fallback = std::nullopt) const;
  bool get_bool(const std::string& section, const std::string& key,
                std::optional<bool> fallback = std::nullopt) const;
  // Scalar values broadcast to the requested length.
  std::vector<double> get_vector(const std::string& section, const std::string& key, int length,
                                 std::optional<double> fallback = std::nullopt) const;

  // FNV-1a of the raw file bytes; stamped into every output file.
  std::uint64_t content_hash() const { return hash_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
  std::uint64_t hash_ = 0;
};

}  // namespace epmc

#endif  // EPMC_CONFIG_HPP
