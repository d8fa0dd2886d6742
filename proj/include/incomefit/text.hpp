#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace incomefit::text {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

/// Parses a whole token as a double; nullopt on trailing garbage or empty input.
std::optional<double> parse_double(std::string_view token);

std::string_view trim(std::string_view s);

/// Ordered `key = value` document. Lines starting with '#' are comments.
/// Keys keep insertion order on output.
class KeyValueDocument
{
public:
  void set(std::string key, std::string value);
  void set(std::string key, double value);
  bool contains(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;
  double get_double(std::string_view key) const;

  const auto& entries() const { return entries_; }

  std::string render() const;
  /// Throws ParseError naming the line on malformed input or duplicate keys.
  static KeyValueDocument parse(std::string_view text);

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string read_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

} // namespace incomefit::text
