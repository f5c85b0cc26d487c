#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace reverbmatch {

/// Flat `key=value` records, one per line. Blank lines and lines starting
/// with '#' are ignored. Keys keep insertion order so written files diff
/// cleanly. Doubles are written in shortest round-trip form.
class KeyValueRecord {
 public:
  static KeyValueRecord parse(std::string_view text, std::string_view source = "<text>");
  static KeyValueRecord load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  void set(std::string key, double value);
  void set(std::string key, std::int64_t value);
  void set(std::string key, std::size_t value) { set(std::move(key), static_cast<std::int64_t>(value)); }
  void set(std::string key, int value) { set(std::move(key), static_cast<std::int64_t>(value)); }
  void set(std::string key, bool value) { set(std::move(key), std::string(value ? "1" : "0")); }
  void set(std::string key, const char* value) { set(std::move(key), std::string(value)); }

  bool has(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;
  std::string get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;

  /// Entries of `other` replace or extend this record.
  void merge(const KeyValueRecord& other);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string to_string() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double value);
double parse_double(std::string_view text, std::string_view what);

/// Writes `bytes` to a sibling temporary file and renames it into place, so a
/// failed run never leaves a truncated output behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace reverbmatch
