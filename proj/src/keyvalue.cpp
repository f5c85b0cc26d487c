#include "reverbmatch/keyvalue.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace reverbmatch {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw std::invalid_argument(std::string(what) + ": not a number: '" + std::string(text) + "'");
  return value;
}

KeyValueRecord KeyValueRecord::parse(std::string_view text, std::string_view source) {
  KeyValueRecord record;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw std::invalid_argument(std::string(source) + ":" + std::to_string(line_no) +
                                  ": expected key=value");
    record.set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
  return record;
}

KeyValueRecord KeyValueRecord::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.string());
}

void KeyValueRecord::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

void KeyValueRecord::set(std::string key, double value) { set(std::move(key), format_double(value)); }

void KeyValueRecord::set(std::string key, std::int64_t value) {
  set(std::move(key), std::to_string(value));
}

bool KeyValueRecord::has(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> KeyValueRecord::find(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::string KeyValueRecord::get(std::string_view key) const {
  auto v = find(key);
  if (!v) throw std::invalid_argument("missing key '" + std::string(key) + "'");
  return *v;
}

double KeyValueRecord::get_double(std::string_view key) const {
  return parse_double(get(key), key);
}

std::int64_t KeyValueRecord::get_int(std::string_view key) const {
  const std::string text = get(key);
  std::int64_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size())
    throw std::invalid_argument(std::string(key) + ": not an integer: '" + text + "'");
  return value;
}

void KeyValueRecord::merge(const KeyValueRecord& other) {
  for (const auto& [k, v] : other.entries_) set(k, v);
}

std::string KeyValueRecord::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw std::runtime_error("write failed: " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace reverbmatch
