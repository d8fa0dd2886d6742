#include "incomefit/text.hpp"

#include "incomefit/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

namespace incomefit::text {

std::string format_double(double value)
{
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc())
    throw Error("format_double: conversion failed");
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view token)
{
  token = trim(token);
  if (!token.empty() && token.front() == '+')
    token.remove_prefix(1);
  if (token.empty())
    return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    return std::nullopt;
  return value;
}

std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void KeyValueDocument::set(std::string key, std::string value)
{
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = std::move(value);
      return;
    }
  entries_.emplace_back(std::move(key), std::move(value));
}

void KeyValueDocument::set(std::string key, double value)
{
  set(std::move(key), format_double(value));
}

bool KeyValueDocument::contains(std::string_view key) const
{
  return find(key).has_value();
}

std::optional<std::string> KeyValueDocument::find(std::string_view key) const
{
  for (const auto& [k, v] : entries_)
    if (k == key)
      return v;
  return std::nullopt;
}

const std::string& KeyValueDocument::get(std::string_view key) const
{
  for (const auto& [k, v] : entries_)
    if (k == key)
      return v;
  throw ParseError("missing key '" + std::string(key) + "'", 0);
}

double KeyValueDocument::get_double(std::string_view key) const
{
  const auto& raw = get(key);
  auto v = parse_double(raw);
  if (!v)
    throw ParseError("key '" + std::string(key) + "': not a number: '" + raw + "'", 0);
  return *v;
}

std::string KeyValueDocument::render() const
{
  std::string out;
  for (const auto& [k, v] : entries_)
    out += k + " = " + v + "\n";
  return out;
}

KeyValueDocument KeyValueDocument::parse(std::string_view text)
{
  KeyValueDocument doc;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("expected 'key = value'", line_no);
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
      throw ParseError("empty key", line_no);
    if (doc.contains(key))
      throw ParseError("duplicate key '" + key + "'", line_no);
    doc.entries_.emplace_back(std::move(key), std::move(value));
  }
  return doc;
}

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open '" + path.string() + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out)
      throw Error("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " +
                ec.message());
}

} // namespace incomefit::text
