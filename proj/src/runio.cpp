#include "lieflow/runio.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "run-artifact containers are little-endian");

namespace lieflow {

BinaryWriter::BinaryWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw IoError("cannot open for writing: " + path);
}

void BinaryWriter::magic(const char tag[4], std::uint32_t version) {
  out_.write(tag, 4);
  u32(version);
}
void BinaryWriter::u8(std::uint8_t v) { out_.write(reinterpret_cast<const char*>(&v), 1); }
void BinaryWriter::u32(std::uint32_t v) { out_.write(reinterpret_cast<const char*>(&v), 4); }
void BinaryWriter::u64(std::uint64_t v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
void BinaryWriter::f64(double v) { out_.write(reinterpret_cast<const char*>(&v), 8); }
void BinaryWriter::f64_block(const double* data, std::size_t count) {
  out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
}
void BinaryWriter::text_block(const std::string& s) {
  u32(static_cast<std::uint32_t>(s.size()));
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void BinaryWriter::close() {
  out_.flush();
  if (!out_) throw IoError("write failure: " + path_);
  out_.close();
}

BinaryReader::BinaryReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw IoError("cannot open for reading: " + path);
}

void BinaryReader::need(std::size_t bytes) {
  if (!in_ || in_.peek() == std::char_traits<char>::eof()) {
    std::string where = context_.empty() ? "" : (" at " + context_);
    throw ParseError("truncated file" + where + ": " + path_ + " (needed " +
                     std::to_string(bytes) + " more bytes)");
  }
}

std::uint32_t BinaryReader::magic(const char tag[4]) {
  char got[4];
  need(4);
  in_.read(got, 4);
  if (in_.gcount() != 4 || std::memcmp(got, tag, 4) != 0)
    throw ParseError("bad magic in " + path_);
  return u32();
}
std::uint8_t BinaryReader::u8() {
  need(1);
  std::uint8_t v;
  in_.read(reinterpret_cast<char*>(&v), 1);
  if (in_.gcount() != 1) throw ParseError("truncated file: " + path_);
  return v;
}
std::uint32_t BinaryReader::u32() {
  need(4);
  std::uint32_t v;
  in_.read(reinterpret_cast<char*>(&v), 4);
  if (in_.gcount() != 4) throw ParseError("truncated file: " + path_);
  return v;
}
std::uint64_t BinaryReader::u64() {
  need(8);
  std::uint64_t v;
  in_.read(reinterpret_cast<char*>(&v), 8);
  if (in_.gcount() != 8) throw ParseError("truncated file: " + path_);
  return v;
}
double BinaryReader::f64() {
  need(8);
  double v;
  in_.read(reinterpret_cast<char*>(&v), 8);
  if (in_.gcount() != 8) throw ParseError("truncated file: " + path_);
  return v;
}
void BinaryReader::f64_block(double* data, std::size_t count) {
  if (count == 0) return;
  need(count * 8);
  in_.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
  if (in_.gcount() != static_cast<std::streamsize>(count * 8)) {
    std::string where = context_.empty() ? "" : (" at " + context_);
    throw ParseError("truncated file" + where + ": " + path_);
  }
}
std::string BinaryReader::text_block() {
  std::uint32_t n = u32();
  if (n == 0) return {};
  need(n);
  std::string s(n, '\0');
  in_.read(s.data(), n);
  if (in_.gcount() != static_cast<std::streamsize>(n))
    throw ParseError("truncated text block in " + path_);
  return s;
}
bool BinaryReader::at_eof() { return !in_ || in_.peek() == std::char_traits<char>::eof(); }

void KvBlock::set(const std::string& k, const std::string& v) { entries.emplace_back(k, v); }
void KvBlock::set_i64(const std::string& k, std::int64_t v) { set(k, std::to_string(v)); }
void KvBlock::set_u64(const std::string& k, std::uint64_t v) { set(k, std::to_string(v)); }
void KvBlock::set_f64(const std::string& k, double v) { set(k, format_double(v)); }

bool KvBlock::has(const std::string& k) const {
  for (const auto& [key, _] : entries)
    if (key == k) return true;
  return false;
}
const std::string& KvBlock::get(const std::string& k) const {
  for (const auto& [key, value] : entries)
    if (key == k) return value;
  throw ParseError("missing header field: " + k);
}
std::int64_t KvBlock::get_i64(const std::string& k) const { return std::stoll(get(k)); }
std::uint64_t KvBlock::get_u64(const std::string& k) const { return std::stoull(get(k)); }
double KvBlock::get_f64(const std::string& k) const { return std::stod(get(k)); }

std::string KvBlock::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

KvBlock KvBlock::parse(const std::string& text) {
  KvBlock kv;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("malformed header line " + std::to_string(line_no) + ": " + line);
    kv.entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

std::vector<std::string> KvBlock::unknown_keys(const std::vector<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& [k, _] : entries) {
    bool found = false;
    for (const auto& kn : known)
      if (kn == k) {
        found = true;
        break;
      }
    if (!found) out.push_back(k);
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), path_(path), columns_(header.size()) {
  if (!out_) throw IoError("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw ContractError("CsvWriter: column count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_double(values[i]);
  }
  out_ << '\n';
}

void CsvWriter::raw_row(const std::string& line) { out_ << line << '\n'; }

void CsvWriter::close() {
  out_.flush();
  if (!out_) throw IoError("write failure: " + path_);
  out_.close();
}

}  // namespace lieflow
