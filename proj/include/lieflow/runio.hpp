#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "lieflow/errors.hpp"

namespace lieflow {

/// Little-endian binary writer for the versioned run-artifact containers.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path);
  void magic(const char tag[4], std::uint32_t version);
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64_block(const double* data, std::size_t count);
  void text_block(const std::string& s);  // u32 length + bytes
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path);
  /// Checks the tag and returns the version.
  std::uint32_t magic(const char tag[4]);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64_block(double* data, std::size_t count);
  std::string text_block();
  bool at_eof();
  /// Context string prepended to truncation errors ("sample 17", ...).
  void set_context(std::string ctx) { context_ = std::move(ctx); }

 private:
  void need(std::size_t bytes);
  std::ifstream in_;
  std::string path_;
  std::string context_;
};

/// Ordered key=value text header. Unknown keys are tolerated by readers and
/// reported as warnings (forward compatibility).
struct KvBlock {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(const std::string& k, const std::string& v);
  void set_i64(const std::string& k, std::int64_t v);
  void set_u64(const std::string& k, std::uint64_t v);
  void set_f64(const std::string& k, double v);

  bool has(const std::string& k) const;
  const std::string& get(const std::string& k) const;
  std::int64_t get_i64(const std::string& k) const;
  std::uint64_t get_u64(const std::string& k) const;
  double get_f64(const std::string& k) const;

  std::string serialize() const;
  static KvBlock parse(const std::string& text);
  /// Keys present here but not in `known`.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;
};

/// Minimal CSV emitter; numbers are written with max_digits10 precision.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  std::size_t columns_;
};

std::string format_double(double v);

}  // namespace lieflow
