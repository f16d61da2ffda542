#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace presslab {

inline constexpr const char* kVersion = "1.0.0";

// Shortest-faithful decimal: %.17g covers every double round trip. Reports
// use it for both JSON and CSV so outputs are byte-stable across runs.
std::string format_double(double v);

std::uint64_t fnv1a(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

// Minimal streaming JSON writer. The vendored reader cannot pin float
// formatting on output, and the reports promise 17 significant digits, so
// serialization is done by hand. Keys are emitted in call order; callers keep
// that order fixed to make reports byte-identical across runs.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view k);
  JsonWriter& value(double v);  // non-finite becomes null
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  JsonWriter& value(bool v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }

  std::string take();

 private:
  void separator();
  std::string out_;
  // one frame per open container: true once the first element was written
  std::vector<bool> wrote_elem_;
  bool pending_key_ = false;
};

std::string json_escape(std::string_view s);

// CSV with a header row; fields containing separators or quotes are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& fields);
  std::string take();

 private:
  void emit(const std::vector<std::string>& fields);
  std::size_t columns_;
  std::string out_;
};

// Write-temp-then-rename so readers never observe a partial file. Creates
// missing parent directories.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace presslab
