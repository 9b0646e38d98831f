#include "csic/io.hpp"

#include "csic/errors.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace csic {

namespace {

constexpr std::uint32_t kVersion = 1;

class Writer {
public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void bytes(std::span<const std::uint8_t> s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
public:
  Reader(std::span<const std::uint8_t> data, const char* what) : data_(data), what_(what) {}

  void need(std::size_t n, const char* field) const {
    if (pos_ + n > data_.size()) {
      throw ParseError(std::string(what_) + ": truncated while reading " + field, data_.size());
    }
  }
  void magic(std::string_view m) {
    need(m.size(), "magic");
    if (std::memcmp(data_.data(), m.data(), m.size()) != 0) {
      throw ParseError(std::string(what_) + ": bad magic, expected \"" + std::string(m) + "\"", 0);
    }
    pos_ += m.size();
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64(const char* field) {
    need(8, field);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::span<const std::uint8_t> raw(std::size_t n, const char* field) {
    need(n, field);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t size() const { return data_.size(); }
  const char* what() const { return what_; }

private:
  std::span<const std::uint8_t> data_;
  const char* what_;
  std::size_t pos_ = 0;
};

void expect_version(Reader& r) {
  const auto at = r.pos();
  const auto v = r.u32("version");
  if (v != kVersion) {
    throw ParseError(std::string(r.what()) + ": unsupported version " + std::to_string(v), at);
  }
}

// Checks payload length before reading so a short file reports where it ends.
void expect_payload(const Reader& r, std::size_t count) {
  const std::size_t expected = r.pos() + count * 8;
  if (r.size() < expected) {
    throw ParseError(std::string(r.what()) + ": truncated payload, expected " +
                         std::to_string(expected) + " bytes",
                     r.size());
  }
  if (r.size() > expected) {
    throw ParseError(std::string(r.what()) + ": trailing bytes after payload", expected);
  }
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Parses a CSV grid of integers; offsets in errors refer to the start of the
// offending field.
std::vector<std::vector<int>> parse_int_grid(const std::string& text, const char* what) {
  std::vector<std::vector<int>> grid;
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    auto line_end = text.find('\n', line_start);
    if (line_end == std::string::npos) line_end = text.size();
    std::string_view line(text.data() + line_start, line_end - line_start);
    if (!trim(line).empty()) {
      std::vector<int> row;
      std::size_t field_off = line_start;
      for (auto field : split(line, ',')) {
        auto t = trim(field);
        int v = 0;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
          throw ParseError(std::string(what) + ": invalid integer \"" + std::string(t) + "\"",
                           field_off);
        }
        row.push_back(v);
        field_off += field.size() + 1;
      }
      if (!grid.empty() && row.size() != grid.front().size()) {
        throw ParseError(std::string(what) + ": ragged row with " + std::to_string(row.size()) +
                             " columns, expected " + std::to_string(grid.front().size()),
                         line_start);
      }
      grid.push_back(std::move(row));
    }
    line_start = line_end + 1;
  }
  if (grid.empty()) throw ParseError(std::string(what) + ": empty file", 0);
  return grid;
}

}  // namespace

std::vector<std::uint8_t> encode_cube(const SpectralCube& cube) {
  Writer w;
  w.bytes(std::string_view("SCUB"));
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(cube.rows()));
  w.u32(static_cast<std::uint32_t>(cube.cols()));
  w.u32(static_cast<std::uint32_t>(cube.bands()));
  for (double v : cube.values()) w.f64(v);
  return w.take();
}

SpectralCube decode_cube(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "SCUBE1");
  r.magic("SCUB");
  expect_version(r);
  const std::size_t m = r.u32("M");
  const std::size_t n = r.u32("N");
  const std::size_t l = r.u32("L");
  if (m == 0 || n == 0 || l == 0) throw ParseError("SCUBE1: zero dimension in header", 8);
  expect_payload(r, m * n * l);
  std::vector<double> values(m * n * l);
  for (auto& v : values) {
    const auto at = r.pos();
    v = r.f64("value");
    if (!std::isfinite(v)) throw ParseError("SCUBE1: non-finite value", at);
    if (v < 0.0) throw ParseError("SCUBE1: negative value", at);
  }
  return SpectralCube(m, n, l, std::move(values));
}

SpectralCube load_cube(const fs::path& path) { return decode_cube(read_file(path)); }

void save_cube(const SpectralCube& cube, const fs::path& path) {
  write_file(path, encode_cube(cube));
}

std::vector<std::uint8_t> encode_measurements(const MeasurementSet& meas) {
  meas.validate();
  Writer w;
  w.bytes(std::string_view("SMEA"));
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(meas.snapshots()));
  w.u32(static_cast<std::uint32_t>(meas.rows));
  w.u32(static_cast<std::uint32_t>(meas.cols));
  w.f64(meas.noise_sigma);
  w.bytes(meas.pattern_hash);
  for (Eigen::Index s = 0; s < meas.data.rows(); ++s)
    for (Eigen::Index p = 0; p < meas.data.cols(); ++p) w.f64(meas.data(s, p));
  return w.take();
}

MeasurementSet decode_measurements(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "SMEAS1");
  r.magic("SMEA");
  expect_version(r);
  MeasurementSet meas;
  const std::size_t s = r.u32("S");
  meas.rows = r.u32("M");
  meas.cols = r.u32("N");
  if (s == 0 || meas.rows == 0 || meas.cols == 0) {
    throw ParseError("SMEAS1: zero dimension in header", 8);
  }
  const auto sigma_at = r.pos();
  meas.noise_sigma = r.f64("noise_sigma");
  if (!std::isfinite(meas.noise_sigma) || meas.noise_sigma < 0.0) {
    throw ParseError("SMEAS1: noise sigma must be finite and nonnegative", sigma_at);
  }
  auto hash = r.raw(32, "pattern hash");
  std::copy(hash.begin(), hash.end(), meas.pattern_hash.begin());
  const std::size_t p = meas.rows * meas.cols;
  expect_payload(r, s * p);
  meas.data.resize(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const auto at = r.pos();
      const double v = r.f64("value");
      if (!std::isfinite(v)) throw ParseError("SMEAS1: non-finite value", at);
      meas.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return meas;
}

MeasurementSet load_measurements(const fs::path& path) {
  return decode_measurements(read_file(path));
}

void save_measurements(const MeasurementSet& meas, const fs::path& path) {
  write_file(path, encode_measurements(meas));
}

LabelMap parse_labels(const std::string& text, const LabelLoadOptions& opts) {
  const auto grid = parse_int_grid(text, "labels");
  const std::size_t rows = grid.size();
  const std::size_t cols = grid.front().size();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (grid[i][j] < 0) {
        throw ValidationError("labels: negative label at row " + std::to_string(i) + ", column " +
                              std::to_string(j));
      }

  LabelCrop crop{0, 0, rows, cols};
  if (opts.crop) {
    crop = *opts.crop;
    if (crop.rows == 0 || crop.cols == 0 || crop.row0 + crop.rows > rows ||
        crop.col0 + crop.cols > cols) {
      throw ValidationError("labels: crop window exceeds the label grid");
    }
  }

  std::vector<int> labels;
  labels.reserve(crop.rows * crop.cols);
  for (std::size_t i = crop.row0; i < crop.row0 + crop.rows; ++i) {
    for (std::size_t j = crop.col0; j < crop.col0 + crop.cols; ++j) {
      int v = grid[i][j];
      if (!opts.keep_classes.empty()) {
        auto it = std::find(opts.keep_classes.begin(), opts.keep_classes.end(), v);
        v = (v != 0 && it != opts.keep_classes.end())
                ? static_cast<int>(it - opts.keep_classes.begin()) + 1
                : 0;
      }
      labels.push_back(v);
    }
  }
  return LabelMap(crop.rows, crop.cols, std::move(labels));
}

LabelMap load_labels(const fs::path& path, const LabelLoadOptions& opts) {
  return parse_labels(read_text(path), opts);
}

std::string format_labels(const LabelMap& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.rows(); ++i) {
    for (std::size_t j = 0; j < labels.cols(); ++j) {
      if (j) out.push_back(',');
      out += std::to_string(labels.at(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

void save_labels(const LabelMap& labels, const fs::path& path) {
  write_text(path, format_labels(labels));
}

std::string format_pattern_csv(const CodingPattern& pattern) {
  std::string out;
  for (std::size_t s = 0; s < pattern.snapshots(); ++s) {
    for (std::size_t k = 0; k < pattern.bands(); ++k) {
      if (k) out.push_back(',');
      out.push_back(pattern.at(s, k) ? '1' : '0');
    }
    out.push_back('\n');
  }
  return out;
}

std::string format_pattern_sidecar(const CodingPattern& pattern) {
  nlohmann::ordered_json j;
  std::vector<std::size_t> l1;
  std::vector<std::size_t> l2;
  for (const auto& w : pattern.windows()) {
    l1.push_back(w.first);
    l2.push_back(w.last);
  }
  j["lambda1"] = l1;
  j["lambda2"] = l2;
  j["bandwidth"] = pattern.bandwidth();
  return j.dump() + "\n";
}

CodingPattern parse_pattern(const std::string& csv, const std::string& sidecar) {
  const auto grid = parse_int_grid(csv, "pattern");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(sidecar);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("pattern sidecar: ") + e.what(), e.byte);
  }
  std::vector<BandWindow> windows;
  std::size_t bandwidth = 0;
  try {
    const auto l1 = meta.at("lambda1").get<std::vector<std::size_t>>();
    const auto l2 = meta.at("lambda2").get<std::vector<std::size_t>>();
    bandwidth = meta.at("bandwidth").get<std::size_t>();
    if (l1.size() != l2.size()) throw ValidationError("pattern sidecar: lambda1/lambda2 length mismatch");
    for (std::size_t i = 0; i < l1.size(); ++i) windows.push_back({l1[i], l2[i]});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("pattern sidecar: ") + e.what());
  }
  const std::size_t s = grid.size();
  const std::size_t l = grid.front().size();
  std::vector<std::uint8_t> entries;
  entries.reserve(s * l);
  for (const auto& row : grid)
    for (int v : row) {
      if (v != 0 && v != 1) throw ValidationError("pattern: entries must be 0 or 1");
      entries.push_back(static_cast<std::uint8_t>(v));
    }
  return CodingPattern(s, l, bandwidth, std::move(entries), std::move(windows));
}

fs::path pattern_sidecar_path(const fs::path& csv_path) {
  auto p = csv_path;
  return p.replace_extension(".json");
}

CodingPattern load_pattern(const fs::path& csv_path) {
  return parse_pattern(read_text(csv_path), read_text(pattern_sidecar_path(csv_path)));
}

void save_pattern(const CodingPattern& pattern, const fs::path& csv_path) {
  write_text(csv_path, format_pattern_csv(pattern));
  write_text(pattern_sidecar_path(csv_path), format_pattern_sidecar(pattern));
}

std::array<std::uint8_t, 32> pattern_digest(const CodingPattern& pattern) {
  const auto text = format_pattern_csv(pattern) + format_pattern_sidecar(pattern);
  return sha256({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size()) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return out;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return data;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace csic
