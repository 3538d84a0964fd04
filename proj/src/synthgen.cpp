/* Copyright 2026 The msra2d Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "msra/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "msra/parallel.hpp"

namespace msra::synth {

// ---------------------------------------------------------------------------
// IDX

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (static_cast<std::uint32_t>(b[at]) << 24) |
         (static_cast<std::uint32_t>(b[at + 1]) << 16) |
         (static_cast<std::uint32_t>(b[at + 2]) << 8) |
         static_cast<std::uint32_t>(b[at + 3]);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void expect_magic(std::span<const std::uint8_t> b, std::uint32_t magic,
                  const char* what) {
  if (b.size() < 4) {
    throw IdxError(IdxError::Kind::kTruncated,
                   std::string(what) + ": file shorter than the IDX magic");
  }
  const std::uint32_t got = read_be32(b, 0);
  if (got != magic) {
    std::ostringstream os;
    os << what << ": bad IDX magic 0x" << std::hex << got << ", expected 0x"
       << magic;
    throw IdxError(IdxError::Kind::kBadMagic, os.str());
  }
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  expect_magic(bytes, kIdxImagesMagic, "images");
  if (bytes.size() < 16) {
    throw IdxError(IdxError::Kind::kTruncated, "images: truncated IDX header");
  }
  IdxImages img;
  img.count = read_be32(bytes, 4);
  img.rows = read_be32(bytes, 8);
  img.cols = read_be32(bytes, 12);
  const std::uint64_t payload = static_cast<std::uint64_t>(img.count) *
                                img.rows * img.cols;
  if (bytes.size() - 16 < payload) {
    throw IdxError(IdxError::Kind::kTruncated,
                   "images: payload holds " + std::to_string(bytes.size() - 16) +
                       " bytes, header promises " + std::to_string(payload));
  }
  img.pixels.assign(bytes.begin() + 16,
                    bytes.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
  return img;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  expect_magic(bytes, kIdxLabelsMagic, "labels");
  if (bytes.size() < 8) {
    throw IdxError(IdxError::Kind::kTruncated, "labels: truncated IDX header");
  }
  const std::uint32_t count = read_be32(bytes, 4);
  if (bytes.size() - 8 < count) {
    throw IdxError(IdxError::Kind::kTruncated,
                   "labels: payload shorter than the declared count");
  }
  return {bytes.begin() + 8, bytes.begin() + 8 + count};
}

std::vector<std::uint8_t> encode_idx_images(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  put_be32(out, kIdxImagesMagic);
  put_be32(out, images.count);
  put_be32(out, images.rows);
  put_be32(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  put_be32(out, kIdxLabelsMagic);
  put_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IdxError(IdxError::Kind::kIo, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

// ---------------------------------------------------------------------------
// Glyphs

void GlyphSource::add(char symbol, const GlyphBitmap& glyph) {
  pool_[symbol].push_back(glyph);
}

const std::vector<GlyphBitmap>& GlyphSource::glyphs(char symbol) const {
  auto it = pool_.find(symbol);
  if (it == pool_.end()) {
    throw InvalidInput(std::string("no glyphs for symbol '") + symbol + "'");
  }
  return it->second;
}

std::size_t GlyphSource::size() const {
  std::size_t n = 0;
  for (const auto& [_, v] : pool_) n += v.size();
  return n;
}

GlyphSource GlyphSource::builtin_digits() {
  static constexpr const char* kFont[10][7] = {
      {"01110", "10001", "10011", "10101", "11001", "10001", "01110"},
      {"00100", "01100", "00100", "00100", "00100", "00100", "01110"},
      {"01110", "10001", "00001", "00010", "00100", "01000", "11111"},
      {"11111", "00010", "00100", "00010", "00001", "10001", "01110"},
      {"00010", "00110", "01010", "10010", "11111", "00010", "00010"},
      {"11111", "10000", "11110", "00001", "00001", "10001", "01110"},
      {"00110", "01000", "10000", "11110", "10001", "10001", "01110"},
      {"11111", "00001", "00010", "00100", "01000", "01000", "01000"},
      {"01110", "10001", "10001", "01110", "10001", "10001", "01110"},
      {"01110", "10001", "10001", "01111", "00001", "00010", "01100"},
  };
  constexpr int kScale = 3;
  constexpr int kLeft = (kGlyphSize - 5 * kScale) / 2;
  constexpr int kTop = (kGlyphSize - 7 * kScale) / 2;
  GlyphSource src;
  for (int d = 0; d < 10; ++d) {
    GlyphBitmap g{};
    for (int r = 0; r < 7; ++r) {
      for (int c = 0; c < 5; ++c) {
        if (kFont[d][r][c] != '1') continue;
        for (int dy = 0; dy < kScale; ++dy) {
          for (int dx = 0; dx < kScale; ++dx) {
            const int y = kTop + r * kScale + dy;
            const int x = kLeft + c * kScale + dx;
            g[static_cast<std::size_t>(y * kGlyphSize + x)] = 255;
          }
        }
      }
    }
    src.add(static_cast<char>('0' + d), g);
  }
  return src;
}

GlyphSource glyphs_from_idx(const IdxImages& images,
                            std::span<const std::uint8_t> labels) {
  if (images.count != labels.size()) {
    throw IdxError(IdxError::Kind::kCountMismatch,
                   "image count " + std::to_string(images.count) +
                       " != label count " + std::to_string(labels.size()));
  }
  if (images.rows != kGlyphSize || images.cols != kGlyphSize) {
    throw IdxError(IdxError::Kind::kBadShape, "IDX images must be 28x28");
  }
  GlyphSource src;
  for (std::uint32_t n = 0; n < images.count; ++n) {
    if (labels[n] > 9) {
      throw IdxError(IdxError::Kind::kBadShape,
                     "IDX label " + std::to_string(labels[n]) + " is not a digit");
    }
    GlyphBitmap g;
    std::copy_n(images.pixels.begin() + static_cast<std::ptrdiff_t>(n) * kGlyphPixels,
                kGlyphPixels, g.begin());
    src.add(static_cast<char>('0' + labels[n]), g);
  }
  return src;
}

GlyphSource load_idx(const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path) {
  const auto img_bytes = read_file_bytes(images_path);
  const auto lbl_bytes = read_file_bytes(labels_path);
  return glyphs_from_idx(parse_idx_images(img_bytes), parse_idx_labels(lbl_bytes));
}

// ---------------------------------------------------------------------------
// Spec

void DatasetSpec::validate() const {
  auto fail = [](const std::string& m) { throw InvalidInput("dataset spec: " + m); };
  if (max_sequences < 1) fail("max_sequences must be >= 1");
  if (min_length < 1 || max_length < min_length || max_length > 14) {
    fail("need 1 <= min_length <= max_length <= 14");
  }
  if (length_stddev < 0.0) fail("length_stddev must be >= 0");
  if (jitter_px < 0 || jitter_px >= kGlyphSize / 2) fail("jitter_px out of range");
  if (rotation_deg < 0.0 || rotation_deg > 90.0) fail("rotation_deg out of range");
  if (noise_divisor < 1) fail("noise_divisor must be >= 1");
  if (noise_size < 1 || noise_size > kGlyphSize) fail("noise_size out of range");
  if (width <= 0 || width % kGlyphSize != 0) fail("width must be a multiple of 28");
  if (max_length > width / kGlyphSize) fail("max_length exceeds slots per row");
  if (hv_length < 1 || hv_slots < 2 * hv_length + 1) {
    fail("hv_slots too small for hv_length");
  }
  if (train_count < 0 || test_count < 0) fail("counts must be >= 0");
  if (charset.empty()) fail("charset must be non-empty");
}

nlohmann::ordered_json DatasetSpec::to_json() const {
  nlohmann::ordered_json j;
  j["max_sequences"] = max_sequences;
  j["min_length"] = min_length;
  j["max_length"] = max_length;
  j["length_mean"] = length_mean;
  j["length_stddev"] = length_stddev;
  j["jitter_px"] = jitter_px;
  j["rotation_deg"] = rotation_deg;
  j["noise_divisor"] = noise_divisor;
  j["noise_size"] = noise_size;
  j["layout"] = layout == Layout::kStackedRows ? "stacked-rows" : "horizontal-vertical";
  j["hv_length"] = hv_length;
  j["hv_slots"] = hv_slots;
  j["width"] = width;
  j["train_count"] = train_count;
  j["test_count"] = test_count;
  j["seed"] = seed;
  j["charset"] = charset;
  return j;
}

DatasetSpec DatasetSpec::from_json(const nlohmann::json& j) {
  DatasetSpec s;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("max_sequences", s.max_sequences);
  get("min_length", s.min_length);
  get("max_length", s.max_length);
  get("length_mean", s.length_mean);
  get("length_stddev", s.length_stddev);
  get("jitter_px", s.jitter_px);
  get("rotation_deg", s.rotation_deg);
  get("noise_divisor", s.noise_divisor);
  get("noise_size", s.noise_size);
  if (j.contains("layout")) {
    const auto name = j.at("layout").get<std::string>();
    if (name == "stacked-rows") {
      s.layout = Layout::kStackedRows;
    } else if (name == "horizontal-vertical") {
      s.layout = Layout::kHorizontalVertical;
    } else {
      throw InvalidInput("unknown layout '" + name + "'");
    }
  }
  get("hv_length", s.hv_length);
  get("hv_slots", s.hv_slots);
  get("width", s.width);
  get("train_count", s.train_count);
  get("test_count", s.test_count);
  get("seed", s.seed);
  get("charset", s.charset);
  return s;
}

// ---------------------------------------------------------------------------
// Rendering

SampleRng::SampleRng(std::uint64_t seed, std::uint64_t stream,
                     std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  eng_.seed(seq);
}

double SampleRng::uniform() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

int SampleRng::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(eng_() % span);
}

double SampleRng::normal(double mean, double stddev) {
  // Box-Muller; one draw per call keeps the stream position predictable.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

int noise_count(int valid_digits, int divisor) {
  return (valid_digits + divisor - 1) / divisor;
}

namespace {

int clipped_normal(SampleRng& rng, double mean, double stddev, int lo, int hi) {
  const double v = std::round(rng.normal(mean, stddev));
  return static_cast<int>(std::clamp(v, static_cast<double>(lo), static_cast<double>(hi)));
}

// Nearest-neighbour rotation about the glyph center.
GlyphBitmap rotate(const GlyphBitmap& g, double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double center = (kGlyphSize - 1) / 2.0;
  GlyphBitmap out{};
  for (int y = 0; y < kGlyphSize; ++y) {
    for (int x = 0; x < kGlyphSize; ++x) {
      const double dx = x - center, dy = y - center;
      const int sx = static_cast<int>(std::lround(c * dx + s * dy + center));
      const int sy = static_cast<int>(std::lround(-s * dx + c * dy + center));
      if (sx < 0 || sy < 0 || sx >= kGlyphSize || sy >= kGlyphSize) continue;
      out[static_cast<std::size_t>(y * kGlyphSize + x)] =
          g[static_cast<std::size_t>(sy * kGlyphSize + sx)];
    }
  }
  return out;
}

// Block-average down to size x size.
std::vector<std::uint8_t> shrink(const GlyphBitmap& g, int size) {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(size * size));
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int y0 = y * kGlyphSize / size, y1 = (y + 1) * kGlyphSize / size;
      const int x0 = x * kGlyphSize / size, x1 = (x + 1) * kGlyphSize / size;
      int sum = 0, n = 0;
      for (int yy = y0; yy < y1; ++yy) {
        for (int xx = x0; xx < x1; ++xx, ++n) {
          sum += g[static_cast<std::size_t>(yy * kGlyphSize + xx)];
        }
      }
      out[static_cast<std::size_t>(y * size + x)] =
          static_cast<std::uint8_t>(n ? sum / n : 0);
    }
  }
  return out;
}

struct Canvas {
  int height;
  int width;
  std::vector<std::uint8_t> px;

  Canvas(int h, int w) : height(h), width(w), px(static_cast<std::size_t>(h * w), 0) {}

  // Composites by per-pixel max, clipping at the border.
  void blit(std::span<const std::uint8_t> src, int size, int top, int left) {
    for (int y = 0; y < size; ++y) {
      const int ty = top + y;
      if (ty < 0 || ty >= height) continue;
      for (int x = 0; x < size; ++x) {
        const int tx = left + x;
        if (tx < 0 || tx >= width) continue;
        auto& dst = px[static_cast<std::size_t>(ty * width + tx)];
        dst = std::max(dst, src[static_cast<std::size_t>(y * size + x)]);
      }
    }
  }
};

char random_symbol(SampleRng& rng, const std::string& charset) {
  return charset[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(charset.size()) - 1))];
}

const GlyphBitmap& random_glyph(SampleRng& rng, const GlyphSource& glyphs,
                                char symbol) {
  const auto& pool = glyphs.glyphs(symbol);
  return pool[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(pool.size()) - 1))];
}

void draw_glyph(Canvas& canvas, SampleRng& rng, const DatasetSpec& spec,
                const GlyphSource& glyphs, char symbol, int slot_row,
                int slot_col) {
  const auto& base = random_glyph(rng, glyphs, symbol);
  const double angle = (2.0 * rng.uniform() - 1.0) * spec.rotation_deg;
  const int dx = rng.uniform_int(-spec.jitter_px, spec.jitter_px);
  const GlyphBitmap g = rotate(base, angle);
  canvas.blit(g, kGlyphSize, slot_row * kGlyphSize, slot_col * kGlyphSize + dx);
}

void draw_noise(Canvas& canvas, SampleRng& rng, const DatasetSpec& spec,
                const GlyphSource& glyphs, int valid_digits) {
  const int n = noise_count(valid_digits, spec.noise_divisor);
  for (int k = 0; k < n; ++k) {
    const char symbol = random_symbol(rng, spec.charset);
    const auto small = shrink(random_glyph(rng, glyphs, symbol), spec.noise_size);
    const int top = rng.uniform_int(0, canvas.height - spec.noise_size);
    const int left = rng.uniform_int(0, canvas.width - spec.noise_size);
    canvas.blit(small, spec.noise_size, top, left);
  }
}

// Slot positions for a run of `length` glyphs on a line of `slots` slots.
// Prefers one empty slot between glyphs, then dense packing, both leaving
// the first and last slot empty; dense without margins as a last resort.
std::vector<int> line_slots(SampleRng& rng, int length, int slots) {
  int stride = 1, margin = 0;
  if (2 * (length - 1) + 1 <= slots - 2) {
    stride = 2;
    margin = 1;
  } else if (length <= slots - 2) {
    margin = 1;
  }
  const int span = stride * (length - 1) + 1;
  const int start = rng.uniform_int(margin, slots - margin - span);
  std::vector<int> out;
  for (int m = 0; m < length; ++m) out.push_back(start + stride * m);
  return out;
}

void check_charset(const DatasetSpec& spec, const GlyphSource& glyphs,
                   const Alphabet& alphabet) {
  for (char c : spec.charset) {
    if (!glyphs.has(c)) {
      throw InvalidInput(std::string("glyph source lacks '") + c + "'");
    }
    if (alphabet.index(c) == kBlank) {
      throw InvalidInput("charset contains the blank symbol");
    }
  }
}

}  // namespace

SampleRecord render_sample(const DatasetSpec& spec, SampleRng& rng,
                           const GlyphSource& glyphs, const Alphabet& alphabet) {
  spec.validate();
  check_charset(spec, glyphs, alphabet);
  const int n = spec.max_sequences;
  const int k = clipped_normal(rng, n / 2.0 + 0.5, n / 4.0, 1, n);
  const int slots = spec.width / kGlyphSize;

  SampleRecord rec;
  rec.height = kGlyphSize * k;
  rec.width = spec.width;
  Canvas canvas(rec.height, rec.width);
  ArgmaxGrid slot_map(k, slots);
  int valid = 0;
  for (int row = 0; row < k; ++row) {
    const int len = clipped_normal(rng, spec.length_mean, spec.length_stddev,
                                   spec.min_length, spec.max_length);
    std::string text;
    for (int m = 0; m < len; ++m) text.push_back(random_symbol(rng, spec.charset));
    const auto cols = line_slots(rng, len, slots);
    for (int m = 0; m < len; ++m) {
      const char c = text[static_cast<std::size_t>(m)];
      draw_glyph(canvas, rng, spec, glyphs, c, row, cols[static_cast<std::size_t>(m)]);
      slot_map.at(row, cols[static_cast<std::size_t>(m)]) = alphabet.index(c);
    }
    valid += len;
    rec.targets.push_back(std::move(text));
  }
  draw_noise(canvas, rng, spec, glyphs, valid);
  rec.pixels = std::move(canvas.px);
  rec.slot_classes = std::move(slot_map);
  return rec;
}

SampleRecord render_hv_sample(const DatasetSpec& spec, SampleRng& rng,
                              const GlyphSource& glyphs, const Alphabet& alphabet) {
  spec.validate();
  check_charset(spec, glyphs, alphabet);
  const int slots = spec.hv_slots;
  const int len = spec.hv_length;
  constexpr int kMaxTries = 1000;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    // Horizontal run on `h_row`, vertical run on `v_col`; neither may put a
    // glyph on the other's line.
    const int h_row = rng.uniform_int(1, slots - 2);
    const auto h_cols = line_slots(rng, len, slots);
    const int v_col = rng.uniform_int(1, slots - 2);
    const auto v_rows = line_slots(rng, len, slots);
    if (std::find(h_cols.begin(), h_cols.end(), v_col) != h_cols.end()) continue;
    if (std::find(v_rows.begin(), v_rows.end(), h_row) != v_rows.end()) continue;

    SampleRecord rec;
    rec.height = rec.width = slots * kGlyphSize;
    Canvas canvas(rec.height, rec.width);
    ArgmaxGrid slot_map(slots, slots);
    std::string h_text, v_text;
    for (int m = 0; m < len; ++m) h_text.push_back(random_symbol(rng, spec.charset));
    for (int m = 0; m < len; ++m) v_text.push_back(random_symbol(rng, spec.charset));
    for (int m = 0; m < len; ++m) {
      const auto mm = static_cast<std::size_t>(m);
      draw_glyph(canvas, rng, spec, glyphs, h_text[mm], h_row, h_cols[mm]);
      slot_map.at(h_row, h_cols[mm]) = alphabet.index(h_text[mm]);
      draw_glyph(canvas, rng, spec, glyphs, v_text[mm], v_rows[mm], v_col);
      slot_map.at(v_rows[mm], v_col) = alphabet.index(v_text[mm]);
    }
    draw_noise(canvas, rng, spec, glyphs, 2 * len);
    rec.pixels = std::move(canvas.px);
    rec.targets = {std::move(h_text), std::move(v_text)};
    rec.slot_classes = std::move(slot_map);
    return rec;
  }
  throw Error("could not place horizontal and vertical sequences without overlap");
}

SampleRecord render(const DatasetSpec& spec, SampleRng& rng,
                    const GlyphSource& glyphs, const Alphabet& alphabet) {
  return spec.layout == Layout::kStackedRows
             ? render_sample(spec, rng, glyphs, alphabet)
             : render_hv_sample(spec, rng, glyphs, alphabet);
}

std::vector<SampleRecord> generate_split(const DatasetSpec& spec, int stream,
                                         const GlyphSource& glyphs,
                                         const Alphabet& alphabet, int threads) {
  spec.validate();
  const int count = stream == 0 ? spec.train_count : spec.test_count;
  std::vector<SampleRecord> out(static_cast<std::size_t>(count));
  parallel_for(out.size(), threads, [&](std::size_t n) {
    SampleRng rng(spec.seed, static_cast<std::uint64_t>(stream), n);
    out[n] = render(spec, rng, glyphs, alphabet);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Files

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kTable[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kTable[(v >> 18) & 63]);
    out.push_back(kTable[(v >> 12) & 63]);
    out.push_back(kTable[(v >> 6) & 63]);
    out.push_back(kTable[v & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
    if (rest == 2) v |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
    out.push_back(kTable[(v >> 18) & 63]);
    out.push_back(kTable[(v >> 12) & 63]);
    out.push_back(rest == 2 ? kTable[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  if (text.size() % 4 != 0) throw InvalidInput("base64 length not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + static_cast<std::size_t>(k)];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0 || (v[k] = value(c)) < 0) {
        throw InvalidInput("invalid base64 input");
      }
    }
    const std::uint32_t w = (static_cast<std::uint32_t>(v[0]) << 18) |
                            (static_cast<std::uint32_t>(v[1]) << 12) |
                            (static_cast<std::uint32_t>(v[2]) << 6) |
                            static_cast<std::uint32_t>(v[3]);
    out.push_back(static_cast<std::uint8_t>(w >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(w >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(w));
  }
  return out;
}

std::string record_to_json_line(const SampleRecord& r) {
  nlohmann::ordered_json j;
  j["h"] = r.height;
  j["w"] = r.width;
  j["pixels"] = base64_encode(r.pixels);
  j["targets"] = r.targets;
  return j.dump();
}

SampleRecord record_from_json(const nlohmann::json& j) {
  SampleRecord r;
  r.height = j.at("h").get<int>();
  r.width = j.at("w").get<int>();
  r.pixels = base64_decode(j.at("pixels").get<std::string>());
  r.targets = j.at("targets").get<std::vector<std::string>>();
  if (r.height <= 0 || r.width <= 0 ||
      r.pixels.size() != static_cast<std::size_t>(r.height) * static_cast<std::size_t>(r.width)) {
    throw InvalidInput("dataset record pixel count does not match h*w");
  }
  for (const auto& t : r.targets) {
    if (t.empty()) throw InvalidInput("dataset record has an empty target");
  }
  return r;
}

std::vector<SampleRecord> read_dataset(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw Error("cannot open dataset " + jsonl.string());
  std::vector<SampleRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(jsonl.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void gen_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir,
                 const GlyphSource& glyphs, const Alphabet& alphabet, int threads) {
  spec.validate();
  std::filesystem::create_directories(out_dir);
  const char* names[2] = {"train.jsonl", "test.jsonl"};
  for (int stream = 0; stream < 2; ++stream) {
    const auto records = generate_split(spec, stream, glyphs, alphabet, threads);
    std::ofstream out(out_dir / names[stream], std::ios::binary);
    if (!out) throw Error("cannot write " + (out_dir / names[stream]).string());
    for (const auto& r : records) out << record_to_json_line(r) << '\n';
  }
  std::ofstream manifest(out_dir / "manifest.json", std::ios::binary);
  if (!manifest) throw Error("cannot write manifest");
  manifest << spec.to_json().dump(2) << '\n';
}

}  // namespace msra::synth
