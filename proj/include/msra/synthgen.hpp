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

// Synthetic multi-sequence digit images.
//
// Stacked-rows layout: k sequences, one per 28-px band, image 28k x 392.
// Horizontal+vertical layout: one 5-glyph row and one 5-glyph column in a
// square image. Glyphs are 28x28, jittered horizontally and rotated, then
// sprinkled with 7x7 noise digits. Glyphs sit on the 28-px slot lattice so a
// patch classifier sees one glyph per patch; the first and last slot of
// every band stay empty.

#ifndef MSRA_SYNTHGEN_HPP_
#define MSRA_SYNTHGEN_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "msra/core.hpp"
#include "msra/decode.hpp"

namespace msra::synth {

inline constexpr int kGlyphSize = 28;
inline constexpr int kGlyphPixels = kGlyphSize * kGlyphSize;

using GlyphBitmap = std::array<std::uint8_t, kGlyphPixels>;

class IdxError : public Error {
 public:
  enum class Kind { kIo, kBadMagic, kTruncated, kBadShape, kCountMismatch };
  IdxError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;
};

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_idx_images(const IdxImages& images);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

// Pool of 28x28 glyphs keyed by the character they depict.
class GlyphSource {
 public:
  // 5x7 bitmap digits scaled 3x and centered.
  static GlyphSource builtin_digits();

  void add(char symbol, const GlyphBitmap& glyph);
  const std::vector<GlyphBitmap>& glyphs(char symbol) const;
  bool has(char symbol) const { return pool_.count(symbol) != 0; }
  std::size_t size() const;

 private:
  std::map<char, std::vector<GlyphBitmap>> pool_;
};

// Pairs an IDX image file with its label file. Labels 0-9 become '0'-'9'.
GlyphSource load_idx(const std::filesystem::path& images_path,
                     const std::filesystem::path& labels_path);
GlyphSource glyphs_from_idx(const IdxImages& images,
                            std::span<const std::uint8_t> labels);

enum class Layout { kStackedRows, kHorizontalVertical };

struct DatasetSpec {
  int max_sequences = 5;
  int min_length = 1;
  int max_length = 14;
  // Rounded, clipped Gaussian for sequence length.
  double length_mean = 7.0;
  double length_stddev = 3.0;
  int jitter_px = 3;
  double rotation_deg = 10.0;
  // One noise digit per this many valid digits, rounded up.
  int noise_divisor = 5;
  int noise_size = 7;
  Layout layout = Layout::kStackedRows;
  // Horizontal+vertical layout: glyphs per sequence and slots per side.
  int hv_length = 5;
  int hv_slots = 14;
  int width = 392;
  int train_count = 3000;
  int test_count = 300;
  std::uint64_t seed = 20190605;
  std::string charset = "0123456789";

  void validate() const;
  nlohmann::ordered_json to_json() const;
  static DatasetSpec from_json(const nlohmann::json& j);
};

struct SampleRecord {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<std::string> targets;
  // Character index (0 = empty) of the glyph drawn in each 28x28 slot. Kept
  // in memory only; it is what a perfect per-slot classifier would emit.
  std::optional<ArgmaxGrid> slot_classes;
};

// Deterministic stream of uniform and Gaussian draws.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : eng_(seed) {}
  // Stream for sample `index` of split `stream` under dataset seed `seed`.
  SampleRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

  double uniform();
  int uniform_int(int lo, int hi);
  double normal(double mean, double stddev);

 private:
  std::mt19937_64 eng_;
};

int noise_count(int valid_digits, int divisor);

SampleRecord render_sample(const DatasetSpec& spec, SampleRng& rng,
                           const GlyphSource& glyphs, const Alphabet& alphabet);

SampleRecord render_hv_sample(const DatasetSpec& spec, SampleRng& rng,
                              const GlyphSource& glyphs,
                              const Alphabet& alphabet);

// Dispatches on spec.layout.
SampleRecord render(const DatasetSpec& spec, SampleRng& rng,
                    const GlyphSource& glyphs, const Alphabet& alphabet);

// Renders split `stream` (0 = train, 1 = test) sample by sample.
std::vector<SampleRecord> generate_split(const DatasetSpec& spec, int stream,
                                         const GlyphSource& glyphs,
                                         const Alphabet& alphabet,
                                         int threads = 1);

// Writes train.jsonl, test.jsonl and manifest.json under `out_dir`.
void gen_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir,
                 const GlyphSource& glyphs, const Alphabet& alphabet,
                 int threads = 1);

std::string record_to_json_line(const SampleRecord& r);
SampleRecord record_from_json(const nlohmann::json& j);
std::vector<SampleRecord> read_dataset(const std::filesystem::path& jsonl);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace msra::synth

#endif  // MSRA_SYNTHGEN_HPP_
