/*
 * Copyright 2026 The dvs Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dvs/embedding_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>

#include "dvs/error.hpp"
#include "dvs/io.hpp"

namespace dvs {

namespace {

constexpr std::array<std::string_view, 4> kModalityNames = {"text", "audio", "image", "fused"};

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t pos) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
  }
  return static_cast<T>(v);
}

bool modality_allowed(std::uint16_t version, std::uint8_t modality) {
  if (version == kEmbeddingFormatV1) return modality <= 2;
  if (version == kEmbeddingFormatV2) return modality == 3;
  return false;
}

}  // namespace

std::string_view modality_name(Modality m) noexcept {
  return kModalityNames[static_cast<std::size_t>(m)];
}

std::optional<Modality> parse_modality(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kModalityNames.size(); ++i) {
    if (kModalityNames[i] == name) return static_cast<Modality>(i);
  }
  return std::nullopt;
}

EmbeddingSet::EmbeddingSet(Modality modality, std::uint32_t dim, std::vector<EmbeddingRecord> records)
    : modality_(modality), dim_(dim), records_(std::move(records)) {
  if (dim_ == 0) {
    throw ValidationError("embedding dim must be >= 1");
  }
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.values.size() != dim_) {
      throw DimensionError("record '" + r.id + "' has " + std::to_string(r.values.size()) +
                           " values, expected " + std::to_string(dim_));
    }
    if (r.id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ValidationError("record id longer than 65535 bytes");
    }
    if (!index_.emplace(r.id, i).second) {
      throw ValidationError("duplicate embedding id: " + r.id);
    }
  }
}

const std::vector<float>* EmbeddingSet::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second].values;
}

bool EmbeddingSet::bit_equal(const EmbeddingSet& other) const noexcept {
  if (modality_ != other.modality_ || dim_ != other.dim_ || records_.size() != other.records_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& a = records_[i];
    const auto& b = other.records_[i];
    if (a.id != b.id ||
        std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(float)) != 0) {
      return false;
    }
  }
  return true;
}

std::optional<FrameRef> FrameRef::parse(std::string_view id) {
  constexpr std::string_view kTag = "#frame";
  const auto pos = id.rfind(kTag);
  if (pos == std::string_view::npos || pos == 0) return std::nullopt;
  const auto digits = id.substr(pos + kTag.size());
  if (digits.empty()) return std::nullopt;
  std::uint32_t index = 0;
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc{} || end != digits.data() + digits.size()) return std::nullopt;
  FrameRef ref{std::string(id.substr(0, pos)), index};
  // Reject non-canonical spellings such as "#frame007".
  if (ref.id() != id) return std::nullopt;
  return ref;
}

std::string encode_embeddings(const EmbeddingSet& set) {
  std::string out;
  std::size_t total = kEmbeddingHeaderSize;
  for (const auto& r : set.records()) total += 2 + r.id.size() + 4ULL * set.dim();
  out.reserve(total);
  out.append(kEmbeddingMagic, 4);
  put_le<std::uint16_t>(out, format_version_for(set.modality()));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(set.modality()));
  put_le<std::uint32_t>(out, set.dim());
  put_le<std::uint64_t>(out, set.size());
  for (const auto& r : set.records()) {
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(r.id.size()));
    out.append(r.id);
    for (float f : r.values) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

EmbeddingSet decode_embeddings(std::string_view bytes, std::optional<Modality> expected) {
  if (bytes.size() < kEmbeddingHeaderSize) {
    throw FormatError("truncated header: " + std::to_string(bytes.size()) + " bytes");
  }
  if (std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0) {
    throw FormatError("bad magic");
  }
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kEmbeddingFormatV1 && version != kEmbeddingFormatV2) {
    throw VersionError("unsupported embedding format version " + std::to_string(version));
  }
  const auto modality_byte = get_le<std::uint8_t>(bytes, 6);
  if (!modality_allowed(version, modality_byte)) {
    throw FormatError("modality " + std::to_string(modality_byte) + " invalid for format version " +
                      std::to_string(version));
  }
  const auto modality = static_cast<Modality>(modality_byte);
  if (expected && *expected != modality) {
    throw FormatError("expected " + std::string(modality_name(*expected)) + " embeddings, file holds " +
                      std::string(modality_name(modality)));
  }
  const auto dim = get_le<std::uint32_t>(bytes, 7);
  if (dim == 0) {
    throw FormatError("dim must be >= 1");
  }
  const auto count = get_le<std::uint64_t>(bytes, 11);
  const std::size_t payload = bytes.size() - kEmbeddingHeaderSize;
  const std::uint64_t min_record = 2 + 4ULL * dim;
  if (count > payload / min_record) {
    throw FormatError("truncated: declared count " + std::to_string(count) + " does not fit in " +
                      std::to_string(payload) + " payload bytes");
  }

  std::vector<EmbeddingRecord> records;
  records.reserve(count);
  std::size_t pos = kEmbeddingHeaderSize;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (bytes.size() - pos < 2) {
      throw FormatError("truncated: record " + std::to_string(i) + " id length");
    }
    const auto id_len = get_le<std::uint16_t>(bytes, pos);
    pos += 2;
    if (bytes.size() - pos < id_len + 4ULL * dim) {
      throw FormatError("truncated: record " + std::to_string(i));
    }
    EmbeddingRecord r;
    r.id.assign(bytes.substr(pos, id_len));
    pos += id_len;
    r.values.resize(dim);
    for (std::uint32_t k = 0; k < dim; ++k) {
      r.values[k] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, pos));
      pos += 4;
    }
    records.push_back(std::move(r));
  }
  if (pos != bytes.size()) {
    throw FormatError(std::to_string(bytes.size() - pos) + " trailing bytes after " +
                      std::to_string(count) + " records");
  }
  try {
    return EmbeddingSet(modality, dim, std::move(records));
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }
}

std::size_t write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  const std::string bytes = encode_embeddings(set);
  write_file_atomic(path, bytes);
  return bytes.size();
}

EmbeddingSet read_embeddings(const std::filesystem::path& path, std::optional<Modality> expected) {
  const std::string bytes = read_file(path);
  try {
    return decode_embeddings(bytes, expected);
  } catch (const VersionError& e) {
    throw VersionError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

double l2_norm(std::span<const float> v) noexcept {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

NormalizeResult l2_normalize(const EmbeddingSet& set) {
  std::vector<EmbeddingRecord> out;
  std::vector<std::string> zeros;
  out.reserve(set.size());
  for (const auto& r : set.records()) {
    EmbeddingRecord n{r.id, r.values};
    const double norm = l2_norm(r.values);
    if (norm > kZeroNormEpsilon) {
      for (float& x : n.values) x = static_cast<float>(x / norm);
    } else {
      zeros.push_back(r.id);
    }
    out.push_back(std::move(n));
  }
  return {EmbeddingSet(set.modality(), set.dim(), std::move(out)), std::move(zeros)};
}

}  // namespace dvs
