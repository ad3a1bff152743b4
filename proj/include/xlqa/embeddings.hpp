#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xlqa {

inline constexpr std::size_t kDefaultDim = 768;

/// Id-aligned dense float32 vectors stored row-major in one buffer.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(std::size_t dim = kDefaultDim);

  // Rejects a wrong-length vector, a non-finite entry or a repeated id.
  void add_row(std::string id, std::span<const float> vec);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  const std::string& id(std::size_t row) const { return ids_.at(row); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> row(std::size_t r) const {
    return {data_.data() + r * dim_, dim_};
  }
  std::span<const float> data() const noexcept { return data_; }

  std::optional<std::size_t> find(std::string_view id) const;

  void reserve(std::size_t rows);

  bool operator==(const EmbeddingMatrix& other) const;

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Binary layout (little-endian, no padding):
//   magic[4] | version u32 = 1 | count u64 | dim u32
//   count x ( id_len u16 | id bytes (UTF-8) | dim x f32 )
// Index files share the layout under a different magic.
using Magic = std::array<char, 4>;
inline constexpr Magic kEmbeddingMagic{'X', 'E', 'M', 'B'};
inline constexpr Magic kIndexMagic{'X', 'I', 'D', 'X'};
inline constexpr std::uint32_t kFormatVersion = 1;

std::vector<std::byte> encode_embeddings(const EmbeddingMatrix& m,
                                         const Magic& magic = kEmbeddingMagic);
// Errors carry the byte offset at which decoding failed.
EmbeddingMatrix decode_embeddings(std::span<const std::byte> bytes,
                                  const Magic& magic = kEmbeddingMagic);

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m,
                      const Magic& magic = kEmbeddingMagic);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                const Magic& magic = kEmbeddingMagic);

}  // namespace xlqa
