#include "xlqa/embeddings.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <algorithm>
#include <limits>

#include "jsonl.hpp"
#include "utf8.hpp"
#include "xlqa/error.hpp"

namespace xlqa {

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::invalid_argument, "embedding dim must be positive");
}

void EmbeddingMatrix::add_row(std::string id, std::span<const float> vec) {
  if (vec.size() != dim_) {
    throw Error(ErrorCode::dimension_mismatch, "row '" + id + "' has " +
                                                   std::to_string(vec.size()) +
                                                   " entries, expected " + std::to_string(dim_));
  }
  for (std::size_t i = 0; i < vec.size(); ++i) {
    if (!std::isfinite(vec[i])) {
      throw Error(ErrorCode::invalid_argument,
                  "row '" + id + "' entry " + std::to_string(i) + " is not finite");
    }
  }
  auto [it, inserted] = by_id_.emplace(id, ids_.size());
  if (!inserted) throw Error(ErrorCode::duplicate, "duplicate embedding id '" + id + "'");
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), vec.begin(), vec.end());
}

std::optional<std::size_t> EmbeddingMatrix::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingMatrix::reserve(std::size_t rows) {
  ids_.reserve(rows);
  data_.reserve(rows * dim_);
  by_id_.reserve(rows);
}

bool EmbeddingMatrix::operator==(const EmbeddingMatrix& other) const {
  if (dim_ != other.dim_ || ids_ != other.ids_ || data_.size() != other.data_.size()) {
    return false;
  }
  // Bitwise comparison: -0.0f and 0.0f are distinct payloads.
  return std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

namespace {

static_assert(std::numeric_limits<float>::is_iec559);

class Writer {
 public:
  explicit Writer(std::vector<std::byte>& out) : out_(out) {}

  template <class UInt>
  void uint(UInt v) {
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
    }
  }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    auto* b = static_cast<const std::byte*>(p);
    out_.insert(out_.end(), b, b + n);
  }

 private:
  std::vector<std::byte>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> in) : in_(in) {}

  std::size_t offset() const noexcept { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw Error(ErrorCode::format, "truncated payload at byte offset " + std::to_string(pos_) +
                                         ": need " + std::to_string(n) + " bytes for " + what +
                                         ", " + std::to_string(in_.size() - pos_) +
                                         " available");
    }
  }

  template <class UInt>
  UInt uint(const char* what) {
    need(sizeof(UInt), what);
    UInt v = 0;
    for (std::size_t i = 0; i < sizeof(UInt); ++i) {
      v |= static_cast<UInt>(std::to_integer<unsigned>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(UInt);
    return v;
  }

  std::string_view chars(std::size_t n, const char* what) {
    need(n, what);
    std::string_view s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool at_end() const noexcept { return pos_ == in_.size(); }

 private:
  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

std::string magic_string(const Magic& m) { return std::string(m.begin(), m.end()); }

[[noreturn]] void fail_at(std::size_t offset, const std::string& msg) {
  throw Error(ErrorCode::format, msg + " at byte offset " + std::to_string(offset));
}

}  // namespace

std::vector<std::byte> encode_embeddings(const EmbeddingMatrix& m, const Magic& magic) {
  if (m.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::invalid_argument, "dim does not fit in u32");
  }
  std::vector<std::byte> out;
  std::size_t id_bytes = 0;
  for (const auto& id : m.ids()) id_bytes += id.size();
  out.reserve(20 + m.size() * (2 + m.dim() * 4) + id_bytes);

  Writer w(out);
  w.bytes(magic.data(), magic.size());
  w.uint<std::uint32_t>(kFormatVersion);
  w.uint<std::uint64_t>(m.size());
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(m.dim()));
  for (std::size_t r = 0; r < m.size(); ++r) {
    const std::string& id = m.id(r);
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw Error(ErrorCode::invalid_argument, "id longer than 65535 bytes");
    }
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(id.size()));
    w.bytes(id.data(), id.size());
    for (float v : m.row(r)) w.f32(v);
  }
  return out;
}

EmbeddingMatrix decode_embeddings(std::span<const std::byte> bytes, const Magic& magic) {
  Reader r(bytes);
  const std::string_view got = r.chars(4, "magic");
  if (got != std::string_view(magic.data(), magic.size())) {
    fail_at(0, "magic mismatch: expected '" + magic_string(magic) + "'");
  }
  const std::size_t version_at = r.offset();
  const auto version = r.uint<std::uint32_t>("version");
  if (version != kFormatVersion) {
    fail_at(version_at, "unsupported version " + std::to_string(version));
  }
  const auto count = r.uint<std::uint64_t>("count");
  const std::size_t dim_at = r.offset();
  const auto dim = r.uint<std::uint32_t>("dim");
  if (dim == 0) fail_at(dim_at, "dim must be positive");

  // Reserve only what the payload can actually hold; a lying header then fails
  // on the first missing row instead of on allocation.
  const std::uint64_t min_row = 2 + std::uint64_t{dim} * 4;
  const std::uint64_t fit = (bytes.size() - r.offset()) / min_row;

  EmbeddingMatrix m(dim);
  m.reserve(static_cast<std::size_t>(std::min(count, fit)));
  std::vector<float> vec(dim);
  for (std::uint64_t row = 0; row < count; ++row) {
    const std::size_t row_at = r.offset();
    const auto id_len = r.uint<std::uint16_t>("id length");
    const std::string_view id = r.chars(id_len, "id");
    if (!detail::is_valid_utf8(id)) fail_at(row_at + 2, "id is not valid UTF-8");
    if (m.find(id)) fail_at(row_at, "duplicate id '" + std::string(id) + "'");
    r.need(std::size_t{dim} * 4, "vector");
    for (std::uint32_t i = 0; i < dim; ++i) {
      const std::size_t at = r.offset();
      vec[i] = std::bit_cast<float>(r.uint<std::uint32_t>("vector"));
      if (!std::isfinite(vec[i])) fail_at(at, "non-finite value in row '" + std::string(id) + "'");
    }
    m.add_row(std::string(id), vec);
  }
  if (!r.at_end()) fail_at(r.offset(), "trailing bytes after last row");
  return m;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m,
                      const Magic& magic) {
  const auto bytes = encode_embeddings(m, magic);
  auto out = detail::open_output(path, std::ios::out | std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "write failure on '" + path.string() + "'");
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, const Magic& magic) {
  auto in = detail::open_input(path, std::ios::in | std::ios::binary | std::ios::ate);
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<char> raw(size);
  in.seekg(0);
  if (!in.read(raw.data(), static_cast<std::streamsize>(size))) {
    throw Error(ErrorCode::io, "read failure on '" + path.string() + "'");
  }
  try {
    return decode_embeddings(std::as_bytes(std::span<const char>(raw)), magic);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace xlqa
