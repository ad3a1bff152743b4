#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "xlqa/embeddings.hpp"
#include "xlqa/types.hpp"

namespace xlqa {

/// Exact maximum-inner-product index: a flat scan over an immutable passage
/// matrix.
///
/// Every score is a dot product accumulated in double precision in ascending
/// element order, so a score never depends on the thread layout. Hits are
/// ordered by score descending and exact ties by ascending pid (byte-wise).
class FlatIpIndex {
 public:
  // Rejects an empty matrix.
  static FlatIpIndex build(std::shared_ptr<const EmbeddingMatrix> passages);
  static FlatIpIndex build(EmbeddingMatrix passages);

  std::size_t size() const noexcept { return passages_->size(); }
  std::size_t dim() const noexcept { return passages_->dim(); }
  const EmbeddingMatrix& passages() const noexcept { return *passages_; }

  // Returns min(k, size()) hits. Throws on k == 0 or a dimension mismatch.
  std::vector<Hit> search_topk(std::span<const float> query, std::size_t k) const;

  // Results follow query row order; each equals search_topk for that row.
  // `workers` == 0 picks the hardware concurrency.
  std::vector<RetrievalResult> batch_search(const EmbeddingMatrix& queries, std::size_t k,
                                            std::size_t workers = 1) const;

  void save(const std::filesystem::path& path) const;
  static FlatIpIndex load(const std::filesystem::path& path);

 private:
  explicit FlatIpIndex(std::shared_ptr<const EmbeddingMatrix> passages)
      : passages_(std::move(passages)) {}

  std::shared_ptr<const EmbeddingMatrix> passages_;
};

// Double-precision dot product of two float vectors in ascending index order.
double dot(std::span<const float> a, std::span<const float> b);

}  // namespace xlqa
