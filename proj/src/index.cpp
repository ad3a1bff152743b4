#include "xlqa/index.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "xlqa/error.hpp"

namespace xlqa {

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch, "dot of vectors with dims " +
                                                   std::to_string(a.size()) + " and " +
                                                   std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

namespace {

// Scores four rows per pass over the query. Each row keeps its own
// accumulator and ascending element order, so the values equal dot() exactly.
void score_all(const EmbeddingMatrix& m, std::span<const float> q, std::vector<double>& out) {
  const std::size_t n = m.size();
  const std::size_t d = m.dim();
  const float* base = m.data().data();
  out.resize(n);
  std::size_t r = 0;
  for (; r + 4 <= n; r += 4) {
    const float* p0 = base + r * d;
    const float* p1 = p0 + d;
    const float* p2 = p1 + d;
    const float* p3 = p2 + d;
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double qi = q[i];
      a0 += qi * static_cast<double>(p0[i]);
      a1 += qi * static_cast<double>(p1[i]);
      a2 += qi * static_cast<double>(p2[i]);
      a3 += qi * static_cast<double>(p3[i]);
    }
    out[r] = a0;
    out[r + 1] = a1;
    out[r + 2] = a2;
    out[r + 3] = a3;
  }
  for (; r < n; ++r) out[r] = dot(q, m.row(r));
}

}  // namespace

FlatIpIndex FlatIpIndex::build(std::shared_ptr<const EmbeddingMatrix> passages) {
  if (!passages || passages->empty()) {
    throw Error(ErrorCode::invalid_argument, "cannot build an index from an empty matrix");
  }
  if (passages->dim() == 0) throw Error(ErrorCode::invalid_argument, "index dim must be positive");
  return FlatIpIndex(std::move(passages));
}

FlatIpIndex FlatIpIndex::build(EmbeddingMatrix passages) {
  return build(std::make_shared<const EmbeddingMatrix>(std::move(passages)));
}

std::vector<Hit> FlatIpIndex::search_topk(std::span<const float> query, std::size_t k) const {
  if (query.size() != dim()) {
    throw Error(ErrorCode::dimension_mismatch, "query dim " + std::to_string(query.size()) +
                                                   " does not match index dim " +
                                                   std::to_string(dim()));
  }
  if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be at least 1");

  std::vector<double> scores;
  score_all(*passages_, query, scores);

  const auto& ids = passages_->ids();
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  };
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    better);

  std::vector<Hit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    hits.push_back(Hit{ids[order[i]], scores[order[i]], i + 1});
  }
  return hits;
}

std::vector<RetrievalResult> FlatIpIndex::batch_search(const EmbeddingMatrix& queries,
                                                       std::size_t k,
                                                       std::size_t workers) const {
  if (queries.dim() != dim()) {
    throw Error(ErrorCode::dimension_mismatch, "query dim " + std::to_string(queries.dim()) +
                                                   " does not match index dim " +
                                                   std::to_string(dim()));
  }
  if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());

  const std::size_t n = queries.size();
  std::vector<RetrievalResult> results(n);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      results[i] = RetrievalResult(queries.id(i), search_topk(queries.row(i), k));
    }
  };

  workers = std::min(workers, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    run(0, n);
    return results;
  }

  // Contiguous query slices; each slot is written by exactly one worker.
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          run(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

void FlatIpIndex::save(const std::filesystem::path& path) const {
  write_embeddings(path, *passages_, kIndexMagic);
}

FlatIpIndex FlatIpIndex::load(const std::filesystem::path& path) {
  return build(load_embeddings(path, kIndexMagic));
}

}  // namespace xlqa
