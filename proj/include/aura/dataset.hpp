#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aura/matrix.hpp"

namespace aura {

/// P.835 quality channel: signal, background, overall.
enum class Channel { kSig = 0, kBak = 1, kOvrl = 2 };

std::string_view to_string(Channel channel);
Channel parse_channel(std::string_view name);

inline constexpr double kMosMin = 1.0;
inline constexpr double kMosMax = 5.0;

struct MosTriple {
  double sig = 0.0;
  double bak = 0.0;
  double ovrl = 0.0;

  double operator[](Channel c) const;
  friend bool operator==(const MosTriple&, const MosTriple&) = default;
};

struct MosPair {
  MosTriple before;
  MosTriple after;
  friend bool operator==(const MosPair&, const MosPair&) = default;
};

/// after - before, per channel. Negative values mean the model degraded the clip.
struct DmosTriple {
  double sig = 0.0;
  double bak = 0.0;
  double ovrl = 0.0;

  double operator[](Channel c) const;
  friend bool operator==(const DmosTriple&, const DmosTriple&) = default;
};

struct ClipRecord {
  std::string clip_id;
  std::vector<float> embedding;
  std::optional<std::string> noise_label;
  std::map<std::string, MosPair> scores;

  friend bool operator==(const ClipRecord&, const ClipRecord&) = default;
};

/// Validated, immutable set of clips sharing one embedding dimension.
class ClipCollection {
 public:
  ClipCollection() = default;
  /// Validates every record invariant; throws InvalidInput naming the clip.
  ClipCollection(std::size_t dim, std::vector<std::string> model_ids,
                 std::vector<ClipRecord> records);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<ClipRecord>& records() const { return records_; }
  const ClipRecord& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<std::string>& model_ids() const { return model_ids_; }

  std::optional<std::size_t> find(std::string_view clip_id) const;

  /// Embeddings as an n x dim matrix of doubles.
  Matrix points() const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> model_ids_;
  std::vector<ClipRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Throws InvalidInput if any component lies outside [1, 5] or is non-finite.
void validate_mos(const MosTriple& mos, std::string_view where);

DmosTriple dmos(const ClipRecord& record, std::string_view model_id);

/// n_clips x n_models matrix of DMOS on one channel, columns in model_ids order.
Matrix dmos_matrix(const ClipCollection& collection, Channel channel);

// On-disk format: JSON-lines manifest plus a little-endian f32 embedding file
// with a 16 byte header ("AURAEMB1", u32 count, u32 dim).

inline constexpr std::string_view kEmbeddingMagic = "AURAEMB1";

struct EmbeddingBlock {
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;  // count * dim, row-major
};

EmbeddingBlock read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const EmbeddingBlock& block);

struct LoadOptions {
  /// When set, the embedding header must declare exactly this dimension.
  std::optional<std::size_t> expected_dim;
};

ClipCollection load_collection(const std::filesystem::path& manifest_path,
                               const std::filesystem::path& embeddings_path,
                               const LoadOptions& options = {});

void write_collection(const ClipCollection& collection,
                      const std::filesystem::path& manifest_path,
                      const std::filesystem::path& embeddings_path);

}  // namespace aura
