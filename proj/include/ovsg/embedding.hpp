#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ovsg/feature.hpp"

namespace ovsg {

/// Lower-cases ASCII, trims, and collapses internal whitespace runs.
std::string normalize_text(std::string_view text);

/// Text -> vector lookup for one space.
///
/// `entries` are the vocabulary returned by lookups. `lexicon` holds probe
/// vectors for additional texts: a lexicon hit is snapped to its nearest
/// entry but never returned itself.
struct EmbeddingTable {
  Space space = Space::Object;
  int dim = 0;
  std::map<std::string, Eigen::VectorXd> entries;
  std::map<std::string, Eigen::VectorXd> lexicon;

  /// Keys are normalized and vectors unit-normalized on insert.
  void add(std::string_view text, const Eigen::VectorXd& vec);
  void add_probe(std::string_view text, const Eigen::VectorXd& vec);
};

/// Reads {"space": str, "dim": int, "entries": {...}, "lexicon": {...}?}.
EmbeddingTable load_embedding_table(const std::filesystem::path& path);

/// Deterministic unit vector for `text`: a seeded 64-bit hash drives a
/// counter-based generator whose Gaussian draws are normalized.
Eigen::VectorXd stub_vector(std::string_view text, int dim, std::uint64_t seed);

struct EmbedderOptions {
  double snap_floor = 0.75;
  bool stub_enabled = true;
  std::uint64_t stub_seed = 42;
  int stub_dim = 128;

  /// Defaults with the stub seed taken from OVSG_STUB_SEED when set.
  static EmbedderOptions from_env();
};

/// One provider per space: an optional table backed by the stub.
///
/// Lookup order for embed(): exact table entry, nearest entry by cosine to a
/// probe vector (lexicon or stub) if similarity >= snap_floor, then the stub
/// vector itself. Immutable after setup; embed() is safe to call concurrently.
class Embedder {
 public:
  explicit Embedder(EmbedderOptions options = {});

  /// Replaces the table for table.space.
  void set_table(EmbeddingTable table);

  const EmbedderOptions& options() const { return options_; }
  bool has_provider(Space space) const;
  int dim(Space space) const;
  const EmbeddingTable* table(Space space) const;

  FeatureVec embed(Space space, std::string_view text) const;

 private:
  EmbedderOptions options_;
  std::map<Space, EmbeddingTable> tables_;
};

}  // namespace ovsg
