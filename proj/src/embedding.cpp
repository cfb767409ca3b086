#include "ovsg/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>

#include "json.hpp"

namespace ovsg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform in the open interval (0, 1).
double to_unit_open(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

Eigen::VectorXd normalized(const Eigen::VectorXd& v, std::string_view what) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DimensionMismatch("zero or non-finite vector for '" + std::string(what) + "'");
  }
  // Already-unit vectors are kept bit-exact so normalization is idempotent.
  if (std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return v;
  return v / n;
}

}  // namespace

std::string_view to_string(Space space) {
  switch (space) {
    case Space::Object:
      return "object";
    case Space::Name:
      return "name";
    case Space::Abstract:
      return "abstract";
    case Space::SpatialText:
      return "spatial-text";
  }
  return "unknown";
}

Space parse_space(std::string_view text) {
  for (Space s : kAllSpaces) {
    if (to_string(s) == text) return s;
  }
  throw ParseError("unknown embedding space '" + std::string(text) + "'");
}

FeatureVec::FeatureVec(Space space, Eigen::VectorXd values) : space_(space) {
  if (values.size() == 0) throw DimensionMismatch("empty feature vector");
  values_ = normalized(values, to_string(space));
}

double feature_distance(const FeatureVec& a, const FeatureVec& b) {
  if (a.space() != b.space()) {
    throw SpaceMismatch("cannot compare features from spaces '" +
                        std::string(to_string(a.space())) + "' and '" +
                        std::string(to_string(b.space())) + "'");
  }
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("feature dimensions differ within space '" +
                            std::string(to_string(a.space())) + "'");
  }
  return std::clamp(1.0 - a.values().dot(b.values()), 0.0, 2.0);
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

void EmbeddingTable::add(std::string_view text, const Eigen::VectorXd& vec) {
  if (vec.size() != dim) {
    throw DimensionMismatch("entry '" + std::string(text) + "' has dimension " +
                            std::to_string(vec.size()) + ", space '" +
                            std::string(to_string(space)) + "' expects " + std::to_string(dim));
  }
  entries[normalize_text(text)] = normalized(vec, text);
}

void EmbeddingTable::add_probe(std::string_view text, const Eigen::VectorXd& vec) {
  if (vec.size() != dim) {
    throw DimensionMismatch("lexicon entry '" + std::string(text) + "' has dimension " +
                            std::to_string(vec.size()) + ", expected " + std::to_string(dim));
  }
  lexicon[normalize_text(text)] = normalized(vec, text);
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open embedding table " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    EmbeddingTable table;
    table.space = parse_space(doc.at("space").get<std::string>());
    table.dim = doc.at("dim").get<int>();
    if (table.dim <= 0) throw ParseError(path.string() + ": dim must be positive");
    auto read = [&](const nlohmann::json& obj, bool probe) {
      for (const auto& [text, arr] : obj.items()) {
        const auto values = arr.get<std::vector<double>>();
        const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(
            values.data(), static_cast<Eigen::Index>(values.size()));
        probe ? table.add_probe(text, v) : table.add(text, v);
      }
    };
    read(doc.at("entries"), false);
    if (doc.contains("lexicon")) read(doc.at("lexicon"), true);
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Eigen::VectorXd stub_vector(std::string_view text, int dim, std::uint64_t seed) {
  const std::uint64_t key = splitmix64(fnv1a64(text) ^ splitmix64(seed));
  Eigen::VectorXd v(dim);
  std::uint64_t counter = 0;
  for (int i = 0; i < dim; i += 2) {
    const double u1 = to_unit_open(splitmix64(key + counter++));
    const double u2 = to_unit_open(splitmix64(key + counter++));
    const double r = std::sqrt(-2.0 * std::log(u1));
    v[i] = r * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < dim) v[i + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
  }
  return v.normalized();
}

EmbedderOptions EmbedderOptions::from_env() {
  EmbedderOptions opts;
  if (const char* env = std::getenv("OVSG_STUB_SEED")) {
    char* end = nullptr;
    const unsigned long long seed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw ConfigError("OVSG_STUB_SEED must be an unsigned integer, got '" +
                        std::string(env) + "'");
    }
    opts.stub_seed = seed;
  }
  return opts;
}

Embedder::Embedder(EmbedderOptions options) : options_(options) {
  if (options_.stub_dim <= 0) throw ConfigError("stub dimension must be positive");
  if (!(options_.snap_floor > -1.0 && options_.snap_floor <= 1.0)) {
    throw ConfigError("snap floor must lie in (-1, 1]");
  }
}

void Embedder::set_table(EmbeddingTable table) {
  const Space space = table.space;
  tables_.insert_or_assign(space, std::move(table));
}

bool Embedder::has_provider(Space space) const {
  return options_.stub_enabled || tables_.count(space) > 0;
}

int Embedder::dim(Space space) const {
  const auto it = tables_.find(space);
  return it != tables_.end() ? it->second.dim : options_.stub_dim;
}

const EmbeddingTable* Embedder::table(Space space) const {
  const auto it = tables_.find(space);
  return it != tables_.end() ? &it->second : nullptr;
}

FeatureVec Embedder::embed(Space space, std::string_view raw) const {
  const std::string text = normalize_text(raw);
  if (text.empty()) throw UnencodableText("cannot embed empty text");
  const EmbeddingTable* tab = table(space);
  const int d = dim(space);

  if (tab) {
    if (const auto it = tab->entries.find(text); it != tab->entries.end()) {
      return FeatureVec(space, it->second);
    }
  }

  std::optional<Eigen::VectorXd> probe;
  if (tab) {
    if (const auto it = tab->lexicon.find(text); it != tab->lexicon.end()) probe = it->second;
  }
  if (!probe && options_.stub_enabled) probe = stub_vector(text, d, options_.stub_seed);

  if (probe && tab && !tab->entries.empty()) {
    const Eigen::VectorXd* best = nullptr;
    double best_sim = -2.0;
    for (const auto& [key, vec] : tab->entries) {
      const double sim = vec.dot(*probe);
      if (sim > best_sim) {
        best_sim = sim;
        best = &vec;
      }
    }
    if (best && best_sim >= options_.snap_floor) return FeatureVec(space, *best);
  }
  if (options_.stub_enabled) return FeatureVec(space, stub_vector(text, d, options_.stub_seed));

  throw UnencodableText("unencodable text '" + text + "' in space '" +
                        std::string(to_string(space)) + "'");
}

}  // namespace ovsg
