#pragma once

#include <filesystem>
#include <string>

#include "ovsg/embedding.hpp"
#include "ovsg/scene_graph.hpp"
#include "ovsg/spatial.hpp"

namespace ovsg {

/// Builds a scene graph from a scene description file.
///
/// Objects without a "feature" are encoded from their label in the object
/// space; agent and region names go to the name space, abstract relation
/// labels to the abstract space. Spatial edges are derived from poses unless
/// the file lists "spatial_relations" explicitly, in which case each label is
/// resolved through the vocabulary into a saturated signature.
SceneGraph load_scene(const std::filesystem::path& path, const Embedder& embedder,
                      const SpatialVocabulary& vocabulary, const SpatialParams& params = {});

/// Same as load_scene for an in-memory JSON document.
SceneGraph parse_scene(const std::string& json_text, const Embedder& embedder,
                       const SpatialVocabulary& vocabulary, const SpatialParams& params = {});

/// Deterministic JSON serialization of a built graph.
std::string serialize_graph(const SceneGraph& graph);
SceneGraph deserialize_graph(const std::string& json_text);

void save_graph(const SceneGraph& graph, const std::filesystem::path& path);
SceneGraph load_graph(const std::filesystem::path& path);

}  // namespace ovsg
