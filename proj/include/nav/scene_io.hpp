#pragma once

#include <string>

#include "nav/world.hpp"

namespace nav {

// Human-readable scene text: one header line, one line per obstacle. Writing
// then reading gives back an identical scene up to printed precision.
std::string scene_to_text(const SceneSpec& scene);
SceneSpec scene_from_text(const std::string& text);

void save_scene(const std::string& path, const SceneSpec& scene);
SceneSpec load_scene(const std::string& path);

// Stable content hash over the scene geometry (used in run manifests).
uint64_t scene_hash(const SceneSpec& scene);

}  // namespace nav
