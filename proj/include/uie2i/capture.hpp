#pragma once

// Capture bundles: one directory holding screenshot.png, metadata.json and
// manifest.json. Parsing a bundle yields pool entries: elements tagged with
// the capture they came from.

#include <algorithm>
#include <variant>

#include "uie2i/image.hpp"
#include "uie2i/parsers.hpp"

namespace uie2i {

using MetadataTree = std::variant<DomSnapshotNode, UiaNode, VhNode>;

struct CaptureBundle {
  fs::path dir;
  std::string source_id;
  Platform platform = Platform::Web;
  ScreenDims viewport;
  std::optional<double> zoom;
  MetadataTree metadata;

  fs::path screenshot_path() const { return dir / "screenshot.png"; }
};

/// An element together with the capture that produced it.
struct PoolEntry {
  std::string capture_id;
  Platform platform = Platform::Web;
  std::string screenshot;
  ScreenDims screen;
  UiElement element;

  bool operator==(const PoolEntry&) const = default;
};

inline void to_json(Json& j, const PoolEntry& e) {
  j = Json{{"capture_id", e.capture_id},
           {"platform", e.platform},
           {"screenshot", e.screenshot},
           {"screen", e.screen},
           {"element", e.element}};
}
inline void from_json(const Json& j, PoolEntry& e) {
  e.capture_id = j.at("capture_id").get<std::string>();
  e.platform = j.at("platform").get<Platform>();
  e.screenshot = j.at("screenshot").get<std::string>();
  e.screen = j.at("screen").get<ScreenDims>();
  e.element = j.at("element").get<UiElement>();
}

inline CaptureBundle load_bundle(const fs::path& dir) {
  CaptureBundle b;
  b.dir = dir;
  try {
    const Json manifest = read_json_file(dir / "manifest.json");
    b.platform = manifest.at("platform").get<Platform>();
    b.viewport = manifest.at("viewport").get<ScreenDims>();
    b.source_id = manifest.at("source_id").get<std::string>();
    if (auto it = manifest.find("zoom"); it != manifest.end() && !it->is_null())
      b.zoom = it->get<double>();

    const Json meta = read_json_file(dir / "metadata.json");
    const Platform meta_platform = meta.at("platform").get<Platform>();
    if (meta_platform != b.platform)
      throw DataError("metadata platform '" + std::string(to_string(meta_platform)) +
                      "' does not match manifest platform '" + std::string(to_string(b.platform)) + "'");
    const Json& root = meta.at("root");
    switch (b.platform) {
      case Platform::Web: b.metadata = root.get<DomSnapshotNode>(); break;
      case Platform::Desktop: b.metadata = root.get<UiaNode>(); break;
      case Platform::Mobile: b.metadata = root.get<VhNode>(); break;
    }
  } catch (const DataError& e) {
    throw DataError(dir.string() + ": " + e.what());
  } catch (const Json::exception& e) {
    throw DataError(dir.string() + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw DataError(dir.string() + ": " + e.what());
  }
  const ScreenDims shot = png_dimensions(b.screenshot_path());
  if (!(shot == b.viewport))
    throw DataError(dir.string() + ": screenshot is " + std::to_string(shot.width()) + "x" +
                    std::to_string(shot.height()) + " but manifest viewport is " +
                    std::to_string(b.viewport.width()) + "x" + std::to_string(b.viewport.height()));
  return b;
}

/// A bundle directory itself, or every immediate subdirectory holding a
/// manifest.json, in lexicographic order.
inline std::vector<fs::path> list_bundles(const fs::path& root) {
  if (fs::exists(root / "manifest.json")) return {root};
  if (!fs::is_directory(root)) throw DataError("not a bundle directory: " + root.string());
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

inline std::vector<UiElement> parse_bundle(const CaptureBundle& b, const ParseConfig& cfg = {}) {
  return std::visit(
      [&](const auto& root) -> std::vector<UiElement> {
        using T = std::decay_t<decltype(root)>;
        if constexpr (std::is_same_v<T, DomSnapshotNode>) return parse_dom(root, b.viewport, cfg);
        else if constexpr (std::is_same_v<T, UiaNode>) return parse_uia(root, b.viewport, cfg);
        else return parse_view_hierarchy(root, b.viewport, cfg);
      },
      b.metadata);
}

inline std::vector<PoolEntry> to_pool_entries(const CaptureBundle& b, const std::vector<UiElement>& elements) {
  std::vector<PoolEntry> out;
  out.reserve(elements.size());
  for (const auto& e : elements)
    out.push_back({b.source_id, b.platform, b.screenshot_path().string(), b.viewport, e});
  return out;
}

}  // namespace uie2i
