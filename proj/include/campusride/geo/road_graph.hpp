#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "campusride/domain/geo_point.hpp"
#include "campusride/domain/ids.hpp"

namespace campusride::geo {

struct Edge {
  NodeId from;
  NodeId to;
  double length_m{};
  bool bidirectional{true};
};

/// Directed traversal of an edge, by dense node index.
struct Arc {
  std::size_t to{};
  double length_m{};
};

/// Road network over which every route is computed. Immutable once
/// validated; safe for concurrent readers.
///
/// Text form, one record per line, '#' starts a comment:
///
///     graph v1
///     node <id> <lat> <lon>
///     edge <from> <to> <length_m> <bidi:0|1>
class RoadGraph {
 public:
  void add_node(NodeId id, GeoPoint position);
  void add_edge(Edge edge);

  /// Throws Error{GraphInvalid} unless non-empty, every length is positive and
  /// the graph is weakly connected. Endpoint existence is checked by add_edge.
  void validate() const;

  [[nodiscard]] static RoadGraph parse(std::istream& in);
  [[nodiscard]] static RoadGraph parse(const std::string& text);
  [[nodiscard]] static RoadGraph load(const std::filesystem::path& path);
  [[nodiscard]] std::string serialize() const;

  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
  [[nodiscard]] bool empty() const noexcept { return ids_.empty(); }
  [[nodiscard]] bool contains(const NodeId& id) const { return index_.contains(id); }
  [[nodiscard]] std::optional<std::size_t> index_of(const NodeId& id) const;
  [[nodiscard]] const NodeId& id_at(std::size_t index) const { return ids_[index]; }
  [[nodiscard]] const GeoPoint& position_at(std::size_t index) const { return positions_[index]; }
  [[nodiscard]] const GeoPoint& position(const NodeId& id) const;

  [[nodiscard]] std::span<const Arc> out_arcs(std::size_t index) const { return out_[index]; }
  [[nodiscard]] std::span<const Arc> in_arcs(std::size_t index) const { return in_[index]; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

 private:
  std::map<NodeId, std::size_t> index_;
  std::vector<NodeId> ids_;
  std::vector<GeoPoint> positions_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Arc>> out_;
  std::vector<std::vector<Arc>> in_;
};

}  // namespace campusride::geo
