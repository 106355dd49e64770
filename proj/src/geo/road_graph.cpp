#include "campusride/geo/road_graph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"

namespace campusride::geo {

void RoadGraph::add_node(NodeId id, GeoPoint position) {
  if (id.empty()) throw Error(ErrorCode::GraphInvalid, "empty node id");
  if (!is_valid(position)) throw Error(ErrorCode::GraphInvalid, fmt::format("node {} has invalid coordinates", id.str()));
  if (index_.contains(id)) throw Error(ErrorCode::GraphInvalid, fmt::format("duplicate node {}", id.str()));
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  positions_.push_back(position);
  out_.emplace_back();
  in_.emplace_back();
}

void RoadGraph::add_edge(Edge edge) {
  const auto from = index_of(edge.from);
  const auto to = index_of(edge.to);
  if (!from || !to) {
    throw Error(ErrorCode::GraphInvalid,
                fmt::format("edge {} -> {} references an unknown node", edge.from.str(), edge.to.str()));
  }
  if (!(edge.length_m > 0.0) || !std::isfinite(edge.length_m)) {
    throw Error(ErrorCode::GraphInvalid,
                fmt::format("edge {} -> {} has non-positive length", edge.from.str(), edge.to.str()));
  }
  out_[*from].push_back({*to, edge.length_m});
  in_[*to].push_back({*from, edge.length_m});
  if (edge.bidirectional) {
    out_[*to].push_back({*from, edge.length_m});
    in_[*from].push_back({*to, edge.length_m});
  }
  edges_.push_back(std::move(edge));
}

void RoadGraph::validate() const {
  if (ids_.empty()) throw Error(ErrorCode::GraphInvalid, "graph has no nodes");
  std::vector<bool> seen(ids_.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (const auto* arcs : {&out_[u], &in_[u]}) {
      for (const auto& arc : *arcs) {
        if (!seen[arc.to]) {
          seen[arc.to] = true;
          ++reached;
          stack.push_back(arc.to);
        }
      }
    }
  }
  if (reached != ids_.size()) {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
      if (!seen[i]) {
        throw Error(ErrorCode::GraphInvalid, fmt::format("graph is disconnected: {} unreachable from {}",
                                                         ids_[i].str(), ids_[0].str()));
      }
    }
  }
}

std::optional<std::size_t> RoadGraph::index_of(const NodeId& id) const {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  return std::nullopt;
}

const GeoPoint& RoadGraph::position(const NodeId& id) const {
  const auto idx = index_of(id);
  if (!idx) throw Error(ErrorCode::UnknownNode, fmt::format("unknown node {}", id.str()));
  return positions_[*idx];
}

RoadGraph RoadGraph::parse(std::istream& in) {
  RoadGraph graph;
  std::string line;
  int line_no = 0;
  bool header = false;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::GraphInvalid, fmt::format("line {}: {}", line_no, why));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;
    if (!header) {
      std::string version;
      if (kind != "graph" || !(fields >> version) || version != "v1") fail("expected header 'graph v1'");
      header = true;
    } else if (kind == "node") {
      std::string id;
      double lat = 0;
      double lon = 0;
      if (!(fields >> id >> lat >> lon)) fail("expected 'node <id> <lat> <lon>'");
      graph.add_node(NodeId{id}, GeoPoint{lat, lon});
    } else if (kind == "edge") {
      std::string from;
      std::string to;
      double length = 0;
      int bidi = 0;
      if (!(fields >> from >> to >> length >> bidi) || (bidi != 0 && bidi != 1)) {
        fail("expected 'edge <from> <to> <length_m> <0|1>'");
      }
      graph.add_edge(Edge{NodeId{from}, NodeId{to}, length, bidi == 1});
    } else {
      fail(fmt::format("unknown record '{}'", kind));
    }
    std::string extra;
    if (fields >> extra) fail(fmt::format("trailing token '{}'", extra));
  }
  if (!header) throw Error(ErrorCode::GraphInvalid, "missing 'graph v1' header");
  graph.validate();
  return graph;
}

RoadGraph RoadGraph::parse(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

RoadGraph RoadGraph::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::GraphInvalid, fmt::format("cannot open graph file {}", path.string()));
  return parse(in);
}

std::string RoadGraph::serialize() const {
  std::string out = "graph v1\n";
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    out += fmt::format("node {} {} {}\n", ids_[i].str(), positions_[i].lat, positions_[i].lon);
  }
  for (const auto& e : edges_) {
    out += fmt::format("edge {} {} {} {}\n", e.from.str(), e.to.str(), e.length_m, e.bidirectional ? 1 : 0);
  }
  return out;
}

}  // namespace campusride::geo
