#include "vulnprop/topology.hpp"

#include <charconv>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vulnprop/error.hpp"

namespace vulnprop {
namespace {

using Link = std::pair<std::size_t, std::size_t>;

Network assemble(const std::vector<std::string>& labels, const std::vector<Link>& links,
                 double v, double alpha) {
  std::vector<Node> nodes;
  nodes.reserve(labels.size());
  for (const auto& label : labels) nodes.push_back({label, v});
  std::vector<Edge> edges;
  edges.reserve(2 * links.size());
  for (auto [a, b] : links) {
    edges.push_back({a, b, alpha});
    edges.push_back({b, a, alpha});
  }
  return build_network(std::move(nodes), edges);
}

std::vector<std::string> numbered(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("a_" + std::to_string(i));
  return labels;
}

Network utility_cc(double v, double alpha) {
  std::vector<std::string> labels = {"Firewall", "Router", "Switch",
                                     "EMS_Server", "Historian", "HMI"};
  std::vector<Link> links = {{0, 1}, {1, 2}, {2, 3}, {2, 4}, {2, 5}};
  for (int s = 1; s <= 19; ++s) {
    labels.push_back((s < 10 ? "Substation_0" : "Substation_") + std::to_string(s));
    links.push_back({1, labels.size() - 1});
  }
  return assemble(labels, links, v, alpha);
}

Network substation(double v, double alpha) {
  // a_0..a_5 first so that their indices match their names.
  const std::vector<std::string> labels = {
      "a_0_Firewall",        "a_1_Router",        "a_2_Station_Switch", "a_3_Relay_Controller",
      "a_4_RTU",             "a_5_Bay_Controller", "Utility_Link",      "Operator_Workstation",
      "DNP3_Outstation",     "Relay_1",           "Relay_2",            "Relay_3",
      "Circuit_Breaker",     "Current_Transformer"};
  const std::vector<Link> links = {
      {0, 6}, {0, 1},                   // station level
      {1, 7}, {1, 2},
      {2, 8}, {2, 3}, {2, 4},           // bay level
      {3, 9}, {3, 10}, {3, 11},
      {4, 5}, {5, 12}, {5, 13}};        // process level
  return assemble(labels, links, v, alpha);
}

}  // namespace

TopologySpec parse_topology(std::string_view text) {
  auto sized = [&](std::string_view prefix, TopologyKind kind) -> std::optional<TopologySpec> {
    if (text.substr(0, prefix.size()) != prefix) return std::nullopt;
    auto digits = text.substr(prefix.size());
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
      throw Error(ErrorCode::ParseError, "bad node count in '" + std::string(text) + "'");
    }
    return TopologySpec{kind, n};
  };
  if (text == "dense5") return {TopologyKind::Dense5, 5};
  if (text == "sparse5") return {TopologyKind::Sparse5, 5};
  if (text == "utility") return {TopologyKind::UtilityCC, 0};
  if (text == "substation") return {TopologyKind::Substation, 0};
  if (auto s = sized("star:", TopologyKind::Star)) return *s;
  if (auto s = sized("ring:", TopologyKind::Ring)) return *s;
  throw Error(ErrorCode::ParseError, "unknown topology '" + std::string(text) + "'");
}

std::string to_string(const TopologySpec& spec) {
  switch (spec.kind) {
    case TopologyKind::Dense5: return "dense5";
    case TopologyKind::Sparse5: return "sparse5";
    case TopologyKind::Star: return "star:" + std::to_string(spec.n);
    case TopologyKind::Ring: return "ring:" + std::to_string(spec.n);
    case TopologyKind::UtilityCC: return "utility";
    case TopologyKind::Substation: return "substation";
  }
  return "unknown";
}

Network generate_topology(const TopologySpec& spec, double v, double alpha) {
  check_probability(v, "v_default");
  check_probability(alpha, "alpha_default");

  switch (spec.kind) {
    case TopologyKind::Dense5: {
      std::vector<Link> links;
      for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i + 1; j < 5; ++j) links.push_back({i, j});
      return assemble(numbered(5), links, v, alpha);
    }
    case TopologyKind::Sparse5:
      return assemble(numbered(5), {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, v, alpha);
    case TopologyKind::Star: {
      if (spec.n < 1) throw Error(ErrorCode::InvalidArgument, "star needs n >= 1");
      std::vector<Link> links;
      for (std::size_t i = 1; i < spec.n; ++i) links.push_back({0, i});
      return assemble(numbered(spec.n), links, v, alpha);
    }
    case TopologyKind::Ring: {
      if (spec.n < 3) throw Error(ErrorCode::InvalidArgument, "ring needs n >= 3");
      std::vector<Link> links;
      for (std::size_t i = 0; i < spec.n; ++i) links.push_back({i, (i + 1) % spec.n});
      return assemble(numbered(spec.n), links, v, alpha);
    }
    case TopologyKind::UtilityCC: return utility_cc(v, alpha);
    case TopologyKind::Substation: return substation(v, alpha);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown topology kind");
}

}  // namespace vulnprop
