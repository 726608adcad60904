#include "vulnprop/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_set>

#include "vulnprop/error.hpp"

namespace vulnprop {

void check_probability(double p, std::string_view what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::OutOfRange,
                std::string(what) + " = " + std::to_string(p) + " outside [0, 1]");
  }
}

std::optional<double> Network::alpha(std::size_t from, std::size_t to) const {
  const auto& in = in_.at(to);
  auto it = std::lower_bound(in.begin(), in.end(), from,
                             [](const InEdge& e, std::size_t s) { return e.source < s; });
  if (it != in.end() && it->source == from) return it->alpha;
  return std::nullopt;
}

std::vector<Edge> Network::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (std::size_t to = 0; to < in_.size(); ++to) {
    for (const auto& e : in_[to]) out.push_back({e.source, to, e.alpha});
  }
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  return out;
}

std::size_t Network::edge_count() const noexcept {
  std::size_t count = 0;
  for (const auto& in : in_) count += in.size();
  return count;
}

std::vector<double> Network::default_vulns() const {
  std::vector<double> v;
  v.reserve(nodes_.size());
  for (const auto& n : nodes_) v.push_back(n.default_vuln);
  return v;
}

std::optional<std::size_t> Network::find(std::string_view label) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].label == label) return i;
  }
  return std::nullopt;
}

Network Network::with_default_vuln(std::size_t i, double v) const {
  if (i >= size()) throw Error(ErrorCode::DanglingIndex, "node " + std::to_string(i));
  check_probability(v, "v");
  Network copy = *this;
  copy.nodes_[i].default_vuln = v;
  return copy;
}

Network Network::with_alpha(std::size_t from, std::size_t to, double a) const {
  if (from >= size() || to >= size()) {
    throw Error(ErrorCode::DanglingIndex,
                "edge " + std::to_string(from) + "->" + std::to_string(to));
  }
  check_probability(a, "alpha");
  Network copy = *this;
  for (auto& e : copy.in_[to]) {
    if (e.source == from) {
      e.alpha = a;
      return copy;
    }
  }
  throw Error(ErrorCode::DanglingIndex,
              "no edge " + std::to_string(from) + "->" + std::to_string(to));
}

Network Network::with_all_alpha(double a) const {
  check_probability(a, "alpha");
  Network copy = *this;
  for (auto& in : copy.in_) {
    for (auto& e : in) e.alpha = a;
  }
  return copy;
}

Network build_network(std::vector<Node> nodes, std::span<const Edge> edges) {
  std::unordered_set<std::string> labels;
  for (const auto& n : nodes) {
    check_probability(n.default_vuln, "v of node '" + n.label + "'");
    if (!labels.insert(n.label).second) {
      throw Error(ErrorCode::DuplicateLabel, "label '" + n.label + "'");
    }
  }

  const std::size_t n = nodes.size();
  std::set<std::pair<std::size_t, std::size_t>> seen;
  Network net;
  net.in_.resize(n);
  for (const auto& e : edges) {
    const std::string name = std::to_string(e.from) + "->" + std::to_string(e.to);
    if (e.from >= n || e.to >= n) throw Error(ErrorCode::DanglingIndex, "edge " + name);
    if (e.from == e.to) throw Error(ErrorCode::SelfLoop, "edge " + name);
    check_probability(e.alpha, "alpha of edge " + name);
    if (!seen.insert({e.from, e.to}).second) {
      throw Error(ErrorCode::DuplicateEdge, "edge " + name);
    }
    net.in_[e.to].push_back({e.from, e.alpha});
  }
  for (auto& in : net.in_) {
    std::sort(in.begin(), in.end(),
              [](const InEdge& a, const InEdge& b) { return a.source < b.source; });
  }
  net.nodes_ = std::move(nodes);
  return net;
}

std::vector<std::size_t> neighbors_in(const Network& net, std::size_t i) {
  std::vector<std::size_t> out;
  for (const auto& e : net.in_edges(i)) out.push_back(e.source);
  return out;
}

void DefenseParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::OutOfRange, "gamma must be > 0");
  }
  if (!(theta >= 1.0) || !std::isfinite(theta)) {
    throw Error(ErrorCode::OutOfRange, "theta must be >= 1");
  }
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw Error(ErrorCode::OutOfRange, "budget W must be >= 0");
  }
}

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::Default: return "default";
    case Stage::Propagated: return "propagated";
    case Stage::Invested: return "invested";
    case Stage::Equilibrium: return "equilibrium";
  }
  return "unknown";
}

void VulnState::validate(std::size_t n) const {
  if (values.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "state has " + std::to_string(values.size()) +
                                                " values, network has " + std::to_string(n));
  }
  for (double v : values) check_probability(v, "state value");
}

VulnState default_state(const Network& net) { return {Stage::Default, net.default_vulns()}; }

}  // namespace vulnprop
