#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vulnprop {

/// A communication device. `default_vuln` is the exploitation probability of
/// the node when isolated.
struct Node {
  std::string label;
  double default_vuln = 0.5;

  bool operator==(const Node&) const = default;
};

/// Directed propagation link `from -> to` with propagation factor alpha.
/// alpha = 0 means full propagation, alpha = 1 means none.
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double alpha = 1.0;

  bool operator==(const Edge&) const = default;
};

struct InEdge {
  std::size_t source = 0;
  double alpha = 1.0;

  bool operator==(const InEdge&) const = default;
};

/// Immutable directed network. Node indices are dense 0..n-1; alpha is stored
/// per direction and a missing edge is inert (behaves as alpha = 1).
class Network {
 public:
  Network() = default;

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }

  /// Incoming edges of node i, ascending by source.
  std::span<const InEdge> in_edges(std::size_t i) const { return in_.at(i); }

  std::optional<double> alpha(std::size_t from, std::size_t to) const;
  double effective_alpha(std::size_t from, std::size_t to) const {
    return alpha(from, to).value_or(1.0);
  }

  /// All edges, ordered by (from, to).
  std::vector<Edge> edges() const;
  std::size_t edge_count() const noexcept;

  std::vector<double> default_vulns() const;
  std::optional<std::size_t> find(std::string_view label) const;

  // Copy-and-modify helpers; the receiver is never changed.
  Network with_default_vuln(std::size_t i, double v) const;
  Network with_alpha(std::size_t from, std::size_t to, double alpha) const;
  Network with_all_alpha(double alpha) const;

  bool operator==(const Network&) const = default;

 private:
  friend Network build_network(std::vector<Node> nodes, std::span<const Edge> edges);

  std::vector<Node> nodes_;
  std::vector<std::vector<InEdge>> in_;
};

/// Validates and assembles a network. Reverse edges are never created
/// implicitly. Throws Error with OutOfRange, SelfLoop, DuplicateEdge,
/// DanglingIndex or DuplicateLabel.
Network build_network(std::vector<Node> nodes, std::span<const Edge> edges);

/// Sources j of every edge (j, i), ascending.
std::vector<std::size_t> neighbors_in(const Network& net, std::size_t i);

/// Global investment-effectiveness constants and budget.
struct DefenseParams {
  double gamma = 0.7;
  double theta = 2.0;
  double budget = 1.0;

  void validate() const;
  bool operator==(const DefenseParams&) const = default;
};

enum class Stage { Default, Propagated, Invested, Equilibrium };

std::string_view to_string(Stage stage) noexcept;

struct VulnState {
  Stage stage = Stage::Default;
  std::vector<double> values;

  /// Checks length against `n` and every value against [0, 1].
  void validate(std::size_t n) const;
  bool operator==(const VulnState&) const = default;
};

VulnState default_state(const Network& net);

/// Throws OutOfRange unless 0 <= p <= 1 (NaN rejected).
void check_probability(double p, std::string_view what);

}  // namespace vulnprop
