#include "vulnprop/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vulnprop/error.hpp"

namespace vulnprop {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void parse_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ParseError, where + ": " + what);
}

void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      parse_error(where, "unknown field '" + key + "'");
    }
  }
}

double number_field(const Json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number()) parse_error(where + "." + key, "expected a number");
  return v.get<double>();
}

Json require_object(const Json& doc, const char* key, const std::string& where) {
  if (!doc.contains(key)) parse_error(where, std::string("missing field '") + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_object()) parse_error(where + "." + key, "expected an object");
  return v;
}

Json require_array(const Json& doc, const char* key, const std::string& where) {
  if (!doc.contains(key)) parse_error(where, std::string("missing field '") + key + "'");
  const auto& v = doc.at(key);
  if (!v.is_array()) parse_error(where + "." + key, "expected an array");
  return v;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    parse_error("document", e.what());
  }
}

void check_version(const Json& doc) {
  if (!doc.is_object()) parse_error("document", "expected a JSON object");
  if (!doc.contains("version")) parse_error("document", "missing field 'version'");
  const auto& v = doc.at("version");
  if (!v.is_number_integer() || v.get<long long>() != kNetworkFileVersion) {
    throw Error(ErrorCode::SchemaVersion,
                "unsupported version " + v.dump() + ", expected " +
                    std::to_string(kNetworkFileVersion));
  }
}

std::size_t node_ref(const Json& ref, const std::vector<Node>& nodes, const std::string& where) {
  if (ref.is_number_integer()) {
    const auto idx = ref.get<long long>();
    if (idx < 0 || static_cast<std::size_t>(idx) >= nodes.size()) {
      throw Error(ErrorCode::DanglingIndex, where + " = " + std::to_string(idx));
    }
    return static_cast<std::size_t>(idx);
  }
  if (ref.is_string()) {
    const auto label = ref.get<std::string>();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].label == label) return i;
    }
    throw Error(ErrorCode::DanglingIndex, where + " = '" + label + "'");
  }
  parse_error(where, "expected a node index or label");
}

Network network_from_json(const Json& doc) {
  std::vector<Node> nodes;
  const auto node_list = require_array(doc, "nodes", "document");
  for (std::size_t i = 0; i < node_list.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const auto& obj = node_list[i];
    if (!obj.is_object()) parse_error(where, "expected an object");
    reject_unknown_keys(obj, {"label", "v", "cvss_exploitability"}, where);

    Node node;
    node.label = "a_" + std::to_string(i);
    if (obj.contains("label")) {
      if (!obj["label"].is_string()) parse_error(where + ".label", "expected a string");
      node.label = obj["label"].get<std::string>();
    }
    const bool has_v = obj.contains("v");
    const bool has_cvss = obj.contains("cvss_exploitability");
    if (has_v && has_cvss) parse_error(where, "give either 'v' or 'cvss_exploitability', not both");
    if (has_v) {
      node.default_vuln = number_field(obj, "v", where);
    } else if (has_cvss) {
      const auto& arr = obj["cvss_exploitability"];
      if (!arr.is_array() || arr.empty()) {
        parse_error(where + ".cvss_exploitability", "expected a non-empty array");
      }
      std::vector<double> scores;
      for (const auto& s : arr) {
        if (!s.is_number()) parse_error(where + ".cvss_exploitability", "expected numbers");
        scores.push_back(s.get<double>());
      }
      node.default_vuln = cvss_to_vulnerability(scores);
    }
    nodes.push_back(std::move(node));
  }

  std::vector<Edge> edges;
  if (doc.contains("edges")) {
    const auto edge_list = require_array(doc, "edges", "document");
    for (std::size_t k = 0; k < edge_list.size(); ++k) {
      const std::string where = "edges[" + std::to_string(k) + "]";
      const auto& obj = edge_list[k];
      if (!obj.is_object()) parse_error(where, "expected an object");
      reject_unknown_keys(obj, {"from", "to", "alpha"}, where);
      for (const char* key : {"from", "to", "alpha"}) {
        if (!obj.contains(key)) parse_error(where, std::string("missing field '") + key + "'");
      }
      edges.push_back({node_ref(obj["from"], nodes, where + ".from"),
                       node_ref(obj["to"], nodes, where + ".to"),
                       number_field(obj, "alpha", where)});
    }
  }
  return build_network(std::move(nodes), edges);
}

Json network_to_json(const Network& net) {
  Json nodes = Json::array();
  for (const auto& n : net.nodes()) nodes.push_back({{"label", n.label}, {"v", n.default_vuln}});
  Json edges = Json::array();
  for (const auto& e : net.edges()) edges.push_back({{"from", e.from}, {"to", e.to}, {"alpha", e.alpha}});
  return {{"nodes", nodes}, {"edges", edges}};
}

DefenseParams params_from_json(const Json& obj, const std::string& where) {
  reject_unknown_keys(obj, {"gamma", "theta", "W"}, where);
  DefenseParams p;
  if (obj.contains("gamma")) p.gamma = number_field(obj, "gamma", where);
  if (obj.contains("theta")) p.theta = number_field(obj, "theta", where);
  if (obj.contains("W")) p.budget = number_field(obj, "W", where);
  p.validate();
  return p;
}

Json params_to_json(const DefenseParams& p) {
  return {{"gamma", p.gamma}, {"theta", p.theta}, {"W", p.budget}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) parse_error(where, "bad number '" + s + "'");
  return v;
}

}  // namespace

double cvss_to_vulnerability(const std::vector<double>& exploitability_scores) {
  if (exploitability_scores.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no exploitability scores");
  }
  for (double s : exploitability_scores) {
    if (!(s >= 0.0 && s <= 10.0)) {
      throw Error(ErrorCode::OutOfRange, "exploitability subscore " + std::to_string(s) +
                                             " outside [0, 10]");
    }
  }
  const double mean = std::accumulate(exploitability_scores.begin(), exploitability_scores.end(), 0.0) /
                      static_cast<double>(exploitability_scores.size());
  return std::clamp(mean / 10.0, 0.0, 1.0);
}

NetworkDocument parse_network_file(std::string_view text) {
  const Json doc = parse_json(text);
  check_version(doc);
  reject_unknown_keys(doc, {"version", "description", "nodes", "edges", "params"}, "document");
  NetworkDocument out;
  out.network = network_from_json(doc);
  if (doc.contains("params")) out.params = params_from_json(require_object(doc, "params", "document"), "params");
  return out;
}

std::string serialize_network_file(const Network& net, const DefenseParams& params) {
  Json doc = {{"version", kNetworkFileVersion}};
  const Json body = network_to_json(net);
  doc["nodes"] = body["nodes"];
  doc["edges"] = body["edges"];
  doc["params"] = params_to_json(params);
  return doc.dump(2) + "\n";
}

NetworkDocument read_network_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network_file(buf.str());
}

void write_network_file(const std::filesystem::path& path, const Network& net,
                        const DefenseParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  out << serialize_network_file(net, params);
}

std::string serialize_sweep_spec(const SweepSpec& spec) {
  const Json net = network_to_json(spec.base_net);
  const auto& c = spec.opt_cfg;
  Json doc = {
      {"version", kNetworkFileVersion},
      {"target", to_string(spec.target)},
      {"grid", spec.grid},
      {"nodes", net["nodes"]},
      {"edges", net["edges"]},
      {"params", params_to_json(spec.base_params)},
      {"optimizer",
       {{"model", c.model == Model::Simple ? "simple" : "twostage"},
        {"mode", c.mode == SolveMode::Exact ? "exact" : "linearized"},
        {"restarts", c.restarts},
        {"step_tol", c.step_tol},
        {"obj_tol", c.obj_tol},
        {"max_outer_iter", c.max_outer_iter},
        {"seed", c.seed}}},
  };
  return doc.dump(2) + "\n";
}

SweepSpec parse_sweep_spec(std::string_view text) {
  const Json doc = parse_json(text);
  check_version(doc);
  reject_unknown_keys(doc, {"version", "target", "grid", "nodes", "edges", "params", "optimizer"},
                      "document");
  SweepSpec spec;
  if (!doc.contains("target") || !doc["target"].is_string()) {
    parse_error("document.target", "expected a string");
  }
  spec.target = parse_sweep_target(doc["target"].get<std::string>());
  for (const auto& g : require_array(doc, "grid", "document")) {
    if (!g.is_number()) parse_error("document.grid", "expected numbers");
    spec.grid.push_back(g.get<double>());
  }
  spec.base_net = network_from_json(doc);
  if (doc.contains("params")) spec.base_params = params_from_json(require_object(doc, "params", "document"), "params");
  if (doc.contains("optimizer")) {
    const Json opt = require_object(doc, "optimizer", "document");
    reject_unknown_keys(opt, {"model", "mode", "restarts", "step_tol", "obj_tol", "max_outer_iter", "seed"},
                        "optimizer");
    auto& c = spec.opt_cfg;
    try {
      if (opt.contains("model")) {
        const auto m = opt["model"].get<std::string>();
        if (m != "simple" && m != "twostage") parse_error("optimizer.model", "unknown '" + m + "'");
        c.model = m == "simple" ? Model::Simple : Model::TwoStage;
      }
      if (opt.contains("mode")) {
        const auto m = opt["mode"].get<std::string>();
        if (m != "exact" && m != "linearized") parse_error("optimizer.mode", "unknown '" + m + "'");
        c.mode = m == "exact" ? SolveMode::Exact : SolveMode::Linearized;
      }
      if (opt.contains("restarts")) c.restarts = opt["restarts"].get<int>();
      if (opt.contains("step_tol")) c.step_tol = opt["step_tol"].get<double>();
      if (opt.contains("obj_tol")) c.obj_tol = opt["obj_tol"].get<double>();
      if (opt.contains("max_outer_iter")) c.max_outer_iter = opt["max_outer_iter"].get<int>();
      if (opt.contains("seed")) c.seed = opt["seed"].get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      parse_error("optimizer", e.what());
    }
  }
  spec.validate();
  return spec;
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_result_csv(std::ostream& out, const SweepResult& result) {
  out << "param_value";
  for (std::size_t i = 0; i < result.node_count; ++i) out << ",z_" << i;
  out << ",objective,spent,converged\n";
  for (const auto& row : result.rows) {
    out << format_number(row.param_value);
    for (double z : row.z) out << ',' << format_number(z);
    out << ',' << format_number(row.objective) << ',' << format_number(row.spent) << ','
        << (row.converged ? 1 : 0) << '\n';
  }
}

void write_state_csv(std::ostream& out, const Network& net, const VulnState& equilibrium) {
  out << "index,label,default,equilibrium\n";
  for (std::size_t i = 0; i < net.size(); ++i) {
    out << i << ',' << csv_field(net.node(i).label) << ',' << format_number(net.node(i).default_vuln)
        << ',' << format_number(equilibrium.values.at(i)) << '\n';
  }
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, in_row = false;
  char c;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    if (!table.empty() && row.size() != table.front().size()) {
      parse_error("csv line " + std::to_string(table.size() + 1), "ragged row");
    }
    table.push_back(std::move(row));
    row.clear();
    in_row = false;
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    in_row = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      end_row();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) parse_error("csv", "unterminated quoted field");
  if (in_row) end_row();
  return table;
}

SweepResult read_result_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  if (table.empty()) parse_error("result csv", "empty input");
  const auto& header = table.front();
  if (header.size() < 4 || header.front() != "param_value" || header[header.size() - 3] != "objective" ||
      header[header.size() - 2] != "spent" || header.back() != "converged") {
    parse_error("result csv", "unexpected header");
  }
  SweepResult result;
  result.node_count = header.size() - 4;
  for (std::size_t i = 0; i < result.node_count; ++i) {
    if (header[1 + i] != "z_" + std::to_string(i)) parse_error("result csv", "unexpected header");
  }
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& cells = table[r];
    const std::string where = "result csv line " + std::to_string(r + 1);
    SweepRow row;
    row.param_value = parse_double(cells[0], where);
    for (std::size_t i = 0; i < result.node_count; ++i) row.z.push_back(parse_double(cells[1 + i], where));
    row.objective = parse_double(cells[result.node_count + 1], where);
    row.spent = parse_double(cells[result.node_count + 2], where);
    const auto& conv = cells.back();
    if (conv != "0" && conv != "1") parse_error(where, "converged must be 0 or 1");
    row.converged = conv == "1";
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace vulnprop
