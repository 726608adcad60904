#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "vulnprop/network.hpp"
#include "vulnprop/sweep.hpp"

namespace vulnprop {

inline constexpr int kNetworkFileVersion = 1;

struct NetworkDocument {
  Network network;
  DefenseParams params;
};

/// Parses the JSON network document (see docs/network-format.md). Nodes given
/// `cvss_exploitability` scores get v = mean(scores) / 10 clamped to [0, 1];
/// nodes with neither field get v = 0.5. Throws ParseError, SchemaVersion or
/// any build_network error.
NetworkDocument parse_network_file(std::string_view text);
std::string serialize_network_file(const Network& net, const DefenseParams& params);

NetworkDocument read_network_file(const std::filesystem::path& path);
void write_network_file(const std::filesystem::path& path, const Network& net,
                        const DefenseParams& params);

double cvss_to_vulnerability(const std::vector<double>& exploitability_scores);

std::string serialize_sweep_spec(const SweepSpec& spec);
SweepSpec parse_sweep_spec(std::string_view text);

/// "%.9g"
std::string format_number(double x);

/// Header "param_value,z_0,...,z_{n-1},objective,spent,converged", one line
/// per row. Failed rows carry nan values and converged = 0.
void write_result_csv(std::ostream& out, const SweepResult& result);

/// Header "index,label,default,equilibrium".
void write_state_csv(std::ostream& out, const Network& net, const VulnState& equilibrium);

using CsvTable = std::vector<std::vector<std::string>>;

/// Minimal RFC-4180 reader: quoted fields, doubled quotes, LF or CRLF.
/// Throws ParseError on ragged rows or an unterminated quote.
CsvTable read_csv(std::istream& in);

/// Reads a ResultCSV back into rows. Throws ParseError on a schema mismatch.
SweepResult read_result_csv(std::istream& in);

}  // namespace vulnprop
