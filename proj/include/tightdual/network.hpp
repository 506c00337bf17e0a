#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace tightdual {

// All electrical quantities are per-unit on Network::base_mva, angles in
// radians, and cost coefficients are scaled so that a generator output in
// p.u. yields a cost in $/h.

struct Bus {
  int id = 0;  // external label from the case file
  double vmin = 0.9;
  double vmax = 1.1;
  double pd = 0.0;
  double qd = 0.0;
  double gs = 0.0;
  double bs = 0.0;

  bool operator==(const Bus&) const = default;
};

struct Generator {
  int bus = 0;  // external bus label
  double pmin = 0.0;
  double pmax = 0.0;
  double qmin = 0.0;
  double qmax = 0.0;
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  bool operator==(const Generator&) const = default;
};

struct Branch {
  int from = 0;  // external bus labels
  int to = 0;
  double r = 0.0;
  double x = 0.0;
  double b_charge = 0.0;
  double tap = 1.0;
  double shift = 0.0;
  double rate_a = 0.0;
  // rate_a was zero (unlimited) in the case file and has been replaced by
  // the substitute limit.
  bool rate_substituted = false;

  bool operator==(const Branch&) const = default;
};

struct Network {
  std::string name;
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Branch> branches;

  bool operator==(const Network&) const = default;

  /// Dense position of the bus with external label `id`, if any.
  std::optional<std::size_t> bus_index(int id) const;

  /// Sum of the c0 terms; added to reported objectives outside the model.
  double constant_cost() const;

  /// Σ |S^d_i| over all buses, in p.u.
  double total_demand() const;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedCostError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Substitute apparent-power limit for branches with rate_a = 0.
double substitute_rate(const Network& net);

/// Parses a MATPOWER case (version 2). Out-of-service generators and
/// branches are dropped; zero ratings get the substitute limit.
Network parse_matpower(std::istream& in, std::string name = {});
Network parse_matpower(std::string_view text, std::string name = {});
Network load_matpower(const std::string& path);

/// Human-readable findings for a parsed network; empty when well posed.
std::vector<std::string> validate(const Network& net);

/// Throws std::invalid_argument carrying the first finding that makes the
/// network unusable for model construction (dangling references, no
/// generators, inverted bounds).
void require_buildable(const Network& net);

void to_json(nlohmann::json& j, const Bus& b);
void from_json(const nlohmann::json& j, Bus& b);
void to_json(nlohmann::json& j, const Generator& g);
void from_json(const nlohmann::json& j, Generator& g);
void to_json(nlohmann::json& j, const Branch& b);
void from_json(const nlohmann::json& j, Branch& b);
void to_json(nlohmann::json& j, const Network& n);
void from_json(const nlohmann::json& j, Network& n);

}  // namespace tightdual
