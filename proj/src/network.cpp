#include "tightdual/network.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace tightdual {

namespace {

// MATPOWER column indices (0-based).
namespace bus_col {
constexpr std::size_t id = 0, pd = 2, qd = 3, gs = 4, bs = 5, vmax = 11, vmin = 12;
constexpr std::size_t count = 13;
}  // namespace bus_col
namespace gen_col {
constexpr std::size_t bus = 0, qmax = 3, qmin = 4, status = 7, pmax = 8, pmin = 9;
constexpr std::size_t count = 10;
}  // namespace gen_col
namespace branch_col {
constexpr std::size_t from = 0, to = 1, r = 2, x = 3, b = 4, rate_a = 5, tap = 8, shift = 9,
                      status = 10;
constexpr std::size_t count = 11;
}  // namespace branch_col

using Matrix = std::vector<std::vector<double>>;

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char c : text) {
    if (c == '\n') in_comment = false;
    if (c == '%') in_comment = true;
    if (!in_comment) out.push_back(c);
  }
  return out;
}

// Position just past "mpc.<field>" followed by optional blanks and '='.
std::optional<std::size_t> find_assignment(const std::string& text, std::string_view field) {
  const std::string key = "mpc." + std::string(field);
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    std::size_t p = pos + key.size();
    while (p < text.size() && (text[p] == ' ' || text[p] == '\t')) ++p;
    if (p < text.size() && text[p] == '=') return p + 1;
    pos += key.size();
  }
  return std::nullopt;
}

double parse_number(std::string_view token, std::string_view where) {
  std::string buf(token);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end == buf.c_str() || *end != '\0') {
    throw ParseError("malformed number '" + buf + "' in " + std::string(where));
  }
  return v;
}

double read_scalar(const std::string& text, std::string_view field) {
  auto p = find_assignment(text, field);
  if (!p) throw ParseError("missing mpc." + std::string(field));
  const auto end = text.find(';', *p);
  if (end == std::string::npos) throw ParseError("unterminated mpc." + std::string(field));
  std::string token = text.substr(*p, end - *p);
  const auto first = token.find_first_not_of(" \t\r\n");
  const auto last = token.find_last_not_of(" \t\r\n");
  if (first == std::string::npos) throw ParseError("empty mpc." + std::string(field));
  return parse_number(token.substr(first, last - first + 1), "mpc." + std::string(field));
}

Matrix read_matrix(const std::string& text, std::string_view field, std::size_t min_cols,
                   bool required = true) {
  const std::string where = "mpc." + std::string(field);
  auto p = find_assignment(text, field);
  if (!p) {
    if (required) throw ParseError("missing " + where);
    return {};
  }
  const auto open = text.find('[', *p);
  const auto close = text.find(']', *p);
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw ParseError("malformed matrix " + where);
  }
  Matrix rows;
  std::vector<double> row;
  std::string token;
  auto flush_token = [&] {
    if (!token.empty()) {
      row.push_back(parse_number(token, where));
      token.clear();
    }
  };
  auto flush_row = [&] {
    flush_token();
    if (row.empty()) return;
    if (row.size() < min_cols) {
      throw ParseError("malformed row " + std::to_string(rows.size() + 1) + " in " + where + ": " +
                       std::to_string(row.size()) + " columns, expected at least " +
                       std::to_string(min_cols));
    }
    rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = open + 1; i < close; ++i) {
    const char c = text[i];
    if (c == ';' || c == '\n') {
      flush_row();
    } else if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
      flush_token();
    } else {
      token.push_back(c);
    }
  }
  flush_row();
  return rows;
}

struct Cost {
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;
};

Cost read_cost(const std::vector<double>& row, std::size_t index) {
  const std::string where = "mpc.gencost row " + std::to_string(index + 1);
  const int model = static_cast<int>(row[0]);
  if (model == 1) throw UnsupportedCostError(where + ": piecewise-linear cost model");
  if (model != 2) throw ParseError(where + ": unknown cost model " + std::to_string(model));
  const auto n = static_cast<std::size_t>(row[3]);
  if (row.size() < 4 + n) throw ParseError(where + ": fewer coefficients than declared");
  // Coefficients are stored highest degree first.
  Cost cost;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t degree = n - 1 - k;
    const double c = row[4 + k];
    if (degree > 2) {
      if (c != 0.0) {
        throw UnsupportedCostError(where + ": polynomial term of degree " +
                                   std::to_string(degree));
      }
    } else if (degree == 2) {
      cost.c2 = c;
    } else if (degree == 1) {
      cost.c1 = c;
    } else {
      cost.c0 = c;
    }
  }
  return cost;
}

}  // namespace

std::optional<std::size_t> Network::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  return std::nullopt;
}

double Network::constant_cost() const {
  double sum = 0.0;
  for (const auto& g : generators) sum += g.c0;
  return sum;
}

double Network::total_demand() const {
  double sum = 0.0;
  for (const auto& b : buses) sum += std::hypot(b.pd, b.qd);
  return sum;
}

double substitute_rate(const Network& net) { return 2.0 * net.total_demand() + 1.0; }

Network parse_matpower(std::string_view raw, std::string name) {
  const std::string text = strip_comments(raw);
  Network net;
  net.name = std::move(name);
  net.base_mva = read_scalar(text, "baseMVA");
  if (!(net.base_mva > 0.0) || !std::isfinite(net.base_mva)) {
    throw ParseError("mpc.baseMVA must be positive");
  }
  const double base = net.base_mva;

  for (const auto& row : read_matrix(text, "bus", bus_col::count)) {
    Bus b;
    b.id = static_cast<int>(row[bus_col::id]);
    b.pd = row[bus_col::pd] / base;
    b.qd = row[bus_col::qd] / base;
    b.gs = row[bus_col::gs] / base;
    b.bs = row[bus_col::bs] / base;
    b.vmax = row[bus_col::vmax];
    b.vmin = row[bus_col::vmin];
    net.buses.push_back(b);
  }

  const Matrix gen = read_matrix(text, "gen", gen_col::count);
  const Matrix gencost = read_matrix(text, "gencost", 4);
  if (gencost.size() < gen.size()) {
    throw ParseError("mpc.gencost has fewer rows than mpc.gen");
  }
  for (std::size_t k = 0; k < gen.size(); ++k) {
    const auto& row = gen[k];
    // Costs are validated even for generators that are out of service.
    const Cost cost = read_cost(gencost[k], k);
    if (row[gen_col::status] <= 0.0) continue;
    Generator g;
    g.bus = static_cast<int>(row[gen_col::bus]);
    g.pmin = row[gen_col::pmin] / base;
    g.pmax = row[gen_col::pmax] / base;
    g.qmin = row[gen_col::qmin] / base;
    g.qmax = row[gen_col::qmax] / base;
    g.c2 = cost.c2 * base * base;
    g.c1 = cost.c1 * base;
    g.c0 = cost.c0;
    net.generators.push_back(g);
  }

  for (const auto& row : read_matrix(text, "branch", branch_col::count)) {
    if (row[branch_col::status] <= 0.0) continue;
    Branch br;
    br.from = static_cast<int>(row[branch_col::from]);
    br.to = static_cast<int>(row[branch_col::to]);
    br.r = row[branch_col::r];
    br.x = row[branch_col::x];
    br.b_charge = row[branch_col::b];
    br.tap = row[branch_col::tap] == 0.0 ? 1.0 : row[branch_col::tap];
    br.shift = row[branch_col::shift] * std::numbers::pi / 180.0;
    br.rate_a = row[branch_col::rate_a] / base;
    net.branches.push_back(br);
  }

  const double substitute = substitute_rate(net);
  for (auto& br : net.branches) {
    if (br.rate_a <= 0.0) {
      br.rate_a = substitute;
      br.rate_substituted = true;
    }
  }
  return net;
}

Network parse_matpower(std::istream& in, std::string name) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matpower(std::string_view(buf.str()), std::move(name));
}

Network load_matpower(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file " + path);
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name.erase(0, slash + 1);
  if (name.size() > 2 && name.ends_with(".m")) name.resize(name.size() - 2);
  return parse_matpower(in, std::move(name));
}

std::vector<std::string> validate(const Network& net) {
  std::vector<std::string> findings;
  std::unordered_map<int, std::size_t> index;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    const auto& b = net.buses[i];
    if (!index.emplace(b.id, i).second) {
      findings.push_back("duplicate bus id " + std::to_string(b.id));
    }
    if (!(b.vmin > 0.0) || b.vmin > b.vmax) {
      findings.push_back("bus " + std::to_string(b.id) + ": voltage bounds not 0 < vmin <= vmax");
    } else if (b.vmin == b.vmax) {
      findings.push_back("bus " + std::to_string(b.id) + ": vmin equals vmax");
    }
    if (!std::isfinite(b.pd) || !std::isfinite(b.qd)) {
      findings.push_back("bus " + std::to_string(b.id) + ": non-finite demand");
    }
  }
  if (net.generators.empty()) findings.push_back("no in-service generator");

  std::vector<int> degree(net.buses.size(), 0);
  for (std::size_t l = 0; l < net.branches.size(); ++l) {
    const auto& br = net.branches[l];
    const std::string tag = "branch " + std::to_string(l + 1) + " (" + std::to_string(br.from) +
                            "-" + std::to_string(br.to) + ")";
    auto f = index.find(br.from);
    auto t = index.find(br.to);
    if (f == index.end() || t == index.end()) {
      findings.push_back(tag + ": endpoint refers to an undefined bus");
    } else {
      ++degree[f->second];
      ++degree[t->second];
    }
    if (br.r * br.r + br.x * br.x <= 0.0) findings.push_back(tag + ": zero series impedance");
    if (br.tap <= 0.0) findings.push_back(tag + ": nonpositive tap ratio");
    if (br.rate_substituted) {
      findings.push_back(tag + ": rate_a missing, limit substituted (" +
                         std::to_string(br.rate_a) + " p.u.)");
    } else if (br.rate_a <= 0.0) {
      findings.push_back(tag + ": nonpositive rate_a");
    }
  }
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    if (degree[i] == 0 && net.buses.size() > 1) {
      findings.push_back("bus " + std::to_string(net.buses[i].id) + ": isolated");
    }
  }
  for (std::size_t k = 0; k < net.generators.size(); ++k) {
    const auto& g = net.generators[k];
    const std::string tag = "generator " + std::to_string(k + 1);
    if (!index.contains(g.bus)) findings.push_back(tag + ": bus undefined");
    if (g.pmin > g.pmax || g.qmin > g.qmax) findings.push_back(tag + ": inverted output bounds");
    if (g.c2 < 0.0) findings.push_back(tag + ": negative quadratic cost");
  }
  return findings;
}

void require_buildable(const Network& net) {
  if (net.generators.empty()) throw std::invalid_argument("network has no generator");
  for (const auto& b : net.buses) {
    if (!(b.vmin > 0.0) || b.vmin > b.vmax) {
      throw std::invalid_argument("bus " + std::to_string(b.id) + ": invalid voltage bounds");
    }
  }
  for (const auto& br : net.branches) {
    if (!net.bus_index(br.from) || !net.bus_index(br.to)) {
      throw std::invalid_argument("branch endpoint refers to an undefined bus");
    }
    if (!(br.rate_a > 0.0)) throw std::invalid_argument("branch with nonpositive rate_a");
  }
  for (const auto& g : net.generators) {
    if (!net.bus_index(g.bus)) throw std::invalid_argument("generator bus undefined");
    if (g.pmin > g.pmax || g.qmin > g.qmax) {
      throw std::invalid_argument("generator with inverted output bounds");
    }
    if (g.c2 < 0.0) throw std::invalid_argument("generator with negative quadratic cost");
  }
}

void to_json(nlohmann::json& j, const Bus& b) {
  j = {{"id", b.id}, {"vmin", b.vmin}, {"vmax", b.vmax}, {"pd", b.pd},
       {"qd", b.qd}, {"gs", b.gs},     {"bs", b.bs}};
}

void from_json(const nlohmann::json& j, Bus& b) {
  j.at("id").get_to(b.id);
  j.at("vmin").get_to(b.vmin);
  j.at("vmax").get_to(b.vmax);
  j.at("pd").get_to(b.pd);
  j.at("qd").get_to(b.qd);
  j.at("gs").get_to(b.gs);
  j.at("bs").get_to(b.bs);
}

void to_json(nlohmann::json& j, const Generator& g) {
  j = {{"bus", g.bus},   {"pmin", g.pmin}, {"pmax", g.pmax}, {"qmin", g.qmin},
       {"qmax", g.qmax}, {"c2", g.c2},     {"c1", g.c1},     {"c0", g.c0}};
}

void from_json(const nlohmann::json& j, Generator& g) {
  j.at("bus").get_to(g.bus);
  j.at("pmin").get_to(g.pmin);
  j.at("pmax").get_to(g.pmax);
  j.at("qmin").get_to(g.qmin);
  j.at("qmax").get_to(g.qmax);
  j.at("c2").get_to(g.c2);
  j.at("c1").get_to(g.c1);
  j.at("c0").get_to(g.c0);
}

void to_json(nlohmann::json& j, const Branch& b) {
  j = {{"from", b.from},   {"to", b.to},         {"r", b.r},
       {"x", b.x},         {"b_charge", b.b_charge}, {"tap", b.tap},
       {"shift", b.shift}, {"rate_a", b.rate_a}, {"rate_substituted", b.rate_substituted}};
}

void from_json(const nlohmann::json& j, Branch& b) {
  j.at("from").get_to(b.from);
  j.at("to").get_to(b.to);
  j.at("r").get_to(b.r);
  j.at("x").get_to(b.x);
  j.at("b_charge").get_to(b.b_charge);
  j.at("tap").get_to(b.tap);
  j.at("shift").get_to(b.shift);
  j.at("rate_a").get_to(b.rate_a);
  j.at("rate_substituted").get_to(b.rate_substituted);
}

void to_json(nlohmann::json& j, const Network& n) {
  j = {{"name", n.name},
       {"base_mva", n.base_mva},
       {"buses", n.buses},
       {"generators", n.generators},
       {"branches", n.branches}};
}

void from_json(const nlohmann::json& j, Network& n) {
  j.at("name").get_to(n.name);
  j.at("base_mva").get_to(n.base_mva);
  j.at("buses").get_to(n.buses);
  j.at("generators").get_to(n.generators);
  j.at("branches").get_to(n.branches);
}

}  // namespace tightdual
