#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "errors.hpp"

namespace bh {

enum class Backend { SpectralTorus, SquareTiledGrid };

inline std::string to_string(Backend b) {
  return b == Backend::SpectralTorus ? "spectral" : "grid";
}

enum class Side { Left, Right, Bottom, Top };

inline char side_letter(Side s) {
  switch (s) {
    case Side::Left: return 'L';
    case Side::Right: return 'R';
    case Side::Bottom: return 'B';
    case Side::Top: return 'T';
  }
  return '?';
}

struct EdgeRef {
  int square = 0;
  Side side = Side::Left;
  auto key() const { return std::make_tuple(square, static_cast<int>(side)); }
  bool operator<(const EdgeRef& o) const { return key() < o.key(); }
  bool operator==(const EdgeRef& o) const { return key() == o.key(); }
};

struct EdgeGluing {
  EdgeRef from;  // a Right or Top side
  EdgeRef to;    // the matching Left or Bottom side
};

// Plain key/value geometry description. Grid surfaces carry a gluing table of
// unit squares; spectral surfaces ignore it.
struct GeometryConfig {
  Backend backend = Backend::SpectralTorus;
  int genus = 1;
  int resolution = 16;
  double total_area = 1.0;
  std::vector<EdgeGluing> gluing;

  int square_count() const {
    int n = 0;
    for (const auto& g : gluing) n = std::max({n, g.from.square + 1, g.to.square + 1});
    return n;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline Side parse_side(const std::string& tok) {
  const std::string t = lower(tok);
  if (t == "l" || t == "left") return Side::Left;
  if (t == "r" || t == "right") return Side::Right;
  if (t == "b" || t == "bottom") return Side::Bottom;
  if (t == "t" || t == "top") return Side::Top;
  throw Error(ErrorCode::InvalidGluing, "unknown side '" + tok + "'");
}

inline EdgeRef parse_edge_ref(const std::string& text) {
  std::istringstream is(text);
  EdgeRef r;
  std::string side;
  if (!(is >> r.square >> side) || r.square < 0)
    throw Error(ErrorCode::InvalidGluing, "bad edge reference '" + text + "'");
  r.side = parse_side(side);
  return r;
}

}  // namespace detail

// Orders a gluing pair so that `from` is the Right/Top side.
inline EdgeGluing canonical(EdgeGluing g) {
  auto outgoing = [](Side s) { return s == Side::Right || s == Side::Top; };
  if (!outgoing(g.from.side) && outgoing(g.to.side)) std::swap(g.from, g.to);
  return g;
}

inline GeometryConfig parse_geometry_config(std::istream& in) {
  GeometryConfig cfg;
  std::map<std::string, std::string> kv;
  bool in_gluing = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line == "[gluing]" || detail::lower(line) == "gluing:") {
      in_gluing = true;
      continue;
    }
    if (in_gluing && line.find("->") != std::string::npos) {
      auto arrow = line.find("->");
      EdgeGluing g{detail::parse_edge_ref(line.substr(0, arrow)),
                   detail::parse_edge_ref(line.substr(arrow + 2))};
      cfg.gluing.push_back(canonical(g));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    kv[detail::lower(detail::trim(line.substr(0, eq)))] = detail::trim(line.substr(eq + 1));
    in_gluing = false;
  }

  try {
    if (auto it = kv.find("backend"); it != kv.end()) {
      const std::string b = detail::lower(it->second);
      if (b == "spectral" || b == "spectral_torus" || b == "spectraltorus")
        cfg.backend = Backend::SpectralTorus;
      else if (b == "grid" || b == "square_tiled" || b == "squaretiledgrid")
        cfg.backend = Backend::SquareTiledGrid;
      else
        throw Error(ErrorCode::InvalidConfig, "unknown backend '" + it->second + "'");
    }
    if (auto it = kv.find("genus"); it != kv.end()) cfg.genus = std::stoi(it->second);
    if (auto it = kv.find("resolution"); it != kv.end()) cfg.resolution = std::stoi(it->second);
    if (auto it = kv.find("total_area"); it != kv.end()) cfg.total_area = std::stod(it->second);
  } catch (const std::logic_error& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("unparsable value: ") + e.what());
  }
  for (const auto& [k, v] : kv)
    if (k != "backend" && k != "genus" && k != "resolution" && k != "total_area")
      throw Error(ErrorCode::InvalidConfig, "unknown key '" + k + "'");
  if (cfg.genus < 0) throw Error(ErrorCode::InvalidConfig, "genus must be non-negative");
  if (cfg.resolution < 1) throw Error(ErrorCode::InvalidConfig, "resolution must be positive");
  if (!(cfg.total_area > 0)) throw Error(ErrorCode::InvalidConfig, "total_area must be positive");
  std::sort(cfg.gluing.begin(), cfg.gluing.end(),
            [](const EdgeGluing& a, const EdgeGluing& b) { return a.from < b.from; });
  return cfg;
}

inline GeometryConfig parse_geometry_config(const std::string& text) {
  std::istringstream is(text);
  return parse_geometry_config(is);
}

inline GeometryConfig read_geometry_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IOError, "cannot open geometry file '" + path + "'");
  return parse_geometry_config(f);
}

// Canonical echo: fixed key order, gluing pairs sorted with Right/Top first.
inline std::string format_geometry_config(const GeometryConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "backend = " << to_string(cfg.backend) << "\n";
  os << "genus = " << cfg.genus << "\n";
  os << "resolution = " << cfg.resolution << "\n";
  os << "total_area = " << cfg.total_area << "\n";
  if (!cfg.gluing.empty()) {
    std::vector<EdgeGluing> g;
    for (const auto& e : cfg.gluing) g.push_back(canonical(e));
    std::sort(g.begin(), g.end(), [](const EdgeGluing& a, const EdgeGluing& b) { return a.from < b.from; });
    os << "[gluing]\n";
    for (const auto& e : g)
      os << e.from.square << ' ' << side_letter(e.from.side) << " -> " << e.to.square << ' '
         << side_letter(e.to.side) << "\n";
  }
  return os.str();
}

inline GeometryConfig torus_config(int resolution, double total_area = 1.0) {
  GeometryConfig c;
  c.backend = Backend::SpectralTorus;
  c.genus = 1;
  c.resolution = resolution;
  c.total_area = total_area;
  return c;
}

// One square with opposite sides identified.
inline GeometryConfig square_torus_config(int resolution, double total_area = 1.0) {
  GeometryConfig c;
  c.backend = Backend::SquareTiledGrid;
  c.genus = 1;
  c.resolution = resolution;
  c.total_area = total_area;
  c.gluing = {{{0, Side::Right}, {0, Side::Left}}, {{0, Side::Top}, {0, Side::Bottom}}};
  return c;
}

// Three squares in an L: square 1 to the right of 0, square 2 above 0.
inline GeometryConfig l_shape_genus2_config(int resolution, double total_area = 3.0) {
  GeometryConfig c;
  c.backend = Backend::SquareTiledGrid;
  c.genus = 2;
  c.resolution = resolution;
  c.total_area = total_area;
  c.gluing = {{{0, Side::Right}, {1, Side::Left}}, {{0, Side::Top}, {2, Side::Bottom}},
              {{1, Side::Right}, {0, Side::Left}}, {{1, Side::Top}, {1, Side::Bottom}},
              {{2, Side::Right}, {2, Side::Left}}, {{2, Side::Top}, {0, Side::Bottom}}};
  return c;
}

}  // namespace bh
