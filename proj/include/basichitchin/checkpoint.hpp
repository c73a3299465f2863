#pragma once

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "matrix_forms.hpp"

namespace bh {

// Text format for one cochain:
//   cochain <form> rank <r> backend <b> resolution <n> skew <0|1> slots <m>
// followed by m lines of r*r (re, im) pairs, column-blocked as in MatCochain.
inline void write_cochain(std::ostream& os, const TransverseSurface& s, const MatCochain& a) {
  os << "cochain " << to_string(a.form) << " rank " << a.rank << " backend " << to_string(s.backend())
     << " resolution " << s.resolution() << " skew " << (a.skew ? 1 : 0) << " slots " << a.slots() << "\n";
  char buf[64];
  for (Eigen::Index k = 0; k < a.slots(); ++k) {
    for (Eigen::Index c = 0; c < a.data.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g %.17g", a.data(k, c).real(), a.data(k, c).imag());
      os << (c ? " " : "") << buf;
    }
    os << "\n";
  }
}

inline MatCochain read_cochain(std::istream& is, const TransverseSurface& s) {
  std::string tag, form, kr, kb, backend, kn, ks, km;
  int rank = 0, resolution = 0, skew = 0;
  Eigen::Index slots = 0;
  if (!(is >> tag >> form >> kr >> rank >> kb >> backend >> kn >> resolution >> ks >> skew >> km >> slots) ||
      tag != "cochain" || kr != "rank" || kb != "backend" || kn != "resolution" || ks != "skew" || km != "slots")
    throw Error(ErrorCode::IOError, "malformed cochain header");
  if (backend != to_string(s.backend()) || resolution != s.resolution())
    throw Error(ErrorCode::IOError, "cochain was written for a different surface");
  const Form f = form_from_string(form);
  if (rank < 1) throw Error(ErrorCode::IOError, "cochain rank must be positive");
  if (slots != s.cell_count(f)) throw Error(ErrorCode::DegreeMismatch, "cochain slot count does not match surface");
  MatCochain a{f, rank, false, CMat::Zero(slots, rank * rank)};
  for (Eigen::Index k = 0; k < slots; ++k)
    for (Eigen::Index c = 0; c < a.data.cols(); ++c) {
      double re = 0, im = 0;
      if (!(is >> re >> im)) throw Error(ErrorCode::IOError, "truncated cochain data");
      a.data(k, c) = {re, im};
    }
  if (skew) a = mark_skew(std::move(a), 1e-12);
  return a;
}

// Pair checkpoint: the geometry echo between "geometry" and "end", then A and Phi.
inline void write_pair(std::ostream& os, const HitchinPair& p) {
  os << "bhit-pair 1\ngeometry\n" << format_geometry_config(p.geom().config()) << "end\n";
  write_cochain(os, p.geom(), p.A);
  write_cochain(os, p.geom(), p.Phi);
}

inline HitchinPair read_pair(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "bhit-pair 1") throw Error(ErrorCode::IOError, "not a pair checkpoint");
  if (!std::getline(is, line) || line != "geometry") throw Error(ErrorCode::IOError, "missing geometry block");
  std::string geometry;
  while (std::getline(is, line) && line != "end") geometry += line + "\n";
  if (line != "end") throw Error(ErrorCode::IOError, "unterminated geometry block");
  auto s = build_surface(parse_geometry_config(geometry));
  MatCochain A = read_cochain(is, *s);
  MatCochain Phi = read_cochain(is, *s);
  return make_pair(s, std::move(A), std::move(Phi));
}

inline void save_pair(const std::string& path, const HitchinPair& p) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IOError, "cannot write checkpoint '" + path + "'");
  write_pair(f, p);
  if (!f) throw Error(ErrorCode::IOError, "write failed for '" + path + "'");
}

inline HitchinPair load_pair(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IOError, "cannot open checkpoint '" + path + "'");
  return read_pair(f);
}

}  // namespace bh
