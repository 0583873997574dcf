#pragma once

#include "phaselab/grid.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace phaselab {

// Shortest round-trip decimal for a double; deterministic across runs.
inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return buf;
}

// ---------------------------------------------------------------------------
// Field checkpoint: flat binary of doubles with a small header, plus a
// human-readable JSON sidecar. Layout (little-endian):
//   magic "PHLFLD01" | u32 dim | u32 count[3] | f64 origin[3] | f64 spacing[3]
//   | f64 epsilon | u8 bc[6] | f64 values[...]
// ---------------------------------------------------------------------------

inline void write_field(const ScalarField& f, const std::string& path_base,
                        const std::string& seed_note = "",
                        const std::string& config_digest = "") {
  std::ofstream out(path_base + ".bin", std::ios::binary);
  if (!out) throw ConfigError("write_field: cannot open " + path_base + ".bin");
  const char magic[8] = {'P', 'H', 'L', 'F', 'L', 'D', '0', '1'};
  out.write(magic, 8);
  const std::uint32_t dim = f.grid.dim();
  out.write(reinterpret_cast<const char*>(&dim), 4);
  for (int a = 0; a < 3; ++a) {
    const std::uint32_t c = f.grid.count(a);
    out.write(reinterpret_cast<const char*>(&c), 4);
  }
  for (int a = 0; a < 3; ++a) {
    const double o = f.grid.origin(a);
    out.write(reinterpret_cast<const char*>(&o), 8);
  }
  for (int a = 0; a < 3; ++a) {
    const double h = f.grid.spacing(a);
    out.write(reinterpret_cast<const char*>(&h), 8);
  }
  out.write(reinterpret_cast<const char*>(&f.epsilon), 8);
  for (int i = 0; i < 6; ++i) {
    const std::uint8_t k = static_cast<std::uint8_t>(f.bc.face[i]);
    out.write(reinterpret_cast<const char*>(&k), 1);
  }
  out.write(reinterpret_cast<const char*>(f.values.data()),
            std::streamsize(sizeof(double) * f.values.size()));

  nlohmann::json meta;
  meta["dim"] = f.grid.dim();
  meta["count"] = {f.grid.count(0), f.grid.count(1), f.grid.count(2)};
  meta["origin"] = {f.grid.origin(0), f.grid.origin(1), f.grid.origin(2)};
  meta["spacing"] = {f.grid.spacing(0), f.grid.spacing(1), f.grid.spacing(2)};
  meta["epsilon"] = f.epsilon;
  const char* names[] = {"dirichlet", "neumann0", "periodic"};
  std::vector<std::string> bcn;
  for (int i = 0; i < 6; ++i) bcn.push_back(names[int(f.bc.face[i])]);
  meta["bc"] = bcn;
  if (!seed_note.empty()) meta["seed"] = seed_note;
  if (!config_digest.empty()) meta["config_digest"] = config_digest;
  std::ofstream ms(path_base + ".meta.json");
  ms << meta.dump(2) << "\n";
}

inline ScalarField read_field(const std::string& path_base) {
  std::ifstream in(path_base + ".bin", std::ios::binary);
  if (!in) throw ConfigError("read_field: cannot open " + path_base + ".bin");
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, "PHLFLD01", 8) != 0)
    throw ConfigError("read_field: bad magic in " + path_base + ".bin");
  std::uint32_t dim = 0, count[3];
  double origin[3], spacing[3], epsilon;
  std::uint8_t bcb[6];
  in.read(reinterpret_cast<char*>(&dim), 4);
  for (int a = 0; a < 3; ++a) in.read(reinterpret_cast<char*>(&count[a]), 4);
  for (int a = 0; a < 3; ++a) in.read(reinterpret_cast<char*>(&origin[a]), 8);
  for (int a = 0; a < 3; ++a) in.read(reinterpret_cast<char*>(&spacing[a]), 8);
  in.read(reinterpret_cast<char*>(&epsilon), 8);
  in.read(reinterpret_cast<char*>(bcb), 6);
  BoundaryCondition bc;
  for (int i = 0; i < 6; ++i) bc.face[i] = static_cast<BcKind>(bcb[i]);
  std::array<double, 3> lengths{1.0, 1.0, 1.0};
  for (int a = 0; a < int(dim); ++a)
    lengths[a] = bc.periodic_axis(a) ? spacing[a] * count[a] : spacing[a] * (count[a] - 1);
  const GridSpec g = GridSpec::make(int(dim), {int(count[0]), int(count[1]), int(count[2])},
                                    lengths, bc, {origin[0], origin[1], origin[2]});
  ScalarField f = ScalarField::make(g, bc, epsilon);
  in.read(reinterpret_cast<char*>(f.values.data()),
          std::streamsize(sizeof(double) * f.values.size()));
  if (!in) throw ConfigError("read_field: truncated " + path_base + ".bin");
  return f;
}

// ---------------------------------------------------------------------------
// CSV writer with '#' comment header (config digest + seed go there).
// ---------------------------------------------------------------------------

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw ConfigError("csv: cannot open " + path);
  }
  void comment(const std::string& line) { out_ << "# " << line << "\n"; }
  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      out_ << cols[i] << (i + 1 < cols.size() ? "," : "\n");
  }
  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i)
      out_ << fmt(vals[i]) << (i + 1 < vals.size() ? "," : "\n");
  }
  void raw_row(const std::vector<std::string>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i)
      out_ << vals[i] << (i + 1 < vals.size() ? "," : "\n");
  }

 private:
  std::ofstream out_;
};

// 1D slice of a field along `axis` with the other indices fixed.
inline void write_slice_csv(const ScalarField& f, int axis, std::array<int, 3> fixed,
                            const std::string& path, const std::string& note = "") {
  CsvWriter csv(path);
  if (!note.empty()) csv.comment(note);
  csv.header({"x", "u"});
  auto ijk = fixed;
  for (int i = 0; i < f.grid.count(axis); ++i) {
    ijk[axis] = i;
    csv.row({f.grid.coord(axis, i), f.values[f.grid.flatten(ijk[0], ijk[1], ijk[2])]});
  }
}

// ---------------------------------------------------------------------------
// Minimal static SVG line plot (deterministic output, no external deps).
// ---------------------------------------------------------------------------

struct SvgSeries {
  std::string label;
  std::string colour;  // e.g. "#1f77b4"
  std::vector<double> x, y;
};

inline void write_svg_plot(const std::string& path, const std::string& title,
                           const std::vector<SvgSeries>& series,
                           const std::string& note = "") {
  const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) ymax = ymin + 1;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ofstream out(path);
  if (!out) throw ConfigError("svg: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  if (!note.empty()) out << "<!-- " << note << " -->\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
      << title << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xv) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv) << "</text>\n";
  }
  int li = 0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << fmt(px(s.x[i])) << "," << fmt(py(s.y[i])) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 * li++
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << s.colour << "\">" << s.label
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace phaselab
