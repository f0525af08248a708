#include "vagflow/mesh.hpp"

#include "vagflow/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

namespace vagflow {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

namespace {

double polygon_area(const std::vector<Point>& pts, const std::vector<std::size_t>& idx) {
  double twice = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    twice += cross(pts[idx[i]], pts[idx[(i + 1) % idx.size()]]);
  }
  return 0.5 * twice;
}

Point polygon_centroid(const std::vector<Point>& pts, const std::vector<std::size_t>& idx) {
  // Area-weighted centroid, computed relative to the first vertex for accuracy.
  const Point o = pts[idx[0]];
  double twice_area = 0.0;
  Point acc;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const Point a = pts[idx[i]] - o;
    const Point b = pts[idx[(i + 1) % idx.size()]] - o;
    const double c = cross(a, b);
    twice_area += c;
    acc = acc + c * (a + b);
  }
  return o + (1.0 / (3.0 * twice_area)) * acc;
}

std::string cell_name(std::size_t k) { return "cell " + std::to_string(k + 1); }

} // namespace

Mesh Mesh::create(std::vector<Point> vertices, std::vector<CellSpec> cells) {
  Mesh m;
  const std::size_t nv = vertices.size();
  if (nv == 0 || cells.empty()) {
    throw ValidationError("mesh has no vertices or no cells");
  }
  m.vertices_ = std::move(vertices);
  m.cells_.reserve(cells.size());
  m.cell_area_.reserve(cells.size());
  m.vertex_cells_.assign(nv, {});

  for (std::size_t k = 0; k < cells.size(); ++k) {
    CellSpec& spec = cells[k];
    if (spec.vertices.size() < 3) {
      throw ValidationError(cell_name(k) + " has fewer than 3 vertices");
    }
    for (std::size_t v : spec.vertices) {
      if (v >= nv) {
        throw ValidationError(cell_name(k) + " references vertex " + std::to_string(v + 1) +
                              " but the mesh has " + std::to_string(nv) + " vertices");
      }
    }
    {
      auto sorted = spec.vertices;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ValidationError(cell_name(k) + " lists a vertex twice");
      }
    }
    const double area = polygon_area(m.vertices_, spec.vertices);
    if (!(area > 0.0)) {
      throw ValidationError(cell_name(k) + " is not counterclockwise or has zero area");
    }
    const Point center = spec.center ? *spec.center : polygon_centroid(m.vertices_, spec.vertices);
    const std::size_t nk = spec.vertices.size();
    for (std::size_t i = 0; i < nk; ++i) {
      const Point a = m.vertices_[spec.vertices[i]];
      const Point b = m.vertices_[spec.vertices[(i + 1) % nk]];
      if (!(signed_area(center, a, b) > 0.0)) {
        throw ValidationError(cell_name(k) + " is not star-shaped with respect to its center");
      }
    }
    for (std::size_t v : spec.vertices) {
      m.vertex_cells_[v].push_back(k);
    }
    m.cell_area_.push_back(area);
    m.cells_.push_back(Cell{std::move(spec.vertices), center, spec.tag});
  }

  for (std::size_t v = 0; v < nv; ++v) {
    if (m.vertex_cells_[v].empty()) {
      throw ValidationError("vertex " + std::to_string(v + 1) + " belongs to no cell");
    }
  }

  // Each undirected edge is used once (boundary) or twice with opposite
  // orientations (interior); anything else means overlapping cells.
  struct EdgeUse {
    int forward = 0;
    int backward = 0;
  };
  std::map<std::pair<std::size_t, std::size_t>, EdgeUse> edges;
  for (std::size_t k = 0; k < m.cells_.size(); ++k) {
    const auto& vs = m.cells_[k].vertices;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::size_t a = vs[i];
      const std::size_t b = vs[(i + 1) % vs.size()];
      auto& use = edges[{std::min(a, b), std::max(a, b)}];
      (a < b ? use.forward : use.backward) += 1;
    }
  }
  m.boundary_.assign(nv, false);
  double boundary_twice_area = 0.0;
  for (const auto& [edge, use] : edges) {
    if (use.forward > 1 || use.backward > 1) {
      throw ValidationError("edge (" + std::to_string(edge.first + 1) + ", " +
                            std::to_string(edge.second + 1) + ") is shared by overlapping cells");
    }
    if (use.forward + use.backward == 1) {
      m.boundary_[edge.first] = true;
      m.boundary_[edge.second] = true;
      const Point a = m.vertices_[use.forward ? edge.first : edge.second];
      const Point b = m.vertices_[use.forward ? edge.second : edge.first];
      boundary_twice_area += cross(a, b);
    }
  }

  double total = 0.0;
  for (double a : m.cell_area_) total += a;
  const double domain_area = 0.5 * boundary_twice_area;
  if (std::abs(total - domain_area) > 1e-10 * std::abs(domain_area)) {
    throw ValidationError("cell areas sum to " + std::to_string(total) +
                          " but the boundary encloses " + std::to_string(domain_area));
  }
  m.area_ = total;
  return m;
}

std::size_t Mesh::n_boundary_vertices() const {
  return static_cast<std::size_t>(std::count(boundary_.begin(), boundary_.end(), true));
}

BoundingBox Mesh::bounding_box() const {
  BoundingBox box{vertices_.front(), vertices_.front()};
  for (const Point& p : vertices_) {
    box.lo.x = std::min(box.lo.x, p.x);
    box.lo.y = std::min(box.lo.y, p.y);
    box.hi.x = std::max(box.hi.x, p.x);
    box.hi.y = std::max(box.hi.y, p.y);
  }
  return box;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct Token {
  std::string_view text;
  int column;
};

struct Line {
  int number;
  std::vector<Token> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, end - pos);
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    Line line{number, {}};
    std::size_t i = 0;
    while (i < raw.size()) {
      while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      const std::size_t start = i;
      while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
      if (i > start) line.tokens.push_back({raw.substr(start, i - start), static_cast<int>(start) + 1});
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

double to_double(const Line& line, const Token& tok) {
  double value = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ParseError("expected a finite number, got '" + std::string(tok.text) + "'", line.number, tok.column);
  }
  return value;
}

long long to_integer(const Line& line, const Token& tok) {
  long long value = 0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError("expected an integer, got '" + std::string(tok.text) + "'", line.number, tok.column);
  }
  return value;
}

class LineCursor {
public:
  explicit LineCursor(std::vector<Line> lines) : lines_(std::move(lines)) {}

  bool done() const { return next_ == lines_.size(); }
  const Line& peek() const { return lines_[next_]; }
  const Line& take(const char* expecting) {
    if (done()) {
      const int line = lines_.empty() ? 1 : lines_.back().number + 1;
      throw ParseError(std::string("unexpected end of file, expected ") + expecting, line, 1);
    }
    return lines_[next_++];
  }

private:
  std::vector<Line> lines_;
  std::size_t next_ = 0;
};

std::size_t expect_header(const Line& line, std::string_view keyword) {
  if (line.tokens.size() != 2 || line.tokens[0].text != keyword) {
    throw ParseError("expected '" + std::string(keyword) + " <count>'", line.number, line.tokens[0].column);
  }
  const long long n = to_integer(line, line.tokens[1]);
  if (n < 0) throw ParseError("negative count", line.number, line.tokens[1].column);
  return static_cast<std::size_t>(n);
}

void expect_fields(const Line& line, std::size_t n) {
  if (line.tokens.size() != n) {
    const int col = line.tokens.size() > n ? line.tokens[n].column : line.tokens.back().column;
    throw ParseError("expected " + std::to_string(n) + " fields, got " + std::to_string(line.tokens.size()),
                     line.number, col);
  }
}

} // namespace

Mesh parse_mesh(std::string_view text) {
  LineCursor cur(tokenize(text));
  {
    const Line& magic = cur.take("'VAGMESH 2'");
    if (magic.tokens.size() != 2 || magic.tokens[0].text != "VAGMESH" || magic.tokens[1].text != "2") {
      throw ParseError("expected 'VAGMESH 2'", magic.number, magic.tokens[0].column);
    }
  }

  const std::size_t nv = expect_header(cur.take("VERTICES"), "VERTICES");
  std::vector<Point> vertices;
  vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const Line& line = cur.take("a vertex line");
    expect_fields(line, 2);
    vertices.push_back({to_double(line, line.tokens[0]), to_double(line, line.tokens[1])});
  }

  const std::size_t nc = expect_header(cur.take("CELLS"), "CELLS");
  std::vector<CellSpec> cells;
  cells.reserve(nc);
  for (std::size_t k = 0; k < nc; ++k) {
    const Line& line = cur.take("a cell line");
    const long long count = to_integer(line, line.tokens[0]);
    if (count < 3) throw ParseError("a cell needs at least 3 vertices", line.number, line.tokens[0].column);
    const auto n = static_cast<std::size_t>(count);
    if (line.tokens.size() != n + 1 && line.tokens.size() != n + 2) {
      throw ParseError("cell line must hold " + std::to_string(n) + " vertex indices and an optional tag",
                       line.number, line.tokens.back().column);
    }
    CellSpec spec;
    for (std::size_t i = 1; i <= n; ++i) {
      const long long v = to_integer(line, line.tokens[i]);
      if (v < 1 || static_cast<std::size_t>(v) > nv) {
        throw ParseError("vertex index " + std::to_string(v) + " out of range 1.." + std::to_string(nv),
                         line.number, line.tokens[i].column);
      }
      spec.vertices.push_back(static_cast<std::size_t>(v - 1));
    }
    if (line.tokens.size() == n + 2) spec.tag = static_cast<int>(to_integer(line, line.tokens[n + 1]));
    cells.push_back(std::move(spec));
  }

  if (!cur.done()) {
    const std::size_t ncenters = expect_header(cur.take("CENTERS"), "CENTERS");
    if (ncenters != nc) {
      throw ParseError("CENTERS count must equal CELLS count", cur.done() ? 0 : cur.peek().number, 1);
    }
    for (std::size_t k = 0; k < nc; ++k) {
      const Line& line = cur.take("a center line");
      expect_fields(line, 2);
      cells[k].center = Point{to_double(line, line.tokens[0]), to_double(line, line.tokens[1])};
    }
  }
  if (!cur.done()) {
    throw ParseError("unexpected trailing content", cur.peek().number, cur.peek().tokens[0].column);
  }
  return Mesh::create(std::move(vertices), std::move(cells));
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open mesh file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_mesh(ss.str());
}

std::string serialize_mesh(const Mesh& mesh) {
  std::string out = "VAGMESH 2\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
  };
  out += "VERTICES " + std::to_string(mesh.n_vertices()) + "\n";
  for (const Point& p : mesh.vertices()) {
    put(p.x);
    out += ' ';
    put(p.y);
    out += '\n';
  }
  out += "CELLS " + std::to_string(mesh.n_cells()) + "\n";
  for (const Cell& c : mesh.cells()) {
    out += std::to_string(c.vertices.size());
    for (std::size_t v : c.vertices) out += ' ' + std::to_string(v + 1);
    out += ' ' + std::to_string(c.tag) + '\n';
  }
  out += "CENTERS " + std::to_string(mesh.n_cells()) + "\n";
  for (const Cell& c : mesh.cells()) {
    put(c.center.x);
    out += ' ';
    put(c.center.y);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators

MeshKind mesh_kind_from_string(std::string_view name) {
  if (name == "cartesian") return MeshKind::cartesian;
  if (name == "split-triangles") return MeshKind::split_triangles;
  if (name == "kershaw-like") return MeshKind::kershaw_like;
  throw ValidationError("unknown mesh generator '" + std::string(name) + "'");
}

std::string to_string(MeshKind kind) {
  switch (kind) {
  case MeshKind::cartesian: return "cartesian";
  case MeshKind::split_triangles: return "split-triangles";
  case MeshKind::kershaw_like: return "kershaw-like";
  }
  return "?";
}

Mesh generate_structured(MeshKind kind, std::size_t n, double distortion) {
  if (n < 1) throw ValidationError("mesh subdivision count must be at least 1");
  if (kind == MeshKind::kershaw_like && !(distortion >= 0.0 && distortion < 1.0)) {
    throw ValidationError("kershaw-like distortion must lie in [0, 1)");
  }
  const double h = 1.0 / static_cast<double>(n);
  auto id = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };

  std::vector<Point> vertices;
  vertices.reserve((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      // Exact endpoints keep boundary predicates like x == 1 reliable.
      const double xi = i == n ? 1.0 : static_cast<double>(i) * h;
      const double eta = j == n ? 1.0 : static_cast<double>(j) * h;
      double x = xi;
      if (kind == MeshKind::kershaw_like && i != 0 && i != n) {
        // dx/dxi >= 1 - distortion > 0, so columns never cross.
        x = xi + distortion * xi * (1.0 - xi) * std::sin(4.0 * std::numbers::pi * eta);
      }
      vertices.push_back({x, eta});
    }
  }

  std::vector<CellSpec> cells;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
      if (kind == MeshKind::split_triangles) {
        if ((i + j) % 2 == 0) {
          cells.push_back({{v00, v10, v11}, std::nullopt, 1});
          cells.push_back({{v00, v11, v01}, std::nullopt, 1});
        } else {
          cells.push_back({{v00, v10, v01}, std::nullopt, 1});
          cells.push_back({{v10, v11, v01}, std::nullopt, 1});
        }
      } else {
        cells.push_back({{v00, v10, v11, v01}, std::nullopt, 1});
      }
    }
  }
  return Mesh::create(std::move(vertices), std::move(cells));
}

// ---------------------------------------------------------------------------
// Submesh, lumping, quality

Submesh build_submesh(const Mesh& mesh) {
  Submesh sub;
  sub.cell_offsets.reserve(mesh.n_cells() + 1);
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) {
    sub.cell_offsets.push_back(sub.triangles.size());
    const Cell& cell = mesh.cell(k);
    const std::size_t nk = cell.vertices.size();
    for (std::size_t i = 0; i < nk; ++i) {
      const std::size_t a = cell.vertices[i];
      const std::size_t b = cell.vertices[(i + 1) % nk];
      const Point pa = mesh.vertex(a), pb = mesh.vertex(b);
      const double area = signed_area(cell.center, pa, pb);
      if (!(area > 0.0)) {
        throw ValidationError("degenerate submesh triangle in " + cell_name(k));
      }
      const double e0 = distance(cell.center, pa), e1 = distance(pa, pb), e2 = distance(pb, cell.center);
      sub.triangles.push_back({k, a, b, area, std::max({e0, e1, e2}), 4.0 * area / (e0 + e1 + e2)});
    }
  }
  sub.cell_offsets.push_back(sub.triangles.size());
  return sub;
}

double LumpedMeasures::total() const {
  double s = 0.0;
  for (double m : m_cell) s += m;
  for (double m : m_vertex) s += m;
  return s;
}

LumpedMeasures compute_lumping(const Mesh& mesh, const LumpingRule& rule) {
  LumpedMeasures lm;
  lm.alpha.resize(mesh.n_cells());
  lm.m_cell_vertex.resize(mesh.n_cells());
  lm.m_cell.assign(mesh.n_cells(), 0.0);
  lm.m_vertex.assign(mesh.n_vertices(), 0.0);
  if (!rule.weights.empty() && rule.weights.size() != mesh.n_cells()) {
    throw ValidationError("explicit lumping weights must be given for every cell");
  }

  for (std::size_t k = 0; k < mesh.n_cells(); ++k) {
    const Cell& cell = mesh.cell(k);
    const std::size_t nk = cell.vertices.size();
    std::vector<double> alpha;
    if (rule.weights.empty()) {
      alpha.assign(nk, rule.fraction / static_cast<double>(nk));
    } else {
      alpha = rule.weights[k];
      if (alpha.size() != nk) {
        throw ValidationError(cell_name(k) + ": expected " + std::to_string(nk) + " lumping weights");
      }
    }
    double sum = 0.0;
    for (double a : alpha) {
      if (!(a >= 0.0)) throw ValidationError(cell_name(k) + ": negative lumping weight");
      sum += a;
    }
    if (sum > 1.0) throw ValidationError(cell_name(k) + ": lumping weights sum past 1");

    const double meas = mesh.cell_area(k);
    lm.m_cell_vertex[k].resize(nk);
    double to_vertices = 0.0;
    for (std::size_t i = 0; i < nk; ++i) {
      const double mks = alpha[i] * meas;
      lm.m_cell_vertex[k][i] = mks;
      lm.m_vertex[cell.vertices[i]] += mks;
      to_vertices += mks;
    }
    lm.m_cell[k] = meas - to_vertices;
    lm.alpha[k] = std::move(alpha);
  }

  for (std::size_t k = 0; k < mesh.n_cells(); ++k) {
    if (!(lm.m_cell[k] > 0.0)) throw ValidationError(cell_name(k) + " has zero lumped mass");
  }
  for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
    if (!(lm.m_vertex[v] > 0.0)) {
      throw ValidationError("vertex " + std::to_string(v + 1) + " has zero lumped mass");
    }
  }
  return lm;
}

QualityReport mesh_quality(const Mesh& mesh, const Submesh& submesh, const LumpedMeasures& lumped) {
  QualityReport q;
  // Integral of the P1 hat function of each dof: area / 3 per incident triangle.
  std::vector<double> hat_cell(mesh.n_cells(), 0.0);
  std::vector<double> hat_vertex(mesh.n_vertices(), 0.0);
  for (const SubTriangle& t : submesh.triangles) {
    q.h = std::max(q.h, t.diameter);
    q.theta = std::max(q.theta, t.diameter / t.incircle_diam);
    hat_cell[t.cell] += t.area / 3.0;
    hat_vertex[t.a] += t.area / 3.0;
    hat_vertex[t.b] += t.area / 3.0;
  }
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) {
    q.ell = std::max(q.ell, mesh.cell(k).vertices.size());
  }
  for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
    q.ell = std::max(q.ell, mesh.vertex_cells(v).size());
  }
  q.zeta = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mesh.n_cells(); ++k) q.zeta = std::min(q.zeta, lumped.m_cell[k] / hat_cell[k]);
  for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
    q.zeta = std::min(q.zeta, lumped.m_vertex[v] / hat_vertex[v]);
  }
  return q;
}

} // namespace vagflow
