#ifndef VAGFLOW_MESH_HPP
#define VAGFLOW_MESH_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vagflow {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
double distance(Point a, Point b);

/// Signed area of the triangle (a, b, c); positive when counterclockwise.
double signed_area(Point a, Point b, Point c);

struct Cell {
  std::vector<std::size_t> vertices; ///< counterclockwise
  Point center;
  int tag = 1;
};

/// Input for Mesh::create. A missing center means "use the polygon centroid".
struct CellSpec {
  std::vector<std::size_t> vertices;
  std::optional<Point> center;
  int tag = 1;
};

struct BoundingBox {
  Point lo;
  Point hi;
};

/// Polygonal 2D mesh whose cells are star-shaped with respect to their centers.
///
/// Instances only come out of create(), which validates every invariant, so a
/// Mesh value is always consistent. Cells and vertices are addressed by index.
class Mesh {
public:
  /// Throws ValidationError naming the offending cell or vertex.
  static Mesh create(std::vector<Point> vertices, std::vector<CellSpec> cells);

  std::size_t n_vertices() const { return vertices_.size(); }
  std::size_t n_cells() const { return cells_.size(); }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const Point& vertex(std::size_t i) const { return vertices_[i]; }
  const Cell& cell(std::size_t k) const { return cells_[k]; }

  bool is_boundary_vertex(std::size_t i) const { return boundary_[i]; }
  std::size_t n_boundary_vertices() const;
  /// Cells sharing vertex i.
  const std::vector<std::size_t>& vertex_cells(std::size_t i) const { return vertex_cells_[i]; }

  double cell_area(std::size_t k) const { return cell_area_[k]; }
  double area() const { return area_; }
  BoundingBox bounding_box() const;

private:
  Mesh() = default;

  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<bool> boundary_;
  std::vector<std::vector<std::size_t>> vertex_cells_;
  std::vector<double> cell_area_;
  double area_ = 0.0;
};

/// Parses the `VAGMESH 2` text format. Throws ParseError or ValidationError.
Mesh parse_mesh(std::string_view text);
Mesh read_mesh_file(const std::string& path);

/// Writes the text format with 17 significant digits; centers and tags are
/// always emitted so that parse(serialize(m)) reproduces m bit for bit.
std::string serialize_mesh(const Mesh& mesh);

enum class MeshKind { cartesian, split_triangles, kershaw_like };

MeshKind mesh_kind_from_string(std::string_view name);
std::string to_string(MeshKind kind);

/// Structured families on the unit square.
///
/// cartesian: n x n squares. split_triangles: each square cut along one
/// diagonal, the diagonal direction alternating between neighbouring squares.
/// kershaw_like: n x n trapezoids whose vertical grid lines are bent into a
/// sinusoid alternating direction between horizontal layers,
/// x = xi + distortion * xi (1 - xi) sin(4 pi y), with distortion in [0, 1).
Mesh generate_structured(MeshKind kind, std::size_t n, double distortion = 0.0);

struct SubTriangle {
  std::size_t cell;
  std::size_t a; ///< first vertex of the cell edge (counterclockwise)
  std::size_t b;
  double area;
  double diameter;       ///< h_T
  double incircle_diam;  ///< rho_T = 4 area / perimeter
};

/// Triangles joining each cell center to each of the cell's edges. The
/// triangles of cell k occupy [first_triangle(k), first_triangle(k+1)) and the
/// i-th one spans the edge (v_i, v_{i+1}) of the cell's vertex list.
struct Submesh {
  std::vector<SubTriangle> triangles;
  std::vector<std::size_t> cell_offsets;

  std::size_t first_triangle(std::size_t k) const { return cell_offsets[k]; }
};

Submesh build_submesh(const Mesh& mesh);

/// Mass-lumping rule. `uniform(f)` gives alpha = f / #V_k in every cell.
struct LumpingRule {
  double fraction = 0.1;
  /// When non-empty, per-cell weights aligned with each cell's vertex list.
  std::vector<std::vector<double>> weights;

  static LumpingRule uniform(double f) { return LumpingRule{f, {}}; }
  static LumpingRule explicit_weights(std::vector<std::vector<double>> w) {
    return LumpingRule{0.0, std::move(w)};
  }
};

/// Lumped measures of the degrees of freedom. alpha and m_cell_vertex are
/// stored per cell, aligned with the cell's vertex list.
struct LumpedMeasures {
  std::vector<std::vector<double>> alpha;
  std::vector<std::vector<double>> m_cell_vertex;
  std::vector<double> m_cell;
  std::vector<double> m_vertex;

  double total() const;
};

/// Throws ValidationError when a weight is negative, a cell's weights sum past
/// one, or some dof ends up with a non-positive mass.
LumpedMeasures compute_lumping(const Mesh& mesh, const LumpingRule& rule);

struct QualityReport {
  double h = 0.0;
  double theta = 0.0;
  std::size_t ell = 0;
  double zeta = 0.0;
  /// Extremes of the 2-norm condition number of the local stiffness matrices;
  /// NaN until filled from the assembled operator.
  double cond_min = std::numeric_limits<double>::quiet_NaN();
  double cond_max = std::numeric_limits<double>::quiet_NaN();
};

QualityReport mesh_quality(const Mesh& mesh, const Submesh& submesh, const LumpedMeasures& lumped);

} // namespace vagflow

#endif
