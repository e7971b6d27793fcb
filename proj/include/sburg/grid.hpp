#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sburg {

/// Uniform grid of interior nodes on (0, pi); the Dirichlet boundary values
/// at x=0 and x=pi are never stored (identically zero).
struct Grid {
  int n_interior = 0;
  double dx = 0.0;

  explicit Grid(int n) : n_interior(n) {
    if (n < 1) throw std::invalid_argument("Grid: need at least one interior node");
    dx = M_PI / (n + 1);
  }

  double x(int i) const { return dx * (i + 1); }  // i in [0, n_interior)
};

/// Field values u(x_i, t) at the interior nodes.
struct FieldState {
  std::vector<double> u;
  double time = 0.0;
};

/// Amplitude of the sin x mode: a = (2/pi) * sum_i u_i sin(x_i) dx
/// (composite trapezoid; boundary terms vanish). On this grid the rule is
/// the discrete sine transform, so pure modes project exactly.
inline double project_amplitude(const FieldState& field, const Grid& grid) {
  double s = 0.0;
  for (int i = 0; i < grid.n_interior; ++i) s += field.u[i] * std::sin(grid.x(i));
  return 2.0 / M_PI * s * grid.dx;
}

/// Projection onto sin(k x); k=1 is project_amplitude.
inline double project_mode(const FieldState& field, const Grid& grid, int k) {
  double s = 0.0;
  for (int i = 0; i < grid.n_interior; ++i) s += field.u[i] * std::sin(k * grid.x(i));
  return 2.0 / M_PI * s * grid.dx;
}

inline FieldState make_mode_field(const Grid& grid, int k, double amplitude) {
  FieldState f;
  f.u.resize(grid.n_interior);
  for (int i = 0; i < grid.n_interior; ++i)
    f.u[i] = amplitude * std::sin(k * grid.x(i));
  return f;
}

}  // namespace sburg
