// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "anisoeig/fem.hpp"
#include "anisoeig/geometry.hpp"

namespace anisoeig {

/// Gray-level image on the unit square, bilinear between pixel centers.
/// Pixel (0, 0) of the stored grid is the lower-left corner of the domain;
/// image files are read top row first and flipped accordingly.
class GraySurface {
 public:
  /// values[j * width + i] is the node at (i / (width - 1), j / (height - 1)), in [0, 1].
  GraySurface(int width, int height, std::vector<double> values);

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] double node(int i, int j) const {
    return values_[static_cast<std::size_t>(j) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(i)];
  }
  [[nodiscard]] double value(const Point2& p) const;
  /// Analytic gradient of the bilinear patch containing p; points on a grid
  /// line use the patch below/left of it.
  [[nodiscard]] Point2 gradient(const Point2& p) const;

 private:
  struct Patch {
    int i, j;
    double tx, ty;
  };
  [[nodiscard]] Patch patch(const Point2& p) const;

  int width_;
  int height_;
  std::vector<double> values_;
};

/// PGM reader (P2 or P5, any maxval up to 65535). Parse errors report the byte offset.
GraySurface read_pgm(std::istream& is);
GraySurface load_gray_surface(const std::string& path);
/// Writes 8-bit P5 with the top row first; values clamped to [0, 1].
void write_pgm(std::ostream& os, const GraySurface& surface);

/// Synthetic gray-level "pseudo-bunny": smoothed ellipses (body, head, ears,
/// eye) on a dark background, quantized to 8 bits.
GraySurface pseudo_bunny(int size = 128);

struct EigenProblem {
  std::string name;
  Geometry geometry;
  DiffusionField diffusion;
  DensityField density;
  /// Exact eigenvalues in nondecreasing order; empty when no analytic oracle exists.
  std::vector<double> exact;
};

EigenProblem problem_square();
EigenProblem problem_lshape();
EigenProblem problem_ring(double chi_parallel = 1e3, double chi_perp = 1.0);
EigenProblem problem_sector();
EigenProblem problem_laplace_beltrami(std::shared_ptr<const GraySurface> surface);
EigenProblem problem_perona_malik(std::shared_ptr<const GraySurface> surface);

/// Names accepted by make_problem.
const std::vector<std::string>& problem_names();
/// Builds a problem by name; image problems read image_path, or the
/// pseudo-bunny when it is empty. Unknown names raise a Config error listing
/// the valid ones.
EigenProblem make_problem(const std::string& name, const std::string& image_path = {});

/// pi^2 (m^2 + n^2), sorted, first count values.
std::vector<double> square_spectrum(int count);

struct SectorMode {
  int m = 0;          ///< Bessel order is 2m/3
  int zero_index = 0;
  double alpha = 0.0;
  double lambda = 0.0;
};
/// All zeros alpha of J_{2m/3}, m >= 1, below the count-th, sorted by alpha.
std::vector<SectorMode> sector_spectrum(int count);

double bessel_j(double nu, double x);
double bessel_zero(double nu, int j);

/// Reference eigenvalues stored as "j lambda" lines; '#' starts a comment.
std::vector<double> read_reference_spectrum(std::istream& is);
std::vector<double> load_reference_spectrum(const std::string& path);
/// Fixture lookup in the data directory: reference/<problem>.txt. Empty if absent.
std::vector<double> fixture_spectrum(const std::string& problem);
std::string data_directory();

}  // namespace anisoeig
