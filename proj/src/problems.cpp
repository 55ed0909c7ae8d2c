// SPDX-License-Identifier: Apache-2.0
#include "anisoeig/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "anisoeig/error.hpp"

namespace anisoeig {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// D = f(g) [[1 + py^2, -px py], [-px py, 1 + px^2]] with g = |grad psi|.
Sym2 surface_tensor(const Point2& grad, double power) {
  const double g2 = grad.x * grad.x + grad.y * grad.y;
  const double f = std::pow(1.0 + g2, -power);
  return Sym2{f * (1.0 + grad.y * grad.y), -f * grad.x * grad.y, f * (1.0 + grad.x * grad.x)};
}

Geometry unit_square() {
  return Geometry({Curve::segment({0, 0}, {1, 0}), Curve::segment({1, 0}, {1, 1}), Curve::segment({1, 1}, {0, 1}),
                   Curve::segment({0, 1}, {0, 0})});
}

class PgmReader {
 public:
  explicit PgmReader(std::istream& is) : is_(is) {}

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::Parse, "PGM: " + what + " at byte " + std::to_string(offset_));
  }

  int get() {
    const int c = is_.get();
    if (c != std::char_traits<char>::eof()) ++offset_;
    return c;
  }

  void skip_space_and_comments() {
    for (;;) {
      const int c = is_.peek();
      if (c == '#') {
        while (true) {
          const int d = get();
          if (d == '\n' || d == '\r' || d == std::char_traits<char>::eof()) break;
        }
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
        get();
      } else {
        return;
      }
    }
  }

  long number(const char* what) {
    skip_space_and_comments();
    long v = 0;
    int digits = 0;
    while (std::isdigit(is_.peek())) {
      v = v * 10 + (get() - '0');
      if (v > 1'000'000'000) error(std::string(what) + " too large");
      ++digits;
    }
    if (digits == 0) error(std::string("expected ") + what);
    return v;
  }

  std::size_t offset() const { return offset_; }

 private:
  std::istream& is_;
  std::size_t offset_ = 0;
};

double bessel_series(double nu, double x) {
  const double half = 0.5 * x;
  double term = std::pow(half, nu) / std::tgamma(nu + 1.0);
  double sum = term;
  const double q = -half * half;
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * (k + nu));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && k > half) break;
  }
  return sum;
}

// Miller's backward recurrence normalized by
// (x/2)^nu0 = sum_k (nu0 + 2k) Gamma(nu0 + k) / k! J_{nu0 + 2k}(x), 0 <= nu0 < 1.
double bessel_recurrence(double nu, double x) {
  const double nu0 = nu - std::floor(nu);
  const int target = static_cast<int>(std::lround(nu - nu0));
  int top = static_cast<int>(std::max(x, nu)) + 60;
  top += top % 2;
  double j_above = 0.0;
  double j_here = 1e-300;
  double j_target = 0.0;
  double norm = 0.0;
  // coefficient of J_{nu0+2k}; computed downward needs Gamma(nu0+k)/k! for each even index
  auto coef = [nu0](int k) {
    if (nu0 == 0.0) return k == 0 ? 1.0 : 2.0;
    return (nu0 + 2.0 * k) * std::exp(std::lgamma(nu0 + k) - std::lgamma(k + 1.0));
  };
  for (int n = top; n >= 0; --n) {
    if (n == target) j_target = j_here;
    if (n % 2 == 0) norm += coef(n / 2) * j_here;
    if (n == 0) break;
    const double j_below = 2.0 * (nu0 + n) / x * j_here - j_above;
    j_above = j_here;
    j_here = j_below;
    if (std::abs(j_here) > 1e250) {
      j_here *= 1e-250;
      j_above *= 1e-250;
      j_target *= 1e-250;
      norm *= 1e-250;
    }
  }
  return j_target * std::pow(0.5 * x, nu0) / norm;
}

}  // namespace

GraySurface::GraySurface(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  ANISOEIG_REQUIRE(width >= 2 && height >= 2, ErrorCode::InvalidInput, "GraySurface: need at least 2x2 nodes");
  ANISOEIG_REQUIRE(values_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                   ErrorCode::InvalidInput, "GraySurface: value count does not match the grid");
}

GraySurface::Patch GraySurface::patch(const Point2& p) const {
  const double fx = std::clamp(p.x, 0.0, 1.0) * (width_ - 1);
  const double fy = std::clamp(p.y, 0.0, 1.0) * (height_ - 1);
  const int i = std::clamp(static_cast<int>(std::ceil(fx)) - 1, 0, width_ - 2);
  const int j = std::clamp(static_cast<int>(std::ceil(fy)) - 1, 0, height_ - 2);
  return {i, j, fx - i, fy - j};
}

double GraySurface::value(const Point2& p) const {
  const Patch q = patch(p);
  const double v00 = node(q.i, q.j), v10 = node(q.i + 1, q.j);
  const double v01 = node(q.i, q.j + 1), v11 = node(q.i + 1, q.j + 1);
  return (1 - q.ty) * ((1 - q.tx) * v00 + q.tx * v10) + q.ty * ((1 - q.tx) * v01 + q.tx * v11);
}

Point2 GraySurface::gradient(const Point2& p) const {
  const Patch q = patch(p);
  const double v00 = node(q.i, q.j), v10 = node(q.i + 1, q.j);
  const double v01 = node(q.i, q.j + 1), v11 = node(q.i + 1, q.j + 1);
  return {((1 - q.ty) * (v10 - v00) + q.ty * (v11 - v01)) * (width_ - 1),
          ((1 - q.tx) * (v01 - v00) + q.tx * (v11 - v10)) * (height_ - 1)};
}

GraySurface read_pgm(std::istream& is) {
  PgmReader r(is);
  const int c0 = r.get();
  const int c1 = r.get();
  if (c0 != 'P' || (c1 != '2' && c1 != '5')) r.error("bad magic number (expected P2 or P5)");
  const bool binary = c1 == '5';
  const long width = r.number("width");
  const long height = r.number("height");
  const long maxval = r.number("maxval");
  if (width < 2 || height < 2) r.error("image must be at least 2x2");
  if (maxval < 1 || maxval > 65535) r.error("maxval out of range");
  const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<double> raster(count);
  if (binary) {
    const int ws = r.get();
    if (!(ws == ' ' || ws == '\t' || ws == '\n' || ws == '\r')) r.error("expected whitespace before payload");
    const bool wide = maxval > 255;
    for (std::size_t k = 0; k < count; ++k) {
      int v = r.get();
      if (v == std::char_traits<char>::eof()) r.error("short payload");
      if (wide) {
        const int lo = r.get();
        if (lo == std::char_traits<char>::eof()) r.error("short payload");
        v = v * 256 + lo;
      }
      if (v > maxval) r.error("sample exceeds maxval");
      raster[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      r.skip_space_and_comments();
      if (is.peek() == std::char_traits<char>::eof()) r.error("short payload");
      const long v = r.number("sample");
      if (v > maxval) r.error("sample exceeds maxval");
      raster[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  // flip so that grid row 0 is the bottom of the image
  std::vector<double> values(count);
  for (long row = 0; row < height; ++row)
    for (long col = 0; col < width; ++col)
      values[static_cast<std::size_t>((height - 1 - row) * width + col)] = raster[static_cast<std::size_t>(row * width + col)];
  return GraySurface(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

GraySurface load_gray_surface(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open image '" + path + "'");
  return read_pgm(in);
}

void write_pgm(std::ostream& os, const GraySurface& s) {
  os << "P5\n" << s.width() << ' ' << s.height() << "\n255\n";
  for (int row = 0; row < s.height(); ++row) {
    for (int i = 0; i < s.width(); ++i) {
      const double v = std::clamp(s.node(i, s.height() - 1 - row), 0.0, 1.0);
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
}

GraySurface pseudo_bunny(int size) {
  ANISOEIG_REQUIRE(size >= 16, ErrorCode::InvalidInput, "pseudo_bunny: size must be at least 16");
  struct Ellipse {
    Point2 c;
    double rx, ry, angle, gray;
  };
  // painted in order, later shapes replace earlier ones
  const Ellipse shapes[] = {
      {{0.45, 0.36}, 0.27, 0.19, 0.0, 0.75},    // body
      {{0.70, 0.56}, 0.13, 0.11, 0.0, 0.85},    // head
      {{0.66, 0.78}, 0.045, 0.16, 0.25, 0.65},  // ear
      {{0.78, 0.78}, 0.045, 0.15, -0.3, 0.65},  // ear
      {{0.20, 0.30}, 0.07, 0.07, 0.0, 0.95},    // tail
      {{0.74, 0.58}, 0.02, 0.02, 0.0, 0.10},    // eye
  };
  const double h = 1.0 / (size - 1);
  std::vector<double> values(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0.05);
  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      const Point2 p{i * h, j * h};
      double v = 0.05;
      for (const auto& e : shapes) {
        const double ca = std::cos(e.angle), sa = std::sin(e.angle);
        const Point2 d = p - e.c;
        const double u = (ca * d.x + sa * d.y) / e.rx;
        const double w = (-sa * d.x + ca * d.y) / e.ry;
        // approximate signed distance to the ellipse boundary, in pixels
        const double r = std::sqrt(u * u + w * w);
        const double dist = (r - 1.0) * std::min(e.rx, e.ry) / h;
        const double inside = 0.5 * (1.0 - std::tanh(dist / 0.75));
        v = inside * e.gray + (1.0 - inside) * v;
      }
      values[static_cast<std::size_t>(j * size + i)] = std::round(v * 255.0) / 255.0;
    }
  }
  return GraySurface(size, size, std::move(values));
}

std::vector<double> square_spectrum(int count) {
  std::vector<double> out;
  const int n = count + 2;
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b) out.push_back(kPi * kPi * (a * a + b * b));
  std::sort(out.begin(), out.end());
  out.resize(static_cast<std::size_t>(count));
  return out;
}

std::vector<SectorMode> sector_spectrum(int count) {
  ANISOEIG_REQUIRE(count >= 1 && count <= 40, ErrorCode::InvalidInput, "sector_spectrum: count must be in [1, 40]");
  // zeros of J_{2m/3} below 25 cover the first 40 eigenvalues
  const double limit = 25.0;
  std::vector<SectorMode> modes;
  for (int m = 1; m <= 15; ++m) {
    const double nu = 2.0 * m / 3.0;
    for (int z = 1;; ++z) {
      double alpha = 0.0;
      try {
        alpha = bessel_zero(nu, z);
      } catch (const Error&) {
        break;
      }
      if (alpha > limit) break;
      modes.push_back({m, z, alpha, alpha * alpha});
    }
  }
  std::sort(modes.begin(), modes.end(), [](const SectorMode& a, const SectorMode& b) { return a.alpha < b.alpha; });
  modes.resize(static_cast<std::size_t>(count));
  return modes;
}

double bessel_j(double nu, double x) {
  if (!(nu >= 0.0 && nu <= 10.0) || !(x >= 0.0 && x <= 50.0))
    fail(ErrorCode::Domain, "bessel_j: arguments outside nu in [0, 10], x in [0, 50]");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (x <= std::max(10.0, 2.0 * nu)) return bessel_series(nu, x);
  return bessel_recurrence(nu, x);
}

double bessel_zero(double nu, int j) {
  ANISOEIG_REQUIRE(j >= 1, ErrorCode::InvalidInput, "bessel_zero: index must be >= 1");
  const double step = 0.1;
  double a = step;
  double fa = bessel_j(nu, a);
  int found = 0;
  while (a + step <= 50.0 + 1e-12) {
    const double b = std::min(50.0, a + step);
    const double fb = bessel_j(nu, b);
    if (fa == 0.0 || (fa < 0.0) != (fb < 0.0)) {
      if (++found == j) {
        double lo = a, hi = b, flo = fa;
        if (fa == 0.0) return a;
        while (hi - lo > 1e-14 * std::max(1.0, hi)) {
          const double mid = 0.5 * (lo + hi);
          const double fm = bessel_j(nu, mid);
          if (fm == 0.0) return mid;
          if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      }
    }
    a = b;
    fa = fb;
  }
  fail(ErrorCode::Range, "bessel_zero: zero " + std::to_string(j) + " of J_" + std::to_string(nu) +
                             " not bracketed below x = 50");
}

EigenProblem problem_square() {
  return {"square", unit_square(), constant_diffusion(), constant_density(), square_spectrum(20)};
}

EigenProblem problem_lshape() {
  const std::vector<Point2> pts{{-1, -1}, {0, -1}, {0, 0}, {1, 0}, {1, 1}, {-1, 1}};
  std::vector<Curve> curves;
  for (std::size_t i = 0; i < pts.size(); ++i) curves.push_back(Curve::segment(pts[i], pts[(i + 1) % pts.size()]));
  return {"lshape", Geometry(std::move(curves)), constant_diffusion(), constant_density(), {}};
}

EigenProblem problem_ring(double chi_parallel, double chi_perp) {
  ANISOEIG_REQUIRE(chi_parallel > 0.0 && chi_perp > 0.0, ErrorCode::InvalidInput, "problem_ring: conductivities must be positive");
  const std::vector<Point2> pts{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  std::vector<Curve> curves;
  for (std::size_t i = 0; i < pts.size(); ++i) curves.push_back(Curve::segment(pts[i], pts[(i + 1) % pts.size()]));
  auto d = [chi_parallel, chi_perp](const Point2& p) {
    const double r = std::hypot(p.x, p.y);
    const Point2 b = r < 1e-8 ? Point2{1.0, 0.0} : Point2{-p.y / r, p.x / r};
    const double s = chi_parallel - chi_perp;
    return Sym2{chi_perp + s * b.x * b.x, s * b.x * b.y, chi_perp + s * b.y * b.y};
  };
  return {"ring", Geometry(std::move(curves)), d, constant_density(), {}};
}

EigenProblem problem_sector() {
  Geometry g({Curve::segment({0, 0}, {1, 0}), Curve::arc({0, 0}, 1.0, 0.0, 1.5 * kPi),
              Curve::segment({0, -1}, {0, 0})});
  std::vector<double> exact;
  for (const auto& m : sector_spectrum(20)) exact.push_back(m.lambda);
  return {"sector", std::move(g), constant_diffusion(), constant_density(), std::move(exact)};
}

EigenProblem problem_laplace_beltrami(std::shared_ptr<const GraySurface> surface) {
  ANISOEIG_REQUIRE(surface != nullptr, ErrorCode::InvalidInput, "problem_laplace_beltrami: no surface");
  auto d = [surface](const Point2& p) { return surface_tensor(surface->gradient(p), 0.5); };
  auto rho = [surface](const Point2& p) {
    const Point2 g = surface->gradient(p);
    return std::sqrt(1.0 + g.x * g.x + g.y * g.y);
  };
  return {"laplace-beltrami", unit_square(), d, rho, {}};
}

EigenProblem problem_perona_malik(std::shared_ptr<const GraySurface> surface) {
  ANISOEIG_REQUIRE(surface != nullptr, ErrorCode::InvalidInput, "problem_perona_malik: no surface");
  auto d = [surface](const Point2& p) { return surface_tensor(surface->gradient(p), 1.5); };
  return {"perona-malik", unit_square(), d, constant_density(), {}};
}

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"square", "lshape", "ring", "sector", "laplace-beltrami",
                                              "perona-malik"};
  return names;
}

EigenProblem make_problem(const std::string& name, const std::string& image_path) {
  auto surface = [&]() -> std::shared_ptr<const GraySurface> {
    if (image_path.empty()) return std::make_shared<const GraySurface>(pseudo_bunny());
    return std::make_shared<const GraySurface>(load_gray_surface(image_path));
  };
  if (name == "square") return problem_square();
  if (name == "lshape") return problem_lshape();
  if (name == "ring") return problem_ring();
  if (name == "sector") return problem_sector();
  if (name == "laplace-beltrami") return problem_laplace_beltrami(surface());
  if (name == "perona-malik") return problem_perona_malik(surface());
  std::string list;
  for (const auto& n : problem_names()) list += (list.empty() ? "" : ", ") + n;
  fail(ErrorCode::Config, "unknown problem '" + name + "'; valid names: " + list);
}

std::vector<double> read_reference_spectrum(std::istream& is) {
  std::vector<double> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    int j = 0;
    double lambda = 0.0;
    if (!(ls >> j)) continue;
    if (!(ls >> lambda) || j != static_cast<int>(out.size()) + 1)
      fail(ErrorCode::Parse, "reference spectrum: malformed line " + std::to_string(line_no));
    out.push_back(lambda);
  }
  return out;
}

std::vector<double> load_reference_spectrum(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open reference spectrum '" + path + "'");
  return read_reference_spectrum(in);
}

std::string data_directory() {
#ifdef ANISOEIG_DATA_DIR
  return ANISOEIG_DATA_DIR;
#else
  return "data";
#endif
}

std::vector<double> fixture_spectrum(const std::string& problem) {
  std::ifstream in(data_directory() + "/reference/" + problem + ".txt");
  if (!in) return {};
  return read_reference_spectrum(in);
}

}  // namespace anisoeig
