#include "mgvol/covariance.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "mgvol/error.hpp"

namespace mgvol {

namespace {

// GSLIB-style rotation: azimuth clockwise from north, dip, rake.
Eigen::Matrix3d rotation(const std::array<double, 3>& angles) {
  const double deg = std::numbers::pi / 180.0;
  const double azimuth = angles[0];
  const double alpha = (azimuth >= 0.0 && azimuth < 270.0) ? (90.0 - azimuth) * deg
                                                           : (450.0 - azimuth) * deg;
  const double beta = -angles[1] * deg;
  const double theta = angles[2] * deg;
  const double sa = std::sin(alpha), ca = std::cos(alpha);
  const double sb = std::sin(beta), cb = std::cos(beta);
  const double st = std::sin(theta), ct = std::cos(theta);
  Eigen::Matrix3d r;
  r << cb * ca, cb * sa, -sb,
      -ct * sa + st * sb * ca, ct * ca + st * sb * sa, st * cb,
      st * sa + ct * sb * ca, -st * ca + ct * sb * sa, ct * cb;
  return r;
}

double unit_correlation(StructureKind kind, double r) {
  switch (kind) {
    case StructureKind::spherical:
      return r < 1.0 ? 1.0 - r * (1.5 - 0.5 * r * r) : 0.0;
    case StructureKind::exponential:
      return std::exp(-3.0 * r);
    case StructureKind::gaussian:
      return std::exp(-3.0 * r * r);
    case StructureKind::nugget:
      break;
  }
  return 0.0;
}

const char* kind_name(StructureKind kind) {
  switch (kind) {
    case StructureKind::nugget: return "nugget";
    case StructureKind::spherical: return "sph";
    case StructureKind::exponential: return "exp";
    case StructureKind::gaussian: return "gau";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::vector<Structure> parse() {
    std::vector<Structure> out;
    skip_space();
    if (done()) fail("empty covariance model");
    while (true) {
      out.push_back(structure());
      skip_space();
      if (done()) break;
      expect('+');
    }
    return out;
  }

 private:
  Structure structure() {
    Structure s;
    s.sill = number();
    s.kind = kind(identifier());
    skip_space();
    if (s.kind == StructureKind::nugget) {
      if (peek() == '(') fail("nugget takes no range");
      return s;
    }
    expect('(');
    std::vector<double> ranges{number()};
    skip_space();
    while (peek() == ',') {
      ++pos_;
      ranges.push_back(number());
      skip_space();
    }
    if (ranges.size() > 3) fail("at most three ranges");
    for (std::size_t k = 0; k < 3; ++k) s.ranges[k] = ranges[std::min(k, ranges.size() - 1)];
    if (peek() == ';') {
      ++pos_;
      for (std::size_t k = 0; k < 3; ++k) {
        if (k > 0) expect(',');
        s.angles[k] = number();
        skip_space();
      }
    }
    expect(')');
    return s;
  }

  double number() {
    skip_space();
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("expected a number");
    pos_ += std::size_t(end - rest.c_str());
    return v;
  }

  std::string identifier() {
    skip_space();
    std::string id;
    while (!done() && std::isalpha(static_cast<unsigned char>(peek())))
      id.push_back(char(std::tolower(static_cast<unsigned char>(text_[pos_++]))));
    if (id.empty()) fail("expected a structure name");
    return id;
  }

  StructureKind kind(const std::string& id) {
    if (id == "nugget" || id == "nug") return StructureKind::nugget;
    if (id == "sph" || id == "spherical") return StructureKind::spherical;
    if (id == "exp" || id == "exponential") return StructureKind::exponential;
    if (id == "gau" || id == "gaussian") return StructureKind::gaussian;
    fail("unknown structure '" + id + "'");
  }

  void expect(char c) {
    skip_space();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_space() {
    while (!done() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("covariance '" + std::string(text_) + "' at offset " +
                      std::to_string(pos_) + ": " + msg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

CovarianceModel::CovarianceModel(std::vector<Structure> structures, double duplicate_tolerance)
    : structures_(std::move(structures)), duplicate_tolerance_(duplicate_tolerance) {
  if (structures_.empty()) throw ConfigError("covariance model has no structures");
  for (const auto& s : structures_) {
    if (!(s.sill >= 0.0) || !std::isfinite(s.sill))
      throw ConfigError("structure sill must be finite and >= 0");
    Compiled c{s.kind, s.sill, Eigen::Matrix3d::Zero()};
    if (s.kind != StructureKind::nugget) {
      for (double r : s.ranges)
        if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("structure range must be > 0");
      c.transform = rotation(s.angles);
      for (int k = 0; k < 3; ++k) c.transform.row(k) /= s.ranges[std::size_t(k)];
    }
    compiled_.push_back(c);
    total_sill_ += s.sill;
  }
}

CovarianceModel CovarianceModel::parse(std::string_view text) {
  return CovarianceModel(Parser(text).parse());
}

double CovarianceModel::operator()(const Point& a, const Point& b) const {
  const Eigen::Vector3d h(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
  const bool same = h.norm() <= duplicate_tolerance_;
  double c = 0.0;
  for (const auto& s : compiled_) {
    if (s.kind == StructureKind::nugget) {
      if (same) c += s.sill;
    } else {
      c += s.sill * unit_correlation(s.kind, (s.transform * h).norm());
    }
  }
  return c;
}

std::string CovarianceModel::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < structures_.size(); ++i) {
    const auto& s = structures_[i];
    if (i > 0) os << " + ";
    os << s.sill << ' ' << kind_name(s.kind);
    if (s.kind == StructureKind::nugget) continue;
    os << '(' << s.ranges[0] << ',' << s.ranges[1] << ',' << s.ranges[2];
    if (s.angles != std::array<double, 3>{0.0, 0.0, 0.0})
      os << "; " << s.angles[0] << ',' << s.angles[1] << ',' << s.angles[2];
    os << ')';
  }
  return os.str();
}

double cov(const CovarianceModel& model, const Point& a, const Point& b) { return model(a, b); }

Eigen::MatrixXd cov_matrix(const CovarianceModel& model, std::span<const Point> points) {
  const auto n = Eigen::Index(points.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = model.total_sill();
    for (Eigen::Index j = 0; j < i; ++j) {
      if (distance(points[std::size_t(i)], points[std::size_t(j)]) <= model.duplicate_tolerance())
        throw DuplicatePoints("points " + std::to_string(j) + " and " + std::to_string(i) +
                              " coincide");
      c(i, j) = c(j, i) = model(points[std::size_t(i)], points[std::size_t(j)]);
    }
  }
  return c;
}

Eigen::MatrixXd cross_cov_matrix(const CovarianceModel& model, std::span<const Point> rows,
                                 std::span<const Point> cols) {
  Eigen::MatrixXd c(Eigen::Index(rows.size()), Eigen::Index(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i)
      c(Eigen::Index(i), Eigen::Index(j)) = model(rows[i], cols[j]);
  return c;
}

bool cholesky_with_jitter(const Eigen::MatrixXd& matrix, double scale, JitteredCholesky& out) {
  const double s = scale > 0.0 ? scale : 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (double jitter = 0.0; jitter <= 1e-6 * s * (1.0 + 1e-9);
       jitter = (jitter == 0.0 ? 1e-10 * s : jitter * 10.0)) {
    if (jitter == 0.0) {
      llt.compute(matrix);
    } else {
      Eigen::MatrixXd shifted = matrix;
      shifted.diagonal().array() += jitter;
      llt.compute(shifted);
    }
    if (llt.info() == Eigen::Success) {
      out.lower = llt.matrixL();
      out.jitter = jitter;
      return true;
    }
  }
  return false;
}

}  // namespace mgvol
