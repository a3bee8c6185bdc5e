#include "helios/medium.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "helios/error.hpp"

namespace helios {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Per-axis interpolation stencil: first node index and weights/derivative
// weights for nodes first..first+3 (cubic) or first..first+1 (linear).
struct Stencil {
  long first = 0;
  std::array<double, 4> w{};
  std::array<double, 4> dw{};
  int size = 4;
};

Stencil make_stencil(double x, double origin, double h, std::size_t n, Interpolation interp) {
  const double s = (x - origin) / h;
  long i = static_cast<long>(std::floor(s));
  i = std::clamp<long>(i, 0, static_cast<long>(n) - 2);
  const double t = s - static_cast<double>(i);
  Stencil st;
  if (interp == Interpolation::linear) {
    st.first = i;
    st.size = 2;
    st.w = {1.0 - t, t, 0.0, 0.0};
    st.dw = {-1.0 / h, 1.0 / h, 0.0, 0.0};
    return st;
  }
  // Catmull-Rom: interpolating, C1 across cells.
  const double t2 = t * t, t3 = t2 * t;
  st.first = i - 1;
  st.w = {0.5 * (-t3 + 2.0 * t2 - t), 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
          0.5 * (-3.0 * t3 + 4.0 * t2 + t), 0.5 * (t3 - t2)};
  st.dw = {0.5 * (-3.0 * t2 + 4.0 * t - 1.0) / h, 0.5 * (9.0 * t2 - 10.0 * t) / h,
           0.5 * (-9.0 * t2 + 8.0 * t + 1.0) / h, 0.5 * (3.0 * t2 - 2.0 * t) / h};
  return st;
}

// Sample with linear ghost extrapolation one node beyond each face.
double ghost_sample(const GridMedium& g, long i, long j, long k) {
  auto axis = [](long idx, std::size_t n, long& a, long& b, double& wa, double& wb) {
    const long last = static_cast<long>(n) - 1;
    if (idx < 0) {
      a = 0; b = 1; wa = 2.0; wb = -1.0;
    } else if (idx > last) {
      a = last; b = last - 1; wa = 2.0; wb = -1.0;
    } else {
      a = idx; b = idx; wa = 1.0; wb = 0.0;
    }
  };
  long ia, ib, ja, jb, ka, kb;
  double wia, wib, wja, wjb, wka, wkb;
  axis(i, g.dims[0], ia, ib, wia, wib);
  axis(j, g.dims[1], ja, jb, wja, wjb);
  axis(k, g.dims[2], ka, kb, wka, wkb);
  double v = 0.0;
  const long is[2] = {ia, ib}, js[2] = {ja, jb}, ks[2] = {ka, kb};
  const double wi[2] = {wia, wib}, wj[2] = {wja, wjb}, wk[2] = {wka, wkb};
  for (int a = 0; a < 2; ++a) {
    if (wi[a] == 0.0) continue;
    for (int b = 0; b < 2; ++b) {
      if (wj[b] == 0.0) continue;
      for (int c = 0; c < 2; ++c) {
        if (wk[c] == 0.0) continue;
        v += wi[a] * wj[b] * wk[c] * g.at(is[a], js[b], ks[c]);
      }
    }
  }
  return v;
}

struct GridEval {
  double value;
  Vec3 gradient;
};

GridEval grid_eval(const GridMedium& g, const Vec3& q) {
  Stencil sx = make_stencil(q.x(), g.origin.x(), g.spacing.x(), g.dims[0], g.interpolation);
  Stencil sy = make_stencil(q.y(), g.origin.y(), g.spacing.y(), g.dims[1], g.interpolation);
  Stencil sz = make_stencil(q.z(), g.origin.z(), g.spacing.z(), g.dims[2], g.interpolation);
  GridEval out{0.0, Vec3::Zero()};
  for (int c = 0; c < sz.size; ++c) {
    for (int b = 0; b < sy.size; ++b) {
      const double wyz = sy.w[b] * sz.w[c];
      const double dyz = sy.dw[b] * sz.w[c];
      const double ydz = sy.w[b] * sz.dw[c];
      if (wyz == 0.0 && dyz == 0.0 && ydz == 0.0) continue;
      for (int a = 0; a < sx.size; ++a) {
        const double f = ghost_sample(g, sx.first + a, sy.first + b, sz.first + c);
        out.value += sx.w[a] * wyz * f;
        out.gradient.x() += sx.dw[a] * wyz * f;
        out.gradient.y() += sx.w[a] * dyz * f;
        out.gradient.z() += sx.w[a] * ydz * f;
      }
    }
  }
  return out;
}

double analytic_n(const MediumKind& kind, const Vec3& q) {
  return std::visit(
      overloaded{
          [](const HomogeneousMedium& m) { return m.n0; },
          [&](const LinearMedium& m) { return m.n0 + m.gradient.dot(q); },
          [&](const FisheyeMedium& m) { return m.n0 / (1.0 + q.squaredNorm() / (m.radius * m.radius)); },
          [&](const ParabolicGrinMedium& m) {
            const Vec3 d = q - m.origin;
            const Vec3 perp = d - m.axis * m.axis.dot(d);
            return m.n0 * (1.0 - 0.5 * m.kappa * perp.squaredNorm());
          },
          [&](const GridMedium& g) { return grid_eval(g, q).value; },
      },
      kind);
}

}  // namespace

Box GridMedium::bounds() const {
  Box b;
  b.lo = origin;
  for (int a = 0; a < 3; ++a) b.hi[a] = origin[a] + spacing[a] * static_cast<double>(dims[a] - 1);
  return b;
}

RefractiveIndexField::RefractiveIndexField(MediumKind kind, Box domain, double speed_of_light)
    : kind_(std::move(kind)), domain_(domain), c_(speed_of_light) {
  if (!(c_ > 0.0) || !std::isfinite(c_)) {
    throw Error(ErrorCode::invalid_argument, "speed of light must be positive");
  }
  if (auto* g = std::get_if<GridMedium>(&kind_)) {
    for (int a = 0; a < 3; ++a) {
      if (g->dims[a] < 2) throw Error(ErrorCode::invalid_argument, "grid needs >= 2 nodes per axis");
      if (!(g->spacing[a] > 0.0)) throw Error(ErrorCode::invalid_argument, "grid spacing must be positive");
    }
    if (g->values.size() != g->dims[0] * g->dims[1] * g->dims[2]) {
      throw Error(ErrorCode::invalid_argument, "grid sample count does not match dims");
    }
    for (double v : g->values) {
      if (!(v >= kMinIndex)) {
        throw Error(ErrorCode::non_positive_index, fmt::format("grid sample {} below n_min", v));
      }
    }
    domain_ = g->bounds();
    return;
  }
  if (!((domain_.hi.array() > domain_.lo.array()).all())) {
    throw Error(ErrorCode::invalid_argument, "domain box must have positive extent");
  }
  if (auto* f = std::get_if<FisheyeMedium>(&kind_); f && !(f->radius > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "fish-eye radius must be positive");
  }
  if (auto* pg = std::get_if<ParabolicGrinMedium>(&kind_)) {
    if (!(pg->axis.norm() > 0.0)) throw Error(ErrorCode::invalid_argument, "GRIN axis must be nonzero");
    pg->axis.normalize();
  }
  // Every analytic profile attains its minimum over a box on the lattice
  // corners or faces, so a 17^3 lattice including the faces is sufficient.
  constexpr int m = 16;
  const Vec3 ext = domain_.extent();
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) {
        const Vec3 q = domain_.lo + Vec3(ext.x() * i / m, ext.y() * j / m, ext.z() * k / m);
        const double v = analytic_n(kind_, q);
        if (!(v >= kMinIndex)) {
          throw Error(ErrorCode::non_positive_index,
                      fmt::format("n = {} at ({}, {}, {})", v, q.x(), q.y(), q.z()));
        }
      }
}

RefractiveIndexField RefractiveIndexField::homogeneous(double n0, Box domain, double c) {
  return {HomogeneousMedium{n0}, domain, c};
}
RefractiveIndexField RefractiveIndexField::linear(double n0, const Vec3& gradient, Box domain, double c) {
  return {LinearMedium{n0, gradient}, domain, c};
}
RefractiveIndexField RefractiveIndexField::fisheye(double n0, double radius, Box domain, double c) {
  return {FisheyeMedium{n0, radius}, domain, c};
}
RefractiveIndexField RefractiveIndexField::parabolic_grin(double n0, double kappa, const Vec3& axis,
                                                          Box domain, double c) {
  return {ParabolicGrinMedium{n0, kappa, axis, Vec3::Zero()}, domain, c};
}
RefractiveIndexField RefractiveIndexField::grid(GridMedium samples, double c) {
  return {std::move(samples), Box{}, c};
}

void RefractiveIndexField::check_inside(const Vec3& q) const {
  if (!domain_.contains(q)) {
    throw Error(ErrorCode::out_of_domain, fmt::format("q = ({}, {}, {})", q.x(), q.y(), q.z()));
  }
}

double RefractiveIndexField::n(const Vec3& q) const {
  check_inside(q);
  return analytic_n(kind_, q);
}

Vec3 RefractiveIndexField::gradient(const Vec3& q) const {
  check_inside(q);
  return std::visit(
      overloaded{
          [](const HomogeneousMedium&) -> Vec3 { return Vec3::Zero(); },
          [](const LinearMedium& m) -> Vec3 { return m.gradient; },
          [&](const FisheyeMedium& m) -> Vec3 {
            const double a2 = m.radius * m.radius;
            const double s = 1.0 + q.squaredNorm() / a2;
            return (-2.0 * m.n0 / (a2 * s * s)) * q;
          },
          [&](const ParabolicGrinMedium& m) -> Vec3 {
            const Vec3 d = q - m.origin;
            const Vec3 perp = d - m.axis * m.axis.dot(d);
            return -m.n0 * m.kappa * perp;
          },
          [&](const GridMedium& g) -> Vec3 { return grid_eval(g, q).gradient; },
      },
      kind_);
}

Mat3 RefractiveIndexField::hessian(const Vec3& q) const {
  check_inside(q);
  return std::visit(
      overloaded{
          [](const HomogeneousMedium&) -> Mat3 { return Mat3::Zero(); },
          [](const LinearMedium&) -> Mat3 { return Mat3::Zero(); },
          [&](const FisheyeMedium& m) -> Mat3 {
            const double a2 = m.radius * m.radius;
            const double s = 1.0 + q.squaredNorm() / a2;
            return (-2.0 * m.n0 / (a2 * s * s)) * Mat3::Identity() +
                   (8.0 * m.n0 / (a2 * a2 * s * s * s)) * (q * q.transpose());
          },
          [&](const ParabolicGrinMedium& m) -> Mat3 {
            return -m.n0 * m.kappa * (Mat3::Identity() - m.axis * m.axis.transpose());
          },
          [&](const GridMedium& g) -> Mat3 {
            Mat3 h;
            for (int a = 0; a < 3; ++a) {
              const double step = 1e-4 * g.spacing[a];
              Vec3 qp = q, qm = q;
              qp[a] = std::min(q[a] + step, domain_.hi[a]);
              qm[a] = std::max(q[a] - step, domain_.lo[a]);
              h.col(a) = (grid_eval(g, qp).gradient - grid_eval(g, qm).gradient) / (qp[a] - qm[a]);
            }
            return 0.5 * (h + h.transpose());
          },
      },
      kind_);
}

std::string RefractiveIndexField::kind_name() const {
  return std::visit(overloaded{
                        [](const HomogeneousMedium&) { return std::string("homogeneous"); },
                        [](const LinearMedium&) { return std::string("linear"); },
                        [](const FisheyeMedium&) { return std::string("fisheye"); },
                        [](const ParabolicGrinMedium&) { return std::string("parabolic_grin"); },
                        [](const GridMedium&) { return std::string("grid"); },
                    },
                    kind_);
}

double estimate_scale_parameter(const RefractiveIndexField& field, double wavelength,
                                int samples_per_axis) {
  if (!(wavelength > 0.0)) throw Error(ErrorCode::invalid_argument, "wavelength must be positive");
  if (samples_per_axis < 1) throw Error(ErrorCode::invalid_argument, "need at least one sample per axis");
  if (field.is_homogeneous()) return 0.0;
  const Box& box = field.domain();
  const Vec3 ext = box.extent();
  const int m = samples_per_axis;
  double d_n = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) {
        const Vec3 q = box.lo + Vec3(ext.x() * i / m, ext.y() * j / m, ext.z() * k / m);
        const double g = field.gradient(q).norm();
        if (g > 0.0) d_n = std::min(d_n, field.n(q) / g);
      }
  return std::isfinite(d_n) ? wavelength / d_n : 0.0;
}

GridMedium load_grid_medium(const std::filesystem::path& raw_file, const std::filesystem::path& header_file,
                            Interpolation interpolation) {
  std::ifstream hin(header_file);
  if (!hin) throw Error(ErrorCode::invalid_argument, "cannot open grid header " + header_file.string());
  nlohmann::json h;
  try {
    hin >> h;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("grid header: ") + e.what());
  }
  GridMedium g;
  g.interpolation = interpolation;
  try {
    for (int a = 0; a < 3; ++a) {
      g.dims[a] = h.at("dims").at(a).get<std::size_t>();
      g.origin[a] = h.at("origin").at(a).get<double>();
      g.spacing[a] = h.at("spacing").at(a).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("grid header: ") + e.what());
  }
  const std::size_t count = g.dims[0] * g.dims[1] * g.dims[2];
  std::ifstream in(raw_file, std::ios::binary);
  if (!in) throw Error(ErrorCode::invalid_argument, "cannot open grid samples " + raw_file.string());
  std::vector<unsigned char> bytes(count * 8);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw Error(ErrorCode::invalid_argument, "grid sample file shorter than dims imply");
  }
  g.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[i * 8 + b];
    g.values[i] = std::bit_cast<double>(bits);
  }
  return g;
}

void save_grid_medium(const GridMedium& grid, const std::filesystem::path& raw_file,
                      const std::filesystem::path& header_file) {
  std::ofstream out(raw_file, std::ios::binary);
  for (double v : grid.values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  nlohmann::json h;
  h["dims"] = {grid.dims[0], grid.dims[1], grid.dims[2]};
  h["origin"] = {grid.origin.x(), grid.origin.y(), grid.origin.z()};
  h["spacing"] = {grid.spacing.x(), grid.spacing.y(), grid.spacing.z()};
  std::ofstream(header_file) << h.dump(2) << "\n";
}

}  // namespace helios
