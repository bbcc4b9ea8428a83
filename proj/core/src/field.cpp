#include "flowmap/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "flowmap/error.hpp"
#include "flowmap/npy.hpp"

namespace flowmap {
namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Parses "k1=v1,k2=v2" into a setter callback.
template <typename Setter>
void parse_params(std::string_view params, Setter&& set) {
  while (!params.empty()) {
    auto comma = params.find(',');
    std::string_view item = params.substr(0, comma);
    auto eq = item.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("field parameter needs key=value");
    const std::string key(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size()) throw InvalidArgument("bad number for field parameter " + key);
    set(key, v);
    if (comma == std::string_view::npos) break;
    params.remove_prefix(comma + 1);
  }
}

}  // namespace

Point DoubleGyre::velocity(const Point& p, double t) const {
  const double x = p[0], y = p[1];
  const double s = std::sin(omega * t);
  const double a = epsilon * s;
  const double b = 1.0 - 2.0 * epsilon * s;
  const double f = a * x * x + b * x;
  const double dfdx = 2.0 * a * x + b;
  return {-kPi * amplitude * std::sin(kPi * f) * std::cos(kPi * y),
          kPi * amplitude * std::cos(kPi * f) * std::sin(kPi * y) * dfdx};
}

Bounds DoubleGyre::domain() const { return {{0.0, 0.0}, {2.0, 1.0}}; }

Point AbcFlow::velocity(const Point& p, double) const {
  const double x = p[0], y = p[1], z = p[2];
  return {a * std::sin(z) + c * std::cos(y), b * std::sin(x) + a * std::cos(z),
          c * std::sin(y) + b * std::cos(x)};
}

Bounds AbcFlow::domain() const {
  const double tau = 2.0 * kPi;
  return {{0.0, 0.0, 0.0}, {tau, tau, tau}};
}

GriddedField::GriddedField(Bounds bounds, std::array<int, 3> resolution, double t0, double dt,
                           std::vector<std::vector<double>> frames)
    : bounds_(bounds), res_(resolution), t0_(t0), dt_(dt) {
  const int dim = bounds.dim();
  if (dim == 2) res_[2] = 1;
  std::size_t nodes = 1;
  for (int k = 0; k < dim; ++k) {
    if (res_[static_cast<std::size_t>(k)] < 1) throw InvalidArgument("grid resolution must be >= 1");
    nodes *= static_cast<std::size_t>(res_[static_cast<std::size_t>(k)]);
  }
  if (frames.empty()) throw InvalidArgument("gridded field needs at least one frame");
  if (frames.size() > 1 && !(dt > 0.0)) throw InvalidArgument("gridded field needs dt > 0");
  for (const auto& f : frames) {
    if (f.size() != nodes * static_cast<std::size_t>(dim))
      throw InvalidArgument("gridded frame has wrong number of values");
    for (double v : f)
      if (!std::isfinite(v)) throw InvalidArgument("gridded frame contains non-finite values");
  }
  frames_ = std::make_shared<const std::vector<std::vector<double>>>(std::move(frames));
}

GriddedField GriddedField::sample(Bounds bounds, std::array<int, 3> resolution, int frame_count,
                                  double t0, double dt,
                                  const std::function<Point(const Point&, double)>& fn) {
  const int dim = bounds.dim();
  if (dim == 2) resolution[2] = 1;
  std::vector<std::vector<double>> frames;
  for (int f = 0; f < frame_count; ++f) {
    const double t = t0 + f * dt;
    std::vector<double> frame;
    for (int k = 0; k < resolution[2]; ++k)
      for (int j = 0; j < resolution[1]; ++j)
        for (int i = 0; i < resolution[0]; ++i) {
          Point p(dim);
          const int idx[3] = {i, j, k};
          for (int a = 0; a < dim; ++a) {
            const int r = resolution[static_cast<std::size_t>(a)];
            p[a] = r == 1 ? bounds.lo()[a]
                          : bounds.lo()[a] + bounds.extent(a) * idx[a] / double(r - 1);
          }
          const Point v = fn(p, t);
          for (int a = 0; a < dim; ++a) frame.push_back(v[a]);
        }
    frames.push_back(std::move(frame));
  }
  return GriddedField(bounds, resolution, t0, dt, std::move(frames));
}

GriddedField GriddedField::load(const std::filesystem::path& descriptor) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(npy::slurp(descriptor));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(descriptor.string() + ": " + e.what());
  }
  try {
    const auto dims = j.at("dims").get<std::vector<int>>();
    const auto lo = j.at("bounds").at(0).get<std::vector<double>>();
    const auto hi = j.at("bounds").at(1).get<std::vector<double>>();
    const double dt = j.value("dt", 1.0);
    const double t0 = j.value("t0", 0.0);
    const auto files = j.at("files").get<std::vector<std::string>>();
    const int dim = static_cast<int>(dims.size());
    if ((dim != 2 && dim != 3) || lo.size() != dims.size() || hi.size() != dims.size())
      throw ParseError("descriptor dims/bounds must be 2D or 3D and consistent");
    std::array<int, 3> res{1, 1, 1};
    for (int k = 0; k < dim; ++k) res[static_cast<std::size_t>(k)] = dims[static_cast<std::size_t>(k)];

    std::vector<std::size_t> want;
    for (int k = dim - 1; k >= 0; --k) want.push_back(static_cast<std::size_t>(dims[static_cast<std::size_t>(k)]));
    want.push_back(static_cast<std::size_t>(dim));

    std::vector<std::vector<double>> frames;
    for (const auto& name : files) {
      const auto path = descriptor.parent_path() / name;
      const npy::Array a = npy::read(path);
      if (a.shape != want) throw ParseError(path.string() + ": unexpected array shape");
      auto values = a.to_doubles();
      for (double v : values)
        if (!std::isfinite(v)) throw ParseError(path.string() + ": NaN or Inf in velocity data");
      frames.push_back(std::move(values));
    }
    GriddedField g(Bounds(Point::from_span(lo), Point::from_span(hi)), res, t0, dt, std::move(frames));
    g.origin = descriptor.string();
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(descriptor.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(descriptor.string() + ": " + e.what());
  }
}

double GriddedField::t_end() const {
  if (frames_->size() == 1) return std::numeric_limits<double>::infinity();
  return t0_ + dt_ * static_cast<double>(frames_->size() - 1);
}

Point GriddedField::node(int frame, std::array<int, 3> ijk) const {
  const auto& f = (*frames_)[static_cast<std::size_t>(frame)];
  const int dim = bounds_.dim();
  const std::size_t idx =
      ((static_cast<std::size_t>(ijk[2]) * res_[1] + ijk[1]) * res_[0] + ijk[0]) * dim;
  Point v(dim);
  for (int a = 0; a < dim; ++a) v[a] = f[idx + a];
  return v;
}

Point GriddedField::spatial(const std::vector<double>& frame, const Point& p) const {
  const int dim = bounds_.dim();
  int base[3] = {0, 0, 0};
  double frac[3] = {0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    const int r = res_[static_cast<std::size_t>(a)];
    if (r == 1) continue;
    double u = (p[a] - bounds_.lo()[a]) / bounds_.extent(a) * (r - 1);
    u = std::clamp(u, 0.0, static_cast<double>(r - 1));
    int i = std::min(static_cast<int>(std::floor(u)), r - 2);
    base[a] = i;
    frac[a] = u - i;
  }
  Point v(dim);
  const int corners = 1 << dim;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    int ijk[3] = {0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      const bool up = (c >> a) & 1;
      const bool flat = res_[static_cast<std::size_t>(a)] == 1;
      if (up && flat) {
        w = 0.0;
        break;
      }
      ijk[a] = base[a] + (up ? 1 : 0);
      w *= up ? frac[a] : 1.0 - frac[a];
    }
    if (w == 0.0) continue;
    const std::size_t idx =
        ((static_cast<std::size_t>(ijk[2]) * res_[1] + ijk[1]) * res_[0] + ijk[0]) * dim;
    for (int a = 0; a < dim; ++a) v[a] += w * frame[idx + a];
  }
  return v;
}

Point GriddedField::velocity(const Point& p, double t) const {
  const auto& frames = *frames_;
  if (frames.size() == 1) return spatial(frames[0], p);
  const double s = (t - t0_) / dt_;
  const double last = static_cast<double>(frames.size() - 1);
  constexpr double slack = 1e-9;
  if (!(s >= -slack && s <= last + slack)) throw TimeOutOfRange();
  const double sc = std::clamp(s, 0.0, last);
  const auto k = std::min(static_cast<std::size_t>(sc), frames.size() - 2);
  const double w = sc - static_cast<double>(k);
  Point v0 = spatial(frames[k], p);
  if (w == 0.0) return v0;
  const Point v1 = spatial(frames[k + 1], p);
  return v0 * (1.0 - w) + v1 * w;
}

Point Field::velocity(const Point& p, double t) const {
  return std::visit([&](const auto& f) { return f.velocity(p, t); }, v_);
}

Bounds Field::domain() const {
  return std::visit([](const auto& f) -> Bounds { return f.domain(); }, v_);
}

std::string Field::describe() const {
  if (auto* dg = std::get_if<DoubleGyre>(&v_))
    return "double-gyre:A=" + fmt17(dg->amplitude) + ",omega=" + fmt17(dg->omega) +
           ",eps=" + fmt17(dg->epsilon);
  if (auto* abc = std::get_if<AbcFlow>(&v_))
    return "abc:A=" + fmt17(abc->a) + ",B=" + fmt17(abc->b) + ",C=" + fmt17(abc->c);
  const auto& g = std::get<GriddedField>(v_);
  return "gridded:" + (g.origin.empty() ? std::string("<memory>") : g.origin);
}

Field parse_field(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view params =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (name == "double-gyre" || name == "doublegyre") {
    DoubleGyre dg;
    parse_params(params, [&](const std::string& k, double v) {
      if (k == "A") dg.amplitude = v;
      else if (k == "omega") dg.omega = v;
      else if (k == "eps" || k == "epsilon") dg.epsilon = v;
      else throw InvalidArgument("unknown double-gyre parameter " + k);
    });
    return dg;
  }
  if (name == "abc") {
    AbcFlow abc;
    parse_params(params, [&](const std::string& k, double v) {
      if (k == "A") abc.a = v;
      else if (k == "B") abc.b = v;
      else if (k == "C") abc.c = v;
      else throw InvalidArgument("unknown abc parameter " + k);
    });
    return abc;
  }
  if (name == "gridded") {
    if (params.empty()) throw InvalidArgument("gridded field needs a descriptor path");
    return GriddedField::load(std::filesystem::path(std::string(params)));
  }
  throw InvalidArgument("unknown field '" + std::string(name) + "'");
}

}  // namespace flowmap
