#include "flowmap/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "flowmap/error.hpp"
#include "flowmap/seeding.hpp"
#include "kernels.hpp"
#include "vmath.hpp"

namespace flowmap {
namespace {

void fill_uniform(std::vector<double>& v, double bound, std::mt19937_64& gen) {
  for (auto& x : v) x = (2.0 * unit_open(gen()) - 1.0) * bound;
}

Layer make_layer(int in, int out, LayerKind kind, double omega) {
  Layer l;
  l.in = in;
  l.out = out;
  l.kind = kind;
  l.omega = omega;
  l.weight.assign(static_cast<std::size_t>(in) * out, 0.0);
  l.bias.assign(static_cast<std::size_t>(out), 0.0);
  return l;
}

std::vector<Layer> make_chain(int in, const std::vector<int>& widths, LayerKind kind, double first_omega,
                              double hidden_omega) {
  std::vector<Layer> chain;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    chain.push_back(make_layer(in, widths[i], kind, i == 0 ? first_omega : hidden_omega));
    in = widths[i];
  }
  return chain;
}

void apply_activation(const Layer& l, const std::vector<double>& z, std::vector<double>& a) {
  a.resize(z.size());
  switch (l.kind) {
    case LayerKind::Sine:
      vmath::sin_scaled(z.data(), a.data(), z.size(), l.omega);
      break;
    case LayerKind::ReLU:
      for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
      break;
    case LayerKind::Linear:
      std::copy(z.begin(), z.end(), a.begin());
      break;
  }
}

void run_chain(const std::vector<Layer>& chain, std::size_t batch, const double* input,
               std::vector<std::vector<double>>& zs, std::vector<std::vector<double>>& as) {
  zs.resize(chain.size());
  as.resize(chain.size());
  const double* x = input;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Layer& l = chain[i];
    zs[i].resize(batch * static_cast<std::size_t>(l.out));
    kernels::gemm(batch, static_cast<std::size_t>(l.out), static_cast<std::size_t>(l.in), x,
                  l.weight.data(), l.bias.data(), zs[i].data());
    apply_activation(l, zs[i], as[i]);
    x = as[i].data();
  }
}

int parse_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw InvalidArgument("bad " + what + " in architecture: '" + s + "'");
  return v;
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::Sine ? "sine" : "relu"; }

MlpArch MlpArch::make(int dim, int enc_pos_layers, int enc_cycle_layers, int dec_layers, int latent,
                      Activation act) {
  if (latent < 2 || latent % 2 != 0) throw InvalidArgument("latent dimension must be even and >= 2");
  if (enc_pos_layers < 1 || enc_cycle_layers < 1 || dec_layers < 1)
    throw InvalidArgument("layer counts must be >= 1");
  MlpArch a;
  a.dim = dim;
  a.pos_widths.assign(static_cast<std::size_t>(enc_pos_layers), latent / 2);
  a.cycle_widths.assign(static_cast<std::size_t>(enc_cycle_layers), latent / 2);
  a.dec_widths.assign(static_cast<std::size_t>(dec_layers - 1), latent);
  a.activation = act;
  return a;
}

MlpArch MlpArch::parse(std::string_view text, int dim) {
  Activation act = Activation::Sine;
  auto colon = text.find(':');
  const std::string head(text.substr(0, colon));
  if (head == "sine" || head == "siren") act = Activation::Sine;
  else if (head == "relu") act = Activation::ReLU;
  else throw InvalidArgument("architecture must start with sine: or relu:");
  int latent = 256, enc_pos = 4, enc_cyc = 4, dec = 6;
  double w0 = 30.0;
  std::string rest = colon == std::string_view::npos ? "" : std::string(text.substr(colon + 1));
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("architecture item needs key=value: " + item);
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "D") {
      latent = parse_int(value, "D");
    } else if (key == "enc") {
      auto slash = value.find('/');
      if (slash == std::string::npos) {
        enc_pos = enc_cyc = parse_int(value, "enc");
      } else {
        enc_pos = parse_int(value.substr(0, slash), "enc");
        enc_cyc = parse_int(value.substr(slash + 1), "enc");
      }
    } else if (key == "dec") {
      dec = parse_int(value, "dec");
    } else if (key == "w0") {
      std::size_t used = 0;
      try {
        w0 = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size() || !(w0 > 0.0)) throw InvalidArgument("bad w0 value " + value);
    } else {
      throw InvalidArgument("unknown architecture key " + key);
    }
  }
  MlpArch a = make(dim, enc_pos, enc_cyc, dec, latent, act);
  a.first_omega = w0;
  return a;
}

void MlpArch::validate() const {
  if (dim != 2 && dim != 3) throw InvalidArgument("model dim must be 2 or 3");
  if (pos_widths.empty() || cycle_widths.empty()) throw InvalidArgument("encoders need >= 1 layer");
  for (const auto* ws : {&pos_widths, &cycle_widths, &dec_widths})
    for (int w : *ws)
      if (w < 1) throw InvalidArgument("layer widths must be >= 1");
}

int MlpArch::latent() const { return pos_widths.back() + cycle_widths.back(); }

std::string MlpArch::str() const {
  std::ostringstream os;
  os << to_string(activation) << ":D=" << latent() << ",enc=" << pos_widths.size() << '/'
     << cycle_widths.size() << ",dec=" << dec_widths.size() + 1;
  if (first_omega != 30.0) os << ",w0=" << first_omega;
  return os.str();
}

double Normalization::cycle(int j) const {
  if (n_cycles <= 1) return 0.0;
  return 2.0 * static_cast<double>(j) / static_cast<double>(n_cycles - 1) - 1.0;
}

void Normalization::to_unit(const Point& p, double* out) const {
  for (int a = 0; a < p.dim(); ++a) out[a] = 2.0 * (p[a] - bounds.lo()[a]) / bounds.extent(a) - 1.0;
}

Point Normalization::to_unit(const Point& p) const {
  Point u(p.dim());
  double buf[3];
  to_unit(p, buf);
  for (int a = 0; a < p.dim(); ++a) u[a] = buf[a];
  return u;
}

Point Normalization::from_unit(const double* u) const {
  Point p(bounds.dim());
  for (int a = 0; a < p.dim(); ++a) p[a] = bounds.lo()[a] + (u[a] + 1.0) * 0.5 * bounds.extent(a);
  return p;
}

std::size_t parameter_count(const MlpArch& arch) {
  std::size_t total = 0;
  auto chain = [&](int in, const std::vector<int>& widths) {
    for (int w : widths) {
      total += static_cast<std::size_t>(in + 1) * static_cast<std::size_t>(w);
      in = w;
    }
    return in;
  };
  chain(arch.dim, arch.pos_widths);
  chain(1, arch.cycle_widths);
  const int last = chain(arch.latent(), arch.dec_widths);
  total += static_cast<std::size_t>(last + 1) * static_cast<std::size_t>(arch.dim);
  return total;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t total = 0;
  for (const Layer* l : layers()) total += l->parameter_count();
  return total;
}

std::vector<const Layer*> MlpModel::layers() const {
  std::vector<const Layer*> out;
  for (const auto& l : pos_encoder) out.push_back(&l);
  for (const auto& l : cycle_encoder) out.push_back(&l);
  for (const auto& l : decoder) out.push_back(&l);
  return out;
}

std::vector<Layer*> MlpModel::layers() {
  std::vector<Layer*> out;
  for (auto& l : pos_encoder) out.push_back(&l);
  for (auto& l : cycle_encoder) out.push_back(&l);
  for (auto& l : decoder) out.push_back(&l);
  return out;
}

MlpModel init_model(const MlpArch& arch, const Normalization& norm, std::uint64_t rng_seed) {
  arch.validate();
  if (norm.bounds.dim() != arch.dim) throw InvalidArgument("normalization bounds do not match model dim");
  MlpModel m;
  m.arch = arch;
  m.norm = norm;
  const bool sine = arch.activation == Activation::Sine;
  const LayerKind hidden = sine ? LayerKind::Sine : LayerKind::ReLU;
  const double first = sine ? arch.first_omega : 1.0;
  const double other = sine ? arch.hidden_omega : 1.0;
  m.pos_encoder = make_chain(arch.dim, arch.pos_widths, hidden, first, other);
  m.cycle_encoder = make_chain(1, arch.cycle_widths, hidden, first, other);
  m.decoder = make_chain(arch.latent(), arch.dec_widths, hidden, other, other);
  const int last_in = arch.dec_widths.empty() ? arch.latent() : arch.dec_widths.back();
  m.decoder.push_back(make_layer(last_in, arch.dim, LayerKind::Linear, 1.0));

  std::mt19937_64 gen(rng_seed);
  auto init = [&](Layer& l, bool is_first) {
    const double fan_in = l.in;
    double bound;
    if (sine && is_first) bound = 1.0 / fan_in;
    else if (sine) bound = std::sqrt(6.0 / fan_in) / arch.hidden_omega;
    else bound = std::sqrt(6.0 / fan_in);
    fill_uniform(l.weight, bound, gen);
    fill_uniform(l.bias, 1.0 / std::sqrt(fan_in), gen);
  };
  for (std::size_t i = 0; i < m.pos_encoder.size(); ++i) init(m.pos_encoder[i], i == 0);
  for (std::size_t i = 0; i < m.cycle_encoder.size(); ++i) init(m.cycle_encoder[i], i == 0);
  for (auto& l : m.decoder) init(l, false);
  return m;
}

Dataset make_dataset(const Normalization& norm, std::span<const TrainingSample> samples) {
  Dataset d;
  d.dim = norm.bounds.dim();
  const auto dim = static_cast<std::size_t>(d.dim);
  for (const auto& s : samples) {
    if (!s.valid) continue;
    if (s.cycle < 0 || s.cycle >= norm.n_cycles) throw InvalidArgument("sample cycle out of range");
    const std::size_t at = d.pos.size();
    d.pos.resize(at + dim);
    d.target.resize(at + dim);
    norm.to_unit(s.start, d.pos.data() + at);
    norm.to_unit(s.target, d.target.data() + at);
    d.cycle.push_back(norm.cycle(s.cycle));
  }
  return d;
}

void forward_unit(const MlpModel& model, std::size_t batch, const double* pos, const double* cycle,
                  ForwardCache& cache) {
  cache.batch = batch;
  run_chain(model.pos_encoder, batch, pos, cache.pos_z, cache.pos_a);
  run_chain(model.cycle_encoder, batch, cycle, cache.cyc_z, cache.cyc_a);
  const auto pw = static_cast<std::size_t>(model.pos_encoder.back().out);
  const auto cw = static_cast<std::size_t>(model.cycle_encoder.back().out);
  cache.concat.resize(batch * (pw + cw));
  const auto& pa = cache.pos_a.back();
  const auto& ca = cache.cyc_a.back();
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(pa.data() + b * pw, pw, cache.concat.data() + b * (pw + cw));
    std::copy_n(ca.data() + b * cw, cw, cache.concat.data() + b * (pw + cw) + pw);
  }
  run_chain(model.decoder, batch, cache.concat.data(), cache.dec_z, cache.dec_a);
}

std::vector<double> predict_unit(const MlpModel& model, std::span<const double> pos,
                                 std::span<const double> cycle) {
  const std::size_t batch = cycle.size();
  if (pos.size() != batch * static_cast<std::size_t>(model.dim()))
    throw InvalidArgument("position batch does not match cycle batch");
  ForwardCache cache;
  forward_unit(model, batch, pos.data(), cycle.data(), cache);
  return cache.output();
}

std::vector<double> predict_grid_unit(const MlpModel& model, std::span<const double> pos,
                                      std::span<const double> cycle) {
  const auto dim = static_cast<std::size_t>(model.dim());
  if (pos.size() % dim != 0) throw InvalidArgument("position buffer is not a multiple of dim");
  const std::size_t ns = pos.size() / dim, nc = cycle.size();
  std::vector<double> out(ns * nc * dim);
  if (out.empty()) return out;

  std::vector<std::vector<double>> zs, as;
  run_chain(model.pos_encoder, ns, pos.data(), zs, as);
  const std::vector<double> pos_code = std::move(as.back());
  run_chain(model.cycle_encoder, nc, cycle.data(), zs, as);
  const std::vector<double> cyc_code = std::move(as.back());
  const auto pw = static_cast<std::size_t>(model.pos_encoder.back().out);
  const auto cw = static_cast<std::size_t>(model.cycle_encoder.back().out);

  // Decoder over row chunks so activations stay cache-sized.
  constexpr std::size_t kChunk = 1024;
  std::vector<double> concat;
  for (std::size_t row0 = 0; row0 < ns * nc; row0 += kChunk) {
    const std::size_t rows = std::min(kChunk, ns * nc - row0);
    concat.resize(rows * (pw + cw));
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t s = (row0 + r) / nc, c = (row0 + r) % nc;
      std::copy_n(pos_code.data() + s * pw, pw, concat.data() + r * (pw + cw));
      std::copy_n(cyc_code.data() + c * cw, cw, concat.data() + r * (pw + cw) + pw);
    }
    run_chain(model.decoder, rows, concat.data(), zs, as);
    std::copy_n(as.back().data(), rows * dim, out.data() + row0 * dim);
  }
  return out;
}

std::vector<Point> forward(const MlpModel& model, std::span<const Point> starts,
                           std::span<const int> cycles) {
  if (starts.size() != cycles.size()) throw InvalidArgument("starts and cycles differ in length");
  const auto dim = static_cast<std::size_t>(model.dim());
  std::vector<double> pos(starts.size() * dim), cyc(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (starts[i].dim() != model.dim()) throw InvalidArgument("start has wrong dimension");
    if (cycles[i] < 0 || cycles[i] >= model.n_file_cycles())
      throw InvalidArgument("cycle " + std::to_string(cycles[i]) + " out of range [0, " +
                            std::to_string(model.n_file_cycles() - 1) + "]");
    model.norm.to_unit(starts[i], pos.data() + i * dim);
    cyc[i] = model.norm.cycle(cycles[i]);
  }
  const auto out = predict_unit(model, pos, cyc);
  std::vector<Point> result;
  result.reserve(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) result.push_back(model.norm.from_unit(out.data() + i * dim));
  return result;
}

Point forward(const MlpModel& model, const Point& start, int cycle) {
  return forward(model, std::span<const Point>(&start, 1), std::span<const int>(&cycle, 1)).front();
}

}  // namespace flowmap
