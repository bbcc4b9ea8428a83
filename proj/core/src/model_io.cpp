#include "flowmap/model_io.hpp"

#include <bit>
#include <cstring>
#include <string>
#include <type_traits>
#include <vector>
#include <json.hpp>

#include "flowmap/error.hpp"
#include "flowmap/npy.hpp"

namespace flowmap {
namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "model payloads are written natively");

constexpr char kMagic[4] = {'F', 'M', 'A', 'P'};

json point_json(const Point& p) { return std::vector<double>(p.coords().begin(), p.coords().end()); }

Activation parse_activation(const std::string& s) {
  if (s == "sine") return Activation::Sine;
  if (s == "relu") return Activation::ReLU;
  throw ParseError("unknown activation '" + s + "'");
}

template <class Vec>
struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  Vec* data;
};

// Tensors in file order; Model may be const.
template <class Model>
auto tensors(Model& m) {
  using Vec = std::remove_reference_t<decltype((m.decoder.front().weight))>;
  std::vector<Tensor<Vec>> t;
  auto add = [&](const std::string& prefix, auto& chain) {
    for (std::size_t i = 0; i < chain.size(); ++i) {
      auto& l = chain[i];
      const std::string base = prefix + "." + std::to_string(i);
      t.push_back(Tensor<Vec>{base + ".weight", {static_cast<std::size_t>(l.in), static_cast<std::size_t>(l.out)}, &l.weight});
      t.push_back(Tensor<Vec>{base + ".bias", {static_cast<std::size_t>(l.out)}, &l.bias});
    }
  };
  add("pos", m.pos_encoder);
  add("cycle", m.cycle_encoder);
  add("dec", m.decoder);
  return t;
}

json header_json(const MlpModel& model) {
  const MlpArch& a = model.arch;
  json arch = {{"dim", a.dim},
               {"activation", to_string(a.activation)},
               {"pos_widths", a.pos_widths},
               {"cycle_widths", a.cycle_widths},
               {"dec_widths", a.dec_widths},
               {"first_omega", a.first_omega},
               {"hidden_omega", a.hidden_omega}};
  json manifest = json::array();
  std::size_t offset = 0;
  for (const auto& t : tensors(model)) {
    manifest.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    offset += t.data->size() * sizeof(double);
  }
  return {{"arch", arch},
          {"norm", {{"bounds", {point_json(model.norm.bounds.lo()), point_json(model.norm.bounds.hi())}},
                    {"n_cycles", model.norm.n_cycles}}},
          {"method", to_string(model.method)},
          {"samples_per_map", model.samples_per_map},
          {"n_file_cycles", model.n_file_cycles()},
          {"trace",
           {{"delta", model.trace.step},
            {"interval", model.trace.interval},
            {"file_cycles", model.trace.file_cycles},
            {"t0", model.trace.t0},
            {"samples_per_map", model.trace.samples_per_map}}},
          {"field", model.field},
          {"parameter_count", model.parameter_count()},
          {"payload_bytes", offset},
          {"tensors", manifest}};
}

std::size_t padded(std::size_t n) { return (n + 7) / 8 * 8; }

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(std::string_view bytes, std::size_t at) {
  T v;
  std::memcpy(&v, bytes.data() + at, sizeof(T));
  return v;
}

}  // namespace

std::size_t model_header_bytes(const MlpModel& model) {
  return padded(16 + header_json(model).dump().size());
}

std::string encode_model(const MlpModel& model) {
  const std::string header = header_json(model).dump();
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint64_t>(out, header.size());
  out += header;
  out.resize(padded(out.size()), '\0');
  for (const auto& t : tensors(model))
    out.append(reinterpret_cast<const char*>(t.data->data()), t.data->size() * sizeof(double));
  return out;
}

MlpModel decode_model(std::string_view bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw ParseError("not a flowmap model file");
  const auto version = get<std::uint32_t>(bytes, 4);
  if (version != kModelFormatVersion)
    throw ParseError("unsupported model format version " + std::to_string(version));
  const auto header_len = get<std::uint64_t>(bytes, 8);
  if (header_len > bytes.size() - 16) throw ParseError("model file truncated in header");
  const std::size_t payload_at = padded(16 + header_len);

  MlpModel m;
  try {
    const json h = json::parse(bytes.substr(16, header_len));
    const json& a = h.at("arch");
    m.arch.dim = a.at("dim").get<int>();
    m.arch.activation = parse_activation(a.at("activation").get<std::string>());
    m.arch.pos_widths = a.at("pos_widths").get<std::vector<int>>();
    m.arch.cycle_widths = a.at("cycle_widths").get<std::vector<int>>();
    m.arch.dec_widths = a.at("dec_widths").get<std::vector<int>>();
    m.arch.first_omega = a.at("first_omega").get<double>();
    m.arch.hidden_omega = a.at("hidden_omega").get<double>();
    m.arch.validate();
    const json& nb = h.at("norm").at("bounds");
    m.norm.bounds = Bounds(Point::from_span(nb.at(0).get<std::vector<double>>()),
                           Point::from_span(nb.at(1).get<std::vector<double>>()));
    m.norm.n_cycles = h.at("norm").at("n_cycles").get<int>();
    if (m.norm.bounds.dim() != m.arch.dim || m.norm.n_cycles < 1) throw ParseError("inconsistent normalization");
    m.method = parse_method(h.at("method").get<std::string>());
    m.samples_per_map = h.at("samples_per_map").get<int>();
    if (m.samples_per_map < 1) throw ParseError("samples_per_map must be >= 1");
    const json& tr = h.at("trace");
    m.trace.step = tr.at("delta").get<double>();
    m.trace.interval = tr.at("interval").get<int>();
    m.trace.file_cycles = tr.at("file_cycles").get<int>();
    m.trace.t0 = tr.at("t0").get<double>();
    m.trace.samples_per_map = tr.at("samples_per_map").get<int>();
    m.field = h.at("field").get<std::string>();

    // Rebuild layer shells from the architecture, then fill from the manifest.
    MlpModel shell = init_model(m.arch, m.norm, 0);
    m.pos_encoder = std::move(shell.pos_encoder);
    m.cycle_encoder = std::move(shell.cycle_encoder);
    m.decoder = std::move(shell.decoder);
    auto ts = tensors(m);
    const json& manifest = h.at("tensors");
    std::size_t payload = 0;
    for (const auto& t : ts) payload += t.data->size() * sizeof(double);
    if (payload_at + payload != bytes.size())
      throw ParseError(bytes.size() < payload_at + payload ? "model file truncated" : "trailing bytes after model payload");
    if (manifest.size() != ts.size()) throw ParseError("tensor manifest does not match architecture");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const json& e = manifest[i];
      if (e.at("name").get<std::string>() != ts[i].name ||
          e.at("shape").get<std::vector<std::size_t>>() != ts[i].shape)
        throw ParseError("tensor " + ts[i].name + " has unexpected name or shape");
      const auto off = e.at("offset").get<std::size_t>();
      const std::size_t nbytes = ts[i].data->size() * sizeof(double);
      if (off % 8 != 0 || payload_at + off + nbytes > bytes.size() || payload_at + off < payload_at)
        throw ParseError("model file truncated in tensor " + ts[i].name);
      std::memcpy(ts[i].data->data(), bytes.data() + payload_at + off, nbytes);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad model header: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("bad model header: ") + e.what());
  }
  return m;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  npy::dump(path, encode_model(model));
}

MlpModel load_model(const std::filesystem::path& path) { return decode_model(npy::slurp(path)); }

}  // namespace flowmap
