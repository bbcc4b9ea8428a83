#include "flowmap/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "flowmap/compare.hpp"
#include "flowmap/error.hpp"
#include "flowmap/eval.hpp"
#include "flowmap/field.hpp"
#include "flowmap/flowmap.hpp"
#include "flowmap/ftle.hpp"
#include "flowmap/inference.hpp"
#include "flowmap/manifest.hpp"
#include "flowmap/model_io.hpp"
#include "flowmap/npy.hpp"
#include "flowmap/parallel.hpp"
#include "flowmap/prune.hpp"
#include "flowmap/reconstruct.hpp"
#include "flowmap/seeding.hpp"
#include "flowmap/serve.hpp"
#include "flowmap/train.hpp"

namespace flowmap::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw InvalidArgument("bad number '" + s + "' in " + what);
  return v;
}

long long to_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw InvalidArgument("bad integer '" + s + "' in " + what);
  return v;
}

Point parse_point(const std::string& s, const std::string& what) {
  std::vector<double> c;
  for (const auto& part : split(s, ',')) c.push_back(to_double(part, what));
  if (c.empty() || c.size() > 3) throw InvalidArgument(what + " needs 1 to 3 coordinates: " + s);
  return Point::from_span(c);
}

std::vector<int> parse_int_list(const std::string& s, char sep, const std::string& what) {
  std::vector<int> v;
  for (const auto& part : split(s, sep)) v.push_back(static_cast<int>(to_int(part, what)));
  return v;
}

// "lo0,lo1[,lo2]:hi0,hi1[,hi2]"
Bounds parse_box(const std::string& s, int dim) {
  const auto halves = split(s, ':');
  if (halves.size() != 2) throw InvalidArgument("seed box must look like lo,lo:hi,hi");
  Bounds b(parse_point(halves[0], "seed box"), parse_point(halves[1], "seed box"));
  if (b.dim() != dim) throw InvalidArgument("seed box dimension does not match the field");
  return b;
}

// sobol:N | random:N[:rng_seed] | grid:NXxNY[xNZ]
SeedSet parse_seeds(const std::string& spec, int dim, const Bounds& box) {
  const auto parts = split(spec, ':');
  if (parts.size() < 2) throw InvalidArgument("seed spec must be sobol:N, random:N[:seed] or grid:NXxNY[xNZ]");
  if (parts[0] == "sobol" && parts.size() == 2) {
    return sobol(dim, static_cast<std::size_t>(to_int(parts[1], "seed count")), box);
  }
  if (parts[0] == "random" && (parts.size() == 2 || parts.size() == 3)) {
    const auto n = static_cast<std::size_t>(to_int(parts[1], "seed count"));
    const auto rng = parts.size() == 3 ? static_cast<std::uint64_t>(to_int(parts[2], "rng seed")) : 1;
    return pseudorandom(dim, n, box, rng);
  }
  if (parts[0] == "grid" && parts.size() == 2) {
    const auto res = parse_int_list(parts[1], 'x', "grid resolution");
    if (static_cast<int>(res.size()) != dim) throw InvalidArgument("grid resolution needs one count per axis");
    return uniform_grid(res, box);
  }
  throw InvalidArgument("unknown seed spec '" + spec + "'");
}

std::vector<int> parse_cycles(const std::string& s) {
  if (s == "all" || s.empty()) return {};
  return parse_int_list(s, ',', "cycle list");
}

json point_json(const Point& p) { return std::vector<double>(p.coords().begin(), p.coords().end()); }

json stats_json(const ErrorStats& s) {
  return {{"count", s.count}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"median", s.median}};
}

json errors_json(const ErrorReport& r) {
  return {{"l1", stats_json(r.l1)}, {"euclid", stats_json(r.euclid)}, {"excluded_invalid", r.excluded_invalid}};
}

void write_text(const fs::path& path, const std::string& text) { npy::dump(path, text); }

// Options shared by the tracing commands.
struct TraceFlags {
  double delta = 0.01;
  int interval = 5;
  int cycles = 100;
  double t0 = 0.0;

  void add(CLI::App* app) {
    app->add_option("--delta", delta, "RK4 step size (one cycle)")->capture_default_str();
    app->add_option("--interval", interval, "Cycles between file cycles")->capture_default_str();
    app->add_option("--cycles", cycles, "Number of file cycles n")->capture_default_str();
    app->add_option("--t0", t0, "Start time")->capture_default_str();
  }
  TraceConfig config() const {
    TraceConfig c;
    c.step = delta;
    c.interval = interval;
    c.file_cycles = cycles;
    c.t0 = t0;
    return c;
  }
};

struct Outcome {
  json summary;
  std::vector<fs::path> artifacts;
  fs::path manifest;            // empty: no manifest
  bool summary_to_err = false;  // stdout carries the command's payload
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  bool verbose = false;
};

FlowMapSet validation_for(const FlowMapSet& set, const std::string& val_path, double fraction,
                          const std::string& field_text) {
  if (!val_path.empty()) return read_flowmap(val_path);
  if (fraction <= 0.0) return {};
  const std::string desc = field_text.empty() ? set.field : field_text;
  if (desc.empty()) throw InvalidArgument("flow maps do not name their field; pass --field or --val");
  return extract_validation(parse_field(desc), set, fraction);
}

std::string history_csv(const TrainHistory& h) {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,train_loss,val_loss,lr\n";
  for (std::size_t e = 0; e < h.epochs(); ++e)
    os << e << ',' << h.train_loss[e] << ',' << h.val_loss[e] << ',' << h.lr[e] << '\n';
  return os.str();
}

std::function<bool(int, double, double, double)> progress(Context& ctx) {
  if (!ctx.verbose) return {};
  return [&ctx](int epoch, double tl, double vl, double lr) {
    ctx.err << "epoch " << epoch << " train " << tl << " val " << vl << " lr " << lr << '\n';
    return true;
  };
}

std::vector<Point> load_seed_points(const std::vector<std::string>& seeds, const std::string& file) {
  std::vector<Point> pts;
  for (const auto& s : seeds) pts.push_back(parse_point(s, "--seed"));
  if (!file.empty()) {
    const auto arr = npy::read(file);
    if (arr.shape.size() != 2 || arr.shape[1] < 1 || arr.shape[1] > 3)
      throw InvalidArgument("seed file must have shape (m, dim)");
    const auto v = arr.to_doubles();
    for (std::size_t i = 0; i < arr.shape[0]; ++i)
      pts.push_back(Point::from_span(std::span<const double>(v).subspan(i * arr.shape[1], arr.shape[1])));
  }
  return pts;
}

json trajectories_json(const std::vector<Trajectory>& trs, const std::vector<int>& cycles) {
  json list = json::array();
  for (const auto& tr : trs) {
    json pos = json::array(), valid = json::array();
    for (std::size_t j = 0; j < tr.size(); ++j) {
      pos.push_back(point_json(tr.positions[j]));
      valid.push_back(tr.valid[j] != 0);
    }
    list.push_back({{"seed", point_json(tr.seed)}, {"positions", pos}, {"valid", valid}});
  }
  return {{"cycles", cycles}, {"trajectories", list}};
}

// Keeps global options and the running subcommand's section of a config dump.
std::string active_config(const std::string& dump, const std::string& command) {
  std::istringstream in(dump);
  std::string line, kept;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    const auto key = line.substr(0, eq);
    if (key.find('.') == std::string::npos || key.rfind(command + ".", 0) == 0) kept += line + "\n";
  }
  return kept;
}

fs::path default_manifest(const std::string& manifest, const std::string& out) {
  if (!manifest.empty()) return manifest;
  if (out.empty()) return {};
  return out + ".manifest.json";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lagrangian flow-map toolkit: trace, learn, reconstruct and compare particle trajectories"};
  app.name("flowmap");
  app.set_config("--config", "", "Read options from a TOML-style file; command-line flags win");
  app.set_version_flag("--version", std::string("flowmap ") + FLOWMAP_VERSION);
  app.require_subcommand(1, 1);
  app.fallthrough();
  int threads = 0;
  bool verbose = false;
  std::string manifest_path;
  app.add_option("--threads", threads, "Worker cap (default: FLOWMAP_THREADS or all cores)");
  app.add_flag("-v,--verbose", verbose, "Progress on stderr");
  app.add_option("--manifest", manifest_path, "Run manifest path (default: <out>.manifest.json)");

  // generate
  auto* gen = app.add_subcommand("generate", "Trace seeds through a field and store flow maps");
  std::string g_field = "double-gyre", g_method = "long", g_seeds = "sobol:4096", g_box, g_out;
  int g_p = 0;
  TraceFlags g_trace;
  gen->add_option("--field", g_field, "double-gyre | abc | gridded:<descriptor.json> (params: name:k=v,...)")
      ->capture_default_str();
  gen->add_option("--method", g_method, "long | short | hybrid")->capture_default_str()
      ->check(CLI::IsMember({"long", "short", "hybrid"}));
  gen->add_option("--seeds", g_seeds, "sobol:N | random:N[:rng] | grid:NXxNY[xNZ]")->capture_default_str();
  gen->add_option("--seed-box", g_box, "Seed region lo,lo:hi,hi (default: field domain)");
  g_trace.add(gen);
  gen->add_option("--p", g_p, "File cycles per map (hybrid only)");
  gen->add_option("--out,-o", g_out, "Output .npy path")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a model on stored flow maps");
  std::string t_data, t_val, t_field, t_arch = "sine:D=256,enc=4/4,dec=6", t_out, t_hist;
  double t_lr = 0.0, t_val_fraction = 0.1, t_hidden_omega = 1.0;
  int t_epochs = 200;
  std::size_t t_batch = 1024;
  std::uint64_t t_rng = 1;
  tr->add_option("--data", t_data, "Training flow maps (.npy)")->required();
  tr->add_option("--val", t_val, "Validation flow maps (default: fresh Sobol seeds, --val-fraction of m)");
  tr->add_option("--val-fraction", t_val_fraction, "Validation seeds as a fraction of training seeds")
      ->capture_default_str();
  tr->add_option("--field", t_field, "Field used to trace validation maps (default: from the data)");
  tr->add_option("--arch", t_arch, "sine|relu:D=<latent>,enc=<pos>/<cycle>,dec=<layers>[,w0=30]")
      ->capture_default_str();
  tr->add_option("--hidden-omega", t_hidden_omega, "Frequency of non-first sine layers")->capture_default_str();
  tr->add_option("--lr", t_lr, "Learning rate (default 5e-4 sine, 1e-4 relu)");
  tr->add_option("--epochs", t_epochs, "Training epochs")->capture_default_str();
  tr->add_option("--batch", t_batch, "Mini-batch size")->capture_default_str();
  tr->add_option("--rng-seed", t_rng, "Initialisation and shuffling seed")->capture_default_str();
  tr->add_option("--out,-o", t_out, "Output model path (.fmap)")->required();
  tr->add_option("--history", t_hist, "Per-epoch CSV (default: <out>.history.csv)");

  // prune
  auto* pr = app.add_subcommand("prune", "Remove low-magnitude neurons and fine-tune");
  std::string p_model, p_data, p_val, p_field, p_out;
  double p_target = 0.35, p_lr = 0.0, p_val_fraction = 0.1;
  int p_rounds = 5, p_ft = 5, p_final = 0;
  std::size_t p_batch = 1024;
  std::uint64_t p_rng = 1;
  pr->add_option("--model", p_model, "Input model")->required();
  pr->add_option("--data", p_data, "Fine-tuning flow maps")->required();
  pr->add_option("--val", p_val, "Validation flow maps");
  pr->add_option("--val-fraction", p_val_fraction, "Validation seeds as a fraction of training seeds")
      ->capture_default_str();
  pr->add_option("--field", p_field, "Field for validation maps (default: from the data)");
  pr->add_option("--target", p_target, "Fraction of hidden neurons to remove")->capture_default_str();
  pr->add_option("--rounds", p_rounds, "Prune/fine-tune rounds")->capture_default_str();
  pr->add_option("--finetune-epochs", p_ft, "Fine-tune epochs per round")->capture_default_str();
  pr->add_option("--final-epochs", p_final, "Extra fine-tune epochs after the last round")->capture_default_str();
  pr->add_option("--lr", p_lr, "Fine-tune learning rate (default: training default)");
  pr->add_option("--batch", p_batch, "Mini-batch size")->capture_default_str();
  pr->add_option("--rng-seed", p_rng, "Shuffling seed")->capture_default_str();
  pr->add_option("--out,-o", p_out, "Output model path")->required();

  // infer
  auto* inf = app.add_subcommand("infer", "Infer trajectories for new seeds");
  std::string i_model, i_seed_file, i_cycles = "all", i_out;
  std::vector<std::string> i_seeds;
  inf->add_option("--model", i_model, "Model file")->required();
  inf->add_option("--seed", i_seeds, "Seed x,y[,z] (repeatable)");
  inf->add_option("--seeds-file", i_seed_file, "NPY of shape (m, dim)");
  inf->add_option("--cycles", i_cycles, "all | comma-separated file cycles")->capture_default_str();
  inf->add_option("--out,-o", i_out, "Write JSON here instead of stdout");

  // eval
  auto* ev = app.add_subcommand("eval", "Score a model or a baseline against reference trajectories");
  std::string e_model, e_basis, e_field, e_out, e_csv;
  std::size_t e_n = 500;
  std::uint64_t e_rng = 2024;
  int e_refine = 10;
  bool e_lattice = false;
  auto* e_model_opt = ev->add_option("--model", e_model, "Model file");
  auto* e_basis_opt = ev->add_option("--basis", e_basis, "Basis flow maps for barycentric reconstruction");
  e_model_opt->excludes(e_basis_opt);
  ev->add_option("--field", e_field, "Field for ground truth (default: from the artifact)");
  ev->add_option("--test-seeds", e_n, "Random test seeds")->capture_default_str();
  ev->add_option("--rng-seed", e_rng, "Test seed RNG")->capture_default_str();
  ev->add_option("--refine", e_refine, "Reference step = delta / refine")->capture_default_str();
  ev->add_flag("--lattice", e_lattice, "Multilinear lattice baseline instead of barycentric");
  ev->add_option("--out,-o", e_out, "JSON report path");
  ev->add_option("--csv", e_csv, "Per-seed CSV path");

  // compare
  auto* cmp = app.add_subcommand("compare", "Time and score model vs basis reconstruction");
  std::string c_model, c_basis, c_field, c_seeds = "100,200,300,400,500,1000", c_out, c_csv;
  CompareConfig c_cfg;
  cmp->add_option("--model", c_model, "Model file")->required();
  cmp->add_option("--basis", c_basis, "Basis flow maps")->required();
  cmp->add_option("--field", c_field, "Field for ground truth (default: from the basis)");
  cmp->add_option("--seeds", c_seeds, "Comma-separated query seed counts")->capture_default_str();
  cmp->add_option("--reps", c_cfg.repetitions, "Timing repetitions (median reported)")->capture_default_str();
  cmp->add_option("--error-seeds", c_cfg.error_seeds, "Random seeds for the error reports")->capture_default_str();
  cmp->add_option("--rng-seed", c_cfg.rng_seed, "Query/test seed RNG")->capture_default_str();
  cmp->add_option("--refine", c_cfg.refine, "Reference step = delta / refine")->capture_default_str();
  cmp->add_flag("--lattice", c_cfg.prefer_lattice, "Lattice baseline instead of barycentric");
  cmp->add_option("--out,-o", c_out, "JSON report path")->required();
  cmp->add_option("--csv", c_csv, "CSV report path (default: <out>.csv)");

  // ftle
  auto* ft = app.add_subcommand("ftle", "FTLE on a seed lattice");
  std::string f_data, f_field, f_res, f_box, f_out;
  std::optional<int> f_cycle;
  TraceFlags f_trace;
  ft->add_option("--data", f_data, "Lattice-seeded flow maps");
  ft->add_option("--cycle", f_cycle, "File cycle (default: last)");
  ft->add_option("--field", f_field, "Trace this field instead of reading --data");
  ft->add_option("--res", f_res, "Lattice resolution NXxNY[xNZ] (with --field)");
  ft->add_option("--seed-box", f_box, "Lattice region lo,lo:hi,hi (default: domain)");
  f_trace.add(ft);
  ft->add_option("--out,-o", f_out, "Output .npy, shape (ny, nx) or (nz, ny, nx)")->required();

  // serve
  auto* sv = app.add_subcommand("serve", "HTTP inference service");
  std::string s_model;
  ServeOptions s_opts;
  sv->add_option("--model", s_model, "Model file")->required();
  sv->add_option("--host", s_opts.host, "Bind address")->capture_default_str();
  sv->add_option("--port", s_opts.port, "Port (0 = any free port)")->capture_default_str();
  sv->add_option("--cors-origin", s_opts.cors_origin, "Access-Control-Allow-Origin value")->capture_default_str();

  // replay
  auto* rp = app.add_subcommand("replay", "Re-run the command recorded in a manifest and check outputs");
  std::string r_manifest;
  rp->add_option("manifest", r_manifest, "Manifest JSON")->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Context ctx{out, err, verbose};
  const std::string started = utc_now();
  CLI::App* cmd = app.get_subcommands().front();
  Outcome res;
  try {
    if (threads < 0) throw InvalidArgument("--threads must be >= 0");
    if (threads > 0) set_worker_count(threads);

    if (cmd == gen) {
      const Field field = parse_field(g_field);
      TraceConfig cfg = g_trace.config();
      const auto method = parse_method(g_method);
      if (method == ExtractionMethod::Hybrid) {
        if (g_p <= 0) throw InvalidArgument("--method hybrid needs --p");
        cfg.samples_per_map = g_p;
      } else if (g_p != 0) {
        throw InvalidArgument("--p only applies to --method hybrid");
      }
      cfg.validate();
      if (method == ExtractionMethod::Hybrid && cfg.file_cycles % g_p != 0)
        throw InvalidArgument("--cycles " + std::to_string(cfg.file_cycles) + " is not divisible by --p " +
                              std::to_string(g_p));
      const Bounds box = g_box.empty() ? field.domain() : parse_box(g_box, field.dim());
      const SeedSet seeds = parse_seeds(g_seeds, field.dim(), box);
      const FlowMapSet set = extract(method, field, seeds, cfg);
      write_flowmap(set, g_out);
      const auto files = flowmap_files(g_out);
      res.artifacts = {files.ends, files.seeds, files.valid, files.sidecar};
      std::size_t invalid = 0;
      for (auto v : set.valid) invalid += v == 0;
      res.summary = {{"out", g_out},
                     {"method", to_string(method)},
                     {"seeds", set.seed_count()},
                     {"cycles", set.cycle_count()},
                     {"maps", set.cycle_count() / set.map_length()},
                     {"invalid_entries", invalid},
                     {"bytes", flowmap_storage_bytes(g_out)}};
      res.manifest = default_manifest(manifest_path, g_out);
    } else if (cmd == tr) {
      const FlowMapSet set = read_flowmap(t_data);
      const FlowMapSet val = validation_for(set, t_val, t_val_fraction, t_field);
      MlpArch arch = MlpArch::parse(t_arch, set.dim());
      arch.hidden_omega = t_hidden_omega;
      MlpModel model = init_model_for(set, arch, t_rng);
      TrainConfig tc;
      tc.learning_rate = t_lr > 0.0 ? t_lr : TrainConfig::default_lr(arch.activation);
      tc.batch_size = t_batch;
      tc.epochs = t_epochs;
      tc.rng_seed = t_rng;
      tc.on_epoch = progress(ctx);
      const Dataset data = make_dataset(model, set);
      const Dataset vdata = val.seed_count() ? make_dataset(model, val) : Dataset{};
      const TrainHistory hist = train(model, data, vdata, tc);
      save_model(model, t_out);
      const std::string hist_path = t_hist.empty() ? t_out + ".history.csv" : t_hist;
      write_text(hist_path, history_csv(hist));
      res.artifacts = {t_out, hist_path};
      res.summary = {{"out", t_out},
                     {"arch", model.arch.str()},
                     {"params", model.parameter_count()},
                     {"bytes", fs::file_size(t_out)},
                     {"epochs", hist.epochs()},
                     {"samples", data.size()},
                     {"train_loss", hist.epochs() ? hist.train_loss.back() : 0.0},
                     {"val_loss", hist.epochs() ? hist.val_loss.back() : 0.0},
                     {"final_lr", hist.epochs() ? hist.lr.back() : tc.learning_rate}};
      res.manifest = default_manifest(manifest_path, t_out);
    } else if (cmd == pr) {
      const MlpModel model = load_model(p_model);
      const FlowMapSet set = read_flowmap(p_data);
      const FlowMapSet val = validation_for(set, p_val, p_val_fraction, p_field);
      PruneConfig pc;
      pc.target_fraction = p_target;
      pc.rounds = p_rounds;
      pc.finetune_epochs_per_round = p_ft;
      pc.final_finetune_epochs = p_final;
      pc.finetune.learning_rate = p_lr > 0.0 ? p_lr : TrainConfig::default_lr(model.arch.activation);
      pc.finetune.batch_size = p_batch;
      pc.finetune.rng_seed = p_rng;
      pc.finetune.on_epoch = progress(ctx);
      const Dataset data = make_dataset(model, set);
      const Dataset vdata = val.seed_count() ? make_dataset(model, val) : Dataset{};
      const PruneResult pres = prune(model, data, vdata, pc);
      save_model(pres.model, p_out);
      res.artifacts = {p_out};
      res.summary = {{"out", p_out},
                     {"arch", pres.model.arch.str()},
                     {"params_before", pres.params_before},
                     {"params_after", pres.params_after},
                     {"bytes_before", fs::file_size(p_model)},
                     {"bytes_after", fs::file_size(p_out)},
                     {"val_loss", vdata.size() ? dataset_loss(pres.model, vdata) : dataset_loss(pres.model, data)}};
      res.manifest = default_manifest(manifest_path, p_out);
    } else if (cmd == inf) {
      const MlpModel model = load_model(i_model);
      const auto seeds = load_seed_points(i_seeds, i_seed_file);
      if (seeds.empty()) throw InvalidArgument("give at least one --seed or --seeds-file");
      std::vector<int> cycles = parse_cycles(i_cycles);
      const auto trs = infer_trajectories(model, seeds, cycles);
      if (cycles.empty())
        for (int j = 0; j < model.n_file_cycles(); ++j) cycles.push_back(j);
      const std::string text = trajectories_json(trs, cycles).dump() + "\n";
      if (i_out.empty()) {
        out << text;
        res.summary_to_err = true;
      } else {
        write_text(i_out, text);
        res.artifacts = {i_out};
      }
      res.summary = {{"seeds", seeds.size()}, {"cycles", cycles.size()}, {"method", to_string(model.method)}};
      res.manifest = default_manifest(manifest_path, i_out);
    } else if (cmd == ev) {
      if (e_model.empty() && e_basis.empty()) throw InvalidArgument("give --model or --basis");
      std::optional<MlpModel> model;
      std::optional<FlowMapSet> basis;
      TraceConfig cfg;
      std::string desc;
      if (!e_model.empty()) {
        model = load_model(e_model);
        cfg = model->trace;
        desc = model->field;
      } else {
        basis = read_flowmap(e_basis);
        cfg = basis->cfg;
        desc = basis->field;
      }
      if (!e_field.empty()) desc = e_field;
      if (desc.empty()) throw InvalidArgument("artifact does not name its field; pass --field");
      const Field field = parse_field(desc);
      const auto test = pseudorandom(field.dim(), e_n, field.domain(), e_rng);
      const auto truth = reference_trajectories(field, test.points, cfg, e_refine);
      std::vector<Trajectory> pred;
      std::string method;
      if (model) {
        pred = infer_trajectories(*model, test.points);
        method = "model";
      } else if (e_lattice || basis->dim() == 3) {
        const auto lat = detect_lattice(basis->seeds);
        if (!lat) throw InvalidArgument("basis seeds do not form a lattice");
        pred = lattice_reconstruct_all(*basis, *lat, test.points);
        method = "lattice";
      } else {
        pred = bc_reconstruct_all(*basis, triangulate(basis->seeds), test.points);
        method = "barycentric";
      }
      const ErrorReport rep = evaluate(pred, truth);
      const ErrorReport nf = noise_floor(field, test.points, cfg, truth);
      const json report = {{"method", method},
                           {"field", field.describe()},
                           {"n_cycles", cfg.file_cycles},
                           {"test_seeds", e_n},
                           {"rng_seed", e_rng},
                           {"refine", e_refine},
                           {"errors", errors_json(rep)},
                           {"noise_floor", errors_json(nf)}};
      if (!e_out.empty()) {
        write_text(e_out, report.dump(2) + "\n");
        res.artifacts.push_back(e_out);
      }
      if (!e_csv.empty()) {
        std::ostringstream os;
        os.precision(12);
        os << "seed,l1,euclid,n_valid\n";
        for (std::size_t i = 0; i < pred.size(); ++i) {
          const auto e = trajectory_error(pred[i], truth[i]);
          os << i << ',' << e.l1 << ',' << e.euclid << ',' << e.n_valid << '\n';
        }
        write_text(e_csv, os.str());
        res.artifacts.push_back(e_csv);
      }
      res.summary = {{"method", method},
                     {"median", rep.l1.median},
                     {"mean", rep.l1.mean},
                     {"max", rep.l1.max},
                     {"euclid_median", rep.euclid.median},
                     {"evaluated", rep.l1.count},
                     {"excluded_invalid", rep.excluded_invalid},
                     {"noise_floor_median", nf.l1.median}};
      res.manifest = default_manifest(manifest_path, e_out);
    } else if (cmd == cmp) {
      c_cfg.seed_counts = parse_int_list(c_seeds, ',', "--seeds");
      std::string desc = c_field;
      if (desc.empty()) desc = read_flowmap(c_basis).field;
      if (desc.empty()) throw InvalidArgument("basis does not name its field; pass --field");
      const auto rep = compare(c_model, c_basis, parse_field(desc), c_cfg);
      const std::string csv_path = c_csv.empty() ? c_out + ".csv" : c_csv;
      write_text(c_out, report_json(rep));
      write_text(csv_path, report_csv(rep));
      res.artifacts = {c_out, csv_path};
      json methods = json::object();
      for (const auto& m : rep.methods)
        methods[m.name] = {{"storage_bytes", m.storage_bytes}, {"median", m.errors.l1.median},
                           {"query_s_max_seeds", m.query_s.back()}};
      res.summary = {{"out", c_out}, {"methods", methods}};
      res.manifest = default_manifest(manifest_path, c_out);
    } else if (cmd == ft) {
      FtleGrid grid;
      if (!f_field.empty()) {
        if (!f_data.empty()) throw InvalidArgument("give either --data or --field");
        const Field field = parse_field(f_field);
        if (f_res.empty()) throw InvalidArgument("--field needs --res");
        const auto res_v = parse_int_list(f_res, 'x', "--res");
        const Bounds box = f_box.empty() ? field.domain() : parse_box(f_box, field.dim());
        grid = ftle(field, res_v, box, f_trace.config());
      } else {
        if (f_data.empty()) throw InvalidArgument("give --data or --field");
        grid = ftle(read_flowmap(f_data), f_cycle);
      }
      std::vector<std::size_t> shape;
      for (int a = grid.lattice.dim - 1; a >= 0; --a)
        shape.push_back(static_cast<std::size_t>(grid.lattice.res[static_cast<std::size_t>(a)]));
      npy::write(f_out, shape, grid.values);
      res.artifacts = {f_out};
      double lo = INFINITY, hi = -INFINITY;
      std::size_t nan = 0;
      for (double v : grid.values) {
        if (std::isnan(v)) {
          ++nan;
          continue;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      res.summary = {{"out", f_out}, {"nodes", grid.values.size()}, {"nan", nan},
                     {"min", nan == grid.values.size() ? 0.0 : lo}, {"max", nan == grid.values.size() ? 0.0 : hi},
                     {"horizon", grid.horizon}};
      res.manifest = default_manifest(manifest_path, f_out);
    } else if (cmd == sv) {
      const Service service = Service::from_file(s_model);
      Server server(service, s_opts);
      server.run([&](int port) {
        out << json{{"command", "serve"}, {"status", "listening"}, {"host", s_opts.host}, {"port", port}}.dump()
            << std::endl;
      });
      res.summary = {{"model", s_model}};
      res.manifest = manifest_path;
    } else if (cmd == rp) {
      const RunManifest m = read_manifest(r_manifest);
      std::ostringstream sink;
      const int code = run(m.argv, sink, err);
      if (code != 0) throw Error("replayed command failed with exit code " + std::to_string(code));
      json checks = json::array();
      bool identical = true;
      for (const auto& a : m.artifacts) {
        const bool same = fs::exists(a.path) && fnv1a64_file(a.path) == a.fnv1a64;
        identical = identical && same;
        checks.push_back({{"path", a.path}, {"identical", same}});
      }
      res.summary = {{"manifest", r_manifest}, {"identical", identical}, {"artifacts", checks}};
      if (!identical) {
        res.summary["command"] = "replay";
        res.summary["status"] = "mismatch";
        out << res.summary.dump() << '\n';
        return 1;
      }
    }

    if (!res.manifest.empty()) {
      RunManifest m;
      m.version = FLOWMAP_VERSION;
      m.command = cmd->get_name();
      m.argv = args;
      m.config = active_config(app.config_to_str(true, false), cmd->get_name());
      for (const auto& p : res.artifacts) m.artifacts.push_back(describe_artifact(p));
      m.started = started;
      m.finished = utc_now();
      m.workers = worker_count();
      write_manifest(m, res.manifest);
      res.summary["manifest"] = res.manifest.string();
    }
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  json line = {{"command", cmd->get_name()}, {"status", "ok"}};
  line.update(res.summary);
  (res.summary_to_err ? err : out) << line.dump() << '\n';
  return 0;
}

}  // namespace flowmap::cli
