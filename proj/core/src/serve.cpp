#include "flowmap/serve.hpp"

#include <chrono>
#include <filesystem>
#include <httplib.h>
#include <json.hpp>
#include <thread>

#include "flowmap/error.hpp"
#include "flowmap/inference.hpp"
#include "flowmap/model_io.hpp"

namespace flowmap {
namespace {

using nlohmann::json;

HttpReply error_reply(int status, const std::string& message) {
  return {status, json{{"error", message}}.dump()};
}

json point_json(const Point& p) { return std::vector<double>(p.coords().begin(), p.coords().end()); }

}  // namespace

Service::Service(MlpModel model, std::uintmax_t model_bytes)
    : model_(std::move(model)), model_bytes_(model_bytes) {}

Service Service::from_file(const std::filesystem::path& path) {
  return Service(load_model(path), std::filesystem::file_size(path));
}

HttpReply Service::model_info() const {
  if (!model_) return error_reply(503, "no model loaded");
  const MlpModel& m = *model_;
  json info = {{"dim", m.dim()},
               {"n_file_cycles", m.n_file_cycles()},
               {"method", to_string(m.method)},
               {"samples_per_map", m.samples_per_map},
               {"map_length", m.map_length()},
               {"bounds", {point_json(m.norm.bounds.lo()), point_json(m.norm.bounds.hi())}},
               {"param_count", m.parameter_count()},
               {"model_bytes", model_bytes_},
               {"arch", m.arch.str()},
               {"field", m.field},
               {"delta", m.trace.step},
               {"interval", m.trace.interval}};
  return {200, info.dump()};
}

HttpReply Service::trace(std::string_view body) const {
  if (!model_) return error_reply(503, "no model loaded");
  const MlpModel& m = *model_;
  std::vector<Point> seeds;
  std::vector<int> cycles;
  try {
    const json req = json::parse(body);
    if (!req.is_object() || !req.contains("seeds") || !req.at("seeds").is_array())
      return error_reply(400, "request needs a 'seeds' array");
    for (const auto& s : req.at("seeds")) {
      if (!s.is_array() || s.size() != static_cast<std::size_t>(m.dim()))
        return error_reply(400, "every seed needs " + std::to_string(m.dim()) + " coordinates");
      for (const auto& c : s)
        if (!c.is_number()) return error_reply(400, "seed coordinates must be numbers");
      seeds.push_back(Point::from_span(s.get<std::vector<double>>()));
    }
    if (req.contains("cycles")) {
      const json& c = req.at("cycles");
      if (c.is_string()) {
        if (c.get<std::string>() != "all") return error_reply(400, "cycles must be \"all\" or a list");
      } else if (c.is_array()) {
        for (const auto& x : c) {
          if (!x.is_number_integer()) return error_reply(400, "cycle indices must be integers");
          const auto v = x.get<long long>();
          if (v < 0 || v >= m.n_file_cycles())
            return error_reply(400, "cycle " + std::to_string(v) + " out of range [0, " +
                                        std::to_string(m.n_file_cycles() - 1) + "]");
          cycles.push_back(static_cast<int>(v));
        }
        if (cycles.empty()) return error_reply(400, "cycle list is empty");
      } else {
        return error_reply(400, "cycles must be \"all\" or a list");
      }
    }
  } catch (const json::exception& e) {
    return error_reply(400, std::string("malformed JSON: ") + e.what());
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Trajectory> trs;
  try {
    trs = infer_trajectories(m, seeds, cycles);
  } catch (const InvalidArgument& e) {
    return error_reply(400, e.what());
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  json out_trs = json::array();
  for (const auto& tr : trs) {
    json pos = json::array(), valid = json::array();
    for (std::size_t j = 0; j < tr.size(); ++j) {
      pos.push_back(point_json(tr.positions[j]));
      valid.push_back(tr.valid[j] != 0);
    }
    out_trs.push_back({{"positions", std::move(pos)}, {"valid", std::move(valid)}});
  }
  if (cycles.empty())
    for (int j = 0; j < m.n_file_cycles(); ++j) cycles.push_back(j);
  json res = {{"trajectories", std::move(out_trs)}, {"cycles", cycles}, {"inference_ms", ms}};
  return {200, res.dump()};
}

struct Server::Impl {
  const Service& service;
  ServeOptions opts;
  httplib::Server http;
  std::thread thread;

  Impl(const Service& s, ServeOptions o) : service(s), opts(std::move(o)) {
    http.set_default_headers({{"Access-Control-Allow-Origin", opts.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
    auto send = [](httplib::Response& res, const HttpReply& r) {
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    http.Get("/model/info", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, service.model_info());
    });
    http.Post("/trace", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, service.trace(req.body));
    });
    http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    http.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send(res, error_reply(res.status, httplib::status_message(res.status)));
    });
  }
};

Server::Server(const Service& service, ServeOptions opts)
    : impl_(std::make_unique<Impl>(service, std::move(opts))) {}

Server::~Server() { stop(); }

int Server::start() {
  auto& http = impl_->http;
  const auto& o = impl_->opts;
  port_ = o.port == 0 ? http.bind_to_any_port(o.host) : (http.bind_to_port(o.host, o.port) ? o.port : -1);
  if (port_ < 0) throw Error("cannot bind " + o.host + ":" + std::to_string(o.port));
  impl_->thread = std::thread([&http] { http.listen_after_bind(); });
  http.wait_until_ready();
  return port_;
}

void Server::run(const std::function<void(int)>& on_bound) {
  auto& http = impl_->http;
  const auto& o = impl_->opts;
  port_ = o.port == 0 ? http.bind_to_any_port(o.host) : (http.bind_to_port(o.host, o.port) ? o.port : -1);
  if (port_ < 0) throw Error("cannot bind " + o.host + ":" + std::to_string(o.port));
  if (on_bound) on_bound(port_);
  http.listen_after_bind();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace flowmap
