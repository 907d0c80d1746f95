#include "locfuse/ingest.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "locfuse/csv_io.hpp"
#include "locfuse/error.hpp"

namespace locfuse {

using nlohmann::json;
using nlohmann::ordered_json;

Sample parse_ingest_record(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error("record-parse", std::string("invalid json: ") + e.what());
  }
  try {
    if (!j.is_object()) throw Error("record-parse", "record must be a json object");
    Sample s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.truth.x = j.at("x").get<double>();
    s.truth.y = j.at("y").get<double>();
    s.truth.z = j.value("z", 0.0);
    s.zone_label = j.at("zone").get<std::string>();
    for (const auto& [ap_id, v] : j.at("rssi").items()) {
      s.rssi_dbm[ap_id] = v.get<double>();
    }
    if (j.contains("ranges")) {
      for (const auto& [ap_id, v] : j.at("ranges").items()) {
        s.range_m[ap_id] = v.get<double>();
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw Error("record-parse", std::string("bad record field: ") + e.what());
  }
}

std::string write_ingest_record(const Sample& sample) {
  ordered_json j;
  j["sample_id"] = sample.sample_id;
  j["x"] = sample.truth.x;
  j["y"] = sample.truth.y;
  if (sample.truth.z != 0.0) j["z"] = sample.truth.z;
  j["zone"] = sample.zone_label;
  j["rssi"] = ordered_json::object();
  for (const auto& [ap_id, v] : sample.rssi_dbm) j["rssi"][ap_id] = v;
  if (!sample.range_m.empty()) {
    j["ranges"] = ordered_json::object();
    for (const auto& [ap_id, v] : sample.range_m) j["ranges"][ap_id] = v;
  }
  return j.dump();
}

std::vector<Violation> check_record(const Sample& sample, const Scenario& scenario) {
  Dataset probe;
  probe.roster = scenario.roster;
  probe.zones = scenario.zones;
  probe.samples.push_back(sample);
  return validate_dataset(probe).violations;
}

std::vector<Sample> load_record_log(const std::string& path) {
  std::vector<Sample> samples;
  std::ifstream in(path, std::ios::binary);
  if (!in) return samples;  // absent store = empty log
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      samples.push_back(parse_ingest_record(line));
    } catch (const Error&) {
      break;  // torn tail; keep the valid prefix
    }
  }
  return samples;
}

struct IngestService::Impl {
  Scenario scenario;
  std::string store_path;

  mutable std::mutex mutex;  // guards samples + the append path
  std::vector<Sample> samples;

  httplib::Server server;
  std::thread serve_thread;
  std::atomic<bool> running{false};

  // Validate, then append one complete line and flush before acknowledging.
  // Any failure leaves the log untouched by the rejected record.
  bool append(const Sample& sample) {
    std::ofstream out(store_path, std::ios::binary | std::ios::app);
    if (!out) return false;
    const std::string line = write_ingest_record(sample) + "\n";
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.flush();
    if (!out.good()) return false;
    samples.push_back(sample);
    return true;
  }

  void route() {
    server.Post("/samples", [this](const httplib::Request& req, httplib::Response& res) {
      Sample sample;
      try {
        sample = parse_ingest_record(req.body);
      } catch (const Error& e) {
        json body;
        body["violations"] = json::array({{{"rule", e.code()}, {"detail", e.what()}}});
        res.status = 422;
        res.set_content(body.dump(), "application/json");
        return;
      }
      const auto violations = check_record(sample, scenario);
      if (!violations.empty()) {
        json body;
        body["violations"] = json::array();
        for (const Violation& v : violations) {
          body["violations"].push_back(
              {{"rule", v.rule}, {"subject", v.subject}, {"detail", v.detail}});
        }
        res.status = 422;
        res.set_content(body.dump(), "application/json");
        return;
      }
      std::lock_guard<std::mutex> lock(mutex);
      if (!append(sample)) {
        res.status = 500;
        res.set_content("storage failure\n", "text/plain");
        return;
      }
      json body;
      body["sample_id"] = sample.sample_id;
      body["count"] = samples.size();
      res.status = 201;
      res.set_content(body.dump(), "application/json");
    });

    server.Get("/samples/count", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(mutex);
      res.set_content(std::to_string(samples.size()) + "\n", "text/plain");
    });

    server.Get("/dataset", [this](const httplib::Request&, httplib::Response& res) {
      Dataset dataset;
      dataset.roster = scenario.roster;
      dataset.zones = scenario.zones;
      {
        std::lock_guard<std::mutex> lock(mutex);
        dataset.samples = samples;
      }
      res.set_content(write_dataset_csv(dataset), "text/csv");
      res.set_header("Content-Disposition", "attachment; filename=\"dataset.csv\"");
    });
  }
};

IngestService::IngestService(Scenario scenario, std::string store_path)
    : impl_(std::make_unique<Impl>()) {
  impl_->scenario = std::move(scenario);
  impl_->store_path = std::move(store_path);
  impl_->samples = load_record_log(impl_->store_path);
  impl_->route();
}

IngestService::~IngestService() { stop(); }

int IngestService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("bind-failure", "cannot bind " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw Error("bind-failure", "cannot bind " + host + ":" + std::to_string(port));
    }
  }
  impl_->running = true;
  impl_->serve_thread = std::thread([this]() { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void IngestService::stop() {
  if (impl_ && impl_->running.exchange(false)) {
    impl_->server.stop();
    impl_->serve_thread.join();
  }
}

std::size_t IngestService::count() const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  return impl_->samples.size();
}

Dataset IngestService::snapshot() const {
  Dataset dataset;
  dataset.roster = impl_->scenario.roster;
  dataset.zones = impl_->scenario.zones;
  std::lock_guard<std::mutex> lock(impl_->mutex);
  dataset.samples = impl_->samples;
  return dataset;
}

}  // namespace locfuse
