#pragma once

#include <memory>
#include <string>
#include <vector>

#include "locfuse/dataset.hpp"
#include "locfuse/propagation.hpp"
#include "locfuse/types.hpp"

namespace locfuse {

// Wire record: one JSON object per POST body,
//   {"sample_id": ..., "x": ..., "y": ..., "z"?: ..., "zone": ...,
//    "rssi": {ap_id: dBm, ...}, "ranges"?: {ap_id: m, ...}}
// Throws Error("record-parse") on malformed JSON / wrong field types.
Sample parse_ingest_record(const std::string& json_text);
std::string write_ingest_record(const Sample& sample);

// Violations of the sample against a roster + zones, reusing the dataset
// rules; empty result means accepted.
std::vector<Violation> check_record(const Sample& sample, const Scenario& scenario);

// Append-only newline-delimited record log. Loading stops at the first line
// that does not parse (torn tail after a crash) and returns the valid prefix.
std::vector<Sample> load_record_log(const std::string& path);

// HTTP ingestion service:
//   POST /samples        -> 201 and the record is appended, or 422 + violations
//   GET  /samples/count  -> plain integer
//   GET  /dataset        -> dataset CSV built from the configured roster/zones
class IngestService {
 public:
  IngestService(Scenario scenario, std::string store_path);
  ~IngestService();

  IngestService(const IngestService&) = delete;
  IngestService& operator=(const IngestService&) = delete;

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Throws Error("bind-failure") when unavailable.
  int start(const std::string& host, int port);
  void stop();

  std::size_t count() const;
  Dataset snapshot() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace locfuse
